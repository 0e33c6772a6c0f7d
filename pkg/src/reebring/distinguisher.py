"""Invariants that separate cohomology rings, and the non-realizability certificate."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .catalog import Point, Sphere, dimension, parse_manifold
from .errors import DegreeMismatch, PreconditionViolated, ReebError
from .exact_algebra import CoefficientRing, change_coefficients, invariant_factors_of, is_isomorphic
from .graded_ring import GradedAlgebra, Pass, Witness, ufg_closure_check
from .reeb_state import ReebState


# ---------------------------------------------------------------------------
# pairing profiles

def _free(alg: GradedAlgebra, d: int) -> list[int]:
    return [i for i in alg.degree_indices(d) if alg.generators[i].order == 0]


def _integral(row: list) -> list[int]:
    den = 1
    for c in row:
        if isinstance(c, Fraction):
            den = lcm(den, c.denominator)
    return [int(c * den) for c in row]


def pairing_matrix(alg: GradedAlgebra, i: int, j: int) -> list[list]:
    """Rows: pairs of free generators of degrees ``i`` and ``j``; columns:
    free generators of degree ``i + j``.  Torsion targets are dropped."""
    targets = _free(alg, i + j)
    rows = []
    for a in _free(alg, i):
        for b in _free(alg, j):
            prod = alg.mul_gens(a, b)
            rows.append([prod.get(t, 0) for t in targets])
    return rows


def pairing_factors(alg: GradedAlgebra, i: int, j: int) -> tuple:
    rows = pairing_matrix(alg, i, j)
    ring = alg.ring
    if not rows or not rows[0]:
        return ()
    diag = invariant_factors_of([_integral(r) for r in rows])
    if ring.kind == "Q":
        return (1,) * len(diag)
    if ring.kind == "Zmod":
        n = ring.modulus
        return tuple(sorted(gcd(d, n) for d in diag if gcd(d, n) != n))
    return tuple(diag)


def product_profile(alg: GradedAlgebra) -> dict:
    """``(i, j) -> invariant factors`` of the pairing ``H^i x H^j -> H^(i+j)``
    on free parts, for ``1 <= i <= j`` and ``i + j <= top``."""
    out = {}
    for i in range(1, alg.top_degree + 1):
        for j in range(i, alg.top_degree + 1 - i):
            if _free(alg, i) and _free(alg, j) and _free(alg, i + j):
                out[(i, j)] = pairing_factors(alg, i, j)
    return out


# ---------------------------------------------------------------------------
# distinguishing

@dataclass(frozen=True)
class Distinguished:
    invariant: str
    detail: str

    def __bool__(self):
        return True


@dataclass(frozen=True)
class InvariantsAgree:
    compared: tuple = ()

    def __bool__(self):
        return False


def invariants(state: ReebState, closure_bound: int = 1) -> dict:
    out = {
        "homology": state.homology.as_dict(),
        "cohomology": state.cohomology.module.as_dict(),
        "ring_certified": state.ring_certified,
    }
    if state.ring_certified:
        out["product_profile"] = product_profile(state.cohomology)
        out["ufg_closure"] = isinstance(ufg_closure_check(state.cohomology, state.n, closure_bound), Pass)
    return out


def _compare_modules(name: str, a: dict, b: dict):
    for d in sorted(set(a) | set(b)):
        if a.get(d, ()) != b.get(d, ()):
            return Distinguished(name, f"degree {d}: {list(a.get(d, ()))} vs {list(b.get(d, ()))}")
    return None


def distinguish(a: ReebState, b: ReebState, closure_bound: int = 1):
    """Compare computed invariants; a mismatch separates the rings, agreement
    proves nothing.  Ring-level invariants are skipped when either ring is
    undefined."""
    if a.n != b.n or a.ring != b.ring:
        raise DegreeMismatch("distinguish needs equal n and coefficient ring")
    ia, ib = invariants(a, closure_bound), invariants(b, closure_bound)
    compared = []
    for name in ("homology", "cohomology"):
        verdict = _compare_modules(name, ia[name], ib[name])
        if verdict:
            return verdict
        compared.append(name)
    if not (a.ring_certified and b.ring_certified):
        return InvariantsAgree(tuple(compared))
    pa, pb = ia["product_profile"], ib["product_profile"]
    for key in sorted(set(pa) | set(pb)):
        if pa.get(key, ()) != pb.get(key, ()):
            return Distinguished("product_profile",
                                 f"{key}: {list(pa.get(key, ()))} vs {list(pb.get(key, ()))}")
    compared.append("product_profile")
    if ia["ufg_closure"] != ib["ufg_closure"]:
        which = "first" if not ia["ufg_closure"] else "second"
        return Distinguished("ufg_closure", f"only the {which} ring has a non-UFG product of UFGs")
    compared.append("ufg_closure")
    return InvariantsAgree(tuple(compared))


# ---------------------------------------------------------------------------
# non-realizability certificate

@dataclass(frozen=True)
class Certified:
    witness: Witness
    detail: str = ""

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotApplicable:
    reason: str

    def __bool__(self):
        return False


def thm3_certificate(state: ReebState, bound: int = 2):
    """Certify that no finite chain of sphere/point bubbles from the state
    before the last step reproduces this ring.

    The argument: the starting ring has the UFG-product closure property,
    sphere and point bubbles whose dimension ``d`` leaves degree ``n - d`` of
    the base empty keep that property, and the final two-sphere bubble with
    ``|r0| > 1`` breaks it.  Each ingredient of that argument is checked
    from the log; anything unverifiable gives :class:`NotApplicable`.
    """
    from .bubbling import base_from_entry

    n, ring = state.n, state.ring
    if ring.identity_has_finite_order:
        return NotApplicable("the identity of R has finite order")
    if not state.ring_certified:
        return NotApplicable("the ring is not certified")
    log = state.log
    if not log or log[0].op != "base" or log[0].get("kind") not in ("sg", "disc"):
        return NotApplicable("the base is not a standard special generic map")
    if len(log) < 2 or log[-1].op != "thm2":
        return NotApplicable("the last step is not a two-sphere product bubble")
    base = base_from_entry(log[0])
    a0 = base.cohomology
    for entry in log[1:-1]:
        if entry.op == "connsum":
            partner = entry.get("partner")
            if not (len(partner) == 1 and partner[0].get("kind") == "disc"):
                return NotApplicable("connected sum with a map other than a canonical projection")
            continue
        if entry.op not in ("bubble", "ms"):
            return NotApplicable(f"step {entry.op} is not a sphere or point bubble")
        for ing in entry.get("ingredients"):
            m = parse_manifold(ing[0])
            if not isinstance(m, (Point, Sphere)):
                return NotApplicable("a generating manifold is neither a sphere nor a point")
            d = dimension(m)
            if d > 0 and a0.degree_indices(n - d):
                return NotApplicable(f"degree {n - d} of the base ring is nonzero")
    if not isinstance(ufg_closure_check(a0, n, bound), Pass):
        return NotApplicable("the base ring fails UFG-product closure")
    last = log[-1]
    if last.get("k") <= 0:
        return NotApplicable("k > 0 fails")
    if abs(last.get("r0")) <= 1:
        return NotApplicable("|r0| > 1 fails")
    witness = ufg_closure_check(state.cohomology, n, bound)
    if not isinstance(witness, Witness):
        return NotApplicable("no UFG-closure witness in the target ring")
    return Certified(witness, f"degrees {witness.degrees}")


# ---------------------------------------------------------------------------
# coefficient sensitivity

@dataclass(frozen=True)
class RingVerdict:
    ring: str
    verdict: object
    methods: tuple  # how each side was evaluated: "direct" or "uct"
    uct_consistent: tuple  # per side: True/False, or None if unchecked

    def as_dict(self) -> dict:
        v = self.verdict
        out = {"ring": self.ring, "methods": list(self.methods),
               "uct_consistent": list(self.uct_consistent)}
        if isinstance(v, Distinguished):
            out.update(verdict="Distinguished", invariant=v.invariant, detail=v.detail)
        else:
            out.update(verdict="InvariantsAgree", compared=list(v.compared))
        return out


def _module_state(state: ReebState, ring: CoefficientRing) -> ReebState:
    """A module-only stand-in carrying the reduced homology of an integral state."""
    from dataclasses import replace
    from .exact_algebra import cohomology_from_homology
    from .graded_ring import Generator, UNIT, Provenance, make_algebra

    h = change_coefficients(state.homology, ring)
    coh = cohomology_from_homology(h)
    gens = [Generator(0, 0, "1", UNIT)]
    for d in range(1, state.n + 1):
        for t, q in enumerate(coh.factors(d)):
            gens.append(Generator(d, q, f"u{d}.{t}", Provenance("Reduced")))
    alg = make_algebra(ring, state.n, gens)
    return replace(state, ring=ring, homology=h, cohomology=alg, q_markers=frozenset(),
                   ring_certified=False, degrade_reason="reduced from integer coefficients")


def coefficient_sensitivity(script_a, script_b, rings: Sequence[CoefficientRing]) -> list[RingVerdict]:
    """Per-ring verdicts.  A script that cannot be evaluated directly over a
    ring is evaluated over Z and reduced by universal coefficients."""
    from .dsl import evaluate

    out = []
    integral = []
    for script in (script_a, script_b):
        try:
            integral.append(evaluate(script, coeff=CoefficientRing.Z()).state)
        except ReebError:
            integral.append(None)
    for ring in rings:
        sides, methods, checks = [], [], []
        for script, z in zip((script_a, script_b), integral):
            try:
                st = evaluate(script, coeff=ring).state
                methods.append("direct")
                checks.append(None if z is None else is_isomorphic(change_coefficients(z.homology, ring),
                                                                   st.homology))
            except ReebError as exc:
                if z is None or not isinstance(getattr(exc, "error", exc), PreconditionViolated):
                    raise
                st = _module_state(z, ring)
                methods.append("uct")
                checks.append(None)
            sides.append(st)
        out.append(RingVerdict(str(ring), distinguish(*sides), tuple(methods), tuple(checks)))
    return out
