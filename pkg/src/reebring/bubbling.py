"""State transformations: bubbles, connected sums, top restriction, windows.

Every operation takes a :class:`ReebState` and returns a new one with a log
entry that is enough for :func:`replay` to rebuild it.  New generators are
labelled ``bub<step>.<source label>`` where ``step`` is the log position of
the operation; a bubble over a bouquet shares the single ``bub<step>.top``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .catalog import (ManifoldExpr, Point, Product, Sphere, SphereBundle, cohomology_ring,
                      dimension, find_represented, format_manifold, homology, parse_manifold)
from .errors import DegreeMismatch, NoEligibleC0, NotUfg, PreconditionViolated
from .exact_algebra import CoefficientRing, GradedModule, direct_sum, dual_functional
from .graded_ring import (GradedAlgebra, Generator, Provenance, make_algebra, multiply,
                          truncate_window, wedge_algebra)
from .reeb_state import (LogEntry, ReebState, canonical_projection_base, concentric_spheres_base,
                         root_kind, special_generic_base)


@dataclass(frozen=True)
class Ingredient:
    """One manifold of a generating bouquet.

    ``k`` selects the represented class ``c_S`` of that degree (``c_label``
    picks among several); ``a`` are the coefficients of its embedding class
    against the q-marked basis in degree ``dim S - k``.
    """

    manifold: ManifoldExpr
    k: int | None = None
    c_label: str | None = None
    a: tuple = ()

    def to_args(self) -> tuple:
        return (format_manifold(self.manifold), self.k, self.c_label, tuple(self.a))

    @classmethod
    def from_args(cls, args: tuple) -> "Ingredient":
        m, k, c, a = args
        return cls(parse_manifold(m), k, c, tuple(a))


@dataclass(frozen=True)
class GeneratingData:
    ingredients: tuple
    kind: str = "S"
    disjoint: bool = True

    @classmethod
    def single(cls, manifold: ManifoldExpr, k: int | None = None, a: Sequence = (),
               c_label: str | None = None, kind: str = "S") -> "GeneratingData":
        return cls((Ingredient(manifold, k, c_label, tuple(a)),), kind)


BUBBLE_OPS = ("bubble", "ms", "thm2", "thm41", "thm42")


# ---------------------------------------------------------------------------
# provenance helpers

def _unwrap(prov: Provenance) -> tuple[str | None, Provenance]:
    """(connected-sum side or None, innermost provenance)."""
    side = None
    while prov.kind == "ConnSumSide":
        side = side or prov.get("side")
        prov = prov.get("inner")
    return side, prov


def _from_special_generic_part(prov: Provenance) -> bool:
    side, inner = _unwrap(prov)
    return side != "left" and inner.kind == "BaseSummand"


# ---------------------------------------------------------------------------
# core attachment

@dataclass
class _Attachment:
    gens: list
    homology: GradedModule
    maps: list  # per ingredient: catalog generator index -> new index
    rings: list
    top: int


def _attach(state: ReebState, ingredients: Sequence[ManifoldExpr], step: int) -> _Attachment:
    n, ring = state.n, state.ring
    gens = list(state.cohomology.generators)
    maps, rings = [], []
    added = GradedModule.from_factors(ring, n, {n: [0]})
    several = len(ingredients) > 1
    for j, S in enumerate(ingredients, 1):
        s = dimension(S)
        if s >= n:
            raise DegreeMismatch(f"ingredient {format_manifold(S)} has dimension {s} >= n = {n}")
        shift = n - s
        rS = cohomology_ring(S, ring)
        m = {}
        stem = f"bub{step}.{j}." if several else f"bub{step}."
        for i, g in enumerate(rS.generators):
            if g.degree < s:
                m[i] = len(gens)
                gens.append(Generator(g.degree + shift, g.order, stem + g.label,
                                      Provenance.make("Bubbled", step=step, ingredient=j, source=g.label)))
        maps.append(m)
        rings.append(rS)
        hS = homology(S, ring)
        added = direct_sum(added, GradedModule.from_factors(
            ring, n, {d + shift: hS.factors(d) for d in range(s)}))
    top = len(gens)
    gens.append(Generator(n, 0, f"bub{step}.top",
                          Provenance.make("Bubbled", step=step, ingredient=0, source="top")))
    for m, rS in zip(maps, rings):
        for i in rS.top_generators():
            m[i] = top
    return _Attachment(gens, direct_sum(state.homology, added), maps, rings, top)


def _forced_zero(state: ReebState, att: _Attachment) -> bool:
    """True when every new product leaves the 0..n window."""
    old = len(state.cohomology.generators)
    n = state.n
    base_min = min((g.degree for g in att.gens[1:old]), default=n + 1)
    new_min = min((g.degree for g in att.gens[old:att.top]), default=n + 1)
    return base_min + new_min > n and 2 * new_min > n


def _check_ring_hypotheses(state: ReebState, dims: Sequence[int]):
    """Raise with the failed hypothesis unless ring-level bubbling rules apply."""
    n = state.n
    if not state.ring_certified:
        raise PreconditionViolated("RingCertified", "an earlier step left the ring undefined")
    if n < 3:
        raise PreconditionViolated("TargetDimension", "ring rules need n >= 3")
    for s in dims:
        if 2 * s > n:
            raise PreconditionViolated("HalfDimension", f"2 dim S = {2 * s} > n = {n}")
    if root_kind(state) not in ("sg", "disc"):
        raise PreconditionViolated("SpecialGenericRoot", "the base is not a standard special generic map")
    for entry in state.log[1:]:
        if entry.op == "bubble":
            for ing in entry.get("ingredients"):
                if dimension(parse_manifold(ing[0])) >= n - 1:
                    raise PreconditionViolated("PriorPolyhedronDimension",
                                               f"an earlier generating polyhedron has dimension >= {n - 1}")


def _ingredient_products(state: ReebState, att: _Attachment, idx: int, ing: Ingredient) -> dict:
    """Products between base classes and the bubbled classes of one ingredient."""
    S, rS, m = ing.manifold, att.rings[idx], att.maps[idx]
    s, k = dimension(S), ing.k
    classes = [c for c in find_represented(S, k)
               if ing.c_label is None or c.label == ing.c_label]
    if not classes:
        raise PreconditionViolated("RepresentedClass", f"no certified class of degree {k} in {format_manifold(S)}")
    c_star = rS.index(classes[0].label)
    # PD(c*) in the homology basis dual to degree (s - k), then its dual class
    w_idx = rS.degree_indices(s - k)
    pd = [multiply({g: 1}, {c_star: 1}, rS).get(rS.top_generators()[0], 0) for g in w_idx]
    try:
        w_coords = dual_functional(pd, rS.orders(s - k), rS.ring)
    except NotUfg:
        raise PreconditionViolated("NotUfg", "the Poincare dual of c_S* is not a UFG") from None
    w = {m[g]: c for g, c in zip(w_idx, w_coords) if c}
    q = state.q_marked(s - k)
    a = list(ing.a) + [0] * (len(q) - len(ing.a))
    if len(a) > len(q):
        raise PreconditionViolated("CoefficientLength",
                                   f"{len(ing.a)} coefficients for a rank-{len(q)} q-marked module")
    if s - k > 0:
        for i in state.cohomology.degree_indices(s - k):
            if not _from_special_generic_part(state.cohomology.generators[i].provenance):
                raise PreconditionViolated(
                    "UnsupportedDegree",
                    f"degree {s - k} holds classes outside the special generic part")
    out = {}
    unit = m[0]
    for e, coeff in zip(q, a):
        if not coeff:
            continue
        out[(e, unit)] = {t: coeff * c for t, c in w.items()}
        out[(e, m[c_star])] = {att.top: coeff}
    return out


def _bubble(state: ReebState, data: GeneratingData, strict: bool, op: str) -> ReebState:
    step = len(state.log)
    ings = data.ingredients
    att = _attach(state, [i.manifold for i in ings], step)
    products = dict(state.cohomology.table)
    certified = state.ring_certified
    reason = state.degrade_reason
    if certified and not _forced_zero(state, att):
        try:
            _check_ring_hypotheses(state, [dimension(i.manifold) for i in ings])
            for j, ing in enumerate(ings):
                if ing.k is None:
                    raise PreconditionViolated("RepresentedClass", "no class c_S was chosen")
                products.update(_ingredient_products(state, att, j, ing))
        except PreconditionViolated as exc:
            if strict:
                raise
            certified, reason = False, exc.hypothesis
            products = dict(state.cohomology.table)
    alg = make_algebra(state.ring, state.n, att.gens, products)
    entry = LogEntry.make(op, ingredients=tuple(i.to_args() for i in ings), kind=data.kind,
                          disjoint=data.disjoint)
    out = replace(state, homology=att.homology, cohomology=alg, ring_certified=certified,
                  degrade_reason=reason, special_generic=False, log=state.log + (entry,)).check()
    if len(ings) == 1 and state.ring.kind == "Z":
        S = ings[0].manifold
        delta = out.homology.euler_characteristic() - state.homology.euler_characteristic()
        expected = (-1) ** (state.n - dimension(S)) * homology(S).euler_characteristic()
        if delta != expected:
            raise AssertionError(f"Euler bookkeeping failed: {delta} != {expected}")
    return out


def bubble_homology(state: ReebState, data: GeneratingData) -> ReebState:
    """Attach the bubbled space of a generating bouquet.

    The ring is extended when the construction certifies the product rules
    and left module-only (``ring_certified`` false) otherwise.
    """
    return _bubble(state, data, strict=False, op="bubble")


def ms_bubble_ring(state: ReebState, data: GeneratingData) -> ReebState:
    """Ring-level bubble; raises :class:`PreconditionViolated` naming the first
    hypothesis that fails instead of degrading."""
    return _bubble(state, data, strict=True, op="ms")


# ---------------------------------------------------------------------------
# parameterized bubbles

def _pick_c0(state: ReebState, kp: int, c0: str | None) -> int:
    marked = state.q_marked(kp)
    if c0 is not None:
        idx = state.cohomology.index(c0)
        if idx not in marked:
            raise NoEligibleC0(f"{c0} is not a q-marked class of degree {kp}")
        return idx
    if not marked:
        raise NoEligibleC0(f"no q-marked class of degree {kp}")
    return marked[0]


def _check_two_sphere_degrees(state: ReebState, k: int, kp: int):
    n = state.n
    if kp < 1:
        raise DegreeMismatch("k' must be positive")
    if k < 1:
        raise DegreeMismatch("k must be positive: S^0 is not connected")
    if 2 * kp > n:
        raise DegreeMismatch(f"2k' = {2 * kp} > n = {n}")
    if 2 * (k + kp) > n:
        raise DegreeMismatch(f"k + k' = {k + kp} > n/2")


def _pair_bubble(state: ReebState, S: ManifoldExpr, k: int, kp: int, r: int, c0: str | None,
                 entry: LogEntry, low: str, mid: str, zero_products: bool = False) -> ReebState:
    """Attach ``S`` (an ``S^k``-bundle over ``S^k'``) with the two-term product
    rules: ``c0 * bub(1) = r * bub(low)`` and ``c0 * bub(mid) = r * top``."""
    _check_two_sphere_degrees(state, k, kp)
    c = _pick_c0(state, kp, c0)
    _check_ring_hypotheses(state, [dimension(S)])
    step = len(state.log)
    att = _attach(state, [S], step)
    m, rS = att.maps[0], att.rings[0]
    products = dict(state.cohomology.table)
    if r and not zero_products:
        rd = state.ring.reduce(r)
        if low in rS.labels:
            products[(c, m[0])] = {m[rS.index(low)]: rd}
        if mid in rS.labels:
            products[(c, m[rS.index(mid)])] = {att.top: rd}
    alg = make_algebra(state.ring, state.n, att.gens, products)
    return replace(state, homology=att.homology, cohomology=alg, special_generic=False,
                   log=state.log + (entry,)).check()


def thm2_bubble(state: ReebState, k: int, kp: int, r0: int, c0: str | None = None) -> ReebState:
    """Bubble along ``S^k' x S^k`` adding ``R`` in degrees n-k-k', n-k', n-k, n,
    with ``c0 * (n-k-k') = r0 * (n-k)`` and ``c0 * (n-k') = r0 * top``."""
    entry = LogEntry.make("thm2", k=k, kp=kp, r0=r0, c0=c0)
    S = Product(Sphere(kp), Sphere(k))
    return _pair_bubble(state, S, k, kp, r0, c0, entry, f"(S{kp},1)", f"(1,S{k})")


def _check_twisted(state: ReebState, kp: int, refined: bool):
    if kp < 2 or kp % 2:
        raise DegreeMismatch("k' must be even and >= 2")
    if refined and kp not in (2, 4, 8):
        raise PreconditionViolated("RefinedDimension", "the refined clause needs k' in {2, 4, 8}")


def thm41_twisted_bubble(state: ReebState, kp: int, r0: int, refined: bool = False,
                         r_prime: int = 0, c0: str | None = None) -> ReebState:
    """Bubble along the ``S^(k'-1)``-bundle over ``S^k'`` of Euler number
    ``2 r0`` (``r0`` when refined).  Integer coefficients only."""
    if state.ring.kind != "Z":
        raise PreconditionViolated("IntegerCoefficients", "the twisted bubble is stated over Z")
    _check_twisted(state, kp, refined)
    k = kp - 1
    entry = LogEntry.make("thm41", kp=kp, r0=r0, refined=refined, rprime=r_prime, c0=c0)
    if r0 == 0:
        S = Product(Sphere(kp), Sphere(k))
        return _pair_bubble(state, S, k, kp, r_prime, c0, entry, f"(S{kp},1)", f"(1,S{k})")
    e = r0 if refined else 2 * r0
    return _pair_bubble(state, SphereBundle(kp, k, e), k, kp, 0, c0, entry, "t", "x",
                        zero_products=True)


def thm42_bubble(state: ReebState, kp: int, p: int, r_p: int, refined: bool = False,
                 c0: str | None = None) -> ReebState:
    """Bubble along the bundle of Euler number ``2p`` over ``Z/2p`` (``p`` over
    ``Z/p`` when refined); every new degree is ``R``."""
    if p < 1:
        raise PreconditionViolated("PositiveP", "p must be >= 1")
    e = p if refined else 2 * p
    if refined and p < 2:
        raise PreconditionViolated("RefinedP", "the refined clause needs p > 1")
    if state.ring.kind != "Zmod" or state.ring.modulus != e:
        raise PreconditionViolated("RingMismatch", f"coefficients must be Z/{e}")
    _check_twisted(state, kp, refined)
    k = kp - 1
    entry = LogEntry.make("thm42", kp=kp, p=p, rp=r_p, refined=refined, c0=c0)
    return _pair_bubble(state, SphereBundle(kp, k, e), k, kp, r_p, c0, entry, "t", "x")


# ---------------------------------------------------------------------------
# connected sums

def _is_trivial(state: ReebState) -> bool:
    return len(state.cohomology.generators) == 1


def connected_sum_states(f: ReebState, f1: ReebState) -> ReebState:
    """Connected sum of the maps behind ``f`` and ``f1``.

    The Reeb space is the wedge: positive degrees add, products across the
    two sides vanish.  The log and the q-markers continue those of ``f1``.
    """
    if f.n != f1.n or f.ring != f1.ring:
        raise DegreeMismatch("connected sum needs equal n and coefficient ring")
    entry = LogEntry.make("connsum", partner=f.log)
    if _is_trivial(f):
        return replace(f1, log=f1.log + (entry,)).check()
    if _is_trivial(f1):
        out = replace(f, q_markers=frozenset(), log=f1.log + (entry,))
        return _rewrap(out, "left").check()
    sides = []
    for side, st in (("left", f), ("right", f1)):
        alg = st.cohomology
        gens = [g if i == 0 else g.relabel(("L:" if side == "left" else "R:") + g.label,
                                           Provenance.make("ConnSumSide", side=side, inner=g.provenance))
                for i, g in enumerate(alg.generators)]
        sides.append(GradedAlgebra(alg.ring, alg.top_degree, tuple(gens), alg.table))
    alg = wedge_algebra(sides, f.n, prefixes=["", ""])
    module = direct_sum(f1.homology, GradedModule.from_factors(
        f.ring, f.n, {d: f.homology.factors(d) for d in range(1, f.n + 1)}))
    markers = frozenset("R:" + q for q in f1.q_markers)
    return ReebState(f.n, f.ring, module, alg, markers, f.ring_certified and f1.ring_certified,
                     f1.log + (entry,)).check()


def _rewrap(state: ReebState, side: str) -> ReebState:
    alg = state.cohomology
    gens = [g if i == 0 else g.relabel(None, Provenance.make("ConnSumSide", side=side, inner=g.provenance))
            for i, g in enumerate(alg.generators)]
    return replace(state, cohomology=GradedAlgebra(alg.ring, alg.top_degree, tuple(gens), alg.table),
                   special_generic=False)


# ---------------------------------------------------------------------------
# top-degree restriction

def _check_restriction_log(state: ReebState):
    if root_kind(state) not in ("sg", "disc"):
        raise PreconditionViolated("SpecialGenericRoot", "the log does not start at a special generic map")
    seen_connsum = False
    for entry in state.log[1:]:
        if entry.op == "connsum":
            if seen_connsum:
                raise PreconditionViolated("SingleConnectedSum", "more than one connected sum")
            seen_connsum = True
            continue
        if entry.op == "restrict-top":
            continue
        if entry.op != "bubble" or seen_connsum:
            raise PreconditionViolated("SBubblesOnly", f"step {entry.op} is not an S-bubble before the connected sum")
        if entry.get("kind") != "S" or not entry.get("disjoint"):
            raise PreconditionViolated("DisjointSBubbles", "bubbles must be disjoint S-bubbles")
    types = {_preimage_type(e) for e in state.log[1:] if e.op == "bubble"}
    if len(types) > 1:
        raise PreconditionViolated("PreimageType", "bubbles have different preimage types")


def _preimage_type(entry: LogEntry) -> str:
    return entry.get("preimage", "sphere")


def thm5_restrict_top(state: ReebState, target_rank: int) -> ReebState:
    """Keep ``target_rank`` of the bubbled top classes and drop the rest.

    Lower degrees are untouched; products onto a dropped class become zero.
    """
    _check_restriction_log(state)
    alg = state.cohomology
    eligible = []
    for i in alg.top_generators():
        side, inner = _unwrap(alg.generators[i].provenance)
        if side != "left" and inner.kind == "Bubbled":
            eligible.append(i)
    if not 1 <= target_rank <= len(eligible):
        raise DegreeMismatch(f"target rank {target_rank} outside 1..{len(eligible)}")
    drop = set(eligible[target_rank:])
    keep = [i for i in range(len(alg.generators)) if i not in drop]
    index = {old: new for new, old in enumerate(keep)}
    products = {}
    for (i, j), val in alg.table.items():
        if i in index and j in index:
            products[(index[i], index[j])] = {index[t]: c for t, c in val if t in index}
    new_alg = make_algebra(state.ring, state.n, [alg.generators[i] for i in keep], products)
    factors = {d: state.homology.factors(d) for d in range(state.n)}
    factors[state.n] = (0,) * (state.homology.rank(state.n) - len(drop))
    module = GradedModule.from_factors(state.ring, state.n, factors)
    entry = LogEntry.make("restrict-top", rank=target_rank)
    return replace(state, homology=module, cohomology=new_alg, log=state.log + (entry,)).check()


# ---------------------------------------------------------------------------
# consumers on the source manifold

def manifold_window(state: ReebState, m: int, special_generic: bool = False) -> GradedAlgebra:
    """The part of the Reeb-space ring that injects into the source manifold
    of dimension ``m``: degrees up to ``m - n - 1`` (``m - n`` for a special
    generic map)."""
    n = state.n
    if m <= n:
        raise DegreeMismatch(f"m = {m} must exceed n = {n}")
    if special_generic and not state.special_generic:
        raise PreconditionViolated("SpecialGeneric", "the state is not the Reeb space of a special generic map")
    maxdeg = m - n if special_generic else m - n - 1
    return truncate_window(state.cohomology, min(maxdeg, n))


def rank_doubling_prediction(state: ReebState, m: int | None = None) -> int:
    """Rank of ``H_n`` of a ``2n``-dimensional source manifold: twice the
    rank of ``H_n`` of the Reeb space."""
    n = state.n
    if m is None:
        m = 2 * n
    if m != 2 * n:
        raise DegreeMismatch(f"rank doubling needs m = 2n = {2 * n}")
    if state.homology.torsion_factors(n - 1):
        raise PreconditionViolated("FreeHnMinus1", f"H_{n - 1} has torsion")
    return 2 * state.homology.rank(n)


# ---------------------------------------------------------------------------
# replay

def base_from_entry(entry: LogEntry) -> ReebState:
    ring = CoefficientRing.parse(entry.get("ring", "Z"))
    kind, n = entry.get("kind"), entry.get("n")
    if kind == "sg":
        return special_generic_base([parse_manifold(s) for s in entry.get("summands")], n, ring)
    if kind == "concentric":
        return concentric_spheres_base(entry.get("l"), n, ring)
    if kind == "disc":
        return canonical_projection_base(n, ring)
    raise ValueError(f"unknown base kind {kind!r}")


def apply_entry(state: ReebState, entry: LogEntry) -> ReebState:
    op = entry.op
    if op in ("bubble", "ms"):
        data = GeneratingData(tuple(Ingredient.from_args(a) for a in entry.get("ingredients")),
                              entry.get("kind"), entry.get("disjoint"))
        return (bubble_homology if op == "bubble" else ms_bubble_ring)(state, data)
    if op == "thm2":
        return thm2_bubble(state, entry.get("k"), entry.get("kp"), entry.get("r0"), entry.get("c0"))
    if op == "thm41":
        return thm41_twisted_bubble(state, entry.get("kp"), entry.get("r0"), entry.get("refined"),
                                    entry.get("rprime"), entry.get("c0"))
    if op == "thm42":
        return thm42_bubble(state, entry.get("kp"), entry.get("p"), entry.get("rp"),
                            entry.get("refined"), entry.get("c0"))
    if op == "connsum":
        return connected_sum_states(replay(entry.get("partner")), state)
    if op == "restrict-top":
        return thm5_restrict_top(state, entry.get("rank"))
    raise ValueError(f"unknown log entry {op!r}")


def replay(log: Sequence[LogEntry]) -> ReebState:
    state = base_from_entry(log[0])
    for entry in log[1:]:
        state = apply_entry(state, entry)
    return state
