"""The Reeb-space record threaded through every construction step."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .catalog import (ManifoldExpr, Sphere, Product, cohomology_ring, dimension, format_manifold,
                      homology, is_cps, represented_classes)
from .errors import DegreeMismatch, PreconditionViolated
from .exact_algebra import (CoefficientRing, GradedModule, cohomology_from_homology, direct_sum,
                            is_isomorphic)
from .graded_ring import (UNIT, GradedAlgebra, Generator, Provenance, make_algebra, point_ring,
                          wedge_algebra, retag)


@dataclass(frozen=True)
class LogEntry:
    op: str
    args: tuple = ()  # sorted (key, value) pairs

    @classmethod
    def make(cls, op: str, **args) -> "LogEntry":
        return cls(op, tuple(sorted(args.items())))

    def get(self, key, default=None):
        return dict(self.args).get(key, default)

    def __str__(self):
        return self.op + "(" + ", ".join(f"{k}={v}" for k, v in self.args) + ")"


@dataclass(frozen=True)
class HomologyGenerator:
    degree: int
    order: int
    label: str
    provenance: Provenance


@dataclass(frozen=True)
class ReebState:
    n: int
    ring: CoefficientRing
    homology: GradedModule
    cohomology: GradedAlgebra
    q_markers: frozenset = frozenset()
    ring_certified: bool = True
    log: tuple = ()
    special_generic: bool = False  # the Reeb space itself is a special generic one (a manifold)
    degrade_reason: str | None = None  # first hypothesis that left the ring undefined

    @property
    def module_only(self) -> bool:
        return not self.ring_certified

    def betti(self) -> list[int]:
        return self.homology.betti()

    def q_marked(self, degree: int) -> list[int]:
        alg = self.cohomology
        return [i for i in alg.degree_indices(degree) if alg.generators[i].label in self.q_markers]

    def homology_generators(self) -> list[HomologyGenerator]:
        """Homology generators read off the cohomology presentation.

        Free classes share labels with their dual cohomology generators.  Over
        the integers a cohomology torsion class in degree d comes from a
        homology torsion class in degree d-1.
        """
        out = []
        integral = self.ring.kind == "Z"
        for g in self.cohomology.generators:
            if g.order and integral:
                out.append(HomologyGenerator(g.degree - 1, g.order, f"h:{g.label}", g.provenance))
            else:
                out.append(HomologyGenerator(g.degree, g.order, g.label, g.provenance))
        return sorted(out, key=lambda h: h.degree)

    def with_log(self, entry: LogEntry, **changes) -> "ReebState":
        return replace(self, log=self.log + (entry,), **changes).check()

    def check(self) -> "ReebState":
        if self.homology.top_degree != self.n or self.cohomology.top_degree != self.n:
            raise AssertionError("state degrees must run 0..n")
        if self.homology.factors(0) != (0,):
            raise AssertionError("H_0 must be R")
        if self.homology.ring != self.ring or self.cohomology.ring != self.ring:
            raise AssertionError("coefficient ring mismatch")
        if not is_isomorphic(cohomology_from_homology(self.homology), self.cohomology.module):
            raise AssertionError("homology and cohomology are not UCT-consistent")
        alg = self.cohomology
        for label in self.q_markers:
            g = alg.generators[alg.index(label)]
            if g.order != 0 or g.degree == 0:
                raise AssertionError(f"q-marker {label} is not a free positive-degree class")
        for g in alg.generators:
            if not isinstance(g.provenance, Provenance):
                raise AssertionError(f"generator {g.label} lacks provenance")
        return self


def _base_module(ring: CoefficientRing, n: int, parts: Sequence[GradedModule]) -> GradedModule:
    out = GradedModule.from_factors(ring, n, {0: [0]})
    for part in parts:
        positive = {d: part.factors(d) for d in range(1, part.top_degree + 1)}
        out = direct_sum(out, GradedModule.from_factors(ring, n, positive))
    return out


def special_generic_base(summands: Sequence[ManifoldExpr], n: int,
                         ring: CoefficientRing = CoefficientRing.Z()) -> ReebState:
    """Reeb space of a standard special generic map: a boundary connected sum
    of ``summand x D^(n - dim)`` pieces, homotopy equivalent to the bouquet of
    the summands."""
    for j, s in enumerate(summands, 1):
        if not is_cps(s):
            raise PreconditionViolated("CpsSummand", f"summand {j} ({format_manifold(s)}) is not CPS")
        if dimension(s) >= n:
            raise DegreeMismatch(f"summand {j} has dimension {dimension(s)} >= n = {n}")
    entry = LogEntry.make("base", kind="sg", n=n, ring=str(ring),
                          summands=tuple(format_manifold(s) for s in summands))
    if not summands:
        alg = point_ring(ring, n)
        return ReebState(n, ring, _base_module(ring, n, []), alg, frozenset(), True, (entry,),
                         special_generic=True).check()
    rings = []
    markers = set()
    for j, s in enumerate(summands, 1):
        r = cohomology_ring(s, ring)
        prefix = f"b{j}."
        prov = [UNIT] + [Provenance.make("BaseSummand", index=j)] * (len(r.generators) - 1)
        rings.append(retag(r, [prefix + g.label if i else g.label for i, g in enumerate(r.generators)], prov))
        for c in represented_classes(s):
            if c.degree > 0 and (isinstance(s, (Sphere, Product))):
                markers.add(prefix + c.label)
    alg = wedge_algebra(rings, n, prefixes=[""] * len(rings))
    module = _base_module(ring, n, [homology(s, ring) for s in summands])
    return ReebState(n, ring, module, alg, frozenset(markers), True, (entry,),
                     special_generic=True).check()


def concentric_spheres_base(l: int, n: int, ring: CoefficientRing = CoefficientRing.Z()) -> ReebState:
    """Reeb space homotopy equivalent to a bouquet of ``l`` copies of ``S^n``."""
    if l < 0:
        raise ValueError("l must be >= 0")
    gens = [Generator(0, 0, "1", UNIT)] + [
        Generator(n, 0, f"s{i}", Provenance.make("BaseSummand", index=i)) for i in range(1, l + 1)]
    alg = make_algebra(ring, n, gens)
    module = GradedModule.from_factors(ring, n, {0: [0], n: [0] * l})
    entry = LogEntry.make("base", kind="concentric", n=n, l=l, ring=str(ring))
    return ReebState(n, ring, module, alg, frozenset(), True, (entry,)).check()


def canonical_projection_base(n: int, ring: CoefficientRing = CoefficientRing.Z()) -> ReebState:
    """Reeb space of the canonical projection of a unit sphere: a disc."""
    entry = LogEntry.make("base", kind="disc", n=n, ring=str(ring))
    return ReebState(n, ring, GradedModule.from_factors(ring, n, {0: [0]}), point_ring(ring, n),
                     frozenset(), True, (entry,), special_generic=True).check()


def root_kind(state: ReebState) -> str:
    return state.log[0].get("kind") if state.log else "unknown"
