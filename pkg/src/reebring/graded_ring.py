"""Graded commutative algebras stored as structure constants.

A :class:`GradedAlgebra` keeps one generator per cyclic summand of each
degree (generator 0 is the unit) and a sparse table of generator products.
Elements are sparse dicts ``{generator index: coefficient}``.  Products past
``top_degree`` are zero by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DegreeMismatch, PreconditionViolated, TorsionKunneth
from .exact_algebra import (CoefficientRing, GradedModule, is_ufg_presentation,
                            normalize_factors)

Element = dict  # generator index -> coefficient


@dataclass(frozen=True)
class Provenance:
    kind: str
    attrs: tuple = ()

    @classmethod
    def make(cls, kind: str, **attrs) -> "Provenance":
        return cls(kind, tuple(sorted(attrs.items())))

    def get(self, key, default=None):
        return dict(self.attrs).get(key, default)

    def __str__(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in self.attrs)
        return f"{self.kind}({inner})"


UNIT = Provenance("Unit")


@dataclass(frozen=True)
class Generator:
    degree: int
    order: int  # 0 = free
    label: str
    provenance: Provenance = Provenance("Catalog")

    def relabel(self, label: str | None = None, provenance: Provenance | None = None) -> "Generator":
        return Generator(self.degree, self.order, label if label is not None else self.label,
                         provenance if provenance is not None else self.provenance)


@dataclass(frozen=True)
class GradedAlgebra:
    ring: CoefficientRing
    top_degree: int
    generators: tuple[Generator, ...]
    table: Mapping[tuple[int, int], tuple[tuple[int, object], ...]] = field(default_factory=dict)

    # -- structure -----------------------------------------------------------

    def degree_indices(self, d: int) -> list[int]:
        return [i for i, g in enumerate(self.generators) if g.degree == d]

    def orders(self, d: int) -> list[int]:
        return [self.generators[i].order for i in self.degree_indices(d)]

    @property
    def module(self) -> GradedModule:
        return GradedModule.from_factors(
            self.ring, self.top_degree,
            {d: self.orders(d) for d in range(self.top_degree + 1)})

    def index(self, label: str) -> int:
        for i, g in enumerate(self.generators):
            if g.label == label:
                return i
        raise KeyError(label)

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.generators]

    def top_generators(self) -> list[int]:
        return self.degree_indices(self.top_degree)

    # -- elements ------------------------------------------------------------

    def reduce(self, x: Mapping[int, object]) -> Element:
        out = {}
        for i, c in x.items():
            c = self.ring.reduce(c, self.generators[i].order)
            if c:
                out[i] = c
        return dict(sorted(out.items()))

    def elem(self, coeffs: Mapping[str, object] | str) -> Element:
        if isinstance(coeffs, str):
            coeffs = {coeffs: 1}
        return self.reduce({self.index(k): v for k, v in coeffs.items()})

    def coordinates(self, x: Mapping[int, object], d: int) -> tuple:
        idx = self.degree_indices(d)
        return tuple(self.ring.reduce(x.get(i, 0), self.generators[i].order) for i in idx)

    def from_coordinates(self, d: int, coords: Sequence) -> Element:
        return self.reduce(dict(zip(self.degree_indices(d), coords)))

    def element_degrees(self, x: Mapping[int, object]) -> set[int]:
        return {self.generators[i].degree for i, c in x.items() if c}

    def mul_gens(self, i: int, j: int) -> Element:
        if i == 0:
            return {j: self.ring.reduce(1, self.generators[j].order)} if self.ring.reduce(
                1, self.generators[j].order) else {}
        if j == 0:
            return {i: self.ring.reduce(1, self.generators[i].order)} if self.ring.reduce(
                1, self.generators[i].order) else {}
        if self.generators[i].degree + self.generators[j].degree > self.top_degree:
            return {}
        return dict(self.table.get((i, j), ()))

    def is_ufg_element(self, x: Mapping[int, object]) -> bool:
        degs = self.element_degrees(x)
        if len(degs) != 1:
            return False
        d = degs.pop()
        return is_ufg_presentation(self.coordinates(x, d), self.orders(d), self.ring)

    # -- invariants ----------------------------------------------------------

    def check(self) -> "GradedAlgebra":
        """Assert unit, window, torsion, Koszul sign and associativity rules."""
        gens = self.generators
        if not gens or gens[0].degree != 0 or gens[0].order != 0:
            raise AssertionError("generator 0 must be the free degree-0 unit")
        if len(self.degree_indices(0)) != 1:
            raise AssertionError("degree-0 module must be R")
        for g in gens:
            if not 0 <= g.degree <= self.top_degree:
                raise AssertionError(f"generator {g.label} outside the degree window")
        if len(set(self.labels)) != len(gens):
            raise AssertionError("generator labels must be unique")
        for (i, j), val in self.table.items():
            if i == 0 or j == 0:
                raise AssertionError("unit products are implicit")
            deg = gens[i].degree + gens[j].degree
            if deg > self.top_degree and val:
                raise AssertionError("product past top_degree must vanish")
            for k, c in val:
                if gens[k].degree != deg:
                    raise AssertionError(f"product {gens[i].label}*{gens[j].label} has wrong degree")
        pos = range(1, len(gens))
        for i in pos:
            for j in pos:
                lhs = self.mul_gens(j, i)
                sign = -1 if gens[i].degree * gens[j].degree % 2 else 1
                rhs = self.reduce({k: sign * c for k, c in self.mul_gens(i, j).items()})
                if self.reduce(lhs) != rhs:
                    raise AssertionError(f"Koszul sign fails for {gens[i].label}, {gens[j].label}")
                q = gens[i].order
                if q and self.reduce({k: q * c for k, c in self.mul_gens(i, j).items()}):
                    raise AssertionError(f"product with torsion {gens[i].label} not killed by {q}")
        for i in pos:
            for j in pos:
                if gens[i].degree + gens[j].degree > self.top_degree:
                    continue
                ij = self.mul_gens(i, j)
                for k in pos:
                    if gens[i].degree + gens[j].degree + gens[k].degree > self.top_degree:
                        continue
                    left = multiply(ij, {k: 1}, self)
                    right = multiply({i: 1}, self.mul_gens(j, k), self)
                    if left != right:
                        raise AssertionError(
                            f"associativity fails on {gens[i].label},{gens[j].label},{gens[k].label}")
        return self


def make_algebra(ring: CoefficientRing, top_degree: int, generators: Sequence[Generator],
                 products: Mapping[tuple[int, int], Mapping[int, object]] | None = None,
                 check: bool = True) -> GradedAlgebra:
    """Build an algebra, completing the table by graded commutativity."""
    gens = tuple(generators)
    table: dict[tuple[int, int], dict] = {}
    for (i, j), val in (products or {}).items():
        if i == 0 or j == 0:
            continue
        if gens[i].degree + gens[j].degree > top_degree:
            continue
        table[(i, j)] = dict(val)
    for (i, j), val in list(table.items()):
        if (j, i) not in table:
            sign = -1 if gens[i].degree * gens[j].degree % 2 else 1
            table[(j, i)] = {k: sign * c for k, c in val.items()}
    clean = {}
    for key, val in table.items():
        red = {}
        for k, c in val.items():
            c = ring.reduce(c, gens[k].order)
            if c:
                red[k] = c
        if red:
            clean[key] = tuple(sorted(red.items()))
    alg = GradedAlgebra(ring, top_degree, gens, dict(sorted(clean.items())))
    return alg.check() if check else alg


def multiply(x: Mapping[int, object], y: Mapping[int, object], algebra: GradedAlgebra) -> Element:
    """Bilinear extension of the generator table."""
    out: dict[int, object] = {}
    for i, a in x.items():
        if not a:
            continue
        for j, b in y.items():
            if not b:
                continue
            for k, c in algebra.mul_gens(i, j).items():
                out[k] = out.get(k, 0) + a * b * c
    return algebra.reduce(out)


# ---------------------------------------------------------------------------
# basic rings


def point_ring(ring: CoefficientRing, top_degree: int = 0) -> GradedAlgebra:
    return make_algebra(ring, top_degree, [Generator(0, 0, "1", UNIT)])


def sphere_ring(d: int, ring: CoefficientRing, label: str | None = None) -> GradedAlgebra:
    if d < 1:
        raise DegreeMismatch("sphere dimension must be >= 1")
    return make_algebra(ring, d, [Generator(0, 0, "1", UNIT),
                                  Generator(d, 0, label or f"S{d}")])


def _remap(alg: GradedAlgebra, index_map: Mapping[int, int]) -> dict:
    out: dict[tuple[int, int], dict] = {}
    for (i, j), val in alg.table.items():
        if i not in index_map or j not in index_map:
            continue
        target: dict[int, object] = {}
        for k, c in val:
            if k in index_map:
                target[index_map[k]] = target.get(index_map[k], 0) + c
        out[(index_map[i], index_map[j])] = target
    return out


def _has_torsion(alg: GradedAlgebra) -> bool:
    return any(g.order for g in alg.generators)


# ---------------------------------------------------------------------------
# constructors


def kunneth_product(a: GradedAlgebra, b: GradedAlgebra) -> GradedAlgebra:
    if a.ring != b.ring:
        raise DegreeMismatch("rings differ")
    if (_has_torsion(a) or _has_torsion(b)) and not a.ring.is_field:
        raise TorsionKunneth()
    pairs = sorted(((ga.degree + gb.degree, i, j)
                    for i, ga in enumerate(a.generators)
                    for j, gb in enumerate(b.generators)))
    index = {(i, j): n for n, (_, i, j) in enumerate(pairs)}
    gens = []
    for _, i, j in pairs:
        la, lb = a.generators[i].label, b.generators[j].label
        gens.append(Generator(a.generators[i].degree + b.generators[j].degree, 0,
                              "1" if (i, j) == (0, 0) else f"({la},{lb})",
                              UNIT if (i, j) == (0, 0) else Provenance("Catalog")))
    products = {}
    for (i, j), p in index.items():
        for (k, l), q in index.items():
            if p == 0 or q == 0:
                continue
            sign = -1 if b.generators[j].degree * a.generators[k].degree % 2 else 1
            left, right = a.mul_gens(i, k), b.mul_gens(j, l)
            val = {}
            for s, cs in left.items():
                for t, ct in right.items():
                    val[index[(s, t)]] = val.get(index[(s, t)], 0) + sign * cs * ct
            if val:
                products[(p, q)] = val
    return make_algebra(a.ring, a.top_degree + b.top_degree, gens, products)


def _single_top(alg: GradedAlgebra, n: int) -> int:
    if alg.top_degree != n:
        raise DegreeMismatch(f"expected top degree {n}, got {alg.top_degree}")
    tops = alg.top_generators()
    if len(tops) != 1 or alg.generators[tops[0]].order != 0:
        raise DegreeMismatch("connected sum needs a single free top class")
    return tops[0]


def _check_rank_symmetry(alg: GradedAlgebra, n: int):
    m = alg.module
    for d in range(n + 1):
        if m.rank(d) != m.rank(n - d):
            raise DegreeMismatch(f"ranks in degrees {d} and {n - d} differ")


def connected_sum_algebra(a: GradedAlgebra, b: GradedAlgebra, n: int) -> GradedAlgebra:
    if a.ring != b.ring:
        raise DegreeMismatch("rings differ")
    ta, tb = _single_top(a, n), _single_top(b, n)
    _check_rank_symmetry(a, n)
    _check_rank_symmetry(b, n)
    gens = [Generator(0, 0, "1", UNIT)]
    maps = []
    for side, alg, top in (("L", a, ta), ("R", b, tb)):
        m = {0: 0}
        for i, g in enumerate(alg.generators):
            if 0 < g.degree < n:
                m[i] = len(gens)
                gens.append(g.relabel(f"{side}:{g.label}"))
        maps.append((alg, m, top))
    top_index = len(gens)
    gens.append(Generator(n, 0, "[top]", Provenance("Catalog")))
    products: dict = {}
    for alg, m, top in maps:
        m[top] = top_index
        for key, val in _remap(alg, m).items():
            acc = products.setdefault(key, {})
            for k, c in val.items():
                acc[k] = acc.get(k, 0) + c
    return make_algebra(a.ring, n, gens, products)


def wedge_algebra(summands: Sequence[GradedAlgebra], n: int,
                  prefixes: Sequence[str] | None = None) -> GradedAlgebra:
    """Shared unit, positive-degree parts summed, cross-summand products zero."""
    if not summands:
        raise ValueError("wedge of an empty list; use point_ring")
    ring = summands[0].ring
    all_labels = [g.label for s in summands for g in s.generators[1:]]
    if prefixes is None and len(set(all_labels)) != len(all_labels):
        prefixes = [f"w{i}." for i in range(len(summands))]
    gens = [Generator(0, 0, "1", UNIT)]
    products: dict = {}
    for idx, alg in enumerate(summands):
        if alg.ring != ring:
            raise DegreeMismatch("rings differ")
        if alg.top_degree > n:
            raise DegreeMismatch(f"summand {idx} has degrees above {n}")
        m = {0: 0}
        for i, g in enumerate(alg.generators):
            if i == 0:
                continue
            m[i] = len(gens)
            gens.append(g.relabel((prefixes[idx] if prefixes else "") + g.label))
        products.update(_remap(alg, m))
    return make_algebra(ring, n, gens, products)


def truncate_window(alg: GradedAlgebra, maxdeg: int) -> GradedAlgebra:
    if not 0 <= maxdeg <= alg.top_degree:
        raise DegreeMismatch(f"window {maxdeg} outside 0..{alg.top_degree}")
    keep = [i for i, g in enumerate(alg.generators) if g.degree <= maxdeg]
    m = {old: new for new, old in enumerate(keep)}
    return make_algebra(alg.ring, maxdeg, [alg.generators[i] for i in keep], _remap(alg, m))


def retag(alg: GradedAlgebra, labels: Sequence[str] | None = None,
          provenances: Sequence[Provenance] | None = None) -> GradedAlgebra:
    gens = [g.relabel(labels[i] if labels else None, provenances[i] if provenances else None)
            for i, g in enumerate(alg.generators)]
    return GradedAlgebra(alg.ring, alg.top_degree, tuple(gens), alg.table)


# ---------------------------------------------------------------------------
# UFG product closure


@dataclass(frozen=True)
class Pass:
    def __bool__(self):
        return True


@dataclass(frozen=True)
class Witness:
    left: tuple  # sorted (index, coeff) pairs
    right: tuple
    product: tuple
    degrees: tuple[int, int]

    def __bool__(self):
        return False

    def describe(self, alg: GradedAlgebra) -> dict:
        def fmt(x):
            return {alg.generators[i].label: str(c) for i, c in x}
        return {"left": fmt(self.left), "right": fmt(self.right),
                "product": fmt(self.product), "degrees": list(self.degrees)}


def _box_values(C: int, order: int, ring: CoefficientRing) -> list:
    raw = [0]
    for v in range(1, C + 1):
        raw += [v, -v]
    out, seen = [], set()
    for v in raw:
        r = ring.reduce(v, order)
        if r not in seen:
            seen.add(r)
            out.append(v)
    return out


def primitive_elements(alg: GradedAlgebra, d: int, C: int, basis_only: bool = False) -> list[Element]:
    idx = alg.degree_indices(d)
    orders = alg.orders(d)
    if not idx:
        return []
    if basis_only:
        cands = [tuple(int(i == j) for j in range(len(idx))) for i in range(len(idx))]
    else:
        cands = itertools.product(*[_box_values(C, q, alg.ring) for q in orders])
    out = []
    for coords in cands:
        if any(coords) and is_ufg_presentation(coords, orders, alg.ring):
            x = alg.from_coordinates(d, coords)
            if x:
                out.append(x)
    return out


def _pairing_nonzero(alg: GradedAlgebra, d1: int, d2: int) -> bool:
    return any(alg.mul_gens(i, j) for i in alg.degree_indices(d1) for j in alg.degree_indices(d2))


def ufg_closure_check(alg: GradedAlgebra, n: int, C: int = 2, basis_only: bool = False):
    """Search for UFGs ``x, y`` with ``deg x + deg y < n`` whose product is
    nonzero and not a UFG.  Returns :class:`Pass` or the first :class:`Witness`.

    Coordinates range over ``[-C, C]``; ``basis_only`` restricts the search
    to generator basis vectors.
    """
    if C < 1:
        raise PreconditionViolated("BoundTooSmall", "C must be >= 1")
    cache: dict[int, list[Element]] = {}
    for d1 in range(1, n):
        for d2 in range(d1, n - d1):
            if d1 + d2 > alg.top_degree or not _pairing_nonzero(alg, d1, d2):
                continue
            for d in (d1, d2):
                if d not in cache:
                    cache[d] = primitive_elements(alg, d, C, basis_only)
            for x in cache[d1]:
                for y in cache[d2]:
                    p = multiply(x, y, alg)
                    if p and not alg.is_ufg_element(p):
                        return Witness(tuple(x.items()), tuple(y.items()), tuple(p.items()), (d1, d2))
    return Pass()


def euler_characteristic(alg: GradedAlgebra) -> int:
    return alg.module.euler_characteristic()


def free_ranks(alg: GradedAlgebra) -> list[int]:
    return alg.module.betti()


def normalized_module_factors(alg: GradedAlgebra) -> dict[int, tuple[int, ...]]:
    return {d: normalize_factors(alg.orders(d), alg.ring) for d in range(alg.top_degree + 1)}
