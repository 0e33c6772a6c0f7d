"""Brute-force verification on explicit complexes.

Ordered simplicial complexes give homology by Smith normal form of boundary
matrices and cohomology rings by Alexander-Whitney cup products on explicit
cocycle representatives.  Small CW chain complexes cover the twisted sphere
bundles, which have no handy triangulation.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .catalog import ConnSum, ManifoldExpr, Point, Product, Sphere, SphereBundle, dimension
from .errors import BudgetExceeded, DegreeMismatch, PreconditionViolated
from .exact_algebra import (CoefficientRing, GradedModule, change_coefficients, invariant_factors_of,
                            is_isomorphic)
from .graded_ring import UNIT, GradedAlgebra, Generator, Provenance, make_algebra

DEFAULT_BUDGET = 200_000
BUDGET_ENV = "RBS_ORACLE_BUDGET"


def simplex_budget() -> int:
    return int(os.environ.get(BUDGET_ENV, DEFAULT_BUDGET))


# ---------------------------------------------------------------------------
# simplicial complexes

@dataclass(frozen=True)
class SimplicialComplex:
    """Vertices are the integers ``0..n-1`` in their natural order; every
    simplex is stored as an increasing tuple."""

    n_vertices: int
    maximal: frozenset

    @classmethod
    def from_simplices(cls, simplices: Iterable[Iterable]) -> "SimplicialComplex":
        """Relabel arbitrary sortable vertex labels to ``0..n-1`` preserving order."""
        simplices = [tuple(sorted(set(s))) for s in simplices]
        labels = sorted({v for s in simplices for v in s})
        index = {v: i for i, v in enumerate(labels)}
        cleaned = {tuple(index[v] for v in s) for s in simplices if s}
        maximal = _maximal(cleaned)
        return cls(len(labels), frozenset(maximal))

    @cached_property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.maximal), default=-1)

    @cached_property
    def _faces(self) -> dict[int, list[tuple]]:
        out: dict[int, set] = {}
        for s in self.maximal:
            for r in range(1, len(s) + 1):
                for f in itertools.combinations(s, r):
                    out.setdefault(r - 1, set()).add(f)
        return {d: sorted(fs) for d, fs in out.items()}

    def faces(self, d: int) -> list[tuple]:
        return self._faces.get(d, [])

    def all_simplices(self) -> list[tuple]:
        return [f for d in sorted(self._faces) for f in self._faces[d]]

    def size(self) -> int:
        return sum(len(v) for v in self._faces.values())

    def f_vector(self) -> list[int]:
        return [len(self.faces(d)) for d in range(self.dimension + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * c for d, c in enumerate(self.f_vector()))

    def boundary_matrix(self, d: int) -> list[list[int]]:
        """``d_d : C_d -> C_{d-1}`` as a dense ``n_{d-1} x n_d`` matrix."""
        rows, cols = self.faces(d - 1), self.faces(d)
        index = {f: i for i, f in enumerate(rows)}
        mat = [[0] * len(cols) for _ in rows]
        if d <= 0:
            return mat
        for j, s in enumerate(cols):
            for i in range(len(s)):
                mat[index[s[:i] + s[i + 1:]]][j] += -1 if i % 2 else 1
        return mat

    def induced(self, vertices: Iterable[int]) -> list[tuple]:
        vs = set(vertices)
        return [f for f in self.all_simplices() if set(f) <= vs]


def _maximal(simplices: set) -> set:
    sets = sorted(simplices, key=len, reverse=True)
    kept: list[tuple] = []
    kept_sets: list[frozenset] = []
    for s in sets:
        fs = frozenset(s)
        if not any(fs < k for k in kept_sets if len(k) > len(fs)):
            if fs not in kept_sets:
                kept.append(s)
                kept_sets.append(fs)
    return set(kept)


def sphere_complex(d: int) -> SimplicialComplex:
    """Boundary of the ``(d+1)``-simplex."""
    if d < 0:
        raise DegreeMismatch("sphere dimension must be >= 0")
    return SimplicialComplex.from_simplices(itertools.combinations(range(d + 2), d + 1))


def disc_complex(d: int) -> SimplicialComplex:
    return SimplicialComplex.from_simplices([range(d + 1)])


def point_complex() -> SimplicialComplex:
    return SimplicialComplex.from_simplices([(0,)])


def product_complex(a: SimplicialComplex, b: SimplicialComplex) -> SimplicialComplex:
    """Staircase triangulation: vertex ``(x, y)`` numbered ``x * |B| + y``."""
    nb = b.n_vertices
    out = []
    for s in a.maximal:
        for t in b.maximal:
            p, q = len(s) - 1, len(t) - 1
            for steps in itertools.combinations(range(p + q), p):
                i = j = 0
                path = [(s[0], t[0])]
                stepset = set(steps)
                for k in range(p + q):
                    if k in stepset:
                        i += 1
                    else:
                        j += 1
                    path.append((s[i], t[j]))
                out.append(tuple(x * nb + y for x, y in path))
    return SimplicialComplex.from_simplices(out)


def _disjoint_union(parts: Sequence[SimplicialComplex]) -> tuple[list[tuple], list[int]]:
    simplices, offsets, off = [], [], 0
    for p in parts:
        offsets.append(off)
        simplices.extend(tuple(v + off for v in s) for s in p.maximal)
        off += p.n_vertices
    return simplices, offsets


def wedge_complex(parts: Sequence[SimplicialComplex]) -> SimplicialComplex:
    """Identify vertex 0 of every part."""
    if not parts:
        return point_complex()
    simplices, offsets = _disjoint_union(parts)
    roots = set(offsets)
    return SimplicialComplex.from_simplices(
        tuple(0 if v in roots else v for v in s) for s in simplices)


def cone_complex(a: SimplicialComplex) -> SimplicialComplex:
    apex = a.n_vertices
    return SimplicialComplex.from_simplices([s + (apex,) for s in a.maximal] or [(apex,)])


def cone_on_subcomplex(k: SimplicialComplex, sub: Iterable[tuple]) -> SimplicialComplex:
    """Attach a cone over the subcomplex spanned by ``sub`` (a new last vertex)."""
    apex = k.n_vertices
    return SimplicialComplex.from_simplices(list(k.maximal) + [tuple(s) + (apex,) for s in sub])


def glue_complex(a: SimplicialComplex, b: SimplicialComplex,
                 matching: Mapping[int, int]) -> SimplicialComplex:
    """Glue ``b`` to ``a`` identifying vertex ``v`` of ``b`` with ``matching[v]``.

    The matched vertices must span full subcomplexes of both sides and the
    matching must carry one onto the other.
    """
    if len(set(matching.values())) != len(matching):
        raise PreconditionViolated("GlueMatching", "matching is not injective")
    lb = {frozenset(s) for s in b.induced(matching.keys())}
    la = {frozenset(s) for s in a.induced(matching.values())}
    image = {frozenset(matching[v] for v in s) for s in lb}
    if image != la:
        raise PreconditionViolated("GlueMatching", "matching is not an isomorphism of full subcomplexes")
    off = a.n_vertices
    relabel = {v: (matching[v] if v in matching else v + off) for v in range(b.n_vertices)}
    simplices = list(a.maximal) + [tuple(relabel[v] for v in s) for s in b.maximal]
    return SimplicialComplex.from_simplices(simplices)


def connected_sum_complex(a: SimplicialComplex, b: SimplicialComplex,
                          avoid_a: Iterable[int] = (), avoid_b: Iterable[int] = ()) -> SimplicialComplex:
    """Delete one top simplex from each side (avoiding the given vertices)
    and identify the two boundaries."""
    if a.dimension != b.dimension:
        raise DegreeMismatch("connected sum of complexes of different dimension")
    d = a.dimension
    sa = _pick_top(a, set(avoid_a))
    sb = _pick_top(b, set(avoid_b))
    off = a.n_vertices
    relabel = {v: v + off for v in range(b.n_vertices)}
    for x, y in zip(sb, sa):
        relabel[x] = y
    simplices = [s for s in a.maximal if s != sa]
    simplices += [tuple(relabel[v] for v in s) for s in b.maximal if s != sb]
    out = SimplicialComplex.from_simplices(simplices)
    if len(out.faces(d)) != len(a.faces(d)) + len(b.faces(d)) - 2:
        raise PreconditionViolated("ConnectedSum", "boundary identification collapsed simplices")
    return out


def _pick_top(k: SimplicialComplex, avoid: set) -> tuple:
    for s in k.faces(k.dimension):
        if not set(s) & avoid:
            return s
    raise PreconditionViolated("ConnectedSum", "no top simplex avoids the protected vertices")


def manifold_complex(m: ManifoldExpr) -> SimplicialComplex:
    if isinstance(m, Point):
        return point_complex()
    if isinstance(m, Sphere):
        return sphere_complex(m.d)
    if isinstance(m, Product):
        return product_complex(manifold_complex(m.left), manifold_complex(m.right))
    if isinstance(m, ConnSum):
        return connected_sum_complex(manifold_complex(m.left), manifold_complex(m.right))
    raise PreconditionViolated("SimplicialModel", f"no simplicial model for {m!r}")


# ---------------------------------------------------------------------------
# text export

def export_complex(k: SimplicialComplex) -> str:
    lines = [f"vertices {k.n_vertices}", "simplices"]
    lines += [" ".join(map(str, s)) for s in sorted(k.maximal)]
    return "\n".join(lines) + "\n"


def import_complex(text: str) -> SimplicialComplex:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("vertices") or lines[1] != "simplices":
        raise ValueError("expected 'vertices N' and 'simplices' headers")
    n = int(lines[0].split()[1])
    simplices = [tuple(int(x) for x in ln.split()) for ln in lines[2:]]
    k = SimplicialComplex.from_simplices(simplices)
    if k.n_vertices != n:
        raise ValueError(f"header says {n} vertices, simplices use {k.n_vertices}")
    return k


# ---------------------------------------------------------------------------
# homology

def _homology_from_boundaries(counts: Sequence[int], boundaries: Mapping[int, list]) -> dict:
    ranks = {}
    factors = {}
    for d, mat in boundaries.items():
        f = invariant_factors_of(mat) if mat and mat[0] else []
        ranks[d] = len(f)
        factors[d] = f
    out = {}
    for d, c in enumerate(counts):
        free = c - ranks.get(d, 0) - ranks.get(d + 1, 0)
        out[d] = [0] * free + [q for q in factors.get(d + 1, []) if q > 1]
    return out


def homology_of(k: SimplicialComplex, ring: CoefficientRing = CoefficientRing.Z(),
                top_degree: int | None = None) -> GradedModule:
    top = k.dimension if top_degree is None else top_degree
    counts = k.f_vector()
    boundaries = {d: k.boundary_matrix(d) for d in range(1, k.dimension + 1)}
    z = GradedModule.from_factors(CoefficientRing.Z(), max(top, 0), _homology_from_boundaries(counts, boundaries))
    return change_coefficients(z, ring)


@dataclass(frozen=True)
class CwChainComplex:
    """Cell counts per degree and boundary matrices ``d -> (n_{d-1} x n_d)``."""

    cells: tuple
    boundaries: tuple = ()  # sorted (degree, matrix as tuple of tuples)

    @classmethod
    def make(cls, cells: Sequence[int], boundaries: Mapping[int, Sequence[Sequence[int]]]) -> "CwChainComplex":
        cw = cls(tuple(cells), tuple(sorted((d, tuple(map(tuple, m))) for d, m in boundaries.items())))
        return cw.check()

    def boundary(self, d: int) -> list[list[int]]:
        m = dict(self.boundaries).get(d)
        if m is not None:
            return [list(r) for r in m]
        rows = self.cells[d - 1] if 0 < d <= len(self.cells) else 0
        cols = self.cells[d] if d < len(self.cells) else 0
        return [[0] * cols for _ in range(rows)]

    def check(self) -> "CwChainComplex":
        for d, m in self.boundaries:
            if len(m) != self.cells[d - 1] or any(len(r) != self.cells[d] for r in m):
                raise PreconditionViolated("CwShape", f"boundary {d} has the wrong shape")
        for d in range(2, len(self.cells)):
            a, b = self.boundary(d - 1), self.boundary(d)
            for i in range(len(a)):
                for j in range(self.cells[d]):
                    if sum(a[i][t] * b[t][j] for t in range(len(b))):
                        raise PreconditionViolated("BoundarySquared", f"d{d - 1} o d{d} != 0")
        return self


def cw_homology(cw: CwChainComplex, ring: CoefficientRing = CoefficientRing.Z(),
                top_degree: int | None = None) -> GradedModule:
    top = len(cw.cells) - 1 if top_degree is None else top_degree
    boundaries = {d: cw.boundary(d) for d in range(1, len(cw.cells))}
    z = GradedModule.from_factors(CoefficientRing.Z(), top, _homology_from_boundaries(cw.cells, boundaries))
    return change_coefficients(z, ring)


def sphere_bundle_cw(base_dim: int, fiber_dim: int, euler: int) -> CwChainComplex:
    """Cells in degrees 0, k, k', k+k'; with ``k = k'-1`` the only nonzero
    boundary sends the ``k'``-cell to ``euler`` times the ``k``-cell."""
    kp, k = base_dim, fiber_dim
    if euler and k != kp - 1:
        raise DegreeMismatch("a nonzero Euler number needs fiber dimension base_dim - 1")
    top = k + kp
    cells = [0] * (top + 1)
    for d in (0, k, kp, top):
        cells[d] += 1
    boundaries = {}
    if euler:
        boundaries[kp] = [[euler]]
    return CwChainComplex.make(cells, boundaries)


def shift_cw(cw: CwChainComplex, shift: int, top_degree: int) -> CwChainComplex:
    """The cofiber of ``X x {*} -> X x S^shift``: a new 0-cell plus every
    cell of ``X`` raised by ``shift``."""
    cells = [0] * (top_degree + 1)
    cells[0] = 1
    for d, c in enumerate(cw.cells):
        if d + shift > top_degree:
            raise DegreeMismatch("shifted cells exceed the top degree")
        cells[d + shift] += c
    boundaries = {}
    for d, m in cw.boundaries:
        if d - 1 + shift > 0:
            boundaries[d + shift] = [list(r) for r in m]
    return CwChainComplex.make(cells, boundaries)


def wedge_cw(parts: Sequence[CwChainComplex]) -> CwChainComplex:
    """Wedge at the 0-cell; each part must have a single 0-cell."""
    top = max(len(p.cells) for p in parts) - 1
    cells = [0] * (top + 1)
    cells[0] = 1
    offsets = []
    for p in parts:
        if p.cells[0] != 1:
            raise PreconditionViolated("CwWedge", "parts must have one 0-cell")
        offsets.append([cells[d] if d else 0 for d in range(top + 1)])
        for d in range(1, len(p.cells)):
            cells[d] += p.cells[d]
    boundaries = {d: [[0] * cells[d] for _ in range(cells[d - 1])] for d in range(1, top + 1)}
    for p, off in zip(parts, offsets):
        for d, m in p.boundaries:
            if d == 1:
                continue
            for i, row in enumerate(m):
                for j, v in enumerate(row):
                    boundaries[d][off[d - 1] + i][off[d] + j] = v
    return CwChainComplex.make(cells, {d: m for d, m in boundaries.items() if any(any(r) for r in m)})


def sphere_cw(d: int) -> CwChainComplex:
    cells = [0] * (d + 1)
    cells[0] += 1
    cells[d] += 1
    return CwChainComplex.make(cells, {})


# ---------------------------------------------------------------------------
# Smith normal form with inverse transforms

def _snf_full(matrix: Sequence[Sequence[int]]):
    """``(diag, L, L^-1, R, R^-1)`` with ``L M R`` diagonal, divisibility aside.

    Unit pivots are taken first; only the Smith diagonal's multiset matters
    to callers, so the chain condition is restored cheaply at the end.
    """
    a = [list(map(int, r)) for r in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    ident = lambda n: [[int(i == j) for j in range(n)] for i in range(n)]
    L, Li, R, Ri = ident(rows), ident(rows), ident(cols), ident(cols)

    def row_add(dst, src, q):
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        L[dst] = [x + q * y for x, y in zip(L[dst], L[src])]
        for r in Li:
            r[src] -= q * r[dst]

    def col_add(dst, src, q):
        for r in a:
            if r[src]:
                r[dst] += q * r[src]
        for r in R:
            if r[src]:
                r[dst] += q * r[src]
        Ri[src] = [x - q * y for x, y in zip(Ri[src], Ri[dst])]

    def row_swap(i, j):
        if i == j:
            return
        a[i], a[j] = a[j], a[i]
        L[i], L[j] = L[j], L[i]
        for r in Li:
            r[i], r[j] = r[j], r[i]

    def col_swap(i, j):
        if i == j:
            return
        for m in (a, R):
            for r in m:
                r[i], r[j] = r[j], r[i]
        Ri[i], Ri[j] = Ri[j], Ri[i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        L[i] = [-x for x in L[i]]
        for r in Li:
            r[i] = -r[i]

    def find_pivot(t):
        best = None
        for i in range(t, rows):
            row = a[i]
            for j in range(t, cols):
                v = row[j]
                if v:
                    if v in (1, -1):
                        return i, j
                    if best is None or abs(v) < abs(a[best[0]][best[1]]):
                        best = (i, j)
        return best

    rank = 0
    for t in range(min(rows, cols)):
        while True:
            piv = find_pivot(t)
            if piv is None:
                break
            row_swap(t, piv[0])
            col_swap(t, piv[1])
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    row_add(i, t, -(a[i][t] // p))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, cols):
                if a[t][j]:
                    col_add(j, t, -(a[t][j] // p))
                    dirty = dirty or a[t][j] != 0
            if dirty:
                continue
            if abs(p) != 1:
                bad = next((i for i in range(t + 1, rows)
                            if any(a[i][j] % p for j in range(t + 1, cols))), None)
                if bad is not None:
                    row_add(t, bad, 1)
                    continue
            break
        if a[t][t] == 0:
            break
        if a[t][t] < 0:
            row_neg(t)
        rank += 1
    diag = [a[i][i] for i in range(min(rows, cols))]
    return diag, L, Li, R, Ri


def _apply(m: list[list[int]], v: Sequence[int]) -> list[int]:
    return [sum(x * y for x, y in zip(row, v) if x) for row in m]


# ---------------------------------------------------------------------------
# cup products

@dataclass
class _CohomologyDegree:
    gens: list  # cocycles (lists over d-simplices)
    orders: list
    kernel_start: int
    Ri: list
    L2: list

    def coordinates(self, cochain: Sequence[int]) -> list[int]:
        x = _apply(self.Ri, cochain)[self.kernel_start:]
        y = _apply(self.L2, x) if self.L2 else x
        out = []
        for idx, q in self.index_orders:
            c = y[idx]
            out.append(c % q if q else c)
        return out


def _cohomology_degree(k: SimplicialComplex, d: int) -> _CohomologyDegree:
    nd = len(k.faces(d))
    if nd == 0:
        return _empty_degree()
    delta_d = _transpose(k.boundary_matrix(d + 1)) if k.faces(d + 1) else []
    if delta_d:
        diag, _, _, R, Ri = _snf_full(delta_d)
        r = sum(1 for x in diag if x)
    else:
        R = Ri = [[int(i == j) for j in range(nd)] for i in range(nd)]
        r = 0
    kernel = [[R[i][j] for i in range(nd)] for j in range(r, nd)]  # basis cochains
    m = nd - r
    if d > 0 and k.faces(d - 1):
        delta_prev = _transpose(k.boundary_matrix(d))  # n_d x n_{d-1}
        C = [row for row in _matmul(Ri, delta_prev)[r:]]
    else:
        C = [[] for _ in range(m)]
    if C and C[0]:
        diag2, L2, L2i, _, _ = _snf_full(C)
    else:
        diag2, L2 = [], [[int(i == j) for j in range(m)] for i in range(m)]
        L2i = L2
    orders = [diag2[i] if i < len(diag2) else 0 for i in range(m)]
    index_orders = [(i, q) for i, q in enumerate(orders) if q != 1]
    gens = []
    for i, _ in index_orders:
        col = [L2i[t][i] for t in range(m)]
        gens.append([sum(kernel[t][s] * col[t] for t in range(m)) for s in range(nd)])
    deg = _CohomologyDegree(gens, [q for _, q in index_orders], r, Ri, L2)
    deg.index_orders = index_orders
    return deg


def _empty_degree():
    deg = _CohomologyDegree([], [], 0, [], [])
    deg.index_orders = []
    return deg


def _transpose(m):
    return [list(r) for r in zip(*m)] if m else []


def _matmul(a, b):
    bt = _transpose(b)
    return [[sum(x * y for x, y in zip(row, col) if x) for col in bt] for row in a]


def cup_product_ring(k: SimplicialComplex, ring: CoefficientRing = CoefficientRing.Z()) -> GradedAlgebra:
    """Integral cohomology ring from explicit cocycles and AW products.

    Generator ``c<d>.<i>`` is the ``i``-th cyclic summand in degree ``d``.
    Over Q torsion is dropped; over Z/n the integral ring must be torsion
    free and is reduced mod n, except for prime n where mod-p cocycles are
    used directly.
    """
    top = k.dimension
    degs = [_cohomology_degree(k, d) for d in range(top + 1)]
    gens = []
    where = {}
    for d, dd in enumerate(degs):
        for i, q in enumerate(dd.orders):
            where[(d, i)] = len(gens)
            label = "1" if d == 0 and q == 0 and i == 0 else f"c{d}.{i}"
            gens.append(Generator(d, q, label, UNIT if label == "1" else Provenance("Oracle")))
    if gens[0].label != "1":
        raise PreconditionViolated("Connected", "complex is not connected")
    products = {}
    for (p, i), gi in where.items():
        if p == 0:
            continue
        for (q, j), gj in where.items():
            if q == 0 or p + q > top:
                continue
            alpha, beta = degs[p].gens[i], degs[q].gens[j]
            fp = {f: t for t, f in enumerate(k.faces(p))}
            fq = {f: t for t, f in enumerate(k.faces(q))}
            cochain = []
            for s in k.faces(p + q):
                cochain.append(alpha[fp[s[:p + 1]]] * beta[fq[s[p:]]])
            coords = degs[p + q].coordinates(cochain)
            products[(gi, gj)] = {where[(p + q, t)]: c for t, c in enumerate(coords) if c}
    integral = make_algebra(CoefficientRing.Z(), top, gens, products)
    if ring.kind == "Z":
        return integral
    if ring.kind == "Zmod" and any(g.order for g in gens):
        if _is_prime(ring.modulus):
            return _field_cup_ring(k, ring)
        raise PreconditionViolated("TorsionFree", "mod-n cup products need torsion-free integral cohomology "
                                                  "or a prime modulus")
    keep = [i for i, g in enumerate(gens) if g.order == 0]
    index = {old: new for new, old in enumerate(keep)}
    prods = {(index[i], index[j]): {index[t]: c for t, c in v if t in index}
             for (i, j), v in integral.table.items() if i in index and j in index}
    return make_algebra(ring, top, [gens[i] for i in keep], prods)


def _is_prime(p: int) -> bool:
    return p > 1 and all(p % q for q in range(2, int(p ** 0.5) + 1))


def _echelon_mod(rows: list[list[int]], p: int) -> list[tuple[int, list[int]]]:
    """Reduced row echelon basis of the span of ``rows`` over F_p, as (pivot, row)."""
    basis: list[tuple[int, list[int]]] = []
    for row in rows:
        v = [x % p for x in row]
        for piv, b in basis:
            if v[piv]:
                c = v[piv]
                v = [(x - c * y) % p for x, y in zip(v, b)]
        lead = next((i for i, x in enumerate(v) if x), None)
        if lead is None:
            continue
        inv = pow(v[lead], -1, p)
        v = [x * inv % p for x in v]
        basis = [(piv, [(x - b[lead] * y) % p for x, y in zip(b, v)]) for piv, b in basis]
        basis.append((lead, v))
    return basis


def _nullspace_mod(matrix: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    ech = _echelon_mod(matrix, p)
    pivots = {piv: row for piv, row in ech}
    out = []
    for free in range(ncols):
        if free in pivots:
            continue
        v = [0] * ncols
        v[free] = 1
        for piv, row in pivots.items():
            v[piv] = -row[free] % p
        out.append(v)
    return out


def _field_cup_ring(k: SimplicialComplex, ring: CoefficientRing) -> GradedAlgebra:
    """Cup products over the prime field ``F_p`` from mod-p cocycles."""
    p, top = ring.modulus, k.dimension
    reps, spans = [], []
    for d in range(top + 1):
        nd = len(k.faces(d))
        delta = _transpose(k.boundary_matrix(d + 1)) if d < top and k.faces(d + 1) else []
        cocycles = _nullspace_mod(delta, nd, p) if delta else [[int(i == j) for j in range(nd)]
                                                                for i in range(nd)]
        bounds = [list(r) for r in k.boundary_matrix(d)] if d > 0 else []
        ech = _echelon_mod(bounds, p)
        bspan = [row for _, row in ech]
        h = []
        for z in cocycles:
            grown = _echelon_mod([r for _, r in ech] + [z], p)
            if len(grown) > len(ech):
                ech = grown
                h.append(z)
        reps.append(h)
        spans.append(bspan + h)
    gens, where = [], {}
    for d, h in enumerate(reps):
        for i in range(len(h)):
            where[(d, i)] = len(gens)
            label = "1" if d == 0 and i == 0 else f"c{d}.{i}"
            gens.append(Generator(d, 0, label, UNIT if label == "1" else Provenance("Oracle")))
    if len(reps[0]) != 1:
        raise PreconditionViolated("Connected", "complex is not connected")
    products = {}
    for (a, i), gi in where.items():
        for (b, j), gj in where.items():
            if a == 0 or b == 0 or a + b > top:
                continue
            fa = {f: t for t, f in enumerate(k.faces(a))}
            fb = {f: t for t, f in enumerate(k.faces(b))}
            cochain = [reps[a][i][fa[s[:a + 1]]] * reps[b][j][fb[s[a:]]] % p for s in k.faces(a + b)]
            coords = _solve_mod(spans[a + b], cochain, p)
            nb = len(spans[a + b]) - len(reps[a + b])
            products[(gi, gj)] = {where[(a + b, t)]: c for t, c in enumerate(coords[nb:]) if c}
    return make_algebra(ring, top, gens, products)


def _solve_mod(rows: list[list[int]], v: list[int], p: int) -> list[int]:
    """Coefficients ``c`` with ``sum c_i rows_i = v`` over F_p (rows independent)."""
    m = len(rows)
    # eliminate on the transposed system [rows^T | v]
    aug = [[rows[i][s] % p for i in range(m)] + [v[s] % p] for s in range(len(v))]
    ech = _echelon_mod(aug, p)
    out = [0] * m
    for piv, row in ech:
        if piv == m:
            raise AssertionError("cochain is not a cocycle")
        out[piv] = row[m]
    return out


# ---------------------------------------------------------------------------
# bubble models

def _bubble_piece(S: ManifoldExpr, n: int):
    """``S x S^(n - dim S)`` with the section ``S x {v0}`` as a vertex set."""
    s_model = manifold_complex(S)
    s = dimension(S)
    if s >= n:
        raise DegreeMismatch("ingredient dimension must be below n")
    sph = sphere_complex(n - s)
    x = product_complex(s_model, sph)
    nb = sph.n_vertices
    section = {v * nb for v in range(s_model.n_vertices)}
    return x, section


def _edge_path(k: SimplicialComplex, sources: set, targets: set) -> list[tuple]:
    adj: dict[int, set] = {}
    for e in k.faces(1):
        adj.setdefault(e[0], set()).add(e[1])
        adj.setdefault(e[1], set()).add(e[0])
    prev = {v: None for v in sources}
    queue = deque(sources)
    while queue:
        v = queue.popleft()
        if v in targets:
            path = []
            while prev[v] is not None:
                path.append(tuple(sorted((v, prev[v]))))
                v = prev[v]
            return path
        for w in adj.get(v, ()):
            if w not in prev:
                prev[w] = v
                queue.append(w)
    raise PreconditionViolated("Connected", "sections lie in different components")


def prop3_model(n: int, ingredients: Sequence[ManifoldExpr]) -> SimplicialComplex:
    """The disc with the bubbled space attached along the generating bouquet.

    One ingredient: cone over the section of ``S x S^(n-s)``.  A bouquet:
    connected sum of the pieces, sections joined by edge paths, then the cone.
    """
    pieces = [_bubble_piece(S, n) for S in ingredients]
    total = sum(p.size() for p, _ in pieces)
    if total > simplex_budget():
        raise BudgetExceeded(f"model needs about {total} simplices, budget {simplex_budget()}")
    x, section = pieces[0]
    sections = [set(section)]
    for piece, sec in pieces[1:]:
        off = x.n_vertices
        before = x
        x = connected_sum_complex(before, piece, avoid_a=set().union(*sections), avoid_b=sec)
        # vertices of the second part keep their order after the first part's
        moved = _track_connected_sum(before, piece, set().union(*sections), sec)
        sections.append({moved[v] for v in sec})
    subcomplex = []
    for sec in sections:
        subcomplex += x.induced(sec)
    for a, b in zip(sections, sections[1:]):
        subcomplex += _edge_path(x, a, b)
    model = cone_on_subcomplex(x, subcomplex)
    if model.size() > simplex_budget():
        raise BudgetExceeded(f"model has {model.size()} simplices, budget {simplex_budget()}")
    return model


def _track_connected_sum(a, b, avoid_a, avoid_b) -> dict[int, int]:
    """Vertex map of ``b`` into ``connected_sum_complex(a, b, ...)``."""
    sa = _pick_top(a, set(avoid_a))
    sb = _pick_top(b, set(avoid_b))
    off = a.n_vertices
    raw = {v: v + off for v in range(b.n_vertices)}
    for x, y in zip(sb, sa):
        raw[x] = y
    used = sorted(set(range(a.n_vertices)) | {raw[v] for v in range(b.n_vertices)})
    index = {v: i for i, v in enumerate(used)}
    return {v: index[raw[v]] for v in range(b.n_vertices)}


def verify_prop3(n: int, S, ring: CoefficientRing = CoefficientRing.Z()) -> bool:
    """Compare the simplicial model's homology with the closed-form bubble."""
    from .bubbling import GeneratingData, Ingredient, bubble_homology
    from .reeb_state import canonical_projection_base

    ingredients = list(S) if isinstance(S, (list, tuple)) else [S]
    if n > 4:
        raise PreconditionViolated("OracleDimension", "simplicial checks are limited to n <= 4")
    model = prop3_model(n, ingredients)
    oracle = homology_of(model, ring, top_degree=n)
    base = canonical_projection_base(n, ring)
    data = GeneratingData(tuple(Ingredient(m) for m in ingredients))
    engine = bubble_homology(base, data).homology
    return is_isomorphic(oracle, engine)
