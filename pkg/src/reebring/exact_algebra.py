"""Exact module theory over Z, Z/nZ and Q.

Everything here works on plain Python integers (and ``Fraction`` over Q).
Finitely generated modules are stored as lists of invariant factors with the
convention that ``0`` denotes a free cyclic summand and ``q >= 2`` a cyclic
summand of order ``q``.  Over Z/nZ a summand isomorphic to the ring itself is
free and therefore stored as ``0``.

>>> smith_normal_form([[2, 4], [6, 8]])[0]
[2, 4]
>>> R = CoefficientRing.Z()
>>> GradedModule.from_factors(R, 1, {1: [2, 3]}).factors(1)
(6,)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import DegreeMismatch, NotUfg

Matrix = list[list[int]]


# ---------------------------------------------------------------------------
# coefficient rings


@dataclass(frozen=True)
class CoefficientRing:
    kind: str  # "Z", "Zmod" or "Q"
    modulus: int = 0

    def __post_init__(self):
        if self.kind not in ("Z", "Zmod", "Q"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if self.kind == "Zmod" and self.modulus < 2:
            raise ValueError("Z/nZ needs modulus >= 2")
        if self.kind != "Zmod" and self.modulus != 0:
            raise ValueError("only Z/nZ carries a modulus")

    @classmethod
    def Z(cls) -> "CoefficientRing":
        return cls("Z")

    @classmethod
    def Q(cls) -> "CoefficientRing":
        return cls("Q")

    @classmethod
    def Zmod(cls, n: int) -> "CoefficientRing":
        return cls("Zmod", n)

    @classmethod
    def parse(cls, text: str) -> "CoefficientRing":
        """Accepts ``Z``, ``Q``, ``Zmod:N`` (and ``Z/N`` as a synonym)."""
        t = text.strip()
        if t == "Z":
            return cls.Z()
        if t == "Q":
            return cls.Q()
        for prefix in ("Zmod:", "Z/"):
            if t.startswith(prefix):
                return cls.Zmod(int(t[len(prefix):]))
        raise ValueError(f"cannot parse coefficient ring {text!r}")

    def __str__(self) -> str:
        return f"Zmod:{self.modulus}" if self.kind == "Zmod" else self.kind

    @property
    def is_field(self) -> bool:
        return self.kind == "Q" or (self.kind == "Zmod" and _is_prime(self.modulus))

    @property
    def identity_has_finite_order(self) -> bool:
        return self.kind == "Zmod"

    def reduce(self, c, order: int = 0):
        """Canonical representative of ``c`` in a cyclic summand of ``order``."""
        if self.kind == "Q":
            return Fraction(0) if order else Fraction(c)
        if order:
            return int(c) % order
        if self.kind == "Zmod":
            return int(c) % self.modulus
        return int(c)

    def is_unit(self, c) -> bool:
        if self.kind == "Q":
            return c != 0
        if self.kind == "Zmod":
            return math.gcd(int(c), self.modulus) == 1
        return c in (1, -1)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


# ---------------------------------------------------------------------------
# Smith normal form


def _identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(len(a))]


def determinant(m: Matrix) -> int:
    """Bareiss fraction-free determinant."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> tuple[list[int], Matrix, Matrix]:
    """Return ``(diagonal, L, R)`` with ``L @ M @ R`` diagonal in Smith form.

    The diagonal has ``min(rows, cols)`` entries, nonnegative, each dividing
    the next (zeros last).  ``L`` and ``R`` are unimodular.
    """
    a = [list(map(int, row)) for row in matrix]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    left, right = _identity(rows), _identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in right:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        left[dst] = [x + q * y for x, y in zip(left[dst], left[src])]

    def add_col(dst, src, q):
        for row in a:
            row[dst] += q * row[src]
        for row in right:
            row[dst] += q * row[src]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    dirty = dirty or a[t][j] != 0
            if dirty:
                continue
            bad = next((i for i in range(t + 1, rows)
                        if any(a[i][j] % p for j in range(t + 1, cols))), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            left[t] = [-x for x in left[t]]

    diag = [a[i][i] for i in range(min(rows, cols))]
    return diag, left, right


def determinantal_divisors_diagonal(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Brute-force Smith diagonal via gcds of k x k minors (small matrices only)."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    out, prev = [], 1
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in combinations(range(rows), k):
            for cs in combinations(range(cols), k):
                g = math.gcd(g, determinant([[matrix[r][c] for c in cs] for r in rs]))
        if g == 0:
            out.extend([0] * (min(rows, cols) - k + 1))
            break
        out.append(g // prev)
        prev = g
    return out


def invariant_factors_of(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero Smith diagonal of an integer matrix, tuned for sparse +-1 matrices.

    Unit pivots are eliminated first on a sparse row representation; what is
    left goes through :func:`smith_normal_form`.
    """
    sparse = [{j: v for j, v in enumerate(row) if v} for row in matrix]
    sparse = [r for r in sparse if r]
    ones = 0
    while True:
        pivot = None
        for i, r in enumerate(sparse):
            for j, v in r.items():
                if v in (1, -1):
                    pivot = (i, j, v)
                    break
            if pivot:
                break
        if pivot is None:
            break
        pi, pj, pv = pivot
        prow = sparse.pop(pi)
        for r in sparse:
            c = r.get(pj)
            if c:
                q = c * pv  # pv is its own inverse
                for j, v in prow.items():
                    nv = r.get(j, 0) - q * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
        sparse = [r for r in sparse if r]
        ones += 1
    rest: list[int] = []
    if sparse:
        colset = sorted({j for r in sparse for j in r})
        index = {j: k for k, j in enumerate(colset)}
        dense = [[0] * len(colset) for _ in sparse]
        for i, r in enumerate(sparse):
            for j, v in r.items():
                dense[i][index[j]] = v
        rest = [d for d in smith_normal_form(dense)[0] if d]
    return [1] * ones + rest


def bezout(values: Sequence[int]) -> tuple[int, list[int]]:
    """Return ``(g, coeffs)`` with ``sum(c * v) == g == gcd(values) >= 0``."""
    g, coeffs = 0, [0] * len(values)
    for i, v in enumerate(values):
        if v == 0:
            continue
        if g == 0:
            g, coeffs[i] = abs(v), (1 if v > 0 else -1)
            continue
        d, s, t = _egcd(g, v)
        coeffs = [c * s for c in coeffs]
        coeffs[i] = t
        g = d
    return g, coeffs


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


# ---------------------------------------------------------------------------
# invariant factor normal form


def normalize_factors(factors: Iterable[int], ring: CoefficientRing) -> tuple[int, ...]:
    """Invariant-factor normal form: free summands first, then a divisibility chain."""
    free = 0
    torsion: list[int] = []
    for q in factors:
        q = abs(int(q))
        if ring.kind == "Zmod":
            q = ring.modulus if q == 0 else math.gcd(q, ring.modulus)
            if q == ring.modulus:
                free += 1
                continue
        if q == 0:
            free += 1
        elif q > 1 and ring.kind != "Q":
            torsion.append(q)
    for i in range(len(torsion)):
        for j in range(i + 1, len(torsion)):
            a, b = torsion[i], torsion[j]
            g = math.gcd(a, b)
            torsion[i], torsion[j] = g, a * b // g
    return (0,) * free + tuple(sorted(q for q in torsion if q > 1))


@dataclass(frozen=True)
class GradedModule:
    """Finitely generated graded module in degrees ``0..top_degree``."""

    ring: CoefficientRing
    top_degree: int
    summands: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.top_degree < 0:
            raise ValueError("top_degree must be >= 0")
        if len(self.summands) != self.top_degree + 1:
            raise ValueError("one invariant-factor list per degree required")
        for d, fs in enumerate(self.summands):
            if normalize_factors(fs, self.ring) != tuple(fs):
                raise ValueError(f"degree {d} factors {fs} are not in normal form")

    @classmethod
    def from_factors(cls, ring: CoefficientRing, top_degree: int,
                     factors: Mapping[int, Iterable[int]]) -> "GradedModule":
        per = [[] for _ in range(top_degree + 1)]
        for d, fs in factors.items():
            fs = list(fs)
            if not 0 <= d <= top_degree:
                if normalize_factors(fs, ring):
                    raise DegreeMismatch(f"degree {d} outside 0..{top_degree}")
                continue
            per[d].extend(fs)
        return cls(ring, top_degree, tuple(normalize_factors(fs, ring) for fs in per))

    @classmethod
    def zero(cls, ring: CoefficientRing, top_degree: int) -> "GradedModule":
        return cls.from_factors(ring, top_degree, {})

    def factors(self, d: int) -> tuple[int, ...]:
        if not 0 <= d <= self.top_degree:
            return ()
        return self.summands[d]

    def rank(self, d: int) -> int:
        return sum(1 for q in self.factors(d) if q == 0)

    def torsion_factors(self, d: int) -> tuple[int, ...]:
        return tuple(q for q in self.factors(d) if q)

    def betti(self) -> list[int]:
        return [self.rank(d) for d in range(self.top_degree + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * self.rank(d) for d in range(self.top_degree + 1))

    def as_dict(self) -> dict[int, tuple[int, ...]]:
        return {d: fs for d, fs in enumerate(self.summands) if fs}

    def with_top(self, top_degree: int) -> "GradedModule":
        return GradedModule.from_factors(self.ring, top_degree, self.as_dict())

    def __str__(self) -> str:
        parts = []
        for d, fs in self.as_dict().items():
            names = ["R" if q == 0 else f"Z/{q}" for q in fs]
            parts.append(f"{d}: " + " + ".join(names))
        return "{" + "; ".join(parts) + "}"


def _check_binary(a: GradedModule, b: GradedModule):
    if a.top_degree != b.top_degree:
        raise DegreeMismatch(f"top degrees differ: {a.top_degree} vs {b.top_degree}")
    if a.ring != b.ring:
        raise DegreeMismatch(f"rings differ: {a.ring} vs {b.ring}")


def direct_sum(a: GradedModule, b: GradedModule) -> GradedModule:
    _check_binary(a, b)
    return GradedModule.from_factors(
        a.ring, a.top_degree,
        {d: a.factors(d) + b.factors(d) for d in range(a.top_degree + 1)})


def is_isomorphic(a: GradedModule, b: GradedModule) -> bool:
    _check_binary(a, b)
    return a.summands == b.summands


def rank(a: GradedModule, d: int) -> int:
    return a.rank(d)


def torsion_factors(a: GradedModule, d: int) -> tuple[int, ...]:
    return a.torsion_factors(d)


# ---------------------------------------------------------------------------
# universal coefficients


def _tensor_cyclic(q: int, ring: CoefficientRing) -> int | None:
    """Z/q (q = 0: Z) tensored with the ring, as a factor over that ring."""
    if ring.kind == "Q":
        return 0 if q == 0 else None
    if ring.kind == "Z":
        return q
    return 0 if q == 0 else math.gcd(q, ring.modulus)


def _tor_cyclic(q: int, ring: CoefficientRing) -> int | None:
    if q == 0 or ring.kind != "Zmod":
        return None
    return math.gcd(q, ring.modulus)


def change_coefficients(module: GradedModule, ring: CoefficientRing) -> GradedModule:
    """Homology with new coefficients: ``(A_d (x) R') + Tor(A_{d-1}, R')``.

    ``ring = Z`` is the identity.  The Tor term coming out of the top degree
    must vanish, otherwise the caller needs a larger ``top_degree``.
    """
    if module.ring.kind != "Z":
        raise ValueError("change_coefficients expects a module over Z")
    if ring.kind == "Z":
        return module
    top = module.top_degree
    out: dict[int, list[int]] = {d: [] for d in range(top + 1)}
    for d in range(top + 1):
        for q in module.factors(d):
            t = _tensor_cyclic(q, ring)
            if t is not None:
                out[d].append(t)
            tor = _tor_cyclic(q, ring)
            if tor is not None and tor > 1:
                if d + 1 > top:
                    raise DegreeMismatch("Tor term lands above top_degree")
                out[d + 1].append(tor)
    return GradedModule.from_factors(ring, top, out)


def cohomology_from_homology(module: GradedModule) -> GradedModule:
    """Cohomology module determined by homology over the same ring.

    Over Z this is ``free(H_d) + tors(H_{d-1})``.  Over a field, and over
    Z/nZ (self-injective), ``H^d`` is the dual of ``H_d``, which is
    isomorphic to ``H_d`` for finite modules.
    """
    if module.ring.kind != "Z":
        return module
    top = module.top_degree
    out = {d: [0] * module.rank(d) for d in range(top + 1)}
    for d in range(top + 1):
        tors = module.torsion_factors(d)
        if tors:
            if d + 1 > top:
                raise DegreeMismatch("torsion in the top degree of homology")
            out[d + 1].extend(tors)
    return GradedModule.from_factors(module.ring, top, out)


# ---------------------------------------------------------------------------
# elements, unit free generators and duals


@dataclass(frozen=True)
class ModuleElement:
    degree: int
    coordinates: tuple

    @classmethod
    def of(cls, degree: int, *coords) -> "ModuleElement":
        return cls(degree, tuple(coords))


def reduce_coordinates(coords: Sequence, orders: Sequence[int], ring: CoefficientRing) -> tuple:
    if len(coords) != len(orders):
        raise DegreeMismatch(f"{len(coords)} coordinates for {len(orders)} summands")
    return tuple(ring.reduce(c, q) for c, q in zip(coords, orders))


def _lift_orders(orders: Sequence[int], ring: CoefficientRing) -> list[int]:
    """Orders over Z of the summands (free Z/n summands have order n)."""
    if ring.kind == "Zmod":
        return [q if q else ring.modulus for q in orders]
    return list(orders)


def quotient_factors(coords: Sequence[int], orders: Sequence[int],
                     ring: CoefficientRing) -> tuple[int, ...]:
    """Invariant factors of ``M / <x>`` for ``M = sum R/(q_i)`` (not over Q)."""
    lifted = _lift_orders(orders, ring)
    k = len(orders)
    columns = [[lifted[i] if r == i else 0 for r in range(k)] for i in range(k) if lifted[i]]
    columns.append([int(c) for c in coords])
    matrix = [[col[r] for col in columns] for r in range(k)]
    diag = [d for d in smith_normal_form(matrix)[0] if d] if k else []
    free = k - len(diag)
    return normalize_factors(diag + [0] * free, ring)


def element_order(coords: Sequence[int], orders: Sequence[int], ring: CoefficientRing) -> int:
    """Additive order of an element, 0 meaning infinite."""
    lifted = _lift_orders(orders, ring)
    out = 1
    for c, q in zip(coords, lifted):
        if q == 0:
            if c:
                return 0
            continue
        o = q // math.gcd(int(c), q)
        out = out * o // math.gcd(out, o)
    return out


def _annihilator_zero(coords, orders, ring) -> bool:
    if ring.kind == "Q":
        return any(coords)
    if ring.kind == "Z":
        return element_order(coords, orders, ring) == 0
    return element_order(coords, orders, ring) == ring.modulus


def is_ufg_presentation(coords: Sequence, orders: Sequence[int], ring: CoefficientRing) -> bool:
    """UFG test on an explicit presentation ``sum R/(orders_i)``."""
    coords = reduce_coordinates(coords, orders, ring)
    if not _annihilator_zero(coords, orders, ring):
        return False
    if ring.kind == "Q":
        return True
    quotient = quotient_factors(coords, orders, ring)
    result = normalize_factors((0,) + quotient, ring) == normalize_factors(orders, ring)
    if result:
        # primitivity is implied by splitting; a splitting functional must exist
        dual_functional(coords, orders, ring)
    return result


def is_ufg(x: ModuleElement, module: GradedModule, ring: CoefficientRing | None = None) -> bool:
    ring = ring or module.ring
    if not 0 <= x.degree <= module.top_degree:
        raise DegreeMismatch(f"degree {x.degree} outside 0..{module.top_degree}")
    return is_ufg_presentation(x.coordinates, module.factors(x.degree), ring)


def dual_functional(coords: Sequence, orders: Sequence[int], ring: CoefficientRing) -> tuple:
    """Values on the summand generators of a functional ``phi`` with ``phi(x) = 1``.

    The functional is the canonical one produced by the extended Euclidean
    algorithm.  Over Z it vanishes on torsion summands; over Z/nZ its value on
    a summand of order ``d`` is a multiple of ``n/d``.
    """
    coords = reduce_coordinates(coords, orders, ring)
    if ring.kind == "Q":
        for i, c in enumerate(coords):
            if c:
                return tuple(Fraction(1) / c if j == i else Fraction(0) for j in range(len(coords)))
        raise NotUfg("zero vector")
    if ring.kind == "Z":
        mult = [1 if q == 0 else 0 for q in orders]
        g, t = bezout([m * c for m, c in zip(mult, coords)])
        if g != 1:
            raise NotUfg(f"no functional takes value 1 on {coords}")
        return tuple(ti * m for ti, m in zip(t, mult))
    n = ring.modulus
    mult = [n // q for q in _lift_orders(orders, ring)]
    g, t = bezout([m * c for m, c in zip(mult, coords)] + [n])
    if g != 1:
        raise NotUfg(f"no functional takes value 1 on {coords}")
    return tuple((ti * m) % n for ti, m in zip(t, mult))


@dataclass(frozen=True)
class Functional:
    """A degree-preserving functional ``A_d -> R`` given by its values on generators."""

    degree: int
    values: tuple

    def __call__(self, x: ModuleElement, ring: CoefficientRing):
        if x.degree != self.degree:
            return ring.reduce(0)
        return ring.reduce(sum(v * c for v, c in zip(self.values, x.coordinates)))


def dual_of(x: ModuleElement, module: GradedModule) -> Functional:
    if not is_ufg(x, module):
        raise NotUfg(f"{x.coordinates} in degree {x.degree}")
    return Functional(x.degree, dual_functional(x.coordinates, module.factors(x.degree), module.ring))

