"""Slow, independent reference computations used only by the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd


def det(m):
    """Exact determinant by fraction Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    out = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c]), None)
        if p is None:
            return 0
        if p != c:
            a[c], a[p] = a[p], a[c]
            out = -out
        out *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return int(out)


def determinantal_diagonal(m):
    """Smith diagonal from gcds of k x k minors: d_k = D_k / D_(k-1)."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    out, prev = [], 1
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                g = gcd(g, det([[m[r][c] for c in cs] for r in rs]))
        if g == 0:
            out += [0] * (min(rows, cols) - k + 1)
            break
        out.append(g // prev)
        prev = g
    return out


def brute_ufg(coords, orders, kind, modulus=None):
    """UFG iff the element has trivial annihilator and some homomorphism to R
    sends it to 1; homomorphisms are enumerated directly."""
    if kind == "Z":
        if not any(c for c, q in zip(coords, orders) if q == 0):
            return False
        free = [c for c, q in zip(coords, orders) if q == 0]
        bound = max(abs(c) for c in free)
        for phi in itertools.product(range(-bound, bound + 1), repeat=len(free)):
            if sum(p * c for p, c in zip(phi, free)) == 1:
                return True
        return False
    n = modulus
    lifted = [q if q else n for q in orders]
    # order of the element must be n
    order = 1
    for c, q in zip(coords, lifted):
        o = q // gcd(c % q, q)
        order = order * o // gcd(order, o)
    if order != n:
        return False
    choices = [range(0, n, n // q) for q in lifted]
    for phi in itertools.product(*choices):
        if sum(p * c for p, c in zip(phi, coords)) % n == 1:
            return True
    return False


def _kernel_and_image(boundary_out, boundary_in, dim, n):
    """Elements of ker(boundary_out) and im(boundary_in) in (Z/n)^dim."""
    vectors = list(itertools.product(range(n), repeat=dim))
    kernel = [v for v in vectors
              if all(sum(r[i] * v[i] for i in range(dim)) % n == 0 for r in boundary_out)]
    sources = len(boundary_in[0]) if boundary_in else 0
    image = {tuple(sum(boundary_in[i][j] * w[j] for j in range(sources)) % n for i in range(dim))
             for w in itertools.product(range(n), repeat=sources)}
    if not boundary_in:
        image = {(0,) * dim}
    return kernel, image


def mod_n_homology_counts(free_and_torsion: dict, top: int, n: int) -> dict:
    """For each degree, ``k -> #{x in H_d(C (x) Z/n) : k x = 0}`` where ``C``
    is the free chain complex realizing the integral homology."""
    cells = {d: [] for d in range(top + 2)}  # per degree: list of (kind, data)
    for d, factors in free_and_torsion.items():
        for q in factors:
            cells[d].append(("gen", q))
            if q:
                cells[d + 1].append(("rel", q))
    index = {d: list(range(len(cells[d]))) for d in cells}

    def boundary(d):  # C_d -> C_(d-1) as rows of C_(d-1)
        if d == 0:
            return []
        rows = []
        tgt = cells[d - 1]
        src = cells[d]
        for i, (kind_t, q_t) in enumerate(tgt):
            row = [0] * len(src)
            if kind_t == "gen" and q_t:
                gens_before = [t for t in tgt[:i] if t[0] == "gen" and t[1]]
                j = [s for s, (ks, _) in enumerate(src) if ks == "rel"][len(gens_before)]
                row[j] = q_t
            rows.append(row)
        return rows

    out = {}
    for d in range(top + 1):
        dim = len(index[d])
        bout = boundary(d)
        bin_ = boundary(d + 1)
        kernel, image = _kernel_and_image(bout, bin_, dim, n)
        # classes: kernel modulo image
        classes = {}
        for v in kernel:
            key = min(tuple((a + b) % n for a, b in zip(v, w)) for w in image) if image else v
            classes.setdefault(key, v)
        counts = {}
        for k in range(1, n + 1):
            if n % k:
                continue
            counts[k] = sum(1 for v in classes.values()
                            if any(all((k * a - b) % n == 0 for a, b in zip(v, w)) for w in image))
        out[d] = counts
    return out


def counts_of_factors(factors, n: int) -> dict:
    """``k -> #{x : k x = 0}`` for the module with the given invariant factors over Z/n."""
    out = {}
    for k in range(1, n + 1):
        if n % k:
            continue
        c = 1
        for q in factors:
            c *= gcd(k, q if q else n)
        out[k] = c
    return out


def lens_square_coefficient(e: int, n: int) -> int:
    """``c`` with ``x.x = c.y`` in the mod-``n`` cohomology of ``Z/e`` (``n | e``),
    by brute force in the bar complex.  ``x`` is reduction mod ``n`` and ``y``
    the class of the carry cocycle, which is checked to have order ``n``."""
    assert e % n == 0
    pairs = list(itertools.product(range(e), repeat=2))

    def delta(phi):
        return tuple((phi[b] - phi[(a + b) % e] + phi[a]) % n for a, b in pairs)

    boundaries = {delta(phi) for phi in itertools.product(range(n), repeat=e)}
    carry = [1 if a + b >= e else 0 for a, b in pairs]
    square = [a * b % n for a, b in pairs]

    def is_boundary(v):
        return tuple(x % n for x in v) in boundaries

    assert [m for m in range(1, n + 1) if is_boundary([m * c for c in carry])][0] == n
    found = [c for c in range(n) if is_boundary([s - c * y for s, y in zip(square, carry)])]
    assert len(found) == 1
    return found[0]
