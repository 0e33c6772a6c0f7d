"""Symbolic closed manifolds with exact homology and cohomology rings.

Expressions are built from points and spheres by products and connected
sums, plus oriented linear sphere bundles over spheres classified by an
Euler number.  The small text syntax is::

    pt  S3  product(S2,S1)  connsum(product(S1,S1),product(S1,S1))  bundle(2,1,4)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import gcd
from typing import Union

from .errors import DegreeMismatch, PreconditionViolated
from .exact_algebra import CoefficientRing, GradedModule, change_coefficients
from .graded_ring import (UNIT, GradedAlgebra, Generator, Provenance, connected_sum_algebra,
                          kunneth_product, make_algebra, point_ring, sphere_ring)


@dataclass(frozen=True)
class Point:
    pass


@dataclass(frozen=True)
class Sphere:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise DegreeMismatch("sphere dimension must be >= 1")


@dataclass(frozen=True)
class Product:
    left: "ManifoldExpr"
    right: "ManifoldExpr"


@dataclass(frozen=True)
class ConnSum:
    left: "ManifoldExpr"
    right: "ManifoldExpr"

    def __post_init__(self):
        dl, dr = dimension(self.left), dimension(self.right)
        if dl != dr or dl < 1:
            raise DegreeMismatch(f"connected sum of dimensions {dl} and {dr}")


@dataclass(frozen=True)
class SphereBundle:
    """Oriented linear ``S^k``-bundle over ``S^{k'}`` with Euler number ``e``."""

    base_dim: int
    fiber_dim: int
    euler: int

    def __post_init__(self):
        if self.base_dim < 1 or self.fiber_dim < 1:
            raise DegreeMismatch("bundle base and fiber dimensions must be >= 1")
        if self.euler != 0 and self.fiber_dim != self.base_dim - 1:
            raise DegreeMismatch("a nonzero Euler number needs fiber dimension base_dim - 1")


ManifoldExpr = Union[Point, Sphere, Product, ConnSum, SphereBundle]


def conn_sum(a: ManifoldExpr, b: ManifoldExpr) -> ManifoldExpr:
    """Connected sum, with the degenerate one-dimensional case folded to S1."""
    if dimension(a) == 1 and dimension(b) == 1:
        return Sphere(1)
    return ConnSum(a, b)


def dimension(m: ManifoldExpr) -> int:
    if isinstance(m, Point):
        return 0
    if isinstance(m, Sphere):
        return m.d
    if isinstance(m, Product):
        return dimension(m.left) + dimension(m.right)
    if isinstance(m, ConnSum):
        return dimension(m.left)
    if isinstance(m, SphereBundle):
        return m.base_dim + m.fiber_dim
    raise TypeError(m)


def is_cps(m: ManifoldExpr) -> bool:
    if isinstance(m, Sphere):
        return True
    if isinstance(m, (Product, ConnSum)):
        return is_cps(m.left) and is_cps(m.right)
    return False


# ---------------------------------------------------------------------------
# text syntax

_TOKEN = re.compile(r"\s*(product|connsum|bundle|pt|S\d+|D\d+|as\s+collar|-?\d+|[(),])")


class ManifoldSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class _Disc:
    d: int


def parse_manifold(text: str, allow_discs: bool = False) -> ManifoldExpr:
    """Parse the manifold mini-language.

    With ``allow_discs``, ``D<d>`` factors (optionally tagged ``as collar``)
    are accepted inside products and dropped, since a disc factor does not
    change homotopy type: ``product(S2,D4 as collar)`` parses to ``S2``.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ManifoldSyntaxError(f"unknown manifold expression near {text[pos:]!r}", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    expr, i = _parse(tokens, 0, text, allow_discs)
    if i != len(tokens):
        raise ManifoldSyntaxError(f"trailing input {tokens[i][0]!r}", tokens[i][1])
    if isinstance(expr, _Disc):
        raise ManifoldSyntaxError("a disc is not closed", 0)
    return expr


def _expect(tokens, i, tok, text):
    if i >= len(tokens) or tokens[i][0] != tok:
        where = tokens[i][1] if i < len(tokens) else len(text)
        raise ManifoldSyntaxError(f"expected {tok!r}", where)
    return i + 1


def _parse(tokens, i, text, allow_discs):
    if i >= len(tokens):
        raise ManifoldSyntaxError("unexpected end of manifold expression", len(text))
    tok, off = tokens[i]
    if tok == "pt":
        return Point(), i + 1
    if re.fullmatch(r"S\d+", tok):
        d = int(tok[1:])
        if d < 1:
            raise ManifoldSyntaxError("sphere dimension must be >= 1", off)
        return Sphere(d), i + 1
    if re.fullmatch(r"D\d+", tok):
        if not allow_discs:
            raise ManifoldSyntaxError("disc factors are only allowed in base summands", off)
        i += 1
        if i < len(tokens) and tokens[i][0].startswith("as"):
            i += 1
        return _Disc(int(tok[1:])), i
    if tok in ("product", "connsum"):
        i = _expect(tokens, i + 1, "(", text)
        a, i = _parse(tokens, i, text, allow_discs)
        i = _expect(tokens, i, ",", text)
        b, i = _parse(tokens, i, text, allow_discs)
        if i < len(tokens) and tokens[i][0] == ",":
            raise ManifoldSyntaxError(f"{tok} takes exactly 2 arguments", tokens[i][1])
        i = _expect(tokens, i, ")", text)
        if tok == "product":
            if isinstance(a, _Disc) and isinstance(b, _Disc):
                raise ManifoldSyntaxError("product of discs is not closed", off)
            if isinstance(a, _Disc):
                return b, i
            if isinstance(b, _Disc):
                return a, i
            return Product(a, b), i
        if isinstance(a, _Disc) or isinstance(b, _Disc):
            raise ManifoldSyntaxError("connected sum with a disc", off)
        try:
            return conn_sum(a, b), i
        except DegreeMismatch as exc:
            raise ManifoldSyntaxError(str(exc), off) from None
    if tok == "bundle":
        i = _expect(tokens, i + 1, "(", text)
        args = []
        while True:
            if i >= len(tokens) or not re.fullmatch(r"-?\d+", tokens[i][0]):
                raise ManifoldSyntaxError("bundle arguments must be integers", off)
            args.append(int(tokens[i][0]))
            i += 1
            if i < len(tokens) and tokens[i][0] == ",":
                i += 1
                continue
            break
        i = _expect(tokens, i, ")", text)
        if len(args) != 3:
            raise ManifoldSyntaxError("bundle takes exactly 3 arguments", off)
        try:
            return SphereBundle(*args), i
        except DegreeMismatch as exc:
            raise ManifoldSyntaxError(str(exc), off) from None
    raise ManifoldSyntaxError(f"unexpected token {tok!r}", off)


def format_manifold(m: ManifoldExpr) -> str:
    if isinstance(m, Point):
        return "pt"
    if isinstance(m, Sphere):
        return f"S{m.d}"
    if isinstance(m, Product):
        return f"product({format_manifold(m.left)},{format_manifold(m.right)})"
    if isinstance(m, ConnSum):
        return f"connsum({format_manifold(m.left)},{format_manifold(m.right)})"
    if isinstance(m, SphereBundle):
        return f"bundle({m.base_dim},{m.fiber_dim},{m.euler})"
    raise TypeError(m)


# ---------------------------------------------------------------------------
# homology

def _integral_factors(m: ManifoldExpr) -> dict[int, list[int]]:
    if isinstance(m, Point):
        return {0: [0]}
    if isinstance(m, Sphere):
        return {0: [0], m.d: [0]}
    if isinstance(m, Product):
        a, b = _integral_factors(m.left), _integral_factors(m.right)
        out: dict[int, list[int]] = {}
        for i, fa in a.items():
            for j, fb in b.items():
                for p in fa:
                    for q in fb:
                        out.setdefault(i + j, []).append(gcd(p, q))
                        if p and q:
                            out.setdefault(i + j + 1, []).append(gcd(p, q))
        return out
    if isinstance(m, ConnSum):
        n = dimension(m)
        out = {0: [0], n: [0]}
        for side in (m.left, m.right):
            for d, fs in _integral_factors(side).items():
                if 0 < d < n:
                    out.setdefault(d, []).extend(fs)
        return out
    if isinstance(m, SphereBundle):
        if m.euler == 0:
            return _integral_factors(Product(Sphere(m.base_dim), Sphere(m.fiber_dim)))
        out = {0: [0], 2 * m.base_dim - 1: [0]}
        if abs(m.euler) > 1:
            out[m.base_dim - 1] = [abs(m.euler)]
        return out
    raise TypeError(m)


def homology(m: ManifoldExpr, ring: CoefficientRing = CoefficientRing.Z()) -> GradedModule:
    z = GradedModule.from_factors(CoefficientRing.Z(), dimension(m), _integral_factors(m))
    return change_coefficients(z, ring)


def euler_characteristic(m: ManifoldExpr) -> int:
    return homology(m).euler_characteristic()


# ---------------------------------------------------------------------------
# cohomology rings

def cohomology_ring(m: ManifoldExpr, ring: CoefficientRing = CoefficientRing.Z()) -> GradedAlgebra:
    if isinstance(m, Point):
        return point_ring(ring)
    if isinstance(m, Sphere):
        return sphere_ring(m.d, ring)
    if isinstance(m, Product):
        return kunneth_product(cohomology_ring(m.left, ring), cohomology_ring(m.right, ring))
    if isinstance(m, ConnSum):
        return connected_sum_algebra(cohomology_ring(m.left, ring), cohomology_ring(m.right, ring),
                                     dimension(m))
    if isinstance(m, SphereBundle):
        return _bundle_ring(m, ring)
    raise TypeError(m)


def _bundle_ring(m: SphereBundle, ring: CoefficientRing) -> GradedAlgebra:
    if m.euler == 0:
        return kunneth_product(sphere_ring(m.base_dim, ring), sphere_ring(m.fiber_dim, ring))
    kp, k, e = m.base_dim, m.fiber_dim, abs(m.euler)
    top = 2 * kp - 1
    gens = [Generator(0, 0, "1", UNIT)]
    products = {}
    if ring.kind == "Z":
        if e > 1:
            gens.append(Generator(kp, e, "t"))
    elif ring.kind == "Zmod":
        g = gcd(e, ring.modulus)
        if g > 1:
            order = 0 if g == ring.modulus else g
            gens.append(Generator(k, order, "x"))
            gens.append(Generator(kp, order, "t"))
    gens.append(Generator(top, 0, "top"))
    if ring.kind == "Zmod" and len(gens) == 4:
        # the pairing Z/g x Z/g -> Z/n lands in (n/g) Z/n
        n, g = ring.modulus, gcd(e, ring.modulus)
        products[(1, 2)] = {3: n // g}
        if k == 1 and e % 2 == 0:
            # circle bundles are lens spaces: the square of the fibre class is
            # (n/g)^2 (e/2) times the base class
            sq = (n // g) ** 2 * (e // 2) % g
            if sq:
                products[(1, 1)] = {2: sq}
    return make_algebra(ring, top, gens, products)


# ---------------------------------------------------------------------------
# represented classes

@dataclass(frozen=True)
class RepresentedClass:
    """A homology class carried by a closed submanifold with trivial normal bundle.

    ``label`` names the cohomology generator dual to the class in the
    catalog ring of ``host``.
    """

    host: ManifoldExpr
    degree: int
    description: str
    label: str
    trivial_normal: bool = True


def _factor_classes(m: ManifoldExpr) -> list[tuple[int, str, str]]:
    """(degree, cohomology label, submanifold description) excluding the point."""
    if isinstance(m, Sphere):
        return [(m.d, f"S{m.d}", f"S{m.d}")]
    if isinstance(m, Product):
        out = []
        for d, lab, desc in _factor_classes(m.left):
            out.append((d, f"({lab},1)", f"{desc} x {{*}}"))
        for d, lab, desc in _factor_classes(m.right):
            out.append((d, f"(1,{lab})", f"{{*}} x {desc}"))
        return out
    return []


def represented_classes(m: ManifoldExpr) -> list[RepresentedClass]:
    ring = cohomology_ring(m, CoefficientRing.Z())
    out = [RepresentedClass(m, 0, "{*}", "1")]
    if isinstance(m, Point):
        return out
    if isinstance(m, Sphere):
        out.append(RepresentedClass(m, m.d, f"S{m.d}", f"S{m.d}"))
        return out
    if isinstance(m, Product):
        for d, lab, desc in _factor_classes(m):
            if lab in ring.labels:
                out.append(RepresentedClass(m, d, desc, lab))
        return out
    top = ring.top_generators()
    out.append(RepresentedClass(m, dimension(m), format_manifold(m), ring.generators[top[0]].label))
    return out


def find_represented(m: ManifoldExpr, degree: int) -> list[RepresentedClass]:
    return [c for c in represented_classes(m) if c.degree == degree]


def require_orientable(m: ManifoldExpr):
    if not isinstance(m, (Point, Sphere, Product, ConnSum, SphereBundle)):
        raise PreconditionViolated("Orientable", f"{m!r} is not a catalog manifold")
