"""Hypothesis strategies shared by the property suites."""

from hypothesis import strategies as st

from reebring.catalog import Point, Product, Sphere, conn_sum, dimension
from reebring.exact_algebra import CoefficientRing

rings = st.sampled_from([CoefficientRing.Z(), CoefficientRing.Q(), CoefficientRing.Zmod(4),
                         CoefficientRing.Zmod(6)])


def cps(max_dim: int = 6, depth: int = 3):
    """Closed CPS expressions of dimension <= max_dim and nesting depth <= depth."""
    leaves = st.integers(1, min(3, max_dim)).map(Sphere)
    if depth <= 1:
        return leaves

    @st.composite
    def node(draw):
        kind = draw(st.sampled_from(["leaf", "product", "connsum"]))
        if kind == "leaf" or max_dim < 2:
            return draw(leaves)
        a = draw(cps(max_dim - 1, depth - 1))
        if kind == "product":
            b = draw(cps(max_dim - dimension(a), depth - 1))
            return Product(a, b)
        b = draw(cps(dimension(a), depth - 1).filter(lambda m: dimension(m) == dimension(a)))
        return conn_sum(a, b)

    return node()


def bubble_manifolds(max_dim: int):
    """Points, spheres and small products usable as single bubble ingredients."""
    return st.one_of(st.just(Point()), st.integers(1, max_dim).map(Sphere),
                     cps(max_dim, 2))
