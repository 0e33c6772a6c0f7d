import pytest
from hypothesis import given, settings, strategies as st

from oracles import determinantal_diagonal
from strategies import bubble_manifolds, cps
from reebring.bubbling import GeneratingData, bubble_homology, thm2_bubble, thm42_bubble
from reebring.catalog import Product, Sphere, cohomology_ring, dimension
from reebring.distinguisher import (Certified, Distinguished, InvariantsAgree, NotApplicable,
                                    coefficient_sensitivity, distinguish, pairing_matrix,
                                    product_profile, thm3_certificate)
from reebring.errors import DegreeMismatch
from reebring.exact_algebra import CoefficientRing
from reebring.graded_ring import GradedAlgebra, make_algebra, multiply, sphere_ring, wedge_algebra
from reebring.reeb_state import canonical_projection_base, special_generic_base

Z, Q = CoefficientRing.Z(), CoefficientRing.Q()
Z4 = CoefficientRing.Zmod(4)


def example5(r0=2, ring=Z):
    return thm2_bubble(special_generic_base([Sphere(2)], 6, ring), 1, 2, r0)


def change_basis(alg: GradedAlgebra, a: int, b: int, c: int) -> GradedAlgebra:
    """Replace generator ``a`` by ``a + c*b`` (same degree, both free)."""
    def to_new(x):
        x = dict(x)
        if a in x:
            x[b] = x.get(b, 0) - c * x[a]
        return {k: v for k, v in x.items() if v}

    def old(i):
        return {a: 1, b: c} if i == a else {i: 1}

    gens = range(len(alg.generators))
    table = {(i, j): to_new(multiply(old(i), old(j), alg)) for i in gens for j in gens}
    return make_algebra(alg.ring, alg.top_degree, list(alg.generators), table)


# --- product profiles --------------------------------------------------------------

@pytest.mark.trivial
def test_wedge_of_spheres_has_no_pairings():
    alg = wedge_algebra([sphere_ring(2, Z), sphere_ring(3, Z)], 5)
    assert all(v == () for v in product_profile(alg).values())


@pytest.mark.derived
def test_torus_pairing_is_unimodular():
    t = cohomology_ring(Product(Sphere(1), Sphere(1)), Z)
    # rows are pairs (x_i, x_j), columns are degree-2 classes: xx, xy, yx, yy
    rows = pairing_matrix(t, 1, 1)
    assert [abs(r[0]) for r in rows] == [0, 1, 1, 0]
    assert determinantal_diagonal(rows) == [1]
    assert product_profile(t) == {(1, 1): (1,)}


@pytest.mark.paper
def test_example5_pairing_factor():
    assert product_profile(example5().cohomology)[(2, 3)] == (2,)


@pytest.mark.derived
@given(cps(5, 3), st.integers(-3, 3), st.data())
@settings(max_examples=80)
def test_profile_invariant_under_basis_change(m, c, data):
    alg = cohomology_ring(m, Z)
    degrees = [d for d in range(1, alg.top_degree + 1) if len(alg.degree_indices(d)) >= 2]
    if not degrees:
        return
    d = data.draw(st.sampled_from(degrees))
    a, b = data.draw(st.permutations(alg.degree_indices(d)))[:2]
    assert product_profile(change_basis(alg, a, b, c)) == product_profile(alg)


# --- distinguish ---------------------------------------------------------------------

@pytest.mark.trivial
def test_reflexive_agreement():
    s = example5()
    assert isinstance(distinguish(s, s), InvariantsAgree)


@pytest.mark.derived
def test_example5_against_trivial_products():
    v = distinguish(example5(2), example5(0))
    assert isinstance(v, Distinguished) and v.invariant == "product_profile"
    assert "(2, 3)" in v.detail


@pytest.mark.derived
def test_mod4_twisted_against_plain():
    base = special_generic_base([Sphere(2)], 6, Z4)
    twisted, plain = thm42_bubble(base, 2, 2, 1), thm2_bubble(base, 1, 2, 0)
    assert twisted.homology == plain.homology
    v = distinguish(twisted, plain)
    assert isinstance(v, Distinguished) and v.invariant == "product_profile"


@pytest.mark.trivial
def test_distinguish_needs_same_setting():
    with pytest.raises(DegreeMismatch):
        distinguish(example5(), example5(ring=Q))


def _states():
    @st.composite
    def state(draw):
        s = special_generic_base([Sphere(2)], 6)
        for _ in range(draw(st.integers(0, 2))):
            S = draw(bubble_manifolds(3).filter(lambda m: dimension(m) <= 3))
            s = bubble_homology(s, GeneratingData.single(S))
        if s.ring_certified and draw(st.booleans()):
            s = thm2_bubble(s, 1, 2, draw(st.integers(-2, 2)))
        return s
    return state()


@pytest.mark.trivial
@given(_states(), _states())
@settings(max_examples=60)
def test_distinguish_symmetric(a, b):
    assert isinstance(distinguish(a, a), InvariantsAgree)
    x, y = distinguish(a, b), distinguish(b, a)
    assert type(x) is type(y)
    if isinstance(x, Distinguished):
        assert x.invariant == y.invariant


# --- the non-realizability certificate ------------------------------------------------

@pytest.mark.paper
def test_example5_is_certified():
    cert = thm3_certificate(example5())
    assert isinstance(cert, Certified)
    assert cert.witness.degrees == (2, 3)


@pytest.mark.trivial
def test_unit_r0_not_applicable():
    cert = thm3_certificate(example5(1))
    assert isinstance(cert, NotApplicable) and "r0" in cert.reason


@pytest.mark.paper
def test_finite_order_unit_not_applicable():
    cert = thm3_certificate(example5(2, CoefficientRing.Zmod(5)))
    assert isinstance(cert, NotApplicable) and "finite order" in cert.reason


@pytest.mark.trivial
def test_disc_base_not_applicable():
    assert isinstance(thm3_certificate(canonical_projection_base(6)), NotApplicable)


@pytest.mark.paper
@given(st.integers(-4, 4), st.sampled_from([Z, Q, CoefficientRing.Zmod(5), CoefficientRing.Zmod(7)]))
@settings(max_examples=40)
def test_certificate_only_when_hypotheses_hold(r0, ring):
    cert = thm3_certificate(example5(r0, ring))
    if isinstance(cert, Certified):
        assert ring == Z and abs(r0) > 1
    if ring == Z and abs(r0) > 1:
        assert isinstance(cert, Certified)


@pytest.mark.paper
@given(_states())
@settings(max_examples=60)
def test_certificate_requires_two_sphere_last_step(s):
    if s.log[-1].op != "thm2":
        assert isinstance(thm3_certificate(s), NotApplicable)


# --- coefficient sensitivity ------------------------------------------------------------

@pytest.mark.derived
def test_sensitivity_mod4_pair(fixture_text):
    out = coefficient_sensitivity(fixture_text("mod4_twisted.rbs"), fixture_text("mod4_plain.rbs"), [Z4])
    assert len(out) == 1 and isinstance(out[0].verdict, Distinguished)


@pytest.mark.trivial
def test_sensitivity_reflexive(fixture_text):
    text = fixture_text("example5.rbs")
    out = coefficient_sensitivity(text, text, [Z, Q, CoefficientRing.Zmod(3)])
    assert all(isinstance(v.verdict, InvariantsAgree) for v in out)


@pytest.mark.derived
def test_sensitivity_uct_against_direct(fixture_text):
    out = coefficient_sensitivity(fixture_text("twisted_e4.rbs"), fixture_text("mod4_twisted.rbs"), [Z4])
    v = out[0]
    assert v.methods == ("uct", "direct")
    assert isinstance(v.verdict, InvariantsAgree)
