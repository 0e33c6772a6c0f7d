import pytest
from hypothesis import given, settings, strategies as st

from oracles import counts_of_factors, mod_n_homology_counts
from strategies import cps
from test_graded_ring import axioms_hold
from reebring.catalog import ConnSum, Point, Product, Sphere, homology
from reebring.distinguisher import product_profile
from reebring.errors import BudgetExceeded, PreconditionViolated
from reebring.exact_algebra import CoefficientRing, change_coefficients, is_isomorphic
from reebring.oracle import (BUDGET_ENV, CwChainComplex, SimplicialComplex, cone_complex,
                             cone_on_subcomplex, connected_sum_complex, cup_product_ring, cw_homology,
                             disc_complex, export_complex, glue_complex, homology_of, import_complex,
                             manifold_complex, point_complex, product_complex, prop3_model, shift_cw,
                             sphere_bundle_cw, sphere_complex, sphere_cw, verify_prop3, wedge_complex)

Z, Q, Z2 = CoefficientRing.Z(), CoefficientRing.Q(), CoefficientRing.Zmod(2)
RP2 = SimplicialComplex.from_simplices([(0, 1, 3), (0, 1, 5), (0, 2, 4), (0, 2, 5), (0, 3, 4),
                                        (1, 2, 3), (1, 2, 4), (1, 4, 5), (2, 3, 5), (3, 4, 5)])


# --- simplicial homology --------------------------------------------------------------

@pytest.mark.trivial
@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_sphere_boundaries(d):
    h = homology_of(sphere_complex(d))
    assert h.as_dict() == {0: (0,), d: (0,)}


@pytest.mark.trivial
def test_disc_and_point_are_acyclic():
    assert homology_of(disc_complex(3)).as_dict() == {0: (0,)}
    assert homology_of(point_complex()).as_dict() == {0: (0,)}
    assert homology_of(cone_complex(sphere_complex(2))).as_dict() == {0: (0,)}


@pytest.mark.derived
def test_projective_plane():
    assert RP2.f_vector() == [6, 15, 10]
    h = homology_of(RP2)
    assert h.as_dict() == {0: (0,), 1: (2,)}
    # direct mod-2 reduction agrees with universal coefficients
    direct = homology_of(RP2, Z2)
    assert is_isomorphic(direct, change_coefficients(h, Z2))
    assert direct.betti() == [1, 1, 1]


@pytest.mark.derived
def test_projective_plane_mod2_square():
    # w1^2 is the top class: the mod-2 ring of RP2 is F2[x]/x^3
    ring = cup_product_ring(RP2, Z2)
    assert ring.module.betti() == [1, 1, 1]
    assert product_profile(ring) == {(1, 1): (1,)}
    assert axioms_hold(ring)


@pytest.mark.derived
def test_projective_plane_over_odd_prime_is_acyclic():
    assert cup_product_ring(RP2, CoefficientRing.Zmod(3)).module.betti() == [1, 0, 0]


@pytest.mark.trivial
def test_composite_modulus_with_torsion_rejected():
    with pytest.raises(PreconditionViolated):
        cup_product_ring(RP2, CoefficientRing.Zmod(4))


@pytest.mark.derived
def test_genus_two_surface():
    t = manifold_complex(Product(Sphere(1), Sphere(1)))
    g2 = connected_sum_complex(t, t)
    assert homology_of(g2).as_dict() == {0: (0,), 1: (0, 0, 0, 0), 2: (0,)}
    assert g2.euler_characteristic() == -2


@pytest.mark.derived
def test_wedge_adds_reduced_homology():
    k = wedge_complex([sphere_complex(1), sphere_complex(2), sphere_complex(2)])
    assert homology_of(k).as_dict() == {0: (0,), 1: (0,), 2: (0, 0)}


@pytest.mark.derived
def test_cone_on_equator_gives_wedge_of_two_spheres():
    s2 = sphere_complex(2)
    equator = [e for e in s2.faces(1) if 3 not in e and set(e) <= {0, 1, 2}]
    out = cone_on_subcomplex(s2, equator)
    assert homology_of(out).as_dict() == {0: (0,), 2: (0, 0)}


@pytest.mark.derived
@given(cps(3, 2))
@settings(max_examples=25)
def test_models_match_catalog_homology(m):
    k = manifold_complex(m)
    assert is_isomorphic(homology_of(k), homology(m, Z))
    assert k.euler_characteristic() == homology(m, Z).euler_characteristic()


@pytest.mark.derived
@given(st.sampled_from([Sphere(1), Sphere(2), Product(Sphere(1), Sphere(1))]),
       st.sampled_from([Sphere(1), Sphere(2)]), st.sampled_from([2, 3, 4]))
@settings(max_examples=20)
def test_product_homology_obeys_kunneth_mod_n(a, b, n):
    k = product_complex(manifold_complex(a), manifold_complex(b))
    ring = CoefficientRing.Zmod(n)
    h = homology_of(k, ring)
    counts = mod_n_homology_counts({d: list(homology(Product(a, b), Z).factors(d)) for d in range(k.dimension + 1)},
                                   k.dimension, n)
    assert all(counts[d] == counts_of_factors(h.factors(d), n) for d in range(k.dimension + 1))


# --- gluing and text format --------------------------------------------------------------

@pytest.mark.derived
def test_glue_two_cones_along_boundary():
    ca, cb = cone_complex(sphere_complex(1)), cone_complex(sphere_complex(1))
    s2 = glue_complex(ca, cb, {0: 0, 1: 1, 2: 2})
    assert homology_of(s2).as_dict() == {0: (0,), 2: (0,)}


@pytest.mark.trivial
def test_glue_rejects_non_isomorphic_matching():
    # the circle's vertices span a filled triangle on the other side
    with pytest.raises(PreconditionViolated):
        glue_complex(disc_complex(2), sphere_complex(1), {0: 0, 1: 1, 2: 2})


@pytest.mark.trivial
@given(st.lists(st.lists(st.integers(0, 6), min_size=1, max_size=4, unique=True), min_size=1, max_size=6))
def test_export_import_round_trip(simplices):
    k = SimplicialComplex.from_simplices([tuple(sorted(s)) for s in simplices])
    back = import_complex(export_complex(k))
    assert back.maximal == k.maximal and back.n_vertices == k.n_vertices


@pytest.mark.trivial
def test_import_rejects_missing_header():
    with pytest.raises(ValueError):
        import_complex("0 1\n")


# --- cellular models ----------------------------------------------------------------------

@pytest.mark.trivial
def test_cw_rejects_nonzero_square():
    with pytest.raises(PreconditionViolated):
        CwChainComplex.make([1, 1, 1], {1: [[1]], 2: [[1]]})


@pytest.mark.derived
@pytest.mark.parametrize("e", [1, 2, 4, 6])
def test_bundle_cw_torsion(e):
    h = cw_homology(sphere_bundle_cw(2, 1, e))
    assert h.factors(1) == ((e,) if e > 1 else ())
    assert h.factors(3) == (0,)


@pytest.mark.trivial
def test_zero_euler_bundle_is_product():
    assert is_isomorphic(cw_homology(sphere_bundle_cw(2, 1, 0)), homology(Product(Sphere(2), Sphere(1)), Z))


@pytest.mark.derived
def test_shift_matches_simplicial_cofiber():
    # S^1 x S^2 with its section coned off, shifted by two
    shifted = cw_homology(shift_cw(sphere_cw(1), 2, 3), Z, 3)
    x = product_complex(sphere_complex(1), sphere_complex(2))
    nb = sphere_complex(2).n_vertices
    section = [tuple(v * nb for v in e) for e in sphere_complex(1).maximal]
    assert is_isomorphic(shifted, homology_of(cone_on_subcomplex(x, section), Z, 3))


# --- cup products and the bubble model ------------------------------------------------------

@pytest.mark.derived
@given(cps(3, 2), st.sampled_from([Z, Q, CoefficientRing.Zmod(3)]))
@settings(max_examples=15)
def test_cup_rings_satisfy_axioms(m, ring):
    alg = cup_product_ring(manifold_complex(m), ring)
    assert axioms_hold(alg)


@pytest.mark.derived
@pytest.mark.parametrize("n, S", [(3, Point()), (3, Sphere(1)), (4, Sphere(2)), (4, [Sphere(1), Sphere(1)])])
def test_prop3_cases(n, S):
    assert verify_prop3(n, S)


@pytest.mark.derived
def test_prop3_mod_two():
    assert verify_prop3(4, Product(Sphere(1), Sphere(1)), Z2)


@pytest.mark.trivial
def test_budget_is_enforced(monkeypatch):
    monkeypatch.setenv(BUDGET_ENV, "10")
    with pytest.raises(BudgetExceeded):
        prop3_model(3, [Sphere(1)])


@pytest.mark.trivial
def test_prop3_dimension_limit():
    with pytest.raises(PreconditionViolated):
        verify_prop3(6, Point())


@pytest.mark.paper
def test_connected_sum_model_of_tori():
    t = Product(Sphere(1), Sphere(1))
    k = manifold_complex(ConnSum(t, t))
    assert product_profile(cup_product_ring(k)) == {(1, 1): (1,)}
