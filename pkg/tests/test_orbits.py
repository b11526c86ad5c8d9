import numpy as np
import pytest

from equifocal import orbits, scenarios
from equifocal.errors import DegenerateError, InputError, TubeRadiusError


def test_dimensions(cp2, cp1_orbit, veronese):
    assert (cp1_orbit.dim, cp1_orbit.codim) == (2, 2)
    assert (veronese.dim, veronese.codim) == (2, 3)
    point = orbits.hermann_orbit_germ(cp2, cp2.k_embed)
    assert (point.dim, point.codim) == (0, 4)


def test_tangent_and_normal_are_complementary(cp1_orbit, veronese):
    for g in (cp1_orbit, veronese):
        t, n = g.tangent_basis, g.normal_basis
        assert np.allclose(t.T @ n, 0, atol=1e-12)
        assert np.allclose(np.hstack([t, n]).T @ np.hstack([t, n]), np.eye(g.dim_p), atol=1e-12)


def test_shape_operator_certified_by_finite_differences(cp1_orbit, veronese):
    for g in (cp1_orbit, veronese):
        res = orbits.shape_operator_residuals(g, samples=3, seed=2)
        assert res["symmetry"] <= 1e-10
        assert res["linearity"] <= 1e-10
        assert res["fd_agreement"] <= 1e-6


def test_cp1_is_totally_geodesic(cp1_orbit):
    assert np.abs(cp1_orbit.second_fundamental_form()).max() <= 1e-12


def test_round_sphere_orbit_is_umbilic(rng):
    """SO(3)-orbit of radius r in R^3 (s-rep of S^3): A_nu = -(1/r) id for the outward normal."""
    from equifocal import symspace
    s3 = symspace.named_germ("s3")
    r = 1.7
    g = orbits.srep_orbit_germ(s3, np.array([0.0, 0.0, r]))
    a = g.shape_operator(g.normal_coords(np.array([0.0, 0.0, 1.0])))
    assert np.allclose(a, -np.eye(2) / r, atol=1e-12)


def test_srep_through_zero_is_rejected(s3):
    with pytest.raises(DegenerateError):
        orbits.srep_orbit_germ(s3, np.zeros(3))


def test_srep_subalgebra_must_lie_in_k(s3):
    with pytest.raises(InputError):
        orbits.srep_orbit_germ(s3, np.array([0, 0, 1.0]), subalgebra=np.eye(s3.dim_g)[:, -1:])


def test_closed_form_transport_matches_ode(veronese, cp1_orbit, rng):
    for g in (veronese, cp1_orbit):
        segs = orbits.random_segments(g, rng, 3, 1.5)
        v = g.normal_vector(rng.standard_normal(g.codim))
        a = orbits.normal_parallel_transport(g, segs, v, "closed")
        b = orbits.normal_parallel_transport(g, segs, v, "ode")
        assert np.linalg.norm(a.ambient - b.ambient) <= 1e-8
        assert np.linalg.norm(a.coords) == pytest.approx(np.linalg.norm(g.normal_coords(v)), rel=1e-12)


def test_unknown_transport_method(veronese):
    with pytest.raises(InputError):
        orbits.normal_parallel_transport(veronese, [], np.ones(3), "euler")


def test_octant_loop_holonomy(veronese, su3so3):
    """Octant loop e1 -> e2 -> e3 -> e1 on the Veronese RP^2: holonomy is a half turn in a normal plane."""
    ys = [scenarios.labelled_vector(su3so3, {lab: np.pi / 2}) for lab in ("A12", "A23", "A13")]
    segs = orbits.spatial_to_body(veronese, ys)
    h = veronese.word_element(segs)
    assert np.linalg.norm(veronese.pulled_point_coords(h) - veronese.point) <= 1e-12
    for method in ("closed", "ode"):
        hol = orbits.loop_holonomy(veronese, segs, method)
        ev = np.sort_complex(np.linalg.eigvals(hol))
        assert np.allclose(ev, [-1, -1, 1], atol=1e-7)
        # the fixed axis is the position vector z0
        z = veronese.normal_coords(veronese.point)
        assert np.allclose(hol @ z, z, atol=1e-7)


@pytest.mark.parametrize("which", ["veronese", "cp1_orbit"])
def test_small_loop_holonomy_matches_normal_curvature(which, request, rng):
    g = request.getfixturevalue(which)
    rp = g.normal_curvature()
    a, b = rng.standard_normal((2, g.dim))
    tx = g.tangent_basis.T @ g.tau(g.m_unit @ a)
    ty = g.tangent_basis.T @ g.tau(g.m_unit @ b)
    expected = np.einsum("ijkl,i,j->kl", rp, tx, ty)
    errs = []
    for s in (0.02, 0.01):
        segs, err = orbits.close_loop(g, [g.m_unit @ a * s, g.m_unit @ b * s, -g.m_unit @ a * s, -g.m_unit @ b * s])
        assert err <= 1e-12
        hol = orbits.loop_holonomy(g, segs)
        errs.append(np.abs((hol - np.eye(g.codim)) / s ** 2 - expected).max())
    assert errs[1] <= 1e-6 and errs[1] < errs[0]


def test_holonomy_is_orthogonal(cp1_orbit, rng):
    segs, err = orbits.close_loop(cp1_orbit, orbits.random_segments(cp1_orbit, rng, 2, 1.0))
    hol = orbits.loop_holonomy(cp1_orbit, segs)
    assert np.allclose(hol.T @ hol, np.eye(2), atol=1e-10)


def test_holonomy_tube_sample_radius(cp1_orbit):
    g = cp1_orbit.with_epsilon(1.0)
    with pytest.raises(TubeRadiusError):
        orbits.holonomy_tube_sample(g, np.array([2.0, 0.0]), [])
    pts = orbits.holonomy_tube_sample(g, np.array([0.5, 0.0]), [])
    assert len(pts) == 1
