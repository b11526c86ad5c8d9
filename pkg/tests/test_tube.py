import numpy as np
import pytest
import scipy.linalg

from equifocal import orbits, tube
from equifocal.errors import DependencyError, InputError, TubeRadiusError

FOCAL_RADIUS = np.pi * np.sqrt(3)


def test_tube_requires_polar_group(cp1_orbit):
    with pytest.raises(DependencyError):
        tube.build_partial_tube(cp1_orbit, np.array([1.0, 0.0]), None)


def test_tube_radius_enforced(cp1_orbit, cp1_hat_g):
    with pytest.raises(TubeRadiusError):
        tube.build_partial_tube(cp1_orbit, np.array([3.0, 0.0]), cp1_hat_g)


def test_principal_tube_structure(cp1_tube):
    assert cp1_tube.principal
    assert cp1_tube.fibre_dim == 1
    assert cp1_tube.codim == 1
    assert len(cp1_tube.frame_isometries) == 13 * 21
    for iso in cp1_tube.frame_isometries[:20]:
        assert np.allclose(iso.matrix.T @ iso.matrix, np.eye(2), atol=1e-12)


def test_zero_xi_is_not_principal(cp1_orbit, cp1_hat_g):
    t = tube.build_partial_tube(cp1_orbit, np.zeros(2), cp1_hat_g, n_curves=1, n_group=1)
    assert not t.principal


def test_velocities_match_finite_differences(cp1_tube, rng):
    germ, hg, xi = cp1_tube.germ, cp1_tube.hat_g, cp1_tube.xi
    amb = germ.ambient
    iso = cp1_tube.frame_isometries[30]
    h, u, g = iso.element, iso.transport, iso.group
    vel = tube.tube_velocities(germ, hg, h, u, g, xi)
    e = tube.image_point(germ, h, u @ g @ xi).reshape(amb.dim_g, amb.dim_g)
    step = 1e-6
    for i in range(germ.dim):
        z = germ.m_unit[:, i]
        f = lambda s: tube.image_point(germ, h @ amb.group_exp(s * z), orbits.segment_transport(germ, z, s) @ u @ g @ xi)
        fd = (f(step) - f(-step)) / (2 * step)
        ad = amb.ad(vel[:, i])
        assert np.allclose(fd, (ad @ e - e @ ad).ravel(), atol=1e-7)
    for j, x in enumerate(hg.basis):
        f = lambda s: tube.image_point(germ, h, u @ scipy.linalg.expm(s * x) @ g @ xi)
        fd = (f(step) - f(-step)) / (2 * step)
        ad = amb.ad(vel[:, germ.dim + j])
        assert np.allclose(fd, (ad @ e - e @ ad).ravel(), atol=1e-7)


def test_image_has_codimension_one(cp1_tube):
    g = cp1_tube.germ
    rank = tube.image_tangent_rank(g, cp1_tube.hat_g, np.eye(g.ambient.dim_g), np.eye(2), np.eye(2), cp1_tube.xi)
    assert rank == g.dim_p - 1


def test_section_is_flat(cp1_tube):
    sec = tube.tube_normal_section(cp1_tube)
    assert sec.dimension == 1
    res = tube.section_residuals(cp1_tube.germ, cp1_tube.xi, sec.basis)
    assert res["bracket"] <= 1e-12 and res["curvature"] <= 1e-12


def test_parallel_field_needs_section_vector(cp1_tube):
    with pytest.raises(InputError):
        tube.parallel_normal_field(cp1_tube, np.array([0.0, 1.0]))


def test_verify_equifocal_on_cp1(cp1_tube):
    res = tube.verify_equifocal(cp1_tube, n_sections=4, n_psi=3, n_probes=2, n_loops=1)
    assert (res["abelian"], res["globally_flat"], res["constant_focal"]) == (True, True, True)
    assert max(res["worst_residuals"].values()) <= 1e-4


def test_rank_additivity_off_and_at_focal_radius(cp1_tube):
    xi = cp1_tube.xi
    generic = tube.rank_additivity(cp1_tube, -xi)
    assert (generic["lhs"], generic["ker_omega"], generic["focal_multiplicity_rho"]) == (1, 1, 0)
    focal = tube.rank_additivity(cp1_tube, (FOCAL_RADIUS - 1.0) * xi)
    assert (focal["lhs"], focal["ker_omega"], focal["focal_multiplicity_rho"]) == (3, 0, 3)
    assert generic["holds"] and focal["holds"]


def test_omega_projection_rejects_vectors_off_section(cp1_tube):
    with pytest.raises(InputError):
        tube.omega_projection(cp1_tube, np.array([1.0, 1.0]))


def test_tube_report_fields(cp1_tube):
    rep = tube.tube_report(cp1_tube, None, None)
    assert rep["principal"] and rep["codim"] == 1 and rep["xi_norm"] == pytest.approx(1.0)
