import numpy as np
import pytest

from equifocal import holonomy, orbits, scenarios, symspace, tube


@pytest.fixture(scope="session")
def cp2():
    return symspace.named_germ("cp2")


@pytest.fixture(scope="session")
def su3so3():
    return symspace.named_germ("su3/so3")


@pytest.fixture(scope="session")
def s3():
    return symspace.named_germ("s3")


@pytest.fixture(scope="session")
def cp1_orbit(cp2):
    """Singular orbit CP^1 of S(U(1)xU(2)) through the base point of CP^2."""
    return orbits.hermann_orbit_germ(cp2, "diag:-1,1,1")


@pytest.fixture(scope="session")
def veronese(su3so3):
    """Singular s-rep orbit (a Veronese RP^2) of SO(3) in p = i Sym_0(3)."""
    z0 = scenarios.labelled_vector(su3so3, {"H1": 1.5, "H2": np.sqrt(3) / 2})
    return orbits.srep_orbit_germ(su3so3, z0)


@pytest.fixture(scope="session")
def cp1_hat_g(cp1_orbit):
    return holonomy.build_hat_G(cp1_orbit, 10, 5, 0)


@pytest.fixture(scope="session")
def cp1_tube(cp1_orbit, cp1_hat_g):
    return tube.build_partial_tube(cp1_orbit, np.array([1.0, 0.0]), cp1_hat_g, n_curves=12, n_group=20)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
