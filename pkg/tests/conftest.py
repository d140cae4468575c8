import json
import pathlib

import numpy as np
import pytest

from lsilab import spectral1d as s1

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def formula_reference():
    return json.loads((DATA / "formula_reference.json").read_text())


@pytest.fixture(scope="session")
def two_atom_reference():
    d = json.loads((DATA / "two_atom_poincare.json").read_text())
    return {float(t): v for t, v in d["c_p"].items()}


@pytest.fixture(scope="session")
def gaussian_grids():
    """Discretized gamma_{0,t} at the default resolution."""
    return {t: s1.build_grid_density(s1.AtomicMixingMeasure1D.dirac(0.0), t) for t in (0.5, 1.0, 2.0)}


@pytest.fixture(scope="session")
def two_atom_grids():
    """Discretized (delta_{-1} + delta_1)/2 * gamma_{0,t}."""
    mu = s1.AtomicMixingMeasure1D.symmetric_pair(1.0)
    return {t: s1.build_grid_density(mu, t) for t in (0.125, 0.25, 0.5, 1.0)}


@pytest.fixture(scope="session")
def two_atom_estimates(two_atom_grids):
    return {t: s1.poincare_constant_estimate(rho) for t, rho in two_atom_grids.items()}
