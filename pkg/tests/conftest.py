import numpy as np
import pytest

from wolbachia.model import ModelParameters, load_parameters


@pytest.fixture(scope="session")
def wmelpop() -> ModelParameters:
    """The shipped field-calibrated parameter set used across the suite."""
    return load_parameters("wmelpop")


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def random_feasible_parameters(rng: np.random.Generator) -> ModelParameters:
    """Random rates satisfying survival for both populations and feasibility."""
    while True:
        rho_n = rng.uniform(1.0, 6.0)
        alpha_n = rng.uniform(0.01, 0.5) * rho_n
        beta_n = rng.uniform(5e-4, 5e-3)
        rho_w = rng.uniform(0.3, 1.0) * rho_n
        alpha_w = rng.uniform(0.01, 0.5) * rho_w
        beta_w = rng.uniform(1.0, 3.0) * beta_n
        p = ModelParameters(rho_n, rho_w, alpha_n, alpha_w, beta_n, beta_w)
        if p.feasible:
            return p
