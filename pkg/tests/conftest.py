import math

import numpy as np
import pytest

from weylsl import forward_oracle as fo
from weylsl.pipeline import adapt_two_spectra, run_inverse
from weylsl.potentials import catalog
from weylsl.spectral import shift_spectrum


@pytest.fixture(scope="session")
def q1():
    return catalog("q1")


@pytest.fixture(scope="session")
def q1_spectra(q1):
    """Oracle Robin and Dirichlet-left spectra of q1 (h=1, H=2), 16 each."""
    lam = fo.oracle_spectrum(q1, 16, "robin")
    nu = fo.oracle_spectrum(q1, 16, "dirichlet")
    return lam, nu


@pytest.fixture(scope="session")
def q1_samples(q1_spectra):
    return adapt_two_spectra(*q1_spectra)


@pytest.fixture(scope="session")
def q1_result(q1_samples):
    return run_inverse(q1_samples)


@pytest.fixture(scope="session")
def q1_head(q1_result):
    return q1_result.head


@pytest.fixture(scope="session")
def q1_shifted(q1_result):
    return shift_spectrum(q1_result.spectral)


@pytest.fixture(scope="session")
def q1_oracle_eigen(q1):
    """Reference eigenvalues and quadrature norming constants, k <= 20."""
    return fo.oracle_eigen_data(q1, 21)


@pytest.fixture(scope="session")
def q1_exact_omega(q1):
    mean = fo.potential_integral(q1)
    return q1.h + q1.H + 0.5 * mean, q1.H + 0.5 * mean


def l1_error(spec, x, q):
    return float(np.trapezoid(np.abs(q - spec.q(x)), x))


PI = math.pi
