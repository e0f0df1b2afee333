import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from weylsl import forward_oracle as fo
from weylsl.gelfand_levitan import BetaSolution, default_grid, eval_G
from weylsl.pipeline import RescaleRecord, adapt_analytic_bc, adapt_variable_h
from weylsl.special_functions import legendre_table, spherical_bessel_sequence
from weylsl.spectral import SpectralData, delta0_M, delta_M, delta_prime_M, shift_spectrum
from weylsl.weyl_system import NSBFHead, WeylSample, solve_truncated

PI = math.pi
SETTINGS = settings(max_examples=40, deadline=None)

small = st.floats(-0.2, 0.2, allow_nan=False)
heads = st.builds(
    lambda w, w2, h: NSBFHead(w, w2, np.array(h)),
    st.floats(-2, 2), st.floats(-2, 2), st.lists(small, min_size=2, max_size=6),
)


@SETTINGS
@given(st.floats(1e-3, 500.0), st.integers(2, 120))
def test_bessel_recurrence_holds(x, n_max):
    j = spherical_bessel_sequence(x, n_max)
    assert np.all(np.isfinite(j)) and np.all(np.abs(j) <= 1.0)
    n = np.arange(1, n_max)
    res = np.abs(j[:-2] + j[2:] - (2 * n + 1) / x * j[1:-1])
    scale = np.maximum(np.abs(j[:-2]) + np.abs(j[1:-1]) + np.abs(j[2:]), 1e-300)
    assert np.max(res / scale) <= 1e-11


@SETTINGS
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=20), st.integers(0, 60))
def test_legendre_bounded(t, n):
    P = legendre_table(n, np.array(t))
    assert np.all(np.abs(P) <= 1 + 1e-12)


@SETTINGS
@given(st.floats(-50, 50), st.floats(-5, 5))
def test_m_to_M_inverts(m, h_ref):
    M = fo.m_to_M(m, h_ref)
    if math.isinf(M):
        assert m == h_ref
    else:
        assert math.isclose(h_ref + 1 / M, m, rel_tol=1e-9, abs_tol=1e-9)


@SETTINGS
@given(heads, st.floats(0.3, 30.0))
def test_delta_prime_is_derivative(head, rho):
    step = 1e-5
    ref = (delta_M(head, rho + step) - delta_M(head, rho - step)) / (2 * step)
    assert abs(delta_prime_M(head, rho) - ref) <= 1e-5 * max(1.0, abs(ref))


@SETTINGS
@given(heads)
def test_solve_recovers_generating_head(head):
    rho = 0.35 + 0.6 * np.arange(24)
    d = delta_M(head, rho)
    M = -delta0_M(head, rho) / d
    samples = [WeylSample(r * r, m) for r, m in zip(rho, M)]
    got = solve_truncated(samples, head.h_coeffs.size)
    assert abs(got.omega - head.omega) <= 1e-7
    assert abs(got.omega2 - head.omega2) <= 1e-7
    assert np.max(np.abs(got.h_coeffs - head.h_coeffs)) <= 1e-7


@SETTINGS
@given(heads, st.randoms(use_true_random=False))
def test_solution_independent_of_sample_order(head, rnd):
    rho = 0.35 + 0.6 * np.arange(20)
    M = -delta0_M(head, rho) / delta_M(head, rho)
    samples = [WeylSample(r * r, m) for r, m in zip(rho, M)]
    shuffled = samples[:]
    rnd.shuffle(shuffled)
    a = solve_truncated(samples, 5)
    b = solve_truncated(shuffled, 5)
    assert abs(a.omega - b.omega) <= 1e-10 and np.allclose(a.h_coeffs, b.h_coeffs, atol=1e-10)


@SETTINGS
@given(st.floats(-30, 30), st.lists(st.floats(0.1, 3.0), min_size=2, max_size=8), st.floats(-3, 3),
       st.floats(-3, 3))
def test_shift_preserves_gaps_and_h(lam0, gaps, w, w2):
    lam = lam0 + np.concatenate(([0.0], np.cumsum(gaps)))
    data = SpectralData(lam, np.ones_like(lam), w, w2)
    s = shift_spectrum(data)
    assert s.lambdas[0] == 0.0
    np.testing.assert_allclose(np.diff(s.lambdas), np.diff(lam), atol=1e-12)
    assert math.isclose(s.omega - s.omega2, w - w2, abs_tol=1e-12)
    assert math.isclose(s.shift, lam0, abs_tol=1e-12)


@SETTINGS
@given(st.floats(0.1, 3.0), st.floats(0.0, 1.0))
def test_rescale_maps_endpoints(a, frac):
    rec = RescaleRecord(a)
    x = a + frac * (PI - a)
    s = PI * (x - a) / rec.ell
    back, _, _ = rec.from_hat(s, 0.0, 0.0)
    assert math.isclose(float(back), x, rel_tol=1e-12, abs_tol=1e-12)


@SETTINGS
@given(st.lists(st.tuples(st.floats(0.01, 400.0), st.sampled_from([0.0, 0.5, 1.0, 2.0, 3.0])),
                min_size=1, max_size=12, unique_by=lambda p: p[0]))
def test_adapters_agree(pairs):
    table = dict(pairs)
    assert adapt_variable_h(pairs) == adapt_analytic_bc(lambda z: 1.0, lambda z: -table[z], list(table))


@SETTINGS
@given(st.lists(st.floats(-1, 1), min_size=9, max_size=9), st.integers(0, 99), st.floats(0.01, 1.0))
def test_G_even(coeffs, i, frac):
    grid = default_grid()
    beta = np.outer(np.sin(grid), coeffs)
    sol = BetaSolution(grid, beta, [], np.ones(grid.size))
    x = grid[i]
    assert math.isclose(eval_G(sol, x, frac * x), eval_G(sol, x, -frac * x), rel_tol=1e-12, abs_tol=1e-12)
