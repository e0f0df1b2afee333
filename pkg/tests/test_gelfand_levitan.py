import math
from dataclasses import replace

import numpy as np
import pytest

from weylsl.errors import DivisionGuardError, InvalidInputError, PreconditionError
from weylsl.gelfand_levitan import (
    BetaSolution,
    assemble_coefficients,
    default_grid,
    eval_F,
    eval_G,
    extract_H,
    extract_q,
    solve_beta,
)
from weylsl.pipeline import SolverOptions, run_inverse
from weylsl.spectral import SpectralData

from conftest import l1_error

PI = math.pi
FREE = SpectralData.free(2001)


def beta_solution(fn, n_terms=3, n_points=100):
    grid = default_grid(n_points)
    beta = np.zeros((grid.size, n_terms))
    beta[:, 0] = fn(grid)
    return BetaSolution(grid, beta, [], np.ones(grid.size))


def test_free_null():
    for x in (0.1, 1.0, 2.5, PI):
        co = assemble_coefficients(FREE, x)
        assert np.max(np.abs(co.C)) <= 1e-10
        assert np.max(np.abs(co.d)) <= 1e-10
    sol = solve_beta(FREE)
    assert np.max(np.abs(sol.beta)) <= 1e-10
    x, q, h = extract_q(sol)
    assert np.max(np.abs(q)) <= 1e-10 and abs(h) <= 1e-10
    assert abs(extract_H(FREE, x, q)) <= 1e-10


def test_unshifted_data_rejected():
    data = SpectralData([0.5, 1.3, 4.2], [1.0, 1.0, 1.0], 0.0, 0.0)
    with pytest.raises(PreconditionError):
        solve_beta(data)
    with pytest.raises(PreconditionError):
        eval_F(data, 1.0, 0.5)


def test_bad_arguments():
    with pytest.raises(InvalidInputError):
        assemble_coefficients(FREE, 0.0)
    with pytest.raises(InvalidInputError):
        assemble_coefficients(FREE, 1.0, K=5000)
    with pytest.raises(InvalidInputError):
        solve_beta(FREE, grid=np.array([1.0, 0.5]))


def test_cosh_beta_gives_unit_potential():
    # phi = 2 beta_0 + 1 = cosh x solves -phi'' + phi = 0, phi'(0) = 0
    sol = beta_solution(lambda x: (np.cosh(x) - 1) / 2)
    x, q, h = extract_q(sol)
    assert np.max(np.abs(q - 1)) <= 1e-4
    assert abs(h) <= 1e-4


def test_division_guard():
    # 2 beta_0 + 1 = cos x vanishes at the grid point pi/2
    sol = beta_solution(lambda x: -np.sin(x / 2) ** 2)
    with pytest.raises(DivisionGuardError):
        extract_q(sol)


def test_zero_beta_gives_zero_G():
    sol = beta_solution(np.zeros_like, n_terms=9)
    assert eval_G(sol, 1.2, 0.7) == 0.0
    assert eval_G(sol, 1.23, -0.4) == 0.0


def test_G_is_even_in_t(q1_shifted):
    sol = solve_beta(q1_shifted, default_grid(100))
    for x, t in ((PI / 2, 0.3), (2.0, 1.1), (default_grid()[70], 0.9)):
        assert eval_G(sol, x, t) == pytest.approx(eval_G(sol, x, -t), rel=1e-14, abs=1e-15)
    with pytest.raises(InvalidInputError):
        eval_G(sol, 1.0, 1.5)


@pytest.fixture(scope="module")
def q1_beta(q1_shifted):
    return solve_beta(q1_shifted)


def test_N_insensitivity(q1_shifted, q1_beta):
    wide = solve_beta(q1_shifted, N=12)
    assert np.max(np.abs(wide.beta0 - q1_beta.beta0)) <= 1e-6


def test_K_doubling_converges(q1_shifted):
    grid = default_grid(20)
    a = solve_beta(q1_shifted, grid, K=2500)
    b = solve_beta(q1_shifted, grid, K=5000)
    c = solve_beta(q1_shifted, grid, K=10000)
    d1 = np.max(np.abs(a.beta0 - b.beta0))
    d2 = np.max(np.abs(b.beta0 - c.beta0))
    assert d2 <= 1e-6 and d2 <= d1 + 1e-12


def test_norming_constant_perturbation_is_continuous(q1_shifted, q1_beta):
    alphas = q1_shifted.alphas.copy()
    alphas[5] *= 1 + 1e-6
    sol = solve_beta(replace(q1_shifted, alphas=alphas))
    assert np.max(np.abs(sol.beta0 - q1_beta.beta0)) <= 1e-5


def test_F_plain_vs_accelerated(q1_shifted):
    pts = (0.3, 0.9, 1.5, 2.1, 2.7)
    worst = max(abs(eval_F(q1_shifted, x, t, K=2000)[2]) for x in pts for t in pts)
    assert worst <= 1e-2
    plain, acc, diff = eval_F(q1_shifted, 1.0, 0.5, K=2000)
    assert abs(diff) <= 1e-2 and diff == plain - acc
    assert math.isfinite(eval_F(q1_shifted, 1.3, 1.3, K=2000)[1])


def test_free_F_is_zero():
    plain, acc, _ = eval_F(FREE, 1.1, 0.4)
    assert abs(plain) <= 1e-12 and abs(acc) <= 1e-12


def gl_residual(data, sol, x, t, nodes=40):
    s, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * x * (s + 1)
    w = 0.5 * x * w
    integral = sum(wi * eval_G(sol, x, si) * eval_F(data, si, t)[1] for si, wi in zip(s, w))
    return eval_G(sol, x, t) + eval_F(data, x, t)[1] + integral


def test_gelfand_levitan_residual(q1_shifted, q1_beta):
    grid = q1_beta.grid
    worst = 0.0
    for i in (19, 49, 79):
        x = grid[i]
        for frac in (0.2, 0.5, 0.9):
            worst = max(worst, abs(gl_residual(q1_shifted, q1_beta, x, frac * x)))
    assert worst <= 1e-2
    assert abs(gl_residual(q1_shifted, q1_beta, 2.0, 1.0)) <= 1e-3


def test_grid_refinement_stability(q1, q1_samples, q1_result):
    coarse = run_inverse(q1_samples, SolverOptions(grid_points=50))
    fine = q1_result
    common = fine.q[::2]
    assert np.allclose(fine.x[::2], coarse.x)
    change = float(np.trapezoid(np.abs(common - coarse.q), coarse.x))
    err = max(l1_error(q1, coarse.x, coarse.q), l1_error(q1, fine.x, fine.q))
    assert change <= err
