"""Truncated Gelfand-Levitan system for the Fourier-Legendre coefficients ``beta_2m``.

All routines expect spectral data shifted so that ``lambda_0 = 0``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import DivisionGuardError, InvalidInputError, PreconditionError
from .special_functions import legendre_table, spherical_bessel_table

__all__ = [
    "GLCoefficients",
    "BetaSolution",
    "assemble_coefficients",
    "solve_beta",
    "extract_q",
    "extract_H",
    "eval_F",
    "eval_G",
    "SPLINE_DEGREE",
    "default_grid",
    "integrate_q",
]

PI = math.pi
SPLINE_DEGREE = 7


@dataclass(frozen=True)
class GLCoefficients:
    x: float
    C: np.ndarray
    d: np.ndarray
    n_terms: int


@dataclass
class BetaSolution:
    """``beta[l, m]`` holds ``beta_2m(grid[l])``; ``failed`` lists grid points with singular systems."""

    grid: np.ndarray
    beta: np.ndarray
    failed: list = field(default_factory=list)
    cond: np.ndarray = None

    @property
    def beta0(self):
        return self.beta[:, 0]


def _poch3(a):
    return a * (a + 1.0) * (a + 2.0)


def _check_shifted(data):
    if data.lambdas.size == 0 or data.lambdas[0] != 0.0:
        raise PreconditionError("spectral data must be shifted so that lambda_0 = 0")


def _series_terms(data, K):
    if K is None:
        K = data.lambdas.size - 1
    if K < 1 or K > data.lambdas.size - 1:
        raise InvalidInputError(f"K must lie in [1, {data.lambdas.size - 1}]")
    rho = np.sqrt(np.maximum(data.lambdas[1:K + 1], 0.0))
    return rho, data.alphas[1:K + 1], np.arange(1, K + 1, dtype=float), K


def assemble_coefficients(data, x, N=8, K=None):
    """Matrix ``C~_km`` and vector ``d~_k`` (``k, m <= N``) at one point ``x``."""
    _check_shifted(data)
    if not 0 < x <= PI:
        raise InvalidInputError("x must lie in (0, pi]")
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    rho, alpha, n, K = _series_terms(data, K)
    w = data.omega
    top = 2 * N + 1
    jr = spherical_bessel_table(rho * x, top)
    jn = spherical_bessel_table(n * x, top)
    ev = np.arange(0, 2 * N + 1, 2)
    je_r, je_n, jo_n = jr[ev], jn[ev], jn[ev + 1]
    kk = np.arange(N + 1)
    signs = np.where((kk[:, None] + kk[None, :]) % 2 == 0, 1.0, -1.0)

    corr = 2.0 * w / (PI**2 * n)
    # both series weighted the same way so that free data cancel exactly
    S = (je_r / alpha) @ je_r.T - (je_n * (2.0 / PI)) @ je_n.T
    S += x * ((je_n * corr) @ jo_n.T + (jo_n * corr) @ je_n.T)
    S -= 2.0 * (kk[:, None] + kk[None, :]) * ((je_n * (corr / n)) @ je_n.T)
    c = signs * S

    band = np.zeros((N + 1, N + 1))
    for k in range(N + 1):
        if k >= 1:
            band[k, k - 1] += 1.0 / _poch3(2 * k - 1.5)
        band[k, k] -= 2.0 / _poch3(2 * k - 0.5)
        if k + 1 <= N:
            band[k, k + 1] += 1.0 / _poch3(2 * k + 0.5)
    c += -w * x / (8.0 * PI) * band

    head = 1.0 / data.alphas[0] - 1.0 / PI
    C = c.copy()
    C[0, 0] += head + 2.0 * w * x * x / (3.0 * PI**2)
    C[0, 1] += 2.0 * w * x * x / (15.0 * PI**2)
    C[1, 0] += 2.0 * w * x * x / (15.0 * PI**2)

    cos_r, cos_n, sin_n = np.cos(rho * x), np.cos(n * x), np.sin(n * x)
    T = je_r @ (cos_r / alpha) - je_n @ (cos_n * (2.0 / PI))
    T += x * (je_n @ (corr * sin_n) + jo_n @ (corr * cos_n))
    T -= 2.0 * kk * (je_n @ (corr * cos_n / n))
    d = -np.where(kk % 2 == 0, 1.0, -1.0) * T
    d[0] -= head + 4.0 * w * x * x / (3.0 * PI**2) - w * x / PI
    d[1] -= 2.0 * w * x * x / (15.0 * PI**2)
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(d))):
        raise InvalidInputError("non-finite Gelfand-Levitan coefficients")
    return GLCoefficients(float(x), C, d, K)


def default_grid(n_points=100):
    """Uniform grid ``x_l = pi l / n_points``, ``l = 1..n_points``."""
    return PI * np.arange(1, n_points + 1) / n_points


def solve_beta(data, grid=None, N=8, K=None):
    """Solve ``beta_2k / ((4k+1) x) + sum_m beta_2m C~_km = d~_k / 2`` at every grid point."""
    _check_shifted(data)
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise InvalidInputError("grid must be a sorted 1-D array")
    kk = np.arange(N + 1)
    beta = np.full((grid.size, N + 1), np.nan)
    cond = np.full(grid.size, np.inf)
    failed = []
    for i, x in enumerate(grid):
        co = assemble_coefficients(data, x, N, K)
        A = co.C + np.diag(1.0 / ((4 * kk + 1) * x))
        try:
            beta[i] = np.linalg.solve(A, co.d / 2.0)
            cond[i] = np.linalg.cond(A)
        except np.linalg.LinAlgError:
            failed.append(float(x))
    if failed:
        warnings.warn(f"singular Gelfand-Levitan system at {len(failed)} grid points",
                      RuntimeWarning, stacklevel=2)
    return BetaSolution(grid, beta, failed, cond)


def _beta0_spline(sol, degree=SPLINE_DEGREE):
    ok = np.isfinite(sol.beta0)
    x = np.concatenate(([0.0], sol.grid[ok]))
    b = np.concatenate(([0.0], sol.beta0[ok]))
    if x.size < 20:
        raise InvalidInputError("need beta_0 on at least 20 grid points")
    return make_interp_spline(x, b, k=degree), ok


def extract_q(sol, degree=SPLINE_DEGREE):
    """``q = 2 beta_0'' / (2 beta_0 + 1)`` at ``x = 0`` and the usable grid points, ``h = 2 beta_0'(0)``.

    ``beta_0`` is interpolated together with the anchor ``beta_0(0) = 0``
    by a not-a-knot spline of odd ``degree``.  Returns ``(x, q, h)``.
    """
    spl, ok = _beta0_spline(sol, degree)
    x = np.concatenate(([0.0], sol.grid[ok]))
    phi = 2.0 * spl(x) + 1.0
    phi[1:] = 2.0 * sol.beta0[ok] + 1.0
    if np.any(np.abs(phi) < 1e-6):
        raise DivisionGuardError("2 beta_0 + 1 vanishes on the grid")
    q = 2.0 * spl.derivative(2)(x) / phi
    h = float(2.0 * spl.derivative(1)(0.0))
    return x, q, h


def integrate_q(x, q, degree=SPLINE_DEGREE):
    """Integral of ``q`` over ``[x[0], x[-1]]`` from its interpolating spline."""
    spl = make_interp_spline(x, q, k=min(degree, x.size - 1))
    return float(spl.integrate(x[0], x[-1]))


def extract_H(data, x, q, degree=SPLINE_DEGREE):
    """``H = omega2 - (1/2) int_0^pi q``, with ``q`` and ``omega2`` both in the shifted frame."""
    return float(data.omega2 - 0.5 * integrate_q(x, q, degree))


def eval_F(data, x, t, K=None):
    """Kernel ``F(x, t)`` by the plain and the accelerated series.

    Returns ``(plain, accelerated, plain - accelerated)``.
    """
    _check_shifted(data)
    rho, alpha, n, K = _series_terms(data, K)
    w = data.omega
    base = np.cos(rho * x) * np.cos(rho * t) / alpha - np.cos(n * x) * np.cos(n * t) / (PI / 2)
    zero = 1.0 / data.alphas[0] - 1.0 / PI
    plain = zero + float(np.sum(base))
    acc_terms = base + 2.0 * w / (PI**2 * n) * (
        x * np.sin(n * x) * np.cos(n * t) + t * np.sin(n * t) * np.cos(n * x))
    acc = float(np.sum(acc_terms)) + zero - w / PI**2 * (PI * max(x, t) - x * x - t * t)
    return plain, acc, plain - acc


def eval_G(sol, x, t):
    """``G(x, t) = sum_m 2 beta_2m(x) / x P_2m(t / x)``, ``beta`` interpolated in ``x`` if needed."""
    if not 0 < abs(t) <= x:
        raise InvalidInputError("need 0 < |t| <= x")
    i = np.searchsorted(sol.grid, x)
    if i < sol.grid.size and math.isclose(sol.grid[i], x, rel_tol=0, abs_tol=1e-14):
        b = sol.beta[i]
    else:
        b = np.array([np.interp(x, np.concatenate(([0.0], sol.grid)), np.concatenate(([0.0], col)))
                      for col in sol.beta.T])
    P = legendre_table(2 * (b.size - 1), t / x)
    return float(np.sum(2.0 * b / x * P[::2]))
