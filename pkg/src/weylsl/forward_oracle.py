"""Direct Sturm-Liouville solver used to synthesise and check spectral data.

The equation ``-y'' + q y = lambda y`` is propagated with the fourth-order
Magnus integrator (two Gauss points per cell, exact 2x2 exponentials).  The
propagator is unimodular, so Wronskians are preserved to round-off, and its
error does not grow with ``lambda``.  Everything is vectorised over the
spectral parameter so eigenvalue scans cost one sweep over the mesh.

This module is deliberately independent of the series machinery in
:mod:`weylsl.spectral` and :mod:`weylsl.weyl_system`.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, IncompleteSpectrumError, InvalidInputError
from .potentials import PotentialSpec

__all__ = [
    "IvpSolution",
    "integrate_ivp",
    "shoot",
    "characteristic_pair",
    "characteristic_values",
    "oracle_spectrum",
    "oracle_eigen_data",
    "norming_integrals",
    "potential_integral",
    "weyl_value",
    "m_value",
    "m_to_M",
    "propagate_m",
]

_G = math.sqrt(3.0) / 6.0
_MAGNUS_COMM = math.sqrt(3.0) / 12.0
_DEFAULT_CELLS = 256
_MAX_CELLS = 2**17
_INF_REL = 1e-9
_GL_U, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_U = 0.5 * (_GL_U + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class IvpSolution:
    value: complex
    derivative: complex
    error_estimate: float = 0.0
    n_cells: int = 0


def sqrt_upper(z):
    """Principal square root with ``Im >= 0`` (real input gives a real or imaginary root)."""
    r = cmath.sqrt(complex(z))
    if r.imag < 0:
        r = -r
    return r


def _mesh(spec, a, b, n_cells):
    lo, hi = (a, b) if a <= b else (b, a)
    cuts = [lo] + sorted(p for p in spec.breakpoints if lo < p < hi) + [hi]
    total = hi - lo
    nodes = [np.array([lo])]
    for left, right in zip(cuts[:-1], cuts[1:]):
        k = max(1, int(round(n_cells * (right - left) / total)))
        nodes.append(np.linspace(left, right, k + 1)[1:])
    x = np.concatenate(nodes)
    return x if a <= b else x[::-1]


def _cosh_sinhc(k2):
    """``cosh(k)`` and ``sinh(k)/k`` for ``k = sqrt(k2)``."""
    if np.iscomplexobj(k2):
        k = np.sqrt(k2)
        small = np.abs(k) < 1e-6
        with np.errstate(invalid="ignore", divide="ignore"):
            shc = np.where(small, 1.0 + k2 / 6.0, np.sinh(k) / np.where(small, 1.0, k))
        return np.cosh(k), shc
    r = np.sqrt(np.abs(k2))
    pos = k2 >= 0
    small = r < 1e-6
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        sinh_c = np.where(small, 1.0 + k2 / 6.0, np.sinh(r) / np.where(small, 1.0, r))
    ch = np.where(pos, np.cosh(r), np.cos(r))
    shc = np.where(pos, sinh_c, np.sinc(r / np.pi))
    return ch, shc


def _step_matrix(h, qa, qb, lam):
    """Magnus-4 propagator over one cell of signed width ``h``, Gauss samples ``qa``, ``qb``."""
    a = _MAGNUS_COMM * h * h * (qa - qb)
    c = 0.5 * (qa + qb) - lam
    ch, shc = _cosh_sinhc(a * a + h * h * c)
    return ch + shc * a, shc * h, shc * h * c, ch - shc * a


class _Propagator:
    def __init__(self, spec, x_from, x_to, n_cells):
        self.x = _mesh(spec, x_from, x_to, n_cells)
        self.h = np.diff(self.x)
        left = self.x[:-1]
        self.qa = np.asarray(spec.q(left + (0.5 - _G) * self.h), dtype=float)
        self.qb = np.asarray(spec.q(left + (0.5 + _G) * self.h), dtype=float)
        self.spec = spec

    def run(self, lam, y0, dy0, record=False):
        lam = np.asarray(lam)
        shape = np.broadcast_shapes(lam.shape, np.shape(y0), np.shape(dy0))
        dtype = np.result_type(lam, np.asarray(y0), np.asarray(dy0), float)
        y = np.broadcast_to(y0, shape).astype(dtype)
        dy = np.broadcast_to(dy0, shape).astype(dtype)
        traj = None
        if record:
            traj = (np.empty((self.h.size + 1,) + y.shape, dtype=y.dtype),
                    np.empty((self.h.size + 1,) + y.shape, dtype=y.dtype))
            traj[0][0], traj[1][0] = y, dy
        for i in range(self.h.size):
            e11, e12, e21, e22 = _step_matrix(self.h[i], self.qa[i], self.qb[i], lam)
            y, dy = e11 * y + e12 * dy, e21 * y + e22 * dy
            if record:
                traj[0][i + 1], traj[1][i + 1] = y, dy
        return y, dy, traj


def shoot(spec, lam, y0, dy0, x_from, x_to, n_cells=_DEFAULT_CELLS):
    """Fixed-mesh propagation of the initial data ``(y0, dy0)`` for an array of ``lambda``."""
    y, dy, _ = _Propagator(spec, x_from, x_to, n_cells).run(lam, y0, dy0)
    return y, dy


def _scaled_gap(ya, dya, yb, dyb, lam):
    rs = 1.0 + np.sqrt(np.abs(lam))
    err = (np.abs(yb - ya) + np.abs(dyb - dya) / rs) / 15.0
    scale = np.abs(yb) + np.abs(dyb) / rs
    return err, scale


def select_cells(spec, lam, y0, dy0, x_from, x_to, rtol=1e-11, n_cells=_DEFAULT_CELLS,
                 max_cells=_MAX_CELLS):
    """Smallest mesh (by doubling) whose Richardson estimate meets ``rtol`` on all ``lam``.

    Returns ``(n_cells, y, dy, estimate)`` for the accepted mesh.
    """
    prop = _Propagator(spec, x_from, x_to, n_cells)
    ya, dya, _ = prop.run(lam, y0, dy0)
    worst = np.inf
    while n_cells <= max_cells:
        n_cells *= 2
        yb, dyb, _ = _Propagator(spec, x_from, x_to, n_cells).run(lam, y0, dy0)
        err, scale = _scaled_gap(ya, dya, yb, dyb, lam)
        worst = float(np.max(err / np.maximum(scale, 1e-300)))
        if worst <= rtol:
            return n_cells, yb, dyb, worst
        ya, dya = yb, dyb
    raise ConvergenceError(f"IVP tolerance {rtol:g} not reached with {max_cells} cells", worst)


def integrate_ivp(spec: PotentialSpec, rho, y0, dy0, x_from=0.0, x_to=None, rtol=1e-10,
                  max_cells=_MAX_CELLS) -> IvpSolution:
    """Solve ``-y'' + q y = rho^2 y`` from ``x_from`` to ``x_to`` with the given initial data.

    The mesh is doubled until the Richardson error estimate of the endpoint
    values falls below ``rtol`` (relative); breakpoints of ``q`` are always
    mesh nodes.  Integration may run right-to-left when ``x_to < x_from``.
    """
    if x_to is None:
        x_to = spec.length
    if not (math.isfinite(x_from) and math.isfinite(x_to)) or x_from == x_to:
        raise InvalidInputError("integration interval must be finite and non-degenerate")
    lam = _as_lam(rho)
    n, y, dy, est = select_cells(spec, np.asarray(lam), y0, dy0, x_from, x_to, rtol=rtol,
                                 n_cells=64, max_cells=max_cells)
    return IvpSolution(complex(y), complex(dy), est, n)


def _as_lam(rho):
    lam = complex(rho) ** 2
    if lam.imag == 0 and complex(rho).imag == 0:
        return float(lam.real)
    return lam


def characteristic_pair(spec, rho, rtol=1e-11):
    """``(Delta(rho^2), Delta0(rho^2))`` from the phi- and S-solutions at ``x = pi``."""
    return _pair_at_lambda(spec, _as_lam(rho), rtol)


def characteristic_values(spec, lam, n_cells, left="robin"):
    """Vectorised characteristic function on a fixed mesh.

    ``left="robin"`` gives ``Delta`` (phi-solution), ``left="dirichlet"`` gives
    ``Delta0`` (S-solution).
    """
    y0, dy0 = _left_data(spec, left)
    y, dy = shoot(spec, lam, y0, dy0, 0.0, spec.length, n_cells)
    return dy + spec.H * y


def _left_data(spec, left):
    if left == "robin":
        return 1.0, spec.h
    if left == "dirichlet":
        return 0.0, 1.0
    raise InvalidInputError(f"unknown left boundary kind {left!r}")


def _s_to_lam(s):
    return np.sign(s) * s * s


def oracle_spectrum(spec, count, left="robin", lambda_floor=-100.0, step=0.01, rtol=1e-11):
    """First ``count`` eigenvalues (ascending) of the Robin (or Dirichlet-left) problem.

    The scan variable ``s`` parametrises ``lambda = sign(s) s^2``, so negative
    eigenvalues down to ``lambda_floor`` and positive ones up to
    ``(count + 3)^2`` are covered by one sign-change sweep; brackets are then
    refined together by bisection and a closing secant step.
    """
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    y0, dy0 = _left_data(spec, left)
    s_hi = count + 3.0
    s_lo = -math.sqrt(max(-lambda_floor, 0.0))
    probe = _s_to_lam(np.array([s_lo, 0.0, 0.37 * s_hi, s_hi]))
    n_cells, *_ = select_cells(spec, probe, y0, dy0, 0.0, spec.length, rtol=rtol)

    s = np.arange(s_lo, s_hi + step / 2, step)
    f = characteristic_values(spec, _s_to_lam(s), n_cells, left)
    lo_idx = np.nonzero((f[:-1] * f[1:] < 0) | (f[:-1] == 0))[0]
    lo, hi = s[lo_idx].copy(), s[lo_idx + 1].copy()
    f_lo, f_hi = f[lo_idx].copy(), f[lo_idx + 1].copy()
    exact = f_lo == 0
    for _ in range(64):
        width = hi - lo
        if np.all(width <= 1e-15 * np.maximum(1.0, np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        fm = characteristic_values(spec, _s_to_lam(mid), n_cells, left)
        move_hi = (np.sign(fm) == np.sign(f_hi)) & ~exact
        hi = np.where(move_hi, mid, hi)
        f_hi = np.where(move_hi, fm, f_hi)
        lo = np.where(move_hi | exact, lo, mid)
        f_lo = np.where(move_hi | exact, f_lo, fm)
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.where(exact | (f_hi == f_lo), lo, lo - f_lo * (hi - lo) / (f_hi - f_lo))
    lam = np.sort(_s_to_lam(root))
    if lam.size < count:
        raise IncompleteSpectrumError(f"found {lam.size} of {count} eigenvalues", lam)
    return lam[:count]


def norming_integrals(spec, lam, left="robin", rtol=1e-11, n_cells=256, max_cells=2**15):
    """``int_0^pi y(x)^2 dx`` for the left-normalised solution at each ``lam``.

    Gauss-Legendre quadrature (8 nodes per cell); interior values come from
    partial Magnus steps out of each recorded mesh node.  The mesh is doubled
    until two successive results agree to ``rtol``.
    """
    lam = np.asarray(lam, dtype=float)
    y0, dy0 = _left_data(spec, left)
    prev = None
    while n_cells <= max_cells:
        prop = _Propagator(spec, 0.0, spec.length, n_cells)
        _, _, (ys, dys) = prop.run(lam, y0, dy0, record=True)
        left_x = prop.x[:-1]
        total = np.zeros_like(lam)
        for u, w in zip(_GL_U, _GL_W):
            sub = prop.h * u
            qa = np.asarray(spec.q(left_x + (0.5 - _G) * sub), dtype=float)
            qb = np.asarray(spec.q(left_x + (0.5 + _G) * sub), dtype=float)
            e11, e12, _, _ = _step_matrix(sub[:, None], qa[:, None], qb[:, None], lam[None, :])
            vals = e11 * ys[:-1] + e12 * dys[:-1]
            total += w * np.sum(prop.h[:, None] * vals * vals, axis=0)
        if prev is not None and np.all(np.abs(total - prev) <= rtol * np.abs(total)):
            return total
        prev = total
        n_cells *= 2
    raise ConvergenceError("norming-constant quadrature did not converge",
                           float(np.max(np.abs(total - prev) / np.abs(total))))


def potential_integral(spec, a=0.0, b=None):
    """``int_a^b q`` by adaptive quadrature split at the breakpoints."""
    if b is None:
        b = spec.length
    pts = [p for p in spec.breakpoints if a < p < b]
    val, _ = integrate.quad(lambda t: float(spec.q(np.asarray(t))), a, b, points=pts or None,
                            epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def oracle_eigen_data(spec, count, lambda_floor=-100.0):
    """Eigenvalues, norming constants and ``omega`` of the Robin problem (reference data)."""
    from .spectral import SpectralData

    lam = oracle_spectrum(spec, count, "robin", lambda_floor=lambda_floor)
    alpha = norming_integrals(spec, lam)
    mean = potential_integral(spec)
    omega = spec.h + spec.H + 0.5 * mean
    return SpectralData(lam, alpha, omega, spec.H + 0.5 * mean, 0.0)


def weyl_value(spec, z, rtol=1e-11):
    """``M(z) = -Delta0(z)/Delta(z)``; ``inf`` when ``|Delta| < 1e-9 (|Delta0| + 1)``."""
    lam = complex(z)
    delta, delta0 = _pair_at_lambda(spec, lam.real if lam.imag == 0 else lam, rtol)
    if abs(delta) < _INF_REL * (abs(delta0) + 1.0):
        return math.inf
    return -delta0 / delta


def _pair_at_lambda(spec, lam, rtol):
    lam_arr = np.array([lam, lam])
    _, y, dy, _ = select_cells(spec, lam_arr, np.array([1.0, 0.0]), np.array([spec.h, 1.0]),
                               0.0, spec.length, rtol=rtol, n_cells=64)
    delta = dy[0] + spec.H * y[0]
    delta0 = dy[1] + spec.H * y[1]
    if np.iscomplexobj(lam_arr):
        return complex(delta), complex(delta0)
    return float(delta), float(delta0)


def _ratio_or_inf(num, den):
    if abs(den) < _INF_REL * (abs(num) + 1.0):
        return math.inf
    return num / den


def m_value(spec, z, rtol=1e-11):
    """``m(z) = v'(0)/v(0)`` with ``v(pi) = 1``, ``v'(pi) = -H`` (integrated right to left)."""
    lam = complex(z)
    lam_arr = np.array([lam if lam.imag != 0 else lam.real])
    _, v, dv, _ = select_cells(spec, lam_arr, 1.0, -spec.H, spec.length, 0.0, rtol=rtol, n_cells=64)
    v, dv = v[0], dv[0]
    if lam.imag == 0:
        v, dv = float(v), float(dv)
    return _ratio_or_inf(dv, v)


def m_to_M(m, h):
    """Convert the m-function value to the Weyl function, ``M = 1/(m - h)``."""
    if isinstance(m, float) and math.isinf(m) or (isinstance(m, complex) and cmath.isinf(m)):
        return 0.0
    diff = m - h
    if diff == 0:
        return math.inf
    return 1.0 / diff


def propagate_m(spec, a, h_n, z, rtol=1e-13):
    """``m(a, z) = v'(a)/v(a)`` for the Cauchy data ``v(0) = 1``, ``v'(0) = h_n`` on ``[0, a]``."""
    if not 0 < a < spec.length:
        raise InvalidInputError("propagation point must lie inside (0, pi)")
    lam = complex(z)
    lam_arr = np.array([lam if lam.imag != 0 else lam.real])
    _, v, dv, _ = select_cells(spec, lam_arr, 1.0, h_n, 0.0, a, rtol=rtol, n_cells=64)
    v, dv = v[0], dv[0]
    if lam.imag == 0:
        v, dv = float(v), float(dv)
    return _ratio_or_inf(dv, v)
