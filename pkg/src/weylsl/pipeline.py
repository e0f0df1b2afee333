"""Problem adapters and the full inverse solver (Weyl samples to ``q``, ``h``, ``H``)."""

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import forward_oracle as fo
from .errors import InvalidInputError, StageError, WeylslError
from .gelfand_levitan import SPLINE_DEGREE, default_grid, extract_H, extract_q, solve_beta
from .potentials import PotentialSpec
from .spectral import (
    SpectralData,
    default_eigen_count,
    find_eigenvalues,
    norming_constants,
    shift_spectrum,
)
from .weyl_system import WeylSample, auto_truncate, solve_truncated

PI = math.pi

MODES = ("weyl-samples", "two-spectra", "variable-h", "partial-potential", "analytic-bc", "synthetic")


@dataclass
class SolverOptions:
    """Knobs of the inverse solver.  ``None`` selects the automatic choice."""

    n_unknown_h: Optional[int] = None
    cond_limit: float = 1e5
    fail_cond: float = 1e6
    K: Optional[int] = None
    N: int = 8
    grid_points: int = 100
    spline_degree: int = SPLINE_DEGREE

    def validate(self):
        if self.n_unknown_h is not None and self.n_unknown_h < 1:
            raise InvalidInputError("n_unknown_h must be >= 1")
        if not 1 < self.cond_limit <= self.fail_cond:
            raise InvalidInputError("need 1 < cond_limit <= fail_cond")
        if self.K is not None and self.K < 1:
            raise InvalidInputError("K must be >= 1")
        if not 1 <= self.N <= 40:
            raise InvalidInputError("N must lie in [1, 40]")
        if not 20 <= self.grid_points <= 10_000:
            raise InvalidInputError("grid_points must lie in [20, 10000]")
        if self.spline_degree not in (3, 5, 7, 9):
            raise InvalidInputError("spline_degree must be 3, 5, 7 or 9")
        return self


@dataclass
class RescaleRecord:
    """Affine map of ``[a, pi]`` onto ``[0, pi]``, ``s = pi (x - a) / l`` with ``l = pi - a``."""

    a: float

    @property
    def ell(self):
        return PI - self.a

    @property
    def ratio(self):
        return self.ell / PI

    def to_hat(self, z, m):
        r = self.ratio
        return r * r * z, (m if (isinstance(m, float) and math.isinf(m)) else r * m)

    def from_hat(self, s, q_hat, H_hat):
        r = self.ratio
        return self.a + self.ell * np.asarray(s) / PI, np.asarray(q_hat) / (r * r), H_hat / r


@dataclass
class PotentialResult:
    x: np.ndarray
    q: np.ndarray
    h: float
    H: float
    diagnostics: dict
    spectral: Optional[SpectralData] = None
    head: object = None
    rescale: Optional[RescaleRecord] = None
    timings: dict = field(default_factory=dict)


def _merge_sorted(samples):
    return sorted(samples, key=lambda s: (s.z.real, s.z.imag))


def adapt_two_spectra(lambdas, nus):
    """Poles at the eigenvalues ``lambdas`` of the Robin problem, zeros at ``nus`` (Dirichlet left)."""
    lam = np.asarray(lambdas, dtype=float)
    nu = np.asarray(nus, dtype=float)
    if np.any(np.diff(lam) <= 0) or np.any(np.diff(nu) <= 0):
        raise InvalidInputError("both spectra must be strictly increasing")
    if lam.size and nu.size:
        gap = np.min(np.abs(lam[:, None] - nu[None, :]))
        if gap <= 1e-10:
            raise InvalidInputError("the two spectra overlap")
    samples = [WeylSample(v, math.inf, True) for v in lam] + [WeylSample(v, 0.0) for v in nu]
    return _merge_sorted(samples)


def adapt_variable_h(pairs, h_ref=0.0):
    """``m(lambda_n) = h_n`` gives ``M_n = 1/(h_n - h_ref)``, a pole when ``h_n = h_ref``."""
    return _merge_sorted([WeylSample.from_value(z, fo.m_to_M(float(hn), h_ref)) for z, hn in pairs])


def adapt_analytic_bc(f1, f2, lambdas, h_ref=0.0):
    """Boundary condition ``f1(lambda) y'(pi) + f2(lambda) y(pi) = 0`` at the eigenvalues.

    ``m_n = -f2(lambda_n) / f1(lambda_n)`` (``inf`` when ``f1`` vanishes) is
    converted with :func:`m_to_M`.
    """
    out = []
    for z in lambdas:
        a, b = float(f1(z)), float(f2(z))
        if a == 0.0 and b == 0.0:
            raise InvalidInputError(f"f1 and f2 both vanish at {z}")
        m = math.inf if a == 0.0 else -b / a
        out.append(WeylSample.from_value(z, fo.m_to_M(m, h_ref)))
    return _merge_sorted(out)


def adapt_partial_potential(known, a, pairs, h_ref=0.0):
    """Reduce the problem on ``[a, pi]`` to a Weyl problem on ``[0, pi]``.

    ``known`` carries ``q`` on ``[0, a]``; every pair ``(lambda_n, h_n)`` is
    propagated to ``x = a`` and rescaled.  Returns ``(samples, RescaleRecord)``.
    """
    if not 0 < a < PI:
        raise InvalidInputError("a must lie in (0, pi)")
    rec = RescaleRecord(float(a))
    spec = known.restricted(a) if known.length > a else known
    full = PotentialSpec(spec.q, spec.h, spec.H, spec.label, spec.breakpoints, PI)
    samples = []
    for z, hn in pairs:
        try:
            m = fo.propagate_m(full, a, float(hn), z)
        except WeylslError as exc:
            warnings.warn(f"sample at {z} dropped: {exc}", RuntimeWarning, stacklevel=2)
            continue
        zh, mh = rec.to_hat(float(z), m)
        samples.append(WeylSample.from_value(zh, fo.m_to_M(mh, h_ref)))
    return _merge_sorted(samples), rec


def _staged(name, diagnostics, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except WeylslError as exc:
        raise StageError(name, exc, diagnostics) from exc


def run_inverse(samples, options=None, rescale=None):
    """Steps 1-8: head, ``h``, eigendata, shift, ``beta_0``, ``q``, ``H``, un-shift.

    With a :class:`RescaleRecord` the recovered potential is mapped back to
    ``[a, pi]`` at the end (``h`` then refers to the rescaled problem).
    """
    opts = (options or SolverOptions()).validate()
    diag = {"n_samples": len(samples)}
    timings = {}
    t0 = time.perf_counter()

    if opts.n_unknown_h is None:
        history = []
        head = _staged("weyl_system", diag, auto_truncate, samples, opts.cond_limit,
                       opts.fail_cond, history=history)
        diag["truncation_history"] = [[n, c] for n, c, _ in history]
    else:
        head = _staged("weyl_system", diag, solve_truncated, samples, opts.n_unknown_h)
    h = head.h
    diag.update(n_coeffs=int(head.h_coeffs.size), cond=head.cond, residual_norm=head.residual_norm,
                omega=head.omega, omega2=head.omega2, omega_minus_omega2=abs(head.omega - head.omega2))
    timings["weyl_system"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    K = opts.K if opts.K is not None else default_eigen_count(head)
    diag["K"] = int(K)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lam = _staged("eigenvalues", diag, find_eigenvalues, head, K + 1)
    diag["eigen_warnings"] = sorted({str(w.message) for w in caught})
    alpha = _staged("norming_constants", diag, norming_constants, head, lam)
    data = SpectralData(lam, alpha, head.omega, head.omega2)
    shifted = shift_spectrum(data)
    diag["shift"] = shifted.shift
    timings["spectral"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    grid = default_grid(opts.grid_points)
    sol = _staged("gelfand_levitan", diag, solve_beta, shifted, grid, opts.N, K)
    diag["gl_failed_points"] = list(sol.failed)
    diag["gl_max_cond"] = float(np.max(sol.cond[np.isfinite(sol.cond)])) if np.any(np.isfinite(sol.cond)) else math.inf
    x, q_shift, h_spline = _staged("extract_q", diag, extract_q, sol, opts.spline_degree)
    H = extract_H(shifted, x, q_shift, opts.spline_degree)
    q = q_shift + shifted.shift
    diag["h_spline"] = h_spline
    timings["gelfand_levitan"] = time.perf_counter() - t0

    if rescale is not None:
        x, q, H = rescale.from_hat(x, q, H)
        diag["rescaled_from"] = rescale.a
    return PotentialResult(x, q, h, H, diag, data, head, rescale, timings)


# Synthetic experiments ---------------------------------------------------------

THREE_SPECTRA_H = (1.0, 2.0, 3.0)


def three_spectra_indices(per_spectrum=8):
    """Indices 0,1,3,4,.. / 0,2,3,5,.. / 1,2,4,5,.. as used with ``h = 1, 2, 3``."""
    out = []
    for skip in (2, 1, 0):
        idx = [n for n in range(3 * per_spectrum) if n % 3 != skip]
        out.append(idx[:per_spectrum])
    return out


def point_grid(count=41, offset=0.2, step=0.5, imag=0.0, include_zero=False):
    """``z_n = (offset + n step + i imag)^2``, ``n = 0..count-1``, optionally with ``z = 0`` prepended."""
    z = [(offset + n * step + 1j * imag) ** 2 for n in range(count)]
    z = [complex(v) if imag else float(v.real) for v in z]
    return ([0.0] if include_zero else []) + z


def synth_samples(spec, plan):
    """Oracle samples for a sampling plan.

    ``plan["kind"]`` is one of ``two-spectra`` (``count``), ``variable-h``
    (``h_values``, ``indices``, ``h_ref``), ``points`` (:func:`point_grid`
    arguments) or ``partial`` (``a``, ``indices``, ``h_ref``).  Returns
    ``(samples, rescale_record or None, truth)`` where ``truth`` holds the
    exact ``h`` and ``H`` of the recovered problem.
    """
    kind = plan.get("kind")
    truth = {"h": spec.h, "H": spec.H}
    if kind == "two-spectra":
        count = int(plan.get("count", 16))
        lam = fo.oracle_spectrum(spec, count, "robin")
        nu = fo.oracle_spectrum(spec, count, "dirichlet")
        return adapt_two_spectra(lam, nu), None, truth
    if kind == "variable-h":
        h_values = plan.get("h_values", THREE_SPECTRA_H)
        indices = plan.get("indices") or three_spectra_indices(int(plan.get("per_spectrum", 8)))
        if len(indices) != len(h_values):
            raise InvalidInputError("variable-h plan needs one index list per h value")
        h_ref = float(plan.get("h_ref", 0.0))
        pairs = []
        for hv, idx in zip(h_values, indices):
            lam = fo.oracle_spectrum(spec.with_bc(h=float(hv)), max(idx) + 1, "robin")
            pairs.extend((lam[i], float(hv)) for i in idx)
        truth["h"] = h_ref
        return adapt_variable_h(pairs, h_ref), None, truth
    if kind == "points":
        args = {k: plan[k] for k in ("count", "offset", "step", "imag", "include_zero") if k in plan}
        zs = point_grid(**args)
        return [WeylSample.from_value(z, fo.weyl_value(spec, z)) for z in zs], None, truth
    if kind == "partial":
        a = float(plan.get("a", PI / 2))
        indices = list(plan.get("indices", range(40)))
        h_ref = float(plan.get("h_ref", 0.0))
        lam = fo.oracle_spectrum(spec, max(indices) + 1, "robin")
        pairs = [(lam[i], spec.h) for i in indices]
        samples, rec = adapt_partial_potential(spec, a, pairs, h_ref)
        truth["h"] = h_ref
        return samples, rec, truth
    raise InvalidInputError(f"unknown sampling plan {kind!r}")


def error_report(spec, result, truth):
    """``L1`` and max errors of ``q`` (trapezoidal rule on the result grid) and boundary-constant errors."""
    err = np.abs(result.q - spec.q(result.x))
    return {
        "L1_q": float(np.trapezoid(err, result.x)),
        "max_q": float(err.max()),
        "h_error": abs(result.h - truth["h"]),
        "H_error": abs(result.H - truth["H"]),
    }


def run_synthetic(spec, plan, options=None):
    """Oracle samples for ``plan``, the inverse solve and the error report."""
    samples, rec, truth = synth_samples(spec, plan)
    result = run_inverse(samples, options, rescale=rec)
    return samples, result, error_report(spec, result, truth)
