"""Linear system for ``omega``, ``omega2`` and the NSBF coefficients ``h_n``.

Each Weyl sample ``(z_k, M_k)`` gives one equation of

    M (-rho sin(rho pi) + omega cos(rho pi) + 2 sum (-1)^n h_2n j_2n(rho pi))
      + cos(rho pi) + omega2 sin(rho pi)/rho + (2/rho) sum (-1)^n h_2n+1 j_2n+1(rho pi) = 0,

written in the normalised unknowns ``xi_n = sqrt(2 pi) h_n / sqrt(2n + 1)``.
Samples at poles (``M = inf``) keep only the bracket multiplying ``M``.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IllConditionedInputError,
    InvalidInputError,
    SingularSystemError,
    UnderdeterminedSystemError,
)
from .special_functions import spherical_bessel_table

__all__ = [
    "WeylSample",
    "NSBFHead",
    "build_rows",
    "solve_truncated",
    "auto_truncate",
    "real_row_count",
    "density_check",
    "DensityReport",
]

POLE_RETAG = 1e8


def _sqrt_upper(z):
    r = cmath.sqrt(z)
    return -r if r.imag < 0 else r


@dataclass(frozen=True)
class WeylSample:
    """A point ``z`` with the Weyl value ``M``; ``is_infinite`` marks a pole."""

    z: complex
    M: complex = 0.0
    is_infinite: bool = False

    def __post_init__(self):
        z = complex(self.z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise InvalidInputError("sample point must be finite")
        object.__setattr__(self, "z", z)
        m = complex(self.M)
        if self.is_infinite or cmath.isinf(m):
            object.__setattr__(self, "M", complex(math.inf))
            object.__setattr__(self, "is_infinite", True)
        elif cmath.isnan(m):
            raise InvalidInputError("Weyl value is NaN")
        else:
            object.__setattr__(self, "M", m)

    @property
    def rho(self):
        return _sqrt_upper(self.z)

    @classmethod
    def from_value(cls, z, M):
        """Build from an extended value (``math.inf`` marks a pole)."""
        return cls(z, M, cmath.isinf(complex(M)))


@dataclass(frozen=True)
class NSBFHead:
    """Recovered constants and coefficients defining the approximate characteristic functions."""

    omega: float
    omega2: float
    h_coeffs: np.ndarray
    xi: np.ndarray = field(default=None)
    cond: float = float("nan")
    residual_norm: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h_coeffs, dtype=float)
        object.__setattr__(self, "h_coeffs", h)
        n = np.arange(h.size)
        object.__setattr__(self, "xi", math.sqrt(2 * math.pi) * h / np.sqrt(2 * n + 1))

    @property
    def h(self):
        return self.omega - self.omega2

    @property
    def M(self):
        return self.h_coeffs.size - 1

    @classmethod
    def free(cls, n_coeffs=1):
        return cls(0.0, 0.0, np.zeros(n_coeffs), cond=1.0)


def _column_factors(n_unknown_h):
    m = np.arange(n_unknown_h)
    sign = np.where((m // 2) % 2 == 0, 1.0, -1.0)
    return sign * np.sqrt(2.0 * (2 * m + 1) / math.pi)


def _check_samples(samples):
    if not samples:
        raise InvalidInputError("no samples")
    zs = np.array([s.z for s in samples])
    order = np.lexsort((zs.imag, zs.real))
    sz = zs[order]
    if np.any(np.abs(np.diff(sz)) == 0):
        raise InvalidInputError("duplicate sample points")


def build_rows(samples, n_unknown_h):
    """Real least-squares rows, unknowns ordered ``(omega, omega2, xi_0, xi_1, ...)``.

    Complex samples contribute their real and imaginary parts as two rows.
    Finite values with ``|M| > 1e8`` are treated as poles.
    """
    if n_unknown_h < 1:
        raise InvalidInputError("need at least one h coefficient")
    _check_samples(samples)
    z = np.array([s.z for s in samples])
    rho = np.sqrt(z)
    rho = np.where(rho.imag < 0, -rho, rho)
    M = np.array([0.0 if s.is_infinite else s.M for s in samples], dtype=complex)
    inf = np.array([s.is_infinite for s in samples]) | (np.abs(M) > POLE_RETAG)
    M = np.where(inf, 0.0, M)

    x = rho * math.pi
    jt = spherical_bessel_table(x, n_unknown_h - 1).astype(complex)
    zero = np.abs(rho) == 0
    safe_rho = np.where(zero, 1.0, rho)
    sin_over = np.where(zero, math.pi, np.sin(x) / safe_rho)
    j_over = jt / safe_rho
    if np.any(zero):
        j_over[:, zero] = 0.0
        if n_unknown_h > 1:
            j_over[1, zero] = math.pi / 3.0

    fac = _column_factors(n_unknown_h)
    even = (np.arange(n_unknown_h) % 2 == 0)
    n_s = len(samples)
    A = np.zeros((n_s, n_unknown_h + 2), dtype=complex)
    b = np.zeros(n_s, dtype=complex)
    cos_x = np.cos(x)

    fin = ~inf
    A[fin, 0] = M[fin] * cos_x[fin]
    A[fin, 1] = sin_over[fin]
    A[np.ix_(fin, 2 + np.nonzero(even)[0])] = (M[fin, None] * jt[even][:, fin].T) * fac[even]
    A[np.ix_(fin, 2 + np.nonzero(~even)[0])] = j_over[~even][:, fin].T * fac[~even]
    b[fin] = M[fin] * rho[fin] * np.sin(x[fin]) - cos_x[fin]

    A[inf, 0] = cos_x[inf]
    A[np.ix_(inf, 2 + np.nonzero(even)[0])] = jt[even][:, inf].T * fac[even]
    b[inf] = rho[inf] * np.sin(x[inf])

    cplx = (np.abs(A.imag).max(axis=1) > 0) | (np.abs(b.imag) > 0)
    rows = [A.real]
    rhs = [b.real]
    if np.any(cplx):
        rows.append(A.imag[cplx])
        rhs.append(b.imag[cplx])
    A_r = np.vstack(rows)
    b_r = np.concatenate(rhs)
    if n_unknown_h + 2 > A_r.shape[0]:
        raise UnderdeterminedSystemError(
            f"{n_unknown_h + 2} unknowns but only {A_r.shape[0]} real equations")
    return A_r, b_r


def solve_truncated(samples, n_unknown_h):
    """Least-squares solve of the row-normalised truncated system (SVD based)."""
    A, b = build_rows(samples, n_unknown_h)
    norms = np.linalg.norm(A, axis=1)
    keep = norms > 0
    A = A[keep] / norms[keep, None]
    b = b[keep] / norms[keep]
    u, s, vt = np.linalg.svd(A, full_matrices=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    tol = s[0] * max(A.shape) * np.finfo(float).eps
    if s[-1] <= tol:
        raise SingularSystemError(f"rank-deficient system (condition {cond:.3g})", cond)
    sol = vt.T @ ((u.T @ b) / s)
    residual = float(np.linalg.norm(A @ sol - b))
    xi = sol[2:]
    m = np.arange(xi.size)
    h = xi * np.sqrt(2 * m + 1) / math.sqrt(2 * math.pi)
    return NSBFHead(float(sol[0]), float(sol[1]), h, cond=cond, residual_norm=residual)


def real_row_count(samples):
    return sum(2 if (abs(s.z.imag) > 0 or (not s.is_infinite and s.M.imag != 0)) else 1
               for s in samples)


def auto_truncate(samples, cond_limit=1e5, fail_cond=1e6, start=None, min_size=4, history=None):
    """Pick the number of ``h_n`` by the condition-number rule and solve.

    Starts from 10 coefficients (fewer than 30 samples) or 20.  If the scaled
    matrix has condition number below ``cond_limit`` coefficients are added
    one at a time while it stays below; otherwise they are removed until it
    drops below (but not under ``min_size``).  The largest admissible size is
    returned.  If ``history`` is a list, ``(n_unknown_h, cond, h)`` triples
    are appended.
    """
    if len(samples) < 12:
        raise InvalidInputError("auto truncation needs at least 12 samples")
    n_max = real_row_count(samples) - 2
    n = start if start is not None else (10 if len(samples) < 30 else 20)
    n = max(1, min(n, n_max))
    min_size = min(min_size, n)

    def attempt(size):
        try:
            head = solve_truncated(samples, size)
        except SingularSystemError as exc:
            if history is not None:
                history.append((size, exc.cond, math.nan))
            return None
        if history is not None:
            history.append((size, head.cond, head.h))
        return head

    head = attempt(n)
    while (head is None or head.cond >= cond_limit) and n > min_size:
        n -= 1
        head = attempt(n)
    if head is None or head.cond > fail_cond:
        cond = math.inf if head is None else head.cond
        raise IllConditionedInputError(
            f"condition number {cond:.3g} with {n} coefficients exceeds {fail_cond:g}", cond)
    if head.cond >= cond_limit:
        return head
    while n < n_max:
        trial = attempt(n + 1)
        if trial is None or trial.cond >= cond_limit:
            break
        head, n = trial, n + 1
    return head


@dataclass
class DensityReport:
    """Advisory check of the sample-density requirements.

    ``terms[k] = (z_k - k^2/4)_+ / k^2`` (0 for ``k = 0``); ``rule_violations[k]``
    is set where ``rho_k >= k/2 + 1``.  ``condition_satisfied`` judges
    summability of ``terms`` from their tail: ``k * terms[k]`` must decay
    (log-log slope below ``-0.5``) or vanish.
    """

    terms: np.ndarray
    rule_violations: np.ndarray
    tail_slope: float
    condition_satisfied: bool

    @property
    def rule_satisfied(self):
        return not bool(np.any(self.rule_violations))

    @property
    def flagged(self):
        return not self.condition_satisfied


def density_check(samples):
    z = np.sort(np.array([complex(s.z).real if hasattr(s, "z") else float(s) for s in samples]))
    k = np.arange(z.size)
    terms = np.zeros(z.size)
    terms[1:] = np.maximum(z[1:] - k[1:] ** 2 / 4.0, 0.0) / k[1:] ** 2
    rho = np.sqrt(np.maximum(z, 0.0))
    violations = rho >= k / 2.0 + 1.0
    tail = k >= max(1, z.size // 2)
    s = k[tail] * terms[tail]
    pos = s > 1e-14
    if pos.sum() < 3:
        slope = -math.inf
    else:
        slope = float(np.polyfit(np.log(k[tail][pos]), np.log(s[pos]), 1)[0])
    return DensityReport(terms, violations, slope, slope < -0.5)
