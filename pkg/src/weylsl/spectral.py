"""Characteristic functions rebuilt from an NSBF head, eigenvalues and norming constants."""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, IncompleteSpectrumError, InvalidInputError, ReconstructionQualityError
from .special_functions import spherical_bessel_table

__all__ = [
    "SpectralData",
    "delta_M",
    "delta0_M",
    "delta_prime_M",
    "find_eigenvalues",
    "norming_constants",
    "shift_spectrum",
    "default_eigen_count",
]

PI = math.pi
_CHUNK = 20000
_SMALL_RHO = 1e-7


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues with norming constants; ``shift`` records a subtracted ``lambda_0``."""

    lambdas: np.ndarray
    alphas: np.ndarray
    omega: float
    omega2: float
    shift: float = 0.0

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        alp = np.asarray(self.alphas, dtype=float)
        if lam.shape != alp.shape or lam.ndim != 1:
            raise InvalidInputError("lambdas and alphas must be 1-D arrays of equal length")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "alphas", alp)

    @property
    def rhos(self):
        return np.sqrt(np.maximum(self.lambdas, 0.0))

    def truncated(self, count):
        return replace(self, lambdas=self.lambdas[:count], alphas=self.alphas[:count])

    @classmethod
    def free(cls, count):
        n = np.arange(count, dtype=float)
        alphas = np.full(count, PI / 2)
        alphas[0] = PI
        return cls(n * n, alphas, 0.0, 0.0, 0.0)


def _as_rho(rho):
    rho = np.asarray(rho)
    scalar = rho.ndim == 0
    return np.atleast_1d(rho), scalar


def _out(values, scalar):
    if scalar:
        v = values[0]
        return complex(v) if np.iscomplexobj(values) else float(v)
    return values


def _bessel_sums(head, rho, odd_extra=False):
    """Even sum ``2 sum (-1)^n h_2n j_2n`` and odd ``2 sum (-1)^n h_2n+1 j_2n+1`` at ``rho pi``.

    With ``odd_extra`` also returns ``2 sum (-1)^n h_2n (2n j_2n / rho - pi j_2n+1)``.
    """
    h = head.h_coeffs
    M = h.size - 1
    top = M + 1 if odd_extra else M
    m = np.arange(h.size)
    sign = np.where((m // 2) % 2 == 0, 1.0, -1.0)
    w = 2.0 * sign * h
    even = m % 2 == 0
    dtype = np.result_type(rho, float)
    even_sum = np.zeros(rho.shape, dtype=dtype)
    odd_sum = np.zeros(rho.shape, dtype=dtype)
    deriv_sum = np.zeros(rho.shape, dtype=dtype) if odd_extra else None
    for start in range(0, rho.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        r = rho[sl]
        jt = spherical_bessel_table(r * PI, max(top, 0))
        even_sum[sl] = w[even] @ jt[m[even]]
        if np.any(~even):
            odd_sum[sl] = w[~even] @ jt[m[~even]]
        if odd_extra:
            me = m[even]
            with np.errstate(divide="ignore", invalid="ignore"):
                deriv_sum[sl] = w[even] @ (me[:, None] * jt[me] / r - PI * jt[me + 1])
    return even_sum, odd_sum, deriv_sum


def delta_M(head, rho):
    """``-rho sin(rho pi) + omega cos(rho pi) + 2 sum (-1)^n h_2n j_2n(rho pi)``."""
    r, scalar = _as_rho(rho)
    even, _, _ = _bessel_sums(head, r)
    x = r * PI
    return _out(-r * np.sin(x) + head.omega * np.cos(x) + even, scalar)


def delta0_M(head, rho):
    """``cos(rho pi) + omega2 sin(rho pi)/rho + (2/rho) sum (-1)^n h_2n+1 j_2n+1(rho pi)``.

    At ``rho = 0`` the limit ``1 + pi omega2 + 2 pi h_1 / 3`` is used.
    """
    r, scalar = _as_rho(rho)
    _, odd, _ = _bessel_sums(head, r)
    x = r * PI
    zero = r == 0
    safe = np.where(zero, 1.0, r)
    val = np.cos(x) + head.omega2 * np.sin(x) / safe + odd / safe
    if np.any(zero):
        h1 = head.h_coeffs[1] if head.h_coeffs.size > 1 else 0.0
        val = np.where(zero, 1.0 + PI * head.omega2 + 2.0 * PI * h1 / 3.0, val)
    return _out(val, scalar)


def delta_prime_M(head, rho):
    """``d/d rho`` of :func:`delta_M` (``rho != 0``)."""
    r, scalar = _as_rho(rho)
    if np.any(r == 0):
        raise DomainError("delta_prime_M is undefined at rho = 0")
    _, _, deriv = _bessel_sums(head, r, odd_extra=True)
    x = r * PI
    val = -(1.0 + PI * head.omega) * np.sin(x) - PI * r * np.cos(x) + deriv
    return _out(val, scalar)


def _dd_lambda_limit(head):
    # lim_{rho -> 0} delta_prime_M(rho) / rho
    h = head.h_coeffs
    h0 = h[0] if h.size > 0 else 0.0
    h2 = h[2] if h.size > 2 else 0.0
    return -PI * (2.0 + PI * head.omega) - 2.0 * PI**2 * h0 / 3.0 - 4.0 * PI**2 * h2 / 15.0


def _s_to_rho(s):
    return np.where(s >= 0, s + 0j, 1j * np.abs(s))


def _delta_on_s(head, s):
    # Real scan variable: rho = s for s >= 0, rho = i|s| below (negative lambda).
    neg = s < 0
    out = np.empty(s.shape)
    if np.any(~neg):
        out[~neg] = delta_M(head, s[~neg])
    if np.any(neg):
        out[neg] = np.real(delta_M(head, 1j * np.abs(s[neg])))
    return out


def find_eigenvalues(head, count, step=0.01, lambda_floor=-100.0):
    """First ``count`` zeros ``lambda_k`` of :func:`delta_M`, ascending.

    Sign changes are located on a uniform scan of ``s`` (``lambda = sign(s) s^2``)
    covering ``[lambda_floor, (count + |omega| + 3)^2]`` and refined by
    vectorised bisection followed by one secant step.
    """
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    s_hi = count + abs(head.omega) + 3.0
    s_lo = -math.sqrt(max(-lambda_floor, 0.0))
    s = np.arange(s_lo, s_hi + step / 2, step)
    f = _delta_on_s(head, s)
    idx = np.nonzero((f[:-1] * f[1:] < 0) | (f[:-1] == 0))[0]
    lo, hi = s[idx].copy(), s[idx + 1].copy()
    f_lo, f_hi = f[idx].copy(), f[idx + 1].copy()
    exact = f_lo == 0
    for _ in range(64):
        if np.all(hi - lo <= 4e-16 * np.maximum(1.0, np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        fm = _delta_on_s(head, mid)
        move_hi = (np.sign(fm) == np.sign(f_hi)) & ~exact
        hi = np.where(move_hi, mid, hi)
        f_hi = np.where(move_hi, fm, f_hi)
        lo = np.where(move_hi | exact, lo, mid)
        f_lo = np.where(move_hi | exact, f_lo, fm)
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.where(exact | (f_hi == f_lo), lo, lo - f_lo * (hi - lo) / (f_hi - f_lo))
    root = np.clip(root, lo, hi)
    lam = np.sign(root) * root * root
    order = np.argsort(lam)
    lam, root = lam[order], root[order]
    if root.size > 1:
        gaps = np.diff(root)
        if np.any(gaps < 2 * step) or np.any(gaps[root[1:] > 5] > 1.5):
            warnings.warn("possible double or missed root in eigenvalue scan", RuntimeWarning,
                          stacklevel=2)
    if lam.size < count:
        raise IncompleteSpectrumError(f"found {lam.size} of {count} eigenvalues", lam)
    return lam[:count]


def norming_constants(head, lambdas):
    """``alpha_k = -Delta'(rho_k) / (2 rho_k Delta0(rho_k))``, the residue formula in ``rho``.

    Negative eigenvalues use ``rho = i sqrt(-lambda)``; ``|rho| < 1e-7`` uses the
    ``rho -> 0`` limit of ``Delta'(rho)/rho``.
    """
    lam = np.asarray(lambdas, dtype=float)
    rho = np.where(lam >= 0, np.sqrt(np.abs(lam)) + 0j, 1j * np.sqrt(np.abs(lam)))
    small = np.abs(rho) < _SMALL_RHO
    alpha = np.empty(lam.shape)
    reg = ~small
    if np.any(reg):
        r = rho[reg]
        if np.all(r.imag == 0):
            r = r.real
        num = delta_prime_M(head, r)
        den = 2.0 * r * delta0_M(head, r)
        alpha[reg] = np.real(-num / den)
    if np.any(small):
        alpha[small] = -_dd_lambda_limit(head) / (2.0 * delta0_M(head, 0.0))
    if np.any(~(alpha > 0)):
        bad = np.nonzero(~(alpha > 0))[0].tolist()
        raise ReconstructionQualityError(f"non-positive norming constants at indices {bad[:10]}")
    return alpha


def shift_spectrum(data):
    """Translate so that ``lambda_0 = 0``; ``omega`` and ``omega2`` move by ``-(pi/2) lambda_0``."""
    lam0 = float(data.lambdas[0])
    if not math.isfinite(lam0):
        raise InvalidInputError("lambda_0 must be finite")
    if lam0 == 0.0:
        return data
    shifted = data.lambdas - lam0
    shifted[0] = 0.0
    return SpectralData(shifted, data.alphas.copy(), data.omega - PI / 2 * lam0,
                        data.omega2 - PI / 2 * lam0, data.shift + lam0)


def default_eigen_count(head, smooth=10_000, rough=1_000, ratio=1e-6):
    """``10^4`` eigenvalues when ``|h_M| / |h_0| < 1e-6`` (fast decay), else ``10^3``."""
    h = np.abs(head.h_coeffs)
    if h.size < 2 or h[0] == 0:
        return rough
    return smooth if h[-1] / h[0] < ratio else rough
