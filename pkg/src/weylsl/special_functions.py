"""Spherical Bessel functions and Legendre polynomials.

Both are evaluated by three-term recurrences, vectorised over the argument.
Spherical Bessel tables cover orders up to ~1e3 and arguments up to ~1e4*pi,
real or complex (small imaginary part).
"""

import math

import numpy as np

from .errors import DomainError, InvalidInputError

__all__ = [
    "spherical_bessel_sequence",
    "spherical_bessel_table",
    "legendre_eval",
    "legendre_table",
]

_TINY_SEED = 1e-300
_RESCALE_AT = 1e250
_SMALL_ARG = 1e-8


def _start_order(n_max, x_abs):
    return n_max + int(math.ceil(10 + 2 * math.sqrt(max(n_max, x_abs))))


def _closed_j0_j1(x):
    s = np.sin(x)
    j0 = s / x
    j1 = s / (x * x) - np.cos(x) / x
    return j0, j1


def _upward(x, n_max, out):
    j0, j1 = _closed_j0_j1(x)
    out[0] = j0
    if n_max >= 1:
        out[1] = j1
    for n in range(1, n_max):
        out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]


def _downward(x, n_max, out):
    # Miller recurrence from a start order well above both n_max and |x|.
    start = _start_order(n_max, float(np.max(np.abs(x))))
    nxt = np.zeros_like(x)
    cur = np.full_like(x, _TINY_SEED)
    for n in range(start, 0, -1):
        prev = (2 * n + 1) / x * cur - nxt
        nxt, cur = cur, prev
        if n - 1 <= n_max:
            out[n - 1] = cur
        big = np.abs(cur) > _RESCALE_AT
        if np.any(big):
            cur = np.where(big, cur / _RESCALE_AT, cur)
            nxt = np.where(big, nxt / _RESCALE_AT, nxt)
            upper = min(n_max, start) + 1
            out[n - 1:upper] = np.where(big, out[n - 1:upper] / _RESCALE_AT, out[n - 1:upper])
    j0, j1 = _closed_j0_j1(x)
    if n_max >= 1:
        use_j0 = np.abs(j0) > 1e-3
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(use_j0, j0 / out[0], j1 / out[1])
    else:
        scale = j0 / out[0]
    out *= scale


def spherical_bessel_table(x, n_max):
    """Return ``j_0(x) .. j_{n_max}(x)`` as an array of shape ``(n_max + 1,) + x.shape``.

    Arguments with ``|x| >= n_max`` use the upward recurrence seeded by the
    closed forms of ``j_0`` and ``j_1`` (stable while the order stays below the
    argument).  Smaller arguments use the downward recurrence normalised
    against ``j_0`` (or ``j_1`` when ``|j_0| <= 1e-3``).  For ``|x| < 1e-8`` the
    leading power-series term ``x**n / (2n+1)!!`` is returned.
    """
    if n_max < 0:
        raise InvalidInputError("n_max must be non-negative")
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("spherical Bessel argument must be finite")
    dtype = np.complex128 if np.iscomplexobj(x) else np.float64
    x = x.astype(dtype)
    shape = x.shape
    flat = x.ravel()
    table = np.zeros((n_max + 1, flat.size), dtype=dtype)

    ax = np.abs(flat)
    small = ax < _SMALL_ARG
    up = (~small) & (ax >= n_max)
    down = (~small) & ~up

    if np.any(small):
        xs = flat[small]
        term = np.ones_like(xs)
        table[0, small] = term
        for n in range(1, n_max + 1):
            term = term * xs / (2 * n + 1)
            table[n, small] = term
    if np.any(up):
        block = np.empty((n_max + 1, int(up.sum())), dtype=dtype)
        _upward(flat[up], n_max, block)
        table[:, up] = block
    if np.any(down):
        block = np.empty((n_max + 1, int(down.sum())), dtype=dtype)
        _downward(flat[down], n_max, block)
        table[:, down] = block
    return table.reshape((n_max + 1,) + shape)


def spherical_bessel_sequence(x, n_max):
    """Spherical Bessel values ``[j_0(x), ..., j_{n_max}(x)]`` at a scalar ``x``."""
    return spherical_bessel_table(np.asarray([x]), n_max)[:, 0]


def legendre_table(n_max, t):
    """``P_0(t) .. P_{n_max}(t)`` by the Bonnet recurrence, shape ``(n_max + 1,) + t.shape``."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + 1e-12):
        raise DomainError("Legendre argument outside [-1, 1]")
    out = np.empty((n_max + 1,) + t.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = t
    for k in range(1, n_max):
        out[k + 1] = ((2 * k + 1) * t * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_eval(n, t):
    """Legendre polynomial ``P_n(t)`` for ``|t| <= 1``."""
    if n < 0:
        raise InvalidInputError("order must be non-negative")
    values = legendre_table(n, t)[n]
    return float(values) if np.ndim(values) == 0 else values
