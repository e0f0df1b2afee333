"""Potential specifications and the built-in test catalog."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError

PI = np.pi


@dataclass(frozen=True)
class PotentialSpec:
    """Robin problem ``-y'' + q y = rho^2 y``, ``y'(0) = h y(0)``, ``y'(pi) = -H y(pi)``.

    ``q`` must accept numpy arrays.  ``breakpoints`` lists interior points
    where ``q`` or a low derivative jumps; integrators put mesh nodes there.
    """

    q: Callable[[np.ndarray], np.ndarray]
    h: float = 0.0
    H: float = 0.0
    label: str = ""
    breakpoints: tuple = field(default=())
    length: float = PI

    def with_bc(self, h=None, H=None):
        return PotentialSpec(self.q, self.h if h is None else h, self.H if H is None else H,
                             self.label, self.breakpoints, self.length)

    def restricted(self, a):
        """Same potential on ``[0, a]`` (the right boundary constant is kept but unused)."""
        if not 0 < a <= self.length:
            raise InvalidInputError("restriction point outside the interval")
        bps = tuple(b for b in self.breakpoints if b < a)
        return PotentialSpec(self.q, self.h, self.H, self.label, bps, a)


def _q_free(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _q1(x):
    x = np.asarray(x, dtype=float)
    return 16.0 / PI**2 * x**2 * np.exp(2.0 - 8.0 * x / PI)


def _q2(x):
    x = np.asarray(x, dtype=float)
    return np.abs(3.0 - np.abs(x**2 - 3.0))


def _q3(x):
    x = np.asarray(x, dtype=float)
    return np.select(
        [
            x <= PI / 8,
            x <= PI / 4,
            x < 3 * PI / 8,
            x < 3 * PI / 5,
            x < 4 * PI / 5,
        ],
        [
            0.0,
            -12.0 * x / PI + 1.5,
            12.0 * x / PI - 4.5,
            0.0,
            4.0,
        ],
        default=2.0,
    )


_S3 = np.sqrt(3.0)
_S6 = np.sqrt(6.0)
_Q4_AT_S6 = _S3 + 6.0 * (_S6 - _S3) - (_S6**3 - _S3**3) / 3.0


def _q4(x):
    x = np.asarray(x, dtype=float)
    first = x**3 / 3.0
    second = _S3 + 6.0 * (x - _S3) - (x**3 - _S3**3) / 3.0
    third = _Q4_AT_S6 + (x**3 - _S6**3) / 3.0 - 6.0 * (x - _S6)
    return np.where(x <= _S3, first, np.where(x <= _S6, second, third))


def _q5(x):
    x = np.asarray(x, dtype=float)
    return (np.exp(x) - x**2) / 12.0


_CATALOG = {
    "free": (_q_free, ()),
    "q1": (_q1, ()),
    "q2": (_q2, (_S3, _S6)),
    "q3": (_q3, (PI / 8, PI / 4, 3 * PI / 8, 3 * PI / 5, 4 * PI / 5)),
    "q4": (_q4, (_S3, _S6)),
    "q5": (_q5, ()),
}


def catalog_names():
    return sorted(_CATALOG)


def catalog(name, h=None, H=None):
    """Built-in potential by name.  Defaults: ``h = H = 0`` for ``free``, ``h = 1, H = 2`` otherwise."""
    try:
        q, bps = _CATALOG[name]
    except KeyError:
        raise InvalidInputError(f"unknown potential {name!r}; choose from {catalog_names()}") from None
    if h is None:
        h = 0.0 if name == "free" else 1.0
    if H is None:
        H = 0.0 if name == "free" else 2.0
    return PotentialSpec(q, float(h), float(H), name, bps)


def tabulated(x, values, h=0.0, H=0.0, label="table"):
    """Potential given on sample points, linearly interpolated; the nodes become breakpoints."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.shape != values.shape or x.size < 2:
        raise InvalidInputError("tabulated potential needs matching 1-D arrays of length >= 2")
    if np.any(np.diff(x) <= 0):
        raise InvalidInputError("tabulated potential nodes must be strictly increasing")

    def q(t):
        return np.interp(t, x, values)

    interior = tuple(float(v) for v in x if 0.0 < v < PI)
    return PotentialSpec(q, float(h), float(H), label, interior)
