"""Scalar modulo-lattice operator and the power-to-modulus mapping.

The transmit alphabet is the interval [-t/2, t/2); wrapping onto it keeps
the precoded signal power at t^2/12 regardless of the interference being
pre-subtracted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Modulus:
    """Lattice period t > 0. Transmit power p_t = t^2/12 is derived."""

    t: float

    def __post_init__(self):
        if not (self.t > 0.0) or not math.isfinite(self.t):
            raise ValueError(f"modulus t must be positive and finite, got {self.t}")

    @property
    def p_t(self) -> float:
        return self.t * self.t / 12.0

    @property
    def half(self) -> float:
        return 0.5 * self.t


def t_from_power(p_total: float) -> Modulus:
    """Modulus whose uniform alphabet carries power ``p_total``: t = sqrt(12 p)."""
    if not (p_total > 0.0):
        raise ValueError(f"transmit power must be positive, got {p_total}")
    return Modulus(t=math.sqrt(12.0 * p_total))


def mod_t(y, m: Modulus):
    """Wrap ``y`` (scalar or ndarray) onto [-t/2, t/2).

    Computed as y - floor((y + t/2)/t) * t. Values within a few ulps of a
    wrap boundary are not special-cased; boundary events have probability
    zero under every distribution simulated here.
    """
    t = m.t
    y = np.asarray(y, dtype=float)
    out = y - np.floor((y + 0.5 * t) / t) * t
    return float(out) if out.ndim == 0 else out
