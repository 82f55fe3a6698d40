"""Densities and differential entropies of the two mod-interval noise laws.

The wrapped Gaussian is the exact law of Gaussian noise folded onto one
lattice period; the truncated Gaussian at the same scale parameter is the
closed-form bounding device used by the rate bound. Entropies are returned
in bits together with the quadrature error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import LOG2_E, SQRT_2, SQRT_2PI, QuadratureResult, erf, integrate


@dataclass(frozen=True)
class TruncatedGaussian:
    """Zero-mean normal with scale parameter, renormalized to [-half_width, half_width]."""

    scale: float
    half_width: float

    def __post_init__(self):
        if not (self.scale > 0.0 and self.half_width > 0.0):
            raise ValueError(
                f"scale and half_width must be positive, got {self.scale}, {self.half_width}"
            )

    @property
    def normalization(self) -> float:
        # Mass of the untruncated normal inside the support.
        return erf(self.half_width / (SQRT_2 * self.scale))


@dataclass(frozen=True)
class WrappedGaussian:
    """Zero-mean normal with std ``scale`` reduced modulo ``period``."""

    scale: float
    period: float

    def __post_init__(self):
        if not (self.scale > 0.0 and self.period > 0.0):
            raise ValueError(
                f"scale and period must be positive, got {self.scale}, {self.period}"
            )


@dataclass(frozen=True)
class EntropyBits:
    bits: float
    err: float = 0.0


def truncated_pdf(d, tg: TruncatedGaussian):
    """Density of the truncated normal; zero outside the support."""
    d = np.asarray(d, dtype=float)
    s = tg.scale
    z = tg.normalization
    u = d / s
    out = np.where(
        np.abs(d) <= tg.half_width,
        np.exp(-0.5 * u * u) / (s * z * SQRT_2PI),
        0.0,
    )
    return float(out) if out.ndim == 0 else out


def wrapped_pdf(x, wg: WrappedGaussian):
    """Density of the wrapped normal over one period.

    The wrap sum is truncated at K = ceil(8*scale/period) + 2 images; the
    omitted tail mass is below 1e-14.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    s, T = wg.scale, wg.period
    K = int(math.ceil(8.0 * s / T)) + 2
    k = np.arange(-K, K + 1, dtype=float)
    u = (x[:, None] + k[None, :] * T) / s
    out = np.exp(-0.5 * u * u).sum(axis=1) / (s * SQRT_2PI)
    return float(out[0]) if scalar else out


def _neg_p_ln_p(p: np.ndarray) -> np.ndarray:
    # Entropy integrand with the 0*ln(0) = 0 convention (removable
    # singularity at density zeros / underflow).
    safe = np.where(p > 0.0, p, 1.0)
    return np.where(p > 0.0, -p * np.log(safe), 0.0)


def truncated_entropy_quadrature(tg: TruncatedGaussian, tol: float = 1e-10) -> EntropyBits:
    """Differential entropy of the truncated normal by adaptive quadrature."""
    res: QuadratureResult = integrate(
        lambda x: _neg_p_ln_p(np.asarray(truncated_pdf(x, tg), dtype=float)),
        -tg.half_width, tg.half_width, tol=tol,
    )
    return EntropyBits(bits=res.value * LOG2_E,
                       err=max(res.abs_error_estimate, tol) * LOG2_E)


def truncated_entropy_closed_form(tg: TruncatedGaussian) -> EntropyBits:
    """Closed-form upper bound on the truncated-normal entropy, in bits.

    log2(scale * Z) + log2(sqrt(2*pi)) + log2(e) / (2 Z), where Z is the
    retained normal mass. The last term replaces the truncated second
    moment by the full one, which is what makes this an upper bound on
    ``truncated_entropy_quadrature`` (exact only in the no-truncation
    limit).
    """
    z = tg.normalization
    bits = math.log2(tg.scale * z) + math.log2(SQRT_2PI) + LOG2_E / (2.0 * z)
    return EntropyBits(bits=bits, err=0.0)


def wrapped_entropy(wg: WrappedGaussian, tol: float = 1e-10) -> EntropyBits:
    """Differential entropy of the wrapped normal over one period, in bits."""
    half = 0.5 * wg.period
    res = integrate(
        lambda x: _neg_p_ln_p(np.asarray(wrapped_pdf(x, wg), dtype=float)),
        -half, half, tol=tol,
    )
    return EntropyBits(bits=res.value * LOG2_E,
                       err=max(res.abs_error_estimate, tol) * LOG2_E)
