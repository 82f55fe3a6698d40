"""Closed-form rate expressions: AWGN capacity, the legacy lower bound on
mod-interval signaling, the tighter truncated-Gaussian lower bound, their
shared high-SNR asymptote, and the shaping-loss constant separating them
from capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .entropy import TruncatedGaussian, truncated_entropy_closed_form
from .numerics import LOG2_E, erfc

PI_E = math.pi * math.e


def alpha_mmse(snr: float) -> float:
    """MMSE scaling coefficient sqrt(snr / (1 + snr)) for linear snr > 0."""
    if not (snr > 0.0):
        raise ValueError(f"alpha_mmse requires snr > 0, got {snr}")
    return math.sqrt(snr / (1.0 + snr))


def awgn_capacity(snr: float) -> float:
    """Shannon capacity 0.5*log2(1 + snr) of the real AWGN channel, in bits."""
    if snr < 0.0:
        raise ValueError(f"awgn_capacity requires snr >= 0, got {snr}")
    return 0.5 * math.log1p(snr) * LOG2_E


def bound_original(snr: float) -> float:
    """Legacy lower bound 0.5*log2(6(1+snr)/(pi*e)), unclamped (negative at low snr)."""
    if snr < 0.0:
        raise ValueError(f"bound_original requires snr >= 0, got {snr}")
    return 0.5 * math.log2(6.0 * (1.0 + snr) / PI_E)


def _erf_arg(snr_prime: float) -> float:
    # Substituting the modulus and MMSE scaling into half-width/(sqrt(2)*scale)
    # collapses every lattice quantity into sqrt(1.5*(1 + snr')).
    return math.sqrt(1.5 * (1.0 + snr_prime))


def bound_new(snr_prime: float) -> float:
    """Truncated-Gaussian lower bound on the mod-interval rate, in bits.

    0.5*log2(12(1+s')) - log2(erf(g)) - log2(sqrt(2*pi)) - log2(e)/(2*erf(g))
    with g = sqrt(1.5*(1+s')). Depends only on the effective SNR; the
    lattice period cancels.

    Evaluated as bound_original + gap (an exact algebraic rearrangement,
    see :func:`bound_gap_new_vs_original`) so that the two bounds stay
    ordered down to the last ulp even where erf(g) rounds to 1.
    """
    if snr_prime < 0.0:
        raise ValueError(f"bound_new requires snr_prime >= 0, got {snr_prime}")
    return bound_original(snr_prime) + bound_gap_new_vs_original(snr_prime)


def bound_gap_new_vs_original(snr: float) -> float:
    """bound_new(snr) - bound_original(snr), evaluated without cancellation.

    Algebraically the gap is log2(e)/2 * (1 - 1/Z) - log2(Z) with
    Z = erf(sqrt(1.5*(1+snr))). Above ~14 dB, Z rounds to 1.0 and the naive
    difference collapses to exactly zero although the true gap is merely
    below one ulp; rewriting in terms of c = erfc(...) keeps full relative
    accuracy down to the underflow limit.
    """
    if snr < 0.0:
        raise ValueError(f"bound gap requires snr >= 0, got {snr}")
    c = erfc(_erf_arg(snr))
    # gap = log2(e) * [ -ln(1-c) - c / (2(1-c)) ]  ~  log2(e) * c/2 for small c
    return LOG2_E * (-math.log1p(-c) - c / (2.0 * (1.0 - c)))


def asymptote(snr: float) -> float:
    """Common high-SNR limit 0.5*log2(6*snr/(pi*e)) of both lower bounds."""
    if not (snr > 0.0):
        raise ValueError(f"asymptote requires snr > 0, got {snr}")
    return 0.5 * math.log2(6.0 * snr / PI_E)


def shaping_loss_db() -> float:
    """Uniform-vs-Gaussian signaling penalty, 10*log10(pi*e/6) ~ 1.533 dB."""
    return 10.0 * math.log10(PI_E / 6.0)


def shaping_loss_bits() -> float:
    """The same penalty expressed vertically: 0.5*log2(pi*e/6) ~ 0.2546 bits."""
    return 0.5 * math.log2(PI_E / 6.0)


def snr_prime(p_total: float, sigma_s2: float, sigma_n2: float) -> float:
    """Effective SNR p_total / (sigma_s2 + sigma_n2) with residual interference."""
    if not (p_total > 0.0):
        raise ValueError(f"p_total must be positive, got {p_total}")
    if sigma_s2 < 0.0:
        raise ValueError(f"sigma_s2 must be nonnegative, got {sigma_s2}")
    if not (sigma_n2 > 0.0):
        raise ValueError(f"sigma_n2 must be positive, got {sigma_n2}")
    return p_total / (sigma_s2 + sigma_n2)


def bound_new_from_entropy(snr_prime_lin: float, t: float = 1.0) -> float:
    """Cross-check route for bound_new: log2(t) minus the closed-form entropy
    at scale t/sqrt(12(1+snr')). Agrees with :func:`bound_new` to ~1e-15 for
    any t, which is the scale-freedom property of the bound.
    """
    scale = t / math.sqrt(12.0 * (1.0 + snr_prime_lin))
    ent = truncated_entropy_closed_form(TruncatedGaussian(scale=scale, half_width=0.5 * t))
    return math.log2(t) - ent.bits


@dataclass(frozen=True)
class NoiseModel:
    """Noise bookkeeping for one operating point.

    ``alpha`` is the MMSE coefficient for the effective SNR the model was
    built from (equal to the plain SNR when there is no residual
    interference).
    """

    sigma_n2: float
    sigma_s2: float
    sigma2: float
    alpha: float
    snr: float
    snr_prime: float

    @classmethod
    def from_snr(cls, snr: float, p_total: float = 1.0) -> "NoiseModel":
        """Interference-free model at linear ``snr``."""
        if not (snr > 0.0):
            raise ValueError(f"snr must be positive, got {snr}")
        sigma_n2 = p_total / snr
        return cls(sigma_n2=sigma_n2, sigma_s2=0.0, sigma2=sigma_n2,
                   alpha=alpha_mmse(snr), snr=snr, snr_prime=snr)

    @classmethod
    def from_snr_db(cls, snr_db: float, p_total: float = 1.0) -> "NoiseModel":
        return cls.from_snr(10.0 ** (snr_db / 10.0), p_total=p_total)

    @classmethod
    def from_powers(cls, p_total: float, sigma_s2: float, sigma_n2: float) -> "NoiseModel":
        """Model from measured powers; alpha follows the effective SNR."""
        sp = snr_prime(p_total, sigma_s2, sigma_n2)
        return cls(sigma_n2=sigma_n2, sigma_s2=sigma_s2, sigma2=sigma_s2 + sigma_n2,
                   alpha=alpha_mmse(sp), snr=p_total / sigma_n2, snr_prime=sp)


@dataclass
class RatePoint:
    """One row of a rate curve; optional fields stay None when a run mode
    does not produce them (they become empty CSV fields, never dropped
    columns)."""

    snr_db: float
    c_awgn: float
    bound_original: float
    bound_new: float
    asymptote: float
    exact_modt: Optional[float] = None
    mc_rate: Optional[float] = None
    snr_prime_db: Optional[float] = None
    sigma_s2: Optional[float] = None
