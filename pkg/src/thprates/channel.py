"""Randomness and the two realizations of the dirty-paper chain.

``dpc_chain`` is the literal encoder/channel/decoder loop; ``mod_t_channel``
is the equivalent additive mod-interval channel z = [w + [alpha n] mod t]
mod t. At alpha = 1 the two agree in distribution; below 1 the literal
chain carries an extra self-noise term, which the verification suite
reports rather than asserts away.

All sampling goes through :class:`RngStream`: counter-based bits (Philox)
mapped to uniforms on a fixed 53-bit grid, with normals produced by the
inverse CDF. That keeps every golden file reproducible across platforms
and thread layouts, at some cost in raw sampling speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modulo import Modulus, mod_t
from .numerics import std_normal_ppf
from .precoder import PrecoderSet, thp_encode

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> int:
    # Finalizer of the splitmix64 generator; used only to derive child
    # stream ids that cannot collide by accident.
    z = (z + _GOLDEN64) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    Identical keys give identical draw sequences on every platform. Child
    streams for independent sweep points come from :meth:`derive`, so
    concurrent evaluation cannot change any result.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = self.seed | (self.stream_id << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def derive(self, k: int) -> "RngStream":
        child = _splitmix64(self.stream_id ^ _splitmix64(k))
        return RngStream(self.seed, child)

    def uniforms(self, n) -> np.ndarray:
        """Uniforms on the open interval (0, 1), at 53-bit resolution."""
        raw = self._gen.integers(0, 1 << 53, size=n, dtype=np.uint64)
        return (raw.astype(float) + 0.5) / float(1 << 53)

    def uniform(self, low: float, high: float, n) -> np.ndarray:
        return low + (high - low) * self.uniforms(n)

    def normals(self, n, sigma: float = 1.0) -> np.ndarray:
        """Zero-mean normals via the inverse CDF of the uniform draws."""
        return sigma * std_normal_ppf(self.uniforms(n))


@dataclass(frozen=True)
class ChannelSample:
    """All intermediates of one batch of multiuser chain uses (arrays are
    users x uses, except the antenna signal). ``x`` is the modulo encoder
    output (always inside the fundamental cell); ``x_antenna`` is the
    feedforward-filtered transmit signal. ``n_mmse`` is the in-system noise
    seen in the symbol domain: residual interference plus
    receiver-gain-scaled AWGN."""

    w: np.ndarray
    s: np.ndarray
    x: np.ndarray
    x_antenna: np.ndarray
    n: np.ndarray
    n_mmse: np.ndarray
    y: np.ndarray
    z: np.ndarray
    s_resid: np.ndarray


def gen_channel(m: int, n: int, rng: RngStream) -> np.ndarray:
    """i.i.d. standard normal m x n channel matrix."""
    if not (1 <= m <= n):
        raise ValueError(f"need 1 <= users <= tx antennas, got {m}, {n}")
    return rng.normals(m * n).reshape(m, n)


def awgn(length: int, sigma_n: float, rng: RngStream) -> np.ndarray:
    """Zero-mean white Gaussian samples with std sigma_n (zeros for sigma_n = 0)."""
    if sigma_n < 0.0:
        raise ValueError(f"sigma_n must be nonnegative, got {sigma_n}")
    if sigma_n == 0.0:
        return np.zeros(length)
    return rng.normals(length, sigma_n)


def dpc_chain(w, s, alpha: float, sigma: float, m: Modulus, rng: RngStream):
    """Literal scalar dirty-paper chain, vectorized over samples.

    x = mod_t(w - alpha s); y = x + s + n; z = mod_t(alpha y).
    """
    w = np.asarray(w, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(w) > m.half):
        raise ValueError("symbols must lie in [-t/2, t/2]")
    x = mod_t(w - alpha * s, m)
    n = awgn(np.broadcast(w, s).size, sigma, rng).reshape(np.broadcast(w, s).shape)
    y = x + s + n
    return mod_t(alpha * y, m)


def mod_t_channel(w, alpha: float, sigma: float, m: Modulus, rng: RngStream):
    """Abstract mod-t channel z = mod_t(w + mod_t(alpha n)), n ~ N(0, sigma^2)."""
    w = np.asarray(w, dtype=float)
    if np.any(np.abs(w) > m.half):
        raise ValueError("symbols must lie in [-t/2, t/2]")
    if sigma < 0.0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    n = awgn(w.size, sigma, rng).reshape(w.shape)
    return mod_t(w + mod_t(alpha * n, m), m)


def run_multiuser_chain(pset: PrecoderSet, sigma_n: float, m: Modulus,
                        uses: int, rng: RngStream, alpha: float = 1.0) -> ChannelSample:
    """One batch of the full precoded downlink with uniform data symbols.

    The receiver output ``z`` uses the literal per-user decode with the
    given alpha; rate estimation may replace it with the model decode (see
    rates module).
    """
    users = pset.m
    w = rng.uniform(-m.half, m.half, (users, uses))
    x, v = thp_encode(w, pset, m)
    n = awgn(users * uses, sigma_n, rng).reshape(users, uses)
    hp = pset.h[list(pset.ordering), :]
    y = hp @ x + n
    gains = np.diag(pset.g)[:, None]
    s_resid = pset.residual() @ v
    n_mmse = s_resid + gains * n
    s = (pset.b - np.eye(users)) @ v  # causal interference the feedback removed
    z = mod_t(alpha * gains * y, m)
    # all per-user arrays except w were computed in precoder ordering; map
    # back to the original user indexing
    inv = np.argsort(np.asarray(pset.ordering))
    return ChannelSample(w=w, s=s[inv], x=v[inv], x_antenna=x, n=n[inv],
                         n_mmse=n_mmse[inv], y=y[inv], z=z[inv],
                         s_resid=s_resid[inv])


def estimate_residual_variance(pset: PrecoderSet, m: Modulus, trials: int,
                               rng: RngStream) -> float:
    """Monte Carlo residual-interference variance of the noiseless chain.

    Per-user variance of (G H F - B) v, averaged over users; exact
    zero-forcing precoders come out at rounding-noise level (< 1e-18).
    """
    if trials < 10_000:
        raise ValueError(f"need at least 1e4 trials for a stable estimate, got {trials}")
    w = rng.uniform(-m.half, m.half, (pset.m, trials))
    _, v = thp_encode(w, pset, m)
    resid = pset.residual() @ v
    return float(np.mean(np.var(resid, axis=1)))
