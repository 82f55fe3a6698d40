"""Channel factorization and filter synthesis for the multiuser downlink.

The channel H (M users x N transmit antennas, M <= N) is factored as
H = L Q with L lower-triangular and Q row-orthonormal; the feedforward
filter is F = Q^T, the receiver gains are G = diag(1/L_ii), and the
feedback filter is B = G L (unit diagonal). The regularized variant
factors the row-augmented matrix [H | sqrt(reg) I] instead, trading exact
interference cancellation for bounded noise amplification.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .bounds import NoiseModel
from .modulo import Modulus, mod_t


class SingularChannelError(ValueError):
    """Channel rows are (numerically) linearly dependent."""

    def __init__(self, row: int, pivot: float, threshold: float):
        super().__init__(
            f"channel is rank deficient at row {row}: |L[{row},{row}]| = "
            f"{pivot:.3e} < {threshold:.3e}"
        )
        self.row = row


@dataclass(frozen=True)
class PrecoderSet:
    """Immutable filter bundle for one channel realization.

    ``q`` keeps the full row-orthonormal factor of whatever matrix was
    factored (H for "zf", the augmented channel for "mmse"), so l @ q
    reconstructs it; ``f`` is always the N x M feedforward filter acting on
    the physical antennas.
    """

    h: np.ndarray
    l: np.ndarray
    q: np.ndarray
    f: np.ndarray
    b: np.ndarray
    g: np.ndarray
    kind: str
    regularization: float = 0.0
    ordering: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def m(self) -> int:
        return self.h.shape[0]

    @property
    def n(self) -> int:
        return self.h.shape[1]

    def residual(self) -> np.ndarray:
        """Interference matrix R = G H F - B (zero for exact inversion)."""
        return self.g @ self.h[list(self.ordering), :] @ self.f - self.b


def _validate_channel(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.ndim != 2:
        raise ValueError(f"channel must be a 2-D matrix, got shape {h.shape}")
    m, n = h.shape
    if m > n:
        raise ValueError(f"need users <= tx antennas, got {m} > {n}")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel entries must be finite")
    return h


def lq_decompose(h: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Factor h = L Q with L lower-triangular, diag(L) > 0, Q Q^T = I.

    The sign convention (positive diagonal of L) makes the factorization
    unique and deterministic; sign flips are pushed into Q.
    """
    h = _validate_channel(h)
    qt, r = np.linalg.qr(h.T)  # h^T = qt r  =>  h = r^T qt^T
    l = r.T.copy()
    q = qt.T.copy()
    scale = np.linalg.norm(h)
    threshold = 1e-12 * max(scale, 1e-300)
    for i in range(l.shape[0]):
        if abs(l[i, i]) < threshold:
            raise SingularChannelError(row=i, pivot=abs(l[i, i]), threshold=threshold)
    signs = np.sign(np.diag(l))
    l *= signs[None, :]
    q *= signs[:, None]
    return l, q


def _resolve_ordering(m: int, ordering: Optional[Sequence[int]]) -> Tuple[int, ...]:
    if ordering is None:
        return tuple(range(m))
    perm = tuple(int(i) for i in ordering)
    if sorted(perm) != list(range(m)):
        raise ValueError(f"ordering must be a permutation of 0..{m - 1}, got {perm}")
    return perm


def synthesize_zf(h: np.ndarray, ordering: Optional[Sequence[int]] = None) -> PrecoderSet:
    """Zero-forcing THP filters: G H F = B exactly (up to rounding)."""
    h = _validate_channel(h)
    perm = _resolve_ordering(h.shape[0], ordering)
    l, q = lq_decompose(h[list(perm), :])
    f = q.T
    g = np.diag(1.0 / np.diag(l))
    b = g @ l
    return PrecoderSet(h=h, l=l, q=q, f=f, b=b, g=g, kind="zf",
                       regularization=0.0, ordering=perm)


def synthesize_mmse(
    h: np.ndarray,
    noise: NoiseModel,
    m: Modulus,
    ordering: Optional[Sequence[int]] = None,
    regularization: Optional[float] = None,
) -> PrecoderSet:
    """Regularized THP filters from the LQ factorization of [H | sqrt(reg) I].

    The default regularization is users * sigma_n^2 / p_t (the classic
    users/SNR loading). reg = 0 reduces to the zero-forcing filters.
    """
    h = _validate_channel(h)
    users = h.shape[0]
    if regularization is None:
        if not (noise.sigma_n2 > 0.0):
            raise ValueError("default regularization needs sigma_n2 > 0")
        regularization = users * noise.sigma_n2 / m.p_t
    if regularization < 0.0:
        raise ValueError(f"regularization must be nonnegative, got {regularization}")

    perm = _resolve_ordering(users, ordering)
    hp = h[list(perm), :]
    h_aug = np.hstack([hp, np.sqrt(regularization) * np.eye(users)])
    l, q = lq_decompose(h_aug)
    f = q[:, : h.shape[1]].T
    g = np.diag(1.0 / np.diag(l))
    b = g @ l
    return PrecoderSet(h=h, l=l, q=q, f=f, b=b, g=g, kind="mmse",
                       regularization=float(regularization), ordering=perm)


def thp_encode(w: np.ndarray, pset: PrecoderSet, m: Modulus) -> Tuple[np.ndarray, np.ndarray]:
    """Successive modulo encoding: v_i = mod_t(w_i - sum_{j<i} B_ij v_j).

    ``w`` is the symbol vector (length M) or a batch of shape (M, uses);
    every entry must lie in the fundamental cell. Returns the antenna
    signal x = F v and the wrapped layer symbols v (both in the precoder's
    user ordering for v, physical antennas for x).
    """
    w = np.asarray(w, dtype=float)
    if w.shape[0] != pset.m:
        raise ValueError(f"expected {pset.m} user symbols, got {w.shape[0]}")
    if np.any(np.abs(w) > m.half):
        raise ValueError("symbols must lie in [-t/2, t/2]")
    wp = w[list(pset.ordering), ...]
    v = np.zeros_like(wp)
    for i in range(pset.m):
        feedback = pset.b[i, :i] @ v[:i] if i else 0.0
        v[i] = mod_t(wp[i] - feedback, m)
    x = pset.f @ v
    return x, v


def receiver_decode(y: np.ndarray, pset: PrecoderSet, alpha: float, m: Modulus) -> np.ndarray:
    """Per-user decode z_i = mod_t(alpha * G_ii * y_i), in original user order."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] != pset.m:
        raise ValueError(f"expected {pset.m} received samples, got {y.shape[0]}")
    gains = np.diag(pset.g)
    yp = y[list(pset.ordering), ...]
    zp = mod_t(alpha * gains.reshape((-1,) + (1,) * (y.ndim - 1)) * yp, m)
    z = np.empty_like(np.asarray(zp, dtype=float))
    z[list(pset.ordering), ...] = zp
    return z
