"""Deep linear networks ``x -> W_N ... W_1 x``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matcore import svd


@dataclass(frozen=True)
class LinearNetwork:
    """Layer weights ``W_1 .. W_N`` with ``W_j`` of shape ``(n_j, n_{j-1})``."""

    widths: tuple[int, ...]
    weights: tuple[np.ndarray, ...]

    def __post_init__(self):
        widths = tuple(int(n) for n in self.widths)
        if len(widths) < 2 or any(n < 1 for n in widths):
            raise ValueError(f"invalid widths {self.widths}")
        weights = tuple(np.array(w, dtype=np.float64) for w in self.weights)
        if len(weights) != len(widths) - 1:
            raise ValueError("need exactly one weight matrix per layer")
        for j, w in enumerate(weights):
            if w.shape != (widths[j + 1], widths[j]):
                raise ValueError(
                    f"layer {j + 1} has shape {w.shape}, expected {(widths[j + 1], widths[j])}"
                )
            if not np.all(np.isfinite(w)):
                raise ValueError(f"layer {j + 1} has non-finite entries")
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "weights", weights)

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def output_dim(self) -> int:
        return self.widths[-1]

    def with_weights(self, weights: Sequence[np.ndarray]) -> "LinearNetwork":
        return LinearNetwork(self.widths, tuple(weights))


def _check_widths(widths) -> tuple[int, ...]:
    widths = tuple(int(n) for n in widths)
    if len(widths) < 2 or any(n < 1 for n in widths):
        raise ValueError(f"widths must be >= 2 positive integers, got {widths}")
    return widths


def init_gaussian(widths, std: float, seed: int) -> LinearNetwork:
    """I.i.d. N(0, std^2) entries, deterministic per seed."""
    widths = _check_widths(widths)
    if not std > 0:
        raise ValueError(f"std must be positive, got {std}")
    rng = np.random.default_rng(seed)
    weights = [rng.normal(0.0, std, size=(widths[j + 1], widths[j])) for j in range(len(widths) - 1)]
    return LinearNetwork(widths, tuple(weights))


def init_identity(widths, std: float, offset: float, seed: int) -> LinearNetwork:
    """Gaussian entries plus ``offset`` on every (i, i) position.

    Rectangular layers get the offset on their leading diagonal too.  ``std=0``
    is accepted here and yields exact (partial) identities.
    """
    widths = _check_widths(widths)
    if std < 0:
        raise ValueError(f"std must be non-negative, got {std}")
    rng = np.random.default_rng(seed)
    weights = []
    for j in range(len(widths) - 1):
        shape = (widths[j + 1], widths[j])
        w = rng.normal(0.0, std, size=shape) if std > 0 else np.zeros(shape)
        w += offset * np.eye(*shape)
        weights.append(w)
    return LinearNetwork(widths, tuple(weights))


def factor_balanced(w_e, widths) -> LinearNetwork:
    """Exactly balanced factorization of ``w_e`` into layers of the given widths.

    With thin SVD ``U S V^T`` each layer carries ``S ** (1/N)``; hidden layers
    are padded with the leading standard basis vectors, so every hidden
    width must be at least ``min(k, d)``.
    """
    widths = _check_widths(widths)
    w_e = np.asarray(w_e, dtype=np.float64)
    d, k = widths[0], widths[-1]
    if w_e.shape != (k, d):
        raise ValueError(f"W_e has shape {w_e.shape}, widths need {(k, d)}")
    n = len(widths) - 1
    if n == 1:
        return LinearNetwork(widths, (w_e.copy(),))
    p = min(k, d)
    hidden = widths[1:-1]
    if any(h < p for h in hidden):
        raise ValueError(f"hidden widths {hidden} must all be >= min(k, d) = {p}")
    u, s, v = svd(w_e)
    root = np.diag(s ** (1.0 / n))
    basis = [np.eye(h, p) for h in hidden]
    weights = [basis[0] @ root @ v.T]
    for j in range(1, n - 1):
        weights.append(basis[j] @ root @ basis[j - 1].T)
    weights.append(u @ root @ basis[-1].T)
    return LinearNetwork(widths, tuple(weights))


def init_balanced(widths, std: float, seed: int) -> LinearNetwork:
    """Balanced network whose ``W_e`` has i.i.d. N(0, (std**N)**2) entries.

    The sampled ``W_e`` depends only on (output, input, depth, std, seed),
    never on hidden widths.
    """
    widths = _check_widths(widths)
    if not std > 0:
        raise ValueError(f"std must be positive, got {std}")
    n = len(widths) - 1
    rng = np.random.default_rng(seed)
    w_e = rng.normal(0.0, std**n, size=(widths[-1], widths[0]))
    return factor_balanced(w_e, widths)


def end_to_end(net: LinearNetwork) -> np.ndarray:
    """``W_e = W_N W_{N-1} ... W_1`` (k x d)."""
    out = net.weights[0]
    for w in net.weights[1:]:
        out = w @ out
    return out


def balancedness_residual(net: LinearNetwork) -> float:
    """``max_j ||W_{j+1}^T W_{j+1} - W_j W_j^T||_F`` (0 for depth one)."""
    worst = 0.0
    for lower, upper in zip(net.weights[:-1], net.weights[1:]):
        gap = upper.T @ upper - lower @ lower.T
        worst = max(worst, float(np.linalg.norm(gap)))
    return worst
