"""Scalar overparameterization ``w = w1 * w2`` of an l_p regression problem."""

from __future__ import annotations

import numpy as np

from ..objective import LpObjective, grad1


def _as_row(w1) -> np.ndarray:
    w1 = np.asarray(w1, dtype=np.float64)
    return w1.reshape(1, -1)


def warmup_grads(w1, w2: float, obj: LpObjective) -> tuple[np.ndarray, float]:
    """Gradients of the overparameterized loss w.r.t. ``w1`` (vector) and ``w2``.

    Both follow from the chain rule on the collapsed gradient ``grad1(w1 * w2)``.
    """
    row = _as_row(w1)
    g = grad1(row * w2, obj)
    return (w2 * g).reshape(np.shape(w1)), float(np.sum(g * row))


def warmup_step(w1, w2: float, obj: LpObjective, eta: float) -> tuple[np.ndarray, float]:
    """Plain gradient descent on ``(w1, w2)``."""
    g1, g2 = warmup_grads(w1, w2, obj)
    return np.asarray(w1, dtype=np.float64) - eta * g1, float(w2) - eta * g2


def warmup_coeffs(w1, w2: float, obj: LpObjective, eta: float) -> tuple[float, float]:
    """Adaptive rate ``rho = eta w2^2`` and momentum-like ``gamma = eta grad_w2 / w2``."""
    if w2 == 0:
        raise ZeroDivisionError("warmup_coeffs requires w2 != 0")
    _, g2 = warmup_grads(w1, w2, obj)
    return eta * w2**2, eta * g2 / w2


def warmup_residual(w1, w2: float, obj: LpObjective, eta: float) -> float:
    """Gap between the exact product update and its first-order (rho, gamma) form."""
    w = _as_row(w1) * w2
    rho, gamma = warmup_coeffs(w1, w2, obj, eta)
    first_order = w - rho * grad1(w, obj) - gamma * w
    n1, n2 = warmup_step(w1, w2, obj, eta)
    return float(np.linalg.norm(_as_row(n1) * n2 - first_order))
