"""AdaGrad, AdaDelta and Adam as pure state-in/state-out steps."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .rules import DivergenceError

VARIANTS = ("adagrad", "adadelta", "adam")

DEFAULTS = {
    "adagrad": {"eps": 1e-8},
    "adadelta": {"rho": 0.95, "eps": 1e-6},
    "adam": {"beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
}


@dataclass(frozen=True)
class AdaptiveState:
    """Accumulators for one optimized matrix.

    ``acc1``/``acc2`` hold, per variant:
      adagrad:  sum of squared gradients / unused
      adadelta: EMA of squared gradients / EMA of squared updates
      adam:     first-moment EMA / second-moment EMA
    """

    variant: str
    acc1: np.ndarray
    acc2: np.ndarray
    step: int = 0
    hyper: dict = field(default_factory=dict)


def init_adaptive(variant: str, shape, **hyper) -> AdaptiveState:
    if variant not in VARIANTS:
        raise ValueError(f"unknown adaptive variant {variant!r}; choose from {VARIANTS}")
    params = dict(DEFAULTS[variant])
    unknown = set(hyper) - set(params)
    if unknown:
        raise ValueError(f"unknown hyperparameters for {variant}: {sorted(unknown)}")
    params.update(hyper)
    return AdaptiveState(variant, np.zeros(shape), np.zeros(shape), 0, params)


def adaptive_step(state: AdaptiveState, w, grad, eta: float):
    """Return ``(w_new, state_new)`` after one update."""
    w = np.asarray(w, dtype=np.float64)
    g = np.asarray(grad, dtype=np.float64)
    if g.shape != state.acc1.shape or w.shape != g.shape:
        raise ValueError(f"shape mismatch: w {w.shape}, grad {g.shape}, state {state.acc1.shape}")
    h = state.hyper
    t = state.step + 1

    if state.variant == "adagrad":
        acc1 = state.acc1 + g * g
        acc2 = state.acc2
        w_new = w - eta * g / (np.sqrt(acc1) + h["eps"])
    elif state.variant == "adadelta":
        rho, eps = h["rho"], h["eps"]
        acc1 = rho * state.acc1 + (1 - rho) * g * g
        delta = -np.sqrt(state.acc2 + eps) / np.sqrt(acc1 + eps) * g
        acc2 = rho * state.acc2 + (1 - rho) * delta * delta
        w_new = w + eta * delta
    else:
        b1, b2, eps = h["beta1"], h["beta2"], h["eps"]
        acc1 = b1 * state.acc1 + (1 - b1) * g
        acc2 = b2 * state.acc2 + (1 - b2) * g * g
        m_hat = acc1 / (1 - b1**t)
        v_hat = acc2 / (1 - b2**t)
        w_new = w - eta * m_hat / (np.sqrt(v_hat) + eps)

    if not np.all(np.isfinite(w_new)):
        raise DivergenceError(f"{state.variant} step produced non-finite values")
    return w_new, replace(state, acc1=acc1, acc2=acc2, step=t)
