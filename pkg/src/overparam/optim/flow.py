"""Fixed-step RK4 integration of the continuous-time (gradient flow) dynamics."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..model import LinearNetwork
from ..objective import LpObjective, grad1, layer_grads
from .rules import DivergenceError, GdConfig, e2e_direction_general


def rk4(rhs: Callable, state: list[np.ndarray], dt: float, steps: int) -> list[list[np.ndarray]]:
    """Classical RK4 on a tuple-of-arrays state; returns every sampled state."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    traj = [state]
    for i in range(steps):
        k1 = rhs(state)
        k2 = rhs([s + 0.5 * dt * k for s, k in zip(state, k1)])
        k3 = rhs([s + 0.5 * dt * k for s, k in zip(state, k2)])
        k4 = rhs([s + dt * k for s, k in zip(state, k3)])
        state = [
            s + (dt / 6.0) * (a + 2 * b + 2 * c + e)
            for s, a, b, c, e in zip(state, k1, k2, k3, k4)
        ]
        if not all(np.all(np.isfinite(s)) for s in state):
            raise DivergenceError(f"flow became non-finite at step {i + 1}")
        traj.append(state)
    return traj


def flow_rk4_deep(
    net: LinearNetwork, obj: LpObjective, config: GdConfig, dt: float, steps: int
) -> list[LinearNetwork]:
    """Integrate ``dW_j/dt = -eta lam W_j - eta dL^N/dW_j`` for all layers."""
    eta, lam = config.eta, config.lam

    def rhs(ws):
        grads = layer_grads(net.with_weights(ws), obj)
        return [-eta * lam * w - eta * g for w, g in zip(ws, grads)]

    traj = rk4(rhs, list(net.weights), dt, steps)
    return [net.with_weights(ws) for ws in traj]


def flow_rk4_e2e(
    w_e, obj: LpObjective, config: GdConfig, n: int, dt: float, steps: int
) -> list[np.ndarray]:
    """Integrate the end-to-end flow for emulated depth ``n``."""
    eta, lam = config.eta, config.lam

    def rhs(state):
        (w,) = state
        return [-eta * lam * n * w - eta * e2e_direction_general(w, grad1(w, obj), n)]

    traj = rk4(rhs, [np.array(w_e, dtype=np.float64)], dt, steps)
    return [s[0] for s in traj]
