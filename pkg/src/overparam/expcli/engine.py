"""Compiled training loops for long runs and learning-rate grids.

These mirror the reference steps in :mod:`overparam.optim` (and are tested
against them) but keep the whole iteration inside numba.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from numba.typed import List

from ..model import LinearNetwork
from ..objective import LpObjective

RUNNING, CONVERGED, DIVERGED = 0, 1, 2


@numba.njit(cache=True)
def _loss_grad(x, y, w_e, p):
    m = x.shape[0]
    r = x @ np.ascontiguousarray(w_e.T) - y
    rp1 = r.copy()
    for _ in range(p - 2):
        rp1 *= r
    loss = np.sum(rp1 * r) / (p * m)
    g = np.ascontiguousarray(rp1.T) @ x / m
    return loss, g


@numba.njit(cache=True)
def _deep_gd(x, y, p, weights, eta, lam, iters, threshold, div_factor):
    """Deep GD with per-iteration bookkeeping.

    Row ``t`` of the returned arrays describes the iterate after ``t`` steps.
    Stops early once the loss is at most ``threshold`` or diverges
    (non-finite, or above ``div_factor`` times the initial loss).
    """
    n = len(weights)
    d = x.shape[1]
    k = y.shape[1]
    loss = np.full(iters + 1, np.nan)
    gnorm = np.full(iters + 1, np.nan)
    wnorm = np.full(iters + 1, np.nan)
    below = List()
    below.append(np.eye(d))
    for j in range(n):
        below.append(np.eye(d))
    above = List()
    for j in range(n + 1):
        above.append(np.eye(k))
    loss0 = np.inf
    status = RUNNING
    t = 0
    while True:
        for j in range(n):
            below[j + 1] = weights[j] @ below[j]
        w_e = below[n]
        f, g = _loss_grad(x, y, w_e, p)
        if t == 0:
            loss0 = f
        if not np.isfinite(f) or f > div_factor * loss0:
            status = DIVERGED
            loss[t] = f
            break
        loss[t] = f
        gnorm[t] = np.sqrt(np.sum(g * g))
        wnorm[t] = np.sqrt(np.sum(w_e * w_e))
        if f <= threshold:
            status = CONVERGED
            break
        if t == iters:
            break
        above[n] = np.eye(k)
        for j in range(n - 1, -1, -1):
            above[j] = above[j + 1] @ weights[j]
        decay = 1.0 - eta * lam
        for j in range(n):
            grad_j = np.ascontiguousarray(above[j + 1].T) @ g @ np.ascontiguousarray(below[j].T)
            weights[j] = decay * weights[j] - eta * grad_j
        t += 1
    return loss, gnorm, wnorm, t, status


@dataclass(frozen=True)
class FastRun:
    """Per-iteration trace of a compiled run, truncated to the steps taken."""

    loss: np.ndarray
    grad_norm: np.ndarray
    we_norm: np.ndarray
    steps: int
    status: str

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"


_STATUS = {RUNNING: "budget exhausted", CONVERGED: "converged", DIVERGED: "diverged"}


def deep_gd_run(
    net: LinearNetwork,
    obj: LpObjective,
    eta: float,
    iters: int,
    lam: float = 0.0,
    threshold: float = -np.inf,
    div_factor: float = 1e3,
) -> FastRun:
    """Run up to ``iters`` deep GD steps, stopping early at ``threshold`` or divergence."""
    if iters < 0:
        raise ValueError("iters must be non-negative")
    ws = List()
    for w in net.weights:
        ws.append(np.ascontiguousarray(w, dtype=np.float64))
    x = np.ascontiguousarray(obj.dataset.x)
    y = np.ascontiguousarray(obj.dataset.y)
    loss, gnorm, wnorm, t, status = _deep_gd(
        x, y, int(obj.p), ws, float(eta), float(lam), int(iters), float(threshold),
        float(div_factor),
    )
    end = t + 1
    return FastRun(loss[:end], gnorm[:end], wnorm[:end], int(t), _STATUS[int(status)])
