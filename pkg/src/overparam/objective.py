"""Averaged l_p regression losses over linear and deep-linear predictors."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .matcore import as_matrix
from .model import LinearNetwork, end_to_end

log = logging.getLogger(__name__)


class UnsupportedLossError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Instances ``x`` as rows (m x d) and targets ``y`` (m x k)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_matrix(self.x)
        y = np.asarray(self.y, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        y = as_matrix(y)
        if x.shape[0] < 1 or x.shape[0] != y.shape[0]:
            raise ValueError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def k(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class LpObjective:
    dataset: Dataset
    p: int = 2

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2 or self.p % 2:
            raise ValueError(f"p must be an even integer >= 2, got {self.p}")
        object.__setattr__(self, "p", int(self.p))
        if self.p > 2 and self.dataset.k != 1:
            raise UnsupportedLossError("l_p with p > 2 is only supported for scalar targets")


def residuals(w, obj: LpObjective) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    ds = obj.dataset
    if w.shape != (ds.k, ds.d):
        raise ValueError(f"w has shape {w.shape}, expected {(ds.k, ds.d)}")
    return ds.x @ w.T - ds.y


def loss1(w, obj: LpObjective) -> float:
    """``(1/m) sum_i (1/p) |w x_i - y_i|^p`` (``1/2 ||.||^2`` per row for p=2)."""
    r = residuals(w, obj)
    return float(np.sum(r**obj.p) / (obj.p * obj.dataset.m))


def grad1(w, obj: LpObjective) -> np.ndarray:
    """Gradient of :func:`loss1` with respect to ``w`` (k x d)."""
    r = residuals(w, obj)
    return (r ** (obj.p - 1)).T @ obj.dataset.x / obj.dataset.m


def hessian1(w, obj: LpObjective) -> np.ndarray:
    """Hessian of :func:`loss1` for scalar targets (d x d)."""
    if obj.dataset.k != 1:
        raise UnsupportedLossError("hessian1 is only implemented for k = 1")
    r = residuals(w, obj)[:, 0]
    x = obj.dataset.x
    weights = (obj.p - 1) * r ** (obj.p - 2)
    return (x.T * weights) @ x / obj.dataset.m


def lossN(net: LinearNetwork, obj: LpObjective) -> float:
    return loss1(end_to_end(net), obj)


def layer_grads(net: LinearNetwork, obj: LpObjective) -> list[np.ndarray]:
    """Per-layer gradients ``(W_N..W_{j+1})^T G (W_{j-1}..W_1)^T``.

    ``G`` is the depth-one gradient at the end-to-end matrix.
    """
    ws = net.weights
    n = len(ws)
    # below[j] = W_j ... W_1 (below[0] = I_d); above[j] = W_N ... W_{j+1}
    below = [np.eye(net.input_dim)]
    for w in ws:
        below.append(w @ below[-1])
    g = grad1(below[-1], obj)
    above = [None] * (n + 1)
    above[n] = np.eye(net.output_dim)
    for j in range(n - 1, -1, -1):
        above[j] = above[j + 1] @ ws[j]
    return [above[j + 1].T @ g @ below[j].T for j in range(n)]


def reference_optimum(obj: LpObjective, tol: float = 1e-10, max_iter: int = 10_000):
    """Global minimizer ``(w_star, loss_star)`` of the convex depth-one loss.

    p = 2 uses the pseudoinverse least-squares solution.  p > 2 runs damped
    Newton from that point with Armijo backtracking until the gradient norm
    drops below ``tol``.
    """
    ds = obj.dataset
    w = np.linalg.lstsq(ds.x, ds.y, rcond=None)[0].T
    if obj.p == 2:
        return w, loss1(w, obj)

    f = loss1(w, obj)
    for it in range(max_iter):
        g = grad1(w, obj)
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            log.debug("newton converged in %d iterations", it)
            return w, f
        h = hessian1(w, obj)
        step = np.linalg.lstsq(h, g[0], rcond=None)[0][None, :]
        slope = float(np.sum(g * step))
        if not slope > 0:
            # singular Hessian direction; fall back to steepest descent
            step, slope = g, gnorm**2
        t = 1.0
        while t > 1e-20:
            w_new = w - t * step
            f_new = loss1(w_new, obj)
            if f_new <= f - 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            # no decrease is representable any more: accept if nearly stationary
            if gnorm <= 1e3 * tol:
                return w, f
            break
        w, f = w_new, f_new
    raise ConvergenceError(
        f"Newton failed to reach |grad| <= {tol:g} (last |grad| = {gnorm:.3e}, loss = {f:.6e})"
    )
