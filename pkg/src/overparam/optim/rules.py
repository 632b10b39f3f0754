"""Gradient descent on deep linear nets and the equivalent end-to-end rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..matcore import drop_negligible, full_svd, kron, psd_frac_power, unvec, vec
from ..model import LinearNetwork
from ..objective import LpObjective, layer_grads, lossN


class DivergenceError(ArithmeticError):
    """An update produced non-finite values."""

    def __init__(self, message: str, loss: float | None = None):
        super().__init__(message)
        self.loss = loss


@dataclass(frozen=True)
class GdConfig:
    eta: float
    lam: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be finite and > 0, got {self.eta}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")


@dataclass(frozen=True)
class EndToEndState:
    w_e: np.ndarray
    n: int
    config: GdConfig

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"depth n must be an integer >= 1, got {self.n}")
        w = np.array(self.w_e, dtype=np.float64)
        if w.ndim == 1:
            w = w[None, :]
        object.__setattr__(self, "w_e", w)
        object.__setattr__(self, "n", int(self.n))


def _finite_or_raise(arrays, what: str, loss=None):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DivergenceError(f"{what} produced non-finite values", loss)


def gd_step_deep(net: LinearNetwork, obj: LpObjective, config: GdConfig) -> LinearNetwork:
    """One simultaneous GD step on every layer, gradients at pre-step weights."""
    grads = layer_grads(net, obj)
    decay = 1.0 - config.eta * config.lam
    new = [decay * w - config.eta * g for w, g in zip(net.weights, grads)]
    try:
        _finite_or_raise(new, "deep GD step")
    except DivergenceError as exc:
        exc.loss = lossN(net, obj)
        raise
    return net.with_weights(new)


def e2e_direction_general(w_e, grad, n: int) -> np.ndarray:
    """``sum_j [W W^T]^((j-1)/n) . grad . [W^T W]^((n-j)/n)``."""
    w_e = np.asarray(w_e, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != w_e.shape:
        raise ValueError(f"grad shape {grad.shape} does not match W_e shape {w_e.shape}")
    left_gram = w_e @ w_e.T
    right_gram = w_e.T @ w_e
    total = np.zeros_like(grad)
    for j in range(1, n + 1):
        left = psd_frac_power(left_gram, (j - 1) / n)
        right = psd_frac_power(right_gram, (n - j) / n)
        total += left @ grad @ right
    return total


def precond_eigenvalue(sigma_left, sigma_right, n: int):
    """``sum_j sl^(2(n-j)/n) * sr^(2(j-1)/n)`` with ``0**0 == 1``."""
    sl = np.asarray(sigma_left, dtype=np.float64)
    sr = np.asarray(sigma_right, dtype=np.float64)
    return sum(sl ** (2 * (n - j) / n) * sr ** (2 * (j - 1) / n) for j in range(1, n + 1))


def precond_matrix(w_e, n: int) -> np.ndarray:
    """The (kd x kd) preconditioner acting on ``vec(grad)``.

    Assembled from the full SVD: eigenvector ``vec(u_r v_r'^T) = v_r' (x) u_r``
    carries eigenvalue :func:`precond_eigenvalue` of ``(sigma_r, sigma_r')``,
    with singular values beyond ``min(k, d)`` set to zero.
    """
    w_e = np.asarray(w_e, dtype=np.float64)
    if w_e.ndim == 1:
        w_e = w_e[None, :]
    k, d = w_e.shape
    u, s, v = full_svd(w_e)
    # same round-off policy as the Gram-matrix powers of the general rule
    s = drop_negligible(s, w_e.shape)
    sk = np.zeros(k)
    sd = np.zeros(d)
    sk[: s.size] = s
    sd[: s.size] = s
    # column r' * k + r of kron(v, u) is v_r' (x) u_r
    lam = precond_eigenvalue(sk[None, :], sd[:, None], n).reshape(-1)
    basis = kron(v, u)
    p = (basis * lam) @ basis.T
    return 0.5 * (p + p.T)


def _apply(state: EndToEndState, direction: np.ndarray) -> EndToEndState:
    cfg = state.config
    new = (1.0 - cfg.eta * cfg.lam * state.n) * state.w_e - cfg.eta * direction
    _finite_or_raise([new], "end-to-end step")
    return replace(state, w_e=new)


def e2e_step_general(state: EndToEndState, grad) -> EndToEndState:
    return _apply(state, e2e_direction_general(state.w_e, grad, state.n))


def e2e_direction_vec(w_e, grad, n: int, precond=precond_matrix) -> np.ndarray:
    w_e = np.asarray(w_e, dtype=np.float64)
    k, d = w_e.shape
    return unvec(precond(w_e, n) @ vec(grad), k, d)


def e2e_step_vec(state: EndToEndState, grad, precond=precond_matrix) -> EndToEndState:
    """Vectorized form: ``vec(W) <- (1 - eta lam N) vec(W) - eta P vec(grad)``."""
    return _apply(state, e2e_direction_vec(state.w_e, grad, state.n, precond))


def project_onto(w, v) -> np.ndarray:
    """Projection of row ``v`` onto the direction of row ``w`` (0 if w = 0)."""
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(w)
    if norm == 0.0:
        return np.zeros_like(v)
    unit = w / norm
    return float(np.sum(unit * v)) * unit


def e2e_direction_single(w_e, grad, n: int) -> np.ndarray:
    """``||W||^(2 - 2/n) (grad + (n-1) Pr_W{grad})`` for single-output W."""
    w_e = np.asarray(w_e, dtype=np.float64)
    if w_e.ndim == 2 and w_e.shape[0] != 1:
        raise ValueError(f"single-output rule needs k = 1, got W_e of shape {w_e.shape}")
    grad = np.asarray(grad, dtype=np.float64)
    scale = float(np.linalg.norm(w_e)) ** (2.0 - 2.0 / n)
    return scale * (grad + (n - 1) * project_onto(w_e, grad))


def e2e_step_single(state: EndToEndState, grad) -> EndToEndState:
    return _apply(state, e2e_direction_single(state.w_e, grad, state.n))
