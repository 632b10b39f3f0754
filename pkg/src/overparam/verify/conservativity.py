"""Loop integrals of the depth-induced field ``F`` and Jacobian symmetry checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..objective import LpObjective
from .curves import CurveSpec, Curve, build_curve, line_integral

GradFn = Callable[[np.ndarray], np.ndarray]

CONSERVATIVE = "conservative-consistent"
NON_CONSERVATIVE = "non-conservative"


def transform(points, values, n: int) -> np.ndarray:
    """Row-wise ``||w||^(2-2/n) (phi + (n-1) Pr_w phi)`` with ``F(0) = 0`` for n >= 2.

    For n = 1 the map is the identity on ``values`` (``0**0 == 1``).
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    w = np.atleast_2d(np.asarray(points, dtype=np.float64))
    phi = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if n == 1:
        return phi.copy()
    norm = np.linalg.norm(w, axis=1, keepdims=True)
    safe = np.where(norm > 0, norm, 1.0)
    unit = w / safe
    proj = np.sum(unit * phi, axis=1, keepdims=True) * unit
    out = norm ** (2.0 - 2.0 / n) * (phi + (n - 1) * proj)
    return np.where(norm > 0, out, 0.0)


def field_f(w, grad_fn: GradFn, n: int) -> np.ndarray:
    """``F(w)`` for the loss whose gradient is ``grad_fn``; accepts one row or a batch."""
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    return transform(w, grad_fn(w), n)


def batch_grad(obj: LpObjective) -> GradFn:
    """Vectorized depth-one gradient for scalar-output objectives: (q, d) -> (q, d)."""
    ds = obj.dataset
    if ds.k != 1:
        raise ValueError("batch_grad needs a single-output objective")
    x, y, p, m = ds.x, ds.y, obj.p, ds.m

    def grad(w):
        r = x @ np.atleast_2d(w).T - y
        return (r ** (p - 1)).T @ x / m

    return grad


def quadratic_plus_linear(u) -> GradFn:
    """Gradient of ``<w, u> + 1/2 ||w||^2``."""
    u = np.asarray(u, dtype=np.float64).reshape(1, -1)
    return lambda w: np.atleast_2d(w) + u


def lemma3_reference(n: int, r: float, R: float) -> float:
    """Closed-form loop integral of the transformed constant unit field along ``e``."""
    if n < 1 or not 0 < r <= R:
        raise ValueError(f"need n >= 1 and 0 < r <= R, got n={n}, r={r}, R={R}")
    a = 3.0 - 2.0 / n
    return (2.0 * n / a - 2.0) * (R**a - r**a)


def default_inner_radius(n: int, R: float) -> float:
    """``r`` with ``r^(3-2/n) = R^(3-2/n) / 2``."""
    return R * 0.5 ** (1.0 / (3.0 - 2.0 / n))


def lemma2_bound(phi_values, curve: Curve, n: int, m: int | None = None) -> float:
    """``n * len * max ||gamma||^(2-2/n) * max ||phi||`` from sampled values.

    ``phi_values`` holds ``phi`` at the curve midpoints (stacked piece by
    piece, as from ``np.vstack(curve.midpoints(m))``).
    """
    pts = np.vstack(curve.midpoints(m))
    phi = np.atleast_2d(np.asarray(phi_values, dtype=np.float64))
    if phi.shape != pts.shape:
        raise ValueError(f"phi_values has shape {phi.shape}, expected {pts.shape}")
    # the outer arc attains the largest norm exactly; midpoints would undershoot on the segments
    gamma_max = max(np.linalg.norm(pts, axis=1).max(), curve.spec.R)
    return float(
        n * curve.length(m) * gamma_max ** (2.0 - 2.0 / n) * np.linalg.norm(phi, axis=1).max()
    )


@dataclass(frozen=True)
class ConservativityReport:
    loop_integral: float
    lemma3_constant_part: float
    residual_bound: float
    raw_gradient_loop_integral: float
    verdict: str
    lower_bound: float
    refinement: float
    n: int
    r: float
    R: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _verdict(loop: float, raw: float) -> str:
    return NON_CONSERVATIVE if abs(loop) > max(10.0 * abs(raw), 1e-8) else CONSERVATIVE


def conservativity_report(
    grad_fn,
    n: int,
    r: float | None = None,
    R: float = 0.1,
    m: int = 2**14,
    dim: int | None = None,
) -> ConservativityReport:
    """Integrate ``F`` around the curve aligned with the gradient at the origin.

    ``grad_fn`` is a vectorized gradient or an :class:`LpObjective` with k = 1.
    With ``g0`` the gradient at 0 and ``c = ||g0||``, the gradient splits as
    ``c e + xi(w)``; the loop then exceeds ``c * lemma3_reference(n, r, R) - lemma2_bound(xi)``.
    """
    if isinstance(grad_fn, LpObjective):
        dim = grad_fn.dataset.d
        grad_fn = batch_grad(grad_fn)
    if dim is None:
        raise ValueError("dim is required when grad_fn is a plain callable")
    if r is None:
        r = default_inner_radius(n, R)
    g0 = np.asarray(grad_fn(np.zeros((1, dim))), dtype=np.float64).reshape(-1)
    c = float(np.linalg.norm(g0))
    if c == 0.0:
        raise ValueError("gradient at the origin is zero; the construction needs it nonzero")
    e = g0 / c
    curve = build_curve(CurveSpec(e, r, R, m))

    field = lambda w: field_f(w, grad_fn, n)
    loop = line_integral(field, curve, m)
    loop_fine = line_integral(field, curve, 2 * m)
    raw = line_integral(grad_fn, curve, m)

    mids = np.vstack(curve.midpoints(m))
    xi = grad_fn(mids) - g0
    residual = lemma2_bound(xi, curve, n, m)
    constant_part = c * lemma3_reference(n, r, R)
    return ConservativityReport(
        loop_integral=loop,
        lemma3_constant_part=constant_part,
        residual_bound=residual,
        raw_gradient_loop_integral=raw,
        verdict=_verdict(loop, raw),
        lower_bound=constant_part - residual,
        refinement=abs(loop_fine - loop),
        n=int(n),
        r=float(r),
        R=float(R),
    )


def jacobian(fn: Callable[[np.ndarray], np.ndarray], w, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of a map R^d -> R^d at one point."""
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    d = w.size
    shifts = h * np.eye(d)
    plus = np.atleast_2d(fn(w + shifts))
    minus = np.atleast_2d(fn(w - shifts))
    # row i of plus/minus is the field at w +- h e_i, i.e. column i of J
    return ((plus - minus) / (2 * h)).T


def jacobian_asymmetry(grad_fn: GradFn, n: int, points, h: float = 1e-5) -> float:
    """``max_points ||J_F - J_F^T||_F`` using central differences with step ``h``."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if np.any(np.linalg.norm(pts, axis=1) == 0):
        raise ValueError("jacobian_asymmetry needs points away from the origin")
    fn = lambda w: field_f(w, grad_fn, n)
    worst = 0.0
    for w in pts:
        jac = jacobian(fn, w, h)
        worst = max(worst, float(np.linalg.norm(jac - jac.T)))
    return worst


def loop_length_check(spec: CurveSpec) -> float:
    """Relative error of the discrete arc length against its closed form."""
    curve = build_curve(spec)
    exact = curve.exact_length()
    return abs(curve.length() - exact) / exact


__all__ = [
    "CONSERVATIVE",
    "NON_CONSERVATIVE",
    "ConservativityReport",
    "batch_grad",
    "conservativity_report",
    "default_inner_radius",
    "field_f",
    "jacobian",
    "jacobian_asymmetry",
    "lemma2_bound",
    "lemma3_reference",
    "loop_length_check",
    "quadratic_plus_linear",
    "transform",
]
