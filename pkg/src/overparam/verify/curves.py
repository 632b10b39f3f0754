"""The closed curve through the origin's neighbourhood and line integrals over it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CurveSpec:
    e: np.ndarray
    r: float
    R: float
    segments_per_piece: int = 2**14

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.float64).reshape(-1)
        if abs(np.linalg.norm(e) - 1.0) > 1e-12:
            raise ValueError("e must be a unit vector")
        if not 0 < self.r < self.R:
            raise ValueError(f"need 0 < r < R, got r={self.r}, R={self.R}")
        if self.segments_per_piece < 2:
            raise ValueError("segments_per_piece must be >= 2")
        object.__setattr__(self, "e", e)


def _plane_partner(e: np.ndarray) -> np.ndarray:
    # Gram-Schmidt on e_1, or on e_2 when e is (nearly) parallel to e_1
    idx = 1 if abs(e[0]) > 1.0 - 1e-8 else 0
    b = np.zeros_like(e)
    b[idx] = 1.0
    u = b - np.dot(b, e) * e
    return u / np.linalg.norm(u)


@dataclass(frozen=True)
class Curve:
    """Four-piece closed curve; each piece is a map ``[0, 1] -> R^d``.

    Pieces, in order: the segment -R e -> -r e, the half great circle of
    radius r from -r e to r e, the segment r e -> R e, and the half great
    circle of radius R back to -R e.  Both arcs live in span{e, u}.
    """

    spec: CurveSpec
    u: np.ndarray

    @property
    def dim(self) -> int:
        return self.spec.e.size

    def piece(self, i: int, t: np.ndarray) -> np.ndarray:
        e, u = self.spec.e, self.u
        r, R = self.spec.r, self.spec.R
        t = np.asarray(t, dtype=np.float64)[:, None]
        if i == 0:
            return (-R + (R - r) * t) * e
        if i == 1:
            th = math.pi * t
            return r * (-np.cos(th) * e + np.sin(th) * u)
        if i == 2:
            return (r + (R - r) * t) * e
        if i == 3:
            th = math.pi * t
            return R * (np.cos(th) * e + np.sin(th) * u)
        raise IndexError(i)

    def nodes(self, m: int | None = None) -> list[np.ndarray]:
        """Per-piece sample chains of ``m + 1`` points each."""
        m = m or self.spec.segments_per_piece
        t = np.linspace(0.0, 1.0, m + 1)
        return [self.piece(i, t) for i in range(4)]

    def midpoints(self, m: int | None = None) -> list[np.ndarray]:
        m = m or self.spec.segments_per_piece
        t = (np.arange(m) + 0.5) / m
        return [self.piece(i, t) for i in range(4)]

    def length(self, m: int | None = None) -> float:
        return float(sum(np.linalg.norm(np.diff(p, axis=0), axis=1).sum() for p in self.nodes(m)))

    def exact_length(self) -> float:
        r, R = self.spec.r, self.spec.R
        return 2 * (R - r) + math.pi * r + math.pi * R


def build_curve(spec: CurveSpec) -> Curve:
    if spec.e.size < 2:
        raise ValueError("the curve needs at least two dimensions")
    return Curve(spec, _plane_partner(spec.e))


def _eval_field(field: Field, points: np.ndarray) -> np.ndarray:
    vals = np.asarray(field(points), dtype=np.float64)
    if vals.shape != points.shape:
        raise ValueError(f"field returned shape {vals.shape} for points of shape {points.shape}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("field produced non-finite values on the curve")
    return vals


def line_integral(field: Field, curve: Curve, m: int | None = None) -> float:
    """Composite midpoint rule ``sum <field(gamma(t_mid)), gamma(t_i+1) - gamma(t_i)>``.

    ``field`` is vectorized: it maps an (n, d) array of points to (n, d) values.
    """
    m = m or curve.spec.segments_per_piece
    if m < 2:
        raise ValueError("need m >= 2 segments per piece")
    total = 0.0
    for nodes, mids in zip(curve.nodes(m), curve.midpoints(m)):
        vals = _eval_field(field, mids)
        total += float(np.sum(vals * np.diff(nodes, axis=0)))
    return total


def line_integral_refined(field: Field, curve: Curve, m: int | None = None) -> tuple[float, float]:
    """``(I(2m), |I(2m) - I(m)|)``: the refined value and its refinement estimate."""
    m = m or curve.spec.segments_per_piece
    coarse = line_integral(field, curve, m)
    fine = line_integral(field, curve, 2 * m)
    return fine, abs(fine - coarse)
