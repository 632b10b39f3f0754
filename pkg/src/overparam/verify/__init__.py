"""Numerical checks of the end-to-end dynamics and of the loop-integral argument."""

from ..optim.warmup import warmup_residual
from .twopoint import TwoPointReport, appb_experiment, gd_trajectory, simulate
from .conservativity import (
    CONSERVATIVE,
    NON_CONSERVATIVE,
    ConservativityReport,
    batch_grad,
    conservativity_report,
    default_inner_radius,
    field_f,
    jacobian,
    jacobian_asymmetry,
    lemma2_bound,
    lemma3_reference,
    quadratic_plus_linear,
    transform,
)
from .curves import Curve, CurveSpec, build_curve, line_integral, line_integral_refined
from .emulation import EmulationReport, emulation_report, relative_gap

__all__ = [
    "TwoPointReport",
    "CONSERVATIVE",
    "ConservativityReport",
    "Curve",
    "CurveSpec",
    "EmulationReport",
    "NON_CONSERVATIVE",
    "appb_experiment",
    "batch_grad",
    "build_curve",
    "conservativity_report",
    "default_inner_radius",
    "emulation_report",
    "field_f",
    "gd_trajectory",
    "jacobian",
    "jacobian_asymmetry",
    "lemma2_bound",
    "lemma3_reference",
    "line_integral",
    "line_integral_refined",
    "quadratic_plus_linear",
    "relative_gap",
    "simulate",
    "transform",
    "warmup_residual",
]
