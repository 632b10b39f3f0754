"""Update rules: deep GD, end-to-end preconditioned rules, flows, baselines."""

from .adaptive import AdaptiveState, adaptive_step, init_adaptive
from .flow import flow_rk4_deep, flow_rk4_e2e, rk4
from .rules import (
    DivergenceError,
    EndToEndState,
    GdConfig,
    e2e_direction_general,
    e2e_direction_single,
    e2e_direction_vec,
    e2e_step_general,
    e2e_step_single,
    e2e_step_vec,
    gd_step_deep,
    precond_eigenvalue,
    precond_matrix,
    project_onto,
)
from .warmup import warmup_coeffs, warmup_grads, warmup_residual, warmup_step

__all__ = [
    "AdaptiveState",
    "DivergenceError",
    "EndToEndState",
    "GdConfig",
    "adaptive_step",
    "e2e_direction_general",
    "e2e_direction_single",
    "e2e_direction_vec",
    "e2e_step_general",
    "e2e_step_single",
    "e2e_step_vec",
    "flow_rk4_deep",
    "flow_rk4_e2e",
    "gd_step_deep",
    "init_adaptive",
    "precond_eigenvalue",
    "precond_matrix",
    "project_onto",
    "rk4",
    "warmup_coeffs",
    "warmup_grads",
    "warmup_residual",
    "warmup_step",
]
