"""Side-by-side runs of deep-network GD and the matching end-to-end rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import end_to_end, init_balanced, init_gaussian
from ..objective import LpObjective, grad1, loss1, lossN
from ..optim import (
    DivergenceError,
    EndToEndState,
    GdConfig,
    e2e_step_general,
    e2e_step_single,
    gd_step_deep,
)

INITS = {"gaussian": init_gaussian, "balanced": init_balanced}


@dataclass(frozen=True)
class EmulationReport:
    deep_losses: np.ndarray
    e2e_losses: np.ndarray
    we_gaps: np.ndarray
    max_rel_gap: float
    diverged: str | None = None

    def __post_init__(self):
        if not len(self.deep_losses) == len(self.e2e_losses) == len(self.we_gaps):
            raise ValueError("emulation sequences must have equal length")


def relative_gap(a, b) -> np.ndarray:
    """``|a - b| / |b|`` elementwise, 0 where both vanish."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = np.abs(a - b)
    scale = np.abs(b)
    return np.divide(diff, scale, out=np.where(diff == 0, 0.0, np.inf), where=scale > 0)


def emulation_report(
    widths,
    obj: LpObjective,
    eta: float = 1e-3,
    iters: int = 5000,
    seed: int = 0,
    init_std: float = 1e-3,
    init: str = "gaussian",
) -> EmulationReport:
    """Run deep GD and the end-to-end rule from the same collapsed start.

    Entry ``t`` of each sequence is measured after ``t`` steps, so every
    sequence has ``iters + 1`` entries unless a run diverges, in which case
    both are cut at the last step where both were finite.
    """
    if init not in INITS:
        raise ValueError(f"init must be one of {sorted(INITS)}, got {init!r}")
    net = INITS[init](widths, init_std, seed)
    n = net.depth
    cfg = GdConfig(eta)
    step = e2e_step_single if net.output_dim == 1 else e2e_step_general
    state = EndToEndState(end_to_end(net), n, cfg)

    deep, e2e, gaps = [], [], []
    diverged = None
    for t in range(iters + 1):
        w_deep = end_to_end(net)
        ld, le = lossN(net, obj), loss1(state.w_e, obj)
        if not (np.isfinite(ld) and np.isfinite(le)):
            diverged = f"{'deep' if not np.isfinite(ld) else 'e2e'} loss non-finite at step {t}"
            break
        deep.append(ld)
        e2e.append(le)
        gaps.append(float(np.linalg.norm(w_deep - state.w_e)))
        if t == iters:
            break
        try:
            net = gd_step_deep(net, obj, cfg)
        except DivergenceError as exc:
            diverged = f"deep run diverged at step {t + 1}: {exc}"
            break
        try:
            state = step(state, grad1(state.w_e, obj))
        except DivergenceError as exc:
            diverged = f"e2e run diverged at step {t + 1}: {exc}"
            break

    deep_a, e2e_a = np.array(deep), np.array(e2e)
    rel = relative_gap(deep_a, e2e_a)
    return EmulationReport(
        deep_losses=deep_a,
        e2e_losses=e2e_a,
        we_gaps=np.array(gaps),
        max_rel_gap=float(rel.max()) if rel.size else 0.0,
        diverged=diverged,
    )
