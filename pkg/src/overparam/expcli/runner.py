"""Single runs with CSV traces and JSON metadata, and learning-rate grids."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..model import end_to_end
from ..objective import LpObjective, grad1, layer_grads, loss1, reference_optimum
from ..optim import (
    DivergenceError,
    EndToEndState,
    GdConfig,
    adaptive_step,
    e2e_step_general,
    e2e_step_single,
    gd_step_deep,
    init_adaptive,
)
from .config import ExperimentConfig, build_network, build_objective
from .engine import deep_gd_run

log = logging.getLogger(__name__)

DEFAULT_RATES = (1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1)
DIV_FACTOR = 1e3
TRACE_FIELDS = ("iter", "loss", "loss_minus_opt", "grad_norm", "we_fro_norm", "elapsed_ms")


@dataclass
class RunResult:
    config: ExperimentConfig
    loss: np.ndarray
    grad_norm: np.ndarray
    we_norm: np.ndarray
    elapsed_ms: np.ndarray | None
    loss_star: float
    threshold: float
    status: str  # converged | budget exhausted | diverged
    iters_to_threshold: int | None
    metadata: dict = field(default_factory=dict)

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"

    @property
    def converged(self) -> bool:
        return self.iters_to_threshold is not None


def _threshold(config: ExperimentConfig, loss0: float, loss_star: float) -> float:
    if config.delta_mode == "absolute":
        return loss_star + config.delta
    return loss_star + config.delta * max(loss0 - loss_star, 0.0)


def _python_loop(config, obj, net, stop_at_threshold, loss_star):
    """Reference-step loop used for every optimizer except untimed plain GD."""
    opt = config.optimizer
    cfg = GdConfig(opt.eta, opt.lam)
    kind = opt.kind
    if kind == "e2e":
        step = e2e_step_single if obj.dataset.k == 1 else e2e_step_general
        state = EndToEndState(end_to_end(net), net.depth, cfg)
    elif kind != "gd":
        states = [init_adaptive(kind, w.shape, **opt.hyper) for w in net.weights]

    losses, gnorms, wnorms, times = [], [], [], []
    start = time.perf_counter()
    loss0 = threshold = None
    status = "budget exhausted"
    for t in range(config.iters + 1):
        w_e = state.w_e if kind == "e2e" else end_to_end(net)
        f = loss1(w_e, obj)
        if loss0 is None:
            loss0 = f
            threshold = _threshold(config, loss0, loss_star)
        if not math.isfinite(f) or f > DIV_FACTOR * loss0:
            losses.append(f)
            status = "diverged"
            break
        losses.append(f)
        gnorms.append(float(np.linalg.norm(grad1(w_e, obj))))
        wnorms.append(float(np.linalg.norm(w_e)))
        times.append((time.perf_counter() - start) * 1e3)
        if stop_at_threshold and f <= threshold:
            status = "converged"
            break
        if t == config.iters:
            break
        try:
            if kind == "gd":
                net = gd_step_deep(net, obj, cfg)
            elif kind == "e2e":
                state = step(state, grad1(state.w_e, obj))
            else:
                grads = layer_grads(net, obj)
                new_w = []
                for j, (w, g) in enumerate(zip(net.weights, grads)):
                    w_j, states[j] = adaptive_step(states[j], (1 - opt.eta * opt.lam) * w, g, opt.eta)
                    new_w.append(w_j)
                net = net.with_weights(new_w)
        except DivergenceError:
            losses.append(math.inf)
            status = "diverged"
            break
    return losses, gnorms, wnorms, times, threshold, status


def execute(config: ExperimentConfig, obj: LpObjective | None = None, loss_star: float | None = None,
            stop_at_threshold: bool = False, data_root: str | None = None) -> RunResult:
    """Run one configuration in memory."""
    if obj is None:
        obj = build_objective(config, data_root)
    if loss_star is None:
        loss_star = reference_optimum(obj)[1]
    net = build_network(config, obj.dataset.d)
    opt = config.optimizer

    if opt.kind == "gd" and not config.timing:
        loss0 = loss1(end_to_end(net), obj)
        threshold = _threshold(config, loss0, loss_star)
        run = deep_gd_run(
            net, obj, opt.eta, config.iters, lam=opt.lam,
            threshold=threshold if stop_at_threshold else -math.inf, div_factor=DIV_FACTOR,
        )
        loss = run.loss
        n_ok = loss.size - 1 if run.diverged else loss.size
        gnorm, wnorm = run.grad_norm[:n_ok], run.we_norm[:n_ok]
        status, times = run.status, None
    else:
        losses, gn, wn, tm, threshold, status = _python_loop(config, obj, net, stop_at_threshold, loss_star)
        loss, gnorm, wnorm = np.array(losses), np.array(gn), np.array(wn)
        times = np.array(tm) if config.timing else None

    finite = loss[: gnorm.size]
    hits = np.flatnonzero(finite <= threshold)
    iters_to = int(hits[0]) if hits.size else None
    if status != "diverged":
        status = "converged" if iters_to is not None else "budget exhausted"
    result = RunResult(config, loss, gnorm, wnorm, times, float(loss_star), float(threshold),
                       status, iters_to)
    result.metadata = _metadata(result, obj)
    return result


def _metadata(result: RunResult, obj: LpObjective) -> dict:
    cfg = result.config
    meta = {
        "tool": "overparam",
        "version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "label": cfg.label or _default_label(cfg),
        "loss_star": result.loss_star,
        "threshold": result.threshold,
        "status": result.status,
        "iters_to_threshold": result.iters_to_threshold,
        "steps_recorded": int(result.grad_norm.size),
        "dataset_shape": [obj.dataset.m, obj.dataset.d],
        "deviations": [],
    }
    if cfg.problem.kind == "uci_ethanol":
        meta["deviations"].append("features standardized per column (zero mean, unit variance)")
    if not cfg.timing:
        meta["deviations"].append("elapsed_ms left blank so traces are byte-reproducible")
    return meta


def _default_label(cfg: ExperimentConfig) -> str:
    opt = cfg.optimizer.kind
    return f"depth {cfg.model.depth} {opt} eta={cfg.optimizer.eta:g} l{cfg.p}"


def _fmt(v) -> str:
    return repr(float(v))


def write_trace(result: RunResult, csv_path, meta_path=None) -> tuple[Path, Path]:
    csv_path = Path(csv_path)
    meta_path = Path(meta_path) if meta_path else csv_path.with_suffix(".json")
    # a zero-iteration run has nothing to trace: header only
    n_rows = result.grad_norm.size if result.config.iters > 0 else 0
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_FIELDS)
        for t in range(n_rows):
            elapsed = _fmt(result.elapsed_ms[t]) if result.elapsed_ms is not None else ""
            w.writerow([t, _fmt(result.loss[t]), _fmt(result.loss[t] - result.loss_star),
                        _fmt(result.grad_norm[t]), _fmt(result.we_norm[t]), elapsed])
        if result.diverged:
            # terminal marker: non-finite loss, everything else blank
            w.writerow([result.loss.size - 1, "inf", "", "", "", ""])
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(result.metadata, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return csv_path, meta_path


def run_experiment(config: ExperimentConfig, out_dir, stem: str = "run", data_root: str | None = None,
                   stop_at_threshold: bool = False) -> RunResult:
    """Execute ``config`` and write ``<stem>.csv`` plus ``<stem>.json`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = execute(config, stop_at_threshold=stop_at_threshold, data_root=data_root)
    write_trace(result, out / f"{stem}.csv", out / f"{stem}.json")
    return result


def read_trace(csv_path) -> tuple[np.ndarray, np.ndarray]:
    """``(iters, loss_minus_opt)`` of the finite rows of a trace CSV."""
    iters, gaps = [], []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TRACE_FIELDS:
            raise ValueError(f"{csv_path}: not a trace file (header {reader.fieldnames})")
        for row in reader:
            if row["loss_minus_opt"] == "":
                continue
            iters.append(int(row["iter"]))
            gaps.append(float(row["loss_minus_opt"]))
    return np.array(iters, dtype=np.int64), np.array(gaps)


@dataclass
class GridResult:
    best_rate: float | None
    runs: dict  # rate -> RunResult

    def table(self) -> list[dict]:
        return [
            {"rate": r, "status": run.status, "iters_to_threshold": run.iters_to_threshold}
            for r, run in sorted(self.runs.items())
        ]

    @property
    def best(self) -> RunResult | None:
        return None if self.best_rate is None else self.runs[self.best_rate]


def select_best(outcomes: dict) -> float | None:
    """Fewest iterations among non-divergent converged runs; ties go to the smaller rate."""
    ok = [(it, rate) for rate, it in outcomes.items() if it is not None]
    return min(ok)[1] if ok else None


def grid_search(config: ExperimentConfig, rates=DEFAULT_RATES, out_dir=None,
                data_root: str | None = None, stop_at_threshold: bool = True,
                obj: LpObjective | None = None) -> GridResult:
    """Run every rate; with ``out_dir`` each run writes ``rate_<eta>.csv/json``."""
    rates = [float(r) for r in rates]
    if not rates:
        raise ValueError("rates must be non-empty")
    if obj is None:
        obj = build_objective(config, data_root)
    loss_star = reference_optimum(obj)[1]
    runs = {}
    for eta in rates:
        run = execute(config.with_rate(eta), obj, loss_star, stop_at_threshold)
        runs[eta] = run
        log.info("eta=%g: %s (%s)", eta, run.status, run.iters_to_threshold)
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_trace(run, out / f"rate_{eta:g}.csv")
    outcomes = {r: (None if run.diverged else run.iters_to_threshold) for r, run in runs.items()}
    return GridResult(select_best(outcomes), runs)
