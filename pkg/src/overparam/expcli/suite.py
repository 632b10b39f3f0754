"""Fixed-seed battery of numerical checks with a machine-readable report."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from ..model import balancedness_residual, init_balanced, init_gaussian
from ..objective import Dataset, LpObjective, layer_grads, lossN
from ..optim import (
    EndToEndState,
    GdConfig,
    adaptive_step,
    e2e_direction_general,
    e2e_direction_single,
    e2e_direction_vec,
    e2e_step_general,
    e2e_step_single,
    e2e_step_vec,
    flow_rk4_deep,
    gd_step_deep,
    init_adaptive,
    precond_matrix,
    warmup_residual,
)
from ..verify import (
    CurveSpec,
    appb_experiment,
    build_curve,
    conservativity_report,
    emulation_report,
    jacobian_asymmetry,
    lemma2_bound,
    lemma3_reference,
    line_integral,
    quadratic_plus_linear,
    transform,
)
from .data import synth_gaussian


@dataclass
class CheckResult:
    name: str
    tolerance: str
    measured: float | str
    passed: bool
    seconds: float = 0.0
    error: str | None = None


def random_rule_cases(count: int = 200, seed: int = 0):
    """``(w_e, grad, n, lam)`` draws with k <= 4, d <= 6, n in {1, 2, 3, 5}."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k, d = int(rng.integers(1, 5)), int(rng.integers(1, 7))
        n = int(rng.choice([1, 2, 3, 5]))
        lam = float(rng.choice([0.0, 0.1]))
        w = rng.normal(size=(k, d))
        if rng.random() < 0.25:
            # rank-deficient end-to-end matrices exercise the zero singular values
            w[:, 0] = 0.0 if d > 1 else w[:, 0]
            if k > 1:
                w[-1] = w[0]
        yield w, rng.normal(size=(k, d)), n, lam


def rule_equivalence_gap(count=200, seed=0, eta=0.05, precond=precond_matrix) -> float:
    """Max entrywise gap between the general, vectorized and single-output steps."""
    worst = 0.0
    for w, g, n, lam in random_rule_cases(count, seed):
        st = EndToEndState(w, n, GdConfig(eta, lam))
        a = e2e_step_general(st, g).w_e
        b = e2e_step_vec(st, g, precond=precond).w_e
        worst = max(worst, float(np.max(np.abs(a - b))))
        if w.shape[0] == 1:
            c = e2e_step_single(st, g).w_e
            worst = max(worst, float(np.max(np.abs(a - c))))
    return worst


def worked_example_gap(precond=precond_matrix) -> float:
    w, g = np.array([[3.0, 4.0]]), np.array([[1.0, 0.0]])
    want = np.array([[6.8, 2.4]])
    dirs = [
        e2e_direction_general(w, g, 2),
        e2e_direction_vec(w, g, 2, precond),
        e2e_direction_single(w, g, 2),
    ]
    eig = np.sort(np.linalg.eigvalsh(precond(w, 2)))
    return max(max(float(np.max(np.abs(d - want))) for d in dirs), float(np.max(np.abs(eig - [5.0, 10.0]))))


def flow_problem():
    """Two-output l2 problem with a balanced depth-3 start (used by the flow checks)."""
    rng = np.random.default_rng(0)
    x = rng.normal(size=(16, 4))
    obj = LpObjective(Dataset(x, x @ rng.normal(size=(4, 2))), 2)
    return obj, init_balanced((4, 3, 3, 2), 0.7, 0)


def flow_residual(dt: float, eta: float = 1e-2, horizon: float = 10.0) -> float:
    obj, net = flow_problem()
    steps = int(round(horizon / eta / dt))
    return balancedness_residual(flow_rk4_deep(net, obj, GdConfig(eta), dt, steps)[-1])


def gd_residual(eta: float, horizon: float = 1.0) -> float:
    obj, net = flow_problem()
    cfg = GdConfig(eta)
    for _ in range(int(round(horizon / eta))):
        net = gd_step_deep(net, obj, cfg)
    return balancedness_residual(net)


def layer_grad_fd_error(seed: int = 0, h: float = 1e-6) -> float:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(20, 5))
    obj = LpObjective(Dataset(x, x @ rng.normal(size=5)), 4)
    net = init_gaussian((5, 3, 2, 1), 0.5, seed)
    grads = layer_grads(net, obj)
    worst = 0.0
    for j, w in enumerate(net.weights):
        for idx in np.ndindex(w.shape):
            ws = [v.copy() for v in net.weights]
            ws[j][idx] += h
            up = lossN(net.with_weights(ws), obj)
            ws[j][idx] -= 2 * h
            down = lossN(net.with_weights(ws), obj)
            fd = (up - down) / (2 * h)
            worst = max(worst, abs(fd - grads[j][idx]) / max(1.0, abs(fd)))
    return worst


def loop_bound_worst_ratio(count: int = 20, seed: int = 0) -> float:
    """Largest ``|loop| / bound`` over random smooth fields (must stay <= 1)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        d = int(rng.integers(2, 5))
        n = int(rng.choice([2, 3, 5]))
        R = float(rng.uniform(0.2, 2.0))
        r = float(rng.uniform(0.05, 0.9)) * R
        e = rng.normal(size=d)
        curve = build_curve(CurveSpec(e / np.linalg.norm(e), r, R, 2**12))
        a, b, c = rng.normal(size=d), rng.normal(size=(d, d)), rng.normal(size=(d, d))
        phi = lambda w, a=a, b=b, c=c: a + w @ b.T + np.sin(w @ c.T)
        loop = line_integral(lambda w: transform(w, phi(w), n), curve)
        bound = lemma2_bound(phi(np.vstack(curve.midpoints())), curve, n)
        worst = max(worst, abs(loop) / bound)
    return worst


def warmup_worst_ratio(count: int = 20, seed: int = 0) -> float:
    """Largest ``residual(eta/2) / residual(eta)`` on random scalar-output problems."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        d, m = int(rng.integers(1, 5)), int(rng.integers(3, 12))
        p = 2 if i % 2 == 0 else 4
        x = rng.normal(size=(m, d))
        obj = LpObjective(Dataset(x, rng.normal(size=m)), p)
        w1, w2 = rng.normal(size=d) * 0.3, float(rng.uniform(0.2, 1.0))
        eta = 1e-2
        worst = max(worst, warmup_residual(w1, w2, obj, eta / 2) / warmup_residual(w1, w2, obj, eta))
    return worst


def adaptive_zero_grad_drift() -> float:
    w = np.array([[1.0, -2.0, 0.5]])
    worst = 0.0
    for variant in ("adagrad", "adadelta", "adam"):
        st = init_adaptive(variant, w.shape)
        cur = w
        for _ in range(50):
            cur, st = adaptive_step(st, cur, np.zeros_like(w), 0.1)
        worst = max(worst, float(np.max(np.abs(cur - w))))
    return worst


def _check(name: str, tolerance: str, fn: Callable[[], float], ok: Callable[[float], bool]) -> CheckResult:
    start = time.perf_counter()
    try:
        value = fn()
        passed = bool(ok(value))
        err = None
    except Exception as exc:  # aggregated, never short-circuited
        value, passed, err = "error", False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, tolerance, value, passed, time.perf_counter() - start, err)


def verify_suite(precond=precond_matrix, include_slow: bool = True) -> dict:
    """Run every check and return ``{"passed": bool, "checks": [...]}``."""
    quad = quadratic_plus_linear([1.0, 0.0, 0.0])
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(5, 3))
    pts *= rng.uniform(0.5, 2.0, size=(5, 1)) / np.linalg.norm(pts, axis=1, keepdims=True)
    e = np.array([1.0, 0.0, 0.0])

    def closed_form_err(n):
        curve = build_curve(CurveSpec(e, 0.5, 1.0, 2**16))
        loop = line_integral(lambda w: transform(w, np.broadcast_to(e, w.shape), n), curve)
        ref = lemma3_reference(n, 0.5, 1.0)
        return abs(loop - ref) / max(abs(ref), 1.0)

    def emul_depth1():
        obj = LpObjective(synth_gaussian(8, 32, 0), 2)
        return float(np.max(emulation_report((8, 1), obj, 1e-2, 50, 0, 0.1).we_gaps))

    checks = [
        ("rule_equivalence", "<= 1e-10", lambda: rule_equivalence_gap(precond=precond), lambda v: v <= 1e-10),
        ("worked_example", "<= 1e-12", lambda: worked_example_gap(precond), lambda v: v <= 1e-12),
        ("layer_grads_finite_difference", "<= 1e-6", layer_grad_fd_error, lambda v: v <= 1e-6),
        ("balancedness_flow", "<= 1e-8", lambda: flow_residual(0.5), lambda v: v <= 1e-8),
        ("balancedness_flow_order", ">= 8", lambda: flow_residual(0.5) / flow_residual(0.25), lambda v: v >= 8),
        ("balancedness_gd_linear", "in [1, 4]", lambda: gd_residual(2e-3) / gd_residual(1e-3), lambda v: 1 <= v <= 4),
        ("curve_length", "<= 1e-6", lambda: abs(
            build_curve(CurveSpec(e, 0.05, 0.1)).length() / build_curve(CurveSpec(e, 0.05, 0.1)).exact_length() - 1
        ), lambda v: v <= 1e-6),
        ("gradient_loop_zero", "<= 1e-8", lambda: abs(line_integral(
            lambda w: w, build_curve(CurveSpec(e, 0.5, 1.0)))), lambda v: v <= 1e-8),
        ("closed_form_quadrature_n3", "<= 1e-5", lambda: closed_form_err(3), lambda v: v <= 1e-5),
        ("loop_bound", "<= 1", loop_bound_worst_ratio, lambda v: v <= 1),
        ("nonconservative_n3", "verdict", lambda: conservativity_report(quad, 3, R=0.1, dim=3).verdict,
         lambda v: v == "non-conservative"),
        ("conservative_n1", "<= 1e-8", lambda: abs(conservativity_report(quad, 1, R=0.1, dim=3).loop_integral),
         lambda v: v <= 1e-8),
        ("jacobian_asymmetry_n3", "> 1e-2", lambda: jacobian_asymmetry(quad, 3, pts), lambda v: v > 1e-2),
        ("jacobian_asymmetry_n1", "<= 1e-4", lambda: jacobian_asymmetry(quad, 1, pts), lambda v: v <= 1e-4),
        ("warmup_quadratic", "<= 1/3", warmup_worst_ratio, lambda v: v <= 1 / 3),
        ("adaptive_zero_gradient", "== 0", adaptive_zero_grad_drift, lambda v: v == 0),
        ("emulation_depth1", "== 0", emul_depth1, lambda v: v == 0),
    ]
    if include_slow:
        checks.append(("two_point_acceleration", ">= 10", lambda: appb_experiment().ratio,
                       lambda v: not math.isnan(v) and v >= 10))
    results = [_check(*c) for c in checks]
    return {"passed": all(r.passed for r in results), "checks": [asdict(r) for r in results]}
