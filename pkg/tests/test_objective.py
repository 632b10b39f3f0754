import numpy as np
import pytest

from overparam.model import LinearNetwork, init_gaussian, init_identity
from overparam.objective import (
    Dataset,
    LpObjective,
    UnsupportedLossError,
    grad1,
    layer_grads,
    loss1,
    lossN,
    reference_optimum,
)
from overparam.expcli.suite import layer_grad_fd_error
from overparam.expcli.data import synth_illcond


def single_example(p=4):
    return LpObjective(Dataset(np.array([[1.0, 0.0]]), np.array([3.0])), p)


def test_loss1_single_example():
    assert loss1(np.zeros((1, 2)), single_example()) == 20.25


def test_grad1_single_example():
    np.testing.assert_array_equal(grad1(np.zeros((1, 2)), single_example()), [[-27.0, 0.0]])


def test_interpolator_zero_loss_and_grad(rng):
    x = rng.normal(size=(10, 3))
    w = rng.normal(size=(1, 3))
    obj = LpObjective(Dataset(x, x @ w[0]), 4)
    assert loss1(w, obj) <= 1e-28
    assert np.linalg.norm(grad1(w, obj)) <= 1e-12


@pytest.mark.parametrize("p", [2, 4])
def test_illcond_optimum(p):
    obj = LpObjective(synth_illcond(10.0, 1.0), p)
    assert loss1(np.array([[10.0, 1.0]]), obj) == 0.0
    w, loss = reference_optimum(obj)
    np.testing.assert_allclose(w, [[10.0, 1.0]], atol=1e-12)
    assert loss <= 1e-20


@pytest.mark.parametrize("p", [2, 4, 6])
def test_grad1_finite_difference(rng, p):
    x = rng.normal(size=(15, 4))
    obj = LpObjective(Dataset(x, rng.normal(size=15)), p)
    w = rng.normal(size=(1, 4)) * 0.5
    g = grad1(w, obj)
    h = 1e-5
    for i in range(4):
        e = np.zeros((1, 4))
        e[0, i] = h
        fd = (loss1(w + e, obj) - loss1(w - e, obj)) / (2 * h)
        assert abs(fd - g[0, i]) <= 1e-6 * max(1.0, abs(fd))


def test_multioutput_l2_gradient(rng):
    x = rng.normal(size=(8, 3))
    obj = LpObjective(Dataset(x, rng.normal(size=(8, 2))), 2)
    w = rng.normal(size=(2, 3))
    np.testing.assert_allclose(grad1(w, obj), (x @ w.T - obj.dataset.y).T @ x / 8, atol=1e-14)


def test_unsupported_combination():
    with pytest.raises(UnsupportedLossError):
        LpObjective(Dataset(np.ones((2, 2)), np.ones((2, 2))), 4)
    with pytest.raises(ValueError):
        LpObjective(Dataset(np.ones((2, 2)), np.ones(2)), 3)
    with pytest.raises(ValueError):
        loss1(np.zeros((1, 3)), single_example())


def test_lossN_matches_collapse(rng):
    x = rng.normal(size=(12, 5))
    obj = LpObjective(Dataset(x, rng.normal(size=12)), 4)
    net = init_gaussian((5, 3, 2, 1), 0.5, 0)
    w = net.weights[2] @ net.weights[1] @ net.weights[0]
    assert lossN(net, obj) == loss1(w, obj)
    sq = LpObjective(Dataset(x, rng.normal(size=(12, 5))), 2)
    assert lossN(init_identity((5, 5, 5), 0.0, 1.0, 0), sq) == loss1(np.eye(5), sq)


def test_layer_grads_depth_one(rng):
    x = rng.normal(size=(6, 3))
    obj = LpObjective(Dataset(x, rng.normal(size=6)), 2)
    w = rng.normal(size=(1, 3))
    (g,) = layer_grads(LinearNetwork((3, 1), (w,)), obj)
    np.testing.assert_array_equal(g, grad1(w, obj))


def test_layer_grads_finite_difference():
    assert layer_grad_fd_error() <= 1e-6


def test_reference_optimum_l2_normal_equations(rng):
    x = rng.normal(size=(30, 6))
    obj = LpObjective(Dataset(x, rng.normal(size=30)), 2)
    w, _ = reference_optimum(obj)
    assert np.linalg.norm(x.T @ (x @ w[0] - obj.dataset.y[:, 0])) <= 1e-8


def test_reference_optimum_consistent():
    x = np.eye(3)
    w, loss = reference_optimum(LpObjective(Dataset(x, [1.0, 2.0, 3.0]), 2))
    assert loss <= 1e-30


def test_reference_optimum_l4_stationary(rng):
    x = rng.normal(size=(40, 5))
    obj = LpObjective(Dataset(x, rng.normal(size=40)), 4)
    w, loss = reference_optimum(obj)
    assert np.linalg.norm(grad1(w, obj)) <= 1e-9
    # any perturbation increases a convex loss
    for _ in range(5):
        assert loss1(w + 1e-3 * rng.normal(size=w.shape), obj) >= loss
