import numpy as np
import pytest

from overparam.model import (
    LinearNetwork,
    balancedness_residual,
    end_to_end,
    factor_balanced,
    init_balanced,
    init_gaussian,
    init_identity,
)


def test_gaussian_shapes_and_determinism():
    a = init_gaussian((128, 1, 1), 0.01, 3)
    assert [w.shape for w in a.weights] == [(1, 128), (1, 1)]
    b = init_gaussian((128, 1, 1), 0.01, 3)
    assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))


def test_gaussian_rejects_zero_std():
    with pytest.raises(ValueError):
        init_gaussian((3, 2, 1), 0.0, 0)


def test_gaussian_norm_scale_monte_carlo():
    std, shape = 1e-9, (6, 5)
    norms = np.array([np.linalg.norm(init_gaussian((5, 6), std, s).weights[0]) for s in range(100)])
    # ||W||^2 / std^2 ~ chi^2 with 30 dof
    expected = std * np.sqrt(np.prod(shape))
    assert abs(norms.mean() - expected) <= 3 * norms.std() / np.sqrt(100) + 0.05 * expected


def test_identity_square_exact():
    net = init_identity((3, 3, 3), 0.0, 1.0, 0)
    np.testing.assert_array_equal(end_to_end(net), np.eye(3))
    assert balancedness_residual(net) == 0.0


def test_identity_rectangular_partial():
    net = init_identity((3, 2, 3), 0.0, 1.0, 0)
    np.testing.assert_array_equal(end_to_end(net), np.diag([1.0, 1.0, 0.0]))


def test_identity_diagonal_spread():
    net = init_identity((50, 50), 0.01, 1.0, 1)
    diag = np.diag(net.weights[0])
    assert np.all((diag > 0.95) & (diag < 1.05))
    with pytest.raises(ValueError):
        init_identity((2, 2), -1.0, 1.0, 0)


def test_balanced_depth_one_is_sample():
    net = init_balanced((4, 2), 0.5, 7)
    rng = np.random.default_rng(7)
    np.testing.assert_array_equal(net.weights[0], rng.normal(0.0, 0.5, size=(2, 4)))


@pytest.mark.parametrize("widths", [(4, 2, 1), (5, 3, 3, 2), (6, 4, 4, 4, 3)])
def test_balanced_residual_and_product(widths):
    net = init_balanced(widths, 0.7, 0)
    assert balancedness_residual(net) <= 1e-12
    rng = np.random.default_rng(0)
    n = len(widths) - 1
    sampled = rng.normal(0.0, 0.7**n, size=(widths[-1], widths[0]))
    np.testing.assert_allclose(end_to_end(net), sampled, atol=1e-10)


def test_balanced_independent_of_hidden_width():
    a = end_to_end(init_balanced((8, 1, 1), 0.3, 5))
    b = end_to_end(init_balanced((8, 100, 1), 0.3, 5))
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_balanced_width_too_small():
    with pytest.raises(ValueError):
        init_balanced((4, 1, 2), 0.1, 0)
    with pytest.raises(ValueError):
        factor_balanced(np.ones((1, 3)), (4, 2, 1))


def test_end_to_end_examples():
    net = LinearNetwork((1, 2, 1), (np.array([[1.0], [2.0]]), np.array([[3.0, 4.0]])))
    np.testing.assert_array_equal(end_to_end(net), [[11.0]])
    w = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(end_to_end(LinearNetwork((3, 2), (w,))), w)


def test_end_to_end_associativity(rng):
    net = init_gaussian((5, 4, 3, 2), 1.0, 1)
    w1, w2, w3 = net.weights
    left = (w3 @ w2) @ w1
    right = w3 @ (w2 @ w1)
    np.testing.assert_allclose(left, right, rtol=1e-10)
    assert end_to_end(net).shape == (2, 5)


def test_balancedness_hand_values():
    w1 = np.array([[1.0, 0.0]])
    assert balancedness_residual(LinearNetwork((2, 1, 1), (w1, np.array([[1.0]])))) == 0.0
    assert balancedness_residual(LinearNetwork((2, 1, 1), (w1, np.array([[2.0]])))) == 3.0
    zeros = LinearNetwork((3, 2, 1), (np.zeros((2, 3)), np.zeros((1, 2))))
    assert balancedness_residual(zeros) == 0.0
    assert balancedness_residual(LinearNetwork((3, 1), (np.ones((1, 3)),))) == 0.0


def test_network_validation():
    with pytest.raises(ValueError):
        LinearNetwork((3, 2, 1), (np.zeros((2, 3)),))
    with pytest.raises(ValueError):
        LinearNetwork((3, 1), (np.zeros((2, 3)),))
    with pytest.raises(ValueError):
        LinearNetwork((2, 1), (np.array([[np.inf, 0.0]]),))
    net = init_gaussian((3, 2, 1), 1.0, 0)
    assert net.depth == 2 and net.input_dim == 3 and net.output_dim == 1
