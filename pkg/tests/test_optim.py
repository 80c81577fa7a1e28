"""Optimizer behavior: bias-corrected step size, clipping, determinism."""

import numpy as np
import pytest

from graphsum.numerics import Adam, Parameter, Tensor, clip_grad_norm, matmul, tsum


def test_first_step_size_is_learning_rate():
    # with bias correction the first update is ~lr regardless of gradient
    # scale (up to the eps term, which matters only for tiny gradients)
    for g in (0.5, 100.0):
        p = Parameter("p", np.array([1.0]))
        p.grad = np.array([g])
        Adam([p], lr=0.001).step()
        assert abs((1.0 - p.data[0]) - 0.001) < 1e-8
    p = Parameter("p", np.array([1.0]))
    p.grad = np.array([1e-4])
    Adam([p], lr=0.001).step()
    assert abs((1.0 - p.data[0]) - 0.001) < 0.001 * 2e-4


def test_hand_computed_first_two_steps():
    p = Parameter("p", np.array([0.0]))
    opt = Adam([p], lr=0.1)
    m = v = 0.0
    x = 0.0
    for t, g in enumerate((2.0, -1.0), start=1):
        p.grad = np.array([g])
        opt.step()
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        x -= 0.1 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        np.testing.assert_allclose(p.data, [x], atol=1e-15)


def test_none_gradient_means_no_movement():
    p = Parameter("p", np.array([3.0]))
    opt = Adam([p])
    opt.step()
    np.testing.assert_allclose(p.data, [3.0])


def test_zero_grad_clears():
    p = Parameter("p", np.array([1.0]))
    p.grad = np.array([5.0])
    opt = Adam([p])
    opt.zero_grad()
    assert p.grad is None


def test_determinism_across_runs():
    def run():
        rng = np.random.default_rng(0)
        p = Parameter("p", rng.standard_normal((4,)))
        opt = Adam([p], lr=0.01)
        for _ in range(25):
            p.grad = p.data * 2.0
            opt.step()
        return p.data.copy()

    np.testing.assert_array_equal(run(), run())


def test_state_dict_roundtrip():
    p = Parameter("p", np.array([1.0, 2.0]))
    opt = Adam([p], lr=0.01)
    p.grad = np.array([0.1, -0.2])
    opt.step()
    state = opt.state_dict()
    other = Adam([p], lr=0.01)
    other.load_state_dict(state)
    assert other.t == opt.t
    np.testing.assert_array_equal(other.m[0], opt.m[0])
    np.testing.assert_array_equal(other.v[0], opt.v[0])


def test_clip_rescales_global_norm():
    a = Parameter("a", np.zeros(1))
    b = Parameter("b", np.zeros(1))
    a.grad = np.array([3.0])
    b.grad = np.array([4.0])
    norm = clip_grad_norm([a, b], 2.0)
    assert abs(norm - 5.0) < 1e-12
    np.testing.assert_allclose(a.grad, [1.2])
    np.testing.assert_allclose(b.grad, [1.6])
    total = np.sqrt(a.grad[0] ** 2 + b.grad[0] ** 2)
    assert abs(total - 2.0) < 1e-12


def test_clip_leaves_small_gradients_alone():
    a = Parameter("a", np.zeros(1))
    a.grad = np.array([0.5])
    norm = clip_grad_norm([a], 2.0)
    assert abs(norm - 0.5) < 1e-12
    np.testing.assert_allclose(a.grad, [0.5])


def test_adam_fits_linear_map():
    rng = np.random.default_rng(1)
    true_w = rng.standard_normal((3, 2))
    x = Tensor(rng.standard_normal((40, 3)))
    y = Tensor(x.data @ true_w)
    w = Parameter("w", np.zeros((3, 2)))
    opt = Adam([w], lr=0.05)
    losses = []
    for _ in range(400):
        diff = matmul(x, w) - y
        loss = tsum(diff * diff)
        loss.backward()
        losses.append(loss.item())
        opt.step()
        opt.zero_grad()
    assert losses[-1] < 1e-6
    assert losses[-1] < losses[0]
    np.testing.assert_allclose(w.data, true_w, atol=1e-3)
