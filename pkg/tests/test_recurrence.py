import math

import numpy as np
import pytest

from diagssm import (
    KernelParams,
    build_kernel,
    causal_conv_fft,
    dss_exp_kernel,
    run_exp,
    run_softmax_stable,
    zoh_discretize_diag,
)
from diagssm.cli import sample_exp_params, sample_softmax_params

LN2 = math.log(2.0)


def test_zoh_halving_mode():
    d = zoh_discretize_diag([-1.0 + 0j], [1.0], LN2)
    assert abs(d.a_bar[0] - 0.5) < 1e-15
    assert abs(d.b_bar[0] - 0.5) < 1e-15


def test_zoh_zero_input_map():
    d = zoh_discretize_diag([-1.0 + 0j, -2.0 + 1j], [0.0, 0.0], 0.7)
    assert np.array_equal(d.b_bar, np.zeros(2))


def test_zoh_contractive_for_stable_modes():
    rng = np.random.RandomState(0)
    lam = -np.abs(rng.standard_normal(8)) - 0.01 + 1j * rng.standard_normal(8)
    d = zoh_discretize_diag(lam, np.ones(8), 0.3)
    assert np.all(np.abs(d.a_bar) < 1.0)


def test_zoh_rejects_zero_lambda():
    with pytest.raises(ValueError, match="singular lambda"):
        zoh_discretize_diag([0j], [1.0], 0.5)


def test_run_exp_zero_input():
    p = KernelParams("exp", [0.1], [0.4], [1.0], -0.5)
    y, x = run_exp(p, np.zeros(16))
    assert np.array_equal(y, np.zeros(16))
    assert np.array_equal(x, np.zeros(1))


def test_run_exp_impulse_response_is_kernel():
    rng = np.random.RandomState(1)
    p = sample_exp_params(rng)
    impulse = np.zeros(64)
    impulse[0] = 1.0
    y, _ = run_exp(p, impulse)
    assert np.abs(y - dss_exp_kernel(p, 64)).max() < 1e-12


def test_run_exp_matches_convolution():
    rng = np.random.RandomState(2)
    for _ in range(5):
        p = sample_exp_params(rng)
        u = rng.standard_normal(512)
        y, _ = run_exp(p, u)
        y_conv = causal_conv_fft(dss_exp_kernel(p, 512), u)
        assert np.abs(y - y_conv).max() < 1e-9


def test_run_exp_state_continuation():
    rng = np.random.RandomState(3)
    p = sample_exp_params(rng)
    u = rng.standard_normal(200)
    y_full, x_full = run_exp(p, u)
    y_a, x_a = run_exp(p, u[:77])
    y_b, x_b = run_exp(p, u[77:], x_init=x_a)
    assert np.abs(np.concatenate([y_a, y_b]) - y_full).max() < 1e-12
    assert np.abs(x_b - x_full).max() < 1e-12


def test_run_exp_forget_limit():
    # strongly damped mode: the state tracks -u_k / lam within each step
    p = KernelParams("exp", [math.log(30.0)], [0.0], [1.0], 0.0)  # lam = -30, dt = 1
    lam = -30.0
    u = np.random.RandomState(4).standard_normal(32)
    _, x = run_exp(p, u)
    assert abs(x[0] + u[-1] / lam) < 1e-6 * (abs(u[-1]) + 1.0)


def test_run_softmax_zero_input():
    p = KernelParams("softmax", [-0.5], [1.0], [1.0], -1.0)
    y, x = run_softmax_stable(p, np.zeros(32))
    assert np.array_equal(y, np.zeros(32))
    assert np.abs(x).max() == 0.0


def test_run_softmax_positive_re_copies_to_horizon():
    # one unstable mode: an impulse is carried across the whole window and
    # reappears near 1/lam at the last position, with earlier outputs
    # geometrically small; closed form x_{L-1} = (1 - e^{-lam dt}) / lam
    l = 64
    lam = 5.0
    p = KernelParams("softmax", [lam], [0.0], [1.0], 0.0)
    u = np.zeros(l)
    u[0] = 1.0
    y, x = run_softmax_stable(p, u, eps=1e-14)
    exact_last = (1.0 - math.exp(-lam)) / lam
    assert abs(x[0] - exact_last) < 1e-10
    assert abs(x[0] - 1.0 / lam) < 2e-3        # the headline approximation
    assert np.abs(y[:-1]).max() < math.exp(-lam) * exact_last * 1.01
    assert y[-1] == pytest.approx(exact_last, abs=1e-10)
    y_conv = causal_conv_fft(build_kernel(p, l, eps=1e-14), u)
    assert np.abs(y - y_conv).max() < 1e-8


def test_run_softmax_matches_convolution_mixed_signs():
    rng = np.random.RandomState(5)
    for trial in range(6):
        p = sample_softmax_params(rng, l=256, force_positive=trial % 2 == 1)
        u = rng.standard_normal(256)
        y, _ = run_softmax_stable(p, u)
        y_conv = causal_conv_fft(build_kernel(p, 256), u)
        assert np.abs(y - y_conv).max() < 1e-8


def test_run_softmax_long_horizon_equivalence():
    rng = np.random.RandomState(6)
    for trial in range(2):
        p = sample_softmax_params(rng, l=4096, force_positive=trial == 1)
        u = rng.standard_normal(4096)
        y, _ = run_softmax_stable(p, u)
        y_conv = causal_conv_fft(build_kernel(p, 4096), u)
        assert np.abs(y - y_conv).max() < 1e-8


def test_run_softmax_guard_near_singular():
    # exp(L*lam*dt) == 1 exactly: purely imaginary lam completing full turns
    l = 8
    lam_im = 2.0 * math.pi / l
    p = KernelParams("softmax", [0.0], [lam_im], [1.0], 0.0)
    with pytest.raises(ValueError, match="softmax weight undefined"):
        run_softmax_stable(p, np.ones(l))


def test_run_softmax_rejects_zero_lambda():
    p = KernelParams("softmax", [0.0], [0.0], [1.0], 0.0)
    with pytest.raises(ValueError, match="singular lambda"):
        run_softmax_stable(p, np.ones(4))
