"""Sequential (state-stepping) views of the diagonal kernels.

A diagonal state space steps each coordinate independently:

    x_{i,k} = exp(lam_i*dt) * x_{i,k-1} + bbar_i * u_k ,   y_k = Re(w . x_k).

For the exp variant bbar_i = (exp(lam_i*dt)-1)/lam_i and Re(lam_i) < 0, so
the step factors have magnitude below one and the recurrence is run as
written.  The softmax variant's input map divides by exp(lam*dt*L) - 1,
which overflows when Re(lam) > 0; its recurrence is therefore evaluated
through an intermediate state so that every exponentiated scalar has
non-positive real part, splitting on the sign of Re(lam).

With zero initial state both recurrences reproduce the convolution of the
input with the corresponding kernel.
"""

from dataclasses import dataclass

import numpy as np

from .cnum import DEFAULT_EPS, reciprocal_eps
from .kernel import _require_variant, effective_lambda


@dataclass
class DiagDiscretization:
    """Zero-order-hold step factors of a diagonal system."""

    a_bar: np.ndarray
    b_bar: np.ndarray


def zoh_discretize_diag(lam, b, delta):
    """a_bar_i = exp(lam_i*delta), b_bar_i = (a_bar_i - 1)/lam_i * b_i."""
    lam = np.asarray(lam, dtype=np.complex128).reshape(-1)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if np.any(lam == 0):
        raise ValueError("singular lambda")
    a_bar = np.exp(lam * delta)
    return DiagDiscretization(a_bar=a_bar, b_bar=(a_bar - 1.0) / lam * b)


def run_exp(params, u, x_init=None):
    """Step the exp-variant recurrence over u; returns (y, final_state).

    ``x_init`` defaults to zero, in which case y equals the causal
    convolution of u with the exp-variant kernel.  Passing the returned
    state back in continues a split sequence exactly.
    """
    _require_variant(params, "exp")
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise ValueError("input must be one-dimensional")
    lam = effective_lambda(params)
    d = zoh_discretize_diag(lam, np.ones(params.n), params.delta)
    if x_init is None:
        x = np.zeros(params.n, dtype=np.complex128)
    else:
        x = np.asarray(x_init, dtype=np.complex128).reshape(-1).copy()
        if x.size != params.n:
            raise ValueError("x_init must match the state size")
    y = np.empty(u.size)
    for k, uk in enumerate(u):
        x = d.a_bar * x + d.b_bar * uk
        y[k] = (params.w @ x).real
    return y, x


def run_softmax_stable(params, u, eps=DEFAULT_EPS):
    """Step the softmax-variant recurrence over u; returns (y, final_state).

    Two cases per coordinate, selected by p = [Re(lam) > 0]:

        x~_k = exp(lam*dt*(1-p)) * x~_{k-1} + exp(-k*lam*dt*p) * u_k
        x_k  = x~_k * exp(lam*dt*p*(k-(L-1))) / (lam * s)

    where s = (exp(z*L)-1)/(exp(z)-1) with z = lam*dt*(1-2p) is the
    softmax row sum after the same max-real-part shift the kernel path
    applies.  The division by s goes through the eps-regularized
    reciprocal so this view matches the kernel-convolution view for any
    eps, not just in exact arithmetic.  The horizon L is the input length;
    it enters the input map, so the recurrence cannot be resumed or
    extended past it.
    """
    _require_variant(params, "softmax")
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise ValueError("input must be one-dimensional")
    l = u.size
    if l < 1:
        raise ValueError("input must be nonempty")
    lam = effective_lambda(params)
    if np.any(lam == 0):
        raise ValueError("singular lambda")
    dt = params.delta
    p = (lam.real > 0).astype(float)
    z = lam * dt * (1.0 - 2.0 * p)
    den = np.exp(z * l) - 1.0
    if np.any(np.abs(den) <= 1e-12):
        raise ValueError("softmax weight undefined")
    row_sum = den / (np.exp(z) - 1.0)
    recip = reciprocal_eps(row_sum, eps) / lam

    step = np.exp(lam * dt * (1.0 - p))
    assert np.all((lam * dt * (1.0 - p)).real <= 0.0)
    assert np.all((z * l).real <= 0.0)

    xt = np.zeros(params.n, dtype=np.complex128)
    x = xt
    y = np.empty(l)
    inj_rate = -lam * dt * p      # exp(inj_rate * k) has |.| <= 1 for k >= 0
    out_rate = lam * dt * p       # exp(out_rate * (k - (L-1))) has |.| <= 1 for k < L
    assert np.all(inj_rate.real <= 0.0) and np.all(out_rate.real >= 0.0)
    for k, uk in enumerate(u):
        xt = step * xt + np.exp(inj_rate * k) * uk
        x = xt * np.exp(out_rate * (k - (l - 1))) * recip
        y[k] = (params.w @ x).real
    return y, x
