"""A single diagonal-state sequence-mixing layer, and a toy trainer.

The layer maps a batch of H-coordinate, length-L sequences to sequences of
the same shape.  All H coordinates share one diagonal spectrum; each
coordinate h has its own sample time delta_h and complex weight row W[h],
from which a length-L kernel is built and convolved with that coordinate's
input.  A residual connection, a GELU, and a position-wise H x H output
projection follow.  Excluding the projection, the kernel machinery holds
exactly 2N + H + 2HN real parameters.

Randomness is fully pinned: a splitmix64 generator drives Box-Muller
sampling, and the stream layout is documented on :class:`SplitMix64` so a
port in any language can reproduce parameter files bit for bit.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .cnum import DEFAULT_EPS
from .fftconv import causal_conv_fft
from .hippo import skew_hippo_lambda
from .kernel import KernelParams, VARIANTS, build_kernel, kernel_grad_exp, truncate_kernel
from .recurrence import run_exp, run_softmax_stable

PARAMS_FORMAT_VERSION = 1

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit generator (splitmix64) with Box-Muller normals.

    Raw stream: state <- (state + 0x9E3779B97F4A7C15) mod 2^64, then
    z <- state; z <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64;
    z <- (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2^64; output z ^ (z >> 31).

    uniform() maps one raw output to [0, 1) as (z >> 11) * 2^-53.

    normal() draws u1 then u2 with uniform() (u1 is replaced by 2^-53 if it
    is exactly zero), forms z0 = sqrt(-2 ln u1) cos(2 pi u2) and
    z1 = sqrt(-2 ln u1) sin(2 pi u2), returns z0 and caches z1 for the
    next call.  Ports must reproduce this exact consumption order.
    """

    def __init__(self, seed):
        self._state = int(seed) & _MASK64
        self._cached_normal = None

    def next_u64(self):
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self):
        return (self.next_u64() >> 11) * 2.0 ** -53

    def normal(self):
        if self._cached_normal is not None:
            value = self._cached_normal
            self._cached_normal = None
            return value
        u1 = self.uniform() or 2.0 ** -53
        u2 = self.uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        self._cached_normal = radius * math.sin(2.0 * math.pi * u2)
        return radius * math.cos(2.0 * math.pi * u2)


@dataclass
class LayerParams:
    variant: str
    h: int
    n: int
    lambda_re: np.ndarray   # length N, shared across coordinates
    lambda_im: np.ndarray   # length N
    delta_log: np.ndarray   # length H
    w: np.ndarray           # H x N complex
    w_out: np.ndarray       # H x H
    b_out: np.ndarray       # length H

    def coordinate_kernel_params(self, h_idx):
        """Kernel parameters of a single coordinate."""
        return KernelParams(
            variant=self.variant,
            lambda_re=self.lambda_re,
            lambda_im=self.lambda_im,
            w=self.w[h_idx],
            delta_log=float(self.delta_log[h_idx]),
        )


DELTA_INIT_LOW = 0.001
DELTA_INIT_HIGH = 0.1


def init_layer(h, n, variant, seed):
    """Seeded layer parameters.

    The shared spectrum comes from :func:`skew_hippo_lambda`; for the exp
    family lambda_re stores log(1/2) so the effective real part is -1/2 at
    init, matching the softmax variant.  Each delta is log-uniform in
    [0.001, 0.1].  W's real and imaginary parts are standard normal.  The
    projection starts as the identity with zero bias, keeping the layer
    near-passthrough.  Draw order: H uniforms for delta_log, then W row by
    row, real part before imaginary part.
    """
    if h < 1 or n < 1:
        raise ValueError("h and n must be >= 1")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    spectrum = skew_hippo_lambda(n)
    if variant == "softmax":
        lambda_re = spectrum.lambda_re.copy()
    else:
        lambda_re = np.full(n, math.log(0.5))
    rng = SplitMix64(seed)
    lo, hi = math.log(DELTA_INIT_LOW), math.log(DELTA_INIT_HIGH)
    delta_log = np.array([lo + rng.uniform() * (hi - lo) for _ in range(h)])
    w = np.empty((h, n), dtype=np.complex128)
    for row in range(h):
        for col in range(n):
            w[row, col] = complex(rng.normal(), rng.normal())
    return LayerParams(
        variant=variant,
        h=h,
        n=n,
        lambda_re=lambda_re,
        lambda_im=spectrum.lambda_im.copy(),
        delta_log=delta_log,
        w=w,
        w_out=np.eye(h),
        b_out=np.zeros(h),
    )


_ERF_COEFFS = (
    -1.26551223, 1.00002368, 0.37409196, 0.09678418, -0.18628806,
    0.27886807, -1.13520398, 1.48851587, -0.82215223, 0.17087277,
)


def _erf(x):
    # Rational approximation of erf via erfc(z) ~= t*exp(-z^2 + poly(t)),
    # t = 1/(1 + z/2); absolute error below 1e-7 on the real line.
    z = np.abs(x)
    t = 1.0 / (1.0 + 0.5 * z)
    poly = np.zeros_like(t)
    for coeff in reversed(_ERF_COEFFS[1:]):
        poly = t * (poly + coeff)
    erfc = t * np.exp(-z * z + _ERF_COEFFS[0] + poly)
    return np.where(x >= 0.0, 1.0 - erfc, erfc - 1.0)


def gelu(x):
    """Exact-form GELU 0.5*x*(1 + erf(x/sqrt(2)))."""
    x = np.asarray(x, dtype=float)
    return 0.5 * x * (1.0 + _erf(x / math.sqrt(2.0)))


def layer_kernels(params, l, eps=DEFAULT_EPS, kernel_limit=None):
    """The H per-coordinate kernels of length L, stacked as an H x L array."""
    kernels = np.stack([
        build_kernel(params.coordinate_kernel_params(h_idx), l, eps)
        for h_idx in range(params.h)
    ])
    if kernel_limit is not None:
        kernels = truncate_kernel(kernels, kernel_limit)
    return kernels


def ssm_outputs(params, u, mode="conv", kernel_limit=None, eps=DEFAULT_EPS):
    """Per-coordinate state-space outputs y, before residual and projection.

    ``mode="conv"`` convolves each coordinate with its kernel (FFT path);
    ``mode="recurrent"`` steps the sequential recurrences instead.  The two
    agree to rounding.  Kernel truncation only exists on the convolution
    path: a truncated kernel is no longer the impulse response of the
    underlying recurrence.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 3:
        raise ValueError("input must have shape (batch, coordinates, length)")
    b, h, l = u.shape
    if h != params.h:
        raise ValueError("coordinate count does not match the layer")
    if mode not in ("conv", "recurrent"):
        raise ValueError(f"unknown mode {mode!r}")
    y = np.empty_like(u)
    if mode == "conv":
        kernels = layer_kernels(params, l, eps, kernel_limit)
        for bi in range(b):
            for hi in range(h):
                y[bi, hi] = causal_conv_fft(kernels[hi], u[bi, hi])
        return y
    if kernel_limit is not None:
        raise ValueError("kernel_limit requires conv mode")
    for hi in range(h):
        kp = params.coordinate_kernel_params(hi)
        for bi in range(b):
            if params.variant == "softmax":
                y[bi, hi], _ = run_softmax_stable(kp, u[bi, hi], eps)
            else:
                y[bi, hi], _ = run_exp(kp, u[bi, hi])
    return y


def layer_forward(params, u, mode="conv", kernel_limit=None, eps=DEFAULT_EPS):
    """Full layer: out_t = W_out . gelu(y_t + u_t) + b_out, position-wise."""
    u = np.asarray(u, dtype=float)
    y = ssm_outputs(params, u, mode, kernel_limit, eps)
    pre = gelu(y + u)
    return np.einsum("ij,bjl->bil", params.w_out, pre) + params.b_out[None, :, None]


def nearest_rank_percentile(values, p):
    """The ceil(p*N)-th smallest value (1-based nearest-rank percentile)."""
    values = np.sort(np.asarray(values).reshape(-1))
    if values.size == 0:
        raise ValueError("empty sample")
    rank = max(1, math.ceil(p * values.size))
    return values[rank - 1]


@dataclass
class KernelStats:
    argmax_pos: np.ndarray      # length H, int
    profiles: np.ndarray        # H x L, each row |K|/max|K| (zeros stay zero)
    argmax_p95: int


def kernel_stats(params, l, eps=DEFAULT_EPS):
    """Peak positions and max-normalized magnitude profiles of the kernels.

    argmax ties resolve to the lowest index; an all-zero kernel reports
    argmax 0 and an all-zero profile.  The summary statistic is the
    nearest-rank 95th percentile of the argmax positions.
    """
    kernels = layer_kernels(params, l, eps)
    mags = np.abs(kernels)
    argmax = mags.argmax(axis=1)
    peaks = mags.max(axis=1)
    safe = np.where(peaks > 0.0, peaks, 1.0)
    profiles = mags / safe[:, None]
    return KernelStats(
        argmax_pos=argmax.astype(int),
        profiles=profiles,
        argmax_p95=int(nearest_rank_percentile(argmax, 0.95)),
    )


TOY_SLOW_MODE_RATE = 1.5      # radians per step for the slowest spectral mode
TOY_DECAY_OVER_WINDOW = 0.7   # envelope falls to exp(-0.7) across the window
TOY_INIT_ENERGY = 0.15        # mean squared value of the initial kernel


def train_toy_delay(n, l, lag, steps, lr=1e-3, seed=0):
    """Fit a single exp-variant kernel to a unit impulse at position lag.

    Minimizes mean((K - impulse)^2) over the complex weights with the
    analytic kernel gradient and Adam (beta1=0.9, beta2=0.999, eps=1e-8).
    The spectrum and sample time stay frozen at a setup chosen for the
    task, which keeps the fit convex in the trained parameters:

    * the shared spectrum is the long-memory initialization, with the
      sample time set so the slowest mode advances ~1.5 rad per step
      (slower modes would be indistinguishable from constants, faster
      ones alias into noise);
    * every mode decays by only exp(-0.7) across the window, so the
      kernel's reach covers any admissible lag from the start;
    * the random initial weights are rescaled so the initial kernel has
      mean square 0.15 -- an energetic start whose removal, along with
      the placement of the peak at the lag, is what training has to do.

    A lag far beyond typical kernel-peak positions makes this a small
    long-range capability check.  Returns a report dict with the loss
    history every 100 steps.
    """
    if not 0 <= lag < l:
        raise ValueError("lag must satisfy 0 <= lag < l")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    spectrum = skew_hippo_lambda(n)
    delta = TOY_SLOW_MODE_RATE / float(spectrum.lambda_im[-1])
    lambda_re = np.full(n, math.log(TOY_DECAY_OVER_WINDOW / (delta * l)))
    delta_log = math.log(delta)
    rng = SplitMix64(seed)
    w = np.array([complex(rng.normal(), rng.normal()) for _ in range(n)])

    def kernel_params(weights):
        return KernelParams(variant="exp", lambda_re=lambda_re,
                            lambda_im=spectrum.lambda_im, w=weights,
                            delta_log=delta_log)

    k0 = build_kernel(kernel_params(w), l)
    w = w * math.sqrt(TOY_INIT_ENERGY / float(np.mean(k0 * k0)))
    target = np.zeros(l)
    target[lag] = 1.0

    theta = np.concatenate([w.real, w.imag])
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    beta1, beta2, eps_opt = 0.9, 0.999, 1e-8

    history = []
    initial_mse = None
    for step in range(steps):
        params = kernel_params(theta[0:n] + 1j * theta[n:2 * n])
        kernel = build_kernel(params, l)
        resid = kernel - target
        mse = float(np.mean(resid * resid))
        if not np.isfinite(mse):
            raise RuntimeError(f"training diverged at step {step}")
        if step == 0:
            initial_mse = mse
        if step % 100 == 0:
            history.append({"step": step, "mse": mse})
        g = kernel_grad_exp(params, l, 2.0 * resid / l)
        grad = np.concatenate([g.d_w_re, g.d_w_im])
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1 ** (step + 1))
        v_hat = v / (1.0 - beta2 ** (step + 1))
        theta = theta - lr * m_hat / (np.sqrt(v_hat) + eps_opt)

    final_kernel = build_kernel(kernel_params(theta[0:n] + 1j * theta[n:2 * n]), l)
    final_resid = final_kernel - target
    final_mse = float(np.mean(final_resid * final_resid))
    if not np.isfinite(final_mse):
        raise RuntimeError(f"training diverged at step {steps}")
    history.append({"step": steps, "mse": final_mse})
    return {
        "n": n,
        "l": l,
        "lag": lag,
        "steps": steps,
        "lr": lr,
        "seed": seed,
        "initial_mse": initial_mse,
        "final_mse": final_mse,
        "final_argmax": int(np.argmax(np.abs(final_kernel))),
        "history": history,
    }


def _g17(value):
    return "%.17g" % float(value)


def _json_vector(values):
    return "[" + ",".join(_g17(v) for v in np.asarray(values).reshape(-1)) + "]"


def _json_matrix(values):
    rows = np.atleast_2d(np.asarray(values))
    return "[" + ",".join(_json_vector(row) for row in rows) + "]"


def params_to_json(params):
    """Serialize layer parameters; all numbers carry %.17g precision."""
    return (
        "{"
        f'"version":{PARAMS_FORMAT_VERSION},'
        f'"variant":"{params.variant}",'
        f'"h":{params.h},'
        f'"n":{params.n},'
        f'"lambda_re":{_json_vector(params.lambda_re)},'
        f'"lambda_im":{_json_vector(params.lambda_im)},'
        f'"delta_log":{_json_vector(params.delta_log)},'
        f'"w_re":{_json_matrix(params.w.real)},'
        f'"w_im":{_json_matrix(params.w.imag)},'
        f'"w_out":{_json_matrix(params.w_out)},'
        f'"b_out":{_json_vector(params.b_out)}'
        "}"
    )


def save_layer_params(path, params):
    with open(path, "w") as fh:
        fh.write(params_to_json(params) + "\n")


def params_from_json(text):
    raw = json.loads(text)
    if raw.get("version") != PARAMS_FORMAT_VERSION:
        raise ValueError("unsupported parameter file version")
    variant = raw["variant"]
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    h, n = int(raw["h"]), int(raw["n"])
    params = LayerParams(
        variant=variant,
        h=h,
        n=n,
        lambda_re=np.asarray(raw["lambda_re"], dtype=float),
        lambda_im=np.asarray(raw["lambda_im"], dtype=float),
        delta_log=np.asarray(raw["delta_log"], dtype=float),
        w=np.asarray(raw["w_re"], dtype=float) + 1j * np.asarray(raw["w_im"], dtype=float),
        w_out=np.asarray(raw["w_out"], dtype=float),
        b_out=np.asarray(raw["b_out"], dtype=float),
    )
    if params.lambda_re.shape != (n,) or params.lambda_im.shape != (n,):
        raise ValueError("spectrum length does not match n")
    if params.delta_log.shape != (h,) or params.w.shape != (h, n):
        raise ValueError("per-coordinate parameter shapes do not match h, n")
    if params.w_out.shape != (h, h) or params.b_out.shape != (h,):
        raise ValueError("projection shapes do not match h")
    return params


def load_layer_params(path):
    with open(path) as fh:
        return params_from_json(fh.read())


def write_report_json(path, report):
    """Training report as JSON, numbers at %.17g."""
    hist = ",".join(
        '{"step":%d,"mse":%s}' % (item["step"], _g17(item["mse"]))
        for item in report["history"]
    )
    text = (
        "{"
        f'"n":{report["n"]},"l":{report["l"]},"lag":{report["lag"]},'
        f'"steps":{report["steps"]},"lr":{_g17(report["lr"])},"seed":{report["seed"]},'
        f'"initial_mse":{_g17(report["initial_mse"])},'
        f'"final_mse":{_g17(report["final_mse"])},'
        f'"final_argmax":{report["final_argmax"]},'
        f'"history":[{hist}]'
        "}"
    )
    with open(path, "w") as fh:
        fh.write(text + "\n")
