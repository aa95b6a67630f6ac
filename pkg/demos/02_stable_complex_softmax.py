"""Why the complex softmax needs care, and two stable ways to get it.

Over the complex numbers the softmax denominator sum(exp(x_k)) can vanish
(exp(0) + exp(i*pi) = 0) and the exponentials themselves overflow once
real parts grow.  The eps-stabilized softmax fixes both; a transform-domain
evaluation reproduces it for geometric inputs (c*0, c*1, ..., c*(L-1)).
"""

import numpy as np

from diagssm import reciprocal_eps, softmax_eps, softmax_via_fft

# --- the singular case ------------------------------------------------------
x = np.array([0.0, 1j * np.pi])
naive = np.exp(x) / np.exp(x).sum()
print("naive softmax(0, i*pi):        ", naive, " <- denominator is ~0")
print("stabilized softmax(0, i*pi):   ", softmax_eps(x), " <- bounded zeros")

# --- the overflow case ------------------------------------------------------
big = 30.0 * np.arange(64, dtype=complex)   # exp(30*63) overflows float64
with np.errstate(over="ignore", invalid="ignore"):
    naive = np.exp(big) / np.exp(big).sum()
print("\nnaive softmax of a growing ramp has %d NaNs" % np.isnan(naive).sum())
stable = softmax_eps(big)
print("stabilized version is finite:", bool(np.all(np.isfinite(stable.view(float)))))
print("and concentrates on the last position:", np.abs(stable[-3:]))

# --- the bounded reciprocal doing the work ----------------------------------
print("\n|reciprocal_eps(x)| over tiny x stays below 1/(2*sqrt(eps)) = %.2f:"
      % (0.5 / np.sqrt(1e-7)))
for mag in (1.0, 1e-3, 3.16e-4, 1e-5, 0.0):
    print("  |x| = %-8.1e -> %10.3f" % (mag, abs(complex(reciprocal_eps(mag + 0j)))))

# --- transform-domain softmax on geometric inputs ---------------------------
print("\nsoftmax of (c*0, ..., c*(L-1)) via sampled rational function + inverse FFT:")
for c in (-0.5 + 1.0j, 2.0 - 3.0j):
    direct = softmax_eps(c * np.arange(64), eps=1e-12)
    fast = softmax_via_fft(c, 64)
    print("  c = %s: max |diff| = %.3e" % (c, np.abs(direct - fast).max()))
