"""
Why cosines
===========

A sampled nonlinearity on [0, N-1] is rarely periodic, so the DFT sees a jump
at the wrap-around and spreads energy over many bins.  The DCT implicitly
mirrors the sequence first, which removes the jump.  This script measures the
difference on the sigmoid.
"""

import numpy as np

from dctneuron.dct_core import beta, dct, dft, even_extend, idct, truncation_mse
from dctneuron.nonlinearities import make

N = 128
f = make("sigmoid", N).tabulate()

F = dct(f)
D = dft(f) * np.sqrt(N)  # orthonormal scale, so both satisfy Parseval

print("energy in the first Q coefficients")
print(f"{'Q':>4} {'DCT':>10} {'DFT':>10}")
for q in (1, 2, 4, 6, 8, 16):
    # the DFT of a real sequence stores each frequency twice
    dft_share = (np.abs(D[0]) ** 2 + 2 * np.sum(np.abs(D[1:q]) ** 2)) / np.sum(np.abs(D) ** 2)
    print(f"{q:>4} {F[:q] @ F[:q] / (F @ F):10.6f} {dft_share:10.6f}")

# %%
# Truncation error is the energy of the dropped coefficients.

for q in (2, 4, 6, 8):
    direct = np.mean((idct(F, q) - f) ** 2)
    print(f"Q={q}: truncation MSE {truncation_mse(F, q):.4e}, measured {direct:.4e}")

# %%
# The DCT is the DFT of the mirrored sequence, up to a half-sample phase.

E = dft(even_extend(f))
k = np.arange(N)
aligned = np.exp(-1j * np.pi * k / (2 * N)) * E[:N]
print("largest imaginary part after alignment:", np.max(np.abs(aligned.imag)))
print("largest mismatch with dct():", np.max(np.abs(beta(N) * N * aligned.real - F)))
