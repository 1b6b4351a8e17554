"""
Hammerstein channels with an MDIR equalizer
===========================================

A static nonlinearity followed by an IIR filter.  The receiver filters the
received samples with b and the modelled references g(x) with a, and picks
both so the two outputs match.  The nonlinearity itself is learned by
alternating that solve with LMS passes over the DCT coefficients.
"""

import warnings

import numpy as np

from dctneuron.channels import DEFAULT_FIR, DEFAULT_IIR, HammersteinChannel, hammerstein_transmit
from dctneuron.mdir import alternate, magnitude_nmse, nonlinearity_nmse
from dctneuron.neuron import FeatureBasis
from dctneuron.nonlinearities import make
from dctneuron.numerics import Rng

f = make("compander")
basis = FeatureBasis(128, 6)

for name, filt in (("IIR", DEFAULT_IIR), ("FIR", DEFAULT_FIR)):
    for snr in (None, 20.0, 10.0, 5.0):
        rng = Rng(1)
        xs = rng.uniform(5000, 0, 127)
        r = hammerstein_transmit(HammersteinChannel(f, filt, snr), xs, rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            st = alternate(xs, r, basis, alpha=0.01, m=3)
        label = "inf" if snr is None else f"{snr:g}"
        print(f"{name} {label:>4} dB: nonlinearity NMSE {nonlinearity_nmse(st.model, f):.2e}, "
              f"|H| NMSE {magnitude_nmse(st.a_hat, st.b_hat, filt):.2e}, {st.iteration} iterations")

# the estimated pair, rescaled so that b_hat[0] = 1
print("a_hat / b_hat[0] =", np.round(st.a_hat / st.b_hat[0], 3))
print("b_hat / b_hat[0] =", np.round(st.b_hat / st.b_hat[0], 3))
