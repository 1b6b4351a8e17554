"""
Direct versus inverse estimation over a flat channel
====================================================

Direct estimation regresses r = f(x) + w on x, so the noise stays in the
target.  Inverse estimation regresses x on r, so the noise enters the
features and biases the fit.
"""

from dctneuron.channels import FlatChannel
from dctneuron.estimators import train_direct, train_inverse
from dctneuron.neuron import FeatureBasis, schedule
from dctneuron.nonlinearities import make
from dctneuron.numerics import Rng

basis = FeatureBasis(128, 6)
sched = schedule(0.01)

f = make("compander")
for snr in (80, 30, 10, 0):
    ch = FlatChannel(f, snr)
    out = []
    for train in (train_direct, train_inverse):
        rng = Rng(1)
        xs = rng.uniform(5000, 0, 127)
        run = train(ch, xs, rng, basis, sched)
        out.append(run)
    d, i = out
    print(f"{snr:>3} dB  direct NMSE {d.nmse:.2e} (function {d.function_nmse:.2e}, "
          f"{d.samples_to_converge} samples)   inverse NMSE {i.nmse:.2e} (system {i.function_nmse:.2e}, "
          f"{i.clipped} clipped)")
