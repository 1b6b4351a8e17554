"""
Inverting a direct estimate
===========================

A direct fit is robust to noise but gives f, not its inverse.  Reflecting the
fitted curve about the diagonal and refitting with more coefficients gives an
inverse that keeps the robustness.
"""

import numpy as np

from dctneuron.channels import FlatChannel
from dctneuron.estimators import invert_direct, system_nmse, train_direct, train_inverse
from dctneuron.neuron import FeatureBasis, schedule
from dctneuron.nonlinearities import make
from dctneuron.numerics import Rng

for kind in ("compander", "sigmoid", "sqrt"):
    f = make(kind)
    ch = FlatChannel(f, 30.0)
    rng = Rng(1)
    xs = rng.uniform(5000, 0, 127)
    direct = train_direct(ch, xs, rng, FeatureBasis(128, 6), schedule(0.01))
    reflected = invert_direct(direct.model, q_inverse=32)
    rng = Rng(1)
    xs = rng.uniform(5000, 0, 127)
    learned = train_inverse(ch, xs, rng, FeatureBasis(128, 32), schedule(0.01))
    print(f"{kind:>10}: inverse via reflection {system_nmse(reflected, f):.2e}, "
          f"learned directly {learned.function_nmse:.2e}")

# %%
# Round trip on a few points, through the compander estimate.

f = make("compander")
rng = Rng(1)
xs = rng.uniform(5000, 0, 127)
direct = train_direct(FlatChannel(f, 30.0), xs, rng, FeatureBasis(128, 6), schedule(0.01))
reflected = invert_direct(direct.model, q_inverse=32)
grid = np.array([1.0, 10.0, 50.0, 120.0])
print("x        :", grid)
print("g(f(x))  :", np.round(reflected(np.clip(f(grid), 0, 127)), 2))
