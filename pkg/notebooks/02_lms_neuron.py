"""
Training a single DCT neuron
============================

The neuron maps x to sum_q f_q cos(pi k_q (2x+1) / 2N).  Under uniform inputs
its features are uncorrelated with power 1/2, so LMS with step 4*alpha has
every mode decaying like (1 - 2 alpha)^n and the time to reach a fraction
kappa of the initial error is -ln(kappa) / (2 alpha).
"""

import numpy as np

from dctneuron.estimators import samples_to_converge
from dctneuron.neuron import DctModel, FeatureBasis, closed_form, empirical_rc, lms_train, schedule
from dctneuron.nonlinearities import make
from dctneuron.numerics import Rng

f = make("sqrt")
basis = FeatureBasis(n=128, q=6)

rc = empirical_rc(basis, Rng(0).uniform(100_000, 0, 127))
print("empirical feature correlation (diagonal):", np.round(np.diag(rc), 4))
print("largest off-diagonal:", np.max(np.abs(rc - np.diag(np.diag(rc)))).round(4))

# %%
dense = Rng(1).uniform(200_000, 0, 127)
best = closed_form(basis, dense, f(dense))

for alpha in (0.005, 0.01, 0.02):
    sched = schedule(alpha, kappa=0.01)
    xs = Rng(2).uniform(5000, 0, 127)
    model, errors = lms_train(DctModel(basis), xs, f(xs), sched.mu)
    n_conv = samples_to_converge(errors)
    gap = np.linalg.norm(model.coeffs - best.coeffs) / np.linalg.norm(best.coeffs)
    print(f"alpha={alpha:<6} T_kappa={sched.t_kappa:7.1f}  converged after {n_conv:5d}  "
          f"coefficient gap {gap:.4f}")

print("closed-form coefficients:", np.round(best.coeffs, 3))
print("LMS coefficients        :", np.round(model.coeffs, 3))
