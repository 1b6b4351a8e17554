"""Supervised estimation of a memoryless channel from pilots.

Direct estimation fits ``g ~ f`` on pairs ``(x, r)``; the noise stays additive
in the residual.  Inverse estimation fits ``g ~ f^-1`` on pairs ``(r, x)``;
received values are clamped into the feature domain first.  A direct
estimate can also be inverted afterwards by reflecting its graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import isotonic_regression

from .channels import FlatChannel, flat_transmit
from .errors import ContractError, NotInvertible
from .neuron import DctModel, FeatureBasis, LmsSchedule, closed_form, lms_train
from .nonlinearities import NonlinearFn
from .numerics import Rng

__all__ = [
    "TrainRun",
    "train_direct",
    "train_inverse",
    "invert_direct",
    "ml_detect",
    "tail_nmse",
    "samples_to_converge",
    "direct_function_nmse",
    "system_nmse",
    "TAIL",
    "WINDOW",
]

TAIL = 500
WINDOW = 100
METHODS = ("lms", "block")


@dataclass
class TrainRun:
    model: DctModel
    mse_trace: np.ndarray
    nmse: float
    samples_to_converge: int | None
    function_nmse: float
    clipped: int = 0
    meta: dict = field(default_factory=dict)


def tail_nmse(errors, reference, tail: int = TAIL) -> float:
    """Mean of the last ``tail`` squared errors over the mean square of ``reference``."""
    errors = np.asarray(errors, dtype=np.float64)
    power = float(np.mean(np.asarray(reference, dtype=np.float64) ** 2))
    return float(np.mean(errors[-tail:] ** 2) / power)


def samples_to_converge(errors, window: int = WINDOW, tail: int = TAIL, factor: float = 2.0) -> int:
    """Index of the first sample at which the ``window``-sample moving average of
    the squared error drops below ``factor`` times its final (tail) level."""
    sq = np.asarray(errors, dtype=np.float64) ** 2
    if sq.size < window:
        raise ContractError(f"need at least {window} errors")
    moving = np.convolve(sq, np.ones(window) / window, mode="valid")
    final = np.mean(sq[-tail:])
    hits = np.flatnonzero(moving < factor * final)
    if hits.size == 0:
        hits = np.flatnonzero(moving <= factor * final)
    return int(hits[0] + window - 1) if hits.size else int(sq.size)


def direct_function_nmse(model: DctModel, f: NonlinearFn) -> float:
    """Noise-free ``E[(g(x) - f(x))^2] / E[f(x)^2]`` over the integer grid."""
    x = np.arange(f.n, dtype=np.float64)
    fx = f(x)
    return float(np.mean((model(x) - fx) ** 2) / np.mean(fx**2))


def system_nmse(model: DctModel, f: NonlinearFn) -> float:
    """Noise-free ``E[(g(f(x)) - x)^2] / E[x^2]`` over the integer grid.

    Since ``f^-1(f(x)) = x`` this is also the error of ``g`` against the exact
    inverse, weighted by how often each received level occurs.
    """
    x = np.arange(f.n, dtype=np.float64)
    return float(np.mean((model(f(x)) - x) ** 2) / np.mean(x**2))


def _fit(basis, inputs, targets, sched, method):
    if method == "lms":
        return lms_train(DctModel(basis), inputs, targets, sched.mu)
    if method == "block":
        model = closed_form(basis, inputs, targets)
        return model, targets - model(inputs)
    raise ContractError(f"method must be one of {METHODS}, got {method!r}")


def train_direct(ch: FlatChannel, xs, rng: Rng, basis: FeatureBasis, sched: LmsSchedule,
                 method: str = "lms") -> TrainRun:
    """Learn ``g ~ f`` from pilots ``xs`` and their received values."""
    xs = np.asarray(xs, dtype=np.float64)
    r = flat_transmit(ch, xs, rng)
    model, errors = _fit(basis, xs, r, sched, method)
    return TrainRun(
        model=model,
        mse_trace=errors**2,
        nmse=tail_nmse(errors, ch.f(xs)),
        samples_to_converge=samples_to_converge(errors) if method == "lms" else None,
        function_nmse=direct_function_nmse(model, ch.f),
        meta={"method": method, "received": r},
    )


def train_inverse(ch: FlatChannel, xs, rng: Rng, basis: FeatureBasis, sched: LmsSchedule,
                  method: str = "lms") -> TrainRun:
    """Learn ``g ~ f^-1`` from received values (clamped to the domain) and pilots."""
    xs = np.asarray(xs, dtype=np.float64)
    r = flat_transmit(ch, xs, rng)
    top = basis.n - 1
    clipped = int(np.count_nonzero((r < 0) | (r > top)))
    rc = np.clip(r, 0.0, top)
    model, errors = _fit(basis, rc, xs, sched, method)
    return TrainRun(
        model=model,
        mse_trace=errors**2,
        nmse=tail_nmse(errors, xs),
        samples_to_converge=samples_to_converge(errors) if method == "lms" else None,
        function_nmse=system_nmse(model, ch.f),
        clipped=clipped,
        meta={"method": method, "received": r},
    )


def invert_direct(model: DctModel, q_inverse: int, monotone_tol: float = 5e-2) -> DctModel:
    """Invert a direct estimate by reflecting its graph about the diagonal.

    The estimate is sampled on the integer grid, the pairs ``(g(x), x)`` are
    interpolated piecewise-linearly back onto the integer grid and a DCT model
    of order ``q_inverse`` is fitted to the result.  Dips smaller than
    ``monotone_tol`` times the output range are flattened; larger ones raise
    :class:`NotInvertible`.
    """
    n = model.basis.n
    x = np.arange(n, dtype=np.float64)
    y = model(x)
    if y[-1] < y[0]:
        x, y = x[::-1], y[::-1]
    span = y[-1] - y[0]
    if span <= 0:
        raise NotInvertible("estimate is flat over the domain")
    dips = np.maximum.accumulate(y) - y
    if np.max(dips) > monotone_tol * span:
        raise NotInvertible(f"estimate is not monotone (largest dip {np.max(dips):.3g})")
    y = isotonic_regression(y).x
    grid = np.arange(n, dtype=np.float64)
    x_of_y = np.interp(grid, y, x)
    return closed_form(FeatureBasis(n=n, q=q_inverse, indexing=model.basis.indexing), grid, x_of_y)


def ml_detect(model, r, grid):
    """Grid point minimising ``(r - g(x))^2``; exact ties go to the smallest point."""
    grid = np.sort(np.asarray(grid, dtype=np.float64))
    if grid.size == 0:
        raise ContractError("candidate grid is empty")
    ra = np.asarray(r, dtype=np.float64)
    out = model(grid)
    dist = (ra[..., None] - out) ** 2
    best = np.min(dist, axis=-1, keepdims=True)
    idx = np.argmax(dist <= best * (1 + 1e-12), axis=-1)
    res = grid[idx]
    return float(res) if np.ndim(res) == 0 else res
