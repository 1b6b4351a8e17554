"""The DCT neuron: a cosine feature map followed by an adaptive linear combiner.

A scalar input ``x`` in [0, N-1] is expanded into ``Q`` features
``cos(pi k_q (2x + 1) / 2N)`` and the output is ``coeffs @ features``.
Two frequency layouts are supported:

* ``"standard"``: ``k_q = 0, 1, ..., Q-1`` (includes the constant term);
* ``"odd"``: ``k_q = 1, 3, ..., 2Q-1`` (no constant term).

For inputs uniform over the domain the feature correlation matrix is diagonal
(1 for the constant feature, 1/2 for the others), which is what makes the LMS
step size ``mu = 4 alpha`` independent of the data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dct_core import beta
from .errors import ContractError, DomainError, NumericError

__all__ = [
    "FeatureBasis",
    "DctModel",
    "LmsSchedule",
    "schedule",
    "features",
    "predict",
    "lms_step",
    "lms_train",
    "closed_form",
    "empirical_rc",
    "from_spectrum",
]


@dataclass(frozen=True)
class FeatureBasis:
    n: int = 128
    q: int = 6
    indexing: str = "standard"

    def __post_init__(self):
        if self.indexing not in ("standard", "odd"):
            raise ContractError(f"indexing must be 'standard' or 'odd', got {self.indexing!r}")
        if self.n < 2:
            raise ContractError("domain size N must be >= 2")
        if not 1 <= self.q <= self.n:
            raise ContractError(f"Q must lie in 1..N, got {self.q}")

    @property
    def freqs(self) -> np.ndarray:
        q = np.arange(self.q)
        return q if self.indexing == "standard" else 2 * q + 1

    @property
    def rc_diagonal(self) -> np.ndarray:
        """Diagonal of E[c c^T] for x uniform over the domain."""
        d = np.full(self.q, 0.5)
        d[self.freqs == 0] = 1.0
        return d

    def __call__(self, x) -> np.ndarray:
        return features(self, x)


def features(basis: FeatureBasis, x) -> np.ndarray:
    """Feature vector(s): shape ``(Q,)`` for a scalar, ``(len(x), Q)`` for an array."""
    xa = np.asarray(x, dtype=np.float64)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0) or np.any(xa > basis.n - 1):
        raise DomainError(f"feature input outside [0, {basis.n - 1}]")
    arg = np.multiply.outer(2.0 * xa + 1.0, basis.freqs) * (np.pi / (2 * basis.n))
    return np.cos(arg)


@dataclass
class DctModel:
    basis: FeatureBasis
    coeffs: np.ndarray = None

    def __post_init__(self):
        if self.coeffs is None:
            self.coeffs = np.zeros(self.basis.q)
        self.coeffs = np.array(self.coeffs, dtype=np.float64)
        if self.coeffs.shape != (self.basis.q,):
            raise ContractError(f"expected {self.basis.q} coefficients, got shape {self.coeffs.shape}")
        if not np.all(np.isfinite(self.coeffs)):
            raise NumericError("model coefficients must be finite")

    def __call__(self, x):
        return predict(self, x)

    def copy(self) -> "DctModel":
        return DctModel(self.basis, self.coeffs.copy())


@dataclass(frozen=True)
class LmsSchedule:
    alpha: float
    mu: float
    kappa: float
    t_kappa: float


def schedule(alpha: float, kappa: float = 0.01) -> LmsSchedule:
    """Step size ``4 alpha`` and predicted convergence time ``-ln(kappa) / (2 alpha)``."""
    if not 0 < alpha < 1:
        raise ContractError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0 < kappa < 1:
        raise ContractError(f"kappa must lie in (0, 1), got {kappa}")
    return LmsSchedule(alpha=alpha, mu=4.0 * alpha, kappa=kappa, t_kappa=-np.log(kappa) / (2.0 * alpha))


def predict(model: DctModel, x):
    out = features(model.basis, x) @ model.coeffs
    return float(out) if np.ndim(out) == 0 else out


def lms_step(model: DctModel, x: float, y: float, mu: float):
    """One LMS update; returns ``(new_model, a_priori_error)``."""
    if not mu > 0:
        raise ContractError("step size must be positive")
    if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(mu)):
        raise NumericError("non-finite LMS input")
    c = features(model.basis, x)
    err = float(y - model.coeffs @ c)
    return DctModel(model.basis, model.coeffs + mu * err * c), err


def lms_train(model: DctModel, xs, ys, mu: float):
    """Run LMS over paired samples in order.

    Returns ``(trained_model, errors)`` where ``errors[n]`` is the a-priori
    error at step ``n``.  Equivalent to folding :func:`lms_step`.
    """
    if not mu > 0:
        raise ContractError("step size must be positive")
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ContractError("inputs and targets must be 1-D arrays of equal length")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise NumericError("non-finite LMS input")
    feats = features(model.basis, xs)
    f = model.coeffs.copy()
    errors = np.empty(xs.size)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(xs.size):
            c = feats[n]
            e = ys[n] - f @ c
            errors[n] = e
            f += (mu * e) * c
    if not np.all(np.isfinite(f)):
        raise NumericError("LMS diverged")
    return DctModel(model.basis, f), errors


def closed_form(basis: FeatureBasis, xs, ys, uniform: bool = False) -> DctModel:
    """Mean-square optimal coefficients from samples.

    With ``uniform=True`` the feature correlation is taken to be its
    theoretical diagonal value, so each coefficient is the sample
    cross-correlation divided by 1/2 (by 1 for the constant feature).
    Otherwise the sample normal equations are solved.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size == 0 or xs.shape != ys.shape:
        raise ContractError("need equally sized, non-empty inputs and targets")
    if xs.size < basis.q:
        raise ContractError(f"need at least Q={basis.q} samples")
    c = features(basis, xs)
    if uniform:
        r = c.T @ ys / xs.size
        return DctModel(basis, r / basis.rc_diagonal)
    coeffs, *_ = np.linalg.lstsq(c, ys, rcond=None)
    return DctModel(basis, coeffs)


def empirical_rc(basis: FeatureBasis, xs) -> np.ndarray:
    """Sample mean of ``c(x) c(x)^T``."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size < 10 * basis.q:
        raise ContractError(f"need at least 10*Q={10 * basis.q} samples")
    c = features(basis, xs)
    return c.T @ c / xs.size


def from_spectrum(coeffs, q: int) -> DctModel:
    """Model whose output at integer x equals the order-q iDCT of an orthonormal spectrum."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = coeffs.size
    basis = FeatureBasis(n=n, q=q, indexing="standard")
    return DctModel(basis, beta(n)[:q] * coeffs[:q])

