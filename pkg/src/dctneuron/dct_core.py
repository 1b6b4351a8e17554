"""Orthonormal DCT-II, its inverse, the DFT and the even extension.

Functions are sampled on the integer grid ``x = 0 .. N-1``.  Transforms are
direct O(N^2) matrix products; with ``N = 128`` this is instantaneous and the
code reads exactly like the defining sums.

Truncation error is reported per sample, i.e. ``(1/N) * sum_{k>=q} F_k^2``,
which is the mean of ``(f - f_hat)^2`` over a uniformly drawn grid point.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError

__all__ = [
    "beta",
    "dct_matrix",
    "dct",
    "idct",
    "truncation_mse",
    "dft",
    "even_extend",
]


def _as_samples(values) -> np.ndarray:
    f = np.asarray(values, dtype=np.float64)
    if f.ndim != 1:
        raise ContractError("sampled function must be one-dimensional")
    if f.size < 2:
        raise ContractError("sampled function needs N >= 2 points")
    return f


def beta(n: int) -> np.ndarray:
    """Normalisation weights: 1/sqrt(N) for k = 0 and sqrt(2/N) otherwise."""
    b = np.full(n, np.sqrt(2.0 / n))
    b[0] = np.sqrt(1.0 / n)
    return b


def dct_matrix(n: int) -> np.ndarray:
    """Orthogonal ``N x N`` matrix with entries ``beta_k cos(pi k (2x+1) / 2N)`` (row k, column x)."""
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    return beta(n)[:, None] * np.cos(np.pi * k * (2 * x + 1) / (2 * n))


def dct(values) -> np.ndarray:
    """DCT-II coefficients ``F_k``, orthonormal scaling (energy preserving)."""
    f = _as_samples(values)
    return dct_matrix(f.size) @ f


def idct(coeffs, q: int | None = None) -> np.ndarray:
    """Reconstruct from the first ``q`` coefficients (all of them by default).

    Coefficients are assumed to come from :func:`dct`, so the inverse is the
    transpose of :func:`dct_matrix` restricted to the kept rows.
    """
    c = _as_samples(coeffs)
    n = c.size
    if q is None:
        q = n
    if not 1 <= q <= n:
        raise ContractError(f"truncation order must lie in 1..{n}, got {q}")
    return dct_matrix(n)[:q].T @ c[:q]


def truncation_mse(coeffs, q: int) -> float:
    """Mean squared reconstruction error of :func:`idct` at order ``q``."""
    c = _as_samples(coeffs)
    n = c.size
    if not 1 <= q <= n:
        raise ContractError(f"truncation order must lie in 1..{n}, got {q}")
    return float(np.sum(c[q:] ** 2) / n)


def dft(values) -> np.ndarray:
    """DFT with 1/N normalisation: ``F_k = (1/N) sum_x f(x) exp(-2j pi k x / N)``."""
    f = np.asarray(values)
    if f.ndim != 1 or f.size < 2:
        raise ContractError("sampled function must be one-dimensional with N >= 2")
    n = f.size
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    return np.exp(-2j * np.pi * k * x / n) @ f / n


def even_extend(values) -> np.ndarray:
    """Mirror to length 2N without repeating the endpoint: ``out[x] = f[2N-1-x]`` for ``x >= N``."""
    f = _as_samples(values)
    return np.concatenate([f, f[::-1]])
