"""Small dense eigen-solvers and a reproducible Gaussian sampler.

Everything here works on plain ``numpy`` arrays.  Matrices are tiny (the
equalizer order is 3 in all experiments) so the symmetric solver is a cyclic
Jacobi sweep rather than a LAPACK call: it is easy to audit and its output is
stable across platforms.

The random generator is SplitMix64 used in counter mode: the ``i``-th 64-bit
word of a stream with seed ``s`` is ``mix(s + (i + 1) * 0x9E3779B97F4A7C15)``
with the standard SplitMix64 finaliser.  Uniforms take the top 53 bits, normals
come from Box-Muller pairs.  All arithmetic is integer or IEEE double, so a
given seed reproduces bit-identical samples on any platform.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, NumericError, SingularPencil

__all__ = [
    "Rng",
    "gauss",
    "sym_eig",
    "gen_eig_smallest",
    "check_symmetric",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _splitmix64(counters: np.ndarray, seed: np.uint64) -> np.ndarray:
    z = seed + (counters + np.uint64(1)) * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class Rng:
    """Counter-based SplitMix64 stream.

    The generator owns a single counter; every draw consumes a contiguous
    block of 64-bit words.  Two instances built from the same seed produce
    identical streams.
    """

    def __init__(self, seed: int = 0):
        if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
            raise ContractError(f"seed must be an integer, got {seed!r}")
        if seed < 0 or seed > _MASK64:
            raise ContractError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.counter = 0

    def __repr__(self):
        return f"Rng(seed={self.seed}, counter={self.counter})"

    def next_u64(self, n: int) -> np.ndarray:
        n = int(n)
        if n < 0:
            raise ContractError("sample count must be non-negative")
        idx = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            return _splitmix64(idx, np.uint64(self.seed))

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """``n`` doubles uniform on ``[low, high)``."""
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return low + (high - low) * u

    def integers(self, low: int, high: int, n: int) -> np.ndarray:
        """``n`` integers uniform on ``[low, high)``."""
        if high <= low:
            raise ContractError("empty integer range")
        u = self.uniform(n)
        return np.minimum(low + np.floor(u * (high - low)), high - 1).astype(np.int64)

    def normal(self, n: int, sigma: float = 1.0) -> np.ndarray:
        return gauss(self, sigma, n)

    def spawn(self, index: int) -> "Rng":
        """Independent child stream with seed ``seed + index`` (mod 2**64)."""
        return Rng((self.seed + int(index)) & _MASK64)


def gauss(rng: Rng, sigma: float, n: int) -> np.ndarray:
    """``n`` i.i.d. N(0, sigma^2) samples via Box-Muller."""
    if sigma < 0 or not np.isfinite(sigma):
        raise ContractError(f"sigma must be finite and >= 0, got {sigma}")
    n = int(n)
    pairs = (n + 1) // 2
    words = rng.next_u64(2 * pairs)
    # u1 in (0, 1] keeps the logarithm finite
    u1 = ((words[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u2 = (words[1::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(2.0 * np.pi * u2)
    z[1::2] = radius * np.sin(2.0 * np.pi * u2)
    if sigma == 0:
        return np.zeros(n)
    return sigma * z[:n]


def check_symmetric(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{name} has non-finite entries")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-10 * scale:
        raise ContractError(f"{name} is not symmetric")
    return a


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive; ties go to the first index
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def sym_eig(a, tol: float = 1e-15, max_sweeps: int = 100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ascending and orthonormal eigenvectors
    in the columns of ``V``.  Each eigenvector is signed so that its
    largest-magnitude entry is positive.
    """
    a = check_symmetric(a)
    n = a.shape[0]
    if n > 64:
        raise ContractError("sym_eig is meant for dimension <= 64")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n == 0:
        return np.zeros(0), v
    norm = np.sqrt(np.sum(a * a))
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J acting on rows/cols p, q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NumericError("Jacobi iteration did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], _fix_signs(v[:, order])


def gen_eig_smallest(a, b):
    """Smallest pair of the symmetric-definite pencil ``A v = mu B v``.

    ``B`` is factored as ``L L^T`` and the problem is reduced to the standard
    symmetric problem for ``L^-1 A L^-T``.  The returned vector satisfies
    ``v^T B v = 1``.  Raises :class:`SingularPencil` when ``B`` is not
    positive definite to working tolerance.
    """
    a = check_symmetric(a, "A")
    b = check_symmetric(b, "B")
    if a.shape != b.shape:
        raise ContractError("A and B must have the same shape")
    n = a.shape[0]
    wb, _ = sym_eig(b)
    if wb[0] <= 1e-12 * max(np.trace(b) / n, 0.0) or wb[0] <= 0.0:
        raise SingularPencil(f"B is not positive definite (smallest eigenvalue {wb[0]:.3e})")
    lower = np.linalg.cholesky(0.5 * (b + b.T))
    linv = np.linalg.solve(lower, np.eye(n))
    c = linv @ a @ linv.T
    w, y = sym_eig(0.5 * (c + c.T))
    v = linv.T @ y[:, 0]
    v = v / np.sqrt(v @ b @ v)
    v = _fix_signs(v[:, None])[:, 0]
    return float(w[0]), v
