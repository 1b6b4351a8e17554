"""Joint estimation of a Hammerstein channel with an MDIR equalizer pair.

The receiver compares ``s_n = b^T r_n`` (forward equalizer on the last M
received samples) with ``s_hat_n = a^T C_n f`` (backward equalizer on the
last M reference samples ``g(x) = c(x)^T f`` produced by a DCT model).

For fixed references, minimising ``E[(b^T r - a^T g)^2]`` subject to
``b^T R_rg R_g^-1 R_rg^T b = 1`` gives ``a = R_g^-1 R_rg^T b`` and the
generalized eigenproblem ``R_r b = mu R_rg R_g^-1 R_rg^T b``.  The smallest
``mu`` solves it and the attained error power is ``mu - 1``.  The
``"unwhitened"`` mode assumes white references (``R_g = I``).

:func:`alternate` interleaves that solve with one LMS pass over the DCT
coefficients per outer iteration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .channels import LinearFilter, freq_grid
from .errors import ContractError, NumericError, SingularPencil
from .neuron import DctModel, FeatureBasis, features
from .nonlinearities import NonlinearFn
from .numerics import Rng, gen_eig_smallest

__all__ = [
    "CorrEstimates",
    "MdirSolution",
    "MdirState",
    "lag_matrix",
    "cos_stack",
    "build_cos_matrix",
    "estimate_correlations",
    "whiten",
    "mdir_solve",
    "residual_power",
    "dct_update",
    "alternate",
    "align_scale",
    "nonlinearity_nmse",
    "magnitude_nmse",
    "estimated_response",
]


def lag_matrix(v, m: int) -> np.ndarray:
    """Rows ``[v_n, v_{n-1}, ..., v_{n-m+1}]`` for ``n = m-1 .. len(v)-1``."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < m:
        raise ContractError(f"need a 1-D stream with at least {m} samples")
    return np.stack([v[m - 1 - k: v.size - k] for k in range(m)], axis=1)


def build_cos_matrix(basis: FeatureBasis, window) -> np.ndarray:
    """``M x Q`` matrix whose row ``m`` is ``c(x_{n-m})``; ``window = [x_n, x_{n-1}, ...]``."""
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 1 or window.size < 1:
        raise ContractError("window must be a non-empty 1-D array")
    return features(basis, window)


def cos_stack(basis: FeatureBasis, xs, m: int) -> np.ndarray:
    """All cosine matrices of a pilot stream, shape ``(T - m + 1, m, Q)``."""
    feats = features(basis, np.asarray(xs, dtype=np.float64))
    t = feats.shape[0]
    if t < m:
        raise ContractError(f"need at least {m} pilots")
    return np.stack([feats[m - 1 - k: t - k] for k in range(m)], axis=1)


@dataclass(frozen=True)
class CorrEstimates:
    r_r: np.ndarray
    r_rg: np.ndarray
    r_g: np.ndarray
    count: int
    centered: bool = False


def _vectors(stream, m):
    s = np.asarray(stream, dtype=np.float64)
    return lag_matrix(s, m) if s.ndim == 1 else s


def estimate_correlations(rs, gs, m: int, centered: bool = False) -> CorrEstimates:
    """Sample second moments of the received and reference vectors.

    ``rs`` and ``gs`` are either scalar streams (windowed internally) or
    already-stacked ``(T, m)`` vector sequences.
    """
    r = _vectors(rs, m)
    g = _vectors(gs, m)
    if r.shape != g.shape or r.shape[1] != m:
        raise ContractError("received and reference streams must align")
    if r.shape[0] < 50 * m:
        raise ContractError(f"need at least {50 * m} vectors for order {m}")
    if centered:
        r = r - r.mean(axis=0)
        g = g - g.mean(axis=0)
    t = r.shape[0]
    r_r = r.T @ r / t
    r_g = g.T @ g / t
    return CorrEstimates(
        r_r=0.5 * (r_r + r_r.T),
        r_rg=r.T @ g / t,
        r_g=0.5 * (r_g + r_g.T),
        count=t,
        centered=centered,
    )


def whiten(corr: CorrEstimates):
    """Estimates for references transformed by ``L^-1`` where ``R_g = L L^T``.

    Returns ``(whitened_corr, L_inv)``; the whitened reference correlation is
    the identity.
    """
    try:
        lower = np.linalg.cholesky(corr.r_g)
    except np.linalg.LinAlgError as exc:
        raise SingularPencil("reference correlation is not positive definite") from exc
    l_inv = np.linalg.solve(lower, np.eye(lower.shape[0]))
    eye = np.eye(lower.shape[0])
    return CorrEstimates(corr.r_r, corr.r_rg @ l_inv.T, eye, corr.count, corr.centered), l_inv


@dataclass(frozen=True)
class MdirSolution:
    a_hat: np.ndarray
    b_hat: np.ndarray
    lambda_min: float


def _pencil(corr: CorrEstimates, mode: str):
    if mode == "unwhitened":
        return corr.r_rg @ corr.r_rg.T, None
    if mode == "general":
        try:
            solve_g = np.linalg.solve(corr.r_g, corr.r_rg.T)
        except np.linalg.LinAlgError as exc:
            raise SingularPencil("reference correlation is singular") from exc
        b = corr.r_rg @ solve_g
        return 0.5 * (b + b.T), solve_g
    raise ContractError(f"mode must be 'unwhitened' or 'general', got {mode!r}")


def mdir_solve(corr: CorrEstimates, mode: str = "general") -> MdirSolution:
    """Optimal equalizer pair for the given second moments."""
    pencil, solve_g = _pencil(corr, mode)
    mu, b_hat = gen_eig_smallest(corr.r_r, pencil)
    a_hat = corr.r_rg.T @ b_hat if mode == "unwhitened" else solve_g @ b_hat
    return MdirSolution(a_hat=a_hat, b_hat=b_hat, lambda_min=mu - 1.0)


def residual_power(corr: CorrEstimates, a_hat, b_hat) -> float:
    """``E[(b^T r - a^T g)^2]`` under the given second moments."""
    a_hat = np.asarray(a_hat, dtype=np.float64)
    b_hat = np.asarray(b_hat, dtype=np.float64)
    return float(b_hat @ corr.r_r @ b_hat - 2.0 * b_hat @ corr.r_rg @ a_hat + a_hat @ corr.r_g @ a_hat)


@dataclass
class MdirState:
    a_hat: np.ndarray
    b_hat: np.ndarray
    model: DctModel
    iteration: int = 0
    mse: float = np.inf
    lambda_min: float = np.inf
    history: list = field(default_factory=list)
    converged: bool = False
    warning: str | None = None


def _canonical(f):
    """Unit-norm copy of ``f`` with its largest-magnitude entry positive, plus the signed scale."""
    norm = np.linalg.norm(f)
    if norm == 0 or not np.isfinite(norm):
        raise NumericError("DCT coefficients collapsed to zero or diverged")
    lead = f[np.argmax(np.abs(f))]
    scale = norm if lead > 0 else -norm
    return f / scale, scale


def dct_update(state: MdirState, window, r_vec, alpha: float, normalized: bool = False):
    """One LMS step on the DCT coefficients with the equalizers held fixed.

    ``window`` is the ``M x Q`` cosine matrix (or the ``M`` pilots it is built
    from).  The step is ``4 alpha`` (divided by ``|a|^2`` when ``normalized``).
    The updated coefficients are rescaled to unit norm with positive leading
    entry and the scale is moved into ``a_hat``.  Returns ``(state, error)``.
    """
    cmat = np.asarray(window, dtype=np.float64)
    if cmat.ndim == 1:
        cmat = build_cos_matrix(state.model.basis, cmat)
    f = state.model.coeffs
    u = cmat.T @ state.a_hat
    err = float(state.b_hat @ np.asarray(r_vec, dtype=np.float64) - f @ u)
    step = 4.0 * alpha
    if normalized:
        power = float(state.a_hat @ state.a_hat)
        step = step / power if power > 0 else 0.0
    f_new, scale = _canonical(f + step * err * u)
    new = MdirState(
        a_hat=state.a_hat * scale,
        b_hat=state.b_hat,
        model=DctModel(state.model.basis, f_new),
        iteration=state.iteration,
        mse=state.mse,
        lambda_min=state.lambda_min,
        history=state.history,
    )
    return new, err


def _lms_epoch(f, a_hat, b_hat, stack, r_vecs, alpha, normalized):
    # inlined copy of dct_update for the whole stream
    s = r_vecs @ b_hat
    for n in range(s.size):
        u = stack[n].T @ a_hat
        err = s[n] - f @ u
        step = 4.0 * alpha
        if normalized:
            power = a_hat @ a_hat
            step = step / power if power > 0 else 0.0
        f, scale = _canonical(f + step * err * u)
        a_hat = a_hat * scale
    return f, a_hat


def _block_update(a_hat, b_hat, stack, r_vecs):
    u = np.einsum("tmq,m->tq", stack, a_hat)
    f, *_ = np.linalg.lstsq(u, r_vecs @ b_hat, rcond=None)
    f, scale = _canonical(f)
    return f, a_hat * scale


def alternate(pilots, received, basis: FeatureBasis, alpha: float = 1e-2, m: int = 3,
              max_outer_iters: int = 50, rel_tol: float = 1e-6, mse_threshold: float = 0.0,
              mode: str = "general",
              centered: bool = True, normalized: bool = True, seed: int = 0,
              init=None, f_update: str = "lms") -> MdirState:
    """Alternate equalizer solves and LMS passes over the DCT coefficients.

    Each outer iteration (i) forms the references ``g(x) = C f`` over the
    stream, (ii) re-estimates the correlations and solves for the equalizer
    pair, (iii) runs one LMS pass of :func:`dct_update` over the stream.  It
    stops when the error power drops to ``mse_threshold``, when its relative
    change falls below ``rel_tol``, or after ``max_outer_iters`` iterations.

    ``f_update="block"`` replaces the LMS pass by the least-squares solve
    for the coefficients given the equalizers.

    With ``centered=True`` the correlations and the LMS pass use mean-removed
    signals and the constant coefficient is set afterwards by matching the
    means of both branches; otherwise raw second moments are used throughout.
    """
    if f_update not in ("lms", "block"):
        raise ContractError(f"f_update must be 'lms' or 'block', got {f_update!r}")
    xs = np.asarray(pilots, dtype=np.float64)
    rs = np.asarray(received, dtype=np.float64)
    if xs.shape != rs.shape or xs.ndim != 1:
        raise ContractError("pilot and received streams must be aligned 1-D arrays")
    if xs.size < 50 * m * basis.q:
        raise ContractError(f"need at least 50*M*Q = {50 * m * basis.q} samples")
    stack = cos_stack(basis, xs, m)
    r_vecs = lag_matrix(rs, m)
    r_mean = r_vecs.mean(axis=0)
    c_mean = stack.mean(axis=0)
    if centered:
        stack_w, r_w = stack - c_mean, r_vecs - r_mean
    else:
        stack_w, r_w = stack, r_vecs
    dc = np.flatnonzero(basis.freqs == 0)

    if init is None:
        f0 = Rng(seed).normal(basis.q)
    else:
        f0 = np.asarray(init, dtype=np.float64)
    f, _ = _canonical(f0)

    history = []
    best = None
    prev = None
    state = None
    for it in range(1, max_outer_iters + 1):
        refs = stack_w @ f
        corr = estimate_correlations(r_w, refs, m)
        sol = mdir_solve(corr, mode)
        mse = residual_power(corr, sol.a_hat, sol.b_hat)
        f_prev = f
        if f_update == "lms":
            f, a_hat = _lms_epoch(f.copy(), sol.a_hat.copy(), sol.b_hat, stack_w, r_w, alpha, normalized)
        else:
            f, a_hat = _block_update(sol.a_hat, sol.b_hat, stack_w, r_w)
        if centered and dc.size:
            u_mean = c_mean.T @ a_hat
            k = dc[0]
            if abs(u_mean[k]) > 1e-12 * np.linalg.norm(u_mean):
                rest = u_mean @ f - u_mean[k] * f[k]
                f = f.copy()
                f[k] = (r_mean @ sol.b_hat - rest) / u_mean[k]
                f, scale = _canonical(f)
                a_hat = a_hat * scale
        record = {
            "iteration": it,
            "mse": mse,
            "lambda_min": sol.lambda_min,
            "delta_f": float(np.linalg.norm(f - f_prev)),
        }
        history.append(record)
        state = MdirState(
            a_hat=sol.a_hat, b_hat=sol.b_hat, model=DctModel(basis, f_prev), iteration=it,
            mse=mse, lambda_min=sol.lambda_min, history=history,
        )
        if best is None or mse < best.mse:
            best = state
        if mse <= mse_threshold or (prev is not None and abs(prev - mse) <= rel_tol * abs(prev)):
            state.converged = True
            break
        prev = mse
    if not state.converged:
        warnings.warn(f"alternating optimisation stopped after {max_outer_iters} iterations", RuntimeWarning)
        best.warning = "max_outer_iters reached"
        best.history = history
        return best
    return state


def align_scale(estimate, truth) -> float:
    """Least-squares gain ``s`` minimising ``|s * estimate - truth|^2``."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    denom = float(estimate @ estimate)
    return float(estimate @ truth / denom) if denom > 0 else 0.0


def nonlinearity_nmse(model: DctModel, f: NonlinearFn) -> float:
    """NMSE of the gain-aligned estimate against ``f`` over the integer grid."""
    x = np.arange(f.n, dtype=np.float64)
    est = model(x)
    truth = f(x)
    s = align_scale(est, truth)
    return float(np.mean((s * est - truth) ** 2) / np.mean(truth**2))


def estimated_response(a_hat, b_hat, n_points: int = 512) -> np.ndarray:
    """Complex ``A_hat / B_hat`` on a uniform grid over [0, pi]."""
    w = freq_grid(n_points)
    z = np.exp(-1j * np.outer(w, np.arange(len(a_hat))))
    num = z @ np.asarray(a_hat, dtype=np.float64)
    z = np.exp(-1j * np.outer(w, np.arange(len(b_hat))))
    den = z @ np.asarray(b_hat, dtype=np.float64)
    return num / den


def magnitude_nmse(a_hat, b_hat, filt: LinearFilter, n_points: int = 512) -> float:
    """NMSE between gain-aligned estimated and true linear magnitude responses."""
    est = np.abs(estimated_response(a_hat, b_hat, n_points))
    truth = np.abs(estimated_response(filt.a, filt.b, n_points))
    s = align_scale(est, truth)
    return float(np.mean((s * est - truth) ** 2) / np.mean(truth**2))
