"""Memoryless test nonlinearities on the domain [0, N-1].

Every kind is built from a shape ``g: [0, 1] -> [0, 1]`` applied to
``u = x / (N-1)`` and scaled back by ``N-1``:

========== ==================================================== ===========
kind       shape g(u)                                           params
========== ==================================================== ===========
identity   u                                                    none
sigmoid    logistic(a (u - 1/2)), affinely pinned to g(0)=0,    a = 10
           g(1)=1
compander  log(1 + mu u) / log(1 + mu)  (mu-law)                mu = 255
sine       sin(phase u) / sin(phase) for phase <= pi/2,         phase = pi/2
           sin(phase u) beyond that (non-monotone)
square     u^2                                                  none
sqrt       sqrt(u)                                              none
========== ==================================================== ===========
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError, NotInvertible

__all__ = ["KINDS", "NonlinearFn", "make"]

KINDS = ("identity", "sigmoid", "compander", "sine", "square", "sqrt")
_ALIASES = {"log_compander": "compander", "mu_law": "compander"}
_DEFAULTS = {
    "identity": {},
    "sigmoid": {"a": 10.0},
    "compander": {"mu": 255.0},
    "sine": {"phase": np.pi / 2},
    "square": {},
    "sqrt": {},
}


def _logistic(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True)
class NonlinearFn:
    kind: str
    n: int = 128
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ContractError(f"unknown nonlinearity {self.kind!r}; expected one of {', '.join(KINDS)}")
        if int(self.n) < 2:
            raise ContractError("domain size N must be >= 2")
        unknown = set(self.params) - set(_DEFAULTS[kind])
        if unknown:
            raise ContractError(f"unknown parameter(s) for {kind}: {', '.join(sorted(unknown))}")
        merged = {**_DEFAULTS[kind], **{k: float(v) for k, v in self.params.items()}}
        if kind == "sigmoid" and merged["a"] <= 0:
            raise ContractError("sigmoid slope a must be positive")
        if kind == "compander" and merged["mu"] <= 0:
            raise ContractError("compander mu must be positive")
        if kind == "sine" and not 0 < merged["phase"] <= np.pi:
            raise ContractError("sine phase must lie in (0, pi]")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "params", merged)

    @property
    def top(self) -> float:
        return float(self.n - 1)

    def _shape(self, u):
        p = self.params
        if self.kind == "identity":
            return u
        if self.kind == "sigmoid":
            a = p["a"]
            lo, hi = _logistic(-0.5 * a), _logistic(0.5 * a)
            return (_logistic(a * (u - 0.5)) - lo) / (hi - lo)
        if self.kind == "compander":
            return np.log1p(p["mu"] * u) / np.log1p(p["mu"])
        if self.kind == "sine":
            phase = p["phase"]
            if phase <= np.pi / 2:
                return np.sin(phase * u) / np.sin(phase)
            return np.sin(phase * u)
        if self.kind == "square":
            return u * u
        return np.sqrt(u)

    def __call__(self, x):
        """Evaluate at ``x`` (scalar or array) in [0, N-1]."""
        xa = np.asarray(x, dtype=np.float64)
        if np.any(~np.isfinite(xa)) or np.any(xa < 0) or np.any(xa > self.top):
            raise DomainError(f"input outside [0, {self.n - 1}]")
        out = self.top * self._shape(xa / self.top)
        out = np.clip(out, 0.0, self.top)
        return float(out) if np.ndim(out) == 0 else out

    eval = __call__

    @property
    def monotone(self) -> bool:
        return not (self.kind == "sine" and self.params["phase"] > np.pi / 2)

    def tabulate(self) -> np.ndarray:
        """Values on the integer grid 0..N-1."""
        return self(np.arange(self.n, dtype=np.float64))

    def invert(self, y, tol: float = 1e-13):
        """Inverse by vectorised bisection on [0, N-1]."""
        if not self.monotone:
            raise NotInvertible(f"{self.kind} with params {self.params} is not monotone")
        ya = np.asarray(y, dtype=np.float64)
        scalar = ya.ndim == 0
        ya = np.atleast_1d(ya)
        if np.any(~np.isfinite(ya)) or np.any(ya < 0) or np.any(ya > self.top):
            raise DomainError(f"value outside [0, {self.n - 1}]")
        lo = np.zeros_like(ya)
        hi = np.full_like(ya, self.top)
        while np.max(hi - lo) > tol * self.top:
            mid = 0.5 * (lo + hi)
            below = self(mid) < ya
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= np.spacing(np.maximum(hi, 1.0))):
                break
        x = 0.5 * (lo + hi)
        return float(x[0]) if scalar else x

    def to_config(self) -> dict:
        return {"kind": self.kind, "n": self.n, **self.params}


def make(kind: str, n: int = 128, **params) -> NonlinearFn:
    return NonlinearFn(kind, n, params)
