"""Channel simulators: memoryless nonlinearity + AWGN, and Hammerstein cascades.

Noise levels are set through the pre-detection SNR, the ratio between the
noiseless received power and the noise variance.  The signal power is a
Monte-Carlo estimate over inputs uniform on [0, N-1], drawn from a fixed
calibration stream so that ``sigma`` is a deterministic function of the
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import ContractError, DomainError, Unstable
from .nonlinearities import NonlinearFn
from .numerics import Rng, gauss

__all__ = [
    "LinearFilter",
    "FlatChannel",
    "HammersteinChannel",
    "filter_apply",
    "freq_grid",
    "freq_response",
    "flat_transmit",
    "hammerstein_transmit",
    "DEFAULT_IIR",
    "DEFAULT_FIR",
]

CALIBRATION_SAMPLES = 1_000_000
CALIBRATION_SEED = 0x5EED


@dataclass(frozen=True)
class LinearFilter:
    """``H(z) = A(z) / B(z)`` with ``b[0] = 1``; both polynomials have M taps."""

    a: tuple
    b: tuple = None

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.a))
        b = (1.0,) + (0.0,) * (len(a) - 1) if self.b is None else tuple(float(v) for v in np.atleast_1d(self.b))
        if len(a) < 1 or len(b) < 1:
            raise ContractError("filter needs at least one tap")
        m = max(len(a), len(b))
        a += (0.0,) * (m - len(a))
        b += (0.0,) * (m - len(b))
        if b[0] != 1.0:
            raise ContractError("feedback polynomial must be monic (b[0] = 1)")
        if not all(np.isfinite(a + b)):
            raise ContractError("filter taps must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        radius = self.spectral_radius()
        if radius >= 1.0 - 1e-6:
            raise Unstable(f"feedback polynomial has spectral radius {radius:.6f} >= 1")

    @property
    def order(self) -> int:
        return len(self.a)

    def spectral_radius(self) -> float:
        tail = np.trim_zeros(np.array(self.b[1:]), "b")
        if tail.size == 0:
            return 0.0
        comp = np.zeros((tail.size, tail.size))
        comp[0, :] = -tail
        comp[1:, :-1] = np.eye(tail.size - 1)
        return float(np.max(np.abs(np.linalg.eigvals(comp))))

    def to_config(self) -> dict:
        return {"a": list(self.a), "b": list(self.b)}


DEFAULT_IIR = LinearFilter((1.0, 0.5, 0.2), (1.0, -0.4, 0.1))
DEFAULT_FIR = LinearFilter((1.0, 0.5, 0.2), (1.0, 0.0, 0.0))


def filter_apply(filt: LinearFilter, ys) -> np.ndarray:
    """Difference equation ``out_n = sum a_m y_{n-m} - sum_{l>=1} b_l out_{n-l}``, zero initial state."""
    return signal.lfilter(filt.a, filt.b, np.asarray(ys, dtype=np.float64))


def freq_grid(n_points: int) -> np.ndarray:
    if n_points < 2:
        raise ContractError("need at least 2 frequency points")
    return np.linspace(0.0, np.pi, n_points)


def freq_response(filt: LinearFilter, n_points: int = 512):
    """Magnitude (dB) and unwrapped phase (rad) of ``A/B`` on a uniform grid over [0, pi]."""
    w = freq_grid(n_points)
    _, h = signal.freqz(filt.a, filt.b, worN=w)
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(np.abs(h))
    return mag_db, np.unwrap(np.angle(h))


def _snr_to_sigma(power: float, snr_db) -> float:
    if snr_db is None or snr_db == np.inf:
        return 0.0
    return float(np.sqrt(power / 10.0 ** (snr_db / 10.0)))


def _check_inputs(xs, n: int) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if np.any(~np.isfinite(xs)) or np.any(xs < 0) or np.any(xs > n - 1):
        raise DomainError(f"channel input outside [0, {n - 1}]")
    return xs


@dataclass(frozen=True)
class FlatChannel:
    """``r_n = f(x_n) + w_n``.  ``snr_db = None`` (or inf) means noiseless."""

    f: NonlinearFn
    snr_db: float | None = None
    signal_power: float = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self):
        cal = Rng(CALIBRATION_SEED).uniform(CALIBRATION_SAMPLES, 0.0, self.f.n - 1)
        power = float(np.mean(self.f(cal) ** 2))
        object.__setattr__(self, "signal_power", power)
        object.__setattr__(self, "sigma", _snr_to_sigma(power, self.snr_db))

    def to_config(self) -> dict:
        return {
            "nonlinearity": self.f.to_config(),
            "snr_db": self.snr_db,
            "signal_power": self.signal_power,
            "sigma": self.sigma,
        }


def flat_transmit(ch: FlatChannel, xs, rng: Rng) -> np.ndarray:
    xs = _check_inputs(xs, ch.f.n)
    return ch.f(xs) + gauss(rng, ch.sigma, xs.size)


@dataclass(frozen=True)
class HammersteinChannel:
    """Static nonlinearity followed by a linear filter.

    ``noise_mode="post_filter"`` adds white noise to the filter output.
    ``"in_loop"`` adds it inside the recursion, so past noisy outputs are fed
    back (the noise is shaped by ``1/B``).  The SNR refers to the noiseless
    filter output power.
    """

    f: NonlinearFn
    filt: LinearFilter = DEFAULT_IIR
    snr_db: float | None = None
    noise_mode: str = "post_filter"
    signal_power: float = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self):
        if self.noise_mode not in ("post_filter", "in_loop"):
            raise ContractError(f"noise_mode must be 'post_filter' or 'in_loop', got {self.noise_mode!r}")
        cal = Rng(CALIBRATION_SEED).uniform(CALIBRATION_SAMPLES, 0.0, self.f.n - 1)
        power = float(np.mean(filter_apply(self.filt, self.f(cal)) ** 2))
        object.__setattr__(self, "signal_power", power)
        object.__setattr__(self, "sigma", _snr_to_sigma(power, self.snr_db))

    def to_config(self) -> dict:
        return {
            "nonlinearity": self.f.to_config(),
            **self.filt.to_config(),
            "snr_db": self.snr_db,
            "noise_mode": self.noise_mode,
            "signal_power": self.signal_power,
            "sigma": self.sigma,
        }


def hammerstein_transmit(ch: HammersteinChannel, xs, rng: Rng) -> np.ndarray:
    xs = _check_inputs(xs, ch.f.n)
    w = gauss(rng, ch.sigma, xs.size)
    fx = ch.f(xs)
    if ch.noise_mode == "post_filter":
        return filter_apply(ch.filt, fx) + w
    driven = signal.lfilter(ch.filt.a, [1.0], fx) + w
    return signal.lfilter([1.0], ch.filt.b, driven)
