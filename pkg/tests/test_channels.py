import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dctneuron.channels import (
    DEFAULT_FIR, DEFAULT_IIR, FlatChannel, HammersteinChannel, LinearFilter, filter_apply, flat_transmit,
    freq_grid, freq_response, hammerstein_transmit,
)
from dctneuron.errors import ContractError, DomainError, Unstable
from dctneuron.nonlinearities import make
from dctneuron.numerics import Rng


def difference_equation(a, b, ys):
    # plain loop, independent of scipy
    out = []
    for n in range(len(ys)):
        acc = sum(a[m] * ys[n - m] for m in range(len(a)) if n - m >= 0)
        acc -= sum(b[l] * out[n - l] for l in range(1, len(b)) if n - l >= 0)
        out.append(acc)
    return np.array(out)


def random_stable(rng, m=3):
    while True:
        a = rng.normal(size=m)
        b = np.concatenate([[1.0], rng.uniform(-0.9, 0.9, m - 1)])
        try:
            return LinearFilter(a, b)
        except Unstable:
            continue


def test_identity_and_geometric_impulse():
    x = np.arange(6.0)
    assert np.allclose(filter_apply(LinearFilter((1, 0, 0), (1, 0, 0)), x), x)
    imp = np.zeros(6)
    imp[0] = 1.0
    out = filter_apply(LinearFilter((1, 0, 0), (1, -0.5, 0)), imp)
    assert np.allclose(out, 0.5 ** np.arange(6))


def test_filter_against_difference_equation(np_rng):
    for _ in range(10):
        filt = random_stable(np_rng)
        ys = np_rng.normal(size=300)
        assert np.allclose(filter_apply(filt, ys), difference_equation(filt.a, filt.b, ys), atol=1e-12)


def test_filter_validation():
    with pytest.raises(Unstable):
        LinearFilter((1, 0), (1, -1.0))
    with pytest.raises(Unstable):
        LinearFilter((1, 0, 0), (1, -2.5, 1.5))
    with pytest.raises(ContractError):
        LinearFilter((1, 0), (2, 0))
    f = LinearFilter((1, 0.5), (1, 0.2, 0.01))
    assert f.a == (1.0, 0.5, 0.0) and f.order == 3
    assert DEFAULT_FIR.spectral_radius() == 0.0
    assert DEFAULT_IIR.spectral_radius() < 1


def test_freq_response_identity_and_delay():
    mag, phase = freq_response(LinearFilter((1, 0, 0), (1, 0, 0)), 64)
    assert np.allclose(mag, 0.0) and np.allclose(phase, 0.0)
    mag, phase = freq_response(LinearFilter((0, 1, 0), (1, 0, 0)), 64)
    assert np.allclose(mag, 0.0, atol=1e-12)
    assert np.allclose(phase, -freq_grid(64))


def test_freq_response_matches_long_impulse_response(np_rng):
    for _ in range(5):
        filt = random_stable(np_rng)
        imp = np.zeros(4096)
        imp[0] = 1.0
        h = np.fft.fft(difference_equation(filt.a, filt.b, imp[:400]), 4096)  # tail below 0.9^400
        mag, _ = freq_response(filt, 2049)
        assert np.allclose(10 ** (mag / 20), np.abs(h[:2049]), atol=1e-6)


def test_flat_noiseless():
    xs = Rng(1).uniform(100, 0, 127)
    assert np.array_equal(flat_transmit(FlatChannel(make("identity")), xs, Rng(2)), xs)
    sq = make("square")
    assert np.array_equal(flat_transmit(FlatChannel(sq, np.inf), xs, Rng(2)), sq(xs))


def test_flat_snr_calibration():
    f = make("sigmoid")
    ch = FlatChannel(f, 0.0)
    xs = Rng(3).uniform(100_000, 0, 127)
    noise = flat_transmit(ch, xs, Rng(4)) - f(xs)
    assert 0.95 <= np.mean(f(xs) ** 2) / np.var(noise) <= 1.05


def test_flat_rejects_out_of_domain():
    with pytest.raises(DomainError):
        flat_transmit(FlatChannel(make("identity")), np.array([128.0]), Rng(0))


def test_hammerstein_identity():
    xs = Rng(5).uniform(50, 0, 127)
    ch = HammersteinChannel(make("identity"), LinearFilter((1, 0, 0), (1, 0, 0)))
    assert np.allclose(hammerstein_transmit(ch, xs, Rng(0)), xs)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32))
def test_noise_modes_coincide_without_noise(seed):
    f = make("compander")
    xs = Rng(seed).uniform(200, 0, 127)
    post = hammerstein_transmit(HammersteinChannel(f, DEFAULT_IIR, None, "post_filter"), xs, Rng(1))
    loop = hammerstein_transmit(HammersteinChannel(f, DEFAULT_IIR, None, "in_loop"), xs, Rng(1))
    assert np.allclose(post, loop, atol=1e-10)
    assert np.allclose(post, difference_equation(DEFAULT_IIR.a, DEFAULT_IIR.b, f(xs)), atol=1e-10)


def test_in_loop_noise_is_shaped():
    f = make("identity")
    xs = np.full(200_000, 60.0)
    loop = HammersteinChannel(f, DEFAULT_IIR, 10.0, "in_loop")
    noise = hammerstein_transmit(loop, xs, Rng(7)) - filter_apply(DEFAULT_IIR, f(xs))
    # white noise through 1/B has variance sigma^2 * sum(h^2)
    imp = np.zeros(200)
    imp[0] = 1.0
    gain = np.sum(filter_apply(LinearFilter((1, 0, 0), DEFAULT_IIR.b), imp) ** 2)
    assert np.var(noise[100:]) == pytest.approx(loop.sigma**2 * gain, rel=0.02)


def test_hammerstein_snr_uses_filtered_power():
    f = make("compander")
    ch = HammersteinChannel(f, DEFAULT_IIR, 10.0)
    xs = Rng(9).uniform(100_000, 0, 127)
    clean = filter_apply(DEFAULT_IIR, f(xs))
    assert ch.signal_power == pytest.approx(np.mean(clean**2), rel=0.01)
    assert ch.sigma**2 == pytest.approx(ch.signal_power / 10.0)
    with pytest.raises(ContractError):
        HammersteinChannel(f, DEFAULT_IIR, 10.0, "pre_filter")
