import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dctneuron.errors import ContractError, SingularPencil
from dctneuron.numerics import Rng, gauss, gen_eig_smallest, sym_eig

MASK = (1 << 64) - 1


def splitmix_reference(seed, i):
    # textbook scalar SplitMix64, written with Python ints
    z = (seed + (i + 1) * 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def test_rng_matches_scalar_splitmix():
    rng = Rng(12345)
    words = rng.next_u64(10)
    assert [int(w) for w in words] == [splitmix_reference(12345, i) for i in range(10)]
    assert rng.counter == 10
    assert int(rng.next_u64(1)[0]) == splitmix_reference(12345, 10)


def test_rng_known_first_word_for_seed_zero():
    # first output of SplitMix64 seeded with 0
    assert int(Rng(0).next_u64(1)[0]) == 0xE220A8397B1DCDAF


def test_rng_rejects_bad_seeds():
    for bad in (-1, 2**64, 1.5, True):
        with pytest.raises(ContractError):
            Rng(bad)


def test_rng_chunking_does_not_change_stream():
    a = Rng(7).uniform(100)
    r = Rng(7)
    b = np.concatenate([r.uniform(33), r.uniform(67)])
    assert np.array_equal(a, b)


def test_uniform_range_and_integers():
    u = Rng(3).uniform(10000, -2.0, 5.0)
    assert u.min() >= -2.0 and u.max() < 5.0
    k = Rng(3).integers(0, 4, 10000)
    assert set(np.unique(k)) == {0, 1, 2, 3}


def test_spawn_seeds_offset():
    assert Rng(10).spawn(3).seed == 13
    assert Rng(MASK).spawn(1).seed == 0


def test_gauss_sigma_zero_is_zero():
    assert np.array_equal(gauss(Rng(1), 0.0, 17), np.zeros(17))


def test_gauss_deterministic():
    assert np.array_equal(gauss(Rng(99), 1.3, 1001), gauss(Rng(99), 1.3, 1001))


def test_gauss_variance_law_of_large_numbers():
    z = gauss(Rng(2024), 1.0, 1_000_000)
    assert 0.99 <= np.var(z) <= 1.01
    assert abs(np.mean(z)) < 5e-3


def test_gauss_consumes_same_words_for_any_sigma():
    r1, r2 = Rng(5), Rng(5)
    gauss(r1, 0.0, 11)
    gauss(r2, 2.0, 11)
    assert r1.counter == r2.counter == 12


def test_gauss_rejects_negative_sigma():
    with pytest.raises(ContractError):
        gauss(Rng(0), -1.0, 3)


def test_sym_eig_identity():
    w, v = sym_eig(np.eye(3))
    assert np.allclose(w, 1.0)
    assert np.allclose(v @ v.T, np.eye(3))


def test_sym_eig_diagonal_gives_axis_vectors():
    w, v = sym_eig(np.diag([5.0, 2.0]))
    assert np.allclose(w, [2.0, 5.0])
    assert np.allclose(v, [[0.0, 1.0], [1.0, 0.0]])


def test_sym_eig_rejects_non_symmetric():
    with pytest.raises(ContractError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


symmetric = arrays(np.float64, (4, 4), elements=st.floats(-10, 10)).map(lambda a: a + a.T)


@settings(max_examples=60, deadline=None)
@given(symmetric)
def test_sym_eig_reconstructs_and_matches_lapack(a):
    w, v = sym_eig(a)
    scale = max(1.0, np.max(np.abs(a)))
    assert np.all(np.diff(w) >= -1e-12 * scale)
    assert np.allclose(v @ np.diag(w) @ v.T, a, atol=1e-10 * scale)
    assert np.allclose(v.T @ v, np.eye(4), atol=1e-10)
    assert np.allclose(w, scipy.linalg.eigh(a, eigvals_only=True), atol=1e-10 * scale)


def test_sym_eig_sign_convention():
    a = np.array([[2.0, 1.0], [1.0, 3.0]])
    _, v = sym_eig(a)
    for col in v.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_gen_eig_identity_pencil():
    mu, v = gen_eig_smallest(np.diag([3.0, 8.0]), np.eye(2))
    assert mu == pytest.approx(3.0)
    assert np.allclose(v, [1.0, 0.0])


def test_gen_eig_proportional_pencil(np_rng):
    g = np_rng.normal(size=(3, 3))
    b = g @ g.T + 3 * np.eye(3)
    mu, v = gen_eig_smallest(2.0 * b, b)
    assert mu == pytest.approx(2.0)
    assert v @ b @ v == pytest.approx(1.0)


def test_gen_eig_against_scipy(np_rng):
    for _ in range(20):
        g = np_rng.normal(size=(3, 3))
        h = np_rng.normal(size=(3, 3))
        a = g + g.T
        b = h @ h.T + 0.5 * np.eye(3)
        mu, v = gen_eig_smallest(a, b)
        ref_w, ref_v = scipy.linalg.eigh(a, b)
        assert mu == pytest.approx(ref_w[0], rel=1e-10, abs=1e-10)
        assert np.allclose(a @ v, mu * b @ v, atol=1e-9)
        assert v @ b @ v == pytest.approx(1.0)
        assert abs(abs(v @ b @ ref_v[:, 0]) - 1.0) < 1e-9


def test_gen_eig_singular_b():
    with pytest.raises(SingularPencil):
        gen_eig_smallest(np.eye(2), np.diag([1.0, 0.0]))
