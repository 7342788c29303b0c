import numpy as np
import pytest

from rpcompass.spin_algebra import commutator, embed, hermitian_eig, kron_all, spin_multiplicity, spin_operators

from conftest import random_hermitian

SPINS = [0, 0.5, 1, 1.5, 2, 2.5, 3.5]


@pytest.mark.parametrize("s", SPINS)
def test_spin_algebra_identities(s):
    sx, sy, sz = spin_operators(s)
    n = spin_multiplicity(s)
    for op in (sx, sy, sz):
        assert op.shape == (n, n)
        assert np.max(np.abs(op - op.conj().T)) < 1e-12
    assert np.max(np.abs(commutator(sx, sy) - 1j * sz)) < 1e-12
    assert np.max(np.abs(commutator(sy, sz) - 1j * sx)) < 1e-12
    assert np.max(np.abs(commutator(sz, sx) - 1j * sy)) < 1e-12
    casimir = sx @ sx + sy @ sy + sz @ sz
    assert np.max(np.abs(casimir - s * (s + 1) * np.eye(n))) < 1e-12


def test_spin_half_and_one_conventions():
    _, _, sz = spin_operators(0.5)
    assert np.array_equal(sz, np.diag([0.5, -0.5]))
    sx, _, sz = spin_operators(1)
    assert np.array_equal(sz, np.diag([1.0, 0.0, -1.0]))
    r = 1 / np.sqrt(2)
    assert np.allclose(sx, [[0, r, 0], [r, 0, r], [0, r, 0]], atol=1e-15)


@pytest.mark.parametrize("bad", [-0.5, 0.3, 1.25, float("nan")])
def test_rejects_non_half_integer(bad):
    with pytest.raises(ValueError):
        spin_operators(bad)


def test_embed():
    sz = spin_operators(0.5).sz
    assert np.array_equal(embed(sz, 0, [2]), sz)
    assert np.array_equal(embed(sz, 0, [2, 3]), np.kron(sz, np.eye(3)))
    sx1 = spin_operators(1).sx
    big = embed(sx1, 1, [2, 3, 2])
    assert np.array_equal(big, kron_all([np.eye(2), sx1, np.eye(2)]))
    assert np.isclose(np.trace(embed(np.diag([1.0, 2.0, 4.0]), 1, [2, 3, 2])), 7.0 * 4)


def test_embed_preserves_spectrum():
    sx = spin_operators(1).sx
    ev = np.sort(np.linalg.eigvalsh(embed(sx, 1, [2, 3, 2])))
    expected = np.sort(np.repeat(np.linalg.eigvalsh(sx), 4))
    assert np.allclose(ev, expected, atol=1e-12)


def test_embed_errors():
    sz = spin_operators(0.5).sz
    with pytest.raises(ValueError):
        embed(sz, 2, [2, 2])
    with pytest.raises(ValueError):
        embed(sz, 0, [3, 2])


def test_hermitian_eig_examples(rng):
    lam, v = hermitian_eig(np.diag([3.0, 1.0, 2.0]).astype(complex))
    assert np.allclose(lam, [1, 2, 3])
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])
    lam, _ = hermitian_eig(spin_operators(0.5).sx)
    assert np.allclose(lam, [-0.5, 0.5], atol=1e-15)


def test_hermitian_eig_reconstruction(rng):
    h = random_hermitian(rng, 36)
    lam, v = hermitian_eig(h)
    assert np.all(np.diff(lam) >= 0)
    recon = v @ np.diag(lam) @ v.conj().T
    assert np.linalg.norm(recon - h) / np.linalg.norm(h) < 1e-10
    assert np.max(np.abs(v.conj().T @ v - np.eye(36))) < 1e-12


def test_hermitian_eig_rejects_non_hermitian(rng):
    with pytest.raises(ValueError):
        hermitian_eig(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[np.nan, 0], [0, 1.0]]))
