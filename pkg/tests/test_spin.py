from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kicktops.spin import (
    MagneticLabel,
    SpinMagnitude,
    jx_tridiagonal,
    jy_matrix,
    jz_matrix,
    x_basis_transform,
)


def ladder_brute_force(j):
    """(J_+ + J_-)/2 built element by element from <m+1|J_+|m>."""
    j = SpinMagnitude.from_value(j)
    m = j.m_values()
    d = j.dim
    jp = np.zeros((d, d))
    for k in range(d - 1):
        jp[k + 1, k] = np.sqrt(j.j * (j.j + 1) - m[k] * (m[k] + 1))
    return jp, (jp + jp.T) / 2


def test_spin_magnitude_storage():
    j = SpinMagnitude.from_value(Fraction(3, 2))
    assert j.two_j == 3 and j.dim == 4 and j.j == 1.5
    assert list(j.two_m_labels()) == [-3, -1, 1, 3]
    assert SpinMagnitude.from_value(2.5) == SpinMagnitude(5)
    with pytest.raises(ValueError):
        SpinMagnitude(-1)
    with pytest.raises(ValueError):
        SpinMagnitude.from_value(0.3)


def test_magnetic_label_validation():
    j = SpinMagnitude(3)
    assert MagneticLabel(j, -1).m == -0.5
    assert MagneticLabel(j, 3).index == 3
    with pytest.raises(ValueError):
        MagneticLabel(j, 5)
    with pytest.raises(ValueError):
        MagneticLabel(j, 2)


def test_jx_spin_half_is_half_pauli_x():
    np.testing.assert_array_equal(jx_tridiagonal(0.5), [[0, 0.5], [0.5, 0]])


def test_jx_spin_one_elements():
    jx = jx_tridiagonal(1)
    assert jx[1, 0] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert jx[1, 2] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    np.testing.assert_array_equal(np.diag(jx), 0)


@pytest.mark.parametrize("j", [0.5, 1, 1.5, 4, 7.5, 20])
def test_jx_matches_ladder_construction(j):
    np.testing.assert_allclose(jx_tridiagonal(j), ladder_brute_force(j)[1], atol=1e-14)


@pytest.mark.parametrize("j", [0.5, 1, 3, 12.5, 40])
def test_trace_of_jx_squared(j):
    jj = SpinMagnitude.from_value(j)
    jx = jx_tridiagonal(jj)
    assert np.sum(jx ** 2) == pytest.approx(jj.dim * jj.casimir / 3, rel=1e-13)


@pytest.mark.parametrize("j", [0.5, 1, 2.5, 6])
def test_commutation_relations(j):
    jx, jy, jz = jx_tridiagonal(j), jy_matrix(j), jz_matrix(j)
    np.testing.assert_allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-13)
    np.testing.assert_allclose(jy @ jz - jz @ jy, 1j * jx, atol=1e-13)


def test_x_basis_spin_half():
    xb = x_basis_transform(0.5)
    np.testing.assert_array_equal(xb.eigenvalues, [-0.5, 0.5])
    r = 1 / np.sqrt(2)
    np.testing.assert_allclose(xb.v, [[r, r], [-r, r]], atol=1e-15)


def test_x_basis_spin_one_spectrum():
    np.testing.assert_array_equal(x_basis_transform(1).eigenvalues, [-1, 0, 1])


@pytest.mark.parametrize("j", [1, 7.5, 20, 50])
def test_x_basis_reconstructs_jx(j):
    xb = x_basis_transform(j)
    rebuilt = (xb.v * xb.eigenvalues) @ xb.v.conj().T
    assert np.max(np.abs(rebuilt - jx_tridiagonal(j))) < 1e-12


def test_x_basis_reconstruction_relative_at_large_j():
    # elementwise error grows with j; relative to the spectral radius it stays at roundoff
    xb = x_basis_transform(300)
    rebuilt = (xb.v * xb.eigenvalues) @ xb.v.conj().T
    assert np.max(np.abs(rebuilt - jx_tridiagonal(300))) / 300 < 1e-13


@pytest.mark.parametrize("j", [0.5, 10, 77, 154, 300])
def test_x_basis_unitary(j):
    v = x_basis_transform(j).v
    assert np.max(np.abs(v.conj().T @ v - np.eye(len(v)))) < 1e-12


def test_x_basis_spectrum_up_to_50():
    from scipy.linalg import eigvalsh

    for two_j in range(1, 101):
        j = SpinMagnitude(two_j)
        w = eigvalsh(jx_tridiagonal(j))
        assert np.max(np.abs(w - j.m_values())) < 1e-10


@given(st.integers(min_value=1, max_value=120))
@settings(max_examples=30, deadline=None)
def test_x_basis_phase_convention(two_j):
    v = x_basis_transform(SpinMagnitude(two_j)).v
    pivots = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    assert np.all(pivots.real > 0)
    np.testing.assert_array_equal(pivots.imag, 0)


def test_x_basis_reproducible_and_readonly():
    first = x_basis_transform(33).v.copy()
    x_basis_transform.cache_clear()
    second = x_basis_transform(33)
    np.testing.assert_array_equal(first, second.v)
    with pytest.raises(ValueError):
        second.v[0, 0] = 1.0
