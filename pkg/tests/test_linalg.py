"""Tests for the shared linear algebra helpers."""

import numpy as np
import pytest

from qqlab.errors import NotHermitianError, NotPSDError, ValidationError
from qqlab.linalg import (
    complete_unitary,
    embed,
    fourier_matrix,
    gram_vectors_from_psd,
    hermitian_eig,
    householder_to,
    is_hermitian,
    is_projector,
    is_unitary,
    orthonormal_basis,
    projector_onto_span,
    spectral_norm,
    unitary_eig,
)


# === Fixtures ===
@pytest.fixture
def random_unitary(rng):
    """A Haar-ish unitary from the QR of a complex Gaussian matrix."""
    z = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestPredicates:
    """Tests for the structural predicates."""

    def test_fourier_is_unitary(self):
        """The m-point Fourier matrix is unitary."""
        for m in (2, 3, 5):
            assert is_unitary(fourier_matrix(m))

    def test_non_square_is_not_unitary(self):
        assert not is_unitary(np.ones((2, 3)))

    def test_hermitian_tolerance(self):
        """Asymmetry below the tolerance is accepted, above it is not."""
        m = np.array([[1.0, 1e-13], [0.0, 2.0]])
        assert is_hermitian(m)
        assert not is_hermitian(m, tol=1e-14)

    def test_projector(self):
        p = projector_onto_span([[1.0, 1.0, 0.0]], 3)
        assert is_projector(p)
        assert np.isclose(np.trace(p).real, 1.0)
        assert not is_projector(2 * p)


class TestDecompositions:
    """Tests for eigendecompositions and norms."""

    def test_hermitian_eig_reconstructs(self, rng):
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        h = a + a.conj().T
        values, vectors = hermitian_eig(h)
        assert np.all(np.diff(values) >= 0)
        assert np.allclose(vectors @ np.diag(values) @ vectors.conj().T, h)

    def test_hermitian_eig_rejects_asymmetric(self):
        with pytest.raises(NotHermitianError):
            hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_unitary_eig_phase_range(self):
        """The eigenvalue -1 reports phase +pi, never -pi."""
        phases, _ = unitary_eig(np.diag([-1.0, 1.0, 1j]))
        assert np.all(phases > -np.pi)
        assert np.all(phases <= np.pi)
        assert np.isclose(np.max(phases), np.pi)

    def test_unitary_eig_reconstructs(self, random_unitary):
        phases, vectors = unitary_eig(random_unitary)
        assert is_unitary(vectors)
        rebuilt = vectors @ np.diag(np.exp(1j * phases)) @ vectors.conj().T
        assert np.allclose(rebuilt, random_unitary, atol=1e-9)

    def test_spectral_norm(self):
        assert np.isclose(spectral_norm(np.diag([3.0, -4.0])), 4.0)
        assert spectral_norm(np.zeros((0, 0))) == 0.0


class TestConstructions:
    """Tests for bases, Gram factorisation and unitary completion."""

    def test_orthonormal_basis_rank(self):
        basis = orthonormal_basis([[1, 0, 0], [2, 0, 0], [0, 1, 0]], 3)
        assert basis.shape == (3, 2)
        assert np.allclose(basis.conj().T @ basis, np.eye(2))

    def test_orthonormal_basis_wrong_length(self):
        with pytest.raises(ValidationError):
            orthonormal_basis([[1, 0]], 3)

    def test_empty_span_projector_is_zero(self):
        assert np.allclose(projector_onto_span([], 4), np.zeros((4, 4)))

    def test_gram_vectors_reproduce_psd(self, rng):
        a = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        v = a @ a.conj().T
        w = gram_vectors_from_psd(v)
        assert w.shape[1] == 2
        assert np.allclose(w.conj() @ w.T, v, atol=1e-9)

    def test_gram_vectors_reject_indefinite(self):
        with pytest.raises(NotPSDError):
            gram_vectors_from_psd(np.diag([1.0, -1.0]))

    def test_householder_maps_first_basis_vector(self, rng):
        t = rng.normal(size=5) + 1j * rng.normal(size=5)
        t /= np.linalg.norm(t)
        h = householder_to(t)
        assert is_unitary(h)
        assert np.allclose(h[:, 0], t)

    def test_householder_of_basis_vector(self):
        h = householder_to([1j, 0, 0])
        assert np.allclose(h[:, 0], [1j, 0, 0])

    def test_complete_unitary(self):
        c = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
        u = complete_unitary(c)
        assert u.shape == (3, 3)
        assert is_unitary(u)
        assert np.allclose(u[:, 0], c)

    def test_embed_pads(self):
        assert np.allclose(embed([1, 2], 4), [1, 2, 0, 0])
