"""Dense complex linear algebra shared by every engine.

Matrices and vectors are plain ``numpy`` arrays of dtype ``complex128`` (or
``float64`` where real). The predicates below are the single source of truth
for what "Hermitian", "unitary" and "projector" mean within tolerance.
"""

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .errors import NotHermitianError, NotPSDError, ValidationError
from .settings import settings

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]
ComplexVector = npt.NDArray[np.complex128]


def as_matrix(a) -> ComplexMatrix:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-d matrix, got shape {m.shape}", field="matrix")
    return m


def max_asymmetry(m) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m, tol: float = None) -> bool:
    tol = settings.structure_tol if tol is None else tol
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and max_asymmetry(m) <= tol


def unitary_deviation(u) -> float:
    u = np.asarray(u)
    if u.size == 0:
        return 0.0
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def is_unitary(u, tol: float = None) -> bool:
    tol = settings.structure_tol if tol is None else tol
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitary_deviation(u) <= tol


def is_projector(p, tol: float = None) -> bool:
    tol = settings.structure_tol if tol is None else tol
    p = np.asarray(p)
    if not is_hermitian(p, tol):
        return False
    return p.size == 0 or float(np.max(np.abs(p @ p - p))) <= tol


def hermitian_eig(m, tol: float = None) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending real eigenvalues and a unitary whose columns are the
    matching orthonormal eigenvectors.

    Raises:
        NotHermitianError: if ``m`` deviates from ``m^H`` by more than ``tol``
    """
    tol = settings.structure_tol if tol is None else tol
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}", field="matrix")
    asym = max_asymmetry(m)
    if asym > tol:
        raise NotHermitianError(asym, tol)
    if m.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)
    # symmetrise so LAPACK sees an exactly Hermitian input
    eigenvalues, eigenvectors = scipy.linalg.eigh((m + m.conj().T) / 2)
    return eigenvalues, eigenvectors


def unitary_eig(u) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """Eigenphases in (-pi, pi] and orthonormal eigenvectors of a unitary.

    A unitary is normal, so the complex Schur form is diagonal and its Schur
    vectors are an orthonormal eigenbasis even when eigenvalues repeat.
    """
    u = as_matrix(u)
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diag(t))
    phases[phases <= -np.pi] += 2 * np.pi
    return phases, z


def spectral_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def vector_norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v).ravel()))


def orthonormal_basis(vectors: Sequence, ambient_dim: int, tol: float = None) -> ComplexMatrix:
    """Columns spanning the same space as ``vectors`` (rank decided by ``tol``)."""
    tol = settings.structure_tol if tol is None else tol
    if len(vectors) == 0:
        return np.zeros((ambient_dim, 0), dtype=np.complex128)
    a = np.column_stack([np.asarray(v, dtype=np.complex128).ravel() for v in vectors])
    if a.shape[0] != ambient_dim:
        raise ValidationError(
            f"vectors have length {a.shape[0]}, expected {ambient_dim}", field="vectors"
        )
    u, s, _ = scipy.linalg.svd(a, full_matrices=False)
    return u[:, s > tol]


def projector_onto_span(vectors: Sequence, ambient_dim: int, tol: float = None) -> ComplexMatrix:
    """Orthogonal projector onto span(vectors); the empty list gives the zero matrix."""
    basis = orthonormal_basis(vectors, ambient_dim, tol)
    return basis @ basis.conj().T


def gram_vectors_from_psd(v, tol: float = None) -> ComplexMatrix:
    """Vectors w^x (rows of the result) with <w^x, w^y> = V[x, y].

    The inner product is conjugate-linear in the first slot. The vector
    dimension equals the number of eigenvalues above ``tol``.

    Raises:
        NotPSDError: if the smallest eigenvalue is below ``-tol``
    """
    tol = settings.psd_tol if tol is None else tol
    eigenvalues, eigenvectors = hermitian_eig(v, tol=max(tol, settings.structure_tol))
    if eigenvalues.size and eigenvalues[0] < -tol:
        raise NotPSDError(float(eigenvalues[0]), tol)
    keep = eigenvalues > tol
    logger.debug(f"Gram factorisation: rank {int(keep.sum())} of {eigenvalues.size}")
    return np.conj(eigenvectors[:, keep]) * np.sqrt(eigenvalues[keep])


def embed(vector, dim: int) -> ComplexVector:
    """Pad ``vector`` with zeros up to ``dim``."""
    out = np.zeros(dim, dtype=np.complex128)
    v = np.asarray(vector, dtype=np.complex128).ravel()
    out[: v.size] = v
    return out


def householder_to(target) -> ComplexMatrix:
    """Unitary reflection mapping e_1 to the unit vector ``target``."""
    t = np.asarray(target, dtype=np.complex128).ravel()
    t = t / np.linalg.norm(t)
    # align the phase of e_1 with target[0] so the reflection is exact
    phase = t[0] / abs(t[0]) if abs(t[0]) > 0 else 1.0
    e1 = np.zeros_like(t)
    e1[0] = phase
    w = e1 - t
    dim = t.size
    if np.linalg.norm(w) < 1e-15:
        h = np.eye(dim, dtype=np.complex128)
        h[0, 0] = phase
        return h
    h = np.eye(dim, dtype=np.complex128) - 2 * np.outer(w, w.conj()) / np.vdot(w, w)
    # h maps phase*e_1 to t; compensate the phase on the first column
    h[:, 0] *= phase
    return h


def complete_unitary(columns) -> ComplexMatrix:
    """Extend orthonormal columns to a square unitary (extra columns from the null space)."""
    c = np.asarray(columns, dtype=np.complex128)
    if c.ndim == 1:
        c = c[:, None]
    rest = scipy.linalg.null_space(c.conj().T)
    return np.hstack([c, rest])


def fourier_matrix(m: int) -> ComplexMatrix:
    """F|b> = m^{-1/2} sum_c omega^{bc}|c> with omega = exp(2 pi i / m)."""
    b = np.arange(m)
    return np.exp(2j * np.pi * np.outer(b, b) / m) / np.sqrt(m)
