"""Dense complex linear algebra for small Hilbert spaces.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Composite
spaces are always ordered target first, followed by the order qubits
(``omega`` before ``omega'``), and tensor products put the left factor on
the slowest-varying index, as ``np.kron`` does.
"""
from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_PLUS_I = np.array([1, 1j], dtype=complex) / np.sqrt(2)


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-d complex array, raising ``ValueError`` otherwise."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def tensor(*factors) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors), left factor slowest."""
    if not factors:
        raise ValueError("tensor needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def dagger(a) -> np.ndarray:
    return np.asarray(a, dtype=complex).conj().T


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def hermitian_residual(a) -> float:
    a = np.asarray(a, dtype=complex)
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and hermitian_residual(a) <= tol


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) <= tol


def pure_state(amplitudes, tol: float = 1e-10) -> np.ndarray:
    """Validate a state vector: finite, unit norm within ``tol``."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(psi)):
        raise ValueError("state vector contains NaN or Inf entries")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state vector is not normalised (<psi|psi> = {norm:.3e})")
    return psi


def density_matrix(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate and return a density matrix.

    Accepts either a square matrix or a state vector (converted to its
    projector). Raises ``ValueError`` when the matrix is not Hermitian,
    not unit trace, or has an eigenvalue below ``-tol``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return ket_to_dm(pure_state(a))
    rho = as_matrix(a)
    if rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got {rho.shape}")
    if hermitian_residual(rho) > tol:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace is {tr.real:.6g}, not 1")
    wmin = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if wmin < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {wmin:.3e}")
    return rho


def is_density_matrix(a, tol: float = HERMITIAN_TOL) -> bool:
    try:
        density_matrix(a, tol)
    except ValueError:
        return False
    return True


def partial_trace(state, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced operator on the subsystems in ``keep``.

    Parameters
    ----------
    state : array_like
        Square operator on the composite space ``dims[0] x dims[1] x ...``.
    dims : sequence of int
        Subsystem dimensions, slowest-varying first.
    keep : iterable of int
        Indices of the subsystems to keep. Their relative order in the
        output follows ``dims``, whatever order they are given in.
    """
    rho = as_matrix(state)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dims {dims} do not match operator of shape {rho.shape}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError(f"keep must be a nonempty subset of range({len(dims)})")
    n = len(dims)
    tensor_form = rho.reshape(dims + dims)
    # einsum labels: row index i, column index n+i; traced subsystems share a label
    row = list(range(n))
    col = [k if k not in keep else n + k for k in range(n)]
    out = [k for k in keep] + [n + k for k in keep]
    reduced = np.einsum(tensor_form, row + col, out)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return reduced.reshape(d_keep, d_keep)


def eig_hermitian(a, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching eigenvector columns."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1] or hermitian_residual(m) > tol:
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def _roundoff_clip(w: np.ndarray) -> np.ndarray:
    # eigenvalues at roundoff level would contribute ~sqrt(eps) after a square root
    floor = 1e-14 * max(float(np.max(np.abs(w))), 1e-300)
    return np.where(w > floor, w, 0.0)


def psd_sqrt(a) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return (v * np.sqrt(_roundoff_clip(w))) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``, clipped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.ndim == 1:
        rho = ket_to_dm(rho)
    if sigma.ndim == 1:
        sigma = ket_to_dm(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    s = psd_sqrt(rho)
    inner = s @ sigma @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    f = float(np.sum(np.sqrt(_roundoff_clip(w))) ** 2)
    return min(max(f, 0.0), 1.0)


def max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
