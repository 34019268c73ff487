"""Dense linear algebra for qubit density matrices and diagonal observables.

Conventions
-----------
Qubit 0 is the most significant bit of a computational-basis index, so
``np.kron(a, b)`` places the qubits of ``a`` before those of ``b``.
All states and operators are plain ``numpy`` arrays.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

MAX_QUBITS = 10

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


class InvalidStateError(ValueError):
    """Raised when an array violates a density-matrix invariant."""


def n_qubits_of(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension; rejects non powers of two."""
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def check_density_matrix(rho: np.ndarray, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Validate the density-matrix invariants and return ``rho`` unchanged.

    Checks squareness, power-of-two dimension, Hermiticity, unit trace and
    positive semidefiniteness (minimum eigenvalue >= ``-psd_tol``).
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {rho.shape}")
    n_qubits_of(rho.shape[0])
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace is {tr}, expected 1")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -psd_tol:
        raise InvalidStateError(f"not positive semidefinite (min eigenvalue {lam_min:.3e})")
    return rho


def is_density_matrix(rho: np.ndarray) -> bool:
    try:
        check_density_matrix(rho)
    except (InvalidStateError, ValueError):
        return False
    return True


def tensor_product(a: np.ndarray, b: np.ndarray, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with ``a`` on the low-index qubits.

    Raises
    ------
    ValueError
        If the composite register would exceed ``max_qubits``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    total = n_qubits_of(a.shape[0]) + n_qubits_of(b.shape[0])
    if total > max_qubits:
        raise ValueError(f"composite of {total} qubits exceeds max_qubits={max_qubits}")
    return np.kron(a, b)


def z_signs(n_qubits: int) -> np.ndarray:
    """Matrix of ``σᶻ`` eigenvalues, shape ``(2**n, n)``: entry ``[b, i]`` is ±1 for bit ``i`` of ``b``."""
    idx = np.arange(1 << n_qubits)
    shifts = n_qubits - 1 - np.arange(n_qubits)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return 1 - 2 * bits


def pauli_z_string(sites: Iterable[int], n_qubits: int) -> np.ndarray:
    """Diagonal operator ``∏_{i in sites} σᶻᵢ`` on ``n_qubits`` qubits.

    An empty ``sites`` gives the identity.
    """
    sites = sorted(set(int(s) for s in sites))
    for s in sites:
        if not 0 <= s < n_qubits:
            raise IndexError(f"site {s} out of range for {n_qubits} qubits")
    diag = np.ones(1 << n_qubits)
    if sites:
        diag = np.prod(z_signs(n_qubits)[:, sites], axis=1).astype(float)
    return np.diag(diag).astype(complex)


def single_site_operator(op: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """Embed a 2x2 operator on ``site`` of an ``n_qubits`` register."""
    if not 0 <= site < n_qubits:
        raise IndexError(f"site {site} out of range for {n_qubits} qubits")
    left = np.eye(1 << site, dtype=complex)
    right = np.eye(1 << (n_qubits - site - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


def expectation(obs: np.ndarray, rho: np.ndarray) -> float:
    """``Tr[obs · rho]`` as a float; the imaginary part must vanish to 1e-10."""
    obs = np.asarray(obs)
    rho = np.asarray(rho)
    if obs.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {obs.shape} vs {rho.shape}")
    # Tr[A B] = sum_ij A_ij B_ji
    val = np.sum(obs * rho.T)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; observable not Hermitian?")
    return float(val.real)


def hermitian_eigendecomposition(op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvector matrix of a Hermitian operator.

    ``op == V @ diag(lam) @ V.conj().T`` up to round-off.
    """
    op = np.asarray(op)
    if np.max(np.abs(op - op.conj().T)) > HERMITIAN_TOL:
        raise ValueError("operator is not Hermitian")
    try:
        lam, vecs = np.linalg.eigh(op)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigensolver failed: {exc}") from exc
    return lam, vecs


def diagonal_probabilities(rho: np.ndarray) -> np.ndarray:
    """Computational-basis outcome distribution of ``rho``.

    Round-off negatives are clamped to zero and the result renormalized.
    """
    p = np.real(np.diagonal(rho)).copy()
    if p.min() < -PSD_TOL:
        raise InvalidStateError(f"negative population {p.min():.3e}")
    np.clip(p, 0.0, None, out=p)
    return p / p.sum()


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced state on the qubits listed in ``keep`` (kept in ascending order)."""
    rho = np.asarray(rho)
    n = n_qubits_of(rho.shape[0])
    keep = sorted(set(keep))
    traced = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    # trace out from the highest qubit so axis numbers stay valid
    for q in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + m)
    d = 1 << len(keep)
    return t.reshape(d, d)


def partial_transpose(rho: np.ndarray, sites: Iterable[int]) -> np.ndarray:
    """Transpose ``rho`` on the subsystem formed by ``sites``."""
    rho = np.asarray(rho)
    n = n_qubits_of(rho.shape[0])
    t = rho.reshape([2] * (2 * n))
    axes = list(range(2 * n))
    for q in set(sites):
        axes[q], axes[q + n] = axes[q + n], axes[q]
    return t.transpose(axes).reshape(rho.shape)
