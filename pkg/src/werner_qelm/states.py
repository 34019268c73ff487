"""Input and reservoir states: Werner family, random density matrices, noise mixing."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .quantum import n_qubits_of, tensor_product


class Ensemble(str, Enum):
    HILBERT_SCHMIDT = "hilbert-schmidt-mixed"
    HAAR_PURE = "haar-pure"


def singlet() -> np.ndarray:
    """(|01> - |10>)/sqrt(2)."""
    return np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)


def ghz(n_qubits: int) -> np.ndarray:
    """(|0...0> + |1...1>)/sqrt(2)."""
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[0] = psi[-1] = 1.0 / np.sqrt(2.0)
    return psi


def make_werner(p: float, n_qubits: int = 2) -> np.ndarray:
    """Werner state ``(1-p)/2^n · I + p |ψ><ψ|``.

    For two qubits ``|ψ>`` is the singlet; for ``n_qubits > 2`` it is the GHZ
    state with a ``+`` relative phase.

    Parameters
    ----------
    p : float
        Mixing weight in ``[0, 1]``. Two-qubit states are entangled for p > 1/3.
    n_qubits : int
        Input register size, at least 2.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if int(n_qubits) != n_qubits or n_qubits < 2:
        raise ValueError(f"n_qubits must be an integer >= 2, got {n_qubits}")
    psi = singlet() if n_qubits == 2 else ghz(n_qubits)
    dim = 1 << n_qubits
    return (1.0 - p) / dim * np.eye(dim, dtype=complex) + p * np.outer(psi, psi.conj())


def random_density(
    dim: int,
    rng: np.random.Generator,
    kind: Ensemble | str = Ensemble.HILBERT_SCHMIDT,
) -> np.ndarray:
    """Draw a random density matrix of dimension ``dim``.

    ``hilbert-schmidt-mixed`` normalizes ``G G†`` for a square Ginibre matrix
    ``G``; ``haar-pure`` returns the projector on a normalized complex
    Gaussian vector.
    """
    n_qubits_of(dim)
    kind = Ensemble(kind)
    if kind is Ensemble.HILBERT_SCHMIDT:
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
    else:
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        rho = np.outer(v, v.conj())
    # exact Hermiticity; the product above is Hermitian only up to round-off
    return 0.5 * (rho + rho.conj().T)


def apply_input_noise(clean: np.ndarray, epsilon: float, r: np.ndarray) -> np.ndarray:
    """Convex mixture ``(1-ε)·clean + ε·r``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if clean.shape != r.shape:
        raise ValueError(f"dimension mismatch: {clean.shape} vs {r.shape}")
    if epsilon == 0.0:
        return clean.copy()
    if epsilon == 1.0:
        return r.copy()
    return (1.0 - epsilon) * clean + epsilon * r


def compose_initial(input_state: np.ndarray, reservoir_state: np.ndarray, total_qubits: int) -> np.ndarray:
    """Initial system state ``input ⊗ reservoir`` on ``total_qubits`` qubits."""
    n_in = n_qubits_of(input_state.shape[0])
    n_res = n_qubits_of(reservoir_state.shape[0])
    if n_in + n_res != total_qubits:
        raise ValueError(
            f"{n_in}-qubit input and {n_res}-qubit reservoir do not make {total_qubits} qubits"
        )
    return tensor_product(input_state, reservoir_state, max_qubits=max(total_qubits, 1))
