"""Transverse-field Ising reservoir: Hamiltonian, unitary evolution and readout features."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Mapping

import numpy as np

from .quantum import (
    PAULI_X,
    PAULI_Z,
    diagonal_probabilities,
    hermitian_eigendecomposition,
    n_qubits_of,
    single_site_operator,
    z_signs,
)


class CorrelationOrder(str, Enum):
    LOCAL_Z = "local-z"
    LOCAL_PLUS_ZZ = "local-plus-zz"


@dataclass(frozen=True)
class ReservoirSpec:
    n_qubits: int
    field_strength: float
    coupling_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError(f"reservoir needs at least 2 qubits, got {self.n_qubits}")
        if not self.coupling_scale > 0:
            raise ValueError(f"coupling_scale must be positive, got {self.coupling_scale}")


@dataclass(frozen=True)
class ShotPlan:
    """``n_measurements=None`` means exact expectation values."""

    n_measurements: int | None = None

    def __post_init__(self):
        if self.n_measurements is not None and self.n_measurements < 1:
            raise ValueError(f"n_measurements must be >= 1, got {self.n_measurements}")

    @property
    def exact(self) -> bool:
        return self.n_measurements is None

    @property
    def label(self) -> str:
        return "exact" if self.exact else str(self.n_measurements)

    @classmethod
    def parse(cls, value) -> "ShotPlan":
        if isinstance(value, ShotPlan):
            return value
        if value is None or value == "exact":
            return cls()
        return cls(int(value))


@dataclass(frozen=True)
class FeatureSpec:
    include_bias: bool = True
    correlation_order: CorrelationOrder = CorrelationOrder.LOCAL_Z

    def __post_init__(self):
        object.__setattr__(self, "correlation_order", CorrelationOrder(self.correlation_order))

    def count(self, n_qubits: int) -> int:
        n = n_qubits + int(self.include_bias)
        if self.correlation_order is CorrelationOrder.LOCAL_PLUS_ZZ:
            n += n_qubits * (n_qubits - 1) // 2
        return n

    def names(self, n_qubits: int) -> list[str]:
        out = ["bias"] if self.include_bias else []
        out += [f"z{i}" for i in range(n_qubits)]
        if self.correlation_order is CorrelationOrder.LOCAL_PLUS_ZZ:
            out += [f"z{i}z{j}" for i, j in combinations(range(n_qubits), 2)]
        return out


@dataclass(frozen=True)
class Reservoir:
    """One reservoir realization with its spectral decomposition."""

    hamiltonian: np.ndarray
    couplings: np.ndarray
    field_strength: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.hamiltonian.shape[0])

    def propagator(self, delta_t: float) -> np.ndarray:
        """``exp(-i H Δt)`` from the cached eigendecomposition."""
        if delta_t < 0:
            raise ValueError(f"delta_t must be >= 0, got {delta_t}")
        v = self.eigenvectors
        return (v * np.exp(-1j * self.eigenvalues * delta_t)) @ v.conj().T


def draw_couplings(n_qubits: int, coupling_scale: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric zero-diagonal couplings, uniform in [-J_s/2, J_s/2].

    Values are drawn in row-major order over the pairs ``i < j``.
    """
    vals = rng.uniform(-coupling_scale / 2, coupling_scale / 2, size=n_qubits * (n_qubits - 1) // 2)
    j = np.zeros((n_qubits, n_qubits))
    iu = np.triu_indices(n_qubits, k=1)
    j[iu] = vals
    return j + j.T


def ising_hamiltonian(couplings: np.ndarray, field_strength: float) -> np.ndarray:
    """``H = Σ_{i<j} J_ij σˣᵢσˣⱼ + h Σ_i σᶻᵢ``."""
    n = couplings.shape[0]
    xs = [single_site_operator(PAULI_X, i, n) for i in range(n)]
    h = np.zeros((1 << n, 1 << n), dtype=complex)
    for i, k in combinations(range(n), 2):
        if couplings[i, k] != 0.0:
            h += couplings[i, k] * (xs[i] @ xs[k])
    for i in range(n):
        h += field_strength * single_site_operator(PAULI_Z, i, n)
    return h


def build_reservoir(couplings: np.ndarray, field_strength: float) -> Reservoir:
    h = ising_hamiltonian(couplings, field_strength)
    lam, vecs = hermitian_eigendecomposition(h)
    return Reservoir(h, couplings, float(field_strength), lam, vecs)


def build_hamiltonian(spec: ReservoirSpec, rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Draw couplings for ``spec`` and return ``(H, J)``.

    Uses ``spec.seed`` when no generator is passed.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    j = draw_couplings(spec.n_qubits, spec.coupling_scale, rng)
    return ising_hamiltonian(j, spec.field_strength), j


def evolve(rho0: np.ndarray, hamiltonian: np.ndarray, delta_t: float) -> np.ndarray:
    """``e^{-iHΔt} ρ e^{iHΔt}`` via the spectral decomposition of ``H``."""
    if rho0.shape != hamiltonian.shape:
        raise ValueError(f"dimension mismatch: {rho0.shape} vs {hamiltonian.shape}")
    if delta_t < 0:
        raise ValueError(f"delta_t must be >= 0, got {delta_t}")
    lam, v = hermitian_eigendecomposition(hamiltonian)
    u = (v * np.exp(-1j * lam * delta_t)) @ v.conj().T
    out = u @ rho0 @ u.conj().T
    return 0.5 * (out + out.conj().T)


def evolved_populations(rhos: np.ndarray, propagator: np.ndarray) -> np.ndarray:
    """Diagonals of ``U ρ_k U†`` for a stack of states, shape ``(K, d)``.

    Only the diagonal is needed for σᶻ-string features, which saves one
    matrix product per state.
    """
    m = propagator @ rhos
    pops = np.einsum("kac,ac->ka", m, propagator.conj()).real
    np.clip(pops, 0.0, None, out=pops)
    return pops / pops.sum(axis=-1, keepdims=True)


def observable_signs(n_qubits: int, features: FeatureSpec) -> np.ndarray:
    """Eigenvalue table of the σᶻ-string features (bias excluded), shape ``(2**n, F)``."""
    s = z_signs(n_qubits)
    cols = [s[:, i] for i in range(n_qubits)]
    if features.correlation_order is CorrelationOrder.LOCAL_PLUS_ZZ:
        cols += [s[:, i] * s[:, j] for i, j in combinations(range(n_qubits), 2)]
    return np.stack(cols, axis=1).astype(float)


def features_from_distribution(probs: np.ndarray, features: FeatureSpec) -> np.ndarray:
    """Feature vectors from computational-basis distributions (exact or empirical).

    ``probs`` may be a single distribution or a stack of them along axis 0.
    """
    probs = np.asarray(probs, dtype=float)
    n = n_qubits_of(probs.shape[-1])
    x = probs @ observable_signs(n, features)
    if features.include_bias:
        x = np.concatenate([np.ones(x.shape[:-1] + (1,)), x], axis=-1)
    return x


def measure_features_exact(rho: np.ndarray, features: FeatureSpec) -> np.ndarray:
    """Exact ``(bias, <z_0>..<z_{N-1}>, <z_i z_j> for i<j)`` of ``rho``."""
    return features_from_distribution(diagonal_probabilities(rho), features)


def sample_counts(probs: np.ndarray, n_measurements: int, rng: np.random.Generator) -> np.ndarray:
    """Outcome histogram of ``n_measurements`` projective shots on every qubit."""
    return rng.multinomial(n_measurements, probs)


def sample_bitstrings(rho: np.ndarray, plan: ShotPlan, rng: np.random.Generator) -> dict[str, int]:
    """Simulate ``plan.n_measurements`` full-register measurements of ``rho``.

    Returns a mapping from bitstring (qubit 0 first) to count; outcomes that
    never occurred are omitted.
    """
    if plan.exact:
        raise ValueError("sample_bitstrings needs a finite ShotPlan")
    probs = diagonal_probabilities(rho)
    n = n_qubits_of(len(probs))
    counts = sample_counts(probs, plan.n_measurements, rng)
    return {format(b, f"0{n}b"): int(c) for b, c in enumerate(counts) if c}


def estimate_features_from_shots(counts: Mapping[str, int], features: FeatureSpec) -> np.ndarray:
    """Shot-average features; pair correlators reuse the same shots as the local ones."""
    total = sum(counts.values())
    if not counts or total <= 0:
        raise ValueError("no shots to estimate from")
    n = len(next(iter(counts)))
    freq = np.zeros(1 << n)
    for bits, c in counts.items():
        if len(bits) != n:
            raise ValueError(f"inconsistent bitstring length in {bits!r}")
        freq[int(bits, 2)] += c
    return features_from_distribution(freq / total, features)
