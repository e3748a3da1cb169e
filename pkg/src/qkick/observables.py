"""Scalar diagnostics of chain states: energy, purity, Gibbs reference, negativity."""
from __future__ import annotations

import numpy as np

# eigenvalues this close to zero count as zero in the negativity sum
EIG_CLAMP = 1e-12


def energy(rho, h) -> float:
    """Tr(H rho)."""
    rho, h = np.asarray(rho), np.asarray(h)
    if rho.shape != h.shape:
        raise ValueError(f"shape mismatch: rho {rho.shape} vs H {h.shape}")
    val = np.trace(h @ rho)
    scale = max(1.0, float(np.max(np.abs(h))))
    assert abs(val.imag) < 1e-10 * scale, f"energy has imaginary residue {val.imag}"
    return float(val.real)


def energy_diag(rho, hdiag) -> float:
    """Energy for a diagonal Hamiltonian given by its diagonal."""
    return float(np.real(np.diagonal(rho)) @ hdiag)


def purity(rho) -> float:
    rho = np.asarray(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.real(np.vdot(rho.conj().T, rho)))


def populations(rho) -> np.ndarray:
    return np.real(np.diagonal(rho)).copy()


def gibbs_state(h, d: float) -> np.ndarray:
    """exp(-H/D)/Z for a diagonal Hamiltonian."""
    if d <= 0:
        raise ValueError(f"Gibbs state needs temperature D > 0, got {d}")
    e = np.real(np.diagonal(h))
    w = np.exp(-(e - e.min()) / d)
    return np.diag(w / w.sum()).astype(complex)


def _n_qubits(rho) -> int:
    dim = rho.shape[0]
    n = dim.bit_length() - 1
    if rho.shape != (dim, dim) or 2 ** n != dim:
        raise ValueError(f"expected a 2^N x 2^N matrix, got shape {rho.shape}")
    return n


def partial_transpose(rho, j: int) -> np.ndarray:
    """Transpose of the qubit-``j`` indices only (qubit 0 most significant)."""
    rho = np.asarray(rho)
    n = _n_qubits(rho)
    if not 0 <= j < n:
        raise IndexError(f"qubit index {j} out of range for {n} qubits")
    t = rho.reshape((2,) * (2 * n))
    return np.swapaxes(t, j, n + j).reshape(rho.shape)


def negativity(rho, j: int) -> float:
    lam = np.linalg.eigvalsh(partial_transpose(rho, j))
    lam = np.where(np.abs(lam) < EIG_CLAMP, 0.0, lam)
    return float(np.sum(np.abs(lam) - lam) / 2.0)


def log_negativity(rho, j: int) -> float:
    """log2(2 N_j + 1): entanglement of qubit ``j`` with the rest."""
    return float(np.log2(2.0 * negativity(rho, j) + 1.0))


def log_negativities(rho) -> np.ndarray:
    n = _n_qubits(np.asarray(rho))
    return np.array([log_negativity(rho, j) for j in range(n)])


def min_eigenvalue(rho) -> float:
    return float(np.linalg.eigvalsh(rho)[0])
