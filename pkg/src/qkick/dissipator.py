"""Thermal rate operators and the bath superoperator of the kicked chain.

The dissipator is not of Lindblad form.  :func:`apply_dissipator` transcribes
it literally with dense matrix products and serves as the reference; the
index form built by :func:`transfer_tables` is what the propagation kernels use.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin_chain import ChainConfig, bit_table, frequency_diagonal, pauli_op

# exp(x) overflows a double just above 709
_EXP_CUTOFF = 700.0


def thermal_occupation(omega, d):
    """Planck occupation ``1 / (exp(omega / d) - 1)``; exactly 0 at ``d == 0``."""
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr <= 0):
        raise ValueError(f"thermal occupation needs omega > 0, got {omega}")
    if d < 0:
        raise ValueError(f"temperature must be >= 0, got {d}")
    if d == 0:
        out = np.zeros_like(omega_arr)
    else:
        x = omega_arr / d
        out = np.where(x > _EXP_CUTOFF, 0.0, 1.0 / np.expm1(np.minimum(x, _EXP_CUTOFF)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RateOperators:
    """Diagonals of the emission (``o1``) and absorption (``o2``) operators of one qubit."""

    o1: np.ndarray
    o2: np.ndarray

    def matrices(self):
        return np.diag(self.o1).astype(complex), np.diag(self.o2).astype(complex)


def rate_operators(config: ChainConfig, l: int) -> RateOperators:
    omega = frequency_diagonal(config, l)
    occ = thermal_occupation(omega, config.temperature)
    cube = omega ** 3
    return RateOperators(o1=cube * (occ + 1.0), o2=cube * occ)


def _check_shape(rho, config):
    d = config.dim
    if np.shape(rho) != (d, d):
        raise ValueError(f"density matrix must be {d}x{d}, got shape {np.shape(rho)}")


def apply_dissipator(rho: np.ndarray, config: ChainConfig) -> np.ndarray:
    """Bath contribution to d(rho)/d(tau), written term by term with commutators."""
    _check_shape(rho, config)
    rho = np.asarray(rho, dtype=complex)
    n = config.n_qubits
    out = np.zeros_like(rho)

    def comm(a, b):
        return a @ b - b @ a

    for l in range(n):
        sp = pauli_op(l, "+", n)
        sm = pauli_op(l, "-", n)
        o1, o2 = rate_operators(config, l).matrices()
        term = (comm(o1 @ sp, sm @ rho) + comm(rho @ sp, sm @ o1)
                + comm(o2 @ sm, sp @ rho) + comm(rho @ sm, sp @ o2))
        out -= config.betas[l] * term
    return out


def transfer_tables(config: ChainConfig):
    """Elementwise form of the dissipator.

    Returns ``(decay, coeff, perm)`` such that

        D[rho]_ij = decay_ij rho_ij + sum_l coeff[l]_ij rho[perm[l]_i, perm[l]_j]

    where ``perm[l]`` flips bit ``l`` of the matrix index.  Emission feeds
    entries with both bits of qubit ``l`` at 0 from the flipped (excited)
    entry; absorption feeds entries with both bits at 1.
    """
    n, d = config.n_qubits, config.dim
    bits = bit_table(n)
    idx = np.arange(d)
    decay = np.zeros((d, d))
    coeff = np.zeros((n, d, d))
    perm = np.zeros((n, d), dtype=np.int64)
    for l in range(n):
        beta = config.betas[l]
        rates = rate_operators(config, l)
        b = bits[:, l].astype(float)
        loss = b * rates.o1 + (1.0 - b) * rates.o2
        decay -= beta * (loss[:, None] + loss[None, :])
        both0 = np.outer(1.0 - b, 1.0 - b)
        both1 = np.outer(b, b)
        coeff[l] = beta * (both0 * (rates.o1[:, None] + rates.o1[None, :])
                           + both1 * (rates.o2[:, None] + rates.o2[None, :]))
        perm[l] = idx ^ (1 << (n - 1 - l))
    return decay, coeff, perm


def gibbs_fixed_point_residual(config: ChainConfig) -> tuple[float, float]:
    """Max |D[rho_G]| on and off the diagonal for the Gibbs state of the chain."""
    from .observables import gibbs_state
    from .spin_chain import build_hamiltonian

    rho = gibbs_state(build_hamiltonian(config), config.temperature)
    out = np.abs(apply_dissipator(rho, config))
    off = out - np.diag(np.diag(out))
    return float(np.max(np.diag(out))), float(np.max(off))


__all__ = [
    "RateOperators", "apply_dissipator", "gibbs_fixed_point_residual",
    "rate_operators", "thermal_occupation", "transfer_tables",
]
