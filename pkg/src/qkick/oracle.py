"""Dense reference propagation: the full Liouvillian exponentiated in one shot.

Built column by column from :func:`qkick.evolution.liouville_rhs` (the literal
commutator transcription), so it shares nothing with the RK4 kernels except
the definition of the equation.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .evolution import liouville_rhs
from .spin_chain import ChainConfig, build_hamiltonian


def liouvillian(config: ChainConfig, h=None) -> np.ndarray:
    """``d**2 x d**2`` matrix L with vec(d rho/d tau) = L vec(rho), row-major vec."""
    h = build_hamiltonian(config) if h is None else h
    d = config.dim
    sup = np.empty((d * d, d * d), dtype=complex)
    unit = np.zeros((d, d), dtype=complex)
    for k in range(d * d):
        unit.flat[k] = 1.0
        sup[:, k] = liouville_rhs(unit, config, h).ravel()
        unit.flat[k] = 0.0
    return sup


def expm_propagate(rho0, duration: float, config: ChainConfig, h=None) -> np.ndarray:
    rho0 = np.asarray(rho0, dtype=complex)
    return (expm(duration * liouvillian(config, h)) @ rho0.ravel()).reshape(rho0.shape)
