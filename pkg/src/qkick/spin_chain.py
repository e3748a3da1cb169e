"""Computational basis, embedded Pauli operators and the Ising chain Hamiltonian.

Qubit 0 (A) is the leftmost tensor factor and the most significant bit of the
register, so ``|ABC>`` with bits ``(a, b, c)`` sits at matrix index
``4a + 2b + c`` and carries the decimal label ``index + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np


class InvalidInputError(ValueError):
    pass


class NonPositiveFrequencyError(ValueError):
    """A transition frequency of the chain is zero or negative."""


SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    # raising maps |0> -> |1>
    "+": np.array([[0, 0], [1, 0]], dtype=complex),
    "-": np.array([[0, 1], [0, 0]], dtype=complex),
}


@dataclass(frozen=True)
class ChainConfig:
    """Physical parameters of the chain in units of the reference Larmor frequency.

    Parameters
    ----------
    delta : sequence of float
        Larmor ratios, one per qubit.
    coupling : (N, N) array
        Symmetric pairwise Ising strengths with zero diagonal.
    beta : float or sequence of float
        Bath coupling, scalar (all qubits equal) or one value per qubit.
    temperature : float
        Dimensionless bath temperature ``D >= 0``.
    """

    delta: tuple
    coupling: np.ndarray
    beta: float | tuple = 0.1
    temperature: float = 0.0
    betas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        delta = tuple(float(d) for d in self.delta)
        n = len(delta)
        if n < 1:
            raise InvalidInputError("delta must name at least one qubit")
        if any(d <= 0 for d in delta):
            raise InvalidInputError(f"Larmor ratios must be positive, got {delta}")
        coupling = np.array(self.coupling, dtype=float)
        if coupling.shape != (n, n):
            raise InvalidInputError(f"coupling must be {n}x{n}, got shape {coupling.shape}")
        if not np.allclose(coupling, coupling.T, atol=0.0, rtol=0.0):
            raise InvalidInputError("coupling matrix must be symmetric")
        if np.any(np.diag(coupling) != 0.0):
            raise InvalidInputError("coupling matrix must have a zero diagonal")
        betas = np.broadcast_to(np.asarray(self.beta, dtype=float), (n,)).copy()
        if np.any(betas < 0):
            raise InvalidInputError(f"bath coupling must be >= 0, got {self.beta}")
        if self.temperature < 0:
            raise InvalidInputError(f"temperature must be >= 0, got {self.temperature}")
        coupling.setflags(write=False)
        betas.setflags(write=False)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "coupling", coupling)
        object.__setattr__(self, "temperature", float(self.temperature))
        object.__setattr__(self, "betas", betas)
        for l in range(n):
            frequency_operator(self, l)

    @property
    def n_qubits(self) -> int:
        return len(self.delta)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @classmethod
    def from_chain(cls, delta, chi, chi2=0.0, beta=0.1, temperature=0.0):
        """Nearest (``chi``) and next-nearest (``chi2``) neighbour chain."""
        n = len(delta)
        coupling = np.zeros((n, n))
        for j in range(n - 1):
            coupling[j, j + 1] = coupling[j + 1, j] = chi
        for j in range(n - 2):
            coupling[j, j + 2] = coupling[j + 2, j] = chi2
        return cls(tuple(delta), coupling, beta, temperature)

    def replace(self, **changes) -> "ChainConfig":
        kw = dict(delta=self.delta, coupling=self.coupling, beta=self.beta,
                  temperature=self.temperature)
        kw.update(changes)
        return ChainConfig(**kw)


def canonical_config(temperature=0.0, beta=0.1) -> ChainConfig:
    """Three-qubit chain with delta = (1, 0.5, 0.25), chi = 0.15, chi' = 0.1."""
    return ChainConfig.from_chain((1.0, 0.5, 0.25), 0.15, 0.1, beta, temperature)


def basis_index(bits) -> int:
    """Decimal label (1-based) of a register given as bits, A first."""
    bits = list(bits)
    if not bits or any(b not in (0, 1) or isinstance(b, bool) for b in bits):
        raise InvalidInputError(f"register must be a non-empty list of 0/1 digits, got {bits}")
    value = 0
    for b in bits:
        value = 2 * value + b
    return value + 1


def basis_bits(label: int, n: int) -> list[int]:
    """Inverse of :func:`basis_index`."""
    if not 1 <= label <= 2 ** n:
        raise InvalidInputError(f"basis label must lie in 1..{2 ** n}, got {label}")
    return [(label - 1) >> (n - 1 - j) & 1 for j in range(n)]


def bit_table(n: int) -> np.ndarray:
    """``(2**n, n)`` array of register bits, row = matrix index."""
    idx = np.arange(2 ** n)[:, None]
    return (idx >> (n - 1 - np.arange(n))[None, :]) & 1


def embed(op: np.ndarray, j: int, n: int) -> np.ndarray:
    if not 0 <= j < n:
        raise IndexError(f"qubit index {j} out of range for {n} qubits")
    factors = [np.eye(2, dtype=complex)] * n
    factors = factors[:j] + [op] + factors[j + 1:]
    return reduce(np.kron, factors)


def pauli_op(j: int, axis: str, n: int) -> np.ndarray:
    """Pauli (or ladder, axis ``'+'``/``'-'``) operator on qubit ``j`` of ``n``."""
    if axis not in SIGMA:
        raise InvalidInputError(f"unknown axis {axis!r}")
    return embed(SIGMA[axis], j, n)


def hamiltonian_diagonal(config: ChainConfig) -> np.ndarray:
    z = 1.0 - 2.0 * bit_table(config.n_qubits)
    delta = np.asarray(config.delta)
    # symmetric coupling counts each pair twice
    zz = 0.5 * np.einsum("kj,jl,kl->k", z, config.coupling, z)
    return -0.5 * z @ delta - 0.25 * zz


def build_hamiltonian(config: ChainConfig) -> np.ndarray:
    """H = -1/2 sum_j delta_j Z_j - 1/4 sum_{j<l} chi_jl Z_j Z_l (real diagonal)."""
    return np.diag(hamiltonian_diagonal(config)).astype(complex)


def frequency_diagonal(config: ChainConfig, l: int) -> np.ndarray:
    n = config.n_qubits
    if not 0 <= l < n:
        raise IndexError(f"qubit index {l} out of range for {n} qubits")
    z = 1.0 - 2.0 * bit_table(n)
    row = config.coupling[l].copy()
    row[l] = 0.0
    omega = config.delta[l] + 0.5 * z @ row
    if np.any(omega <= 0):
        bad = int(np.argmin(omega))
        raise NonPositiveFrequencyError(
            f"transition frequency of qubit {l} is {omega[bad]:.6g} <= 0 "
            f"in basis state {bad + 1} (|{''.join(map(str, basis_bits(bad + 1, n)))}>)"
        )
    return omega


def frequency_operator(config: ChainConfig, l: int) -> np.ndarray:
    """Diagonal transition-frequency operator of qubit ``l``.

    Eigenvalue on a basis state is ``delta_l + sum_{m != l} chi_lm / 2 * (-1)**bit_m``.
    """
    return np.diag(frequency_diagonal(config, l)).astype(complex)
