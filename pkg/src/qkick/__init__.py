"""Dissipative, periodically kicked Ising spin chains: propagation and quasi-steady observables."""
from .dissipator import RateOperators, apply_dissipator, rate_operators, thermal_occupation
from .evolution import (DivergenceError, Generator, KickSchedule, KickSpec, Rotation, Stepper,
                        Trajectory, apply_kick, integrate, kick_unitary, liouville_rhs, propagate)
from .observables import (energy, gibbs_state, log_negativity, negativity, partial_transpose,
                          purity)
from .quasi_steady import (QssReport, detect_qss, dissipated_power, fourier_coefficient,
                           qss_energy, run_to_qss)
from .spin_chain import (ChainConfig, InvalidInputError, NonPositiveFrequencyError, basis_index,
                         build_hamiltonian, canonical_config, frequency_operator, pauli_op)

__version__ = "0.1.0"
