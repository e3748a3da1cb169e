"""Dissipative propagation between kicks, kick unitaries and stroboscopic trajectories."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .dissipator import apply_dissipator, transfer_tables
from .observables import energy_diag, log_negativities, min_eigenvalue, purity
from .spin_chain import ChainConfig, InvalidInputError, build_hamiltonian, pauli_op

POSITIVITY_WARN = -1e-6
AXES = ("x", "y", "z")


class DivergenceError(RuntimeError):
    """The integrator produced non-finite entries."""


# ------------------------------------------------------------------ kicks


@dataclass(frozen=True)
class Rotation:
    qubit: int
    axis: str
    angle: float

    def __post_init__(self):
        if self.axis not in AXES:
            raise InvalidInputError(f"kick axis must be one of {AXES}, got {self.axis!r}")
        if not 0.0 <= self.angle <= 2 * math.pi + 1e-12:
            raise InvalidInputError(f"kick angle must lie in [0, 2pi], got {self.angle}")


@dataclass(frozen=True)
class KickSpec:
    """Rotations applied in list order: the first entry acts on the state first."""

    rotations: tuple = ()

    def __post_init__(self):
        rots = tuple(r if isinstance(r, Rotation) else Rotation(*r) for r in self.rotations)
        object.__setattr__(self, "rotations", rots)

    @classmethod
    def single(cls, qubit, axis="x", angle=math.pi / 2):
        return cls(((qubit, axis, angle),))

    def validate(self, n: int):
        for r in self.rotations:
            if not 0 <= r.qubit < n:
                raise InvalidInputError(f"kicked qubit {r.qubit} out of range for {n} qubits")

    def to_list(self):
        return [[r.qubit, r.axis, r.angle] for r in self.rotations]


@dataclass(frozen=True)
class KickSchedule:
    tau_k: float
    spec: KickSpec
    n_kicks: int

    def __post_init__(self):
        if not self.tau_k > 0:
            raise InvalidInputError(f"kick period must be > 0, got {self.tau_k}")
        if self.n_kicks < 0:
            raise InvalidInputError(f"n_kicks must be >= 0, got {self.n_kicks}")

    @classmethod
    def from_q(cls, q: float, spec: KickSpec, n_kicks: int):
        """Period ``4 pi / q``."""
        if not q > 0:
            raise InvalidInputError(f"q must be a positive number, got {q}")
        return cls(4 * math.pi / q, spec, n_kicks)


def rotation_unitary(rot: Rotation, n: int) -> np.ndarray:
    # cos + i sin sigma: R_x(pi/2)|0> = (|0> + i|1>)/sqrt(2)
    c, s = math.cos(rot.angle / 2), math.sin(rot.angle / 2)
    return c * np.eye(2 ** n, dtype=complex) + 1j * s * pauli_op(rot.qubit, rot.axis, n)


def kick_unitary(spec: KickSpec, n: int) -> np.ndarray:
    spec.validate(n)
    u = np.eye(2 ** n, dtype=complex)
    for rot in spec.rotations:
        u = rotation_unitary(rot, n) @ u
    return u


def apply_kick(rho, u) -> np.ndarray:
    rho, u = np.asarray(rho), np.asarray(u)
    if rho.shape != u.shape:
        raise ValueError(f"shape mismatch: rho {rho.shape} vs U {u.shape}")
    return u @ rho @ u.conj().T


# ------------------------------------------------------------ integration


def liouville_rhs(rho, config: ChainConfig, h) -> np.ndarray:
    """d(rho)/d(tau) = -i[H, rho] + D[rho] by dense matrix algebra."""
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h)
    if rho.shape != h.shape:
        raise ValueError(f"shape mismatch: rho {rho.shape} vs H {h.shape}")
    return -1j * (h @ rho - rho @ h) + apply_dissipator(rho, config)


@dataclass(frozen=True)
class Stepper:
    """Fixed-step RK4 settings.

    The step is ``min(dt, duration / min_steps)`` rounded down so that an
    integer number of steps spans the duration exactly.
    """

    dt: float = 0.01
    min_steps: int = 200
    method: str = "rk4"
    backend: str | None = None

    def __post_init__(self):
        if self.method != "rk4":
            raise InvalidInputError(f"only the 'rk4' method is available, got {self.method!r}")
        if not self.dt > 0:
            raise InvalidInputError(f"dt must be > 0, got {self.dt}")

    def n_steps(self, duration: float) -> int:
        if duration == 0:
            return 0
        return max(self.min_steps, math.ceil(duration / self.dt - 1e-9))

    def halved(self) -> "Stepper":
        return Stepper(self.dt / 2, self.min_steps * 2, self.method, self.backend)


class Generator:
    """Master-equation generator in the elementwise form used by the kernels."""

    def __init__(self, config: ChainConfig, h=None):
        self.config = config
        h = build_hamiltonian(config) if h is None else np.asarray(h)
        hd = np.real(np.diagonal(h))
        if not np.allclose(h, np.diag(np.diagonal(h)), atol=1e-14):
            raise ValueError("the chain Hamiltonian must be diagonal in the register basis")
        decay, coeff, perm = transfer_tables(config)
        self.h = h
        self.hdiag = hd
        self.tables = kernels.Tables(-1j * (hd[:, None] - hd[None, :]) + decay, coeff, perm)

    def rhs(self, rho, backend=None):
        return kernels.rhs(rho, self.tables, backend)

    def step(self, rho, n_steps, dt, backend=None):
        out, bad = kernels.rk4(rho, n_steps, dt, self.tables, backend)
        if bad >= 0:
            raise DivergenceError(f"non-finite density matrix at RK4 step {bad}")
        return out

    def step_record(self, rho, n_steps, dt, every, backend=None):
        samples, out, bad = kernels.rk4_record(rho, n_steps, dt, self.tables, every, backend)
        if bad >= 0:
            raise DivergenceError(f"non-finite density matrix at RK4 step {bad}")
        return samples, out


def hermitize(rho):
    return 0.5 * (rho + rho.conj().T)


def integrate(rho0, duration: float, config: ChainConfig, h=None,
              stepper: Stepper = Stepper(), generator: Generator | None = None) -> np.ndarray:
    """Propagate ``rho0`` over ``duration`` with fixed-step RK4."""
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (config.dim, config.dim):
        raise ValueError(f"density matrix must be {config.dim}x{config.dim}, got {rho0.shape}")
    n = stepper.n_steps(duration)
    if n == 0:
        return rho0.copy()
    gen = generator or Generator(config, h)
    return hermitize(gen.step(rho0, n, duration / n, stepper.backend))


def step_convergence(rho0, duration, config, h=None, stepper: Stepper = Stepper()) -> float:
    """Max-norm change of the final state when the step is halved."""
    gen = Generator(config, h)
    a = integrate(rho0, duration, config, stepper=stepper, generator=gen)
    b = integrate(rho0, duration, config, stepper=stepper.halved(), generator=gen)
    return float(np.max(np.abs(a - b)))


# ------------------------------------------------------------- trajectory


@dataclass
class Trajectory:
    """Stroboscopic record.  Row 0 is the initial state; row n >= 1 is kick n.

    ``*_pre`` columns hold rho(tau_n^-), ``*_post`` hold rho(tau_n^+); for row 0
    both equal the initial state.  Full states are kept only on request
    (``states_*``); ``tail_*`` always hold the last ``keep_last`` of them.
    """

    tau_k: float
    tau: np.ndarray
    energy_pre: np.ndarray
    energy_post: np.ndarray
    purity_pre: np.ndarray
    purity_post: np.ndarray
    populations_pre: np.ndarray
    populations_post: np.ndarray
    min_eig: np.ndarray
    log_neg_pre: np.ndarray | None = None
    log_neg_post: np.ndarray | None = None
    states_pre: np.ndarray | None = None
    states_post: np.ndarray | None = None
    tail_pre: np.ndarray | None = None
    tail_post: np.ndarray | None = None
    final_state: np.ndarray | None = None
    warnings: list = field(default_factory=list)

    @property
    def n_kicks(self) -> int:
        return len(self.tau) - 1

    @property
    def cycle_energy(self) -> np.ndarray:
        """(E+ + E-)/2 for kicks 1..n."""
        return 0.5 * (self.energy_pre[1:] + self.energy_post[1:])


class _Recorder:
    def __init__(self, hdiag, store_states, entanglement, keep_last):
        self.tail = deque(maxlen=max(keep_last, 1))
        self.hdiag = hdiag
        self.store_states = store_states
        self.entanglement = entanglement
        self.rows = {k: [] for k in ("tau", "e_pre", "e_post", "p_pre", "p_post",
                                     "pop_pre", "pop_post", "min_eig", "ln_pre", "ln_post",
                                     "s_pre", "s_post")}

    def add(self, tau, pre, post):
        r = self.rows
        r["tau"].append(tau)
        r["e_pre"].append(energy_diag(pre, self.hdiag))
        r["e_post"].append(energy_diag(post, self.hdiag))
        r["p_pre"].append(purity(pre))
        r["p_post"].append(purity(post))
        r["pop_pre"].append(np.real(np.diagonal(pre)).copy())
        r["pop_post"].append(np.real(np.diagonal(post)).copy())
        r["min_eig"].append(min_eigenvalue(pre))
        if self.entanglement:
            r["ln_pre"].append(log_negativities(pre))
            r["ln_post"].append(log_negativities(post))
        self.tail.append((pre, post))
        if self.store_states:
            r["s_pre"].append(pre.copy())
            r["s_post"].append(post.copy())

    def build(self, tau_k, final_state) -> Trajectory:
        r = self.rows
        arr = lambda k: np.array(r[k]) if r[k] else None  # noqa: E731
        traj = Trajectory(
            tau_k=tau_k, tau=arr("tau"), energy_pre=arr("e_pre"), energy_post=arr("e_post"),
            purity_pre=arr("p_pre"), purity_post=arr("p_post"),
            populations_pre=arr("pop_pre"), populations_post=arr("pop_post"),
            min_eig=arr("min_eig"), log_neg_pre=arr("ln_pre"), log_neg_post=arr("ln_post"),
            states_pre=arr("s_pre"), states_post=arr("s_post"), final_state=final_state,
            tail_pre=np.array([p for p, _ in self.tail]),
            tail_post=np.array([q for _, q in self.tail]),
        )
        worst = float(traj.min_eig.min())
        if worst < POSITIVITY_WARN:
            traj.warnings.append(f"density matrix lost positivity: min eigenvalue {worst:.3e}")
        return traj


def propagate(rho0, schedule: KickSchedule, config: ChainConfig, h=None,
              stepper: Stepper = Stepper(), *, store_states: bool = False,
              entanglement: bool = False, keep_last: int = 1,
              stop: Callable[[Sequence[float], Sequence[float]], bool] | None = None,
              generator: Generator | None = None) -> Trajectory:
    """Alternate dissipative evolution over one period with the kick, ``n_kicks`` times.

    ``stop(energy_pre, energy_post)`` is consulted after each kick with the
    records so far and ends the run early when it returns True.
    """
    gen = generator or Generator(config, h)
    n = config.n_qubits
    schedule.spec.validate(n)
    u = kick_unitary(schedule.spec, n)
    n_steps = stepper.n_steps(schedule.tau_k)
    dt = schedule.tau_k / n_steps
    rho = np.asarray(rho0, dtype=complex).copy()
    rec = _Recorder(gen.hdiag, store_states, entanglement, keep_last)
    rec.add(0.0, rho, rho)
    for k in range(1, schedule.n_kicks + 1):
        pre = hermitize(gen.step(rho, n_steps, dt, stepper.backend))
        rho = apply_kick(pre, u)
        rec.add(k * schedule.tau_k, pre, rho)
        if stop is not None and stop(rec.rows["e_pre"], rec.rows["e_post"]):
            break
    return rec.build(schedule.tau_k, rho)


def sample_series(rho0, schedule: KickSchedule, config: ChainConfig, h=None,
                  stepper: Stepper = Stepper(), every: int = 10, duration: float | None = None):
    """Fine-grained time series for plotting.

    Yields ``(tau, rho, phase)`` with phase ``'flow'`` for integrator samples
    (every ``every`` steps) and ``'pre'``/``'post'`` around each kick.  Without
    kicks (``n_kicks == 0``) the flow runs for ``duration``.
    """
    gen = Generator(config, h)
    u = kick_unitary(schedule.spec, config.n_qubits)
    rho = np.asarray(rho0, dtype=complex).copy()
    yield 0.0, rho, "init"
    if schedule.n_kicks == 0:
        if not duration:
            return
        segments, seg_len = 1, duration
    else:
        segments, seg_len = schedule.n_kicks, schedule.tau_k
    n_steps = stepper.n_steps(seg_len)
    dt = seg_len / n_steps
    for k in range(segments):
        t0 = k * seg_len
        samples, rho = gen.step_record(rho, n_steps, dt, every, stepper.backend)
        for s, st in enumerate(samples[: (n_steps - 1) // every]):
            yield t0 + (s + 1) * every * dt, st, "flow"
        rho = hermitize(rho)
        if schedule.n_kicks == 0:
            yield t0 + seg_len, rho, "flow"
        else:
            yield t0 + seg_len, rho, "pre"
            rho = apply_kick(rho, u)
            yield t0 + seg_len, rho, "post"
