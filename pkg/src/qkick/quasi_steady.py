"""Quasi-stationary regime: detection, averaged energy, dissipated power, Fourier coefficient."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .evolution import Generator, KickSchedule, KickSpec, Stepper, Trajectory, propagate
from .observables import log_negativities
from .spin_chain import ChainConfig

DEFAULT_TOL = 1e-7
DEFAULT_WINDOW = 20
DEFAULT_MAX_KICKS = 5000


class InsufficientDataError(ValueError):
    pass


class NotConvergedError(RuntimeError):
    pass


class UndefinedCoefficientError(ZeroDivisionError):
    pass


def _settled(cycle_energy, tol, m):
    """Boolean per consecutive pair: |change of cycle energy| < tol."""
    return np.abs(np.diff(cycle_energy)) < tol


def detect_qss(trajectory: Trajectory, tol: float = DEFAULT_TOL, m: int = DEFAULT_WINDOW):
    """First window of ``m`` consecutive settled cycle-to-cycle changes.

    Returns ``(converged, n_transient_kicks)``: the window starts at kick
    ``n_transient_kicks + 1``.  When nothing converges ``n_transient_kicks``
    is the number of recorded kicks.
    """
    ce = trajectory.cycle_energy
    if len(ce) < m + 1:
        raise InsufficientDataError(
            f"need at least {m + 1} kick cycles to test convergence, got {len(ce)}")
    ok = _settled(ce, tol, m).astype(int)
    # run length of settled changes ending at each position
    run = np.zeros(len(ok) + 1, dtype=int)
    for i, v in enumerate(ok):
        run[i + 1] = run[i] + 1 if v else 0
    hits = np.nonzero(run[1:] >= m)[0]
    if len(hits) == 0:
        return False, len(ce)
    return True, int(hits[0] - m + 1)


class QssMonitor:
    """Early-stop predicate for :func:`propagate`: last ``m`` changes all below ``tol``."""

    def __init__(self, tol=DEFAULT_TOL, m=DEFAULT_WINDOW):
        self.tol, self.m = tol, m
        self.count = 0

    def __call__(self, e_pre, e_post):
        if len(e_pre) < 3:
            return False
        # row 0 is the initial state, not a cycle
        change = abs((e_pre[-1] + e_post[-1]) - (e_pre[-2] + e_post[-2])) / 2
        self.count = self.count + 1 if change < self.tol else 0
        return self.count >= self.m


def _post(trajectory, n_transient):
    if n_transient >= trajectory.n_kicks:
        raise NotConvergedError("no post-transient cycles in the trajectory")
    return slice(n_transient + 1, None)


def qss_energy(trajectory: Trajectory, n_transient: int) -> float:
    """Mean of (E+ + E-)/2 over post-transient kicks."""
    s = _post(trajectory, n_transient)
    return float(np.mean(0.5 * (trajectory.energy_pre[s] + trajectory.energy_post[s])))


def dissipated_series(trajectory: Trajectory) -> np.ndarray:
    """(E(tau_n^+) - E(tau_{n+1}^-)) / tau_k for n = 1..n_kicks-1."""
    return (trajectory.energy_post[1:-1] - trajectory.energy_pre[2:]) / trajectory.tau_k


def dissipated_power(trajectory: Trajectory, n_transient: int) -> float:
    _post(trajectory, n_transient)
    series = dissipated_series(trajectory)[n_transient:]
    if len(series) == 0:
        raise NotConvergedError("need two post-transient kicks for the dissipated power")
    return float(np.mean(series))


def fourier_coefficient(e_qst: float, dq_per_tau: float) -> float:
    if dq_per_tau == 0:
        raise UndefinedCoefficientError("dissipated power is zero; Fourier coefficient undefined")
    return e_qst / dq_per_tau


def balance_residual(trajectory: Trajectory, n_transient: int) -> float:
    """Worst post-transient mismatch between energy put in by a kick and energy lost after it."""
    s = _post(trajectory, n_transient)
    gain = (trajectory.energy_post - trajectory.energy_pre)[s][:-1]
    loss = (trajectory.energy_post[1:-1] - trajectory.energy_pre[2:])[n_transient:]
    if len(gain) == 0:
        return 0.0
    return float(np.max(np.abs(gain - loss)))


@dataclass
class QssReport:
    converged: bool
    n_transient_kicks: int
    n_kicks: int
    e_qst: float
    e_fluct: float
    dq_per_tau: float
    fourier_coeff: float
    purity_qst: float
    log_neg_qst: list
    positivity_min_eig: float
    warnings: list = field(default_factory=list)

    def as_row(self) -> dict:
        row = asdict(self)
        lns = row.pop("log_neg_qst")
        for j, v in enumerate(lns):
            row[f"log_neg_{j}"] = v
        row["warnings"] = "; ".join(self.warnings)
        return row


def summarize(trajectory: Trajectory, tol=DEFAULT_TOL, m=DEFAULT_WINDOW) -> QssReport:
    """QSS report of a finished trajectory.

    Log-negativities are averaged over the stored tail (pre- and post-kick
    states); purity over all post-transient pre/post records.
    """
    warnings = list(trajectory.warnings)
    converged, n_tr = detect_qss(trajectory, tol, m)
    if not converged:
        warnings.append(f"no quasi-steady state within {trajectory.n_kicks} kicks")
        n_tr = max(trajectory.n_kicks - m - 1, 0)
    s = slice(n_tr + 1, None)
    ce = 0.5 * (trajectory.energy_pre[s] + trajectory.energy_post[s])
    e_qst = float(np.mean(ce))
    dq = dissipated_power(trajectory, n_tr)
    try:
        f = fourier_coefficient(e_qst, dq)
    except UndefinedCoefficientError:
        f = math.nan
    pur = float(np.mean(0.5 * (trajectory.purity_pre[s] + trajectory.purity_post[s])))
    tail = np.concatenate([trajectory.tail_pre, trajectory.tail_post])
    ln = np.mean([log_negativities(r) for r in tail], axis=0)
    return QssReport(
        converged=bool(converged), n_transient_kicks=int(n_tr), n_kicks=trajectory.n_kicks,
        e_qst=e_qst, e_fluct=float(np.std(ce)), dq_per_tau=dq, fourier_coeff=f,
        purity_qst=pur, log_neg_qst=[float(v) for v in ln],
        positivity_min_eig=float(trajectory.min_eig.min()), warnings=warnings,
    )


def run_to_qss(rho0, config: ChainConfig, spec: KickSpec, tau_k: float,
               stepper: Stepper = Stepper(), tol=DEFAULT_TOL, m=DEFAULT_WINDOW,
               max_kicks=DEFAULT_MAX_KICKS, generator: Generator | None = None):
    """Kick until the cycle energy settles (or ``max_kicks``); returns ``(report, trajectory)``."""
    schedule = KickSchedule(tau_k, spec, max_kicks)
    traj = propagate(rho0, schedule, config, stepper=stepper, stop=QssMonitor(tol, m),
                     keep_last=m, generator=generator)
    if traj.n_kicks < m + 1:
        raise InsufficientDataError(f"max_kicks={max_kicks} leaves fewer than {m + 1} cycles")
    return summarize(traj, tol, m), traj


def linear_fit(x, y):
    """Least squares ``y = slope x + intercept``; returns ``(slope, intercept, r2)``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def jump_flags(values, factor=10.0):
    """Indices where a step on a grid exceeds ``factor`` times both neighbouring steps."""
    steps = np.abs(np.diff(np.asarray(values, float)))
    flags = []
    for i in range(len(steps)):
        nb = [steps[k] for k in (i - 1, i + 1) if 0 <= k < len(steps)]
        if nb and steps[i] > factor * max(max(nb), 1e-15):
            flags.append(i)
    return flags
