"""Single runs and grid sweeps, written out as CSV series plus JSON summaries."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from ..evolution import (POSITIVITY_WARN, DivergenceError, KickSchedule, KickSpec, Rotation,
                         Trajectory, sample_series)
from ..observables import energy_diag, log_negativities, purity
from ..quasi_steady import QssReport, run_to_qss, summarize
from ..spin_chain import basis_bits, build_hamiltonian
from .config import ConfigError, ExperimentConfig, initial_density

log = logging.getLogger(__name__)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return str(obj)


def label(index, n):
    return "|" + "".join(map(str, basis_bits(index + 1, n))) + ">"


def write_matrix(path, rho):
    """One row per entry: labels, real and imaginary parts, modulus."""
    n = int(round(math.log2(rho.shape[0])))
    rows = []
    for i in range(rho.shape[0]):
        for j in range(rho.shape[1]):
            z = rho[i, j]
            rows.append([i + 1, j + 1, label(i, n), label(j, n), z.real, z.imag, abs(z)])
    write_csv(path, ["row", "col", "row_state", "col_state", "re", "im", "abs"], rows)


def coherence_pairs(n):
    """Index pairs (i < j) that differ by one flipped qubit."""
    return [(i, i | (1 << (n - 1 - l))) for l in range(n) for i in range(2 ** n)
            if not i >> (n - 1 - l) & 1]


@dataclass
class RunSummary:
    config: dict
    config_hash: str
    report: QssReport | None
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0
    files: list = field(default_factory=list)

    def to_json(self):
        return {"config": self.config, "config_hash": self.config_hash,
                "qss": None if self.report is None else self.report.__dict__,
                "warnings": self.warnings, "wall_time_s": self.wall_time, "files": self.files}


def run_single(cfg: ExperimentConfig, out_dir=None) -> RunSummary:
    """Time series of one trajectory, its kick records, and (if long enough) a QSS report."""
    t0 = time.perf_counter()
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chain = cfg.chain
    n, dim = chain.n_qubits, chain.dim
    h = build_hamiltonian(chain)
    hd = np.real(np.diag(h))
    rho0 = initial_density(cfg.initial_state, dim)
    schedule = KickSchedule(cfg.tau_k or 1.0, cfg.spec, cfg.n_kicks)
    pairs = coherence_pairs(n)
    header = (["tau", "phase", "energy", "purity"] + [f"pop_{k + 1}" for k in range(dim)]
              + [f"coh_{i + 1}_{j + 1}" for i, j in pairs] + [f"log_neg_{q}" for q in range(n)])
    rows, warnings, files = [], [], []
    kicks = {"pre": [], "post": []}
    for tau, rho, phase in sample_series(rho0, schedule, chain, h, cfg.stepper,
                                         cfg.sample_every, cfg.duration):
        pops = np.real(np.diag(rho))
        rows.append([tau, phase, energy_diag(rho, hd), purity(rho), *pops,
                     *[abs(rho[i, j]) for i, j in pairs], *log_negativities(rho)])
        if phase in kicks:
            kicks[phase].append(rho)
        final = rho
    if "csv" in cfg.formats:
        write_csv(out / "series.csv", header, rows)
        files.append("series.csv")
        if cfg.store_matrix:
            write_matrix(out / "rho_final.csv", final)
            files.append("rho_final.csv")
    report = None
    if cfg.n_kicks >= cfg.qss_window + 2:
        traj = _stroboscopic(rho0, kicks["pre"], kicks["post"], schedule.tau_k, hd,
                             cfg.qss_window)
        report = summarize(traj, cfg.qss_tol, cfg.qss_window)
        warnings.extend(report.warnings)
    summary = RunSummary(cfg.raw, cfg.content_hash(), report, warnings,
                         time.perf_counter() - t0, files)
    if "json" in cfg.formats:
        write_json(out / "summary.json", summary.to_json())
        files.append("summary.json")
    return summary


def _stroboscopic(rho0, pre, post, tau_k, hd, window) -> Trajectory:
    pre, post = [rho0] + pre, [rho0] + post
    min_eig = np.array([np.linalg.eigvalsh(r)[0] for r in pre])
    traj = Trajectory(
        tau_k=tau_k, tau=np.arange(len(pre)) * tau_k,
        energy_pre=np.array([energy_diag(r, hd) for r in pre]),
        energy_post=np.array([energy_diag(r, hd) for r in post]),
        purity_pre=np.array([purity(r) for r in pre]),
        purity_post=np.array([purity(r) for r in post]),
        populations_pre=np.array([np.real(np.diag(r)) for r in pre]),
        populations_post=np.array([np.real(np.diag(r)) for r in post]),
        min_eig=min_eig, tail_pre=np.array(pre[-window:]), tail_post=np.array(post[-window:]),
    )
    if min_eig.min() < POSITIVITY_WARN:
        traj.warnings.append(f"density matrix lost positivity: min eigenvalue {min_eig.min():.3e}")
    return traj


# ------------------------------------------------------------------ sweeps


@dataclass(frozen=True)
class GridPoint:
    kick_set: str
    temperature: float
    tau_k: float
    kappa: float | None
    spec: KickSpec


def _with_kappa(spec: KickSpec, kappa, targets):
    rots = list(spec.rotations)
    for i in (range(len(rots)) if targets is None else targets):
        rots[i] = Rotation(rots[i].qubit, rots[i].axis, kappa)
    return KickSpec(tuple(rots))


def grid_points(cfg: ExperimentConfig, grid: str):
    """Grid in row order: kick set, temperature, tau_k, kappa."""
    sets = cfg.kick_sets or {"kick": cfg.spec}
    temps = cfg.temperatures or [cfg.chain.temperature]
    sweep_tau = grid in ("tau_k", "both")
    sweep_kappa = grid in ("kappa", "both")
    if sweep_tau and not cfg.tau_k_grid:
        raise ConfigError(["sweep.q_grid: this sweep needs sweep.q_grid or sweep.tau_k_grid"])
    if sweep_kappa and not cfg.kappa_grid:
        raise ConfigError(["sweep.kappa_grid: this sweep needs sweep.kappa_grid"])
    if not sweep_tau and cfg.tau_k is None:
        raise ConfigError(["kick.q: a kick period (kick.q or kick.tau_k) is required"])
    taus = cfg.tau_k_grid if sweep_tau else [cfg.tau_k]
    kappas = cfg.kappa_grid if sweep_kappa else [None]
    points = []
    for (name, spec), temp, tau, kappa in product(sets.items(), temps, taus, kappas):
        s = spec if kappa is None else _with_kappa(spec, kappa, cfg.kappa_rotations)
        points.append(GridPoint(name, float(temp), float(tau), kappa, s))
    return points


SWEEP_FIELDS = ["converged", "n_transient_kicks", "n_kicks", "e_qst", "e_fluct", "dq_per_tau",
                "fourier_coeff", "purity_qst", "positivity_min_eig"]


def _run_point(args):
    cfg, point = args
    chain = cfg.chain.replace(temperature=point.temperature)
    rho0 = initial_density(cfg.initial_state, chain.dim)
    try:
        report, _ = run_to_qss(rho0, chain, point.spec, point.tau_k, cfg.stepper,
                               cfg.qss_tol, cfg.qss_window, cfg.qss_max_kicks)
        return "ok", report
    except (DivergenceError, ArithmeticError, ValueError, RuntimeError) as exc:
        return "failed", f"{type(exc).__name__}: {exc}"


def _workers():
    try:
        return max(1, int(os.environ.get("QKICK_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(cfg: ExperimentConfig, grid: str = "both", out_dir=None):
    """One CSV row per grid point, in grid order.  Returns ``(rows, n_failed)``."""
    t0 = time.perf_counter()
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    points = grid_points(cfg, grid)
    n = cfg.chain.n_qubits
    jobs = [(cfg, p) for p in points]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(j) for j in jobs]
    header = (["kick_set", "temperature", "q", "tau_k", "kappa", "status"] + SWEEP_FIELDS
              + [f"log_neg_{j}" for j in range(n)] + ["message"])
    rows, failed = [], 0
    for p, (status, res) in zip(points, results):
        base = [p.kick_set, p.temperature, 4 * math.pi / p.tau_k, p.tau_k,
                "" if p.kappa is None else p.kappa, status]
        if status == "ok":
            r = res.as_row()
            rows.append(base + [r[k] for k in SWEEP_FIELDS]
                        + [r[f"log_neg_{j}"] for j in range(n)] + [r["warnings"]])
        else:
            failed += 1
            rows.append(base + [""] * (len(SWEEP_FIELDS) + n) + [res])
    if "csv" in cfg.formats:
        write_csv(out / "sweep.csv", header, rows)
    if "json" in cfg.formats:
        write_json(out / "sweep_summary.json", {
            "config": cfg.raw, "config_hash": cfg.content_hash(), "grid": grid,
            "points": len(points), "failed": failed,
            "wall_time_s": time.perf_counter() - t0})
    log.info("sweep: %d points, %d failed", len(points), failed)
    return [dict(zip(header, r)) for r in rows], failed


__all__ = ["GridPoint", "RunSummary", "coherence_pairs", "grid_points", "run_single",
           "run_sweep", "write_matrix"]
