"""Experiment definitions: flat YAML key/value files with a schema version.

Keys are dotted (``chain.delta``, ``kick.q`` ...); see ``SCHEMA`` for the
full list and defaults.  Every violated invariant is collected and reported
together in one :class:`ConfigError`.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..evolution import AXES, KickSpec, Rotation, Stepper
from ..spin_chain import ChainConfig, NonPositiveFrequencyError

SCHEMA_VERSION = 1

SCHEMA = {
    "schema_version": SCHEMA_VERSION,
    "chain.delta": [1.0, 0.5, 0.25],
    "chain.chi": 0.15,
    "chain.chi2": 0.1,
    "chain.coupling": None,
    "chain.beta": 0.1,
    "chain.temperature": 0.0,
    "initial_state": 8,
    "kick.rotations": [],
    "kick.q": None,
    "kick.tau_k": None,
    "kick.n_kicks": 0,
    "evolve.duration": 0.0,
    "stepper.dt": 0.01,
    "stepper.min_steps": 200,
    "stepper.sample_every": 10,
    "qss.tol": 1e-7,
    "qss.window": 20,
    "qss.max_kicks": 5000,
    "sweep.kappa_grid": None,
    "sweep.kappa_rotations": None,
    "sweep.q_grid": None,
    "sweep.tau_k_grid": None,
    "sweep.temperatures": None,
    "sweep.kick_sets": None,
    "outputs.dir": "qkick-out",
    "outputs.formats": ["csv", "json"],
    "outputs.store_matrix": True,
}


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.problems))


_PI_EXPR = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_number(value):
    """Float, or a multiple of pi written as ``'pi/2'``, ``'3*pi/4'``, ``'2pi'``."""
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    m = _PI_EXPR.match(text)
    if m:
        factor = float(m.group(1)) if m.group(1) not in ("", "+", "-") else float(m.group(1) + "1")
        divisor = float(m.group(2)) if m.group(2) else 1.0
        return factor * math.pi / divisor
    return float(text)


def parse_grid(value):
    """List of numbers, or a mapping ``{start, stop, num}`` / ``{start, stop, step}``."""
    if isinstance(value, dict):
        start, stop = parse_number(value["start"]), parse_number(value["stop"])
        if "num" in value:
            return [float(x) for x in np.linspace(start, stop, int(value["num"]))]
        step = parse_number(value["step"])
        if step <= 0:
            raise ValueError("grid step must be > 0")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [float(start + k * step) for k in range(n)]
    if isinstance(value, (list, tuple)):
        return [parse_number(v) for v in value]
    return [parse_number(value)]


def parse_rotations(value):
    rots = []
    for item in value or []:
        if isinstance(item, dict):
            qubit, axis, angle = item["qubit"], item["axis"], item["angle"]
        else:
            qubit, axis, angle = item
        rots.append(Rotation(int(qubit), str(axis), parse_number(angle)))
    return KickSpec(tuple(rots))


@dataclass
class ExperimentConfig:
    raw: dict
    chain: ChainConfig
    initial_state: object
    spec: KickSpec
    tau_k: float | None
    n_kicks: int
    duration: float
    stepper: Stepper
    sample_every: int
    qss_tol: float
    qss_window: int
    qss_max_kicks: int
    kappa_grid: list | None = None
    kappa_rotations: list | None = None
    tau_k_grid: list | None = None
    temperatures: list | None = None
    kick_sets: dict | None = None
    out_dir: str = "qkick-out"
    formats: list = field(default_factory=lambda: ["csv", "json"])
    store_matrix: bool = True

    def content_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha1(blob).hexdigest()

    def with_chain(self, **changes) -> "ExperimentConfig":
        other = copy.copy(self)
        other.chain = self.chain.replace(**changes)
        return other


def load_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a mapping of keys to values"])
    return data


def apply_overrides(raw: dict, overrides) -> dict:
    """``key=value`` strings (values parsed as YAML) layered over ``raw``."""
    out = dict(raw)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError([f"override {item!r} must look like key=value"])
        key, value = item.split("=", 1)
        out[key.strip()] = yaml.safe_load(value)
    return out


def _initial_state(value, dim, problems):
    if isinstance(value, str) and value.strip().lower() in ("maximally-mixed", "mixed"):
        return "maximally-mixed"
    try:
        label = int(value)
    except (TypeError, ValueError):
        problems.append(f"initial_state: expected a basis label or 'maximally-mixed', got {value!r}")
        return None
    if not 1 <= label <= dim:
        problems.append(f"initial_state: basis label must lie in 1..{dim}, got {label}")
        return None
    return label


def initial_density(initial_state, dim):
    if initial_state == "maximally-mixed":
        return np.eye(dim, dtype=complex) / dim
    rho = np.zeros((dim, dim), dtype=complex)
    rho[initial_state - 1, initial_state - 1] = 1.0
    return rho


def _tau_from(q, tau, key, problems):
    if q is not None and tau is not None:
        problems.append(f"{key}: give either {key}.q or {key}.tau_k, not both")
        return None
    if tau is not None:
        tau = parse_number(tau)
        if not tau > 0:
            problems.append(f"{key}.tau_k: kick period must be > 0, got {tau}")
            return None
        return tau
    if q is not None:
        q = parse_number(q)
        if not q > 0:
            problems.append(f"{key}.q: q must be a positive number different from zero, got {q}")
            return None
        return 4 * math.pi / q
    return None


def validate_config(raw: dict) -> ExperimentConfig:
    problems = []
    unknown = sorted(set(raw) - set(SCHEMA))
    for key in unknown:
        problems.append(f"{key}: unknown key")
    cfg = {**SCHEMA, **raw}
    if cfg["schema_version"] != SCHEMA_VERSION:
        problems.append(f"schema_version: expected {SCHEMA_VERSION}, got {cfg['schema_version']!r}")

    def num(key, lo=None, strict=False, integer=False):
        try:
            v = parse_number(cfg[key])
        except (TypeError, ValueError):
            problems.append(f"{key}: expected a number, got {cfg[key]!r}")
            return None
        if integer:
            if v != int(v):
                problems.append(f"{key}: expected an integer, got {cfg[key]!r}")
                return None
            v = int(v)
        if lo is not None and (v <= lo if strict else v < lo):
            problems.append(f"{key}: must be {'>' if strict else '>='} {lo}, got {v}")
            return None
        return v

    beta = num("chain.beta", 0.0)
    temperature = num("chain.temperature", 0.0)
    chain = None
    try:
        delta = [parse_number(d) for d in cfg["chain.delta"]]
    except (TypeError, ValueError):
        problems.append(f"chain.delta: expected a list of numbers, got {cfg['chain.delta']!r}")
        delta = None
    if delta is not None and beta is not None and temperature is not None:
        try:
            if cfg["chain.coupling"] is not None:
                coupling = [[parse_number(x) for x in row] for row in cfg["chain.coupling"]]
                chain = ChainConfig(tuple(delta), np.array(coupling), beta, temperature)
            else:
                chain = ChainConfig.from_chain(delta, parse_number(cfg["chain.chi"]),
                                               parse_number(cfg["chain.chi2"]), beta, temperature)
        except NonPositiveFrequencyError as exc:
            problems.append(f"chain.coupling: {exc}")
        except (TypeError, ValueError) as exc:
            problems.append(f"chain: {exc}")
    dim = chain.dim if chain else 2 ** len(delta or [0, 0, 0])
    n = chain.n_qubits if chain else len(delta or [0, 0, 0])

    init = _initial_state(cfg["initial_state"], dim, problems)

    def rotations(key, value):
        try:
            spec = parse_rotations(value)
            spec.validate(n)
            return spec
        except (TypeError, ValueError, KeyError) as exc:
            problems.append(f"{key}: {exc}")
            return KickSpec()

    spec = rotations("kick.rotations", cfg["kick.rotations"])
    tau_k = _tau_from(cfg["kick.q"], cfg["kick.tau_k"], "kick", problems)
    n_kicks = num("kick.n_kicks", 0, integer=True)
    duration = num("evolve.duration", 0.0)
    dt = num("stepper.dt", 0.0, strict=True)
    min_steps = num("stepper.min_steps", 1, integer=True)
    every = num("stepper.sample_every", 1, integer=True)
    tol = num("qss.tol", 0.0, strict=True)
    window = num("qss.window", 1, integer=True)
    max_kicks = num("qss.max_kicks", 1, integer=True)
    if n_kicks and tau_k is None:
        problems.append("kick.q: a kick period (kick.q or kick.tau_k) is required when kick.n_kicks > 0")

    def grid(key, positive=False, nonneg=False):
        if cfg[key] is None:
            return None
        try:
            values = parse_grid(cfg[key])
        except (TypeError, ValueError, KeyError) as exc:
            problems.append(f"{key}: {exc}")
            return None
        before = len(problems)
        if not values:
            problems.append(f"{key}: grid must not be empty")
        if positive and any(v <= 0 for v in values):
            problems.append(f"{key}: all values must be > 0 (q is a positive number different from zero)")
        if nonneg and any(v < 0 for v in values):
            problems.append(f"{key}: all values must be >= 0")
        return values if len(problems) == before else None

    kappa_grid = grid("sweep.kappa_grid", nonneg=True)
    if kappa_grid and any(v > 2 * math.pi + 1e-12 for v in kappa_grid):
        problems.append("sweep.kappa_grid: kick angles must lie in [0, 2pi]")
    q_grid = grid("sweep.q_grid", positive=True)
    tau_grid = grid("sweep.tau_k_grid", positive=True)
    if q_grid is not None and tau_grid is not None:
        problems.append("sweep: give either sweep.q_grid or sweep.tau_k_grid, not both")
    if q_grid is not None:
        tau_grid = [4 * math.pi / q for q in q_grid]
    temps = grid("sweep.temperatures", nonneg=True)
    kick_sets = None
    if cfg["sweep.kick_sets"] is not None:
        if not isinstance(cfg["sweep.kick_sets"], dict) or not cfg["sweep.kick_sets"]:
            problems.append("sweep.kick_sets: expected a non-empty mapping name -> rotations")
        else:
            kick_sets = {str(k): rotations(f"sweep.kick_sets.{k}", v)
                         for k, v in cfg["sweep.kick_sets"].items()}
    kr = cfg["sweep.kappa_rotations"]
    if kr is not None and (not isinstance(kr, list) or not all(isinstance(i, int) for i in kr)):
        problems.append("sweep.kappa_rotations: expected a list of rotation indices")
    fmts = cfg["outputs.formats"]
    if not isinstance(fmts, list) or not set(fmts) <= {"csv", "json"}:
        problems.append(f"outputs.formats: expected a subset of [csv, json], got {fmts!r}")

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        raw={k: cfg[k] for k in sorted(cfg)}, chain=chain, initial_state=init, spec=spec,
        tau_k=tau_k, n_kicks=n_kicks, duration=duration,
        stepper=Stepper(dt=dt, min_steps=min_steps), sample_every=every,
        qss_tol=tol, qss_window=window, qss_max_kicks=max_kicks,
        kappa_grid=kappa_grid, kappa_rotations=kr, tau_k_grid=tau_grid, temperatures=temps,
        kick_sets=kick_sets, out_dir=str(cfg["outputs.dir"]), formats=list(fmts),
        store_matrix=bool(cfg["outputs.store_matrix"]),
    )


__all__ = ["AXES", "ConfigError", "ExperimentConfig", "SCHEMA", "SCHEMA_VERSION",
           "apply_overrides", "initial_density", "load_file", "parse_grid",
           "parse_number", "parse_rotations", "validate_config"]
