"""Bundled experiment definitions, one per reproduced figure.

Each preset is a list of ``(name, mode, raw_config, grid)`` jobs; ``mode`` is
``'evolve'`` or ``'sweep'`` and ``grid`` only matters for sweeps.
"""
from __future__ import annotations

import math

PI = math.pi

CANONICAL = {
    "chain.delta": [1.0, 0.5, 0.25],
    "chain.chi": 0.15,
    "chain.chi2": 0.1,
    "chain.beta": 0.1,
    "initial_state": 8,
}

# B and C nearly degenerate, independent pairwise couplings
CLOSE_BC = {
    "chain.delta": [1.0, 0.26, 0.25],
    "chain.coupling": [[0.0, 0.011, 0.1], [0.011, 0.0, 0.15], [0.1, 0.15, 0.0]],
    "chain.beta": 0.1,
    "initial_state": 8,
}

QUBITS = "ABC"

# entanglement scans run over tau_k in [0.5, 40]
ENT_TAU_GRID = {"start": 0.5, "stop": 40.0, "step": 0.5}
# purity scans run over tau_k in [0.25, 25]
PURITY_TAU_GRID = {"start": 0.25, "stop": 25.0, "num": 100}
KAPPA_GRID = {"start": 0.0, "stop": "2pi", "num": 33}


def x_half(q):
    return [[q, "x", "pi/2"]]


def composite(q):
    """pi about x, then pi/2 about y."""
    return [[q, "x", "pi"], [q, "y", "pi/2"]]


def pair_x(i, j):
    return [[i, "x", "pi/2"], [j, "x", "pi/2"]]


def pair_composite(i, j):
    """Qubit j: pi about x then pi/2 about y; qubit i: pi/2 about x."""
    return [[j, "x", "pi"], [j, "y", "pi/2"], [i, "x", "pi/2"]]


def _evolve(chain, temperature, **keys):
    return {**chain, "chain.temperature": temperature, **keys}


def figure_1():
    jobs = []
    for d in (0, 1):
        jobs.append((f"D{d}_nokick", "evolve",
                     _evolve(CANONICAL, d, **{"evolve.duration": 300.0}), None))
        jobs.append((f"D{d}_kickC", "evolve",
                     _evolve(CANONICAL, d, **{"kick.rotations": x_half(2), "kick.tau_k": "pi/2",
                                              "kick.n_kicks": 191}), None))
    return jobs


def figure_2():
    return [(f"D{d}_kick{QUBITS[q]}", "evolve",
             _evolve(CANONICAL, d, **{"kick.rotations": x_half(q), "kick.tau_k": "pi/2",
                                      "kick.n_kicks": 2000, "stepper.sample_every": 50}), None)
            for d in (0, 1) for q in (2, 1, 0)]


def figure_3():
    jobs = []
    for d in (0, 1):
        jobs.append((f"D{d}_nokick", "evolve",
                     _evolve(CANONICAL, d, **{"evolve.duration": 300.0}), None))
        for q in range(3):
            jobs.append((f"D{d}_kick{QUBITS[q]}", "evolve",
                         _evolve(CANONICAL, d, **{"kick.rotations": x_half(q), "kick.tau_k": "pi",
                                                  "kick.n_kicks": 300}), None))
    return jobs


def _kappa_sweep(qubits, temps, q_values):
    return {**CANONICAL, "sweep.kick_sets": {f"kick{QUBITS[q]}": x_half(q) for q in qubits},
            "sweep.temperatures": temps, "sweep.kappa_grid": KAPPA_GRID,
            "sweep.q_grid": q_values}


def figure_4():
    return [("kappa_sweep", "sweep", _kappa_sweep([0], [0, 1], [4, 8, 16]), "both")]


def figure_5():
    return [("kappa_sweep", "sweep", _kappa_sweep([1, 2], [1], [4, 8, 16]), "both")]


def figure_6():
    sets = {}
    for q in range(3):
        sets[f"x_{QUBITS[q]}"] = x_half(q)
        sets[f"xy_{QUBITS[q]}"] = composite(q)
    raw = {**CANONICAL, "sweep.kick_sets": sets, "sweep.temperatures": [0, 1],
           "sweep.tau_k_grid": PURITY_TAU_GRID}
    return [("purity_sweep", "sweep", raw, "tau_k")]


PAIRS = ((0, 1), (0, 2), (1, 2))


def figure_7(tau_k=4 * PI):
    return [(f"D{d}_kick{QUBITS[i]}{QUBITS[j]}", "evolve",
             _evolve(CANONICAL, d, **{"kick.rotations": pair_x(i, j), "kick.tau_k": tau_k,
                                      "kick.n_kicks": 400, "stepper.sample_every": 100}), None)
            for d in (0, 1) for i, j in PAIRS]


def figure_8():
    sets = {}
    for i, j in PAIRS:
        tag = QUBITS[i] + QUBITS[j]
        sets[f"x_{tag}"] = pair_x(i, j)
        sets[f"xy_{tag}"] = pair_composite(i, j)
    raw = {**CANONICAL, "sweep.kick_sets": sets, "sweep.temperatures": [0, 1],
           "sweep.tau_k_grid": ENT_TAU_GRID}
    return [("entanglement_sweep", "sweep", raw, "tau_k")]


def figure_9():
    sets = {"x_BC": pair_x(1, 2), "xy_C_x_B": pair_composite(1, 2),
            "xy_B_x_C": pair_composite(2, 1)}
    raw = {**CLOSE_BC, "sweep.kick_sets": sets, "sweep.temperatures": [0],
           "sweep.tau_k_grid": ENT_TAU_GRID}
    return [("entanglement_fourier_sweep", "sweep", raw, "tau_k")]


FIGURES = {1: figure_1, 2: figure_2, 3: figure_3, 4: figure_4, 5: figure_5,
           6: figure_6, 7: figure_7, 8: figure_8, 9: figure_9}


def figure_jobs(number: int, tau_k=None):
    if number not in FIGURES:
        raise KeyError(f"no preset for figure {number}; available: {sorted(FIGURES)}")
    if number == 7:
        return figure_7(4 * PI if tau_k is None else tau_k)
    return FIGURES[number]()
