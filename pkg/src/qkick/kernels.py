"""Fixed-step RK4 kernels for the master equation between kicks.

Two backends compute the same iterates:

* ``numba``: compiled loops over a flat sparse transfer list (default when
  numba imports).
* ``numpy``: vectorised fancy indexing with a Python stepping loop.

Set ``QKICK_DISABLE_NUMBA=1`` to force the numpy path.

The generator arrives in elementwise form (see
:func:`qkick.dissipator.transfer_tables`)::

    rhs_ij = g_ij rho_ij + sum_l coeff[l]_ij rho[perm[l]_i, perm[l]_j]

and :func:`flatten` turns it into ``(g, dst, src, c)`` over raveled indices,
keeping only nonzero transfers.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("QKICK_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("disabled via QKICK_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

DEFAULT_BACKEND = "numba" if HAVE_NUMBA else "numpy"


def flatten(g, coeff, perm):
    d = g.shape[0]
    dst, src, c = [], [], []
    rows, cols = np.indices((d, d))
    for l in range(perm.shape[0]):
        mask = coeff[l] != 0.0
        dst.append((rows * d + cols)[mask])
        src.append((perm[l][rows] * d + perm[l][cols])[mask])
        c.append(coeff[l][mask])
    return (np.ascontiguousarray(g.ravel(), dtype=np.complex128),
            np.concatenate(dst).astype(np.int64),
            np.concatenate(src).astype(np.int64),
            np.concatenate(c).astype(np.float64))


# ---------------------------------------------------------------- numpy path


def rhs_numpy(rho, g, coeff, perm):
    out = g * rho
    for l in range(perm.shape[0]):
        p = perm[l]
        out += coeff[l] * rho[p][:, p]
    return out


def rk4_numpy(rho, n_steps, dt, g, coeff, perm):
    rho = rho.copy()
    half = 0.5 * dt
    # overflow is reported through the returned step, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(n_steps):
            k1 = rhs_numpy(rho, g, coeff, perm)
            k2 = rhs_numpy(rho + half * k1, g, coeff, perm)
            k3 = rhs_numpy(rho + half * k2, g, coeff, perm)
            k4 = rhs_numpy(rho + dt * k3, g, coeff, perm)
            rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.isfinite(rho.sum()):
                return rho, step + 1
    return rho, -1


def rk4_record_numpy(rho, n_steps, dt, g, coeff, perm, every):
    n_samples = n_steps // every
    out = np.empty((n_samples,) + rho.shape, dtype=np.complex128)
    for s in range(n_samples):
        rho, bad = rk4_numpy(rho, every, dt, g, coeff, perm)
        if bad >= 0:
            return out[:s], rho, s * every + bad
        out[s] = rho
    rho, bad = rk4_numpy(rho, n_steps - n_samples * every, dt, g, coeff, perm)
    if bad >= 0:
        bad += n_samples * every
    return out, rho, bad


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _rhs_flat(x, g, dst, src, c, out):
        for k in range(x.size):
            out[k] = g[k] * x[k]
        for k in range(c.size):
            out[dst[k]] += c[k] * x[src[k]]

    @njit(cache=True, nogil=True)
    def _rk4_flat(x, n_steps, dt, g, dst, src, c, k1, k2, k3, k4, tmp):
        half = 0.5 * dt
        sixth = dt / 6.0
        m = x.size
        for step in range(n_steps):
            _rhs_flat(x, g, dst, src, c, k1)
            for k in range(m):
                tmp[k] = x[k] + half * k1[k]
            _rhs_flat(tmp, g, dst, src, c, k2)
            for k in range(m):
                tmp[k] = x[k] + half * k2[k]
            _rhs_flat(tmp, g, dst, src, c, k3)
            for k in range(m):
                tmp[k] = x[k] + dt * k3[k]
            _rhs_flat(tmp, g, dst, src, c, k4)
            total = 0.0
            for k in range(m):
                x[k] += sixth * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
                total += x[k].real + x[k].imag
            # any inf/nan entry poisons the sum
            if not np.isfinite(total):
                return step + 1
        return -1

    @njit(cache=True, nogil=True)
    def rhs_numba(x, g, dst, src, c):
        out = np.empty_like(x)
        _rhs_flat(x, g, dst, src, c, out)
        return out

    @njit(cache=True, nogil=True)
    def rk4_numba(x, n_steps, dt, g, dst, src, c):
        out = x.copy()
        k1 = np.empty_like(x)
        k2 = np.empty_like(x)
        k3 = np.empty_like(x)
        k4 = np.empty_like(x)
        tmp = np.empty_like(x)
        bad = _rk4_flat(out, n_steps, dt, g, dst, src, c, k1, k2, k3, k4, tmp)
        return out, bad

    @njit(cache=True, nogil=True)
    def rk4_record_numba(x, n_steps, dt, g, dst, src, c, every):
        n_samples = n_steps // every
        samples = np.empty((n_samples, x.size), dtype=np.complex128)
        cur = x.copy()
        k1 = np.empty_like(x)
        k2 = np.empty_like(x)
        k3 = np.empty_like(x)
        k4 = np.empty_like(x)
        tmp = np.empty_like(x)
        for s in range(n_samples):
            bad = _rk4_flat(cur, every, dt, g, dst, src, c, k1, k2, k3, k4, tmp)
            if bad >= 0:
                return samples[:s], cur, s * every + bad
            samples[s] = cur
        bad = _rk4_flat(cur, n_steps - n_samples * every, dt, g, dst, src, c,
                        k1, k2, k3, k4, tmp)
        if bad >= 0:
            bad += n_samples * every
        return samples, cur, bad

else:  # pragma: no cover - exercised only without numba
    rhs_numba = rk4_numba = rk4_record_numba = None


class Tables:
    """Both representations of one generator, built once per configuration."""

    def __init__(self, g, coeff, perm):
        self.g = np.ascontiguousarray(g, dtype=np.complex128)
        self.coeff = np.ascontiguousarray(coeff, dtype=np.float64)
        self.perm = np.ascontiguousarray(perm, dtype=np.int64)
        self.flat = flatten(self.g, self.coeff, self.perm)
        self.dim = self.g.shape[0]


def _resolve(backend):
    backend = backend or DEFAULT_BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable or disabled")
    return backend


def _flat_in(rho):
    return np.ascontiguousarray(rho, dtype=np.complex128).ravel().copy()


def rhs(rho, tables: Tables, backend=None):
    if _resolve(backend) == "numba":
        return rhs_numba(_flat_in(rho), *tables.flat).reshape(rho.shape)
    return rhs_numpy(np.asarray(rho, dtype=np.complex128), tables.g, tables.coeff, tables.perm)


def rk4(rho, n_steps, dt, tables: Tables, backend=None):
    """Advance ``rho`` by ``n_steps`` RK4 steps; returns ``(rho, bad_step)``.

    ``bad_step`` is -1 on success, else the 1-based step at which the state
    stopped being finite.
    """
    d = tables.dim
    if _resolve(backend) == "numba":
        out, bad = rk4_numba(_flat_in(rho), int(n_steps), float(dt), *tables.flat)
        return out.reshape(d, d), bad
    return rk4_numpy(np.asarray(rho, dtype=np.complex128), int(n_steps), float(dt),
                     tables.g, tables.coeff, tables.perm)


def rk4_record(rho, n_steps, dt, tables: Tables, every, backend=None):
    """Like :func:`rk4` but also returns the state after every ``every`` steps."""
    d = tables.dim
    if _resolve(backend) == "numba":
        samples, out, bad = rk4_record_numba(_flat_in(rho), int(n_steps), float(dt),
                                             *tables.flat, int(every))
        return samples.reshape(-1, d, d), out.reshape(d, d), bad
    return rk4_record_numpy(np.asarray(rho, dtype=np.complex128), int(n_steps), float(dt),
                            tables.g, tables.coeff, tables.perm, int(every))
