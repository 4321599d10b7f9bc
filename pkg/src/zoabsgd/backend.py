"""Hot run loop: numba-jitted kernel with a pure-numpy twin.

The per-iteration work (2B objective evaluations, the kernel-weighted
two-point estimate and the three-sequence update) dominates runtime, so it
is implemented twice with identical semantics: a numba ``@njit`` chunk
runner and a vectorized numpy fallback.  ``ZOABSGD_BACKEND=numpy`` or
``=numba`` forces one; the default is numba when importable.  Both are
deterministic given the pre-drawn randoms; they may differ in the last few
ulps because the batch reduction associates differently.

Chunk contract: iterate arrays x, y, z are updated in place; per-iteration
f-gap and distance-to-optimum are written into the output buffers; the
return value is (iterations completed, diverged flag).  Divergence means a
non-finite iterate or distance beyond the guard radius.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .problems import KIND_QUADRATIC, KIND_QUARTIC, KIND_SMOOTH

__all__ = ["NUMBA_AVAILABLE", "active_backend", "get_chunk_runner", "run_zo_chunk"]

try:
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

_env = os.environ.get("ZOABSGD_BACKEND", "").strip().lower()
if _env and _env not in ("numba", "numpy"):
    raise ValueError(f"ZOABSGD_BACKEND must be 'numba' or 'numpy', got {_env!r}")
if _env == "numba" and not NUMBA_AVAILABLE:
    raise ImportError("ZOABSGD_BACKEND=numba requested but numba is not importable")
_ACTIVE = _env or ("numba" if NUMBA_AVAILABLE else "numpy")


def active_backend() -> str:
    return _ACTIVE


def _f_batch_numpy(kind, pp, x_star, X):
    Y = X - x_star
    if kind == KIND_QUADRATIC:
        return 0.5 * np.sum(pp * Y * Y, axis=-1)
    if kind == KIND_QUARTIC:
        return 0.5 * pp[0] * np.sum(Y * Y, axis=-1) + pp[1] * np.sum(Y**4, axis=-1)
    return 0.5 * pp[0] * np.sum(Y * Y, axis=-1) + pp[1] * np.sum(np.cosh(Y) - 1.0, axis=-1)


def _run_chunk_numpy(kind, pp, x_star, f_star, x, y, z,
                     eta, gamma, beta_k, alpha, h, kc,
                     E, R, XI, guard, f_gap, dist):
    n_iter, B, d = E.shape
    for t in range(n_iter):
        e = E[t]
        r = R[t]
        kv = np.polynomial.polynomial.polyval(r, kc)
        f_plus = _f_batch_numpy(kind, pp, x_star, x + h * r[:, None] * e) + XI[t, 0]
        f_minus = _f_batch_numpy(kind, pp, x_star, x - h * r[:, None] * e) + XI[t, 1]
        scale = d * (f_plus - f_minus) / (2.0 * h) * kv
        g = (scale[:, None] * e).mean(axis=0)
        y_new = alpha * z + (1.0 - alpha) * x
        x_new = y_new - eta * g
        z[:] = beta_k * z + (1.0 - beta_k) * y_new - gamma * eta * g
        x[:] = x_new
        y[:] = y_new
        f_gap[t] = _f_batch_numpy(kind, pp, x_star, x) - f_star
        dist[t] = float(np.linalg.norm(x - x_star))
        if not (math.isfinite(f_gap[t]) and math.isfinite(dist[t])) or dist[t] > guard:
            return t + 1, True
    return n_iter, False


if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _f_point_numba(kind, pp, x_star, v):
        d = v.shape[0]
        total = 0.0
        if kind == 0:
            for i in range(d):
                yi = v[i] - x_star[i]
                total += pp[i] * yi * yi
            return 0.5 * total
        if kind == 1:
            mu, c4 = pp[0], pp[1]
            for i in range(d):
                yi = v[i] - x_star[i]
                total += 0.5 * mu * yi * yi + c4 * yi * yi * yi * yi
            return total
        mu, c = pp[0], pp[1]
        for i in range(d):
            yi = v[i] - x_star[i]
            total += 0.5 * mu * yi * yi + c * (math.cosh(yi) - 1.0)
        return total

    @njit(cache=True)
    def _run_chunk_numba(kind, pp, x_star, f_star, x, y, z,
                         eta, gamma, beta_k, alpha, h, kc,
                         E, R, XI, guard, f_gap, dist):
        n_iter, B, d = E.shape
        deg = kc.shape[0]
        g = np.empty(d)
        xp = np.empty(d)
        xm = np.empty(d)
        for t in range(n_iter):
            for j in range(d):
                g[j] = 0.0
            for i in range(B):
                r = R[t, i]
                kv = kc[deg - 1]
                for a in range(deg - 2, -1, -1):
                    kv = kv * r + kc[a]
                for j in range(d):
                    step = h * r * E[t, i, j]
                    xp[j] = x[j] + step
                    xm[j] = x[j] - step
                f_plus = _f_point_numba(kind, pp, x_star, xp) + XI[t, 0, i]
                f_minus = _f_point_numba(kind, pp, x_star, xm) + XI[t, 1, i]
                scale = d * (f_plus - f_minus) / (2.0 * h) * kv
                for j in range(d):
                    g[j] += scale * E[t, i, j]
            for j in range(d):
                g[j] /= B
            dist_sq = 0.0
            ok = True
            for j in range(d):
                y_new = alpha * z[j] + (1.0 - alpha) * x[j]
                x_new = y_new - eta * g[j]
                z[j] = beta_k * z[j] + (1.0 - beta_k) * y_new - gamma * eta * g[j]
                x[j] = x_new
                y[j] = y_new
                diff = x[j] - x_star[j]
                dist_sq += diff * diff
                if not math.isfinite(x_new):
                    ok = False
            f_gap[t] = _f_point_numba(kind, pp, x_star, x) - f_star
            dist[t] = math.sqrt(dist_sq)
            if not ok or not math.isfinite(f_gap[t]) or dist[t] > guard:
                return t + 1, True
        return n_iter, False


def get_chunk_runner(backend: str | None = None):
    """Chunk runner for a specific backend (default: the active one)."""
    name = backend or _ACTIVE
    if name == "numpy":
        return _run_chunk_numpy
    if name == "numba":
        if not NUMBA_AVAILABLE:
            raise ImportError("numba backend requested but numba is not importable")
        return _run_chunk_numba
    raise ValueError(f"unknown backend {name!r}")


run_zo_chunk = get_chunk_runner()
