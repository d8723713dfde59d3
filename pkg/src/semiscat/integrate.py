"""Propagation of u'' = q(x) u across the barrier.

The workhorse is a two-stage Gauss collocation Magnus scheme of order four for
the first-order system Y' = A(x) Y, A = [[0, 1], [q, 0]]. On a step of width s
with stage values q1, q2 at the Gauss points,

    Omega = [[d, s], [s*qbar, -d]],  qbar = (q1+q2)/2,  d = sqrt(3) s^2 (q1-q2)/12,

and exp(Omega) has the closed form cosh(mu) I + sinhc(mu) Omega with
mu^2 = d^2 + s^2 qbar, which is evaluated branch-free (cosh and sinhc are even).
For x-independent q the single step is exact for any width, so piecewise
constant barriers are integrated to rounding error.

Steps adapt by doubling: an interval is accepted once the 1-vs-2 substep
deviation falls below rtol, shared across the whole batch of spectral
parameters. Strong evanescent growth is handled in log-amplitude form: whenever
a column grows past a magnitude threshold it is renormalized and the log of the
extracted factor accumulated, so only the O(1) shape is propagated in floating
point. The returned logscale array carries the accumulated exponents.
"""

from __future__ import annotations

import numpy as np

_C1 = 0.5 - np.sqrt(3.0) / 6.0
_C2 = 0.5 + np.sqrt(3.0) / 6.0
_RENORM = 1e120


class NumericalError(RuntimeError):
    """Raised when an integration or solve cannot reach its tolerance."""


def _sinhc(mu: np.ndarray) -> np.ndarray:
    """sinh(mu)/mu, stable as mu -> 0."""
    mu = np.asarray(mu)
    small = np.abs(mu) < 1e-4
    out = np.empty_like(mu)
    ms = mu[small]
    out[small] = 1.0 + ms * ms / 6.0 * (1.0 + ms * ms / 20.0)
    mb = mu[~small]
    out[~small] = np.sinh(mb) / mb
    return out


def _step(qfun, x0: float, s: float, u: np.ndarray, v: np.ndarray):
    """Advance (u, v) by one Gauss-Magnus step of width s starting at x0."""
    q1 = qfun(x0 + _C1 * s)
    q2 = qfun(x0 + _C2 * s)
    qbar = 0.5 * (q1 + q2)
    d = (np.sqrt(3.0) / 12.0) * s * s * (q1 - q2)
    mu = np.sqrt(d * d + (s * s) * qbar + 0j)
    ch = np.cosh(mu)
    sh = _sinhc(mu)
    un = (ch + sh * d) * u + (sh * s) * v
    vn = (sh * s * qbar) * u + (ch - sh * d) * v
    return un, vn


def _span(qfun, x0: float, x1: float, u, v, nsub: int):
    """nsub equal Gauss-Magnus steps across [x0, x1]."""
    s = (x1 - x0) / nsub
    for j in range(nsub):
        u, v = _step(qfun, x0 + j * s, s, u, v)
    return u, v


def propagate(qfun, xs: np.ndarray, y0: np.ndarray, rtol: float = 1e-12,
              max_depth: int = 14):
    """Propagate Y' = [[0,1],[q,0]] Y through the breakpoints xs.

    qfun(x) -> (m,) complex batch of q values at scalar x. xs is monotone in
    either direction; y0 has shape (2, m). Returns (ys, logscale) with
    ys[j] the renormalized value at xs[j] and logscale[j] the per-column log
    factor, so the true solution is ys[j] * exp(logscale[j]).
    """
    xs = np.asarray(xs, dtype=float)
    y0 = np.asarray(y0, dtype=complex)
    if y0.ndim == 1:
        y0 = y0[:, None]
    m = y0.shape[1]
    ys = np.empty((xs.size, 2, m), dtype=complex)
    logs = np.zeros((xs.size, m))
    u, v = y0[0].copy(), y0[1].copy()
    ys[0, 0], ys[0, 1] = u, v
    for j in range(xs.size - 1):
        x0, x1 = xs[j], xs[j + 1]
        if x1 == x0:
            ys[j + 1, 0], ys[j + 1, 1] = u, v
            logs[j + 1] = logs[j]
            continue
        nsub = 1
        ua, va = _span(qfun, x0, x1, u, v, 1)
        for depth in range(max_depth):
            ub, vb = _span(qfun, x0, x1, u, v, 2 * nsub)
            scale = np.maximum(np.maximum(np.abs(ub), np.abs(vb)), 1e-300)
            err = np.max(np.maximum(np.abs(ua - ub), np.abs(va - vb)) / scale)
            if err <= rtol:
                break
            ua, va = ub, vb
            nsub *= 2
        else:
            raise NumericalError(f"step [{x0}, {x1}] did not converge to rtol={rtol}")
        u, v = ub, vb
        logs[j + 1] = logs[j]
        mag = np.maximum(np.abs(u), np.abs(v))
        if np.any(mag > _RENORM) or not np.all(np.isfinite(mag)):
            if not np.all(np.isfinite(u)) or not np.all(np.isfinite(v)):
                raise NumericalError("overflow inside a single step; refine breakpoints")
            big = mag > _RENORM
            u[big] /= mag[big]
            v[big] /= mag[big]
            logs[j + 1, big] += np.log(mag[big])
        ys[j + 1, 0], ys[j + 1, 1] = u, v
    return ys, logs
