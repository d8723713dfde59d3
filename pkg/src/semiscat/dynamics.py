"""Propagators built from the stationary families.

Autonomous case: the coupled evolution is the conjugated free-with-barrier
evolution, exp(-i t H_cpl) = W exp(-i t H_0) W^(-1), so in band coefficients
the deviation between the two dynamics is

    d(t) = (I + D) exp(-i t Lam) (I + D)^(-1) c0 - exp(-i t Lam) c0,

with Lam = diag(k^2) and D the wave-operator coupling matrix.  This is exact
given the family, so fitted scale exponents are not polluted by time stepping.

Non-autonomous case: the evolution of a time-dependent barrier is approximated
by freezing the potential on each step at its right endpoint and applying the
frozen propagator spectrally:

    u <- [F* + S_delta] exp(-i tau Lam) (I + D)^(-1) F u,

where all maps belong to the frozen potential of that cell.  Cell families are
the expensive part, so they are cached keyed by the (quantized) amplitude of
the frozen potential; the base spectral data is theta-independent and the
correction table is attached on top, letting the coupled and uncoupled
evolutions share every Jost solve.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from .grids import SpatialGrid, SpectralGrid, edge_mass
from .greenfun import DefectBasis, combine_defects
from .integrate import NumericalError
from .krein import correction_coefficients
from .potentials import Potential, TimeFamily
from .spectral import EigenFamily

__all__ = [
    "autonomous_deviation",
    "CellFamily",
    "build_cell_family",
    "FrozenFamilyCache",
    "stepwise_evolve",
    "stepwise_propagate",
    "stepwise_convergence",
    "nonautonomous_deviation",
    "freezing_envelope",
]


def _check_contained(grid: SpatialGrid, phi: np.ndarray,
                     tol: float = 1e-8) -> None:
    frac = edge_mass(grid, phi)
    if frac > tol:
        raise NumericalError(
            "initial state has edge mass fraction %.3e > %.1e; "
            "enlarge the spatial box" % (frac, tol))


def autonomous_deviation(cell: "CellFamily", phi: np.ndarray,
                         ts: np.ndarray) -> tuple:
    """Band-coefficient deviation between coupled and uncoupled evolution.

    With Lam = diag(k^2) and the coupling matrix D of the frozen family,
    d(t) = (I + D) exp(-i t Lam) (I + D)^(-1) c0 - exp(-i t Lam) c0 is the
    exact conjugation mismatch; the deviation ||d(t)|| / ||c0|| is measured
    in the Plancherel norm of the band for each requested time, alongside
    the norm drift of the coupled coefficients.  All products are
    matrix-free.
    """
    _check_contained(cell.grid, phi)
    c0 = cell.forward(phi)
    base = cell.kgrid.norm(c0)
    ts = np.asarray(ts, dtype=float)
    if cell.dpsi is None:
        return np.zeros(len(ts)), np.zeros(len(ts))
    u0 = cell.solve_coupling(c0)
    devs = np.empty(len(ts))
    drifts = np.empty(len(ts))
    for i, t in enumerate(ts):
        ph = np.exp(-1j * cell.lam * t)
        pu = ph * u0
        coupled = pu + cell.forward(cell.synth_delta(pu))
        devs[i] = cell.kgrid.norm(coupled - ph * c0) / base
        drifts[i] = abs(cell.kgrid.norm(coupled) / base - 1.0)
    return devs, drifts


class CellFamily:
    """Spectral data of one frozen potential, ready to step a state.

    Holds only the eigenfunction table and (for theta != 0) the correction
    table; the Jost tables are released after construction so cached cells
    stay small.
    """

    def __init__(self, pot: Potential, theta: complex, h: float,
                 grid: SpatialGrid, kgrid: SpectralGrid,
                 psi0: np.ndarray, dpsi):
        self.pot = pot
        self.theta = theta
        self.h = h
        self.grid = grid
        self.kgrid = kgrid
        self.psi0 = psi0
        self.dpsi = dpsi
        self.lam = kgrid.k ** 2
        self.norm_factor = 1.0 / np.sqrt(2.0 * np.pi * h)
        self._dense = None

    def forward(self, phi: np.ndarray) -> np.ndarray:
        return self.norm_factor * (self.psi0.conj() @ (self.grid.weights * phi))

    def adjoint(self, c: np.ndarray) -> np.ndarray:
        return self.norm_factor * ((self.kgrid.w * c) @ self.psi0)

    def synth_delta(self, c: np.ndarray) -> np.ndarray:
        return self.norm_factor * ((self.kgrid.w * c) @ self.dpsi)

    def solve_coupling(self, c: np.ndarray, tol: float = 1e-12,
                       max_iter: int = 64) -> np.ndarray:
        """(I + D)^(-1) c without forming D: matrix-free Neumann iteration."""
        if self.dpsi is None:
            return c
        scale = np.linalg.norm(c)
        if scale == 0.0:
            return np.zeros_like(c)
        u = c.copy()
        for _ in range(max_iter):
            nxt = c - self.forward(self.synth_delta(u))
            step = np.linalg.norm(nxt - u)
            u = nxt
            if step <= tol * scale:
                return u
        if self._dense is None:
            left = self.psi0.conj() * self.grid.weights
            self._dense = (self.norm_factor ** 2
                           * (left @ self.dpsi.T) * self.kgrid.w)
            self._dense[np.diag_indices_from(self._dense)] += 1.0
        u = np.linalg.solve(self._dense, c)
        if not np.isfinite(u).all():
            raise NumericalError("cell coupling solve diverged")
        return u

    def step(self, tau: float, u: np.ndarray,
             with_correction: bool | None = None) -> np.ndarray:
        """One frozen-cell step exp(-i tau H) u through the spectral family.

        with_correction=False evolves with the uncoupled operator of the same
        frozen potential (used for deviation studies on shared cells).
        """
        if with_correction is None:
            with_correction = self.dpsi is not None
        c = self.forward(u)
        if with_correction and self.dpsi is not None:
            c = self.solve_coupling(c)
        p = np.exp(-1j * self.lam * tau) * c
        out = self.adjoint(p)
        if with_correction and self.dpsi is not None:
            out = out + self.synth_delta(p)
        return out


def build_cell_family(pot: Potential, theta: complex, h: float,
                      grid: SpatialGrid, kgrid: SpectralGrid,
                      mode: str = "direct", rtol: float = 1e-12,
                      block: int = 256) -> CellFamily:
    """Build the slim spectral data of one frozen potential."""
    ef = EigenFamily.build(pot, h, grid, kgrid, rtol=rtol)
    dpsi = None
    if theta != 0:
        n_rows = kgrid.n
        dpsi = np.empty((n_rows, grid.n), dtype=complex)
        for start in range(0, n_rows, block):
            idx = np.arange(start, min(start + block, n_rows))
            basis, chip, chim, v, _ = ef.select(idx)
            d = correction_coefficients(basis, theta, v, mode=mode,
                                        trace_half=True)
            dpsi[idx] = combine_defects(grid, basis, chip, chim, d)
    return CellFamily(pot, theta, h, grid, kgrid, ef.psi0, dpsi)


class FrozenFamilyCache:
    """LRU cache of cell families over a time-dependent potential.

    Keys are the frozen amplitudes quantized at a fixed resolution, so time
    points that freeze to the same potential (symmetric schedules, nested step
    ladders) share one spectral build.
    """

    def __init__(self, family: TimeFamily, theta: complex, h: float,
                 grid: SpatialGrid, kgrid: SpectralGrid, mode: str = "direct",
                 rtol: float = 1e-12, cap: int = 8, quantum: float = 1e-12):
        self.family = family
        self.theta = theta
        self.h = h
        self.grid = grid
        self.kgrid = kgrid
        self.mode = mode
        self.rtol = rtol
        self.cap = cap
        self.quantum = quantum
        self.builds = 0
        self.hits = 0
        self._store: OrderedDict = OrderedDict()

    def at_amplitude(self, amp: float) -> CellFamily:
        key = int(round(amp / self.quantum))
        hit = self._store.get(key)
        if hit is not None:
            self._store.move_to_end(key)
            self.hits += 1
            return hit
        pot = Potential(a=self.family.base.a, b=self.family.base.b,
                        v0=self.family.base.v0, bump=amp, profile="well4")
        cell = build_cell_family(pot, self.theta, self.h, self.grid,
                                 self.kgrid, mode=self.mode, rtol=self.rtol)
        self._store[key] = cell
        self.builds += 1
        while len(self._store) > self.cap:
            self._store.popitem(last=False)
        return cell

    def at_time(self, t: float) -> CellFamily:
        return self.at_amplitude(self.family.amplitude(t))


def stepwise_evolve(cache: FrozenFamilyCache, phi: np.ndarray, t_final: float,
                    n_steps: int, with_correction: bool | None = None) -> np.ndarray:
    """Right-endpoint frozen-cell evolution over [0, t_final] in n_steps."""
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    _check_contained(cache.grid, phi)
    tau = t_final / n_steps
    u = np.asarray(phi, dtype=complex)
    for j in range(n_steps):
        cell = cache.at_time((j + 1) * tau)
        u = cell.step(tau, u, with_correction=with_correction)
    return u


def stepwise_propagate(cache: FrozenFamilyCache, phi: np.ndarray,
                       horizon: float, n_steps: int, s: float = 0.0,
                       t: float | None = None,
                       with_correction: bool | None = None) -> np.ndarray:
    """Two-parameter frozen-cell propagator U_n(t, s) on a fixed partition.

    The partition of [0, horizon] into n_steps cells is fixed once; the state
    is carried from s to t through the cells the window intersects, each with
    its right-endpoint frozen potential, so cell-aligned windows compose
    exactly (the cocycle property holds by construction).
    """
    if t is None:
        t = horizon
    if not 0.0 <= s <= t <= horizon + 1e-12 * max(horizon, 1.0):
        raise ValueError("need 0 <= s <= t <= horizon")
    _check_contained(cache.grid, phi)
    tau = horizon / n_steps
    u = np.asarray(phi, dtype=complex)
    cur = s
    while cur < t - 1e-12 * tau:
        j = int(np.floor(cur / tau + 1e-12)) + 1
        cell_end = min(j * tau, t)
        cell = cache.at_time(j * tau)
        u = cell.step(cell_end - cur, u, with_correction=with_correction)
        cur = cell_end
    return u


def stepwise_convergence(family: TimeFamily, theta: complex, h: float,
                         grid: SpatialGrid, kgrid: SpectralGrid,
                         phi: np.ndarray, t_final: float, steps,
                         n_ref: int, mode: str = "direct",
                         rtol: float = 1e-12, cap: int = 8) -> tuple:
    """Self-convergence of the frozen-cell propagator against a fine ladder.

    Returns (step counts, errors vs the n_ref evolution, reference drift),
    errors in the grid norm relative to ||phi||.
    """
    steps = [int(s) for s in steps]
    if any(s >= n_ref for s in steps):
        raise ValueError("reference step count must exceed every tested count")
    cache = FrozenFamilyCache(family, theta, h, grid, kgrid, mode=mode,
                              rtol=rtol, cap=cap)
    base = grid.norm(phi)
    u_ref = stepwise_evolve(cache, phi, t_final, n_ref)
    drift = abs(grid.norm(u_ref) / base - 1.0)
    errs = []
    for s in steps:
        u_s = stepwise_evolve(cache, phi, t_final, s)
        errs.append(grid.norm(u_s - u_ref) / base)
    return np.array(steps, dtype=float), np.array(errs), drift


def ladder_convergence(family: TimeFamily, theta: complex, h: float,
                       grid: SpatialGrid, kgrid: SpectralGrid,
                       phi: np.ndarray, t_final: float, steps,
                       n_ref: int, mode: str = "direct",
                       rtol: float = 1e-12) -> tuple:
    """Self-convergence ladder driven by one synchronized fine sweep.

    Requires every tested step count to divide n_ref.  The right endpoints of
    a coarse partition are then reference-cell boundaries, so one pass over
    the n_ref fine cells builds each frozen operator exactly once and
    advances the reference state and every ladder state together: whenever
    the fine index j is a multiple of n_ref / n, the n-cell state takes one
    step of size t_final / n with the current cell.  Numerically equivalent
    to stepwise_convergence (same frozen potentials, same step sequence per
    state) at a fraction of the build cost.

    Returns (step counts, errors vs the n_ref evolution, reference drift,
    reference state), errors in the grid norm relative to ||phi||.
    """
    steps = [int(s) for s in steps]
    if any(s >= n_ref for s in steps):
        raise ValueError("reference step count must exceed every tested count")
    if any(n_ref % s for s in steps):
        raise ValueError("every step count must divide n_ref")
    _check_contained(grid, phi)
    base = grid.norm(phi)
    tau = t_final / n_ref
    u_ref = np.asarray(phi, dtype=complex)
    states = {s: np.asarray(phi, dtype=complex) for s in steps}
    for j in range(1, n_ref + 1):
        cell = build_cell_family(family.frozen(j * tau), theta, h, grid,
                                 kgrid, mode=mode, rtol=rtol)
        u_ref = cell.step(tau, u_ref)
        for s in steps:
            if j % (n_ref // s) == 0:
                states[s] = cell.step(t_final / s, states[s])
    drift = abs(grid.norm(u_ref) / base - 1.0)
    errs = [grid.norm(states[s] - u_ref) / base for s in steps]
    return np.array(steps, dtype=float), np.array(errs), drift, u_ref


def freezing_envelope(family: TimeFamily, t_final: float, n: int,
                      n_ref: int, samples: int = 4096) -> float:
    """Duhamel budget for the gap between two freezing resolutions.

    The n-cell and n_ref-cell evolutions differ, to first order, by the time
    integral of the sup-norm gap between the two frozen staircases,

        int_0^T || V(ceil_n(t)) - V(ceil_ref(t)) ||_inf dt,

    evaluated here by midpoint quadrature (exact once ``samples`` is a
    multiple of both cell counts, since the integrand is then piecewise
    constant on the quadrature cells).
    """
    lcm = int(np.lcm(int(n), int(n_ref)))
    if lcm <= 8 * samples:
        m = lcm * max(1, -(-samples // lcm))
    else:
        m = samples
    ts = (np.arange(m) + 0.5) * (t_final / m)

    def staircase(cells: int) -> np.ndarray:
        frozen = np.ceil(ts * cells / t_final) * (t_final / cells)
        return np.array([family.amplitude(tf) for tf in frozen])

    # frozen potentials share the bump shape (sup 1), so the sup-norm gap
    # equals the amplitude gap
    gap = np.abs(staircase(n) - staircase(n_ref))
    return float(np.sum(gap) * (t_final / m))


def nonautonomous_deviation(family: TimeFamily, theta: complex, h: float,
                            grid: SpatialGrid, kgrid: SpectralGrid,
                            phi: np.ndarray, t_final: float, n_steps: int,
                            t_samples: int = 33, mode: str = "direct",
                            rtol: float = 1e-12, cap: int = 8) -> tuple:
    """Deviation between coupled and uncoupled frozen-cell evolutions.

    Both states are stepped through the same cached cells, so every Jost
    build is shared; only the correction synthesis differs.  The deviation is
    recorded on a uniform grid of ``t_samples`` times (cell-aligned, so the
    samples are exact intermediate states of the single evolution).  Returns
    (sample times, relative deviations, coupled-state norm drifts).
    """
    if t_samples < 2 or n_steps % (t_samples - 1):
        raise ValueError("n_steps must be a multiple of t_samples - 1")
    _check_contained(grid, phi)
    cache = FrozenFamilyCache(family, theta, h, grid, kgrid, mode=mode,
                              rtol=rtol, cap=cap)
    tau = t_final / n_steps
    every = n_steps // (t_samples - 1)
    base = grid.norm(phi)
    u_cpl = np.asarray(phi, dtype=complex)
    u_unc = np.asarray(phi, dtype=complex)
    ts = [0.0]
    devs = [0.0]
    drifts = [0.0]
    for j in range(n_steps):
        cell = cache.at_time((j + 1) * tau)
        u_cpl = cell.step(tau, u_cpl, with_correction=True)
        u_unc = cell.step(tau, u_unc, with_correction=False)
        if (j + 1) % every == 0:
            ts.append((j + 1) * tau)
            devs.append(grid.norm(u_cpl - u_unc) / base)
            drifts.append(abs(grid.norm(u_cpl) / base - 1.0))
    return np.array(ts), np.array(devs), np.array(drifts)
