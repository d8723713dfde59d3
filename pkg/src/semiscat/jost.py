"""Jost solutions, Wronskians and scattering data.

Conventions, with zeta the spectral parameter (Im zeta >= 0) and h the small
scale: chi_plus solves -h^2 u'' + V u = zeta^2 u with chi_plus = e^{i zeta x/h}
for x > b, and chi_minus = e^{-i zeta x/h} for x < a. Both are entire in zeta
and exact plane waves outside the barrier, so only the interior (a, b) is ever
integrated numerically; exterior values come from closed forms.

For real k > 0, chi_plus = c1 e^{ikx/h} + c2 e^{-ikx/h} on x < a and

    w  = W(chi_plus(., k),  chi_minus(., k))  = -2ik c1 / h,
    w0 = W(chi_plus(., -k), chi_minus(., k))  = -2ik conj(c2) / h,
    T = 1/c1,  R = c2/c1,

with W(f, g) = f g' - f' g. Unitarity |c1|^2 - |c2|^2 = 1 is equivalent to
|w|^2 = (2k/h)^2 + |w0|^2 and to |T|^2 + |R|^2 = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpatialGrid
from .integrate import NumericalError, propagate
from .potentials import Potential

_FOLD_CAP = 650.0  # exp argument cap when folding log-amplitudes back in


def _interior_breakpoints(grid: SpatialGrid | None, pot: Potential, h: float,
                          descending: bool) -> np.ndarray:
    """Breakpoints through (a, b): grid interior nodes, or a fallback mesh."""
    a, b = pot.a, pot.b
    if grid is not None:
        xs = np.concatenate([[a], grid.x[grid.interior], [b]])
    else:
        m = max(16, int(np.ceil(8 * (b - a) / h)))
        xs = np.linspace(a, b, m + 1)
    return xs[::-1] if descending else xs


def _fold(vals: np.ndarray, logs: np.ndarray) -> np.ndarray:
    if np.max(logs) > _FOLD_CAP:
        raise NumericalError("amplitude too large to fold; keep log form")
    return vals * np.exp(logs)


def _qfun(pot: Potential, zetas: np.ndarray, h: float):
    z2 = zetas * zetas
    h2 = h * h

    def q(x: float) -> np.ndarray:
        return (pot.inside(x) - z2) / h2

    return q


@dataclass
class JostSolution:
    """One Jost solution tabulated on a grid, exact outside the barrier."""

    zeta: complex
    h: float
    side: int  # +1 for chi_plus, -1 for chi_minus
    grid: SpatialGrid
    values: np.ndarray
    derivs: np.ndarray
    chi_a: complex
    dchi_a: complex
    chi_b: complex
    dchi_b: complex


def _integrate_side(pot: Potential, zetas: np.ndarray, h: float,
                    grid: SpatialGrid | None, side: int, rtol: float):
    """Interior sweep for one side; returns values/derivs at the breakpoints.

    Output arrays are ordered ascending in x, first entry at a, last at b.
    """
    zetas = np.asarray(zetas, dtype=complex).ravel()
    a, b = pot.a, pot.b
    if side > 0:
        xs = _interior_breakpoints(grid, pot, h, descending=True)
        u0 = np.exp(1j * zetas * b / h)
        y0 = np.stack([u0, (1j * zetas / h) * u0])
    else:
        xs = _interior_breakpoints(grid, pot, h, descending=False)
        u0 = np.exp(-1j * zetas * a / h)
        y0 = np.stack([u0, (-1j * zetas / h) * u0])
    ys, logs = propagate(_qfun(pot, zetas, h), xs, y0, rtol=rtol)
    vals = _fold(ys[:, 0, :], logs)
    ders = _fold(ys[:, 1, :], logs)
    if side > 0:
        vals, ders = vals[::-1], ders[::-1]
    return vals, ders  # (n_break, m), ascending in x


def _exterior_coeffs_left(zeta, h, chi_a, dchi_a, a):
    """chi = cp e^{i zeta x/h} + cm e^{-i zeta x/h} for x <= a, from traces at a."""
    rp = 0.5 * (chi_a + (h / (1j * zeta)) * dchi_a)
    rm = 0.5 * (chi_a - (h / (1j * zeta)) * dchi_a)
    return rp * np.exp(-1j * zeta * a / h), rm * np.exp(1j * zeta * a / h)


def _exterior_coeffs_right(zeta, h, chi_b, dchi_b, b):
    """chi = cp e^{i zeta x/h} + cm e^{-i zeta x/h} for x >= b, from traces at b."""
    cp = 0.5 * (chi_b + (h / (1j * zeta)) * dchi_b) * np.exp(-1j * zeta * b / h)
    cm = 0.5 * (chi_b - (h / (1j * zeta)) * dchi_b) * np.exp(1j * zeta * b / h)
    return cp, cm


def solve_jost(pot: Potential, zeta: complex, h: float, grid: SpatialGrid,
               side: int, rtol: float = 1e-12) -> JostSolution:
    """Solve for chi_plus (side=+1) or chi_minus (side=-1) on the grid."""
    zetas = np.array([zeta], dtype=complex)
    vals, ders = _integrate_side(pot, zetas, h, grid, side, rtol)
    chi_a, dchi_a = vals[0, 0], ders[0, 0]
    chi_b, dchi_b = vals[-1, 0], ders[-1, 0]
    x = grid.x
    values = np.empty(grid.n, dtype=complex)
    derivs = np.empty(grid.n, dtype=complex)
    values[grid.interior] = vals[1:-1, 0]
    derivs[grid.interior] = ders[1:-1, 0]
    if side > 0:
        xr = x[grid.right]
        values[grid.right] = np.exp(1j * zeta * xr / h)
        derivs[grid.right] = (1j * zeta / h) * values[grid.right]
        cp, cm = _exterior_coeffs_left(zeta, h, chi_a, dchi_a, pot.a)
        xl = x[grid.left]
        ep, em = np.exp(1j * zeta * xl / h), np.exp(-1j * zeta * xl / h)
        values[grid.left] = cp * ep + cm * em
        derivs[grid.left] = (1j * zeta / h) * (cp * ep - cm * em)
    else:
        xl = x[grid.left]
        values[grid.left] = np.exp(-1j * zeta * xl / h)
        derivs[grid.left] = (-1j * zeta / h) * values[grid.left]
        cp, cm = _exterior_coeffs_right(zeta, h, chi_b, dchi_b, pot.b)
        xr = x[grid.right]
        ep, em = np.exp(1j * zeta * xr / h), np.exp(-1j * zeta * xr / h)
        values[grid.right] = cp * ep + cm * em
        derivs[grid.right] = (1j * zeta / h) * (cp * ep - cm * em)
    return JostSolution(zeta=zeta, h=h, side=side, grid=grid, values=values,
                        derivs=derivs, chi_a=chi_a, dchi_a=dchi_a,
                        chi_b=chi_b, dchi_b=dchi_b)


def solve_jost_pair(pot: Potential, zeta: complex, h: float, grid: SpatialGrid,
                    rtol: float = 1e-12):
    return (solve_jost(pot, zeta, h, grid, +1, rtol),
            solve_jost(pot, zeta, h, grid, -1, rtol))


def wronskian(plus: JostSolution, minus: JostSolution) -> complex:
    """W(chi_plus, chi_minus), evaluated from the traces at a."""
    return plus.chi_a * minus.dchi_a - plus.dchi_a * minus.chi_a


def wronskian_spread(plus: JostSolution, minus: JostSolution) -> float:
    """Relative disagreement of the Wronskian evaluated at a and at b."""
    wa = plus.chi_a * minus.dchi_a - plus.dchi_a * minus.chi_a
    wb = plus.chi_b * minus.dchi_b - plus.dchi_b * minus.chi_b
    return abs(wa - wb) / max(abs(wa), 1e-300)


@dataclass
class ScatteringData:
    """Transmission/reflection data for a batch of real momenta k > 0."""

    k: np.ndarray
    h: float
    c1: np.ndarray
    c2: np.ndarray
    t_coeff: np.ndarray
    r_coeff: np.ndarray
    w: np.ndarray
    w0: np.ndarray

    def unitarity_defect(self) -> np.ndarray:
        return np.abs(np.abs(self.t_coeff) ** 2 + np.abs(self.r_coeff) ** 2 - 1.0)

    def wronskian_identity_defect(self) -> np.ndarray:
        """Relative defect of |w|^2 = (2k/h)^2 + |w0|^2."""
        lhs = np.abs(self.w) ** 2
        rhs = (2.0 * self.k / self.h) ** 2 + np.abs(self.w0) ** 2
        return np.abs(lhs - rhs) / np.abs(lhs)


def scattering_data(pot: Potential, k, h: float, grid: SpatialGrid | None = None,
                    rtol: float = 1e-12) -> ScatteringData:
    """Scattering coefficients from the chi_plus traces at a.

    c1 and c2 are the plane-wave coefficients of chi_plus on x < a; then
    T = 1/c1, R = c2/c1, w = -2ik c1/h and w0 = -2ik conj(c2)/h.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(k <= 0):
        raise ValueError("scattering data is parametrized by k > 0")
    vals, ders = _integrate_side(pot, k.astype(complex), h, grid, +1, rtol)
    chi_a, dchi_a = vals[0], ders[0]
    c1, c2 = _exterior_coeffs_left(k.astype(complex), h, chi_a, dchi_a, pot.a)
    w = -2j * k * c1 / h
    w0 = -2j * k * np.conj(c2) / h
    return ScatteringData(k=k, h=h, c1=c1, c2=c2, t_coeff=1.0 / c1,
                          r_coeff=c2 / c1, w=w, w0=w0)


@dataclass
class JostFamily:
    """Jost data for one barrier and scale over a positive momentum band.

    chip/chim hold values on the full grid, one row per k. Trace derivatives at
    a and b are kept separately; grid-level derivatives are not stored since
    every downstream object (defect elements, eigenfunctions) only needs
    derivative traces at the interfaces.
    """

    pot: Potential
    h: float
    grid: SpatialGrid
    kpos: np.ndarray
    chip: np.ndarray  # (m, n) chi_plus values
    chim: np.ndarray  # (m, n) chi_minus values
    chip_a: np.ndarray
    dchip_a: np.ndarray
    chip_b: np.ndarray
    dchip_b: np.ndarray
    chim_a: np.ndarray
    dchim_a: np.ndarray
    chim_b: np.ndarray
    dchim_b: np.ndarray
    w: np.ndarray
    w0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    @property
    def t_coeff(self) -> np.ndarray:
        return 1.0 / self.c1

    @property
    def r_coeff(self) -> np.ndarray:
        return self.c2 / self.c1


def build_jost_family(pot: Potential, kpos: np.ndarray, h: float,
                      grid: SpatialGrid, rtol: float = 1e-12) -> JostFamily:
    """Solve both Jost families over a batch of positive momenta."""
    kpos = np.asarray(kpos, dtype=float).ravel()
    if np.any(kpos <= 0):
        raise ValueError("kpos must be positive")
    zk = kpos.astype(complex)
    m, n = kpos.size, grid.n
    x = grid.x

    pv, pd = _integrate_side(pot, zk, h, grid, +1, rtol)
    mv, md = _integrate_side(pot, zk, h, grid, -1, rtol)
    chip_a, dchip_a = pv[0], pd[0]
    chip_b, dchip_b = pv[-1], pd[-1]
    chim_a, dchim_a = mv[0], md[0]
    chim_b, dchim_b = mv[-1], md[-1]

    chip = np.empty((m, n), dtype=complex)
    chim = np.empty((m, n), dtype=complex)
    chip[:, grid.interior] = pv[1:-1].T
    chim[:, grid.interior] = mv[1:-1].T

    phase_r = np.exp(1j * np.outer(kpos, x[grid.right]) / h)
    chip[:, grid.right] = phase_r
    c1, c2 = _exterior_coeffs_left(zk, h, chip_a, dchip_a, pot.a)
    el_p = np.exp(1j * np.outer(kpos, x[grid.left]) / h)
    chip[:, grid.left] = c1[:, None] * el_p + c2[:, None] * np.conj(el_p)

    chim[:, grid.left] = np.conj(el_p)
    dp, dm = _exterior_coeffs_right(zk, h, chim_b, dchim_b, pot.b)
    chim[:, grid.right] = dp[:, None] * phase_r + dm[:, None] * np.conj(phase_r)

    w = chip_a * dchim_a - dchip_a * chim_a
    w0 = -2j * kpos * np.conj(c2) / h
    return JostFamily(pot=pot, h=h, grid=grid, kpos=kpos, chip=chip, chim=chim,
                      chip_a=chip_a, dchip_a=dchip_a, chip_b=chip_b,
                      dchip_b=dchip_b, chim_a=chim_a, dchim_a=dchim_a,
                      chim_b=chim_b, dchim_b=dchim_b, w=w, w0=w0, c1=c1, c2=c2)


def rescaling_defect(pot: Potential, zeta: complex, h: float,
                     rtol: float = 1e-12) -> float:
    """Deviation of the unit-scale reformulation from the direct solve.

    With c = (a+b)/2 and y = (x - c)/h, u(y) = chi(h y + c) e^{-i zeta c / h}
    solves the h = 1 problem with barrier V((. ) h + c) on [(a-c)/h, (b-c)/h]
    and the same plane-wave normalization. Returns the max relative trace
    mismatch over both sides, both interfaces, values and derivatives.
    """
    c = 0.5 * (pot.a + pot.b)
    scaled = _RescaledPotential(pot, h, c)
    zc = np.array([zeta], dtype=complex)
    worst = 0.0
    for side in (+1, -1):
        vals, ders = _integrate_side(pot, zc, h, None, side, rtol)
        svals, sders = _integrate_side(scaled, zc, 1.0, None, side, rtol)
        # side-dependent normalization: chi_plus is pinned to e^{i zeta x/h}
        # on the right, chi_minus to e^{-i zeta x/h} on the left
        phase = np.exp(-1j * side * zeta * c / h)
        for idx in (0, -1):
            ref_v = vals[idx, 0] * phase
            ref_d = ders[idx, 0] * phase * h  # chain rule: d/dy = h d/dx
            got_v, got_d = svals[idx, 0], sders[idx, 0]
            scale = max(abs(ref_v), abs(ref_d), 1e-300)
            worst = max(worst, abs(got_v - ref_v) / scale, abs(got_d - ref_d) / scale)
    return worst


class _RescaledPotential:
    """View of a barrier in the unit-scale variable y = (x - c)/h."""

    def __init__(self, pot: Potential, h: float, c: float):
        self.a = (pot.a - c) / h
        self.b = (pot.b - c) / h
        self._pot = pot
        self._h = h
        self._c = c

    def inside(self, y):
        return self._pot.inside(np.asarray(y) * self._h + self._c)
