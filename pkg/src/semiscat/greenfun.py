"""Green's function of the unmodified operator and interface-anchored sections.

The resolvent kernel of -h^2 d^2/dx^2 + V at energy z = zeta^2 (Im zeta >= 0)
factorizes over the Jost pair chi_plus, chi_minus:

    G(x, y) = chi_+(max) chi_-(min) / (h^2 w),      w = W(chi_+, chi_-),

and K(x, y) = dG/dy has a unit value jump across x = y while dG/dx has a unit
(negative) derivative jump, both scaled by h^-2.  The four sections

    g_1 = G(., b),  g_2 = K(., b),  g_3 = G(., a),  g_4 = K(., a)

span the corrections produced by the interface coupling.  This module collects
their interface traces (values, derivatives, means and one-sided limits), the
piecewise evaluation of linear combinations on a grid, the resolvent action on
wave packets, and the quantities entering the scale-uniform trace bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpatialGrid
from .jost import JostFamily, JostSolution, build_jost_family, solve_jost_pair
from .potentials import Potential

__all__ = [
    "DefectBasis",
    "EnergyCheck",
    "combine_defects",
    "energy_solve",
    "interface_values",
    "resolvent_apply",
    "trace_estimate_families",
    "zeta_of",
]


def zeta_of(z: complex) -> complex:
    """Square root of the energy with Im zeta >= 0 (upper edge for z > 0)."""
    zeta = np.sqrt(complex(z))
    if zeta.imag < 0.0 or (zeta.imag == 0.0 and zeta.real < 0.0):
        zeta = -zeta
    return complex(zeta)


@dataclass(frozen=True)
class DefectBasis:
    """Interface traces of the kernel sections for a batch of energies.

    All arrays have a common shape (m,): one entry per energy.  ``pb, dpb,
    pa, dpa`` are values/derivatives of chi_plus at b and a; the ``m*`` fields
    hold the same data for chi_minus.  ``w`` is the Wronskian.
    """

    h: float
    pb: np.ndarray
    dpb: np.ndarray
    pa: np.ndarray
    dpa: np.ndarray
    mb: np.ndarray
    dmb: np.ndarray
    ma: np.ndarray
    dma: np.ndarray
    w: np.ndarray

    @classmethod
    def from_family(cls, fam: JostFamily) -> "DefectBasis":
        return cls(h=fam.h,
                   pb=fam.chip_b, dpb=fam.dchip_b, pa=fam.chip_a, dpa=fam.dchip_a,
                   mb=fam.chim_b, dmb=fam.dchim_b, ma=fam.chim_a, dma=fam.dchim_a,
                   w=fam.w)

    @classmethod
    def from_pair(cls, plus: JostSolution, minus: JostSolution) -> "DefectBasis":
        w = plus.chi_a * minus.dchi_a - plus.dchi_a * minus.chi_a
        arr = lambda v: np.asarray([v], dtype=complex)
        return cls(h=plus.h,
                   pb=arr(plus.chi_b), dpb=arr(plus.dchi_b),
                   pa=arr(plus.chi_a), dpa=arr(plus.dchi_a),
                   mb=arr(minus.chi_b), dmb=arr(minus.dchi_b),
                   ma=arr(minus.chi_a), dma=arr(minus.dchi_a),
                   w=arr(w))

    @property
    def m(self) -> int:
        return self.w.shape[0]

    @property
    def scale(self) -> np.ndarray:
        """Common denominator h^2 w of every kernel trace."""
        return self.h ** 2 * self.w

    def trace_matrix(self) -> np.ndarray:
        """Mean interface traces tau_r(g_j), shape (m, 4, 4).

        Row order: value at b, derivative at b, value at a, derivative at a;
        columns follow the section order g_1..g_4.  One-sided limits differ
        from these means only through the known h^-2 jumps.
        """
        W = self.scale
        T = np.empty((self.m, 4, 4), dtype=complex)
        T[:, 0, 0] = self.pb * self.mb
        T[:, 0, 1] = (self.pb * self.dmb + self.mb * self.dpb) / 2.0
        T[:, 0, 2] = self.pb * self.ma
        T[:, 0, 3] = self.pb * self.dma
        T[:, 1, 0] = (self.dpb * self.mb + self.dmb * self.pb) / 2.0
        T[:, 1, 1] = self.dpb * self.dmb
        T[:, 1, 2] = self.dpb * self.ma
        T[:, 1, 3] = self.dpb * self.dma
        T[:, 2, 0] = self.ma * self.pb
        T[:, 2, 1] = self.ma * self.dpb
        T[:, 2, 2] = self.pa * self.ma
        T[:, 2, 3] = (self.pa * self.dma + self.ma * self.dpa) / 2.0
        T[:, 3, 0] = self.dma * self.pb
        T[:, 3, 1] = self.dma * self.dpb
        T[:, 3, 2] = (self.dpa * self.ma + self.dma * self.pa) / 2.0
        T[:, 3, 3] = self.dpa * self.dma
        T /= W[:, None, None]
        return T

    def region_coeffs(self, d: np.ndarray) -> tuple:
        """Coefficients of the piecewise form of sum_j d_j g_j.

        With P = chi_+ and m = chi_-, the combination reads P(x) A for x >= b,
        m(x) B + P(x) C in the middle, and m(x) D for x <= a.  ``d`` has shape
        (m, 4); each returned array has shape (m,).
        """
        d = np.asarray(d, dtype=complex)
        W = self.scale
        A = (d[:, 0] * self.mb + d[:, 1] * self.dmb
             + d[:, 2] * self.ma + d[:, 3] * self.dma) / W
        B = (d[:, 0] * self.pb + d[:, 1] * self.dpb) / W
        C = (d[:, 2] * self.ma + d[:, 3] * self.dma) / W
        D = B + (d[:, 2] * self.pa + d[:, 3] * self.dpa) / W
        return A, B, C, D

    def onesided_traces(self, d: np.ndarray) -> dict:
        """One-sided values/derivatives of sum_j d_j g_j at both interfaces."""
        A, B, C, D = self.region_coeffs(d)
        return {
            "vb_plus": self.pb * A, "db_plus": self.dpb * A,
            "vb_minus": self.mb * B + self.pb * C,
            "db_minus": self.dmb * B + self.dpb * C,
            "va_plus": self.ma * B + self.pa * C,
            "da_plus": self.dma * B + self.dpa * C,
            "va_minus": self.ma * D, "da_minus": self.dma * D,
        }


def combine_defects(grid: SpatialGrid, basis: DefectBasis,
                    chip: np.ndarray, chim: np.ndarray,
                    d: np.ndarray) -> np.ndarray:
    """Evaluate sum_j d_j g_j on the grid for a batch of energies.

    ``chip`` and ``chim`` are (m, n) tables of chi_plus/chi_minus on the grid
    (pass derivative tables to get the x-derivative of the combination).
    """
    A, B, C, D = basis.region_coeffs(d)
    out = np.empty_like(chip)
    left = grid.left
    mid = grid.interior
    right = grid.right
    out[:, left] = chim[:, left] * D[:, None]
    out[:, mid] = chim[:, mid] * B[:, None] + chip[:, mid] * C[:, None]
    out[:, right] = chip[:, right] * A[:, None]
    return out


def interface_values(grid: SpatialGrid, arr: np.ndarray) -> tuple:
    """Second-order values of a C^1 sampled function at x = a and x = b.

    The grid keeps a and b midway between nodes, so plain two-point averages
    are O(dx^2) accurate.
    """
    ia, ib = grid.ia, grid.ib
    va = 0.5 * (arr[..., ia] + arr[..., ia + 1])
    vb = 0.5 * (arr[..., ib] + arr[..., ib + 1])
    return va, vb


def _cumtrapz(g: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(g)
    out[0] = 0.0
    np.cumsum(0.5 * dx * (g[1:] + g[:-1]), out=out[1:])
    return out


def resolvent_apply(pot: Potential, z: complex, h: float, grid: SpatialGrid,
                    f: np.ndarray, rtol: float = 1e-12,
                    deriv: bool = False):
    """Apply the free-of-interfaces resolvent (H_0 - z)^(-1) to samples of f.

    Quadrature is trapezoidal on the grid, so f should be supported well inside
    it.  Returns u, or (u, du) when ``deriv`` is set.
    """
    zeta = zeta_of(z)
    plus, minus = solve_jost_pair(pot, zeta, h, grid, rtol=rtol)
    w = plus.chi_a * minus.dchi_a - plus.dchi_a * minus.chi_a
    W = h ** 2 * w
    gm = minus.values * f
    gp = plus.values * f
    cum_m = _cumtrapz(gm, grid.dx)
    cum_p = _cumtrapz(gp, grid.dx)
    tail_p = cum_p[-1] - cum_p
    u = (plus.values * cum_m + minus.values * tail_p) / W
    if not deriv:
        return u
    du = (plus.derivs * cum_m + minus.derivs * tail_p) / W
    return u, du


@dataclass(frozen=True)
class EnergyCheck:
    """Solution and scaling data of a one-sided radiation boundary problem."""

    xs: np.ndarray
    u: np.ndarray
    lhs: float
    rhs_scale: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs_scale


def energy_solve(pot: Potential, zeta: complex, h: float,
                 gamma_a: complex, gamma_b: complex, n: int = 2001) -> EnergyCheck:
    """Solve (-h^2 u'' + (V - zeta^2) u) = 0 on [a, b] with impedance data.

    Boundary rows impose [h d/dx + i zeta] u(a) = gamma_a and
    [h d/dx - i zeta] u(b) = gamma_b.  The returned ``lhs`` collects
    h^(1/2) sup|u| + ||h u'|| + ||u|| and ``rhs_scale`` is
    (|gamma_a| + |gamma_b|) / h^(1/2), so ``ratio`` stays O(1) whenever
    V - Re zeta^2 is positive on the barrier.
    """
    from scipy.linalg import solve_banded

    xs = np.linspace(pot.a, pot.b, n)
    dx = xs[1] - xs[0]
    v = pot.inside(xs)
    band = np.zeros((5, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    coeff = h ** 2 / dx ** 2
    # interior second-difference rows (band storage: band[2 + i - j, j])
    band[1, 2:] = -coeff
    band[2, 1:-1] = 2.0 * coeff + v[1:-1] - zeta ** 2
    band[3, :-2] = -coeff
    # one-sided derivative closures at the endpoints
    band[2, 0] = -1.5 * h / dx + 1j * zeta
    band[1, 1] = 2.0 * h / dx
    band[0, 2] = -0.5 * h / dx
    rhs[0] = gamma_a
    band[2, -1] = 1.5 * h / dx - 1j * zeta
    band[3, -2] = -2.0 * h / dx
    band[4, -3] = 0.5 * h / dx
    rhs[-1] = gamma_b
    u = solve_banded((2, 2), band, rhs)
    du = np.gradient(u, dx)
    l2 = lambda g: np.sqrt(np.trapezoid(np.abs(g) ** 2, dx=dx))
    lhs = (np.sqrt(h) * np.max(np.abs(u)) + l2(h * du) + l2(u))
    rhs_scale = (abs(gamma_a) + abs(gamma_b)) / np.sqrt(h)
    return EnergyCheck(xs=xs, u=u, lhs=float(lhs), rhs_scale=float(rhs_scale))


def _psi0_traces(fam: JostFamily) -> dict:
    """Boundary values/derivatives of the generalized eigenfunctions.

    Covers both momentum signs of the band: for k > 0 the eigenfunction is
    -2ik/(h w) chi_+(., k), for k < 0 it is -2i|k|/(h w(|k|)) chi_-(., |k|).
    """
    c = -2j * fam.kpos / (fam.h * fam.w)
    return {
        "pos_a": c * fam.chip_a, "pos_da": c * fam.dchip_a,
        "pos_b": c * fam.chip_b, "pos_db": c * fam.dchip_b,
        "neg_a": c * fam.chim_a, "neg_da": c * fam.dchim_a,
        "neg_b": c * fam.chim_b, "neg_db": c * fam.dchim_b,
    }


def trace_estimate_families(pot: Potential, kpos: np.ndarray, h: float,
                            grid: SpatialGrid, rtol: float = 1e-12,
                            fam: JostFamily | None = None) -> dict:
    """Band suprema of the weighted interface traces, one value per family.

    The families mirror the scale-uniform bounds: weighted kernel values
    should stay O(h^-2), one-sided K traces O(h^-2), derivative traces
    O(h^-2) after a h/|k| weight, and eigenfunction traces O(1) after a
    h/|k| weight on the derivative part.  A prebuilt Jost family for the
    same (pot, kpos, h, grid) may be passed to share the integration.
    """
    if fam is None:
        fam = build_jost_family(pot, kpos, h, grid, rtol=rtol)
    basis = DefectBasis.from_family(fam)
    W = basis.scale
    k = fam.kpos
    g_vals = np.stack([np.abs(basis.pb * basis.mb / W),
                       np.abs(basis.ma * basis.pb / W),
                       np.abs(basis.pa * basis.ma / W)])
    sup_g = float(np.max((1.0 + k) * np.max(g_vals, axis=0)))
    k_bm = basis.mb * basis.dpb / W
    k_bp = basis.pb * basis.dmb / W
    k_ap = basis.pa * basis.dma / W
    k_am = basis.ma * basis.dpa / W
    k_ab = basis.ma * basis.dpb / W
    k_ba = basis.pb * basis.dma / W
    k_traces = np.stack([np.abs(t) for t in
                         (k_bm, k_bp, k_ap, k_am, k_ab, k_ba)])
    sup_k1 = float(np.max(k_traces))
    dk_bb = basis.dpb * basis.dmb / W
    dk_aa = basis.dpa * basis.dma / W
    dk_ab = basis.dma * basis.dpb / W
    dk_traces = np.stack([np.abs(t) for t in (dk_bb, dk_aa, dk_ab)])
    sup_dk = float(np.max((h / np.abs(k)) * np.max(dk_traces, axis=0)))
    tr = _psi0_traces(fam)
    est_pos = np.maximum(np.abs(tr["pos_a"]) + (h / k) * np.abs(tr["pos_da"]),
                         np.abs(tr["pos_b"]) + (h / k) * np.abs(tr["pos_db"]))
    est_neg = np.maximum(np.abs(tr["neg_a"]) + (h / k) * np.abs(tr["neg_da"]),
                         np.abs(tr["neg_b"]) + (h / k) * np.abs(tr["neg_db"]))
    sup_psi = float(np.max(np.maximum(est_pos, est_neg)))
    return {
        "kernel_value": sup_g,
        "kernel_slope_onesided": sup_k1,
        "kernel_second": sup_dk,
        "eigenfunction_boundary": sup_psi,
    }
