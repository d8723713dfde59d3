"""Generalized Fourier transform attached to the uncoupled operator.

The scattering eigenfunctions psi_0(., k) of -h^2 d^2/dx^2 + V diagonalize the
operator over the momentum band: the forward map

    (F phi)(k) = (2 pi h)^(-1/2) integral conj(psi_0(x, k)) phi(x) dx

composed with its adjoint synthesis reproduces phi up to band truncation.
This module tabulates the eigenfunction family over a symmetric band, applies
the forward/adjoint maps with trapezoid quadrature, and provides the Gaussian
wave packets used throughout the verification experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpatialGrid, SpectralGrid, edge_mass
from .greenfun import DefectBasis
from .integrate import NumericalError
from .jost import JostFamily, build_jost_family
from .potentials import Potential

__all__ = [
    "EigenFamily",
    "gaussian_packet",
    "packet_tail_mass",
]


@dataclass(frozen=True)
class EigenFamily:
    """Tabulated generalized eigenfunctions over a symmetric momentum band.

    ``psi0`` has one row per band node (negative block first, ascending);
    ``v`` holds the interface traces (value at b, derivative at b, value at a,
    derivative at a) of each row.  Rows at -k and +k share the Jost data at
    |k|, exposed through :meth:`select`.
    """

    pot: Potential
    h: float
    grid: SpatialGrid
    kgrid: SpectralGrid
    fam: JostFamily
    basis: DefectBasis
    psi0: np.ndarray
    v: np.ndarray

    @classmethod
    def build(cls, pot: Potential, h: float, grid: SpatialGrid,
              kgrid: SpectralGrid, rtol: float = 1e-12) -> "EigenFamily":
        fam = build_jost_family(pot, kgrid.kpos, h, grid, rtol=rtol)
        basis = DefectBasis.from_family(fam)
        m = kgrid.n_pos
        c = -2j * kgrid.kpos / (h * fam.w)
        psi0 = np.empty((2 * m, grid.n), dtype=complex)
        psi0[m:] = c[:, None] * fam.chip
        psi0[:m] = (c[:, None] * fam.chim)[::-1]
        v = np.empty((2 * m, 4), dtype=complex)
        v[m:, 0] = c * fam.chip_b
        v[m:, 1] = c * fam.dchip_b
        v[m:, 2] = c * fam.chip_a
        v[m:, 3] = c * fam.dchip_a
        v[:m, 0] = (c * fam.chim_b)[::-1]
        v[:m, 1] = (c * fam.dchim_b)[::-1]
        v[:m, 2] = (c * fam.chim_a)[::-1]
        v[:m, 3] = (c * fam.dchim_a)[::-1]
        return cls(pot=pot, h=h, grid=grid, kgrid=kgrid, fam=fam,
                   basis=basis, psi0=psi0, v=v)

    @property
    def norm_factor(self) -> float:
        return 1.0 / np.sqrt(2.0 * np.pi * self.h)

    def pos_index(self, idx: np.ndarray) -> np.ndarray:
        """Map full-band row indices to positive-momentum data indices."""
        m = self.kgrid.n_pos
        idx = np.asarray(idx)
        return np.where(idx < m, m - 1 - idx, idx - m)

    def select(self, idx: np.ndarray) -> tuple:
        """Jost data for the |k| of each requested band row.

        Returns (basis, chip, chim, v, k) with one entry per row of ``idx``.
        """
        j = self.pos_index(idx)
        f = self.fam
        basis = DefectBasis(h=self.h,
                            pb=f.chip_b[j], dpb=f.dchip_b[j],
                            pa=f.chip_a[j], dpa=f.dchip_a[j],
                            mb=f.chim_b[j], dmb=f.dchim_b[j],
                            ma=f.chim_a[j], dma=f.dchim_a[j],
                            w=f.w[j])
        return basis, f.chip[j], f.chim[j], self.v[idx], self.kgrid.k[idx]

    def forward(self, phi: np.ndarray, tail_tol: float = 1e-8) -> np.ndarray:
        """Band coefficients of phi (trapezoid quadrature in x).

        The analysis quadrature is only meaningful for states contained in
        the box, so the edge-mass fraction is checked against ``tail_tol``
        (pass None to skip, e.g. for deliberately truncated data).
        """
        if tail_tol is not None:
            frac = edge_mass(self.grid, phi)
            if frac > tail_tol:
                raise NumericalError(
                    "state has edge mass fraction %.3e > %.1e; "
                    "enlarge the spatial box" % (frac, tail_tol))
        return self.norm_factor * (self.psi0.conj()
                                   @ (self.grid.weights * phi))

    def adjoint(self, c: np.ndarray) -> np.ndarray:
        """Synthesis from band coefficients (trapezoid quadrature in k)."""
        return self.norm_factor * ((self.kgrid.w * c) @ self.psi0)

    def completeness_residual(self, phi: np.ndarray) -> float:
        """Relative defect of the synthesized analysis of phi."""
        err = self.adjoint(self.forward(phi)) - phi
        return self.grid.norm(err) / self.grid.norm(phi)


def gaussian_packet(x: np.ndarray, h: float, k0: float, x0: float,
                    sigma: float, second_deriv: bool = False):
    """Unit-mass Gaussian wave packet exp(i k0 x / h) at scale h.

    With envelope exp(-(x - x0)^2 / (4 sigma^2)) and L^2 normalization.
    When ``second_deriv`` is set, also returns the analytic second derivative
    (for forming -h^2 phi'' without finite differencing).
    """
    t = (x - x0) / (2.0 * sigma ** 2)
    env = np.exp(-(x - x0) ** 2 / (4.0 * sigma ** 2))
    amp = (2.0 * np.pi * sigma ** 2) ** -0.25
    phi = amp * env * np.exp(1j * k0 * x / h)
    if not second_deriv:
        return phi
    # d2/dx2 of env: (t^2 - 1/(2 sigma^2)) env, with t = (x-x0)/(2 sigma^2)
    g1 = -t
    g2 = t ** 2 - 1.0 / (2.0 * sigma ** 2)
    d2 = phi * (g2 + 2j * (k0 / h) * g1 - (k0 / h) ** 2)
    return phi, d2


def packet_tail_mass(grid: SpatialGrid, phi: np.ndarray,
                     edge_cells: int = 8) -> float:
    """Fraction of packet mass near the box edges (containment check)."""
    return edge_mass(grid, phi, cells=edge_cells)
