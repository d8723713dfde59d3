"""Interface coupling matrices, modified eigenfunctions and resolvent defects.

A scale parameter theta couples the exterior and interior traces at x = a and
x = b through

    e^(-theta/2) u(b+) = u(b-),    e^(-3 theta/2) u'(b+) = u'(b-),
    e^(-theta/2) u(a-) = u(a+),    e^(-3 theta/2) u'(a-) = u'(a+).

Solutions of the coupled problem differ from the uncoupled ones by a linear
combination of the four interface-anchored kernel sections g_1..g_4 (see
``greenfun``).  Their coefficients solve a 4x4 linear system; three equivalent
looking but numerically inequivalent assemblies are provided:

* ``direct``: the system is derived from the one-sided trace algebra of the
  sections.  Value and derivative jumps of the combination are exact h^-2
  multiples of the coefficients, so the interface conditions reduce to four
  linear equations in the coefficients.  This is the default and the only mode
  that drives the interface residuals to round-off.
* ``row`` and ``column``: coefficients built from the reduced coupling matrix
  M = B q - A, attaching the summed index either to the section (row) or to
  the trace factor (column).  Both are retained for comparison runs; they
  reproduce the leading small-theta shape of the correction but with wrong
  normalization, leaving O(theta) interface residuals.

The reduced matrix M itself (its theta = 0 degeneration and the determinant
scale h^-8) is exposed independently of the mode choice, as are scans for its
near-singular momenta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpatialGrid
from .greenfun import (DefectBasis, combine_defects, interface_values,
                       resolvent_apply, zeta_of)
from .integrate import NumericalError
from .jost import build_jost_family, solve_jost_pair
from .potentials import Potential

__all__ = [
    "ModifiedEigenfunction",
    "coupling_matrix",
    "correction_coefficients",
    "det_scale",
    "interface_matrices",
    "modified_eigenfunction",
    "modified_resolvent_apply",
    "q_matrix",
    "singular_scan",
    "theta_holomorphy_defect",
]

_MODES = ("direct", "row", "column")
# column order of the coefficient system paired by the jump relations:
# value jump at b <- g_2, derivative jump at b <- g_1, and mirrored at a.
_SIGMA = np.array([1, 0, 3, 2])


def interface_matrices(theta: complex, h: float) -> tuple:
    """Trace-pairing matrices (A, B) of the coupled boundary condition."""
    ep = np.exp(np.multiply(theta, [1.5, 0.5, -1.5, -0.5]))
    A = np.diag(1.0 + ep) / h ** 2
    B = np.zeros((4, 4), dtype=ep.dtype)
    B[0, 1] = 1.0 - ep[0]
    B[1, 0] = ep[1] - 1.0
    B[2, 3] = 1.0 - ep[2]
    B[3, 2] = ep[3] - 1.0
    return A, B


def q_matrix(basis: DefectBasis) -> np.ndarray:
    """Mean-trace matrix of the sections with alternating column signs."""
    q = basis.trace_matrix().copy()
    q[:, :, 1] *= -1.0
    q[:, :, 3] *= -1.0
    return q


def coupling_matrix(basis: DefectBasis, theta: complex) -> np.ndarray:
    """Reduced coupling matrix M = B q - A, shape (m, 4, 4).

    At theta = 0 this is exactly -2/h^2 times the identity, with determinant
    16/h^8, independently of the momentum.
    """
    A, B = interface_matrices(theta, basis.h)
    return np.einsum("ij,mjl->mil", B, q_matrix(basis)) - A


def det_scale(h: float) -> float:
    """Magnitude of det M at theta = 0; reference for singularity flags."""
    return 16.0 / h ** 8


def _direct_system(basis: DefectBasis, theta: complex) -> tuple:
    """Coefficient matrix of the interface conditions in the section basis."""
    lam = np.exp(np.multiply(-theta, [0.5, 1.5, 0.5, 1.5]))
    E = lam - 1.0
    F = (lam + 1.0) / (2.0 * basis.h ** 2) * np.array([1.0, -1.0, -1.0, 1.0])
    K = E[None, :, None] * basis.trace_matrix()
    idx = np.arange(4)
    K[:, idx, _SIGMA] += F
    return K, E


def correction_coefficients(basis: DefectBasis, theta: complex, v: np.ndarray,
                            mode: str = "direct",
                            trace_half: bool = False) -> np.ndarray:
    """Coefficients d of the section combination correcting a smooth solution.

    ``v`` holds the interface traces (value at b, derivative at b, value at a,
    derivative at a) of the uncoupled solution, shape (m, 4).  The corrected
    function u = u_smooth + sum_j d_j g_j satisfies the coupled interface
    conditions in ``direct`` mode.  ``trace_half`` feeds v/2 to the reduced
    modes, matching their half-trace convention for eigenfunctions; it does
    not affect the direct mode.
    """
    if mode not in _MODES:
        raise ValueError(f"unknown coefficient mode: {mode!r}")
    v = np.asarray(v, dtype=complex)
    if mode == "direct":
        K, E = _direct_system(basis, theta)
        rhs = -E[None, :] * v
        d = np.linalg.solve(K, rhs[:, :, None])[:, :, 0]
        resid = np.abs(np.einsum("mij,mj->mi", K, d) - rhs).max()
        scale = np.abs(rhs).max() + np.abs(K).max() * np.abs(d).max()
        if not np.isfinite(d).all() or resid > 1e-8 * (scale + 1e-300):
            raise NumericalError("interface coefficient solve lost accuracy")
        return d
    vv = 0.5 * v if trace_half else v
    M = coupling_matrix(basis, theta)
    _, B = interface_matrices(theta, basis.h)
    if mode == "row":
        return -np.linalg.solve(M, (vv @ B.T)[:, :, None])[:, :, 0]
    X = np.linalg.solve(M, np.broadcast_to(B, M.shape).astype(M.dtype))
    return -X.sum(axis=1) * vv


def singular_scan(pot: Potential, kband: np.ndarray, theta: complex, h: float,
                  grid: SpatialGrid, rtol: float = 1e-12,
                  tol: float = 1e-6) -> dict:
    """Determinant of M over a positive momentum band with singularity flags."""
    kband = np.asarray(kband, dtype=float)
    fam = build_jost_family(pot, kband, h, grid, rtol=rtol)
    M = coupling_matrix(DefectBasis.from_family(fam), theta)
    det = np.linalg.det(M)
    flags = np.abs(det) < tol * det_scale(h)
    return {"k": kband, "det": det, "det_scaled": det * h ** 8 / 16.0,
            "flagged": flags}


@dataclass(frozen=True)
class ModifiedEigenfunction:
    """A generalized eigenfunction of the coupled operator at momentum k."""

    pot: Potential
    k: float
    theta: complex
    h: float
    grid: SpatialGrid
    mode: str
    psi0: np.ndarray       # uncoupled eigenfunction on the grid
    psi: np.ndarray        # coupled eigenfunction on the grid
    d: np.ndarray          # section coefficients, shape (4,)
    v: np.ndarray          # interface traces of psi0, shape (4,)
    basis: DefectBasis     # single-energy section traces at |k|
    det_m: complex         # det of the reduced coupling matrix at |k|

    def onesided_traces(self) -> dict:
        """One-sided interface values/derivatives of the coupled function."""
        os = self.basis.onesided_traces(self.d[None, :])
        smooth = {"vb": self.v[0], "db": self.v[1],
                  "va": self.v[2], "da": self.v[3]}
        return {
            "vb_plus": smooth["vb"] + os["vb_plus"][0],
            "db_plus": smooth["db"] + os["db_plus"][0],
            "vb_minus": smooth["vb"] + os["vb_minus"][0],
            "db_minus": smooth["db"] + os["db_minus"][0],
            "va_plus": smooth["va"] + os["va_plus"][0],
            "da_plus": smooth["da"] + os["da_plus"][0],
            "va_minus": smooth["va"] + os["va_minus"][0],
            "da_minus": smooth["da"] + os["da_minus"][0],
        }

    def interface_residuals(self) -> dict:
        """Relative defects of the four coupled interface conditions."""
        t = self.onesided_traces()
        lam1 = np.exp(-self.theta / 2.0)
        lam3 = np.exp(-1.5 * self.theta)
        vscale = max(abs(t["vb_plus"]), abs(t["vb_minus"]),
                     abs(t["va_plus"]), abs(t["va_minus"]), 1e-300)
        dscale = max(abs(t["db_plus"]), abs(t["db_minus"]),
                     abs(t["da_plus"]), abs(t["da_minus"]), 1e-300)
        res = {
            "value_b": abs(lam1 * t["vb_plus"] - t["vb_minus"]) / vscale,
            "deriv_b": abs(lam3 * t["db_plus"] - t["db_minus"]) / dscale,
            "value_a": abs(lam1 * t["va_minus"] - t["va_plus"]) / vscale,
            "deriv_a": abs(lam3 * t["da_minus"] - t["da_plus"]) / dscale,
        }
        res["max"] = max(res.values())
        return res

    def pde_residual(self) -> float:
        """Relative second-difference defect away from the interfaces."""
        g = self.grid
        x = g.x
        keep = np.zeros(g.n, dtype=bool)
        keep[1:-1] = True
        for idx in (g.ia, g.ib):
            keep[max(idx - 1, 0):idx + 3] = False
        lap = np.empty_like(self.psi)
        lap[1:-1] = (self.psi[:-2] - 2.0 * self.psi[1:-1] + self.psi[2:])
        lap[0] = lap[-1] = 0.0
        r = (-self.h ** 2 * lap / g.dx ** 2
             + (self.pot(x) - self.k ** 2) * self.psi)
        scale = (self.k ** 2 + self.pot.v_sup) * np.abs(self.psi).max()
        return float(np.abs(r[keep]).max() / (scale + 1e-300))


def modified_eigenfunction(pot: Potential, k: float, theta: complex, h: float,
                           grid: SpatialGrid, mode: str = "direct",
                           rtol: float = 1e-12) -> ModifiedEigenfunction:
    """Build the coupled generalized eigenfunction at real momentum k != 0."""
    if k == 0.0:
        raise ValueError("momentum must be nonzero")
    kk = abs(k)
    fam = build_jost_family(pot, np.array([kk]), h, grid, rtol=rtol)
    basis = DefectBasis.from_family(fam)
    c = -2j * kk / (h * fam.w[0])
    if k > 0:
        psi0 = c * fam.chip[0]
        v = c * np.array([fam.chip_b[0], fam.dchip_b[0],
                          fam.chip_a[0], fam.dchip_a[0]])
    else:
        psi0 = c * fam.chim[0]
        v = c * np.array([fam.chim_b[0], fam.dchim_b[0],
                          fam.chim_a[0], fam.dchim_a[0]])
    d = correction_coefficients(basis, theta, v[None, :], mode=mode,
                                trace_half=True)
    corr = combine_defects(grid, basis, fam.chip, fam.chim, d)
    det_m = complex(np.linalg.det(coupling_matrix(basis, theta))[0])
    return ModifiedEigenfunction(pot=pot, k=float(k), theta=theta, h=h,
                                 grid=grid, mode=mode, psi0=psi0,
                                 psi=psi0 + corr[0], d=d[0], v=v,
                                 basis=basis, det_m=det_m)


def modified_resolvent_apply(pot: Potential, z: complex, theta: complex,
                             h: float, grid: SpatialGrid, f: np.ndarray,
                             mode: str = "direct", rtol: float = 1e-12):
    """Apply the coupled resolvent (H_theta - z)^(-1) to samples of f.

    Composes the uncoupled resolvent with the section correction whose
    coefficients are driven by the interface traces of the smooth part.
    Returns (u_theta, u_smooth).
    """
    zeta = zeta_of(z)
    plus, minus = solve_jost_pair(pot, zeta, h, grid, rtol=rtol)
    basis = DefectBasis.from_pair(plus, minus)
    u0, du0 = resolvent_apply(pot, z, h, grid, f, rtol=rtol, deriv=True)
    va, vb = interface_values(grid, u0)
    da, db = interface_values(grid, du0)
    v = np.array([vb, db, va, da], dtype=complex)
    d = correction_coefficients(basis, theta, v[None, :], mode=mode)
    corr = combine_defects(grid, basis, plus.values[None, :],
                           minus.values[None, :], d)
    return u0 + corr[0], u0


def theta_holomorphy_defect(pot: Potential, k: float, theta0: float, h: float,
                            grid: SpatialGrid, delta: float = 1e-4,
                            mode: str = "direct", rtol: float = 1e-12) -> float:
    """Cauchy-Riemann defect of theta -> section coefficients near theta0.

    Compares the derivative taken along the real axis with the one taken along
    the imaginary axis; both are second-order differences.  A small value
    certifies local holomorphy of the coefficient map.
    """
    kk = abs(k)
    fam = build_jost_family(pot, np.array([kk]), h, grid, rtol=rtol)
    basis = DefectBasis.from_family(fam)
    c = -2j * kk / (h * fam.w[0])
    if k > 0:
        v = c * np.array([fam.chip_b[0], fam.dchip_b[0],
                          fam.chip_a[0], fam.dchip_a[0]])
    else:
        v = c * np.array([fam.chim_b[0], fam.dchim_b[0],
                          fam.chim_a[0], fam.dchim_a[0]])

    def coeffs(th):
        return correction_coefficients(basis, th, v[None, :], mode=mode,
                                       trace_half=True)[0]

    d_re = (coeffs(theta0 + delta) - coeffs(theta0 - delta)) / (2.0 * delta)
    d_im = (coeffs(theta0 + 1j * delta) - coeffs(theta0 - 1j * delta)) \
        / (2j * delta)
    scale = np.abs(d_re).max() + np.abs(d_im).max()
    return float(np.abs(d_re - d_im).max() / (scale + 1e-300))
