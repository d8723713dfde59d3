"""Independent finite-difference reference solver.

Everything here is deliberately built on different numerics than the rest of
the package: second-order centered differences with one-sided ghost
elimination at the interfaces, discrete outgoing/decaying closures at the box
ends, and Crank-Nicolson time stepping.  Agreement between these solutions and
the quadrature-based ones is then meaningful evidence, since no code or
expansion is shared beyond the potential itself.

Interface handling: the two branch conditions

    u(a+) = lam * u(a-),   u'(a+) = lam^3 * u'(a-),   lam = exp(-theta/2)

(and mirrored at b) are imposed by introducing one ghost value per side,
eliminated against quadratic one-sided interpolation of the branch traces at
the midpoint interface.  The ghost error is O(dx^3), which keeps the global
scheme second order; the elimination couples four nodes, so the matrix has
bandwidth two.  For theta = 0 the rows reduce to the standard Hermitian
tridiagonal scheme, which is used verbatim in that case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .grids import SpatialGrid, edge_mass, extend_grid, make_spatial_grid
from .integrate import NumericalError
from .potentials import Potential, TimeFamily

__all__ = [
    "BandedOperator",
    "hamiltonian_operator",
    "scattering_solve",
    "resolvent_solve",
    "propagate_cn",
    "ManufacturedCase",
    "audit_manufactured",
    "audit_norm_drift",
    "audit_box_doubling",
]


@dataclass(frozen=True)
class BandedOperator:
    """Pentadiagonal operator in LAPACK band storage, (l, u) = (2, 2)."""

    grid: SpatialGrid
    bands: np.ndarray  # shape (5, n); bands[2 + i - j, j] = A[i, j]

    @property
    def n(self) -> int:
        return self.grid.n

    def apply(self, u: np.ndarray) -> np.ndarray:
        b = self.bands
        y = b[2] * u
        y[..., :-1] = y[..., :-1] + b[1, 1:] * u[..., 1:]
        y[..., 1:] = y[..., 1:] + b[3, :-1] * u[..., :-1]
        y[..., :-2] = y[..., :-2] + b[0, 2:] * u[..., 2:]
        y[..., 2:] = y[..., 2:] + b[4, :-2] * u[..., :-2]
        return y

    def shifted(self, z: complex) -> "BandedOperator":
        """A - z I with the same band layout."""
        bands = self.bands.copy()
        bands[2] -= z
        return BandedOperator(grid=self.grid, bands=bands)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return solve_banded((2, 2), self.bands, rhs)

    def set_row(self, i: int, cols: list, vals: list) -> None:
        bands = self.bands
        for j in range(max(0, i - 2), min(self.n, i + 3)):
            bands[2 + i - j, j] = 0.0
        for j, v in zip(cols, vals):
            bands[2 + i - j, j] = v


def _ghost_alpha(lam: complex) -> np.ndarray:
    """Weights of the exterior-branch ghost on its four neighbor nodes.

    Ordered from the outermost of the four nodes toward the interface and
    across it: for the interface at a these are (ia-1, ia, ia+1, ia+2).
    """
    lam3 = lam ** 3
    s = 3.0 * (lam3 + lam)
    return np.array([lam, 3.0 * lam3 - 6.0 * lam, 9.0, -1.0]) / s


def hamiltonian_operator(pot: Potential, theta: complex, h: float,
                         grid: SpatialGrid) -> BandedOperator:
    """Finite-difference rows of the coupled operator on the grid."""
    n = grid.n
    dx = grid.dx
    c = -(h * h) / (dx * dx)
    v = pot(grid.x)
    bands = np.zeros((5, n), dtype=complex)
    bands[2] = -2.0 * c + v
    bands[1, 1:] = c
    bands[3, :-1] = c
    op = BandedOperator(grid=grid, bands=bands)
    if theta == 0:
        return op
    lam = np.exp(-theta / 2.0)
    lam3 = lam ** 3
    alpha = _ghost_alpha(lam)

    iL = grid.ia
    iR = iL + 1
    cols_a = [iL - 1, iL, iR, iR + 1]
    row_iL = c * np.array([1.0 + alpha[0], -2.0 + alpha[1],
                           alpha[2], alpha[3]], dtype=complex)
    row_iL[1] += v[iL]
    row_iR = c * np.array([-lam3 * alpha[0], lam3 - lam3 * alpha[1],
                           -1.0 - lam3 * alpha[2], 1.0 - lam3 * alpha[3]],
                          dtype=complex)
    row_iR[2] += v[iR]
    op.set_row(iL, cols_a, list(row_iL))
    op.set_row(iR, cols_a, list(row_iR))

    jL = grid.ib
    jR = jL + 1
    cols_b = [jL - 1, jL, jR, jR + 1]
    # gamma weights attach to (jR+1, jR, jL, jL-1); reorder to cols_b
    gam = alpha  # same outer-to-inner pattern by mirror symmetry
    row_jR = c * np.array([gam[3], gam[2], gam[1] - 2.0, gam[0] + 1.0],
                          dtype=complex)
    row_jR[2] += v[jR]
    row_jL = c * np.array([1.0 - lam3 * gam[3], -1.0 - lam3 * gam[2],
                           lam3 - lam3 * gam[1], -lam3 * gam[0]],
                          dtype=complex)
    row_jL[1] += v[jL]
    op.set_row(jR, cols_b, list(row_jR))
    op.set_row(jL, cols_b, list(row_jL))
    return op


def _outgoing_root(z: complex, dx: float, h: float) -> complex:
    """Root mu of the free discrete equation selecting outgoing or decay.

    mu + 1/mu = 2 - z dx^2 / h^2; the returned root has |mu| < 1 for z off
    the positive axis (decay) and Im mu > 0 for z = k^2 > 0 (outgoing).
    """
    s = 2.0 - z * dx * dx / (h * h)
    disc = np.sqrt(s * s - 4.0 + 0j)
    mu1 = (s + disc) / 2.0
    mu2 = (s - disc) / 2.0
    m1, m2 = abs(mu1), abs(mu2)
    if abs(m1 - 1.0) < 1e-13 and abs(m2 - 1.0) < 1e-13:
        return mu1 if mu1.imag > 0 else mu2
    return mu1 if m1 < m2 else mu2


def scattering_solve(pot: Potential, k: float, theta: complex, h: float,
                     grid: SpatialGrid) -> np.ndarray:
    """Total scattering field at energy k^2, unit incident wave.

    k > 0 sends the incident wave from the left, k < 0 from the right; the
    same conventions as the quadrature eigenfunctions, so the two solutions
    are directly comparable nodewise.
    """
    if k == 0.0:
        raise ValueError("k must be nonzero")
    kk = abs(k)
    op = hamiltonian_operator(pot, theta, h, grid).shifted(kk * kk)
    n = grid.n
    dx = grid.dx
    mu = _outgoing_root(kk * kk + 0j, dx, h)
    kappa = np.angle(mu) / dx
    if k > 0:
        inc = np.exp(1j * (kk * grid.a / h + kappa * (grid.x - grid.a)))
        rhs = np.zeros(n, dtype=complex)
        rhs[0] = inc[0] - mu * inc[1]
        op.set_row(0, [0, 1], [1.0, -mu])
        op.set_row(n - 1, [n - 2, n - 1], [-mu, 1.0])
    else:
        inc = np.exp(-1j * (kk * grid.b / h + kappa * (grid.x - grid.b)))
        rhs = np.zeros(n, dtype=complex)
        rhs[n - 1] = inc[n - 1] - mu * inc[n - 2]
        op.set_row(n - 1, [n - 2, n - 1], [-mu, 1.0])
        op.set_row(0, [0, 1], [1.0, -mu])
    u = op.solve(rhs)
    if not np.isfinite(u).all():
        raise NumericalError("scattering solve produced non-finite values")
    return u


def resolvent_solve(pot: Potential, z: complex, theta: complex, h: float,
                    grid: SpatialGrid, f: np.ndarray,
                    tail_tol: float = 1e-6) -> np.ndarray:
    """Solve (H - z) u = f on a Dirichlet box.

    Valid when the data and the solution are supported away from the box
    ends; both edge-mass fractions are checked against ``tail_tol``, so an
    undersized box fails loudly instead of returning a reflected solution.
    """
    n = grid.n
    if np.imag(np.sqrt(z + 0j)) < 1e-12:
        raise NumericalError("z too close to the essential spectrum for a "
                             "Dirichlet box")
    rhs = np.asarray(f, dtype=complex).copy()
    if edge_mass(grid, rhs) > tail_tol:
        raise NumericalError("resolvent data has edge mass above %.1e; "
                             "enlarge the box" % tail_tol)
    op = hamiltonian_operator(pot, theta, h, grid).shifted(z)
    rhs[0] = 0.0
    rhs[n - 1] = 0.0
    op.set_row(0, [0], [1.0])
    op.set_row(n - 1, [n - 1], [1.0])
    u = op.solve(rhs)
    if not np.isfinite(u).all():
        raise NumericalError("resolvent solve produced non-finite values")
    if edge_mass(grid, u) > tail_tol:
        raise NumericalError("resolvent solution has edge mass above %.1e; "
                             "enlarge the box" % tail_tol)
    return u


def cn_step_floor(pot: Potential | TimeFamily, h: float, grid: SpatialGrid,
                  t_final: float) -> int:
    """Smallest admissible Crank-Nicolson step count for a horizon.

    Derived from the accuracy guard n_t >= t * ||H||_est / 0.1 with the
    standard bound ||H||_est = 4 h^2 / dx^2 + sup V on the discretized
    operator; below this the scheme is still stable but the phase error at
    the top of the discrete spectrum is no longer small.
    """
    if isinstance(pot, Potential):
        v_sup = pot.v_sup
    else:
        v_sup = pot.base.v_sup + abs(pot.amp)
    norm_est = 4.0 * h * h / (grid.dx * grid.dx) + v_sup
    return max(1, int(np.ceil(t_final * norm_est / 0.1)))


def propagate_cn(pot: Potential | TimeFamily, theta: complex, h: float,
                 grid: SpatialGrid, u0: np.ndarray, t_final: float,
                 n_t: int, record: bool = False, enforce_guard: bool = True):
    """Crank-Nicolson propagation with homogeneous Dirichlet box ends.

    A time-dependent potential family is frozen cellwise at the right endpoint
    of each step.  Returns the final state, or the full (n_t + 1, n) history
    when record is set.  The step count must satisfy the accuracy guard of
    ``cn_step_floor`` unless ``enforce_guard`` is lifted (norm-drift audits
    are exact in n_t and may run cheaper).
    """
    if n_t < 1:
        raise ValueError("n_t must be positive")
    if enforce_guard and t_final > 0:
        floor = cn_step_floor(pot, h, grid, t_final)
        if n_t < floor:
            raise ValueError(f"n_t={n_t} below the accuracy guard {floor} "
                             f"for this horizon and grid")
    tau = t_final / n_t
    n = grid.n
    u = np.asarray(u0, dtype=complex).copy()
    u[0] = 0.0
    u[-1] = 0.0
    hist = [u.copy()] if record else None
    static = isinstance(pot, Potential)
    op = hamiltonian_operator(pot, theta, h, grid) if static else None
    for j in range(n_t):
        if not static:
            frozen = pot.frozen((j + 1) * tau)
            op = hamiltonian_operator(frozen, theta, h, grid)
        plus = BandedOperator(grid=grid, bands=0.5j * tau * op.bands)
        plus.bands[2] += 1.0
        minus_bands = -0.5j * tau * op.bands
        minus_bands[2] += 1.0
        rhs = BandedOperator(grid=grid, bands=minus_bands).apply(u)
        rhs[0] = 0.0
        rhs[-1] = 0.0
        plus.set_row(0, [0], [1.0])
        plus.set_row(n - 1, [n - 1], [1.0])
        u = plus.solve(rhs)
        if record:
            hist.append(u.copy())
    if not np.isfinite(u).all():
        raise NumericalError("propagation produced non-finite values")
    return np.array(hist) if record else u


def _gauss(x, c, s):
    g = np.exp(-((x - c) ** 2) / s)
    return g, -2.0 * (x - c) / s * g, (-2.0 / s + 4.0 * (x - c) ** 2 / s ** 2) * g


class ManufacturedCase:
    """Piecewise-analytic function satisfying the interface conditions.

    The interior branch is a fixed Gaussian; each exterior branch is a
    combination of two independent Gaussians whose coefficients are solved
    from the two interface conditions on its side.  Values and second
    derivatives are closed form, so the forcing (H - z) u is exact and the
    discrete solution can be compared against u itself.
    """

    def __init__(self, pot: Potential, theta: complex):
        self.pot = pot
        self.theta = theta
        lam = np.exp(-theta / 2.0)
        lam3 = lam ** 3
        a, b = pot.a, pot.b
        span = b - a
        self._f = (a + 0.40 * span, 1.1 * span * span)
        self._g = (a + 0.65 * span, 0.6 * span * span)

        def pair(x):
            f, df, _ = _gauss(np.asarray(x, dtype=float), *self._f)
            g, dg, _ = _gauss(np.asarray(x, dtype=float), *self._g)
            return f, df, g, dg

        fa, dfa, ga, dga = pair(a)
        mat_a = np.array([[lam * fa, lam * ga], [lam3 * dfa, lam3 * dga]],
                         dtype=complex)
        self._left = np.linalg.solve(mat_a, np.array([fa, dfa], dtype=complex))
        fb, dfb, gb, dgb = pair(b)
        mat_b = np.array([[lam * fb, lam * gb], [lam3 * dfb, lam3 * dgb]],
                         dtype=complex)
        self._right = np.linalg.solve(mat_b, np.array([fb, dfb], dtype=complex))

    def _branch(self, x: np.ndarray, coef) -> tuple:
        f, _, d2f = _gauss(x, *self._f)
        g, _, d2g = _gauss(x, *self._g)
        if coef is None:
            return f, d2f
        return coef[0] * f + coef[1] * g, coef[0] * d2f + coef[1] * d2g

    def on_grid(self, grid: SpatialGrid) -> tuple:
        """Exact values and exact forcing H u on the grid nodes."""
        u = np.zeros(grid.n, dtype=complex)
        d2 = np.zeros(grid.n, dtype=complex)
        for sl, coef in ((grid.left, self._left),
                         (grid.interior, None),
                         (grid.right, self._right)):
            u[sl], d2[sl] = self._branch(grid.x[sl], coef)
        return u, d2


def audit_manufactured(pot: Potential, theta: complex, h: float,
                       x_min: float, x_max: float,
                       sizes=(257, 513, 1025, 2049)) -> tuple:
    """Convergence of the discrete solve against a closed-form solution.

    Returns (dx values, sup errors); the caller fits the order.  Boundary rows
    pin the exact values, so the measured error is pure interior and interface
    discretization.
    """
    case = ManufacturedCase(pot, theta)
    dxs = []
    errs = []
    for n in sizes:
        grid = make_spatial_grid(pot.a, pot.b, x_min, x_max, n)
        u_exact, d2 = case.on_grid(grid)
        f = -h * h * d2 + pot(grid.x) * u_exact
        op = hamiltonian_operator(pot, theta, h, grid)
        rhs = f.astype(complex)
        rhs[0] = u_exact[0]
        rhs[-1] = u_exact[-1]
        op.set_row(0, [0], [1.0])
        op.set_row(grid.n - 1, [grid.n - 1], [1.0])
        u = op.solve(rhs)
        dxs.append(grid.dx)
        errs.append(float(np.max(np.abs(u - u_exact)))
                    / float(np.max(np.abs(u_exact))))
    return np.array(dxs), np.array(errs)


def audit_norm_drift(pot: Potential, h: float, grid: SpatialGrid,
                     u0: np.ndarray, t_final: float, n_t: int) -> float:
    """Largest relative norm deviation along a Crank-Nicolson trajectory.

    With theta = 0 the discretization is Hermitian and each step is unitary
    up to roundoff, so any drift flags an assembly defect.  Drift is exact in
    n_t, so the accuracy guard is lifted here.
    """
    hist = propagate_cn(pot, 0.0, h, grid, u0, t_final, n_t, record=True,
                        enforce_guard=False)
    w = grid.weights
    norms = np.sqrt(np.real(np.sum(w * np.abs(hist) ** 2, axis=1)))
    return float(np.max(np.abs(norms / norms[0] - 1.0)))


def audit_box_doubling(pot: Potential, z: complex, theta: complex, h: float,
                       grid: SpatialGrid) -> float:
    """Sensitivity of the resolvent solve to doubling the computational box."""
    f = np.exp(-((grid.x - 0.5 * (pot.a + pot.b)) ** 2)).astype(complex)
    u1 = resolvent_solve(pot, z, theta, h, grid, f)
    pad = grid.n // 2
    big = extend_grid(grid, pad, pad)
    fbig = np.zeros(big.n, dtype=complex)
    fbig[pad:pad + grid.n] = f
    u2 = resolvent_solve(pot, z, theta, h, big, fbig)[pad:pad + grid.n]
    scale = float(np.max(np.abs(u1)))
    return float(np.max(np.abs(u1 - u2)) / scale)
