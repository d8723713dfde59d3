"""Spatial and spectral grids.

Spatial grids are uniform and aligned so that the interface points a and b fall
exactly midway between adjacent nodes. Every discrete object in the package
(potential samples, finite-difference rows, Jost-function tabulations) relies on
that alignment: no node ever sits on a jump of the potential or of a modified
eigenfunction, so one-sided quantities are always well defined nodewise.

Spectral grids are symmetric bands +-[k_min, k_max] with k = 0 excluded and
trapezoid quadrature weights on each half.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid with interfaces a < b midway between adjacent nodes."""

    x: np.ndarray
    dx: float
    a: float
    b: float
    ia: int  # index of the last node left of a
    ib: int  # index of the last node left of b

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def x_min(self) -> float:
        return float(self.x[0])

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    @property
    def interior(self) -> slice:
        """Nodes strictly inside (a, b)."""
        return slice(self.ia + 1, self.ib + 1)

    @property
    def left(self) -> slice:
        """Nodes strictly left of a."""
        return slice(0, self.ia + 1)

    @property
    def right(self) -> slice:
        """Nodes strictly right of b."""
        return slice(self.ib + 1, self.n)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights."""
        w = np.full(self.n, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w

    def norm(self, u: np.ndarray) -> float:
        """Discrete L2 norm (trapezoid)."""
        return float(np.sqrt(np.real(np.sum(self.weights * np.abs(u) ** 2))))

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Discrete L2 inner product, conjugate-linear in the first slot."""
        return complex(np.sum(self.weights * np.conj(u) * v))


def make_spatial_grid(a: float, b: float, x_min: float, x_max: float, n: int) -> SpatialGrid:
    """Build the aligned uniform grid closest to the request.

    The step is adjusted so (b - a) is an integer number of steps and the extent
    so that a sits exactly midway between two nodes; b then does as well. The
    realized n and extent may differ slightly from the request.
    """
    if not (x_min < a < b < x_max):
        raise ValueError("need x_min < a < b < x_max")
    if n < 16:
        raise ValueError("grid too small")
    dx_req = (x_max - x_min) / (n - 1)
    m = max(int(round((b - a) / dx_req)), 2)
    dx = (b - a) / m
    p = max(int(round((a - x_min) / dx - 0.5)), 2)  # nodes strictly left of a, minus 1
    q = max(int(round((x_max - b) / dx - 0.5)), 2)  # nodes strictly right of b, minus 1
    start = a - (p + 0.5) * dx
    ntot = p + m + q + 2
    x = start + dx * np.arange(ntot)
    return SpatialGrid(x=x, dx=dx, a=a, b=b, ia=p, ib=p + m)


def refine_grid(grid: SpatialGrid, factor: int) -> SpatialGrid:
    """Refine by an odd factor; keeps endpoints, alignment and node subset.

    Odd factors preserve the half-step offset of a and b, and every coarse node
    is a fine node (stride = factor), so restrictions are exact.
    """
    if factor < 1 or factor % 2 == 0:
        raise ValueError("refinement factor must be odd and positive")
    if factor == 1:
        return grid
    dx = grid.dx / factor
    half = (factor - 1) // 2
    p = factor * grid.ia + half
    m = factor * (grid.ib - grid.ia)
    q = factor * (grid.n - 1 - grid.ib - 1) + half
    start = grid.a - (p + 0.5) * dx
    x = start + dx * np.arange(p + m + q + 2)
    return SpatialGrid(x=x, dx=dx, a=grid.a, b=grid.b, ia=p, ib=p + m)


def edge_mass(grid: SpatialGrid, u: np.ndarray, cells: int = 8) -> float:
    """Fraction of the squared norm sitting in the outermost cells.

    Used as the computable stand-in for "compactly supported away from the
    box ends": preconditions on transforms and Dirichlet-box solves bound
    this fraction rather than inspecting analytic tails.
    """
    w = grid.weights
    dens = w * np.abs(np.asarray(u)) ** 2
    total = float(np.sum(dens))
    if total == 0.0:
        return 0.0
    edge = float(np.sum(dens[:cells]) + np.sum(dens[-cells:]))
    return edge / total


def extend_grid(grid: SpatialGrid, pad_left: int, pad_right: int) -> SpatialGrid:
    """Extend a grid by whole steps on either side.

    The spacing and interface alignment are unchanged, so every node of the
    original grid is a node of the extended one (offset by pad_left).
    """
    if pad_left < 0 or pad_right < 0:
        raise ValueError("padding must be nonnegative")
    dx = grid.dx
    xl = grid.x[0] - dx * np.arange(pad_left, 0, -1)
    xr = grid.x[-1] + dx * np.arange(1, pad_right + 1)
    x = np.concatenate([xl, grid.x, xr])
    return SpatialGrid(x=x, dx=dx, a=grid.a, b=grid.b,
                       ia=grid.ia + pad_left, ib=grid.ib + pad_left)


@dataclass(frozen=True)
class SpectralGrid:
    """Symmetric momentum band +-[k_min, k_max], k = 0 excluded."""

    k: np.ndarray  # ascending, negative block then positive block
    w: np.ndarray  # trapezoid weights per half-band
    k_min: float
    k_max: float

    def __post_init__(self):
        object.__setattr__(self, "k", np.asarray(self.k, dtype=float))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))

    @property
    def n(self) -> int:
        return self.k.size

    @property
    def n_pos(self) -> int:
        return self.n // 2

    @property
    def kpos(self) -> np.ndarray:
        """Positive nodes, ascending."""
        return self.k[self.n_pos:]

    @property
    def dk(self) -> float:
        return float(self.kpos[1] - self.kpos[0])

    def norm(self, c: np.ndarray) -> float:
        return float(np.sqrt(np.real(np.sum(self.w * np.abs(c) ** 2))))


def make_k_grid(k_min: float, k_max: float, n_k: int) -> SpectralGrid:
    """Spectral grid with n_k nodes per sign (2 n_k total), trapezoid weights."""
    if not (0.0 < k_min < k_max):
        raise ValueError("need 0 < k_min < k_max")
    if n_k < 64:
        raise ValueError("n_k must be >= 64")
    kp = np.linspace(k_min, k_max, n_k)
    wp = np.full(n_k, kp[1] - kp[0])
    wp[0] *= 0.5
    wp[-1] *= 0.5
    k = np.concatenate([-kp[::-1], kp])
    w = np.concatenate([wp[::-1], wp])
    return SpectralGrid(k=k, w=w, k_min=k_min, k_max=k_max)
