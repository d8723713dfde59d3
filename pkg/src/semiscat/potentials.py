"""Compactly supported barrier potentials and time-dependent families.

A potential here vanishes identically outside [a, b] and is bounded below by a
positive constant on [a, b]. Profiles are chosen so that the jump at the
interfaces a and b is the generic case; grid alignment (see grids) guarantees
the jump never sits on a node.

Time families have the form V(t) = V_base + s(t) * psi with a fixed interior
profile psi that vanishes to second order at a and b, so V(t) - V(s) stays in
W^{2,inf} with support strictly controlled by [a, b].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PROFILES = ("none", "sin2", "well4")


@dataclass(frozen=True)
class Potential:
    """Barrier supported on [a, b]: V = v0 + bump * profile(x) inside, 0 outside."""

    a: float
    b: float
    v0: float
    bump: float = 0.0
    profile: str = "none"

    def __post_init__(self):
        if self.profile not in _PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")
        if not self.b > self.a:
            raise ValueError("need b > a")

    @property
    def is_constant(self) -> bool:
        """Piecewise constant on (a, b); integrators are exact for these."""
        return self.bump == 0.0 or self.profile == "none"

    @property
    def c_lower(self) -> float:
        """Essential lower bound on [a, b] (profiles take values in [0, 1])."""
        return self.v0 + min(0.0, self.bump)

    @property
    def v_sup(self) -> float:
        return self.v0 + max(0.0, self.bump)

    def _shape(self, x: np.ndarray) -> np.ndarray:
        t = (x - self.a) / (self.b - self.a)
        if self.profile == "sin2":
            return np.sin(np.pi * t) ** 2
        if self.profile == "well4":
            return 16.0 * (t * (1.0 - t)) ** 2
        return np.zeros_like(t)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x > self.a) & (x < self.b)
        v = np.zeros(x.shape)
        if np.any(inside):
            xi = x[inside]
            v[inside] = self.v0 + (self.bump * self._shape(xi) if self.bump else 0.0)
        return v

    def inside(self, x) -> np.ndarray:
        """Barrier values with the support indicator dropped (x assumed in (a, b))."""
        x = np.asarray(x, dtype=float)
        if self.bump:
            return self.v0 + self.bump * self._shape(x)
        return np.full(x.shape, self.v0)


def square_barrier(a: float = 0.0, b: float = 1.0, v0: float = 2.0) -> Potential:
    return Potential(a=a, b=b, v0=v0)


def smooth_barrier(a: float, b: float, v0: float, bump: float) -> Potential:
    """Barrier with a smooth interior modulation on top of the plateau v0."""
    return Potential(a=a, b=b, v0=v0, bump=bump, profile="sin2")


def validate_potential(pot: Potential, c: float) -> None:
    """Check the standing hypotheses: support in [a, b], V >= c > 0 inside."""
    if c <= 0:
        raise ValueError("lower bound must be positive")
    if pot.c_lower < c - 1e-14:
        raise ValueError(f"potential dips to {pot.c_lower} below the required bound {c}")
    t = np.linspace(0.0, 1.0, 4097)[1:-1]
    xs = pot.a + (pot.b - pot.a) * t
    vals = pot.inside(xs)
    if np.min(vals) < c - 1e-12:
        raise ValueError("sampled interior values violate the lower bound")
    outside = np.array([pot.a - 1.0, pot.a - 1e-9, pot.b + 1e-9, pot.b + 1.0])
    if np.any(pot(outside) != 0.0):
        raise ValueError("potential does not vanish outside [a, b]")


@dataclass(frozen=True)
class TimeFamily:
    """V(t) = base + s(t) * psi, psi(x) = 16 (x-a)^2 (b-x)^2 / (b-a)^4 on (a, b).

    psi and psi' vanish at a and b, and sup psi = 1, so the amplitude s(t) is
    also the sup norm of the time increment of the potential.
    """

    base: Potential
    amp: float
    horizon: float
    schedule: str = "linear"

    def __post_init__(self):
        if self.schedule not in ("linear", "sin2", "const"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.horizon <= 0:
            raise ValueError("need a positive horizon")
        if self.base.profile != "none":
            raise ValueError("time families are built over a plateau base")

    def amplitude(self, t: float) -> float:
        tau = min(max(t / self.horizon, 0.0), 1.0)
        if self.schedule == "linear":
            return self.amp * tau
        if self.schedule == "sin2":
            return self.amp * float(np.sin(np.pi * tau) ** 2)
        return self.amp

    def frozen(self, t: float) -> Potential:
        """Instantaneous potential V(t)."""
        return Potential(a=self.base.a, b=self.base.b, v0=self.base.v0,
                         bump=self.amplitude(t), profile="well4")

    def sup_step(self, t0: float, t1: float) -> float:
        """sup_x |V(t1) - V(t0)| = |s(t1) - s(t0)|."""
        return abs(self.amplitude(t1) - self.amplitude(t0))

    def lipschitz(self) -> float:
        """Lipschitz constant of t -> s(t) on [0, horizon]."""
        if self.schedule == "linear":
            return abs(self.amp) / self.horizon
        if self.schedule == "sin2":
            return abs(self.amp) * np.pi / self.horizon
        return 0.0

    def variation(self, t0: float, t1: float, n: int = 512) -> float:
        """Total variation of s over [t0, t1], by fine sampling."""
        ts = np.linspace(t0, t1, n + 1)
        s = np.array([self.amplitude(t) for t in ts])
        return float(np.sum(np.abs(np.diff(s))))


def validate_time_family(fam: TimeFamily) -> None:
    """Check the increment profile vanishes to the required order at a and b."""
    a, b = fam.base.a, fam.base.b
    eps = 1e-7 * (b - a)
    probe = Potential(a=a, b=b, v0=0.0, bump=1.0, profile="well4")
    edge = np.array([a + eps, b - eps])
    vals = probe.inside(edge)
    if np.max(np.abs(vals)) > 1e-10:
        raise ValueError("increment profile does not vanish at the interfaces")
    dvals = (probe.inside(edge + eps) - probe.inside(edge - eps)) / (2 * eps)
    if np.max(np.abs(dvals)) > 1e-5:
        raise ValueError("increment profile derivative does not vanish at the interfaces")
    validate_potential(fam.base, fam.base.c_lower)
    if fam.base.c_lower + min(0.0, fam.amp) <= 0:
        raise ValueError("time family can break the positive lower bound")
