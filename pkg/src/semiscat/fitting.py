"""Least-squares exponent estimation for scale sweeps.

Every acceptance quantity of the expansions is a rate: some sequence of
norms against h (or 1/n) whose log-log slope must clear a bound.  The fits
here are ordinary least squares in (log x, log y) with the slope standard
error from the usual residual variance estimate; values that have already
converged to zero are dropped (they carry no rate information, only solver
noise) and the drop is reported rather than silent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .integrate import NumericalError

__all__ = ["FitResult", "fit_exponent"]

CONVERGED_FLOOR = 1e-14


@dataclass
class FitResult:
    slope: float
    stderr: float
    intercept: float
    n_used: int
    n_dropped: int
    used_mask: np.ndarray = field(repr=False)

    @property
    def constant(self) -> float:
        """exp(intercept): the fitted prefactor of the power law."""
        return float(np.exp(self.intercept))


def fit_exponent(xs, vals, min_points: int = 4,
                 floor: float = CONVERGED_FLOOR) -> FitResult:
    """Fit vals ~ C * xs**slope by least squares in log-log coordinates.

    Entries with vals < floor are treated as converged to zero and excluded;
    fewer than ``min_points`` usable pairs is an error (a rate cannot be
    certified from a near-empty sweep).
    """
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if xs.shape != vals.shape or xs.ndim != 1:
        raise ValueError("xs and vals must be matching 1-d arrays")
    if np.any(xs <= 0.0):
        raise ValueError("scales must be positive")
    if np.any(vals < 0.0) or np.any(~np.isfinite(vals)):
        raise NumericalError("fit input contains negative or non-finite values")
    mask = vals >= floor
    n_used = int(np.count_nonzero(mask))
    if n_used < min_points:
        raise NumericalError(
            f"only {n_used} usable points (need {min_points}); "
            f"{len(vals) - n_used} dropped below {floor:g}")
    lx = np.log(xs[mask])
    ly = np.log(vals[mask])
    design = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = ly - design @ coef
    if n_used > 2:
        s2 = float(resid @ resid) / (n_used - 2)
        denom = float(np.sum((lx - lx.mean()) ** 2))
        stderr = float(np.sqrt(s2 / denom))
    else:
        stderr = 0.0
    return FitResult(slope=slope, stderr=stderr, intercept=intercept,
                     n_used=n_used, n_dropped=int(len(vals) - n_used),
                     used_mask=mask)
