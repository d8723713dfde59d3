"""Semiclassical barrier scattering with scale-dependent interface conditions.

Numerical study of one-dimensional semiclassical Schrodinger operators whose
domain couples the barrier exterior to the interior through scale-dependent
jump conditions at the barrier endpoints.  The package builds the scattering
(Jost) solutions and their interface calculus, the rank-four coupling
correction, generalized eigenfunction transforms, stationary wave operators,
frozen-coefficient propagators for slowly varying barriers, and a
finite-difference oracle that everything is verified against.
"""

from .config import (ConfigError, ExperimentConfig, default_config,
                     load_config, parse_config)
from .dynamics import (CellFamily, FrozenFamilyCache, autonomous_deviation,
                       build_cell_family, freezing_envelope,
                       ladder_convergence, nonautonomous_deviation,
                       stepwise_convergence, stepwise_evolve,
                       stepwise_propagate)
from .experiments import EXPERIMENTS, run_experiment
from .fitting import FitResult, fit_exponent
from .greenfun import (DefectBasis, resolvent_apply, trace_estimate_families,
                       zeta_of)
from .grids import (SpatialGrid, SpectralGrid, extend_grid, make_k_grid,
                    make_spatial_grid, refine_grid)
from .integrate import NumericalError
from .jost import (JostFamily, JostSolution, ScatteringData,
                   build_jost_family, scattering_data, solve_jost,
                   solve_jost_pair)
from .krein import (ModifiedEigenfunction, coupling_matrix, det_scale,
                    interface_matrices, modified_eigenfunction,
                    modified_resolvent_apply, singular_scan)
from .potentials import Potential, TimeFamily, smooth_barrier, square_barrier
from .reporting import CriterionResult, ExperimentReport, emit_report
from .spectral import EigenFamily, gaussian_packet, packet_tail_mass
from .waveop import WaveOperator, intertwining_residual, synthesize_modified
from . import oracle

__version__ = "0.1.0"

__all__ = [
    "CellFamily", "ConfigError", "CriterionResult", "DefectBasis",
    "EXPERIMENTS", "EigenFamily", "ExperimentConfig", "ExperimentReport",
    "FitResult", "FrozenFamilyCache", "JostFamily", "JostSolution",
    "ModifiedEigenfunction", "NumericalError", "Potential", "ScatteringData",
    "SpatialGrid", "SpectralGrid", "TimeFamily", "WaveOperator",
    "autonomous_deviation", "build_cell_family", "build_jost_family",
    "coupling_matrix", "default_config", "det_scale", "emit_report",
    "extend_grid", "fit_exponent", "freezing_envelope", "gaussian_packet",
    "interface_matrices", "intertwining_residual", "ladder_convergence",
    "load_config", "make_k_grid", "make_spatial_grid", "modified_eigenfunction",
    "modified_resolvent_apply", "nonautonomous_deviation", "oracle",
    "packet_tail_mass", "parse_config", "refine_grid", "resolvent_apply",
    "run_experiment", "scattering_data", "singular_scan", "smooth_barrier",
    "solve_jost", "solve_jost_pair", "square_barrier", "stepwise_convergence",
    "stepwise_evolve", "stepwise_propagate", "synthesize_modified",
    "trace_estimate_families", "zeta_of",
]
