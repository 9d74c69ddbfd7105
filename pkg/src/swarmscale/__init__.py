"""Multiscale swarming with leader-follower exchange.

Stochastic particle ensembles and a nonlocal hydrodynamic solver for the
same interaction rules, plus the harness that measures how closely the
particle moments track the continuum fields as the scaling is refined.
"""

__version__ = "0.1.0"

from .backend import BACKEND, COMPILED
from .compare import (
    COMPARISON_COLUMNS,
    ComparisonRow,
    macro_reference,
    run_comparison_1d,
    run_comparison_grid,
    summarize_rows,
    write_comparison_csv,
)
from .grid import Grid, MacroState, Stencil, build_stencil
from .macro import (
    BoundaryConditions,
    CFLError,
    LinearSolveError,
    NonFiniteError,
    SolverConfig,
    bilinear_interpolate,
    cfl_check,
    linear_interpolate,
    nonlocal_source_leadership,
    nonlocal_source_velocity,
    run_macro,
    step_density,
    step_leadership,
    step_momentum,
)
from .metrics import (
    density_centroid,
    l2_distance,
    local_max_count,
    pattern_metrics,
    radial_profile,
    support_diameter,
)
from .micro import (
    Ensemble,
    MicroConfig,
    consistency_bound,
    init_ensemble,
    leadership_binary,
    leadership_core,
    leadership_generalized,
    moments_on_grid,
    run_micro,
    velocity_core,
    velocity_kick,
)
from .params import (
    CONFIG_KEYS,
    EffectiveParams,
    KernelSpec,
    ModelParams,
    apply_scaling,
    kernel_eval,
    kernel_moment,
    load_config,
    merged_params,
    parse_config,
)
from .scenarios import SCENARIO_NAMES, Scenario, build_scenario
from .snapshots import (
    SnapshotFormatError,
    SnapshotSeries,
    read_snapshot,
    snapshot_steps,
    write_snapshot,
)

__all__ = [
    "BACKEND",
    "COMPILED",
    "BoundaryConditions",
    "CFLError",
    "CONFIG_KEYS",
    "COMPARISON_COLUMNS",
    "ComparisonRow",
    "EffectiveParams",
    "Ensemble",
    "Grid",
    "KernelSpec",
    "LinearSolveError",
    "MacroState",
    "MicroConfig",
    "ModelParams",
    "NonFiniteError",
    "SCENARIO_NAMES",
    "Scenario",
    "SnapshotFormatError",
    "SnapshotSeries",
    "SolverConfig",
    "Stencil",
    "apply_scaling",
    "bilinear_interpolate",
    "build_scenario",
    "build_stencil",
    "cfl_check",
    "consistency_bound",
    "density_centroid",
    "init_ensemble",
    "kernel_eval",
    "kernel_moment",
    "l2_distance",
    "leadership_binary",
    "leadership_core",
    "leadership_generalized",
    "linear_interpolate",
    "load_config",
    "local_max_count",
    "macro_reference",
    "merged_params",
    "moments_on_grid",
    "nonlocal_source_leadership",
    "nonlocal_source_velocity",
    "parse_config",
    "pattern_metrics",
    "radial_profile",
    "read_snapshot",
    "run_comparison_1d",
    "run_comparison_grid",
    "run_macro",
    "run_micro",
    "snapshot_steps",
    "step_density",
    "step_leadership",
    "step_momentum",
    "summarize_rows",
    "support_diameter",
    "velocity_core",
    "velocity_kick",
    "write_comparison_csv",
    "write_snapshot",
]
