"""Evolving voter model simulator and analysis toolkit."""

from ._evoter import (
    AmeParams,
    FitError,
    InvalidInput,
    ModelParams,
    OpinionGraph,
    ame_eigenvalues,
    ame_fixed_point,
    arch_points,
    backward_distances,
    classify_run,
    cli,
    derive_from_Ub,
    drift,
    empirical_moments,
    fit_arch,
    initial_graph,
    load_snapshot,
    pa_equilibrium,
    pa_nu_c,
    run,
    save_snapshot,
)

__all__ = [
    "AmeParams",
    "FitError",
    "InvalidInput",
    "ModelParams",
    "OpinionGraph",
    "ame_eigenvalues",
    "ame_fixed_point",
    "arch_points",
    "backward_distances",
    "classify_run",
    "cli",
    "derive_from_Ub",
    "drift",
    "empirical_moments",
    "fit_arch",
    "initial_graph",
    "load_snapshot",
    "pa_equilibrium",
    "pa_nu_c",
    "run",
    "save_snapshot",
]
