"""Periodic traveling waves of the Whitham equation.

Spectral cosine collocation for steady waves, Newton solvers in speed and
waveheight parametrizations, branch continuation, small-amplitude
expansions, and a pseudo-spectral integrator used to check computed waves.
"""
from .spectral import (
    CosineSpectrum,
    DispersionModel,
    apply_multiplier,
    collocation_grid,
    cosine_analysis,
    cosine_synthesis,
    operator_matrix,
    symbol,
)
from .steady import (
    SingularJacobianError,
    SolverReport,
    WaveProfile,
    galilean_shift,
    jacobian,
    newton_fixed_height,
    newton_fixed_speed,
    residual,
    waveheight,
)
from .asymptotics import kdv_expansion, whitham_coefficients, whitham_expansion
from .continuation import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    ParamMode,
    Termination,
    bifurcation_speed,
    small_amplitude_guess,
    solve_at_height,
    solve_at_speed,
    trace_branch,
    verify_branch_point,
)
from .evolution import (
    EvolutionConfig,
    EvolutionState,
    evolution_rhs,
    evolve,
    midpoint_step,
    traveling_wave_metrics,
)

__version__ = "0.1.0"

__all__ = [
    "kdv_expansion",
    "whitham_coefficients",
    "whitham_expansion",
    "CosineSpectrum",
    "DispersionModel",
    "apply_multiplier",
    "collocation_grid",
    "cosine_analysis",
    "cosine_synthesis",
    "operator_matrix",
    "symbol",
    "SingularJacobianError",
    "SolverReport",
    "WaveProfile",
    "galilean_shift",
    "jacobian",
    "newton_fixed_height",
    "newton_fixed_speed",
    "residual",
    "waveheight",
    "Branch",
    "BranchPoint",
    "ContinuationConfig",
    "ParamMode",
    "Termination",
    "bifurcation_speed",
    "small_amplitude_guess",
    "solve_at_height",
    "solve_at_speed",
    "trace_branch",
    "verify_branch_point",
    "EvolutionConfig",
    "EvolutionState",
    "evolution_rhs",
    "evolve",
    "midpoint_step",
    "traveling_wave_metrics",
]
