"""
SCALEFLOW - Package Root
Scaling flow on the measure class M[rho, sigma]: periodic approximation of orbits, chain
recurrence of flows on compact metric spaces and the embedding of such flows into the
measure flow

Modules:
- dynamics_core: spaces, flows, set distance, chains, pseudo-trajectories
- measure_model: atomic measures, growth class, scaling flow, Frechet metric
- periodization: truncation, periodization and the convergence experiments
- embedding: Keller map, Gaussian smoothing, cylinder measures
- example_systems: torus, circle and two-mass presets
- artifacts / config / cli_runner: files, configuration and the command line
"""

from .dynamics_core import (
    Chain,
    FlowSpec,
    SampledCurve,
    SearchBudget,
    SpaceSpec,
    adpt_defect,
    adpt_profile,
    density_defect,
    evaluate_flow,
    find_chain,
    is_chain_recurrent_at,
    sample_orbit,
    set_distance,
    validate_chain,
)
from .embedding import (
    CylinderMeasure,
    GaussianKernel,
    KellerMap,
    YGrid,
    build_nu,
    equivariance_defect,
    injectivity_gap,
    keller_embed,
    shift_nu,
    to_plane_measure,
)
from .errors import ConfigError, InvalidInputError, OutputError, ScaleflowError
from .example_systems import PRESETS, TwoMassConfig, hom_measure, torus_flow
from .measure_model import (
    AtomicMeasure,
    FrechetFamily,
    GrowthClass,
    LogPolarAtom,
    TestFunction,
    apply_flow,
    counting_function,
    frechet_distance,
    in_growth_class,
    pair,
)
from .periodization import (
    PeriodizedMeasure,
    convergence_experiment,
    flow_periodized,
    orbit_distance_experiment,
    pair_periodized,
    periodize,
    truncate,
)

__version__ = "0.3.0"

__all__ = [
    "__version__",
    "ScaleflowError",
    "InvalidInputError",
    "ConfigError",
    "OutputError",
    "SpaceSpec",
    "FlowSpec",
    "Chain",
    "SampledCurve",
    "SearchBudget",
    "evaluate_flow",
    "sample_orbit",
    "set_distance",
    "find_chain",
    "validate_chain",
    "is_chain_recurrent_at",
    "adpt_defect",
    "adpt_profile",
    "density_defect",
    "LogPolarAtom",
    "AtomicMeasure",
    "GrowthClass",
    "TestFunction",
    "FrechetFamily",
    "counting_function",
    "in_growth_class",
    "apply_flow",
    "pair",
    "frechet_distance",
    "PeriodizedMeasure",
    "truncate",
    "periodize",
    "pair_periodized",
    "flow_periodized",
    "convergence_experiment",
    "orbit_distance_experiment",
    "KellerMap",
    "keller_embed",
    "GaussianKernel",
    "YGrid",
    "CylinderMeasure",
    "build_nu",
    "shift_nu",
    "equivariance_defect",
    "injectivity_gap",
    "to_plane_measure",
    "PRESETS",
    "TwoMassConfig",
    "hom_measure",
    "torus_flow",
]
