"""Exact overlap engine and scaling laboratory for nonlinear quantum phase estimation."""

from .errors import (
    DimensionError,
    Indistinguishable,
    MetroscopeError,
    NoCrossing,
    NotCovered,
    TermCountOverflow,
    TruncationOverflow,
)
from .metrology import (
    CramerRaoQuery,
    Scenario,
    ThetaMinRequest,
    ThetaMinResult,
    analytic_distinguishability,
    cramer_rao_rhs,
    distinguishability,
    predicted_theta_min,
    scenario_evolution,
    theta_min,
)
from .overlap import (
    EvolutionSpec,
    Generator,
    SeriesBudget,
    collective_factor,
    evolved_overlap,
    overlap_curve,
    single_mode_factor,
)
from .scaling import (
    ExperimentRecord,
    RefinementPlan,
    ScalingFit,
    SweepSpec,
    fit_power_law,
    refinement_plan,
    run_sweep,
    table_report,
)
from .states import (
    Coherent,
    Family,
    FamilySpec,
    Number,
    SuperpositionState,
    build_family,
    inner_product,
    mean_photon_number,
    nominal_mean_photon,
)

__version__ = "0.1.0"
