"""Exact ergodic optimization on edge shifts of finite directed graphs.

Computes maximum ergodic averages and maximizing-measure supports for
locally constant potentials in exact rational arithmetic, decides
uniqueness via Gateaux differentiability of the value function, builds the
hyperplane arrangement covering the non-uniqueness set, and runs the
semi-continuity and typicality experiments that go with those facts.
"""

from .core import (
    CycleMeasure,
    Edge,
    Graph,
    Measure,
    Potential,
    Rational,
    build_graph,
    cycle_to_measure,
    format_rational,
    higher_block_recode,
    integrate,
    parse_rational,
    sup_norm,
    validate_measure,
)
from .convexity import (
    directional_derivative,
    is_gateaux,
    max_face_integral,
    sandwich_check,
    witness_discontinuity,
)
from .errors import (
    CycleBudgetExceeded,
    DimensionMismatch,
    ErgoptError,
    GapUndefined,
    GapViolation,
    InternalError,
    InvalidBlockTable,
    MalformedEdge,
    NoCycle,
    NotAMeasure,
    NotASimpleCycle,
    ParseError,
    RetryBudgetExceeded,
    UniqueInput,
    ValidationError,
)
from .optimize import (
    DEFAULT_CYCLE_BUDGET,
    CriticalGraph,
    beta,
    beta_oracle,
    critical_graph,
    cycle_mean,
    cycles_within,
    enumerate_simple_cycles,
    howard_beta,
    is_unique,
    iter_simple_cycles,
    max_cycle_mean,
    second_gap,
)
from .typicality import (
    Hyperplane,
    MonteCarloReport,
    PerturbResult,
    build_hyperplanes,
    covering_check,
    enumerate_cycle_measures,
    monte_carlo,
    perturb_to_unique,
    usc_inclusion_check,
)

__version__ = "0.1.0"
