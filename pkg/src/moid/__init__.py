"""Multi-objective influence diagrams solved by variable elimination.

Expected utilities are vectors (one coordinate per objective) and only
partially ordered, so solving yields a set of maximal expected-utility
vectors. Three pruning regimes are supported: the exact Pareto order,
grid-based epsilon-coverings that approximate the Pareto set within a
multiplicative factor, and the dominance cone induced by elicited tradeoffs
between objectives.
"""

from ._feasible import FeasibilityResult, NumericalInstabilityError
from .dominance import (
    CoveringParams,
    EpsilonCovering,
    EpsilonDomainError,
    GridIndex,
    TradeoffDominance,
    TradeoffSet,
    ZERO_CELL,
    check_consistency,
    cone_dual_rays,
    covering,
    epsilon_dominates,
    grid_map,
    load_tradeoffs,
    save_tradeoffs,
    tradeoff_dominates,
    tradeoff_feasibility,
)
from .dominance import linear_feasible
from .generator import (
    InfeasibleParamsError,
    MoidParams,
    TradeoffGenerationError,
    TradeoffParams,
    generate_moid,
    generate_recall_moid,
    generate_tradeoffs,
)
from .model import (
    DecisionRule,
    DiagramValidationError,
    InfluenceDiagram,
    Policy,
    PolicyError,
    ProbabilityTable,
    TemporalOrder,
    UtilityFunction,
    Variable,
    load_diagram,
    policy_expected_utility,
    save_diagram,
    validate_diagram,
)
from .solver import (
    BruteForceResult,
    DecisionInvariantError,
    EliminationOrder,
    PolicyCountError,
    SolveReport,
    SolverLimits,
    brute_force_solve,
    extract_all_optimal_policies,
    induced_width,
    legal_elimination_order,
    policy_count,
    solve,
)
from .vectors import (
    DimensionMismatchError,
    DominanceRelation,
    EmptySetError,
    PARETO,
    ParetoDominance,
    UtilitySet,
    UtilityVector,
    convex_set_dominates,
    maximal_set,
    pareto_dominates,
    set_max_union,
    set_scale,
    set_sum,
    uvec,
    zero_vector,
)

__version__ = "0.1.0"
