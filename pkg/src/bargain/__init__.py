"""Logic-based bilateral bargaining: prioritized demand sets, deals, cores,
solutions, utilities, and belief-revision fixed points."""

from .logic import (
    And,
    Atom,
    Const,
    FALSE,
    Iff,
    Implies,
    ModelSet,
    Not,
    Or,
    ParseError,
    TRUE,
    UniverseCapError,
    UnknownAtomError,
    VariableUniverse,
    canonical_formula,
    entails,
    format_formula,
    is_satisfiable,
    models,
    parse_formula,
)
from .demand import (
    DemandSetError,
    LCViolation,
    PrioritizedDemandSet,
    build_hierarchy,
    validate_lc,
)
from .solver import (
    BargainingGame,
    CoreResult,
    EnumerationCapError,
    INFINITE,
    SolutionReport,
    SolverError,
    StrategyProfile,
    best_deals,
    check_contraction_independence,
    core,
    deal_witness,
    enumerate_deals,
    gen_cake,
    is_compatible,
    is_deal,
    is_subgame,
    is_weakly_pareto,
    make_profile,
    pi_max,
    solve,
    subgame,
    utilities,
    utility,
)
from .revision import (
    ClosedGame,
    ClosedSetDescriptor,
    FixpointReport,
    RemovalFamily,
    RevisionError,
    check_fixed_point,
    class_family_intersections,
    closed_pi_max,
    prioritized_revise,
    removal_candidates,
    revise_closed,
    solve_closed,
)
from .gamefile import (
    GameFile,
    GameFileError,
    load_game,
    load_game_text,
    load_profile,
    load_profile_text,
)

__version__ = "0.1.0"

__all__ = [n for n in dir() if not n.startswith("_")]
