"""protoforge: schedule synthesis for slotted broadcast networks.

Problems name a process count, a packet set held by one source, a horizon,
and a hears relation; the toolkit grounds the requirements over the finite
window, searches for a schedule in which every process sleeps, listens, or
transmits each slot, and checks the result against an independent
validator. Infeasible problems yield a minimized conflicting requirement
set. Schedules can be exported as SMT-LIB 2, replayed in a slotted
simulator, and compared against an always-on baseline for power use.
"""

from .actions import (
    GARBAGE,
    Action,
    ActionFormatError,
    ActionKind,
    LISTEN,
    SLEEP,
    action_domain,
    parse_action,
    transmit,
)
from .encoder import ConstraintSystem, GroundConstraint, describe, disable, encode
from .model import (
    GoalKind,
    LivenessMode,
    NetworkSpec,
    RequirementLabel,
    STRUCTURAL_LABELS,
    SpecError,
    SpecParseError,
    SpecValidationError,
    TAXONOMY,
    Topology,
    parse_spec,
    render_spec,
    topology_all,
    topology_line,
    validate_spec,
)
from .sim import (
    ComparisonReport,
    PowerModel,
    SimReport,
    SimulationGuardError,
    compare,
    run_baseline,
    simulate_trace,
)
from .smt import (
    ExternalResult,
    ExternalSolverError,
    SmtDocument,
    SmtResponseError,
    SolverTimeout,
    emit_smtlib,
    parse_value_response,
    run_external,
)
from .solver import (
    HorizonUndecided,
    SearchBudgetExceeded,
    SearchConfig,
    SolveResult,
    SolveStatus,
    UnsatCore,
    enumerate_all,
    min_horizon,
    solve,
    unsat_core_minimize,
)
from .trace import (
    ProtocolTrace,
    TraceFormatError,
    Violation,
    derive_knowledge,
    read_trace,
    satisfies,
    step_knowledge,
    write_trace,
)
from .trace import validate as validate_trace

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionFormatError",
    "ActionKind",
    "ComparisonReport",
    "ConstraintSystem",
    "ExternalResult",
    "ExternalSolverError",
    "GARBAGE",
    "GoalKind",
    "GroundConstraint",
    "HorizonUndecided",
    "LISTEN",
    "LivenessMode",
    "NetworkSpec",
    "PowerModel",
    "ProtocolTrace",
    "RequirementLabel",
    "SLEEP",
    "STRUCTURAL_LABELS",
    "SearchBudgetExceeded",
    "SearchConfig",
    "SimReport",
    "SimulationGuardError",
    "SmtDocument",
    "SmtResponseError",
    "SolveResult",
    "SolveStatus",
    "SolverTimeout",
    "SpecError",
    "SpecParseError",
    "SpecValidationError",
    "TAXONOMY",
    "Topology",
    "TraceFormatError",
    "UnsatCore",
    "Violation",
    "action_domain",
    "compare",
    "derive_knowledge",
    "describe",
    "disable",
    "emit_smtlib",
    "encode",
    "enumerate_all",
    "min_horizon",
    "parse_action",
    "parse_spec",
    "parse_value_response",
    "read_trace",
    "render_spec",
    "run_baseline",
    "run_external",
    "satisfies",
    "simulate_trace",
    "solve",
    "step_knowledge",
    "topology_all",
    "topology_line",
    "transmit",
    "unsat_core_minimize",
    "validate_spec",
    "validate_trace",
    "write_trace",
]
