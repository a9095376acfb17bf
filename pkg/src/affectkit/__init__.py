"""Affect control theory engine and lexicon-expansion toolkit."""

from .epa import (
    CATEGORIES,
    EPA_MAX,
    EPA_MIN,
    EpaVector,
    LexiconEntry,
    SentimentLexicon,
    read_lexicon_csv,
    write_lexicon_csv,
)
from .equations import (
    BASIS_LABELS,
    AmalgamationCoefficients,
    CoefficientSet,
    EventProfile,
    amalgamate,
    basis_expand,
    deflection,
    impression,
    read_coefficients_tsv,
    write_coefficients_tsv,
)
from .simulation import (
    PartySpec,
    ScriptEvent,
    SimulationState,
    create_state,
    run_script,
    step_event,
)
from .solver import optimal_actor, optimal_behavior

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES",
    "EPA_MAX",
    "EPA_MIN",
    "EpaVector",
    "LexiconEntry",
    "SentimentLexicon",
    "read_lexicon_csv",
    "write_lexicon_csv",
    "BASIS_LABELS",
    "AmalgamationCoefficients",
    "CoefficientSet",
    "EventProfile",
    "amalgamate",
    "basis_expand",
    "deflection",
    "impression",
    "read_coefficients_tsv",
    "write_coefficients_tsv",
    "PartySpec",
    "ScriptEvent",
    "SimulationState",
    "create_state",
    "run_script",
    "step_event",
    "optimal_actor",
    "optimal_behavior",
]
