"""Sequential event simulation between two interaction partners.

A simulation tracks two parties ("actor" and "object" in session terms),
each with a fixed fundamental sentiment set at creation (via amalgamation
when a modifier is present) and a transient impression that drifts as
events apply.  Each event names the acting side and a behavior; the acting
party occupies the A slot of the event profile, the other party the O slot,
and the behavior contributes its fundamental sentiment.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

from .epa import EpaVector, LexiconEntry, SentimentLexicon
from .equations import (
    AmalgamationCoefficients,
    CoefficientSet,
    EventProfile,
    amalgamate,
    deflection,
    impression,
)
from .errors import CategoryError, ConfigurationError

SIDES = ("actor", "object")


@dataclass(frozen=True)
class SimulationStep:
    """One applied event with the transients it produced."""

    index: int
    side: str
    behavior_term: str
    behavior_epa: EpaVector
    behavior_transient: EpaVector
    actor_transient: EpaVector
    object_transient: EpaVector
    deflection: float


@dataclass(frozen=True)
class SimulationState:
    """Value-type state of one two-party interaction."""

    actor_fundamental: EpaVector
    object_fundamental: EpaVector
    actor_transient: EpaVector
    object_transient: EpaVector
    history: tuple[SimulationStep, ...] = ()

    @staticmethod
    def create(actor_fundamental: EpaVector, object_fundamental: EpaVector) -> "SimulationState":
        return SimulationState(
            actor_fundamental=actor_fundamental,
            object_fundamental=object_fundamental,
            actor_transient=actor_fundamental,
            object_transient=object_fundamental,
        )

    def state_deflection(self) -> float:
        """Squared distance of current party transients from fundamentals."""
        da = self.actor_fundamental.as_array() - self.actor_transient.as_array()
        do = self.object_fundamental.as_array() - self.object_transient.as_array()
        return float(da @ da + do @ do)


def step_event(
    state: SimulationState,
    behavior_entry: LexiconEntry,
    acting_side: str,
    coeffs: CoefficientSet,
) -> SimulationState:
    """Apply one event and return the updated state.

    Builds the event profile from the parties' current transients (acting
    side in the A slot) and the behavior's fundamental EPA, applies the
    impression-change equations, writes the new transients back (slots
    swapped if the object acted), and appends the event deflection against
    fundamentals to the history.
    """
    if behavior_entry.category != "behavior":
        raise CategoryError(
            f"event behavior must have category 'behavior', got "
            f"{behavior_entry.category!r} for {behavior_entry.term!r}"
        )
    if acting_side not in SIDES:
        raise ConfigurationError(f"acting side must be one of {SIDES}, got {acting_side!r}")

    if acting_side == "actor":
        acting_trans, other_trans = state.actor_transient, state.object_transient
        acting_fund, other_fund = state.actor_fundamental, state.object_fundamental
    else:
        acting_trans, other_trans = state.object_transient, state.actor_transient
        acting_fund, other_fund = state.object_fundamental, state.actor_fundamental

    pre = EventProfile(acting_trans, behavior_entry.epa, other_trans)
    fundamentals = EventProfile(acting_fund, behavior_entry.epa, other_fund)
    post = impression(pre, coeffs)
    event_deflection = deflection(fundamentals, post)

    if acting_side == "actor":
        actor_trans, object_trans = post.actor, post.object
    else:
        actor_trans, object_trans = post.object, post.actor

    step = SimulationStep(
        index=len(state.history),
        side=acting_side,
        behavior_term=behavior_entry.term,
        behavior_epa=behavior_entry.epa,
        behavior_transient=post.behavior,
        actor_transient=actor_trans,
        object_transient=object_trans,
        deflection=event_deflection,
    )
    return replace(
        state,
        actor_transient=actor_trans,
        object_transient=object_trans,
        history=state.history + (step,),
    )


@dataclass(frozen=True)
class PartySpec:
    """Identity term plus optional modifier term for one interaction party."""

    identity: str
    modifier: str | None = None


def resolve_party(
    spec: PartySpec,
    lexicon: SentimentLexicon,
    amalg: AmalgamationCoefficients | None = None,
) -> EpaVector:
    """Look up a party's fundamental sentiment, amalgamating any modifier."""
    identity = lexicon.get(spec.identity, "identity")
    if spec.modifier is None:
        return identity.epa
    modifier = lexicon.get(spec.modifier, "modifier")
    return amalgamate(modifier.epa, identity.epa, amalg)


def create_state(
    actor: PartySpec,
    obj: PartySpec,
    lexicon: SentimentLexicon,
    amalg: AmalgamationCoefficients | None = None,
) -> SimulationState:
    return SimulationState.create(
        resolve_party(actor, lexicon, amalg), resolve_party(obj, lexicon, amalg)
    )


@dataclass(frozen=True)
class ScriptEvent:
    side: str
    behavior: str


def run_script(
    actor: PartySpec,
    obj: PartySpec,
    events: Sequence[ScriptEvent],
    lexicon: SentimentLexicon,
    coeffs: CoefficientSet,
    amalg: AmalgamationCoefficients | None = None,
) -> SimulationState:
    """Create a state and apply a scripted event sequence."""
    state = create_state(actor, obj, lexicon, amalg)
    for event in events:
        behavior = lexicon.get(event.behavior, "behavior")
        state = step_event(state, behavior, event.side, coeffs)
    return state
