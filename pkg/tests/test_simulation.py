import numpy as np
import pytest

from affectkit.epa import EpaVector, LexiconEntry
from affectkit.equations import CoefficientSet, EventProfile, deflection, impression
from affectkit.errors import CategoryError, ConfigurationError
from affectkit.simulation import (
    PartySpec,
    ScriptEvent,
    SimulationState,
    create_state,
    run_script,
    step_event,
)

from conftest import random_coefficients, small_lexicon


def make_state():
    return SimulationState.create(
        EpaVector(1.5, 0.52, 0.81), EpaVector(-1.14, 1.58, 0.45)
    )


def behavior(term="greet", epa=(1.9, 1.0, 1.1)):
    return LexiconEntry(term, "behavior", EpaVector(*epa))


def test_initial_transients_equal_fundamentals():
    state = make_state()
    assert state.actor_transient == state.actor_fundamental
    assert state.object_transient == state.object_fundamental
    assert state.history == ()
    assert state.state_deflection() == 0.0


def test_identity_coefficients_are_a_fixed_point():
    coeffs = CoefficientSet.identity()
    state = make_state()
    for side in ("actor", "object", "actor"):
        state = step_event(state, behavior(), side, coeffs)
    assert state.actor_transient == state.actor_fundamental
    assert state.object_transient == state.object_fundamental
    # With transients pinned at fundamentals every event deflection is zero.
    assert [step.deflection for step in state.history] == [0.0, 0.0, 0.0]


def test_two_steps_equal_manual_composition(rng):
    coeffs = random_coefficients(rng)
    state = make_state()
    b1 = behavior("greet", (1.9, 1.0, 1.1))
    b2 = behavior("argue with", (-1.2, 0.6, 1.6))
    stepped = step_event(step_event(state, b1, "actor", coeffs), b2, "object", coeffs)

    # Manual composition: apply impression() twice on intermediate profiles.
    first = impression(
        EventProfile(state.actor_transient, b1.epa, state.object_transient), coeffs
    )
    second = impression(EventProfile(first.object, b2.epa, first.actor), coeffs)
    np.testing.assert_array_equal(
        stepped.actor_transient.as_array(), second.object.as_array()
    )
    np.testing.assert_array_equal(
        stepped.object_transient.as_array(), second.actor.as_array()
    )


def test_object_acting_swaps_slots(rng):
    coeffs = random_coefficients(rng)
    state = make_state()
    b = behavior()
    stepped = step_event(state, b, "object", coeffs)
    post = impression(
        EventProfile(state.object_transient, b.epa, state.actor_transient), coeffs
    )
    assert stepped.object_transient == post.actor
    assert stepped.actor_transient == post.object
    fundamentals = EventProfile(state.object_fundamental, b.epa, state.actor_fundamental)
    assert stepped.history[-1].deflection == deflection(fundamentals, post)


def test_step_event_is_pure_and_deterministic(rng):
    coeffs = random_coefficients(rng)
    state = make_state()
    b = behavior()
    once = step_event(state, b, "actor", coeffs)
    twice = step_event(state, b, "actor", coeffs)
    assert once == twice
    assert state.history == ()
    assert state.actor_transient == state.actor_fundamental


def test_wrong_category_rejected():
    state = make_state()
    coeffs = CoefficientSet.identity()
    identity_entry = LexiconEntry("boss", "identity", EpaVector(0.5, 1.8, 0.5))
    with pytest.raises(CategoryError):
        step_event(state, identity_entry, "actor", coeffs)
    with pytest.raises(ConfigurationError):
        step_event(state, behavior(), "bystander", coeffs)


def test_history_grows_one_step_per_event(rng):
    coeffs = random_coefficients(rng)
    state = make_state()
    for i in range(5):
        state = step_event(state, behavior(), "actor" if i % 2 == 0 else "object", coeffs)
        assert len(state.history) == i + 1
        assert state.history[-1].index == i


def test_create_state_amalgamates_modifier():
    lex = small_lexicon()
    from affectkit.equations import amalgamate

    state = create_state(
        PartySpec(identity="id00"),
        PartySpec(identity="id01", modifier="mod00"),
        lex,
    )
    assert state.actor_fundamental == lex.get("id00", "identity").epa
    expected = amalgamate(lex.get("mod00", "modifier").epa, lex.get("id01", "identity").epa)
    assert state.object_fundamental == expected


def test_run_script_matches_manual_stepping(rng):
    lex = small_lexicon()
    coeffs = random_coefficients(rng)
    events = [ScriptEvent("actor", "act00"), ScriptEvent("object", "act01")]
    scripted = run_script(PartySpec("id00"), PartySpec("id01"), events, lex, coeffs)

    state = create_state(PartySpec("id00"), PartySpec("id01"), lex)
    for event in events:
        state = step_event(state, lex.get(event.behavior, "behavior"), event.side, coeffs)
    assert scripted == state
