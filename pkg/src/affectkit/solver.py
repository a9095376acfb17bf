"""Deflection-minimizing solves for an unknown behavior or actor sentiment.

Every basis term is degree <= 1 in each character's components, so with one
character slot unknown the residual

    r(v) = impression(profile(v)) - fundamentals(v)

is affine in v: r(v) = c + D v with D a 9x3 matrix.  The minimizer of
``|r(v)|^2`` comes from the 3x3 normal equations; a ridge fallback handles
the degenerate case where the objective does not depend on v.
"""

from __future__ import annotations

import numpy as np

from .epa import EpaVector
from .equations import CoefficientSet, basis_expand_batch
from .errors import InvalidInputError

RIDGE_LAMBDA = 1e-9
CONDITION_LIMIT = 1e10


def _check_finite(*vectors: EpaVector) -> None:
    for v in vectors:
        if not np.all(np.isfinite(v.as_array())):
            raise InvalidInputError(f"non-finite EPA input: {v}")


def _solve_affine_least_squares(residuals: np.ndarray) -> np.ndarray:
    """Minimize |c + D v|^2 given residuals at v=0 and the three unit vectors.

    residuals has shape (4, 9): row 0 is r(0), rows 1..3 are r(e_j).
    """
    c = residuals[0]
    d = (residuals[1:] - c).T  # 9x3
    normal = d.T @ d
    rhs = -d.T @ c
    cond = np.linalg.cond(normal)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        normal = normal + RIDGE_LAMBDA * np.eye(3)
    return np.linalg.solve(normal, rhs)


def _residuals_at_probes(
    profiles: np.ndarray, fundamentals: np.ndarray, coeffs: CoefficientSet
) -> np.ndarray:
    return basis_expand_batch(profiles) @ coeffs.matrix - fundamentals


_PROBES = np.vstack([np.zeros(3), np.eye(3)])


def optimal_behavior(
    actor_transient: EpaVector,
    object_transient: EpaVector,
    actor_fundamental: EpaVector,
    object_fundamental: EpaVector,
    coeffs: CoefficientSet,
) -> EpaVector:
    """Return the behavior sentiment that minimizes event deflection.

    The event profile is (actor_transient, v, object_transient); deflection
    is taken against (actor_fundamental, v, object_fundamental).
    """
    _check_finite(actor_transient, object_transient, actor_fundamental, object_fundamental)
    at = actor_transient.as_array()
    ot = object_transient.as_array()
    af = actor_fundamental.as_array()
    of = object_fundamental.as_array()
    profiles = np.hstack(
        [np.tile(at, (4, 1)), _PROBES, np.tile(ot, (4, 1))]
    )
    fundamentals = np.hstack([np.tile(af, (4, 1)), _PROBES, np.tile(of, (4, 1))])
    v = _solve_affine_least_squares(_residuals_at_probes(profiles, fundamentals, coeffs))
    return EpaVector.from_array(v)


def optimal_actor(
    behavior: EpaVector,
    object_transient: EpaVector,
    object_fundamental: EpaVector,
    coeffs: CoefficientSet,
) -> EpaVector:
    """Return the actor sentiment that best accounts for an observed behavior.

    Symmetric to optimal_behavior with the actor slot unknown: the unknown v
    enters the event profile as the actor transient and the fundamentals as
    the actor baseline.
    """
    _check_finite(behavior, object_transient, object_fundamental)
    b = behavior.as_array()
    ot = object_transient.as_array()
    of = object_fundamental.as_array()
    profiles = np.hstack([_PROBES, np.tile(b, (4, 1)), np.tile(ot, (4, 1))])
    fundamentals = np.hstack([_PROBES, np.tile(b, (4, 1)), np.tile(of, (4, 1))])
    v = _solve_affine_least_squares(_residuals_at_probes(profiles, fundamentals, coeffs))
    return EpaVector.from_array(v)


def behavior_deflection(
    candidate: EpaVector,
    actor_transient: EpaVector,
    object_transient: EpaVector,
    actor_fundamental: EpaVector,
    object_fundamental: EpaVector,
    coeffs: CoefficientSet,
) -> float:
    """Deflection the solver objective assigns to one candidate behavior."""
    profile = np.concatenate(
        [actor_transient.as_array(), candidate.as_array(), object_transient.as_array()]
    )
    fundamentals = np.concatenate(
        [actor_fundamental.as_array(), candidate.as_array(), object_fundamental.as_array()]
    )
    residual = (basis_expand_batch(profile[None, :]) @ coeffs.matrix)[0] - fundamentals
    return float(residual @ residual)
