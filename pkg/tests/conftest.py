import sys
from pathlib import Path

import numpy as np
import pytest

# Make the oracle helpers importable from every test module.
sys.path.insert(0, str(Path(__file__).parent))

from affectkit.epa import EpaVector, LexiconEntry, SentimentLexicon
from affectkit.equations import BASIS_SIZE, CoefficientSet


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def random_profile(rng, scale=2.0):
    return rng.uniform(-scale, scale, size=9)


def random_coefficients(rng, scale=0.3, name="random"):
    matrix = rng.normal(0.0, scale, size=(BASIS_SIZE, 9))
    return CoefficientSet(matrix, name=name)


def small_lexicon(n_per_category=6, seed=7):
    """A deterministic synthetic lexicon with n entries per category."""
    rng = np.random.default_rng(seed)
    lex = SentimentLexicon(name="synthetic-test")
    for category, stem in (("identity", "id"), ("behavior", "act"), ("modifier", "mod")):
        for i in range(n_per_category):
            epa = rng.uniform(-3.5, 3.5, size=3)
            lex.add(
                LexiconEntry(
                    term=f"{stem}{i:02d}",
                    category=category,
                    epa=EpaVector(*np.round(epa, 3)),
                )
            )
    return lex
