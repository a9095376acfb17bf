"""Exception types shared across the package.

Every error raised on a data or configuration problem derives from
AffectkitError so the CLI can map them to a single exit code.
"""


class AffectkitError(Exception):
    """Base class for all package errors."""


class InvalidInputError(AffectkitError):
    """A numeric input was non-finite or otherwise out of domain."""


class ConfigurationError(AffectkitError):
    """A coefficient set, split spec, or other configuration is malformed."""


class CategoryError(AffectkitError):
    """An entry of the wrong lexical category was supplied."""


class LexiconError(AffectkitError):
    """A lexicon file or entry violates the lexicon contract."""


class NotFoundError(AffectkitError):
    """A referenced resource (session, entry) does not exist."""


class ShapeError(AffectkitError):
    """Array dimensions do not match the model contract."""


class AlignmentError(AffectkitError):
    """Two id-keyed collections do not cover the same ids."""

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class DependencyError(AffectkitError):
    """A required external artifact (model, embeddings) is missing."""


class ConflictError(AffectkitError):
    """Writing would overwrite an existing (term, category) entry."""
