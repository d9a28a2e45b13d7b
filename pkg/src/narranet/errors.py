"""Exception hierarchy shared by every stage of the pipeline."""


class NarranetError(Exception):
    """Base class for all engine errors."""


class ConfigError(NarranetError):
    pass


class NoChaptersFound(NarranetError):
    pass


class NonMonotoneHeading(NarranetError):
    pass


class AmbiguousAlias(NarranetError):
    pass


class EmptyNetwork(NarranetError):
    pass


class EmptySubject(NarranetError):
    pass


class EmptyVocabulary(NarranetError):
    pass


class DimensionError(NarranetError, ValueError):
    pass


class EmptyWindow(NarranetError):
    pass


class InvalidPhases(NarranetError):
    pass


class StageDependencyMissing(NarranetError):
    """Raised when a CLI stage runs before the stage whose cache it reads."""


class ZeroMassWarning(UserWarning):
    """A topical state was requested over chapters carrying no topic mass."""
