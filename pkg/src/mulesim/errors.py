"""Exception types shared across the package."""


class MulesimError(Exception):
    """Base class for package-specific errors."""


class SchemaError(MulesimError):
    """A world file violates the on-disk schema or a world invariant."""


class ConfigError(MulesimError):
    """A scenario configuration is invalid; message names the field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class OutOfBoundsError(MulesimError):
    """A cell or position lies outside the world grid."""


class UnsatisfiableLayoutError(MulesimError):
    """The world generator exhausted its retry budget."""


class UnknownTopicError(MulesimError):
    """A message was inserted under a topic absent from the topic table."""
