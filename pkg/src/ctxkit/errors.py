"""Exception hierarchy.

Every error raised by the library derives from :class:`CtxkitError`.  Most
also derive from :class:`ValueError`, since they signal malformed input.
"""


class CtxkitError(Exception):
    """Base class for all library errors."""

    #: Optional document coordinate (JSON path or ``line:col``) set by the IO layer.
    location = None

    def __str__(self):
        msg = super().__str__()
        if self.location:
            return f"{msg} (at {self.location})"
        return msg


class InputError(CtxkitError, ValueError):
    pass


# scenario
class AntichainViolation(InputError):
    pass


class CoverageGap(InputError):
    pass


class EmptyOutcomeSet(InputError):
    pass


class DuplicateContext(InputError):
    pass


class UnknownMeasurement(InputError):
    pass


class NotSubdomain(InputError):
    pass


class NotAPartition(InputError):
    pass


class DisconnectedCover(InputError):
    pass


# model
class EmptyContextSupport(InputError):
    pass


class FlasquenessViolation(InputError):
    def __init__(self, msg, context=None, section=None, other=None):
        super().__init__(msg)
        self.context = context
        self.section = section
        self.other = other


class SectionOutsideEvents(InputError):
    pass


class NotBeneathCover(InputError):
    pass


class UnknownSection(InputError):
    pass


class NotSubcover(InputError):
    pass


# joint / cycles
class AcyclicScenario(InputError):
    """The cover is Graham-acyclic, so no model on it can be contextual."""


class ResourceLimit(CtxkitError):
    """A joint-model level would exceed the configured section budget."""


class ValidationFailure(CtxkitError, AssertionError):
    """An internal consistency check failed; indicates a bug."""


class NotContextualSection(InputError):
    pass


# io
class ModelSyntaxError(InputError):
    def __init__(self, msg, line=None, column=None):
        super().__init__(msg)
        self.line = line
        self.column = column
        if line is not None:
            self.location = f"line {line}, column {column}"


class UnknownZooEntry(InputError, KeyError):
    def __str__(self):
        return CtxkitError.__str__(self)
