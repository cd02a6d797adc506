"""Exception hierarchy shared by every stage of the cascade."""

from __future__ import annotations


class CascadeError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CascadeError, ValueError):
    """Bad caller-supplied data; the CLI maps these to exit code 2."""


class ParseError(InputError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class InvalidGrade(ParseError):
    pass


class DuplicateId(InputError):
    def __init__(self, image_id: str, line: int | None = None):
        self.image_id = image_id
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate image_id {image_id!r}{where}")


class UnknownId(InputError, KeyError):
    def __init__(self, image_id: str):
        self.image_id = image_id
        super().__init__(f"unknown image_id {image_id!r}")

    def __str__(self) -> str:  # KeyError would repr() the message
        return self.args[0]


class InputTooLarge(InputError):
    pass


class NonSquareInput(InputError):
    pass


class EmptyManifest(InputError):
    pass


class FractionOutOfRange(InputError):
    pass


class CapabilityMissing(CascadeError):
    pass


class NonFiniteScore(InputError):
    pass


class MissingTier2Score(InputError):
    def __init__(self, image_id: str):
        self.image_id = image_id
        super().__init__(f"no tier-2 score for image_id {image_id!r}")


class DegenerateLabels(InputError):
    pass


class EmptyCurve(InputError):
    pass


class RankOutOfRange(InputError):
    pass


class NoPositives(InputError):
    pass


class NoNegatives(InputError):
    pass


class EmptyMatrix(InputError):
    pass


class DegenerateMarginals(InputError):
    pass


class EmptyOutcomes(InputError):
    pass


class WrongDimension(InputError):
    pass


class CloudUnreachable(CascadeError):
    """The cloud grading stage could not be reached for one image."""

    def __init__(self, image_id: str, reason: str = ""):
        self.image_id = image_id
        self.reason = reason
        msg = f"cloud grading unreachable for image_id {image_id!r}"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class ServiceError(CascadeError):
    """A service answered with an error the client cannot map to a domain error."""
