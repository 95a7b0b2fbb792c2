"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class TropScatterError(Exception):
    """Base class for all domain errors."""


class NotUnipotent(TropScatterError):
    pass


class UnknownFan(TropScatterError):
    pass


class FanError(TropScatterError):
    """Invalid fan; ``ray`` names the offending ray when there is one."""

    def __init__(self, message, ray=None):
        super().__init__(message)
        self.ray = ray


class NotPrimitive(FanError):
    pass


class NotComplete(FanError):
    pass


class NotSmooth(FanError):
    pass


class NotFano(FanError):
    pass


class GenericityExhausted(TropScatterError):
    pass


class DegenerateScene(TropScatterError):
    """Scene fails a genericity requirement.

    ``witness`` is a JSON-serialisable dict naming the colliding objects.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


class TangentialCrossing(TropScatterError):
    pass


class NondecomposableDiscrepancy(TropScatterError):
    pass


class PointOnWall(TropScatterError):
    def __init__(self, message, wall=None):
        super().__init__(message)
        self.wall = wall


class TraceThroughVertex(TropScatterError):
    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class PathThroughVertex(TropScatterError):
    pass


class SchemaMismatch(TropScatterError):
    pass


class MalformedRational(TropScatterError):
    pass


class MalformedDocument(TropScatterError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
