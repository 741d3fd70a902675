"""Exception types shared across the package."""


class TopocommError(Exception):
    """Base class for all package-specific errors."""


class DisconnectedGraph(TopocommError):
    pass


class EmptyTerminalSet(TopocommError):
    pass


class InstanceTooLarge(TopocommError):
    pass


class OddTerminalCount(TopocommError):
    pass


class OverlappingPairs(TopocommError):
    pass


class BudgetExceeded(TopocommError):
    pass


class NotATree(TopocommError):
    pass


class NotSpanning(TopocommError):
    pass


class ShapeMismatch(TopocommError):
    pass


class MissingMatchings(ShapeMismatch):
    pass


class AlphabetTooSmall(TopocommError):
    pass


class TooFewTerminals(TopocommError):
    pass


class EmptySet(TopocommError):
    pass


class ParseError(TopocommError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class Infeasible(TopocommError):
    pass


class IterationLimit(TopocommError):
    pass
