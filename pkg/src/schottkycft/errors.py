"""Exception hierarchy shared by all modules."""


class SchottkyCFTError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class SeriesError(SchottkyCFTError):
    pass


class VariableMismatch(SeriesError):
    pass


class NonUnit(SeriesError):
    pass


class NotDivisible(SeriesError):
    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class ParseError(SchottkyCFTError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GraphError(SchottkyCFTError):
    pass


class Unsatisfiable(GraphError):
    pass


class SurgeryError(GraphError):
    pass


class PathError(SchottkyCFTError):
    pass


class NotReduced(PathError):
    pass


class NotComposable(PathError):
    pass


class NotLoxodromic(SchottkyCFTError):
    pass


class NoConvergence(SchottkyCFTError):
    pass


class Indeterminate(SchottkyCFTError):
    pass


class RecipeUnavailable(SchottkyCFTError):
    def __init__(self, message, pattern=None):
        super().__init__(message)
        self.pattern = pattern


class NonUnitRatio(SchottkyCFTError):
    """A ratio that should be a unit is not: the comparison is falsified."""


class DegenerateModule(SchottkyCFTError):
    def __init__(self, message, level=None, edge=None):
        super().__init__(message)
        self.level = level
        self.edge = edge


class MoveError(SchottkyCFTError):
    pass
