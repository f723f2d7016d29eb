class BslError(Exception):
    """Base class for every error raised by bslsat"""


class ParseError(BslError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SortError(BslError):
    def __init__(self, message, path=()):
        self.path = tuple(path)
        where = "/".join(str(step) for step in self.path) or "<root>"
        super().__init__(f"{message} at {where}")


class UnsupportedFeature(BslError):
    pass


class UnboundVariable(BslError):
    pass


class BudgetTooLarge(BslError):
    pass


class NotPositive(BslError):
    pass


class UnsupportedTerm(BslError):
    pass


class SolverCrash(BslError):
    def __init__(self, message, returncode=None, stderr=""):
        self.returncode = returncode
        self.stderr = stderr
        super().__init__(message)


class SolverTimeout(BslError):
    pass


class MalformedModel(BslError):
    pass


class TooManyVariables(BslError):
    pass
