"""Exception hierarchy shared by all modules."""


class EmbeddingError(Exception):
    """Base class for every error raised by this package."""


class NotSymmetric(EmbeddingError, ValueError):
    def __init__(self, asymmetry, tol):
        self.asymmetry = asymmetry
        self.tol = tol
        super().__init__(f"matrix is not symmetric: max |S_ij - S_ji| = {asymmetry:.3e} > {tol:.3e}")


class NoConvergence(EmbeddingError, RuntimeError):
    pass


class Singular(EmbeddingError, ValueError):
    pass


class NotSquare(EmbeddingError, ValueError):
    pass


class NotFinite(EmbeddingError, ValueError):
    pass


class NotStochastic(EmbeddingError, ValueError):
    def __init__(self, row, value, col=None):
        self.row = row
        self.col = col
        self.value = value
        if col is None:
            msg = f"row {row} sums to {value!r}, not 1"
        else:
            msg = f"entry ({row}, {col}) is negative: {value!r}"
        super().__init__(msg)


class NotGenerator(EmbeddingError, ValueError):
    def __init__(self, row, col, value):
        self.row = row
        self.col = col
        self.value = value
        if col is None:
            msg = f"row {row} sums to {value!r}, not 0"
        else:
            msg = f"off-diagonal entry ({row}, {col}) is negative: {value!r}"
        super().__init__(msg)


class WrongDimension(EmbeddingError, ValueError):
    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(f"expected a {expected}x{expected} matrix, got {got}x{got}")


class UnvisitedState(EmbeddingError, ValueError):
    def __init__(self, state):
        self.state = state
        super().__init__(f"state {state} is never left in the trajectory; "
                         "re-run with restrict=True to drop it")


class ParseError(EmbeddingError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class IndexOutOfRange(EmbeddingError, ValueError):
    def __init__(self, line, index, n_states):
        self.line = line
        self.index = index
        self.n_states = n_states
        super().__init__(f"line {line}: state {index} outside [0, {n_states})")
