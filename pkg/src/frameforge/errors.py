"""Exception hierarchy shared by all frameforge modules."""


class FrameforgeError(Exception):
    """Base class for every error raised by the library."""


class NotSquare(FrameforgeError, ValueError):
    pass


class NotHermitian(FrameforgeError, ValueError):
    pass


class NonFiniteEntry(FrameforgeError, ValueError):
    pass


class ZeroMatrix(FrameforgeError, ValueError):
    pass


class NotPSD(FrameforgeError, ValueError):
    pass


class DimensionMismatch(FrameforgeError, ValueError):
    pass


class NotPSDAtPoint(FrameforgeError, ValueError):
    """An entry-sourced field evaluated to a non-PSD matrix."""

    def __init__(self, omega, min_eigenvalue):
        self.omega = tuple(float(w) for w in omega)
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"Gramian is not positive semidefinite at omega={self.omega} "
            f"(min eigenvalue {self.min_eigenvalue:.3e})"
        )


class EmptyGrid(FrameforgeError, ValueError):
    pass


class NotAFrame(FrameforgeError, ValueError):
    pass


class BadShape(FrameforgeError, ValueError):
    pass


class RankDrop(FrameforgeError, ValueError):
    pass


class UnsupportedInputClass(FrameforgeError, ValueError):
    pass


class UnknownScenario(FrameforgeError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown scenario"


class ParseError(FrameforgeError, ValueError):
    """Malformed scenario or matrix input; ``where`` locates the problem."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
