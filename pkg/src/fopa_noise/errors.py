"""Exception hierarchy shared by the library and the command line."""


class FopaError(Exception):
    """Base class for every error raised by fopa_noise."""


class ModeIndexError(FopaError, IndexError):
    """A 1-based mode label is out of range, or a pair is not ordered k < l."""


class DimensionMismatchError(FopaError, ValueError):
    """Matrix, signature and input state disagree on the number of modes."""


class MatrixFileError(FopaError, ValueError):
    """A custom-matrix, config or result file could not be parsed."""


class RowConditionError(FopaError, ValueError):
    """The signed row condition sum_k |mu_jk|^2 s_jk = 1 is violated."""

    def __init__(self, rows, residuals, tol):
        self.rows = tuple(rows)
        self.residuals = tuple(residuals)
        self.tol = tol
        detail = ", ".join(
            f"row {j} (residual {r:.3e})" for j, r in zip(self.rows, self.residuals)
        )
        super().__init__(f"Row condition violated beyond tol={tol:g}: {detail}")


class UndefinedNoiseFigureError(FopaError, ArithmeticError):
    """The noise figure has a zero denominator (no output photons, Omega = 0, mu_j1 = 0)."""


class InvalidSweepError(FopaError, ValueError):
    """A sweep specification breaks one of its invariants."""


class FockDimensionError(FopaError, ValueError):
    """The truncated Fock space D**n is larger than the configured guard."""


class TruncationError(FopaError, ValueError):
    """A coherent amplitude loses too much weight at the requested cutoff."""


class OracleConvergenceError(FopaError, RuntimeError):
    """Oracle moments did not settle before the maximum cutoff."""


class OracleConsistencyError(FopaError, RuntimeError):
    """A number-operator expectation came back with a non-negligible imaginary part."""


class PhaseRangeError(FopaError, ValueError):
    """The nonlinear phase is too large for a built-in model in double precision."""


class MomentOverflowError(FopaError, OverflowError):
    """An output moment does not fit in double precision."""
