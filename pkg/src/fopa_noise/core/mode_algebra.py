"""
Mode algebra for linear parametric-amplifier models.

The amplifier maps input ladder operators to output ladder operators through
an n x n complex transfer matrix. Each slot of the mode vector holds either an
annihilation or a creation operator; that pattern (the ladder signature) fixes
every selector used by the moment and noise-figure formulas.

Mode labels are 1-based everywhere in the public API and in error messages.
Storage is 0-based.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from fopa_noise import assumptions
from fopa_noise.errors import DimensionMismatchError, ModeIndexError

logger = logging.getLogger(__name__)


class Ladder(str, Enum):
    """Operator type held by one slot of the mode vector."""

    ANNIHILATION = "a"
    CREATION = "c"


@dataclass(frozen=True)
class LadderSignature:
    tags: Tuple[Ladder, ...]

    def __post_init__(self):
        tags = tuple(Ladder(t) for t in self.tags)
        if len(tags) < 1:
            raise DimensionMismatchError("A ladder signature needs at least one mode")
        object.__setattr__(self, "tags", tags)

    @property
    def n(self) -> int:
        return len(self.tags)

    @classmethod
    def parse(cls, text: str) -> "LadderSignature":
        """Build a signature from a string such as "acac" (a = annihilation, c = creation)."""
        cleaned = text.replace(",", "").replace(" ", "").lower()
        try:
            return cls(tuple(Ladder(ch) for ch in cleaned))
        except ValueError as exc:
            raise ValueError(f"Signature must contain only 'a' and 'c', got {text!r}") from exc

    @classmethod
    def alternating(cls, n: int) -> "LadderSignature":
        """Odd slots annihilation, even slots creation (signal first)."""
        return cls(tuple(Ladder.ANNIHILATION if i % 2 == 0 else Ladder.CREATION for i in range(n)))

    def tag(self, j: int) -> Ladder:
        return self.tags[_slot(j, self.n)]

    def is_annihilation(self, j: int) -> bool:
        return self.tag(j) is Ladder.ANNIHILATION

    def __str__(self) -> str:
        return "".join(t.value for t in self.tags)


def _slot(j: int, n: int) -> int:
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)) or not 1 <= j <= n:
        raise ModeIndexError(f"Mode {j} out of range 1..{n}")
    return int(j) - 1


# -----------------------------------------------------------------------------
# Selectors
# -----------------------------------------------------------------------------

def selector_s(signature: LadderSignature, j: int, k: int) -> int:
    """+1 when slots j and k hold the same operator type, -1 otherwise."""
    return 1 if signature.tag(j) is signature.tag(k) else -1


def selector_sigma(signature: LadderSignature, j: int, k: int) -> int:
    """0 when slots j and k hold the same operator type, 1 otherwise."""
    return 0 if signature.tag(j) is signature.tag(k) else 1


def selector_abcd(signature: LadderSignature, k: int, l: int) -> Tuple[int, int, int, int]:
    """
    Pair-type selectors (A_kl, B_kl, C_kl, D_kl) for k < l.

    A: (annihilation, creation), B: (creation, annihilation),
    C: both annihilation, D: both creation. Exactly one entry is 1.
    """
    tk, tl = signature.tag(k), signature.tag(l)
    if k >= l:
        raise ModeIndexError(f"Pair selectors need k < l, got k={k}, l={l}")
    a = int(tk is Ladder.ANNIHILATION and tl is Ladder.CREATION)
    b = int(tk is Ladder.CREATION and tl is Ladder.ANNIHILATION)
    c = int(tk is Ladder.ANNIHILATION and tl is Ladder.ANNIHILATION)
    d = int(tk is Ladder.CREATION and tl is Ladder.CREATION)
    return a, b, c, d


def pair_type(signature: LadderSignature, k: int, l: int) -> str:
    """Name of the pair selector that equals 1 ("A", "B", "C" or "D")."""
    return "ABCD"[selector_abcd(signature, k, l).index(1)]


def pseudo_metric(signature: LadderSignature) -> np.ndarray:
    """diag(s_k) with s_k = +1 for annihilation slots and -1 for creation slots."""
    return np.diag([1.0 if t is Ladder.ANNIHILATION else -1.0 for t in signature.tags])


# -----------------------------------------------------------------------------
# Transfer matrix and input state
# -----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Linear input-output map b = M a over the slots of a ladder signature."""

    entries: np.ndarray
    signature: LadderSignature
    label: str = ""

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.complex128, copy=True)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatchError(f"Transfer matrix must be square, got shape {entries.shape}")
        if entries.shape[0] != self.signature.n:
            raise DimensionMismatchError(
                f"Matrix has {entries.shape[0]} modes but signature '{self.signature}' has {self.signature.n}"
            )
        if not np.all(np.isfinite(entries)):
            raise ValueError("Transfer matrix entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.signature.n

    @classmethod
    def identity(cls, signature: LadderSignature, label: str = "identity") -> "TransferMatrix":
        return cls(np.eye(signature.n, dtype=np.complex128), signature, label)

    def mu(self, j: int, k: int) -> complex:
        return complex(self.entries[_slot(j, self.n), _slot(k, self.n)])

    def phase(self, j: int, k: int) -> float:
        """theta_jk = arg(mu_jk)."""
        return float(np.angle(self.entries[_slot(j, self.n), _slot(k, self.n)]))

    def abs2_row(self, j: int) -> np.ndarray:
        row = self.entries[_slot(j, self.n)]
        return row.real ** 2 + row.imag ** 2

    def row_norm(self, j: int) -> float:
        """S_j = sum_k |mu_jk|^2."""
        return math.fsum(self.abs2_row(j))


@dataclass(frozen=True)
class InputState:
    """Product of coherent states; modes that are not injected sit in vacuum."""

    alphas: Tuple[complex, ...]
    injected: Tuple[bool, ...]

    def __post_init__(self):
        alphas = tuple(complex(a) for a in self.alphas)
        injected = tuple(bool(y) for y in self.injected)
        if len(alphas) != len(injected) or not alphas:
            raise DimensionMismatchError(
                f"InputState needs one flag per amplitude, got {len(alphas)} amplitudes and {len(injected)} flags"
            )
        for j, (a, y) in enumerate(zip(alphas, injected), start=1):
            if not y and a != 0:
                raise ValueError(f"Mode {j} is not injected but has amplitude {a}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "injected", injected)

    @property
    def n(self) -> int:
        return len(self.alphas)

    @classmethod
    def from_alphas(cls, alphas: Iterable[complex]) -> "InputState":
        """Injected flags follow the amplitudes (zero amplitude means vacuum)."""
        alphas = tuple(complex(a) for a in alphas)
        return cls(alphas, tuple(a != 0 for a in alphas))

    @classmethod
    def signal_only(cls, n: int, alpha1: complex) -> "InputState":
        alphas = (complex(alpha1),) + (0j,) * (n - 1)
        return cls(alphas, (True,) + (False,) * (n - 1))

    @classmethod
    def leading(cls, n: int, p: int, amplitude: float,
                phases: Optional[Sequence[float]] = None) -> "InputState":
        """The first p modes carry |alpha| = amplitude with the given input phases."""
        if not 1 <= p <= n:
            raise ModeIndexError(f"Number of injected modes p={p} out of range 1..{n}")
        phases = list(phases) if phases is not None else [0.0] * p
        if len(phases) != p:
            raise DimensionMismatchError(f"Expected {p} input phases, got {len(phases)}")
        alphas = tuple(amplitude * np.exp(1j * ph) for ph in phases) + (0j,) * (n - p)
        return cls(alphas, (True,) * p + (False,) * (n - p))

    def alpha(self, j: int) -> complex:
        return self.alphas[_slot(j, self.n)]

    def phase(self, j: int) -> float:
        return float(np.angle(self.alpha(j)))

    def photons(self, j: int) -> float:
        a = self.alpha(j)
        return a.real ** 2 + a.imag ** 2

    @property
    def injected_count(self) -> int:
        return sum(self.injected)


def check_dimensions(matrix: TransferMatrix, state: InputState) -> None:
    if matrix.n != state.n:
        raise DimensionMismatchError(
            f"Transfer matrix has {matrix.n} modes but the input state has {state.n}"
        )


# -----------------------------------------------------------------------------
# Quantum-consistency validation
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    row_residuals: Tuple[float, ...]
    pair_residuals: Dict[Tuple[int, int], float] = field(default_factory=dict)
    tol: float = assumptions.USER_MATRIX_TOL

    @property
    def rows_pass(self) -> bool:
        return all(r <= self.tol for r in self.row_residuals)

    @property
    def pairs_pass(self) -> bool:
        return all(r <= self.tol for r in self.pair_residuals.values())

    @property
    def passed(self) -> bool:
        return self.rows_pass and self.pairs_pass

    @property
    def failing_rows(self) -> Tuple[int, ...]:
        return tuple(j for j, r in enumerate(self.row_residuals, start=1) if r > self.tol)

    @property
    def failing_pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(p for p, r in sorted(self.pair_residuals.items()) if r > self.tol)

    @property
    def max_residual(self) -> float:
        return max(list(self.row_residuals) + list(self.pair_residuals.values()))


def commutator_matrix(matrix: TransferMatrix) -> np.ndarray:
    """K = M diag(s) M^dagger; K_jl = [R_j, R_l^dagger] for the output row operators R."""
    metric = pseudo_metric(matrix.signature)
    return matrix.entries @ metric @ matrix.entries.conj().T


def validate_symplectic(matrix: TransferMatrix, tol: float = assumptions.USER_MATRIX_TOL) -> ValidationReport:
    """
    Check the signed row condition and the pairwise commutator conditions.

    Output commutators reduce to K = M diag(s) M^dagger: the row condition is
    s_j K_jj = 1 and the pairwise conditions are K_jl = 0 for j != l
    ([R_j, R_l] vanishes for any matrix). Residuals are relative to the row
    scale max(1, S_j), since large-gain entries grow exponentially.
    """
    n = matrix.n
    sig = matrix.signature
    row_residuals = []
    for j in range(1, n + 1):
        row = matrix.entries[j - 1]
        signs = np.array([selector_s(sig, j, k) for k in range(1, n + 1)], dtype=float)
        signed = math.fsum(list(signs * row.real ** 2) + list(signs * row.imag ** 2))
        row_residuals.append(abs(signed - 1.0) / max(1.0, matrix.row_norm(j)))

    pair_residuals = {}
    metric = np.diag(pseudo_metric(sig))
    for j in range(1, n + 1):
        for l in range(j + 1, n + 1):
            terms = matrix.entries[j - 1] * matrix.entries[l - 1].conj() * metric
            value = complex(math.fsum(terms.real), math.fsum(terms.imag))
            scale = max(1.0, math.sqrt(matrix.row_norm(j) * matrix.row_norm(l)))
            pair_residuals[(j, l)] = abs(value) / scale

    report = ValidationReport(tuple(row_residuals), pair_residuals, tol)
    logger.debug("Validated %s: max residual %.3e", matrix.label or "matrix", report.max_residual)
    return report
