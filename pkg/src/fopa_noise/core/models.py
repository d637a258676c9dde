"""
Analytic transfer matrices of dual-pump fiber parametric amplifiers.

Both built-in models neglect pump depletion, fiber loss and dispersion, so they
depend on the fiber nonlinear coefficient, pump power and length only through
the nonlinear phase xi = gamma * P * z. Any other model (the three-mode toy,
numerically integrated matrices, ...) is read from a custom-matrix JSON file.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ValidationError, model_validator

from fopa_noise import assumptions
from fopa_noise.core.mode_algebra import (
    Ladder,
    LadderSignature,
    TransferMatrix,
    validate_symplectic,
)
from fopa_noise.errors import MatrixFileError, PhaseRangeError, RowConditionError

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)

# |mu_11|^2 of the two-mode model grows as exp(2 sqrt(3) xi) / 3; the four-mode peak is 4 xi^2.
TWO_MODE_MAX_XI = (math.log(assumptions.MAX_ENTRY_GAIN) + math.log(3.0)) / (2.0 * SQRT3)
FOUR_MODE_MAX_XI = 0.5 * math.sqrt(assumptions.MAX_ENTRY_GAIN)


@dataclass(frozen=True)
class NonlinearPhase:
    """xi = gamma * P * z (dimensionless, finite, non-negative)."""

    xi: float

    def __post_init__(self):
        xi = float(self.xi)
        if not math.isfinite(xi) or xi < 0:
            raise ValueError(f"Nonlinear phase must be finite and >= 0, got {self.xi}")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def from_physical(cls, gamma: float, power: float, length: float) -> "NonlinearPhase":
        """
        Args:
            gamma: fiber nonlinear coefficient (1/(W km))
            power: power of each pump (W)
            length: fiber length (km)
        """
        return cls(assumptions.physical_to_xi(gamma, power, length))


@dataclass(frozen=True)
class ModelId:
    kind: Literal["two", "four", "custom"]
    path: Optional[Path] = None

    @classmethod
    def parse(cls, text: str) -> "ModelId":
        """Accepts "two", "four" or "custom:<path>"."""
        text = text.strip()
        lowered = text.lower()
        if lowered in ("two", "two-mode", "2"):
            return cls("two")
        if lowered in ("four", "four-mode", "4"):
            return cls("four")
        if lowered.startswith("custom:") and len(text) > len("custom:"):
            return cls("custom", Path(text[len("custom:"):]))
        raise ValueError(f"Unknown model {text!r}; expected two, four or custom:<path>")

    def __str__(self) -> str:
        return f"custom:{self.path}" if self.kind == "custom" else self.kind


def _as_phase(phase: Union[NonlinearPhase, float]) -> NonlinearPhase:
    return phase if isinstance(phase, NonlinearPhase) else NonlinearPhase(phase)


def _check_range(xi: float, limit: float, model: str) -> None:
    if xi > limit:
        raise PhaseRangeError(
            f"xi={xi:g} is beyond the {model} model range (xi <= {limit:.6g}): "
            f"|mu_jk|^2 would exceed {assumptions.MAX_ENTRY_GAIN:g}"
        )


def build_two_mode(phase: Union[NonlinearPhase, float]) -> TransferMatrix:
    """Signal/idler model: rows (b1, b2^dagger) over (a1, a2^dagger)."""
    xi = _as_phase(phase).xi
    _check_range(xi, TWO_MODE_MAX_XI, "two-mode")
    ch = math.cosh(SQRT3 * xi)
    sh = math.sinh(SQRT3 * xi)
    mu11 = complex(ch, sh / SQRT3)
    mu12 = complex(0.0, 2.0 * sh / SQRT3)
    entries = np.array([[mu11, mu12], [-mu12, mu11.conjugate()]], dtype=np.complex128)
    return TransferMatrix(entries, LadderSignature.alternating(2), f"two-mode xi={xi:g}")


def build_four_mode(phase: Union[NonlinearPhase, float]) -> TransferMatrix:
    """Signal, idler, sideband 1, sideband 2 in the zero-dispersion first-order solution."""
    xi = _as_phase(phase).xi
    _check_range(xi, FOUR_MODE_MAX_XI, "four-mode")
    t = complex(0.0, xi)
    entries = np.array(
        [
            [1 + t, 2 * t, 2 * t, t],
            [-2 * t, 1 - t, -t, -2 * t],
            [2 * t, t, 1 + t, 2 * t],
            [-t, -2 * t, -2 * t, 1 - t],
        ],
        dtype=np.complex128,
    )
    return TransferMatrix(entries, LadderSignature.alternating(4), f"four-mode xi={xi:g}")


# -----------------------------------------------------------------------------
# Custom matrix files
# -----------------------------------------------------------------------------

class MatrixFile(BaseModel):
    """On-disk schema: n, signature ("a"/"c" per mode), entries as [re, im] pairs, label."""

    n: int
    signature: List[Literal["a", "c"]]
    entries: List[List[Tuple[float, float]]]
    label: Optional[str] = None

    @model_validator(mode="after")
    def check_shape(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(self.signature) != self.n:
            raise ValueError(f"signature has {len(self.signature)} entries, expected n={self.n}")
        if len(self.entries) != self.n or any(len(row) != self.n for row in self.entries):
            raise ValueError(f"entries must be an {self.n}x{self.n} array of [re, im] pairs")
        return self


def load_custom(path: Union[str, Path], tol: float = assumptions.USER_MATRIX_TOL) -> TransferMatrix:
    """
    Read a custom transfer matrix and check it.

    Row-condition failures beyond tol are hard errors (RowConditionError);
    pairwise commutator failures are only logged as warnings.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixFileError(f"Cannot read matrix file {path}: {exc}") from exc
    try:
        spec = MatrixFile.model_validate_json(raw)
    except ValidationError as exc:
        raise MatrixFileError(f"Invalid matrix file {path}: {exc}") from exc

    entries = np.array([[complex(re, im) for re, im in row] for row in spec.entries], dtype=np.complex128)
    signature = LadderSignature(tuple(Ladder(t) for t in spec.signature))
    matrix = TransferMatrix(entries, signature, spec.label or path.stem)

    report = validate_symplectic(matrix, tol)
    if not report.rows_pass:
        rows = report.failing_rows
        raise RowConditionError(rows, [report.row_residuals[j - 1] for j in rows], tol)
    if not report.pairs_pass:
        logger.warning(
            "Matrix %s: pairwise commutator residuals above %g for pairs %s (advisory)",
            path.name, tol, ", ".join(f"({j},{l})" for j, l in report.failing_pairs),
        )
    logger.info("Loaded %d-mode matrix '%s' from %s", matrix.n, matrix.label, path)
    return matrix


def dump_custom(matrix: TransferMatrix, path: Union[str, Path]) -> Path:
    """Write a matrix in the custom-matrix format read by load_custom."""
    path = Path(path)
    payload = {
        "n": matrix.n,
        "signature": [t.value for t in matrix.signature.tags],
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in matrix.entries],
        "label": matrix.label,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
    return path


def build_model(model: Union[ModelId, str], phase: Union[NonlinearPhase, float] = 0.0,
                tol: float = assumptions.USER_MATRIX_TOL) -> TransferMatrix:
    """Dispatch on the model id; custom matrices ignore xi."""
    model = ModelId.parse(model) if isinstance(model, str) else model
    if model.kind == "two":
        return build_two_mode(phase)
    if model.kind == "four":
        return build_four_mode(phase)
    return load_custom(model.path, tol)
