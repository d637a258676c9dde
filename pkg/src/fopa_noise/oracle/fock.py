"""
Brute-force photon statistics on a truncated multi-mode Fock space.

The state is a complex tensor of shape (D,) * n indexed by the occupation
numbers (n_1, ..., n_n). Ladder operators act along one tensor axis by index
shifts, so no D**n x D**n operator is ever built. This module shares nothing
with the closed-form moment expressions and is used to check them.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import reduce
from typing import List, Sequence, Tuple

import numpy as np

from fopa_noise import assumptions
from fopa_noise.analysis.moments import MomentMethod, MomentReport, ModeMoments, moments_general
from fopa_noise.core.mode_algebra import InputState, TransferMatrix
from fopa_noise.errors import (
    DimensionMismatchError,
    FockDimensionError,
    ModeIndexError,
    OracleConsistencyError,
    OracleConvergenceError,
    TruncationError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FockConfig:
    """
    cutoff: per-mode Fock dimension D (basis |0> .. |D-1>) to start from.
    convergence_factor: relative change allowed between cutoffs D and D + 2.
    """

    cutoff: int = assumptions.DEFAULT_CUTOFF
    convergence_factor: float = assumptions.CONVERGENCE_TOL
    max_cutoff: int = assumptions.MAX_CUTOFF
    truncation_tol: float = assumptions.TRUNCATION_TOL
    max_dimension: int = assumptions.MAX_FOCK_DIMENSION
    auto_cutoff: bool = True

    def __post_init__(self):
        if self.cutoff < 2:
            raise ValueError(f"Fock cutoff must be >= 2, got {self.cutoff}")
        if not 0 < self.convergence_factor < 1:
            raise ValueError(f"convergence_factor must lie in (0, 1), got {self.convergence_factor}")


@dataclass(frozen=True, eq=False)
class FockState:
    amplitudes: np.ndarray
    truncation: float = 0.0      # coherent weight dropped at preparation
    leaked: float = 0.0          # weight pushed past level D-1 by creation operators

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def inner(self, other: "FockState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check_guard(n_modes: int, cutoff: int, config: FockConfig) -> None:
    if cutoff ** n_modes > config.max_dimension:
        raise FockDimensionError(
            f"Fock space {cutoff}^{n_modes} = {cutoff ** n_modes} exceeds the guard {config.max_dimension}"
        )


def coherent_vector(alpha: complex, cutoff: int) -> Tuple[np.ndarray, float]:
    """Truncated coherent amplitudes e^{-|a|^2/2} a^m / sqrt(m!), m < D, and the weight lost."""
    coeffs = np.empty(cutoff, dtype=np.complex128)
    coeffs[0] = 1.0
    for m in range(1, cutoff):
        coeffs[m] = coeffs[m - 1] * alpha / math.sqrt(m)
    coeffs *= math.exp(-abs(alpha) ** 2 / 2.0)
    kept = float(np.vdot(coeffs, coeffs).real)
    return coeffs, max(0.0, 1.0 - kept)


def minimal_cutoff(alphas: Sequence[complex], tol: float = assumptions.TRUNCATION_TOL, start: int = 2,
                   limit: int = assumptions.MAX_CUTOFF) -> int:
    """Smallest D >= start whose coherent truncation loss is <= tol in every mode."""
    cutoff = start
    while cutoff <= limit:
        if all(coherent_vector(a, cutoff)[1] <= tol for a in alphas):
            return cutoff
        cutoff += 1
    raise TruncationError(f"No cutoff up to {limit} keeps the truncation loss below {tol:g}")


def prepare_coherent(alphas: Sequence[complex], config: FockConfig = FockConfig()) -> FockState:
    """Tensor product of renormalised truncated coherent states."""
    alphas = [complex(a) for a in alphas]
    cutoff = config.cutoff
    _check_guard(len(alphas), cutoff, config)
    vectors, worst = [], 0.0
    for j, alpha in enumerate(alphas, start=1):
        vec, loss = coherent_vector(alpha, cutoff)
        if loss > config.truncation_tol:
            raise TruncationError(
                f"Mode {j}: |alpha|^2 = {abs(alpha) ** 2:.3g} loses {loss:.2e} of its weight at cutoff {cutoff}"
            )
        vectors.append(vec / np.linalg.norm(vec))
        worst = max(worst, loss)
    amplitudes = reduce(np.multiply.outer, vectors)
    return FockState(np.asarray(amplitudes, dtype=np.complex128), truncation=worst)


# -----------------------------------------------------------------------------
# Ladder action
# -----------------------------------------------------------------------------

def _lower(psi: np.ndarray, axis: int) -> np.ndarray:
    """a on one axis: (a psi)[.., m, ..] = sqrt(m+1) psi[.., m+1, ..]."""
    moved = np.moveaxis(psi, axis, 0)
    out = np.zeros_like(moved)
    levels = moved.shape[0]
    factors = np.sqrt(np.arange(1, levels, dtype=float)).reshape((-1,) + (1,) * (moved.ndim - 1))
    out[:-1] = factors * moved[1:]
    return np.moveaxis(out, 0, axis)


def _raise(psi: np.ndarray, axis: int) -> Tuple[np.ndarray, float]:
    """a^dagger on one axis; the part pushed beyond level D-1 is dropped and its weight returned."""
    moved = np.moveaxis(psi, axis, 0)
    out = np.zeros_like(moved)
    levels = moved.shape[0]
    factors = np.sqrt(np.arange(1, levels, dtype=float)).reshape((-1,) + (1,) * (moved.ndim - 1))
    out[1:] = factors * moved[:-1]
    top = moved[-1]
    leaked = float(levels * np.vdot(top, top).real)
    return np.moveaxis(out, 0, axis), leaked


def _apply_row(matrix: TransferMatrix, j: int, state: FockState, dagger: bool) -> FockState:
    if not 1 <= j <= matrix.n:
        raise ModeIndexError(f"Mode {j} out of range 1..{matrix.n}")
    if state.n_modes != matrix.n:
        raise DimensionMismatchError(f"State has {state.n_modes} modes, matrix has {matrix.n}")

    # Row j of M gives b_j (annihilation slot) or b_j^dagger (creation slot) as
    # sum_k mu_jk c_k with c_k = a_k or a_k^dagger per slot k.
    row = matrix.entries[j - 1]
    want_row = matrix.signature.is_annihilation(j) != dagger
    coeffs = row if want_row else row.conj()

    psi = state.amplitudes
    out = np.zeros_like(psi)
    leaked = state.leaked
    for k in range(1, matrix.n + 1):
        mu = coeffs[k - 1]
        if mu == 0:
            continue
        lowers = matrix.signature.is_annihilation(k) == want_row
        if lowers:
            out += mu * _lower(psi, k - 1)
        else:
            raised, lost = _raise(psi, k - 1)
            out += mu * raised
            leaked += abs(mu) ** 2 * lost
    return replace(state, amplitudes=out, leaked=leaked)


def apply_output_mode(matrix: TransferMatrix, j: int, state: FockState) -> FockState:
    """b_j |psi> (unnormalised)."""
    return _apply_row(matrix, j, state, dagger=False)


def apply_output_mode_dagger(matrix: TransferMatrix, j: int, state: FockState) -> FockState:
    """b_j^dagger |psi> (unnormalised)."""
    return _apply_row(matrix, j, state, dagger=True)


# -----------------------------------------------------------------------------
# Moments
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class _CutoffResult:
    cutoff: int
    means: Tuple[float, ...]
    variances: Tuple[float, ...]
    truncation: float
    leaked: float = field(default=0.0)


def _moments_at_cutoff(matrix: TransferMatrix, alphas: Sequence[complex], config: FockConfig) -> _CutoffResult:
    psi = prepare_coherent(alphas, config)
    norm2 = psi.inner(psi).real
    means, variances, leaked = [], [], 0.0
    for j in range(1, matrix.n + 1):
        phi = apply_output_mode(matrix, j, psi)
        chi = apply_output_mode_dagger(matrix, j, phi)
        mean_c = psi.inner(chi)
        if abs(mean_c.imag) > assumptions.HERMITICITY_TOL * norm2:
            raise OracleConsistencyError(
                f"Mode {j}: <psi|N|psi> has imaginary part {mean_c.imag:.3e}"
            )
        second = chi.inner(chi).real
        mean = mean_c.real
        means.append(mean)
        variances.append(max(second - mean ** 2, 0.0))
        leaked = max(leaked, chi.leaked)
    return _CutoffResult(config.cutoff, tuple(means), tuple(variances), psi.truncation, leaked)


def _relative_change(a: Sequence[float], b: Sequence[float]) -> float:
    worst = 0.0
    for x, y in zip(a, b):
        scale = max(abs(y), 1e-12)
        worst = max(worst, abs(y - x) / scale if abs(y - x) > 1e-12 else 0.0)
    return worst


def oracle_moments(matrix: TransferMatrix, alphas: Sequence[complex],
                   config: FockConfig = FockConfig()) -> MomentReport:
    """
    Output means and variances by direct state-vector evaluation.

    For each mode: phi = b_j psi, chi = b_j^dagger phi, <N> = <psi, chi>,
    <N^2> = <chi, chi>. The cutoff is raised in steps of two until the results
    change by less than convergence_factor; the larger-cutoff result is returned.
    """
    alphas = [complex(a) for a in alphas]
    if len(alphas) != matrix.n:
        raise DimensionMismatchError(f"Expected {matrix.n} amplitudes, got {len(alphas)}")

    cutoff = config.cutoff
    if config.auto_cutoff:
        cutoff = max(cutoff, minimal_cutoff(alphas, config.truncation_tol, limit=config.max_cutoff))
    previous = _moments_at_cutoff(matrix, alphas, replace(config, cutoff=cutoff))

    while True:
        cutoff += assumptions.CUTOFF_STEP
        if cutoff > config.max_cutoff or cutoff ** matrix.n > config.max_dimension:
            raise OracleConvergenceError(
                f"Oracle moments not converged to {config.convergence_factor:g} "
                f"before cutoff {cutoff - assumptions.CUTOFF_STEP}"
            )
        current = _moments_at_cutoff(matrix, alphas, replace(config, cutoff=cutoff))
        change = max(
            _relative_change(previous.means, current.means),
            _relative_change(previous.variances, current.variances),
        )
        logger.debug("Oracle cutoff %d -> %d: relative change %.2e", previous.cutoff, cutoff, change)
        if change <= config.convergence_factor:
            break
        previous = current

    modes = tuple(
        ModeMoments(j, abs(a) ** 2, abs(a) ** 2, current.means[j - 1], current.variances[j - 1])
        for j, a in enumerate(alphas, start=1)
    )
    return MomentReport(modes, MomentMethod.ORACLE, cutoff=cutoff, truncation=current.truncation)


# -----------------------------------------------------------------------------
# Comparison with the closed form
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleComparison:
    closed_form: MomentReport
    oracle: MomentReport
    deviation: float
    tol: float = assumptions.ORACLE_AGREEMENT_TOL

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol

    def as_records(self) -> List[dict]:
        rows = []
        for c, o in zip(self.closed_form.modes, self.oracle.modes):
            rows.append({
                "mode": c.mode,
                "mean_closed": c.mean_out,
                "mean_oracle": o.mean_out,
                "var_closed": c.var_out,
                "var_oracle": o.var_out,
            })
        return rows


def moment_deviation(reference: MomentReport, other: MomentReport,
                     rel_tol: float = assumptions.ORACLE_AGREEMENT_TOL,
                     abs_tol: float = assumptions.ORACLE_ABS_TOL) -> float:
    """
    Largest relative difference of means and variances, with values below
    abs_tol / rel_tol compared on an absolute scale. A result <= rel_tol means
    agreement within max(rel_tol relative, abs_tol absolute).
    """
    floor = abs_tol / rel_tol
    worst = 0.0
    for r, o in zip(reference.modes, other.modes):
        for x, y in ((r.mean_out, o.mean_out), (r.var_out, o.var_out)):
            worst = max(worst, abs(y - x) / max(abs(x), floor))
    return worst


def compare_with_oracle(matrix: TransferMatrix, alphas: Sequence[complex],
                        config: FockConfig = FockConfig(),
                        tol: float = assumptions.ORACLE_AGREEMENT_TOL) -> OracleComparison:
    state = InputState.from_alphas(alphas)
    closed = moments_general(matrix, state)
    oracle = oracle_moments(matrix, state.alphas, config)
    return OracleComparison(closed, oracle, moment_deviation(closed, oracle, tol), tol)
