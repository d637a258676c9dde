"""
Closed-form output photon-number moments for coherent/vacuum inputs.

For a product of coherent states, output mode j sees the row operator
R_j = beta_j + F_j, where beta_j = sum_k mu_jk gamma_k (gamma_k = alpha_k on
annihilation slots, conj(alpha_k) on creation slots) and F_j is linear in the
vacuum fluctuations. Only the input commutation relations enter, so the
expressions below hold for any complex matrix, symplectic or not.

    mean_j = sum_k |mu_jk|^2 (|alpha_k|^2 + sigma_jk) + phase terms
    var_j  = sum_k |mu_jk|^4 |alpha_k|^2
             + sum_{k<l} |mu_jk mu_jl|^2 (|alpha_k|^2 + |alpha_l|^2 + sigma_kl)
             + sum_{k<l} (phase term)_kl * weight_jkl

The exact weight of every phase-carrying pair is the full row norm S_j.
pair_weight="printed" uses |mu_jk|^2 + |mu_jl|^2 + sum_{m>l} |mu_jm|^2
instead; the two agree whenever only modes 1 and 2 carry phase terms.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Literal, Optional, Tuple

import numpy as np

from fopa_noise import assumptions
from fopa_noise.core.mode_algebra import (
    InputState,
    TransferMatrix,
    check_dimensions,
    selector_abcd,
    selector_sigma,
)
from fopa_noise.errors import DimensionMismatchError, MomentOverflowError

logger = logging.getLogger(__name__)

PairWeight = Literal["row", "printed"]


class MomentMethod(str, Enum):
    CLOSED_FORM = "closed-form"
    ORACLE = "oracle"


@dataclass(frozen=True)
class ModeMoments:
    mode: int
    mean_in: float
    var_in: float
    mean_out: float
    var_out: float


@dataclass(frozen=True)
class MomentReport:
    modes: Tuple[ModeMoments, ...]
    method: MomentMethod = MomentMethod.CLOSED_FORM
    cutoff: Optional[int] = None
    truncation: float = 0.0

    def __getitem__(self, j: int) -> ModeMoments:
        if not 1 <= j <= len(self.modes):
            raise IndexError(f"Mode {j} out of range 1..{len(self.modes)}")
        return self.modes[j - 1]

    def mean_out(self, j: int) -> float:
        return self[j].mean_out

    def var_out(self, j: int) -> float:
        return self[j].var_out

    def as_records(self) -> List[dict]:
        return [
            {
                "mode": m.mode,
                "mean_in": m.mean_in,
                "var_in": m.var_in,
                "mean_out": m.mean_out,
                "var_out": m.var_out,
                "method": self.method.value,
            }
            for m in self.modes
        ]


def _abs2(z: complex) -> float:
    return z.real * z.real + z.imag * z.imag


def _moment_sum(terms, mode: int) -> float:
    try:
        total = math.fsum(terms)
    except (OverflowError, ValueError):
        total = math.inf
    if not math.isfinite(total):
        raise MomentOverflowError(
            f"Mode {mode}: output moments overflow double precision; lower the input photon number or xi"
        )
    return total


def _clamp_variance(value: float, mode: int) -> float:
    if value >= 0.0:
        return value
    if value < assumptions.VARIANCE_FLOOR:
        logger.warning("Mode %d: variance %.3e below floor, clamped to 0", mode, value)
    return 0.0


def fluorescence(matrix: TransferMatrix, j: int) -> float:
    """Output photons of mode j generated from vacuum alone: sum_k |mu_jk|^2 sigma_jk."""
    sig = matrix.signature
    row = matrix.abs2_row(j)
    return math.fsum(row[k - 1] * selector_sigma(sig, j, k) for k in range(1, matrix.n + 1))


def phase_term(matrix: TransferMatrix, state: InputState, j: int, k: int, l: int) -> float:
    """
    The A/B/C/D-selected interference term of pair (k, l) in the mean of mode j.

    A: mu_jk mu_jl* a_k a_l + c.c.        B: mu_jk* mu_jl a_k a_l + c.c.
    C: mu_jk mu_jl* a_k a_l* + c.c.       D: mu_jk mu_jl* a_k* a_l + c.c.
    """
    a, b, c, d = selector_abcd(matrix.signature, k, l)
    mk, ml = matrix.mu(j, k), matrix.mu(j, l)
    ak, al = state.alpha(k), state.alpha(l)
    if ak == 0 or al == 0:
        return 0.0
    if a:
        z = mk * ml.conjugate() * ak * al
    elif b:
        z = mk.conjugate() * ml * ak * al
    elif c:
        z = mk * ml.conjugate() * ak * al.conjugate()
    else:
        z = mk * ml.conjugate() * ak.conjugate() * al
    return 2.0 * z.real


def pair_weight_factor(matrix: TransferMatrix, j: int, k: int, l: int, pair_weight: PairWeight = "row") -> float:
    row = matrix.abs2_row(j)
    if pair_weight == "row":
        return math.fsum(row)
    if pair_weight == "printed":
        return math.fsum([row[k - 1], row[l - 1]] + list(row[l:]))
    raise ValueError(f"pair_weight must be 'row' or 'printed', got {pair_weight!r}")


def _mode_moments(matrix: TransferMatrix, state: InputState, j: int, pair_weight: PairWeight) -> Tuple[float, float]:
    n = matrix.n
    sig = matrix.signature
    row = matrix.abs2_row(j)
    photons = [state.photons(k) for k in range(1, n + 1)]

    mean_terms = [row[k - 1] * (photons[k - 1] + selector_sigma(sig, j, k)) for k in range(1, n + 1)]
    var_terms = [row[k - 1] ** 2 * photons[k - 1] for k in range(1, n + 1)]
    for k in range(1, n + 1):
        for l in range(k + 1, n + 1):
            var_terms.append(
                row[k - 1] * row[l - 1] * (photons[k - 1] + photons[l - 1] + selector_sigma(sig, k, l))
            )
            term = phase_term(matrix, state, j, k, l)
            if term:
                mean_terms.append(term)
                var_terms.append(term * pair_weight_factor(matrix, j, k, l, pair_weight))

    mean = _moment_sum(mean_terms, j)
    var = _moment_sum(var_terms, j)
    return max(mean, 0.0), _clamp_variance(var, j)


def moments_general(matrix: TransferMatrix, state: InputState, pair_weight: PairWeight = "row") -> MomentReport:
    """Output means and variances of every mode for an arbitrary injection pattern."""
    check_dimensions(matrix, state)
    modes = []
    for j in range(1, matrix.n + 1):
        mean, var = _mode_moments(matrix, state, j, pair_weight)
        photons_in = state.photons(j)
        modes.append(ModeMoments(j, photons_in, photons_in, mean, var))
    return MomentReport(tuple(modes), MomentMethod.CLOSED_FORM)


def moments_pia(matrix: TransferMatrix, alpha1: complex) -> MomentReport:
    """
    Only the signal is injected.

        mean_j = |mu_j1|^2 |alpha_1|^2 + sum_k |mu_jk|^2 sigma_jk
        var_j  = |mu_j1|^4 |alpha_1|^2 + sum_{k>=2} |mu_j1 mu_jk|^2 |alpha_1|^2
                 + sum_{k<l} |mu_jk mu_jl|^2 sigma_kl
    """
    if matrix.n < 1:
        raise DimensionMismatchError("Empty transfer matrix")
    sig = matrix.signature
    n = matrix.n
    photons = _abs2(complex(alpha1))
    modes = []
    for j in range(1, n + 1):
        row = matrix.abs2_row(j)
        mean = _moment_sum([row[0] * photons, fluorescence(matrix, j)], j)
        var_terms = [row[0] ** 2 * photons]
        var_terms += [row[0] * row[k - 1] * photons for k in range(2, n + 1)]
        var_terms += [
            row[k - 1] * row[l - 1] * selector_sigma(sig, k, l)
            for k in range(1, n + 1)
            for l in range(k + 1, n + 1)
        ]
        var = _clamp_variance(_moment_sum(var_terms, j), j)
        mean_in = photons if j == 1 else 0.0
        modes.append(ModeMoments(j, mean_in, mean_in, mean, var))
    return MomentReport(tuple(modes), MomentMethod.CLOSED_FORM)


def output_amplitude(matrix: TransferMatrix, state: InputState, j: int) -> complex:
    """beta_j: the coherent part of row j (conjugated amplitudes on creation slots)."""
    check_dimensions(matrix, state)
    gammas = np.array(
        [a if matrix.signature.is_annihilation(k) else a.conjugate()
         for k, a in enumerate(state.alphas, start=1)],
        dtype=np.complex128,
    )
    return complex(np.dot(matrix.entries[j - 1], gammas))
