"""
Gains and noise figures of many-mode parametric amplifiers.

Two families live here:

* nf_from_moments: the photon-number definition of the noise figure, with the
  output SNR of mode j normalised to the input SNR of the signal (mode 1).
  Exact at any input level.
* Closed forms valid for |alpha|^2 >> 1 (fluorescence terms dropped):
  nf_pia for a signal-only input, nf_psa_two_injected for signal and idler
  injected with equal photon numbers, nf_psa_general for the first p modes
  injected with equal photon numbers.

The composite relative phase Theta absorbs the matrix phases theta_jk, so it
is different for every output mode j; closed-form PSA operations take Theta
directly.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from fopa_noise.analysis.moments import MomentReport, PairWeight, pair_weight_factor
from fopa_noise.core.mode_algebra import (
    InputState,
    TransferMatrix,
    check_dimensions,
    pair_type,
)
from fopa_noise.errors import ModeIndexError, UndefinedNoiseFigureError

logger = logging.getLogger(__name__)


class Regime(str, Enum):
    PIA = "PIA"
    PSA = "PSA"


def to_db(x: float) -> float:
    """10 log10 of a photon-number (power) ratio."""
    return 10.0 * math.log10(x)


def from_db(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def reduce_angle(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    reduced = math.remainder(theta, 2.0 * math.pi)
    return math.pi if reduced == -math.pi else reduced


@dataclass(frozen=True)
class PhaseConfig:
    """
    Either the composite phase Theta of pair (1, 2), or explicit input phases
    theta_k of the injected modes (from which Theta_A..Theta_D are derived).
    """

    theta: Optional[float] = None
    mode_phases: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.theta is None and self.mode_phases is None:
            raise ValueError("PhaseConfig needs theta or mode_phases")
        if self.mode_phases is not None:
            object.__setattr__(self, "mode_phases", tuple(float(p) for p in self.mode_phases))

    @classmethod
    def from_state(cls, state: InputState) -> "PhaseConfig":
        return cls(mode_phases=tuple(state.phase(k) for k in range(1, state.n + 1)))


@dataclass(frozen=True)
class NoiseEntry:
    mode: int
    gain_linear: float
    gain_db: Optional[float]
    nf_linear: Optional[float]
    nf_db: Optional[float]
    regime: Regime
    theta: Optional[float] = None

    @property
    def nf_defined(self) -> bool:
        return self.nf_linear is not None


@dataclass(frozen=True)
class NoiseReport:
    entries: Tuple[NoiseEntry, ...]
    regime: Regime

    def __getitem__(self, j: int) -> NoiseEntry:
        for entry in self.entries:
            if entry.mode == j:
                return entry
        raise KeyError(f"Mode {j} not in report")


def make_entry(mode: int, gain: float, nf: Optional[float], regime: Regime,
               theta: Optional[float] = None) -> NoiseEntry:
    gain_db = to_db(gain) if gain > 0 else None
    nf_db = to_db(nf) if nf is not None and nf > 0 else None
    theta = reduce_angle(theta) if theta is not None else None
    return NoiseEntry(mode, gain, gain_db, nf, nf_db, regime, theta)


def _check_mode(matrix: TransferMatrix, j: int) -> None:
    if not 1 <= j <= matrix.n:
        raise ModeIndexError(f"Mode {j} out of range 1..{matrix.n}")


# -----------------------------------------------------------------------------
# Definition from moments (exact)
# -----------------------------------------------------------------------------

def nf_from_moments(report_in_mean: float, report_in_var: float, report_out: MomentReport, j: int,
                    regime: Regime = Regime.PIA, theta: Optional[float] = None) -> NoiseEntry:
    """
    NF_j = (<N_1>_in^2 / <dN_1^2>_in) * (<dN_j^2>_out / <N_j>_out^2).

    The gain reported alongside is <N_j>_out / <N_1>_in. A zero output mean
    gives an entry with nf_linear = None rather than an infinite value.
    """
    if report_in_mean <= 0:
        raise ValueError("The signal must be injected (input mean photon number > 0)")
    if report_in_var <= 0:
        raise ValueError("Input variance must be positive")
    mode = report_out[j]
    gain = mode.mean_out / report_in_mean
    if mode.mean_out <= 0:
        logger.debug("Mode %d has no output photons; NF undefined", j)
        return make_entry(j, gain, None, regime, theta)
    nf = (report_in_mean / report_in_var * report_in_mean) * (mode.var_out / mode.mean_out / mode.mean_out)
    return make_entry(j, gain, nf, regime, theta)


# -----------------------------------------------------------------------------
# Phase-insensitive closed forms
# -----------------------------------------------------------------------------

def gain_pia(matrix: TransferMatrix, j: int) -> float:
    """|mu_j1|^2 (a conversion efficiency for j != 1)."""
    _check_mode(matrix, j)
    return float(matrix.abs2_row(j)[0])


def pia_noise_contributions(matrix: TransferMatrix, j: int) -> Dict[int, float]:
    """Share of NF_PIA - 1 coupled in through each vacuum port k >= 2."""
    g = gain_pia(matrix, j)
    if g == 0:
        raise UndefinedNoiseFigureError(f"Mode {j}: mu_{j}1 = 0, PIA noise figure undefined")
    row = matrix.abs2_row(j)
    return {k: float(row[k - 1] / g) for k in range(2, matrix.n + 1)}


def nf_pia(matrix: TransferMatrix, j: int) -> float:
    """1 + sum_{k>=2} |mu_jk|^2 / |mu_j1|^2."""
    contributions = pia_noise_contributions(matrix, j)
    return 1.0 + math.fsum(contributions.values())


# -----------------------------------------------------------------------------
# Phase-sensitive closed forms
# -----------------------------------------------------------------------------

def relative_phase(matrix: TransferMatrix, j: int, k: int, l: int, mode_phases: Sequence[float]) -> float:
    """
    Theta_A..Theta_D of pair (k, l) seen by output mode j, picked by the pair type:

        A:  theta_jk - theta_jl + theta_k + theta_l
        B: -theta_jk + theta_jl + theta_k + theta_l
        C:  theta_jk - theta_jl + theta_k - theta_l
        D:  theta_jk - theta_jl - theta_k + theta_l
    """
    tjk, tjl = matrix.phase(j, k), matrix.phase(j, l)
    tk, tl = mode_phases[k - 1], mode_phases[l - 1]
    kind = pair_type(matrix.signature, k, l)
    if kind == "A":
        return tjk - tjl + tk + tl
    if kind == "B":
        return -tjk + tjl + tk + tl
    if kind == "C":
        return tjk - tjl + tk - tl
    return tjk - tjl - tk + tl


def signal_phase_for_theta(matrix: TransferMatrix, j: int, theta: float, idler_phase: float = 0.0) -> float:
    """Input phase theta_1 that makes pair (1, 2) of mode j sit at the composite phase Theta."""
    t1, t2 = matrix.phase(j, 1), matrix.phase(j, 2)
    kind = pair_type(matrix.signature, 1, 2)
    if kind == "A":
        value = theta - t1 + t2 - idler_phase
    elif kind == "B":
        value = theta + t1 - t2 - idler_phase
    elif kind == "C":
        value = theta - t1 + t2 + idler_phase
    else:
        value = -(theta - t1 + t2 - idler_phase)
    return reduce_angle(value)


def _composite_theta(matrix: TransferMatrix, j: int, phases: PhaseConfig) -> float:
    if phases.theta is not None:
        return phases.theta
    return relative_phase(matrix, j, 1, 2, phases.mode_phases)


def gain_psa(matrix: TransferMatrix, j: int, phases: PhaseConfig) -> float:
    """|mu_j1|^2 + |mu_j2|^2 + 2 |mu_j1||mu_j2| cos(Theta), signal and idler equally injected."""
    _check_mode(matrix, j)
    if matrix.n < 2:
        raise ModeIndexError("PSA operation needs at least two modes")
    row = matrix.abs2_row(j)
    theta = _composite_theta(matrix, j, phases)
    return max(math.fsum([row[0], row[1], _interference(row, 1, 2, theta)]), 0.0)


def _interference(row: np.ndarray, k: int, l: int, theta: float) -> float:
    """2 |mu_jk||mu_jl| cos(theta) from squared magnitudes, without forming their product."""
    return 2.0 * math.sqrt(row[k - 1]) * math.sqrt(row[l - 1]) * math.cos(theta)


def _row_shares(matrix: TransferMatrix, j: int) -> Tuple[np.ndarray, float]:
    """(|mu_jk|^2 / S_j, S_j). Noise-figure ratios do not change under this scaling."""
    row = matrix.abs2_row(j)
    scale = math.fsum(row)
    if scale == 0:
        raise UndefinedNoiseFigureError(f"Mode {j}: row {j} is zero; noise figure undefined")
    return row / scale, scale


def nf_psa_two_injected(matrix: TransferMatrix, j: int, phases: PhaseConfig) -> float:
    """
    Signal and idler injected with |alpha_1|^2 = |alpha_2|^2 >> 1:

        NF_j = { sum_{k<=2} |mu_jk|^4 + sum_{k<l} |mu_jk mu_jl|^2 (y_k + y_l)
                 + 2 |mu_j1 mu_j2| cos(Theta) S_j } / G_j,PSA^2
    """
    undefined = UndefinedNoiseFigureError(f"Mode {j}: PSA gain is zero at Theta; noise figure undefined")
    if gain_psa(matrix, j, phases) <= 0:
        raise undefined
    n = matrix.n
    share, _ = _row_shares(matrix, j)
    y = [1 if k <= 2 else 0 for k in range(1, n + 1)]
    cross = _interference(share, 1, 2, _composite_theta(matrix, j, phases))
    gain = math.fsum([share[0], share[1], cross])
    if gain <= 0:
        raise undefined
    terms = [share[0] ** 2, share[1] ** 2, cross]
    terms += [share[k] * share[l] * (y[k] + y[l]) for k in range(n) for l in range(k + 1, n)]
    return math.fsum(terms) / gain ** 2


def _leading_block(state: InputState) -> int:
    """Number p of injected leading modes; the pattern must be 1..p with equal |alpha|."""
    p = state.injected_count
    if p < 1 or state.injected[:p] != (True,) * p:
        raise ValueError("Closed-form PSA noise figure needs modes 1..p injected and the rest in vacuum")
    photons = [state.photons(k) for k in range(1, p + 1)]
    if not np.allclose(photons, photons[0], rtol=1e-9, atol=0.0):
        raise ValueError("Closed-form PSA noise figure needs equal photon numbers in the injected modes")
    return p


def _pair_interference(matrix: TransferMatrix, row: np.ndarray, j: int, k: int, l: int,
                       mode_phases: Sequence[float]) -> float:
    """
    2 |mu_jk mu_jl| (A cos Theta_A + B cos Theta_B + C cos Theta_C + D cos Theta_D),
    with row holding the squared magnitudes of row j (possibly scaled).

    Only one selector is set per pair, so relative_phase already picks the term.
    """
    return _interference(row, k, l, relative_phase(matrix, j, k, l, mode_phases))


def _omega(matrix: TransferMatrix, row: np.ndarray, j: int, p: int, mode_phases: Sequence[float]) -> float:
    terms = [row[k - 1] for k in range(1, p + 1)]
    terms += [
        _pair_interference(matrix, row, j, k, l, mode_phases)
        for k in range(1, p)
        for l in range(k + 1, p + 1)
    ]
    return math.fsum(terms)


def gain_psa_general(matrix: TransferMatrix, state: InputState, j: int,
                     phases: Optional[PhaseConfig] = None) -> float:
    """Omega_j = sum_{k<=p} |mu_jk|^2 + sum_{k<l<=p} pair interference."""
    check_dimensions(matrix, state)
    _check_mode(matrix, j)
    p = _leading_block(state)
    return _omega(matrix, matrix.abs2_row(j), j, p, _mode_phases(state, phases))


def _mode_phases(state: InputState, phases: Optional[PhaseConfig]) -> Tuple[float, ...]:
    if phases is not None and phases.mode_phases is not None:
        if len(phases.mode_phases) != state.n:
            raise ValueError(f"Expected {state.n} mode phases, got {len(phases.mode_phases)}")
        return phases.mode_phases
    return tuple(state.phase(k) for k in range(1, state.n + 1))


def nf_psa_general(matrix: TransferMatrix, state: InputState, j: int,
                   phases: Optional[PhaseConfig] = None, pair_weight: PairWeight = "row") -> float:
    """
    First p modes injected with equal photon numbers |alpha|^2 >> 1:

        NF_j = { sum_{k<=p} |mu_jk|^4 + sum_{k<l} |mu_jk mu_jl|^2 (y_k + y_l)
                 + sum_{k<l<=p} interference_kl * weight_jkl } / Omega_j^2

    The input SNR stays normalised to the signal. For p = 1 this is nf_pia,
    for p = 2 it is nf_psa_two_injected.
    """
    undefined = UndefinedNoiseFigureError(f"Mode {j}: Omega = 0 at these phases; noise figure undefined")
    if gain_psa_general(matrix, state, j, phases) <= 0:
        raise undefined
    p = _leading_block(state)
    mode_phases = _mode_phases(state, phases)
    n = matrix.n
    share, scale = _row_shares(matrix, j)
    omega = _omega(matrix, share, j, p, mode_phases)
    if omega <= 0:
        raise undefined
    y = [1 if k < p else 0 for k in range(n)]
    terms = [share[k] ** 2 for k in range(p)]
    terms += [share[k] * share[l] * (y[k] + y[l]) for k in range(n) for l in range(k + 1, n)]
    terms += [
        _pair_interference(matrix, share, j, k, l, mode_phases)
        * (pair_weight_factor(matrix, j, k, l, pair_weight) / scale)
        for k in range(1, p)
        for l in range(k + 1, p + 1)
    ]
    return math.fsum(terms) / omega ** 2


# -----------------------------------------------------------------------------
# Reports and extrema
# -----------------------------------------------------------------------------

def psa_gain_extrema(matrix: TransferMatrix, j: int, thetas: Iterable[float]) -> Tuple[float, float, float, float]:
    """(min gain, Theta at min, max gain, Theta at max) of gain_psa over a Theta grid."""
    thetas = list(thetas)
    if not thetas:
        raise ValueError("Empty Theta grid")
    gains = np.array([gain_psa(matrix, j, PhaseConfig(theta=t)) for t in thetas])
    i_min, i_max = int(np.argmin(gains)), int(np.argmax(gains))
    return float(gains[i_min]), thetas[i_min], float(gains[i_max]), thetas[i_max]


def noise_report(matrix: TransferMatrix, regime: Regime, modes: Optional[Iterable[int]] = None,
                 theta: float = 0.0) -> NoiseReport:
    """Closed-form gain and NF of several modes; undefined NF shows up as None."""
    modes = list(modes) if modes is not None else list(range(1, matrix.n + 1))
    entries = []
    for j in modes:
        if regime is Regime.PIA:
            gain = gain_pia(matrix, j)
            try:
                nf = nf_pia(matrix, j)
            except UndefinedNoiseFigureError:
                nf = None
            entries.append(make_entry(j, gain, nf, regime))
        else:
            phases = PhaseConfig(theta=theta)
            gain = gain_psa(matrix, j, phases)
            try:
                nf = nf_psa_two_injected(matrix, j, phases)
            except UndefinedNoiseFigureError:
                nf = None
            entries.append(make_entry(j, gain, nf, regime, theta))
    return NoiseReport(tuple(entries), regime)
