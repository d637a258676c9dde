"""
Grid sweeps over the nonlinear phase xi and the composite relative phase Theta.

Each grid point builds the model matrix once and emits one ResultRow per
reported mode. Points are independent, so they can be evaluated on a thread
pool; rows always come back in grid order (xi outer, Theta inner, mode).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from enum import Enum
from functools import partial
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from fopa_noise import assumptions
from fopa_noise.analysis.moments import PairWeight, moments_general, moments_pia
from fopa_noise.analysis.noise_figure import (
    NoiseEntry,
    PhaseConfig,
    Regime,
    gain_pia,
    gain_psa,
    gain_psa_general,
    make_entry,
    nf_from_moments,
    nf_pia,
    nf_psa_general,
    nf_psa_two_injected,
    signal_phase_for_theta,
)
from fopa_noise.core.mode_algebra import InputState, TransferMatrix
from fopa_noise.core.models import ModelId, build_model
from fopa_noise.errors import InvalidSweepError, UndefinedNoiseFigureError

logger = logging.getLogger(__name__)

FLAG_UNDEFINED_NF = "undefined-nf"
FLAG_ZERO_GAIN = "zero-gain"


class NfMethod(str, Enum):
    CLOSED_FORM = "closed-form"
    EXACT = "exact"


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int = 1
    spacing: Literal["linear", "log"] = "linear"

    def __post_init__(self):
        if self.count < 1:
            raise InvalidSweepError(f"Grid count must be >= 1, got {self.count}")
        if self.spacing not in ("linear", "log"):
            raise InvalidSweepError(f"Grid spacing must be 'linear' or 'log', got {self.spacing!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise InvalidSweepError("Grid bounds must be finite")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise InvalidSweepError("Log spacing requires start > 0 and stop > 0")

    @classmethod
    def point(cls, value: float) -> "Grid":
        return cls(value, value, 1)

    @classmethod
    def from_dict(cls, d: Dict) -> "Grid":
        return cls(float(d["start"]), float(d["stop"]), int(d.get("count", 1)), d.get("spacing", "linear"))

    def scaled(self, factor: float) -> "Grid":
        return Grid(self.start * factor, self.stop * factor, self.count, self.spacing)

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepSpec:
    model: ModelId
    xi_grid: Grid
    theta_grid: Grid = Grid.point(0.0)
    regime: Regime = Regime.PIA
    injected: Union[int, Tuple[bool, ...]] = 1
    alpha_sq: float = assumptions.LARGE_SIGNAL_PHOTONS
    modes: Optional[Tuple[int, ...]] = (1,)
    nf_method: NfMethod = NfMethod.CLOSED_FORM
    pair_weight: PairWeight = "row"

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "nf_method", NfMethod(self.nf_method))
        if isinstance(self.injected, (list, tuple)):
            object.__setattr__(self, "injected", tuple(bool(y) for y in self.injected))
        if self.xi_grid.start < 0 or self.xi_grid.stop < 0:
            raise InvalidSweepError("xi must be >= 0")
        if not self.alpha_sq > 0 or not math.isfinite(self.alpha_sq):
            raise InvalidSweepError(f"alpha_sq must be finite and > 0, got {self.alpha_sq}")
        if self.modes is not None:
            if not self.modes or any(j < 1 for j in self.modes):
                raise InvalidSweepError(f"Modes to report must be 1-based labels, got {self.modes}")
            object.__setattr__(self, "modes", tuple(int(j) for j in self.modes))

        if self.regime is Regime.PIA:
            if isinstance(self.injected, tuple):
                signal_only = self.injected[:1] == (True,) and not any(self.injected[1:])
            else:
                signal_only = self.injected == 1
            if not signal_only:
                raise InvalidSweepError("PIA operation injects the signal only")
        else:
            if isinstance(self.injected, tuple):
                if len(self.injected) < 2 or not (self.injected[0] and self.injected[1]):
                    raise InvalidSweepError("PSA operation needs the signal and the idler injected")
            elif self.injected < 2:
                raise InvalidSweepError(f"PSA operation needs p >= 2 injected modes, got p={self.injected}")

    def injection_flags(self, n: int) -> Tuple[bool, ...]:
        if isinstance(self.injected, tuple):
            if len(self.injected) != n:
                raise InvalidSweepError(f"Injection pattern has {len(self.injected)} flags, model has {n} modes")
            return self.injected
        if self.injected > n:
            raise InvalidSweepError(f"p={self.injected} injected modes but the model has only {n}")
        return (True,) * self.injected + (False,) * (n - self.injected)

    def theta_values(self) -> np.ndarray:
        # PIA rows carry theta = 0
        if self.regime is Regime.PIA:
            return np.array([0.0])
        return self.theta_grid.values()


@dataclass(frozen=True)
class ResultRow:
    xi: float
    theta: float
    mode: int
    gain_linear: float
    gain_db: Optional[float]
    nf_linear: Optional[float]
    nf_db: Optional[float]
    mean_out: float
    var_out: float
    method: str
    flags: str = ""

    def as_dict(self) -> Dict:
        return asdict(self)


def _flags(entry: NoiseEntry) -> str:
    flags = []
    if entry.nf_linear is None:
        flags.append(FLAG_UNDEFINED_NF)
    if entry.gain_db is None:
        flags.append(FLAG_ZERO_GAIN)
    return ";".join(flags)


def _row(xi: float, theta: float, entry: NoiseEntry, mean_out: float, var_out: float, method: NfMethod) -> ResultRow:
    return ResultRow(
        xi=float(xi),
        theta=float(theta),
        mode=entry.mode,
        gain_linear=float(entry.gain_linear),
        gain_db=entry.gain_db,
        nf_linear=entry.nf_linear,
        nf_db=entry.nf_db,
        mean_out=float(mean_out),
        var_out=float(var_out),
        method=method.value,
        flags=_flags(entry),
    )


def _is_leading(flags: Sequence[bool]) -> bool:
    p = sum(flags)
    return tuple(flags[:p]) == (True,) * p


def _closed_form_or_none(fn, *args, **kwargs) -> Optional[float]:
    try:
        return fn(*args, **kwargs)
    except UndefinedNoiseFigureError:
        return None


def _pia_rows(spec: SweepSpec, matrix: TransferMatrix, xi: float, modes: Sequence[int]) -> List[ResultRow]:
    alpha1 = math.sqrt(spec.alpha_sq)
    report = moments_pia(matrix, alpha1)
    rows = []
    for j in modes:
        if spec.nf_method is NfMethod.EXACT:
            entry = nf_from_moments(spec.alpha_sq, spec.alpha_sq, report, j, Regime.PIA)
        else:
            entry = make_entry(j, gain_pia(matrix, j), _closed_form_or_none(nf_pia, matrix, j), Regime.PIA)
        rows.append(_row(xi, 0.0, entry, report.mean_out(j), report.var_out(j), spec.nf_method))
    return rows


def _psa_state(matrix: TransferMatrix, flags: Sequence[bool], alpha_sq: float, j: int, theta: float) -> InputState:
    """Injected modes at |alpha|^2 = alpha_sq; theta_1 realises Theta for mode j, the rest sit at phase 0."""
    amplitude = math.sqrt(alpha_sq)
    theta1 = signal_phase_for_theta(matrix, j, theta)
    alphas = [amplitude * np.exp(1j * theta1)]
    alphas += [amplitude if y else 0.0 for y in flags[1:]]
    return InputState(tuple(alphas), tuple(flags))


def _psa_rows(spec: SweepSpec, matrix: TransferMatrix, xi: float, theta: float,
              modes: Sequence[int]) -> List[ResultRow]:
    flags = spec.injection_flags(matrix.n)
    p = sum(flags)
    rows = []
    for j in modes:
        state = _psa_state(matrix, flags, spec.alpha_sq, j, theta)
        report = moments_general(matrix, state, spec.pair_weight)
        if spec.nf_method is NfMethod.EXACT:
            entry = nf_from_moments(spec.alpha_sq, spec.alpha_sq, report, j, Regime.PSA, theta)
        elif p == 2 and flags[:2] == (True, True):
            phases = PhaseConfig(theta=theta)
            entry = make_entry(
                j, gain_psa(matrix, j, phases),
                _closed_form_or_none(nf_psa_two_injected, matrix, j, phases), Regime.PSA, theta,
            )
        else:
            entry = make_entry(
                j, gain_psa_general(matrix, state, j),
                _closed_form_or_none(nf_psa_general, matrix, state, j, pair_weight=spec.pair_weight),
                Regime.PSA, theta,
            )
        rows.append(_row(xi, theta, entry, report.mean_out(j), report.var_out(j), spec.nf_method))
    return rows


def _resolve_modes(spec: SweepSpec, n: int) -> Tuple[int, ...]:
    modes = spec.modes if spec.modes is not None else tuple(range(1, n + 1))
    bad = [j for j in modes if j > n]
    if bad:
        raise InvalidSweepError(f"Modes {bad} out of range 1..{n}")
    return modes


def _check_injection(spec: SweepSpec, n: int) -> None:
    flags = spec.injection_flags(n)
    if spec.regime is Regime.PSA and spec.nf_method is NfMethod.CLOSED_FORM and not _is_leading(flags):
        raise InvalidSweepError("Closed-form PSA noise figure needs the injected modes to be 1..p")


def evaluate_point(spec: SweepSpec, point: Tuple[float, float],
                   custom: Optional[TransferMatrix] = None) -> List[ResultRow]:
    """Rows of one (xi, Theta) grid point, in mode order."""
    xi, theta = point
    matrix = custom if custom is not None else build_model(spec.model, xi)
    modes = _resolve_modes(spec, matrix.n)
    if spec.regime is Regime.PIA:
        rows = _pia_rows(spec, matrix, xi, modes)
    else:
        rows = _psa_rows(spec, matrix, xi, theta, modes)
    for row in rows:
        if row.nf_linear is None:
            logger.warning("xi=%g theta=%g mode %d: noise figure undefined", row.xi, row.theta, row.mode)
    return rows


def grid_points(spec: SweepSpec) -> List[Tuple[float, float]]:
    return [(float(xi), float(theta)) for xi in spec.xi_grid.values() for theta in spec.theta_values()]


def evaluate_sweep(spec: SweepSpec, workers: int = assumptions.DEFAULT_WORKERS) -> List[ResultRow]:
    """
    Evaluate every grid point of a sweep.

    Args:
        spec: validated sweep specification
        workers: number of threads; 1 evaluates in the calling thread

    Returns:
        ResultRows ordered by (xi, Theta, mode) in grid order
    """
    if workers < 1:
        raise InvalidSweepError(f"workers must be >= 1, got {workers}")

    # Custom matrices do not depend on xi: load and check once.
    custom = build_model(spec.model) if spec.model.kind == "custom" else None
    probe = custom if custom is not None else build_model(spec.model, spec.xi_grid.start)
    _resolve_modes(spec, probe.n)
    _check_injection(spec, probe.n)

    points = grid_points(spec)
    logger.info("Sweeping %s (%s, %s): %d grid points", spec.model, spec.regime.value,
                spec.nf_method.value, len(points))
    evaluate = partial(evaluate_point, spec, custom=custom)
    if workers == 1:
        chunks = [evaluate(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(evaluate, points))
    return [row for chunk in chunks for row in chunk]
