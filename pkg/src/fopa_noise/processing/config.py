"""
Optional JSON config file for the sweep command.

Field names match the long command-line flags (dashes become underscores).
Flags given on the command line override values from the file.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from fopa_noise import assumptions
from fopa_noise.analysis.noise_figure import Regime
from fopa_noise.core.models import ModelId
from fopa_noise.errors import InvalidSweepError, MatrixFileError
from fopa_noise.processing.sweep import Grid, NfMethod, SweepSpec

logger = logging.getLogger(__name__)

# Alternative ways of giving xi and Theta; an override through one way drops the others.
XI_SOURCES = (
    frozenset({"xi"}),
    frozenset({"xi_start", "xi_stop", "xi_count", "xi_spacing"}),
    frozenset({"gamma", "power", "length"}),
)
THETA_SOURCES = (
    frozenset({"theta"}),
    frozenset({"theta_start", "theta_stop", "theta_count", "theta_spacing"}),
)


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: str = assumptions.DEFAULT_MODEL
    xi: Optional[float] = None
    xi_start: float = 0.0
    xi_stop: Optional[float] = None
    xi_count: int = Field(1, ge=1)
    xi_spacing: Literal["linear", "log"] = "linear"
    gamma: Optional[float] = None
    power: Optional[float] = None
    length: Optional[float] = None
    theta: Optional[float] = None
    theta_start: float = 0.0
    theta_stop: Optional[float] = None
    theta_count: int = Field(1, ge=1)
    theta_spacing: Literal["linear", "log"] = "linear"
    theta_pi: bool = False
    regime: Regime = Regime.PIA
    injected: Optional[Union[int, str]] = None
    alpha_sq: float = Field(assumptions.LARGE_SIGNAL_PHOTONS, gt=0)
    modes: Optional[List[int]] = None
    nf_method: NfMethod = NfMethod.CLOSED_FORM
    pair_weight: Literal["row", "printed"] = "row"
    output: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    workers: int = Field(assumptions.DEFAULT_WORKERS, ge=1)

    @model_validator(mode="after")
    def check_physical(self):
        physical = [self.gamma, self.power, self.length]
        if any(v is not None for v in physical) and not all(v is not None for v in physical):
            raise ValueError("gamma, power and length must be given together")
        return self

    def merged(self, overrides: Dict[str, Any]) -> "SweepConfig":
        """
        Copy with every non-None override applied, then re-validated.

        When the overrides give xi one way (single value, grid or physical
        parameters), the other ways are cleared from this config so they cannot
        shadow it; Theta works the same. theta_pi only sets units.
        """
        given = {k: v for k, v in overrides.items() if v is not None and k in SweepConfig.model_fields}
        data = self.model_dump()
        for sources in (XI_SOURCES, THETA_SOURCES):
            for source in sources:
                if source & given.keys():
                    for other in sources:
                        if other is not source:
                            data.update({key: SweepConfig.model_fields[key].default for key in other})
        data.update(given)
        return SweepConfig.model_validate(data)

    def xi_grid(self) -> Grid:
        if self.gamma is not None:
            return Grid.point(assumptions.physical_to_xi(self.gamma, self.power, self.length))
        if self.xi is not None:
            return Grid.point(self.xi)
        stop = self.xi_stop if self.xi_stop is not None else self.xi_start
        return Grid(self.xi_start, stop, self.xi_count, self.xi_spacing)

    def theta_grid(self) -> Grid:
        if self.theta is not None:
            grid = Grid.point(self.theta)
        else:
            stop = self.theta_stop if self.theta_stop is not None else self.theta_start
            grid = Grid(self.theta_start, stop, self.theta_count, self.theta_spacing)
        return grid.scaled(math.pi) if self.theta_pi else grid

    def injection(self) -> Union[int, tuple]:
        """p as an integer, or a flag string such as "1100"."""
        if self.injected is None:
            return 2 if self.regime is Regime.PSA else 1
        if isinstance(self.injected, int):
            return self.injected
        text = self.injected.strip()
        if text.isdigit() and len(text) == 1:
            return int(text)
        if set(text) <= {"0", "1"}:
            return tuple(ch == "1" for ch in text)
        raise InvalidSweepError(f"Injection must be p or a 0/1 flag string, got {self.injected!r}")

    def to_spec(self) -> SweepSpec:
        try:
            model = ModelId.parse(self.model)
        except ValueError as exc:
            raise InvalidSweepError(str(exc)) from exc
        return SweepSpec(
            model=model,
            xi_grid=self.xi_grid(),
            theta_grid=self.theta_grid(),
            regime=self.regime,
            injected=self.injection(),
            alpha_sq=self.alpha_sq,
            modes=tuple(self.modes) if self.modes else (1,),
            nf_method=self.nf_method,
            pair_weight=self.pair_weight,
        )


def load_config(path: Union[str, Path]) -> SweepConfig:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixFileError(f"Cannot read config file {path}: {exc}") from exc
    try:
        config = SweepConfig.model_validate_json(raw)
    except ValidationError as exc:
        raise MatrixFileError(f"Invalid config file {path}: {exc}") from exc
    logger.debug("Loaded sweep config from %s", path)
    return config
