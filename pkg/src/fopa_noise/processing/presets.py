"""
Figure-preset datasets: fixed grids over xi and Theta for the two-mode and
four-mode built-in models, one result file per model.
"""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

from fopa_noise import assumptions
from fopa_noise.analysis.noise_figure import Regime
from fopa_noise.core.models import ModelId
from fopa_noise.processing.export import write_results
from fopa_noise.processing.sweep import Grid, ResultRow, SweepSpec, evaluate_sweep

logger = logging.getLogger(__name__)

PRESET_MODELS = {"two_mode": ModelId("two"), "four_mode": ModelId("four")}


def _fig2(model: ModelId) -> SweepSpec:
    # gains and NF versus xi, signal only
    return SweepSpec(model, Grid.from_dict(assumptions.FIG2_XI), regime=Regime.PIA, injected=1, modes=None)


def _fig3(model: ModelId) -> SweepSpec:
    # same in PSA operation at Theta = 0, signal and idler injected
    return SweepSpec(model, Grid.from_dict(assumptions.FIG3_XI), Grid.point(0.0),
                     regime=Regime.PSA, injected=2, modes=None)


def _fig4(model: ModelId) -> SweepSpec:
    theta = Grid.from_dict(assumptions.FIG4_THETA_PI).scaled(assumptions.theta_from_pi_units(1.0))
    return SweepSpec(model, Grid.point(assumptions.FIG4_XI), theta, regime=Regime.PSA, injected=2, modes=None)


PRESETS = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4}


def preset_specs(name: str) -> Dict[str, SweepSpec]:
    """Sweep specs of a preset keyed by file stem, e.g. {"fig2_two_mode": ...}."""
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ValueError(f"Unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None
    return {f"{name}_{suffix}": builder(model) for suffix, model in PRESET_MODELS.items()}


def run_preset(name: str, out_dir: Union[str, Path], fmt: str = "csv",
               workers: int = assumptions.DEFAULT_WORKERS) -> List[Tuple[Path, List[ResultRow]]]:
    """Evaluate every model of a preset and write `<preset>_<model>.<fmt>` into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, spec in preset_specs(name).items():
        rows = evaluate_sweep(spec, workers=workers)
        path = write_results(rows, out_dir / f"{stem}.{fmt}", fmt)
        written.append((path, rows))
    return written
