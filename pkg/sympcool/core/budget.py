import itertools
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from sympcool.config import BUDGET_AXES, DEFAULT_BUDGET_AXES
from sympcool.core.qubit import gate_error_budget, scattering_per_cycle
from sympcool.core.records import write_table
from sympcool.types import ScatterParams


logger = logging.getLogger(__name__)


def parse_sweep(specs: Sequence[str]) -> Dict[str, List[float]]:
    """["eta=0.1,0.2", "cycles=0,10"] -> {"eta": [0.1, 0.2], "cycles": [0.0, 10.0]}"""

    axes: Dict[str, List[float]] = {}

    for spec in specs:
        if "=" not in spec:
            raise ValueError(f"config_error: sweep '{spec}' must read axis=v1,v2,...")
        name, raw = (part.strip() for part in spec.split("=", 1))

        if name not in BUDGET_AXES:
            raise ValueError(f"config_error: unknown sweep axis '{name}' (expected one of {', '.join(BUDGET_AXES)})")

        try:
            values = [float(v) for v in raw.split(",") if v.strip()]
        except ValueError:
            raise ValueError(f"config_error: sweep axis '{name}' has a non-numeric value")

        if not values:
            raise ValueError(f"config_error: sweep axis '{name}' is empty")
        axes[name] = values

    return axes


def budget_table(
    axes: Dict[str, List[float]],
    scatter: Optional[ScatterParams] = None,
) -> pd.DataFrame:
    """
    Cartesian sweep of the motional gate-error term and its sum with the
    accumulated per-cycle loss: bound = gamma_thermal + cycles * eps.
    An elastic_fraction axis adds the decohering scatter per cycle.
    """

    merged = {name: list(values) for name, values in DEFAULT_BUDGET_AXES.items()}
    merged.update(axes)

    for name, values in merged.items():
        if not values:
            raise ValueError(f"config_error: sweep axis '{name}' is empty")

    elastic = merged.pop("elastic_fraction", None)
    if elastic is not None and scatter is None:
        raise ValueError("config_error: an elastic_fraction sweep needs a [scatter] block")

    rows = []
    for eta, nbar, cycles, eps in itertools.product(merged["eta"], merged["nbar"], merged["cycles"], merged["eps"]):
        gamma_thermal, bound = gate_error_budget(eta, nbar, cycles, eps)
        row = {
            "eta": eta,
            "nbar": nbar,
            "cycles": cycles,
            "eps": eps,
            "gamma_thermal": gamma_thermal,
            "gamma_bound": bound,
        }

        if elastic is None:
            rows.append(row)
            continue

        for fraction in elastic:
            budget = scattering_per_cycle(scatter.model_copy(update={"elastic_fraction": fraction}))
            rows.append({**row, "elastic_fraction": fraction, "r_decohering": budget.r_decohering})

    return pd.DataFrame(rows)


def write_budget(frame: pd.DataFrame, output_dir: Path, metadata: Dict[str, str]) -> Path:
    path = write_table(frame, Path(output_dir) / "budget.csv", metadata)
    logger.info("budget sweep: %d rows -> %s", len(frame), path)
    return path
