"""Parameter sweeps of the maximized violation, written as CSV.

Presets regenerate the three published figures:

* ``fig1a``: MEMS family versus gamma
* ``fig1b``: Werner family at xi = pi/4 versus gamma
* ``fig2``:  Werner family over a (gamma, xi) grid spanning xi in [0, 2 pi)
* ``fig3``:  separable family versus x, Bell-state and product-state decompositions
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .optimize import OptimizerConfig, maximize_violation
from .qstate import (
    Decomposition,
    DomainError,
    bell_decomposition,
    mems_decomposition,
    product_decomposition,
    werner_decomposition,
)

FAMILIES: dict[str, tuple[Callable[..., Decomposition], tuple[str, ...]]] = {
    "mems": (mems_decomposition, ("gamma",)),
    "werner": (werner_decomposition, ("gamma", "xi")),
    "bell": (bell_decomposition, ("x",)),
    "product": (product_decomposition, ("x",)),
}

ANGLE_NAMES = ("a", "b", "c", "d")


def _steps(start: float, stop: float, step: float) -> list[float]:
    count = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 12) for k in range(count)]


GAMMA_GRID = _steps(0.05, 1.0, 0.05)
X_GRID = _steps(-0.25, 0.25, 0.025)
XI_GRID = [k * np.pi / 8 for k in range(16)]

PRESETS = {
    "fig1a": (("mems",), {"gamma": GAMMA_GRID}),
    "fig1b": (("werner",), {"gamma": GAMMA_GRID, "xi": [np.pi / 4]}),
    "fig2": (("werner",), {"gamma": _steps(0.2, 1.0, 0.2), "xi": XI_GRID}),
    "fig3": (("bell", "product"), {"x": X_GRID}),
}


@dataclass(frozen=True)
class SweepSpec:
    preset: str = "custom"
    families: tuple[str, ...] = ()
    grid: dict = field(default_factory=dict)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    output_path: str | None = None
    json_path: str | None = None

    def __post_init__(self):
        if not self.families:
            raise DomainError("sweep needs at least one state family")
        for fam in self.families:
            if fam not in FAMILIES:
                raise DomainError(f"unknown family {fam!r}; choose from {sorted(FAMILIES)}")
            missing = set(FAMILIES[fam][1]) - set(self.grid)
            if missing:
                raise DomainError(f"family {fam!r} needs grid values for {sorted(missing)}")
        if any(len(v) == 0 for v in self.grid.values()):
            raise DomainError("every grid parameter needs at least one value")
        if len(self.families) == 1 and max(len(v) for v in self.grid.values()) < 2:
            raise DomainError("a sweep needs at least 2 steps along some parameter")

    @classmethod
    def from_preset(cls, preset: str, **kwargs) -> "SweepSpec":
        if preset not in PRESETS:
            raise DomainError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        families, grid = PRESETS[preset]
        return cls(preset=preset, families=families, grid=dict(grid), **kwargs)

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(self.grid)

    def points(self) -> list[tuple[str, dict]]:
        """(family, parameters) in emission order: family-major, then grid order."""
        names = self.param_names
        out = []
        for fam in self.families:
            for values in itertools.product(*(self.grid[n] for n in names)):
                out.append((fam, dict(zip(names, values))))
        return out


@dataclass(frozen=True)
class SweepRow:
    preset: str
    family: str
    params: dict
    b_max: float
    bound: float
    violated: bool
    angles: tuple[float, ...]
    evaluations: int
    result: dict


def _run_point(args) -> SweepRow:
    preset, family, params, config = args
    builder, needed = FAMILIES[family]
    decomp = builder(*(params[n] for n in needed))
    res = maximize_violation(decomp, config)
    return SweepRow(
        preset=preset,
        family=family,
        params=params,
        b_max=res.b_max,
        bound=res.report.bound,
        violated=res.violated,
        angles=res.angles,
        evaluations=res.evaluations,
        result=res.to_dict(),
    )


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return f"{value:.12g}"
    return str(value)


def csv_header(spec: SweepSpec) -> list[str]:
    head = ["preset", "decomposition", *spec.param_names, "b_max", "bound", "violated"]
    if spec.optimizer.observable_mode == "plane":
        head += [f"theta_{n}" for n in ANGLE_NAMES]
    else:
        head += [f"{k}_{n}" for n in ANGLE_NAMES for k in ("polar", "azimuth")]
    return head + ["evaluations"]


def write_csv(spec: SweepSpec, rows: list[SweepRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(csv_header(spec))
    for row in rows:
        params = [row.params[n] for n in spec.param_names]
        writer.writerow(
            [_fmt(v) for v in (row.preset, row.family, *params, row.b_max, row.bound, row.violated, *row.angles)]
            + [_fmt(row.evaluations)]
        )


def _open_for_writing(path):
    path = Path(path)
    try:
        return path.open("w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write sweep output to {path}: {exc.strerror or exc}") from exc


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Optimize every grid point; rows come back in grid order whatever ``jobs`` is.

    When ``spec.output_path`` is set the CSV is written there (and the full
    results to ``spec.json_path`` if given). Output files are opened before
    any work starts so an unwritable path fails fast.
    """
    csv_file = _open_for_writing(spec.output_path) if spec.output_path else None
    json_file = _open_for_writing(spec.json_path) if spec.json_path else None
    try:
        tasks = [(spec.preset, fam, params, spec.optimizer) for fam, params in spec.points()]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_run_point, tasks))
        else:
            rows = [_run_point(t) for t in tasks]
        if csv_file:
            write_csv(spec, rows, csv_file)
        if json_file:
            payload = [{"family": r.family, "params": r.params, **r.result} for r in rows]
            json.dump({"preset": spec.preset, "rows": payload}, json_file, indent=2)
    finally:
        for f in (csv_file, json_file):
            if f:
                f.close()
    return rows


def rows_to_csv(spec: SweepSpec, rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(spec, rows, buf)
    return buf.getvalue()
