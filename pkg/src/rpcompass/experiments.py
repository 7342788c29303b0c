"""Angular yield profiles, compass sensitivity and parameter sweeps.

Every observable here comes from the closed-form yield. Sweep results carry
their axes in order and are written as CSV with a JSON metadata sidecar.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .config import HyperfineTensor, RadicalPairConfig, config_to_dict, fad_trp_config
from .coherence import CoherenceOptions, coherence_trace
from .yields import singlet_yield_closed, worker_count

N1_AXIAL_MT = 1.0812
DEFAULT_N_THETA = 91
# 0 to 0.17 mT in 0.01 mT steps
DEFAULT_TRANSVERSE_MT = tuple(i / 100 for i in range(18))
DEFAULT_2D_AZ_MT = tuple(i / 10 for i in range(31))
DEFAULT_2D_TRANSVERSE_MT = tuple(i / 100 for i in range(41))
REDUCED_2D_AZ_MT = tuple(i / 4 for i in range(13))
REDUCED_2D_TRANSVERSE_MT = tuple(i / 50 for i in range(21))
DEFAULT_RATES = (1e4, 1e5, 1e6)
NEEDLE_TENSOR = HyperfineTensor(0.08, 0.08, 1.0812)
ANGLE_SERIES_THETAS = tuple(i * math.pi / 8 for i in range(5))


@dataclass(frozen=True)
class AngleGrid:
    thetas: tuple[float, ...] = tuple(np.linspace(0.0, math.pi / 2, DEFAULT_N_THETA).tolist())
    phi: float = 0.0

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float)
        object.__setattr__(self, "thetas", tuple(th.tolist()))
        if th.ndim != 1 or th.size == 0:
            raise ValueError("angle grid needs at least one theta")
        if np.any(np.diff(th) <= 0):
            raise ValueError("thetas must be strictly increasing")
        if th[0] < 0 or th[-1] > math.pi:
            raise ValueError("thetas must lie within [0, pi]")

    @classmethod
    def uniform(cls, n: int = DEFAULT_N_THETA, stop: float = math.pi / 2, phi: float = 0.0) -> AngleGrid:
        return cls(tuple(np.linspace(0.0, stop, n).tolist()), phi)

    def spec(self) -> dict:
        th = self.thetas
        return {"n_theta": len(th), "theta_min_rad": th[0], "theta_max_rad": th[-1], "phi_rad": self.phi}


@dataclass
class SweepResult:
    observable: str
    axes: dict[str, np.ndarray]
    values: np.ndarray
    config_digest: str
    fixed: dict[str, float] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axes = {k: np.asarray(v, dtype=float) for k, v in self.axes.items()}
        self.values = np.asarray(self.values, dtype=float)
        shape = tuple(len(v) for v in self.axes.values())
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match axes {shape}")

    @property
    def columns(self) -> list[str]:
        return list(self.axes) + list(self.fixed) + [self.observable]

    def rows(self) -> Iterable[tuple[float, ...]]:
        fixed = tuple(self.fixed.values())
        for idx in product(*(range(len(a)) for a in self.axes.values())):
            coords = tuple(a[i] for a, i in zip(self.axes.values(), idx))
            yield coords + fixed + (self.values[idx],)

    def sensitivity(self) -> SweepResult:
        """Max minus min of the profile along the last (theta) axis."""
        names = list(self.axes)
        return SweepResult(
            "sensitivity",
            {k: self.axes[k] for k in names[:-1]},
            self.values.max(axis=-1) - self.values.min(axis=-1),
            self.config_digest,
            dict(self.fixed),
            dict(self.metadata),
        )


def _map(fn: Callable, items: Sequence, workers: int | None = None) -> list:
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _yield_at(config: RadicalPairConfig, theta: float, phi: float) -> float:
    return singlet_yield_closed(config.with_field(theta=theta, phi=phi)).value


def yield_profile(config: RadicalPairConfig, grid: AngleGrid | None = None, workers: int | None = None) -> SweepResult:
    grid = grid or AngleGrid()
    values = _map(lambda th: _yield_at(config, th, grid.phi), grid.thetas, workers)
    return SweepResult(
        "singlet_yield",
        {"theta_rad": grid.thetas},
        values,
        config.digest(),
        {"phi_rad": grid.phi},
        {"grid": grid.spec()},
    )


def sensitivity(config: RadicalPairConfig, grid: AngleGrid | None = None, workers: int | None = None) -> float:
    """Max minus min of the singlet yield over the inclination grid."""
    v = yield_profile(config, grid, workers).values
    return float(v.max() - v.min())


def delta_yield_0_90(config: RadicalPairConfig) -> float:
    """Yield at theta = 0 minus yield at theta = pi/2 (signed)."""
    phi = config.field.phi
    return _yield_at(config, 0.0, phi) - _yield_at(config, math.pi / 2, phi)


def equal_tensor_system(tensor: HyperfineTensor, base: RadicalPairConfig | None = None) -> RadicalPairConfig:
    """``base`` (default: the 3-3 FAD/Trp nuclei) with every tensor set to ``tensor``."""
    base = base or fad_trp_config(3)
    return base.with_all_tensors(tensor)


def sweep_transverse(base: RadicalPairConfig, ax_values: Sequence[float] = DEFAULT_TRANSVERSE_MT,
                     az: float = N1_AXIAL_MT, grid: AngleGrid | None = None, workers: int | None = None) -> SweepResult:
    """Yield profiles with ax = ay = a and fixed az on every nucleus.

    Axes are (a_transverse_mT, theta_rad); ``.sensitivity()`` gives the
    per-a compass sensitivity.
    """
    grid = grid or AngleGrid()
    cells = list(product(ax_values, grid.thetas))

    def cell(item):
        a, th = item
        return _yield_at(base.with_all_tensors(HyperfineTensor(a, a, az)), th, grid.phi)

    values = np.array(_map(cell, cells, workers)).reshape(len(ax_values), len(grid.thetas))
    return SweepResult(
        "singlet_yield",
        {"a_transverse_mT": ax_values, "theta_rad": grid.thetas},
        values,
        base.digest(),
        {"phi_rad": grid.phi},
        {"grid": grid.spec(), "a_z_mT": az, "transverse_grid_mT": list(ax_values)},
    )


def sweep_2d(base: RadicalPairConfig, az_values: Sequence[float] = DEFAULT_2D_AZ_MT,
             transverse_values: Sequence[float] = DEFAULT_2D_TRANSVERSE_MT, workers: int | None = None) -> SweepResult:
    """delta_yield_0_90 over (a_transverse, a_z) with one tensor shared by all nuclei."""
    cells = list(product(transverse_values, az_values))

    def cell(item):
        a, z = item
        return delta_yield_0_90(base.with_all_tensors(HyperfineTensor(a, a, z)))

    values = np.array(_map(cell, cells, workers)).reshape(len(transverse_values), len(az_values))
    return SweepResult(
        "delta_yield_0_90",
        {"a_transverse_mT": transverse_values, "a_z_mT": az_values},
        values,
        base.digest(),
        {},
        {"k_per_s": base.rates.ks},
    )


def sweep_rates(config: RadicalPairConfig, k_values: Sequence[float] = DEFAULT_RATES, grid: AngleGrid | None = None,
                workers: int | None = None) -> SweepResult:
    """Yield profiles for each equal recombination rate k; axes (k_per_s, theta_rad)."""
    grid = grid or AngleGrid()
    cells = list(product(k_values, grid.thetas))
    values = np.array(_map(lambda it: _yield_at(config.with_rate(it[0]), it[1], grid.phi), cells, workers))
    return SweepResult(
        "singlet_yield",
        {"k_per_s": k_values, "theta_rad": grid.thetas},
        values.reshape(len(k_values), len(grid.thetas)),
        config.digest(),
        {"phi_rad": grid.phi},
        {"grid": grid.spec()},
    )


def coherence_vs_angle(config: RadicalPairConfig, times: Sequence[float], thetas: Sequence[float] = ANGLE_SERIES_THETAS,
                       options: CoherenceOptions | None = None, workers: int | None = None) -> SweepResult:
    """Coherence traces at several field inclinations; axes (theta_rad, time_s)."""
    options = options or CoherenceOptions()
    series = _map(lambda th: coherence_trace(config.with_field(theta=th), times, options).values, list(thetas), workers)
    return SweepResult(
        "coherence",
        {"theta_rad": thetas, "time_s": times},
        np.array(series),
        config.digest(),
        {"phi_rad": config.field.phi},
        {"coherence_options": options.as_dict(), "thetas_rad": list(thetas)},
    )


# --- output ----------------------------------------------------------------


def format_value(x: float) -> str:
    return f"{x:.12g}"


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(format_value(float(v)) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(columns, rows))
    return path


def metadata_path(csv_path: Path) -> Path:
    return Path(csv_path).with_suffix(".meta.json")


def write_metadata(csv_path: Path, config: RadicalPairConfig, columns: Sequence[str], spin_mapping: str,
                   extra: dict | None = None, stamp: str | None = None) -> Path:
    meta = {
        "data_file": Path(csv_path).name,
        "columns": list(columns),
        "config": config_to_dict(config),
        "config_digest": config.digest(),
        "software_version": __version__,
        "spin_mapping": spin_mapping,
    }
    meta.update(extra or {})
    if stamp:
        meta["created"] = stamp
    path = metadata_path(csv_path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def write_sweep(result: SweepResult, csv_path: Path, config: RadicalPairConfig, spin_mapping: str,
                stamp: str | None = None) -> list[Path]:
    data = write_csv(csv_path, result.columns, result.rows())
    extra = {"observable": result.observable, **result.metadata}
    meta = write_metadata(data, config, result.columns, spin_mapping, extra, stamp)
    return [data, meta]
