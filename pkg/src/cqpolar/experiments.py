"""Batch experiments: configs, grid evaluation and CSV output.

A run is described by one JSON file that maps onto ``ExperimentConfig``.
Each grid point becomes one CSV row; a ``.json`` sidecar next to the CSV
records the full config, tolerances and package version.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .polar import SUPPORTED_LENGTHS, PolarCode, default_code
from .qsim.circuits import DECOUPLING_MODES, NoiseConfig, noisy_pipeline_channel
from .qsim.density import PAULI_MODELS
from .rates import RatePoint, dolinar_pie, holevo_pie, optimize_alpha, rate_point
from .scdecoder import effective_channel

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "CSV_HEADER",
    "ERROR_MODELS",
    "load_config",
    "make_code",
    "noise_for",
    "channel_for",
    "evaluate_point",
    "run_sweep",
    "rows_to_csv",
    "package_version",
]

ERROR_MODELS = ("none", "transducer", "gate")
CHANNEL_PATHS = ("auto", "povm", "circuit")
MULTIPHOTON_POLICIES = ("uniform", "ignore")

CSV_HEADER = (
    "nbar",
    "alpha",
    "I_bits",
    "pie",
    "baseline_dolinar_pie",
    "baseline_holevo_pie",
    "config_id",
    "error_model",
    "error_p",
    "optimal_input",
)


class ConfigError(ValueError):
    """Invalid experiment config; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep.

    Exactly one of ``nbar`` and ``alpha`` gives the signal grid. With
    ``optimize_alpha`` the grid is the starting scan for a per-error-point
    maximization of PIE over alpha, and each error value yields one row.
    """

    config_id: str = "run"
    n_bins: int = 4
    k_info: int | None = None
    frozen: tuple | None = None
    nbar: tuple | None = None
    alpha: tuple | None = None
    optimize_alpha: bool = False
    error_model: str = "none"
    error_p: tuple = (0.0,)
    pauli_model: str = "independent"
    decoupling: str = "correct"
    noisy_stages: tuple = ("compression", "decoding")
    channel_path: str = "auto"
    multiphoton: str = "uniform"
    ba_tol: float = 1e-10
    alpha_refine_tol: float = 1e-3
    seed: int = 0
    out: str = "results.csv"
    workers: int = 1

    def __post_init__(self):
        for name in ("frozen", "nbar", "alpha", "error_p", "noisy_stages"):
            val = getattr(self, name)
            if val is not None and not isinstance(val, tuple):
                if isinstance(val, (str, bytes)) or not hasattr(val, "__iter__"):
                    val = (val,)
                object.__setattr__(self, name, tuple(val))
        self.validate()

    def validate(self) -> None:
        if self.n_bins not in SUPPORTED_LENGTHS:
            raise ConfigError("n_bins", f"must be one of {SUPPORTED_LENGTHS}, got {self.n_bins}")
        if self.frozen is not None or self.k_info is not None:
            try:
                self.code()
            except (ValueError, TypeError) as exc:
                raise ConfigError("frozen", str(exc)) from None
        if (self.nbar is None) == (self.alpha is None):
            raise ConfigError("nbar", "give exactly one of 'nbar' and 'alpha'")
        grid_name = "nbar" if self.nbar is not None else "alpha"
        grid = self.nbar if self.nbar is not None else self.alpha
        if len(grid) == 0:
            raise ConfigError(grid_name, "grid is empty")
        if any(not _positive_number(v) for v in grid):
            raise ConfigError(grid_name, "grid values must be positive numbers")
        if self.error_model not in ERROR_MODELS:
            raise ConfigError("error_model", f"must be one of {ERROR_MODELS}, got {self.error_model!r}")
        if len(self.error_p) == 0:
            raise ConfigError("error_p", "grid is empty")
        upper = 1.0 if self.error_model == "transducer" else 1.0 - 1e-12
        if any(not isinstance(p, (int, float)) or not 0.0 <= p <= upper for p in self.error_p):
            raise ConfigError("error_p", "values must lie in [0, 1)")
        if self.pauli_model not in PAULI_MODELS:
            raise ConfigError("pauli_model", f"must be one of {PAULI_MODELS}, got {self.pauli_model!r}")
        if self.decoupling not in DECOUPLING_MODES:
            raise ConfigError("decoupling", f"must be one of {DECOUPLING_MODES}, got {self.decoupling!r}")
        if set(self.noisy_stages) - {"compression", "decoding"}:
            raise ConfigError("noisy_stages", "entries must be 'compression' or 'decoding'")
        if self.channel_path not in CHANNEL_PATHS:
            raise ConfigError("channel_path", f"must be one of {CHANNEL_PATHS}, got {self.channel_path!r}")
        if self.channel_path == "povm" and self.error_model != "none" and any(p > 0 for p in self.error_p):
            raise ConfigError("channel_path", "the POVM path has no noise model; use 'circuit' or 'auto'")
        if self.channel_path != "povm" and self.error_model != "none" and self.n_bins == 2:
            raise ConfigError("n_bins", "the circuit path supports N=4 and N=8 only")
        if self.multiphoton not in MULTIPHOTON_POLICIES:
            raise ConfigError("multiphoton", f"must be one of {MULTIPHOTON_POLICIES}, got {self.multiphoton!r}")
        if not _positive_number(self.ba_tol):
            raise ConfigError("ba_tol", "must be positive")
        if not _positive_number(self.alpha_refine_tol):
            raise ConfigError("alpha_refine_tol", "must be positive")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", "must be a positive integer")

    def code(self) -> PolarCode:
        return make_code(self.n_bins, self.k_info, self.frozen)

    @property
    def alphas(self) -> list[float]:
        if self.alpha is not None:
            return [float(a) for a in self.alpha]
        return [math.sqrt(float(n)) for n in self.nbar]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in doc.items()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown config field")
        return cls(**doc)


def _positive_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v > 0


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be a JSON object")
    doc.update(overrides or {})
    return ExperimentConfig.from_dict(doc)


def make_code(n_bins: int, k_info: int | None = None, frozen: Sequence[int] | None = None) -> PolarCode:
    if frozen is None and k_info is None:
        return default_code(n_bins)
    if frozen is None:
        raise ValueError("give the frozen positions along with k_info")
    k = n_bins - len(frozen) if k_info is None else k_info
    return PolarCode(n_bins, k, frozenset(frozen))


def noise_for(config: ExperimentConfig, p: float) -> NoiseConfig:
    stages = set(config.noisy_stages)
    common = dict(
        model=config.pauli_model,
        compression="compression" in stages,
        decoding="decoding" in stages,
        decoupling=config.decoupling,
    )
    if config.error_model == "transducer":
        return NoiseConfig(transducer_p=p, **common)
    if config.error_model == "gate":
        return NoiseConfig(gate_p=p, **common)
    return NoiseConfig(**common)


def _uses_circuit(config: ExperimentConfig) -> bool:
    if config.channel_path == "auto":
        return config.error_model != "none"
    return config.channel_path == "circuit"


def channel_for(config: ExperimentConfig, p: float, alpha: float):
    code = config.code()
    if _uses_circuit(config):
        return noisy_pipeline_channel(code, alpha, noise_for(config, p), multiphoton_policy=config.multiphoton)
    return effective_channel(code, alpha, multiphoton_policy=config.multiphoton)


def _error_dict(config: ExperimentConfig, p: float) -> dict:
    return {"error_model": config.error_model, "error_p": p, "pauli_model": config.pauli_model}


def evaluate_point(config: ExperimentConfig, p: float, alpha: float | None = None,
                   nbar: float | None = None) -> RatePoint:
    """Rate at one grid point; ``alpha=None`` maximizes over the alpha grid.

    ``nbar`` is recorded as given instead of recomputed from alpha.
    """
    err = _error_dict(config, p)
    if alpha is not None:
        return rate_point(channel_for(config, p, alpha), config.n_bins, alpha, err, config.ba_tol, nbar)
    _, point = optimize_alpha(
        lambda a: channel_for(config, p, a),
        config.n_bins,
        config.alphas,
        refine_tol=config.alpha_refine_tol,
        error_config=err,
        tol=config.ba_tol,
    )
    return point


def _task(args) -> RatePoint:
    return evaluate_point(*args)


def grid_tasks(config: ExperimentConfig) -> list[tuple]:
    if config.optimize_alpha:
        return [(config, float(p), None, None) for p in config.error_p]
    signal = config.nbar if config.nbar is not None else [None] * len(config.alphas)
    return [
        (config, float(p), a, None if n is None else float(n))
        for p in config.error_p
        for a, n in zip(config.alphas, signal)
    ]


def _fmt(x: float) -> str:
    return repr(float(x))


def point_row(config: ExperimentConfig, point: RatePoint) -> list[str]:
    return [
        _fmt(point.nbar),
        _fmt(point.alpha),
        _fmt(point.mutual_information_bits),
        _fmt(point.pie),
        _fmt(dolinar_pie(point.nbar)),
        _fmt(holevo_pie(point.nbar)),
        config.config_id,
        config.error_model,
        _fmt(point.error_config.get("error_p", 0.0)),
        json.dumps({k: round(v, 12) for k, v in point.optimal_input.as_dict().items()}, sort_keys=True),
    ]


def rows_to_csv(config: ExperimentConfig, points: Sequence[RatePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for pt in points:
        writer.writerow(point_row(config, pt))
    return buf.getvalue()


def run_points(config: ExperimentConfig, workers: int | None = None) -> list[RatePoint]:
    """Evaluate the grid; results come back in grid order."""
    tasks = grid_tasks(config)
    workers = config.workers if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_task, tasks))


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def run_sweep(config: ExperimentConfig, out: str | Path | None = None, workers: int | None = None) -> Path:
    """Write the CSV and its ``.json`` metadata sidecar; return the CSV path."""
    out = Path(out or config.out)
    started = time.time()
    points = run_points(config, workers)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(rows_to_csv(config, points))
    meta = {
        "config": config.to_dict(),
        "tolerances": {"blahut_arimoto": config.ba_tol, "alpha_refine_log": config.alpha_refine_tol},
        "channel_path": "circuit" if _uses_circuit(config) else "povm",
        "rows": len(points),
        "version": package_version(),
        "numpy": np.__version__,
        "elapsed_s": round(time.time() - started, 3),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    out.with_suffix(out.suffix + ".json").write_text(json.dumps(meta, indent=2) + "\n")
    return out
