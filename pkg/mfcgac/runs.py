"""Run directory layout and file I/O.

A run directory holds::

    config.json            TrainConfig used for the run
    manifest.json          provenance (seed, code version, timestamps, divergence)
    metrics.csv            one row per outer step
    timings.csv            wall-clock seconds per step
    checkpoints/step_<n>.json
    particles_global.csv, particles_local.csv
    eval.csv               written by ``mfcgac eval``

All CSV files use a comma delimiter, a header row and 17 significant digits.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ValidationError

from mfcgac.exceptions import ConfigError, RunIOError
from mfcgac.models import LqParams, MetricsRecord, RunManifest, TrainConfig, TrainingCheckpoint
from mfcgac.score import EmpiricalMeasure, read_particles_csv, write_particles_csv

logger = logging.getLogger(__name__)

Population = Literal["global", "local"]

_CHECKPOINT_RE = re.compile(r"^step_(\d+)\.json$")
METRICS_COLUMNS = list(MetricsRecord.model_fields)
EVAL_COLUMNS = ["x", "value_learned", "value_analytical", "control_learned", "control_analytical"]


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _read_text(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as e:
        raise RunIOError(f"cannot read {path}: {e}", path=path) from e


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as e:
        raise RunIOError(f"cannot write {path}: {e}", path=path) from e


def _validate_json(model: type[BaseModel], text: str, source: Path | str) -> Any:
    try:
        return model.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(
            f"invalid {model.__name__} in {source}: {e.error_count()} error(s)",
            errors=[dict(err) for err in e.errors()],
        ) from e


def load_train_config(path: Path) -> TrainConfig:
    """Read and validate a TrainConfig JSON file.

    Raises:
        RunIOError: If the file cannot be read
        ConfigError: If it does not validate
    """
    cfg: TrainConfig = _validate_json(TrainConfig, _read_text(path), path)
    return cfg


def load_lq_params(path: Path) -> LqParams:
    """Read LQ coefficients from a bare LqParams JSON or from a TrainConfig's ``lq`` key."""
    text = _read_text(path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if isinstance(raw, dict) and ("lq" in raw or "algorithm" in raw):
        return load_train_config(path).lq
    params: LqParams = _validate_json(LqParams, text, path)
    return params


class RunDirectory:
    """Typed access to the files of one training run.

    Args:
        path: Directory of the run

    Example:
        >>> run = RunDirectory.create(Path("runs/batch-0"), TrainConfig(steps=100))
        >>> run.read_config().steps
        100
    """

    def __init__(self, path: Path) -> None:
        """Wrap an existing or future run directory."""
        self.path = Path(path)

    @classmethod
    def create(cls, path: Path, cfg: TrainConfig) -> RunDirectory:
        """Create the directory tree and write ``config.json``."""
        run = cls(path)
        try:
            run.checkpoints_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise RunIOError(f"cannot create run directory {path}: {e}", path=Path(path)) from e
        run.write_config(cfg)
        return run

    @classmethod
    def open(cls, path: Path) -> RunDirectory:
        run = cls(path)
        if not run.config_path.is_file():
            raise RunIOError(f"{path} is not a run directory (no config.json)", path=Path(path))
        return run

    @property
    def config_path(self) -> Path:
        return self.path / "config.json"

    @property
    def manifest_path(self) -> Path:
        return self.path / "manifest.json"

    @property
    def metrics_path(self) -> Path:
        return self.path / "metrics.csv"

    @property
    def timings_path(self) -> Path:
        return self.path / "timings.csv"

    @property
    def eval_path(self) -> Path:
        return self.path / "eval.csv"

    @property
    def checkpoints_dir(self) -> Path:
        return self.path / "checkpoints"

    def particles_path(self, population: Population) -> Path:
        return self.path / f"particles_{population}.csv"

    # -- config / manifest

    def write_config(self, cfg: TrainConfig) -> None:
        _write_text(self.config_path, cfg.model_dump_json(indent=2))

    def read_config(self) -> TrainConfig:
        return load_train_config(self.config_path)

    def write_manifest(self, manifest: RunManifest) -> None:
        _write_text(self.manifest_path, manifest.model_dump_json(indent=2))

    def read_manifest(self) -> RunManifest:
        manifest: RunManifest = _validate_json(
            RunManifest, _read_text(self.manifest_path), self.manifest_path
        )
        return manifest

    # -- CSV tables

    def write_metrics(self, records: Iterable[MetricsRecord]) -> None:
        write_csv(self.metrics_path, METRICS_COLUMNS, (r.model_dump() for r in records))

    def read_metrics(self) -> list[MetricsRecord]:
        rows = read_csv(self.metrics_path)
        try:
            return [MetricsRecord.model_validate(row) for row in rows]
        except ValidationError as e:
            raise RunIOError(f"malformed metrics in {self.metrics_path}", path=self.metrics_path) from e

    def write_timings(self, seconds: Sequence[float], start_step: int = 0) -> None:
        write_csv(
            self.timings_path,
            ["step", "seconds"],
            ({"step": start_step + i, "seconds": s} for i, s in enumerate(seconds)),
        )

    def write_eval(self, rows: Iterable[dict[str, float]], path: Path | None = None) -> Path:
        """Write plot-ready evaluation rows (default: the run's eval.csv)."""
        target = path if path is not None else self.eval_path
        write_csv(target, EVAL_COLUMNS, rows)
        return target

    def write_particles(self, population: Population, meas: EmpiricalMeasure) -> None:
        write_particles_csv(meas, self.particles_path(population))

    def read_particles(self, population: Population) -> EmpiricalMeasure:
        return read_particles_csv(self.particles_path(population))

    # -- checkpoints

    def write_checkpoint(self, ckpt: TrainingCheckpoint) -> Path:
        path = self.checkpoints_dir / f"step_{ckpt.step}.json"
        _write_text(path, ckpt.model_dump_json())
        logger.debug("Wrote checkpoint %s", path)
        return path

    def checkpoint_paths(self) -> list[Path]:
        """Checkpoint files ordered by step."""
        if not self.checkpoints_dir.is_dir():
            return []
        found = []
        for p in self.checkpoints_dir.iterdir():
            match = _CHECKPOINT_RE.match(p.name)
            if match:
                found.append((int(match.group(1)), p))
        return [p for _, p in sorted(found)]

    def latest_checkpoint(self) -> Path | None:
        paths = self.checkpoint_paths()
        return paths[-1] if paths else None

    def read_checkpoint(self, path: Path | None = None) -> TrainingCheckpoint:
        """Read ``path`` or, by default, the newest checkpoint.

        Raises:
            RunIOError: If there is no checkpoint or it does not parse
        """
        if path is None:
            path = self.latest_checkpoint()
            if path is None:
                raise RunIOError(f"no checkpoints in {self.checkpoints_dir}", path=self.checkpoints_dir)
        try:
            return TrainingCheckpoint.model_validate_json(_read_text(path))
        except ValidationError as e:
            raise RunIOError(f"malformed checkpoint {path}", path=path) from e


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict[str, Any]]) -> None:
    """Write dict rows under a fixed header; floats use 17 significant digits."""
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in columns])
    except OSError as e:
        raise RunIOError(f"cannot write {path}: {e}", path=path) from e


def read_csv(path: Path) -> list[dict[str, str]]:
    try:
        with path.open(newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as e:
        raise RunIOError(f"cannot read {path}: {e}", path=path) from e
