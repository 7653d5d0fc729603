"""Factor-grid expansion and batch stimulus generation.

A grid is the cartesian product of sources, positives, approaches and
mixture-level increments. Generation solves the positive gain per cell,
renders the mixture, writes one WAV per cell and a manifest CSV that is
the single source of truth for every downstream consumer.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

from . import audio
from .audio import DEFAULT_CAL_OFFSET_DB, AudioBuffer
from .concealer import Approach, render_mixture
from .leveling import (
    GainGrid,
    LevelTarget,
    MixtureLevelEvaluator,
    UnsatisfiableGainError,
    solve_positive_gain,
)
from .tf import StftParams

MANIFEST_NAME = "manifest.csv"
MANIFEST_META_NAME = "manifest.meta.json"
MANIFEST_VERSION = 1

MANIFEST_COLUMNS = [
    "id",
    "source_id",
    "positive_id",
    "approach",
    "delta_laeq",
    "resolved_gain",
    "positive_level_dba",
    "achieved_level_dba",
    "target_level_dba",
    "status",
    "error",
    "file",
    "sha256",
]


def _fmt_delta(value: float) -> str:
    return f"{value:g}"


@dataclass(frozen=True)
class FactorGrid:
    sources: tuple[str, ...]
    positives: tuple[str, ...]
    approaches: tuple[Approach, ...]
    delta_laeqs: tuple[float, ...]

    def __post_init__(self) -> None:
        for name in ("sources", "positives", "approaches", "delta_laeqs"):
            if not getattr(self, name):
                raise ValueError(f"factor list {name!r} is empty")
        object.__setattr__(
            self, "approaches", tuple(Approach(a) for a in self.approaches)
        )
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "positives", tuple(self.positives))
        object.__setattr__(self, "delta_laeqs", tuple(float(d) for d in self.delta_laeqs))

    @property
    def cardinality(self) -> int:
        return (
            len(self.sources)
            * len(self.positives)
            * len(self.approaches)
            * len(self.delta_laeqs)
        )

    @classmethod
    def default_experiment(cls) -> "FactorGrid":
        return cls(
            sources=("ventil1", "ventil2"),
            positives=("fountain", "rain", "stream", "waterfall", "waves"),
            approaches=(Approach.MASKER, Approach.CONCEALER_3),
            delta_laeqs=(0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
        )


@dataclass
class StimulusSpec:
    """One grid cell; gain and level fields are filled at generation."""

    source_id: str
    positive_id: str
    approach: Approach
    delta_laeq: float
    resolved_gain: float | None = None
    positive_level_dba: float | None = None
    achieved_level_dba: float | None = None
    target_level_dba: float | None = None
    status: str = "pending"
    error: str = ""

    @property
    def id(self) -> str:
        return (
            f"approach={self.approach.value}"
            f"+delta_laeq={_fmt_delta(self.delta_laeq)}"
            f"+source={self.source_id}_{self.positive_id}"
        )

    @property
    def filename(self) -> str:
        return f"{self.id}_stimulus.wav"


def expand(grid: FactorGrid) -> list[StimulusSpec]:
    """Full cartesian product in deterministic sources-major order."""
    return [
        StimulusSpec(s, p, a, d)
        for s, p, a, d in product(
            grid.sources, grid.positives, grid.approaches, grid.delta_laeqs
        )
    ]


@dataclass
class GenConfig:
    """Generation settings; everything the run needs beyond the audio."""

    grid: FactorGrid
    source_level_dba: float = 65.0
    tolerance_db: float = 0.1
    gain_grid: GainGrid = field(default_factory=GainGrid)
    stft: StftParams = field(default_factory=StftParams)
    cal_offset_db: float = DEFAULT_CAL_OFFSET_DB
    sample_format: str = "float32"

    @classmethod
    def from_json(cls, path) -> "GenConfig":
        raw = json.loads(Path(path).read_text())
        grid = FactorGrid(
            sources=tuple(raw["sources"]),
            positives=tuple(raw["positives"]),
            approaches=tuple(raw["approaches"]),
            delta_laeqs=tuple(raw["delta_laeqs"]),
        )
        kwargs = {}
        if "gain_grid" in raw:
            kwargs["gain_grid"] = GainGrid(**raw["gain_grid"])
        if "stft" in raw:
            kwargs["stft"] = StftParams(**raw["stft"])
        for key in ("source_level_dba", "tolerance_db", "cal_offset_db", "sample_format"):
            if key in raw:
                kwargs[key] = raw[key]
        return cls(grid=grid, **kwargs)

    def to_dict(self) -> dict:
        return {
            "sources": list(self.grid.sources),
            "positives": list(self.grid.positives),
            "approaches": [a.value for a in self.grid.approaches],
            "delta_laeqs": list(self.grid.delta_laeqs),
            "source_level_dba": self.source_level_dba,
            "tolerance_db": self.tolerance_db,
            "gain_grid": {
                "min_gain_db": self.gain_grid.min_gain_db,
                "max_gain_db": self.gain_grid.max_gain_db,
                "step_db": self.gain_grid.step_db,
            },
            "stft": self.stft.to_dict(),
            "cal_offset_db": self.cal_offset_db,
            "sample_format": self.sample_format,
        }


@dataclass
class GenerationResult:
    manifest_path: Path
    rows: list[dict]
    generated: int
    skipped: int
    failed: int


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def read_manifest(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_manifest(rows: list[dict], path: Path) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in MANIFEST_COLUMNS})
    os.replace(tmp, path)


def _spec_row(spec: StimulusSpec, filename: str, sha: str) -> dict:
    def fmt(x):
        return "" if x is None else f"{x:.8g}"

    return {
        "id": spec.id,
        "source_id": spec.source_id,
        "positive_id": spec.positive_id,
        "approach": spec.approach.value,
        "delta_laeq": _fmt_delta(spec.delta_laeq),
        "resolved_gain": fmt(spec.resolved_gain),
        "positive_level_dba": fmt(spec.positive_level_dba),
        "achieved_level_dba": fmt(spec.achieved_level_dba),
        "target_level_dba": fmt(spec.target_level_dba),
        "status": spec.status,
        "error": spec.error,
        "file": filename,
        "sha256": sha,
    }


class _AudioCache:
    """Loads each referenced WAV once; remembers failures too."""

    def __init__(self, audio_dir: Path):
        self.audio_dir = Path(audio_dir)
        self._cache: dict[str, AudioBuffer | Exception] = {}

    def get(self, sound_id: str) -> AudioBuffer:
        if sound_id not in self._cache:
            try:
                self._cache[sound_id] = audio.load_wav(self.audio_dir / f"{sound_id}.wav")
            except (OSError, ValueError) as exc:
                self._cache[sound_id] = exc
        value = self._cache[sound_id]
        if isinstance(value, Exception):
            raise value
        return value


def generate_all(config: GenConfig, audio_dir, out_dir) -> GenerationResult:
    """Generate every stimulus of the grid into ``out_dir``.

    Idempotent: cells whose output file still matches the hash recorded
    in an existing manifest are skipped. Cells that fail (missing input,
    unsatisfiable level target) are recorded in the manifest and do not
    stop the run. The manifest is written once, atomically, at the end.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / MANIFEST_NAME
    previous: dict[str, dict] = {}
    if manifest_path.exists():
        previous = {row["id"]: row for row in read_manifest(manifest_path)}

    cache = _AudioCache(audio_dir)
    normalized: dict[str, AudioBuffer | Exception] = {}
    evaluators: dict[tuple, MixtureLevelEvaluator] = {}

    def source_at_level(source_id: str) -> AudioBuffer:
        if source_id not in normalized:
            try:
                normalized[source_id] = audio.normalize_to_level(
                    cache.get(source_id), config.source_level_dba, config.cal_offset_db
                )
            except (OSError, ValueError) as exc:
                normalized[source_id] = exc
        value = normalized[source_id]
        if isinstance(value, Exception):
            raise value
        return value

    rows: list[dict] = []
    generated = skipped = failed = 0
    for spec in expand(config.grid):
        out_path = out_dir / spec.filename
        prev = previous.get(spec.id)
        if (
            prev is not None
            and prev.get("status") == "ok"
            and out_path.exists()
            and _sha256(out_path) == prev.get("sha256")
        ):
            rows.append(prev)
            skipped += 1
            continue
        try:
            source = source_at_level(spec.source_id)
            positive = cache.get(spec.positive_id)
            key = (spec.source_id, spec.positive_id, spec.approach)
            if key not in evaluators:
                evaluators[key] = MixtureLevelEvaluator(
                    source, positive, spec.approach, config.stft, config.cal_offset_db
                )
            target = LevelTarget(
                source_level_dba=config.source_level_dba,
                delta_laeq_db=spec.delta_laeq,
                tolerance_db=config.tolerance_db,
            )
            solution = solve_positive_gain(
                source,
                positive,
                spec.approach,
                target,
                grid=config.gain_grid,
                params=config.stft,
                cal_offset_db=config.cal_offset_db,
                evaluator=evaluators[key],
            )
            mixture = render_mixture(
                source, positive, spec.approach, solution.gain, config.stft
            )
            audio.save_wav(mixture, out_path, config.sample_format)
            spec.resolved_gain = solution.gain
            spec.positive_level_dba = solution.positive_level_dba
            spec.achieved_level_dba = solution.achieved_level_dba
            spec.target_level_dba = solution.target_level_dba
            spec.status = "ok"
            rows.append(_spec_row(spec, spec.filename, _sha256(out_path)))
            generated += 1
        except (OSError, ValueError, UnsatisfiableGainError) as exc:
            spec.status = (
                "unsatisfiable" if isinstance(exc, UnsatisfiableGainError) else "error"
            )
            spec.error = str(exc)
            spec.target_level_dba = config.source_level_dba + spec.delta_laeq
            rows.append(_spec_row(spec, "", ""))
            failed += 1

    write_manifest(rows, manifest_path)
    meta = {"manifest_version": MANIFEST_VERSION, "config": config.to_dict()}
    (out_dir / MANIFEST_META_NAME).write_text(json.dumps(meta, indent=2) + "\n")
    return GenerationResult(manifest_path, rows, generated, skipped, failed)
