"""Command-line entry points.

Batch work (stimulus generation, analysis) runs locally on files; the
experiment itself is served over HTTP, and `simulate` acts as a thin
scripted client against a running server.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import click

from . import analysis, bwsscore, gengrid, leveling, surrogates
from .audio import load_wav
from .concealer import Approach


@click.group()
def main() -> None:
    """Masking-mixture synthesis and best-worst-scaling experiments."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--audio-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def genstimuli(config_path: str, audio_dir: str, out_dir: str) -> None:
    """Expand the factor grid and generate every stimulus WAV."""
    config = gengrid.GenConfig.from_json(config_path)
    result = gengrid.generate_all(config, audio_dir, out_dir)
    click.echo(
        f"manifest: {result.manifest_path} "
        f"(generated={result.generated} skipped={result.skipped} failed={result.failed})"
    )
    if result.failed:
        sys.exit(1)


@main.command("demo-audio")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", default=1234, show_default=True)
@click.option("--duration", default=10.0, show_default=True, help="seconds per file")
def demo_audio(out_dir: str, seed: int, duration: float) -> None:
    """Write the synthetic demo corpus (2 sources + 5 positives)."""
    paths = surrogates.make_demo_corpus(out_dir, seed=seed, duration_s=duration)
    for name, path in sorted(paths.items()):
        click.echo(f"{name}: {path}")


@main.command("level-curve")
@click.option("--source", "source_path", required=True, type=click.Path(exists=True))
@click.option("--positive", "positive_path", required=True, type=click.Path(exists=True))
@click.option(
    "--approach",
    default=Approach.CONCEALER_3.value,
    type=click.Choice([a.value for a in Approach]),
    show_default=True,
)
@click.option("--min-db", default=-60.0, show_default=True)
@click.option("--max-db", default=10.0, show_default=True)
@click.option("--step-db", default=0.5, show_default=True)
@click.option("--source-level", default=65.0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def level_curve(
    source_path: str,
    positive_path: str,
    approach: str,
    min_db: float,
    max_db: float,
    step_db: float,
    source_level: float,
    out_path: str,
) -> None:
    """Sweep the gain lattice and dump (positive level, mixture level) CSV."""
    from .audio import normalize_to_level

    source = normalize_to_level(load_wav(source_path), source_level)
    positive = load_wav(positive_path)
    grid = leveling.GainGrid(min_db, max_db, step_db)
    points = leveling.level_curve(source, positive, Approach(approach), grid)
    leveling.write_level_curve_csv(points, out_path)
    click.echo(f"wrote {len(points)} points to {out_path}")


@main.group()
def analyze() -> None:
    """Turn results and audio into score tables, trends, and features."""


@analyze.command("scores")
@click.option("--results-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--manifest", "manifest_path", type=click.Path(exists=True))
@click.option(
    "--algorithm",
    default=bwsscore.DEFAULT_ALGORITHM,
    type=click.Choice(bwsscore.ALGORITHMS),
    show_default=True,
)
@click.option("--epochs", default=bwsscore.DEFAULT_EPOCHS, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def analyze_scores(
    results_dir: str,
    manifest_path: str | None,
    algorithm: str,
    epochs: int,
    seed: int,
    out_path: str,
) -> None:
    """Fit stimulus scores from all results*.csv files in a directory."""
    paths = sorted(Path(results_dir).glob("results*.csv"))
    if not paths:
        raise click.ClickException(f"no results*.csv files under {results_dir}")
    judgments = bwsscore.load_judgments_csv(paths)
    scores = bwsscore.score_all(judgments, algorithm, epochs, seed)
    manifest_rows = gengrid.read_manifest(manifest_path) if manifest_path else None
    bwsscore.write_score_table_csv(scores, out_path, algorithm, seed, epochs, manifest_rows)
    click.echo(f"scored {len(scores)} stimuli from {len(paths)} result files -> {out_path}")


@analyze.command("features")
@click.option("--audio-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path())
def analyze_features(audio_dir: str, out_path: str) -> None:
    """Spectral features (entropy, centroid, bandwidth, contrast, flatness)."""
    rows = []
    for wav in sorted(Path(audio_dir).glob("*.wav")):
        feats = analysis.spectral_features(load_wav(wav))
        rows.append(
            {
                "sound_id": wav.stem,
                "entropy": feats.entropy,
                "centroid_hz": feats.centroid_hz,
                "bandwidth_hz": feats.bandwidth_hz,
                "contrast_db": feats.contrast_db,
                "flatness": feats.flatness,
            }
        )
    if not rows:
        raise click.ClickException(f"no .wav files under {audio_dir}")
    analysis.export_csv(rows, out_path)
    click.echo(f"wrote features for {len(rows)} sounds -> {out_path}")


@analyze.command("trends")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def analyze_trends(scores_path: str, out_dir: str) -> None:
    """Aggregate scores by factor and fit score-vs-level regressions."""
    rows = analysis.load_score_table(scores_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    groupings = {
        "by_approach": ["approach"],
        "by_approach_delta": ["approach", "delta_laeq"],
        "by_positive": ["positive_id"],
        "by_source_approach": ["source_id", "approach"],
    }
    for name, keys in groupings.items():
        agg = analysis.aggregate(rows, keys)
        analysis.export_csv(agg, out / f"aggregate_{name}.csv", keys + ["mean", "se", "n"])

    approaches = sorted({r["approach"] for r in rows})
    if len(approaches) == 2:
        a, b = approaches
        sample_a = [float(r["score"]) for r in rows if r["approach"] == a]
        sample_b = [float(r["score"]) for r in rows if r["approach"] == b]
        welch = analysis.welch_t_test(sample_a, sample_b)
        analysis.export_csv(
            [{"a": a, "b": b, "t": welch.t, "df": welch.df, "p": welch.p}],
            out / "welch_approach.csv",
            ["a", "b", "t", "df", "p"],
        )

    fit_rows = []
    for approach in approaches:
        pts = [
            (float(r["delta_laeq"]), float(r["score"]))
            for r in rows
            if r["approach"] == approach
        ]
        fit = analysis.linear_fit(pts)
        fit_rows.append(
            {
                "approach": approach,
                "positive_id": "",
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
            }
        )
        for positive in sorted({r["positive_id"] for r in rows}):
            pts = [
                (float(r["delta_laeq"]), float(r["score"]))
                for r in rows
                if r["approach"] == approach and r["positive_id"] == positive
            ]
            if len(pts) >= 2:
                fit = analysis.linear_fit(pts)
                fit_rows.append(
                    {
                        "approach": approach,
                        "positive_id": positive,
                        "slope": fit.slope,
                        "intercept": fit.intercept,
                        "r_squared": fit.r_squared,
                    }
                )
    analysis.export_csv(
        fit_rows,
        out / "linear_trend_delta_laeq.csv",
        ["approach", "positive_id", "slope", "intercept", "r_squared"],
    )
    click.echo(f"wrote trend tables to {out}")


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True), envvar="MASKMIX_MANIFEST")
@click.option("--audio-dir", required=True, type=click.Path(exists=True, file_okay=False), envvar="MASKMIX_AUDIO_DIR")
@click.option("--state-dir", required=True, type=click.Path(file_okay=False), envvar="MASKMIX_STATE_DIR")
@click.option("--host", default="127.0.0.1", show_default=True, envvar="MASKMIX_HOST")
@click.option("--port", default=8000, show_default=True, envvar="MASKMIX_PORT")
@click.option("--base-seed", default=2024, show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False))
def serve(
    manifest_path: str,
    audio_dir: str,
    state_dir: str,
    host: str,
    port: int,
    base_seed: int,
    ui_dir: str | None,
) -> None:
    """Run the experiment HTTP service."""
    import uvicorn

    from .server import create_app
    from .store import ExperimentStore

    store = ExperimentStore(manifest_path, audio_dir, state_dir, base_seed=base_seed)
    app = create_app(store, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--sessions", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
def simulate(url: str, sessions: int, seed: int) -> None:
    """Drive complete sessions against a running server (scripted client)."""
    import httpx

    rng = random.Random(seed)
    with httpx.Client(base_url=url, timeout=30.0) as client:
        for _ in range(sessions):
            created = client.post("/session").raise_for_status().json()
            pid = created["participant_id"]
            payload = created["trial"]
            while payload["kind"] == "judgment":
                best, worst = rng.sample(payload["stimulus_ids"], 2)
                ack = (
                    client.post(
                        f"/session/{pid}/judgment",
                        json={
                            "trial_index": payload["trial_index"],
                            "best_id": best,
                            "worst_id": worst,
                            "response_time_ms": rng.randint(2000, 15000),
                        },
                    )
                    .raise_for_status()
                    .json()
                )
                payload = ack["next"]
            while payload["kind"] == "verbalization":
                ack = (
                    client.post(
                        f"/session/{pid}/verbalization",
                        json={
                            "positive_id": payload["positive_id"],
                            "text": f"sounds like {payload['positive_id']}",
                        },
                    )
                    .raise_for_status()
                    .json()
                )
                payload = ack["next"]
            finished = client.post(f"/session/{pid}/finish").raise_for_status().json()
            click.echo(f"participant {pid}: {finished['results_file']}")


if __name__ == "__main__":
    main()
