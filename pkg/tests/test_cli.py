import csv
import json

from click.testing import CliRunner

from maskmix.cli import main
from maskmix.gengrid import read_manifest


def invoke(*args):
    runner = CliRunner()
    result = runner.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestDemoAudio:
    def test_writes_seven_files(self, tmp_path):
        out = tmp_path / "corpus"
        result = invoke("demo-audio", "--out-dir", str(out), "--duration", "0.5")
        assert len(list(out.glob("*.wav"))) == 7
        assert "ventil1" in result.output


class TestGenstimuli:
    def test_end_to_end_tiny_grid(self, tmp_path, demo_corpus_1s):
        config = {
            "sources": ["ventil1"],
            "positives": ["stream"],
            "approaches": ["masker"],
            "delta_laeqs": [0, 1],
            "stft": {"window_length": 512, "hop": 128},
        }
        config_path = tmp_path / "grid.json"
        config_path.write_text(json.dumps(config))
        out = tmp_path / "stimuli"
        result = invoke(
            "genstimuli",
            "--config", str(config_path),
            "--audio-dir", str(demo_corpus_1s),
            "--out-dir", str(out),
        )
        assert "generated=2" in result.output
        rows = read_manifest(out / "manifest.csv")
        assert len(rows) == 2
        assert all(r["status"] == "ok" for r in rows)


class TestLevelCurve:
    def test_writes_csv(self, tmp_path, demo_corpus_1s):
        out = tmp_path / "curve.csv"
        invoke(
            "level-curve",
            "--source", str(demo_corpus_1s / "ventil1.wav"),
            "--positive", str(demo_corpus_1s / "rain.wav"),
            "--approach", "masker",
            "--min-db", "-12", "--max-db", "0", "--step-db", "4",
            "--out", str(out),
        )
        lines = out.read_text().splitlines()
        assert lines[0] == "positive_level_db,mixture_level_db"
        assert len(lines) == 5


def write_results_csv(path, participant_id, stimuli):
    """Minimal results file with four judged tuples."""
    columns = [
        "record", "participant_id", "trial_index", "phase",
        "s1", "s2", "s3", "s4", "best_id", "worst_id", "rt_ms",
        "positive_id", "text", "duration_s",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for t in range(4):
            group = stimuli[4 * t : 4 * t + 4]
            writer.writerow(
                {
                    "record": "judgment",
                    "participant_id": participant_id,
                    "trial_index": t + 2,
                    "phase": "main",
                    "s1": group[0], "s2": group[1], "s3": group[2], "s4": group[3],
                    "best_id": group[0],
                    "worst_id": group[3],
                    "rt_ms": 2000,
                }
            )


class TestAnalyze:
    def test_scores_and_trends(self, tmp_path):
        stimuli = [f"approach=masker+delta_laeq={d}+source=v_p{i}" for i, d in
                   enumerate([0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3])]
        results_dir = tmp_path / "results"
        results_dir.mkdir()
        write_results_csv(results_dir / "results1.csv", 1, stimuli)
        scores_path = tmp_path / "scores.csv"
        result = invoke(
            "analyze", "scores",
            "--results-dir", str(results_dir),
            "--out", str(scores_path),
            "--algorithm", "value_learning",
        )
        assert "scored 16 stimuli" in result.output
        with open(scores_path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 16
        assert all(r["algorithm"] == "value_learning" for r in rows)

        # trends need factor columns; craft a small score table directly
        table = tmp_path / "table.csv"
        with open(table, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh,
                fieldnames=["stimulus_id", "source_id", "positive_id", "approach",
                            "delta_laeq", "score", "algorithm", "seed", "epochs"],
                lineterminator="\n",
            )
            writer.writeheader()
            for approach in ("masker", "concealer_3"):
                for positive in ("p1", "p2"):
                    for delta in (0.0, 1.0, 2.0, 3.0):
                        writer.writerow(
                            {
                                "stimulus_id": f"{approach}{positive}{delta}",
                                "source_id": "v1",
                                "positive_id": positive,
                                "approach": approach,
                                "delta_laeq": delta,
                                "score": 0.6 - 0.1 * delta,
                                "algorithm": "value_learning",
                                "seed": 0,
                                "epochs": 1,
                            }
                        )
        out_dir = tmp_path / "trends"
        invoke("analyze", "trends", "--scores", str(table), "--out-dir", str(out_dir))
        agg = list(csv.DictReader(open(out_dir / "aggregate_by_approach.csv")))
        assert len(agg) == 2
        fits = list(csv.DictReader(open(out_dir / "linear_trend_delta_laeq.csv")))
        overall = [f for f in fits if f["positive_id"] == ""]
        assert len(overall) == 2
        assert float(overall[0]["slope"]) < 0
        welch = list(csv.DictReader(open(out_dir / "welch_approach.csv")))
        assert len(welch) == 1

    def test_features(self, tmp_path, demo_corpus_1s):
        out = tmp_path / "features.csv"
        invoke("analyze", "features", "--audio-dir", str(demo_corpus_1s), "--out", str(out))
        rows = list(csv.DictReader(open(out)))
        assert len(rows) == 7
        by_id = {r["sound_id"]: r for r in rows}
        assert 0 < float(by_id["rain"]["flatness"]) <= 1.0
        assert float(by_id["ventil1"]["centroid_hz"]) < float(by_id["rain"]["centroid_hz"])
