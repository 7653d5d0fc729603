"""Start a real experiment server on a tiny generated corpus.

Used by the frontend integration test; prints READY once listening.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import uvicorn

from maskmix.audio import AudioBuffer, save_wav
from maskmix.gengrid import MANIFEST_COLUMNS, write_manifest
from maskmix.server import create_app
from maskmix.store import ExperimentStore

POSITIVES = ("fountain", "rain", "stream", "waterfall", "waves")


def build_corpus(root: Path, n_stimuli: int = 140) -> tuple[Path, Path]:
    stim_dir = root / "stimuli"
    audio_dir = root / "audio"
    stim_dir.mkdir(parents=True, exist_ok=True)
    audio_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)
    rows = []
    for i in range(n_stimuli):
        positive = POSITIVES[i % len(POSITIVES)]
        stim_id = f"approach=masker+delta_laeq=0+source=v{i // 70}_{positive}{i:03d}"
        filename = f"{stim_id}_stimulus.wav"
        save_wav(AudioBuffer(0.1 * rng.standard_normal(800), 8000), stim_dir / filename)
        rows.append(
            {
                **{c: "" for c in MANIFEST_COLUMNS},
                "id": stim_id,
                "source_id": f"v{i // 70}",
                "positive_id": positive,
                "approach": "masker",
                "delta_laeq": "0",
                "status": "ok",
                "file": filename,
            }
        )
    write_manifest(rows, stim_dir / "manifest.csv")
    for positive in POSITIVES:
        save_wav(
            AudioBuffer(0.1 * rng.standard_normal(800), 8000),
            audio_dir / f"{positive}.wav",
        )
    return stim_dir / "manifest.csv", audio_dir


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, required=True)
    parser.add_argument("--dir", required=True)
    args = parser.parse_args()
    root = Path(args.dir)
    manifest, audio_dir = build_corpus(root)
    store = ExperimentStore(manifest, audio_dir, root / "state", base_seed=7)
    app = create_app(store)
    print("READY", flush=True)
    sys.stdout.flush()
    uvicorn.run(app, host="127.0.0.1", port=args.port, log_level="error")


if __name__ == "__main__":
    main()
