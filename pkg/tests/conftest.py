"""Shared fixtures and simulation helpers."""

import random

import numpy as np
import pytest

from maskmix.audio import AudioBuffer
from maskmix.bwsdesign import TupleRegistry, design_participant, make_training_tuples
from maskmix.bwsscore import Judgment

SR = 44100


def sine(freq_hz: float, duration_s: float = 1.0, sr: int = SR, amp: float = 1.0) -> AudioBuffer:
    t = np.arange(int(round(duration_s * sr))) / sr
    return AudioBuffer(amp * np.sin(2.0 * np.pi * freq_hz * t), sr, label=f"{freq_hz}Hz")


def noise(seed: int, duration_s: float = 1.0, sr: int = SR, amp: float = 0.1) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    return AudioBuffer(amp * rng.standard_normal(int(round(duration_s * sr))), sr)


def simulate_judgments(stimulus_ids, utilities, n_judges, noise_rate, seed,
                       registry=None):
    """Judgments from utility-driven judges; a noisy judgment picks best
    and worst uniformly at random instead."""
    rng = random.Random(seed)
    if registry is None:
        registry = TupleRegistry()
    training = make_training_tuples(stimulus_ids)
    judgments = []
    for judge in range(n_judges):
        design = design_participant(
            stimulus_ids,
            seed * 10000 + judge,
            registry,
            participant_id=judge,
            training=training,
        )
        for trial in design.trials:
            if not trial.recorded:
                continue
            if noise_rate > 0.0 and rng.random() < noise_rate:
                best, worst = rng.sample(range(4), 2)
            else:
                values = [utilities[s] for s in trial.stimuli]
                best = values.index(max(values))
                worst = values.index(min(values))
            judgments.append(
                Judgment(
                    participant_id=judge,
                    trial_id=f"{judge}:{trial.index}",
                    stimuli=trial.stimuli,
                    best_index=best,
                    worst_index=worst,
                    phase=trial.phase,
                )
            )
    return judgments


@pytest.fixture(scope="session")
def demo_corpus_1s(tmp_path_factory):
    """Short surrogate corpus for unit tests that touch files."""
    from maskmix.surrogates import make_demo_corpus

    out = tmp_path_factory.mktemp("corpus1s")
    make_demo_corpus(out, seed=77, duration_s=1.0)
    return out
