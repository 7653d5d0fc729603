"""Per-participant 4-tuple designs for best-worst-scaling sessions.

Each participant judges every stimulus exactly once across the main
tuples. Tuple uniqueness is enforced set-wise across participants through
a shared registry. The served sequence hides two unrecorded training
trials up front and four retest repeats interleaved into the recorded
trials.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

TUPLE_SIZE = 4
PHASE_TRAINING = "training"
PHASE_MAIN = "main"
PHASE_RETEST = "retest"

#: Seed for the training tuples, which are the same for every participant.
TRAINING_SEED = 7


class DesignSaturatedError(RuntimeError):
    """Reshuffle budget exhausted while avoiding registered tuples."""


@dataclass(frozen=True)
class TrialSpec:
    """One served trial: what to play, in which order, and bookkeeping
    that never reaches the participant."""

    index: int
    phase: str
    stimuli: tuple[str, ...]
    recorded: bool
    main_position: int | None = None  # position of the judged tuple in `main`

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "phase": self.phase,
            "stimuli": list(self.stimuli),
            "recorded": self.recorded,
            "main_position": self.main_position,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TrialSpec":
        return cls(
            index=raw["index"],
            phase=raw["phase"],
            stimuli=tuple(raw["stimuli"]),
            recorded=raw["recorded"],
            main_position=raw["main_position"],
        )


@dataclass
class TupleDesign:
    participant_id: int
    seed: int
    training: list[tuple[str, ...]]
    main: list[tuple[str, ...]]
    retest_of: list[int]
    trials: list[TrialSpec]

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "seed": self.seed,
            "training": [list(t) for t in self.training],
            "main": [list(t) for t in self.main],
            "retest_of": list(self.retest_of),
            "trials": [t.to_dict() for t in self.trials],
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "TupleDesign":
        return cls(
            participant_id=raw["participant_id"],
            seed=raw["seed"],
            training=[tuple(t) for t in raw["training"]],
            main=[tuple(t) for t in raw["main"]],
            retest_of=list(raw["retest_of"]),
            trials=[TrialSpec.from_dict(t) for t in raw["trials"]],
        )


class TupleRegistry:
    """Set of already-issued main tuples, compared as unordered sets."""

    def __init__(self) -> None:
        self._sets: set[frozenset] = set()

    def __len__(self) -> int:
        return len(self._sets)

    def collides(self, tuples) -> bool:
        return any(frozenset(t) in self._sets for t in tuples)

    def register(self, tuples) -> None:
        for t in tuples:
            self._sets.add(frozenset(t))

    def save(self, path) -> None:
        payload = sorted(sorted(s) for s in self._sets)
        Path(path).write_text(json.dumps(payload) + "\n")

    @classmethod
    def load(cls, path) -> "TupleRegistry":
        registry = cls()
        path = Path(path)
        if path.exists():
            for entry in json.loads(path.read_text()):
                registry._sets.add(frozenset(entry))
        return registry


def make_training_tuples(stimulus_ids, count: int = 2, seed: int = TRAINING_SEED):
    """Fixed training tuples drawn deterministically from the corpus."""
    ids = list(stimulus_ids)
    if len(ids) < count * TUPLE_SIZE:
        raise ValueError("not enough stimuli for the training tuples")
    rng = random.Random(seed)
    picked = rng.sample(ids, count * TUPLE_SIZE)
    return [tuple(picked[i * TUPLE_SIZE : (i + 1) * TUPLE_SIZE]) for i in range(count)]


def design_participant(
    stimulus_ids,
    participant_seed: int,
    registry: TupleRegistry | None = None,
    participant_id: int = 0,
    training: list[tuple[str, ...]] | None = None,
    n_retest: int = 4,
    max_retries: int = 1000,
) -> TupleDesign:
    """Build one participant's full trial sequence.

    The main tuples are a seeded shuffle-partition of the stimulus set,
    redrawn (bounded) while any tuple set-collides with the registry; on
    success they are registered. Retest repeats are drawn uniformly
    without replacement from the main tuples and land at random positions
    in the last two thirds of the judged sequence, never immediately
    after their original.
    """
    ids = list(stimulus_ids)
    if not ids:
        raise ValueError("empty stimulus set")
    if len(ids) % TUPLE_SIZE != 0:
        raise ValueError(
            f"stimulus count {len(ids)} is not a multiple of the tuple size {TUPLE_SIZE}"
        )
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate stimulus ids")
    rng = random.Random(participant_seed)
    n_main = len(ids) // TUPLE_SIZE
    if n_retest > n_main:
        raise ValueError("more retests requested than main tuples")

    main: list[tuple[str, ...]] | None = None
    for _ in range(max_retries):
        shuffled = ids[:]
        rng.shuffle(shuffled)
        candidate = [
            tuple(shuffled[i * TUPLE_SIZE : (i + 1) * TUPLE_SIZE])
            for i in range(n_main)
        ]
        if registry is not None and registry.collides(candidate):
            continue
        main = candidate
        break
    if main is None:
        raise DesignSaturatedError(
            f"could not draw a collision-free design in {max_retries} attempts"
        )

    n_recorded = n_main + n_retest
    window_start = n_recorded // 3  # retests live in the last two thirds

    placement = None
    for _ in range(max_retries):
        retest_of = rng.sample(range(n_main), n_retest)
        slots = sorted(rng.sample(range(window_start, n_recorded), n_retest))
        order = rng.sample(retest_of, n_retest)
        main_positions = _main_positions(n_recorded, slots)
        if all(slot > main_positions[m] + 1 for slot, m in zip(slots, order)):
            placement = (slots, order, main_positions)
            break
    if placement is None:
        raise DesignSaturatedError(
            f"could not place retest trials in {max_retries} attempts"
        )
    slots, order, main_positions = placement

    training_tuples = training if training is not None else make_training_tuples(ids)
    trials: list[TrialSpec] = []
    for k, t in enumerate(training_tuples):
        trials.append(TrialSpec(k, PHASE_TRAINING, tuple(t), recorded=False))
    offset = len(training_tuples)
    slot_to_main = dict(zip(slots, order))
    next_main = 0
    for pos in range(n_recorded):
        if pos in slot_to_main:
            m = slot_to_main[pos]
            shown = list(main[m])
            rng.shuffle(shown)
            trials.append(
                TrialSpec(offset + pos, PHASE_RETEST, tuple(shown), True, m)
            )
        else:
            trials.append(
                TrialSpec(offset + pos, PHASE_MAIN, main[next_main], True, next_main)
            )
            next_main += 1

    if registry is not None:
        registry.register(main)
    return TupleDesign(
        participant_id=participant_id,
        seed=participant_seed,
        training=[tuple(t) for t in training_tuples],
        main=main,
        retest_of=list(order),
        trials=trials,
    )


def _main_positions(n_recorded: int, slots: list[int]) -> list[int]:
    """Final position of each main tuple once retest slots are reserved."""
    taken = set(slots)
    return [pos for pos in range(n_recorded) if pos not in taken]


def presentation_order(design: TupleDesign) -> list[TrialSpec]:
    """Served trial list; retests carry their origin but are not marked
    in any way a client payload would expose."""
    return list(design.trials)
