"""Best-worst judgment scoring: Elo, Rescorla-Wagner, Value Learning.

A judgment on a 4-tuple with best A and worst D yields the five pairwise
relations A>B, A>C, A>D, B>D, C>D; the middle pair stays unknown. Scores
are fitted by replaying the shuffled relation stream through one of three
tournament-style update rules. Compliance measures how many of a
participant's implied relations a reference score table satisfies.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

PHASE_MAIN = "main"
PHASE_RETEST = "retest"

ALGORITHMS = ("elo", "rescorla_wagner", "value_learning")
DEFAULT_ALGORITHM = "value_learning"
# One online pass over the shuffled relations, as the tournament-scoring
# literature processes judgments; more epochs sharpen noiseless recovery
# but replay noisy relations just as often.
DEFAULT_EPOCHS = 1


@dataclass(frozen=True)
class Judgment:
    """One best/worst choice over an ordered 4-tuple of stimulus ids."""

    participant_id: int
    trial_id: str
    stimuli: tuple[str, str, str, str]
    best_index: int
    worst_index: int
    phase: str = PHASE_MAIN

    def __post_init__(self) -> None:
        if len(self.stimuli) != 4:
            raise ValueError("a judgment covers exactly four stimuli")
        for idx in (self.best_index, self.worst_index):
            if not 0 <= idx <= 3:
                raise ValueError("best/worst indices must lie in [0, 3]")
        if self.best_index == self.worst_index:
            raise ValueError("best and worst must differ")

    @property
    def best_id(self) -> str:
        return self.stimuli[self.best_index]

    @property
    def worst_id(self) -> str:
        return self.stimuli[self.worst_index]


class PairRelation(NamedTuple):
    winner: str
    loser: str


def expand_judgment(judgment: Judgment) -> list[PairRelation]:
    """The five relations implied by a best/worst choice.

    best beats everyone, everyone beats worst; the two middle items are
    never compared with each other.
    """
    best = judgment.best_id
    worst = judgment.worst_id
    middles = [
        s
        for k, s in enumerate(judgment.stimuli)
        if k not in (judgment.best_index, judgment.worst_index)
    ]
    return [
        PairRelation(best, middles[0]),
        PairRelation(best, middles[1]),
        PairRelation(best, worst),
        PairRelation(middles[0], worst),
        PairRelation(middles[1], worst),
    ]


# --- Elo ---------------------------------------------------------------


@dataclass(frozen=True)
class EloParams:
    k: float = 32.0
    initial_rating: float = 0.0


def elo_expected(rating_a: float, rating_b: float) -> float:
    """Win probability of A against B: 10^(Ra/400) / (10^(Ra/400) + 10^(Rb/400))."""
    qa = 10.0 ** (rating_a / 400.0)
    qb = 10.0 ** (rating_b / 400.0)
    return qa / (qa + qb)


def elo_update(ratings: dict, rel: PairRelation, params: EloParams = EloParams()) -> dict:
    """R' = R + K (S - E); the winner gains exactly what the loser sheds."""
    expected_win = elo_expected(ratings[rel.winner], ratings[rel.loser])
    delta = params.k * (1.0 - expected_win)
    ratings[rel.winner] += delta
    ratings[rel.loser] -= delta
    return ratings


# --- Rescorla-Wagner -----------------------------------------------------


@dataclass(frozen=True)
class RescorlaWagnerParams:
    beta: float = 0.1
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.lam <= 0.0:
            raise ValueError("lam must be positive")


def rw_update(
    values: dict, rel: PairRelation, params: RescorlaWagnerParams = RescorlaWagnerParams()
) -> dict:
    """Update associations with the "wins" event.

    dV = alpha * beta * (lambda - V) for the winner, extinction toward 0
    for the loser. The saliency alpha = 1 - Vw(winner)/(Vw(winner)+Vw(loser))
    makes unexpected outcomes move values more; with no prior association
    on either side it falls back to 0.5.
    """
    v_win = values[rel.winner]
    v_lose = values[rel.loser]
    total = v_win + v_lose
    alpha = 0.5 if total == 0.0 else 1.0 - v_win / total
    step = alpha * params.beta
    values[rel.winner] = min(max(v_win + step * (params.lam - v_win), 0.0), params.lam)
    values[rel.loser] = min(max(v_lose + step * (0.0 - v_lose), 0.0), params.lam)
    return values


# --- Value Learning ------------------------------------------------------


@dataclass(frozen=True)
class ValueLearningParams:
    """Value-learning knobs.

    ``initial_value`` is the starting expected outcome as a fraction of
    the win outcome; the uninformative 0.5 keeps early saliencies
    moderate, which is what makes this scorer the least noise-sensitive
    of the three. The small ``beta`` suits a single fitting pass.
    """

    beta: float = 0.02
    win_value: float = 1.0
    loss_value: float = 0.0
    odds_epsilon: float = 1e-6
    initial_value: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.win_value <= 0.0:
            raise ValueError("win_value must be positive")
        if not 0.0 <= self.loss_value < self.win_value:
            raise ValueError("loss_value must lie in [0, win_value)")
        if not 0.0 < self.odds_epsilon < 0.5:
            raise ValueError("odds_epsilon must lie in (0, 0.5)")
        if not 0.0 <= self.initial_value < 1.0:
            raise ValueError("initial_value must lie in [0, 1)")


def vl_update(
    values: dict, rel: PairRelation, params: ValueLearningParams = ValueLearningParams()
) -> dict:
    """V = V + alpha * beta * (gamma - V) on the observed outcome.

    Expected values are read as win probabilities (normalized by the win
    outcome so only the ratio of outcome values matters), converted to
    odds O = p/(1-p), and the saliency alpha = 1 - Ow/(Ow+Ol) shrinks
    updates for expected wins. Fresh competitors that have never won get
    alpha = 0.5. The loser moves toward the loss outcome with the
    complementary saliency.
    """
    v_win = values[rel.winner]
    v_lose = values[rel.loser]
    eps = params.odds_epsilon
    if v_win == 0.0 and v_lose == 0.0:
        alpha = 0.5
    else:
        p_win = min(max(v_win / params.win_value, eps), 1.0 - eps)
        p_lose = min(max(v_lose / params.win_value, eps), 1.0 - eps)
        odds_win = p_win / (1.0 - p_win)
        odds_lose = p_lose / (1.0 - p_lose)
        alpha = 1.0 - odds_win / (odds_win + odds_lose)
    ceiling = params.win_value * (1.0 - eps)
    new_win = v_win + alpha * params.beta * (params.win_value - v_win)
    new_lose = v_lose + (1.0 - alpha) * params.beta * (params.loss_value - v_lose)
    values[rel.winner] = min(max(new_win, 0.0), ceiling)
    values[rel.loser] = min(max(new_lose, 0.0), ceiling)
    return values


# --- Fitting -------------------------------------------------------------

_UPDATERS = {
    "elo": (elo_update, EloParams),
    "rescorla_wagner": (rw_update, RescorlaWagnerParams),
    "value_learning": (vl_update, ValueLearningParams),
}


def initial_scores(stimulus_ids: Iterable[str], algorithm: str, params=None) -> dict:
    if algorithm == "elo":
        params = params or EloParams()
        return {s: params.initial_rating for s in stimulus_ids}
    if algorithm == "value_learning":
        params = params or ValueLearningParams()
        return {s: params.initial_value * params.win_value for s in stimulus_ids}
    return {s: 0.0 for s in stimulus_ids}


def score_all(
    judgments: Iterable[Judgment],
    algorithm: str = DEFAULT_ALGORITHM,
    epochs: int = DEFAULT_EPOCHS,
    seed: int = 0,
    stimulus_ids: Iterable[str] | None = None,
    params=None,
) -> dict:
    """Fit scores by replaying all main-phase relations.

    Retest judgments are duplicates and are excluded from fitting. The
    pooled relations are reshuffled each epoch with a seeded generator,
    so the result is deterministic given (judgments, algorithm, epochs,
    seed, params).
    """
    if algorithm not in _UPDATERS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    fitted = [j for j in judgments if j.phase != PHASE_RETEST]
    if not fitted:
        raise ValueError("no main-phase judgments to score")
    relations = [rel for j in fitted for rel in expand_judgment(j)]
    ids = set(stimulus_ids) if stimulus_ids is not None else set()
    for j in fitted:
        ids.update(j.stimuli)
    update, params_cls = _UPDATERS[algorithm]
    if params is None:
        params = params_cls()
    scores = initial_scores(sorted(ids), algorithm, params)
    rng = random.Random(seed)
    for _ in range(epochs):
        epoch_order = relations[:]
        rng.shuffle(epoch_order)
        for rel in epoch_order:
            update(scores, rel, params)
    return scores


# --- Compliance ----------------------------------------------------------


def compliance(judgments: Iterable[Judgment], reference_scores: dict) -> float:
    """Fraction of implied relations the reference scores satisfy.

    Every judgment contributes its five relations (retests included);
    a relation holds only under strict score order, so ties count
    against the participant.
    """
    relations = [rel for j in judgments for rel in expand_judgment(j)]
    if not relations:
        raise ValueError("no judgments to evaluate")
    satisfied = 0
    for rel in relations:
        try:
            if reference_scores[rel.winner] > reference_scores[rel.loser]:
                satisfied += 1
        except KeyError as exc:
            raise ValueError(f"stimulus {exc.args[0]!r} missing from reference scores")
    return satisfied / len(relations)


def inter_intra_compliance(
    judgments: Iterable[Judgment],
    algorithm: str = DEFAULT_ALGORITHM,
    epochs: int = DEFAULT_EPOCHS,
    seed: int = 0,
    params=None,
) -> dict:
    """Per-participant (inter, intra) compliance.

    Inter compares against scores fitted on everyone's judgments, intra
    against scores fitted on the participant's own.
    """
    judgments = list(judgments)
    by_participant: dict[int, list[Judgment]] = {}
    for j in judgments:
        by_participant.setdefault(j.participant_id, []).append(j)
    group_scores = score_all(judgments, algorithm, epochs, seed, params=params)
    result = {}
    for pid, own in sorted(by_participant.items()):
        own_scores = score_all(own, algorithm, epochs, seed, params=params)
        result[pid] = (compliance(own, group_scores), compliance(own, own_scores))
    return result


# --- Results ingestion ----------------------------------------------------


def load_judgments_csv(paths) -> list[Judgment]:
    """Read judgments from one or more experiment results CSV files."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    judgments: list[Judgment] = []
    for path in paths:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                if row.get("record") != "judgment":
                    continue
                stimuli = (row["s1"], row["s2"], row["s3"], row["s4"])
                pid = int(row["participant_id"])
                judgments.append(
                    Judgment(
                        participant_id=pid,
                        trial_id=f"{pid}:{row['trial_index']}",
                        stimuli=stimuli,
                        best_index=stimuli.index(row["best_id"]),
                        worst_index=stimuli.index(row["worst_id"]),
                        phase=row["phase"],
                    )
                )
    return judgments


def write_score_table_csv(
    scores: dict,
    path,
    algorithm: str,
    seed: int,
    epochs: int,
    manifest_rows: list[dict] | None = None,
) -> None:
    """Write a score table, joining grid factors when a manifest is given."""
    factor_index = {}
    if manifest_rows:
        factor_index = {row["id"]: row for row in manifest_rows}
    columns = [
        "stimulus_id",
        "source_id",
        "positive_id",
        "approach",
        "delta_laeq",
        "score",
        "algorithm",
        "seed",
        "epochs",
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for stimulus_id in sorted(scores):
            factors = factor_index.get(stimulus_id, {})
            writer.writerow(
                {
                    "stimulus_id": stimulus_id,
                    "source_id": factors.get("source_id", ""),
                    "positive_id": factors.get("positive_id", ""),
                    "approach": factors.get("approach", ""),
                    "delta_laeq": factors.get("delta_laeq", ""),
                    "score": f"{scores[stimulus_id]:.10g}",
                    "algorithm": algorithm,
                    "seed": seed,
                    "epochs": epochs,
                }
            )
