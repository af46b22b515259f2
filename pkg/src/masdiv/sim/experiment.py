"""Diversity time series from match logs and the challenger-vs-control experiment."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from collections import Counter
from dataclasses import dataclass

from ..behavior import behavioral_features
from ..entropy import entropy_of_counts
from ..errors import ValidationError
from ..taxonomy import distance_matrix, hierarchic_entropy
from .log import MatchLog
from .match import DEFAULT_TICKS, run_match
from .rng import derive_seed
from .teams import TeamConfig, offensiveness_clusters, positional_entropy, trait_entropy

METRICS = ("positional", "hierarchic")


def live_positional_entropy(log: MatchLog, tick: int, side: str = "a") -> float:
    """Entropy of the distinct logged positions of one side's live agents at ``tick``."""
    prefix = side + "."
    counts = Counter((r.x, r.y) for r in log.rows_at(tick) if r.agent.startswith(prefix))
    if not counts:
        raise ValidationError(f"no live agents of side {side!r} at tick {tick}")
    return entropy_of_counts(list(counts.values()))


def diversity_timeseries(
    log: MatchLog, window: int, metric: str = "positional", side: str = "a"
) -> list[tuple[int, float]]:
    """One diversity value per window of ``window`` ticks.

    ``positional`` takes the snapshot at the last tick of each window;
    ``hierarchic`` clusters the state-visit vectors of the agents that were
    alive at that tick, over the whole window.
    """
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r}; choose from {METRICS}")
    if window < 1 or log.ticks % window:
        raise ValidationError(f"window {window} does not divide the run length {log.ticks}")
    series = []
    for start in range(0, log.ticks, window):
        snap = start + window - 1
        if metric == "positional":
            value = live_positional_entropy(log, snap, side)
        else:
            alive = [r.agent for r in log.rows_at(snap) if r.agent.startswith(side + ".")]
            society = behavioral_features(log, alive, (start, start + window))
            value = hierarchic_entropy(distance_matrix(society))
        series.append((snap, value))
    return series


@dataclass(frozen=True)
class ExperimentRow:
    team: str
    positions: int
    mean_offensiveness: float
    clusters: tuple[float, ...]
    positioning_entropy: float
    trait_entropy: float
    goals_for: int
    goals_against: int

    @property
    def score_difference(self) -> int:
        return self.goals_for - self.goals_against


REPORT_COLUMNS = [
    "team",
    "player_positions",
    "mean_offensiveness",
    "offensiveness_clusters",
    "entropy_positioning",
    "entropy_offensiveness",
    "goals_for",
    "goals_against",
    "score_difference",
]


@dataclass(frozen=True)
class ExperimentReport:
    control: str
    games_per_pair: int
    seed: int
    ticks: int
    rows: tuple[ExperimentRow, ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow(
                [
                    r.team,
                    r.positions,
                    f"{r.mean_offensiveness:.9g}",
                    " ".join(f"{c:.9g}" for c in r.clusters),
                    f"{r.positioning_entropy:.9g}",
                    f"{r.trait_entropy:.9g}",
                    r.goals_for,
                    r.goals_against,
                    r.score_difference,
                ]
            )
        return out.getvalue()


def _play(args) -> tuple[int, int]:
    team, control, seed, ticks = args
    log = run_match(team, control, seed, ticks)
    return log.score["a"], log.score["b"]


def experiment_suite(
    control: TeamConfig,
    challengers: list[TeamConfig],
    games_per_pair: int = 3,
    seed: int = 0,
    ticks: int = DEFAULT_TICKS,
    jobs: int = 1,
) -> ExperimentReport:
    """Each challenger plays ``games_per_pair`` games against the control team.

    Game ``g`` of challenger ``i`` uses seed ``derive_seed(seed, i, g)``; the
    challenger is always the first side.  With ``jobs > 1`` games run in
    worker processes and are merged back in input order.
    """
    if games_per_pair < 1:
        raise ValidationError("games_per_pair must be at least 1")
    if jobs < 1:
        raise ValidationError("jobs must be at least 1")
    games = [
        (team, control, derive_seed(seed, i, g), ticks)
        for i, team in enumerate(challengers)
        for g in range(games_per_pair)
    ]
    if jobs == 1:
        scores = [_play(g) for g in games]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_play, games))
    rows = []
    for i, team in enumerate(challengers):
        mine = scores[i * games_per_pair : (i + 1) * games_per_pair]
        positions = len({p.role.home for p in team.players})
        mean_off = sum(p.traits.offensiveness for p in team.players) / len(team.players)
        rows.append(
            ExperimentRow(
                team.name,
                positions,
                mean_off,
                tuple(offensiveness_clusters(team)),
                positional_entropy(team),
                trait_entropy(team),
                sum(a for a, _ in mine),
                sum(b for _, b in mine),
            )
        )
    return ExperimentReport(control.name, games_per_pair, seed, ticks, tuple(rows))
