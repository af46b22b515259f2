"""Pairwise behavioral difference between agents.

Two routes are offered.  Policy tables compare what two agents do in each
perceptual state (``phi1`` unweighted, ``phi2`` weighted by how often each
state was visited).  State distributions summarise how much time agents
driven by the same automaton spent in each automaton state; those vectors
become taxonomic features for hierarchic entropy.

Actions are nominal: the per-state difference is 0 for the same action id
and 1 otherwise.  A state with a policy entry for only one agent counts as
a difference.
"""

from __future__ import annotations

import csv
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .errors import ValidationError
from .society import Agent, Society

if TYPE_CHECKING:
    from .sim.log import MatchLog


@dataclass(frozen=True)
class PolicyEntry:
    action: str
    visits: int = 0


@dataclass(frozen=True)
class PolicyTable:
    agent: str
    entries: Mapping[str, PolicyEntry] = field(default_factory=dict)

    def __post_init__(self):
        entries = {}
        for state, e in dict(self.entries).items():
            if not isinstance(e, PolicyEntry):
                action, visits = e
                e = PolicyEntry(str(action), int(visits))
            if e.visits < 0:
                raise ValidationError(f"{self.agent}: negative visit count for state {state!r}")
            entries[str(state)] = e
        object.__setattr__(self, "entries", entries)

    def __hash__(self):
        return hash((self.agent, tuple(sorted(self.entries.items()))))

    @property
    def states(self) -> frozenset[str]:
        return frozenset(self.entries)

    @property
    def total_visits(self) -> int:
        return sum(e.visits for e in self.entries.values())

    def action(self, state: str) -> str | None:
        e = self.entries.get(state)
        return None if e is None else e.action

    def frequency(self, state: str) -> float:
        total = self.total_visits
        if total == 0:
            raise ValidationError(f"agent {self.agent!r} has no recorded visits")
        e = self.entries.get(state)
        return 0.0 if e is None else e.visits / total


def response_difference(
    pa: PolicyTable, pb: PolicyTable, state: str, state_space: Iterable[str] | None = None
) -> int:
    known = set(state_space) if state_space is not None else pa.states | pb.states
    if state not in known:
        raise ValidationError(f"unknown state {state!r}")
    a, b = pa.action(state), pb.action(state)
    if a is None and b is None:
        return 0
    return int(a != b)


def _compared_states(pa: PolicyTable, pb: PolicyTable) -> list[str]:
    return sorted(pa.states | pb.states)


def phi1(pa: PolicyTable, pb: PolicyTable) -> float:
    """Fraction of states (defined for either agent) where the actions differ."""
    states = _compared_states(pa, pb)
    if not states:
        raise ValidationError("no states to compare")
    return sum(response_difference(pa, pb, s) for s in states) / len(states)


def phi2(pa: PolicyTable, pb: PolicyTable) -> float:
    """Visit-weighted difference: sum over states of mean visit share times difference."""
    if pa.total_visits == 0 or pb.total_visits == 0:
        raise ValidationError("both agents need a positive number of visits")
    return math.fsum(
        (pa.frequency(s) + pb.frequency(s)) / 2 * response_difference(pa, pb, s)
        for s in _compared_states(pa, pb)
    )


def is_equivalent(pa: PolicyTable, pb: PolicyTable) -> bool:
    return all(pa.action(s) == pb.action(s) for s in _compared_states(pa, pb))


def is_epsilon_similar(pa: PolicyTable, pb: PolicyTable, epsilon: float) -> bool:
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    return phi2(pa, pb) < epsilon


def is_epsilon_homogeneous(tables: Sequence[PolicyTable], epsilon: float) -> bool:
    if len(tables) < 2:
        raise ValidationError("need at least two policy tables")
    return all(is_epsilon_similar(a, b, epsilon) for a, b in itertools.combinations(tables, 2))


def load_policy_tables(path: str | Path) -> list[PolicyTable]:
    """Read ``agent_id,state_id,action_id,visit_count`` rows, one table per agent."""
    rows: dict[str, dict[str, PolicyEntry]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"agent_id", "state_id", "action_id", "visit_count"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ValidationError(f"{path}: header must contain {sorted(need)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                visits = int(row["visit_count"])
            except (TypeError, ValueError):
                raise ValidationError(
                    f"{path}: line {lineno}: visit_count {row['visit_count']!r} is not an integer"
                ) from None
            if visits < 0:
                raise ValidationError(f"{path}: line {lineno}: negative visit_count")
            table = rows.setdefault(row["agent_id"], {})
            if row["state_id"] in table:
                raise ValidationError(
                    f"{path}: line {lineno}: second action for state {row['state_id']!r}"
                )
            table[row["state_id"]] = PolicyEntry(row["action_id"], visits)
    return [PolicyTable(agent, entries) for agent, entries in rows.items()]


# ------------------------------------------------------- state distributions


@dataclass(frozen=True)
class StateVisitDistribution:
    agent: str
    frequencies: Mapping[str, float]


def _window_rows(log: "MatchLog", agent: str, window: tuple[int, int]):
    start, stop = window
    if stop <= start:
        raise ValidationError(f"empty window {window}")
    if agent not in log.agent_ids:
        raise ValidationError(f"unknown agent {agent!r}")
    return [r for r in log.rows_for(agent) if start <= r.tick < stop]


def state_distribution(
    log: "MatchLog", agent: str, window: tuple[int, int]
) -> StateVisitDistribution:
    """Share of logged ticks in ``[start, stop)`` spent in each automaton state."""
    rows = _window_rows(log, agent, window)
    if not rows:
        raise ValidationError(f"agent {agent!r} has no rows in window {window}")
    counts = Counter(r.state for r in rows)
    freqs = {s: counts.get(s, 0) / len(rows) for s in log.states}
    return StateVisitDistribution(agent, freqs)


def behavioral_features(
    log: "MatchLog", agents: Sequence[str], window: tuple[int, int]
) -> Society:
    """Society whose features are the agents' state-visit frequency vectors."""
    dims = tuple(log.states)
    members = []
    for agent in agents:
        dist = state_distribution(log, agent, window)
        members.append(Agent(agent, {}, tuple(dist.frequencies[s] for s in dims)))
    return Society(tuple(members), dims)


def policy_tables_from_log(log: "MatchLog", window: tuple[int, int] | None = None):
    """Per-agent table mapping each visited state to its most frequent activity."""
    window = window or (0, log.ticks)
    tables = []
    for agent in log.agent_ids:
        rows = _window_rows(log, agent, window)
        per_state: dict[str, Counter] = {}
        for r in rows:
            per_state.setdefault(r.state, Counter())[r.activity] += 1
        entries = {
            s: PolicyEntry(min(c, key=lambda a: (-c[a], a)), sum(c.values()))
            for s, c in per_state.items()
        }
        tables.append(PolicyTable(agent, entries))
    return tables
