from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from ..errors import ValidationError

LOG_COLUMNS = ["tick", "agent_id", "state_id", "activity_id", "x", "y"]


class LogRow(NamedTuple):
    tick: int
    agent: str
    state: str
    activity: str
    x: float
    y: float


class Event(NamedTuple):
    tick: int
    kind: str
    detail: str = ""


@dataclass
class MatchLog:
    """Tick-level snapshot log.  One row per live agent per tick, ticks from 0.

    Positions are in the first team's frame (it attacks toward x = 1).
    Agent ids carry the side as a prefix: ``a.p01``, ``b.p01``.
    """

    states: tuple[str, ...]
    agent_ids: tuple[str, ...]
    teams: dict[str, str]
    seed: int
    ticks: int = 0
    rows: list[LogRow] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    score: dict[str, int] = field(default_factory=lambda: {"a": 0, "b": 0})
    _by_agent: dict[str, list[LogRow]] | None = field(default=None, repr=False, compare=False)

    def add(self, row: LogRow) -> None:
        self.rows.append(row)
        self._by_agent = None

    def rows_for(self, agent: str) -> list[LogRow]:
        if self._by_agent is None:
            idx: dict[str, list[LogRow]] = {a: [] for a in self.agent_ids}
            for r in self.rows:
                idx[r.agent].append(r)
            self._by_agent = idx
        if agent not in self._by_agent:
            raise ValidationError(f"unknown agent {agent!r}")
        return self._by_agent[agent]

    def rows_at(self, tick: int) -> list[LogRow]:
        return [r for r in self.rows if r.tick == tick]

    def side_agents(self, side: str) -> list[str]:
        return [a for a in self.agent_ids if a.startswith(side + ".")]

    @property
    def score_difference(self) -> int:
        """Goals of side ``a`` minus goals of side ``b``."""
        return self.score["a"] - self.score["b"]

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for r in self.rows:
            w.writerow([r.tick, r.agent, r.state, r.activity, f"{r.x:.9g}", f"{r.y:.9g}"])
        return out.getvalue()

    def summary(self) -> dict:
        return {
            "teams": self.teams,
            "seed": self.seed,
            "ticks": self.ticks,
            "score": self.score,
            "states": list(self.states),
            "agents": list(self.agent_ids),
            "events": [list(e) for e in self.events],
        }

    def save(self, csv_path: str | Path) -> Path:
        """Write the row CSV and a ``.summary.json`` sidecar next to it."""
        csv_path = Path(csv_path)
        csv_path.write_text(self.to_csv())
        sidecar = csv_path.with_suffix(".summary.json")
        sidecar.write_text(json.dumps(self.summary(), indent=2) + "\n")
        return sidecar


def load_log(csv_path: str | Path) -> MatchLog:
    csv_path = Path(csv_path)
    sidecar = csv_path.with_suffix(".summary.json")
    try:
        meta = json.loads(sidecar.read_text())
    except FileNotFoundError:
        raise ValidationError(f"{csv_path}: missing sidecar {sidecar.name}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{sidecar}: line {exc.lineno}: {exc.msg}") from None
    try:
        log = MatchLog(
            tuple(meta["states"]),
            tuple(meta["agents"]),
            dict(meta["teams"]),
            int(meta["seed"]),
            int(meta["ticks"]),
            score=dict(meta["score"]),
            events=[Event(*e) for e in meta.get("events", [])],
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{sidecar}: malformed summary ({exc})") from None
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LOG_COLUMNS:
            raise ValidationError(f"{csv_path}: line 1: header must be {','.join(LOG_COLUMNS)}")
        known = set(log.agent_ids)
        states = set(log.states)
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(LOG_COLUMNS):
                raise ValidationError(f"{csv_path}: line {lineno}: expected 6 fields")
            try:
                row = LogRow(int(rec[0]), rec[1], rec[2], rec[3], float(rec[4]), float(rec[5]))
            except ValueError as exc:
                raise ValidationError(f"{csv_path}: line {lineno}: {exc}") from None
            if row.agent not in known:
                raise ValidationError(f"{csv_path}: line {lineno}: unknown agent {row.agent!r}")
            if row.state not in states:
                raise ValidationError(f"{csv_path}: line {lineno}: unknown state {row.state!r}")
            log.rows.append(row)
    return log
