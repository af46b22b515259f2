"""Situated automaton with mandatory reactive transitions and utility-based deliberation.

Each state performs one activity.  A special action may be logged under a
virtual state of its own while the automaton stays where it is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from ..errors import ValidationError


@dataclass(frozen=True)
class Candidate:
    activity: str
    next_state: str
    virtual_state: str | None = None  # logged instead of next_state for special actions


class Decision(NamedTuple):
    activity: str
    next_state: str
    reactive: bool
    logged_state: str


@dataclass(frozen=True)
class AutomatonSpec:
    states: tuple[str, ...]
    reactive: Mapping[tuple[str, str], Candidate]
    deliberative: Mapping[str, tuple[Candidate, ...]]
    virtual_states: tuple[str, ...] = field(default=())

    def __post_init__(self):
        known = set(self.states)
        for (state, _), cand in self.reactive.items():
            if state not in known or cand.next_state not in known:
                raise ValidationError(f"reactive transition from {state!r} uses an unknown state")
        for state in self.states:
            cands = self.deliberative.get(state, ())
            if not cands:
                raise ValidationError(f"state {state!r} has no deliberative candidate")
            for c in cands:
                if c.next_state not in known:
                    raise ValidationError(f"{state!r} -> unknown state {c.next_state!r}")
                if c.virtual_state is not None and c.virtual_state not in self.virtual_states:
                    raise ValidationError(f"undeclared virtual state {c.virtual_state!r}")

    @property
    def logged_states(self) -> tuple[str, ...]:
        """Every state that can appear in a log, real ones first."""
        return self.states + self.virtual_states


def automaton_step(
    spec: AutomatonSpec,
    state: str,
    events: Iterable[str],
    utilities: Mapping[str, float] | Sequence[float],
) -> Decision:
    """One cycle: the first event with a reactive transition wins outright;
    otherwise the candidate with the highest utility (lowest index on ties).

    ``utilities`` is either aligned with the state's candidates or maps
    activity names to utilities (missing activities never win over a listed one).
    """
    if state not in spec.deliberative:
        raise ValidationError(f"unknown state {state!r}")
    for event in events:
        cand = spec.reactive.get((state, event))
        if cand is not None:
            return Decision(cand.activity, cand.next_state, True, cand.next_state)
    cands = spec.deliberative[state]
    if isinstance(utilities, Mapping):
        scores = [utilities.get(c.activity, -math.inf) for c in cands]
    else:
        scores = list(utilities)
        if len(scores) != len(cands):
            raise ValidationError(
                f"{len(scores)} utilities for {len(cands)} candidates in state {state!r}"
            )
    best = max(range(len(cands)), key=lambda i: (scores[i], -i))
    c = cands[best]
    return Decision(c.activity, c.next_state, False, c.virtual_state or c.next_state)


# ------------------------------------------------------- soccer automaton

ACTIVITY_OF = {
    "idle": "hold",
    "home": "reposition",
    "intercept": "intercept",
    "mark": "mark",
    "support": "support",
    "dribble": "dribble",
}
KICKOFF = "kickoff"
GOAL = "goal"


def _soccer_spec() -> AutomatonSpec:
    states = tuple(ACTIVITY_OF)
    base = tuple(Candidate(act, st) for st, act in ACTIVITY_OF.items())
    deliberative = {s: base for s in states}
    deliberative["dribble"] = base + (Candidate("kick", "dribble", "kick"),)
    reactive = {}
    for s in states:
        reactive[(s, KICKOFF)] = Candidate("hold", "idle")
        reactive[(s, GOAL)] = Candidate("reposition", "home")
    return AutomatonSpec(states, reactive, deliberative, ("kick",))


SOCCER_AUTOMATON = _soccer_spec()
