"""Zone-based possession model for two teams driven by the soccer automaton.

The field is cut into ``ZONES`` strips along x and ``LANES`` lanes along
y; the goals sit on the centre lane.  Each team sees the field
in its own frame (own goal at x = 0), so both sides run exactly the same
arithmetic.  Every tick draws one uniform ``u``; outcomes favourable to
the first team occupy the low end of [0, 1).  Running ``(b, a)`` with the
antithetic stream (``mirror=True``, draws ``1 - u``) therefore replays
``(a, b)`` with the roles swapped, and the score difference flips sign.

A player's effective position is its home shifted toward the opponent goal
in proportion to its offensiveness.  Influence at a point is the sum of a
Gaussian kernel over live players, weighted by the activity each player
performs that tick.  Rows are logged before the ball is contested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ValidationError
from .automaton import GOAL, KICKOFF, SOCCER_AUTOMATON, automaton_step
from .log import Event, LogRow, MatchLog
from .rng import XorShift64Star
from .teams import TeamConfig

ZONES = 7
LANES = 3
SIGMA = 0.18
OFFENSE_SHIFT = 0.3
PACE = 0.3  # chance per tick that the ball is actually contested
GOALIE_WEIGHT = 4.0
DEFAULT_TICKS = 1200

STATE_WEIGHT = {
    "idle": 0.5,
    "home": 1.0,
    "intercept": 1.5,
    "mark": 1.4,
    "support": 1.2,
    "dribble": 1.5,
    "kick": 1.5,
}

# strip index 0 = own goal line, 1..ZONES = field strips, ZONES + 1 = opponent goal line
N_STRIPS = ZONES + 2
CENTER = ((ZONES + 1) // 2, LANES // 2)


def _point(i: int, lane: int) -> tuple[float, float]:
    if i == 0:
        x = 0.0
    elif i == ZONES + 1:
        x = 1.0
    else:
        x = (i - 0.5) / ZONES
    return x, (lane + 0.5) / LANES


def _own(point: tuple[int, int], side: int) -> tuple[int, int]:
    """Point in the frame of ``side`` (0 = first team, 1 = second)."""
    i, lane = point
    return point if side == 0 else (ZONES + 1 - i, LANES - 1 - lane)


@dataclass
class _Player:
    agent_id: str
    side: int
    index: int
    home: tuple[float, float]
    offensiveness: float
    goalie: bool
    state: str = "idle"
    alive: bool = True

    def __post_init__(self):
        self.place()

    def place(self):
        x, y = self.home
        self.pos = (x + OFFENSE_SHIFT * self.offensiveness * (1.0 - x), y)
        px, py = self.pos
        self.kernel = {}
        for i in range(N_STRIPS):
            for lane in range(LANES):
                qx, qy = _point(i, lane)
                self.kernel[(i, lane)] = math.exp(
                    -((px - qx) ** 2 + (py - qy) ** 2) / (2 * SIGMA * SIGMA)
                )

    def frame_pos(self) -> tuple[float, float]:
        """Position in the first team's frame."""
        x, y = self.pos
        return (x, y) if self.side == 0 else (1.0 - x, 1.0 - y)


@dataclass(frozen=True)
class Malfunction:
    tick: int
    agent: str
    substitute: str | None = None
    shift: float = 0.5
    delay: int = 0


class Match:
    """A match in progress; :meth:`run` plays it to the end and returns the log."""

    def __init__(
        self,
        team_a: TeamConfig,
        team_b: TeamConfig,
        seed: int,
        ticks: int = DEFAULT_TICKS,
        mirror: bool = False,
    ):
        if ticks < 1:
            raise ValidationError("ticks must be at least 1")
        self.ticks = ticks
        self.mirror = mirror
        self.rng = XorShift64Star(seed)
        self.players: list[_Player] = []
        for side, (prefix, team) in enumerate((("a", team_a), ("b", team_b))):
            for k, p in enumerate(team.players):
                self.players.append(
                    _Player(
                        f"{prefix}.{p.id}",
                        side,
                        k,
                        p.role.home,
                        p.traits.offensiveness,
                        p.role.is_goalie,
                    )
                )
        self.by_id = {p.agent_id: p for p in self.players}
        self.log = MatchLog(
            SOCCER_AUTOMATON.logged_states,
            tuple(self.by_id),
            {"a": team_a.name, "b": team_b.name},
            seed,
        )
        self.tick = 0
        self.ball = CENTER  # point index, first team's frame
        self.possession: int | None = None
        self.restart = [KICKOFF]
        self.malfunctions: list[Malfunction] = []

    # ----------------------------------------------------------- events

    def inject_malfunction(
        self,
        tick: int,
        agent: str,
        substitute: str | None = None,
        shift: float = 0.5,
        delay: int = 0,
    ) -> Malfunction:
        if agent not in self.by_id:
            raise ValidationError(f"unknown agent {agent!r}")
        if not self.tick <= tick < self.ticks:
            raise ValidationError(f"tick {tick} outside the remaining run [{self.tick}, {self.ticks})")
        if any(m.agent == agent for m in self.malfunctions) or not self.by_id[agent].alive:
            raise ValidationError(f"agent {agent!r} already malfunctions")
        if substitute is not None:
            if substitute not in self.by_id or substitute == agent:
                raise ValidationError(f"invalid substitute {substitute!r}")
            if self.by_id[substitute].side != self.by_id[agent].side:
                raise ValidationError("substitute must play for the same team")
        if not 0 < shift <= 1:
            raise ValidationError("shift must lie in (0, 1]")
        m = Malfunction(tick, agent, substitute, shift, delay)
        self.malfunctions.append(m)
        return m

    def _apply_malfunctions(self):
        for m in self.malfunctions:
            if m.tick == self.tick:
                self.by_id[m.agent].alive = False
                self.log.events.append(Event(self.tick, "malfunction", m.agent))
            if m.substitute is not None and m.tick + m.delay == self.tick:
                sub, dead = self.by_id[m.substitute], self.by_id[m.agent]
                if sub.alive:
                    sx, sy = sub.home
                    dx, dy = dead.home
                    sub.home = (sx + m.shift * (dx - sx), sy + m.shift * (dy - sy))
                    sub.place()
                    self.log.events.append(Event(self.tick, "compensate", m.substitute))

    # ------------------------------------------------------------- model

    def _influence(self, side: int, point: tuple[int, int]) -> float:
        own = _own(point, side)
        total = 0.0
        for p in self.players:
            if p.side == side and p.alive:
                w = STATE_WEIGHT[p.state]
                if p.goalie and own[0] == 0:
                    w *= GOALIE_WEIGHT
                total += w * p.kernel[own]
        return total

    def _closest(self, side: int, point: tuple[int, int]) -> _Player | None:
        own = _own(point, side)
        best = None
        for p in self.players:
            if p.side == side and p.alive and (best is None or p.kernel[own] > best.kernel[own]):
                best = p
        return best

    def _utilities(self, p: _Player, carrier, chaser) -> dict[str, float]:
        k = p.kernel[_own(self.ball, p.side)]
        ours = self.possession == p.side
        theirs = self.possession is not None and not ours
        shooting = _own(self.ball, p.side)[0] == ZONES
        return {
            "hold": 0.05,
            "reposition": 0.1 + 0.4 * (1.0 - k),
            "intercept": (1.0 if p is chaser else 0.3 * k) if theirs else 0.0,
            "mark": k * (1.2 - p.offensiveness) if theirs else 0.0,
            "support": k * (0.4 + p.offensiveness) if ours else 0.0,
            "dribble": 2.0 if p is carrier else 0.0,
            "kick": 3.0 if p is carrier and shooting else 0.0,
        }

    def _ratio(self, att: int, point) -> float:
        ia, id_ = self._influence(att, point), self._influence(1 - att, point)
        return ia / (ia + id_) if ia + id_ > 0 else 0.5

    def _best_target(self, att: int):
        """Next point toward goal in the lane (current or adjacent) that suits the attacker.

        Candidates are ranked in the attacker's own frame so both sides break
        ties identically.
        """
        i, lane = _own(self.ball, att)
        if i + 1 == ZONES + 1:
            target = _own((ZONES + 1, LANES // 2), att)
            return target, self._ratio(att, target)
        best = None
        for own_lane in range(max(0, lane - 1), min(LANES, lane + 2)):
            target = _own((i + 1, own_lane), att)
            q = self._ratio(att, target)
            if best is None or q > best[1]:
                best = (target, q)
        return best

    def _contest(self, u: float):
        att = self.possession
        target, q = self._best_target(att)
        adv, lose = PACE * q, PACE * (1.0 - q)
        if att == 0:
            advanced, lost = u < adv, u >= 1.0 - lose
        else:
            lost, advanced = u < lose, u >= 1.0 - adv
        if advanced:
            if target[0] in (0, ZONES + 1):
                side = "a" if att == 0 else "b"
                self.log.score[side] += 1
                self.log.events.append(Event(self.tick, "score", side))
                self.ball = CENTER
                self.possession = 1 - att
                self.restart = [GOAL, KICKOFF]
            else:
                self.ball = target
        elif lost:
            self.possession = 1 - att

    def step(self):
        if self.tick >= self.ticks:
            raise ValidationError("match already finished")
        self._apply_malfunctions()
        u = self.rng.uniform()
        if self.mirror:
            u = 1.0 - u
        events = [self.restart.pop(0)] if self.restart else []
        if events:
            self.log.events.append(Event(self.tick, events[0]))
        if self.possession is None:
            self.possession = 0 if u < 0.5 else 1
        carriers = [self._closest(s, self.ball) for s in (0, 1)]
        for p in self.players:
            if not p.alive:
                continue
            ours = self.possession == p.side
            carrier = carriers[p.side] if ours else None
            chaser = carriers[p.side] if not ours else None
            d = automaton_step(SOCCER_AUTOMATON, p.state, events, self._utilities(p, carrier, chaser))
            p.state = d.next_state
            x, y = p.frame_pos()
            self.log.add(LogRow(self.tick, p.agent_id, d.logged_state, d.activity, x, y))
        if not events:
            self._contest(u)
        self.tick += 1
        self.log.ticks = self.tick

    def run(self) -> MatchLog:
        while self.tick < self.ticks:
            self.step()
        return self.log


def run_match(
    team_a: TeamConfig,
    team_b: TeamConfig,
    seed: int,
    ticks: int = DEFAULT_TICKS,
    mirror: bool = False,
) -> MatchLog:
    return Match(team_a, team_b, seed, ticks, mirror).run()


def inject_malfunction(match: Match, tick: int, agent: str, **kwargs) -> Match:
    """Schedule a malfunction on a match in progress (see :meth:`Match.inject_malfunction`)."""
    match.inject_malfunction(tick, agent, **kwargs)
    return match
