"""Team configurations: roles with home positions and offensiveness traits.

Field coordinates are normalised to [0, 1] x [0, 1]; a team defends x = 0
and attacks toward x = 1.  The canonical home positions below are fixture
constants (no coordinates exist for the original teams).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..entropy import simple_social_entropy
from ..errors import ValidationError
from ..society import Agent, Society

GOALIE = "Goalie"

ROLE_HOMES: dict[str, tuple[float, float]] = {
    GOALIE: (0.05, 0.50),
    "L Defender": (0.25, 0.20),
    "C Defender": (0.22, 0.50),
    "R Defender": (0.25, 0.80),
    "L Midfield": (0.50, 0.15),
    "CL Midfield": (0.48, 0.38),
    "C Midfield": (0.48, 0.50),
    "CR Midfield": (0.48, 0.62),
    "R Midfield": (0.50, 0.85),
    "L Forward": (0.75, 0.20),
    "C Forward": (0.78, 0.50),
    "R Forward": (0.75, 0.80),
}

# the eleven distinct positions used by the full-formation teams
FULL_FORMATION = (
    GOALIE,
    "L Defender",
    "C Defender",
    "R Defender",
    "L Midfield",
    "CL Midfield",
    "CR Midfield",
    "R Midfield",
    "L Forward",
    "C Forward",
    "R Forward",
)

BUILTIN_NAMES = ("Kids0", "Agr", "Kids2", "Kids1", "Kids3", "Control")


@dataclass(frozen=True)
class Role:
    name: str
    home: tuple[float, float]

    def __post_init__(self):
        if self.name not in ROLE_HOMES:
            raise ValidationError(f"unknown role {self.name!r}")
        x, y = (float(v) for v in self.home)
        if not (0 <= x <= 1 and 0 <= y <= 1):
            raise ValidationError(f"role {self.name}: home {self.home} outside the field")
        object.__setattr__(self, "home", (x, y))

    @classmethod
    def canonical(cls, name: str) -> "Role":
        if name not in ROLE_HOMES:
            raise ValidationError(f"unknown role {name!r}")
        return cls(name, ROLE_HOMES[name])

    @property
    def is_goalie(self) -> bool:
        return self.name == GOALIE


@dataclass(frozen=True)
class TraitProfile:
    offensiveness: float

    def __post_init__(self):
        if not (math.isfinite(self.offensiveness) and 0 <= self.offensiveness <= 1):
            raise ValidationError(f"offensiveness must lie in [0, 1], got {self.offensiveness}")


@dataclass(frozen=True)
class PlayerConfig:
    id: str
    role: Role
    traits: TraitProfile


@dataclass(frozen=True)
class TeamConfig:
    name: str
    players: tuple[PlayerConfig, ...]

    def __post_init__(self):
        players = tuple(self.players)
        object.__setattr__(self, "players", players)
        if not players:
            raise ValidationError(f"team {self.name!r} has no players")
        ids = [p.id for p in players]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"team {self.name!r} has duplicate player ids")
        goalies = sum(p.role.is_goalie for p in players)
        if goalies != 1:
            raise ValidationError(f"team {self.name!r} must have exactly one goalie, has {goalies}")

    def __len__(self):
        return len(self.players)

    def society(self) -> Society:
        """Players as a society with ``role``, ``position`` and ``offensiveness`` attributes."""
        agents = []
        for p in self.players:
            x, y = p.role.home
            agents.append(
                Agent(
                    p.id,
                    {
                        "role": p.role.name,
                        "position": f"{x!r},{y!r}",
                        "offensiveness": repr(p.traits.offensiveness),
                    },
                    (x, y, p.traits.offensiveness),
                )
            )
        return Society(tuple(agents), ("home_x", "home_y", "offensiveness"))


def positional_entropy(team: TeamConfig) -> float:
    """Simple social entropy of the partition by distinct home position."""
    return simple_social_entropy(team.society(), "position")


def trait_entropy(team: TeamConfig) -> float:
    """Simple social entropy of the partition by offensiveness setting.

    A goalie whose setting differs from every field cluster forms its own
    cluster.
    """
    return simple_social_entropy(team.society(), "offensiveness")


def offensiveness_clusters(team: TeamConfig) -> list[float]:
    return sorted({p.traits.offensiveness for p in team.players})


# ------------------------------------------------------------------- files


def team_from_dict(doc: Mapping) -> TeamConfig:
    if not isinstance(doc, Mapping) or "name" not in doc or "players" not in doc:
        raise ValidationError("team document needs 'name' and 'players'")
    players = []
    for k, p in enumerate(doc["players"]):
        where = f"players[{k}]"
        try:
            role_name = p["role"]
            home = p.get("home")
            role = Role(role_name, tuple(home)) if home is not None else Role.canonical(role_name)
            players.append(PlayerConfig(str(p["id"]), role, TraitProfile(float(p["offensiveness"]))))
        except KeyError as exc:
            raise ValidationError(f"{where}: missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{where}: {exc}") from None
    return TeamConfig(str(doc["name"]), tuple(players))


def team_to_dict(team: TeamConfig) -> dict:
    return {
        "name": team.name,
        "players": [
            {
                "id": p.id,
                "role": p.role.name,
                "home": list(p.role.home),
                "offensiveness": p.traits.offensiveness,
            }
            for p in team.players
        ],
    }


def load_team(path: str | Path) -> TeamConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return team_from_dict(doc)


def builtin_team(name: str) -> TeamConfig:
    if name not in BUILTIN_NAMES:
        raise ValidationError(f"unknown team {name!r}; built-ins are {', '.join(BUILTIN_NAMES)}")
    text = (resources.files("masdiv") / "data" / "teams" / f"{name}.json").read_text()
    return team_from_dict(json.loads(text))


def builtin_teams() -> list[TeamConfig]:
    """The six experiment teams in table order."""
    return [builtin_team(n) for n in BUILTIN_NAMES]


def resolve_team(name_or_path: str) -> TeamConfig:
    if name_or_path in BUILTIN_NAMES:
        return builtin_team(name_or_path)
    path = Path(name_or_path)
    if path.is_file():
        return load_team(path)
    raise ValidationError(f"unknown team {name_or_path!r}")
