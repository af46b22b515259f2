"""Agent societies: agents, partitions into classes and class proportions.

Every metric in the package consumes a :class:`Society`.  Agents carry
categorical attributes (exact-match strings) and a fixed-width numeric
feature vector used for taxonomic distances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError

PROPORTION_TOL = 1e-12


@dataclass(frozen=True)
class Agent:
    id: str
    attributes: Mapping[str, str] = field(default_factory=dict)
    features: tuple[float, ...] = ()

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError(f"agent id must be a non-empty string, got {self.id!r}")
        attrs = {str(k): str(v) for k, v in dict(self.attributes).items()}
        object.__setattr__(self, "attributes", attrs)
        feats = tuple(float(x) for x in self.features)
        for x in feats:
            if not math.isfinite(x):
                raise ValidationError(f"agent {self.id!r}: non-finite feature value {x}")
        object.__setattr__(self, "features", feats)

    def __hash__(self):
        return hash((self.id, tuple(sorted(self.attributes.items())), self.features))


@dataclass(frozen=True)
class Society:
    agents: tuple[Agent, ...]
    dimension_names: tuple[str, ...] = ()

    def __post_init__(self):
        agents = tuple(self.agents)
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "dimension_names", tuple(self.dimension_names))
        seen = set()
        for a in agents:
            if a.id in seen:
                raise ValidationError(f"duplicate agent id {a.id!r}")
            seen.add(a.id)
        if not agents:
            return
        names = set(agents[0].attributes)
        width = len(agents[0].features)
        for a in agents[1:]:
            if set(a.attributes) != names:
                raise ValidationError(
                    f"agent {a.id!r} has attributes {sorted(a.attributes)}, expected {sorted(names)}"
                )
            if len(a.features) != width:
                raise ValidationError(
                    f"agent {a.id!r} has {len(a.features)} features, expected {width}"
                )
        if self.dimension_names and len(self.dimension_names) != width:
            raise ValidationError(
                f"{len(self.dimension_names)} dimension names for {width} features"
            )

    def __len__(self):
        return len(self.agents)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.agents)

    @property
    def attribute_names(self) -> frozenset[str]:
        return frozenset(self.agents[0].attributes) if self.agents else frozenset()

    def feature_matrix(self):
        import numpy as np

        return np.array([a.features for a in self.agents], dtype=float).reshape(
            len(self.agents), len(self.agents[0].features) if self.agents else 0
        )

    def subset(self, ids: Iterable[str]) -> "Society":
        keep = set(ids)
        return Society(tuple(a for a in self.agents if a.id in keep), self.dimension_names)


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks of agent ids; block order and in-block order are kept."""

    blocks: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: set[str] = set()
        for b in blocks:
            if not b:
                raise ValidationError("partition contains an empty block")
            for i in b:
                if i in seen:
                    raise ValidationError(f"agent {i!r} appears in more than one block")
                seen.add(i)

    def __len__(self):
        return len(self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def validate(self, society: Society) -> None:
        members = {i for b in self.blocks for i in b}
        ids = set(society.ids)
        if members != ids:
            missing = sorted(ids - members)
            extra = sorted(members - ids)
            raise ValidationError(
                f"partition does not cover the society (missing {missing}, unknown {extra})"
            )

    def as_sets(self) -> set[frozenset[str]]:
        return {frozenset(b) for b in self.blocks}

    def refines(self, other: "Partition") -> bool:
        """True when every block of ``self`` lies inside one block of ``other``."""
        owner = {i: k for k, b in enumerate(other.blocks) for i in b}
        return all(len({owner[i] for i in b}) == 1 for b in self.blocks)


@dataclass(frozen=True)
class Distribution:
    proportions: tuple[float, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        p = tuple(float(x) for x in self.proportions)
        object.__setattr__(self, "proportions", p)
        if not p:
            raise ValidationError("empty distribution")
        for x in p:
            if not math.isfinite(x) or x < 0:
                raise ValidationError(f"invalid proportion {x}")
        if abs(math.fsum(p) - 1.0) > PROPORTION_TOL:
            raise ValidationError(f"proportions sum to {math.fsum(p)!r}, not 1")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(p):
                raise ValidationError("labels and proportions differ in length")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_counts(cls, counts: Sequence[float], labels=None) -> "Distribution":
        total = math.fsum(counts)
        if total <= 0:
            raise ValidationError("counts must have a positive total")
        return cls(tuple(c / total for c in counts), labels)

    def __len__(self):
        return len(self.proportions)


def partition_by_attribute(society: Society, attribute: str) -> Partition:
    """Group agents by exact value of ``attribute``, blocks in first-seen order."""
    if not society.agents:
        return Partition(())
    if attribute not in society.attribute_names:
        raise ValidationError(f"unknown attribute {attribute!r}")
    groups: dict[str, list[str]] = {}
    for a in society.agents:
        groups.setdefault(a.attributes[attribute], []).append(a.id)
    return Partition(tuple(tuple(g) for g in groups.values()))


def partition_to_distribution(partition: Partition, society: Society) -> Distribution:
    if not society.agents:
        raise ValidationError("empty society")
    partition.validate(society)
    n = len(society)
    return Distribution(tuple(len(b) / n for b in partition.blocks))


# ---------------------------------------------------------------- file I/O


def society_from_dict(doc: Mapping) -> Society:
    if not isinstance(doc, Mapping):
        raise ValidationError("society document must be an object")
    for key in ("dimension_names", "agents"):
        if key not in doc:
            raise ValidationError(f"missing field {key!r}")
    unknown = set(doc) - {"dimension_names", "agents"}
    if unknown:
        raise ValidationError(f"unknown fields {sorted(unknown)}")
    dims = doc["dimension_names"]
    if not isinstance(dims, list) or not all(isinstance(d, str) for d in dims):
        raise ValidationError("dimension_names must be a list of strings")
    if not isinstance(doc["agents"], list):
        raise ValidationError("agents must be a list")
    agents = []
    for k, entry in enumerate(doc["agents"]):
        where = f"agents[{k}]"
        if not isinstance(entry, Mapping):
            raise ValidationError(f"{where}: expected an object")
        if "id" not in entry:
            raise ValidationError(f"{where}: missing field 'id'")
        attrs = entry.get("attributes", {})
        feats = entry.get("features", [])
        if not isinstance(attrs, Mapping):
            raise ValidationError(f"{where}.attributes: expected an object")
        if not isinstance(feats, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in feats
        ):
            raise ValidationError(f"{where}.features: expected a list of numbers")
        if len(feats) != len(dims):
            raise ValidationError(
                f"{where}.features: {len(feats)} values for {len(dims)} dimensions"
            )
        try:
            agents.append(Agent(str(entry["id"]), attrs, tuple(feats)))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
    return Society(tuple(agents), tuple(dims))


def society_to_dict(society: Society) -> dict:
    return {
        "dimension_names": list(society.dimension_names),
        "agents": [
            {"id": a.id, "attributes": dict(a.attributes), "features": list(a.features)}
            for a in society.agents
        ],
    }


def load_society(path: str | Path) -> Society:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return society_from_dict(doc)


def save_society(society: Society, path: str | Path) -> None:
    Path(path).write_text(json.dumps(society_to_dict(society), indent=2) + "\n")
