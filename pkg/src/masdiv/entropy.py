"""Information entropy, simple social entropy and the probability-of-difference index.

All entropies are in bits (base-2 logarithm) with ``0 * log 0 = 0``.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

from .errors import ValidationError
from .society import (
    Distribution,
    Partition,
    Society,
    partition_by_attribute,
    partition_to_distribution,
)


def shannon_entropy(dist: Distribution | Sequence[float]) -> float:
    """Base-2 Shannon entropy of a proportion vector.

    Plain sequences are validated the same way as a :class:`Distribution`
    (non-negative, summing to one within 1e-12).
    """
    if not isinstance(dist, Distribution):
        dist = Distribution(tuple(dist))
    h = -math.fsum(p * math.log2(p) for p in dist.proportions if p > 0)
    # a single class gives -0.0
    return h if h > 0 else 0.0


def entropy_of_counts(counts: Sequence[float]) -> float:
    return shannon_entropy(Distribution.from_counts(counts))


def simple_social_entropy(society: Society, attribute: str) -> float:
    part = partition_by_attribute(society, attribute)
    return shannon_entropy(partition_to_distribution(part, society))


def grouping_decomposition(
    society: Society, partition: Partition, attribute: str
) -> tuple[float, list[tuple[float, float]]]:
    """Split the class entropy into a between-block part and weighted within-block parts.

    Returns ``(between, [(w_i, H_i), ...])`` with ``w_i = |block_i| / n`` and
    ``H_i`` the entropy of ``attribute`` inside block ``i``.  When every class
    lies inside a single block, ``between + sum(w_i * H_i)`` equals
    :func:`simple_social_entropy`.
    """
    partition.validate(society)
    if attribute not in society.attribute_names:
        raise ValidationError(f"unknown attribute {attribute!r}")
    between = shannon_entropy(partition_to_distribution(partition, society))
    n = len(society)
    within = []
    for block in partition.blocks:
        sub = society.subset(block)
        within.append((len(block) / n, simple_social_entropy(sub, attribute)))
    return between, within


def _joint_classes(society: Society, dimensions: Sequence[str]) -> Counter:
    if not dimensions:
        raise ValidationError("at least one dimension is required")
    names = society.attribute_names
    for d in dimensions:
        if d not in names:
            raise ValidationError(f"unknown attribute {d!r}")
    return Counter(tuple(a.attributes[d] for d in dimensions) for a in society.agents)


def usa_today_index(society: Society, dimensions: Sequence[str]) -> float:
    """Probability that two agents drawn with replacement differ on some dimension.

    Two draws agree only when they match on every named dimension, so the
    index is ``1 - sum(q_c**2)`` over joint attribute combinations ``c``.
    """
    if not society.agents:
        raise ValidationError("empty society")
    counts = _joint_classes(society, dimensions)
    n = len(society)
    same = math.fsum((c / n) ** 2 for c in counts.values())
    return max(0.0, 1.0 - same)


def usa_today_recursion_gap(
    sub_societies: Sequence[Society], dimensions: Sequence[str]
) -> tuple[float, float]:
    """Index of the merged society next to the size-weighted sum of sub-society indices.

    A recursive index would make both numbers equal for every split; this
    one does not.
    """
    if not sub_societies:
        raise ValidationError("no sub-societies given")
    schema = sub_societies[0].attribute_names
    for s in sub_societies[1:]:
        if s.attribute_names != schema:
            raise ValidationError(
                f"schema mismatch: {sorted(s.attribute_names)} vs {sorted(schema)}"
            )
    merged: Counter = Counter()
    total = 0
    weighted = 0.0
    for s in sub_societies:
        merged.update(_joint_classes(s, dimensions))
        total += len(s)
    for s in sub_societies:
        weighted += len(s) / total * usa_today_index(s, dimensions)
    combined = max(0.0, 1.0 - math.fsum((c / total) ** 2 for c in merged.values()))
    return combined, weighted
