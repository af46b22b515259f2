"""Taxonomic distance, level-h clustering and hierarchic social entropy.

Clustering is agglomerative complete-linkage.  Merge heights are
non-decreasing, so cutting the dendrogram at ``h`` gives the clustering
"at taxonomic level h", and the entropy-vs-h curve is piecewise constant
with breakpoints at the merge heights.  The hierarchic entropy is the exact
area under that curve.
"""

from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entropy import entropy_of_counts
from .errors import ValidationError
from .society import Partition, Society


def taxonomic_distance(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise ValidationError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return math.sqrt(math.fsum((float(x) - float(y)) ** 2 for x, y in zip(a, b)))


@dataclass(frozen=True)
class DistanceMatrix:
    d: np.ndarray
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValidationError(f"distance matrix must be square, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValidationError("distance matrix has non-finite entries")
        if np.any(d < 0):
            raise ValidationError("distance matrix has negative entries")
        if np.any(np.diag(d) != 0):
            raise ValidationError("distance matrix diagonal must be zero")
        if not np.array_equal(d, d.T):
            raise ValidationError("distance matrix is not symmetric")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        ids = tuple(self.ids) or tuple(str(i) for i in range(d.shape[0]))
        if len(ids) != d.shape[0]:
            raise ValidationError("ids length does not match matrix size")
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def normalized(self) -> "DistanceMatrix":
        """Divide every distance by the largest one (no-op for a zero matrix)."""
        top = float(self.d.max()) if self.n else 0.0
        if top == 0:
            return self
        return DistanceMatrix(self.d / top, self.ids)

    def scaled(self, c: float) -> "DistanceMatrix":
        return DistanceMatrix(self.d * c, self.ids)


def distance_matrix(society: Society, normalize: bool = False) -> DistanceMatrix:
    if not society.agents:
        raise ValidationError("empty society")
    x = society.feature_matrix()
    if x.shape[1] == 0:
        raise ValidationError("agents have no feature dimensions")
    n = len(society)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = taxonomic_distance(x[i], x[j])
    dm = DistanceMatrix(d, society.ids)
    return dm.normalized() if normalize else dm


@dataclass(frozen=True)
class Merge:
    height: float
    left: tuple[int, ...]
    right: tuple[int, ...]


def complete_linkage(dm: DistanceMatrix) -> list[Merge]:
    """All n-1 merges of complete-linkage clustering, in merge order.

    Ties on height go to the pair whose (smaller, larger) lowest member
    indices is lexicographically smallest.
    """
    n = dm.n
    clusters: dict[int, list[int]] = {i: [i] for i in range(n)}  # keyed by lowest member
    # upper triangle only; row-major argmin then breaks ties lexicographically
    link = np.triu(dm.d, k=1) + np.tril(np.full((n, n), np.inf))
    merges = []
    while len(clusters) > 1:
        a, b = divmod(int(np.argmin(link)), n)
        h = float(link[a, b])
        left, right = clusters.pop(a), clusters.pop(b)
        merges.append(Merge(h, tuple(left), tuple(right)))
        # complete linkage: distance to the union is the larger of the two
        far = np.maximum(np.minimum(link[a, :], link[:, a]), np.minimum(link[b, :], link[:, b]))
        link[a, a + 1 :] = far[a + 1 :]
        link[: a, a] = far[:a]
        link[b, :] = np.inf
        link[:, b] = np.inf
        clusters[a] = sorted(left + right)
    return merges


def _cut(n: int, merges: Sequence[Merge], h: float) -> list[list[int]]:
    owner = list(range(n))
    groups: dict[int, list[int]] = {i: [i] for i in range(n)}
    for m in merges:
        if m.height > h:
            break
        a, b = owner[m.left[0]], owner[m.right[0]]
        keep, drop = min(a, b), max(a, b)
        for i in groups[drop]:
            owner[i] = keep
        groups[keep] = sorted(groups[keep] + groups.pop(drop))
    return [groups[k] for k in sorted(groups)]


def cluster_at_level(dm: DistanceMatrix, h: float) -> Partition:
    """Clusters whose complete-linkage merge height is at most ``h``."""
    if not h >= 0:
        raise ValidationError(f"level must be non-negative, got {h}")
    groups = _cut(dm.n, complete_linkage(dm), h)
    return Partition(tuple(tuple(dm.ids[i] for i in g) for g in groups))


@dataclass(frozen=True)
class EntropyCurve:
    """Piecewise-constant H(R, h).

    ``values[k]`` holds on ``[breakpoints[k], breakpoints[k+1])`` and the last
    value holds from the last breakpoint on; ``breakpoints[0]`` is 0.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def at(self, h: float) -> float:
        if h < 0:
            raise ValidationError("level must be non-negative")
        return self.values[bisect_right(self.breakpoints, h) - 1]

    def area(self) -> float:
        b, v = self.breakpoints, self.values
        return math.fsum(v[k] * (b[k + 1] - b[k]) for k in range(len(b) - 1))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["h_start", "h_end", "entropy"])
        for k, val in enumerate(self.values):
            end = self.breakpoints[k + 1] if k + 1 < len(self.breakpoints) else math.inf
            w.writerow([f"{self.breakpoints[k]:.9g}", f"{end:.9g}", f"{val:.9g}"])
        return out.getvalue()


def entropy_curve(dm: DistanceMatrix) -> EntropyCurve:
    n = dm.n
    if n == 0:
        raise ValidationError("empty distance matrix")
    merges = complete_linkage(dm)
    sizes = {i: 1 for i in range(n)}
    owner = list(range(n))
    members = {i: [i] for i in range(n)}
    breakpoints = [0.0]
    values = [entropy_of_counts([1] * n)]
    for k, m in enumerate(merges):
        a, b = owner[m.left[0]], owner[m.right[0]]
        keep, drop = min(a, b), max(a, b)
        sizes[keep] += sizes.pop(drop)
        for i in members[drop]:
            owner[i] = keep
        members[keep] += members.pop(drop)
        # equal heights collapse into one breakpoint
        if k + 1 < len(merges) and merges[k + 1].height == m.height:
            continue
        val = entropy_of_counts(list(sizes.values()))
        if m.height == breakpoints[-1]:
            values[-1] = val
        else:
            breakpoints.append(m.height)
            values.append(val)
    return EntropyCurve(tuple(breakpoints), tuple(values))


def hierarchic_entropy(dm: DistanceMatrix) -> float:
    """Area under H(R, h); zero beyond the last merge, so the sum is exact."""
    return entropy_curve(dm).area()


def dendrogram_csv(dm: DistanceMatrix) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["merge_index", "height", "left_block", "right_block"])
    for k, m in enumerate(complete_linkage(dm)):
        w.writerow(
            [
                k,
                f"{m.height:.9g}",
                " ".join(dm.ids[i] for i in m.left),
                " ".join(dm.ids[i] for i in m.right),
            ]
        )
    return out.getvalue()
