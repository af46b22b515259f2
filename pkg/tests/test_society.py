import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from masdiv.errors import ValidationError
from masdiv.society import (
    Agent,
    Distribution,
    Partition,
    Society,
    load_society,
    partition_by_attribute,
    partition_to_distribution,
    save_society,
    society_from_dict,
)


def _shapes(values):
    return Society(tuple(Agent(f"r{i}", {"shape": v}, (0.0,)) for i, v in enumerate(values)))


def test_block_and_three_stars(block_star):
    part = partition_by_attribute(block_star, "shape")
    assert sorted(part.sizes) == [1, 3]
    dist = partition_to_distribution(part, block_star)
    assert sorted(dist.proportions) == [0.25, 0.75]


def test_single_value_gives_one_block():
    s = _shapes(["star"] * 5)
    part = partition_by_attribute(s, "shape")
    assert part.sizes == (5,)
    assert partition_to_distribution(part, s).proportions == (1.0,)


def test_eleven_distinct_positions():
    s = _shapes([f"p{i}" for i in range(11)])
    assert partition_by_attribute(s, "shape").sizes == (1,) * 11


def test_agr_role_counts():
    s = _shapes(["goalie"] + ["def"] * 3 + ["fwd"] * 8)
    dist = partition_to_distribution(partition_by_attribute(s, "shape"), s)
    assert dist.proportions == pytest.approx((1 / 12, 3 / 12, 8 / 12), abs=1e-15)


def test_unknown_attribute_is_named():
    with pytest.raises(ValidationError, match="colour"):
        partition_by_attribute(_shapes(["a"]), "colour")


def test_empty_society_distribution_errors():
    with pytest.raises(ValidationError):
        partition_to_distribution(Partition(()), Society(()))


@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=40), st.randoms())
def test_partition_properties(values, rnd):
    s = _shapes(values)
    part = partition_by_attribute(s, "shape")
    dist = partition_to_distribution(part, s)
    assert abs(math.fsum(dist.proportions) - 1) <= 1e-12
    assert len(part) == len(set(values))
    # idempotent
    assert partition_by_attribute(s, "shape") == part
    # permutation invariance of membership and of the proportion multiset
    agents = list(s.agents)
    rnd.shuffle(agents)
    shuffled = Society(tuple(agents))
    part2 = partition_by_attribute(shuffled, "shape")
    assert part2.as_sets() == part.as_sets()
    assert sorted(partition_to_distribution(part2, shuffled).proportions) == sorted(
        dist.proportions
    )


def test_society_invariants():
    with pytest.raises(ValidationError, match="duplicate"):
        Society((Agent("a"), Agent("a")))
    with pytest.raises(ValidationError, match="attributes"):
        Society((Agent("a", {"x": "1"}), Agent("b", {"y": "1"})))
    with pytest.raises(ValidationError, match="features"):
        Society((Agent("a", {}, (1.0,)), Agent("b", {}, (1.0, 2.0))))
    with pytest.raises(ValidationError, match="non-finite"):
        Agent("a", {}, (float("nan"),))


def test_partition_invariants():
    with pytest.raises(ValidationError, match="empty block"):
        Partition((("a",), ()))
    with pytest.raises(ValidationError, match="more than one block"):
        Partition((("a", "b"), ("b",)))
    s = _shapes(["x", "y"])
    with pytest.raises(ValidationError, match="cover"):
        Partition((("r0",),)).validate(s)
    fine = Partition((("r0",), ("r1",)))
    assert fine.refines(Partition((("r0", "r1"),)))
    assert not Partition((("r0", "r1"),)).refines(fine)


def test_distribution_validation():
    with pytest.raises(ValidationError):
        Distribution((0.5, 0.6))
    with pytest.raises(ValidationError):
        Distribution((1.5, -0.5))
    with pytest.raises(ValidationError):
        Distribution(())
    assert Distribution((0.5, 0.5 + 5e-13)).proportions[1] > 0.5
    assert Distribution.from_counts([1, 3]).proportions == (0.25, 0.75)


def test_json_round_trip(tmp_path, two_pairs):
    path = tmp_path / "s.json"
    save_society(two_pairs, path)
    assert load_society(path) == two_pairs


def test_json_diagnostics(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dimension_names": ["x"],\n "agents": [}')
    with pytest.raises(ValidationError, match="line 2"):
        load_society(bad)
    doc = {"dimension_names": ["x"], "agents": [{"id": "a", "features": [1.0, 2.0]}]}
    with pytest.raises(ValidationError, match=r"agents\[0\]\.features"):
        society_from_dict(doc)
    with pytest.raises(ValidationError, match="unknown fields"):
        society_from_dict({"dimension_names": [], "agents": [], "extra": 1})
    doc = {"dimension_names": ["x"], "agents": [{"id": "a", "features": [1]}, {"id": "a", "features": [2]}]}
    with pytest.raises(ValidationError, match="duplicate"):
        society_from_dict(doc)
    with pytest.raises(ValidationError, match="missing field 'id'"):
        society_from_dict({"dimension_names": [], "agents": [{}]})


def test_feature_matrix_shape():
    rng = np.random.default_rng(1)
    from conftest import random_society

    s = random_society(rng, 7, dims=3)
    assert s.feature_matrix().shape == (7, 3)
    assert json.dumps(list(s.ids))
