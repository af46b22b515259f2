import json
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from masdiv.society import Agent, Society, society_from_dict

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")

DATA = Path(str(resources.files("masdiv") / "data"))

# criterion number -> (passed, description); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def data_path(*parts) -> Path:
    return DATA.joinpath(*parts)


def load_fixture_society(name: str) -> Society:
    return society_from_dict(json.loads(data_path("societies", f"{name}.json").read_text()))


def random_society(rng: np.random.Generator, n: int, dims: int = 2, levels: int = 3) -> Society:
    feats = rng.random((n, dims))
    agents = [
        Agent(
            f"x{i:03d}",
            {"c": f"k{rng.integers(levels)}", "d": f"m{rng.integers(2)}"},
            tuple(float(v) for v in feats[i]),
        )
        for i in range(n)
    ]
    return Society(tuple(agents), tuple(f"f{k}" for k in range(dims)))


@pytest.fixture
def block_star() -> Society:
    return load_fixture_society("block_star")


@pytest.fixture
def two_pairs() -> Society:
    return load_fixture_society("two_pairs")


@pytest.fixture
def single_agent() -> Society:
    return load_fixture_society("single_agent")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {k:2d}: {text}")
