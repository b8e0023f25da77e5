"""Shared fixtures plus a terminal-summary hook that prints one PASS/FAIL
line per acceptance criterion (the tests named test_cNN_* in
test_acceptance.py)."""

import json
import random

import pytest

from _fixtures import (G1_DATA, G2_DATA, g2_bad_forest, g2_main_tree,
                       make_g1, make_g2, random_game)


@pytest.fixture
def g1():
    return make_g1()


@pytest.fixture
def g2():
    return make_g2()


@pytest.fixture
def main_tree():
    return g2_main_tree()


@pytest.fixture
def bad_forest():
    return g2_bad_forest()


@pytest.fixture(scope="session")
def g1_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("games") / "g1.json"
    path.write_text(json.dumps(G1_DATA))
    return str(path)


@pytest.fixture(scope="session")
def g2_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("games") / "g2.json"
    path.write_text(json.dumps(G2_DATA))
    return str(path)


@pytest.fixture(scope="session")
def corpus77():
    """The 200-game random corpus used by several acceptance criteria."""
    rng = random.Random(77)
    return [random_game(rng) for _ in range(200)]


# ---------------------------------------------------------------------------
# acceptance criteria summary

CRITERIA = [
    ("c01", "example-tree penalties and constrained solve"),
    ("c02", "one-blocking equilibrium found"),
    ("c03", "tree equilibrium is not subgame-stable"),
    ("c04", "main/retaliation trade-off on the large example"),
    ("c05", "strong-winning threshold frontier"),
    ("c06", "zero retaliation achievable"),
    ("c07", "small-example frontier with exact penalty"),
    ("c08", "tree checker agrees with machine-level oracle"),
    ("c09", "solver agrees with exhaustive enumeration"),
    ("c10", "symbolic penalties equal brute-force penalties"),
    ("c11", "every YES answer self-validates"),
    ("c12", "emitted witnesses respect the height bound"),
]
_DESCRIPTION = dict(CRITERIA)
_results: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1].split("[")[0]
    if not name.startswith("test_c"):
        return
    key = name[5:8]
    if key not in _DESCRIPTION:
        return
    if report.when == "call":
        _results[key] = _results.get(key, True) and report.passed
    elif report.failed:  # broken fixture counts as a failed criterion
        _results[key] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    hit = [key for key, _ in CRITERIA if key in _results]
    if not hit:
        return
    terminalreporter.section("acceptance criteria")
    for key in hit:
        verdict = "PASS" if _results[key] else "FAIL"
        terminalreporter.write_line(f"{key} {_DESCRIPTION[key]}: {verdict}")
