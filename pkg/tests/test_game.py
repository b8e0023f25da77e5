"""Game parsing, queries and threshold parsing."""

import math

import pytest
from hypothesis import given, settings

from _fixtures import G2_DATA, make_g1, make_g2, small_games
from permeq import GameFormatError, INF, Lasso, ReachabilityGame, parse_thresholds
from permeq.game import visit_set


def test_parse_g2_structure(g2):
    assert g2.players == 2
    assert len(g2.vertices) == 10
    assert g2.owner["v5"] == 2 and g2.owner["v3"] == 1
    assert g2.successors("v0") == ("v1", "v2", "v5")
    assert g2.edge_weight("v5", "v5") == 10
    assert g2.edge_weight("v0", "v1") == 1  # default weight
    assert not g2.has_edge("v0", "v3")
    assert g2.targets[1] == frozenset({"v3", "v6", "v8", "v9"})


def test_targets_at_and_initial_winners(g2):
    assert g2.targets_at("v6") == frozenset({1, 2})
    assert g2.targets_at("v0") == frozenset()
    assert g2.initial_winners == frozenset()
    shifted = dict(G2_DATA, init="v6")
    assert ReachabilityGame.from_dict(shifted).initial_winners == frozenset({1, 2})


def test_round_trip_dict(g2):
    again = ReachabilityGame.from_dict(g2.to_dict())
    assert again.owner == g2.owner
    assert again.succ == g2.succ
    assert again.targets == g2.targets
    assert again.init == g2.init
    # explicit weights survive, defaults stay implicit
    assert again.edge_weight("v5", "v5") == 10


@settings(max_examples=40, deadline=None)
@given(small_games(max_vertices=4))
def test_round_trip_random(game):
    again = ReachabilityGame.from_dict(game.to_dict())
    assert again.succ == game.succ
    assert all(again.edge_weight(v, u) == game.edge_weight(v, u)
               for v in game.vertices for u in game.successors(v))


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d["vertices"].append({"id": "v0", "owner": 1}), "duplicate vertex"),
    (lambda d: d["vertices"].append({"id": "vx", "owner": 1}), "no successor"),
    (lambda d: d["edges"].append({"from": "v0", "to": "v1"}), "duplicate edge"),
    (lambda d: d["edges"].append({"from": "v0", "to": "zz"}), "not a declared vertex"),
    (lambda d: d["edges"].append({"from": "v0", "to": "v1", "w": 2}), "unknown keys"),
    (lambda d: d.update(init="zz"), "initial vertex"),
    (lambda d: d.update(targets={"x": ["v1"]}), "not a player number"),
    (lambda d: d.update(targets={"7": ["v1"]}), "unknown player"),
    (lambda d: d.update(targets={"1": ["zz"]}), "is not a vertex"),
    (lambda d: d["vertices"].__setitem__(0, {"id": "v0", "owner": 9}), "unknown player"),
    (lambda d: d.update(extra=1), "unknown keys"),
])
def test_format_errors(mutate, fragment):
    data = {
        "players": 2,
        "vertices": [{"id": "v0", "owner": 1}, {"id": "v1", "owner": 2}],
        "edges": [{"from": "v0", "to": "v1"}, {"from": "v1", "to": "v0"}],
        "targets": {"1": ["v1"]},
        "init": "v0",
    }
    mutate(data)
    with pytest.raises(GameFormatError, match=fragment):
        ReachabilityGame.from_dict(data)


def test_negative_weight_rejected():
    data = {
        "players": 1,
        "vertices": [{"id": "a", "owner": 1}],
        "edges": [{"from": "a", "to": "a", "weight": -1}],
        "targets": {},
        "init": "a",
    }
    with pytest.raises(GameFormatError, match="invalid weight"):
        ReachabilityGame.from_dict(data)


def test_visit_set_skips_position_zero(g2):
    # starting on a target vertex does not count; later visits do
    assert visit_set(g2, ["v6"]) == frozenset()
    assert visit_set(g2, ["v6", "v0", "v5", "v6"]) == frozenset({1, 2})
    assert visit_set(g2, ["v0", "v1", "v4"]) == frozenset({2})


def test_lasso_winners_count_start(g2):
    assert Lasso(("v6",), ("v0", "v5")).winners(g2) == frozenset({1, 2})
    assert Lasso(("v0",), ("v5",)).winners(g2) == frozenset()
    assert Lasso((), ("v8",)).winners(g2) == frozenset({1})


def test_parse_thresholds_defaults_and_inf(g2):
    assert parse_thresholds(g2, None) == {1: INF, 2: INF}
    assert parse_thresholds(g2, "") == {1: INF, 2: INF}
    got = parse_thresholds(g2, "1=2, 2=inf")
    assert got == {1: 2, 2: INF}
    assert isinstance(got[1], int)
    assert parse_thresholds(g2, "2=0")[2] == 0
    assert math.isinf(parse_thresholds(g2, "1=oo")[1])


@pytest.mark.parametrize("text", ["1", "1=x", "9=1", "1=-2"])
def test_parse_thresholds_errors(text, g2):
    with pytest.raises(GameFormatError):
        parse_thresholds(g2, text)


def test_single_player_game_parses():
    g1 = make_g1()
    assert g1.all_players == frozenset({1})
    assert g1.successors("v0") == ("v0", "v1")


def test_g1_g2_fixture_helpers_are_fresh():
    assert make_g2() is not make_g2()
    assert make_g1().to_dict() == make_g1().to_dict()
