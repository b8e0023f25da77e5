"""Acceptance battery.

One test per shipped criterion (the conftest hook prints the per-criterion
verdict table at the end of the run).  Counts asserted on the seeded corpus
are determinism pins: they catch silent behaviour drift in the generator,
the enumerators and the solvers.
"""

import random

import pytest

from _fixtures import g2_main_tree, make_g2, random_game
from permeq import (
    INF,
    Objective,
    check_good_forest,
    check_good_tree,
    solve_ne,
    solve_spe,
    tree_penalty,
)
from permeq.machines import TreeMachine, extract_multistrategy_spe
from permeq.ne import NO_OBJECTIVE, _finite_caps, height_bound, validate_tree_witness
from permeq.oracle import (
    all_pattern_trees,
    brute_force_tree_penalty,
    enumerate_small_witnesses,
    oracle_permissive_check,
)


@pytest.fixture(scope="module")
def corpus_trees(corpus77):
    """Every pattern tree of height <= 5 over the seeded corpus."""
    return [(game, list(all_pattern_trees(game, height_cap=5)))
            for game in corpus77]


@pytest.fixture(scope="module")
def spe_g2():
    return solve_spe(make_g2(), {1: INF, 2: 11}, retaliation={1: 1, 2: INF})


@pytest.fixture(scope="module")
def solver_runs(corpus77):
    """Shared solve battery: every YES must self-validate (c11) and every
    emitted witness must respect the height bound (c12)."""
    runs = []
    mains = ({1: 0, 2: 0}, {1: 1, 2: INF}, {1: INF, 2: INF})
    objectives = (NO_OBJECTIVE, Objective.weak([1]), Objective.strong([2]))
    for game in corpus77[:60]:
        for main in mains:
            for objective in objectives:
                report = solve_ne(game, main, objective)
                runs.append(("ne", game, main, objective, report))
    rng = random.Random(4242)
    games = [random_game(rng, nmax=3) for _ in range(40)]
    for game in games:
        for main in ({1: 0, 2: 0}, {1: INF, 2: INF}):
            report = solve_spe(game, main)
            runs.append(("spe", game, main, NO_OBJECTIVE, report))
    return runs


def test_c01_example_tree_and_solve(g2, main_tree):
    assert tree_penalty(g2, main_tree, 1) == 2
    assert tree_penalty(g2, main_tree, 2) == 0
    assert check_good_tree(g2, main_tree).good
    report = solve_ne(g2, {1: 2, 2: 0})
    assert report.answer
    penalties = validate_tree_witness(g2, report.witness, {1: 2, 2: 0},
                                      NO_OBJECTIVE, report.bound)
    assert penalties[1] <= 2 and penalties[2] == 0


def test_c02_one_blocking_equilibrium(g2):
    report = solve_ne(g2, {1: 1, 2: INF})
    assert report.answer
    penalties = validate_tree_witness(g2, report.witness, {1: 1, 2: INF},
                                      NO_OBJECTIVE, report.bound)
    # a zero-blocking witness exists as well, so the answer certifies the
    # bound, not equality with it
    assert penalties[1] <= 1


def test_c03_tree_equilibrium_not_subgame_stable(g2, bad_forest):
    report = check_good_forest(g2, bad_forest)
    assert not report.good
    assert report.problems == [] and report.resistance_violations == []
    assert len(report.deviation_violations) == 2
    assert all("blocks 'v5'->'v6'" in v and "player 2" in v
               for v in report.deviation_violations)


def test_c04_main_retaliation_trade_off(g2, spe_g2):
    assert spe_g2.answer
    assert spe_g2.main_penalties[2] <= 11
    assert spe_g2.retaliation_penalties[1] <= 1
    check = check_good_forest(g2, spe_g2.witness,
                              main_tracked=frozenset({2}),
                              retaliation_tracked=frozenset({1}))
    assert check.good
    assert check.main_penalties[2] <= 11
    assert check.retaliation_penalties[1] <= 1
    machine = extract_multistrategy_spe(g2, spe_g2.witness)
    assert oracle_permissive_check(g2, machine, "spe") is None


def test_c05_strong_winning_threshold(g2):
    strong = Objective.strong([1, 2])
    assert not solve_spe(g2, {1: 1, 2: INF}, objective=strong).answer
    report = solve_spe(g2, {1: 2, 2: INF}, objective=strong)
    assert report.answer
    check = check_good_forest(g2, report.witness,
                              main_tracked=frozenset({1}))
    assert check.good and check.main_penalties[1] <= 2
    from permeq.witness import TreeView
    view = TreeView(g2, report.witness.main, g2.initial_winners)
    assert view.winning_ok(frozenset({1, 2}), "strong")


def test_c06_zero_retaliation(g2):
    report = solve_spe(g2, {1: INF, 2: INF}, retaliation={1: 0, 2: INF})
    assert report.answer
    assert report.retaliation_penalties[1] == 0
    check = check_good_forest(g2, report.witness,
                              retaliation_tracked=frozenset({1}))
    assert check.good and check.retaliation_penalties[1] == 0


def test_c07_small_example_frontier(g1):
    assert not solve_spe(g1, {1: 0}).answer
    report = solve_spe(g1, {1: 1})
    assert report.answer
    # the NO at threshold 0 makes the measured penalty exactly minimal
    assert report.main_penalties == {1: 1}
    assert check_good_forest(g1, report.witness,
                             main_tracked=frozenset({1})).good


def test_c08_tree_checker_matches_oracle(corpus_trees):
    total = good = 0
    for game, trees in corpus_trees:
        for tree in trees:
            total += 1
            verdict = check_good_tree(game, tree).good
            machine = TreeMachine(game, tree)
            clean = oracle_permissive_check(game, machine, "ne") is None
            assert verdict == clean
            good += verdict
    assert total == 707 and good == 691


def test_c09_solver_matches_enumeration(corpus77):
    combos = yes = 0
    for game in corpus77:
        for m1 in (0, 1, 2, INF):
            for m2 in (0, 1, 2, INF):
                combos += 1
                main = {1: m1, 2: m2}
                report = solve_ne(game, main)
                bound = height_bound(game,
                                     game.all_players - game.initial_winners,
                                     _finite_caps(main))
                enumerated = enumerate_small_witnesses(game, height_cap=bound,
                                                       main=main)
                assert report.answer == (enumerated is not None)
                yes += report.answer
    assert combos == 3200 and yes == 2414


def test_c10_symbolic_penalties_match_brute_force(g1, g2, corpus_trees):
    from _fixtures import g1_lasso_tree, g1_stall_tree
    fixtures = [(g2, g2_main_tree()), (g1, g1_lasso_tree()),
                (g1, g1_stall_tree())]
    for game, tree in fixtures:
        for player in sorted(game.all_players):
            assert tree_penalty(game, tree, player) == \
                brute_force_tree_penalty(game, tree, player)
    pairs = 0
    saw_inf = False
    for game, trees in corpus_trees:
        for tree in trees:
            for player in (1, 2):
                pairs += 1
                symbolic = tree_penalty(game, tree, player)
                assert symbolic == brute_force_tree_penalty(game, tree, player)
                saw_inf = saw_inf or symbolic == INF
    assert pairs == 1414 and pairs >= 500 and saw_inf


def test_c11_yes_answers_self_validate(solver_runs):
    yes = 0
    for concept, game, main, objective, report in solver_runs:
        if not report.answer:
            continue
        yes += 1
        if concept == "ne":
            penalties = validate_tree_witness(game, report.witness, main,
                                              objective, report.bound)
        else:
            check = check_good_forest(
                game, report.witness,
                main_tracked=frozenset(_finite_caps(main)))
            assert check.good
            penalties = check.main_penalties
        assert all(penalties[i] <= b for i, b in main.items())
    assert yes == 386


def test_c12_witness_heights_within_bound(solver_runs, spe_g2):
    checked = 0
    for concept, game, main, objective, report in solver_runs:
        if not report.answer:
            continue
        if concept == "ne":
            trees = [report.witness]
        else:
            trees = [report.witness.main, *report.witness.trees.values()]
        for tree in trees:
            checked += 1
            assert tree.height() <= report.bound
    for tree in [spe_g2.witness.main, *spe_g2.witness.trees.values()]:
        checked += 1
        assert tree.height() <= spe_g2.bound
    assert checked > 400
