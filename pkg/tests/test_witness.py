"""Symbolic trees/forests: validation, labels, checks, files, DOT."""

import math

import pytest

from _fixtures import g1_branching_tree, g1_lasso_tree, g1_stall_tree
from permeq import (
    INF,
    MissingTreeError,
    SymbolicForest,
    SymbolicTree,
    TreeNode,
    WitnessFormatError,
    check_good_forest,
    check_good_tree,
    load_witness,
    save_witness,
    tree_penalty,
)
from permeq.witness import (
    TreeView,
    compute_index_space,
    compute_labels,
    compute_out_set,
    forest_from_dict,
    forest_gamma,
    forest_to_dot,
    format_index,
    tree_from_dict,
    tree_to_dict,
    tree_to_dot,
    validate_tree,
)


def _tree(root, **nodes):
    return SymbolicTree(root=root, nodes=dict(nodes))


# -- structural validation ----------------------------------------------------


def test_validate_good_trees(g1, g2, main_tree):
    assert validate_tree(g2, main_tree) == []
    assert validate_tree(g1, g1_lasso_tree()) == []
    assert validate_tree(g1, g1_branching_tree()) == []


@pytest.mark.parametrize("tree, fragment", [
    (_tree("zz", a=TreeNode("v0", children=("a",))), "root 'zz' is not a node"),
    (_tree("a", a=TreeNode("vx", children=("a",))), "unknown vertex"),
    (_tree("a", a=TreeNode("v0", children=("b",), leaf_links=("a",)),
           b=TreeNode("v1", leaf_links=("b",))), "both children and leaf links"),
    (_tree("a", a=TreeNode("v0")), "leaf without leaf links"),
    (_tree("a", a=TreeNode("v0", children=("zz",))), "unknown child 'zz'"),
    (_tree("a", a=TreeNode("v0", children=("b", "c")),
           b=TreeNode("v0", children=("c",)),
           c=TreeNode("v1", leaf_links=("c",))), "several parents"),
    (_tree("a", a=TreeNode("v1", children=("b",)),
           b=TreeNode("v0", leaf_links=("a",))), "not a game edge"),
    (_tree("a", a=TreeNode("v0", children=("b", "c")),
           b=TreeNode("v1", leaf_links=("b",)),
           c=TreeNode("v1", leaf_links=("c",))), "two children on the same vertex"),
    (_tree("a", a=TreeNode("v0", children=("b",)),
           b=TreeNode("v0", children=("a",))), "root has a parent"),
    (_tree("a", a=TreeNode("v0", children=("b",)),
           b=TreeNode("v0", leaf_links=("a",)),
           c=TreeNode("v1", leaf_links=("c",))), "unreachable from the root"),
    (_tree("a", a=TreeNode("v0", children=("b",)),
           b=TreeNode("v0", leaf_links=("zz",))), "links to unknown node 'zz'"),
    (_tree("a", a=TreeNode("v0", children=("b", "c")),
           b=TreeNode("v0", leaf_links=("c",)),
           c=TreeNode("v1", children=("d",)),
           d=TreeNode("v1", leaf_links=("c",))), "not a proper ancestor"),
    (_tree("a", a=TreeNode("v0", children=("b",)),
           b=TreeNode("v1", children=("c",)),
           c=TreeNode("v1", leaf_links=("a",))), "leaf link 'c'->'a' is not a game edge"),
])
def test_validate_catches(g1, tree, fragment):
    assert any(fragment in p for p in validate_tree(g1, tree)), \
        validate_tree(g1, tree)


def test_leaf_cannot_link_itself(g1):
    # a node is not its own proper ancestor
    tree = _tree("a", a=TreeNode("v0", children=("b",)),
                 b=TreeNode("v0", leaf_links=("b",)))
    assert any("not a proper ancestor" in p for p in validate_tree(g1, tree))


def test_duplicate_link_vertices(g2):
    tree = _tree("a", a=TreeNode("v3", children=("b",)),
                 b=TreeNode("v3", leaf_links=("a", "a")))
    assert any("two links onto the same vertex" in p
               for p in validate_tree(g2, tree))


# -- labels ---------------------------------------------------------------


def test_labels_on_main_tree(g2, main_tree):
    labels = compute_labels(g2, main_tree)
    assert labels.problems == []
    assert labels.winners["n0"] == frozenset()
    assert labels.winners["n1"] == frozenset()
    assert labels.winners["n3"] == frozenset({1})
    assert labels.penalty["n1"] == {1: 1, 2: 0}   # v5 blocked at the root
    assert labels.penalty["n3"] == {1: 2, 2: 0}   # v4 blocked at n1 too
    assert labels.penalty["n4"] == {1: 1, 2: 0}   # nothing blocked at v2


def test_labels_pre_winners(g2, main_tree):
    labels = compute_labels(g2, main_tree, pre_winners=frozenset({2}))
    assert labels.winners["n0"] == frozenset({2})
    assert labels.winners["n3"] == frozenset({1, 2})


def test_link_winner_mismatch(g2):
    # v0 -> v5 -> v6 folds onto the root, but v6 made both players win
    tree = _tree("x0", x0=TreeNode("v0", children=("x1",)),
                 x1=TreeNode("v5", children=("x2",)),
                 x2=TreeNode("v6", leaf_links=("x0",)))
    assert validate_tree(g2, tree) == []
    labels = compute_labels(g2, tree)
    assert labels.problems == [
        "leaf 'x2' links to 'x0' with different winner set ([] vs [1, 2])"]


def test_link_penalty_mismatch_only_when_tracked(g1):
    # the second v0 sits at spent penalty 1, the root at 0
    tree = _tree("e0", e0=TreeNode("v0", children=("e1",)),
                 e1=TreeNode("v0", children=("e2", "e3")),
                 e2=TreeNode("v0", leaf_links=("e0",)),
                 e3=TreeNode("v1", children=("e4",)),
                 e4=TreeNode("v1", leaf_links=("e3",)))
    assert validate_tree(g1, tree) == []
    assert compute_labels(g1, tree).problems == []
    tracked = compute_labels(g1, tree, tracked=frozenset({1}))
    assert tracked.problems == [
        "leaf 'e2' links to 'e0' with different penalty for player 1 (0 vs 1)"]


# -- penalties -------------------------------------------------------------


def test_tree_penalty_values(g1, g2, main_tree):
    assert tree_penalty(g2, main_tree, 1) == 2
    assert tree_penalty(g2, main_tree, 2) == 0
    assert tree_penalty(g1, g1_lasso_tree(), 1) == 1
    assert tree_penalty(g1, g1_stall_tree(), 1) == INF


def test_tree_penalty_rejects_malformed(g1):
    broken = _tree("a", a=TreeNode("v0", children=("zz",)))
    with pytest.raises(WitnessFormatError, match="unknown child"):
        tree_penalty(g1, broken, 1)


def test_penalty_int_not_float(g2, main_tree):
    view = TreeView(g2, main_tree)
    pens = view.penalties()
    assert pens == {1: 2, 2: 0}
    assert all(isinstance(v, int) for v in pens.values())


# -- masks and resistance ----------------------------------------------------


def test_masks_on_branching_tree(g1):
    view = TreeView(g1, g1_branching_tree())
    k = view.row["b0"]
    assert view.wins_some_mask(1)[k] == 1
    assert view.wins_all_mask(1)[k] == 0
    assert view.wins_all_mask(1)[view.row["b2"]] == 1
    assert view.internal_resistance_violations() == [
        "node 'b0': owner 1 wins some but not all plays below a branching node"]


def test_winning_ok_modes(g1):
    lasso = TreeView(g1, g1_lasso_tree())
    assert lasso.winning_ok(frozenset({1}), "weak")
    assert lasso.winning_ok(frozenset({1}), "strong")
    branching = TreeView(g1, g1_branching_tree())
    assert branching.winning_ok(frozenset({1}), "weak")
    assert not branching.winning_ok(frozenset({1}), "strong")
    stall = TreeView(g1, g1_stall_tree())
    assert not stall.winning_ok(frozenset({1}), "weak")
    with pytest.raises(ValueError, match="unknown winning mode"):
        lasso.winning_ok(frozenset({1}), "sometimes")


# -- whole-tree verdicts ------------------------------------------------------


def test_check_good_tree_accepts_main(g2, main_tree):
    report = check_good_tree(g2, main_tree)
    assert report.good
    assert report.all_problems() == []
    assert report.penalties == {1: 2, 2: 0}
    assert (1, "v5", frozenset()) in report.demanded


def test_check_good_tree_rejects_stall(g1):
    report = check_good_tree(g1, g1_stall_tree())
    assert not report.good
    assert len(report.deviation_violations) == 2
    assert "blocks 'v0'->'v1'" in report.deviation_violations[0]
    assert report.penalties == {1: INF}


def test_check_good_tree_rejects_branching(g1):
    report = check_good_tree(g1, g1_branching_tree())
    assert not report.good
    assert len(report.resistance_violations) == 1
    # the stalling leaf also blocks the winning move
    assert len(report.deviation_violations) == 1


def test_check_good_tree_structural_failure(g1):
    report = check_good_tree(g1, _tree("a", a=TreeNode("v0", children=("zz",))))
    assert not report.good and report.problems and report.penalties == {}


# -- index spaces ----------------------------------------------------------


def test_out_set_of_main_tree(g2, main_tree):
    out = compute_out_set(g2, main_tree)
    assert (1, "v5", frozenset()) in out
    assert (1, "v4", frozenset({2})) in out
    assert (2, "v6", frozenset({1, 2})) in out
    assert out <= compute_index_space(g2)


def test_index_space_g1(g1):
    # the target vertex never leads back, so only two contexts exist
    assert compute_index_space(g1) == frozenset({
        (1, "v0", frozenset()), (1, "v1", frozenset({1}))})


def test_format_index():
    assert format_index((1, "v0", frozenset())) == "(1, v0, {})"
    assert format_index((2, "v6", frozenset({2, 1}))) == "(2, v6, {1,2})"


# -- forests ---------------------------------------------------------------


def _g1_punish_tree():
    return _tree("w0", w0=TreeNode("v0", children=("w1",)),
                 w1=TreeNode("v1", children=("w2",)),
                 w2=TreeNode("v1", leaf_links=("w1",)))


def _g1_won_tree():
    return _tree("q0", q0=TreeNode("v1", children=("q1",)),
                 q1=TreeNode("v1", leaf_links=("q0",)))


def test_good_g1_forest(g1):
    forest = SymbolicForest(main=g1_lasso_tree(), trees={
        (1, "v0", frozenset()): _g1_punish_tree(),
    })
    report = check_good_forest(g1, forest)
    assert report.good
    assert report.main_penalties == {1: 1}
    assert report.retaliation_penalties == {1: 1}
    assert report.out_indices == [(1, "v0", frozenset()),
                                  (1, "v1", frozenset({1}))]
    assert report.out_missing == [(1, "v1", frozenset({1}))]


def test_tracked_retaliation_demands_out_trees(g1):
    forest = SymbolicForest(main=g1_lasso_tree(), trees={
        (1, "v0", frozenset()): _g1_punish_tree(),
    })
    report = check_good_forest(g1, forest, retaliation_tracked=frozenset({1}))
    assert not report.good
    assert report.missing == [(1, "v1", frozenset({1}))]
    forest.trees[(1, "v1", frozenset({1}))] = _g1_won_tree()
    report = check_good_forest(g1, forest, retaliation_tracked=frozenset({1}))
    assert report.good
    assert report.retaliation_penalties == {1: 1}


def test_missing_punishment_tree_flagged(g1):
    forest = SymbolicForest(main=g1_lasso_tree(), trees={})
    report = check_good_forest(g1, forest)
    assert not report.good
    assert report.missing == [(1, "v0", frozenset())]
    assert "missing tree (1, v0, {})" in report.all_problems()


def test_bad_forest_verdict(g2, bad_forest):
    report = check_good_forest(g2, bad_forest)
    assert not report.good
    assert report.problems == []
    assert report.resistance_violations == []
    assert report.missing == []
    assert report.deviation_violations == [
        "tree (1, v5, {}): node 'r0': blocks 'v5'->'v6' although the deviation "
        "is winning for player 2 and some play below loses for them",
        "tree (1, v5, {}): node 'r1': blocks 'v5'->'v6' although the deviation "
        "is winning for player 2 and some play below loses for them",
    ]
    assert report.main_penalties == {1: 2, 2: 0}
    assert report.retaliation_penalties == {1: 0, 2: INF}
    assert (2, "v6", frozenset({1, 2})) in report.out_missing


def test_forest_rejects_misrooted_tree(g2, main_tree):
    forest = SymbolicForest(main=main_tree, trees={
        (1, "v5", frozenset()): _tree("z", z=TreeNode("v3", children=("z2",)),
                                      z2=TreeNode("v3", leaf_links=("z",))),
    })
    report = check_good_forest(g2, forest)
    assert not report.good
    assert any("rooted at 'v3', not at 'v5'" in p for p in report.problems)


def test_forest_gamma_missing_tree_message(g2):
    gamma = forest_gamma(g2, {})
    assert gamma(1, "v5", frozenset({1})) == 1   # winners need no tree
    with pytest.raises(MissingTreeError) as err:
        gamma(1, "v5", frozenset())
    assert str(err.value) == \
        "no tree for deviation of player 1 to v5 after winners []"
    assert err.value.index == (1, "v5", frozenset())


# -- serialization ----------------------------------------------------------


def test_tree_round_trip(tmp_path, g2, main_tree):
    path = tmp_path / "tree.json"
    save_witness(main_tree, str(path))
    text = path.read_text()
    assert text.endswith("\n") and '  "root"' in text
    again = load_witness(str(path))
    assert isinstance(again, SymbolicTree)
    assert tree_to_dict(again) == tree_to_dict(main_tree)
    assert check_good_tree(g2, again).good


def test_forest_round_trip(tmp_path, g2, bad_forest):
    path = tmp_path / "forest.json"
    save_witness(bad_forest, str(path))
    again = load_witness(str(path))
    assert isinstance(again, SymbolicForest)
    assert set(again.trees) == set(bad_forest.trees)
    assert tree_to_dict(again.main) == tree_to_dict(bad_forest.main)


@pytest.mark.parametrize("data, fragment", [
    ([], "must be an object"),
    ({"root": "a"}, "needs 'root' and 'nodes'"),
    ({"root": "a", "nodes": [], "extra": 1}, "unknown keys"),
    ({"root": "a", "nodes": []}, "tree has no nodes"),
    ({"root": "a", "nodes": [{"id": "a", "vertex": "v0"},
                             {"id": "a", "vertex": "v0"}]}, "duplicate node id"),
    ({"root": "a", "nodes": [{"vertex": "v0"}]}, "need 'id' and 'vertex'"),
    ({"root": "a", "nodes": [{"id": "a", "vertex": "v0", "kids": []}]},
     "unknown keys in node entry"),
])
def test_tree_from_dict_errors(data, fragment):
    with pytest.raises(WitnessFormatError, match=fragment):
        tree_from_dict(data)


def test_forest_from_dict_errors():
    with pytest.raises(WitnessFormatError, match="needs a 'main' tree"):
        forest_from_dict({"trees": []})
    base = {"root": "a", "nodes": [{"id": "a", "vertex": "v0",
                                    "leaf_links": ["a"]}]}
    entry = {"player": 1, "vertex": "v0", "winners": [], "tree": base}
    with pytest.raises(WitnessFormatError, match="misses 'winners'"):
        forest_from_dict({"main": base, "trees": [
            {"player": 1, "vertex": "v0", "tree": base}]})
    with pytest.raises(WitnessFormatError, match="duplicate tree for index"):
        forest_from_dict({"main": base, "trees": [entry, dict(entry)]})


def test_load_witness_bad_json(tmp_path):
    path = tmp_path / "junk.json"
    path.write_text("{nope")
    with pytest.raises(WitnessFormatError, match="invalid JSON"):
        load_witness(str(path))


# -- DOT -------------------------------------------------------------------


def test_tree_dot(g1):
    dot = tree_to_dot(g1, g1_lasso_tree())
    assert dot.startswith("digraph witness {")
    assert 'label="v0 | {-} | p1=0"' in dot
    assert 'label="v1 | {1} | p1=1"' in dot
    assert dot.count("[style=dashed]") == 1
    solid = [ln for ln in dot.splitlines()
             if "->" in ln and "dashed" not in ln]
    assert len(solid) == 2


def test_forest_dot(g1):
    forest = SymbolicForest(main=g1_lasso_tree(), trees={
        (1, "v0", frozenset()): _g1_punish_tree(),
    })
    dot = forest_to_dot(g1, forest)
    assert "subgraph cluster_main" in dot
    assert 'label="main";' in dot
    assert "subgraph cluster_t0" in dot
    assert 'label="(1, v0, {})";' in dot
