"""Symbolic trees and forests: the finite witnesses for permissive equilibria.

A symbolic tree describes a permissive multi-strategy from some vertex: each
node keeps a subset of the available moves (its children), and each leaf is
folded back onto ancestors via leaf links, one per kept move.  A symbolic
forest pairs a main tree with punishment trees indexed by deviation contexts
(player, vertex, winner set).

All semantic checks run on the finite unfolding graph whose edges are the
child edges plus the leaf links.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import graphcore
from .game import ReachabilityGame
from .zerosum import game_gamma

INF = math.inf

Index = tuple[int, str, frozenset[int]]

_TREE_KEYS = {"root", "nodes"}
_NODE_KEYS = {"id", "vertex", "children", "leaf_links"}
_FOREST_KEYS = {"main", "trees"}
_FOREST_ENTRY_KEYS = {"player", "vertex", "winners", "tree"}


class WitnessFormatError(ValueError):
    """Raised when a witness file is structurally unusable."""


class MissingTreeError(KeyError):
    """A deviation-value lookup needs a punishment tree the forest lacks."""

    def __init__(self, index: Index):
        super().__init__(index)
        self.index = index

    def __str__(self) -> str:
        p, u, winners = self.index
        return f"no tree for deviation of player {p} to {u} after winners {sorted(winners)}"


def format_index(index: Index) -> str:
    p, u, winners = index
    return f"({p}, {u}, {{{','.join(map(str, sorted(winners)))}}})"


@dataclass
class TreeNode:
    vertex: str
    children: tuple = ()
    leaf_links: tuple = ()


@dataclass
class SymbolicTree:
    root: object
    nodes: dict  # id -> TreeNode

    def parent_map(self) -> dict:
        parents = {}
        for nid, node in self.nodes.items():
            for c in node.children:
                parents[c] = nid
        return parents

    def depths(self) -> dict:
        out = {self.root: 0}
        stack = [self.root]
        while stack:
            nid = stack.pop()
            for c in self.nodes[nid].children:
                if c in self.nodes and c not in out:
                    out[c] = out[nid] + 1
                    stack.append(c)
        return out

    def height(self) -> int:
        return max(self.depths().values(), default=0)

    def __len__(self) -> int:
        return len(self.nodes)


def validate_tree(game: ReachabilityGame, tree: SymbolicTree) -> list[str]:
    """Structural validity of a symbolic tree over a game.  Returns all
    problems found (empty list means the tree is well-formed)."""
    problems: list[str] = []
    if tree.root not in tree.nodes:
        return [f"root {tree.root!r} is not a node"]
    parents: dict = {}
    for nid, node in tree.nodes.items():
        if node.vertex not in game.owner:
            problems.append(f"node {nid!r} sits on unknown vertex {node.vertex!r}")
            continue
        if node.children and node.leaf_links:
            problems.append(f"node {nid!r} has both children and leaf links")
        if not node.children and not node.leaf_links:
            problems.append(f"node {nid!r} is a leaf without leaf links")
        child_vertices = []
        for c in node.children:
            if c not in tree.nodes:
                problems.append(f"node {nid!r} references unknown child {c!r}")
                continue
            if c in parents:
                problems.append(f"node {c!r} has several parents")
            parents[c] = nid
            child_vertices.append(tree.nodes[c].vertex)
            if not game.has_edge(node.vertex, tree.nodes[c].vertex):
                problems.append(
                    f"child edge {nid!r}->{c!r} is not a game edge "
                    f"({node.vertex!r}->{tree.nodes[c].vertex!r})")
        if len(set(child_vertices)) != len(child_vertices):
            problems.append(f"node {nid!r} has two children on the same vertex")
    if tree.root in parents:
        problems.append("root has a parent")
    if problems:
        return problems
    # ancestor relation is only meaningful once the child structure is a tree
    depths = tree.depths()
    for nid in tree.nodes:
        if nid not in depths:
            problems.append(f"node {nid!r} is unreachable from the root")
    if problems:
        return problems
    for nid, node in tree.nodes.items():
        link_vertices = []
        for t in node.leaf_links:
            if t not in tree.nodes:
                problems.append(f"leaf {nid!r} links to unknown node {t!r}")
                continue
            anc = parents.get(nid)
            while anc is not None and anc != t:
                anc = parents.get(anc)
            if anc != t:
                problems.append(f"leaf {nid!r} links to {t!r} which is not a proper ancestor")
            link_vertices.append(tree.nodes[t].vertex)
            if not game.has_edge(node.vertex, tree.nodes[t].vertex):
                problems.append(
                    f"leaf link {nid!r}->{t!r} is not a game edge "
                    f"({node.vertex!r}->{tree.nodes[t].vertex!r})")
        if len(set(link_vertices)) != len(link_vertices):
            problems.append(f"leaf {nid!r} has two links onto the same vertex")
    return problems


@dataclass
class TreeLabels:
    winners: dict  # node id -> frozenset[int]
    penalty: dict  # node id -> dict[player, int]
    problems: list[str]


class TreeView:
    """A validated symbolic tree with its unfolding graph and labels."""

    def __init__(self, game: ReachabilityGame, tree: SymbolicTree,
                 pre_winners: frozenset[int] = frozenset(),
                 tracked: frozenset[int] = frozenset()):
        self.game = game
        self.tree = tree
        self.pre_winners = pre_winners
        self.tracked = tracked
        self.problems = validate_tree(game, tree)
        self.labels: TreeLabels | None = None
        if self.problems:
            return
        self.order = list(tree.nodes)
        self.row = {nid: k for k, nid in enumerate(self.order)}
        rows = []
        for nid in self.order:
            node = tree.nodes[nid]
            rows.append([self.row[t] for t in (node.children or node.leaf_links)])
        self.indptr, self.indices = graphcore.build_csr(rows)
        self.rindptr, self.rindices = graphcore.reverse_csr(self.indptr, self.indices)
        self.labels = compute_labels(game, tree, pre_winners, tracked)
        self.problems = list(self.labels.problems)
        self._wins_some: dict[int, bytearray] = {}
        self._wins_all: dict[int, bytearray] = {}

    # -- per-node structure ----------------------------------------------

    def kept_vertices(self, nid) -> list[str]:
        node = self.tree.nodes[nid]
        refs = node.children or node.leaf_links
        return [self.tree.nodes[r].vertex for r in refs]

    def blocked_vertices(self, nid) -> list[str]:
        node = self.tree.nodes[nid]
        kept = set(self.kept_vertices(nid))
        return [u for u in self.game.successors(node.vertex) if u not in kept]

    def blocking_charge(self, nid) -> int:
        node = self.tree.nodes[nid]
        return sum(self.game.edge_weight(node.vertex, u)
                   for u in self.blocked_vertices(nid))

    def out_degree(self, nid) -> int:
        node = self.tree.nodes[nid]
        return len(node.children) + len(node.leaf_links)

    # -- semantic masks ----------------------------------------------------

    def wins_some_mask(self, player: int) -> bytearray:
        """Per node: some play from here visits the player's targets (or the
        player already won)."""
        if player not in self._wins_some:
            seeds = [k for k, nid in enumerate(self.order)
                     if player in self.labels.winners[nid]]
            self._wins_some[player] = graphcore.reachable(
                self.rindptr, self.rindices, seeds)
        return self._wins_some[player]

    def wins_all_mask(self, player: int) -> bytearray:
        """Per node: every play from here is winning for the player."""
        if player not in self._wins_all:
            allowed = bytearray(
                0 if player in self.labels.winners[nid] else 1
                for nid in self.order)
            forever = graphcore.forever_mask(self.indptr, self.indices, allowed)
            self._wins_all[player] = bytearray(1 - b for b in forever)
        return self._wins_all[player]

    def penalty(self, player: int) -> float:
        weights = [self.blocking_charge(nid)
                   if self.game.owner[self.tree.nodes[nid].vertex] == player else 0
                   for nid in self.order]
        value = graphcore.longest_value(self.indptr, self.indices, weights,
                                        self.row[self.tree.root])
        return value if value == INF else int(value)

    def penalties(self) -> dict[int, float]:
        return {i: self.penalty(i) for i in sorted(self.game.all_players)}

    # -- resistance conditions ----------------------------------------------

    def internal_resistance_violations(self) -> list[str]:
        """At every branching node whose owner has not won yet, either all
        plays from there win for the owner or none does."""
        out = []
        for nid in self.order:
            if self.out_degree(nid) < 2:
                continue
            i = self.game.owner[self.tree.nodes[nid].vertex]
            if i in self.labels.winners[nid]:
                continue
            k = self.row[nid]
            if not self.wins_all_mask(i)[k] and self.wins_some_mask(i)[k]:
                out.append(
                    f"node {nid!r}: owner {i} wins some but not all plays "
                    f"below a branching node")
        return out

    def deviation_violations(self, gamma: Callable[[int, str, frozenset[int]], int],
                             ) -> tuple[list[str], list[Index], list[Index]]:
        """Check blocked moves against the deviation value table.

        Returns (violations, demanded lookups, lookups with no tree).
        """
        violations: list[str] = []
        demanded: list[Index] = []
        missing: list[Index] = []
        for nid in self.order:
            node = self.tree.nodes[nid]
            i = self.game.owner[node.vertex]
            if i in self.labels.winners[nid]:
                continue
            for u in self.blocked_vertices(nid):
                index = (i, u, self.labels.winners[nid] | self.game.targets_at(u))
                demanded.append(index)
                try:
                    value = gamma(*index)
                except MissingTreeError:
                    missing.append(index)
                    continue
                if value == 1 and not self.wins_all_mask(i)[self.row[nid]]:
                    violations.append(
                        f"node {nid!r}: blocks {node.vertex!r}->{u!r} although the "
                        f"deviation is winning for player {i} and some play below "
                        f"loses for them")
        return violations, demanded, missing

    def winning_ok(self, winners: frozenset[int], mode: str) -> bool:
        """mode 'weak': some play wins for every player of `winners`;
        mode 'strong': every play does."""
        if mode == "weak":
            return any(winners <= self.labels.winners[nid] for nid in self.order)
        if mode == "strong":
            allowed = bytearray(
                0 if winners <= self.labels.winners[nid] else 1
                for nid in self.order)
            forever = graphcore.forever_mask(self.indptr, self.indices, allowed)
            return not forever[self.row[self.tree.root]]
        raise ValueError(f"unknown winning mode {mode!r}")


def compute_labels(game: ReachabilityGame, tree: SymbolicTree,
                   pre_winners: frozenset[int] = frozenset(),
                   tracked: frozenset[int] = frozenset()) -> TreeLabels:
    """Winner sets and blocking penalties for every node, plus the leaf-link
    consistency problems.

    The root inherits `pre_winners` (players that won before the tree starts,
    e.g. on the initial vertex); a link is consistent when its target carries
    the same winner set as the leaf and, for every tracked player, the same
    penalty.
    """
    winners: dict = {}
    penalty: dict = {}
    problems: list[str] = []
    root = tree.root
    winners[root] = pre_winners | game.targets_at(tree.nodes[root].vertex)
    penalty[root] = {i: 0 for i in game.all_players}
    stack = [root]
    order = []
    while stack:
        nid = stack.pop()
        order.append(nid)
        node = tree.nodes[nid]
        if not node.children:
            continue
        owner = game.owner[node.vertex]
        kept = {tree.nodes[c].vertex for c in node.children}
        charge = sum(game.edge_weight(node.vertex, u)
                     for u in game.successors(node.vertex) if u not in kept)
        for c in node.children:
            winners[c] = winners[nid] | game.targets_at(tree.nodes[c].vertex)
            p = dict(penalty[nid])
            p[owner] += charge
            penalty[c] = p
            stack.append(c)
    for nid in order:
        node = tree.nodes[nid]
        for t in node.leaf_links:
            if winners[t] != winners[nid]:
                problems.append(
                    f"leaf {nid!r} links to {t!r} with different winner set "
                    f"({sorted(winners[t])} vs {sorted(winners[nid])})")
            for i in sorted(tracked):
                if penalty[t][i] != penalty[nid][i]:
                    problems.append(
                        f"leaf {nid!r} links to {t!r} with different penalty for "
                        f"player {i} ({penalty[t][i]} vs {penalty[nid][i]})")
    return TreeLabels(winners, penalty, problems)


def tree_penalty(game: ReachabilityGame, tree: SymbolicTree, player: int) -> float:
    """Worst blocking penalty the player accumulates along any play of the
    tree's unfolding (infinite when a charged node lies on a cycle)."""
    problems = validate_tree(game, tree)
    if problems:
        raise WitnessFormatError("; ".join(problems))
    return TreeView(game, tree).penalty(player)


@dataclass
class TreeReport:
    good: bool
    problems: list[str]
    resistance_violations: list[str]
    deviation_violations: list[str]
    demanded: list[Index]
    penalties: dict[int, float]

    def all_problems(self) -> list[str]:
        return self.problems + self.resistance_violations + self.deviation_violations


def check_good_tree(game: ReachabilityGame, tree: SymbolicTree,
                    pre_winners: frozenset[int] | None = None,
                    gamma: Callable[[int, str, frozenset[int]], int] | None = None,
                    tracked: frozenset[int] = frozenset()) -> TreeReport:
    """Decide whether the tree describes a permissive Nash equilibrium from
    the game's initial vertex (deviation values taken from the bare game
    unless a table is supplied)."""
    if pre_winners is None:
        pre_winners = game.initial_winners
    if gamma is None:
        gamma = game_gamma(game)
    view = TreeView(game, tree, pre_winners, tracked)
    if view.labels is None:
        return TreeReport(False, view.problems, [], [], [], {})
    resist = view.internal_resistance_violations()
    deviate, demanded, missing = view.deviation_violations(gamma)
    problems = list(view.problems)
    for index in missing:
        problems.append(f"missing tree for demanded lookup {format_index(index)}")
    good = not (problems or resist or deviate)
    return TreeReport(good, problems, resist, deviate, demanded, view.penalties())


# ---------------------------------------------------------------------------
# forests


@dataclass
class SymbolicForest:
    main: SymbolicTree
    trees: dict  # Index -> SymbolicTree


def compute_index_space(game: ReachabilityGame) -> frozenset[Index]:
    """All deviation contexts (player, vertex, winner set) reachable in the
    game, winners seeded with the initial winners."""
    out: set[Index] = set()
    start = (game.init, game.initial_winners)
    seen = {start}
    stack = [start]
    while stack:
        v, won = stack.pop()
        for u in game.successors(v):
            wu = won | game.targets_at(u)
            out.add((game.owner[v], u, wu))
            if (u, wu) not in seen:
                seen.add((u, wu))
                stack.append((u, wu))
    return frozenset(out)


def compute_out_set(game: ReachabilityGame, main: SymbolicTree) -> frozenset[Index]:
    """Deviation contexts that actually escape the main tree: indices of the
    moves leaving the tree, from any history (conforming or not)."""
    succ_at: dict = {}
    for nid, node in main.nodes.items():
        succ_at[nid] = {main.nodes[r].vertex: r
                        for r in (node.children or node.leaf_links)}
    out: set[Index] = set()
    start = (game.init, game.initial_winners, main.root)
    seen = {start}
    stack = [start]
    while stack:
        v, won, pos = stack.pop()
        for u in game.successors(v):
            wu = won | game.targets_at(u)
            npos = succ_at[pos].get(u) if pos is not None else None
            if npos is None:
                out.add((game.owner[v], u, wu))
            state = (u, wu, npos)
            if state not in seen:
                seen.add(state)
                stack.append(state)
    return frozenset(out)


def sort_indices(indices: Iterable[Index]) -> list[Index]:
    return sorted(indices, key=lambda ix: (ix[0], ix[1], sorted(ix[2])))


@dataclass
class ForestReport:
    good: bool
    problems: list[str]
    resistance_violations: list[str]
    deviation_violations: list[str]
    missing: list[Index]
    main_penalties: dict[int, float]
    retaliation_penalties: dict[int, float]
    out_indices: list[Index]
    out_missing: list[Index]

    def all_problems(self) -> list[str]:
        return (self.problems + self.resistance_violations
                + self.deviation_violations
                + [f"missing tree {format_index(ix)}" for ix in self.missing])


def forest_views(game: ReachabilityGame, forest: SymbolicForest,
                 main_tracked: frozenset[int] = frozenset(),
                 retaliation_tracked: frozenset[int] = frozenset(),
                 ) -> tuple[TreeView, dict, list[str]]:
    problems: list[str] = []
    main_view = TreeView(game, forest.main, game.initial_winners, main_tracked)
    problems += [f"main: {p}" for p in main_view.problems]
    views: dict = {}
    for index in sort_indices(forest.trees):
        player, u, winners = index
        tree = forest.trees[index]
        if tree.nodes[tree.root].vertex != u:
            problems.append(
                f"tree {format_index(index)} is rooted at "
                f"{tree.nodes[tree.root].vertex!r}, not at {u!r}")
            continue
        view = TreeView(game, tree, winners, retaliation_tracked)
        problems += [f"tree {format_index(index)}: {p}" for p in view.problems]
        views[index] = view
    return main_view, views, problems


def forest_gamma(game: ReachabilityGame, views: dict,
                 ) -> Callable[[int, str, frozenset[int]], int]:
    """Deviation value table induced by the forest's punishment trees: a
    deviation is worth 1 iff the deviator already won or the punishment tree
    for that context has some play winning for them."""

    def gamma(player: int, u: str, winners: frozenset[int]) -> int:
        if player in winners:
            return 1
        view = views.get((player, u, winners))
        if view is None:
            raise MissingTreeError((player, u, winners))
        root_row = view.row[view.tree.root]
        return 1 if view.wins_some_mask(player)[root_row] else 0

    return gamma


def check_good_forest(game: ReachabilityGame, forest: SymbolicForest,
                      main_tracked: frozenset[int] = frozenset(),
                      retaliation_tracked: frozenset[int] = frozenset(),
                      ) -> ForestReport:
    """Decide whether the forest describes a permissive subgame-perfect
    equilibrium: the main tree and every punishment tree must resist both
    their branching and their blocked deviations, with deviation values read
    off the forest itself."""
    main_view, views, problems = forest_views(
        game, forest, main_tracked, retaliation_tracked)
    if main_view.labels is None:
        return ForestReport(False, problems, [], [], [], {}, {}, [], [])
    gamma = forest_gamma(game, views)
    resist: list[str] = []
    deviate: list[str] = []
    missing: list[Index] = []
    checked = [("main", main_view)] + [
        (f"tree {format_index(ix)}", views[ix]) for ix in sort_indices(views)]
    for name, view in checked:
        if view.labels is None:
            continue
        resist += [f"{name}: {s}" for s in view.internal_resistance_violations()]
        dev, _demanded, miss = view.deviation_violations(gamma)
        deviate += [f"{name}: {s}" for s in dev]
        missing += miss
    missing = set(missing)
    out = compute_out_set(game, forest.main)
    out_missing = sort_indices(ix for ix in out if ix not in views)
    if retaliation_tracked:
        # A finite retaliation bound reads a penalty off every reachable
        # deviation context, so each of those trees has to be present.
        missing.update(out_missing)
    missing = sort_indices(missing)
    retaliation = {i: 0.0 for i in game.all_players}
    for ix in sort_indices(out):
        view = views.get(ix)
        if view is None:
            continue
        for i in game.all_players:
            retaliation[i] = max(retaliation[i], view.penalty(i))
    retaliation = {i: (v if v == INF else int(v)) for i, v in retaliation.items()}
    good = not (problems or resist or deviate or missing)
    return ForestReport(good, problems, resist, deviate, missing,
                        main_view.penalties(), retaliation,
                        sort_indices(out), out_missing)


# ---------------------------------------------------------------------------
# serialisation


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise WitnessFormatError(msg)


def tree_to_dict(tree: SymbolicTree) -> dict:
    return {
        "root": tree.root,
        "nodes": [
            {"id": nid, "vertex": node.vertex,
             "children": list(node.children),
             "leaf_links": list(node.leaf_links)}
            for nid, node in tree.nodes.items()
        ],
    }


def tree_from_dict(data: dict) -> SymbolicTree:
    _require(isinstance(data, dict), "tree description must be an object")
    unknown = set(data) - _TREE_KEYS
    _require(not unknown, f"unknown keys in tree description: {sorted(unknown)}")
    _require("root" in data and "nodes" in data, "tree needs 'root' and 'nodes'")
    nodes: dict = {}
    for entry in data["nodes"]:
        _require(isinstance(entry, dict), "node entries must be objects")
        unknown = set(entry) - _NODE_KEYS
        _require(not unknown, f"unknown keys in node entry: {sorted(unknown)}")
        _require("id" in entry and "vertex" in entry, "node entries need 'id' and 'vertex'")
        nid = entry["id"]
        _require(nid not in nodes, f"duplicate node id {nid!r}")
        nodes[nid] = TreeNode(
            vertex=entry["vertex"],
            children=tuple(entry.get("children", ())),
            leaf_links=tuple(entry.get("leaf_links", ())),
        )
    _require(len(nodes) > 0, "tree has no nodes")
    return SymbolicTree(root=data["root"], nodes=nodes)


def forest_to_dict(forest: SymbolicForest) -> dict:
    return {
        "main": tree_to_dict(forest.main),
        "trees": [
            {"player": ix[0], "vertex": ix[1], "winners": sorted(ix[2]),
             "tree": tree_to_dict(forest.trees[ix])}
            for ix in sort_indices(forest.trees)
        ],
    }


def forest_from_dict(data: dict) -> SymbolicForest:
    _require(isinstance(data, dict), "forest description must be an object")
    unknown = set(data) - _FOREST_KEYS
    _require(not unknown, f"unknown keys in forest description: {sorted(unknown)}")
    _require("main" in data, "forest needs a 'main' tree")
    trees: dict = {}
    for entry in data.get("trees", ()):
        _require(isinstance(entry, dict), "forest tree entries must be objects")
        unknown = set(entry) - _FOREST_ENTRY_KEYS
        _require(not unknown, f"unknown keys in forest tree entry: {sorted(unknown)}")
        for key in _FOREST_ENTRY_KEYS:
            _require(key in entry, f"forest tree entry misses {key!r}")
        index = (entry["player"], entry["vertex"], frozenset(entry["winners"]))
        _require(index not in trees, f"duplicate tree for index {format_index(index)}")
        trees[index] = tree_from_dict(entry["tree"])
    return SymbolicForest(main=tree_from_dict(data["main"]), trees=trees)


def load_witness(path: str):
    """Load a tree or forest, telling them apart by shape."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise WitnessFormatError(f"invalid JSON in {path}: {exc}") from exc
    _require(isinstance(data, dict), "witness must be an object")
    if "main" in data:
        return forest_from_dict(data)
    return tree_from_dict(data)


def save_witness(obj, path: str) -> None:
    data = forest_to_dict(obj) if isinstance(obj, SymbolicForest) else tree_to_dict(obj)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# DOT rendering


def _dot_nodes(game: ReachabilityGame, tree: SymbolicTree, labels: TreeLabels,
               prefix: str, lines: list[str]) -> None:
    row = {nid: k for k, nid in enumerate(tree.nodes)}
    for nid, node in tree.nodes.items():
        winners = ",".join(map(str, sorted(labels.winners[nid]))) or "-"
        pens = " ".join(f"p{i}={labels.penalty[nid][i]}"
                        for i in sorted(game.all_players))
        lines.append(
            f'  {prefix}{row[nid]} [label="{node.vertex} | {{{winners}}} | {pens}"];')
    for nid, node in tree.nodes.items():
        for c in node.children:
            lines.append(f"  {prefix}{row[nid]} -> {prefix}{row[c]};")
        for t in node.leaf_links:
            lines.append(f"  {prefix}{row[nid]} -> {prefix}{row[t]} [style=dashed];")


def tree_to_dot(game: ReachabilityGame, tree: SymbolicTree,
                pre_winners: frozenset[int] | None = None) -> str:
    if pre_winners is None:
        pre_winners = game.initial_winners
    labels = compute_labels(game, tree, pre_winners)
    lines = ["digraph witness {", "  node [shape=box];"]
    _dot_nodes(game, tree, labels, "n", lines)
    lines.append("}")
    return "\n".join(lines) + "\n"


def forest_to_dot(game: ReachabilityGame, forest: SymbolicForest) -> str:
    lines = ["digraph witness {", "  node [shape=box];"]
    lines.append("  subgraph cluster_main {")
    lines.append('    label="main";')
    labels = compute_labels(game, forest.main, game.initial_winners)
    _dot_nodes(game, forest.main, labels, "m", lines)
    lines.append("  }")
    for k, ix in enumerate(sort_indices(forest.trees)):
        tree = forest.trees[ix]
        labels = compute_labels(game, tree, ix[2])
        lines.append(f"  subgraph cluster_t{k} {{")
        lines.append(f'    label="{format_index(ix)}";')
        _dot_nodes(game, tree, labels, f"t{k}_", lines)
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
