"""Executable multi-strategy machines extracted from symbolic witnesses.

A machine tracks the play with a finite state; `choose(state, v)` is the set
of moves the multi-strategy allows at vertex v, and `update(state, u)`
advances the state once the play moved to u (whether or not the move was
allowed).
"""

from __future__ import annotations

from .game import ReachabilityGame
from .witness import (MissingTreeError, SymbolicForest, SymbolicTree,
                      WitnessFormatError, compute_labels, validate_tree)
from .zerosum import coalition_safety_strategy


def _succ_at(tree: SymbolicTree) -> dict:
    table = {}
    for nid, node in tree.nodes.items():
        table[nid] = {tree.nodes[r].vertex: r
                      for r in (node.children or node.leaf_links)}
    return table


class TreeMachine:
    """Multi-strategy of a single symbolic tree: follow the tree while the
    play conforms, otherwise everybody gangs up on the deviator with a
    positional safety strategy that avoids the deviator's targets."""

    def __init__(self, game: ReachabilityGame, tree: SymbolicTree):
        problems = validate_tree(game, tree)
        if problems:
            raise WitnessFormatError("; ".join(problems))
        self.game = game
        self.tree = tree
        self.succ_at = _succ_at(tree)
        self.safety = {i: coalition_safety_strategy(game, i)
                       for i in game.all_players}
        self.initial = ("node", tree.root)

    def update(self, state, vertex: str):
        kind = state[0]
        if kind == "punish":
            return state
        nid = state[1]
        nxt = self.succ_at[nid].get(vertex)
        if nxt is not None:
            return ("node", nxt)
        deviator = self.game.owner[self.tree.nodes[nid].vertex]
        return ("punish", deviator)

    def choose(self, state, vertex: str) -> frozenset:
        everything = frozenset(self.game.successors(vertex))
        if state[0] == "node":
            nid = state[1]
            if self.tree.nodes[nid].vertex == vertex:
                return frozenset(self.succ_at[nid])
            return everything
        deviator = state[1]
        if self.game.owner[vertex] == deviator:
            return everything
        pick = self.safety[deviator].get(vertex)
        return frozenset((pick,)) if pick is not None else everything


class ForestMachine:
    """Multi-strategy of a symbolic forest: follow the current tree; a move
    that leaves it jumps to the punishment tree of the corresponding
    deviation context."""

    def __init__(self, game: ReachabilityGame, forest: SymbolicForest):
        self.game = game
        self.forest = forest
        self.succ_at = {}
        self.winners = {}
        for key, tree, pre in self._all_trees():
            problems = validate_tree(game, tree)
            if problems:
                raise WitnessFormatError(
                    "; ".join(f"{'main' if key is None else key}: {p}"
                              for p in problems))
            self.succ_at[key] = _succ_at(tree)
            self.winners[key] = compute_labels(game, tree, pre).winners
        self.initial = ("node", None, forest.main.root)

    def _all_trees(self):
        yield None, self.forest.main, self.game.initial_winners
        for index, tree in self.forest.trees.items():
            yield index, tree, index[2]

    def _tree(self, key) -> SymbolicTree:
        return self.forest.main if key is None else self.forest.trees[key]

    def update(self, state, vertex: str):
        if state[0] == "free":
            return state
        _, key, nid = state
        nxt = self.succ_at[key][nid].get(vertex)
        if nxt is not None:
            return ("node", key, nxt)
        tree = self._tree(key)
        deviator = self.game.owner[tree.nodes[nid].vertex]
        jump = (deviator, vertex,
                self.winners[key][nid] | self.game.targets_at(vertex))
        if jump not in self.forest.trees:
            if deviator in jump[2]:
                # the deviator's payoff is already settled, so no punishment
                # tree is owed; allow everything from here on
                return ("free",)
            raise MissingTreeError(jump)
        return ("node", jump, self.forest.trees[jump].root)

    def choose(self, state, vertex: str) -> frozenset:
        if state[0] == "free":
            return frozenset(self.game.successors(vertex))
        _, key, nid = state
        if self._tree(key).nodes[nid].vertex == vertex:
            return frozenset(self.succ_at[key][nid])
        return frozenset(self.game.successors(vertex))


def extract_multistrategy_ne(game: ReachabilityGame, tree: SymbolicTree) -> TreeMachine:
    """Turn a good tree into the multi-strategy it denotes."""
    return TreeMachine(game, tree)


def extract_multistrategy_spe(game: ReachabilityGame, forest: SymbolicForest) -> ForestMachine:
    """Turn a good forest into the multi-strategy it denotes (jumps to
    punishment trees may raise MissingTreeError on partial forests)."""
    return ForestMachine(game, forest)
