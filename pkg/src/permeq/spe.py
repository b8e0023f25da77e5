"""Forest solver: a main tree plus one punishment tree per deviation
context, sharing a single table of deviation values.

Values are guessed the first time a blocked move asks for them and each
guess leaves behind an obligation: build a punishment tree in which the
deviator does win some play (guess 1) or provably wins none (guess 0).
Obligations are settled after the main tree is complete, while the guesses
are still on the stack, so refuted guesses simply backtrack into the next
alternative.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from typing import Iterator

from .game import INF, ReachabilityGame
from .ne import (NO_OBJECTIVE, Objective, Stats, TreeSearch, _finite_caps,
                 _obligation_maps, height_bound)
from .witness import (Index, SymbolicForest, SymbolicTree, TreeView,
                      check_good_forest, compute_out_set, format_index,
                      sort_indices)
from .zerosum import winning_region


class TableGamma:
    """Deviation values resolved by guessing.

    `resolve` enumerates every assignment for the queried contexts that is
    consistent with the table, recording fresh guesses; entries roll back
    when an assignment is abandoned.  `pending` lists the recorded guesses
    in chronological order for later verification.
    """

    def __init__(self, game: ReachabilityGame):
        self.game = game
        self._wins = {i: winning_region(game, i) for i in game.all_players}
        self.table: dict[Index, int] = {}
        self.pending: list[Index] = []
        # both tick on every state change; continuation guards compare them
        self.version = 0
        self.completions = 0

    def _order(self, index: Index) -> tuple[int, ...]:
        player, u, winners = index
        if player in self.game.targets_at(u):
            return (1,)  # the deviation lands on a target: never refutable
        return (1, 0) if u in self._wins[player] else (0, 1)

    def resolve(self, queries: list[Index]) -> Iterator[dict]:
        def rec(k: int, acc: dict) -> Iterator[dict]:
            if k == len(queries):
                yield acc
                return
            index = queries[k]
            player, _u, winners = index
            if player in winners:
                yield from rec(k + 1, {**acc, index: 1})
                return
            if index in self.table:
                yield from rec(k + 1, {**acc, index: self.table[index]})
                return
            for guess in self._order(index):
                self.table[index] = guess
                self.pending.append(index)
                self.version += 1
                try:
                    yield from rec(k + 1, {**acc, index: guess})
                finally:
                    # generators unwind innermost-first, so the tail of
                    # `pending` is always this frame's entry
                    self.pending.pop()
                    del self.table[index]
                    self.version += 1

        return rec(0, {})


@dataclass
class SpeReport:
    answer: bool
    witness: SymbolicForest | None
    main_penalties: dict[int, float] | None
    retaliation_penalties: dict[int, float] | None
    stats: Stats
    bound: int


class _ForestSearch:
    """Continuation-passing orchestration: main tree, then verification of
    every pending guess, then punishment trees for the whole reachable
    deviation set, then a from-scratch validation of the result."""

    def __init__(self, game: ReachabilityGame, main: dict[int, float],
                 retaliation: dict[int, float] | None, objective: Objective,
                 height_cap: int | None, stats: Stats):
        self.game = game
        self.main = dict(main or {})
        self.retaliation = dict(retaliation or {})
        self.main_caps = _finite_caps(main)
        self.retal_caps = _finite_caps(retaliation)
        self.objective = objective
        self.stats = stats
        self.gamma = TableGamma(game)
        pre = game.initial_winners
        self.bound = height_cap if height_cap is not None else height_bound(
            game, game.all_players - pre, self.main_caps, objective.mode)
        self.trees: dict[Index, SymbolicTree] = {}
        self._main_tree: SymbolicTree | None = None
        self._out: list[Index] | None = None
        self._obligations = _obligation_maps(game)

    def _mark_completion(self):
        self.gamma.version += 1
        self.gamma.completions += 1

    def _tree_defective(self, tree: SymbolicTree, pre_winners,
                        tracked) -> bool:
        """Candidate gate: links may cross obligation regions, so the one
        property the construction no longer guarantees — branching
        resistance — is re-checked when each tree completes (label
        consistency comes along for free)."""
        view = TreeView(self.game, tree, pre_winners, frozenset(tracked))
        if view.labels is None or view.problems:
            return True
        return bool(view.internal_resistance_violations())

    def run(self):
        require_all = (self.objective.players
                       if self.objective.mode == "strong" else frozenset())
        search = TreeSearch(self.game, self.game.init,
                            self.game.initial_winners, self.main_caps,
                            self.objective, self.gamma, self.bound,
                            self.stats, require_all=require_all,
                            obligations=self._obligations)

        def main_done():
            self._mark_completion()
            tree = search.snapshot()
            if self._tree_defective(tree, self.game.initial_winners,
                                    self.main_caps):
                self.gamma.version += 1
                return None
            self._main_tree = tree
            self._out = None
            result = self._advance(0)
            if not result:
                self.gamma.version += 1
            return result

        return search.run(main_done)

    # -- phases -------------------------------------------------------------

    def _advance(self, k: int):
        """Verify pending guesses from position k on, then settle the
        deviation contexts reachable out of the main tree."""
        if k < len(self.gamma.pending):
            index = self.gamma.pending[k]
            return self._verify(index, lambda: self._advance(k + 1))
        return self._settle()

    def _verify(self, index: Index, cont):
        value = self.gamma.table[index]
        player, u, winners = index
        if value == 1:
            objective, forbid = Objective.weak({player}), frozenset()
        else:
            objective, forbid = NO_OBJECTIVE, frozenset({player})
        bound = height_bound(self.game, self.game.all_players - winners,
                             self.retal_caps, objective.mode)
        search = TreeSearch(self.game, u, winners, self.retal_caps,
                            objective, self.gamma, bound, self.stats,
                            forbid=forbid, obligations=self._obligations)

        def done():
            self._mark_completion()
            tree = search.snapshot()
            if self._tree_defective(tree, winners, self.retal_caps):
                self.gamma.version += 1
                return None
            self.trees[index] = tree
            result = cont()
            if not result:
                del self.trees[index]
                self.gamma.version += 1
            return result

        return search.run(done)

    def _settle(self):
        if not self.retal_caps:
            return self._finalize()
        if self._out is None:
            self._out = sort_indices(compute_out_set(self.game, self._main_tree))
        missing = [ix for ix in self._out if ix not in self.trees]
        if not missing:
            return self._finalize()
        index = missing[0]
        player, u, winners = index
        if player in winners:
            # value is 1 regardless of the tree: only the penalties matter
            bound = height_bound(self.game,
                                 self.game.all_players - winners,
                                 self.retal_caps, "none")
            search = TreeSearch(self.game, u, winners, self.retal_caps,
                                NO_OBJECTIVE, self.gamma, bound, self.stats,
                                obligations=self._obligations)
            watermark = len(self.gamma.pending)

            def done():
                self._mark_completion()
                tree = search.snapshot()
                if self._tree_defective(tree, winners, self.retal_caps):
                    self.gamma.version += 1
                    return None
                self.trees[index] = tree
                result = self._advance(watermark)
                if not result:
                    del self.trees[index]
                    self.gamma.version += 1
                return result

            return search.run(done)
        watermark = len(self.gamma.pending)
        for _assign in self.gamma.resolve([index]):
            result = self._advance(watermark)
            if result:
                return result
        return None

    def _finalize(self):
        forest = SymbolicForest(self._main_tree, dict(self.trees))
        report = check_good_forest(
            self.game, forest, main_tracked=frozenset(self.main_caps),
            retaliation_tracked=frozenset(self.retal_caps))
        errors = list(report.all_problems())
        for i, b in self.main.items():
            if b != INF and report.main_penalties.get(i, 0) > b:
                errors.append(f"main penalty of player {i} is "
                              f"{report.main_penalties[i]}, over {b}")
        for i, b in self.retaliation.items():
            if b != INF and report.retaliation_penalties.get(i, 0) > b:
                errors.append(f"retaliation penalty of player {i} is "
                              f"{report.retaliation_penalties[i]}, over {b}")
        if self.objective.mode != "none":
            view = TreeView(self.game, forest.main,
                            self.game.initial_winners,
                            frozenset(self.main_caps))
            if not view.winning_ok(self.objective.players,
                                   self.objective.mode):
                errors.append(f"main tree is not {self.objective.mode}ly "
                              f"winning for {sorted(self.objective.players)}")
        if forest.main.height() > self.bound:
            errors.append(f"main tree height {forest.main.height()} exceeds "
                          f"bound {self.bound}")
        for index, value in self.gamma.table.items():
            tree = self.trees.get(index)
            if tree is None:
                errors.append(f"guessed value for {format_index(index)} was "
                              f"never verified")
                continue
            player, _u, winners = index
            view = TreeView(self.game, tree, winners)
            seen = view.wins_some_mask(player)[view.row[tree.root]]
            if int(bool(seen)) != value:
                errors.append(
                    f"tree {format_index(index)} realizes value "
                    f"{int(bool(seen))}, but {value} was guessed")
        if errors:
            raise RuntimeError("solver emitted an invalid forest: "
                               + "; ".join(errors))
        return forest, report


def solve_spe(game: ReachabilityGame, main: dict[int, float],
              retaliation: dict[int, float] | None = None,
              objective: Objective = NO_OBJECTIVE,
              height_cap: int | None = None) -> SpeReport:
    """Decide whether a good forest fits the main and retaliation penalty
    thresholds (with the winning objective read on the main tree); YES
    answers carry a validated forest."""
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 150000))
    stats = Stats()
    search = _ForestSearch(game, main, retaliation, objective, height_cap,
                           stats)
    start = time.perf_counter()
    result = search.run()
    stats.elapsed_ms = (time.perf_counter() - start) * 1000.0
    if not result:
        return SpeReport(False, None, None, None, stats, search.bound)
    forest, report = result
    return SpeReport(True, forest, report.main_penalties,
                     report.retaliation_penalties, stats, search.bound)
