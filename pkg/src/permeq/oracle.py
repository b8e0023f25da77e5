"""Brute-force ground truth at desk scale.

Everything here recomputes results from first principles — product-graph
walks over strategy machines, exhaustive enumeration of small symbolic
trees, bounded-path penalty evaluation — so the fast implementations have
an independent reference to be tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator

from .game import INF, ReachabilityGame
from .ne import NO_OBJECTIVE, Objective, _finite_caps
from .witness import (SymbolicForest, SymbolicTree, TreeNode, TreeView,
                      check_good_forest, check_good_tree)

DEFAULT_CAP = 10 ** 6


class OracleCapExceeded(RuntimeError):
    pass


class NonSingletonError(ValueError):
    pass


class _Budget:
    def __init__(self, cap: int):
        self.cap = cap
        self.used = 0

    def tick(self, amount: int = 1) -> None:
        self.used += amount
        if self.used > self.cap:
            raise OracleCapExceeded(
                f"oracle state budget exceeded ({self.cap} states)")


# ---------------------------------------------------------------------------
# strategy machines as plain product walks


class MemorylessMachine:
    """Single-state multi-strategy: a fixed non-empty successor subset per
    vertex."""

    initial = None

    def __init__(self, table: dict[str, frozenset]):
        self.table = {v: frozenset(s) for v, s in table.items()}

    def update(self, state, vertex):
        return None

    def choose(self, state, vertex):
        return self.table[vertex]


def enumerate_memoryless_multiprofiles(game: ReachabilityGame,
                                       ) -> Iterator[MemorylessMachine]:
    """All single-state machines mapping each vertex to each non-empty
    subset of its successors."""
    vertices = list(game.vertices)
    pools = []
    for v in vertices:
        succ = game.successors(v)
        options = [frozenset(c)
                   for size in range(len(succ), 0, -1)
                   for c in combinations(succ, size)]
        pools.append(options)
    for combo in product(*pools):
        yield MemorylessMachine(dict(zip(vertices, combo)))


class RefinedMachine:
    """A singleton profile refining a multi-strategy machine: choices are a
    function of (machine state, vertex, winner set), defaulting to the
    smallest allowed successor when unconstrained."""

    def __init__(self, game: ReachabilityGame, machine, choices: dict):
        self.game = game
        self.machine = machine
        self.choices = dict(choices)
        self.initial = (machine.initial, game.initial_winners)

    def update(self, state, vertex):
        inner, winners = state
        return (self.machine.update(inner, vertex),
                winners | self.game.targets_at(vertex))

    def choose(self, state, vertex):
        inner, winners = state
        c = self.choices.get((inner, vertex, winners))
        if c is None:
            c = min(sorted(self.machine.choose(inner, vertex)))
        return frozenset({c})


def _single(choice_set) -> str:
    if len(choice_set) != 1:
        raise NonSingletonError(
            f"expected a singleton choice, got {sorted(choice_set)}")
    return next(iter(choice_set))


def _initial_state(game: ReachabilityGame, machine):
    return (machine.initial, game.init, game.initial_winners)


def _outcome_winners(game: ReachabilityGame, machine, start,
                     budget: _Budget) -> frozenset:
    """Winner set of the unique play from `start` under a singleton
    machine (constant once the walk laps itself)."""
    state, vertex, winners = start
    seen = set()
    while (state, vertex, winners) not in seen:
        seen.add((state, vertex, winners))
        budget.tick()
        u = _single(machine.choose(state, vertex))
        state, vertex, winners = (machine.update(state, u), u,
                                  winners | game.targets_at(u))
    return winners


def best_response(game: ReachabilityGame, machine, player: int,
                  start=None, cap: int = DEFAULT_CAP) -> int:
    """1 iff the player can reach a winning product state when moving
    freely while everyone else follows the machine."""
    budget = _Budget(cap)
    if start is None:
        start = _initial_state(game, machine)
    stack = [start]
    seen = {start}
    while stack:
        state, vertex, winners = stack.pop()
        budget.tick()
        if player in winners:
            return 1
        if game.owner[vertex] == player:
            moves = game.successors(vertex)
        else:
            moves = (_single(machine.choose(state, vertex)),)
        for u in moves:
            nxt = (machine.update(state, u), u,
                   winners | game.targets_at(u))
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return 0


def is_nash(game: ReachabilityGame, machine, cap: int = DEFAULT_CAP) -> bool:
    """No player both loses the machine's unique outcome and can win by
    playing freely against the others."""
    budget = _Budget(cap)
    start = _initial_state(game, machine)
    outcome = _outcome_winners(game, machine, start, budget)
    for i in sorted(game.all_players):
        if i in outcome:
            continue
        if best_response(game, machine, i, start, cap):
            return False
    return True


def _arbitrary_reachable(game: ReachabilityGame, machine,
                         budget: _Budget) -> list:
    """Product states reachable when play ignores the machine's advice
    (histories are arbitrary; only the memory follows along)."""
    start = _initial_state(game, machine)
    order = [start]
    seen = {start}
    head = 0
    while head < len(order):
        state, vertex, winners = order[head]
        head += 1
        budget.tick()
        for u in game.successors(vertex):
            nxt = (machine.update(state, u), u,
                   winners | game.targets_at(u))
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
    return order


def is_very_weak_spe(game: ReachabilityGame, machine,
                     cap: int = DEFAULT_CAP) -> bool:
    """At every reachable product state, no one-shot deviation beats
    following the machine from there on."""
    budget = _Budget(cap)
    gains: dict = {}

    def gain(q) -> frozenset:
        if q not in gains:
            gains[q] = _outcome_winners(game, machine, q, budget)
        return gains[q]

    for q in _arbitrary_reachable(game, machine, budget):
        state, vertex, winners = q
        player = game.owner[vertex]
        chosen = _single(machine.choose(state, vertex))
        if player in gain(q):
            continue
        for u in game.successors(vertex):
            if u == chosen:
                continue
            after = (machine.update(state, u), u,
                     winners | game.targets_at(u))
            if player in gain(after):
                return False
    return True


# ---------------------------------------------------------------------------
# permissive check: search the consistent singleton refinements


@dataclass
class Refutation:
    player: int
    vertex: str
    move: str
    profile: RefinedMachine
    detail: str


def _refute_ne(game: ReachabilityGame, machine, budget: _Budget):
    init = _initial_state(game, machine)

    def chase(player, q, committed, trail):
        """Can the deviator reach a win moving freely while others follow
        the (lazily completed) refinement?"""
        state, vertex, winners = q
        if player in winners:
            return True
        if q in trail:
            return False
        budget.tick()
        trail.add(q)
        try:
            if game.owner[vertex] == player:
                for u in game.successors(vertex):
                    nxt = (machine.update(state, u), u,
                           winners | game.targets_at(u))
                    if chase(player, nxt, committed, trail):
                        return True
                return False
            fixed = committed.get(q)
            options = ([fixed] if fixed is not None
                       else sorted(machine.choose(state, vertex)))
            for u in options:
                if fixed is None:
                    committed[q] = u
                nxt = (machine.update(state, u), u,
                       winners | game.targets_at(u))
                if chase(player, nxt, committed, trail):
                    return True
                if fixed is None:
                    del committed[q]
            return False
        finally:
            trail.discard(q)

    def deviations(player, committed, outcome):
        for q in outcome:
            state, vertex, winners = q
            if game.owner[vertex] != player:
                continue
            for u in game.successors(vertex):
                if u == committed[q]:
                    continue
                start = (machine.update(state, u), u,
                         winners | game.targets_at(u))
                if chase(player, start, committed, set()):
                    profile = RefinedMachine(
                        game, machine,
                        {(s, v, j): c for (s, v, j), c in committed.items()})
                    return Refutation(
                        player, vertex, u, profile,
                        f"player {player} loses the outcome but wins by "
                        f"moving to {u!r} at {vertex!r}")
        return None

    def walk(player, q, committed, trail, trail_set):
        state, vertex, winners = q
        if player in winners:
            return None  # the outcome wins for the player: nothing to gain
        if q in trail_set:
            return deviations(player, committed, trail)
        budget.tick()
        fixed = committed.get(q)
        options = ([fixed] if fixed is not None
                   else sorted(machine.choose(state, vertex)))
        trail.append(q)
        trail_set.add(q)
        try:
            for u in options:
                if fixed is None:
                    committed[q] = u
                nxt = (machine.update(state, u), u,
                       winners | game.targets_at(u))
                found = walk(player, nxt, committed, trail, trail_set)
                if found:
                    return found
                if fixed is None:
                    del committed[q]
            return None
        finally:
            trail.pop()
            trail_set.discard(q)

    for player in sorted(game.all_players):
        found = walk(player, init, {}, [], set())
        if found:
            return found
    return None


def _refute_spe(game: ReachabilityGame, machine, budget: _Budget):
    def wins(player, q, committed, trail):
        """True iff some completion of the refinement makes the walk from
        q reach a win for the player (commitments kept on success)."""
        state, vertex, winners = q
        if player in winners:
            return True
        if q in trail:
            return False
        budget.tick()
        trail.add(q)
        try:
            fixed = committed.get(q)
            options = ([fixed] if fixed is not None
                       else sorted(machine.choose(state, vertex)))
            for u in options:
                if fixed is None:
                    committed[q] = u
                nxt = (machine.update(state, u), u,
                       winners | game.targets_at(u))
                if wins(player, nxt, committed, trail):
                    return True
                if fixed is None:
                    del committed[q]
            return False
        finally:
            trail.discard(q)

    def walk(player, q0, q, committed, trail):
        """Complete the walk from q0 so the player loses it, then try the
        one-shot deviations at q0; backtracks over completions."""
        state, vertex, winners = q
        if player in winners:
            return None  # following the machine wins: nothing to gain
        if q in trail:
            return deviations(player, q0, committed)
        budget.tick()
        trail.add(q)
        try:
            fixed = committed.get(q)
            options = ([fixed] if fixed is not None
                       else sorted(machine.choose(state, vertex)))
            for u in options:
                if fixed is None:
                    committed[q] = u
                nxt = (machine.update(state, u), u,
                       winners | game.targets_at(u))
                found = walk(player, q0, nxt, committed, trail)
                if found:
                    return found
                if fixed is None:
                    del committed[q]
            return None
        finally:
            trail.discard(q)

    def deviations(player, q0, committed):
        state, vertex, winners = q0
        for u in game.successors(vertex):
            if u == committed[q0]:
                continue
            after = (machine.update(state, u), u,
                     winners | game.targets_at(u))
            if wins(player, after, committed, set()):
                profile = RefinedMachine(game, machine, dict(committed))
                return Refutation(
                    player, vertex, u, profile,
                    f"player {player} loses when following the machine "
                    f"from {vertex!r} but wins the one-shot deviation "
                    f"to {u!r}")
        return None

    for q0 in _arbitrary_reachable(game, machine, budget):
        if game.owner[q0[1]] in q0[2]:
            continue
        found = walk(game.owner[q0[1]], q0, q0, {}, set())
        if found:
            return found
    return None


def oracle_permissive_check(game: ReachabilityGame, machine, concept: str,
                            cap: int = DEFAULT_CAP) -> Refutation | None:
    """Search every consistent singleton refinement (choices per machine
    state, vertex and winner set) for an equilibrium violation.  None means
    no counterexample exists in that class."""
    budget = _Budget(cap)
    if concept == "ne":
        found = _refute_ne(game, machine, budget)
        if found is not None and is_nash(game, found.profile, cap):
            raise RuntimeError("refutation failed its own re-check")
    elif concept == "spe":
        found = _refute_spe(game, machine, budget)
        if found is not None and is_very_weak_spe(game, found.profile, cap):
            raise RuntimeError("refutation failed its own re-check")
    else:
        raise ValueError(f"unknown concept {concept!r}")
    return found


# ---------------------------------------------------------------------------
# exhaustive enumeration of small symbolic trees


class _PatternEnum:
    """Enumerates the symbolic trees induced by per-situation choice
    patterns: a pattern fixes one kept successor subset per (vertex,
    winner set, tracked penalties) situation, and the tree is its unroll
    with branches folded back the first time a situation allows it."""

    def __init__(self, game: ReachabilityGame, caps: dict[int, int],
                 height_cap: int, root_vertex: str, pre_winners: frozenset):
        self.game = game
        self.caps = dict(caps)
        self.height_cap = height_cap
        self.root_vertex = root_vertex
        self.pre_winners = pre_winners
        self.assign: dict = {}
        self.nodes: dict = {}
        # ancestor chain per open node; the construction stack also holds
        # finished siblings, so it cannot serve as the chain
        self.parent_of: dict = {}
        self.key_of: dict = {}
        self._next = 0

    def trees(self) -> Iterator[SymbolicTree]:
        root_key = (self.root_vertex,
                    self.pre_winners | self.game.targets_at(self.root_vertex),
                    tuple(sorted((i, 0) for i in self.caps)))
        yield from self._node(None, root_key, 0, self._emit)

    def _emit(self) -> Iterator[SymbolicTree]:
        nodes = {nid: TreeNode(rec[0], tuple(rec[1]), tuple(rec[2]))
                 for nid, rec in self.nodes.items()}
        yield SymbolicTree(root=0, nodes=nodes)

    def _node(self, parent, key, depth, cont) -> Iterator[SymbolicTree]:
        vertex = key[0]
        nid = self._next
        self._next += 1
        self.nodes[nid] = [vertex, [], []]
        self.parent_of[nid] = parent
        self.key_of[nid] = key
        if parent is not None:
            self.nodes[parent][1].append(nid)
        try:
            if key in self.assign:
                yield from self._apply(nid, key, self.assign[key], depth, cont)
            else:
                succ = self.game.successors(vertex)
                for size in range(len(succ), 0, -1):
                    for kept in combinations(succ, size):
                        self.assign[key] = kept
                        try:
                            yield from self._apply(nid, key, kept, depth, cont)
                        finally:
                            del self.assign[key]
        finally:
            del self.nodes[nid], self.parent_of[nid], self.key_of[nid]
            if parent is not None:
                self.nodes[parent][1].pop()

    def _ancestor_items(self, nid):
        a = self.parent_of[nid]
        while a is not None:
            yield a, self.key_of[a]
            a = self.parent_of[a]

    def _apply(self, nid, key, kept, depth, cont) -> Iterator[SymbolicTree]:
        vertex, winners, fp = key
        owner = self.game.owner[vertex]
        charge = sum(self.game.edge_weight(vertex, u)
                     for u in self.game.successors(vertex) if u not in kept)
        capped = owner in self.caps
        if capped and charge and dict(fp)[owner] + charge > self.caps[owner]:
            return
        # fold back whenever every kept move has a same-situation ancestor
        # (a charged leaf would lap its own blocking forever)
        if not (capped and charge):
            links = {}
            for prior_nid, prior_key in self._ancestor_items(nid):
                if prior_key not in links:  # nearest occurrence wins
                    links[prior_key] = prior_nid
            wanted = [(u, winners, fp) for u in kept]
            if all(w in links for w in wanted):
                rec = self.nodes[nid]
                rec[2] = [links[w] for w in wanted]
                yield from cont()
                rec[2] = []
                return
        if any(prior_key == key for _a, prior_key in self._ancestor_items(nid)):
            return  # the pattern would unroll this branch forever
        if depth + 1 > self.height_cap:
            return
        specs = []
        for u in kept:
            cw = winners | self.game.targets_at(u)
            cp = dict(fp)
            if capped:
                cp[owner] += charge
            specs.append((u, cw, tuple(sorted(cp.items()))))
        yield from self._children(nid, specs, 0, depth + 1, cont)

    def _children(self, nid, specs, k, depth, cont) -> Iterator[SymbolicTree]:
        if k == len(specs):
            yield from cont()
            return
        yield from self._node(
            nid, specs[k], depth,
            lambda: self._children(nid, specs, k + 1, depth, cont))


def all_pattern_trees(game: ReachabilityGame, caps: dict[int, int] | None = None,
                      height_cap: int = 8, root_vertex: str | None = None,
                      pre_winners: frozenset | None = None,
                      ) -> Iterator[SymbolicTree]:
    enum = _PatternEnum(
        game, caps or {}, height_cap,
        game.init if root_vertex is None else root_vertex,
        game.initial_winners if pre_winners is None else pre_winners)
    return enum.trees()


def _tree_ok(game, tree, main, objective, pre_winners=None) -> bool:
    caps = _finite_caps(main)
    report = check_good_tree(game, tree, pre_winners=pre_winners,
                             tracked=frozenset(caps))
    if not report.good:
        return False
    for i, b in (main or {}).items():
        if b != INF and report.penalties.get(i, 0) > b:
            return False
    if objective.mode != "none":
        view = TreeView(game, tree,
                        game.initial_winners if pre_winners is None else pre_winners,
                        frozenset(caps))
        if not view.winning_ok(objective.players, objective.mode):
            return False
    return True


def enumerate_small_witnesses(game: ReachabilityGame, height_cap: int,
                              main: dict[int, float] | None = None,
                              objective: Objective = NO_OBJECTIVE,
                              concept: str = "ne"):
    """First enumerated witness passing all checks, or None."""
    if concept == "spe":
        return enumerate_small_forests(game, height_cap, main, objective)
    if concept != "ne":
        raise ValueError(f"unknown concept {concept!r}")
    caps = _finite_caps(main)
    for tree in all_pattern_trees(game, caps, height_cap):
        if _tree_ok(game, tree, main, objective):
            return tree
    return None


def enumerate_small_forests(game: ReachabilityGame, height_cap: int,
                            main: dict[int, float] | None = None,
                            objective: Objective = NO_OBJECTIVE,
                            ) -> SymbolicForest | None:
    """First good forest built from pattern trees (no finite retaliation
    bounds: punishment trees are only constrained by the value they have
    to realize)."""
    main_caps = _finite_caps(main)

    def grow(forest: SymbolicForest) -> SymbolicForest | None:
        report = check_good_forest(game, forest,
                                   main_tracked=frozenset(main_caps))
        if report.problems or report.resistance_violations \
                or report.deviation_violations:
            return None
        if not report.missing:
            if report.good and _forest_ok(report):
                return forest
            return None
        index = report.missing[0]
        _player, u, winners = index
        for tree in all_pattern_trees(game, {}, height_cap,
                                      root_vertex=u, pre_winners=winners):
            trees = dict(forest.trees)
            trees[index] = tree
            found = grow(SymbolicForest(forest.main, trees))
            if found is not None:
                return found
        return None

    def _forest_ok(report) -> bool:
        for i, b in (main or {}).items():
            if b != INF and report.main_penalties.get(i, 0) > b:
                return False
        return True

    for main_tree in all_pattern_trees(game, main_caps, height_cap):
        if objective.mode != "none":
            view = TreeView(game, main_tree, game.initial_winners,
                            frozenset(main_caps))
            if view.problems or not view.winning_ok(objective.players,
                                                    objective.mode):
                continue
        found = grow(SymbolicForest(main_tree, {}))
        if found is not None:
            return found
    return None


# ---------------------------------------------------------------------------
# bounded-path penalty


def brute_force_tree_penalty(game: ReachabilityGame, tree: SymbolicTree,
                             player: int) -> float:
    """Largest blocking total the player pays along any unfolding path,
    computed by bounded path relaxation: paths up to 2·|nodes|+1 steps give
    the maximum, and any improvement past that proves a pumpable cycle."""
    ids = list(tree.nodes)
    succ = {}
    charge = {}
    for nid in ids:
        node = tree.nodes[nid]
        refs = node.children or node.leaf_links
        succ[nid] = list(refs)
        kept = {tree.nodes[r].vertex for r in refs}
        total = sum(game.edge_weight(node.vertex, u)
                    for u in game.successors(node.vertex) if u not in kept)
        charge[nid] = total if game.owner[node.vertex] == player else 0
    best = {nid: None for nid in ids}
    best[tree.root] = 0
    rounds = 2 * len(ids) + 1
    for _ in range(rounds):
        changed = False
        for nid in ids:
            if best[nid] is None:
                continue
            reach = best[nid] + charge[nid]
            for nxt in succ[nid]:
                if best[nxt] is None or reach > best[nxt]:
                    best[nxt] = reach
                    changed = True
        if not changed:
            return float(max(v for v in best.values() if v is not None))
    for nid in ids:
        if best[nid] is None:
            continue
        reach = best[nid] + charge[nid]
        for nxt in succ[nid]:
            if best[nxt] is None or reach > best[nxt]:
                return INF
    return float(max(v for v in best.values() if v is not None))
