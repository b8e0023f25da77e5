"""Threshold solver emitting single symbolic-tree witnesses.

The search grows one branch at a time, carrying a winner set, per-player
play obligations (every play below must win / no play below may win), and
the blocking penalties accumulated so far.  Branches end by linking onto
ancestors with the same vertex, winner set and tracked penalties; since a
link may leave the region an obligation marker governs, every completed
tree is audited before it is accepted.  Deviation values are pulled from a
pluggable source so the same engine serves both the plain solver (values
fixed by the game) and the forest solver (values guessed and verified
later).
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Iterator

from .game import INF, ReachabilityGame
from .graphcore import build_csr, forever_mask, reachable, reverse_csr
from .witness import SymbolicTree, TreeNode, TreeView, check_good_tree
from .zerosum import game_gamma

OBLIGE_ALL = "all"
OBLIGE_NONE = "none"

Index = tuple[int, str, frozenset]


class UnsupportedFiniteRetaliationError(ValueError):
    """Single-tree witnesses carry no punishment trees, so finite
    retaliation bounds cannot be decided for them."""


@dataclass(frozen=True)
class Objective:
    """Winning requirement on the emitted witness: nothing, some play wins
    for every named player, or every play does."""

    mode: str = "none"
    players: frozenset = frozenset()

    def __post_init__(self):
        if self.mode not in ("none", "weak", "strong"):
            raise ValueError(f"unknown objective mode {self.mode!r}")
        if self.mode == "none" and self.players:
            raise ValueError("an unconstrained objective cannot name players")

    @classmethod
    def weak(cls, players: Iterable[int]) -> "Objective":
        return cls("weak", frozenset(players))

    @classmethod
    def strong(cls, players: Iterable[int]) -> "Objective":
        return cls("strong", frozenset(players))


NO_OBJECTIVE = Objective()


@dataclass
class Stats:
    nodes_explored: int = 0
    elapsed_ms: float = 0.0


def height_bound(game: ReachabilityGame, d_players: Iterable[int],
                 caps: dict[int, int], mode: str = "none") -> int:
    """Tree height past which the search cannot learn anything new: along a
    branch the winner set grows at most |D| times, each obligation flips at
    most twice, tracked penalties rise at most their cap, and between those
    events at most |V| vertices can appear before a label repeats."""
    d = len(frozenset(d_players))
    alpha = (len(game.vertices) * max(1, d) * max(1, 2 * d)
             * max(1, sum(int(c) for c in caps.values())))
    return 3 * alpha if mode == "weak" else 2 * alpha


class FixedGamma:
    """Deviation values taken straight from the game: a blocked move is
    dangerous iff the deviator already won or can force a win alone."""

    def __init__(self, game: ReachabilityGame):
        self._value = game_gamma(game)
        # bumped per completed candidate so continuation guards stay honest
        self.version = 0
        self.completions = 0

    def resolve(self, queries: list[Index]) -> Iterator[dict]:
        yield {q: self._value(*q) for q in queries}


class _FailureGuard:
    """Memoized continuation: skip a re-run whose outcome cannot differ.

    Sibling subtrees never reference each other (leaves link to proper
    ancestors only, penalties ride the branch), so the continuation run
    after one subtree completes sees the subtree only through shared state:
    the deviation table and any trees finished along the way.  Both bump
    counters on every change.  A continuation that failed with no finished
    tree in flight, observed again at the same version, would replay the
    identical search, so it is skipped.

    Guards chain through `up` along the continuation stack.  Every success
    path from a node under construction runs through each guard above it,
    and forward construction only ever adds table entries, so a guard that
    failed at the current version dooms the whole construction; `chain_dead`
    lets the search prune before building anything."""

    __slots__ = ("gamma", "cont", "stamp", "up")

    def __init__(self, gamma, cont, up=None):
        self.gamma = gamma
        self.cont = cont
        self.stamp = None
        self.up = up

    def __call__(self):
        gamma = self.gamma
        if self.stamp is not None and self.stamp == gamma.version:
            return None
        before = gamma.completions
        result = self.cont()
        if not result:
            # a finished tree exposes subtree internals (snapshots, penalty
            # checks), so runs that completed one stay variant-sensitive
            self.stamp = gamma.version if gamma.completions == before else None
        return result

    def chain_dead(self) -> bool:
        version = self.gamma.version
        guard = self
        while guard is not None:
            if guard.stamp is not None and guard.stamp == version:
                return True
            guard = guard.up
        return False


def _obligation_maps(game: ReachabilityGame):
    """Graph-level satisfiability of play obligations, per player: from
    which vertices the target is reachable at all (necessary for "every
    play wins"), and from which every infinite path hits the target
    (fatal for "no play wins")."""
    order = {v: k for k, v in enumerate(game.vertices)}
    indptr, indices = build_csr(
        [[order[u] for u in game.successors(v)] for v in game.vertices])
    rindptr, rindices = reverse_csr(indptr, indices)
    can: dict[int, frozenset] = {}
    fatal: dict[int, frozenset] = {}
    for j in sorted(game.all_players):
        seeds = [order[v] for v in game.targets[j]]
        mask = reachable(rindptr, rindices, seeds)
        can[j] = frozenset(v for v in game.vertices if mask[order[v]])
        avoid = bytearray(0 if v in game.targets[j] else 1
                          for v in game.vertices)
        forever = forever_mask(indptr, indices, avoid)
        fatal[j] = frozenset(v for v in game.vertices
                             if avoid[order[v]] and not forever[order[v]])
    return can, fatal


class TreeSearch:
    """Depth-first construction of one symbolic tree.

    `run(on_complete)` invokes the continuation while the finished tree is
    still on the construction stack; a falsy return resumes the search, a
    truthy one is handed back unchanged.  The caller may snapshot the tree
    inside the continuation.
    """

    def __init__(self, game: ReachabilityGame, root_vertex: str,
                 pre_winners: frozenset, caps: dict[int, int],
                 objective: Objective, gamma, height_cap: int,
                 stats: Stats | None = None,
                 forbid: frozenset = frozenset(),
                 require_all: frozenset = frozenset(),
                 obligations=None):
        self.game = game
        self.root_vertex = root_vertex
        self.pre_winners = pre_winners
        self.caps = dict(caps)
        self.objective = objective
        self.gamma = gamma
        self.height_cap = height_cap
        self.stats = stats if stats is not None else Stats()
        self.forbid = frozenset(forbid)
        self.require_all = frozenset(require_all)
        if self.forbid & self.require_all:
            raise ValueError("a player cannot be both forced and forbidden to win")
        # nid -> [vertex, child ids, link ids]; labels are snapshots of the
        # search state at the node, parents give the ancestor chain (the
        # construction stack also holds finished siblings, so it cannot
        # serve as the ancestor chain)
        self.nodes: dict[int, list] = {}
        self.parent: dict[int, int | None] = {}
        self.label: dict[int, tuple] = {}
        self._next = 0
        if obligations is None:
            obligations = _obligation_maps(game)
        self._can_reach, self._fatal = obligations

    # -- public -----------------------------------------------------------

    def run(self, on_complete: Callable[[], object]):
        root_i = self.pre_winners | self.game.targets_at(self.root_vertex)
        m: dict[int, str] = {}
        for j in self.require_all:
            if j not in root_i:
                m[j] = OBLIGE_ALL
        for j in self.forbid:
            if j in root_i:
                return None
            if self.root_vertex in self._can_reach[j]:
                m[j] = OBLIGE_NONE  # vacuous otherwise: target unreachable
        p = {i: 0 for i in self.caps}
        flag = self.objective.mode == "weak"
        return self._branch(None, self.root_vertex, root_i, m, p, 0, flag,
                            on_complete)

    def snapshot(self) -> SymbolicTree:
        nodes = {nid: TreeNode(rec[0], tuple(rec[1]), tuple(rec[2]))
                 for nid, rec in self.nodes.items()}
        return SymbolicTree(root=0, nodes=nodes)

    # -- branch machinery ---------------------------------------------------

    def _branch(self, parent, vertex, winners, m, p, depth, flag, cont):
        if isinstance(cont, _FailureGuard) and cont.chain_dead():
            return None
        for j, ob in m.items():
            # an obligation that the graph itself cannot honour from here
            # dooms every completion of this branch
            if ob == OBLIGE_ALL and vertex not in self._can_reach[j]:
                return None
            if ob == OBLIGE_NONE and vertex in self._fatal[j]:
                return None
        self.stats.nodes_explored += 1
        if flag and self.objective.players <= winners:
            flag = False
        nid = self._next
        self._next += 1
        self.nodes[nid] = [vertex, [], []]
        if parent is not None:
            self.nodes[parent][1].append(nid)
        fm = tuple(sorted(m.items()))
        fp = tuple(sorted(p.items()))
        self.parent[nid] = parent
        self.label[nid] = (vertex, winners, fm, fp, flag)
        result = self._try_close(nid, vertex, winners, m, fp, flag, cont)
        if not result and depth < self.height_cap \
                and not self._repeated(nid, vertex, winners, fm, fp, flag):
            result = self._expansions(nid, vertex, winners, m, p, depth,
                                      flag, cont)
        if not result:
            del self.nodes[nid], self.parent[nid], self.label[nid]
            if parent is not None:
                self.nodes[parent][1].pop()
        return result

    def _ancestors(self, nid):
        a = self.parent[nid]
        while a is not None:
            yield a
            a = self.parent[a]

    def _repeated(self, nid, vertex, winners, fm, fp, flag) -> bool:
        # Growing the tree below a node whose exact context already appeared
        # on this branch cannot help: the subtree could hang at the earlier
        # occurrence instead (leaf links carry the leaf's own context, so
        # only an exact repeat guarantees the same link targets exist).
        # Closures onto equal-label ancestors stay available.
        label = (vertex, winners, fm, fp, flag)
        return any(self.label[a] == label for a in self._ancestors(nid))

    def _try_close(self, nid, vertex, winners, m, fp, flag, cont):
        if flag or OBLIGE_ALL in m.values():
            return None
        owner = self.game.owner[vertex]
        succ = self.game.successors(vertex)
        # Link targets only need the context the checker compares: vertex,
        # winner set and tracked penalties.  Obligation markers are search
        # bookkeeping; a link may leave their region, and the completion
        # audit rejects the tree if the region it lands in breaks them.
        table = {}
        for a in self._ancestors(nid):  # nearest first, so deepest wins
            la = self.label[a]
            if la[0] not in table and la[1] == winners and la[3] == fp:
                table[la[0]] = a
        pool = [u for u in succ if u in table]
        for size in range(len(pool), 0, -1):
            for kept in combinations(pool, size):
                blocked = [u for u in succ if u not in kept]
                charge = sum(self.game.edge_weight(vertex, u) for u in blocked)
                if charge and owner in self.caps:
                    continue  # a charged leaf sits on a cycle: infinite
                queries: list[Index] = []
                if owner not in winners:
                    queries = [(owner, u, winners | self.game.targets_at(u))
                               for u in blocked]
                for assign in self.gamma.resolve(queries):
                    if any(assign[q] for q in queries):
                        continue
                    links = self.nodes[nid][2]
                    links.extend(table[u] for u in kept)
                    result = cont()
                    if result:
                        return result
                    del links[:]
        return None

    def _expansions(self, nid, vertex, winners, m, p, depth, flag, cont):
        owner = self.game.owner[vertex]
        succ = self.game.successors(vertex)
        for size in range(len(succ), 0, -1):
            for kept in combinations(succ, size):
                blocked = [u for u in succ if u not in kept]
                charge = sum(self.game.edge_weight(vertex, u) for u in blocked)
                if owner in self.caps and p[owner] + charge > self.caps[owner]:
                    continue
                queries: list[Index] = []
                if owner not in winners:
                    queries = [(owner, u, winners | self.game.targets_at(u))
                               for u in blocked]
                for assign in self.gamma.resolve(queries):
                    forced = any(assign[q] for q in queries)
                    if forced and m.get(owner) == OBLIGE_NONE:
                        continue
                    if forced:
                        guesses = [OBLIGE_ALL]
                    elif (size >= 2 and owner not in winners
                          and owner not in m
                          and vertex in self._can_reach[owner]):
                        guesses = [OBLIGE_NONE, OBLIGE_ALL]
                    else:
                        guesses = [None]  # unchanged, or vacuously none
                    for guess in guesses:
                        m1 = dict(m)
                        if guess is not None:
                            m1[owner] = guess
                        specs = self._child_specs(kept, winners, m1, p,
                                                  owner, charge)
                        if specs is None:
                            continue
                        carriers = range(len(specs)) if flag else (None,)
                        for carrier in carriers:
                            result = self._grow(nid, specs, 0, depth + 1,
                                                carrier, cont)
                            if result:
                                return result
        return None

    def _child_specs(self, kept, winners, m1, p, owner, charge):
        """Labels of the children for one kept set, or None when a child
        would make a forbidden player win."""
        specs = []
        for u in kept:
            ci = winners | self.game.targets_at(u)
            cm = dict(m1)
            for j in ci:
                v = cm.get(j)
                if v == OBLIGE_NONE:
                    return None
                if v == OBLIGE_ALL:
                    del cm[j]
            for j, v in list(cm.items()):
                # a no-play-wins obligation turns vacuous once the target
                # can no longer be reached; keeping the marker would only
                # split semantically equal labels
                if v == OBLIGE_NONE and u not in self._can_reach[j]:
                    del cm[j]
            cp = dict(p)
            if owner in cp:
                cp[owner] += charge
            specs.append((u, ci, cm, cp))
        return specs

    def _grow(self, nid, specs, k, depth, carrier, cont):
        if k == len(specs):
            return cont()
        u, ci, cm, cp = specs[k]
        tail = _FailureGuard(
            self.gamma,
            lambda: self._grow(nid, specs, k + 1, depth, carrier, cont),
            up=cont if isinstance(cont, _FailureGuard) else None)
        return self._branch(nid, u, ci, cm, cp, depth, carrier == k, tail)


# ---------------------------------------------------------------------------
# plain solver


@dataclass
class NeReport:
    answer: bool
    witness: SymbolicTree | None
    penalties: dict[int, float] | None
    stats: Stats
    bound: int


def _finite_caps(thresholds: dict[int, float] | None) -> dict[int, int]:
    if not thresholds:
        return {}
    return {i: int(b) for i, b in thresholds.items() if b != INF}


def audit_tree_witness(game: ReachabilityGame, tree: SymbolicTree,
                       main: dict[int, float], objective: Objective,
                       bound: int) -> tuple[list[str], dict[int, float]]:
    """Re-check a candidate witness from scratch.  Returns the list of
    defects (empty for a valid witness) and the measured penalties."""
    tracked = frozenset(_finite_caps(main))
    report = check_good_tree(game, tree, tracked=tracked)
    errors = list(report.all_problems())
    for i, b in (main or {}).items():
        if b != INF and report.penalties.get(i, 0) > b:
            errors.append(f"player {i} penalty {report.penalties[i]} exceeds {b}")
    if objective.mode != "none":
        view = TreeView(game, tree, game.initial_winners, tracked)
        if not view.winning_ok(objective.players, objective.mode):
            errors.append(f"witness is not {objective.mode}ly winning for "
                          f"{sorted(objective.players)}")
    if tree.height() > bound:
        errors.append(f"witness height {tree.height()} exceeds bound {bound}")
    return errors, report.penalties


def validate_tree_witness(game: ReachabilityGame, tree: SymbolicTree,
                          main: dict[int, float], objective: Objective,
                          bound: int) -> dict[int, float]:
    """Like the audit, but any defect raises."""
    errors, penalties = audit_tree_witness(game, tree, main, objective, bound)
    if errors:
        raise RuntimeError("invalid witness: " + "; ".join(errors))
    return penalties


def solve_ne(game: ReachabilityGame, main: dict[int, float],
             objective: Objective = NO_OBJECTIVE,
             retaliation: dict[int, float] | None = None,
             height_cap: int | None = None) -> NeReport:
    """Decide whether some good tree stays within the main-penalty
    thresholds (and satisfies the winning objective); YES answers carry a
    re-validated witness."""
    if retaliation and any(b != INF for b in retaliation.values()):
        raise UnsupportedFiniteRetaliationError(
            "single-tree equilibria do not support finite retaliation bounds")
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 150000))
    caps = _finite_caps(main)
    pre = game.initial_winners
    bound = height_cap if height_cap is not None else height_bound(
        game, game.all_players - pre, caps, objective.mode)
    stats = Stats()
    require_all = (objective.players if objective.mode == "strong"
                   else frozenset())
    gamma = FixedGamma(game)
    search = TreeSearch(game, game.init, pre, caps, objective,
                        gamma, bound, stats, require_all=require_all)
    found: dict = {}

    def accept():
        # Links may cross obligation regions, so a completed tree is a
        # candidate, not a certificate; audit it and resume on any defect.
        gamma.version += 1
        gamma.completions += 1
        tree = search.snapshot()
        errors, penalties = audit_tree_witness(game, tree, main, objective,
                                               bound)
        if errors:
            return None
        found["penalties"] = penalties
        return tree

    start = time.perf_counter()
    tree = search.run(accept)
    stats.elapsed_ms = (time.perf_counter() - start) * 1000.0
    if tree is None:
        return NeReport(False, None, None, stats, bound)
    return NeReport(True, tree, found["penalties"], stats, bound)
