"""Zero-sum reachability analysis: one player against the coalition of all
others.  Classical attractor computation with out-degree counters."""

from __future__ import annotations

from typing import Callable

from .game import ReachabilityGame


def winning_region(game: ReachabilityGame, player: int) -> frozenset[str]:
    """Vertices from which `player` can force a visit to their target set,
    no matter what the other players do."""
    pred: dict[str, list[str]] = {v: [] for v in game.vertices}
    for v in game.vertices:
        for u in game.successors(v):
            pred[u].append(v)
    # for coalition vertices, count how many successors still escape
    remaining = {v: len(game.successors(v)) for v in game.vertices}
    win = set(game.targets[player])
    queue = list(win)
    while queue:
        u = queue.pop()
        for v in pred[u]:
            if v in win:
                continue
            if game.owner[v] == player:
                win.add(v)
                queue.append(v)
            else:
                remaining[v] -= 1
                if remaining[v] == 0:
                    win.add(v)
                    queue.append(v)
    return frozenset(win)


def coalition_safety_strategy(game: ReachabilityGame, player: int) -> dict[str, str]:
    """Joint positional strategy of everyone but `player` that keeps the play
    outside the target set of `player` whenever possible.

    Defined on vertices not owned by `player` and outside their winning
    region: picks a successor that again avoids the winning region.
    """
    win = winning_region(game, player)
    strategy: dict[str, str] = {}
    for v in game.vertices:
        if game.owner[v] == player or v in win:
            continue
        safe = [u for u in game.successors(v) if u not in win]
        # v is outside the attractor, so some successor must escape too
        strategy[v] = safe[0]
    return strategy


def game_gamma(game: ReachabilityGame) -> Callable[[int, str, frozenset[int]], int]:
    """Deviation value table of the bare game: a deviation by `player` to
    vertex `u` after the winner set `winners` is worth 1 iff the player
    already won or can force a win from `u` on their own."""
    regions = {i: winning_region(game, i) for i in game.all_players}

    def gamma(player: int, u: str, winners: frozenset[int]) -> int:
        if player in winners or u in regions[player]:
            return 1
        return 0

    return gamma
