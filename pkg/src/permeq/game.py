"""Finite multiplayer reachability games on weighted directed graphs.

A game has players 1..n, a deadlock-free digraph whose vertices are
partitioned among the players, one target set per player, an initial
vertex and natural edge weights (default 1).  Player i wins a play iff
the play ever visits a vertex of their target set, the initial vertex
included.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

INF = math.inf

_GAME_KEYS = {"players", "vertices", "edges", "targets", "init"}
_VERTEX_KEYS = {"id", "owner"}
_EDGE_KEYS = {"from", "to", "weight"}


class GameFormatError(ValueError):
    """Raised when a game description is structurally invalid."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise GameFormatError(msg)


@dataclass
class ReachabilityGame:
    """Immutable-by-convention game arena.

    `owner` maps vertex -> player, `succ` maps vertex -> sorted tuple of
    successors, `weight` maps (v, u) -> int, `targets` maps player ->
    frozenset of vertices.
    """

    players: int
    owner: dict[str, int]
    succ: dict[str, tuple[str, ...]]
    weight: dict[tuple[str, str], int]
    targets: dict[int, frozenset[str]]
    init: str

    vertices: tuple[str, ...] = field(init=False)
    all_players: frozenset[int] = field(init=False)

    def __post_init__(self) -> None:
        _require(isinstance(self.players, int) and self.players >= 1,
                 "players must be a positive integer")
        self.vertices = tuple(sorted(self.owner))
        self.all_players = frozenset(range(1, self.players + 1))
        _require(len(self.vertices) >= 1, "game needs at least one vertex")
        for v, p in self.owner.items():
            _require(p in self.all_players, f"vertex {v!r} owned by unknown player {p}")
        for v, ss in self.succ.items():
            _require(v in self.owner, f"edge source {v!r} is not a vertex")
            _require(len(ss) >= 1, f"vertex {v!r} has no successor (deadlock)")
            _require(len(set(ss)) == len(ss), f"duplicate edges out of {v!r}")
            for u in ss:
                _require(u in self.owner, f"edge target {u!r} is not a vertex")
        for v in self.vertices:
            _require(v in self.succ, f"vertex {v!r} has no successor (deadlock)")
        for (v, u), w in self.weight.items():
            _require(isinstance(w, int) and w >= 0,
                     f"edge ({v!r}, {u!r}) has invalid weight {w!r}")
        for p, fs in self.targets.items():
            _require(p in self.all_players, f"targets listed for unknown player {p}")
            for v in fs:
                _require(v in self.owner, f"target {v!r} of player {p} is not a vertex")
        for p in self.all_players:
            self.targets.setdefault(p, frozenset())
        _require(self.init in self.owner, f"initial vertex {self.init!r} is not a vertex")
        self._targets_at = {
            v: frozenset(p for p in self.all_players if v in self.targets[p])
            for v in self.vertices
        }

    # -- basic queries ---------------------------------------------------

    def successors(self, v: str) -> tuple[str, ...]:
        return self.succ[v]

    def edge_weight(self, v: str, u: str) -> int:
        return self.weight.get((v, u), 1)

    def has_edge(self, v: str, u: str) -> bool:
        return u in self.succ.get(v, ())

    def targets_at(self, v: str) -> frozenset[int]:
        """Players whose target set contains v."""
        return self._targets_at[v]

    @property
    def initial_winners(self) -> frozenset[int]:
        """Players that win every play outright because the initial vertex
        already lies in their target set."""
        return self._targets_at[self.init]

    # -- (de)serialisation -------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ReachabilityGame":
        _require(isinstance(data, dict), "game description must be an object")
        unknown = set(data) - _GAME_KEYS
        _require(not unknown, f"unknown keys in game description: {sorted(unknown)}")
        for key in _GAME_KEYS:
            _require(key in data, f"game description misses key {key!r}")
        owner: dict[str, int] = {}
        for entry in data["vertices"]:
            _require(isinstance(entry, dict), "vertex entries must be objects")
            unknown = set(entry) - _VERTEX_KEYS
            _require(not unknown, f"unknown keys in vertex entry: {sorted(unknown)}")
            _require("id" in entry and "owner" in entry,
                     "vertex entries need 'id' and 'owner'")
            vid = entry["id"]
            _require(isinstance(vid, str), f"vertex id {vid!r} must be a string")
            _require(vid not in owner, f"duplicate vertex id {vid!r}")
            owner[vid] = entry["owner"]
        succ: dict[str, list[str]] = {v: [] for v in owner}
        weight: dict[tuple[str, str], int] = {}
        for entry in data["edges"]:
            _require(isinstance(entry, dict), "edge entries must be objects")
            unknown = set(entry) - _EDGE_KEYS
            _require(not unknown, f"unknown keys in edge entry: {sorted(unknown)}")
            _require("from" in entry and "to" in entry, "edge entries need 'from' and 'to'")
            v, u = entry["from"], entry["to"]
            _require(v in owner, f"edge source {v!r} is not a declared vertex")
            _require(u in owner, f"edge target {u!r} is not a declared vertex")
            _require(u not in succ[v], f"duplicate edge ({v!r}, {u!r})")
            succ[v].append(u)
            if "weight" in entry:
                weight[(v, u)] = entry["weight"]
        targets: dict[int, frozenset[str]] = {}
        _require(isinstance(data["targets"], dict), "'targets' must be an object")
        for key, vs in data["targets"].items():
            try:
                p = int(key)
            except (TypeError, ValueError):
                raise GameFormatError(f"target key {key!r} is not a player number")
            _require(p not in targets, f"duplicate target entry for player {p}")
            targets[p] = frozenset(vs)
        return cls(
            players=data["players"],
            owner=owner,
            succ={v: tuple(sorted(us)) for v, us in succ.items()},
            weight=weight,
            targets=targets,
            init=data["init"],
        )

    @classmethod
    def from_json_file(cls, path: str) -> "ReachabilityGame":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "players": self.players,
            "vertices": [{"id": v, "owner": self.owner[v]} for v in self.vertices],
            "edges": [
                {"from": v, "to": u, **({"weight": self.weight[(v, u)]}
                                        if (v, u) in self.weight else {})}
                for v in self.vertices
                for u in self.succ[v]
            ],
            "targets": {str(p): sorted(self.targets[p]) for p in sorted(self.all_players)},
            "init": self.init,
        }


def visit_set(game: ReachabilityGame, history: Iterable[str]) -> frozenset[int]:
    """Players whose target set is visited by the history at positions >= 1.

    The first element of the history is its starting vertex and does not
    count; use `game.initial_winners` for the position-0 contribution.
    """
    won: set[int] = set()
    for k, v in enumerate(history):
        if k >= 1:
            won |= game.targets_at(v)
    return frozenset(won)


@dataclass
class Lasso:
    """Ultimately periodic play: prefix followed by a repeated cycle."""

    prefix: tuple[str, ...]
    cycle: tuple[str, ...]

    def winners(self, game: ReachabilityGame) -> frozenset[int]:
        """Players that win the play, counting the starting vertex."""
        won: set[int] = set()
        for v in self.prefix:
            won |= game.targets_at(v)
        for v in self.cycle:
            won |= game.targets_at(v)
        return frozenset(won)


def parse_thresholds(game: ReachabilityGame, spec_str: str | None) -> dict[int, float]:
    """Parse "1=2,2=inf" style penalty bounds; absent players default to inf."""
    bounds: dict[int, float] = {p: INF for p in game.all_players}
    if not spec_str:
        return bounds
    for part in spec_str.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            key, raw = part.split("=", 1)
            player = int(key)
        except ValueError:
            raise GameFormatError(f"bad threshold entry {part!r} (expected player=value)")
        raw = raw.strip().lower()
        if raw in ("inf", "infinity", "oo"):
            value: float = INF
        else:
            try:
                value = int(raw)
            except ValueError:
                raise GameFormatError(f"bad threshold value {raw!r} for player {player}")
            _require(value >= 0, f"threshold for player {player} must be >= 0")
        _require(player in game.all_players, f"threshold names unknown player {player}")
        bounds[player] = value
    return bounds
