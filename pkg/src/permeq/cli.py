"""Command-line surface.

Commands: validate, winning-region, solve (ne|spe), check-witness, oracle
(check|enumerate).  Every command prints a single JSON object on stdout and
communicates the verdict through the exit code: 0 = YES, 1 = NO, 2 =
usage/data error, 3 = unsupported combination.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .game import INF, GameFormatError, ReachabilityGame, parse_thresholds
from .machines import extract_multistrategy_ne, extract_multistrategy_spe
from .ne import (NO_OBJECTIVE, Objective, Stats,
                 UnsupportedFiniteRetaliationError, _finite_caps, height_bound,
                 solve_ne)
from .oracle import enumerate_small_witnesses, oracle_permissive_check
from .spe import solve_spe
from .witness import (SymbolicForest, SymbolicTree, TreeView,
                      WitnessFormatError, check_good_forest, check_good_tree,
                      forest_to_dot, load_witness, save_witness, tree_to_dot)
from .zerosum import winning_region


class EmptyWitnessError(ValueError):
    """Raised when an output artifact is requested for a witness that is
    not there."""


def _emit_dot(game, witness, path: str) -> None:
    if witness is None:
        raise EmptyWitnessError("EmptyWitness: no witness to render")
    if isinstance(witness, SymbolicForest):
        text = forest_to_dot(game, witness)
    else:
        text = tree_to_dot(game, witness)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _pen_json(penalties: dict[int, float] | None) -> dict:
    out = {}
    for player, value in (penalties or {}).items():
        out[str(player)] = "inf" if value == INF else int(value)
    return out


def _report(answer: bool, main=None, retaliation=None, witness_path=None,
            stats: Stats | None = None, **extra) -> dict:
    body = {
        "answer": "YES" if answer else "NO",
        "penalties": {"main": _pen_json(main),
                      "retaliation": _pen_json(retaliation)},
        "stats": {
            "nodes_explored": stats.nodes_explored if stats else 0,
            "elapsed_ms": round(stats.elapsed_ms, 3) if stats else 0.0,
        },
    }
    if witness_path is not None:
        body["witness_path"] = witness_path
    body.update(extra)
    return body


def _print(body: dict) -> None:
    sys.stdout.write(json.dumps(body, sort_keys=True) + "\n")


def _load_game(path: str) -> ReachabilityGame:
    return ReachabilityGame.from_json_file(path)


def _parse_players(game: ReachabilityGame, text: str) -> frozenset:
    players = frozenset(int(p) for p in text.split(",") if p.strip())
    bad = players - game.all_players
    if bad:
        raise GameFormatError(f"unknown players {sorted(bad)}")
    return players


def _objective(game: ReachabilityGame, args) -> Objective:
    if getattr(args, "weak", None):
        return Objective.weak(_parse_players(game, args.weak))
    if getattr(args, "strong", None):
        return Objective.strong(_parse_players(game, args.strong))
    return NO_OBJECTIVE


def _thresholds(game: ReachabilityGame, text: str | None) -> dict[int, float]:
    if not text:
        return {}
    return parse_thresholds(game, text)


def _cmd_validate(args) -> int:
    game = _load_game(args.game)
    _print({
        "answer": "YES",
        "players": len(game.all_players),
        "vertices": len(game.vertices),
        "edges": sum(len(game.successors(v)) for v in game.vertices),
        "initial_winners": sorted(game.initial_winners),
    })
    return 0


def _cmd_winning_region(args) -> int:
    game = _load_game(args.game)
    if args.player not in game.all_players:
        raise GameFormatError(f"unknown player {args.player}")
    region = winning_region(game, args.player)
    _print({"player": args.player, "region": sorted(region)})
    return 0


def _solve_outputs(game, args, witness, report_body) -> dict:
    if witness is not None and args.witness_out:
        save_witness(witness, args.witness_out)
        report_body["witness_path"] = args.witness_out
    if witness is not None and args.dot:
        _emit_dot(game, witness, args.dot)
    return report_body


def _cmd_solve(args) -> int:
    game = _load_game(args.game)
    main = _thresholds(game, args.main)
    retaliation = _thresholds(game, args.retaliation)
    objective = _objective(game, args)
    if args.concept == "ne":
        result = solve_ne(game, main, objective=objective,
                          retaliation=retaliation or None,
                          height_cap=args.height_cap)
        body = _report(result.answer, result.penalties, None,
                       stats=result.stats)
        witness = result.witness
    else:
        result = solve_spe(game, main, retaliation=retaliation or None,
                           objective=objective, height_cap=args.height_cap)
        body = _report(result.answer, result.main_penalties,
                       result.retaliation_penalties, stats=result.stats)
        witness = result.witness
    if args.height_cap is not None:
        natural = height_bound(game, game.all_players - game.initial_winners,
                               _finite_caps(main), objective.mode)
        if args.height_cap < natural:
            # capped below the exhaustiveness bound: a NO is inconclusive
            body["incomplete"] = True
            body["height_bound"] = natural
    _solve_outputs(game, args, witness, body)
    _print(body)
    return 0 if result.answer else 1


def _check_tree(game, tree, main, objective):
    caps = _finite_caps(main)
    report = check_good_tree(game, tree, tracked=frozenset(caps))
    problems = list(report.all_problems())
    for i, b in main.items():
        if b != INF and report.good and report.penalties.get(i, 0) > b:
            problems.append(f"player {i} main penalty over {int(b)}")
    if objective.mode != "none" and not problems:
        view = TreeView(game, tree, game.initial_winners, frozenset(caps))
        if not view.winning_ok(objective.players, objective.mode):
            problems.append(f"witness is not {objective.mode}ly winning")
    return problems, report.penalties if report.good else None, None


def _check_forest(game, forest, main, retaliation, objective):
    main_caps = _finite_caps(main)
    retal_caps = _finite_caps(retaliation)
    report = check_good_forest(game, forest,
                               main_tracked=frozenset(main_caps),
                               retaliation_tracked=frozenset(retal_caps))
    problems = list(report.all_problems())
    if report.good:
        for i, b in main.items():
            if b != INF and report.main_penalties.get(i, 0) > b:
                problems.append(f"player {i} main penalty over {int(b)}")
        for i, b in retaliation.items():
            if b != INF and report.retaliation_penalties.get(i, 0) > b:
                problems.append(f"player {i} retaliation penalty over {int(b)}")
        if objective.mode != "none":
            view = TreeView(game, forest.main, game.initial_winners,
                            frozenset(main_caps))
            if not view.winning_ok(objective.players, objective.mode):
                problems.append(f"witness is not {objective.mode}ly winning")
    main_pen = report.main_penalties if report.good else None
    retal_pen = report.retaliation_penalties if report.good else None
    return problems, main_pen, retal_pen


def _cmd_check_witness(args) -> int:
    game = _load_game(args.game)
    witness = load_witness(args.witness)
    main = _thresholds(game, args.main)
    retaliation = _thresholds(game, args.retaliation)
    objective = _objective(game, args)
    start = time.perf_counter()
    if isinstance(witness, SymbolicForest):
        problems, main_pen, retal_pen = _check_forest(
            game, witness, main, retaliation, objective)
    else:
        if retaliation and any(b != INF for b in retaliation.values()):
            raise GameFormatError(
                "retaliation thresholds need a forest witness")
        problems, main_pen, retal_pen = _check_tree(
            game, witness, main, objective)
    stats = Stats(nodes_explored=len(witness.main.nodes)
                  if isinstance(witness, SymbolicForest)
                  else len(witness.nodes),
                  elapsed_ms=(time.perf_counter() - start) * 1000.0)
    ok = not problems
    body = _report(ok, main_pen, retal_pen, stats=stats)
    if problems:
        body["problems"] = problems
    if args.dot:
        _emit_dot(game, witness, args.dot)
    _print(body)
    return 0 if ok else 1


def _cmd_oracle(args) -> int:
    game = _load_game(args.game)
    if args.action == "check":
        if not args.witness:
            raise GameFormatError("oracle check needs a witness file")
        witness = load_witness(args.witness)
        if isinstance(witness, SymbolicForest):
            machine = extract_multistrategy_spe(game, witness)
        else:
            machine = extract_multistrategy_ne(game, witness)
        found = oracle_permissive_check(game, machine, args.concept,
                                        cap=args.cap)
        if found is None:
            _print({"answer": "YES", "counterexample": None})
            return 0
        _print({"answer": "NO",
                "counterexample": {"player": found.player,
                                   "vertex": found.vertex,
                                   "move": found.move,
                                   "detail": found.detail}})
        return 1
    # enumerate
    main = _thresholds(game, args.main)
    objective = _objective(game, args)
    start = time.perf_counter()
    witness = enumerate_small_witnesses(game, args.height_cap, main,
                                        objective, concept=args.concept)
    stats = Stats(elapsed_ms=(time.perf_counter() - start) * 1000.0)
    body = _report(witness is not None, stats=stats)
    if witness is not None and args.witness_out:
        save_witness(witness, args.witness_out)
        body["witness_path"] = args.witness_out
    _print(body)
    return 0 if witness is not None else 1


def _add_threshold_flags(parser: argparse.ArgumentParser,
                         retaliation: bool = True) -> None:
    parser.add_argument("--main", metavar="i=k,...",
                        help="main penalty thresholds (k a natural or inf)")
    if retaliation:
        parser.add_argument("--retaliation", metavar="i=k,...",
                            help="retaliation penalty thresholds")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--weak", metavar="i,...",
                       help="require some outcome to win for these players")
    group.add_argument("--strong", metavar="i,...",
                       help="require every outcome to win for these players")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permeq",
        description="solve and check permissive equilibria in multiplayer "
                    "reachability games")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and sanity-check a game file")
    p.add_argument("game")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("winning-region",
                       help="vertices from which one player can force a win")
    p.add_argument("game")
    p.add_argument("--player", type=int, required=True)
    p.set_defaults(func=_cmd_winning_region)

    p = sub.add_parser("solve", help="decide the threshold problems")
    p.add_argument("concept", choices=["ne", "spe"])
    p.add_argument("game")
    _add_threshold_flags(p)
    p.add_argument("--witness-out", metavar="PATH")
    p.add_argument("--dot", metavar="PATH")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker budget (reserved; the search is sequential)")
    p.add_argument("--height-cap", type=int, default=None,
                   help="override the computed height bound (results are "
                        "marked incomplete when lower)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("check-witness", help="re-check a written witness")
    p.add_argument("game")
    p.add_argument("witness")
    _add_threshold_flags(p)
    p.add_argument("--dot", metavar="PATH")
    p.set_defaults(func=_cmd_check_witness)

    p = sub.add_parser("oracle", help="brute-force reference tools")
    p.add_argument("action", choices=["check", "enumerate"])
    p.add_argument("game")
    p.add_argument("witness", nargs="?")
    p.add_argument("--concept", choices=["ne", "spe"], default="ne")
    p.add_argument("--main", metavar="i=k,...")
    p.add_argument("--height-cap", type=int, default=6)
    p.add_argument("--cap", type=int, default=10 ** 6)
    p.add_argument("--witness-out", metavar="PATH")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--weak", metavar="i,...")
    group.add_argument("--strong", metavar="i,...")
    p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UnsupportedFiniteRetaliationError as exc:
        _print({"answer": "UNSUPPORTED", "error": str(exc)})
        return 3
    except (GameFormatError, WitnessFormatError, EmptyWitnessError,
            json.JSONDecodeError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
