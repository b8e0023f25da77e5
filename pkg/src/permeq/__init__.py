"""Permissive equilibria in multiplayer reachability games.

Decide whether a game admits a permissive Nash or subgame-perfect
equilibrium under main/retaliation penalty thresholds and weak/strong
winning objectives, produce finite symbolic witnesses, and turn them into
executable multi-strategy machines.
"""

from .game import (INF, GameFormatError, Lasso, ReachabilityGame,
                   parse_thresholds)
from .graphcore import BACKEND_NAME
from .machines import (ForestMachine, TreeMachine, extract_multistrategy_ne,
                       extract_multistrategy_spe)
from .ne import (NO_OBJECTIVE, NeReport, Objective, Stats,
                 UnsupportedFiniteRetaliationError, height_bound, solve_ne)
from .oracle import (NonSingletonError, OracleCapExceeded, Refutation,
                     all_pattern_trees, best_response,
                     brute_force_tree_penalty,
                     enumerate_memoryless_multiprofiles,
                     enumerate_small_forests, enumerate_small_witnesses,
                     is_nash, is_very_weak_spe, oracle_permissive_check)
from .spe import SpeReport, solve_spe
from .witness import (MissingTreeError, SymbolicForest, SymbolicTree,
                      TreeNode, TreeView, WitnessFormatError,
                      check_good_forest, check_good_tree, compute_out_set,
                      forest_from_dict, forest_to_dict, forest_to_dot,
                      format_index, load_witness, save_witness,
                      sort_indices, tree_from_dict, tree_penalty,
                      tree_to_dict, tree_to_dot)
from .zerosum import coalition_safety_strategy, game_gamma, winning_region

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME", "ForestMachine", "GameFormatError", "INF", "Lasso",
    "MissingTreeError", "NO_OBJECTIVE", "NeReport", "NonSingletonError",
    "Objective", "OracleCapExceeded", "ReachabilityGame", "Refutation",
    "SpeReport", "Stats", "SymbolicForest", "SymbolicTree", "TreeMachine",
    "TreeNode", "TreeView", "UnsupportedFiniteRetaliationError",
    "WitnessFormatError", "all_pattern_trees", "best_response",
    "brute_force_tree_penalty", "check_good_forest", "check_good_tree",
    "coalition_safety_strategy", "compute_out_set",
    "enumerate_memoryless_multiprofiles", "enumerate_small_forests",
    "enumerate_small_witnesses", "extract_multistrategy_ne",
    "extract_multistrategy_spe", "forest_from_dict", "forest_to_dict",
    "forest_to_dot", "format_index", "game_gamma", "height_bound",
    "is_nash", "is_very_weak_spe", "load_witness", "oracle_permissive_check",
    "parse_thresholds", "save_witness", "solve_ne", "solve_spe",
    "sort_indices", "tree_from_dict", "tree_penalty", "tree_to_dict",
    "tree_to_dot", "winning_region", "__version__",
]
