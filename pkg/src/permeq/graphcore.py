"""Graph analytics used by the witness checker and the solvers.

The two inner kernels (masked SCC, masked reachability) come from the
compiled extension `permeq._fastgraph` when it was built, otherwise from
the pure-Python twin `permeq._puregraph`.  Everything else is composed on
top of them.
"""

from __future__ import annotations

import math
from array import array

try:
    from . import _fastgraph as _backend

    BACKEND_NAME = "compiled"
except ImportError:  # pragma: no cover - depends on how the wheel was built
    from . import _puregraph as _backend

    BACKEND_NAME = "pure"

INF = math.inf


def build_csr(succ_lists: list[list[int]]) -> tuple[array, array]:
    """Flatten adjacency lists into (indptr, indices) arrays."""
    indptr = array("q", [0])
    indices = array("q")
    for row in succ_lists:
        indices.extend(row)
        indptr.append(len(indices))
    return indptr, indices


def reverse_csr(indptr, indices) -> tuple[array, array]:
    n = len(indptr) - 1
    rows: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        for j in range(indptr[v], indptr[v + 1]):
            rows[indices[j]].append(v)
    return build_csr(rows)


def _full_mask(n: int) -> bytearray:
    return bytearray(b"\x01" * n)


def reachable(indptr, indices, seeds, allowed: bytearray | None = None) -> bytearray:
    n = len(indptr) - 1
    if allowed is None:
        allowed = _full_mask(n)
    return _backend.reach_masked(indptr, indices, array("q", seeds), allowed)


def scc_ids(indptr, indices, allowed: bytearray | None = None):
    n = len(indptr) - 1
    if allowed is None:
        allowed = _full_mask(n)
    return _backend.scc_masked(indptr, indices, allowed)


def _cyclic_components(indptr, indices, comp, allowed) -> list[bool]:
    ncomp = max(comp, default=-1) + 1
    size = [0] * ncomp
    cyclic = [False] * ncomp
    for v, c in enumerate(comp):
        if c >= 0:
            size[c] += 1
    for v, c in enumerate(comp):
        if c < 0:
            continue
        if size[c] >= 2:
            cyclic[c] = True
            continue
        for j in range(indptr[v], indptr[v + 1]):
            if indices[j] == v and allowed[v]:
                cyclic[c] = True
                break
    return cyclic


def forever_mask(indptr, indices, allowed: bytearray) -> bytearray:
    """Nodes from which some infinite path stays inside `allowed` forever."""
    n = len(indptr) - 1
    comp = scc_ids(indptr, indices, allowed)
    cyclic = _cyclic_components(indptr, indices, comp, allowed)
    ncomp = len(cyclic)
    live = list(cyclic)
    order = sorted((c, v) for v, c in enumerate(comp) if c >= 0)
    for c, v in order:
        if live[c]:
            continue
        for j in range(indptr[v], indptr[v + 1]):
            u = indices[j]
            cu = comp[u]
            if cu >= 0 and cu != c and live[cu]:
                live[c] = True
                break
    # components only reach smaller ids, so a single ascending sweep settles
    # every component before anything that can reach it is inspected
    out = bytearray(n)
    for v, c in enumerate(comp):
        if c >= 0 and live[c]:
            out[v] = 1
    return out


def longest_value(indptr, indices, node_weight, start: int) -> float:
    """Maximal total node weight over infinite paths from `start`.

    Every visit of a node pays its weight again, so the value is infinite
    exactly when a cycle through a positive-weight node is reachable.
    Assumes every node reachable from `start` has at least one successor.
    """
    n = len(indptr) - 1
    seen = reachable(indptr, indices, [start])
    comp = scc_ids(indptr, indices)
    cyclic = _cyclic_components(indptr, indices, comp, _full_mask(n))
    for v in range(n):
        if seen[v] and node_weight[v] > 0 and cyclic[comp[v]]:
            return INF
    ncomp = len(cyclic)
    contrib = [0] * ncomp
    members: list[list[int]] = [[] for _ in range(ncomp)]
    for v in range(n):
        members[comp[v]].append(v)
        if not cyclic[comp[v]]:
            contrib[comp[v]] = node_weight[v]
    # a cyclic component reachable in the non-infinite case carries weight 0
    best = [0] * ncomp
    for c in range(ncomp):
        acc = 0
        for v in members[c]:
            for j in range(indptr[v], indptr[v + 1]):
                cu = comp[indices[j]]
                if cu != c and best[cu] > acc:
                    acc = best[cu]
        best[c] = acc + contrib[c]
    return float(best[comp[start]])
