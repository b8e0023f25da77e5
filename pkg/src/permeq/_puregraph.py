"""Pure-Python graph kernels (fallback for the compiled extension).

Both backends expose the same two primitives over CSR adjacency:
masked strongly-connected components and masked reachability.
"""

from __future__ import annotations

from array import array


def scc_masked(indptr, indices, allowed):
    """Tarjan over the subgraph induced by `allowed`.

    Returns an array of component ids (-1 for masked-out nodes).  Ids are
    assigned in reverse topological order: a component only reaches
    components with smaller or equal id.
    """
    n = len(indptr) - 1
    comp = array("q", [-1]) * n
    low = [0] * n
    num = [-1] * n
    onstack = bytearray(n)
    sstack: list[int] = []
    work: list[tuple[int, int]] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if not allowed[root] or num[root] >= 0:
            continue
        num[root] = low[root] = counter
        counter += 1
        sstack.append(root)
        onstack[root] = 1
        work.append((root, indptr[root]))
        while work:
            v, j = work[-1]
            if j < indptr[v + 1]:
                work[-1] = (v, j + 1)
                u = indices[j]
                if not allowed[u]:
                    continue
                if num[u] < 0:
                    num[u] = low[u] = counter
                    counter += 1
                    sstack.append(u)
                    onstack[u] = 1
                    work.append((u, indptr[u]))
                elif onstack[u] and num[u] < low[v]:
                    low[v] = num[u]
            else:
                work.pop()
                if work:
                    pv = work[-1][0]
                    if low[v] < low[pv]:
                        low[pv] = low[v]
                if low[v] == num[v]:
                    while True:
                        u = sstack.pop()
                        onstack[u] = 0
                        comp[u] = ncomp
                        if u == v:
                            break
                    ncomp += 1
    return comp


def reach_masked(indptr, indices, seeds, allowed):
    """Nodes reachable from `seeds` through the subgraph induced by `allowed`."""
    n = len(indptr) - 1
    seen = bytearray(n)
    stack: list[int] = []
    for s in seeds:
        if allowed[s] and not seen[s]:
            seen[s] = 1
            stack.append(s)
    while stack:
        v = stack.pop()
        for j in range(indptr[v], indptr[v + 1]):
            u = indices[j]
            if allowed[u] and not seen[u]:
                seen[u] = 1
                stack.append(u)
    return seen
