# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels: masked SCC and masked reachability over CSR.

Semantics match permeq._puregraph exactly (same component ids, same
returned container types); this version just runs on typed buffers.
"""

from array import array as _pyarray


def scc_masked(indptr_obj, indices_obj, allowed_obj):
    """Tarjan over the subgraph induced by `allowed`; ids are assigned in
    reverse topological order, -1 for masked-out nodes."""
    cdef const long long[:] indptr = indptr_obj
    cdef const long long[:] indices = indices_obj
    cdef const unsigned char[:] allowed = allowed_obj
    cdef Py_ssize_t n = indptr.shape[0] - 1
    comp_obj = _pyarray("q", [-1]) * n
    if n == 0:
        return comp_obj
    cdef long long[:] comp = comp_obj
    low_obj = _pyarray("q", [0]) * n
    num_obj = _pyarray("q", [-1]) * n
    stack_obj = _pyarray("q", [0]) * n
    workv_obj = _pyarray("q", [0]) * n
    workj_obj = _pyarray("q", [0]) * n
    cdef long long[:] low = low_obj
    cdef long long[:] num = num_obj
    cdef long long[:] sstack = stack_obj
    cdef long long[:] workv = workv_obj
    cdef long long[:] workj = workj_obj
    onstack_obj = bytearray(n)
    cdef unsigned char[:] onstack = onstack_obj
    cdef Py_ssize_t sp = 0      # scc stack top
    cdef Py_ssize_t wp = 0      # work stack top
    cdef long long counter = 0
    cdef long long ncomp = 0
    cdef long long root, v, u, j, pv
    for root in range(n):
        if not allowed[root] or num[root] >= 0:
            continue
        num[root] = counter
        low[root] = counter
        counter += 1
        sstack[sp] = root
        sp += 1
        onstack[root] = 1
        workv[wp] = root
        workj[wp] = indptr[root]
        wp += 1
        while wp > 0:
            v = workv[wp - 1]
            j = workj[wp - 1]
            if j < indptr[v + 1]:
                workj[wp - 1] = j + 1
                u = indices[j]
                if not allowed[u]:
                    continue
                if num[u] < 0:
                    num[u] = counter
                    low[u] = counter
                    counter += 1
                    sstack[sp] = u
                    sp += 1
                    onstack[u] = 1
                    workv[wp] = u
                    workj[wp] = indptr[u]
                    wp += 1
                elif onstack[u] and num[u] < low[v]:
                    low[v] = num[u]
            else:
                wp -= 1
                if wp > 0:
                    pv = workv[wp - 1]
                    if low[v] < low[pv]:
                        low[pv] = low[v]
                if low[v] == num[v]:
                    while True:
                        sp -= 1
                        u = sstack[sp]
                        onstack[u] = 0
                        comp[u] = ncomp
                        if u == v:
                            break
                    ncomp += 1
    return comp_obj


def reach_masked(indptr_obj, indices_obj, seeds_obj, allowed_obj):
    """Nodes reachable from `seeds` through the subgraph induced by
    `allowed`, as a byte mask."""
    cdef const long long[:] indptr = indptr_obj
    cdef const long long[:] indices = indices_obj
    cdef const long long[:] seeds = seeds_obj
    cdef const unsigned char[:] allowed = allowed_obj
    cdef Py_ssize_t n = indptr.shape[0] - 1
    seen_obj = bytearray(n)
    if n == 0:
        return seen_obj
    cdef unsigned char[:] seen = seen_obj
    stack_obj = _pyarray("q", [0]) * n
    cdef long long[:] stack = stack_obj
    cdef Py_ssize_t sp = 0
    cdef Py_ssize_t k
    cdef long long s, v, u, j
    for k in range(seeds.shape[0]):
        s = seeds[k]
        if allowed[s] and not seen[s]:
            seen[s] = 1
            stack[sp] = s
            sp += 1
    while sp > 0:
        sp -= 1
        v = stack[sp]
        for j in range(indptr[v], indptr[v + 1]):
            u = indices[j]
            if allowed[u] and not seen[u]:
                seen[u] = 1
                stack[sp] = u
                sp += 1
    return seen_obj
