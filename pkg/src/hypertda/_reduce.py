"""Column reduction of the edge/triangle boundary matrix over F2 (numba)."""

import numpy as np
from numba import njit


@njit(cache=True)
def _symdiff(a, la, b, lb, out):
    # a, b sorted ascending without repeats; writes a xor b into out
    i = 0
    j = 0
    k = 0
    while i < la and j < lb:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif a[i] > b[j]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < la:
        out[k] = a[i]
        i += 1
        k += 1
    while j < lb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


@njit(cache=True)
def apparent_positive_triangles(tris, tri_values, d):
    """Flag triangles that form an apparent pair with a tetrahedron.

    Triangle t pairs with tetrahedron s when s is the earliest coface of t
    and t is the latest face of s (order: value, then vertex tuple). Such a
    t creates a 2-cycle, so its boundary column reduces to zero.
    """
    n = d.shape[0]
    n_tri = tris.shape[0]
    out = np.zeros(n_tri, dtype=np.bool_)
    for t in range(n_tri):
        a = tris[t, 0]
        b = tris[t, 1]
        c = tris[t, 2]
        v = tri_values[t]
        # cofaces t + {k} sharing a value compare like k, so the earliest is
        # the smallest k reaching the smallest value
        best_v = np.inf
        best = -1
        for k in range(n):
            if k == a or k == b or k == c:
                continue
            w = max(v, d[a, k], d[b, k], d[c, k])
            if w < best_v:
                best_v = w
                best = k
                if w == v:
                    break
        if best < 0 or best_v > v:
            continue
        k = best
        # swapping x for k gives a later face iff k > x; t is the latest face
        # when every such swap has a smaller value
        latest = True
        if k > a and max(d[b, c], d[b, k], d[c, k]) == v:
            latest = False
        if k > b and max(d[a, c], d[a, k], d[c, k]) == v:
            latest = False
        if k > c and max(d[a, b], d[a, k], d[b, k]) == v:
            latest = False
        out[t] = latest
    return out


@njit(cache=True)
def reduce_boundary(tri_edges, n_edges, skip):
    """Standard left-to-right reduction; pivot = largest edge index.

    ``tri_edges`` is (T, 3) with each row sorted ascending and rows in
    filtration order. Returns ``pivot_owner`` (edge -> triangle or -1) and
    the non-zero reduced columns packed as (col_ptr, col_len, buffer), with
    col_len = 0 for columns that reduced to zero. Columns flagged in ``skip``
    must be known to reduce to zero; zero columns are never added to other
    columns, so skipping them leaves every other column unchanged.
    """
    n_tri = tri_edges.shape[0]
    pivot_owner = np.full(n_edges, -1, dtype=np.int64)
    col_ptr = np.zeros(n_tri, dtype=np.int64)
    col_len = np.zeros(n_tri, dtype=np.int64)
    cap = max(16, 8 * n_edges)
    buf = np.empty(cap, dtype=np.int64)
    used = 0
    work = np.empty(n_edges + 3, dtype=np.int64)
    scratch = np.empty(n_edges + 3, dtype=np.int64)
    for t in range(n_tri):
        if skip[t]:
            continue
        work[0] = tri_edges[t, 0]
        work[1] = tri_edges[t, 1]
        work[2] = tri_edges[t, 2]
        length = 3
        while length > 0:
            owner = pivot_owner[work[length - 1]]
            if owner < 0:
                break
            p = col_ptr[owner]
            length = _symdiff(work, length, buf[p:p + col_len[owner]], col_len[owner], scratch)
            work, scratch = scratch, work
        if length == 0:
            continue
        if used + length > cap:
            while used + length > cap:
                cap *= 2
            bigger = np.empty(cap, dtype=np.int64)
            bigger[:used] = buf[:used]
            buf = bigger
        buf[used:used + length] = work[:length]
        col_ptr[t] = used
        col_len[t] = length
        used += length
        pivot_owner[work[length - 1]] = t
    return pivot_owner, col_ptr, col_len, buf[:used].copy()
