"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and results; used when the extension is not built or when
``MAXPERS_PURE_PYTHON=1``.
"""
from bisect import bisect_left, bisect_right

import numpy as np


def expand_cliques(cliques, indptr, nbrs, ndist, eid):
    """Extend every sorted clique by each common neighbour larger than its last vertex.

    ``indptr``/``nbrs``/``ndist`` hold the symmetric neighbour graph in CSR form
    with sorted rows.  Returns ``(new_cliques, max_new_edge_length, parent, edges)``; output is
    lexicographic when the input is.  ``parent[i]`` is the input row that
    ``new_cliques[i]`` extends and ``edges[i, q]`` is ``eid`` of the edge from
    its q-th vertex to the added one (``eid`` is aligned with ``nbrs``).
    """
    cliques = np.asarray(cliques)
    width = cliques.shape[1]
    nb = nbrs.tolist()
    nd = ndist.tolist()
    ip = indptr.tolist()
    ei = eid.tolist()
    out, outd, parent, edges = [], [], [], []
    for r, row in enumerate(cliques.tolist()):
        last = row[-1]
        lo, hi = ip[last], ip[last + 1]
        for t in range(bisect_right(nb, last, lo, hi), hi):
            cand = nb[t]
            md = nd[t]
            ids = []
            for v in row[:-1]:
                a, b = ip[v], ip[v + 1]
                pos = bisect_left(nb, cand, a, b)
                if pos == b or nb[pos] != cand:
                    break
                ids.append(ei[pos])
                if nd[pos] > md:
                    md = nd[pos]
            else:
                out.append(row + [cand])
                outd.append(md)
                parent.append(r)
                edges.append(ids + [ei[t]])
    new = np.asarray(out, dtype=np.int64).reshape(len(out), width + 1)
    return (new, np.asarray(outd, dtype=float), np.asarray(parent, dtype=np.int64),
            np.asarray(edges, dtype=np.int64).reshape(len(out), width))


def _symdiff(a, b):
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x < y:
            out.append(x)
            i += 1
        elif y < x:
            out.append(y)
            j += 1
        else:
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return out


def reduce_twist(indptr, indices, dims, max_dim):
    """Z/2 column reduction with the twist (clearing) optimisation.

    Columns are processed from the top dimension down; any column already
    known to be a pivot row is skipped.  Returns ``lows`` where
    ``lows[row] = col`` for each persistence pair and -1 otherwise.
    """
    n = len(dims)
    ip = indptr.tolist()
    ix = indices.tolist()
    dm = dims.tolist()
    lows = [-1] * n
    cleared = [False] * n
    stored = {}
    for dim in range(int(max_dim), 0, -1):
        for j in range(n):
            if dm[j] != dim or cleared[j]:
                continue
            col = ix[ip[j]:ip[j + 1]]
            while col:
                c = lows[col[-1]]
                if c < 0:
                    break
                col = _symdiff(col, stored[c])
            if col:
                p = col[-1]
                lows[p] = j
                cleared[p] = True
                stored[j] = col
    return np.asarray(lows, dtype=np.int64)


def locate_rows(table, first_ptr, query):
    """Row index in lexicographically sorted ``table`` of each ``query`` row, -1 if absent.

    ``first_ptr[v]:first_ptr[v+1]`` is the block of table rows starting with ``v``.
    """
    table = np.asarray(table, dtype=np.int64)
    query = np.asarray(query, dtype=np.int64)
    out = np.full(len(query), -1, dtype=np.int64)
    if len(query) == 0 or len(table) == 0:
        return out
    base = max(int(table.max()), int(query.max())) + 1
    width = table.shape[1]
    if width * np.log2(max(base, 2)) >= 62:
        lookup = {tuple(r): i for i, r in enumerate(table.tolist())}
        return np.array([lookup.get(tuple(r), -1) for r in query.tolist()], dtype=np.int64)
    tk = np.zeros(len(table), dtype=np.int64)
    qk = np.zeros(len(query), dtype=np.int64)
    for q in range(width):
        tk = tk * base + table[:, q]
        qk = qk * base + query[:, q]
    # lexicographic row order == key order, so tk is already sorted
    pos = np.minimum(np.searchsorted(tk, qk), len(tk) - 1)
    hit = (tk[pos] == qk) & (query[:, 0] >= 0)
    out[hit] = pos[hit]
    return out


def antitranspose(indptr, indices, n):
    """Column-CSR of the matrix reflected across its anti-diagonal."""
    col = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    new_col = n - 1 - np.asarray(indices)
    new_row = n - 1 - col
    order = np.lexsort((new_row, new_col))
    t_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(new_col, minlength=n), out=t_indptr[1:])
    return t_indptr, np.ascontiguousarray(new_row[order])
