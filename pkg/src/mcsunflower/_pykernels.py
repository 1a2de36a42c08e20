"""Reference implementations of the hot kernels (numpy, no compilation).

Every function here has a twin in ``_ckernels.pyx`` with the same
signature and the same results, including tie-breaking.
"""
import numpy as np

BACKEND = "python"

_ROW_PAIRS = ((0, 1, 2), (0, 2, 1), (1, 2, 0))


def find_sunflower(members, offsets, core_size=-1):
    """Search the product of families for a sunflower.

    ``members`` holds every family's masks back to back; family ``i`` is
    ``members[offsets[i]:offsets[i + 1]]``.  Returns absolute indices into
    ``members`` (one per family) for the first sunflower found in
    lexicographic index order, or None.  ``core_size >= 0`` restricts the
    core cardinality.

    Works level by level on (core, union) states.  Two prefixes reaching
    the same state have the same completions, so only the lexicographically
    least one is kept; the first hit is then still the lexicographic first.
    """
    members = np.asarray(members, dtype=np.uint64)
    k = len(offsets) - 1
    fams = [members[offsets[i]:offsets[i + 1]] for i in range(k)]
    if any(len(f) == 0 for f in fams):
        return None
    a, b = fams[0], fams[1]
    cores, unions, prefix = [], [], []
    step = max(1, _CHUNK // len(b))
    for lo in range(0, len(a), step):
        x = a[lo:lo + step, None]
        core = x & b[None, :]
        ok = (core != x) & (core != b[None, :])
        if core_size >= 0:
            ok &= np.bitwise_count(core) == core_size
        hit = np.argwhere(ok)
        if len(hit) == 0:
            continue
        if k == 2:
            i, j = hit[0]
            return (int(offsets[0] + lo + i), int(offsets[1] + j))
        cores.append(core[ok])
        unions.append((x | b[None, :])[ok])
        hit[:, 0] += lo
        prefix.append(hit)
    if not cores:
        return None
    state = _dedupe(np.concatenate(cores), np.concatenate(unions), np.concatenate(prefix))
    for level in range(2, k):
        state = _extend(state, fams[level], last=level == k - 1)
        if state is None:
            return None
        if level == k - 1:
            return tuple(int(offsets[i] + state[i]) for i in range(k))
    return None


_CHUNK = 1 << 21


def _dedupe(core, union, prefix):
    """Keep the first (lexicographically least) prefix of every state."""
    _, first = np.unique(np.stack([core, union], axis=1), axis=0, return_index=True)
    first.sort()
    return core[first], union[first], prefix[first]


def _extend(state, fam, last):
    core, union, prefix = state
    out_core, out_union, out_prefix = [], [], []
    step = max(1, _CHUNK // len(fam))
    for lo in range(0, len(core), step):
        c = core[lo:lo + step, None]
        u = union[lo:lo + step, None]
        ok = ((fam[None, :] & u) == c) & (fam[None, :] != c)
        hit = np.argwhere(ok)
        if len(hit) == 0:
            continue
        if last:
            s, j = hit[0]
            return tuple(int(v) for v in prefix[lo + s]) + (int(j),)
        rows = hit[:, 0] + lo
        out_core.append(core[rows])
        out_union.append(union[rows] | fam[hit[:, 1]])
        out_prefix.append(np.column_stack([prefix[rows], hit[:, 1]]))
    if last or not out_core:
        return None
    return _dedupe(np.concatenate(out_core), np.concatenate(out_union),
                   np.concatenate(out_prefix))


def best_completion(col, base, avoid, nbits):
    """Maximise ``|F| + nbits - |forbidden(F)|`` over ``F`` avoiding ``avoid``.

    ``forbidden(F) = base | OR(col[b] for b in F)``.  Returns
    ``(best_value, best_mask, nodes)``; ties go to the numerically smallest
    mask.
    """
    col = np.asarray(col, dtype=np.uint64)
    free = [b for b in range(nbits) if not (avoid >> b) & 1]
    forb = np.array([base], dtype=np.uint64)
    for b in free:
        forb = np.concatenate([forb, forb | col[b]])
    size = np.bitwise_count(np.arange(len(forb), dtype=np.uint64)).astype(np.int64)
    value = size + nbits - np.bitwise_count(forb).astype(np.int64)
    i = int(np.argmax(value))
    mask = 0
    for j, b in enumerate(free):
        if (i >> j) & 1:
            mask |= 1 << b
    return int(value[i]), mask, len(forb)


def good_pair_count(f, g, full):
    """Ordered pairs (x, y) in f x g, incomparable, with x | y != full."""
    f = np.asarray(f, dtype=np.uint64)
    g = np.asarray(g, dtype=np.uint64)
    if len(f) == 0 or len(g) == 0:
        return 0
    full = np.uint64(full)
    total = 0
    step = max(1, 1 << 20 // max(1, len(g)))
    for lo in range(0, len(f), step):
        x = f[lo:lo + step, None]
        ok = (x & ~g[None, :]) != 0
        ok &= (g[None, :] & ~x) != 0
        ok &= (x | g[None, :]) != full
        total += int(np.count_nonzero(ok))
    return total


def pq_from_adjacency(adj):
    """Vectorised (m2, t) for a stack of 3x3 boolean adjacency matrices."""
    e = np.asarray(adj, dtype=np.int64)
    m2 = np.zeros(e.shape[0], dtype=np.int64)
    t = np.zeros(e.shape[0], dtype=np.int64)
    for i, ii, r in _ROW_PAIRS:
        for j in range(3):
            for jj in range(3):
                if j != jj:
                    m2 += e[:, i, j] * e[:, ii, jj]
        for v in range(3):
            other = e[:, r, :].sum(axis=1) - e[:, r, v]
            t += e[:, i, v] * e[:, ii, v] * other
    return m2, t


def _assignments(n, lo, hi):
    codes = np.arange(lo, hi, dtype=np.int64)
    digits = (codes[:, None] >> (2 * np.arange(n, dtype=np.int64))[None, :]) & 3
    weights = (np.int64(1) << np.arange(n, dtype=np.int64))[None, :]
    parts = [((digits == p) * weights).sum(axis=1) for p in range(4)]
    return parts


def pq_enumeration_total(tables, n):
    """Sum of m2 + t over every 4-part assignment with parts 2..4 nonempty.

    ``tables`` is a (3, 2**n) membership array.  Returns (total, count).
    """
    tables = np.asarray(tables, dtype=bool)
    total = 0
    count = 0
    chunk = 1 << 18
    for lo in range(0, 4 ** n, chunk):
        x1, x2, x3, x4 = _assignments(n, lo, min(4 ** n, lo + chunk))
        keep = (x2 != 0) & (x3 != 0) & (x4 != 0)
        x1, x2, x3, x4 = x1[keep], x2[keep], x3[keep], x4[keep]
        slots = [x1 | x2, x1 | x3, x1 | x4]
        adj = np.stack([np.stack([tables[i][y] for y in slots], axis=1) for i in range(3)],
                       axis=1)
        m2, t = pq_from_adjacency(adj)
        total += int(m2.sum() + t.sum())
        count += int(keep.sum())
    return total, count


def count_assignments(n):
    """Number of maps [n] -> {1,2,3,4} hitting each of 2, 3 and 4."""
    count = 0
    chunk = 1 << 20
    for lo in range(0, 4 ** n, chunk):
        _, x2, x3, x4 = _assignments(n, lo, min(4 ** n, lo + chunk))
        count += int(((x2 != 0) & (x3 != 0) & (x4 != 0)).sum())
    return count
