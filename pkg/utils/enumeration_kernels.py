import numpy as np
from numba import njit

# -------------------------------------------------
# Jitted depth-first enumeration of canonical tours
# -------------------------------------------------
#
# Canonical tours fix order[0] = 0 and keep order[1] < order[n-1]. A shard
# fixes order[1] = first; its leaves are accepted only when the last node
# exceeds `first`, so every undirected cycle is visited exactly once.


@njit(cache=True)
def _push(stats, x):
    n1 = stats[0]
    stats[0] += 1.0
    n = stats[0]
    delta = x - stats[1]
    delta_n = delta / n
    delta_n2 = delta_n * delta_n
    term1 = delta * delta_n * n1
    stats[1] += delta_n
    stats[4] += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * stats[2] - 4.0 * delta_n * stats[3]
    stats[3] += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * stats[2]
    stats[2] += term1
    if x < stats[5]:
        stats[5] = x
    if x > stats[6]:
        stats[6] = x


@njit(cache=True)
def enumerate_shard(costs, first, hist_lo, hist_hi, bins):
    """
    Stream every canonical tour with order[1] == first.

    Returns (stats, argmin_order, argmax_order, hist_counts); stats holds
    count, mean, M2, M3, M4, min, max. Lengths outside [hist_lo, hist_hi]
    are clamped into the end bins.
    """
    n = costs.shape[0]
    stats = np.zeros(7)
    stats[5] = np.inf
    stats[6] = -np.inf
    counts = np.zeros(max(bins, 1), dtype=np.int64)
    best = np.zeros(n, dtype=np.int64)
    worst = np.zeros(n, dtype=np.int64)

    order = np.zeros(n, dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    partial = np.zeros(n)
    nxt = np.zeros(n, dtype=np.int64)

    order[1] = first
    used[0] = True
    used[first] = True
    partial[1] = costs[0, first]
    width = hist_hi - hist_lo

    if n == 2:
        return stats, best, worst, counts

    depth = 2
    nxt[2] = 1
    while depth >= 2:
        if depth == n:
            last = order[n - 1]
            if last > first:
                length = partial[n - 1] + costs[last, 0]
                if length < stats[5]:
                    best[:] = order
                if length > stats[6]:
                    worst[:] = order
                _push(stats, length)
                if bins > 0:
                    k = int((length - hist_lo) / width * bins) if width > 0.0 else 0
                    if k < 0:
                        k = 0
                    elif k >= bins:
                        k = bins - 1
                    counts[k] += 1
            depth -= 1
            used[order[depth]] = False
            continue

        c = nxt[depth]
        while c < n and used[c]:
            c += 1
        if c >= n:
            depth -= 1
            if depth >= 2:
                used[order[depth]] = False
            continue

        nxt[depth] = c + 1
        order[depth] = c
        used[c] = True
        partial[depth] = partial[depth - 1] + costs[order[depth - 1], c]
        depth += 1
        if depth < n:
            nxt[depth] = 1

    return stats, best, worst, counts
