import numpy as np
from numba import njit

# -------------------------------------------------
# Jitted 2-opt / 3-opt local search on position arrays
# -------------------------------------------------
#
# A move at positions i < j < k removes (a,b) = (t[i], t[i+1]),
# (c,d) = (t[j], t[j+1]) and (e,f) = (t[k], t[k+1 mod n]), with
# S1 = t[i+1..j] and S2 = t[j+1..k]. Reconnections:
#   1: rev S1          2: rev S2           3: rev (S1 S2)
#   4: rev S1, rev S2  5: S2 S1            6: rev S2, S1
#   7: S2, rev S1
# Cases 1-3 are 2-opt moves; a pure 2-opt move at (i, j) is case 1 with k = j.


@njit(cache=True)
def move_delta(costs, t, n, i, j, k, case):
    a = t[i]
    b = t[i + 1]
    c = t[j]
    d = t[(j + 1) % n]
    e = t[k]
    f = t[(k + 1) % n]
    if case == 1:
        return costs[a, c] + costs[b, d] - costs[a, b] - costs[c, d]
    if case == 2:
        return costs[c, e] + costs[d, f] - costs[c, d] - costs[e, f]
    if case == 3:
        return costs[a, e] + costs[b, f] - costs[a, b] - costs[e, f]
    removed = costs[a, b] + costs[c, d] + costs[e, f]
    if case == 4:
        return costs[a, c] + costs[b, e] + costs[d, f] - removed
    if case == 5:
        return costs[a, d] + costs[e, b] + costs[c, f] - removed
    if case == 6:
        return costs[a, e] + costs[d, b] + costs[c, f] - removed
    return costs[a, d] + costs[e, c] + costs[b, f] - removed


@njit(cache=True)
def apply_move(t, i, j, k, case):
    s1 = t[i + 1:j + 1].copy()
    s2 = t[j + 1:k + 1].copy()
    if case == 1:
        block = np.concatenate((s1[::-1], s2))
    elif case == 2:
        block = np.concatenate((s1, s2[::-1]))
    elif case == 3:
        block = np.concatenate((s2[::-1], s1[::-1]))
    elif case == 4:
        block = np.concatenate((s1[::-1], s2[::-1]))
    elif case == 5:
        block = np.concatenate((s2, s1))
    elif case == 6:
        block = np.concatenate((s2[::-1], s1))
    else:
        block = np.concatenate((s2, s1[::-1]))
    t[i + 1:k + 1] = block


@njit(cache=True)
def _scan_cases(costs, t, n, i, j, k, first_case, threshold, best_mode):
    # first mode: first case under threshold; best mode: lowest negative delta
    found_delta = 0.0
    found_case = -1
    for case in range(first_case, 8):
        delta = move_delta(costs, t, n, i, j, k, case)
        if best_mode:
            if delta < found_delta:
                found_delta = delta
                found_case = case
        elif delta < threshold:
            return delta, case
    return found_delta, found_case


@njit(cache=True)
def _full_sweep(costs, t, length, three, best_mode, tol_rel):
    n = t.shape[0]
    steps = 0
    best_delta = 0.0
    bi, bj, bk, bc = -1, -1, -1, -1
    for i in range(n - 2):
        for j in range(i + 1, n):
            if three:
                for k in range(j + 1, n):
                    delta, case = _scan_cases(costs, t, n, i, j, k, 1, -tol_rel * length, best_mode)
                    if case < 0:
                        continue
                    if best_mode:
                        if delta < best_delta:
                            best_delta = delta
                            bi, bj, bk, bc = i, j, k, case
                    else:
                        apply_move(t, i, j, k, case)
                        length += delta
                        steps += 1
            else:
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                delta = move_delta(costs, t, n, i, j, j, 1)
                if best_mode:
                    if delta < best_delta:
                        best_delta = delta
                        bi, bj, bk, bc = i, j, j, 1
                elif delta < -tol_rel * length:
                    apply_move(t, i, j, j, 1)
                    length += delta
                    steps += 1
    if best_mode and bc > 0 and best_delta < -tol_rel * length:
        apply_move(t, bi, bj, bk, bc)
        length += best_delta
        steps = 1
    return length, steps


@njit(cache=True)
def _rebuild_positions(t, pos):
    for idx in range(t.shape[0]):
        pos[t[idx]] = idx


@njit(cache=True)
def _pruned_sweep(costs, t, pos, length, three, best_mode, tol_rel, neighbors):
    n = t.shape[0]
    m = neighbors.shape[1]
    steps = 0
    best_delta = 0.0
    bi, bj, bk, bc = -1, -1, -1, -1
    _rebuild_positions(t, pos)

    for i in range(n - 2):
        a = t[i]
        b = t[i + 1]
        gain = costs[a, b]
        moved = False
        for xi in range(m):
            x = neighbors[a, xi]
            if costs[a, x] >= gain:
                break
            p = pos[x]
            if p <= i:
                continue

            # 2-opt with x as c
            if p > i + 1 and not (i == 0 and p == n - 1):
                threshold = -tol_rel * length
                delta = move_delta(costs, t, n, i, p, p, 1)
                if best_mode:
                    if delta < best_delta:
                        best_delta = delta
                        bi, bj, bk, bc = i, p, p, 1
                elif delta < threshold:
                    apply_move(t, i, p, p, 1)
                    length += delta
                    steps += 1
                    moved = True
                    break

            if not three:
                continue
            for yi in range(m):
                y = neighbors[b, yi]
                q = pos[y]
                # x plays c/d and y plays e/f, or x plays e/f and y plays c/d
                for role in range(8):
                    shift_x = role & 1
                    shift_y = (role >> 1) & 1
                    if role < 4:
                        j = p - shift_x
                        k = q - shift_y
                    else:
                        j = q - shift_y
                        k = p - shift_x
                    if not (i < j and j < k and k <= n - 1):
                        continue
                    delta, case = _scan_cases(costs, t, n, i, j, k, 3, -tol_rel * length, best_mode)
                    if case < 0:
                        continue
                    if best_mode:
                        if delta < best_delta:
                            best_delta = delta
                            bi, bj, bk, bc = i, j, k, case
                    else:
                        apply_move(t, i, j, k, case)
                        length += delta
                        steps += 1
                        moved = True
                        break
                if moved:
                    break
            if moved:
                break
        if moved:
            _rebuild_positions(t, pos)

    if best_mode and bc > 0 and best_delta < -tol_rel * length:
        apply_move(t, bi, bj, bk, bc)
        length += best_delta
        steps = 1
    return length, steps


@njit(cache=True)
def k_opt_search(costs, tour, three, best_mode, max_passes, tol_rel, neighbors, pruned):
    """
    Improve `tour` until no move passes the acceptance threshold or
    max_passes sweeps have run. Returns (tour, steps, passes).

    Pruned mode only tries moves whose first new edge joins a node to one
    of its listed neighbours; each pass sweeps the tour in both
    orientations.
    """
    t = tour.copy()
    n = t.shape[0]
    length = 0.0
    for idx in range(n):
        length += costs[t[idx], t[(idx + 1) % n]]
    pos = np.empty(n, dtype=np.int64)
    steps = 0
    passes = 0
    while passes < max_passes:
        passes += 1
        if pruned:
            improved = 0
            for _ in range(2):
                length, s = _pruned_sweep(costs, t, pos, length, three, best_mode, tol_rel, neighbors)
                improved += s
                t = t[::-1].copy()
        else:
            length, improved = _full_sweep(costs, t, length, three, best_mode, tol_rel)
        steps += improved
        if improved == 0:
            break
    return t, steps, passes
