"""
Maximum-score linear assignment on dense rectangular matrices.

The solver is the Jonker-Volgenant shortest augmenting path method
(in the column-by-column form of Crouse, 2016) run on negated scores.
Among all optimal maximum-cardinality matchings the lexicographically
smallest sorted pair list is returned, so results are reproducible.
"""

import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidData, ShapeError, SizeError


@dataclass(frozen=True)
class Matching:
    pairs: list
    total: float

    def as_array(self):
        return np.array(self.pairs, dtype=np.int64).reshape(-1, 2)


def _check_scores(score):
    s = np.asarray(score, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
        raise ShapeError(f"score must be a non-empty 2-D matrix, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidData("score contains NaN or Inf")
    return s


def _total(score, pairs):
    return math.fsum(score[i, j] for i, j in pairs)


def _jv_min(cost):
    """Min-cost perfect matching of a square matrix.

    Returns ``(col4row, u, v)`` with reduced costs ``cost - u[:, None] - v``
    nonnegative and zero on the matching.
    """
    n = cost.shape[0]
    u = np.zeros(n)
    v = np.zeros(n)
    col4row = np.full(n, -1, dtype=np.int64)
    row4col = np.full(n, -1, dtype=np.int64)
    all_rows = np.arange(n)

    for cur_row in range(n):
        shortest = np.full(n, np.inf)
        path = np.full(n, -1, dtype=np.int64)
        seen_rows = np.zeros(n, dtype=bool)
        seen_cols = np.zeros(n, dtype=bool)
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink < 0:
            seen_rows[i] = True
            reduced = min_val + cost[i] - u[i] - v
            better = ~seen_cols & (reduced < shortest)
            path[better] = i
            shortest[better] = reduced[better]

            open_cols = np.flatnonzero(~seen_cols)
            vals = shortest[open_cols]
            lowest = vals.min()
            if not np.isfinite(lowest):
                raise InvalidData("assignment is infeasible")
            ties = open_cols[vals == lowest]
            free = ties[row4col[ties] < 0]
            j = int(free[0]) if len(free) else int(ties[0])

            min_val = lowest
            seen_cols[j] = True
            if row4col[j] < 0:
                sink = j
            else:
                i = int(row4col[j])

        u[cur_row] += min_val
        others = seen_rows & (all_rows != cur_row)
        u[others] += min_val - shortest[col4row[others]]
        v[seen_cols] -= min_val - shortest[seen_cols]

        j = sink
        while True:
            i = int(path[j])
            row4col[j] = i
            col4row[i], j = j, int(col4row[i])
            if i == cur_row:
                break
    return col4row, u, v


def _lexmin_tight(tight, col4row, n_real_rows, n_real_cols):
    """Lexicographically smallest perfect matching inside the tight-edge graph.

    ``col4row`` is any perfect matching of tight edges. Real rows are fixed
    one at a time to the smallest column that still admits a completion;
    completion is checked with a single alternating-path search.
    """
    n = tight.shape[0]
    col4row = col4row.copy()
    row4col = np.empty(n, dtype=np.int64)
    row4col[col4row] = np.arange(n)
    fixed_rows = np.zeros(n, dtype=bool)
    fixed_cols = np.zeros(n, dtype=bool)
    adj = [np.flatnonzero(tight[i]) for i in range(n)]

    for i in range(n_real_rows):
        current = col4row[i]
        for j in adj[i]:
            if j == current or (j >= n_real_cols and current >= n_real_cols):
                break
            if fixed_cols[j]:
                continue
            # force (i, j): the row holding j must reach the column i releases
            start = row4col[j]
            target = current
            parent = {}
            queue = deque([start])
            visited_rows = {start}
            found = False
            while queue and not found:
                r = queue.popleft()
                for c in adj[r]:
                    if c == j or fixed_cols[c] or c in parent:
                        continue
                    parent[c] = r
                    if c == target:
                        found = True
                        break
                    nxt = row4col[c]
                    if nxt != i and nxt not in visited_rows and not fixed_rows[nxt]:
                        visited_rows.add(nxt)
                        queue.append(nxt)
            if not found:
                continue
            c = target
            while True:
                r = parent[c]
                prev = col4row[r]
                col4row[r] = c
                row4col[c] = r
                if r == start:
                    break
                c = prev
            col4row[i] = j
            row4col[j] = i
            break
        fixed_rows[i] = True
        fixed_cols[col4row[i]] = True
    return col4row


def solve_max_assignment(score, allow_unmatched=False, rtol=1e-12):
    """Maximum-score matching of a dense ``rows x cols`` score matrix.

    By default every row (or every column, whichever side is smaller) is
    matched, even when that forces negative scores. With
    ``allow_unmatched=True`` the optimal partial matching is returned
    instead: pairs with negative score are left out.
    """
    s = _check_scores(score)
    rows, cols = s.shape
    work = np.maximum(s, 0.0) if allow_unmatched else s
    n = max(rows, cols)
    cost = np.zeros((n, n))
    cost[:rows, :cols] = -work

    col4row, u, v = _jv_min(cost)
    reduced = cost - u[:, None] - v[None, :]
    scale = max(1.0, float(np.abs(cost).max()))
    tight = reduced <= rtol * scale * n
    tight[np.arange(n), col4row] = True
    col4row = _lexmin_tight(tight, col4row, rows, cols)

    pairs = [(i, int(col4row[i])) for i in range(rows) if col4row[i] < cols]
    if allow_unmatched:
        pairs = [(i, j) for i, j in pairs if s[i, j] >= 0]
    return Matching(pairs, _total(s, pairs))


def brute_force_assignment(score, max_n=7):
    """Exhaustive maximum-cardinality assignment; a test oracle.

    Enumerates every injective map from the smaller side into the larger and
    keeps the best total, breaking ties by the smallest sorted pair list.
    """
    s = _check_scores(score)
    rows, cols = s.shape
    if min(rows, cols) > max_n:
        raise SizeError(f"min side {min(rows, cols)} exceeds max_n={max_n}")
    best_key = None
    best_pairs = None
    if rows <= cols:
        candidates = (
            [(i, perm[i]) for i in range(rows)]
            for perm in itertools.permutations(range(cols), rows)
        )
    else:
        candidates = (
            sorted((perm[j], j) for j in range(cols))
            for perm in itertools.permutations(range(rows), cols)
        )
    for pairs in candidates:
        key = (-_total(s, pairs), pairs)
        if best_key is None or key < best_key:
            best_key = key
            best_pairs = pairs
    return Matching(best_pairs, _total(s, best_pairs))
