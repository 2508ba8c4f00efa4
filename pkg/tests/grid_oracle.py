"""Brute-force grid oracle for relevance bounds, shared by test modules.

Independent of the LP path: enumerates every weight vector on a regular
grid inside the L1 budget ball, computes the exactly optimal bias for each
(the total hinge is piecewise linear in the bias, so its minimum sits on a
breakpoint), and keeps the feasible points.  Per-feature minima/maxima of
|w_j| over feasible grid points bracket the true bounds from inside.

A single coarse pass can sit several grid steps below a bound when the
feasible region meets the optimum in a thin face, so the scan is followed
by two levels of local refinement: finer grids are brute-forced in small
boxes around the best points found so far and around any caller-supplied
``focus`` points (e.g. candidate optima produced by the method under
test).  Focus points only steer where the grid is refined; every reported
value still comes from direct feasibility evaluation on grid points, so a
focus point in an infeasible or suboptimal region cannot inflate the
result.
"""

import numpy as np

# big enough to dominate breakpoint values (|b| < 1e2), small enough that
# offset * batch stays in a float range with ulp well under 1e-6
_ROW_OFFSET = 1e4


def _min_total_hinge(scores, y):
    """Exact min over bias of sum_i max(0, 1 - y_i (scores_i - b)), batched.

    ``scores`` has shape (B, n).  For each row the candidate biases are the
    breakpoints b = scores_i - y_i; prefix sums over the sorted breakpoints
    evaluate the hinge total at every candidate in O(n log n) per row.
    """
    b_count, n = scores.shape
    pos = y > 0
    neg = ~pos
    # positive samples activate for b > scores_i - 1, negative for b < scores_i + 1
    alpha = scores[:, pos] - 1.0
    beta = scores[:, neg] + 1.0
    n_pos = alpha.shape[1]
    n_neg = beta.shape[1]

    alpha_sorted = np.sort(alpha, axis=1)
    beta_sorted = np.sort(beta, axis=1)
    alpha_prefix = np.concatenate(
        [np.zeros((b_count, 1)), np.cumsum(alpha_sorted, axis=1)], axis=1
    )
    beta_prefix = np.concatenate(
        [np.zeros((b_count, 1)), np.cumsum(beta_sorted, axis=1)], axis=1
    )
    beta_total = beta_prefix[:, -1]

    offsets = np.arange(b_count)[:, None] * _ROW_OFFSET
    alpha_flat = (alpha_sorted + offsets).ravel()
    beta_flat = (beta_sorted + offsets).ravel()

    candidates = np.concatenate([alpha_sorted, beta_sorted], axis=1)
    flat_cand = (candidates + offsets).ravel()

    rank_alpha = np.searchsorted(alpha_flat, flat_cand, side="right").reshape(
        b_count, -1
    ) - np.arange(b_count)[:, None] * n_pos
    rank_beta = np.searchsorted(beta_flat, flat_cand, side="right").reshape(
        b_count, -1
    ) - np.arange(b_count)[:, None] * n_neg

    rows = np.arange(b_count)[:, None]
    pos_part = candidates * rank_alpha - alpha_prefix[rows, rank_alpha]
    neg_part = (
        (beta_total[:, None] - beta_prefix[rows, rank_beta])
        - candidates * (n_neg - rank_beta)
    )
    totals = pos_part + neg_part
    return totals.min(axis=1)


def _l1_ball_grid(budget, resolution, dim):
    """All grid points with sum |w| <= budget, generated slice by slice."""
    steps = int(np.floor(budget / resolution + 1e-9))
    axis = np.arange(-steps, steps + 1) * resolution
    if dim == 1:
        return axis[:, None]
    inner = _l1_ball_grid(budget, resolution, dim - 1)
    inner_l1 = np.abs(inner).sum(axis=1)
    blocks = []
    for w in axis:
        keep = inner_l1 <= budget - abs(w) + 1e-12
        if keep.any():
            block = np.column_stack([np.full(int(keep.sum()), w), inner[keep]])
            blocks.append(block)
    return np.vstack(blocks)


def _box_grid(center, steps, step, budget, dim):
    """Grid of center + k*step per axis, |k| <= steps, inside the L1 ball."""
    axes = [center[k] + np.arange(-steps, steps + 1) * step for k in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    return points[np.abs(points).sum(axis=1) <= budget + 1e-12]


def grid_search_bounds(x, y, budget, rho, resolution=0.01, batch=20000, focus=()):
    """(lower, upper, n_feasible): per-feature extremes of |w_j| on the grid.

    Feasibility of a weight vector w: sum |w| <= budget and the bias-optimal
    total hinge of (w, b) stays within rho.  ``focus`` points and the running
    arg-extremes seed two rounds of 4x-finer local grids (see module doc).
    """
    n, d = x.shape
    lower = np.full(d, np.inf)
    upper = np.full(d, -np.inf)
    arg_lower = np.zeros((d, d))
    arg_upper = np.zeros((d, d))
    n_feasible = 0

    def scan(points):
        nonlocal n_feasible
        for start in range(0, points.shape[0], batch):
            chunk = points[start : start + batch]
            feasible = _min_total_hinge(chunk @ x.T, y) <= rho + 1e-9
            if not feasible.any():
                continue
            feas = chunk[feasible]
            n_feasible += int(feasible.sum())
            magnitudes = np.abs(feas)
            for j in range(d):
                k = int(np.argmin(magnitudes[:, j]))
                if magnitudes[k, j] < lower[j]:
                    lower[j] = magnitudes[k, j]
                    arg_lower[j] = feas[k]
                k = int(np.argmax(magnitudes[:, j]))
                if magnitudes[k, j] > upper[j]:
                    upper[j] = magnitudes[k, j]
                    arg_upper[j] = feas[k]

    scan(_l1_ball_grid(budget, resolution, d))

    step = resolution
    for _ in range(2):
        fine = step / 4.0
        centers = [np.asarray(point, dtype=float) for point in focus]
        for j in range(d):
            if np.isfinite(lower[j]):
                centers.append(arg_lower[j].copy())
            if np.isfinite(upper[j]):
                centers.append(arg_upper[j].copy())
        # 8 fine steps of radius reach back over the whole coarse cell
        boxes = [_box_grid(c, 8, fine, budget, d) for c in centers]
        boxes = [b for b in boxes if b.size]
        if boxes:
            scan(np.vstack(boxes))
        step = fine
    return lower, upper, n_feasible
