"""Exact dynamic time warping over vector sequences, with path recovery.

Local cost is the Euclidean distance between rows. The backward rule for
the loss binding freezes the recovered optimal path and propagates the
matched pairs' Euclidean-distance gradients along it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine.tensor import Tensor, make_op
from .errors import Empty, ShapeMismatch, TooLarge

BRUTE_FORCE_CELL_LIMIT = 36


@dataclass
class DtwResult:
    distance: float
    path: list  # [(i, j), ...] from (0, 0) to (M_a-1, M_b-1)


def _as_sequence(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ShapeMismatch(f"expected a sequence of vectors, got shape {a.shape}")
    if a.shape[0] == 0:
        raise Empty("zero-length sequence")
    return a


def _cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def dtw_distance(a, b) -> DtwResult:
    """Minimum cumulative cost over monotone alignments, with backtracked path.

    Ties in the backtrack prefer diagonal, then vertical, then horizontal,
    so the returned path is deterministic.
    """
    a, b = _as_sequence(a), _as_sequence(b)
    if a.shape[1] != b.shape[1]:
        raise ShapeMismatch(f"vector widths differ: {a.shape[1]} vs {b.shape[1]}")
    na, nb = a.shape[0], b.shape[0]
    cost = _cost_matrix(a, b)

    acc = np.full((na + 1, nb + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, na + 1):
        ci = cost[i - 1]
        row, prev = acc[i], acc[i - 1]
        for j in range(1, nb + 1):
            row[j] = ci[j - 1] + min(prev[j - 1], prev[j], row[j - 1])

    path = [(na - 1, nb - 1)]
    i, j = na - 1, nb - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, vert, horiz = acc[i, j], acc[i, j + 1], acc[i + 1, j]
            if diag <= vert and diag <= horiz:
                i, j = i - 1, j - 1
            elif vert <= horiz:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return DtwResult(float(acc[na, nb]), path)


def enumerate_paths(na: int, nb: int):
    """All monotone paths from (0,0) to (na-1, nb-1); test/oracle helper."""
    stack = [[(0, 0)]]
    while stack:
        path = stack.pop()
        i, j = path[-1]
        if i == na - 1 and j == nb - 1:
            yield path
            continue
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            ni, nj = i + di, j + dj
            if ni < na and nj < nb:
                stack.append(path + [(ni, nj)])


def dtw_brute_force(a, b) -> DtwResult:
    """Same contract as dtw_distance, by exhaustive path enumeration."""
    a, b = _as_sequence(a), _as_sequence(b)
    if a.shape[1] != b.shape[1]:
        raise ShapeMismatch(f"vector widths differ: {a.shape[1]} vs {b.shape[1]}")
    na, nb = a.shape[0], b.shape[0]
    if na * nb > BRUTE_FORCE_CELL_LIMIT:
        raise TooLarge(f"{na}x{nb} exceeds the {BRUTE_FORCE_CELL_LIMIT}-cell enumeration bound")
    cost = _cost_matrix(a, b)
    best_dist, best_path = np.inf, None
    for path in enumerate_paths(na, nb):
        d = sum(cost[i, j] for i, j in path)
        if d < best_dist:
            best_dist, best_path = d, path
    return DtwResult(float(best_dist), best_path)


def dtw_loss_value_and_grad(a, b):
    """Hard DTW distance plus gradients w.r.t. both sequences.

    The path is treated as fixed; each matched pair (i, j) contributes the
    gradient of its Euclidean distance, defined as 0 for identical vectors.
    """
    a, b = _as_sequence(a), _as_sequence(b)
    result = dtw_distance(a, b)
    ga = np.zeros_like(a)
    gb = np.zeros_like(b)
    for i, j in result.path:
        e = a[i] - b[j]
        d = np.sqrt((e * e).sum())
        if d > 0:
            ga[i] += e / d
            gb[j] -= e / d
    return result.distance, ga, gb


def dtw_alignment(a: Tensor, b: Tensor) -> Tensor:
    """Autodiff binding: scalar DTW distance with the frozen-path gradient."""
    distance, ga, gb = dtw_loss_value_and_grad(a.data, b.data)
    return make_op(np.asarray(distance), (a, b), "dtw",
                   lambda g: (g * ga, g * gb))
