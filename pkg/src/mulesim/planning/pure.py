"""Pure-Python shortest-path kernels.

Arithmetic twin of the compiled module: identical expression order, identical
neighbor order, identical (f, h, cell index) tie-breaking. Any change here
must be mirrored in _speedups.pyx or the parity tests will fail.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)

# (dy, dx, diagonal) in fixed scan order.
OFFSETS = (
    (-1, -1, True), (-1, 0, False), (-1, 1, True),
    (0, -1, False), (0, 1, False),
    (1, -1, True), (1, 0, False), (1, 1, True),
)


def astar_path(cost: np.ndarray, sx: int, sy: int, gx: int, gy: int,
               resolution: float):
    """8-connected A* over a cost grid.

    Step cost is step_length * (cost[from] + cost[to]) / 2; the heuristic is
    straight-line distance times 1.0 (the minimum multiplier), which keeps it
    admissible and consistent. Returns (total_cost, [(x, y), ...]) or None
    when the goal is unreachable over finite-cost cells.
    """
    h, w = cost.shape
    flat = cost.ravel()
    start = sy * w + sx
    goal = gy * w + gx
    if not math.isfinite(flat[start]) or not math.isfinite(flat[goal]):
        return None

    g = np.full(h * w, np.inf, dtype=np.float64)
    parent = np.full(h * w, -1, dtype=np.int64)
    closed = np.zeros(h * w, dtype=bool)
    g[start] = 0.0
    dx0 = float(sx - gx)
    dy0 = float(sy - gy)
    h0 = math.sqrt(dx0 * dx0 + dy0 * dy0) * resolution
    heap = [(h0, h0, start)]
    step_card = resolution
    step_diag = resolution * SQRT2

    while heap:
        _, _, idx = heapq.heappop(heap)
        if closed[idx]:
            continue
        closed[idx] = True
        if idx == goal:
            break
        cy, cx = divmod(idx, w)
        cf = flat[idx]
        gc = g[idx]
        for dy, dx, diag in OFFSETS:
            ny = cy + dy
            nx = cx + dx
            if ny < 0 or ny >= h or nx < 0 or nx >= w:
                continue
            nidx = ny * w + nx
            if closed[nidx]:
                continue
            ct = flat[nidx]
            if not math.isfinite(ct):
                continue
            step = step_diag if diag else step_card
            ng = gc + step * ((cf + ct) * 0.5)
            if ng < g[nidx]:
                g[nidx] = ng
                parent[nidx] = idx
                ddx = float(nx - gx)
                ddy = float(ny - gy)
                nh = math.sqrt(ddx * ddx + ddy * ddy) * resolution
                heapq.heappush(heap, (ng + nh, nh, nidx))

    if not closed[goal]:
        return None
    path = []
    idx = goal
    while idx >= 0:
        cy, cx = divmod(idx, w)
        path.append((cx, cy))
        idx = int(parent[idx])
    path.reverse()
    return float(g[goal]), path


def distance_field(cost: np.ndarray, sx: int, sy: int, resolution: float) -> np.ndarray:
    """Dijkstra distances from (sx, sy) to every cell; inf where unreachable."""
    h, w = cost.shape
    flat = cost.ravel()
    dist = np.full(h * w, np.inf, dtype=np.float64)
    start = sy * w + sx
    if not math.isfinite(flat[start]):
        return dist.reshape(h, w)
    closed = np.zeros(h * w, dtype=bool)
    dist[start] = 0.0
    heap = [(0.0, start)]
    step_card = resolution
    step_diag = resolution * SQRT2

    while heap:
        _, idx = heapq.heappop(heap)
        if closed[idx]:
            continue
        closed[idx] = True
        cy, cx = divmod(idx, w)
        cf = flat[idx]
        gc = dist[idx]
        for dy, dx, diag in OFFSETS:
            ny = cy + dy
            nx = cx + dx
            if ny < 0 or ny >= h or nx < 0 or nx >= w:
                continue
            nidx = ny * w + nx
            if closed[nidx]:
                continue
            ct = flat[nidx]
            if not math.isfinite(ct):
                continue
            step = step_diag if diag else step_card
            ng = gc + step * ((cf + ct) * 0.5)
            if ng < dist[nidx]:
                dist[nidx] = ng
                heapq.heappush(heap, (ng, nidx))

    return dist.reshape(h, w)
