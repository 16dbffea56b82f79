"""Radio model: unit-disk links, association gating, session scheduling, contention.

Links exist within a fixed communication radius but only become usable after a
pair has stayed continuously in range for the association time. One session
per node; sessions in radio earshot of each other split the per-tick byte pool
evenly, and every session pays a fixed latency deduction each tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class LinkModel:
    r_comm: float = 50.0        # meters
    t_assoc: float = 1.0        # seconds of continuous proximity before use
    base_latency: float = 0.05  # seconds per session round
    bandwidth: float = 2_000_000.0  # bytes per second

    def __post_init__(self):
        if self.r_comm <= 0:
            raise ValueError("r_comm must be > 0")
        if self.t_assoc < 0 or self.base_latency < 0:
            raise ValueError("t_assoc and base_latency must be >= 0")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be > 0")


Pair = tuple[int, int]


def canonical_pair(a: int, b: int) -> Pair:
    return (a, b) if a < b else (b, a)


def adjacency(positions: dict[int, tuple[float, float]], model: LinkModel) -> set[Pair]:
    """Unordered node pairs within r_comm (closed boundary: d == r_comm counts)."""
    ids = sorted(positions)
    pairs: set[Pair] = set()
    for i, na in enumerate(ids):
        ax, ay = positions[na]
        for nb in ids[i + 1:]:
            bx, by = positions[nb]
            if math.hypot(ax - bx, ay - by) <= model.r_comm:
                pairs.add((na, nb))
    return pairs


class LinkStateTracker:
    """Tracks since when each adjacent pair has been continuously in range."""

    def __init__(self):
        self.in_range_since: dict[Pair, float] = {}

    def gate(self, adjacent: set[Pair], now: float, model: LinkModel) -> set[Pair]:
        """Update range timers and return the pairs usable at `now`.

        A pair is usable iff continuously in range for >= t_assoc; leaving
        range resets its timer.
        """
        for pair in list(self.in_range_since):
            if pair not in adjacent:
                del self.in_range_since[pair]
        for pair in adjacent:
            self.in_range_since.setdefault(pair, now)
        return {
            pair
            for pair, since in self.in_range_since.items()
            if now - since >= model.t_assoc
        }


def schedule_sessions(
    usable: set[Pair],
    busy: set[int],
    stalenesses: dict[Pair, float],
) -> list[Pair]:
    """Greedy maximal matching over usable pairs, most-stale first.

    Pairs involving busy nodes are excluded. Ties in staleness break by the
    canonical (min id, max id) pair order. Returns chosen pairs in pick order.
    """
    candidates = [p for p in usable if p[0] not in busy and p[1] not in busy]
    candidates.sort(key=lambda p: (-stalenesses.get(p, math.inf), p))
    chosen: list[Pair] = []
    matched: set[int] = set()
    for a, b in candidates:
        if a in matched or b in matched:
            continue
        chosen.append((a, b))
        matched.add(a)
        matched.add(b)
    return chosen


def budgets(
    sessions: list[Pair],
    positions: dict[int, tuple[float, float]],
    model: LinkModel,
    dt: float,
) -> dict[Pair, int]:
    """Per-session byte budgets for one tick under mutual interference.

    Two sessions interfere when any endpoint of one is within r_comm of any
    endpoint of the other. Each connected component of the interference graph
    splits the tick's byte pool evenly: floor(bandwidth*dt / k) per session,
    minus a per-tick latency deduction of floor(bandwidth*base_latency),
    floored at zero.
    """
    if not sessions:
        return {}
    pool = math.floor(model.bandwidth * dt)
    deduction = math.floor(model.bandwidth * model.base_latency)

    n = len(sessions)
    interferes = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if _sessions_interfere(sessions[i], sessions[j], positions, model):
                interferes[i][j] = interferes[j][i] = True

    component = [-1] * n
    comp_sizes: list[int] = []
    for i in range(n):
        if component[i] >= 0:
            continue
        cid = len(comp_sizes)
        stack = [i]
        component[i] = cid
        size = 0
        while stack:
            u = stack.pop()
            size += 1
            for v in range(n):
                if interferes[u][v] and component[v] < 0:
                    component[v] = cid
                    stack.append(v)
        comp_sizes.append(size)

    out: dict[Pair, int] = {}
    for i, pair in enumerate(sessions):
        share = pool // comp_sizes[component[i]]
        out[pair] = max(0, share - deduction)
    return out


def _sessions_interfere(
    s1: Pair, s2: Pair, positions: dict[int, tuple[float, float]], model: LinkModel
) -> bool:
    for u in s1:
        ux, uy = positions[u]
        for v in s2:
            vx, vy = positions[v]
            if math.hypot(ux - vx, uy - vy) <= model.r_comm:
                return True
    return False


def transfer_time(n_bytes: int, model: LinkModel) -> float:
    """Idealized uncontended time to move n_bytes over one link."""
    return model.base_latency + n_bytes / model.bandwidth
