"""Robot behavior: belief maps, goal selection, ground navigation, air coverage.

Ground robots (UGVs) plan over a belief map assembled from aerial map patches
and first-hand traversal experiences, greedily pick the cheapest unclaimed
goal, and navigate cell to cell. The air robot (UAV) sweeps a lawnmower
pattern revealing terrain and, when dual-role, periodically tours the ground
robots to ferry messages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import planning
from .gossip import (
    Experience,
    GoalClaim,
    GoalVisited,
    Lethal,
    MapPatch,
    MeasuredCost,
    Message,
    NodeDb,
    RobotStatus,
    insert_local,
)
from .world import (
    Goal,
    GridWorld,
    TerrainLabel,
    TraversalOutcome,
    cell_center,
    cost_array,
    pos_to_cell,
    traversal_outcome,
)

Cell = tuple[int, int]
Event = tuple[str, dict]


# ---------------------------------------------------------------------------
# Belief map and merge rules
# ---------------------------------------------------------------------------

class BeliefMap:
    """One robot's current picture of the terrain.

    Cells never sensed or reported are UNKNOWN at the unknown-terrain cost.
    Aerial patches only ever fill unknowns; first-hand experiences override
    aerial data and are themselves reconciled last-writer-wins by
    (created_at, origin). Lethal experiences are permanent.
    """

    def __init__(self, width: int, height: int, resolution: float,
                 cost_table: dict[TerrainLabel, float] | None = None):
        self.width = width
        self.height = height
        self.resolution = resolution
        self.costs_by_label = cost_array(cost_table)
        shape = (height, width)
        self.known = np.zeros(shape, dtype=bool)
        self.label = np.full(shape, int(TerrainLabel.UNKNOWN), dtype=np.uint8)
        self.cost = np.full(shape, self.costs_by_label[TerrainLabel.UNKNOWN], dtype=np.float64)
        self.lethal = np.zeros(shape, dtype=bool)
        self.measured = np.zeros(shape, dtype=bool)
        self.measured_time = np.zeros(shape, dtype=np.float64)
        self.measured_origin = np.full(shape, -1, dtype=np.int64)

    def apply_patch(self, patch: MapPatch, dirty: np.ndarray) -> None:
        xs = patch.cells[:, 0]
        ys = patch.cells[:, 1]
        fresh = self.label[ys, xs] == TerrainLabel.UNKNOWN
        if not fresh.any():
            return
        xs = xs[fresh]
        ys = ys[fresh]
        labs = patch.labels[fresh]
        self.label[ys, xs] = labs
        self.known[ys, xs] = True
        # Experience beats aerial data: leave lethal/measured cells' costs alone.
        settable = ~(self.lethal[ys, xs] | self.measured[ys, xs])
        ax = xs[settable]
        ay = ys[settable]
        new_cost = self.costs_by_label[labs[settable]]
        with np.errstate(invalid="ignore"):
            changed = self.cost[ay, ax] != new_cost
        self.cost[ay, ax] = new_cost
        dirty[ay[changed], ax[changed]] = True

    def apply_experience(self, exp: Experience, created_at: float, origin: int,
                         dirty: np.ndarray) -> None:
        x, y = exp.cell
        if isinstance(exp.verdict, Lethal):
            if not self.lethal[y, x]:
                self.lethal[y, x] = True
                self.known[y, x] = True
                if self.cost[y, x] != math.inf:
                    self.cost[y, x] = math.inf
                    dirty[y, x] = True
            return
        if self.lethal[y, x]:
            return
        stamp = (created_at, origin)
        if self.measured[y, x] and stamp <= (self.measured_time[y, x], int(self.measured_origin[y, x])):
            return
        self.measured[y, x] = True
        self.measured_time[y, x] = created_at
        self.measured_origin[y, x] = origin
        self.known[y, x] = True
        value = exp.verdict.multiplier
        if self.cost[y, x] != value:
            self.cost[y, x] = value
            dirty[y, x] = True


def merge_inbound(belief: BeliefMap, msgs: list[Message]) -> np.ndarray:
    """Apply map-affecting payloads to a belief.

    Commutative and idempotent over message sets. Returns a bool mask of
    cells whose believed cost changed (the replanning trigger).
    """
    dirty = np.zeros((belief.height, belief.width), dtype=bool)
    for m in msgs:
        p = m.payload
        if isinstance(p, MapPatch):
            belief.apply_patch(p, dirty)
        elif isinstance(p, Experience):
            belief.apply_experience(p, m.header.created_at, m.header.origin, dirty)
    return dirty


# ---------------------------------------------------------------------------
# Planning wrappers
# ---------------------------------------------------------------------------

def plan_path(belief: BeliefMap, start: Cell, goal: Cell) -> tuple[list[Cell], float] | None:
    """Cheapest 8-connected path over believed costs.

    Returns (path, cost) with path[0] == start, or None when the goal is
    unreachable over finite-cost cells. start == goal gives ([start], 0.0).
    """
    for name, (x, y) in (("start", start), ("goal", goal)):
        if not (0 <= x < belief.width and 0 <= y < belief.height):
            raise ValueError(f"{name} cell ({x}, {y}) out of bounds")
    if not math.isfinite(belief.cost[start[1], start[0]]):
        raise ValueError(f"start cell {start} has infinite believed cost")
    if start == goal:
        return [start], 0.0
    result = planning.astar_path(belief.cost, start[0], start[1], goal[0], goal[1],
                                 belief.resolution)
    if result is None:
        return None
    total, path = result
    return path, total


def distance_field(belief: BeliefMap, start: Cell) -> np.ndarray:
    """Optimal path cost from start to every cell (inf where unreachable)."""
    return planning.distance_field(belief.cost, start[0], start[1], belief.resolution)


# ---------------------------------------------------------------------------
# UGV
# ---------------------------------------------------------------------------

class UgvMode(Enum):
    IDLE = "idle"
    NAVIGATING = "navigating"
    STUCK = "stuck"


@dataclass
class UgvState:
    node_id: int
    position: tuple[float, float]
    speed: float
    db: NodeDb
    belief: BeliefMap
    status_period: float = 5.0
    claim_timeout: float = 240.0
    mode: UgvMode = UgvMode.IDLE
    current_goal: int | None = None
    path: list[Cell] = field(default_factory=list)
    path_next: int = 0
    goals_known: dict[int, Goal] = field(default_factory=dict)
    visited_seen: set[int] = field(default_factory=set)
    claims_seen: dict[int, dict[int, float]] = field(default_factory=dict)  # goal -> claimant -> earliest time
    time_navigating: float = 0.0
    distance_traveled: float = 0.0
    next_status_at: float = 0.0
    select_dirty: bool = True
    select_wake: float = math.inf
    path_dirty: bool = False
    rng: np.random.Generator | None = None

    def cell(self, world: GridWorld) -> Cell:
        return pos_to_cell(self.position, world)


def _emit(db: NodeDb, topic: str, payload, now: float, events: list[Event]) -> Message:
    msg = insert_local(db, topic, db.topics[topic], payload, now)
    events.append((
        "MessageCreated",
        {
            "origin": msg.header.origin,
            "topic": topic,
            "seq": msg.header.seq,
            "priority": msg.header.priority,
            "size": msg.header.payload_size,
        },
    ))
    return msg


def claim_winner(ugv: UgvState, goal_id: int, now: float) -> tuple[float, int] | None:
    """Live winning claim for a goal: min (claim_time, claimant), expiries skipped."""
    claims = ugv.claims_seen.get(goal_id)
    if not claims:
        return None
    live = [
        (t, c) for c, t in claims.items()
        if now - t < ugv.claim_timeout
    ]
    if not live:
        return None
    return min(live)


def select_goal(ugv: UgvState, now: float, events: list[Event]) -> int | None:
    """Greedy goal choice: cheapest reachable known goal not visited or claimed.

    Ties break toward the lower goal id. Claims by other robots exclude a
    goal while they are live; the robot's own selection is claimed and
    recorded immediately.
    """
    ugv.select_dirty = False
    ugv.select_wake = math.inf
    candidates = []
    for gid in sorted(ugv.goals_known):
        if gid in ugv.visited_seen:
            continue
        winner = claim_winner(ugv, gid, now)
        if winner is not None and winner[1] != ugv.node_id:
            # Blocked for now; wake up when the blocking claim can expire.
            ugv.select_wake = min(ugv.select_wake, winner[0] + ugv.claim_timeout)
            continue
        candidates.append(gid)
    if not candidates:
        return None

    cell = pos_to_cell(ugv.position, _WorldShim(ugv.belief))
    dists = distance_field(ugv.belief, cell)
    best: tuple[float, int] | None = None
    for gid in candidates:
        gx, gy = ugv.goals_known[gid].cell
        d = dists[gy, gx]
        if not math.isfinite(d):
            continue
        if best is None or (d, gid) < best:
            best = (d, gid)
    if best is None:
        return None
    gid = best[1]
    ugv.claims_seen.setdefault(gid, {})
    prev = ugv.claims_seen[gid].get(ugv.node_id)
    if prev is None or now < prev:
        ugv.claims_seen[gid][ugv.node_id] = now
    _emit(ugv.db, "goal_claim", GoalClaim(gid, ugv.node_id, now), now, events)
    return gid


class _WorldShim:
    """Adapter so pos_to_cell works against a belief's geometry."""

    def __init__(self, belief: BeliefMap):
        self.width = belief.width
        self.height = belief.height
        self.resolution = belief.resolution


def _abandon(ugv: UgvState) -> None:
    ugv.current_goal = None
    ugv.path = []
    ugv.path_next = 0
    ugv.mode = UgvMode.IDLE
    ugv.select_dirty = True
    ugv.path_dirty = False


def _visit_goal(ugv: UgvState, gid: int, now: float, events: list[Event]) -> None:
    ugv.visited_seen.add(gid)
    _emit(ugv.db, "goal_visited", GoalVisited(gid, ugv.node_id, now), now, events)
    events.append(("GoalVisited", {"goal": gid, "robot": ugv.node_id}))
    _abandon(ugv)


def _record_experience(ugv: UgvState, cell: Cell, verdict, now: float,
                       events: list[Event]) -> None:
    exp = Experience(cell, verdict)
    msg = _emit(ugv.db, "experience", exp, now, events)
    # First-hand knowledge applies to the robot's own belief immediately.
    dirty = np.zeros((ugv.belief.height, ugv.belief.width), dtype=bool)
    ugv.belief.apply_experience(exp, msg.header.created_at, msg.header.origin, dirty)
    if dirty.any():
        ugv.select_dirty = True


def ugv_tick(ugv: UgvState, world: GridWorld, dt: float, now: float) -> list[Event]:
    """One decision+motion step for a ground robot."""
    events: list[Event] = []

    if now >= ugv.next_status_at:
        _emit(ugv.db, "robot_status", RobotStatus(ugv.position, now), now, events)
        ugv.next_status_at += ugv.status_period

    if ugv.mode is UgvMode.STUCK:
        return events

    # Drop the current goal if someone else visited it or out-claims us.
    if ugv.mode is UgvMode.NAVIGATING:
        gid = ugv.current_goal
        if gid in ugv.visited_seen:
            _abandon(ugv)
        else:
            winner = claim_winner(ugv, gid, now)
            if winner is not None and winner[1] != ugv.node_id:
                _abandon(ugv)

    if ugv.mode is UgvMode.IDLE and (ugv.select_dirty or now >= ugv.select_wake):
        gid = select_goal(ugv, now, events)
        if gid is not None:
            start = ugv.cell(world)
            goal_cell = ugv.goals_known[gid].cell
            planned = plan_path(ugv.belief, start, goal_cell)
            if planned is None:
                ugv.select_dirty = True  # should not happen; selection checked reach
            else:
                ugv.current_goal = gid
                ugv.path = planned[0]
                ugv.path_next = 1
                ugv.mode = UgvMode.NAVIGATING
                if goal_cell == start:
                    _visit_goal(ugv, gid, now, events)

    if ugv.mode is UgvMode.NAVIGATING and ugv.path_dirty:
        ugv.path_dirty = False
        start = ugv.cell(world)
        goal_cell = ugv.goals_known[ugv.current_goal].cell
        planned = plan_path(ugv.belief, start, goal_cell)
        if planned is None:
            _abandon(ugv)
        else:
            ugv.path = planned[0]
            ugv.path_next = 1

    if ugv.mode is UgvMode.NAVIGATING:
        ugv.time_navigating += dt
        _advance(ugv, world, dt, now, events)

    return events


def _advance(ugv: UgvState, world: GridWorld, dt: float, now: float,
             events: list[Event]) -> None:
    """Move along the path, handling cell entries one boundary at a time."""
    remaining = ugv.speed * dt
    res = world.resolution
    max_step = 0.45 * res  # never skip over a cell boundary
    # Ground truth uses the same label->cost table the belief was built with,
    # so a measured cell's cost settles instead of flip-flopping.
    base_costs = ugv.belief.costs_by_label
    cur_cell = ugv.cell(world)

    while remaining > 1e-12 and ugv.path_next < len(ugv.path):
        target = cell_center(ugv.path[ugv.path_next], res)
        dx = target[0] - ugv.position[0]
        dy = target[1] - ugv.position[1]
        d = math.hypot(dx, dy)
        if d <= 1e-12:
            ugv.path_next += 1
            continue
        step = min(remaining, max_step, d)
        new_pos = (ugv.position[0] + dx / d * step, ugv.position[1] + dy / d * step)
        new_cell = pos_to_cell(new_pos, world)

        if new_cell != cur_cell:
            true_label = TerrainLabel(world.labels[new_cell[1], new_cell[0]])
            true_cost = base_costs[true_label]
            if not math.isfinite(true_cost):
                # Physically blocked: stop at the boundary, report, replan.
                if math.isfinite(ugv.belief.cost[new_cell[1], new_cell[0]]):
                    _record_experience(ugv, new_cell, MeasuredCost(true_cost), now, events)
                ugv.path = []
                ugv.path_next = 0
                ugv.mode = UgvMode.IDLE
                ugv.select_dirty = True
                return

            ugv.position = new_pos
            ugv.distance_traveled += step
            remaining -= step
            cur_cell = new_cell

            if traversal_outcome(world, new_cell) is TraversalOutcome.STUCK:
                ugv.mode = UgvMode.STUCK
                _record_experience(ugv, new_cell, Lethal(), now, events)
                events.append(("Stuck", {"robot": ugv.node_id, "x": new_cell[0], "y": new_cell[1]}))
                ugv.path = []
                ugv.path_next = 0
                return

            if ugv.belief.cost[new_cell[1], new_cell[0]] != true_cost:
                _record_experience(ugv, new_cell, MeasuredCost(float(true_cost)), now, events)

            if ugv.current_goal is not None and new_cell == ugv.goals_known[ugv.current_goal].cell:
                _visit_goal(ugv, ugv.current_goal, now, events)
                return
        else:
            ugv.position = new_pos
            ugv.distance_traveled += step
            remaining -= step
            if step == d or math.hypot(target[0] - ugv.position[0], target[1] - ugv.position[1]) <= 1e-12:
                ugv.path_next += 1


def handle_ugv_inbound(ugv: UgvState, msgs: list[Message], now: float) -> list[int]:
    """Route freshly delivered messages into a UGV's state.

    Returns goal ids that just became known to this robot (for mission
    bookkeeping). Sets the replanning flag when a changed cell lies on the
    robot's remaining path.
    """
    new_goals: list[int] = []
    map_msgs = []
    for m in msgs:
        p = m.payload
        if isinstance(p, (MapPatch, Experience)):
            map_msgs.append(m)
            if isinstance(p, MapPatch):
                for g in p.goals:
                    if g.id not in ugv.goals_known:
                        ugv.goals_known[g.id] = g
                        new_goals.append(g.id)
                        ugv.select_dirty = True
        elif isinstance(p, GoalClaim):
            claims = ugv.claims_seen.setdefault(p.goal_id, {})
            prev = claims.get(p.claimant)
            if prev is None or p.claim_time < prev:
                claims[p.claimant] = p.claim_time
                ugv.select_dirty = True
        elif isinstance(p, GoalVisited):
            if p.goal_id not in ugv.visited_seen:
                ugv.visited_seen.add(p.goal_id)
                ugv.select_dirty = True
        # RobotStatus is not used by ground robots.

    if map_msgs:
        dirty = merge_inbound(ugv.belief, map_msgs)
        if dirty.any():
            ugv.select_dirty = True
            if ugv.mode is UgvMode.NAVIGATING and ugv.path:
                rest = ugv.path[max(ugv.path_next - 1, 0):]
                xs = np.fromiter((c[0] for c in rest), dtype=np.int64, count=len(rest))
                ys = np.fromiter((c[1] for c in rest), dtype=np.int64, count=len(rest))
                if dirty[ys, xs].any():
                    ugv.path_dirty = True
    return new_goals


# ---------------------------------------------------------------------------
# UAV
# ---------------------------------------------------------------------------

class UavMode(Enum):
    EXPLORE = "explore"
    RELAY = "relay"


@dataclass
class UavState:
    node_id: int
    position: tuple[float, float]
    speed: float
    sensor_radius: float
    db: NodeDb
    dual_role: bool = True
    t_explore: float = 120.0
    t_relay: float = 90.0
    s_max: float = 150.0
    sensor_period: float = 0.5
    mode: UavMode = UavMode.EXPLORE
    lawnmower: list[tuple[float, float]] = field(default_factory=list)
    cursor: int = 0
    explore_timer: float = 0.0
    relay_timer: float = 0.0
    tour: list[tuple[int, tuple[float, float]]] = field(default_factory=list)
    tour_next: int = 0
    stop_timeout: float = 0.0
    stop_elapsed: float = 0.0
    last_known: dict[int, tuple[tuple[float, float], float]] = field(default_factory=dict)
    revealed: np.ndarray | None = None
    next_sensor_at: float = 0.0
    synced_peers: set[int] = field(default_factory=set)
    relay_synced: bool = False        # any sync during the current relay tour
    stale_trigger_armed: bool = True  # disarmed after a tour that found nobody
    survey_complete: bool = False     # every cell revealed; sensing is a no-op
    rng: np.random.Generator | None = None


def lawnmower_waypoints(world: GridWorld, sensor_radius: float) -> list[tuple[float, float]]:
    """Back-and-forth stripes over the bounding box, spaced 1.5x sensor radius."""
    w_m = world.width * world.resolution
    h_m = world.height * world.resolution
    spacing = 1.5 * sensor_radius
    xs = [0.0]
    while xs[-1] + spacing < w_m:
        xs.append(xs[-1] + spacing)
    if w_m - xs[-1] > sensor_radius:
        xs.append(w_m)
    waypoints = []
    for i, x in enumerate(xs):
        if i % 2 == 0:
            waypoints.append((x, 0.0))
            waypoints.append((x, h_m))
        else:
            waypoints.append((x, h_m))
            waypoints.append((x, 0.0))
    return waypoints


def footprint_cells(world: GridWorld, center: tuple[float, float], radius: float) -> np.ndarray:
    """Bool mask of cells whose centers lie within radius of center."""
    res = world.resolution
    x0 = max(int((center[0] - radius) / res) - 1, 0)
    x1 = min(int((center[0] + radius) / res) + 2, world.width)
    y0 = max(int((center[1] - radius) / res) - 1, 0)
    y1 = min(int((center[1] + radius) / res) + 2, world.height)
    mask = np.zeros((world.height, world.width), dtype=bool)
    if x0 >= x1 or y0 >= y1:
        return mask
    xs = (np.arange(x0, x1) + 0.5) * res - center[0]
    ys = (np.arange(y0, y1) + 0.5) * res - center[1]
    local = xs[None, :] ** 2 + ys[:, None] ** 2 <= radius * radius
    mask[y0:y1, x0:x1] = local
    return mask


def reveal_footprint(world: GridWorld, center: tuple[float, float], radius: float) -> MapPatch:
    """Sensor sweep result: true labels for every cell in the footprint.

    Hazards stay hidden (they are not airborne-visible); goals on footprint
    cells ride along in the patch.
    """
    mask = footprint_cells(world, center, radius)
    ys, xs = np.nonzero(mask)
    cells = np.column_stack([xs, ys]).astype(np.int32)
    labels = world.labels[ys, xs]
    goals = tuple(g for g in world.goals if mask[g.cell[1], g.cell[0]])
    return MapPatch(cells, labels, goals)


def nearest_neighbor_tour(
    start: tuple[float, float],
    targets: dict[int, tuple[float, float]],
) -> list[tuple[int, tuple[float, float]]]:
    """Greedy nearest-neighbor ordering of (robot, position) stops; ties by id."""
    tour = []
    pos = start
    left = dict(targets)
    while left:
        best = min(left.items(), key=lambda kv: (math.hypot(kv[1][0] - pos[0], kv[1][1] - pos[1]), kv[0]))
        tour.append(best)
        pos = best[1]
        del left[best[0]]
    return tour


def uav_tick(uav: UavState, world: GridWorld, stalenesses: dict[int, float],
             dt: float, now: float) -> list[Event]:
    """One decision+motion+sensing step for the air robot."""
    events: list[Event] = []

    if uav.revealed is None:
        uav.revealed = np.zeros((world.height, world.width), dtype=bool)
    if not uav.lawnmower:
        uav.lawnmower = lawnmower_waypoints(world, uav.sensor_radius)

    # Mode machine. Staleness counts only peers heard from at least once; a
    # relay tour needs at least one known position. A tour that found nobody
    # disarms the staleness trigger (timer-triggered tours still run every
    # t_explore, and the sweep doubles as the search pattern) until a later
    # tour syncs someone again.
    if uav.mode is UavMode.EXPLORE and uav.dual_role:
        worst = max((s for s in stalenesses.values() if math.isfinite(s)), default=0.0)
        due = uav.explore_timer >= uav.t_explore or (
            uav.stale_trigger_armed and worst >= uav.s_max
        )
        if due and uav.last_known:
            targets = {rid: pos for rid, (pos, _) in sorted(uav.last_known.items())}
            uav.tour = nearest_neighbor_tour(uav.position, targets)
            uav.tour_next = 0
            uav.relay_timer = 0.0
            uav.stop_timeout = uav.t_relay / len(uav.tour)
            uav.stop_elapsed = 0.0
            uav.relay_synced = False
            uav.mode = UavMode.RELAY
            events.append(("ModeChange", {"node": uav.node_id, "mode": "relay"}))
    elif uav.mode is UavMode.RELAY:
        if uav.synced_peers:
            uav.relay_synced = True
        if uav.tour_next < len(uav.tour):
            stop_robot = uav.tour[uav.tour_next][0]
            if stop_robot in uav.synced_peers or uav.stop_elapsed >= uav.stop_timeout:
                uav.tour_next += 1
                uav.stop_elapsed = 0.0
        if uav.tour_next >= len(uav.tour) or uav.relay_timer >= uav.t_relay:
            uav.mode = UavMode.EXPLORE
            uav.explore_timer = 0.0
            uav.stale_trigger_armed = uav.relay_synced
            events.append(("ModeChange", {"node": uav.node_id, "mode": "explore"}))
    uav.synced_peers.clear()

    # Motion. Explore loops the lawnmower indefinitely; repeat passes cost
    # nothing to sense (below) but keep the vehicle moving over the team.
    if uav.mode is UavMode.EXPLORE:
        uav.explore_timer += dt
        _fly(uav, dt, uav.lawnmower[uav.cursor])
        if _arrived(uav.position, uav.lawnmower[uav.cursor]):
            uav.cursor = (uav.cursor + 1) % len(uav.lawnmower)
    else:
        uav.relay_timer += dt
        uav.stop_elapsed += dt
        if uav.tour_next < len(uav.tour):
            _fly(uav, dt, uav.tour[uav.tour_next][1])

    # Sensing (explore mode only).
    if uav.mode is UavMode.EXPLORE and not uav.survey_complete and now >= uav.next_sensor_at:
        uav.next_sensor_at += uav.sensor_period
        mask = footprint_cells(world, uav.position, uav.sensor_radius)
        new = mask & ~uav.revealed
        if new.any():
            uav.revealed |= new
            ys, xs = np.nonzero(new)
            cells = np.column_stack([xs, ys]).astype(np.int32)
            labels = world.labels[ys, xs]
            goals = tuple(g for g in world.goals if new[g.cell[1], g.cell[0]])
            patch = MapPatch(cells, labels, goals)
            _emit(uav.db, "map_patch", patch, now, events)
            uav.survey_complete = bool(uav.revealed.all())

    return events


def handle_uav_inbound(uav: UavState, msgs: list[Message]) -> None:
    """The UAV only consumes status reports (for relay tours); the rest rides."""
    for m in msgs:
        p = m.payload
        if isinstance(p, RobotStatus):
            rid = m.header.origin
            prev = uav.last_known.get(rid)
            if prev is None or p.time > prev[1]:
                uav.last_known[rid] = (p.position, p.time)


def _fly(uav: UavState, dt: float, target: tuple[float, float]) -> None:
    dx = target[0] - uav.position[0]
    dy = target[1] - uav.position[1]
    d = math.hypot(dx, dy)
    step = uav.speed * dt
    if d <= step or d <= 1e-12:
        uav.position = target
    else:
        uav.position = (uav.position[0] + dx / d * step, uav.position[1] + dy / d * step)


def _arrived(pos: tuple[float, float], target: tuple[float, float]) -> bool:
    return math.hypot(pos[0] - target[0], pos[1] - target[1]) <= 1e-9
