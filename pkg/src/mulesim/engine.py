"""Deterministic simulation engine: fixed tick phases, metrics, summaries.

Each tick runs, in order: robot decisions+motion, link adjacency and
association gating, session scheduling and contention budgets, byte-budgeted
sync steps in canonical pair order, inbound merging, and metrics sampling.
Two runs of the same configuration produce byte-identical outputs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import agents as ag
from . import gossip, network
from .errors import ConfigError
from .world import (
    GeneratorParams,
    GridWorld,
    TerrainLabel,
    cell_center,
    cost_array,
    generate_world,
    load_world,
)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class UavPolicy:
    speed: float = 10.0
    sensor_radius: float = 40.0
    dual_role: bool = True
    t_explore: float = 120.0
    t_relay: float = 90.0
    s_max: float = 150.0


@dataclass
class Roster:
    ugv_count: int = 3
    ugv_speed: float = 1.5
    ugv_starts: list[tuple[int, int]] | None = None
    uav: UavPolicy = field(default_factory=UavPolicy)


@dataclass
class WorldSource:
    file: str | None = None
    generate: GeneratorParams | None = None
    seed: int = 0


@dataclass
class ScenarioConfig:
    world: WorldSource
    roster: Roster = field(default_factory=Roster)
    link: network.LinkModel = field(default_factory=network.LinkModel)
    topics: dict[str, int] = field(default_factory=lambda: dict(gossip.DEFAULT_TOPICS))
    dt: float = 0.1
    duration: float = 300.0
    seed: int = 0
    stop_when_all_visited: bool = True
    status_period: float = 5.0
    sensor_period: float = 0.5
    sample_period: float = 1.0
    resync_interval: float = 2.0
    claim_timeout: float = 240.0
    start_radius: float = 25.0
    cost_overrides: dict[TerrainLabel, float] | None = None


def _expect(doc: dict, key: str, kind, path: str, default=None, required=False):
    if key not in doc:
        if required:
            raise ConfigError(f"{path}{key}", "missing required field")
        return default
    val = doc[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise ConfigError(f"{path}{key}", f"expected {kind.__name__}, got {type(val).__name__}")
    return val


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Build and validate a ScenarioConfig; ConfigError names the field path."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "scenario must be a JSON object")

    wdoc = doc.get("world")
    if not isinstance(wdoc, dict):
        raise ConfigError("world", "missing or not an object")
    source = WorldSource()
    if "file" in wdoc:
        source.file = _expect(wdoc, "file", str, "world.")
    if "generate" in wdoc:
        gdoc = wdoc["generate"]
        if not isinstance(gdoc, dict):
            raise ConfigError("world.generate", "must be an object")
        gen = GeneratorParams()
        for fname, kind in (
            ("width", int), ("height", int), ("resolution", float), ("n_goals", int),
            ("hazard_density", float), ("road_pitch", float), ("road_width", int),
            ("building_density", float), ("vegetation_density", float),
            ("dirt_density", float), ("vehicle_density", float),
            ("connected", bool), ("retries", int), ("start_clear", int),
            ("goal_road_margin", int),
        ):
            if fname in gdoc:
                setattr(gen, fname, _expect(gdoc, fname, kind, "world.generate."))
        if gen.width <= 0 or gen.height <= 0:
            raise ConfigError("world.generate.width", "dimensions must be positive")
        if gen.n_goals < 0:
            raise ConfigError("world.generate.n_goals", "must be >= 0")
        if not (0.0 <= gen.hazard_density <= 1.0):
            raise ConfigError("world.generate.hazard_density", "must be in [0, 1]")
        source.generate = gen
    source.seed = _expect(wdoc, "seed", int, "world.", default=0)
    if (source.file is None) == (source.generate is None):
        raise ConfigError("world", "exactly one of 'file' or 'generate' is required")

    roster = Roster()
    rdoc = doc.get("roster", {})
    if not isinstance(rdoc, dict):
        raise ConfigError("roster", "must be an object")
    roster.ugv_count = _expect(rdoc, "ugv_count", int, "roster.", default=roster.ugv_count)
    if roster.ugv_count < 1:
        raise ConfigError("roster.ugv_count", "must be >= 1")
    roster.ugv_speed = _expect(rdoc, "ugv_speed", float, "roster.", default=roster.ugv_speed)
    if roster.ugv_speed <= 0:
        raise ConfigError("roster.ugv_speed", "must be > 0")
    if "ugv_starts" in rdoc:
        starts = rdoc["ugv_starts"]
        if not isinstance(starts, list) or any(
            not isinstance(s, list) or len(s) != 2 or not all(isinstance(v, int) for v in s)
            for s in starts
        ):
            raise ConfigError("roster.ugv_starts", "must be a list of [x, y] cells")
        if len(starts) != roster.ugv_count:
            raise ConfigError("roster.ugv_starts", f"expected {roster.ugv_count} entries")
        roster.ugv_starts = [tuple(s) for s in starts]
    udoc = rdoc.get("uav", {})
    if not isinstance(udoc, dict):
        raise ConfigError("roster.uav", "must be an object")
    uav = UavPolicy()
    for fname, kind in (
        ("speed", float), ("sensor_radius", float), ("dual_role", bool),
        ("t_explore", float), ("t_relay", float), ("s_max", float),
    ):
        if fname in udoc:
            setattr(uav, fname, _expect(udoc, fname, kind, "roster.uav."))
    for fname in ("speed", "sensor_radius", "t_explore", "t_relay", "s_max"):
        if getattr(uav, fname) <= 0:
            raise ConfigError(f"roster.uav.{fname}", "must be > 0")
    roster.uav = uav

    ldoc = doc.get("link", {})
    if not isinstance(ldoc, dict):
        raise ConfigError("link", "must be an object")
    try:
        link = network.LinkModel(
            r_comm=_expect(ldoc, "r_comm", float, "link.", default=50.0),
            t_assoc=_expect(ldoc, "t_assoc", float, "link.", default=1.0),
            base_latency=_expect(ldoc, "base_latency", float, "link.", default=0.05),
            bandwidth=_expect(ldoc, "bandwidth", float, "link.", default=2_000_000.0),
        )
    except ValueError as e:
        raise ConfigError("link", str(e)) from e

    topics = dict(gossip.DEFAULT_TOPICS)
    if "topics" in doc:
        tdoc = doc["topics"]
        if not isinstance(tdoc, dict) or any(
            not isinstance(k, str) or not isinstance(v, int) or isinstance(v, bool)
            for k, v in tdoc.items()
        ):
            raise ConfigError("topics", "must map topic name to integer priority")
        topics.update(tdoc)

    cfg = ScenarioConfig(world=source, roster=roster, link=link, topics=topics)
    cfg.dt = _expect(doc, "dt", float, "", default=cfg.dt)
    if cfg.dt <= 0:
        raise ConfigError("dt", "must be > 0")
    cfg.duration = _expect(doc, "duration", float, "", default=cfg.duration)
    if cfg.duration < 0:
        raise ConfigError("duration", "must be >= 0")
    cfg.seed = _expect(doc, "seed", int, "", default=cfg.seed)
    cfg.stop_when_all_visited = _expect(doc, "stop_when_all_visited", bool, "",
                                        default=cfg.stop_when_all_visited)
    for fname in ("status_period", "sensor_period", "sample_period", "claim_timeout",
                  "start_radius"):
        setattr(cfg, fname, _expect(doc, fname, float, "", default=getattr(cfg, fname)))
        if getattr(cfg, fname) <= 0:
            raise ConfigError(fname, "must be > 0")
    cfg.resync_interval = _expect(doc, "resync_interval", float, "", default=cfg.resync_interval)
    if cfg.resync_interval < 0:
        raise ConfigError("resync_interval", "must be >= 0")

    if "cost_overrides" in doc:
        odoc = doc["cost_overrides"]
        if not isinstance(odoc, dict):
            raise ConfigError("cost_overrides", "must be an object")
        table = {}
        by_name = {l.name: l for l in TerrainLabel}
        for k, v in odoc.items():
            if k not in by_name:
                raise ConfigError(f"cost_overrides.{k}", "unknown terrain label")
            if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 1.0:
                raise ConfigError(f"cost_overrides.{k}", "cost must be a number >= 1")
            table[by_name[k]] = float(v)
        cfg.cost_overrides = table

    return cfg


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError("<file>", f"invalid JSON: {e}") from e
    return config_from_dict(doc)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

EVENT_KINDS = (
    "GoalVisited", "Stuck", "MessageCreated", "MessageDelivered",
    "ModeChange", "SyncCompleted",
)


@dataclass
class MetricsLog:
    events: list[tuple[float, str, dict]] = field(default_factory=list)
    samples: list[tuple[float, int, float, float]] = field(default_factory=list)
    robot_totals: dict[int, dict] = field(default_factory=dict)
    goals_total: int = 0
    elapsed: float = 0.0
    ugv_ids: list[int] = field(default_factory=list)
    uav_id: int = -1


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def events_csv(log: MetricsLog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["time", "kind", "data"])
    for t, kind, data in log.events:
        row = [f"{t:.6f}", kind]
        row.extend(f"{k}={_fmt(v)}" for k, v in data.items())
        writer.writerow(row)
    return buf.getvalue()


def positions_csv(log: MetricsLog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["time", "node", "x", "y"])
    for t, node, x, y in log.samples:
        writer.writerow([f"{t:.6f}", node, f"{x:.6f}", f"{y:.6f}"])
    return buf.getvalue()


def _percentile(sorted_vals: list[float], q: float) -> float:
    """Nearest-rank percentile on a pre-sorted list."""
    if not sorted_vals:
        return math.nan
    rank = max(int(math.ceil(q * len(sorted_vals))), 1)
    return sorted_vals[rank - 1]


def summarize(log: MetricsLog) -> dict:
    """Mission summary recomputed from the event log plus robot totals."""
    visits = [(t, d) for t, kind, d in log.events if kind == "GoalVisited"]
    ttg = sorted(t - d["known_at"] for t, d in visits)
    # Latency is measured per message, creation to its final (latest) delivery.
    finals: dict[tuple, tuple[float, float]] = {}
    n_deliveries = 0
    for t, kind, d in log.events:
        if kind != "MessageDelivered":
            continue
        n_deliveries += 1
        key = (d["origin"], d["topic"], d["seq"])
        prev = finals.get(key)
        if prev is None or t > prev[1]:
            finals[key] = (d["created_at"], t)
    latencies = sorted(t - created for created, t in finals.values())
    per_robot = {}
    for rid in log.ugv_ids:
        totals = log.robot_totals.get(rid, {})
        per_robot[str(rid)] = {
            "goals": sum(1 for _, d in visits if d["robot"] == rid),
            "distance": round(totals.get("distance", 0.0), 6),
            "navigating_fraction": round(
                totals.get("time_navigating", 0.0) / log.elapsed if log.elapsed > 0 else 0.0, 6
            ),
            "stuck": bool(totals.get("stuck", False)),
        }
    completion = max((t for t, _ in visits), default=None) if (
        log.goals_total > 0 and len(visits) == log.goals_total
    ) else None
    summary = {
        "goals": {
            "total": log.goals_total,
            "visited": len(visits),
            "completion_time": round(completion, 6) if completion is not None else None,
        },
        "time_to_goal": {
            "count": len(ttg),
            "mean": round(sum(ttg) / len(ttg), 6) if ttg else None,
            "p50": round(_percentile(ttg, 0.50), 6) if ttg else None,
            "p90": round(_percentile(ttg, 0.90), 6) if ttg else None,
            "max": round(ttg[-1], 6) if ttg else None,
        },
        "delivery_latency": {
            "count": len(latencies),
            "deliveries": n_deliveries,
            "p50": round(_percentile(latencies, 0.50), 6) if latencies else None,
            "p90": round(_percentile(latencies, 0.90), 6) if latencies else None,
            "max": round(latencies[-1], 6) if latencies else None,
        },
        "per_robot": per_robot,
        "messages_created": sum(1 for _, kind, _d in log.events if kind == "MessageCreated"),
        "elapsed": round(log.elapsed, 6),
        "roster": {"ugvs": list(log.ugv_ids), "uav": log.uav_id},
    }
    return summary


def summary_json(log: MetricsLog) -> str:
    return json.dumps(summarize(log), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

class Simulation:
    """World + agents + radio state; advanced one tick at a time."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.world = self._build_world(config)
        self.time = 0.0
        self.tick_index = 0
        self.metrics = MetricsLog(goals_total=len(self.world.goals))
        self.link_tracker = network.LinkStateTracker()
        self.sessions: dict[network.Pair, gossip.SyncSession] = {}
        self.known_at: dict[int, float] = {}
        self.visited: set[int] = set()
        self.next_sample_at = 0.0

        n = config.roster.ugv_count
        starts = self._ugv_starts(config)
        self.ugvs: list[ag.UgvState] = []
        for i in range(n):
            db = gossip.NodeDb(i, config.topics)
            belief = ag.BeliefMap(self.world.width, self.world.height,
                                  self.world.resolution, config.cost_overrides)
            self.ugvs.append(ag.UgvState(
                node_id=i,
                position=cell_center(starts[i], self.world.resolution),
                speed=config.roster.ugv_speed,
                db=db,
                belief=belief,
                status_period=config.status_period,
                claim_timeout=config.claim_timeout,
                rng=np.random.default_rng((config.seed, 1000 + i)),
            ))
        uav_id = n
        up = config.roster.uav
        self.uav = ag.UavState(
            node_id=uav_id,
            position=((self.world.width * self.world.resolution) / 2.0,
                      (self.world.height * self.world.resolution) / 2.0),
            speed=up.speed,
            sensor_radius=up.sensor_radius,
            db=gossip.NodeDb(uav_id, config.topics),
            dual_role=up.dual_role,
            t_explore=up.t_explore,
            t_relay=up.t_relay,
            s_max=up.s_max,
            sensor_period=config.sensor_period,
            rng=np.random.default_rng((config.seed, 1000 + uav_id)),
        )
        self.dbs: dict[int, gossip.NodeDb] = {u.node_id: u.db for u in self.ugvs}
        self.dbs[uav_id] = self.uav.db
        self.metrics.ugv_ids = [u.node_id for u in self.ugvs]
        self.metrics.uav_id = uav_id

    @staticmethod
    def _build_world(config: ScenarioConfig) -> GridWorld:
        if config.world.file is not None:
            return load_world(config.world.file)
        return generate_world(config.world.generate, config.world.seed)

    def _ugv_starts(self, config: ScenarioConfig) -> list[tuple[int, int]]:
        world = self.world
        n = config.roster.ugv_count
        if config.roster.ugv_starts is not None:
            costs = cost_array(config.cost_overrides)
            for i, (x, y) in enumerate(config.roster.ugv_starts):
                if not world.in_bounds((x, y)):
                    raise ConfigError(f"roster.ugv_starts[{i}]", "out of bounds")
                if not math.isfinite(costs[world.labels[y, x]]):
                    raise ConfigError(f"roster.ugv_starts[{i}]", "impassable start cell")
            if len(set(config.roster.ugv_starts)) != n:
                raise ConfigError("roster.ugv_starts", "start cells must be distinct")
            return list(config.roster.ugv_starts)

        # Default placement: seeded sampling of distinct passable, hazard-free
        # cells near the origin. This is the per-seed variation in a scenario.
        costs = cost_array(config.cost_overrides)
        finite = np.isfinite(costs[world.labels]) & ~world.hazard
        res = world.resolution
        radius_cells = max(int(config.start_radius / res), 1)
        cands = []
        for y in range(0, min(radius_cells + 1, world.height)):
            for x in range(0, min(radius_cells + 1, world.width)):
                if finite[y, x]:
                    cx, cy = cell_center((x, y), res)
                    if math.hypot(cx, cy) <= config.start_radius:
                        cands.append((x, y))
        if len(cands) < n:
            raise ConfigError("roster.ugv_count",
                              f"only {len(cands)} passable start cells within "
                              f"{config.start_radius} m of the origin")
        rng = np.random.default_rng((config.seed, 7))
        pick = rng.choice(len(cands), size=n, replace=False)
        return [cands[int(i)] for i in pick]

    # -- tick phases --------------------------------------------------------

    def tick(self) -> None:
        now = self.time
        cfg = self.config
        events: list[tuple[float, str, dict]] = []

        # Phase 1+2: decisions and motion, robots in id order, then the UAV.
        for ugv in self.ugvs:
            for kind, data in ag.ugv_tick(ugv, self.world, cfg.dt, now):
                self._record_agent_event(events, now, kind, data)
        stalenesses = {
            u.node_id: gossip.staleness(self.uav.db, u.node_id, now) for u in self.ugvs
        }
        for kind, data in ag.uav_tick(self.uav, self.world, stalenesses, cfg.dt, now):
            self._record_agent_event(events, now, kind, data)

        # Phase 3: adjacency and association gating.
        positions = {u.node_id: u.position for u in self.ugvs}
        positions[self.uav.node_id] = self.uav.position
        adjacent = network.adjacency(positions, cfg.link)
        usable = self.link_tracker.gate(adjacent, now, cfg.link)

        # Phase 4: session upkeep, scheduling, contention budgets.
        for pair in sorted(self.sessions):
            if pair not in usable:
                gossip.abort_session(self.sessions[pair], self.dbs[pair[0]], self.dbs[pair[1]])
                del self.sessions[pair]
        busy = {node for pair in self.sessions for node in pair}
        eligible: set[network.Pair] = set()
        stal: dict[network.Pair, float] = {}
        for pair in usable:
            if pair in self.sessions:
                continue
            s = max(
                gossip.staleness(self.dbs[pair[0]], pair[1], now),
                gossip.staleness(self.dbs[pair[1]], pair[0], now),
            )
            if s >= cfg.resync_interval:
                eligible.add(pair)
                stal[pair] = s
        for pair in network.schedule_sessions(eligible, busy, stal):
            self.sessions[pair] = gossip.open_session(
                self.dbs[pair[0]], self.dbs[pair[1]], now
            )
        active = sorted(self.sessions)
        budget_map = network.budgets(active, positions, cfg.link, cfg.dt)

        # Phase 5: sync steps in canonical pair order.
        deliveries: list[tuple[gossip.MsgHeader, int]] = []
        for pair in active:
            session = self.sessions[pair]
            report = gossip.sync_step(
                session, self.dbs[pair[0]], self.dbs[pair[1]], budget_map[pair], now
            )
            deliveries.extend(report.delivered)
            if session.phase is gossip.SyncPhase.DONE:
                events.append((now, "SyncCompleted", {
                    "a": pair[0], "b": pair[1],
                    "bytes": session.achieved_bytes,
                    "started_at": session.started_at,
                }))
                if self.uav.node_id in pair:
                    peer = pair[0] if pair[1] == self.uav.node_id else pair[1]
                    self.uav.synced_peers.add(peer)
                del self.sessions[pair]

        # Phase 6: deliver and merge inbound messages.
        per_receiver: dict[int, list[gossip.Message]] = {}
        for header, receiver in deliveries:
            events.append((now, "MessageDelivered", {
                "origin": header.origin, "topic": header.topic, "seq": header.seq,
                "receiver": receiver, "created_at": header.created_at,
            }))
            per_receiver.setdefault(receiver, []).append(self.dbs[receiver].store[header.key])
        for receiver in sorted(per_receiver):
            msgs = per_receiver[receiver]
            if receiver == self.uav.node_id:
                ag.handle_uav_inbound(self.uav, msgs)
            else:
                new_goals = ag.handle_ugv_inbound(self.ugvs[receiver], msgs, now)
                for gid in new_goals:
                    self.known_at.setdefault(gid, now)

        # Phase 7: metrics sampling.
        if now >= self.next_sample_at - 1e-9:
            for node in sorted(positions):
                x, y = positions[node]
                self.metrics.samples.append((now, node, x, y))
            self.next_sample_at += cfg.sample_period

        self.metrics.events.extend(events)
        self.tick_index += 1
        self.time = self.tick_index * cfg.dt

    def _record_agent_event(self, events, now, kind, data) -> None:
        """Stamp and filter one agent event before it enters the log."""
        if kind == "GoalVisited":
            gid = data["goal"]
            if gid in self.visited:
                return  # another robot reported it first this tick
            self.visited.add(gid)
            data = dict(data)
            data["known_at"] = self.known_at.get(gid, 0.0)
        events.append((now, kind, data))

    def all_goals_visited(self) -> bool:
        return self.metrics.goals_total > 0 and len(self.visited) == self.metrics.goals_total

    def run(self) -> MetricsLog:
        cfg = self.config
        n_ticks = int(round(cfg.duration / cfg.dt))
        while self.tick_index < n_ticks:
            self.tick()
            if cfg.stop_when_all_visited and self.all_goals_visited():
                break
        self.metrics.elapsed = self.time
        for ugv in self.ugvs:
            self.metrics.robot_totals[ugv.node_id] = {
                "distance": ugv.distance_traveled,
                "time_navigating": ugv.time_navigating,
                "stuck": ugv.mode is ag.UgvMode.STUCK,
            }
        return self.metrics


def init(config: ScenarioConfig) -> Simulation:
    return Simulation(config)


def run(config: ScenarioConfig) -> MetricsLog:
    return Simulation(config).run()
