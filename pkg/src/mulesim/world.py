"""Grid world model: terrain labels, traversal costs, procedural generation, file I/O.

The world is a fixed-resolution occupancy/semantic grid. Cells carry a terrain
label, an optional hidden hazard flag, and the grid carries a list of goal
cells. Ground truth is immutable once constructed; robots interact with it
only through traversal outcomes and sensor footprints.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np
from scipy import ndimage

from .errors import OutOfBoundsError, SchemaError, UnsatisfiableLayoutError

Infinite = math.inf


class TerrainLabel(IntEnum):
    ROAD = 0
    GRASS_SIDEWALK = 1
    DIRT_GRAVEL = 2
    VEGETATION = 3
    BUILDING = 4
    VEHICLE = 5
    UNKNOWN = 6


# Default traversal cost multipliers, scenario-overridable.
DEFAULT_COSTS: dict[TerrainLabel, float] = {
    TerrainLabel.ROAD: 1.0,
    TerrainLabel.GRASS_SIDEWALK: 2.0,
    TerrainLabel.DIRT_GRAVEL: 1.5,
    TerrainLabel.VEGETATION: 5.0,
    TerrainLabel.BUILDING: Infinite,
    TerrainLabel.VEHICLE: Infinite,
    TerrainLabel.UNKNOWN: 3.0,
}

# One character per label in world files. UNKNOWN never appears in ground truth.
LABEL_TO_CHAR: dict[TerrainLabel, str] = {
    TerrainLabel.ROAD: "R",
    TerrainLabel.GRASS_SIDEWALK: "G",
    TerrainLabel.DIRT_GRAVEL: "D",
    TerrainLabel.VEGETATION: "V",
    TerrainLabel.BUILDING: "B",
    TerrainLabel.VEHICLE: "C",
}
CHAR_TO_LABEL = {c: l for l, c in LABEL_TO_CHAR.items()}

# Labels that may carry a hidden hazard.
HAZARD_LABELS = (TerrainLabel.GRASS_SIDEWALK, TerrainLabel.VEGETATION)


def base_cost(label: TerrainLabel, table: dict[TerrainLabel, float] | None = None) -> float:
    """Traversal cost multiplier for a terrain label (>= 1 or Infinite)."""
    if table is not None and label in table:
        return table[label]
    return DEFAULT_COSTS[label]


def cost_array(table: dict[TerrainLabel, float] | None = None) -> np.ndarray:
    """Cost table as a float64 array indexed by TerrainLabel value."""
    out = np.empty(len(TerrainLabel), dtype=np.float64)
    for label in TerrainLabel:
        out[label] = base_cost(label, table)
    return out


class TraversalOutcome(Enum):
    OK = "ok"
    STUCK = "stuck"


@dataclass(frozen=True)
class Goal:
    id: int
    cell: tuple[int, int]


class GridWorld:
    """Immutable ground-truth grid: labels, hazards, goals."""

    def __init__(
        self,
        width: int,
        height: int,
        resolution: float,
        labels: np.ndarray,
        hazard: np.ndarray,
        goals: list[Goal],
    ):
        if labels.shape != (height, width) or hazard.shape != (height, width):
            raise ValueError("grid arrays must be shaped (height, width)")
        self.width = width
        self.height = height
        self.resolution = resolution
        self.labels = labels.astype(np.uint8, copy=True)
        self.hazard = hazard.astype(bool, copy=True)
        self.goals = list(goals)
        self.labels.setflags(write=False)
        self.hazard.setflags(write=False)
        self._validate()

    def _validate(self) -> None:
        if np.any(self.labels == TerrainLabel.UNKNOWN):
            raise SchemaError("ground truth may not contain UNKNOWN cells")
        hz_y, hz_x = np.nonzero(self.hazard)
        for x, y in zip(hz_x, hz_y):
            if TerrainLabel(self.labels[y, x]) not in HAZARD_LABELS:
                raise SchemaError(
                    f"hazard at ({x}, {y}) on label "
                    f"{TerrainLabel(self.labels[y, x]).name}; hazards are only "
                    f"legal on GRASS_SIDEWALK or VEGETATION"
                )
        seen_ids = set()
        for g in self.goals:
            if g.id in seen_ids:
                raise SchemaError(f"duplicate goal id {g.id}")
            seen_ids.add(g.id)
            x, y = g.cell
            if not self.in_bounds(g.cell):
                raise SchemaError(f"goal {g.id} cell ({x}, {y}) out of bounds")
            if not math.isfinite(base_cost(TerrainLabel(self.labels[y, x]))):
                raise SchemaError(
                    f"goal {g.id} sits on impassable label "
                    f"{TerrainLabel(self.labels[y, x]).name}"
                )
        if sorted(seen_ids) != list(range(len(self.goals))):
            raise SchemaError("goal ids must be dense from 0")

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def label_at(self, cell: tuple[int, int]) -> TerrainLabel:
        if not self.in_bounds(cell):
            raise OutOfBoundsError(f"cell {cell} outside {self.width}x{self.height} grid")
        return TerrainLabel(self.labels[cell[1], cell[0]])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridWorld):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.resolution == other.resolution
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.hazard, other.hazard)
            and self.goals == other.goals
        )

    def content_hash(self) -> str:
        """Stable 128-bit digest of the full ground truth."""
        import hashlib

        h = hashlib.blake2b(digest_size=16)
        h.update(f"{self.width},{self.height},{self.resolution!r}".encode())
        h.update(self.labels.tobytes())
        h.update(self.hazard.tobytes())
        for g in self.goals:
            h.update(f"{g.id},{g.cell[0]},{g.cell[1]}".encode())
        return h.hexdigest()


def traversal_outcome(world: GridWorld, cell: tuple[int, int]) -> TraversalOutcome:
    """Outcome of driving onto a cell: STUCK iff it hides a hazard."""
    if not world.in_bounds(cell):
        raise OutOfBoundsError(f"cell {cell} outside {world.width}x{world.height} grid")
    if world.hazard[cell[1], cell[0]]:
        return TraversalOutcome.STUCK
    return TraversalOutcome.OK


def cell_center(cell: tuple[int, int], resolution: float) -> tuple[float, float]:
    return ((cell[0] + 0.5) * resolution, (cell[1] + 0.5) * resolution)


def pos_to_cell(pos: tuple[float, float], world: GridWorld) -> tuple[int, int]:
    """Cell containing a continuous position; positions on the far edge clamp in."""
    x = min(int(pos[0] / world.resolution), world.width - 1)
    y = min(int(pos[1] / world.resolution), world.height - 1)
    return (max(x, 0), max(y, 0))


# ---------------------------------------------------------------------------
# Procedural generation
# ---------------------------------------------------------------------------

@dataclass
class GeneratorParams:
    """Knobs for the procedural world generator.

    Densities are rough area fractions; road_pitch is the mean spacing between
    road lines in meters. A rural preset is low building_density and high
    vegetation_density; an urban one is the reverse.
    """

    width: int = 100
    height: int = 100
    resolution: float = 1.0
    n_goals: int = 5
    hazard_density: float = 0.0
    road_pitch: float = 60.0
    road_width: int = 2
    building_density: float = 0.08
    vegetation_density: float = 0.15
    dirt_density: float = 0.05
    vehicle_density: float = 0.01
    connected: bool = True
    retries: int = 8
    start_clear: int = 4  # cells near the origin kept free of impassable labels
    # When set, goals are sampled within this many cells (Chebyshev) of a road,
    # like waypoints at visitable sites. None samples uniformly.
    goal_road_margin: int | None = None


def _flood_reachable(finite: np.ndarray, seed_cell: tuple[int, int]) -> np.ndarray:
    """8-connected component of finite cells containing seed_cell (bool mask)."""
    structure = np.ones((3, 3), dtype=bool)
    comp, _ = ndimage.label(finite, structure=structure)
    sx, sy = seed_cell
    cid = comp[sy, sx]
    if cid == 0:
        return np.zeros_like(finite)
    return comp == cid


def _place_blobs(rng: np.random.Generator, labels: np.ndarray, label: TerrainLabel,
                 density: float, lo: int, hi: int) -> None:
    h, w = labels.shape
    target = int(density * w * h)
    placed = 0
    attempts = 0
    while placed < target and attempts < 4 * target + 64:
        attempts += 1
        bw = int(rng.integers(lo, hi))
        bh = int(rng.integers(lo, hi))
        x0 = int(rng.integers(0, max(w - bw, 1)))
        y0 = int(rng.integers(0, max(h - bh, 1)))
        labels[y0:y0 + bh, x0:x0 + bw] = label
        placed += bw * bh


def generate_world(gen: GeneratorParams, seed: int) -> GridWorld:
    """Deterministically generate a world from (gen, seed).

    When gen.connected is set, every goal is reachable from the origin cell
    over finite-cost terrain; the generator retries with derived seeds and
    raises UnsatisfiableLayoutError when the budget runs out.
    """
    if gen.width <= 0 or gen.height <= 0:
        raise ValueError("world dimensions must be positive")
    if gen.n_goals < 0:
        raise ValueError("n_goals must be >= 0")

    for attempt in range(gen.retries + 1):
        rng = np.random.default_rng((int(seed), attempt))
        world = _generate_once(gen, rng)
        if world is not None:
            return world
    raise UnsatisfiableLayoutError(
        f"could not satisfy layout constraints in {gen.retries + 1} attempts"
    )


def _generate_once(gen: GeneratorParams, rng: np.random.Generator) -> GridWorld | None:
    w, h = gen.width, gen.height
    labels = np.full((h, w), TerrainLabel.GRASS_SIDEWALK, dtype=np.uint8)

    _place_blobs(rng, labels, TerrainLabel.VEGETATION, gen.vegetation_density, 3, 10)
    _place_blobs(rng, labels, TerrainLabel.DIRT_GRAVEL, gen.dirt_density, 3, 8)

    # Full-span road lines; the lattice is connected by construction.
    pitch_cells = max(int(gen.road_pitch / gen.resolution), 4)
    n_vert = max(1, round(w / pitch_cells))
    n_horz = max(1, round(h / pitch_cells))
    rw = max(1, gen.road_width)
    vxs = sorted(int(rng.integers(0, w - rw + 1)) for _ in range(n_vert))
    hys = sorted(int(rng.integers(0, h - rw + 1)) for _ in range(n_horz))
    for x0 in vxs:
        labels[:, x0:x0 + rw] = TerrainLabel.ROAD
    for y0 in hys:
        labels[y0:y0 + rw, :] = TerrainLabel.ROAD
    # Connector so the origin corner joins the lattice.
    labels[0:1, 0:vxs[0] + rw] = TerrainLabel.ROAD
    labels[0:hys[0] + rw, 0:1] = TerrainLabel.ROAD

    road = labels == TerrainLabel.ROAD

    # Buildings avoid roads (1-cell margin) and the origin patch.
    road_margin = ndimage.binary_dilation(road, np.ones((3, 3), dtype=bool))
    target = int(gen.building_density * w * h)
    placed = 0
    attempts = 0
    while placed < target and attempts < 4 * target + 64:
        attempts += 1
        bw = int(rng.integers(4, 15))
        bh = int(rng.integers(4, 15))
        x0 = int(rng.integers(0, max(w - bw, 1)))
        y0 = int(rng.integers(0, max(h - bh, 1)))
        if x0 < gen.start_clear and y0 < gen.start_clear:
            continue
        if road_margin[y0:y0 + bh, x0:x0 + bw].any():
            continue
        labels[y0:y0 + bh, x0:x0 + bw] = TerrainLabel.BUILDING
        placed += bw * bh

    # Vehicles park on grass next to roads, never on the road itself.
    curb = ndimage.binary_dilation(road, np.ones((3, 3), dtype=bool)) & ~road
    curb &= labels == TerrainLabel.GRASS_SIDEWALK
    curb[:gen.start_clear, :gen.start_clear] = False
    cy, cx = np.nonzero(curb)
    n_veh = min(int(gen.vehicle_density * w * h / 2), len(cx))
    if n_veh > 0:
        idx = rng.choice(len(cx), size=n_veh, replace=False)
        labels[cy[idx], cx[idx]] = TerrainLabel.VEHICLE

    # Hidden hazards on grass/vegetation only, fixed at generation time.
    eligible = np.isin(labels, [int(l) for l in HAZARD_LABELS])
    hazard = eligible & (rng.random((h, w)) < gen.hazard_density)

    costs = cost_array()
    finite = np.isfinite(costs[labels])
    if not finite[0, 0]:
        return None

    if gen.connected:
        candidates_mask = _flood_reachable(finite, (0, 0))
    else:
        candidates_mask = finite
    candidates_mask = candidates_mask & ~hazard
    if gen.goal_road_margin is not None:
        m = gen.goal_road_margin
        near_road = ndimage.binary_dilation(road, np.ones((2 * m + 1, 2 * m + 1), dtype=bool))
        candidates_mask = candidates_mask & near_road
    gy, gx = np.nonzero(candidates_mask)
    if len(gx) < gen.n_goals:
        return None
    if gen.n_goals > 0:
        pick = rng.choice(len(gx), size=gen.n_goals, replace=False)
        goals = [Goal(i, (int(gx[p]), int(gy[p]))) for i, p in enumerate(pick)]
    else:
        goals = []

    return GridWorld(w, h, gen.resolution, labels, hazard, goals)


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def world_to_json(world: GridWorld) -> str:
    rows = [
        "".join(LABEL_TO_CHAR[TerrainLabel(world.labels[y, x])] for x in range(world.width))
        for y in range(world.height)
    ]
    hz_y, hz_x = np.nonzero(world.hazard)
    doc = {
        "width": world.width,
        "height": world.height,
        "resolution": world.resolution,
        "rows": rows,
        "hazards": [[int(x), int(y)] for x, y in zip(hz_x, hz_y)],
        "goals": [[g.cell[0], g.cell[1]] for g in world.goals],
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def world_from_json(text: str | bytes) -> GridWorld:
    """Parse a world file; raises SchemaError naming the offending field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")

    for key in ("width", "height", "resolution", "rows", "hazards", "goals"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    width, height = doc["width"], doc["height"]
    if not isinstance(width, int) or not isinstance(height, int) or width <= 0 or height <= 0:
        raise SchemaError("width/height must be positive integers")
    resolution = doc["resolution"]
    if not isinstance(resolution, (int, float)) or resolution <= 0:
        raise SchemaError("resolution must be a positive number")
    rows = doc["rows"]
    if not isinstance(rows, list) or len(rows) != height:
        raise SchemaError(f"rows: expected {height} rows, got {len(rows) if isinstance(rows, list) else type(rows).__name__}")

    labels = np.empty((height, width), dtype=np.uint8)
    for y, row in enumerate(rows):
        if not isinstance(row, str) or len(row) != width:
            raise SchemaError(f"rows[{y}]: expected string of length {width}")
        for x, ch in enumerate(row):
            try:
                labels[y, x] = CHAR_TO_LABEL[ch]
            except KeyError:
                raise SchemaError(
                    f"rows[{y}][{x}]: unknown label {ch!r} "
                    f"(expected one of {''.join(sorted(CHAR_TO_LABEL))})"
                ) from None

    hazard = np.zeros((height, width), dtype=bool)
    for i, entry in enumerate(doc["hazards"]):
        if (not isinstance(entry, list)) or len(entry) != 2:
            raise SchemaError(f"hazards[{i}]: expected [x, y]")
        x, y = entry
        if not (isinstance(x, int) and isinstance(y, int)) or not (0 <= x < width and 0 <= y < height):
            raise SchemaError(f"hazards[{i}]: cell [{x}, {y}] out of bounds")
        if TerrainLabel(labels[y, x]) not in HAZARD_LABELS:
            raise SchemaError(
                f"hazards[{i}]: cell [{x}, {y}] has label "
                f"{TerrainLabel(labels[y, x]).name}; hazards are only legal on "
                f"GRASS_SIDEWALK or VEGETATION"
            )
        hazard[y, x] = True

    goals = []
    for i, entry in enumerate(doc["goals"]):
        if (not isinstance(entry, list)) or len(entry) != 2:
            raise SchemaError(f"goals[{i}]: expected [x, y]")
        x, y = entry
        if not (isinstance(x, int) and isinstance(y, int)) or not (0 <= x < width and 0 <= y < height):
            raise SchemaError(f"goals[{i}]: cell [{x}, {y}] out of bounds")
        if not math.isfinite(base_cost(TerrainLabel(labels[y, x]))):
            raise SchemaError(
                f"goals[{i}]: cell [{x}, {y}] sits on impassable label "
                f"{TerrainLabel(labels[y, x]).name}"
            )
        goals.append(Goal(i, (x, y)))

    try:
        return GridWorld(width, height, float(resolution), labels, hazard, goals)
    except SchemaError:
        raise


def save_world(world: GridWorld, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(world_to_json(world))


def load_world(path: str) -> GridWorld:
    with open(path, "r", encoding="utf-8") as f:
        return world_from_json(f.read())
