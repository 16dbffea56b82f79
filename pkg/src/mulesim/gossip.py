"""Anti-entropy gossip: content-addressed message store and pairwise sync sessions.

Every node keeps an append-only store keyed by (origin, topic, seq). When two
nodes meet they exchange header summaries, queue exactly the messages the
other side lacks, and move payloads under per-tick byte budgets. Messages a
node merely carries are forwarded like its own, so any node acts as a data
mule between nodes that never share a link.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import UnknownTopicError
from .world import Goal

# Fixed wire size of one message header in a summary exchange.
HEADER_SIZE = 32

# Default topic table: name -> priority (higher moves first).
DEFAULT_TOPICS: dict[str, int] = {
    "map_patch": 2,
    "experience": 3,
    "goal_claim": 3,
    "goal_visited": 3,
    "robot_status": 1,
}


# ---------------------------------------------------------------------------
# Payloads
# ---------------------------------------------------------------------------

class MapPatch:
    """A batch of sensed cells (true labels) plus any goals on those cells.

    cells: int32 array (n, 2) of (x, y); labels: uint8 array (n,).
    """

    def __init__(self, cells: np.ndarray, labels: np.ndarray, goals: tuple[Goal, ...] = ()):
        self.cells = np.ascontiguousarray(cells, dtype=np.int32)
        self.labels = np.ascontiguousarray(labels, dtype=np.uint8)
        if self.cells.ndim != 2 or self.cells.shape[1] != 2 or len(self.labels) != len(self.cells):
            raise ValueError("cells must be (n, 2) with matching labels")
        self.goals = tuple(goals)
        self.cells.setflags(write=False)
        self.labels.setflags(write=False)

    def encoded_size(self) -> int:
        return 8 + 5 * len(self.cells) + 6 * len(self.goals)

    def canonical_bytes(self) -> bytes:
        parts = [b"MP", self.cells.tobytes(), self.labels.tobytes()]
        for g in self.goals:
            parts.append(struct.pack("<iii", g.id, g.cell[0], g.cell[1]))
        return b"".join(parts)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, MapPatch)
            and np.array_equal(self.cells, other.cells)
            and np.array_equal(self.labels, other.labels)
            and self.goals == other.goals
        )


@dataclass(frozen=True)
class Lethal:
    """Traversal verdict: the cell destroyed/trapped the robot."""


@dataclass(frozen=True)
class MeasuredCost:
    multiplier: float  # >= 1, possibly inf


@dataclass(frozen=True)
class Experience:
    """First-hand traversal result for one cell."""

    cell: tuple[int, int]
    verdict: Lethal | MeasuredCost

    def encoded_size(self) -> int:
        return 16

    def canonical_bytes(self) -> bytes:
        if isinstance(self.verdict, Lethal):
            return struct.pack("<2sii", b"XL", self.cell[0], self.cell[1])
        return struct.pack("<2siid", b"XM", self.cell[0], self.cell[1], self.verdict.multiplier)


@dataclass(frozen=True)
class GoalClaim:
    goal_id: int
    claimant: int
    claim_time: float

    def encoded_size(self) -> int:
        return 12

    def canonical_bytes(self) -> bytes:
        return struct.pack("<2siid", b"GC", self.goal_id, self.claimant, self.claim_time)


@dataclass(frozen=True)
class GoalVisited:
    goal_id: int
    visitor: int
    visit_time: float

    def encoded_size(self) -> int:
        return 12

    def canonical_bytes(self) -> bytes:
        return struct.pack("<2siid", b"GV", self.goal_id, self.visitor, self.visit_time)


@dataclass(frozen=True)
class RobotStatus:
    position: tuple[float, float]
    time: float

    def encoded_size(self) -> int:
        return 24

    def canonical_bytes(self) -> bytes:
        return struct.pack("<2sddd", b"RS", self.position[0], self.position[1], self.time)


Payload = MapPatch | Experience | GoalClaim | GoalVisited | RobotStatus


def payload_hash(payload: Payload) -> int:
    digest = hashlib.blake2b(payload.canonical_bytes(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


# ---------------------------------------------------------------------------
# Headers, messages, store
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MsgHeader:
    origin: int
    topic: str
    seq: int
    priority: int
    created_at: float
    payload_size: int
    payload_hash: int

    @property
    def key(self) -> tuple[int, str, int]:
        return (self.origin, self.topic, self.seq)


@dataclass(frozen=True)
class Message:
    header: MsgHeader
    payload: Payload


class NodeDb:
    """Per-node message store plus per-peer sync bookkeeping."""

    def __init__(self, node_id: int, topics: dict[str, int] | None = None):
        self.node_id = node_id
        self.topics = dict(DEFAULT_TOPICS if topics is None else topics)
        self.store: dict[tuple[int, str, int], Message] = {}
        self.next_seq: dict[str, int] = {}
        self.last_sync: dict[int, float] = {}
        self.link_quality: dict[int, float] = {}

    def summary(self) -> list[MsgHeader]:
        """Headers of every stored message, in insertion order."""
        return [m.header for m in self.store.values()]

    def __len__(self) -> int:
        return len(self.store)


def insert_local(db: NodeDb, topic: str, priority: int, payload: Payload, now: float) -> Message:
    """Originate a message at this node; seq increments per (node, topic)."""
    if topic not in db.topics:
        raise UnknownTopicError(f"topic {topic!r} not in topic table")
    seq = db.next_seq.get(topic, 0)
    db.next_seq[topic] = seq + 1
    header = MsgHeader(
        origin=db.node_id,
        topic=topic,
        seq=seq,
        priority=priority,
        created_at=now,
        payload_size=payload.encoded_size(),
        payload_hash=payload_hash(payload),
    )
    msg = Message(header, payload)
    db.store[header.key] = msg
    return msg


def insert_received(db: NodeDb, msg: Message) -> bool:
    """Store a message received from a peer, verbatim. Returns False if present."""
    if msg.header.key in db.store:
        return False
    db.store[msg.header.key] = msg
    return True


def diff(remote_summary: list[MsgHeader], local: NodeDb) -> list[MsgHeader]:
    """Headers from the remote summary that the local store lacks (input order)."""
    return [h for h in remote_summary if h.key not in local.store]


def transfer_order(missing: list[MsgHeader]) -> list[MsgHeader]:
    """Total order for pending transfers.

    Priority first (descending), then newest first, then (origin, topic, seq)
    ascending so the order is unambiguous for identical timestamps.
    """
    return sorted(
        missing,
        key=lambda h: (-h.priority, -h.created_at, h.origin, h.topic, h.seq),
    )


def staleness(db: NodeDb, peer: int, now: float) -> float:
    """Seconds since the last completed sync with peer; inf if never synced."""
    last = db.last_sync.get(peer)
    if last is None:
        return math.inf
    return now - last


# ---------------------------------------------------------------------------
# Sync sessions
# ---------------------------------------------------------------------------

class SyncPhase(Enum):
    HEADER_EXCHANGE = "header_exchange"
    TRANSFER = "transfer"
    DONE = "done"


@dataclass
class TransferReport:
    delivered: list[tuple[MsgHeader, int]] = field(default_factory=list)
    bytes_used: int = 0


class SyncSession:
    """State of one pairwise exchange; nodes are stored with a < b."""

    def __init__(self, a: int, b: int, queue_ab: list[Message], queue_ba: list[Message],
                 header_bytes: int, started_at: float):
        self.a = a
        self.b = b
        self.queue_ab = queue_ab
        self.queue_ba = queue_ba
        self.header_bytes_remaining = header_bytes
        self.phase = SyncPhase.HEADER_EXCHANGE if header_bytes > 0 else SyncPhase.TRANSFER
        self.started_at = started_at
        self.turn_ab = True  # next preferred direction
        self.offered_bytes = header_bytes + sum(m.header.payload_size for m in queue_ab + queue_ba)
        self.achieved_bytes = 0

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b)


def open_session(db_a: NodeDb, db_b: NodeDb, now: float) -> SyncSession:
    """Start a session: exchange summaries, queue what each side lacks."""
    if db_a.node_id == db_b.node_id:
        raise ValueError("a node cannot sync with itself")
    if db_a.node_id > db_b.node_id:
        db_a, db_b = db_b, db_a
    queue_ab = [db_a.store[h.key] for h in transfer_order(diff(db_a.summary(), db_b))]
    queue_ba = [db_b.store[h.key] for h in transfer_order(diff(db_b.summary(), db_a))]
    header_bytes = (len(db_a.store) + len(db_b.store)) * HEADER_SIZE
    return SyncSession(db_a.node_id, db_b.node_id, queue_ab, queue_ba, header_bytes, now)


def sync_step(session: SyncSession, db_a: NodeDb, db_b: NodeDb, budget: int, now: float) -> TransferReport:
    """Advance a session by at most `budget` bytes.

    Header-summary bytes are consumed before any payload moves. Payloads then
    transfer in queue order, alternating direction per message (a->b first),
    each one atomically: a payload moves only if its full size fits what is
    left of the budget. When both queues drain the session completes and both
    nodes record last_sync[peer] = now.
    """
    if session.phase is SyncPhase.DONE:
        raise ValueError("session already complete")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if db_a.node_id > db_b.node_id:
        db_a, db_b = db_b, db_a
    assert (db_a.node_id, db_b.node_id) == session.pair

    report = TransferReport()
    remaining = budget

    if session.header_bytes_remaining > 0:
        take = min(session.header_bytes_remaining, remaining)
        session.header_bytes_remaining -= take
        remaining -= take
        report.bytes_used += take
        if session.header_bytes_remaining == 0:
            session.phase = SyncPhase.TRANSFER

    if session.phase is SyncPhase.TRANSFER:
        while True:
            if session.turn_ab and session.queue_ab:
                queue, receiver, from_ab = session.queue_ab, db_b, True
            elif not session.turn_ab and session.queue_ba:
                queue, receiver, from_ab = session.queue_ba, db_a, False
            elif session.queue_ab:
                queue, receiver, from_ab = session.queue_ab, db_b, True
            elif session.queue_ba:
                queue, receiver, from_ab = session.queue_ba, db_a, False
            else:
                break
            msg = queue[0]
            if msg.header.payload_size > remaining:
                break
            queue.pop(0)
            remaining -= msg.header.payload_size
            report.bytes_used += msg.header.payload_size
            insert_received(receiver, msg)
            report.delivered.append((msg.header, receiver.node_id))
            session.turn_ab = not from_ab

        if not session.queue_ab and not session.queue_ba:
            session.phase = SyncPhase.DONE
            db_a.last_sync[db_b.node_id] = now
            db_b.last_sync[db_a.node_id] = now

    session.achieved_bytes += report.bytes_used
    if session.phase is SyncPhase.DONE:
        _record_quality(session, db_a, db_b)
    return report


def abort_session(session: SyncSession, db_a: NodeDb, db_b: NodeDb) -> None:
    """End a session on link loss: pending queue entries are discarded.

    last_sync is NOT updated (an interrupted exchange is not a sync); the
    achieved/offered ratio is recorded as link quality on both sides.
    """
    if session.phase is SyncPhase.DONE:
        return
    session.queue_ab.clear()
    session.queue_ba.clear()
    session.phase = SyncPhase.DONE
    if db_a.node_id > db_b.node_id:
        db_a, db_b = db_b, db_a
    _record_quality(session, db_a, db_b)


def _record_quality(session: SyncSession, db_a: NodeDb, db_b: NodeDb) -> None:
    quality = 1.0 if session.offered_bytes == 0 else session.achieved_bytes / session.offered_bytes
    db_a.link_quality[db_b.node_id] = quality
    db_b.link_quality[db_a.node_id] = quality
