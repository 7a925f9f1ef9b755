"""Packet construction, integrity digests, budgeted duplication, and the
dual-path send/verify/retransmit state machine.

A message is sent as one copy (baseline) or as two copies over edge-disjoint
routes (protected). Copies of one attempt share an idempotency key; a
retransmission increments the attempt counter. The receiver re-digests every
arriving copy and cross-compares dual arrivals, so a person-in-the-middle who
rewrites payload and digest consistently is only caught when a second,
independently routed copy contradicts the content.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .topology import (
    Edge,
    NodeId,
    Path,
    Topology,
    disjoint_path,
    path_edges,
    shortest_path,
)

DIGEST_SIZE = 32


class ProtocolError(Exception):
    pass


def payload_digest(payload: bytes) -> bytes:
    """SHA-256 of the payload bytes."""
    return hashlib.sha256(payload).digest()


class CopyKind(Enum):
    PRIMARY = "PRIMARY"
    PARALLEL = "PARALLEL"


class Classification(Enum):
    DELIVERED_CLEAN = "DELIVERED_CLEAN"
    DELIVERED_CORRUPT_DETECTED = "DELIVERED_CORRUPT_DETECTED"
    DELIVERED_CORRUPT_UNDETECTED = "DELIVERED_CORRUPT_UNDETECTED"
    LOST = "LOST"


@dataclass(frozen=True)
class IdempotencyKey:
    message_id: int
    attempt: int = 0

    def __post_init__(self):
        if self.message_id < 0 or self.attempt < 0:
            raise ValueError("message_id and attempt must be non-negative")

    def retry(self) -> "IdempotencyKey":
        return IdempotencyKey(self.message_id, self.attempt + 1)


@dataclass(frozen=True)
class Packet:
    key: IdempotencyKey
    src: NodeId
    dst: NodeId
    critical: bool
    payload: bytes
    digest: bytes
    copy: CopyKind = CopyKind.PRIMARY

    def __post_init__(self):
        if self.src == self.dst:
            raise ProtocolError("packet source and destination must differ")


class MessageIdSource:
    """Monotonic message-id counter; unique ids within one trial."""

    def __init__(self, start: int = 0):
        self._it = itertools.count(start)

    def next_id(self) -> int:
        return next(self._it)


def make_message(src: NodeId, dst: NodeId, payload: bytes, critical: bool,
                 id_source: MessageIdSource) -> Packet:
    key = IdempotencyKey(id_source.next_id(), 0)
    return Packet(key, src, dst, critical, payload, payload_digest(payload),
                  CopyKind.PRIMARY)


def duplicate_for_parallel(p: Packet) -> Packet:
    """Parallel twin of a PRIMARY copy: same key, same content."""
    if p.copy is not CopyKind.PRIMARY:
        raise ProtocolError("only a PRIMARY copy can be duplicated")
    return Packet(p.key, p.src, p.dst, p.critical, p.payload, p.digest,
                  CopyKind.PARALLEL)


@dataclass
class RiskModel:
    """Per-edge exposure weights; unknown edges fall back to the default."""

    edge_risk: dict[Edge, float] = field(default_factory=dict)
    default_risk: float = 1.0

    def risk_of(self, e: Edge) -> float:
        r = self.edge_risk.get(e, self.default_risk)
        if r < 0:
            raise ValueError(f"negative risk weight on {e}")
        return r


def packet_risk(p: Packet, primary_path: Path, rm: RiskModel) -> float:
    """Exposure score of a message: summed edge risk along its primary route."""
    return sum(rm.risk_of(e) for e in path_edges(primary_path))


def select_protected_subset(candidates: list[tuple[Packet, Path]],
                            budget: int, rm: RiskModel) -> set[IdempotencyKey]:
    """Greedy budgeted pick of the highest-risk non-critical messages.

    Ties broken toward the smaller message id. Budget beyond the candidate
    count is clamped. O(C log C).
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    for pkt, _ in candidates:
        if pkt.critical:
            raise ProtocolError(
                f"critical packet {pkt.key.message_id} cannot be budgeted")
    ranked = sorted(candidates,
                    key=lambda cp: (-packet_risk(cp[0], cp[1], rm),
                                    cp[0].key.message_id))
    return {pkt.key for pkt, _ in ranked[:budget]}


@dataclass
class CopyFate:
    """What the channel did to one in-flight copy."""

    delivered: bool
    payload: bytes
    digest: bytes
    corrupted: bool = False
    dropped_at: Optional[Edge] = None
    taps: int = 0


# fault_hook(copy, path, tick) -> CopyFate; None means a clean channel.
FaultHook = Callable[[Packet, Path, int], CopyFate]


def _clean_fate(copy: Packet) -> CopyFate:
    return CopyFate(True, copy.payload, copy.digest)


@dataclass
class TransmissionOutcome:
    key: IdempotencyKey
    classification: Classification
    delivered_copies: int
    corrupted_copies: int
    paths_used: list[Path]
    retransmissions: int
    dropped_copies: int = 0
    tapped_copies: int = 0
    degraded: bool = False
    corruption_observed: bool = False
    dual_copy: bool = False
    corrupted_in_flight: bool = False
    primary_corrupted: bool = False  # a PRIMARY-kind copy was hit by CORRUPT


def plan_routes(t: Topology, src: NodeId,
                dst: NodeId) -> tuple[Optional[Path], Optional[Path]]:
    """Primary route plus its best edge-disjoint alternate, either may be absent."""
    primary = shortest_path(t, src, dst)
    parallel = None
    if primary is not None:
        parallel = disjoint_path(t, src, dst, path_edges(primary))
    return primary, parallel


def transmit(t: Topology, p: Packet, protected: bool, max_retries: int,
             fault_hook: Optional[FaultHook] = None,
             start_tick: int = 0,
             routes: Optional[tuple[Optional[Path], Optional[Path]]] = None,
             ) -> TransmissionOutcome:
    """Send a message and drive acknowledgment/verification to a final state.

    Routing uses the topology as the sender knows it: physical-layer attacks
    are covert, so severed links are discovered only by losing copies on them.
    The zero-latency assumption makes the whole exchange instantaneous:
    acknowledgment, verification, and every retransmission (with an
    incremented attempt counter) happen within the send tick. `routes` may
    carry a precomputed (primary, parallel) pair to avoid repeated path
    searches.
    """
    if p.copy is not CopyKind.PRIMARY:
        raise ProtocolError("transmit takes the PRIMARY copy")
    t.require_node(p.src)
    t.require_node(p.dst)

    primary, parallel = routes if routes is not None else plan_routes(t, p.src,
                                                                      p.dst)
    degraded = False
    if protected:
        degraded = parallel is None
    else:
        parallel = None

    paths_used: list[Path] = [pp for pp in (primary, parallel) if pp is not None]
    if primary is not None and parallel is not None:
        shared = set(path_edges(primary)) & set(path_edges(parallel))
        if shared:
            raise ProtocolError(f"parallel route reuses edges {shared}")

    hook = fault_hook
    retransmissions = 0
    dropped = 0
    tapped = 0
    corruption_observed = False
    corrupted_in_flight = False
    primary_corrupted = False
    any_arrival = False
    # verified payloads seen so far: forged content varies between copies and
    # attempts while the true payload repeats, so two matching verified
    # arrivals confirm the content
    payload_count: dict[bytes, int] = {}
    payload_was_corrupt: dict[bytes, bool] = {}
    key = p.key
    attempt = 0
    tick = start_tick
    while True:
        copies: list[tuple[Packet, Path]] = []
        if primary is not None:
            head = Packet(key, p.src, p.dst, p.critical, p.payload, p.digest,
                          CopyKind.PRIMARY)
            copies.append((head, primary))
            if parallel is not None:
                copies.append((duplicate_for_parallel(head), parallel))

        fates: list[CopyFate] = []
        for copy, path in copies:
            fate = hook(copy, path, tick) if hook is not None else _clean_fate(copy)
            tapped += fate.taps
            if fate.corrupted:
                corrupted_in_flight = True
                if copy.copy is CopyKind.PRIMARY:
                    primary_corrupted = True
            if fate.delivered:
                fates.append(fate)
            else:
                dropped += 1
        if primary is None:
            dropped += 1  # unroutable send counts as one dropped copy

        arrived = fates
        any_arrival = any_arrival or bool(arrived)
        verified = [f for f in arrived if payload_digest(f.payload) == f.digest]
        self_mismatch = len(verified) < len(arrived)
        # two self-consistent copies disagreeing: the receiver knows one is
        # forged but cannot tell which without further evidence
        ambiguous = (len(verified) == 2
                     and verified[0].payload != verified[1].payload)
        if self_mismatch or ambiguous:
            corruption_observed = True
        for f in verified:
            payload_count[f.payload] = payload_count.get(f.payload, 0) + 1
            payload_was_corrupt[f.payload] = (
                payload_was_corrupt.get(f.payload, False) or f.corrupted)

        confirmed = sorted((pl for pl, c in payload_count.items() if c >= 2),
                           key=lambda pl: (-payload_count[pl], pl))
        accepted: Optional[bytes] = None
        if confirmed:
            accepted = confirmed[0]
        elif verified and not corruption_observed:
            # a lone self-consistent copy with no contrary evidence is taken
            # at face value; this is exactly where a consistent rewrite of
            # payload and digest slips through
            accepted = verified[0].payload

        if accepted is not None:
            content_corrupted = payload_was_corrupt[accepted]
            if content_corrupted and not corruption_observed:
                cls = Classification.DELIVERED_CORRUPT_UNDETECTED
            elif content_corrupted or corruption_observed:
                cls = Classification.DELIVERED_CORRUPT_DETECTED
            else:
                cls = Classification.DELIVERED_CLEAN
            return TransmissionOutcome(
                key, cls, len(arrived),
                sum(1 for f in arrived if f.corrupted), paths_used,
                retransmissions, dropped, tapped, degraded,
                corruption_observed, parallel is not None, corrupted_in_flight,
                primary_corrupted)

        if attempt >= max_retries:
            if any_arrival:
                # something was delivered but its integrity was never settled
                return TransmissionOutcome(
                    key, Classification.DELIVERED_CORRUPT_DETECTED,
                    len(arrived), sum(1 for f in arrived if f.corrupted),
                    paths_used, retransmissions, dropped, tapped, degraded,
                    True, parallel is not None, corrupted_in_flight,
                    primary_corrupted)
            return TransmissionOutcome(
                key, Classification.LOST, 0, 0, paths_used,
                retransmissions, dropped, tapped, degraded,
                corruption_observed, parallel is not None, corrupted_in_flight,
                primary_corrupted)

        attempt += 1
        retransmissions += 1
        key = key.retry()
