"""Seeded physical-layer attack schedules and their in-flight effects.

Three attack kinds exist: TAP (covert eavesdropping, protocol-invisible),
CORRUPT (in-line person-in-the-middle rewriting payload and, by default, the
carried digest to match), and SEVER (link goes dark for a window; copies
crossing it are dropped). Schedules are Bernoulli draws per tick, edge, and
kind, reproducible for a fixed seed.
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from . import protocol
from .topology import Edge, Path, Topology, edge_criticality, path_edges


class AttackKind(Enum):
    TAP = "TAP"
    CORRUPT = "CORRUPT"
    SEVER = "SEVER"


@dataclass(frozen=True)
class AttackEvent:
    kind: AttackKind
    edge: Edge
    start_tick: int
    duration_ticks: int

    def __post_init__(self):
        if self.start_tick < 0:
            raise ValueError("start_tick must be non-negative")
        if self.duration_ticks < 1:
            raise ValueError("duration_ticks must be >= 1")

    def active_at(self, tick: int) -> bool:
        return self.start_tick <= tick < self.start_tick + self.duration_ticks

    def render(self) -> str:
        return f"{self.kind.value} {self.edge} {self.start_tick} {self.duration_ticks}"

    @classmethod
    def parse(cls, line: str) -> "AttackEvent":
        kind, edge_s, start, dur = line.split()
        return cls(AttackKind(kind), Edge.parse(edge_s), int(start), int(dur))


@dataclass
class AttackSchedule:
    events: list[AttackEvent]
    seed: int

    def serialize(self) -> str:
        return "".join(ev.render() + "\n" for ev in self.events)

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "AttackSchedule":
        events = [AttackEvent.parse(ln) for ln in text.splitlines() if ln.strip()]
        return cls(events, seed)


_KIND_ORDER = (AttackKind.TAP, AttackKind.CORRUPT, AttackKind.SEVER)


def schedule_attacks(t: Topology, ticks: int, rates: Mapping[AttackKind, float],
                     seed: int, duration_range: tuple[int, int] = (1, 5),
                     criticality_weighted: bool = False) -> AttackSchedule:
    """Draw an attack schedule: one Bernoulli trial per tick, edge, and kind.

    In weighted mode each edge's rate is scaled by its criticality relative
    to the mean (zero-criticality edges are never picked), modelling an
    attacker who concentrates on backbone cut links.
    """
    if ticks < 1:
        raise ValueError("ticks must be >= 1")
    for kind, rate in rates.items():
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"rate for {kind} must be in [0,1], got {rate}")
    lo, hi = duration_range
    if lo < 1 or hi < lo:
        raise ValueError(f"bad duration range {duration_range}")

    edges = sorted(t.edges, key=str)
    weight = {e: 1.0 for e in edges}
    if criticality_weighted:
        crits = {e: float(edge_criticality(t, e)) for e in edges}
        mean = sum(crits.values()) / len(edges) if edges else 0.0
        if mean > 0:
            weight = {e: crits[e] / mean for e in edges}

    rng = random.Random(seed)
    events: list[AttackEvent] = []
    for e in edges:
        for kind in _KIND_ORDER:
            rate = min(rates.get(kind, 0.0) * weight[e], 1.0)
            if rate <= 0.0:
                continue
            if rate >= 1.0:
                for tick in range(ticks):
                    events.append(AttackEvent(kind, e, tick, rng.randint(lo, hi)))
                continue
            # geometric gaps between hits instead of one draw per tick
            log_q = math.log1p(-rate)
            tick = -1
            while True:
                tick += 1 + int(math.log(1.0 - rng.random()) / log_q)
                if tick >= ticks:
                    break
                events.append(AttackEvent(kind, e, tick, rng.randint(lo, hi)))
    events.sort(key=lambda ev: (ev.start_tick, str(ev.edge), ev.kind.value))
    return AttackSchedule(events, seed)


def corrupt_payload(event: AttackEvent, key: protocol.IdempotencyKey,
                    length: int) -> bytes:
    """Attacker-chosen replacement bytes; deterministic per (event, key) and
    distinct across edges so two independently corrupted copies never agree."""
    seed = (f"corrupt:{event.edge}:{event.start_tick}:"
            f"{key.message_id}:{key.attempt}").encode()
    out = b""
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(seed + counter.to_bytes(4, "big")).digest()
        counter += 1
    return out[:length]


def apply_attack(event: AttackEvent, copy: protocol.Packet,
                 consistent: bool = True):
    """Effect of one active event on one in-flight copy.

    Returns (payload, digest, tapped, dropped). TAP leaves content untouched;
    CORRUPT rewrites the payload (and the carried digest too when the
    attacker is a full in-line person-in-the-middle); SEVER drops the copy.
    """
    if event.kind is AttackKind.TAP:
        return copy.payload, copy.digest, 1, False
    if event.kind is AttackKind.SEVER:
        return copy.payload, copy.digest, 0, True
    new_payload = corrupt_payload(event, copy.key, len(copy.payload))
    new_digest = protocol.payload_digest(new_payload) if consistent else copy.digest
    return new_payload, new_digest, 0, False


class AttackApplier:
    """Indexes a schedule and acts as the per-copy fault hook for transmit()."""

    def __init__(self, schedule: AttackSchedule, consistent_corruption: bool = True):
        self.schedule = schedule
        self.consistent = consistent_corruption
        self._by_edge: dict[Edge, list[AttackEvent]] = {}
        for ev in schedule.events:
            self._by_edge.setdefault(ev.edge, []).append(ev)
        self._severed_cache: dict[int, frozenset[Edge]] = {}

    def events_on(self, e: Edge, tick: int) -> list[AttackEvent]:
        return [ev for ev in self._by_edge.get(e, ()) if ev.active_at(tick)]

    def severed_edges_at(self, tick: int) -> frozenset[Edge]:
        cached = self._severed_cache.get(tick)
        if cached is None:
            cached = frozenset(
                ev.edge for evs in self._by_edge.values() for ev in evs
                if ev.kind is AttackKind.SEVER and ev.active_at(tick))
            self._severed_cache[tick] = cached
        return cached

    def fault_hook(self, copy: protocol.Packet, path: Path,
                   tick: int) -> protocol.CopyFate:
        payload, digest = copy.payload, copy.digest
        corrupted = False
        taps = 0
        working = copy
        for e in path_edges(path):
            active = self.events_on(e, tick)
            if any(ev.kind is AttackKind.SEVER for ev in active):
                return protocol.CopyFate(False, payload, digest, corrupted,
                                         dropped_at=e, taps=taps)
            for ev in active:
                if ev.kind is AttackKind.TAP:
                    taps += 1
                elif ev.kind is AttackKind.CORRUPT:
                    payload, digest, _, _ = apply_attack(
                        ev, _with_content(working, payload, digest),
                        self.consistent)
                    corrupted = True
        return protocol.CopyFate(True, payload, digest, corrupted, taps=taps)


def _with_content(copy: protocol.Packet, payload: bytes,
                  digest: bytes) -> protocol.Packet:
    if payload == copy.payload and digest == copy.digest:
        return copy
    return protocol.Packet(copy.key, copy.src, copy.dst, copy.critical,
                           payload, digest, copy.copy)
