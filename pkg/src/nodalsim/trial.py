"""Single-trial executor: seeded traffic, attack application, metric rollup.

A trial is a pure function of (config, mode, trial index). The attack
schedule and the generated traffic derive from (seed, trial index) only, so
BASELINE and PROTOCOL runs of the same trial index face identical conditions
(paired design); the mode changes nothing but the protection decisions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .adversary import AttackApplier, schedule_attacks
from .config import MODES, PROTOCOL, SimConfig, derive_stream
from .metrics import TrialMetrics, quantize
from .protocol import (
    Classification,
    MessageIdSource,
    RiskModel,
    make_message,
    plan_routes,
    select_protected_subset,
    transmit,
)
from .topology import Topology, connectivity, sever_edge

PAYLOAD_LENGTH = 64

# Pristine-topology route plans and per-trial schedules are identical across
# modes and trials, so both are memoized on a config-derived key.
_route_cache: dict[tuple, dict] = {}
_schedule_cache: dict[tuple, object] = {}
_CACHE_LIMIT = 8


def _topology_key(cfg: SimConfig) -> tuple:
    g = cfg.generated
    return (cfg.topology, g.n, g.u, g.l, g.o, g.redundancy_factor, cfg.seed)


def _bounded(cache: dict):
    if len(cache) > _CACHE_LIMIT:
        cache.clear()


def _routes_for(cfg: SimConfig, topo: Topology, src, dst):
    per = _route_cache.setdefault(_topology_key(cfg), {})
    _bounded(_route_cache)
    key = (src, dst)
    if key not in per:
        per[key] = plan_routes(topo, src, dst)
    return per[key]


def _schedule_for(cfg: SimConfig, topo: Topology, trial_index: int):
    key = (_topology_key(cfg), cfg.ticks, cfg.rate_tap, cfg.rate_corrupt,
           cfg.rate_sever, cfg.duration_range,
           cfg.criticality_weighted_attacks, cfg.seed, trial_index)
    schedule = _schedule_cache.get(key)
    if schedule is None:
        schedule = schedule_attacks(
            topo, cfg.ticks, cfg.rates,
            seed=derive_stream(cfg.seed, trial_index, "attacks").getrandbits(63),
            duration_range=cfg.duration_range,
            criticality_weighted=cfg.criticality_weighted_attacks)
        _bounded(_schedule_cache)
        _schedule_cache[key] = schedule
    return schedule


@dataclass
class TrialDiagnostics:
    """Book-keeping beyond the CSV row, used for calibration and invariants."""

    schedule_digest: str = ""
    dual_transmissions: int = 0
    corrupted_messages: int = 0
    corrupted_dual: int = 0
    disjoint_violations: int = 0
    outcomes: list = field(default_factory=list)

    @property
    def dual_coverage(self) -> float | None:
        if self.corrupted_messages == 0:
            return None
        return self.corrupted_dual / self.corrupted_messages


def _mean_connectivity(topo: Topology, applier: AttackApplier,
                       ticks: int) -> float:
    cache: dict[frozenset, float] = {}
    total = 0.0
    for tick in range(ticks):
        severed = applier.severed_edges_at(tick) & topo.edges
        value = cache.get(severed)
        if value is None:
            snapshot = topo
            for e in severed:
                snapshot = sever_edge(snapshot, e)
            value = connectivity(snapshot)
            cache[severed] = value
        total += value
    return total / ticks


def run_trial_with_diagnostics(cfg: SimConfig, mode: str,
                               trial_index: int) -> tuple[TrialMetrics,
                                                          TrialDiagnostics]:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    cfg.validate()
    topo = cfg.build_topology()
    schedule = _schedule_for(cfg, topo, trial_index)
    applier = AttackApplier(schedule, cfg.consistent_corruption)
    diag = TrialDiagnostics(schedule_digest=schedule.digest())

    rng = derive_stream(cfg.seed, trial_index, "messages")
    endpoints = topo.level_nodes("O")
    if len(endpoints) < 2:
        raise ValueError("topology needs at least two O-level nodes")
    ids = MessageIdSource()
    messages = []
    for _ in range(cfg.messages_per_trial):
        src, dst = rng.sample(endpoints, 2)
        payload = rng.randbytes(PAYLOAD_LENGTH)
        send_tick = rng.randrange(cfg.ticks)
        messages.append((src, dst, payload, send_tick))
    critical_count = round(cfg.critical_fraction * cfg.messages_per_trial)
    critical_idx = set(rng.sample(range(cfg.messages_per_trial),
                                  critical_count))

    packets = [make_message(src, dst, payload, i in critical_idx, ids)
               for i, (src, dst, payload, _) in enumerate(messages)]

    protected_keys = set()
    if mode == PROTOCOL:
        rm = RiskModel()
        candidates = []
        for pkt in packets:
            if pkt.critical:
                continue
            primary, _ = _routes_for(cfg, topo, pkt.src, pkt.dst)
            if primary is not None:
                candidates.append((pkt, primary))
        protected_keys = select_protected_subset(candidates,
                                                 cfg.duplication_budget, rm)

    counts = {c: 0 for c in Classification}
    dropped = retrans = tapped = degradations = 0
    for pkt, (_, _, _, send_tick) in zip(packets, messages):
        protected = mode == PROTOCOL and (pkt.critical
                                          or pkt.key in protected_keys)
        outcome = transmit(topo, pkt, protected, cfg.max_retries,
                           applier.fault_hook, start_tick=send_tick,
                           routes=_routes_for(cfg, topo, pkt.src, pkt.dst))
        counts[outcome.classification] += 1
        dropped += outcome.dropped_copies
        retrans += outcome.retransmissions
        tapped += outcome.tapped_copies
        degradations += int(outcome.degraded)
        if outcome.dual_copy:
            diag.dual_transmissions += 1
        if outcome.primary_corrupted:
            diag.corrupted_messages += 1
            if outcome.dual_copy:
                diag.corrupted_dual += 1
        diag.outcomes.append(outcome)

    attempted = cfg.messages_per_trial
    lost = counts[Classification.LOST]
    m = TrialMetrics(
        trial_index=trial_index,
        mode=mode,
        messages_attempted=attempted,
        delivered_clean=counts[Classification.DELIVERED_CLEAN],
        corrupt_detected=counts[Classification.DELIVERED_CORRUPT_DETECTED],
        corrupt_undetected=counts[Classification.DELIVERED_CORRUPT_UNDETECTED],
        lost=lost,
        packet_loss_copies=dropped,
        retransmissions=retrans,
        availability=quantize((attempted - lost) / attempted),
        mean_connectivity=quantize(_mean_connectivity(topo, applier,
                                                      cfg.ticks)),
        tapped_copies=tapped,
        degradations=degradations,
    )
    m.validate()
    return m, diag


def run_trial(cfg: SimConfig, mode: str, trial_index: int) -> TrialMetrics:
    """Deterministic per-trial metrics for one mode (see module docstring)."""
    metrics, _ = run_trial_with_diagnostics(cfg, mode, trial_index)
    return metrics
