"""Deterministic simulator of a multi-path redundancy and integrity protocol
under physical-layer tap/corrupt/sever attacks on leveled nodal topologies."""

from .adversary import AttackApplier, AttackEvent, AttackKind, AttackSchedule, schedule_attacks
from .config import BASELINE, PROTOCOL, SimConfig, preset_config
from .experiment import ExperimentResult, run_experiment, sweep_duplication_budget
from .metrics import BoxStats, ComparisonReport, TrialMetrics, box_stats, compare, write_csv
from .protocol import (
    Classification,
    IdempotencyKey,
    Packet,
    RiskModel,
    TransmissionOutcome,
    duplicate_for_parallel,
    make_message,
    packet_risk,
    payload_digest,
    select_protected_subset,
    transmit,
)
from .topology import (
    Edge,
    NodeId,
    Topology,
    build_figure1,
    connectivity,
    disjoint_path,
    edge_criticality,
    generate_topology,
    restore_edge,
    sever_edge,
    shortest_path,
    trace_route,
)
from .trial import run_trial

__version__ = "0.1.0"
