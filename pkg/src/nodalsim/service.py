"""HTTP facade over the simulator: topology inspection and experiment runs."""
from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import topology as topo_mod
from .config import PRESETS, ConfigError, SimConfig, preset_config
from .experiment import run_experiment
from .topology import (
    NodeId,
    Topology,
    UnknownNodeError,
    build_figure1,
    connectivity,
    disjoint_path,
    edge_criticality,
    generate_topology,
    path_edges,
    render_path,
    serialize_topology,
    shortest_path,
)

app = FastAPI(title="nodalsim", version="0.1.0",
              description="Multi-path redundancy and integrity protocol "
                          "simulator for physical-layer attacks")


class GeneratedParams(BaseModel):
    n: int = 4
    u: int = 8
    l: int = 16
    o: int = 32
    redundancy_factor: float = 1.0
    seed: int = 1


class TopologyRequest(BaseModel):
    kind: str = Field("figure1", description="figure1 | figure1-redundant | generated")
    generated: GeneratedParams = GeneratedParams()


class TopologyResponse(BaseModel):
    nodes: list[str]
    edges: list[str]
    connectivity: float
    text: str


class RouteRequest(BaseModel):
    topology: TopologyRequest = TopologyRequest()
    src: str
    dst: str
    forbidden_edges: list[str] = []
    edge_disjoint_alternate: bool = Field(
        False, description="also return the best route sharing no edge with the primary")


class RouteResponse(BaseModel):
    path: Optional[list[str]]
    trace: Optional[str]
    alternate: Optional[list[str]] = None
    alternate_trace: Optional[str] = None


class CriticalityResponse(BaseModel):
    edges: dict[str, int]
    most_critical: Optional[str]


class ExperimentRequest(BaseModel):
    preset: Optional[str] = None
    config: dict = Field(default_factory=dict,
                         description="SimConfig field overrides")
    include_rows: bool = False


class ComparisonEntry(BaseModel):
    baseline_mean: float
    protocol_mean: float
    delta: float
    percent_change: Optional[float]
    inverted: bool


class ExperimentResponse(BaseModel):
    config: dict
    baseline_csv: str
    protocol_csv: str
    report: str
    comparison: dict[str, ComparisonEntry]
    dual_coverage: Optional[float]
    baseline_rows: Optional[list[dict]] = None
    protocol_rows: Optional[list[dict]] = None


def _build(req: TopologyRequest) -> Topology:
    if req.kind == "figure1":
        return build_figure1(False)
    if req.kind == "figure1-redundant":
        return build_figure1(True)
    if req.kind == "generated":
        g = req.generated
        return generate_topology(g.n, g.u, g.l, g.o, g.redundancy_factor,
                                 g.seed)
    raise HTTPException(status_code=422, detail=f"unknown topology kind {req.kind!r}")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/presets")
def presets() -> dict:
    return {name: preset_config(name).to_dict() for name in PRESETS}


@app.post("/topology", response_model=TopologyResponse)
def topology(req: TopologyRequest) -> TopologyResponse:
    try:
        t = _build(req)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return TopologyResponse(
        nodes=sorted(str(n) for n in t.nodes),
        edges=sorted(str(e) for e in t.alive_edges),
        connectivity=connectivity(t),
        text=serialize_topology(t),
    )


@app.post("/topology/route", response_model=RouteResponse)
def route(req: RouteRequest) -> RouteResponse:
    t = _build(req.topology)
    try:
        src, dst = NodeId.parse(req.src), NodeId.parse(req.dst)
        forbidden = frozenset(topo_mod.Edge.parse(s) for s in req.forbidden_edges)
        primary = shortest_path(t, src, dst, forbidden)
    except (ValueError, UnknownNodeError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    resp = RouteResponse(
        path=[str(n) for n in primary] if primary else None,
        trace=render_path(primary) if primary else None,
    )
    if req.edge_disjoint_alternate and primary is not None:
        alt = disjoint_path(t, src, dst, frozenset(forbidden)
                            | set(path_edges(primary)))
        if alt is not None:
            resp.alternate = [str(n) for n in alt]
            resp.alternate_trace = render_path(alt)
    return resp


@app.post("/topology/criticality", response_model=CriticalityResponse)
def criticality(req: TopologyRequest) -> CriticalityResponse:
    t = _build(req)
    crits = {str(e): edge_criticality(t, e) for e in sorted(t.edges, key=str)}
    most = max(crits, key=lambda k: (crits[k], k)) if crits else None
    return CriticalityResponse(edges=crits, most_critical=most)


@app.post("/experiment", response_model=ExperimentResponse)
def experiment(req: ExperimentRequest) -> ExperimentResponse:
    try:
        if req.preset is not None:
            cfg = preset_config(req.preset, **req.config)
        else:
            cfg = SimConfig.from_dict(req.config)
    except (ConfigError, TypeError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    result = run_experiment(cfg)
    comparison = {
        name: ComparisonEntry(
            baseline_mean=mc.baseline_mean, protocol_mean=mc.protocol_mean,
            delta=mc.delta, percent_change=mc.percent_change,
            inverted=mc.inverted)
        for name, mc in result.report.metrics.items()
    }
    resp = ExperimentResponse(
        config=cfg.to_dict(),
        baseline_csv=result.baseline_csv,
        protocol_csv=result.protocol_csv,
        report=result.report_text,
        comparison=comparison,
        dual_coverage=result.diagnostics.dual_coverage,
    )
    if req.include_rows:
        from .metrics import as_row
        resp.baseline_rows = [as_row(m) for m in result.baseline]
        resp.protocol_rows = [as_row(m) for m in result.protocol]
    return resp
