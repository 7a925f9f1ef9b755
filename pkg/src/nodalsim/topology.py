"""Leveled nodal graphs: construction, routing, and resilience measures.

Nodes live on four levels (N backbone, U, L, O endpoints). All edges are
undirected, unit-cost, and individually severable.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

LEVELS = ("N", "U", "L", "O")


class TopologyError(Exception):
    pass


class UnknownNodeError(TopologyError):
    pass


class UnknownEdgeError(TopologyError):
    pass


class InvalidPathError(TopologyError):
    pass


@dataclass(frozen=True)
class NodeId:
    level: str
    index: int

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"unknown node level {self.level!r}")
        if self.index < 1:
            raise ValueError(f"node index must be >= 1, got {self.index}")

    def __str__(self) -> str:
        return f"{self.level}{self.index}"

    def __repr__(self) -> str:
        return f"NodeId({self})"

    @classmethod
    def parse(cls, text: str) -> "NodeId":
        text = text.strip()
        if len(text) < 2 or text[0] not in LEVELS or not text[1:].isdigit():
            raise ValueError(f"malformed node id {text!r}")
        return cls(text[0], int(text[1:]))


def _node(spec) -> NodeId:
    return spec if isinstance(spec, NodeId) else NodeId.parse(spec)


@dataclass(frozen=True)
class Edge:
    """Undirected edge, stored with the lexicographically smaller endpoint first."""

    a: NodeId
    b: NodeId

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"self-loop on {self.a}")
        if str(self.b) < str(self.a):
            a, b = self.a, self.b
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "b", a)

    def __str__(self) -> str:
        return f"{self.a}-{self.b}"

    def __repr__(self) -> str:
        return f"Edge({self})"

    def other(self, n: NodeId) -> NodeId:
        if n == self.a:
            return self.b
        if n == self.b:
            return self.a
        raise ValueError(f"{n} is not an endpoint of {self}")

    @classmethod
    def parse(cls, text: str) -> "Edge":
        left, sep, right = text.strip().partition("-")
        if not sep:
            raise ValueError(f"malformed edge {text!r}")
        return cls(NodeId.parse(left), NodeId.parse(right))


def edge(a, b) -> Edge:
    """Convenience constructor accepting node ids or rendered strings."""
    return Edge(_node(a), _node(b))


# A path is an ordered tuple of node ids; consecutive hops share an alive edge.
Path = tuple[NodeId, ...]


def path_edges(p: Path) -> tuple[Edge, ...]:
    return tuple(Edge(x, y) for x, y in zip(p, p[1:]))


def render_path(p: Path) -> str:
    return "->".join(str(n) for n in p)


@dataclass(frozen=True)
class Topology:
    """Immutable snapshot of a leveled graph; sever/restore return new snapshots."""

    nodes: frozenset[NodeId]
    edges: frozenset[Edge]
    dead: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        for e in self.edges:
            if e.a not in self.nodes or e.b not in self.nodes:
                raise TopologyError(f"edge {e} references unknown node")
        if not self.dead <= self.edges:
            raise TopologyError("dead set contains unknown edges")

    @property
    def alive_edges(self) -> frozenset[Edge]:
        return self.edges - self.dead

    def is_alive(self, e: Edge) -> bool:
        self._require_edge(e)
        return e not in self.dead

    def _require_edge(self, e: Edge):
        if e not in self.edges:
            raise UnknownEdgeError(f"unknown edge {e}")

    def require_node(self, n: NodeId):
        if n not in self.nodes:
            raise UnknownNodeError(f"unknown node {n}")

    def level_nodes(self, level: str) -> list[NodeId]:
        return sorted((n for n in self.nodes if n.level == level), key=str)


def _adjacency(t: Topology, excluded: Iterable[Edge] = ()) -> dict[NodeId, list[NodeId]]:
    banned = t.dead | frozenset(excluded)
    adj: dict[NodeId, list[NodeId]] = {n: [] for n in t.nodes}
    for e in t.edges:
        if e in banned:
            continue
        adj[e.a].append(e.b)
        adj[e.b].append(e.a)
    for nbrs in adj.values():
        nbrs.sort(key=str)
    return adj


def build_figure1(redundant: bool) -> Topology:
    """Canonical 9-node chain O1..O4; redundant variant adds the N3-N4 detour."""
    chain = [NodeId.parse(s) for s in
             ("O1", "L1", "U2", "U1", "N1", "N2", "U3", "L3", "O4")]
    nodes = set(chain)
    edges = {Edge(x, y) for x, y in zip(chain, chain[1:])}
    if redundant:
        n3, n4 = NodeId("N", 3), NodeId("N", 4)
        nodes |= {n3, n4}
        edges |= {edge("U1", n3), Edge(n3, n4), edge(n4, "U3")}
    return Topology(frozenset(nodes), frozenset(edges))


E1 = edge("N1", "N2")


def generate_topology(n_count: int, u_count: int, l_count: int, o_count: int,
                      redundancy_factor: float, seed: int) -> Topology:
    """Parametric leveled graph: O attaches to L, L to U, U to N; N forms a backbone.

    redundancy_factor in [0,1] controls how many nodes per level get an
    extra cross-link (fraction of the child count, plus that many backbone
    chords). Connected by construction, deterministic for fixed arguments.
    """
    for name, c in (("n_count", n_count), ("u_count", u_count),
                    ("l_count", l_count), ("o_count", o_count)):
        if c < 1:
            raise ValueError(f"{name} must be >= 1, got {c}")
    if not 0.0 <= redundancy_factor <= 1.0:
        raise ValueError(f"redundancy_factor must be in [0,1], got {redundancy_factor}")

    levels = {
        "N": [NodeId("N", i) for i in range(1, n_count + 1)],
        "U": [NodeId("U", i) for i in range(1, u_count + 1)],
        "L": [NodeId("L", i) for i in range(1, l_count + 1)],
        "O": [NodeId("O", i) for i in range(1, o_count + 1)],
    }
    nodes = frozenset(n for group in levels.values() for n in group)
    edges: set[Edge] = set()

    base_parent: dict[NodeId, NodeId] = {}

    def attach(children: list[NodeId], parents: list[NodeId]):
        for i, child in enumerate(children, start=1):
            parent = parents[i % len(parents)]
            base_parent[child] = parent
            edges.add(Edge(child, parent))

    attach(levels["O"], levels["L"])
    attach(levels["L"], levels["U"])
    attach(levels["U"], levels["N"])

    backbone = levels["N"]
    if n_count == 2:
        edges.add(Edge(backbone[0], backbone[1]))
    elif n_count >= 3:
        for i in range(n_count):
            edges.add(Edge(backbone[i], backbone[(i + 1) % n_count]))

    rng = random.Random(seed)
    for child_level, parent_level in (("O", "L"), ("L", "U"), ("U", "N")):
        children, parents = levels[child_level], levels[parent_level]
        if len(parents) < 2:
            continue
        extra = int(redundancy_factor * len(children))
        picked = rng.sample(children, min(extra, len(children)))
        for child in picked:
            options = [p for p in parents if p != base_parent[child]]
            parent = rng.choice(options)
            edges.add(Edge(child, parent))
    if n_count >= 4:
        chords = int(redundancy_factor * n_count)
        for _ in range(chords):
            a, b = rng.sample(backbone, 2)
            cand = Edge(a, b)
            if cand not in edges:
                edges.add(cand)

    return Topology(nodes, frozenset(edges))


def _lex_key(p: Path) -> tuple[str, ...]:
    return tuple(str(n) for n in p)


def shortest_path(t: Topology, src: NodeId, dst: NodeId,
                  forbidden_edges: Iterable[Edge] = ()) -> Optional[Path]:
    """Minimum-hop simple path over alive, non-forbidden edges.

    Ties broken by lexicographic order of the rendered node ids along the
    path, so results are reproducible. Returns None when unreachable.
    """
    t.require_node(src)
    t.require_node(dst)
    if src == dst:
        raise ValueError("source and destination must differ")
    adj = _adjacency(t, forbidden_edges)
    frontier: dict[NodeId, Path] = {src: (src,)}
    seen = {src}
    while frontier:
        if dst in frontier:
            return frontier[dst]
        nxt: dict[NodeId, Path] = {}
        for node in sorted(frontier, key=str):
            base = frontier[node]
            for nb in adj[node]:
                if nb in seen:
                    continue
                cand = base + (nb,)
                if nb not in nxt or _lex_key(cand) < _lex_key(nxt[nb]):
                    nxt[nb] = cand
        seen.update(nxt)
        frontier = nxt
    return None


def disjoint_path(t: Topology, src: NodeId, dst: NodeId,
                  forbidden_edges: Iterable[Edge]) -> Optional[Path]:
    """Minimum-hop path sharing no edge with forbidden_edges (nodes may repeat
    between routes, edges may not)."""
    return shortest_path(t, src, dst, forbidden_edges)


def _components(t: Topology, without: Optional[Edge] = None) -> list[set[NodeId]]:
    excluded = (without,) if without is not None else ()
    adj = _adjacency(t, excluded)
    remaining = set(t.nodes)
    comps = []
    while remaining:
        start = remaining.pop()
        comp = {start}
        stack = [start]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        remaining -= comp
        comps.append(comp)
    return comps


def _reachable_pairs(t: Topology, without: Optional[Edge] = None) -> int:
    return sum(len(c) * (len(c) - 1) for c in _components(t, without))


def edge_criticality(t: Topology, e: Edge) -> int:
    """Ordered node pairs that lose mutual reachability when e is severed."""
    t._require_edge(e)
    if e in t.dead:
        return 0
    return _reachable_pairs(t) - _reachable_pairs(t, without=e)


def connectivity(t: Topology) -> float:
    """Fraction of ordered node pairs reachable over alive edges."""
    n = len(t.nodes)
    if n < 2:
        raise TopologyError("connectivity needs at least 2 nodes")
    return _reachable_pairs(t) / (n * (n - 1))


def sever_edge(t: Topology, e: Edge) -> Topology:
    t._require_edge(e)
    return Topology(t.nodes, t.edges, t.dead | {e})


def restore_edge(t: Topology, e: Edge) -> Topology:
    t._require_edge(e)
    return Topology(t.nodes, t.edges, t.dead - {e})


def trace_route(t: Topology, p: Path) -> list[tuple[NodeId, int]]:
    """Per-hop trace in transmission order; fails if p is invalid over alive edges."""
    if len(p) < 2:
        raise InvalidPathError("a path needs at least two hops")
    if len(set(p)) != len(p):
        raise InvalidPathError("path repeats a node")
    for n in p:
        t.require_node(n)
    for e in path_edges(p):
        if e not in t.edges or e in t.dead:
            raise InvalidPathError(f"hop {e} is not an alive edge")
    return [(n, i) for i, n in enumerate(p)]


def render_trace(trace: list[tuple[NodeId, int]]) -> str:
    return "->".join(str(n) for n, _ in trace)


def serialize_topology(t: Topology) -> str:
    """Plain-text form: a node header line then one canonical edge per line."""
    lines = ["nodes: " + ",".join(str(n) for n in sorted(t.nodes, key=str))]
    lines += [str(e) for e in sorted(t.alive_edges, key=str)]
    return "\n".join(lines) + "\n"


def parse_topology(text: str) -> Topology:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("nodes:"):
        raise TopologyError("missing 'nodes:' header line")
    nodes = frozenset(NodeId.parse(s) for s in lines[0][len("nodes:"):].split(","))
    edges = frozenset(Edge.parse(ln) for ln in lines[1:])
    return Topology(nodes, edges)
