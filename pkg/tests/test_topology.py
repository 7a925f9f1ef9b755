import random

import pytest

from nodalsim.topology import (
    E1,
    Edge,
    InvalidPathError,
    NodeId,
    Topology,
    TopologyError,
    UnknownEdgeError,
    UnknownNodeError,
    build_figure1,
    connectivity,
    disjoint_path,
    edge,
    edge_criticality,
    generate_topology,
    parse_topology,
    path_edges,
    render_path,
    render_trace,
    restore_edge,
    serialize_topology,
    sever_edge,
    shortest_path,
    trace_route,
)


def test_node_id_parse_and_render():
    n = NodeId.parse("U12")
    assert n == NodeId("U", 12)
    assert str(n) == "U12"
    with pytest.raises(ValueError):
        NodeId.parse("X1")
    with pytest.raises(ValueError):
        NodeId.parse("U")
    with pytest.raises(ValueError):
        NodeId("N", 0)


def test_edge_is_canonical_and_undirected():
    e1 = edge("N2", "N1")
    e2 = edge("N1", "N2")
    assert e1 == e2
    assert str(e1) == "N1-N2"
    assert e1.other(NodeId("N", 1)) == NodeId("N", 2)
    with pytest.raises(ValueError):
        edge("N1", "N1")
    assert Edge.parse("N2-N1") == E1


def test_figure1_shape():
    t = build_figure1(False)
    assert len(t.nodes) == 9
    assert len(t.edges) == 8
    assert E1 in t.edges

    r = build_figure1(True)
    assert len(r.nodes) == 11
    assert len(r.edges) == 11
    assert edge("N3", "N4") in r.edges


def test_shortest_path_figure1_chain():
    t = build_figure1(False)
    p = shortest_path(t, NodeId.parse("O1"), NodeId.parse("O4"))
    assert render_path(p) == "O1->L1->U2->U1->N1->N2->U3->L3->O4"
    assert len(path_edges(p)) == 8


def test_shortest_path_lexicographic_tie_break():
    # two equal-length routes: A picks the lexicographically smaller node ids
    nodes = frozenset(NodeId.parse(s) for s in ("O1", "L1", "L2", "U1"))
    edges = frozenset({edge("O1", "L1"), edge("O1", "L2"),
                       edge("L1", "U1"), edge("L2", "U1")})
    t = Topology(nodes, edges)
    p = shortest_path(t, NodeId.parse("O1"), NodeId.parse("U1"))
    assert render_path(p) == "O1->L1->U1"


def test_shortest_path_errors_and_unreachable():
    t = build_figure1(False)
    with pytest.raises(UnknownNodeError):
        shortest_path(t, NodeId.parse("O9"), NodeId.parse("O1"))
    with pytest.raises(ValueError):
        shortest_path(t, NodeId.parse("O1"), NodeId.parse("O1"))
    severed = sever_edge(t, E1)
    assert shortest_path(severed, NodeId.parse("O1"), NodeId.parse("O4")) is None


def test_disjoint_path_on_redundant_figure1():
    t = build_figure1(True)
    u1, u3 = NodeId.parse("U1"), NodeId.parse("U3")
    primary = shortest_path(t, u1, u3)
    alt = disjoint_path(t, u1, u3, path_edges(primary))
    assert render_path(primary) == "U1->N1->N2->U3"
    assert render_path(alt) == "U1->N3->N4->U3"
    assert not set(path_edges(primary)) & set(path_edges(alt))


def test_disjoint_path_absent_on_chain():
    t = build_figure1(False)
    o1, o4 = NodeId.parse("O1"), NodeId.parse("O4")
    primary = shortest_path(t, o1, o4)
    assert disjoint_path(t, o1, o4, path_edges(primary)) is None


def test_sever_and_restore_are_persistent_snapshots():
    t = build_figure1(False)
    cut = sever_edge(t, E1)
    assert E1 in t.alive_edges  # original untouched
    assert E1 not in cut.alive_edges
    assert not cut.is_alive(E1)
    back = restore_edge(cut, E1)
    assert back.alive_edges == t.alive_edges
    with pytest.raises(UnknownEdgeError):
        sever_edge(t, edge("N1", "N4"))


def test_severed_backbone_connectivity_value():
    # cutting the N1-N2 backbone edge on the 9-node chain splits it 5|4:
    # (5*4 + 4*3) ordered pairs remain of 9*8
    t = sever_edge(build_figure1(False), E1)
    assert connectivity(t) == pytest.approx(32 / 72)
    assert connectivity(build_figure1(False)) == 1.0


def _brute_reachable_pairs(t, skip=None):
    # independent oracle: per-node DFS over alive edges
    adj = {n: set() for n in t.nodes}
    for e in t.alive_edges:
        if e == skip:
            continue
        adj[e.a].add(e.b)
        adj[e.b].add(e.a)
    count = 0
    for start in t.nodes:
        seen = {start}
        stack = [start]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        count += len(seen) - 1
    return count


def _random_topology(rng):
    counts = [rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3),
              rng.randint(2, 3)]
    nodes = [NodeId(lv, i) for lv, c in zip("NULO", counts)
             for i in range(1, c + 1)]
    edges = set()
    for _ in range(rng.randint(len(nodes) - 1, 2 * len(nodes))):
        a, b = rng.sample(nodes, 2)
        edges.add(Edge(a, b))
    return Topology(frozenset(nodes), frozenset(edges))


def test_edge_criticality_matches_brute_force_on_random_graphs():
    rng = random.Random(7)
    checked = 0
    for _ in range(50):
        t = _random_topology(rng)
        for e in t.edges:
            expected = (_brute_reachable_pairs(t)
                        - _brute_reachable_pairs(t, skip=e))
            assert edge_criticality(t, e) == expected
            checked += 1
    assert checked > 50


def test_connectivity_matches_brute_force_on_random_graphs():
    rng = random.Random(11)
    for _ in range(20):
        t = _random_topology(rng)
        n = len(t.nodes)
        assert connectivity(t) == pytest.approx(
            _brute_reachable_pairs(t) / (n * (n - 1)))


def test_generated_topology_is_deterministic_and_connected():
    a = generate_topology(4, 8, 16, 32, 1.0, seed=1)
    b = generate_topology(4, 8, 16, 32, 1.0, seed=1)
    assert a == b
    assert serialize_topology(a) == serialize_topology(b)
    c = generate_topology(4, 8, 16, 32, 1.0, seed=2)
    assert c != a
    assert connectivity(a) == 1.0
    assert len(a.nodes) == 60


def test_generated_full_redundancy_gives_disjoint_routes_everywhere():
    t = generate_topology(4, 8, 16, 32, 1.0, seed=1)
    endpoints = t.level_nodes("O")
    for src, dst in [(endpoints[0], endpoints[-1]),
                     (endpoints[3], endpoints[17]),
                     (endpoints[9], endpoints[25])]:
        primary = shortest_path(t, src, dst)
        assert primary is not None
        assert disjoint_path(t, src, dst, path_edges(primary)) is not None


def test_generate_topology_validates_arguments():
    with pytest.raises(ValueError):
        generate_topology(0, 1, 1, 1, 0.5, seed=1)
    with pytest.raises(ValueError):
        generate_topology(1, 1, 1, 1, 1.5, seed=1)


def test_trace_route_and_render():
    t = build_figure1(False)
    p = shortest_path(t, NodeId.parse("O1"), NodeId.parse("U1"))
    trace = trace_route(t, p)
    assert trace[0] == (NodeId.parse("O1"), 0)
    assert render_trace(trace) == render_path(p)
    with pytest.raises(InvalidPathError):
        trace_route(t, (NodeId.parse("O1"),))
    with pytest.raises(InvalidPathError):
        trace_route(t, (NodeId.parse("O1"), NodeId.parse("O4")))
    cut = sever_edge(t, E1)
    chain = shortest_path(t, NodeId.parse("O1"), NodeId.parse("O4"))
    with pytest.raises(InvalidPathError):
        trace_route(cut, chain)


def test_topology_serialization_round_trip():
    for t in (build_figure1(False), build_figure1(True),
              generate_topology(2, 3, 4, 5, 0.5, seed=3)):
        text = serialize_topology(t)
        back = parse_topology(text)
        assert back.nodes == t.nodes
        assert back.edges == t.alive_edges
        assert serialize_topology(back) == text
    with pytest.raises(TopologyError):
        parse_topology("N1-N2\n")


def test_topology_rejects_dangling_edges():
    with pytest.raises(TopologyError):
        Topology(frozenset({NodeId.parse("N1")}), frozenset({E1}))
