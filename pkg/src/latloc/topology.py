"""Network topology: loading, validation, and hop-count queries.

A topology is an undirected, connected, simple graph whose nodes carry
geographic coordinates. Hop counts (unweighted shortest paths) are the
distance metric used by landmark placement.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import TopologyError
from .geodesy import GeoPoint

HopMatrix = dict[str, dict[str, int]]


@dataclass(frozen=True)
class Topology:
    """Immutable validated graph: node positions plus sorted adjacency lists."""

    positions: dict[str, GeoPoint]
    adjacency: dict[str, tuple[str, ...]] = field(repr=False)

    @property
    def node_ids(self) -> list[str]:
        return sorted(self.positions)

    @property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2

    def neighbors(self, node_id: str) -> tuple[str, ...]:
        return self.adjacency[node_id]


def build_topology(nodes: Iterable[tuple[str, GeoPoint]],
                   edges: Iterable[tuple[str, str]]) -> Topology:
    """Validate raw nodes/edges and construct a Topology.

    Rejects duplicate node ids, self-loops, duplicate edges, edges with
    unknown endpoints, and disconnected graphs.
    """
    positions: dict[str, GeoPoint] = {}
    for node_id, point in nodes:
        if node_id in positions:
            raise TopologyError(f"duplicate node id {node_id!r}")
        positions[node_id] = point
    if not positions:
        raise TopologyError("topology has no nodes")

    adjacency: dict[str, set[str]] = {nid: set() for nid in positions}
    seen: set[tuple[str, str]] = set()
    for u, v in edges:
        for endpoint in (u, v):
            if endpoint not in positions:
                raise TopologyError(f"edge ({u!r}, {v!r}) references unknown node {endpoint!r}")
        if u == v:
            raise TopologyError(f"self-loop on node {u!r}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise TopologyError(f"duplicate edge ({key[0]!r}, {key[1]!r})")
        seen.add(key)
        adjacency[u].add(v)
        adjacency[v].add(u)

    topo = Topology(
        positions={nid: positions[nid] for nid in sorted(positions)},
        adjacency={nid: tuple(sorted(adjacency[nid])) for nid in sorted(positions)},
    )
    _check_connected(topo)
    return topo


def _check_connected(t: Topology) -> None:
    start = t.node_ids[0]
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in t.adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    if len(seen) != len(t.positions):
        missing = sorted(set(t.positions) - seen)
        raise TopologyError(f"graph is disconnected; unreachable from {start!r}: {missing[:5]}")


def load_topology_json(data: bytes | str) -> Topology:
    """Load the JSON topology format:
    {"nodes": [{"id": ..., "lat": ..., "lon": ...}], "edges": [[u, v], ...]}
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"topology JSON parse error: {exc}") from exc
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise TopologyError("topology JSON must contain 'nodes' and 'edges'")
    nodes = []
    for i, entry in enumerate(doc["nodes"]):
        try:
            nodes.append((str(entry["id"]), GeoPoint(float(entry["lat"]), float(entry["lon"]))))
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"invalid node entry #{i}: {exc}") from exc
    edges = []
    for i, entry in enumerate(doc["edges"]):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise TopologyError(f"invalid edge entry #{i}: expected [u, v]")
        edges.append((str(entry[0]), str(entry[1])))
    return build_topology(nodes, edges)


def load_topology_edgelist(edge_text: str, node_text: str) -> Topology:
    """Load the edge-list format: one 'u v' pair per line, with a sidecar
    node file of 'id lat lon' lines. Blank lines and '#' comments allowed.
    """
    nodes = []
    for lineno, line in enumerate(node_text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise TopologyError(f"node file line {lineno}: expected 'id lat lon'")
        try:
            nodes.append((parts[0], GeoPoint(float(parts[1]), float(parts[2]))))
        except ValueError as exc:
            raise TopologyError(f"node file line {lineno}: {exc}") from exc
    edges = []
    for lineno, line in enumerate(edge_text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TopologyError(f"edge file line {lineno}: expected 'u v'")
        edges.append((parts[0], parts[1]))
    return build_topology(nodes, edges)


def topology_to_json(t: Topology) -> str:
    doc = {
        "nodes": [
            {"id": nid, "lat": p.lat, "lon": p.lon} for nid, p in t.positions.items()
        ],
        "edges": sorted(
            [sorted((u, v)) for u in t.adjacency for v in t.adjacency[u] if u < v]
        ),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def hop_distances(t: Topology, sources: Iterable[str]) -> HopMatrix:
    """BFS hop counts from each source to every node in the topology."""
    result: HopMatrix = {}
    for src in sources:
        if src not in t.positions:
            raise TopologyError(f"unknown source node {src!r}")
        dist = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in t.adjacency[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        result[src] = dist
    return result


def assign_to_closest(t: Topology, landmarks: Iterable[str],
                      hops: HopMatrix | None = None) -> dict[str, str]:
    """Map every node to its closest landmark by hop count.

    Ties break toward the lexicographically smallest landmark id. A
    precomputed hop matrix covering the landmarks may be passed to avoid
    repeating the BFS.
    """
    landmark_ids = sorted(set(landmarks))
    if not landmark_ids:
        raise TopologyError("landmark set is empty")
    if hops is None:
        hops = hop_distances(t, landmark_ids)
    assignment = {}
    for node in t.node_ids:
        best = min(landmark_ids, key=lambda lm: (hops[lm][node], lm))
        assignment[node] = best
    return assignment


def all_pairs_hops(t: Topology) -> HopMatrix:
    """Hop counts between every pair of nodes (BFS from each node)."""
    return hop_distances(t, t.node_ids)
