import random

import pytest

from latloc.geodesy import GeoPoint
from latloc.topology import Topology, build_topology


def random_connected_graph(n: int, extra_edge_prob: float, seed: int) -> Topology:
    """Random spanning tree plus extra edges; coordinates are arbitrary."""
    rng = random.Random(seed)
    ids = [f"v{i:02d}" for i in range(n)]
    nodes = [(nid, GeoPoint(rng.uniform(-60, 60), rng.uniform(-150, 150))) for nid in ids]
    edges = []
    for i in range(1, n):
        edges.append((ids[i], ids[rng.randrange(i)]))
    for i in range(n):
        for j in range(i + 1, n):
            if (ids[i], ids[j]) not in edges and (ids[j], ids[i]) not in edges:
                if rng.random() < extra_edge_prob:
                    edges.append((ids[i], ids[j]))
    return build_topology(nodes, edges)


def path_graph(ids: list[str]) -> Topology:
    nodes = [(nid, GeoPoint(0.0, float(i))) for i, nid in enumerate(ids)]
    edges = list(zip(ids, ids[1:]))
    return build_topology(nodes, edges)


@pytest.fixture
def path_abc() -> Topology:
    return path_graph(["a", "b", "c"])
