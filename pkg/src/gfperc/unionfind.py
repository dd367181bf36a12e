"""Disjoint-set forest and a reference cluster labelling for lattice colourings.

The production event detectors label clusters with an image-labelling pass
(see ``events``); this module is the slow, obviously-correct route that the
tests compare against.
"""
from __future__ import annotations

from .lattice import Coloring, EpsRegion


class UnionFind:
    """Union by size with path halving over the integers ``0..n-1``."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


def reference_clusters(coloring: Coloring, region: EpsRegion, black: bool = True) -> dict:
    """Map each vertex of colour ``black`` in ``region`` to a cluster root.

    Clusters use lattice adjacency restricted to vertices of the closed region.
    """
    lat = coloring.lattice
    verts = [tuple(int(c) for c in v) for v in lat.vertices_in(region)]
    keep = [v for v in verts if coloring.is_black(v) == black]
    index = {v: k for k, v in enumerate(keep)}
    uf = UnionFind(len(keep))
    for v, k in index.items():
        for u in lat.neighbors(v):
            j = index.get(u)
            if j is not None:
                uf.union(k, j)
    return {v: uf.find(k) for v, k in index.items()}
