"""Disjoint-set union with path compression and union by size."""

from __future__ import annotations


class DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def labels(self) -> list[int]:
        """Compact component label per element, numbered by first appearance."""
        out = [0] * len(self.parent)
        seen: dict[int, int] = {}
        for i in range(len(self.parent)):
            root = self.find(i)
            if root not in seen:
                seen[root] = len(seen)
            out[i] = seen[root]
        return out
