"""Sensor-network topology and the Laplacian spectral quantities of the consensus stage.

The consensus step size is alpha = 2 / (lambda_2 + lambda_max), which minimizes
the per-round contraction factor

    gamma = (lambda_max - lambda_2) / (lambda_max + lambda_2)

of the disagreement dynamics orthogonal to the all-ones direction.
"""
from __future__ import annotations

import functools
import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotConnected, SpectralDisagreement

TOL_EIG = 1e-10

# 30-node, 38-edge benchmark topology used throughout the bundled experiments.
FIG1_EDGES = (
    (1, 2), (1, 7), (2, 8), (2, 9), (3, 4), (3, 9), (3, 10), (4, 11),
    (5, 10), (5, 12), (6, 12), (7, 14), (8, 15), (9, 14), (9, 16),
    (11, 16), (11, 17), (11, 18), (13, 19), (13, 20), (14, 20), (15, 22),
    (16, 22), (12, 17), (17, 23), (18, 24), (19, 26), (19, 25), (20, 21),
    (20, 27), (21, 26), (16, 21), (22, 28), (22, 23), (22, 29), (24, 29),
    (24, 30), (27, 28),
)


@dataclass(frozen=True)
class SensorGraph:
    """Undirected communication graph with 1-based sensor indices and no self loops."""

    n_sensors: int
    edges: tuple[tuple[int, int], ...]  # canonical: i < j, sorted, unique

    @classmethod
    def from_edges(cls, n_sensors: int, edges) -> "SensorGraph":
        if n_sensors < 1:
            raise ValueError(f"need at least one sensor, got {n_sensors}")
        canonical = set()
        for pair in edges:
            i, j = int(pair[0]), int(pair[1])
            if i == j:
                raise ValueError(f"self loop at sensor {i}")
            if not (1 <= i <= n_sensors and 1 <= j <= n_sensors):
                raise ValueError(f"edge ({i}, {j}) outside 1..{n_sensors}")
            canonical.add((min(i, j), max(i, j)))
        return cls(n_sensors, tuple(sorted(canonical)))

    @classmethod
    def from_dict(cls, payload: dict) -> "SensorGraph":
        return cls.from_edges(payload["n"], payload["edges"])

    @classmethod
    def from_file(cls, path) -> "SensorGraph":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {"n": self.n_sensors, "edges": [list(e) for e in self.edges]}

    def neighbors(self, i: int) -> tuple[int, ...]:
        out = [b if a == i else a for a, b in self.edges if i in (a, b)]
        return tuple(sorted(out))

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    @property
    def n_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class SpectralParams:
    """Laplacian spectral quantities driving the consensus stage."""

    lambda2: float
    lambda_max: float
    alpha: float     # 2 / (lambda2 + lambda_max)
    gamma: float     # (lambda_max - lambda2) / (lambda_max + lambda2)


def laplacian(g: SensorGraph) -> np.ndarray:
    """Graph Laplacian L = D - Adj; symmetric with zero row sums."""
    mat = np.zeros((g.n_sensors, g.n_sensors))
    for i, j in g.edges:
        mat[i - 1, i - 1] += 1.0
        mat[j - 1, j - 1] += 1.0
        mat[i - 1, j - 1] -= 1.0
        mat[j - 1, i - 1] -= 1.0
    return mat


def adjacency(g: SensorGraph) -> np.ndarray:
    mat = np.zeros((g.n_sensors, g.n_sensors))
    for i, j in g.edges:
        mat[i - 1, j - 1] = 1.0
        mat[j - 1, i - 1] = 1.0
    return mat


def _bfs_reaches_all(g: SensorGraph) -> bool:
    adj: dict[int, list[int]] = {i: [] for i in range(1, g.n_sensors + 1)}
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {1}
    queue = deque([1])
    while queue:
        node = queue.popleft()
        for other in adj[node]:
            if other not in seen:
                seen.add(other)
                queue.append(other)
    return len(seen) == g.n_sensors


def is_connected(g: SensorGraph) -> bool:
    """Connectivity by two independent routes: spectral gap and breadth-first traversal.

    The routes must agree; a mismatch signals eigensolver inaccuracy and raises
    SpectralDisagreement instead of guessing.
    """
    by_bfs = _bfs_reaches_all(g)
    if g.n_sensors == 1:
        return True  # spectral route is vacuous for a single node
    eigenvalues = np.linalg.eigvalsh(laplacian(g))
    by_spectrum = bool(eigenvalues[1] > TOL_EIG)
    if by_spectrum != by_bfs:
        raise SpectralDisagreement(
            f"lambda_2 = {eigenvalues[1]:.3e} says connected={by_spectrum}, "
            f"traversal says connected={by_bfs}"
        )
    return by_bfs


@functools.lru_cache(maxsize=256)
def spectral_params(g: SensorGraph) -> SpectralParams:
    """Compute (lambda2, lambda_max, alpha, gamma) for a connected graph."""
    if g.n_sensors < 2:
        raise NotConnected("a single-node graph has no spectral gap")
    eigenvalues = np.linalg.eigvalsh(laplacian(g))
    lam2 = float(eigenvalues[1])
    lam_max = float(eigenvalues[-1])
    if lam2 <= TOL_EIG:
        raise NotConnected(f"lambda_2 = {lam2:.3e} <= {TOL_EIG}")
    alpha = 2.0 / (lam2 + lam_max)
    gamma = (lam_max - lam2) / (lam_max + lam2)
    return SpectralParams(lambda2=lam2, lambda_max=lam_max, alpha=alpha, gamma=gamma)


def min_consensus_steps(g: SensorGraph, norm_A: float) -> int:
    """Smallest integer L with norm_A * gamma^L < 1, strictly above ln||A|| / ln(1/gamma).

    Returns 1 for norm_A <= 1 or gamma == 0 (one consensus round is always required).
    """
    gamma = spectral_params(g).gamma
    if norm_A <= 1.0 or gamma <= 0.0:
        return 1
    bound = math.log(norm_A) / math.log(1.0 / gamma)
    steps = max(1, math.floor(bound) + 1)
    while norm_A * gamma**steps >= 1.0:  # guard against floating-point ties
        steps += 1
    return steps


def named_topology(name: str, n: int | None = None) -> SensorGraph:
    """Built-in topologies: fig1 (30 nodes), complete, path, star, ring."""
    if name == "fig1":
        if n not in (None, 30):
            raise ValueError("the fig1 topology has exactly 30 sensors")
        return SensorGraph.from_edges(30, FIG1_EDGES)
    if n is None or n < 2:
        raise ValueError(f"topology {name!r} needs n >= 2")
    if name == "complete":
        edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    elif name == "path":
        edges = [(i, i + 1) for i in range(1, n)]
    elif name == "star":
        edges = [(1, j) for j in range(2, n + 1)]
    elif name == "ring":
        if n < 3:
            raise ValueError("a ring needs n >= 3")
        edges = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    else:
        raise ValueError(f"unknown topology {name!r}")
    return SensorGraph.from_edges(n, edges)


def graph_diameter(g: SensorGraph) -> int:
    """Longest shortest path; detection gossip reaches everyone within this many rounds."""
    adj: dict[int, list[int]] = {i: [] for i in range(1, g.n_sensors + 1)}
    for i, j in g.edges:
        adj[i].append(j)
        adj[j].append(i)
    diameter = 0
    for source in range(1, g.n_sensors + 1):
        dist = {source: 0}
        queue = deque([source])
        while queue:
            node = queue.popleft()
            for other in adj[node]:
                if other not in dist:
                    dist[other] = dist[node] + 1
                    queue.append(other)
        if len(dist) != g.n_sensors:
            raise NotConnected("diameter undefined for a disconnected graph")
        diameter = max(diameter, max(dist.values()))
    return diameter
