"""Random geometric graphs on a circular region.

Nodes arrive by a Poisson point process of the configured density on the
disk of diameter ``region_diameter``; two nodes are adjacent when their
Euclidean distance is strictly less than ``conn_radius``.
"""

import math
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError

#: Name of the bit generator recorded in run manifests.
RNG_ALGORITHM = "numpy PCG64"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class AssumptionWarning(UserWarning):
    """A configuration leaves the regime the analytic bounds assume."""


def splitmix64(state):
    """Finalizer of the splitmix64 generator (public-domain constants)."""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed, *indices):
    """Derive a child seed from a master seed and an index path.

    The rule is documented so runs reproduce across platforms and across
    any parallel scheduling: each index advances a splitmix64 state by
    (index + 1) golden-ratio steps and mixes.
    """
    state = master_seed & _MASK64
    for idx in indices:
        state = splitmix64((state + (idx + 1) * _GOLDEN) & _MASK64)
    return state


def make_rng(seed):
    """Seeded 64-bit generator (PCG64) used everywhere in this package."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class NetworkConfig:
    """All model parameters for one network/attack scenario.

    density:          expected nodes per unit area
    conn_radius:      connection radius (edge iff distance < conn_radius)
    region_diameter:  diameter of the circular deployment region
    attack_radius:    radius of the circular attack centered at the origin
    tolerance:        capacity / initial load, >= 1
    seed:             64-bit seed for the node process
    """

    density: float
    conn_radius: float
    region_diameter: float
    attack_radius: float
    tolerance: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.density < 0:
            raise ParameterDomainError(f"density must be >= 0, got {self.density}")
        if self.conn_radius <= 0 or self.region_diameter <= 0 or self.attack_radius <= 0:
            raise ParameterDomainError("radii and diameter must be positive")
        if self.attack_radius >= self.region_diameter / 2:
            raise ParameterDomainError(
                "attack_radius must be smaller than the region radius, got "
                f"{self.attack_radius} >= {self.region_diameter / 2}"
            )
        if self.tolerance < 1:
            raise ParameterDomainError(f"tolerance must be >= 1, got {self.tolerance}")
        # Analysis regime, not a simulation requirement: warn, don't refuse.
        if self.mean_degree_area < 6:
            warnings.warn(
                f"density*pi*conn_radius^2 = {self.mean_degree_area:.3g} < 6; "
                "connectivity is no longer near-certain and the analytic "
                "bounds assume otherwise",
                AssumptionWarning,
                stacklevel=2,
            )
        if self.mean_attacked < 3:
            warnings.warn(
                f"density*pi*attack_radius^2 = {self.mean_attacked:.3g} < 3; "
                "the attack may often hit no node at all",
                AssumptionWarning,
                stacklevel=2,
            )

    @property
    def mean_degree_area(self):
        """Expected neighbor count of an interior node."""
        return self.density * math.pi * self.conn_radius**2

    @property
    def mean_attacked(self):
        """Expected number of nodes inside the attack disk."""
        return self.density * math.pi * self.attack_radius**2

    @property
    def radius_ratio(self):
        """attack_radius / conn_radius."""
        return self.attack_radius / self.conn_radius


class Graph:
    """Immutable node positions plus symmetric adjacency in CSR layout."""

    def __init__(self, positions, indptr, indices):
        self.positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.positions.setflags(write=False)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @property
    def node_count(self):
        return self.positions.shape[0]

    @property
    def edge_count(self):
        return self.indices.size // 2

    def neighbors(self, i):
        """Sorted neighbor ids of node i (numpy view)."""
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def adjacency(self):
        """Neighbor arrays for all nodes, in id order."""
        return [self.neighbors(i) for i in range(self.node_count)]

    def radii(self):
        """Distance of every node from the origin."""
        return np.hypot(self.positions[:, 0], self.positions[:, 1])

    def edges(self):
        """Each undirected edge once, as sorted (u, v) pairs."""
        out = []
        for u in range(self.node_count):
            for v in self.neighbors(u):
                if u < v:
                    out.append((u, int(v)))
        return out

    @classmethod
    def from_edges(cls, positions, edge_list):
        """Build a graph from explicit positions and undirected edges."""
        positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
        n = positions.shape[0]
        u = np.asarray([e[0] for e in edge_list], dtype=np.int64)
        v = np.asarray([e[1] for e in edge_list], dtype=np.int64)
        if u.size and (u == v).any():
            raise ParameterDomainError("self-loops are not allowed")
        return cls(positions, *_csr_from_pairs(n, u, v))


def _csr_from_pairs(n, u, v):
    """Symmetric CSR from one-directional edge pairs; neighbor lists sorted."""
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst


def sample_positions(config, rng):
    """Poisson point process on the deployment disk.

    The node count is Poisson(density * region area); positions are i.i.d.
    uniform on the disk via the exact radius = R*sqrt(u) law.
    """
    radius = config.region_diameter / 2.0
    n = rng.poisson(config.density * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def build_adjacency_grid(positions, conn_radius):
    """Adjacency via a uniform grid hash with cell size conn_radius.

    Each node is binned; candidate pairs come from a cell and its 8
    neighbors, so the expected cost is linear in the node count. The
    distance test is strict (< conn_radius).
    """
    n = positions.shape[0]
    if n == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    cells = np.floor(positions / conn_radius).astype(np.int64)
    buckets = {}
    for i, (cx, cy) in enumerate(cells):
        buckets.setdefault((int(cx), int(cy)), []).append(i)
    us, vs = [], []
    # Scan half of the 3x3 neighborhood so each cell pair is visited once.
    half = ((0, 0), (1, 0), (-1, 1), (0, 1), (1, 1))
    for (cx, cy), members in buckets.items():
        a = np.asarray(members)
        pa = positions[a]
        for dx, dy in half:
            if dx == 0 and dy == 0:
                d2 = np.sum((pa[:, None, :] - pa[None, :, :]) ** 2, axis=-1)
                iu, iv = np.nonzero(np.triu(d2 < conn_radius**2, k=1))
                us.append(a[iu])
                vs.append(a[iv])
                continue
            other = buckets.get((cx + dx, cy + dy))
            if other is None:
                continue
            b = np.asarray(other)
            d2 = np.sum((pa[:, None, :] - positions[b][None, :, :]) ** 2, axis=-1)
            iu, iv = np.nonzero(d2 < conn_radius**2)
            us.append(a[iu])
            vs.append(b[iv])
    u = np.concatenate(us) if us else np.zeros(0, dtype=np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, dtype=np.int64)
    return _csr_from_pairs(n, u, v)


def build_adjacency_bruteforce(positions, conn_radius):
    """All-pairs adjacency; quadratic. Kept as an oracle for the grid."""
    n = positions.shape[0]
    if n == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    d2 = np.sum((positions[:, None, :] - positions[None, :, :]) ** 2, axis=-1)
    u, v = np.nonzero(np.triu(d2 < conn_radius**2, k=1))
    return _csr_from_pairs(n, u.astype(np.int64), v.astype(np.int64))


def sample_graph(config, rng):
    """One realization of the random geometric graph."""
    positions = sample_positions(config, rng)
    indptr, indices = build_adjacency_grid(positions, config.conn_radius)
    return Graph(positions, indptr, indices)


def is_connected(graph):
    """True iff the graph has at most one connected component (BFS)."""
    n = graph.node_count
    if n <= 1:
        return True
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in graph.neighbors(u):
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == n


def ring_mean(config, i):
    """Expected node count of the i-th ring around the attack disk.

    Ring i is the annulus between radii attack_radius + (i-1)*conn_radius
    and attack_radius + i*conn_radius.
    """
    if i < 1:
        raise ParameterDomainError(f"ring index must be >= 1, got {i}")
    ra, cr = config.attack_radius, config.conn_radius
    outer = ra + i * cr
    inner = ra + (i - 1) * cr
    return config.density * math.pi * (outer * outer - inner * inner)


def graph_to_text(graph):
    """Plain-text snapshot: one `id x y` line per node, then `edge u v` lines."""
    lines = []
    for i, (x, y) in enumerate(graph.positions):
        lines.append(f"{i} {x:.17g} {y:.17g}")
    for u, v in graph.edges():
        lines.append(f"edge {u} {v}")
    return "\n".join(lines) + "\n"


def graph_from_text(text):
    """Parse the snapshot format written by graph_to_text."""
    positions = []
    edge_list = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "edge":
            edge_list.append((int(parts[1]), int(parts[2])))
        else:
            idx = int(parts[0])
            if idx != len(positions):
                raise ValueError(f"node ids must be consecutive, got {idx}")
            positions.append((float(parts[1]), float(parts[2])))
    pos = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    return Graph.from_edges(pos, edge_list)
