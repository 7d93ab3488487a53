"""Integer-capacity directed graphs and an exact s-t max-flow / min-cut solver.

Capacities are nonnegative integers, so flow values and cut values are
computed exactly. The solver (Dinic's algorithm) returns the canonical
minimum cut whose source side is the set of nodes reachable from the source
in the residual network of a maximum flow. That set is the unique
inclusion-minimal source side over all minimum cuts, so the returned
partition does not depend on augmentation order or algorithm choice.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import CapacityOverflowError, InputError, InvariantError

# Total capacity must stay inside signed 64-bit range. Python integers do
# not wrap, but the bound keeps instances portable and is checked up front.
MAX_TOTAL_CAPACITY = 2**63 - 1


@dataclass(frozen=True)
class DiGraph:
    """Directed graph with nonnegative integer edge capacities.

    Node ids run from 0 to ``node_count - 1``. Parallel edges are kept as
    distinct entries (their indices matter for cut extraction); self-loops
    are rejected. Instances are immutable and safe to share across threads.
    """

    node_count: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if not isinstance(self.node_count, int) or self.node_count <= 0:
            raise InputError(f"node_count must be a positive integer, got {self.node_count!r}")
        normalized = []
        total = 0
        for idx, edge in enumerate(self.edges):
            u, v, c = edge
            if not (isinstance(u, int) and isinstance(v, int) and isinstance(c, int)):
                raise InputError(f"edge {idx}: endpoints and capacity must be integers, got {edge!r}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise InputError(f"edge {idx}: node id out of range in {edge!r}")
            if u == v:
                raise InputError(f"edge {idx}: self-loop at node {u}")
            if c < 0:
                raise InputError(f"edge {idx}: negative capacity {c}")
            total += c
            normalized.append((u, v, c))
        if total > MAX_TOTAL_CAPACITY:
            raise CapacityOverflowError(
                f"total capacity {total} exceeds the 64-bit limit {MAX_TOTAL_CAPACITY}"
            )
        object.__setattr__(self, "edges", tuple(normalized))

    def check_node(self, node: int, what: str = "node") -> None:
        if not isinstance(node, int) or not (0 <= node < self.node_count):
            raise InputError(f"{what} id {node!r} out of range [0, {self.node_count})")


@dataclass(frozen=True)
class CutSolution:
    """An s-t cut: node partition, exact value, and the crossing edge indices."""

    source_side: frozenset[int]
    sink_side: frozenset[int]
    value: int
    cut_edges: tuple[int, ...]


def min_cut(g: DiGraph, source: int, sink: int) -> CutSolution:
    """Compute a minimum s-t cut of ``g`` with the canonical minimal source side.

    The value equals the maximum flow from source to sink; ``cut_edges`` are
    the indices of edges crossing source side -> sink side, and their
    capacities sum to the value exactly.
    """
    return min_cut_extremes(g, source, sink)[0]


def min_cut_extremes(g: DiGraph, source: int, sink: int) -> tuple[CutSolution, CutSolution]:
    """The two canonical minimum cuts from one maximum flow.

    First the inclusion-minimal source side (forward residual reachability
    from the source), then the inclusion-maximal one (complement of the
    nodes that can still reach the sink in the residual network). They
    coincide when the minimum cut is unique.
    """
    g.check_node(source, "source")
    g.check_node(sink, "sink")
    if source == sink:
        raise InputError("source and sink must differ")

    n = g.node_count
    m = len(g.edges)
    # Residual arrays: forward edge 2i, reverse edge 2i+1.
    to = [0] * (2 * m)
    cap = [0] * (2 * m)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, (u, v, c) in enumerate(g.edges):
        to[2 * i] = v
        cap[2 * i] = c
        to[2 * i + 1] = u
        cap[2 * i + 1] = 0
        adj[u].append(2 * i)
        adj[v].append(2 * i + 1)

    flow = _dinic(n, adj, to, cap, source, sink)

    reachable = _residual_reachable(n, adj, to, cap, source)
    if sink in reachable:
        raise InvariantError("sink reachable in residual network after max flow")
    co_reaching = _residual_co_reaching(n, adj, to, cap, sink)
    maximal_side = frozenset(range(n)) - co_reaching

    cuts = []
    for side in (frozenset(reachable), maximal_side):
        cut_edges = tuple(
            i for i, (u, v, _) in enumerate(g.edges) if u in side and v not in side
        )
        cut_cap = sum(g.edges[i][2] for i in cut_edges)
        if cut_cap != flow:
            raise InvariantError(
                f"max-flow/min-cut mismatch: flow {flow}, crossing capacity {cut_cap}"
            )
        cuts.append(
            CutSolution(
                source_side=side,
                sink_side=frozenset(range(n)) - side,
                value=flow,
                cut_edges=cut_edges,
            )
        )
    return cuts[0], cuts[1]


def cut_value(g: DiGraph, source_side) -> int:
    """Sum of capacities of edges leaving ``source_side``."""
    side = set()
    for node in source_side:
        g.check_node(node)
        side.add(node)
    return sum(c for (u, v, c) in g.edges if u in side and v not in side)


def _dinic(n, adj, to, cap, s, t) -> int:
    flow = 0
    level = [-1] * n
    while _bfs_levels(adj, to, cap, s, t, level):
        it = [0] * n
        while True:
            pushed = _augment(adj, to, cap, level, it, s, t)
            if pushed == 0:
                break
            flow += pushed
    return flow


def _bfs_levels(adj, to, cap, s, t, level) -> bool:
    for i in range(len(level)):
        level[i] = -1
    level[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for e in adj[u]:
            v = to[e]
            if cap[e] > 0 and level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
    return level[t] >= 0


def _augment(adj, to, cap, level, it, s, t) -> int:
    # Iterative DFS in the level graph; `it` keeps per-node scan positions
    # so dead edges are never revisited within a phase.
    path: list[int] = []
    u = s
    while True:
        if u == t:
            aug = min(cap[e] for e in path)
            for e in path:
                cap[e] -= aug
                cap[e ^ 1] += aug
            return aug
        advanced = False
        while it[u] < len(adj[u]):
            e = adj[u][it[u]]
            v = to[e]
            if cap[e] > 0 and level[v] == level[u] + 1:
                path.append(e)
                u = v
                advanced = True
                break
            it[u] += 1
        if not advanced:
            if not path:
                return 0
            level[u] = -1
            e = path.pop()
            u = to[e ^ 1]
            it[u] += 1


def _residual_reachable(n, adj, to, cap, s) -> set[int]:
    seen = {s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for e in adj[u]:
            v = to[e]
            if cap[e] > 0 and v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _residual_co_reaching(n, adj, to, cap, t) -> set[int]:
    # Nodes with a positive-capacity residual path into t: walk residual
    # edges backwards (edge e enters to[e], its tail is to[e ^ 1]).
    seen = {t}
    queue = deque([t])
    while queue:
        v = queue.popleft()
        for e in adj[v]:
            u = to[e]
            # adj[v] holds residual arcs incident to v; e ^ 1 is the arc
            # u -> v, usable when it still has capacity.
            if cap[e ^ 1] > 0 and u not in seen:
                seen.add(u)
                queue.append(u)
    return seen
