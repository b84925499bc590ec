"""Node graph, neighbour identification, travel-cost map and target selection.

Nodes are the poses where sweeps were taken. Two nodes are neighbours when
the agent can drive straight between them. The cost table holds shortest
neighbour-path distances from the current node and is refreshed with
Dijkstra after every change.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional, Sequence

import numpy as np

from .geometry import (
    Point2,
    Pose,
    Segment2,
    segment_intersects_any,
    segment_point_clearance,
    segments_intersect,
)
from .lidar import N_DEGREES, Sweep
from .scan_analysis import GapDescriptor, WallDescriptor

Strategy = Literal["min-gap", "max-gap"]

# consecutive wall samples further apart than this are not joined into a wall chord
WALL_LINK_DISTANCE = 0.3
JOIN_SAMPLE_STEP = 0.05


class NavigationError(LookupError):
    pass


@dataclass
class NavNode:
    id: int
    pose: Pose
    gaps: list[GapDescriptor] = field(default_factory=list)
    neighbours: dict[int, float] = field(default_factory=dict)
    sweep: Optional[Sweep] = None
    walls: list[WallDescriptor] = field(default_factory=list)

    @property
    def position(self) -> Point2:
        return self.pose.position

    def unexplored(self, min_width: float = 0.0) -> list[int]:
        return [i for i, g in enumerate(self.gaps) if not g.explored and g.width > min_width]


@dataclass
class NavGraph:
    nodes: list[NavNode] = field(default_factory=list)
    current_node: Optional[int] = None
    cost_table: dict[int, float] = field(default_factory=dict)
    predecessor: dict[int, Optional[int]] = field(default_factory=dict)
    # "travel" edges come from driving node to node, "neighbour" edges from rule C
    edge_kinds: dict[tuple[int, int], str] = field(default_factory=dict)

    def node(self, node_id: int) -> NavNode:
        if not 0 <= node_id < len(self.nodes):
            raise NavigationError(f"unknown node {node_id}")
        return self.nodes[node_id]

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for n in self.nodes:
            for m, length in sorted(n.neighbours.items()):
                if n.id < m:
                    out.append((n.id, m, length))
        return out

    def connect(self, a: int, b: int, kind: str) -> bool:
        if a == b:
            return False
        na, nb = self.node(a), self.node(b)
        if b in na.neighbours:
            return False
        length = na.position.distance_to(nb.position)
        if not length > 0:
            return False
        na.neighbours[b] = length
        nb.neighbours[a] = length
        self.edge_kinds[(min(a, b), max(a, b))] = kind
        return True

    def unexplored_count(self) -> int:
        return sum(1 for n in self.nodes for g in n.gaps if not g.explored)


@dataclass
class Target:
    node_id: int
    gap_index: Optional[int]
    waypoints: list[Point2]
    path: list[int] = field(default_factory=list)
    cost: float = 0.0

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("a target needs at least one waypoint")


@dataclass
class NeighbourUpdate:
    explored: list[tuple[int, int]] = field(default_factory=list)
    new_edges: list[tuple[int, int]] = field(default_factory=list)


def add_node(graph: NavGraph, pose: Pose, gaps: Sequence[GapDescriptor],
             sweep: Optional[Sweep] = None, walls: Sequence[WallDescriptor] = (),
             link_to: Optional[int] = None) -> int:
    """Append a node and link it to the node the agent arrived from.

    ``link_to`` defaults to the most recently created node.
    """
    node_id = len(graph.nodes)
    for g in gaps:
        g.explored = False
    graph.nodes.append(NavNode(node_id, pose, list(gaps), {}, sweep, list(walls)))
    if node_id > 0:
        prev = node_id - 1 if link_to is None else link_to
        graph.connect(prev, node_id, "travel")
    return node_id


def _chord_segment(g: GapDescriptor) -> Optional[Segment2]:
    if g.left == g.right:
        return None
    return Segment2(g.left, g.right)


def _wall_chords(node: NavNode) -> np.ndarray:
    rows = []
    for w in node.walls:
        pts = w.points
        for p, q in zip(pts[:-1], pts[1:]):
            if 0 < p.distance_to(q) <= WALL_LINK_DISTANCE:
                rows.append((p.x, p.y, q.x, q.y))
    return np.asarray(rows, dtype=float).reshape(-1, 4)


def _free_radius(sweep: Sweep, deg: np.ndarray) -> np.ndarray:
    """Observed free distance along the given slots (three-slot minimum, 0 outside the arc)."""
    out = np.full(deg.shape, np.inf)
    for off in (-1, 0, 1):
        d = (deg + off) % N_DEGREES
        r = sweep.ranges[d]
        r = np.where(np.isfinite(r), r, sweep.max_range)
        r = np.where(sweep.in_arc[d], r, 0.0)
        out = np.minimum(out, r)
    return out


def visible_free(node: NavNode, pts: np.ndarray, slack: float = 0.0) -> np.ndarray:
    """Which points lie in the region the node's sweep observed as empty."""
    if node.sweep is None:
        return np.zeros(len(pts), dtype=bool)
    p = node.pose
    v = pts - np.array([p.x, p.y])
    dist = np.hypot(v[:, 0], v[:, 1])
    rel = np.degrees(np.arctan2(v[:, 1], v[:, 0]) - p.heading)
    deg = np.mod(np.rint(rel), N_DEGREES).astype(int)
    return (dist < 1e-9) | (dist < _free_radius(node.sweep, deg) - slack)


def join_is_clear(a: NavNode, b: NavNode, agent_radius: float, margin: float) -> bool:
    """Both sweeps together show the straight join free, with clearance."""
    pa = np.array([a.position.x, a.position.y])
    pb = np.array([b.position.x, b.position.y])
    length = float(np.hypot(*(pb - pa)))
    for n in (a, b):
        if segment_intersects_any(pa, pb, _wall_chords(n)):
            return False
    hits = [n.sweep.points_array() for n in (a, b) if n.sweep is not None]
    if hits:
        hits = np.vstack(hits)
        # never demand more clearance than the endpoints themselves have
        need = min(agent_radius + margin,
                   segment_point_clearance(pa, pa, hits), segment_point_clearance(pb, pb, hits))
        if segment_point_clearance(pa, pb, hits) < need - 1e-9:
            return False
    k = max(2, int(math.ceil(length / JOIN_SAMPLE_STEP)) + 1)
    samples = pa + np.linspace(0.0, 1.0, k)[:, None] * (pb - pa)
    seen = visible_free(a, samples) | visible_free(b, samples)
    return bool(seen.all())


def identify_neighbours(graph: NavGraph, new_node: int, scan_range: float, agent_diameter: float,
                        margin: float = 0.1) -> NeighbourUpdate:
    """Apply the three neighbour rules between ``new_node`` and every other node.

    A: only pairs closer than ``2 * scan_range`` are considered.
    B: gaps of either node whose chord crosses the join are marked explored.
    C: if every crossed gap is wider than the agent and the join is clear,
       the two nodes become neighbours.
    """
    q = graph.node(new_node)
    update = NeighbourUpdate()
    for p in graph.nodes:
        if p.id == new_node:
            continue
        dist = p.position.distance_to(q.position)
        if not dist < 2.0 * scan_range or dist == 0.0:
            continue
        join = Segment2(p.position, q.position)
        crossed = []
        for node in (p, q):
            for i, g in enumerate(node.gaps):
                chord = _chord_segment(g)
                if chord is not None and segments_intersect(chord, join):
                    crossed.append((node.id, i))
        for nid, i in crossed:
            g = graph.nodes[nid].gaps[i]
            if not g.explored:
                g.explored = True
                update.explored.append((nid, i))
        if new_node in p.neighbours:
            continue
        if any(graph.nodes[nid].gaps[i].width <= agent_diameter for nid, i in crossed):
            continue
        if p.sweep is None or q.sweep is None:
            # geometry-only graphs: a wide crossed gap is the only evidence of passage
            ok = bool(crossed)
        else:
            ok = join_is_clear(p, q, agent_diameter / 2.0, margin)
        if ok and graph.connect(p.id, q.id, "neighbour"):
            update.new_edges.append((min(p.id, q.id), max(p.id, q.id)))
    return update


def frontier_points(node: NavNode, gap: GapDescriptor, gap_threshold: float,
                    depth: float) -> np.ndarray:
    """Points just beyond the sensed region, one per gap degree still open there."""
    if node.sweep is None:
        return np.zeros((0, 2))
    p = node.pose
    degs = (gap.start_degree + np.arange(gap.n_degrees)) % N_DEGREES
    r = node.sweep.ranges[degs]
    reach = gap_threshold + depth
    open_ = ~np.isfinite(r) | (r > reach)
    b = p.heading + np.radians(degs[open_])
    return np.column_stack([p.x + reach * np.cos(b), p.y + reach * np.sin(b)])


def prune_observed_gaps(graph: NavGraph, new_node: int, gap_threshold: float,
                        depth: float = 0.25, slack: float = 0.05) -> list[tuple[int, int]]:
    """Mark gaps explored when another node's sweep already saw past their frontier.

    Only pairs involving ``new_node`` are checked, since nothing else changed.
    """
    q = graph.node(new_node)
    marked = []

    def covered(owner: NavNode, g: GapDescriptor, others: Iterable[NavNode]) -> bool:
        pts = frontier_points(owner, g, gap_threshold, depth)
        if len(pts) == 0:
            return True
        seen = np.zeros(len(pts), dtype=bool)
        for o in others:
            if o.id == owner.id or o.sweep is None:
                continue
            near = np.hypot(pts[:, 0] - o.position.x, pts[:, 1] - o.position.y) <= gap_threshold
            seen |= near & visible_free(o, pts, slack)
            if seen.all():
                return True
        return False

    for i, g in enumerate(q.gaps):
        if not g.explored and covered(q, g, graph.nodes):
            g.explored = True
            marked.append((q.id, i))
    for p in graph.nodes:
        if p.id == new_node:
            continue
        for i, g in enumerate(p.gaps):
            if not g.explored and covered(p, g, graph.nodes):
                g.explored = True
                marked.append((p.id, i))
    return marked


def dijkstra(graph: NavGraph, source: int) -> tuple[dict[int, float], dict[int, Optional[int]]]:
    cost = {n.id: math.inf for n in graph.nodes}
    pred: dict[int, Optional[int]] = {n.id: None for n in graph.nodes}
    cost[source] = 0.0
    heap = [(0.0, source)]
    done = set()
    while heap:
        c, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in sorted(graph.nodes[u].neighbours.items()):
            nc = c + w
            if nc < cost[v]:
                cost[v] = nc
                pred[v] = u
                heapq.heappush(heap, (nc, v))
    return cost, pred


def update_cost_table(graph: NavGraph) -> dict[int, float]:
    if graph.current_node is None:
        raise NavigationError("current node not set")
    graph.cost_table, graph.predecessor = dijkstra(graph, graph.current_node)
    return graph.cost_table


def shortest_path(graph: NavGraph, target: int) -> list[int]:
    """Node chain from the current node to ``target`` (inclusive) per the last cost update."""
    if not math.isfinite(graph.cost_table.get(target, math.inf)):
        raise NavigationError(f"node {target} is unreachable")
    chain = [target]
    while chain[-1] != graph.current_node:
        prev = graph.predecessor[chain[-1]]
        if prev is None:
            raise NavigationError("predecessor chain broken; refresh the cost table")
        chain.append(prev)
    return chain[::-1]


def select_target(graph: NavGraph, agent_diameter: float,
                  strategy: Strategy = "min-gap") -> Optional[Target]:
    """Pick the cheapest node with a traversable unexplored gap, then a gap in it.

    ``min-gap`` takes the narrowest qualifying gap, ``max-gap`` the widest.
    Returns None when no qualifying gap is left, i.e. exploration is complete.
    """
    if strategy not in ("min-gap", "max-gap"):
        raise ValueError(f"unknown strategy {strategy!r}")
    best = None
    for n in graph.nodes:
        cost = graph.cost_table.get(n.id, math.inf)
        if not math.isfinite(cost) or not n.unexplored(agent_diameter):
            continue
        if best is None or cost < best[0]:
            best = (cost, n.id)
    if best is None:
        return None
    cost, nid = best
    node = graph.nodes[nid]
    cands = node.unexplored(agent_diameter)
    if strategy == "min-gap":
        gi = min(cands, key=lambda i: (node.gaps[i].width, i))
    else:
        gi = min(cands, key=lambda i: (-node.gaps[i].width, i))
    chain = shortest_path(graph, nid)
    waypoints = [graph.nodes[k].position for k in chain[1:]] + [node.gaps[gi].centroid]
    return Target(nid, gi, waypoints, chain, cost)


def mark_gap_explored(graph: NavGraph, node: int, gap_index: int) -> None:
    n = graph.node(node)
    if not 0 <= gap_index < len(n.gaps):
        raise NavigationError(f"node {node} has no gap {gap_index}")
    n.gaps[gap_index].explored = True


def _clear_length(start: np.ndarray, u: np.ndarray, hits: np.ndarray, need: float) -> float:
    """Longest straight run from ``start`` along unit ``u`` staying ``need`` away from every hit."""
    rel = hits - start
    t = rel @ u
    d2 = np.einsum("ij,ij->i", rel, rel) - t * t
    blocking = (d2 < need * need) & (t > 0.0)
    if not blocking.any():
        return math.inf
    back = np.sqrt(np.maximum(need * need - d2[blocking], 0.0))
    return float(max(0.0, (t[blocking] - back).min()))


def plan_approach(node: NavNode, gap: GapDescriptor, agent_radius: float, margin: float,
                  min_advance: float = 0.3, step: float = 0.05) -> Optional[Point2]:
    """Straight-line goal toward a gap that the node's own sweep shows as safe.

    Tries the bearing of the centroid, every bearing inside the gap and a fan
    around the centroid bearing; keeps the reachable end point closest to the
    centroid. Returns None when no bearing allows ``min_advance`` metres with
    clearance ``agent_radius + margin``.
    """
    start = np.array([node.position.x, node.position.y])
    goal = np.array([gap.centroid.x, gap.centroid.y])
    full = float(np.hypot(*(goal - start)))
    if full < 1e-9:
        return None
    hits = node.sweep.points_array() if node.sweep is not None else np.zeros((0, 2))
    if len(hits):
        need = min(agent_radius + margin, float(np.hypot(*(hits - start).T).min()) - 1e-9)
    else:
        need = agent_radius + margin
    base = math.atan2(goal[1] - start[1], goal[0] - start[0])
    degs = (gap.start_degree + np.arange(gap.n_degrees)) % N_DEGREES
    bearings = [base] + [base + math.radians(k) for k in range(-45, 50, 5) if k] + \
        [node.pose.heading + math.radians(int(d)) for d in degs]
    best, best_score = None, math.inf
    for b in bearings:
        u = np.array([math.cos(b), math.sin(b)])
        s = min(full, _clear_length(start, u, hits, need))
        s = math.floor(s / step + 1e-9) * step if s < full else s
        while s >= min_advance - 1e-12:
            end = start + s * u
            if node.sweep is None or visible_free(node, end[None, :])[0]:
                break
            s -= step
        if s < min_advance - 1e-12:
            continue
        score = float(np.hypot(*(end - goal)))
        if score < best_score - 1e-12:
            best, best_score = end, score
    if best is None:
        return None
    return Point2(float(best[0]), float(best[1]))


def dump_graph(graph: NavGraph) -> str:
    lines = []
    for n in graph.nodes:
        lines.append(f"node {n.id} {n.pose.x!r} {n.pose.y!r} {n.pose.heading!r}")
    for a, b, length in graph.edges():
        lines.append(f"edge {a} {b} {length!r}")
    for n in graph.nodes:
        for i, g in enumerate(n.gaps):
            lines.append(f"gap {n.id} {i} {g.width!r} {g.centroid.x!r} {g.centroid.y!r} {str(g.explored).lower()}")
    return "\n".join(lines) + "\n"
