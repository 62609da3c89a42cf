"""Inverse-branch curve lifting and graph pullbacks.

Lifting walks a parent polyline point by point, solving N(w) = p with a
Newton corrector seeded by continuation.  Sampling is driven by the lift
itself: parent steps are chord-subdivided until the lifted polyline obeys
the step and turn budgets, so lifts through strongly-distorting regions
(near poles, near critical points) stay faithful.  Endpoints snap to
precomputed preimages of the parent endpoint vertices.

A graph pullback lifts every edge once per preimage of a generic interior
anchor and keeps the connected component containing infinity.  Two modes:

  extend -- Newton-graph lineage: the pullback of Delta_n is written into
            a copy that keeps every existing id, so Delta_n is a subgraph
            of Delta_{n+1} by construction.  Lifts that fall outside the
            infinity component are remembered (pending) and reattached at
            deeper levels if the component grows to meet them.
  fresh  -- augmented/truncated lineages (not nested level to level): a
            brand-new graph with provenance links into its parent.
"""

from __future__ import annotations

import cmath

import numpy as np

from newton_atlas.newton import NewtonMapDescriptor
from newton_atlas.planar import EmbeddingViolation, PlanarGraph
from newton_atlas.poly import aberth_roots
from newton_atlas.rational import PreimageSolver
from newton_atlas.sphere import chordal
from newton_atlas.curves import decimate, point_polyline_distance
from newton_atlas.tolerances import Tolerances, DEFAULT_TOLERANCES

SNAP_RATIO = 3.0
STORE_TOL = 2e-7       # polyline decimation budget (chordal)
LIFT_MAX_TURN = 0.25   # radians between consecutive lifted segments
BRANCH_JUMP = 0.25     # chordal continuity guard


class CriticalValueOnCurve(RuntimeError):
    pass


class LiftDiverged(RuntimeError):
    pass


def _turn(a: complex, b: complex, c: complex) -> float:
    if max(abs(a), abs(b), abs(c)) > 1e3:
        a = 1.0 / a if a != 0 else 1e300
        b = 1.0 / b if b != 0 else 1e300
        c = 1.0 / c if c != 0 else 1e300
    v1, v2 = b - a, c - b
    if v1 == 0 or v2 == 0:
        return 0.0
    return abs(cmath.phase(v2 / v1))


class Lifter:
    def __init__(self, n: NewtonMapDescriptor, tol: Tolerances = DEFAULT_TOLERANCES):
        self.n = n
        self.tol = tol
        self.solver = PreimageSolver(n.map)
        self.crit_values = [n.map(c) for c, _ in n.critical_points]
        p, q = n.map.numerator, n.map.denominator
        d = n.map.degree
        self._pc = np.array(p.coefficients, dtype=complex)
        qc = np.array(q.coefficients, dtype=complex)
        self._qc = np.concatenate([qc, np.zeros(d + 1 - len(qc), dtype=complex)])

    def _cv_distance(self, z) -> float:
        if not self.crit_values:
            return 4.0
        return min(chordal(z, v) for v in self.crit_values)

    def anchor_index(self, points: np.ndarray) -> int:
        """Interior polyline index farthest from the critical values."""
        lo, hi = 1, len(points) - 1
        idx = np.arange(lo, hi)
        if len(idx) == 0:
            raise ValueError("polyline too short for an interior anchor")
        best, best_d = int(idx[0]), -1.0
        step = max(1, len(idx) // 64)
        for i in idx[::step]:
            # keep anchors off critical values and away from infinity
            d = min(self._cv_distance(points[i]),
                    5.0 * chordal(points[i], None))
            if d > best_d:
                best, best_d = int(i), d
        if best_d < 10 * self.tol.lift_eps:
            raise CriticalValueOnCurve(
                "no interior anchor clears the critical values")
        return best

    def anchor_preimages(self, a: complex) -> list[complex]:
        """All d preimages of a generic (non-critical-value) point."""
        coeffs = self._pc - a * self._qc
        roots = aberth_roots(coeffs)
        # polish each root once against the full equation
        out = [self.solver.solve(a, r) for r in roots]
        out.sort(key=lambda z: (round(z.real, 10), round(z.imag, 10)))
        return out

    def check_interior_clear(self, points: np.ndarray):
        for z in points[1:-1]:
            if self._cv_distance(z) < self.tol.lift_eps:
                raise CriticalValueOnCurve(
                    f"interior point {z} lies on a critical value")

    def lift(self, points: np.ndarray, start_preimage: complex,
             anchor: int | None = None) -> np.ndarray:
        """Unique continuous lift of the polyline through the given
        preimage of its anchor point.  Returns the lifted polyline in the
        parent orientation with adaptive sampling (not yet decimated)."""
        self.check_interior_clear(points)
        if anchor is None:
            anchor = self.anchor_index(points)
        w0 = self.solver.solve(points[anchor], start_preimage)
        if self.solver.residual(w0, points[anchor]) > self.tol.lift_eps:
            raise LiftDiverged("anchor preimage did not converge")
        fwd = self._march(points, anchor, w0, +1)
        bwd = self._march(points, anchor, w0, -1)
        out = bwd[::-1] + [w0] + fwd
        return np.array(out, dtype=complex)

    def _march(self, points: np.ndarray, anchor: int, w0: complex,
               direction: int) -> list[complex]:
        out: list[complex] = []
        w_prev = w0
        w_prev2 = None
        j = anchor
        end = len(points) - 1 if direction > 0 else 0
        while j != end:
            j_next = j + direction
            segment = self._lift_segment(points[j], points[j_next],
                                         w_prev, w_prev2)
            out.extend(segment)
            w_prev2 = segment[-2] if len(segment) >= 2 else w_prev
            w_prev = segment[-1]
            j = j_next
        return out

    def _lift_segment(self, p0: complex, p1: complex, w_prev: complex,
                      w_prev2, depth: int = 0) -> list[complex]:
        """Lift the parent chord [p0, p1], subdividing until the lifted
        step obeys the step/turn budget.  Returns lifted points for the
        open-closed interval (p0, p1]."""
        seed = w_prev if w_prev2 is None else 2 * w_prev - w_prev2
        w = self.solver.solve(p1, seed)
        ok = self.solver.residual(w, p1) <= self.tol.lift_eps
        step_len = chordal(w, w_prev)
        if ok and step_len <= BRANCH_JUMP:
            small = step_len <= self.tol.ray_step
            gentle = True
            if w_prev2 is not None and small:
                gentle = _turn(w_prev2, w_prev, w) <= LIFT_MAX_TURN
            if small and gentle:
                return [w]
        if depth >= 16:
            if ok and step_len <= BRANCH_JUMP:
                return [w]
            raise LiftDiverged(f"lift stalled between {p0} and {p1}")
        mid = 0.5 * (p0 + p1)
        left = self._lift_segment(p0, mid, w_prev, w_prev2, depth + 1)
        w_mid = left[-1]
        w_mid2 = left[-2] if len(left) >= 2 else w_prev
        right = self._lift_segment(mid, p1, w_mid, w_mid2, depth + 1)
        return left + right

    def preimages_of_vertex(self, position) -> list[tuple[complex | None, int]]:
        pre = self.n.map.preimages(position)
        pre.sort(key=lambda t: (-np.inf, -np.inf) if t[0] is None
                 else (round(t[0].real, 10), round(t[0].imag, 10)))
        return pre


def _child_kind(kind: str, level: int) -> tuple[str, int]:
    if kind == "infinity":
        return ("prepole", 1)
    if kind == "prepole":
        return ("prepole", level + 1)
    if kind == "root":
        return ("prefixed", 1)
    if kind == "prefixed":
        return ("prefixed", level + 1)
    return ("auxiliary", level + 1)


def pullback_graph(n: NewtonMapDescriptor, graph: PlanarGraph,
                   mode: str = "extend",
                   tol: Tolerances = DEFAULT_TOLERANCES,
                   lifter: Lifter | None = None) -> PlanarGraph:
    """One pullback level: component of N^{-1}(graph) containing infinity."""
    assert mode in ("extend", "fresh")
    lifter = lifter or Lifter(n, tol)

    if mode == "extend":
        out = _copy_graph(graph)
    else:
        out = PlanarGraph(level=graph.level + 1, name=graph.name)
    out.level = graph.level + 1

    vertex_preimages: dict[int, list] = {}
    for vid in sorted(graph.vertices):
        vertex_preimages[vid] = lifter.preimages_of_vertex(
            graph.vertices[vid].position)

    def ensure_vertex(pos, parent_vertex) -> int:
        got = out.vertex_by_position(pos, tol=1e-8)
        if got is not None:
            return got
        kind, level = _child_kind(parent_vertex.kind, parent_vertex.level)
        if pos is None:
            kind, level = "infinity", 0
        return out.add_vertex(pos, kind, level)

    if mode == "extend":
        pending = dict(getattr(graph, "pending_lifts", {}))
        to_lift = sorted(
            {e.id for e in graph.edges.values() if e.lift_depth == graph.level}
            | set(pending))
    else:
        pending = {}
        to_lift = sorted(graph.edges)

    children_index: dict[int, list] = {}
    if mode == "extend":
        for e in out.edges.values():
            if e.parent is not None and e.parent != e.id:
                children_index.setdefault(e.parent, []).append(e)
        for e in out.edges.values():
            if e.parent == e.id:
                children_index.setdefault(e.id, []).append(e)

    staged = []  # (parent_edge, anchor_preimage, lifted_points)
    for fid in to_lift:
        f = graph.edges[fid]
        pts = f.points
        anchor = lifter.anchor_index(pts)
        pre_pts = lifter.anchor_preimages(pts[anchor])
        existing = children_index.get(f.id, [])
        for w in pre_pts:
            if any(point_polyline_distance(w, e.points) < 1e-4 for e in existing):
                continue
            lifted = lifter.lift(pts, w, anchor=anchor)
            staged.append((f, w, lifted))

    for f, w, lifted in staged:
        _attach_lift(out, graph, f, lifted, vertex_preimages, ensure_vertex,
                     lifter)

    dropped = _keep_component_of_infinity(out)
    if mode == "extend":
        new_pending: dict[int, bool] = {}
        for parent_id in dropped:
            new_pending[parent_id] = True
        out.pending_lifts = new_pending
    out._invalidate()
    return out


def _attach_lift(out: PlanarGraph, src: PlanarGraph, parent_edge,
                 lifted: np.ndarray, vertex_preimages, ensure_vertex,
                 lifter: Lifter):
    ends = []
    for end, idx in ((0, 0), (1, len(lifted) - 1)):
        pv_id = parent_edge.v0 if end == 0 else parent_edge.v1
        pv = src.vertices[pv_id]
        cand = vertex_preimages[pv_id]
        raw = lifted[idx]
        dists = [chordal(raw, c) for c, _ in cand]
        order = np.argsort(dists)
        best = int(order[0])
        if len(order) > 1:
            d0, d1 = dists[best], dists[int(order[1])]
            if d0 > 1e-7 and d1 < SNAP_RATIO * d0:
                raise EmbeddingViolation(
                    f"ambiguous endpoint snap lifting edge {parent_edge.id}: "
                    f"{d0} vs {d1}")
        pos = cand[best][0]
        vid = ensure_vertex(pos, pv)
        ends.append((vid, pos))

    pts = decimate(lifted, STORE_TOL)
    p0, p1 = ends[0][1], ends[1][1]
    if p0 is not None:
        pts = np.concatenate([[p0], pts[1:]])
    if p1 is not None:
        pts = np.concatenate([pts[:-1], [p1]])
    out.add_edge(ends[0][0], ends[1][0], pts,
                 parent=parent_edge.id,
                 lift_depth=parent_edge.lift_depth + 1,
                 tag=parent_edge.tag)


def _copy_graph(g: PlanarGraph) -> PlanarGraph:
    out = PlanarGraph(level=g.level, name=g.name)
    for vid in sorted(g.vertices):
        v = g.vertices[vid]
        out.vertices[vid] = type(v)(v.id, v.position, v.kind, v.level)
        out._vid = max(out._vid, vid + 1)
    for eid in sorted(g.edges):
        e = g.edges[eid]
        out.edges[eid] = type(e)(e.id, e.v0, e.v1, e.points.copy(),
                                 e.parent, e.lift_depth, e.tag)
        out._eid = max(out._eid, eid + 1)
    return out


def _keep_component_of_infinity(g: PlanarGraph) -> set[int]:
    """Drop everything outside the infinity component; return the parent
    ids of dropped edges (their lifts may reconnect at deeper levels)."""
    adj: dict[int, set] = {v: set() for v in g.vertices}
    for e in g.edges.values():
        adj[e.v0].add(e.v1)
        adj[e.v1].add(e.v0)
    try:
        start = g.infinity_vertex()
    except KeyError:
        return set()
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    dropped_parents = {e.parent for e in g.edges.values()
                       if (e.v0 not in seen or e.v1 not in seen)
                       and e.parent is not None}
    g.edges = {eid: e for eid, e in g.edges.items()
               if e.v0 in seen and e.v1 in seen}
    g.vertices = {vid: v for vid, v in g.vertices.items() if vid in seen}
    return dropped_parents
