"""Embedded planar graphs on the sphere: rotation systems, faces, location.

Vertices carry sphere positions (None = infinity) and a dynamical kind;
edges carry polylines whose endpoints match their vertices (tails of
edges incident to infinity stop at a large-|z| point and are flagged by
the vertex itself).  Faces are traced from the rotation system: darts
are (edge, orientation), the successor of a dart is the
counterclockwise-next dart at its head after the twin, and each orbit is
one face traversed with the face on its left.

Point location uses winding numbers in a Moebius chart anchored at a
representative point of a different face, which is exact on the sphere:
a face's boundary walk winds +-1 around interior points and 0 elsewhere
whenever the chart base lies outside the face closure.
"""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from newton_atlas.curves import winding_in_chart, point_polyline_distance
from newton_atlas.sphere import chordal, embed_r3

VERTEX_KINDS = ("root", "infinity", "prepole", "prefixed", "auxiliary")


class EmbeddingViolation(RuntimeError):
    pass


@dataclass
class Vertex:
    id: int
    position: complex | None
    kind: str
    level: int = 0

    def is_infinity(self) -> bool:
        return self.position is None


@dataclass
class Edge:
    id: int
    v0: int
    v1: int
    points: np.ndarray
    parent: int | None = None      # provenance: parent edge in the lifted graph
    lift_depth: int = 0
    tag: str = ""

    def oriented(self, end: int) -> np.ndarray:
        return self.points if end == 0 else self.points[::-1]

    def endpoints(self) -> tuple[int, int]:
        return (self.v0, self.v1)


@dataclass
class Face:
    id: int
    darts: list            # [(edge_id, end), ...] traversal order, face on left
    rep: complex | None = None

    def walk_length(self) -> int:
        return len(self.darts)


class PlanarGraph:
    def __init__(self, level: int = 0, name: str = ""):
        self.level = level
        self.name = name
        self.vertices: dict[int, Vertex] = {}
        self.edges: dict[int, Edge] = {}
        self._vid = 0
        self._eid = 0
        self._faces: list[Face] | None = None
        self._rotation: dict[int, list] | None = None
        self._walks: dict[int, list] = {}
        self._kd = None
        self._kd_meta = None

    # -- construction -------------------------------------------------------

    def add_vertex(self, position, kind: str, level: int = 0) -> int:
        assert kind in VERTEX_KINDS
        vid = self._vid
        self._vid += 1
        self.vertices[vid] = Vertex(vid, position, kind, level)
        self._reset_topology_caches()
        idx = getattr(self, "_pos_idx", None)
        if idx is not None:
            idx.setdefault(self._pos_key(position), []).append(vid)
        return vid

    def add_edge(self, v0: int, v1: int, points: np.ndarray,
                 parent: int | None = None, lift_depth: int = 0,
                 tag: str = "") -> int:
        eid = self._eid
        self._eid += 1
        pts = np.asarray(points, dtype=complex)
        if len(pts) < 2:
            raise ValueError("edge polyline needs at least two points")
        self.edges[eid] = Edge(eid, v0, v1, pts, parent, lift_depth, tag)
        self._reset_topology_caches()
        return eid

    def _reset_topology_caches(self):
        self._faces = None
        self._rotation = None
        self._walks = {}
        self._kd = None

    def _invalidate(self):
        self._reset_topology_caches()
        self._pos_idx = None

    # -- basic queries -------------------------------------------------------

    @staticmethod
    def _pos_key(z):
        if z is None:
            return ("inf",)
        if abs(z) <= 2.0:
            return ("z", round(z.real, 5), round(z.imag, 5))
        u = 1.0 / z
        return ("u", round(u.real, 5), round(u.imag, 5))

    def _position_index(self) -> dict:
        if getattr(self, "_pos_idx", None) is None:
            idx: dict = {}
            for v in self.vertices.values():
                idx.setdefault(self._pos_key(v.position), []).append(v.id)
            self._pos_idx = idx
        return self._pos_idx

    def vertex_by_position(self, z, tol: float = 1e-7) -> int | None:
        idx = self._position_index()
        key = self._pos_key(z)
        cands = []
        if key[0] == "inf":
            cands = idx.get(key, [])
        else:
            tag, kr, ki = key
            h = 1e-5
            for dr in (-h, 0.0, h):
                for di in (-h, 0.0, h):
                    cands.extend(idx.get((tag, round(kr + dr, 5),
                                          round(ki + di, 5)), []))
        best, best_d = None, tol
        for vid in cands:
            d = chordal(self.vertices[vid].position, z)
            if d < best_d:
                best, best_d = vid, d
        return best

    def infinity_vertex(self) -> int:
        for v in self.vertices.values():
            if v.is_infinity():
                return v.id
        raise KeyError("graph has no infinity vertex")

    def incident_darts(self, vid: int) -> list:
        out = []
        for e in self.edges.values():
            if e.v0 == vid:
                out.append((e.id, 0))
            if e.v1 == vid:
                out.append((e.id, 1))
        return out

    def degree(self, vid: int) -> int:
        return len(self.incident_darts(vid))

    def edge_count(self) -> int:
        return len(self.edges)

    def vertex_count(self) -> int:
        return len(self.vertices)

    # -- rotation system ------------------------------------------------------

    def _outgoing_angle(self, eid: int, end: int) -> float:
        e = self.edges[eid]
        v = self.vertices[e.v0 if end == 0 else e.v1]
        pts = e.oriented(end)
        if v.is_infinity():
            u = 1.0 / pts[0]
            return float(cmath.phase(u))
        # first step away from the vertex
        w = pts[1] - pts[0]
        if abs(v.position) > 1e3:
            # near-infinity auxiliary vertex: measure in the 1/z chart
            u0, u1 = 1.0 / pts[0], 1.0 / pts[1]
            w = u1 - u0
        if w == 0 and len(pts) > 2:
            w = pts[2] - pts[0]
        return float(cmath.phase(w))

    def rotation(self) -> dict[int, list]:
        if self._rotation is None:
            rot = {}
            for vid in self.vertices:
                darts = self.incident_darts(vid)
                darts.sort(key=lambda d: (self._outgoing_angle(*d), d[0], d[1]))
                rot[vid] = darts
            self._rotation = rot
        return self._rotation

    # -- faces ----------------------------------------------------------------

    def _head(self, dart) -> int:
        e = self.edges[dart[0]]
        return e.v1 if dart[1] == 0 else e.v0

    def _twin(self, dart):
        return (dart[0], 1 - dart[1])

    def _next_face_dart(self, dart):
        h = self._head(dart)
        rot = self.rotation()[h]
        tw = self._twin(dart)
        i = rot.index(tw)
        return rot[(i + 1) % len(rot)]

    def faces(self) -> list[Face]:
        if self._faces is not None:
            return self._faces
        seen = set()
        orbits = []
        all_darts = sorted(
            [(e.id, end) for e in self.edges.values() for end in (0, 1)])
        for d0 in all_darts:
            if d0 in seen:
                continue
            orbit = []
            d = d0
            while True:
                orbit.append(d)
                seen.add(d)
                d = self._next_face_dart(d)
                if d == d0:
                    break
                if len(orbit) > 4 * len(all_darts):
                    raise EmbeddingViolation("face walk does not close")
            orbits.append(orbit)
        if sum(len(o) for o in orbits) != 2 * len(self.edges):
            raise EmbeddingViolation("face walks do not partition the darts")
        faces = [Face(i, orbit) for i, orbit in enumerate(orbits)]
        self._faces = faces
        self._assign_reps()
        return self._faces

    def euler_characteristic(self) -> int:
        return self.vertex_count() - self.edge_count() + len(self.faces())

    def walk_points(self, face: Face) -> list:
        """Closed boundary walk as sphere points (None marks infinity)."""
        if face.id in self._walks:
            return self._walks[face.id]
        out = []
        for dart in face.darts:
            e = self.edges[dart[0]]
            pts = e.oriented(dart[1])
            head = self.vertices[self._head(dart)]
            out.extend(pts[:-1].tolist())
            if head.is_infinity():
                out.append(pts[-1])
                out.append(None)
        self._walks[face.id] = out
        return out

    def _graph_kd(self):
        if self._kd is None:
            pts = []
            for e in self.edges.values():
                pts.append(e.points)
            allpts = np.concatenate(pts)
            self._kd = cKDTree(embed_r3(allpts))
            self._kd_meta = allpts
        return self._kd

    def distance_to_graph(self, z) -> float:
        """Chordal distance to the sampled polylines (sampling-accurate)."""
        from newton_atlas.sphere import embed_point
        kd = self._graph_kd()
        d, _ = kd.query(embed_point(z))
        return float(d)

    def _assign_reps(self):
        faces = self._faces
        if len(faces) == 1:
            # complement of a tree: any off-graph point represents it
            faces[0].rep = self._off_graph_point()
            return
        for f in faces:
            f.rep = self._rep_candidate(f)
        # validate each rep by winding against a neighbouring face's rep
        for f in faces:
            base = self._base_for(f)
            w = 0
            if f.rep is not None and base is not None:
                w = winding_in_chart(self.walk_points(f), base, f.rep)
            if w == 0:
                # retry with shrinking offsets on every dart
                got = self._rep_candidate(f, thorough=True)
                if got is not None and base is not None:
                    f.rep = got
                    w = winding_in_chart(self.walk_points(f), base, f.rep)
            if w == 0:
                raise EmbeddingViolation(
                    f"no valid representative point for face {f.id}")

    def _off_graph_point(self) -> complex:
        e = next(iter(self.edges.values()))
        pts = e.points
        m = len(pts) // 2
        t = pts[m + 1] - pts[m]
        t = t / abs(t)
        for eps in (1e-2, 1e-3, 1e-4):
            cand = pts[m] + 1j * t * eps
            if self.distance_to_graph(cand) > eps / 3:
                return cand
        raise EmbeddingViolation("could not find an off-graph point")

    def _rep_candidate(self, f: Face, thorough: bool = False):
        darts = f.darts if thorough else f.darts[:8]
        for dart in darts:
            e = self.edges[dart[0]]
            pts = e.oriented(dart[1])
            lengths = np.abs(np.diff(pts))
            if len(pts) < 3:
                continue
            m = int(np.argmax(np.cumsum(lengths) >= 0.5 * np.sum(lengths)))
            m = max(1, min(m, len(pts) - 2))
            p = pts[m]
            t = pts[m + 1] - pts[m]
            if t == 0:
                continue
            use_chart = abs(p) > 1e3
            if use_chart:
                u0, u1 = 1.0 / pts[m], 1.0 / pts[m + 1]
                t_u = u1 - u0
                t_u /= abs(t_u)
                for eps in (1e-2, 1e-3, 1e-4, 1e-5):
                    cand_u = u0 + 1j * t_u * eps * abs(u0 if u0 != 0 else 1e-3)
                    if cand_u == 0:
                        continue
                    cand = 1.0 / cand_u
                    if self.distance_to_graph(cand) > 1e-9:
                        got = self._validated_rep(f, cand)
                        if got is not None:
                            return got
            else:
                t = t / abs(t)
                step = float(np.median(lengths[max(0, m - 3):m + 3])) or 1e-3
                for eps_scale in (2.0, 0.5, 0.1, 0.02, 0.004):
                    eps = min(step * eps_scale, 0.05)
                    cand = p + 1j * t * eps
                    if self.distance_to_graph(cand) > eps / 4:
                        got = self._validated_rep(f, cand)
                        if got is not None:
                            return got
        return None

    def _validated_rep(self, f: Face, cand):
        base = self._base_for(f, avoid=cand)
        if base is None:
            return cand
        try:
            w = winding_in_chart(self.walk_points(f), base, cand)
        except ValueError:
            return None
        return cand if w != 0 else None

    def _base_for(self, f: Face, avoid=None):
        """A point outside the closure of face f: another face's candidate."""
        for g in self._faces:
            if g.id != f.id and g.rep is not None:
                return g.rep
        # fall back: any off-graph point far from `avoid`
        return None

    # -- point location --------------------------------------------------------

    def locate(self, q) -> int:
        """Face id containing the sphere point q (must be off the graph)."""
        faces = self.faces()
        if len(faces) == 1:
            return faces[0].id
        if self.distance_to_graph(q) < 1e-11:
            raise ValueError("query point lies on the graph")
        # chart base: representative of the face farthest from q
        base_face = max(faces, key=lambda f: chordal(f.rep, q))
        for f in faces:
            if f.id == base_face.id:
                continue
            if chordal(f.rep, q) < 1e-13:
                return f.id
            try:
                w = winding_in_chart(self.walk_points(f), base_face.rep, q)
            except ValueError:
                continue
            if w != 0:
                return f.id
        return base_face.id

    def faces_at_vertex(self, vid: int) -> list[int]:
        out = []
        for f in self.faces():
            tails = {self.edges[d[0]].v0 if d[1] == 0 else self.edges[d[0]].v1
                     for d in f.darts}
            if vid in tails:
                out.append(f.id)
        return out

    # -- validation -------------------------------------------------------------

    def check_rotation_planarity(self):
        self.faces()  # raises EmbeddingViolation when orbits misbehave

    def check_euler(self):
        chi = self.euler_characteristic()
        if chi != 2:
            raise EmbeddingViolation(f"Euler characteristic {chi} != 2")

    def check_connected(self):
        if not self.vertices:
            return
        adj: dict[int, set] = {v: set() for v in self.vertices}
        for e in self.edges.values():
            adj[e.v0].add(e.v1)
            adj[e.v1].add(e.v0)
        seen = set()
        stack = [next(iter(self.vertices))]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adj[v] - seen)
        if len(seen) != len(self.vertices):
            raise EmbeddingViolation("graph is not connected")

    def check_edge_crossings(self, eps: float, max_pairs: int = 300000):
        """Pairwise polyline crossing test away from shared vertices."""
        from newton_atlas.curves import segment_crossings
        ids = sorted(self.edges)
        pairs = 0
        for i, ei in enumerate(ids):
            for ej in ids[i + 1:]:
                pairs += 1
                if pairs > max_pairs:
                    return
                a, b = self.edges[ei], self.edges[ej]
                shared = {a.v0, a.v1} & {b.v0, b.v1}
                hits = segment_crossings(a.points, b.points)
                for (_, _, _, _, pt) in hits:
                    if all(chordal(pt, self.vertices[s].position) > 10 * eps
                           for s in shared):
                        raise EmbeddingViolation(
                            f"edges {ei} and {ej} cross at {pt}")

    # -- serialization ------------------------------------------------------------

    def to_json_dict(self) -> dict:
        verts = []
        for vid in sorted(self.vertices):
            v = self.vertices[vid]
            verts.append({
                "id": v.id,
                "kind": v.kind,
                "level": v.level,
                "position": None if v.position is None else
                    [v.position.real, v.position.imag],
            })
        edges = []
        for eid in sorted(self.edges):
            e = self.edges[eid]
            edges.append({
                "id": e.id,
                "v0": e.v0,
                "v1": e.v1,
                "parent": e.parent,
                "lift_depth": e.lift_depth,
                "tag": e.tag,
                "points": [[p.real, p.imag] for p in e.points.tolist()],
            })
        return {"level": self.level, "name": self.name,
                "vertices": verts, "edges": edges}

    @classmethod
    def from_json_dict(cls, d: dict) -> "PlanarGraph":
        g = cls(level=d["level"], name=d.get("name", ""))
        for v in d["vertices"]:
            pos = None if v["position"] is None else complex(*v["position"])
            g.vertices[v["id"]] = Vertex(v["id"], pos, v["kind"], v["level"])
            g._vid = max(g._vid, v["id"] + 1)
        for e in d["edges"]:
            pts = np.array([complex(x, y) for x, y in e["points"]])
            g.edges[e["id"]] = Edge(e["id"], e["v0"], e["v1"], pts,
                                    e["parent"], e["lift_depth"], e.get("tag", ""))
            g._eid = max(g._eid, e["id"] + 1)
        return g

    def to_dot(self) -> str:
        lines = [f'graph "{self.name or "newton-graph"}" {{']
        rot = self.rotation()
        for vid in sorted(self.vertices):
            v = self.vertices[vid]
            order = ",".join(f"{d[0]}:{d[1]}" for d in rot[vid])
            lines.append(
                f'  v{vid} [kind="{v.kind}" level="{v.level}" rotation="{order}"];')
        for eid in sorted(self.edges):
            e = self.edges[eid]
            attrs = f'id="{eid}" lift_depth="{e.lift_depth}"'
            if e.parent is not None:
                attrs += f' parent="{e.parent}"'
            if e.tag:
                attrs += f' tag="{e.tag}"'
            lines.append(f"  v{e.v0} -- v{e.v1} [{attrs}];")
        lines.append("}")
        return "\n".join(lines) + "\n"
