"""
Faces of an embedded network, face weights, the directed dual network and
path weights as monomials in face weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .exprcore import ONE, RationalFunction, as_rf
from .geometry import Point, bulge, compare_directions, sub
from .network import BLACK, WHITE, Network, decompose_path, reachable_edges

__all__ = [
    "Face",
    "FaceSet",
    "FaceError",
    "DualEdge",
    "DualNetwork",
    "enumerate_faces",
    "face_weights",
    "dual_network",
    "face_bracket",
    "path_face_monomial",
    "GRAY",
]

GRAY = "gray"


class FaceError(ValueError):
    pass


@dataclass(frozen=True)
class Face:
    """Boundary walked with the face on the left; ``gamma`` is +1 along the edge."""

    id: str
    boundary: tuple[tuple[str, int], ...]
    arcs: tuple[str, ...]

    @property
    def bounded(self) -> bool:
        return not self.arcs


@dataclass(frozen=True, eq=False)
class FaceSet:
    faces: tuple[Face, ...]
    left: Mapping[str, str]
    right: Mapping[str, str | None]

    def face(self, fid: str) -> Face:
        return next(f for f in self.faces if f.id == fid)

    def ids(self) -> list[str]:
        return [f.id for f in self.faces]


def _arc_id(t: int) -> str:
    return f"~arc{t}"


def _is_arc(eid: str) -> bool:
    return eid.startswith("~arc")


def _darts(net: Network):
    """Half-edges with direction vectors; boundary arcs run b_t -> b_{t+1} outside the hull."""
    out: dict[str, list[tuple[Point, str, int]]] = {v: [] for v in net._idx()["pos"]}
    ends: dict[str, tuple[str, str]] = {}
    for e in net.edges:
        ends[e.id] = (e.tail, e.head)
        out[e.tail].append((sub(net.pos(e.head), net.pos(e.tail)), e.id, 1))
        out[e.head].append((sub(net.pos(e.tail), net.pos(e.head)), e.id, -1))
    n = net.n
    for t in range(1, n + 1):
        a, b = net.boundary_id(t), net.boundary_id(t % n + 1)
        pa, pb = net.pos(a), net.pos(b)
        mid = bulge(pa, pb)
        aid = _arc_id(t)
        ends[aid] = (a, b)
        out[a].append((sub(mid, pa), aid, 1))
        out[b].append((sub(mid, pb), aid, -1))
    return out, ends


def _sorted_ccw(items):
    from functools import cmp_to_key

    return sorted(items, key=cmp_to_key(lambda x, y: compare_directions(x[0], y[0])))


def enumerate_faces(net: Network) -> FaceSet:
    """Trace faces with the face on the left of each half-edge; drop the outer face."""
    bad = sorted(e.id for e in net.edges if e.id not in reachable_edges(net))
    if bad:
        raise FaceError("edges not on any source-to-sink path: " + ", ".join(bad))
    darts, ends = _darts(net)
    rot = {v: _sorted_ccw(lst) for v, lst in darts.items()}
    pos_in_rot = {}
    for v, lst in rot.items():
        for idx, (_, eid, s) in enumerate(lst):
            pos_in_rot[(v, eid, s)] = idx

    def head_of(eid: str, s: int) -> str:
        a, b = ends[eid]
        return b if s == 1 else a

    seen: set[tuple[str, int]] = set()
    order = [(eid, s) for eid in sorted(ends, key=_dart_order_key) for s in (1, -1)]
    traced: list[list[tuple[str, int]]] = []
    for start in order:
        if start in seen:
            continue
        walk = []
        cur = start
        while cur not in seen:
            seen.add(cur)
            walk.append(cur)
            eid, s = cur
            v = head_of(eid, s)
            lst = rot[v]
            idx = pos_in_rot[(v, eid, -s)]
            # next half-edge: first clockwise from the reversed one
            _, neid, ns = lst[(idx - 1) % len(lst)]
            cur = (neid, ns)
        if cur != start:
            raise FaceError("face traversal did not close; embedding is inconsistent")
        traced.append(walk)
    faces: list[Face] = []
    left: dict[str, str] = {}
    right: dict[str, str | None] = {}
    outer_found = False
    for walk in traced:
        if all(_is_arc(eid) and s == -1 for eid, s in walk):
            outer_found = True
            continue
        fid = f"F{len(faces) + 1}"
        bnd = tuple((eid, s) for eid, s in walk if not _is_arc(eid))
        arcs = tuple(eid for eid, s in walk if _is_arc(eid))
        if any(_is_arc(eid) and s == -1 for eid, s in walk):
            raise FaceError("boundary arc traversed clockwise inside the disk")
        faces.append(Face(fid, bnd, arcs))
        for eid, s in walk:
            if s == 1:
                left[eid] = fid
            else:
                right[eid] = fid
    if not outer_found:
        raise FaceError("outer face not found")
    for t in range(1, net.n + 1):
        right.setdefault(_arc_id(t), None)
    expected = len(net.edges) - len(net.internal) + 1
    if len(faces) != expected:
        raise FaceError(f"Euler count violated: {len(faces)} faces, expected {expected}")
    for e in net.edges:
        if left.get(e.id) is None or right.get(e.id) is None or left[e.id] == right[e.id]:
            raise FaceError(f"edge {e.id} does not separate two distinct faces")
    return FaceSet(tuple(faces), left, right)


def _dart_order_key(eid: str):
    return (_is_arc(eid), len(eid), eid)


# ---------------------------------------------------------------- face weights


def face_weights(net: Network, faces: FaceSet) -> dict[str, RationalFunction]:
    """y_f = prod of w_e^gamma_e over the boundary of f."""
    out = {}
    for f in faces.faces:
        y = ONE
        for eid, g in f.boundary:
            w = net.edge(eid).weight
            y = y * w if g == 1 else y / w
        out[f.id] = y
    return out


# ------------------------------------------------------------------ dual network


@dataclass(frozen=True)
class DualEdge:
    primal: str
    tail: str
    head: str
    weight: RationalFunction


@dataclass(frozen=True, eq=False)
class DualNetwork:
    faces: tuple[str, ...]
    edges: tuple[DualEdge, ...]


def _color(net: Network, vid: str) -> str:
    return GRAY if net.is_boundary(vid) else net.kind(vid)


def dual_network(net: Network, faces: FaceSet, alpha: object = "alpha", beta: object = "beta") -> DualNetwork:
    """One dual edge per bichromatic primal edge, weighted alpha - beta, alpha or -beta."""
    a, b = as_rf(alpha), as_rf(beta)
    out = []
    for e in net.edges:
        ct, ch = _color(net, e.tail), _color(net, e.head)
        if ct == ch:
            continue
        fl, fr = faces.left[e.id], faces.right[e.id]
        # white endpoint on the right of the dual edge, matching the flag bracket
        if ct == WHITE or ch == BLACK:
            tail, head = fl, fr
        else:
            tail, head = fr, fl
        colors = {ct, ch}
        if colors == {WHITE, BLACK}:
            w = a - b
        elif colors == {WHITE, GRAY}:
            w = a
        else:
            w = -b
        out.append(DualEdge(e.id, tail, head, w))
    return DualNetwork(tuple(f.id for f in faces.faces), tuple(out))


def face_bracket(dual: DualNetwork, f: str, fp: str) -> RationalFunction:
    """Coefficient c with {y_f, y_f'} = c y_f y_f'."""
    c = as_rf(0)
    for d in dual.edges:
        if d.tail == f and d.head == fp:
            c = c + d.weight
        elif d.tail == fp and d.head == f:
            c = c - d.weight
    return c


# ------------------------------------------------------- path weights via faces


def _left_region(faces: FaceSet, curve: Sequence[tuple[str, int]]) -> set[str]:
    """Faces on the left of a simple closed curve of half-edges, by flood fill."""
    barrier = {eid for eid, _ in curve}
    adj: dict[str, set[str]] = {f.id: set() for f in faces.faces}
    for eid, fl in faces.left.items():
        fr = faces.right.get(eid)
        if fr is None or eid in barrier:
            continue
        adj[fl].add(fr)
        adj[fr].add(fl)
    start = [faces.left[eid] if s == 1 else faces.right[eid] for eid, s in curve]
    region: set[str] = set()
    stack = [f for f in start if f is not None]
    while stack:
        f = stack.pop()
        if f in region:
            continue
        region.add(f)
        stack.extend(adj[f] - region)
    return region


def path_face_monomial(
    net: Network,
    faces: FaceSet,
    path: Sequence[str],
    y: Mapping[str, RationalFunction] | None = None,
) -> tuple[int, dict[str, int]]:
    """Signed face monomial of a path: (sign, exponent of each face weight).

    The path is loop-erased at the first repeated edge; each split-off cycle
    contributes a factor -1 and every simple piece contributes the product of
    the face weights on its left.
    """
    pieces = []
    rest = list(path)
    sign = 1
    while len(set(rest)) != len(rest):
        rest, cyc = decompose_path(rest)
        pieces.append(cyc)
        sign = -sign
    pieces.append(rest)
    exps: dict[str, int] = {}
    for piece in pieces:
        curve = [(eid, 1) for eid in piece]
        first, last = net.edge(piece[0]).tail, net.edge(piece[-1]).head
        if first != last:
            n = net.n
            t = net.label(last)
            while t != net.label(first):
                curve.append((_arc_id(t), 1))
                t = t % n + 1
        for fid in _left_region(faces, curve):
            exps[fid] = exps.get(fid, 0) + 1
    return sign, exps


def monomial_value(sign: int, exps: Mapping[str, int], y: Mapping[str, RationalFunction]) -> RationalFunction:
    out = as_rf(sign)
    for fid in sorted(exps):
        out = out * y[fid] ** exps[fid]
    return out
