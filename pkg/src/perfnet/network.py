"""
Perfect planar networks in a disk: data model, validation, path weights,
gauge transformations, flag variables and named builders.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from gmpy2 import mpq

from .exprcore import ONE, RationalFunction, as_rf, parse_expr, var
from .geometry import (
    Point,
    bulge,
    circle_point_at,
    concordance,
    fmt_coord,
    is_strictly_convex_ccw,
    parse_point,
    segments_conflict,
    sort_ccw,
    strictly_inside_convex,
    sub,
)

if TYPE_CHECKING:
    from .poisson import BracketSpec

SOURCE, SINK = "source", "sink"
WHITE, BLACK = "white", "black"


@dataclass(frozen=True)
class BoundaryVertex:
    id: str
    role: str
    pos: Point


@dataclass(frozen=True)
class InternalVertex:
    id: str
    color: str
    pos: Point


@dataclass(frozen=True, eq=False)
class Edge:
    id: str
    tail: str
    head: str
    weight: RationalFunction


@dataclass(frozen=True)
class Frame:
    """Level layout of a square network: sources left, sinks right.

    ``place`` maps each internal vertex to (level, abscissa); level 1 is the top.
    """

    k: int
    place: Mapping[str, tuple[int, mpq]]


@dataclass(frozen=True, eq=False)
class Network:
    boundary: tuple[BoundaryVertex, ...]
    internal: tuple[InternalVertex, ...]
    edges: tuple[Edge, ...]
    variables: tuple[str, ...] = ()
    frame: Frame | None = None
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    # lookups
    @property
    def n(self) -> int:
        return len(self.boundary)

    def _idx(self) -> dict:
        if "pos" not in self._index:
            ix = self._index
            ix["pos"] = {v.id: v.pos for v in self.boundary} | {v.id: v.pos for v in self.internal}
            ix["kind"] = {v.id: v.role for v in self.boundary} | {v.id: v.color for v in self.internal}
            ix["label"] = {v.id: i + 1 for i, v in enumerate(self.boundary)}
            ix["edge"] = {e.id: e for e in self.edges}
            out: dict[str, list[Edge]] = {v: [] for v in ix["pos"]}
            inc: dict[str, list[Edge]] = {v: [] for v in ix["pos"]}
            for e in self.edges:
                out.setdefault(e.tail, []).append(e)
                inc.setdefault(e.head, []).append(e)
            ix["out"] = out
            ix["in"] = inc
        return self._index

    def pos(self, vid: str) -> Point:
        return self._idx()["pos"][vid]

    def kind(self, vid: str) -> str:
        return self._idx()["kind"][vid]

    def is_boundary(self, vid: str) -> bool:
        return vid in self._idx()["label"]

    def label(self, vid: str) -> int:
        """Position 1..n of a boundary vertex in counterclockwise order."""
        return self._idx()["label"][vid]

    def edge(self, eid: str) -> Edge:
        return self._idx()["edge"][eid]

    def out_edges(self, vid: str) -> list[Edge]:
        return self._idx()["out"].get(vid, [])

    def in_edges(self, vid: str) -> list[Edge]:
        return self._idx()["in"].get(vid, [])

    def sources(self) -> list[int]:
        return [i + 1 for i, v in enumerate(self.boundary) if v.role == SOURCE]

    def sinks(self) -> list[int]:
        return [i + 1 for i, v in enumerate(self.boundary) if v.role == SINK]

    def boundary_id(self, label: int) -> str:
        return self.boundary[label - 1].id

    def with_weights(self, weights: Mapping[str, RationalFunction], variables: Iterable[str] | None = None) -> "Network":
        edges = tuple(replace(e, weight=weights.get(e.id, e.weight)) for e in self.edges)
        return Network(
            self.boundary,
            self.internal,
            edges,
            tuple(variables) if variables is not None else self.variables,
            self.frame,
        )

    # serialization
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "boundary": [
                {"id": v.id, "role": v.role, "pos": [fmt_coord(v.pos[0]), fmt_coord(v.pos[1])]}
                for v in self.boundary
            ],
            "internal": [
                {"id": v.id, "color": v.color, "pos": [fmt_coord(v.pos[0]), fmt_coord(v.pos[1])]}
                for v in self.internal
            ],
            "edges": [
                {"id": e.id, "from": e.tail, "to": e.head, "weight": str(e.weight)} for e in self.edges
            ],
            "variables": list(self.variables),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


class NetworkFormatError(ValueError):
    """Malformed network document."""


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise NetworkFormatError(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise NetworkFormatError(f"{where}: unknown fields {sorted(extra)}")
    missing = allowed - set(obj)
    if missing:
        raise NetworkFormatError(f"{where}: missing fields {sorted(missing)}")


def network_from_json(doc: dict) -> Network:
    _check_keys(doc, {"n", "boundary", "internal", "edges", "variables"}, "network")
    variables = tuple(doc["variables"])
    boundary = []
    for b in doc["boundary"]:
        _check_keys(b, {"id", "role", "pos"}, "boundary vertex")
        if b["role"] not in (SOURCE, SINK):
            raise NetworkFormatError(f"boundary vertex {b['id']}: bad role {b['role']!r}")
        boundary.append(BoundaryVertex(str(b["id"]), b["role"], parse_point(b["pos"])))
    if doc["n"] != len(boundary):
        raise NetworkFormatError("n does not match the number of boundary vertices")
    internal = []
    for v in doc["internal"]:
        _check_keys(v, {"id", "color", "pos"}, "internal vertex")
        if v["color"] not in (WHITE, BLACK):
            raise NetworkFormatError(f"internal vertex {v['id']}: bad color {v['color']!r}")
        internal.append(InternalVertex(str(v["id"]), v["color"], parse_point(v["pos"])))
    edges = []
    for e in doc["edges"]:
        _check_keys(e, {"id", "from", "to", "weight"}, "edge")
        w = e["weight"]
        weight = parse_expr(str(w), variables)
        edges.append(Edge(str(e["id"]), str(e["from"]), str(e["to"]), weight))
    net = Network(tuple(boundary), tuple(internal), tuple(edges), variables)
    frame = infer_frame(net)
    return replace(net, frame=frame, _index={}) if frame else net


def load_network(text: str) -> Network:
    return network_from_json(json.loads(text))


# ---------------------------------------------------------------- validation


def validate(net: Network) -> list[str]:
    """Structural violations; empty iff the network is a valid perfect planar network."""
    errs: list[str] = []
    ids = [v.id for v in net.boundary] + [v.id for v in net.internal]
    seen = set()
    for vid in ids:
        if vid in seen:
            errs.append(f"vertex {vid}: duplicate id")
        seen.add(vid)
    eids = set()
    for e in net.edges:
        if e.id in eids:
            errs.append(f"edge {e.id}: duplicate id")
        eids.add(e.id)
        for end in (e.tail, e.head):
            if end not in seen:
                errs.append(f"edge {e.id}: unknown endpoint {end}")
        if e.tail == e.head:
            errs.append(f"edge {e.id}: self-loop")
        if e.weight.is_zero():
            errs.append(f"edge {e.id}: zero weight")
        if net.variables:
            names = {n for n in net.variables}
            from .exprcore import VARIABLES

            used = {VARIABLES.name(v) for v in e.weight.variables()}
            if not used <= names:
                errs.append(f"edge {e.id}: undeclared variables {sorted(used - names)}")
    if errs:
        return errs
    bpos = [v.pos for v in net.boundary]
    if len(set(bpos)) != len(bpos):
        errs.append("boundary: coincident positions")
    elif net.n >= 3 and not is_strictly_convex_ccw(bpos):
        errs.append("boundary: vertices not in convex position in counterclockwise order")
    for b in net.boundary:
        ins, outs = net.in_edges(b.id), net.out_edges(b.id)
        if b.role == SOURCE and ins:
            errs.append(f"vertex {b.id}: source with incoming edge")
        if b.role == SINK and outs:
            errs.append(f"vertex {b.id}: sink with outgoing edge")
        if len(ins) + len(outs) != 1:
            errs.append(f"vertex {b.id}: boundary vertex of degree {len(ins) + len(outs)}")
    for v in net.internal:
        ins, outs = net.in_edges(v.id), net.out_edges(v.id)
        if len(ins) + len(outs) != 3:
            errs.append(f"vertex {v.id}: internal vertex of degree {len(ins) + len(outs)}")
        elif v.color == WHITE and len(ins) != 1:
            errs.append(f"vertex {v.id}: white vertex needs exactly one incoming edge")
        elif v.color == BLACK and len(outs) != 1:
            errs.append(f"vertex {v.id}: black vertex needs exactly one outgoing edge")
        if net.n >= 3 and not strictly_inside_convex(v.pos, bpos):
            errs.append(f"vertex {v.id}: not strictly inside the boundary hull")
        if net.n < 3 and v.pos[0] ** 2 + v.pos[1] ** 2 >= 1:
            errs.append(f"vertex {v.id}: not strictly inside the unit disk")
    segs = [(e, net.pos(e.tail), net.pos(e.head)) for e in net.edges]
    for i in range(len(segs)):
        ei, a, b = segs[i]
        for j in range(i + 1, len(segs)):
            ej, c, d = segs[j]
            if segments_conflict(a, b, c, d):
                errs.append(f"edges {ei.id},{ej.id}: embedding crossing")
    allpos = {vid: net.pos(vid) for vid in ids}
    for e, a, b in segs:
        for vid, p in allpos.items():
            if vid in (e.tail, e.head) or p in (a, b):
                continue
            from .geometry import orient, _on_segment

            if orient(a, b, p) == 0 and _on_segment(p, a, b):
                errs.append(f"edge {e.id}: passes through vertex {vid}")
    return errs


class ValidationError(ValueError):
    pass


def require_valid(net: Network) -> Network:
    errs = validate(net)
    if errs:
        raise ValidationError("; ".join(errs))
    return net


# ----------------------------------------------------------------- paths


def _path_vertices(net: Network, path: Sequence[str]) -> list[str]:
    if not path:
        raise ValueError("empty path")
    verts = [net.edge(path[0]).tail]
    for eid in path:
        e = net.edge(eid)
        if e.tail != verts[-1]:
            raise ValueError(f"edge {eid} does not continue the path")
        verts.append(e.head)
    return verts


def _closure(net: Network, i_lab: int, j_lab: int, ccw: bool) -> list[str]:
    """Boundary vertex ids strictly between b_j and b_i along the hull."""
    n = net.n
    out = []
    t = j_lab
    while True:
        t = t % n + 1 if ccw else (t - 2) % n + 1
        if t == i_lab:
            break
        out.append(net.boundary_id(t))
    return out


def path_curve(net: Network, path: Sequence[str], ccw: bool = True, bulged: bool = False) -> list[Point]:
    verts = _path_vertices(net, path)
    if net.kind(verts[0]) != SOURCE or net.kind(verts[-1]) != SINK:
        raise ValueError("path must run from a source to a sink")
    hull = [verts[-1]] + _closure(net, net.label(verts[0]), net.label(verts[-1]), ccw) + [verts[0]]
    pts = [net.pos(v) for v in verts]
    if bulged:
        for a, b in zip(hull, hull[1:]):
            pa, pb = net.pos(a), net.pos(b)
            pts.append(bulge(pa, pb) if ccw else bulge(pb, pa))
            if b != hull[-1]:
                pts.append(pb)
    else:
        pts.extend(net.pos(v) for v in hull[1:-1])
    return pts


def curve_concordance(net: Network, path: Sequence[str], ccw: bool = True) -> int:
    try:
        return concordance(path_curve(net, path, ccw))
    except ValueError as exc:
        if "turns back" not in str(exc):
            raise
        return concordance(path_curve(net, path, ccw, bulged=True))


def _product(net: Network, path: Sequence[str]) -> RationalFunction:
    w = ONE
    for eid in path:
        w = w * net.edge(eid).weight
    return w


def path_weight(net: Network, path: Sequence[str], ccw: bool = True) -> RationalFunction:
    """Signed weight of a source-to-sink path or of a cycle."""
    verts = _path_vertices(net, path)
    if verts[0] == verts[-1]:
        c = concordance([net.pos(v) for v in verts[:-1]])
    else:
        c = curve_concordance(net, path, ccw)
    w = _product(net, path)
    return w if c % 2 == 1 else -w


def path_sign(net: Network, path: Sequence[str]) -> int:
    verts = _path_vertices(net, path)
    if verts[0] == verts[-1]:
        c = concordance([net.pos(v) for v in verts[:-1]])
    else:
        c = curve_concordance(net, path)
    return 1 if c % 2 == 1 else -1


def decompose_path(path: Sequence[str]) -> tuple[list[str], list[str]]:
    """Split off the cycle closed by the first repeated edge."""
    first: dict[str, int] = {}
    for j, eid in enumerate(path):
        if eid in first:
            i = first[eid]
            return list(path[:i]) + list(path[j:]), list(path[i:j])
        first[eid] = j
    raise ValueError("path has no repeated edge")


def gauge_transform(net: Network, t: Mapping[str, RationalFunction]) -> Network:
    """Reweight ``w_e -> t_head * w_e / t_tail``; boundary vertices keep t = 1."""
    weights = {}
    for e in net.edges:
        w = e.weight
        if e.head in t and not net.is_boundary(e.head):
            w = w * as_rf(t[e.head])
        if e.tail in t and not net.is_boundary(e.tail):
            w = w / as_rf(t[e.tail])
        weights[e.id] = w
    return net.with_weights(weights)


def reachable_edges(net: Network) -> set[str]:
    """Edges lying on at least one source-to-sink path."""
    fwd: set[str] = set()
    stack = [b.id for b in net.boundary if b.role == SOURCE]
    while stack:
        v = stack.pop()
        if v in fwd:
            continue
        fwd.add(v)
        stack.extend(e.head for e in net.out_edges(v))
    bwd: set[str] = set()
    stack = [b.id for b in net.boundary if b.role == SINK]
    while stack:
        v = stack.pop()
        if v in bwd:
            continue
        bwd.add(v)
        stack.extend(e.tail for e in net.in_edges(v))
    return {e.id for e in net.edges if e.tail in fwd and e.head in bwd}


# -------------------------------------------------------------- flag variables

# Calibrated flag labelling: whether labels 2 and 3 are swapped relative to the
# counterclockwise rule at white and at black vertices.
FLAG_SWAP = {WHITE: True, BLACK: True}


def rotation(net: Network, vid: str) -> list[Edge]:
    """Edges at ``vid`` in counterclockwise order of their directions."""
    p = net.pos(vid)
    edges = net.in_edges(vid) + net.out_edges(vid)
    vecs = [sub(net.pos(e.head if e.tail == vid else e.tail), p) for e in edges]
    return [edges[i] for i in sort_ccw(vecs)]


def flag_labels(net: Network, vid: str, swap: Mapping[str, bool] | None = None) -> dict[str, int]:
    """Map edge id to flag label 1, 2 or 3 at an internal vertex."""
    swap = FLAG_SWAP if swap is None else swap
    color = net.kind(vid)
    rot = rotation(net, vid)
    if color == WHITE:
        special = next(i for i, e in enumerate(rot) if e.head == vid)
    else:
        special = next(i for i, e in enumerate(rot) if e.tail == vid)
    e1, e2, e3 = (rot[(special + s) % 3] for s in range(3))
    if swap.get(color, False):
        e2, e3 = e3, e2
    return {e1.id: 1, e2.id: 2, e3.id: 3}


def flag_name(label: int, vid: str) -> str:
    return f"x{label}_{vid}"


def assign_flag_variables(
    net: Network,
    gauge_reduced: bool = True,
    alpha: RationalFunction | str = "alpha",
    beta: RationalFunction | str = "beta",
    swap: Mapping[str, bool] | None = None,
) -> tuple[Network, "BracketSpec"]:
    """Edge weights as products of flag variables, with the matching bracket."""
    from .poisson import BracketSpec

    labels = {v.id: flag_labels(net, v.id, swap) for v in net.internal}
    names: list[str] = []

    def flag(vid: str, eid: str) -> RationalFunction:
        if net.is_boundary(vid):
            nm = flag_name(1, vid)
        else:
            lab = labels[vid][eid]
            if lab == 1 and gauge_reduced:
                return ONE
            nm = flag_name(lab, vid)
        if nm not in names:
            names.append(nm)
        return var(nm)

    weights = {e.id: flag(e.tail, e.id) * flag(e.head, e.id) for e in net.edges}
    omega: dict[tuple[str, str], RationalFunction] = {}
    a = as_rf(alpha)
    b = as_rf(beta)
    six = {}
    for p in ("a", "b"):
        for ij in ("12", "13", "23"):
            six[p + ij] = var(p + ij)
    for v in net.internal:
        pre = "a" if v.color == WHITE else "b"
        if gauge_reduced:
            omega[(flag_name(2, v.id), flag_name(3, v.id))] = a if v.color == WHITE else b
        else:
            for i, j in ((1, 2), (1, 3), (2, 3)):
                omega[(flag_name(i, v.id), flag_name(j, v.id))] = six[f"{pre}{i}{j}"]
    out = net.with_weights(weights, names)
    return out, BracketSpec.from_pairs(names, omega)


# ------------------------------------------------------------------ builders


def default_boundary(n: int) -> list[Point]:
    """n exact rational points on the unit circle, evenly spread, starting at the top."""
    return [circle_point_at(90 + 360 * j / n) for j in range(n)]


def _build(
    boundary: Sequence[tuple[str, str, Point]],
    internal: Sequence[tuple[str, str, Point]],
    edges: Sequence[tuple[str, str, str, object]],
    variables: Sequence[str] = (),
    frame: Frame | None = None,
    check: bool = True,
) -> Network:
    net = Network(
        tuple(BoundaryVertex(i, r, p) for i, r, p in boundary),
        tuple(InternalVertex(i, c, p) for i, c, p in internal),
        tuple(Edge(i, t, h, as_rf(w) if not isinstance(w, str) else parse_expr(w)) for i, t, h, w in edges),
        tuple(variables),
        frame,
    )
    return require_valid(net) if check else net


def _q(s: str) -> mpq:
    return mpq(s)


def fig1(symbolic: bool = False) -> Network:
    """Two sources, two sinks, six internal vertices, eleven edges.

    With ``symbolic`` the weights are independent variables w1..w11;
    otherwise they are the expressions in x1..x4.
    """
    P = lambda x, y: (_q(x), _q(y))  # noqa: E731
    boundary = [
        ("b1", SOURCE, P("0", "1")),
        ("b2", SOURCE, P("-1", "0")),
        ("b3", SINK, P("0", "-1")),
        ("b4", SINK, P("1", "0")),
    ]
    internal = [
        ("va", WHITE, P("-3/5", "1/10")),
        ("vf", BLACK, P("-1/5", "3/5")),
        ("ve", BLACK, P("0", "3/10")),
        ("vA", BLACK, P("-3/10", "0")),
        ("vB", WHITE, P("0", "-3/10")),
        ("vC", WHITE, P("3/10", "0")),
    ]
    ends = {
        "e1": ("b2", "va"),
        "e2": ("va", "vA"),
        "e3": ("vA", "vB"),
        "e4": ("vB", "b3"),
        "e5": ("b1", "vf"),
        "e6": ("vf", "ve"),
        "e7": ("vC", "ve"),
        "e8": ("vC", "b4"),
        "e9": ("va", "vf"),
        "e10": ("ve", "vA"),
        "e11": ("vB", "vC"),
    }
    xw = {
        "e1": "x1^2/(x2+1)",
        "e2": "x2",
        "e3": "x2+1",
        "e4": "x1+x3",
        "e5": "x3",
        "e6": "x3",
        "e7": "x3",
        "e8": "x4",
        "e9": "1",
        "e10": "1",
        "e11": "1",
    }
    if symbolic:
        weights = {e: f"w{e[1:]}" for e in ends}
        variables = [f"w{i}" for i in range(1, 12)]
    else:
        weights = xw
        variables = ["x1", "x2", "x3", "x4"]
    edges = [(e, ends[e][0], ends[e][1], weights[e]) for e in sorted(ends, key=lambda s: int(s[1:]))]
    return _build(boundary, internal, edges, variables)


def g24() -> Network:
    """Network with sources b1, b3 and sinks b2, b4 and eight edge variables."""
    P = lambda x, y: (_q(x), _q(y))  # noqa: E731
    boundary = [
        ("b1", SOURCE, P("0", "1")),
        ("b2", SINK, P("-1", "0")),
        ("b3", SOURCE, P("0", "-1")),
        ("b4", SINK, P("1", "0")),
    ]
    internal = [
        ("vz", BLACK, P("0", "3/10")),
        ("vw", WHITE, P("-3/10", "0")),
        ("vx", BLACK, P("0", "-3/10")),
        ("vy", WHITE, P("3/10", "0")),
    ]
    ends = {
        "e1": ("b1", "vz"),
        "e2": ("vy", "vz"),
        "e3": ("vy", "b4"),
        "e4": ("vz", "vw"),
        "e5": ("vx", "vy"),
        "e6": ("vw", "b2"),
        "e7": ("vw", "vx"),
        "e8": ("b3", "vx"),
    }
    edges = [(e, t, h, f"w{e[1:]}") for e, (t, h) in ends.items()]
    return _build(boundary, internal, edges, [f"w{i}" for i in range(1, 9)])


def star(color: str, n_in: int | None = None) -> Network:
    """A single trivalent vertex at the centre joined to three boundary vertices."""
    pts = default_boundary(3)
    if color == WHITE:
        roles = [SOURCE, SINK, SINK]
    else:
        roles = [SOURCE, SOURCE, SINK]
    boundary = [(f"b{i + 1}", roles[i], pts[i]) for i in range(3)]
    internal = [("v", color, (mpq(0), mpq(0)))]
    edges = []
    for i, r in enumerate(roles):
        b = f"b{i + 1}"
        edges.append((f"e{i + 1}", b, "v", f"w{i + 1}") if r == SOURCE else (f"e{i + 1}", "v", b, f"w{i + 1}"))
    return _build(boundary, internal, edges, ["w1", "w2", "w3"])


def chord(n: int = 2, i: int = 1, j: int = 2, weight: str = "w") -> Network:
    """Boundary vertices on the circle, a single chord b_i -> b_j; other boundary vertices paired."""
    pts = default_boundary(n)
    if n != 2:
        raise ValueError("chord builder supports n = 2")
    roles = [SOURCE, SINK] if (i, j) == (1, 2) else [SINK, SOURCE]
    boundary = [(f"b{t + 1}", roles[t], pts[t]) for t in range(2)]
    return _build(boundary, [], [("e1", f"b{i}", f"b{j}", weight)], [weight])


# square networks -------------------------------------------------------------


def _level_points(k: int) -> list[Point]:
    """Right-hand boundary point of each level; level 1 on top."""
    return [circle_point_at(90 - 180 * r / (k + 1)) for r in range(1, k + 1)]


def embed_square(
    k: int,
    place: Mapping[str, tuple[int, mpq]],
    colors: Mapping[str, str],
    edges: Sequence[tuple[str, str, str, RationalFunction]],
    variables: Sequence[str] = (),
) -> Network:
    """Realize a level layout in the disk.

    Sources b_1..b_k sit on the left at levels 1..k and sink b_{k+q} on the
    right at level k+1-q. Internal abscissae are rescaled into the hull.
    """
    right = _level_points(k)
    boundary = [(f"b{r}", SOURCE, (-right[r - 1][0], right[r - 1][1])) for r in range(1, k + 1)]
    boundary += [(f"b{k + q}", SINK, right[k - q]) for q in range(1, k + 1)]
    xs = sorted({x for _, x in place.values()})
    half = min(p[0] for p in right) / 2
    rank = {x: i for i, x in enumerate(xs)}
    span = len(xs) + 1
    ys = [p[1] for p in right]
    gap = min((ys[i] - ys[i + 1] for i in range(k - 1)), default=mpq(1, 2))
    internal = []
    new_place = {}
    for vid, (lev, x) in place.items():
        px = -half + 2 * half * (rank[x] + 1) / span
        py = ys[lev - 1]
        if lev == 1:
            py -= gap / 8
        if lev == k:
            py += gap / 8
        internal.append((vid, colors[vid], (px, py)))
        new_place[vid] = (lev, mpq(rank[x] + 1, span))
    internal.sort(key=lambda t: t[0])
    return _build(boundary, internal, list(edges), variables, Frame(k, new_place))


def infer_frame(net: Network) -> Frame | None:
    """Recover the level layout of a network drawn by ``embed_square``."""
    n = net.n
    if n % 2 or n == 0:
        return None
    k = n // 2
    b = net.boundary
    for r in range(k):
        src, snk = b[r], b[n - 1 - r]
        if src.role != SOURCE or snk.role != SINK:
            return None
        if src.pos[1] != snk.pos[1] or src.pos[0] != -snk.pos[0]:
            return None
    ys = [b[r].pos[1] for r in range(k)]
    if any(ys[r] <= ys[r + 1] for r in range(k - 1)):
        return None
    place = {}
    for v in net.internal:
        lev = min(range(k), key=lambda r: abs(ys[r] - v.pos[1])) + 1
        place[v.id] = (lev, v.pos[0])
    return Frame(k, place)


def _square_parts(net: Network) -> tuple[Frame, dict[str, str]]:
    frame = net.frame or infer_frame(net)
    if frame is None:
        raise ValueError("network is not a square network with sources left and sinks right")
    return frame, {v.id: v.color for v in net.internal}


def diag(weights: Sequence[object]) -> Network:
    """Horizontal chords b_r -> b_{2k+1-r} with weight d_r."""
    k = len(weights)
    ws = [as_rf(w) if not isinstance(w, str) else parse_expr(w) for w in weights]
    edges = [(f"h{r}", f"b{r}", f"b{2 * k + 1 - r}", ws[r - 1]) for r in range(1, k + 1)]
    return embed_square(k, {}, {}, edges, _names(ws))


def _names(ws: Iterable[RationalFunction]) -> list[str]:
    from .exprcore import VARIABLES

    out: list[str] = []
    for w in ws:
        for v in sorted(w.variables()):
            nm = VARIABLES.name(v)
            if nm not in out:
                out.append(nm)
    return out


def elementary(
    k: int,
    i: int,
    slant: object,
    lower: bool,
    horizontal: Mapping[int, object] | None = None,
) -> Network:
    """E^-_i(l) (``lower``) or E^+_i(u) on k levels.

    Optional ``horizontal`` weights multiply the whole horizontal line of a level.
    """
    if not 2 <= i <= k:
        raise ValueError("index i must satisfy 2 <= i <= k")
    s = as_rf(slant) if not isinstance(slant, str) else parse_expr(slant)
    hw = {r: (as_rf(w) if not isinstance(w, str) else parse_expr(w)) for r, w in (horizontal or {}).items()}
    src_level, dst_level = (i, i - 1) if lower else (i - 1, i)
    wv, bv = "vw", "vb"
    place = {wv: (src_level, mpq(1, 3)), bv: (dst_level, mpq(2, 3))}
    colors = {wv: WHITE, bv: BLACK}
    edges: list[tuple[str, str, str, RationalFunction]] = []
    for r in range(1, k + 1):
        left, right = f"b{r}", f"b{2 * k + 1 - r}"
        w = hw.get(r, ONE)
        if r == src_level:
            edges.append((f"h{r}a", left, wv, w))
            edges.append((f"h{r}b", wv, right, ONE))
        elif r == dst_level:
            edges.append((f"h{r}a", left, bv, w))
            edges.append((f"h{r}b", bv, right, ONE))
        else:
            edges.append((f"h{r}", left, right, w))
    edges.append(("s", wv, bv, s))
    return embed_square(k, place, colors, edges, _names([s, *hw.values()]))


def e_minus(k: int, i: int, l: object = "l", horizontal: Mapping[int, object] | None = None) -> Network:
    return elementary(k, i, l, True, horizontal)


def e_plus(k: int, i: int, u: object = "u", horizontal: Mapping[int, object] | None = None) -> Network:
    return elementary(k, i, u, False, horizontal)


def concatenate_square(n1: Network, n2: Network, check: bool = True) -> Network:
    """Glue the sinks of ``n1`` to the sources of ``n2`` level by level."""
    f1, c1 = _square_parts(n1)
    f2, c2 = _square_parts(n2)
    if f1.k != f2.k:
        raise ValueError("square networks with different numbers of levels")
    k = f1.k

    def ranks(frame: Frame) -> dict[mpq, mpq]:
        xs = sorted({x for _, x in frame.place.values()})
        return {x: mpq(i + 1, len(xs) + 1) for i, x in enumerate(xs)}

    r1, r2 = ranks(f1), ranks(f2)
    place = {f"a{v}": (lev, r1[x]) for v, (lev, x) in f1.place.items()}
    place |= {f"c{v}": (lev, 1 + r2[x]) for v, (lev, x) in f2.place.items()}
    colors = {f"a{v}": c for v, c in c1.items()} | {f"c{v}": c for v, c in c2.items()}

    def rename1(vid: str) -> str:
        return vid if n1.is_boundary(vid) else f"a{vid}"

    def rename2(vid: str) -> str:
        return vid if n2.is_boundary(vid) else f"c{vid}"

    edges = []
    into_sink = {}
    for e in n1.edges:
        if n1.is_boundary(e.head):
            into_sink[n1.label(e.head)] = e
        else:
            edges.append((f"a{e.id}", rename1(e.tail), rename1(e.head), e.weight))
    from_source = {}
    for e in n2.edges:
        if n2.is_boundary(e.tail):
            from_source[n2.label(e.tail)] = e
        else:
            edges.append((f"c{e.id}", rename2(e.tail), rename2(e.head), e.weight))
    for r in range(1, k + 1):
        e1 = into_sink[2 * k + 1 - r]
        e2 = from_source[r]
        edges.append((f"g{r}", rename1(e1.tail), rename2(e2.head), e1.weight * e2.weight))
    variables = list(n1.variables) + [v for v in n2.variables if v not in n1.variables]
    return embed_square(k, place, colors, edges, variables)


def generic_factorization(k: int) -> Network:
    """Concatenation of k(k-1) elementary factors, each with its own weights c_t, d_t."""
    word = []
    for j in range(k, 1, -1):
        word.extend(range(k, j - 1, -1))
    factors = []
    t = 0
    for lower in (True, False):
        seq = word if lower else list(reversed(word))
        for i in seq:
            t += 1
            d = f"d{t}"
            factors.append(elementary(k, i, f"c{t}", lower, {i - 1: d, i: f"1/{d}"}))
    net = factors[0]
    for f in factors[1:]:
        net = concatenate_square(net, f)
    return net


# random networks -------------------------------------------------------------


def random_network(
    seed: int,
    n: int | None = None,
    max_internal: int = 6,
    require_paths: bool = True,
    weight_prefix: str = "w",
) -> Network:
    """A random perfect planar network with fresh edge variables."""
    rng = random.Random(seed)
    for _ in range(10000):
        nn = n if n is not None else rng.randint(3, 6)
        net = _random_attempt(rng, nn, max_internal, weight_prefix)
        if net is None:
            continue
        if require_paths and len(reachable_edges(net)) != len(net.edges):
            continue
        return net
    raise RuntimeError("could not generate a random network")


def _random_attempt(rng: random.Random, n: int, max_internal: int, prefix: str) -> Network | None:
    pts = default_boundary(n)
    # partition the boundary into consecutive blocks of size 2 or 3
    sizes: list[int] = []
    rest = n
    while rest:
        options = [t for t in (2, 3) if t <= rest and rest - t != 1]
        if not options:
            return None
        s = rng.choice(options)
        sizes.append(s)
        rest -= s
    offset = rng.randrange(n)
    pos: dict[str, Point] = {f"b{j + 1}": pts[j] for j in range(n)}
    segs: list[tuple[str, str]] = []
    counter = 0
    start = 0
    for s in sizes:
        block = [f"b{(offset + start + t) % n + 1}" for t in range(s)]
        start += s
        if s == 2:
            segs.append((block[0], block[1]))
        else:
            counter += 1
            c = f"v{counter}"
            pa = [pos[b] for b in block]
            pos[c] = (sum(p[0] for p in pa) / 3, sum(p[1] for p in pa) / 3)
            segs.extend((c, b) for b in block)
    target = rng.randint(0, max_internal)
    tries = 0
    while counter + 2 <= target and tries < 200:
        tries += 1
        i, j = rng.sample(range(len(segs)), 2)
        (a1, a2), (c1, c2) = segs[i], segs[j]
        m1 = ((pos[a1][0] + pos[a2][0]) / 2, (pos[a1][1] + pos[a2][1]) / 2)
        m2 = ((pos[c1][0] + pos[c2][0]) / 2, (pos[c1][1] + pos[c2][1]) / 2)
        if m1 == m2:
            continue
        ok = True
        for t, (p, q) in enumerate(segs):
            if t in (i, j):
                continue
            if segments_conflict(m1, m2, pos[p], pos[q]):
                ok = False
                break
        if not ok:
            continue
        from .geometry import orient

        if orient(pos[a1], pos[a2], m2) == 0 or orient(pos[c1], pos[c2], m1) == 0:
            continue
        u, v = f"v{counter + 1}", f"v{counter + 2}"
        counter += 2
        pos[u], pos[v] = m1, m2
        new = [s for t, s in enumerate(segs) if t not in (i, j)]
        new += [(a1, u), (u, a2), (c1, v), (v, c2), (u, v)]
        segs = new
    internal_ids = [f"v{t}" for t in range(1, counter + 1)]
    for _ in range(200):
        oriented = [(a, b) if rng.random() < 0.5 else (b, a) for a, b in segs]
        indeg = {v: 0 for v in internal_ids}
        for a, b in oriented:
            if b in indeg:
                indeg[b] += 1
        if any(d not in (1, 2) for d in indeg.values()):
            continue
        roles = {}
        for a, b in oriented:
            if a.startswith("b"):
                roles[a] = SOURCE
            if b.startswith("b"):
                roles[b] = SINK
        if SOURCE not in roles.values() or SINK not in roles.values():
            continue
        boundary = [(f"b{j + 1}", roles[f"b{j + 1}"], pts[j]) for j in range(n)]
        internal = [(v, WHITE if indeg[v] == 1 else BLACK, pos[v]) for v in internal_ids]
        edges = [(f"e{t + 1}", a, b, f"{prefix}{t + 1}") for t, (a, b) in enumerate(oriented)]
        net = _build(boundary, internal, edges, [f"{prefix}{t + 1}" for t in range(len(edges))], check=False)
        if validate(net):
            return None
        return net
    return None


GENERATORS = {
    "fig1": lambda: fig1(),
    "fig1w": lambda: fig1(symbolic=True),
    "g24": g24,
    "white": lambda: star(WHITE),
    "black": lambda: star(BLACK),
    "generic3": lambda: generic_factorization(3),
}


def generate(name: str, args: Sequence[str] = (), seed: int = 0) -> Network:
    """Build a named network. Square builders take their parameters in ``args``."""
    if name in GENERATORS:
        return GENERATORS[name]()
    if name == "diag":
        return diag(list(args) or ["d1", "d2"])
    if name in ("eminus", "eplus"):
        if len(args) < 2:
            raise ValueError(f"{name} needs k and i")
        k, i = int(args[0]), int(args[1])
        w = args[2] if len(args) > 2 else ("l" if name == "eminus" else "u")
        return elementary(k, i, w, name == "eminus")
    if name == "generic":
        return generic_factorization(int(args[0]) if args else 3)
    if name == "random":
        n = int(args[0]) if args else None
        return random_network(seed, n)
    if name == "hex":
        from .cluster import build_hex_network

        if len(args) != 2:
            raise ValueError("hex needs k and m")
        return build_hex_network(int(args[0]), int(args[1]))
    raise ValueError(f"unknown network {name!r}")
