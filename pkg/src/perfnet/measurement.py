"""
Boundary measurements by vertex-splitting elimination, the path-sum series
oracle, concatenation, extended matrices and Pluecker coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

from gmpy2 import mpq

from .exprcore import ONE, ZERO, PowerSeries, RationalFunction, as_rf, rf_equal, rf_series, var
from .geometry import sub, sort_ccw
from .network import (
    BLACK,
    SINK,
    SOURCE,
    WHITE,
    Network,
    concatenate_square,
    path_sign,
    require_valid,
    validate,
)


@dataclass
class Digraph:
    """Bare combinatorial network: vertex kinds and weighted edges."""

    kind: dict[str, str]
    edges: dict[str, tuple[str, str, RationalFunction]]
    out: dict[str, list[str]] = field(default_factory=dict)
    inn: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.reindex()

    def reindex(self) -> None:
        self.out = {v: [] for v in self.kind}
        self.inn = {v: [] for v in self.kind}
        for eid, (t, h, _) in self.edges.items():
            self.out[t].append(eid)
            self.inn[h].append(eid)

    @classmethod
    def from_network(cls, net: Network) -> "Digraph":
        kind = {v.id: v.role for v in net.boundary} | {v.id: v.color for v in net.internal}
        edges = {e.id: (e.tail, e.head, e.weight) for e in net.edges}
        return cls(kind, edges)


class _Rows:
    """Memoized path sums from an edge to every sink, excluding the first weight."""

    def __init__(self, g: Digraph):
        self.g = g
        self.memo: dict[tuple[str, frozenset], dict] = {}

    def w(self, eid: str) -> RationalFunction:
        return self.g.edges[eid][2]

    def row(self, eid: str, cut: frozenset) -> dict:
        key = (eid, cut)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        g = self.g
        y = g.edges[eid][1]
        kind = g.kind[y]
        if kind == SINK:
            res = {y: ONE}
        elif kind == WHITE:
            res: dict = {}
            for e2 in g.out[y]:
                sub_row = self.row(e2, cut)
                we = self.w(e2)
                for s, val in sub_row.items():
                    res[s] = res.get(s, ZERO) + we * val
        elif kind == BLACK:
            cut_dict = dict(cut)
            if y in cut_dict:
                if cut_dict[y] != eid:
                    raise RuntimeError("re-entered a split black vertex through its first edge")
                res = {("cut", y): ONE}
            else:
                eplus = g.out[y][0]
                eminus = next(e for e in g.inn[y] if e != eid)
                inner = dict(self.row(eplus, cut | {(y, eminus)}))
                loop = inner.pop(("cut", y), ZERO)
                wp = self.w(eplus)
                if loop.is_zero():
                    res = {s: wp * val for s, val in inner.items()}
                else:
                    # the loop sum already carries w(e-)
                    denom = ONE + wp * loop
                    res = {s: wp * val / denom for s, val in inner.items()}
        else:
            raise ValueError(f"path enters source {y}")
        self.memo[key] = res
        return res

    def source_row(self, src: str) -> dict:
        outs = self.g.out[src]
        if not outs:
            return {}
        e0 = outs[0]
        w0 = self.w(e0)
        return {s: w0 * val for s, val in self.row(e0, frozenset()).items()}


def _rows(net: Network) -> _Rows:
    rows = getattr(net, "_index").get("rows")
    if rows is None:
        rows = _Rows(Digraph.from_network(net))
        net._index["rows"] = rows
    return rows


def boundary_measurement(net: Network, i: int, j: int) -> RationalFunction:
    """Signed sum of weights of all paths from source b_i to sink b_j."""
    src, snk = net.boundary_id(i), net.boundary_id(j)
    if net.kind(src) != SOURCE or net.kind(snk) != SINK:
        raise ValueError("boundary_measurement needs a source and a sink")
    return _rows(net).source_row(src).get(snk, ZERO)


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """Rows are sources, columns are sinks, both in increasing label order."""

    sources: tuple[int, ...]
    sinks: tuple[int, ...]
    entries: tuple[tuple[RationalFunction, ...], ...]

    def __getitem__(self, pq: tuple[int, int]) -> RationalFunction:
        return self.entries[pq[0]][pq[1]]

    def entry(self, i: int, j: int) -> RationalFunction:
        """Entry for source label i and sink label j."""
        return self.entries[self.sources.index(i)][self.sinks.index(j)]

    def rows(self) -> list[list[RationalFunction]]:
        return [list(r) for r in self.entries]


def measurement_matrix(net: Network) -> MeasurementMatrix:
    I, J = net.sources(), net.sinks()
    rows = _rows(net)
    entries = []
    for i in I:
        r = rows.source_row(net.boundary_id(i))
        entries.append(tuple(r.get(net.boundary_id(j), ZERO) for j in J))
    return MeasurementMatrix(tuple(I), tuple(J), tuple(entries))


def a_matrix(net: Network) -> list[list[RationalFunction]]:
    """A = M W0 for a square network: A[r][c] sums paths from left level r to right level c."""
    M = measurement_matrix(net)
    k = len(M.sources)
    if len(M.sinks) != k:
        raise ValueError("not a square network")
    return [[M.entries[r][k - 1 - c] for c in range(k)] for r in range(k)]


# -------------------------------------------------------------- series oracle


def _edge_values(net: Network, point: Mapping[str, object]) -> dict[str, mpq]:
    return {e.id: e.weight.evaluate(point) for e in net.edges}


def path_sum_oracle(net: Network, i: int, j: int, order: int, point: Mapping[str, object]) -> PowerSeries:
    """Truncated signed path sum with every edge weight scaled by a fresh variable t."""
    vals = _edge_values(net, point)
    src, snk = net.boundary_id(i), net.boundary_id(j)
    coeffs = [mpq(0)] * (order + 1)
    stack: list[tuple[str, list[str], mpq]] = [(src, [], mpq(1))]
    while stack:
        v, path, prod = stack.pop()
        if v == snk and path:
            coeffs[len(path)] += path_sign(net, path) * prod
            continue
        if len(path) == order:
            continue
        for e in net.out_edges(v):
            stack.append((e.head, path + [e.id], prod * vals[e.id]))
    from .exprcore import VARIABLES

    return PowerSeries(VARIABLES.register("t"), tuple(coeffs))


def measurement_series(net: Network, i: int, j: int, order: int, point: Mapping[str, object]) -> PowerSeries:
    """Series of the eliminated measurement under the same substitution as the oracle."""
    vals = _edge_values(net, point)
    t = var("t")
    scaled = net.with_weights({eid: t * v for eid, v in vals.items()})
    return rf_series(boundary_measurement(scaled, i, j), "t", order)


# ----------------------------------------------------------- concatenation


def concatenate(n1: Network, n2: Network, gluing: Sequence[tuple[int, int]] | None = None) -> Network:
    """Glue sinks of ``n1`` to sources of ``n2``; weights of glued edges multiply.

    Only square networks (sources left, sinks right, level by level) are
    supported; ``gluing`` pairs sink labels of ``n1`` with source labels of
    ``n2`` and must match that layout.
    """
    k1 = len(n1.sources())
    if gluing is not None:
        expected = sorted((2 * k1 + 1 - r, r) for r in range(1, k1 + 1))
        if sorted(gluing) != expected:
            raise ValueError("gluing must pair sink b_{2k+1-r} of the first network with source b_r")
    if len(n1.sinks()) != len(n2.sources()):
        raise ValueError("mismatched segment lengths")
    return concatenate_square(n1, n2)


# ---------------------------------------------------- Grassmannian data


@dataclass(frozen=True, eq=False)
class ExtendedMatrix:
    """k x n matrix with the identity on the source columns."""

    sources: tuple[int, ...]
    rows: tuple[tuple[RationalFunction, ...], ...]

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def column(self, c: int) -> list[RationalFunction]:
        return [r[c - 1] for r in self.rows]


def s_count(I: Sequence[int], ip: int, j: int) -> int:
    lo, hi = min(ip, j), max(ip, j)
    return sum(1 for i in I if lo < i < hi)


def extended_from_measurements(I: Sequence[int], J: Sequence[int], M: Sequence[Sequence[RationalFunction]], n: int) -> ExtendedMatrix:
    rows = []
    for p, ip in enumerate(I):
        row = [ZERO] * n
        row[ip - 1] = ONE
        for q, j in enumerate(J):
            m = M[p][q]
            row[j - 1] = -m if s_count(I, ip, j) % 2 else m
        rows.append(tuple(row))
    return ExtendedMatrix(tuple(I), tuple(rows))


def extended_matrix(net: Network) -> ExtendedMatrix:
    M = measurement_matrix(net)
    return extended_from_measurements(M.sources, M.sinks, M.entries, net.n)


def det(m: Sequence[Sequence[RationalFunction]]) -> RationalFunction:
    """Determinant by cofactor expansion for small sizes, elimination otherwise."""
    n = len(m)
    if n == 0:
        return ONE
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n <= 4:
        total = ZERO
        for c in range(n):
            if m[0][c].is_zero():
                continue
            minor = [row[:c] + row[c + 1:] for row in m[1:]]
            term = m[0][c] * det(minor)
            total = total + term if c % 2 == 0 else total - term
        return total
    a = [list(r) for r in m]
    sign = 1
    result = ONE
    for c in range(n):
        piv = next((r for r in range(c, n) if not a[r][c].is_zero()), None)
        if piv is None:
            return ZERO
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        result = result * a[c][c]
        inv = a[c][c].inverse()
        for r in range(c + 1, n):
            if a[r][c].is_zero():
                continue
            f = a[r][c] * inv
            a[r] = [a[r][t] - f * a[c][t] for t in range(n)]
    return result if sign == 1 else -result


def minor(x: ExtendedMatrix | Sequence[Sequence[RationalFunction]], rows: Sequence[int], cols: Sequence[int]) -> RationalFunction:
    """Minor with 1-based row and column labels."""
    data = x.rows if isinstance(x, ExtendedMatrix) else x
    return det([[data[r - 1][c - 1] for c in cols] for r in rows])


@dataclass(frozen=True, eq=False)
class PluckerVector:
    k: int
    n: int
    coords: dict[tuple[int, ...], RationalFunction]

    def __getitem__(self, I: Sequence[int]) -> RationalFunction:
        key = tuple(sorted(I))
        if len(set(key)) != self.k:
            return ZERO
        return self.coords[key]


def plucker(x: ExtendedMatrix) -> PluckerVector:
    k, n = x.k, x.n
    rows = list(range(1, k + 1))
    coords = {S: minor(x, rows, S) for S in combinations(range(1, n + 1), k)}
    return PluckerVector(k, n, coords)


def same_grassmann_point(x: Sequence[Sequence[RationalFunction]], y: ExtendedMatrix) -> bool:
    """Whether the row space of ``x`` equals that of ``y``, which has identity on its sources."""
    I = y.sources
    k = len(I)
    for p in range(k):
        for c in range(1, len(x[p]) + 1):
            rhs = ZERO
            for r in range(k):
                rhs = rhs + x[p][I[r] - 1] * y.rows[r][c - 1]
            if not rf_equal(x[p][c - 1], rhs):
                return False
    return True


def matmul(x: Sequence[Sequence[RationalFunction]], a: Sequence[Sequence[RationalFunction]]) -> list[list[RationalFunction]]:
    return [
        [sum((x[p][t] * a[t][c] for t in range(len(a)) if not a[t][c].is_zero()), ZERO) for c in range(len(a[0]))]
        for p in range(len(x))
    ]


# ------------------------------------------------------------ GL_n action


@dataclass(frozen=True)
class Elementary:
    """diag(d_1..d_n), E^-_i(l) = 1 + l e_{i,i-1} or E^+_i(u) = 1 + u e_{i-1,i}."""

    kind: str
    n: int
    index: int = 0
    weight: object = None
    diagonal: tuple = ()

    def matrix(self) -> list[list[RationalFunction]]:
        a = [[ONE if r == c else ZERO for c in range(self.n)] for r in range(self.n)]
        if self.kind == "diag":
            for r, d in enumerate(self.diagonal):
                a[r][r] = as_rf(d)
        elif self.kind == "minus":
            a[self.index - 1][self.index - 2] = as_rf(self.weight)
        elif self.kind == "plus":
            a[self.index - 2][self.index - 1] = as_rf(self.weight)
        else:
            raise ValueError(f"unknown elementary kind {self.kind!r}")
        return a


def act_elementary(net: Network, a: Elementary) -> Network:
    """Glue the collar network of ``a`` along the whole boundary of ``net``.

    Lines of sources are reversed and carry inverted weights. The new
    boundary is the old one scaled by 1 + delta.
    """
    from .network import BoundaryVertex, Edge, InternalVertex

    n = net.n
    if a.n != n:
        raise ValueError("matrix size must equal the number of boundary vertices")
    if a.kind in ("minus", "plus") and not 2 <= a.index <= n:
        raise ValueError("index out of range")
    horiz = {t: ONE for t in range(1, n + 1)}
    if a.kind == "diag":
        for t, d in enumerate(a.diagonal, start=1):
            horiz[t] = as_rf(d)
    slant_from = slant_to = None
    if a.kind == "minus":
        slant_from, slant_to = a.index, a.index - 1
    elif a.kind == "plus":
        slant_from, slant_to = a.index - 1, a.index
    delta = mpq(1, 2)
    for _ in range(30):
        bnd = []
        internal = list(net.internal)
        edges: list[Edge] = []
        new_id = {}
        for t, b in enumerate(net.boundary, start=1):
            nb = f"n{b.id}"
            new_id[b.id] = nb
            bnd.append(BoundaryVertex(nb, b.role, ((1 + delta) * b.pos[0], (1 + delta) * b.pos[1])))
        # inner end of each line: vertex of net adjacent to b_t
        mid = {}
        for t in (slant_from, slant_to):
            if t is None:
                continue
            b = net.boundary[t - 1]
            vid = f"m{b.id}"
            mid[t] = vid
            color = WHITE if t == slant_from else BLACK
            internal.append(InternalVertex(vid, color, ((1 + delta / 2) * b.pos[0], (1 + delta / 2) * b.pos[1])))

        def attach(vid: str) -> str:
            if net.is_boundary(vid):
                t = net.label(vid)
                return mid.get(t, new_id[vid])
            return vid

        def line_weight(t: int) -> RationalFunction:
            w = horiz[t]
            return w.inverse() if net.boundary[t - 1].role == SOURCE else w

        for e in net.edges:
            w = e.weight
            for end in (e.tail, e.head):
                if net.is_boundary(end) and net.label(end) not in mid:
                    w = w * line_weight(net.label(end))
            edges.append(Edge(e.id, attach(e.tail), attach(e.head), w))
        for t, vid in mid.items():
            b = net.boundary[t - 1]
            nb = new_id[b.id]
            lw = line_weight(t)
            if b.role == SOURCE:
                edges.append(Edge(f"l{t}", nb, vid, lw))
            else:
                edges.append(Edge(f"l{t}", vid, nb, lw))
        if slant_from is not None:
            edges.append(Edge("slant", mid[slant_from], mid[slant_to], as_rf(a.weight)))
        variables = list(net.variables)
        for w in [a.weight, *a.diagonal]:
            if w is None:
                continue
            from .exprcore import VARIABLES

            for v in sorted(as_rf(w).variables()):
                nm = VARIABLES.name(v)
                if nm not in variables:
                    variables.append(nm)
        out = Network(tuple(bnd), tuple(internal), tuple(edges), tuple(variables))
        if not validate(out):
            return out
        delta /= 2
    raise RuntimeError("could not embed the collar network")


# ------------------------------------------------- black split at a source


@dataclass
class BlackSplit:
    """Network with the black vertex next to a source removed.

    ``order`` lists boundary labels counterclockwise with the two new
    labels ``"iu"`` and ``"ju"`` in place of the removed source.
    """

    graph: Digraph
    order: list
    weight_plus: RationalFunction
    weight_minus: RationalFunction
    weight_source: RationalFunction
    ju_first: bool


def black_split(net: Network, i: int) -> BlackSplit:
    src = net.boundary_id(i)
    e0 = net.out_edges(src)[0]
    u = e0.head
    if net.kind(u) != BLACK:
        raise ValueError("source is not adjacent to a black vertex")
    eplus = net.out_edges(u)[0]
    eminus = next(e for e in net.in_edges(u) if e.id != e0.id)
    g = Digraph.from_network(net)
    kind = dict(g.kind)
    del kind[src]
    del kind[u]
    kind["iu"] = SOURCE
    kind["ju"] = SINK
    edges = dict(g.edges)
    del edges[e0.id]
    t, h, w = edges[eplus.id]
    edges[eplus.id] = ("iu", h, w)
    t, h, w = edges[eminus.id]
    edges[eminus.id] = (t, "ju", w)
    # rotation at u decides which new label comes first counterclockwise
    p = net.pos(u)
    trio = [e0, eplus, eminus]
    vecs = [sub(net.pos(e.tail if e.head == u else e.head), p) for e in trio]
    rot = [trio[k].id for k in sort_ccw(vecs)]
    start = rot.index(e0.id)
    after_e0 = rot[(start + 1) % 3]
    ju_first = after_e0 == eplus.id
    labels = [b_i for b_i in range(1, net.n + 1)]
    pos = labels.index(i)
    order: list = labels[:pos] + (["ju", "iu"] if ju_first else ["iu", "ju"]) + labels[pos + 1:]
    gr = Digraph({v: k for v, k in kind.items()}, edges)
    return BlackSplit(gr, order, eplus.weight, eminus.weight, e0.weight, ju_first)


def digraph_measurement(g: Digraph, src: str, snk: str) -> RationalFunction:
    return _Rows(g).source_row(src).get(snk, ZERO)


__all__ = [
    "BlackSplit",
    "Digraph",
    "Elementary",
    "ExtendedMatrix",
    "MeasurementMatrix",
    "PluckerVector",
    "a_matrix",
    "act_elementary",
    "black_split",
    "boundary_measurement",
    "concatenate",
    "det",
    "digraph_measurement",
    "extended_from_measurements",
    "extended_matrix",
    "matmul",
    "measurement_matrix",
    "measurement_series",
    "minor",
    "path_sum_oracle",
    "plucker",
    "require_valid",
    "s_count",
    "same_grassmann_point",
]
