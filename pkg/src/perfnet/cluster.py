"""
Cluster algebras of geometric type, the initial cluster on the open cell of
the Grassmannian, the hexagonal network N(k, m) and the compatibility check
of the face-weight bracket with that cluster structure.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Mapping, Sequence

from gmpy2 import mpq

from .exprcore import BITS, ONE, VARIABLES, ZERO, RationalFunction, as_rf, rf_equal, var
from .faces import FaceSet, dual_network, enumerate_faces, face_bracket, face_weights
from .geometry import circle_point_at
from .measurement import det, extended_from_measurements, extended_matrix, measurement_matrix, plucker
from .network import BLACK, SINK, SOURCE, WHITE, Network, _build
from .poisson import BracketSpec, Report, derivation_bracket, log_canonical_bracket, measurement_bracket

__all__ = [
    "ClusterError",
    "Seed",
    "TauCluster",
    "GrassmannSeedData",
    "FaceMonomial",
    "HexFaces",
    "CompatibilityResult",
    "mutate_matrix",
    "mutate_cluster",
    "formal_seed",
    "is_laurent",
    "laurent_check",
    "rank",
    "tau_exponents",
    "choose_kappa",
    "tau_coordinates",
    "ell",
    "plucker_set",
    "grassmann_initial_seed",
    "build_hex_network",
    "hex_faces",
    "lindstrom_minor",
    "f_via_face_weights",
    "tau_face",
    "tau_star",
    "face_monomial_check",
    "check_compatibility",
    "omega_from_matrix_bracket",
]


class ClusterError(ValueError):
    pass


# -------------------------------------------------------------------- mutation


def _check_matrix(B: Sequence[Sequence[int]]) -> tuple[int, int]:
    n = len(B)
    width = len(B[0]) if n else 0
    if any(len(row) != width for row in B):
        raise ClusterError("exchange matrix rows have different lengths")
    if width < n:
        raise ClusterError("exchange matrix has fewer columns than rows")
    for i in range(n):
        for j in range(n):
            if B[i][j] != -B[j][i]:
                raise ClusterError(f"principal part not skew-symmetric at ({i + 1}, {j + 1})")
    return n, width


def mutate_matrix(B: Sequence[Sequence[int]], k: int) -> list[list[int]]:
    """Matrix mutation in direction k (1-based)."""
    n, width = _check_matrix(B)
    if not 1 <= k <= n:
        raise ClusterError(f"mutation direction {k} out of range [1, {n}]")
    c = k - 1
    out = []
    for i in range(n):
        row = []
        for j in range(width):
            if i == c or j == c:
                row.append(-B[i][j])
            else:
                row.append(B[i][j] + (abs(B[i][c]) * B[c][j] + B[i][c] * abs(B[c][j])) // 2)
        out.append(row)
    return out


@dataclass(frozen=True, eq=False)
class Seed:
    """Cluster and stable variables with the extended exchange matrix."""

    cluster: tuple[RationalFunction, ...]
    stable: tuple[RationalFunction, ...]
    B: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n, width = _check_matrix(self.B) if self.B else (0, len(self.cluster) + len(self.stable))
        if n != len(self.cluster) or width != n + len(self.stable):
            raise ClusterError("exchange matrix shape does not match the extended cluster")

    @property
    def extended(self) -> tuple[RationalFunction, ...]:
        return self.cluster + self.stable

    def same_as(self, other: "Seed") -> bool:
        return self.B == other.B and all(rf_equal(a, b) for a, b in zip(self.extended, other.extended))


def mutate_cluster(seed: Seed, k: int) -> Seed:
    """Adjacent seed in direction k (1-based) via the exchange relation."""
    n = len(seed.cluster)
    if not 1 <= k <= n:
        raise ClusterError(f"mutation direction {k} out of range [1, {n}]")
    xk = seed.cluster[k - 1]
    if xk.is_zero():
        raise ClusterError("cluster variable is identically zero")
    x = seed.extended
    pos, neg = ONE, ONE
    for i, b in enumerate(seed.B[k - 1]):
        if b > 0:
            pos = pos * x[i] ** b
        elif b < 0:
            neg = neg * x[i] ** (-b)
    cluster = list(seed.cluster)
    cluster[k - 1] = (pos + neg) / xk
    B = tuple(tuple(r) for r in mutate_matrix(seed.B, k))
    return Seed(tuple(cluster), seed.stable, B)


def formal_seed(B: Sequence[Sequence[int]], prefix: str = "x", stable_prefix: str = "g") -> Seed:
    """Seed whose extended cluster consists of independent variables."""
    n, width = _check_matrix(B)
    cluster = tuple(var(f"{prefix}{i}") for i in range(1, n + 1))
    stable = tuple(var(f"{stable_prefix}{i}") for i in range(1, width - n + 1))
    return Seed(cluster, stable, tuple(tuple(r) for r in B))


def is_laurent(f: RationalFunction) -> bool:
    """True when some monomial times f is a polynomial."""
    if f.den.num_terms() == 1:
        return True
    d = f.den.degree()
    mu = 0
    for v in f.den.variables():
        mu += d << (BITS * v)
    _, r = f.num.mul_monomial(mu).divmod(f.den)
    return r.is_zero()


def laurent_check(seed: Seed, sequence: Sequence[int], name: str = "seed") -> Report:
    """Mutate a formal copy of the seed along ``sequence``; every new variable must be Laurent."""
    rep = Report()
    s = formal_seed(seed.B)
    for step, k in enumerate(sequence, 1):
        s = mutate_cluster(s, k)
        x = s.cluster[k - 1]
        rep.add("laurent", f"{name} step {step} dir {k}", is_laurent(x), x, "Laurent polynomial")
    return rep


# ------------------------------------------------------------------ tau-cluster


def rank(rows: Sequence[Sequence[object]]) -> int:
    a = [[mpq(x) for x in r] for r in rows]
    r = 0
    width = len(a[0]) if a else 0
    for c in range(width):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c] / a[r][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
    return r


def tau_exponents(B: Sequence[Sequence[int]], kappa: Sequence[int]) -> list[list[int]]:
    """Exponent matrix of tau in the extended cluster.

    Cluster rows use the full row of B; a stable row j uses b_jk = -b_kj
    against cluster variables and kappa_j on itself.
    """
    n, width = _check_matrix(B)
    if len(kappa) != width or any(kappa[j] for j in range(n)):
        raise ClusterError("kappa must have one entry per variable and vanish on cluster directions")
    E = [list(B[i]) for i in range(n)]
    for j in range(n, width):
        row = [-B[c][j] for c in range(n)] + [0] * (width - n)
        row[j] = kappa[j]
        E.append(row)
    return E


def choose_kappa(B: Sequence[Sequence[int]], limit: int = 16) -> list[int]:
    """Smallest nonnegative kappa_j, stable direction by stable direction, keeping full rank."""
    n, width = _check_matrix(B)
    if rank(B) != n:
        raise ClusterError("exchange matrix does not have full rank")
    kappa = [0] * width
    rows = [list(r) for r in B]
    for j in range(n, width):
        for kj in range(limit + 1):
            row = [-B[c][j] for c in range(n)] + [0] * (width - n)
            row[j] = kj
            if rank(rows + [row]) == len(rows) + 1:
                kappa[j] = kj
                rows.append(row)
                break
        else:
            raise ClusterError(f"no kappa up to {limit} for direction {j + 1}")
    return kappa


@dataclass(frozen=True, eq=False)
class TauCluster:
    tau: tuple[RationalFunction, ...]
    kappa: tuple[int, ...]
    exponents: tuple[tuple[int, ...], ...]


def tau_coordinates(seed: Seed, kappa: Sequence[int] | None = None) -> TauCluster:
    if kappa is None:
        kappa = choose_kappa(seed.B)
    E = tau_exponents(seed.B, kappa)
    x = seed.extended
    tau = []
    for row in E:
        t = ONE
        for xi, e in zip(x, row):
            if e:
                t = t * xi ** e
        tau.append(t)
    return TauCluster(tuple(tau), tuple(kappa), tuple(tuple(r) for r in E))


# ------------------------------------------------------- Grassmannian seed


def ell(i: int, j: int, k: int, m: int) -> int:
    return min(i - 1, m - j)


def plucker_set(i: int, j: int, k: int, m: int) -> tuple[int, ...]:
    """Column set I with f_ij = x_I / x_[1,k]."""
    l = ell(i, j, k, m)
    rows = set(range(1, k + 1)) - set(range(i - l, i + 1))
    return tuple(sorted(rows | set(range(j + k, j + k + l + 1))))


@dataclass(frozen=True, eq=False)
class GrassmannSeedData:
    k: int
    m: int
    f: dict[tuple[int, int], RationalFunction]
    order: tuple[tuple[int, int], ...]
    n_cluster: int
    gamma: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    Y: tuple[tuple[RationalFunction, ...], ...] = field(repr=False)

    def index(self, ij: tuple[int, int]) -> int:
        return self.order.index(ij)

    def is_stable(self, ij: tuple[int, int]) -> bool:
        i, j = ij
        return j == 1 or i == self.k


def _gamma_edges(k: int, m: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    out = []
    for i in range(1, k + 1):
        for j in range(1, m + 1):
            for a, b in (((i, j), (i, j + 1)), ((i + 1, j), (i, j)), ((i, j), (i + 1, j - 1))):
                if all(1 <= p <= k and 1 <= q <= m for p, q in (a, b)):
                    out.append((a, b))
    return out


def grassmann_initial_seed(k: int, m: int) -> tuple[Seed, GrassmannSeedData]:
    """Initial seed on the open cell in terms of the entries Y{i}_{j} of Y."""
    if k < 1 or m < 1:
        raise ClusterError("k and m must be positive")
    Y = tuple(tuple(var(f"Y{i}_{j}") for j in range(1, m + 1)) for i in range(1, k + 1))
    f = {}
    for i in range(1, k + 1):
        for j in range(1, m + 1):
            l = ell(i, j, k, m)
            F = det([[Y[r - 1][c - 1] for c in range(j, j + l + 1)] for r in range(i - l, i + 1)])
            f[(i, j)] = -F if ((k - i) * (l - 1)) % 2 else F
    cluster = [(i, j) for i in range(1, k) for j in range(2, m + 1)]
    stable = [(i, 1) for i in range(1, k + 1)] + [(k, j) for j in range(2, m + 1)]
    order = tuple(cluster + stable)
    pos = {ij: t for t, ij in enumerate(order)}
    edges = _gamma_edges(k, m)
    B = [[0] * len(order) for _ in cluster]
    for a, b in edges:
        if pos[a] < len(cluster):
            B[pos[a]][pos[b]] += 1
        if pos[b] < len(cluster):
            B[pos[b]][pos[a]] -= 1
    seed = Seed(tuple(f[ij] for ij in cluster), tuple(f[ij] for ij in stable), tuple(tuple(r) for r in B))
    return seed, GrassmannSeedData(k, m, f, order, len(cluster), tuple(edges), Y)


# ------------------------------------------------------------- network N(k, m)


def _grid(k: int, m: int):
    sx, sy = mpq(3, 5) / (m + 1), mpq(3, 5) / (k + 1)

    def centre(r: int, c: int):
        return (-mpq(3, 10) + sx * c, mpq(3, 10) - sy * r)

    return sx, sy, centre


def build_hex_network(k: int, m: int) -> Network:
    """The acyclic network N(k, m) with symbolic edge weights w1, w2, ...

    Sources b_1..b_k sit on the left, top to bottom; sinks b_{k+1}..b_n on
    top, right to left. Every grid crossing is a black vertex taking the
    row and the column in, followed by a white vertex sending them east and
    north; vertices left with degree two are smoothed out.
    """
    if k < 2 or m < 2:
        raise ClusterError("N(k, m) needs k, m >= 2")
    n = k + m
    sx, sy, centre = _grid(k, m)
    d = mpq(1, 5)
    pos, color, out, inc = {}, {}, {}, {}

    def add(v, p, c):
        pos[v], color[v], out[v], inc[v] = p, c, [], []

    def edge(a, b):
        out[a].append(b)
        inc[b].append(a)

    boundary = [(f"b{r}", SOURCE, circle_point_at(150 + 100 * (r - 1) / (k - 1))) for r in range(1, k + 1)]
    boundary += [(f"b{n + 1 - c}", SINK, circle_point_at(120 - 100 * (c - 1) / (m - 1))) for c in range(m, 0, -1)]
    for b, role, p in boundary:
        add(b, p, role)
    for r in range(1, k + 1):
        for c in range(1, m + 1):
            x, y = centre(r, c)
            add(f"a{r}_{c}", (x - d * sx, y - d * sy), BLACK)
            add(f"w{r}_{c}", (x + d * sx, y + d * sy), WHITE)
    for r in range(1, k + 1):
        for c in range(1, m + 1):
            edge(f"a{r}_{c}", f"w{r}_{c}")
            edge(f"b{r}" if c == 1 else f"w{r}_{c - 1}", f"a{r}_{c}")
            if r < k:
                edge(f"w{r + 1}_{c}", f"a{r}_{c}")
    for c in range(1, m + 1):
        edge(f"w1_{c}", f"b{n + 1 - c}")
    for v in [v for v in pos if color[v] in (WHITE, BLACK)]:
        if len(inc[v]) == 1 and len(out[v]) == 1:
            a, b = inc[v][0], out[v][0]
            out[a][out[a].index(v)] = b
            inc[b][inc[b].index(v)] = a
            for table in (pos, color, out, inc):
                del table[v]
    internal = sorted((v, color[v], pos[v]) for v in pos if color[v] in (WHITE, BLACK))
    edges = []
    for a in sorted(out, key=_vertex_key):
        for b in out[a]:
            edges.append((f"e{len(edges) + 1}", a, b, f"w{len(edges) + 1}"))
    return _build(sorted(boundary, key=lambda t: int(t[0][1:])), internal, edges, [f"w{t}" for t in range(1, len(edges) + 1)])


def _vertex_key(v: str):
    if v.startswith("b"):
        return (0, int(v[1:]), 0, "")
    r, c = v[1:].split("_")
    return (1, int(r), int(c), v[0])


@dataclass(frozen=True, eq=False)
class HexFaces:
    """Faces of N(k, m) with their labels (p, q); the unlabelled face maps to None."""

    k: int
    m: int
    net: Network
    faces: FaceSet
    label: dict[str, tuple[int, int] | None]

    @property
    def unlabelled(self) -> str:
        return next(f for f, l in self.label.items() if l is None)

    def fid(self, p: int, q: int) -> str:
        return next(f for f, l in self.label.items() if l == (p, q))

    def weights(self) -> dict[tuple[int, int], RationalFunction]:
        y = face_weights(self.net, self.faces)
        return {l: y[f] for f, l in self.label.items() if l is not None}


def hex_faces(k: int, m: int, net: Network | None = None) -> HexFaces:
    """Label the faces of N(k, m) by (p, q), p in [1, k], q in [k+1, n]."""
    net = net or build_hex_network(k, m)
    n = k + m
    faces = enumerate_faces(net)
    sx, sy, centre = _grid(k, m)
    label: dict[str, tuple[int, int] | None] = {}
    for f in faces.faces:
        if f.arcs:
            if len(f.arcs) != 1:
                raise ClusterError(f"face {f.id} touches the boundary circle twice")
            t = int(f.arcs[0][4:])
            if t < k:
                label[f.id] = (t + 1, n)
            elif t == k:
                label[f.id] = None
            else:
                label[f.id] = (1, t)
            continue
        vs = {net.edge(e).tail for e, _ in f.boundary} | {net.edge(e).head for e, _ in f.boundary}
        cx = sum(net.pos(v)[0] for v in vs) / len(vs)
        cy = sum(net.pos(v)[1] for v in vs) / len(vs)
        p = 1 + sum(1 for r in range(1, k + 1) if centre(r, 1)[1] > cy)
        c = 1 + sum(1 for c in range(1, m + 1) if centre(1, c)[0] < cx)
        label[f.id] = (p, n + 1 - c)
    got = [l for l in label.values() if l is not None]
    if len(set(got)) != k * m or len(got) != k * m:
        raise ClusterError("face labelling of N(k, m) is not a bijection")
    return HexFaces(k, m, net, faces, label)


def lindstrom_minor(net: Network, sources: Sequence[int], sinks: Sequence[int]) -> RationalFunction:
    """Signed sum over vertex-disjoint path families on an acyclic network."""
    if len(sources) != len(sinks):
        raise ClusterError("need as many sources as sinks")
    paths: dict[tuple[int, int], list[tuple[frozenset, RationalFunction]]] = {}
    for i in sources:
        for j in sinks:
            found = []
            stack = [(net.boundary_id(i), (net.boundary_id(i),), ONE)]
            target = net.boundary_id(j)
            while stack:
                v, seen, w = stack.pop()
                if v == target:
                    found.append((frozenset(seen), w))
                    continue
                for e in net.out_edges(v):
                    if e.head in seen:
                        raise ClusterError("network is not acyclic")
                    stack.append((e.head, seen + (e.head,), w * e.weight))
            paths[(i, j)] = found
    total = ZERO
    for perm in permutations(range(len(sinks))):
        inv = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
        families = [([], ONE, frozenset())]
        for a, i in enumerate(sources):
            nxt = []
            for _, w, used in families:
                for vs, pw in paths[(i, sinks[perm[a]])]:
                    if not vs & used:
                        nxt.append(([], w * pw, used | vs))
            families = nxt
        for _, w, _ in families:
            total = total - w if inv % 2 else total + w
    return total


# ----------------------------------------------------- face monomials


@dataclass(frozen=True)
class FaceMonomial:
    """sign * prod y_pq ** exps[(p, q)]."""

    sign: int
    exps: tuple[tuple[tuple[int, int], int], ...]

    @staticmethod
    def make(sign: int, exps: Mapping[tuple[int, int], int]) -> "FaceMonomial":
        return FaceMonomial(sign, tuple(sorted((pq, e) for pq, e in exps.items() if e)))

    def as_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.exps)

    def __mul__(self, other: "FaceMonomial") -> "FaceMonomial":
        e = self.as_dict()
        for pq, x in other.exps:
            e[pq] = e.get(pq, 0) + x
        return FaceMonomial.make(self.sign * other.sign, e)

    def __pow__(self, t: int) -> "FaceMonomial":
        return FaceMonomial.make(self.sign ** (t % 2) if t >= 0 else self.sign ** ((-t) % 2), {pq: x * t for pq, x in self.exps})

    def value(self, y: Mapping[tuple[int, int], RationalFunction]) -> RationalFunction:
        out = as_rf(self.sign)
        for pq, x in self.exps:
            out = out * y[pq] ** x
        return out

    def __str__(self) -> str:
        body = "*".join(f"y{p}_{q}" + (f"^{x}" if x != 1 else "") for (p, q), x in self.exps)
        return ("-" if self.sign < 0 else "") + (body or "1")


@lru_cache(maxsize=None)
def _hex_data(k: int, m: int):
    hf = hex_faces(k, m)
    y = hf.weights()
    P = plucker(extended_matrix(hf.net))
    base = P[tuple(range(1, k + 1))]
    f = {(i, j): P[plucker_set(i, j, k, m)] / base for i in range(1, k + 1) for j in range(1, m + 1)}
    return hf, y, f


def _unit_sign(r: RationalFunction) -> int:
    if r == ONE:
        return 1
    if r == -ONE:
        return -1
    return 0


def _f_exps(k: int, m: int, i: int, j: int) -> dict[tuple[int, int], int]:
    n = k + m
    return {(p, q): 1 + min(i - p, q - j - k) for p in range(1, i + 1) for q in range(j + k, n + 1)}


def f_via_face_weights(k: int, m: int, i: int, j: int) -> FaceMonomial:
    """f_ij on N(k, m) as a signed monomial in the labelled face weights.

    The sign is read off the network by comparing the monomial with the
    Pluecker ratio; a ratio other than +-1 raises.
    """
    if not (1 <= i <= k and 1 <= j <= m):
        raise ClusterError(f"({i}, {j}) outside [1, {k}] x [1, {m}]")
    _, y, f = _hex_data(k, m)
    mono = FaceMonomial.make(1, _f_exps(k, m, i, j))
    s = _unit_sign(f[(i, j)] / mono.value(y))
    if not s:
        raise ClusterError(f"f_{i}{j} is not a signed face monomial of the given shape")
    return FaceMonomial(s, mono.exps)


def _f_mono(k: int, m: int, i: int, j: int) -> FaceMonomial:
    if i == 0 or j == m + 1:
        return FaceMonomial.make(1, {})
    return f_via_face_weights(k, m, i, j)


def tau_face(k: int, m: int, i: int, j: int) -> FaceMonomial:
    """tau_ij = +- y_{i+1, j+k-1} for a cluster direction, sign from the f's."""
    if not (1 <= i <= k - 1 and 2 <= j <= m):
        raise ClusterError(f"({i}, {j}) is not a cluster direction")
    num = _f_mono(k, m, i + 1, j - 1) * _f_mono(k, m, i, j + 1) * _f_mono(k, m, i - 1, j)
    den = _f_mono(k, m, i, j - 1) * _f_mono(k, m, i + 1, j) * _f_mono(k, m, i - 1, j + 1)
    return FaceMonomial(num.sign * den.sign, FaceMonomial.make(1, {(i + 1, j + k - 1): 1}).exps)


def tau_star(k: int, m: int, i: int, j: int) -> FaceMonomial:
    """tau*_ij = tau_ij f_ij^(-kappa_ij) for a stable direction, by the case table."""
    n = k + m
    e: dict[tuple[int, int], int] = {}
    if i == k and 2 <= j <= m - 1:
        ratio = (_f_mono(k, m, k - 1, j), _f_mono(k, m, k - 1, j + 1))
        for p in range(1, k):
            for q in range(j + k, min(n, j + 2 * k - p - 1) + 1):
                e[(p, q)] = 1
    elif 2 <= i <= k - 1 and j == 1:
        ratio = (_f_mono(k, m, i, 2), _f_mono(k, m, i - 1, 2))
        for q in range(k + 2, n + 1):
            for p in range(max(1, i - q + k + 2), i + 1):
                e[(p, q)] = 1
    elif i == k and j == m:
        ratio = (_f_mono(k, m, k - 1, m), _f_mono(k, m, 0, 1))
        for p in range(1, k):
            e[(p, n)] = 1
    elif i == 1 and j == 1:
        ratio = (_f_mono(k, m, 1, 2), _f_mono(k, m, 0, 1))
        for q in range(k + 2, n + 1):
            e[(1, q)] = 1
    elif i == k and j == 1:
        ratio = (_f_mono(k, m, 0, 1), _f_mono(k, m, k - 1, 2))
        for p in range(1, k + 1):
            for q in range(k + 1, n + 1):
                e[(p, q)] = -min(k - p, q - k - 1)
    else:
        raise ClusterError(f"({i}, {j}) is not a stable direction")
    return FaceMonomial.make(ratio[0].sign * ratio[1].sign, e)


def face_monomial_check(k: int, m: int) -> Report:
    """Face-monomial formulas against N(k, m), each by two routes."""
    rep = Report()
    hf, y, f = _hex_data(k, m)
    net = hf.net
    M = measurement_matrix(net)
    inst = f"N({k},{m})"
    for i in range(1, k + 1):
        for j in range(1, m + 1):
            I = plucker_set(i, j, k, m)
            rows = [r for r in range(1, k + 1) if r not in I]
            cols = [c for c in I if c > k]
            mono = FaceMonomial.make(1, _f_exps(k, m, i, j)).value(y)
            s = _unit_sign(f[(i, j)] / mono)
            rep.add("f-face-monomial", f"{inst} f{i}{j}", s != 0, f[(i, j)], mono)
            lg = lindstrom_minor(net, rows, cols)
            mm = det([[M.entry(r, c) for c in cols] for r in rows])
            rep.add("lindstrom", f"{inst} f{i}{j}", rf_equal(lg, mm), lg, mm)
    for i in range(1, k):
        for j in range(2, m + 1):
            t = (f.get((i + 1, j - 1), ONE) * f.get((i, j + 1), ONE) * f.get((i - 1, j), ONE)) / (
                f.get((i, j - 1), ONE) * f.get((i + 1, j), ONE) * f.get((i - 1, j + 1), ONE)
            )
            ref = y[(i + 1, j + k - 1)]
            rep.add("tau-face-unit", f"{inst} tau{i}{j}", _unit_sign(t / ref) != 0, t, ref)
    stable = [(i, 1) for i in range(1, k + 1)] + [(k, j) for j in range(2, m + 1)]
    for i, j in stable:
        table = tau_star(k, m, i, j)
        if i == k and 2 <= j <= m - 1:
            direct = f[(k - 1, j)] / f[(k - 1, j + 1)]
        elif 2 <= i <= k - 1 and j == 1:
            direct = f[(i, 2)] / f[(i - 1, 2)]
        elif i == k and j == m:
            direct = f[(k - 1, m)]
        elif i == 1 and j == 1:
            direct = f[(1, 2)]
        else:
            direct = ONE / f[(k - 1, 2)]
        rep.add("tau-star-table", f"{inst} tau*{i}{j}", rf_equal(direct, table.value(y)), direct, table.value(y))
    return rep


# ---------------------------------------------------------- compatibility


@dataclass(frozen=True, eq=False)
class CompatibilityResult:
    k: int
    m: int
    B: tuple[tuple[int, ...], ...]
    omega: tuple[tuple[RationalFunction, ...], ...]
    factor: RationalFunction | None
    report: Report

    @property
    def ok(self) -> bool:
        return self.report.ok


def _face_omega(hf: HexFaces, alpha: object, beta: object) -> dict[tuple[tuple[int, int], tuple[int, int]], RationalFunction]:
    dual = dual_network(hf.net, hf.faces, alpha, beta)
    labelled = [(f, l) for f, l in hf.label.items() if l is not None]
    out = {}
    for f, a in labelled:
        for g, b in labelled:
            c = face_bracket(dual, f, g)
            if not c.is_zero():
                out[(a, b)] = c
    return out


def check_compatibility(k: int, m: int, alpha: object = "alpha", beta: object = "beta") -> CompatibilityResult:
    """Coefficient matrix of the face bracket in the tau basis against B.

    The check is proportionality of the cluster rows to B; the constant is
    returned in ``factor`` for the caller to compare.
    """
    if k < 2 or m < 2:
        raise ClusterError("compatibility check needs k, m >= 2")
    seed, data = grassmann_initial_seed(k, m)
    kappa = choose_kappa(seed.B)
    E = tau_exponents(seed.B, kappa)
    fm = [f_via_face_weights(k, m, *ij) for ij in data.order]
    tau: list[dict[tuple[int, int], int]] = []
    for row in E:
        t = FaceMonomial.make(1, {})
        for mono, e in zip(fm, row):
            if e:
                t = t * mono ** e
        tau.append(t.as_dict())
    hf = _hex_data(k, m)[0]
    w = _face_omega(hf, alpha, beta)
    N = data.n_cluster
    width = len(data.order)
    omega = []
    for a in range(N):
        row = []
        for b in range(width):
            c = ZERO
            for fa, ea in tau[a].items():
                for fb, eb in tau[b].items():
                    x = w.get((fa, fb))
                    if x is not None:
                        c = c + x * (ea * eb)
            row.append(c)
        omega.append(tuple(row))
    rep = Report()
    inst = f"N({k},{m})"
    # second route: the log-canonical bracket of the tau monomials themselves
    names = {pq: f"y{pq[0]}_{pq[1]}" for pq in hf.weights()}
    spec = BracketSpec.from_pairs(list(names.values()), {(names[a], names[b]): c for (a, b), c in w.items()})
    yv = {pq: var(s) for pq, s in names.items()}
    tau_rf = [FaceMonomial.make(1, t).value(yv) for t in tau]
    for a in range(N):
        for b in range(width):
            direct = log_canonical_bracket(spec, tau_rf[a], tau_rf[b]) / (tau_rf[a] * tau_rf[b])
            rep.add("omega-two-routes", f"{inst} ({a + 1},{b + 1})", rf_equal(direct, omega[a][b]), direct, omega[a][b])
    factor = None
    for a in range(N):
        for b in range(width):
            if seed.B[a][b]:
                factor = omega[a][b] / seed.B[a][b]
                break
        if factor is not None:
            break
    prop = factor is not None and all(rf_equal(omega[a][b], factor * seed.B[a][b]) for a in range(N) for b in range(width))
    rep.add("compat-proportional", inst, prop, "Omega first rows", f"({factor}) * B")
    # every stable f commutes with every cluster tau
    for a in range(N):
        for s in range(N, width):
            c = ZERO
            for fa, ea in tau[a].items():
                for fb, eb in fm[s].exps:
                    x = w.get((fa, fb))
                    if x is not None:
                        c = c + x * (ea * eb)
            ij = data.order[s]
            rep.add("stable-commute", f"{inst} tau{a + 1} f{ij[0]}{ij[1]}", c.is_zero(), c, 0)
    return CompatibilityResult(k, m, seed.B, tuple(omega), factor, rep)


def omega_from_matrix_bracket(
    k: int, m: int, alpha: object = "alpha", beta: object = "beta", seed: int = 0
) -> list[list[RationalFunction]]:
    """Cluster rows of the tau coefficient matrix computed from the matrix bracket.

    Uses only the matrix bracket on Mat_{k,m} with sources [1, k], so it is
    independent of networks, flags and faces. The coefficients are constant,
    so gradients are evaluated at one exact random point of the cell.
    """
    rng = random.Random(seed)
    n = k + m
    I, J = list(range(1, k + 1)), list(range(k + 1, n + 1))
    names = [[f"M{p}_{q}" for q in range(m)] for p in range(k)]
    M = [[var(s) for s in row] for row in names]
    point = {s: mpq(rng.randint(1, 40), rng.randint(1, 9)) for row in names for s in row}
    Mv = [[as_rf(point[s]) for s in row] for row in names]
    base = {
        (p * m + q, pb * m + qb): measurement_bracket(I, J, Mv, p, q, pb, qb, alpha, beta, n)
        for p in range(k)
        for q in range(m)
        for pb in range(k)
        for qb in range(m)
    }
    P = plucker(extended_from_measurements(I, J, M, n))
    seed_, data = grassmann_initial_seed(k, m)
    fs = [P[plucker_set(i, j, k, m)] / P[tuple(I)] for i, j in data.order]
    vid = [VARIABLES.id(s) for row in names for s in row]
    grads = []
    for f in fs:
        val = f.evaluate(point)
        grads.append([f.diff(v).evaluate(point) / val if v in f.variables() else mpq(0) for v in vid])
    L = len(fs)
    W = [[ZERO] * L for _ in range(L)]
    for x in range(L):
        for y in range(L):
            c = ZERO
            for a, ga in enumerate(grads[x]):
                if not ga:
                    continue
                for b, gb in enumerate(grads[y]):
                    if gb:
                        c = c + base[(a, b)] * (ga * gb)
            W[x][y] = c
    E = tau_exponents(seed_.B, choose_kappa(seed_.B))
    out = []
    for a in range(data.n_cluster):
        row = []
        for b in range(L):
            c = ZERO
            for x in range(L):
                for y in range(L):
                    if E[a][x] and E[b][y]:
                        c = c + W[x][y] * (E[a][x] * E[b][y])
            row.append(c)
        out.append(row)
    return out
