"""
Log-canonical brackets, the s-functions, matrix brackets on boundary
measurements, the R-matrix family and the pushforward verifier.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .exprcore import (
    BITS,
    ONE,
    VARIABLES,
    ZERO,
    Polynomial,
    RationalFunction,
    as_rf,
    rf_equal,
    var,
)

__all__ = [
    "BracketSpec",
    "BracketError",
    "CheckResult",
    "Report",
    "RMatrix",
    "log_canonical_bracket",
    "derivation_bracket",
    "s_eq",
    "s_cross",
    "matrix_bracket_IJ",
    "measurement_bracket",
    "check_jacobi_IJ",
    "s_identities_check",
    "sklyanin_bracket",
    "sklyanin_from_r",
    "sklyanin_agreement_check",
    "mcybe_check",
    "verify_pushforward",
    "epsilon",
    "grassmann_bracket_a",
    "epsilon_lemma_check",
    "coincidence_check",
    "short_plucker_check",
]


class BracketError(ValueError):
    pass


# -------------------------------------------------------------------- reports


@dataclass
class CheckResult:
    check_id: str
    instance: str
    status: str
    lhs: str = ""
    rhs: str = ""

    def to_json(self) -> dict:
        return {
            "check-id": self.check_id,
            "instance": self.instance,
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


@dataclass
class Report:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.status == "PASS" for r in self.results)

    def add(self, check_id: str, instance: str, passed: bool, lhs: object = "", rhs: object = "") -> bool:
        self.results.append(CheckResult(check_id, instance, "PASS" if passed else "FAIL", str(lhs), str(rhs)))
        return passed

    def extend(self, other: "Report") -> None:
        self.results.extend(other.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if r.status != "PASS"]

    def sorted(self) -> "Report":
        return Report(sorted(self.results, key=lambda r: (r.check_id, r.instance)))

    def dumps(self) -> str:
        return json.dumps([r.to_json() for r in self.results], indent=1)


# -------------------------------------------------------- log-canonical bracket


@dataclass(frozen=True, eq=False)
class BracketSpec:
    """Skew matrix omega on named variables; {z_a, z_b} = omega_ab z_a z_b."""

    variables: tuple[str, ...]
    omega: dict[tuple[str, str], RationalFunction]

    @staticmethod
    def from_pairs(names: Iterable[str], pairs: Mapping[tuple[str, str], object]) -> "BracketSpec":
        names = tuple(names)
        known = set(names)
        omega: dict[tuple[str, str], RationalFunction] = {}
        for (a, b), w in pairs.items():
            w = as_rf(w)
            if a == b:
                if not w.is_zero():
                    raise BracketError("diagonal entry of omega must vanish")
                continue
            for v in (a, b):
                if v not in known:
                    names = names + (v,)
                    known.add(v)
            if (b, a) in omega and not rf_equal(omega[(b, a)], -w):
                raise BracketError(f"omega not antisymmetric at ({a}, {b})")
            if w.is_zero():
                continue
            omega[(a, b)] = w
            omega[(b, a)] = -w
        return BracketSpec(names, omega)

    def coefficient(self, a: str, b: str) -> RationalFunction:
        return self.omega.get((a, b), ZERO)

    def pairs(self) -> list[tuple[int, int, Polynomial, Polynomial]]:
        """Pairs a < b as (id_a, id_b, numerator, denominator) of omega."""
        cache = getattr(self, "_pairs", None)
        if cache is None:
            cache = []
            for (a, b), w in self.omega.items():
                if a < b:
                    cache.append((VARIABLES.register(a), VARIABLES.register(b), w.num, w.den))
            object.__setattr__(self, "_pairs", cache)
        return cache

    def variable_ids(self) -> set[int]:
        return {VARIABLES.register(v) for v in self.variables}


def _euler_parts(f: RationalFunction, vids: Iterable[int]) -> dict[int, Polynomial]:
    """z_a (N_a D - N D_a) for each variable, so z_a df/dz_a = part / D^2."""
    out = {}
    num, den = f.num, f.den
    for a in vids:
        na = num.diff(a)
        da = den.diff(a)
        if na.is_zero() and da.is_zero():
            continue
        part = na * den - num * da
        out[a] = part.mul_monomial(1 << (BITS * a)) if not part.is_zero() else part
    return out


def log_canonical_bracket(spec: BracketSpec, f: object, g: object) -> RationalFunction:
    """{f, g} = sum over a < b of omega_ab z_a z_b (f_a g_b - f_b g_a)."""
    f, g = as_rf(f), as_rf(g)
    allowed = spec.variable_ids() | _parameter_ids(spec)
    for h in (f, g):
        extra = h.variables() - allowed
        if extra:
            names = ", ".join(sorted(VARIABLES.name(v) for v in extra))
            raise BracketError(f"variable outside the bracket spec: {names}")
    vids = spec.variable_ids()
    fp = _euler_parts(f, vids & f.variables())
    gp = _euler_parts(g, vids & g.variables())
    if not fp or not gp:
        return ZERO
    terms: dict[Polynomial, Polynomial] = {}
    for a, b, wn, wd in spec.pairs():
        fa, fb, ga, gb = fp.get(a), fp.get(b), gp.get(a), gp.get(b)
        acc = Polynomial()
        if fa is not None and gb is not None:
            acc = acc + fa * gb
        if fb is not None and ga is not None:
            acc = acc - fb * ga
        if acc.is_zero():
            continue
        acc = acc * wn
        terms[wd] = terms.get(wd, Polynomial()) + acc
    den0 = (f.den * f.den) * (g.den * g.den)
    total = ZERO
    for wd, acc in terms.items():
        if not acc.is_zero():
            total = total + RationalFunction(acc, den0 * wd)
    return total


def _parameter_ids(spec: BracketSpec) -> set[int]:
    ids: set[int] = set()
    for w in spec.omega.values():
        ids |= w.variables()
    return ids


def derivation_bracket(
    base: Mapping[tuple[str, str], RationalFunction],
    names: Sequence[str],
    f: object,
    g: object,
) -> RationalFunction:
    """{f, g} = sum_{a,b} f_a g_b {z_a, z_b} for a bracket given on generators."""
    f, g = as_rf(f), as_rf(g)
    ids = {nm: VARIABLES.register(nm) for nm in names}
    df = {nm: f.diff(i) for nm, i in ids.items() if i in f.variables()}
    dg = {nm: g.diff(i) for nm, i in ids.items() if i in g.variables()}
    total = ZERO
    for a, fa in df.items():
        for b, gb in dg.items():
            w = base.get((a, b))
            if w is not None and not w.is_zero():
                total = total + fa * gb * w
    return total


# ---------------------------------------------------------------- s-functions


def _cyc(n: int, *pts: int) -> bool:
    """Points distinct and met in this order going counterclockwise."""
    a = pts[0]
    offs = [(p - a) % n for p in pts]
    return len(set(offs)) == len(offs) and offs == sorted(offs)


def _check_args(i: int, j: int, ip: int, jp: int, I: Sequence[int] | None, J: Sequence[int] | None) -> None:
    if I is not None and (i not in I or ip not in I):
        raise ValueError("source index not in I")
    if J is not None and (j not in J or jp not in J):
        raise ValueError("sink index not in J")
    if {i, ip} & {j, jp}:
        raise ValueError("source and sink indices must differ")


def s_eq(i: int, j: int, ip: int, jp: int, n: int, I: Sequence[int] | None = None, J: Sequence[int] | None = None) -> mpq:
    """The function s_= on a source-sink quadruple, with boundary labels 1..n counterclockwise."""
    _check_args(i, j, ip, jp, I, J)
    if i == ip and j == jp:
        return mpq(0)
    if i == ip:
        return mpq(1, 2) if _cyc(n, i, jp, j) else mpq(-1, 2)
    if j == jp:
        return mpq(1, 2) if _cyc(n, i, ip, j) else mpq(-1, 2)
    if _cyc(n, i, ip, jp, j):
        return mpq(1)
    if _cyc(n, ip, i, j, jp):
        return mpq(-1)
    return mpq(0)


def s_cross(i: int, j: int, ip: int, jp: int, n: int, I: Sequence[int] | None = None, J: Sequence[int] | None = None) -> mpq:
    """The function s_x on a source-sink quadruple."""
    _check_args(i, j, ip, jp, I, J)
    if i == ip and j == jp:
        return mpq(0)
    if i == ip:
        return mpq(1, 2) if _cyc(n, i, jp, j) else mpq(-1, 2)
    if j == jp:
        return mpq(1, 2) if _cyc(n, ip, i, j) else mpq(-1, 2)
    if _cyc(n, ip, i, jp, j):
        return mpq(1)
    if _cyc(n, i, ip, j, jp):
        return mpq(-1)
    return mpq(0)


def matrix_bracket_IJ(
    I: Sequence[int],
    J: Sequence[int],
    p: int,
    q: int,
    pb: int,
    qb: int,
    alpha: object = "alpha",
    beta: object = "beta",
    n: int | None = None,
) -> tuple[RationalFunction, RationalFunction]:
    """Coefficients (c1, c2) with {M_pq, M_pbqb} = c1 M_{p qb} M_{pb q} + c2 M_pq M_pbqb.

    Indices p, pb, q, qb are 0-based positions in I and J.
    """
    n = n if n is not None else len(I) + len(J)
    a, b = as_rf(alpha), as_rf(beta)
    args = (I[p], J[q], I[pb], J[qb], n)
    c1 = (a - b) * as_rf(s_eq(*args))
    c2 = (a + b) * as_rf(s_cross(*args))
    return c1, c2


def measurement_bracket(
    I: Sequence[int],
    J: Sequence[int],
    M: Sequence[Sequence[RationalFunction]],
    p: int,
    q: int,
    pb: int,
    qb: int,
    alpha: object = "alpha",
    beta: object = "beta",
    n: int | None = None,
) -> RationalFunction:
    """The matrix bracket with the entries of M substituted."""
    c1, c2 = matrix_bracket_IJ(I, J, p, q, pb, qb, alpha, beta, n)
    out = ZERO
    if not c1.is_zero():
        out = out + c1 * M[p][qb] * M[pb][q]
    if not c2.is_zero():
        out = out + c2 * M[p][q] * M[pb][qb]
    return out


# --------------------------------------------------------------------- Jacobi


def _entry_names(k: int, m: int) -> list[list[str]]:
    return [[f"M{p + 1}_{q + 1}" for q in range(m)] for p in range(k)]


def _free_bracket_table(I: Sequence[int], J: Sequence[int], alpha: object, beta: object, n: int) -> tuple[list[str], dict]:
    k, m = len(I), len(J)
    names = _entry_names(k, m)
    M = [[var(nm) for nm in row] for row in names]
    table = {}
    for p, q, pb, qb in product(range(k), range(m), range(k), range(m)):
        table[(names[p][q], names[pb][qb])] = measurement_bracket(I, J, M, p, q, pb, qb, alpha, beta, n)
    flat = [nm for row in names for nm in row]
    return flat, table


def _poly_bracket(table: Mapping, ids: Mapping[str, int], f: Polynomial, g: Polynomial) -> Polynomial:
    total = Polynomial()
    fv = f.variables()
    gv = g.variables()
    for a, ia in ids.items():
        if ia not in fv:
            continue
        fa = f.diff(ia)
        for b, ib in ids.items():
            if ib not in gv:
                continue
            w = table[(a, b)]
            if w.is_zero():
                continue
            total = total + fa * g.diff(ib) * w.num
    return total


def check_jacobi_IJ(
    I: Sequence[int],
    J: Sequence[int],
    alpha: object = "alpha",
    beta: object = "beta",
    n: int | None = None,
) -> Report:
    """Cyclic sum of the matrix bracket on free entries, for all triples of generators."""
    n = n if n is not None else len(I) + len(J)
    names, table = _free_bracket_table(I, J, alpha, beta, n)
    ids = {nm: VARIABLES.register(nm) for nm in names}
    gens = {nm: var(nm).num for nm in names}
    rep = Report()
    inst = f"I={list(I)} n={n}"
    bad = None
    for a, b, c in combinations(names, 3):
        s = (
            _poly_bracket(table, ids, gens[a], table[(b, c)].num)
            + _poly_bracket(table, ids, gens[b], table[(c, a)].num)
            + _poly_bracket(table, ids, gens[c], table[(a, b)].num)
        )
        if not s.is_zero():
            bad = (a, b, c, s)
            break
    if bad is None:
        rep.add("jacobi-IJ", inst, True, "0", "0")
    else:
        rep.add("jacobi-IJ", f"{inst} ({bad[0]},{bad[1]},{bad[2]})", False, bad[3], "0")
    return rep


def _s_tables(I: Sequence[int], J: Sequence[int], n: int):
    import numpy as np

    k, m = len(I), len(J)
    seq = np.zeros((k, m, k, m))
    scr = np.zeros((k, m, k, m))
    for p, q, pb, qb in product(range(k), range(m), range(k), range(m)):
        seq[p, q, pb, qb] = float(s_eq(I[p], J[q], I[pb], J[qb], n))
        scr[p, q, pb, qb] = float(s_cross(I[p], J[q], I[pb], J[qb], n))
    return seq, scr


def s_identities_check(n: int) -> Report:
    """The three s-function identities behind the Jacobi identity, for every I in [1, n].

    Sextuples meeting one of the easy coincidence conditions are excluded.
    Values are halves of integers, so float arithmetic is exact here.
    """
    import numpy as np

    rep = Report()
    worst = [0.0, 0.0, 0.0]
    for k in range(1, n):
        for I in combinations(range(1, n + 1), k):
            J = [j for j in range(1, n + 1) if j not in I]
            m = len(J)
            E, X = _s_tables(I, J, n)
            P = np.arange(k)
            Q = np.arange(m)
            i, j, i1, j1, i2, j2 = np.meshgrid(P, Q, P, Q, P, Q, indexing="ij")
            easy = (
                ((i == i1) & (i1 == i2))
                | ((j == j1) & (j1 == j2))
                | ((i == i1) & (j == j1))
                | ((i == i2) & (j == j2))
                | ((i1 == i2) & (j1 == j2))
            )
            first = (
                X[i1, j1, i2, j2] * X[i, j, i2, j2]
                + X[i2, j2, i, j] * X[i1, j1, i, j]
                + X[i, j, i1, j1] * X[i2, j2, i1, j1]
                + X[i1, j1, i2, j2] * X[i, j, i1, j1]
                + X[i2, j2, i, j] * X[i1, j1, i2, j2]
                + X[i, j, i1, j1] * X[i2, j2, i, j]
            )
            second = (
                E[i1, j1, i2, j2] * E[i, j, i2, j1]
                + E[i2, j2, i, j] * E[i1, j1, i, j2]
                + E[i, j, i1, j1] * E[i2, j2, i1, j]
            )
            third = E[i1, j1, i2, j2] * (
                X[i, j, i2, j1] + X[i, j, i1, j2] - X[i, j, i2, j2] - X[i, j, i1, j1]
            )
            for t, arr in enumerate((first, second, third)):
                worst[t] = max(worst[t], float(np.abs(np.where(easy, 0.0, arr)).max()))
    for t in range(3):
        rep.add(f"s-identity-{t + 1}", f"n={n}", worst[t] == 0.0, worst[t], 0)
    return rep


# ------------------------------------------------------------- R-matrix layer


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def sklyanin_bracket(k: int, alpha: object, beta: object, ij: tuple[int, int], ijb: tuple[int, int]) -> tuple[RationalFunction, RationalFunction]:
    """Coefficients (c1, c2) with {A_ij, A_ij'} = c1 A_{i j'} A_{i' j} + c2 A_ij A_i'j'.

    Indices are 1-based in [1, k]; the formula is the matrix-entry form of
    the bracket on Mat_k.
    """
    (i, j), (ib, jb) = ij, ijb
    for t in (i, j, ib, jb):
        if not 1 <= t <= k:
            raise ValueError("index out of range")
    a, b = as_rf(alpha), as_rf(beta)
    si, sj = _sign(ib - i), _sign(jb - j)
    half = mpq(1, 2)
    c1 = (a - b) * as_rf(half * (si + sj))
    c2 = (a + b) * as_rf(half * (si - sj))
    return c1, c2


@dataclass(frozen=True)
class RMatrix:
    """(alpha - beta)/2 R0 + (alpha + beta)/2 S pi0 on k x k matrices."""

    k: int
    alpha: object
    beta: object

    @property
    def c1(self):
        return (self.alpha - self.beta) / 2

    @property
    def c2(self):
        return (self.alpha + self.beta) / 2

    def __call__(self, xi):
        k = self.k
        c1, c2 = self.c1, self.c2
        out = [[None] * k for _ in range(k)]
        for r in range(k):
            for c in range(k):
                out[r][c] = c1 * _sign(c - r) * xi[r][c]
        for r in range(k):
            s = 0 * xi[0][0]
            for j in range(k):
                s = s + _sign(j - r) * xi[j][j]
            out[r][r] = out[r][r] + c2 * s
        return out


def _mm(a, b):
    k = len(a)
    return [[sum((a[r][t] * b[t][c] for t in range(k)), 0 * a[0][0]) for c in range(k)] for r in range(k)]


def _madd(a, b, s=1):
    return [[x + s * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _comm(a, b):
    return _madd(_mm(a, b), _mm(b, a), -1)


def _trace(a):
    return sum((a[r][r] for r in range(len(a))), 0 * a[0][0])


def mcybe_residual(r: RMatrix, xi, eta, scaled: bool = False):
    """[R xi, R eta] - R([R xi, eta] + [xi, R eta]) + c [xi, eta], with c = 1 or c1^2."""
    rx, ry = r(xi), r(eta)
    lhs = _madd(_comm(rx, ry), r(_madd(_comm(rx, eta), _comm(xi, ry))), -1)
    c = r.c1 * r.c1 if scaled else 1
    return _madd(lhs, [[c * x for x in row] for row in _comm(xi, eta)])


def mcybe_check(r: RMatrix, trials: int = 100, seed: int = 0, scaled: bool = False, bound: int = 5) -> Report:
    """Residual of the modified classical Yang-Baxter equation on random integer pairs.

    With ``scaled`` the right-hand side is -c1^2 [xi, eta], the form that holds
    for every (alpha, beta); without it the literal equation is tested.
    Skew-symmetry of R under the trace form is checked on the same pairs.
    """
    rng = random.Random(seed)
    k = r.k
    rep = Report()
    inst = f"k={k} alpha={r.alpha} beta={r.beta}"
    res_bad = skew_bad = None
    for t in range(trials):
        xi = [[mpq(rng.randint(-bound, bound)) for _ in range(k)] for _ in range(k)]
        eta = [[mpq(rng.randint(-bound, bound)) for _ in range(k)] for _ in range(k)]
        if t % 2:
            # trace-zero pair
            xi[k - 1][k - 1] -= _trace(xi)
            eta[k - 1][k - 1] -= _trace(eta)
        if t == 0:
            eta = [row[:] for row in xi]
        res = mcybe_residual(r, xi, eta, scaled)
        if res_bad is None and any(x != 0 for row in res for x in row):
            res_bad = (t, res)
        skew = _trace(_mm(r(xi), eta)) + _trace(_mm(xi, r(eta)))
        if skew_bad is None and skew != 0:
            skew_bad = (t, skew)
    cid = "mcybe-scaled" if scaled else "mcybe"
    rep.add(cid, inst, res_bad is None, "0" if res_bad is None else res_bad[1], "0")
    rep.add("r-skew", inst, skew_bad is None, "0" if skew_bad is None else skew_bad[1], "0")
    return rep


def sklyanin_from_r(k: int, alpha: object, beta: object, ij: tuple[int, int], ijb: tuple[int, int]) -> RationalFunction:
    """Bracket of two matrix entries from the R-matrix formula on Mat_k.

    {f1, f2} = 1/2 Tr(R(grad f1 x) grad f2 x) - 1/2 Tr(R(x grad f1) x grad f2).
    """
    x = [[var(f"A{r + 1}_{c + 1}") for c in range(k)] for r in range(k)]
    r_op = RMatrix(k, as_rf(alpha), as_rf(beta))

    def grad(i: int, j: int):
        g = [[ZERO] * k for _ in range(k)]
        g[j - 1][i - 1] = ONE
        return g

    g1, g2 = grad(*ij), grad(*ijb)
    left = _trace(_mm(r_op(_mm(g1, x)), _mm(g2, x)))
    right = _trace(_mm(r_op(_mm(x, g1)), _mm(x, g2)))
    return (left - right) * as_rf(mpq(1, 2))


def sklyanin_agreement_check(k: int) -> Report:
    """Relate the matrix-entry Sklyanin formula to the other two brackets on Mat_k.

    Checks that it equals the matrix bracket for I = [1, k], J = [k + 1, 2k]
    after A = M W0 and (alpha, beta) -> (-beta, -alpha), and that the
    R-matrix formula with R_{alpha, beta} equals half of it.
    """
    a, b = var("alpha"), var("beta")
    I = list(range(1, k + 1))
    J = list(range(k + 1, 2 * k + 1))
    entry = lambda r, c: var(f"A{r}_{c}")
    rep = Report()
    bad_m = bad_r = None
    for (i, j), (ib, jb) in product(product(I, I), repeat=2):
        c1, c2 = sklyanin_bracket(k, a, b, (i, j), (ib, jb))
        d1, d2 = matrix_bracket_IJ(I, J, i - 1, k - j, ib - 1, k - jb, -b, -a)
        if bad_m is None and not (rf_equal(c1, d1) and rf_equal(c2, d2)):
            bad_m = ((i, j, ib, jb), (c1, c2), (d1, d2))
        lhs = sklyanin_from_r(k, a, b, (i, j), (ib, jb))
        rhs = as_rf(mpq(1, 2)) * (c1 * entry(i, jb) * entry(ib, j) + c2 * entry(i, j) * entry(ib, jb))
        if bad_r is None and not rf_equal(lhs, rhs):
            bad_r = ((i, j, ib, jb), lhs, rhs)
    inst = f"k={k}"
    if bad_m is None:
        rep.add("sklyanin-vs-matrix", inst, True, "equal", "equal")
    else:
        rep.add("sklyanin-vs-matrix", f"{inst} {bad_m[0]}", False, bad_m[1], bad_m[2])
    if bad_r is None:
        rep.add("sklyanin-vs-r", inst, True, "equal", "equal")
    else:
        rep.add("sklyanin-vs-r", f"{inst} {bad_r[0]}", False, bad_r[1], bad_r[2])
    return rep


# ------------------------------------------------------------ pushforward check


def verify_pushforward(
    net,
    alpha: object = "alpha",
    beta: object = "beta",
    gauge_reduced: bool = True,
    swap: Mapping[str, bool] | None = None,
    name: str = "network",
    weighted=None,
) -> Report:
    """Compare brackets of boundary measurements with the matrix bracket.

    The left side is the log-canonical flag bracket applied to the measurement
    rational functions; the right side is the matrix bracket in (alpha, beta)
    with the measurements substituted. With ``gauge_reduced`` false the
    six-parameter bracket is used and the right side takes
    alpha = a23 + a13 - a12 and beta = b23 + b13 - b12.
    """
    from .measurement import measurement_matrix
    from .network import assign_flag_variables

    if weighted is None:
        fnet, spec = assign_flag_variables(net, gauge_reduced, alpha, beta, swap)
    else:
        fnet, spec = weighted
    if gauge_reduced:
        a, b = as_rf(alpha), as_rf(beta)
    else:
        a = var("a23") + var("a13") - var("a12")
        b = var("b23") + var("b13") - var("b12")
    M = measurement_matrix(fnet)
    I, J = list(M.sources), list(M.sinks)
    k, m = len(I), len(J)
    n = net.n
    rep = Report()
    entries = [(p, q) for p in range(k) for q in range(m)]
    for x in range(len(entries)):
        for y in range(x + 1, len(entries)):
            (p, q), (pb, qb) = entries[x], entries[y]
            lhs = log_canonical_bracket(spec, M.entries[p][q], M.entries[pb][qb])
            rhs = measurement_bracket(I, J, M.entries, p, q, pb, qb, a, b, n)
            ok = rf_equal(lhs, rhs)
            inst = f"{name} M({I[p]},{J[q]}) M({I[pb]},{J[qb]})"
            rep.add("pushforward", inst, ok, lhs, rhs)
    if not entries:
        rep.add("pushforward", f"{name} empty", True, "0", "0")
    return rep


# ---------------------------------------------------------- Grassmannian layer


def epsilon(i: int, ip: int, k: int) -> int:
    """0 when exactly one of i, i' lies in [1, k], else sign(i - i')."""
    if (i <= k) != (ip <= k):
        return 0
    return _sign(i - ip)


def _replace(S: Sequence[int], old: int, new: int) -> tuple[int, ...] | None:
    """S with ``old`` replaced in place by ``new``; None if ``new`` repeats."""
    if new in S and new != old:
        return None
    return tuple(new if s == old else s for s in S)


def grassmann_bracket_a(I: Sequence[int], Ip: Sequence[int], k: int, variant: str) -> list[tuple[int, tuple[int, ...] | None, tuple[int, ...] | None]]:
    """Formal bracket {a_I, a_I'} as a list of (coefficient, S, S') meaning coeff a_S a_S'.

    ``first`` gives sum eps_{ii'} a_{I(i->i')} a_{I'(i'->i)}; ``second`` gives
    a_I a_I' sum eps_{ii'}. Index tuples are ordered; replacement happens in
    place and a ``None`` index set stands for a vanishing a.
    """
    I, Ip = tuple(I), tuple(Ip)
    if variant == "first":
        out = []
        for i in I:
            for ip in Ip:
                e = epsilon(i, ip, k)
                if e:
                    out.append((e, _replace(I, i, ip), _replace(Ip, ip, i)))
        return out
    if variant == "second":
        e = sum(epsilon(i, ip, k) for i in I for ip in Ip)
        return [(e, I, Ip)] if e else []
    raise ValueError("variant must be 'first' or 'second'")


def epsilon_lemma_check(n: int) -> Report:
    """Exhaustive check of the two epsilon identities for every k and I in [1, n]."""
    rep = Report()
    bad = {"epsilon-parallel": None, "epsilon-crossing": None}
    count = 0
    for k in range(1, n):
        for I in combinations(range(1, n + 1), k):
            J = [j for j in range(1, n + 1) if j not in I]
            for ip, ipb in product(I, I):
                for j, jb in product(J, J):
                    count += 1
                    e = lambda a, b: epsilon(a, b, k)
                    lhs1 = e(j, jb) + e(ipb, ip) - e(j, ip) - e(ipb, jb)
                    rhs1 = 2 * s_eq(ip, j, ipb, jb, n)
                    if lhs1 != rhs1 and bad["epsilon-parallel"] is None:
                        bad["epsilon-parallel"] = (k, I, ip, j, ipb, jb, lhs1, rhs1)
                    lhs2 = e(ip, ipb) - e(ip, jb) - e(j, ipb) + e(j, jb)
                    rhs2 = 2 * s_cross(ip, j, ipb, jb, n)
                    if lhs2 != rhs2 and bad["epsilon-crossing"] is None:
                        bad["epsilon-crossing"] = (k, I, ip, j, ipb, jb, lhs2, rhs2)
    for cid, b in bad.items():
        if b is None:
            rep.add(cid, f"n={n} ({count} cases)", True, "equal", "equal")
        else:
            rep.add(cid, f"n={n} k={b[0]} I={list(b[1])} (i,j,i',j')={b[2:6]}", False, b[6], b[7])
    return rep


def _det_q(a: list[list[mpq]]) -> mpq:
    a = [row[:] for row in a]
    n = len(a)
    d = mpq(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return mpq(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            d = -d
        d *= a[c][c]
        inv = 1 / a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] * inv
            if f:
                for t in range(c, n):
                    a[r][t] -= f * a[c][t]
    return d


class _GrassPoint:
    """Exact Pluecker data of X = [1 | m] at a rational point."""

    def __init__(self, m: list[list[mpq]], k: int, n: int):
        self.k, self.n = k, n
        self.x = [[mpq(int(r == c)) for c in range(k)] + list(m[r]) for r in range(k)]
        self.cache: dict[tuple[int, ...], mpq] = {}

    def plucker(self, S: tuple[int, ...] | None) -> mpq:
        """Alternating Pluecker coordinate for columns in the given order."""
        if S is None or len(set(S)) != len(S):
            return mpq(0)
        key = tuple(sorted(S))
        v = self.cache.get(key)
        if v is None:
            v = _det_q([[self.x[r][c - 1] for c in key] for r in range(self.k)])
            self.cache[key] = v
        inv = sum(1 for x in range(len(S)) for y in range(x + 1, len(S)) if S[x] > S[y])
        return -v if inv % 2 else v

    def a(self, S):
        return self.plucker(S)

    def grad_plucker(self, S: tuple[int, ...]) -> dict[tuple[int, int], mpq]:
        """Derivatives of x_S in the entries m_{r, c} (row r, column c > k)."""
        out = {}
        k = self.k
        for pos, c in enumerate(S):
            if c <= k:
                continue
            others = [s for s in S if s != c]
            for r in range(k):
                rows = [t for t in range(k) if t != r]
                sub = [[self.x[t][s - 1] for s in others] for t in rows]
                cof = _det_q(sub) if sub else mpq(1)
                sgn = -1 if (r + pos) % 2 else 1
                if cof:
                    out[(r, c)] = out.get((r, c), mpq(0)) + sgn * cof
        return out


def _m_coord(gp: _GrassPoint, I: tuple[int, ...], ip: int, j: int):
    """Value and gradient of m^I_{pj} = x_{I(ip->j)} / x_I."""
    S = _replace(I, ip, j)
    xs, xi = gp.plucker(S), gp.plucker(I)
    gs, gi = gp.grad_plucker(S), gp.grad_plucker(I)
    val = xs / xi
    grad = {}
    for key in set(gs) | set(gi):
        grad[key] = (gs.get(key, 0) * xi - xs * gi.get(key, 0)) / (xi * xi)
    return val, grad


def coincidence_check(n: int, seed: int = 0, points: int = 1, bound: int = 9) -> Report:
    """Cell independence of the Grassmannian bracket at random exact points.

    For every k, every I and every pair of coordinates m^I_{pj}, m^I_{p'j'},
    three values are compared for each of the two parts of the bracket:
    the pushforward of the [1, k] bracket by the chain rule, the formal
    a-bracket route with the epsilon function, and the matrix bracket on the
    cell of I.
    """
    rng = random.Random(seed)
    rep = Report()
    for k in range(1, n):
        base_I = list(range(1, k + 1))
        base_J = list(range(k + 1, n + 1))
        m_cols = n - k
        for _ in range(points):
            mvals = [[mpq(rng.randint(-bound, bound) or 1, rng.randint(1, bound)) for _ in range(m_cols)] for _ in range(k)]
            gp = _GrassPoint(mvals, k, n)
            # the base bracket on entries m_{r,c}, split into its two parts
            keys = [(r, c) for r in range(k) for c in range(k + 1, n + 1)]
            base = {}
            for (r, c), (rb, cb) in product(keys, keys):
                q, qb = base_J.index(c), base_J.index(cb)
                e1 = s_eq(base_I[r], c, base_I[rb], cb, n)
                e2 = s_cross(base_I[r], c, base_I[rb], cb, n)
                m = lambda rr, cc: gp.x[rr][cc - 1]
                base[((r, c), (rb, cb))] = (e1 * m(r, cb) * m(rb, c), e2 * m(r, c) * m(rb, cb))
            fails = 0
            first_fail = None
            for I in combinations(range(1, n + 1), k):
                if gp.plucker(I) == 0:
                    continue
                J = [j for j in range(1, n + 1) if j not in I]
                coords = {(ip, j): _m_coord(gp, I, ip, j) for ip in I for j in J}
                for (ip, j), (ipb, jb) in product(coords, coords):
                    v1, g1 = coords[(ip, j)]
                    v2, g2 = coords[(ipb, jb)]
                    chain = [mpq(0), mpq(0)]
                    for ka, da in g1.items():
                        for kb, db in g2.items():
                            w = base[(ka, kb)]
                            chain[0] += da * db * w[0]
                            chain[1] += da * db * w[1]
                    formal = _formal_m_bracket(gp, I, ip, j, ipb, jb, k)
                    target = (
                        s_eq(ip, j, ipb, jb, n) * coords[(ip, jb)][0] * coords[(ipb, j)][0],
                        s_cross(ip, j, ipb, jb, n) * v1 * v2,
                    )
                    for part in range(2):
                        # the formal route carries the factor 2 of alpha -+ beta = 2
                        if not (chain[part] == target[part] and formal[part] == 2 * target[part]):
                            fails += 1
                            if first_fail is None:
                                first_fail = (I, ip, j, ipb, jb, part, chain[part], formal[part], target[part])
            inst = f"n={n} k={k}"
            if first_fail is None:
                rep.add("plucker-bracket", inst, True, "equal", "equal")
            else:
                I, ip, j, ipb, jb, part, c, f, t = first_fail
                rep.add(
                    "plucker-bracket",
                    f"{inst} I={list(I)} (i,j,i',j')=({ip},{j},{ipb},{jb}) part={part + 1} fails={fails}",
                    False,
                    f"chain={c} formal={f}",
                    f"target={t}",
                )
    return rep


def _formal_a_bracket(gp: _GrassPoint, S, Sp, k: int, variant: str) -> mpq:
    if S is None or Sp is None:
        return mpq(0)
    x0 = gp.plucker(tuple(range(1, k + 1)))
    total = mpq(0)
    for c, A, B in grassmann_bracket_a(S, Sp, k, variant):
        total += c * gp.plucker(A) * gp.plucker(B)
    return total / (x0 * x0)


def _formal_m_bracket(gp: _GrassPoint, I, ip, j, ipb, jb, k: int) -> tuple[mpq, mpq]:
    """{m^I_pj, m^I_p'j'} from the a-brackets by the quotient rule, both variants."""
    x0 = gp.plucker(tuple(range(1, k + 1)))
    A = _replace(I, ip, j)
    B = _replace(I, ipb, jb)
    aI = gp.plucker(I) / x0
    aA = gp.plucker(A) / x0
    aB = gp.plucker(B) / x0
    out = []
    for variant in ("first", "second"):
        br = lambda S, T: _formal_a_bracket(gp, S, T, k, variant)
        val = (br(A, B) * aI * aI - aA * aI * br(I, B) - aB * aI * br(A, I) + aA * aB * br(I, I)) / aI**4
        out.append(val)
    return out[0], out[1]


def _signed(pv, cols: Sequence[int]) -> RationalFunction:
    """Alternating Pluecker coordinate for an unsorted column list."""
    cols = list(cols)
    if len(set(cols)) != len(cols):
        return ZERO
    inv = sum(1 for x in range(len(cols)) for y in range(x + 1, len(cols)) if cols[x] > cols[y])
    v = pv[cols]
    return -v if inv % 2 else v


def short_plucker_check(x, name: str = "matrix") -> Report:
    """Three-term Pluecker relations x_Sac x_Sbd = x_Sab x_Scd + x_Sad x_Sbc on an extended matrix."""
    from .measurement import plucker

    pv = plucker(x)
    k, n = pv.k, pv.n
    rep = Report()
    bad = None
    if k >= 2:
        for S in combinations(range(1, n + 1), k - 2):
            rest = [t for t in range(1, n + 1) if t not in S]
            for a, b, c, d in combinations(rest, 4):
                x_ = lambda u, v: _signed(pv, S + (u, v))
                val = x_(a, c) * x_(b, d) - x_(a, b) * x_(c, d) - x_(a, d) * x_(b, c)
                if not val.is_zero():
                    bad = (S, a, b, c, d, val)
                    break
            if bad:
                break
    if bad is None:
        rep.add("short-plucker", name, True, "0", "0")
    else:
        rep.add("short-plucker", f"{name} S={bad[0]} abcd={bad[1:5]}", False, bad[5], "0")
    return rep
