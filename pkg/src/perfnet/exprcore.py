"""
Exact multivariate polynomials and rational functions over Q.

Monomials are packed into Python integers, ``BITS`` bits per variable id,
so multiplying monomials is integer addition. Coefficients are ``gmpy2.mpq``.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from gmpy2 import mpq, mpz
from gmpy2 import gcd as _gcd
from gmpy2 import lcm as _lcm

BITS = 12
MASK = (1 << BITS) - 1
MAX_EXPONENT = MASK

_ZERO_Q = mpq(0)
_ONE_Q = mpq(1)


class ParseError(ValueError):
    """Malformed expression text."""


class UnknownVariableError(ParseError):
    """Expression uses a name that is not declared."""


class VariableTable:
    """Append-only registry of variable names with stable integer ids."""

    def __init__(self) -> None:
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        self._lock = threading.Lock()

    def register(self, name: str) -> int:
        vid = self._ids.get(name)
        if vid is not None:
            return vid
        if not _NAME_RE.fullmatch(name):
            raise ValueError(f"invalid variable name {name!r}")
        with self._lock:
            vid = self._ids.get(name)
            if vid is None:
                vid = len(self._names)
                self._names.append(name)
                self._ids[name] = vid
        return vid

    def id(self, name: str) -> int:
        return self._ids[name]

    def name(self, vid: int) -> str:
        return self._names[vid]

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)


VARIABLES = VariableTable()
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _q(c) -> mpq:
    if isinstance(c, Fraction):
        return mpq(c.numerator, c.denominator)
    return mpq(c)


# ---------------------------------------------------------------- monomials


@lru_cache(maxsize=1 << 17)
def _mono_exps(m: int) -> tuple[tuple[int, int], ...]:
    out = []
    vid = 0
    while m:
        e = m & MASK
        if e:
            out.append((vid, e))
        m >>= BITS
        vid += 1
    return tuple(out)


@lru_cache(maxsize=1 << 17)
def _mono_deg(m: int) -> int:
    return sum(e for _, e in _mono_exps(m))


def _natural(name: str) -> tuple:
    # "x2" before "x10"
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name))


class _Rev:
    """Name key with reversed order, so smaller names rank higher in a tuple key."""

    __slots__ = ("k",)

    def __init__(self, k: tuple) -> None:
        self.k = k

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _Rev) and self.k == other.k

    def __lt__(self, other: "_Rev") -> bool:
        return self.k > other.k

    def __hash__(self) -> int:
        return hash(self.k)


@lru_cache(maxsize=None)
def _var_key(vid: int) -> tuple:
    return _natural(VARIABLES.name(vid))


@lru_cache(maxsize=1 << 17)
def _mono_key(m: int) -> tuple:
    # graded lex in natural name order, independent of registration order
    exps = sorted(((_var_key(vid), e) for vid, e in _mono_exps(m)), key=lambda t: t[0])
    return (_mono_deg(m), tuple((_Rev(k), e) for k, e in exps))


def _mono_pack(exps: Mapping[int, int]) -> int:
    m = 0
    for vid, e in exps.items():
        if e < 0:
            raise ValueError("negative exponent in monomial")
        if e > MAX_EXPONENT:
            raise OverflowError("exponent overflow")
        m |= e << (BITS * vid)
    return m


@dataclass(frozen=True)
class Monomial:
    """Product of variables; ``exponents`` maps variable id to power."""

    exponents: tuple[tuple[int, int], ...]

    @classmethod
    def from_packed(cls, m: int) -> "Monomial":
        return cls(_mono_exps(m))

    def packed(self) -> int:
        return _mono_pack(dict(self.exponents))

    def degree(self) -> int:
        return sum(e for _, e in self.exponents)

    def __str__(self) -> str:
        return _mono_str(self.packed()) or "1"


def _mono_str(m: int) -> str:
    parts = []
    for vid, e in sorted(_mono_exps(m), key=lambda t: _var_key(t[0])):
        name = VARIABLES.name(vid)
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _mono_gcd(monos: Iterable[int]) -> int:
    it = iter(monos)
    first = next(it)
    mins = dict(_mono_exps(first))
    for m in it:
        if not mins:
            break
        cur = dict(_mono_exps(m))
        for vid in list(mins):
            e = cur.get(vid, 0)
            if e == 0:
                del mins[vid]
            elif e < mins[vid]:
                mins[vid] = e
    return _mono_pack(mins)


# --------------------------------------------------------------- polynomials


class Polynomial:
    """Sparse polynomial: map from packed monomial to nonzero rational."""

    __slots__ = ("_t", "_deg")

    def __init__(self, terms: Mapping[int, object] | None = None, _clean: bool = False):
        if terms is None:
            self._t: dict[int, mpq] = {}
        elif _clean:
            self._t = terms  # type: ignore[assignment]
        else:
            t = {}
            for m, c in terms.items():
                c = _q(c)
                if c:
                    t[m] = c
            self._t = t
        self._deg = -2

    # construction
    @staticmethod
    def constant(c) -> "Polynomial":
        c = _q(c)
        return Polynomial({0: c}, True) if c else Polynomial()

    @staticmethod
    def variable(name_or_id: str | int) -> "Polynomial":
        vid = VARIABLES.register(name_or_id) if isinstance(name_or_id, str) else name_or_id
        return Polynomial({1 << (BITS * vid): _ONE_Q}, True)

    @staticmethod
    def from_terms(terms: Iterable[tuple[Monomial, object]]) -> "Polynomial":
        acc: dict[int, mpq] = {}
        for mono, c in terms:
            k = mono.packed()
            acc[k] = acc.get(k, _ZERO_Q) + _q(c)
        return Polynomial(acc)

    # inspection
    def terms(self) -> list[tuple[Monomial, mpq]]:
        return [(Monomial.from_packed(m), c) for m, c in self._sorted()]

    def _sorted(self) -> list[tuple[int, mpq]]:
        return sorted(self._t.items(), key=lambda mc: _mono_key(mc[0]), reverse=True)

    def is_zero(self) -> bool:
        return not self._t

    def is_constant(self) -> bool:
        return not self._t or (len(self._t) == 1 and 0 in self._t)

    def constant_value(self) -> mpq:
        return self._t.get(0, _ZERO_Q)

    def num_terms(self) -> int:
        return len(self._t)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if self._deg == -2:
            self._deg = max((_mono_deg(m) for m in self._t), default=-1)
        return self._deg

    def degree_in(self, vid: int) -> int:
        shift = BITS * vid
        return max(((m >> shift) & MASK for m in self._t), default=-1)

    def variables(self) -> set[int]:
        out: set[int] = set()
        for m in self._t:
            out.update(v for v, _ in _mono_exps(m))
        return out

    def leading(self) -> tuple[int, mpq]:
        m = max(self._t, key=_mono_key)
        return m, self._t[m]

    def coefficients(self) -> list[mpq]:
        return list(self._t.values())

    # arithmetic
    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self._t.items()}, True)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if len(other._t) > len(self._t):
            self, other = other, self
        t = dict(self._t)
        for m, c in other._t.items():
            s = t.get(m)
            if s is None:
                t[m] = c
            else:
                s = s + c
                if s:
                    t[m] = s
                else:
                    del t[m]
        return Polynomial(t, True)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        t = dict(self._t)
        for m, c in other._t.items():
            s = t.get(m)
            if s is None:
                t[m] = -c
            else:
                s = s - c
                if s:
                    t[m] = s
                else:
                    del t[m]
        return Polynomial(t, True)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        a, b = self._t, other._t
        if not a or not b:
            return Polynomial()
        if self.degree() + other.degree() > MAX_EXPONENT:
            _check_overflow(self, other)
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (mb, cb), = b.items()
            if mb == 0:
                return Polynomial({m: c * cb for m, c in a.items()}, True)
            return Polynomial({m + mb: c * cb for m, c in a.items()}, True)
        acc: dict[int, mpq] = {}
        get = acc.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                k = ma + mb
                acc[k] = get(k, _ZERO_Q) + ca * cb
        return Polynomial({m: c for m, c in acc.items() if c}, True)

    def scale(self, c) -> "Polynomial":
        c = _q(c)
        if not c:
            return Polynomial()
        return Polynomial({m: v * c for m, v in self._t.items()}, True)

    def mul_monomial(self, mono: int) -> "Polynomial":
        return Polynomial({m + mono: c for m, c in self._t.items()}, True)

    def div_monomial(self, mono: int) -> "Polynomial":
        return Polynomial({m - mono: c for m, c in self._t.items()}, True)

    def __pow__(self, e: int) -> "Polynomial":
        if e < 0:
            raise ValueError("negative power of a polynomial")
        if e and self.degree() * e > MAX_EXPONENT:
            for vid in self.variables():
                if self.degree_in(vid) * e > MAX_EXPONENT:
                    raise OverflowError("exponent overflow")
        if len(self._t) == 1:
            (m, c), = self._t.items()
            return Polynomial({m * e: c ** e}, True)
        result = Polynomial.constant(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._t == other._t

    def __hash__(self) -> int:
        return hash(frozenset(self._t.items()))

    # calculus and substitution
    def diff(self, vid: int) -> "Polynomial":
        shift = BITS * vid
        unit = 1 << shift
        out = {}
        for m, c in self._t.items():
            e = (m >> shift) & MASK
            if e:
                out[m - unit] = c * e
        return Polynomial(out, True)

    def evaluate(self, point: Mapping[int, object]) -> mpq:
        total = _ZERO_Q
        vals = {v: _q(x) for v, x in point.items()}
        for m, c in self._t.items():
            t = c
            for vid, e in _mono_exps(m):
                t *= vals[vid] ** e
            total += t
        return total

    def coefficient_list(self, vid: int) -> list[mpq]:
        """Dense coefficients in one variable; all other exponents must be zero."""
        shift = BITS * vid
        deg = self.degree_in(vid)
        out = [_ZERO_Q] * (deg + 1)
        for m, c in self._t.items():
            e = (m >> shift) & MASK
            if m != e << shift:
                raise ValueError("polynomial depends on other variables")
            out[e] = c
        return out

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        """Multivariate division by leading terms in graded lex order."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        lm, lc = other.leading()
        lexps = dict(_mono_exps(lm))
        quot: dict[int, mpq] = {}
        rem: dict[int, mpq] = {}
        p = self
        while not p.is_zero():
            m, c = p.leading()
            exps = dict(_mono_exps(m))
            if all(exps.get(v, 0) >= e for v, e in lexps.items()):
                qm = m - lm
                qc = c / lc
                quot[qm] = quot.get(qm, _ZERO_Q) + qc
                p = p - Polynomial({qm: qc}, True) * other
            else:
                rem[m] = c
                p = p - Polynomial({m: c}, True)
        return Polynomial(quot), Polynomial(rem)

    def __str__(self) -> str:
        return _poly_str(self._sorted())

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def _check_overflow(p: Polynomial, q: Polynomial) -> None:
    for vid in p.variables() | q.variables():
        if max(p.degree_in(vid), 0) + max(q.degree_in(vid), 0) > MAX_EXPONENT:
            raise OverflowError("exponent overflow")


def _coeff_str(c: mpq) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _poly_str(items: list[tuple[int, mpq]]) -> str:
    if not items:
        return "0"
    out = []
    for idx, (m, c) in enumerate(items):
        neg = c < 0
        a = -c if neg else c
        ms = _mono_str(m)
        if not ms:
            body = _coeff_str(a)
        elif a == 1:
            body = ms
        else:
            body = f"{_coeff_str(a)}*{ms}"
        if idx == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


# ---------------------------------------------------------- rational functions

_P_ONE = Polynomial.constant(1)
_P_ZERO = Polynomial()


def _content_normalize(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    coeffs = num.coefficients() + den.coefficients()
    dlcm = mpz(1)
    for c in coeffs:
        d = c.denominator
        if d != 1:
            dlcm = _lcm(dlcm, d)
    g = mpz(0)
    for c in coeffs:
        g = _gcd(g, (c * dlcm).numerator)
        if g == 1:
            break
    lc = den.leading()[1]
    factor = mpq(dlcm, g)
    if lc < 0:
        factor = -factor
    if factor == 1:
        return num, den
    return num.scale(factor), den.scale(factor)


def _normalize(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if den.is_zero():
        raise ZeroDivisionError("rational function with zero denominator")
    if num.is_zero():
        return _P_ZERO, _P_ONE
    if den.is_constant():
        c = den.constant_value()
        return (num if c == 1 else num.scale(1 / c)), _P_ONE
    if num._t == den._t:
        return _P_ONE, _P_ONE
    if num.num_terms() == 1 or den.num_terms() == 1:
        g = _mono_gcd(list(num._t) + list(den._t))
        if g:
            num, den = num.div_monomial(g), den.div_monomial(g)
        if den.num_terms() == 1 and 0 in den._t:
            return num.scale(1 / den._t[0]), _P_ONE
    return _content_normalize(num, den)


Scalar = int | Fraction | mpq


class RationalFunction:
    """Quotient of polynomials, kept with integer content and positive leading den."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial | None = None, _normal: bool = False):
        if den is None:
            den = _P_ONE
        if not _normal:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den

    @staticmethod
    def constant(c) -> "RationalFunction":
        return RationalFunction(Polynomial.constant(c), _P_ONE, True)

    @staticmethod
    def variable(name: str) -> "RationalFunction":
        return RationalFunction(Polynomial.variable(name), _P_ONE, True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> mpq:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def variables(self) -> set[int]:
        return self.num.variables() | self.den.variables()

    # arithmetic
    def __add__(self, other) -> "RationalFunction":
        other = as_rf(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den, True)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-as_rf(other))

    def __rsub__(self, other) -> "RationalFunction":
        return as_rf(other) + (-self)

    def __mul__(self, other) -> "RationalFunction":
        other = as_rf(other)
        if self.num.is_zero() or other.num.is_zero():
            return ZERO
        a, b, c, d = self.num, self.den, other.num, other.den
        if b == c:
            return RationalFunction(a, d)
        if a == d:
            return RationalFunction(c, b)
        if b.is_constant() and d.is_constant():
            return RationalFunction(a * c, b * d)
        return RationalFunction(a * c, b * d)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other) -> "RationalFunction":
        return self * as_rf(other).inverse()

    def __rtruediv__(self, other) -> "RationalFunction":
        return as_rf(other) * self.inverse()

    def __pow__(self, e: int) -> "RationalFunction":
        if e < 0:
            return self.inverse() ** (-e)
        return RationalFunction(self.num ** e, self.den ** e, True)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)) or type(other).__name__ == "mpq":
            other = as_rf(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return rf_equal(self, other)

    __hash__ = None  # type: ignore[assignment]

    # calculus and substitution
    def diff(self, vid: int) -> "RationalFunction":
        dn = self.num.diff(vid)
        dd = self.den.diff(vid)
        if dd.is_zero():
            return RationalFunction(dn, self.den)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def subst(self, bindings: Mapping[int | str, object]) -> "RationalFunction":
        b = {(VARIABLES.id(k) if isinstance(k, str) else k): as_rf(v) for k, v in bindings.items()}
        return _poly_subst(self.num, b) / _poly_subst(self.den, b)

    def evaluate(self, point: Mapping[int | str, object]) -> mpq:
        pt = {(VARIABLES.id(k) if isinstance(k, str) else k): v for k, v in point.items()}
        d = self.den.evaluate(pt)
        if not d:
            raise ZeroDivisionError("denominator vanishes at point")
        return self.num.evaluate(pt) / d

    def __str__(self) -> str:
        if self.den.is_constant():
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


def as_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x, _P_ONE, True)
    if isinstance(x, str):
        return parse_expr(x)
    return RationalFunction.constant(x)


ZERO = RationalFunction(_P_ZERO, _P_ONE, True)
ONE = RationalFunction(_P_ONE, _P_ONE, True)


def var(name: str) -> RationalFunction:
    return RationalFunction.variable(name)


def rf_equal(a: RationalFunction, b: RationalFunction) -> bool:
    """Semantic equality by cross-multiplication."""
    if a.den == b.den:
        return a.num == b.num
    return a.num * b.den == b.num * a.den


def rf_sum(items: Iterable[RationalFunction]) -> RationalFunction:
    """Sum grouping equal denominators before combining."""
    groups: dict[Polynomial, Polynomial] = {}
    for x in items:
        if x.num.is_zero():
            continue
        cur = groups.get(x.den)
        groups[x.den] = x.num if cur is None else cur + x.num
    total = ZERO
    for den, num in groups.items():
        total = total + RationalFunction(num, den)
    return total


def _poly_subst(p: Polynomial, b: Mapping[int, RationalFunction]) -> RationalFunction:
    if not b or p.is_zero():
        return RationalFunction(p, _P_ONE, True)
    used = [v for v in b if p.degree_in(v) > 0]
    if not used:
        return RationalFunction(p, _P_ONE, True)
    maxdeg = {v: p.degree_in(v) for v in used}
    shifts = {v: BITS * v for v in used}
    num_pows: dict[int, list[Polynomial]] = {}
    den_pows: dict[int, list[Polynomial]] = {}
    for v in used:
        n, d = b[v].num, b[v].den
        np_ = [_P_ONE]
        dp_ = [_P_ONE]
        for _ in range(maxdeg[v]):
            np_.append(np_[-1] * n)
            dp_.append(dp_[-1] if d.is_constant() and d.constant_value() == 1 else dp_[-1] * d)
        num_pows[v] = np_
        den_pows[v] = dp_
    total = _P_ZERO
    for m, c in p._t.items():
        rest = m
        term = Polynomial({0: c}, True)
        for v in used:
            e = (m >> shifts[v]) & MASK
            rest -= e << shifts[v]
            term = term * num_pows[v][e] * den_pows[v][maxdeg[v] - e]
        total = total + term.mul_monomial(rest)
    den = _P_ONE
    for v in used:
        den = den * den_pows[v][maxdeg[v]]
    return RationalFunction(total, den)


# ------------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        mt = _TOKEN_RE.match(text, pos)
        if mt is None:
            break
        if mt.group(1) is not None:
            out.append(("int", mt.group(1), mt.start(1)))
        elif mt.group(2) is not None:
            out.append(("name", mt.group(2), mt.start(2)))
        else:
            ch = mt.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r} at {mt.start(3)}")
            out.append(("op", ch, mt.start(3)))
        pos = mt.end()
    return out


class _Parser:
    def __init__(self, text: str, allowed: set[str] | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.allowed = allowed

    def peek(self) -> tuple[str, str, int] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, value: str | None = None) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r} at {tok[2]}")
        self.i += 1
        return tok

    def expr(self) -> RationalFunction:
        acc = self.term()
        while (tok := self.peek()) is not None and tok[1] in "+-" and tok[0] == "op":
            self.i += 1
            rhs = self.term()
            acc = acc + rhs if tok[1] == "+" else acc - rhs
        return acc

    def term(self) -> RationalFunction:
        acc = self.unary()
        while (tok := self.peek()) is not None and tok[1] in "*/" and tok[0] == "op":
            self.i += 1
            rhs = self.unary()
            if tok[1] == "*":
                acc = acc * rhs
            else:
                if rhs.is_zero():
                    raise ParseError(f"division by zero at {tok[2]}")
                acc = acc / rhs
        return acc

    def unary(self) -> RationalFunction:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] in "+-":
            self.i += 1
            val = self.unary()
            return -val if tok[1] == "-" else val
        return self.power()

    def power(self) -> RationalFunction:
        base = self.atom()
        while (tok := self.peek()) is not None and tok[0] == "op" and tok[1] == "^":
            self.i += 1
            ex = self.take()
            if ex[0] != "int":
                raise ParseError(f"exponent must be a nonnegative integer literal at {ex[2]}")
            base = base ** int(ex[1])
        return base

    def atom(self) -> RationalFunction:
        tok = self.take()
        kind, val, pos = tok
        if kind == "int":
            return RationalFunction.constant(int(val))
        if kind == "name":
            if self.allowed is not None and val not in self.allowed:
                raise UnknownVariableError(f"unknown variable {val!r} at {pos}")
            return var(val)
        if val == "(":
            inner = self.expr()
            self.take(")")
            return inner
        raise ParseError(f"unexpected {val!r} at {pos}")


def parse_expr(text: str, variables: Iterable[str] | None = None) -> RationalFunction:
    """Parse ``text`` into a rational function.

    Parameters
    ----------
    text : str
        Integers, names, ``+ - * /``, ``^`` with integer literal exponents, parentheses.
    variables : iterable of str, optional
        Allowed names. When omitted any name is accepted and registered.
    """
    allowed = set(variables) if variables is not None else None
    p = _Parser(text, allowed)
    if p.peek() is None:
        raise ParseError("empty expression")
    out = p.expr()
    if p.peek() is not None:
        raise ParseError(f"unexpected {p.peek()[1]!r} at {p.peek()[2]}")
    return out


# ------------------------------------------------------------- power series


@dataclass(frozen=True)
class PowerSeries:
    """Truncated series ``sum c_k v^k`` for k <= order."""

    variable: int
    coefficients: tuple[mpq, ...]

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        if other.variable != self.variable:
            raise ValueError("series in different variables")
        n = min(self.order, other.order) + 1
        a, b = self.coefficients, other.coefficients
        return PowerSeries(
            self.variable,
            tuple(sum((a[i] * b[k - i] for i in range(k + 1)), _ZERO_Q) for k in range(n)),
        )

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order) + 1
        return PowerSeries(
            self.variable, tuple(self.coefficients[k] + other.coefficients[k] for k in range(n))
        )


def rf_series(a: RationalFunction, v: int | str, order: int) -> PowerSeries:
    """Taylor coefficients of ``a`` in ``v`` up to ``v^order``.

    All other variables must already be specialized. Raises ``ValueError``
    when the denominator vanishes at ``v = 0``.
    """
    vid = VARIABLES.register(v) if isinstance(v, str) else v
    num = a.num.coefficient_list(vid) if not a.num.is_zero() else []
    den = a.den.coefficient_list(vid)
    d0 = den[0]
    if not d0:
        raise ValueError("denominator has no constant term")
    out: list[mpq] = []
    for k in range(order + 1):
        acc = num[k] if k < len(num) else _ZERO_Q
        for i in range(1, min(k, len(den) - 1) + 1):
            acc -= den[i] * out[k - i]
        out.append(acc / d0)
    return PowerSeries(vid, tuple(out))


__all__ = [
    "BITS",
    "MAX_EXPONENT",
    "Monomial",
    "ONE",
    "ParseError",
    "Polynomial",
    "PowerSeries",
    "RationalFunction",
    "UnknownVariableError",
    "VARIABLES",
    "VariableTable",
    "ZERO",
    "as_rf",
    "parse_expr",
    "rf_equal",
    "rf_series",
    "rf_sum",
    "var",
]
