"""Exact planar predicates on rational points."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cmp_to_key
from typing import Sequence

from gmpy2 import mpq

Point = tuple[mpq, mpq]


def point(x, y) -> Point:
    return (mpq(x), mpq(y))


def parse_point(pair: Sequence[str | int]) -> Point:
    if len(pair) != 2:
        raise ValueError("a position needs two coordinates")
    return (mpq(str(pair[0])), mpq(str(pair[1])))


def fmt_coord(c: mpq) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def cross(u: Point, v: Point) -> mpq:
    return u[0] * v[1] - u[1] * v[0]


def dot(u: Point, v: Point) -> mpq:
    return u[0] * v[0] + u[1] * v[1]


def orient(o: Point, a: Point, b: Point) -> int:
    c = cross(sub(a, o), sub(b, o))
    return (c > 0) - (c < 0)


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def segments_meet(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True when closed segments ab and cd share a point."""
    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return (
        (o1 == 0 and _on_segment(c, a, b))
        or (o2 == 0 and _on_segment(d, a, b))
        or (o3 == 0 and _on_segment(a, c, d))
        or (o4 == 0 and _on_segment(b, c, d))
    )


def segments_conflict(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Segments meet somewhere other than a single shared endpoint."""
    shared = {a, b} & {c, d}
    if not shared:
        return segments_meet(a, b, c, d)
    if len(shared) == 2:
        return True
    s = next(iter(shared))
    u = b if a == s else a
    v = d if c == s else c
    # overlap along a common ray from the shared endpoint
    if cross(sub(u, s), sub(v, s)) == 0 and dot(sub(u, s), sub(v, s)) > 0:
        return True
    return False


def strictly_inside_convex(p: Point, poly: Sequence[Point]) -> bool:
    """Point strictly inside a convex polygon listed counterclockwise."""
    n = len(poly)
    if n < 3:
        return False
    return all(orient(poly[i], poly[(i + 1) % n], p) > 0 for i in range(n))


def is_strictly_convex_ccw(poly: Sequence[Point]) -> bool:
    """Points in strictly convex position, listed counterclockwise once around."""
    n = len(poly)
    if n < 3:
        return len(set(poly)) == n
    if any(orient(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) <= 0 for i in range(n)):
        return False
    cx = sum(p[0] for p in poly) / n
    cy = sum(p[1] for p in poly) / n
    vecs = [(p[0] - cx, p[1] - cy) for p in poly]
    order = sort_ccw(vecs)
    start = order.index(0)
    return order[start:] + order[:start] == list(range(n))


def _half(v: Point) -> int:
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def compare_directions(u: Point, v: Point) -> int:
    """Order nonzero vectors by angle in [0, 2pi)."""
    hu, hv = _half(u), _half(v)
    if hu != hv:
        return -1 if hu < hv else 1
    c = cross(u, v)
    return -1 if c > 0 else (1 if c < 0 else 0)


def sort_ccw(vectors: Sequence[Point]) -> list[int]:
    """Indices of ``vectors`` sorted counterclockwise by angle."""
    idx = list(range(len(vectors)))
    idx.sort(key=cmp_to_key(lambda i, j: compare_directions(vectors[i], vectors[j])))
    return idx


def circle_point(t: mpq) -> Point:
    """Rational point on the unit circle, ((1-t^2)/(1+t^2), 2t/(1+t^2))."""
    d = 1 + t * t
    return ((1 - t * t) / d, 2 * t / d)


def circle_point_at(degrees: float, max_den: int = 64) -> Point:
    """Exact rational unit-circle point near the given angle."""
    theta = math.radians(degrees) % (2 * math.pi)
    if abs(theta - math.pi) < 1e-12:
        return (mpq(-1), mpq(0))
    t = Fraction(math.tan(theta / 2)).limit_denominator(max_den)
    return circle_point(mpq(t.numerator, t.denominator))


def _in_open_cone(u: Point, w: Point, ell: Point) -> bool | None:
    """Whether ``ell`` lies in the open cone spanned by u and w.

    Returns ``None`` when ``ell`` lies on a bounding ray.
    """
    c = cross(u, w)
    if c == 0:
        if dot(u, w) > 0:
            return False
        raise ValueError("closed curve turns back on itself")
    a = cross(u, ell)
    b = cross(ell, w)
    if a == 0 and dot(u, ell) > 0:
        return None
    if b == 0 and dot(w, ell) > 0:
        return None
    if c > 0:
        return a > 0 and b > 0
    return a < 0 and b < 0


def concordance(points: Sequence[Point]) -> int:
    """Parity count of consecutive segment pairs whose cone contains a probe direction.

    ``points`` lists the vertices of a closed polygonal curve; the last
    segment returns to the first point.
    """
    r = len(points)
    segs = [sub(points[(t + 1) % r], points[t]) for t in range(r)]
    if any(s == (0, 0) for s in segs):
        raise ValueError("degenerate segment in closed curve")
    k = 0
    while True:
        ell = (mpq(1), mpq(k, len(segs) + 1))
        k += 1
        if any(cross(s, ell) == 0 for s in segs):
            continue
        count = 0
        ok = True
        for t in range(r):
            res = _in_open_cone(segs[t - 1], segs[t], ell)
            if res is None:
                ok = False
                break
            count += res
        if ok:
            return count % 2


def bulge(p: Point, q: Point) -> Point:
    """Point just outside the chord p->q, on its right side."""
    d = sub(q, p)
    mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
    return (mid[0] + d[1] / 16, mid[1] - d[0] / 16)
