from __future__ import annotations

import json
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from perfnet.exprcore import parse_expr, rf_equal
from perfnet.geometry import _in_open_cone, concordance, sub
from perfnet.measurement import measurement_matrix
from perfnet.network import (
    BLACK,
    GENERATORS,
    WHITE,
    NetworkFormatError,
    ValidationError,
    curve_concordance,
    decompose_path,
    fig1,
    flag_labels,
    gauge_transform,
    generate,
    load_network,
    path_sign,
    path_weight,
    random_network,
    require_valid,
    validate,
)

import reference

BUILDERS = [(name, []) for name in sorted(GENERATORS)] + [
    ("diag", ["d1", "d2", "d3"]),
    ("eminus", ["3", "2"]),
    ("eplus", ["3", "3"]),
    ("generic", ["2"]),
    ("hex", ["2", "3"]),
]


def simple_paths(net):
    """All source-to-sink paths without repeated vertices, as edge lists."""
    out = []
    for i in net.sources():
        stack = [(net.boundary_id(i), [], {net.boundary_id(i)})]
        while stack:
            v, path, seen = stack.pop()
            if path and net.is_boundary(v):
                out.append(path)
                continue
            for e in net.out_edges(v):
                if e.head not in seen:
                    stack.append((e.head, path + [e.id], seen | {e.head}))
    return out


@pytest.mark.parametrize("name,args", BUILDERS)
def test_builders_are_valid_and_roundtrip(name, args):
    net = generate(name, args)
    assert validate(net) == []
    text = net.dumps()
    again = load_network(text)
    assert again.dumps() == text


@given(st.integers(0, 10_000))
def test_random_networks_valid_and_roundtrip(seed):
    net = random_network(seed, max_internal=6)
    assert validate(net) == []
    assert load_network(net.dumps()).dumps() == net.dumps()


def _doc(net):
    return json.loads(net.dumps())


def test_validate_rejects_wrong_colour():
    doc = _doc(generate("white"))
    for v in doc["internal"]:
        v["color"] = BLACK
    errs = validate(load_network(json.dumps(doc)))
    assert any("black vertex needs exactly one outgoing edge" in e for e in errs)
    with pytest.raises(ValidationError):
        require_valid(load_network(json.dumps(doc)))


def test_validate_rejects_crossing_and_outside():
    doc = _doc(generate("white"))
    doc["internal"][0]["pos"] = ["3", "3"]
    errs = validate(load_network(json.dumps(doc)))
    assert any("not strictly inside" in e for e in errs)


def test_validate_rejects_reversed_boundary_role():
    doc = _doc(generate("white"))
    doc["boundary"][0]["role"] = "sink"
    errs = validate(load_network(json.dumps(doc)))
    assert any("sink with outgoing edge" in e for e in errs)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(extra=1),
        lambda d: d["boundary"][0].update(role="pipe"),
        lambda d: d["internal"][0].update(color="red"),
        lambda d: d.update(n=7),
    ],
)
def test_format_errors(mutate):
    doc = _doc(generate("white"))
    mutate(doc)
    with pytest.raises(NetworkFormatError):
        load_network(json.dumps(doc))


def test_example_path_weight_and_sign():
    net = fig1(symbolic=True)
    w = path_weight(net, reference.EXAMPLE_PATH)
    assert rf_equal(w, parse_expr(reference.EXAMPLE_PATH_WEIGHT))
    assert path_sign(net, reference.EXAMPLE_PATH) == -1


@pytest.mark.parametrize("name", ["fig1w", "g24", "generic3"])
def test_simple_paths_have_positive_sign(name):
    net = generate(name)
    paths = simple_paths(net)
    assert paths
    assert all(path_sign(net, p) == 1 for p in paths)


@pytest.mark.parametrize("name,args", BUILDERS)
def test_flag_labels_single_out_the_unique_edge(name, args):
    net = generate(name, args)
    for v in net.internal:
        lab = flag_labels(net, v.id)
        assert sorted(lab.values()) == [1, 2, 3]
        unique = net.in_edges(v.id) if v.color == WHITE else net.out_edges(v.id)
        assert lab[unique[0].id] == 1


@given(st.integers(0, 500), st.data())
def test_gauge_transformations_fix_measurements(seed, data):
    net = random_network(seed, max_internal=5)
    vals = st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=6)
    t = {v.id: parse_expr(str(data.draw(vals))) for v in net.internal}
    a = measurement_matrix(net).entries
    b = measurement_matrix(gauge_transform(net, t)).entries
    assert all(rf_equal(x, y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))



def walks(net, max_len=10):
    """Source-to-sink walks using each edge at most twice."""
    out = []
    for i in net.sources():
        stack = [(net.boundary_id(i), [])]
        while stack:
            v, path = stack.pop()
            if path and net.is_boundary(v):
                out.append(path)
                continue
            if len(path) >= max_len:
                continue
            for e in net.out_edges(v):
                if path.count(e.id) < 2:
                    stack.append((e.head, path + [e.id]))
    return out


def _probe_count(points, ell):
    segs = [sub(points[(t + 1) % len(points)], points[t]) for t in range(len(points))]
    return sum(bool(_in_open_cone(segs[t - 1], segs[t], ell)) for t in range(len(points))) % 2


COORD = st.integers(-6, 6)


@given(st.lists(st.tuples(COORD, COORD), min_size=3, max_size=7), st.integers(-20, 20), st.integers(1, 9))
def test_concordance_does_not_depend_on_the_probe(raw, a, b):
    pts = [(mpq(x), mpq(y)) for x, y in raw]
    segs = [sub(pts[(t + 1) % len(pts)], pts[t]) for t in range(len(pts))]
    if any(s == (0, 0) for s in segs):
        return
    try:
        c = concordance(pts)
    except ValueError:
        return
    ell = (mpq(b), mpq(a, 7))
    if any(s[0] * ell[1] - s[1] * ell[0] == 0 for s in segs):
        return
    assert _probe_count(pts, ell) == c


def test_concordance_of_simple_curves():
    tri = [(mpq(0), mpq(0)), (mpq(1), mpq(0)), (mpq(0), mpq(1))]
    assert concordance(tri) == 1
    assert concordance(tri[::-1]) == 1
    with pytest.raises(ValueError):
        concordance([(mpq(0), mpq(0)), (mpq(1), mpq(0)), (mpq(2), mpq(0))])


def test_example_path_curve_has_even_concordance():
    assert curve_concordance(fig1(symbolic=True), reference.EXAMPLE_PATH) == 0


def _cyclic_walks():
    nets = [fig1(symbolic=True)] + [random_network(s) for s in range(60)]
    return [(net, w) for net in nets for w in walks(net) if len(set(w)) < len(w)]


def test_removing_a_cycle_flips_the_sign():
    cases = _cyclic_walks()
    assert len(cases) >= 20
    for net, w in cases:
        short, cycle = decompose_path(w)
        assert rf_equal(path_weight(net, w), -(path_weight(net, short) * path_weight(net, cycle)))


@pytest.mark.parametrize("seed", range(30))
def test_closure_direction_does_not_change_weights(seed):
    net = random_network(seed)
    for w in walks(net, 8):
        assert rf_equal(path_weight(net, w, ccw=True), path_weight(net, w, ccw=False))


@given(st.integers(0, 500), st.data())
def test_gauge_transformations_fix_path_weights(seed, data):
    net = random_network(seed, max_internal=5)
    vals = st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=6)
    t = {v.id: parse_expr(str(data.draw(vals))) for v in net.internal}
    other = gauge_transform(net, t)
    for p in simple_paths(net):
        assert rf_equal(path_weight(net, p), path_weight(other, p))
