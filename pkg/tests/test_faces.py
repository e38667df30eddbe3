from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from perfnet.exprcore import ONE, parse_expr, rf_equal
from perfnet.faces import dual_network, enumerate_faces, face_bracket, face_weights, monomial_value, path_face_monomial
from perfnet.network import assign_flag_variables, fig1, generate, path_weight, random_network
from perfnet.poisson import log_canonical_bracket

import reference
from test_network import simple_paths

NAMED = ["fig1", "fig1w", "g24", "white", "black", "generic3"]


def product(values):
    out = ONE
    for v in values:
        out = out * v
    return out


def check_face_layer(net):
    faces = enumerate_faces(net)
    assert len(faces.faces) == len(net.edges) - len(net.internal) + 1
    y = face_weights(net, faces)
    assert rf_equal(product(y.values()), ONE)
    for e in net.edges:
        assert faces.left[e.id] != faces.right[e.id]
    for p in simple_paths(net):
        sign, exps = path_face_monomial(net, faces, p)
        assert rf_equal(monomial_value(sign, exps, y), path_weight(net, p))


def check_face_brackets(net):
    fnet, spec = assign_flag_variables(net)
    faces = enumerate_faces(fnet)
    y = face_weights(fnet, faces)
    dual = dual_network(fnet, faces)
    ids = faces.ids()
    for a in ids:
        for b in ids:
            if a < b:
                flag = log_canonical_bracket(spec, y[a], y[b])
                assert rf_equal(flag, face_bracket(dual, a, b) * y[a] * y[b]), (a, b)


@pytest.mark.parametrize("name", NAMED)
def test_face_layer_named(name):
    check_face_layer(generate(name))


@pytest.mark.parametrize("name", NAMED)
def test_face_brackets_named(name):
    check_face_brackets(generate(name))


@given(st.integers(0, 3000))
def test_face_layer_random(seed):
    net = random_network(seed, max_internal=6)
    check_face_layer(net)
    check_face_brackets(net)


def test_g24_face_weights_verbatim():
    net = generate("g24")
    y = face_weights(net, enumerate_faces(net))
    got = sorted(str(v) for v in y.values())
    assert got == sorted(str(parse_expr(e)) for e in reference.G24_FACE_WEIGHTS)
    faces = enumerate_faces(net)
    bounded = [f.id for f in faces.faces if f.bounded]
    assert [str(y[f]) for f in bounded] == ["w2*w4*w5*w7"]


def test_example_path_face_monomial():
    net = fig1(symbolic=True)
    faces = enumerate_faces(net)
    y = face_weights(net, faces)
    sign, exps = path_face_monomial(net, faces, reference.EXAMPLE_PATH)
    assert sign == -1
    assert rf_equal(monomial_value(sign, exps, y), parse_expr(reference.EXAMPLE_PATH_WEIGHT))


def test_dual_weights_are_the_three_values():
    net = generate("g24")
    faces = enumerate_faces(net)
    allowed = {str(parse_expr(w)) for w in ("alpha - beta", "alpha", "-beta")}
    assert {str(d.weight) for d in dual_network(net, faces).edges} <= allowed


def _edge_sides(net):
    faces = enumerate_faces(net)
    sides = {e.id: [] for e in net.edges}
    for f in faces.faces:
        for eid, gamma in f.boundary:
            sides[eid].append((gamma, f.id))
    return faces, sides


@pytest.mark.parametrize("name", NAMED)
def test_each_edge_bounds_two_faces_with_opposite_signs(name):
    net = generate(name)
    faces, sides = _edge_sides(net)
    for e in net.edges:
        assert sorted(g for g, _ in sides[e.id]) == [-1, 1]
        assert {f for _, f in sides[e.id]} == {faces.left[e.id], faces.right[e.id]}


@given(st.integers(0, 3000))
def test_each_edge_bounds_two_faces_random(seed):
    net = random_network(seed)
    _, sides = _edge_sides(net)
    assert all(sorted(g for g, _ in sides[e.id]) == [-1, 1] for e in net.edges)
