from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from perfnet.exprcore import ONE, ZERO, parse_expr, rf_equal
from perfnet.measurement import (
    Elementary,
    a_matrix,
    act_elementary,
    black_split,
    boundary_measurement,
    concatenate,
    det,
    digraph_measurement,
    extended_matrix,
    matmul,
    measurement_matrix,
    measurement_series,
    minor,
    path_sum_oracle,
    plucker,
    s_count,
    same_grassmann_point,
)
from perfnet.network import e_minus, e_plus, fig1, g24, generate, random_network
from perfnet.poisson import short_plucker_check

import reference


def equal_matrices(a, b):
    return len(a) == len(b) and all(rf_equal(x, y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def random_point(net, seed):
    import random

    rng = random.Random(seed)
    names = list(net.variables)
    return {v: Fraction(rng.randint(1, 9), rng.randint(1, 5)) for v in names}


def test_fig1_matches_reference_matrix_in_x():
    M = measurement_matrix(fig1())
    assert equal_matrices(M.entries, reference.fig1_x_matrix())
    assert reference.render(M.entries) == (reference.GOLDEN / "fig1_measure.txt").read_text()


def test_fig1_symbolic_has_w10_in_m12():
    # the reference entry (1,2) omits w10, yet every path 1 -> 4 passes through e10
    M = measurement_matrix(fig1(symbolic=True))
    expected = parse_expr(reference.FIG1_MATRIX[0][1]) * parse_expr("w10")
    assert rf_equal(M.entry(1, 4), expected)
    for (r, c) in [(0, 0), (1, 0), (1, 1)]:
        assert rf_equal(M.entries[r][c], parse_expr(reference.FIG1_MATRIX[r][c]))


def test_g24_extended_matrix_matches_reference():
    X = extended_matrix(g24())
    P = [[parse_expr(e) for e in row] for row in reference.G24_MATRIX]
    assert equal_matrices(X.rows, P)


@pytest.mark.parametrize("name", ["fig1", "g24", "generic3", "white", "black"])
def test_series_matches_path_sum_oracle(name):
    net = generate(name)
    pt = random_point(net, 7)
    for i in net.sources():
        for j in net.sinks():
            assert measurement_series(net, i, j, 12, pt) == path_sum_oracle(net, i, j, 12, pt)


@given(st.integers(0, 2000), st.integers(0, 100))
def test_series_matches_oracle_on_random_networks(seed, pseed):
    net = random_network(seed, max_internal=6)
    pt = random_point(net, pseed)
    for i in net.sources():
        for j in net.sinks():
            assert measurement_series(net, i, j, 10, pt) == path_sum_oracle(net, i, j, 10, pt)


def test_extended_matrix_has_identity_on_sources_and_signs():
    for seed in range(5):
        net = random_network(seed)
        X = extended_matrix(net)
        I = net.sources()
        for r, i in enumerate(I):
            for r2, i2 in enumerate(I):
                assert rf_equal(X.rows[r][i2 - 1], ONE if r == r2 else ZERO)
            for j in net.sinks():
                sign = (-1) ** s_count(I, i, j)
                assert rf_equal(X.rows[r][j - 1], boundary_measurement(net, i, j) * sign)


@given(st.integers(0, 2000))
def test_short_plucker_relations_vanish(seed):
    net = random_network(seed, max_internal=6)
    assert short_plucker_check(extended_matrix(net), f"seed {seed}").ok


def test_plucker_coordinates_are_minors():
    X = extended_matrix(g24())
    P = plucker(X)
    for S in combinations(range(1, 5), 2):
        a, b = S
        direct = X.rows[0][a - 1] * X.rows[1][b - 1] - X.rows[0][b - 1] * X.rows[1][a - 1]
        assert rf_equal(P.coords[S], direct)
        assert rf_equal(P[(b, a)], direct)
    assert rf_equal(minor(X, [1, 2], [1, 3]), ONE)


def test_det_of_triangular_and_swapped():
    a, b, c = parse_expr("a"), parse_expr("b"), parse_expr("c")
    assert rf_equal(det([[a, b], [ZERO, c]]), a * c)
    assert rf_equal(det([[b, a], [c, ZERO]]), -(a * c))


ELEM = [("eminus", k, i) for k in (2, 3) for i in range(2, k + 1)] + [
    ("eplus", k, i) for k in (2, 3) for i in range(2, k + 1)
]


@pytest.mark.parametrize("x", ELEM)
@pytest.mark.parametrize("y", ELEM)
def test_concatenation_multiplies_a_matrices(x, y):
    if x[1] != y[1]:
        return
    n1 = (e_minus if x[0] == "eminus" else e_plus)(x[1], x[2], "p")
    n2 = (e_minus if y[0] == "eminus" else e_plus)(y[1], y[2], "q")
    glued = concatenate(n1, n2)
    assert equal_matrices(a_matrix(glued), matmul(a_matrix(n1), a_matrix(n2)))


def test_concatenate_rejects_mismatch():
    with pytest.raises(ValueError):
        concatenate(e_minus(2, 2), e_minus(3, 2))


@pytest.mark.parametrize("kind,index", [("diag", 0), ("minus", 3), ("plus", 2), ("minus", 2), ("plus", 4)])
@pytest.mark.parametrize("name", ["g24", "fig1w"])
def test_elementary_action_is_right_multiplication(kind, index, name):
    net = generate(name)
    diag = tuple(f"d{t}" for t in range(1, net.n + 1)) if kind == "diag" else ()
    a = Elementary(kind, net.n, index, "s" if kind != "diag" else None, diag)
    out = act_elementary(net, a)
    assert same_grassmann_point(matmul(extended_matrix(net).rows, a.matrix()), extended_matrix(out))


@pytest.mark.parametrize("seed", range(8))
def test_black_split_resums_the_loops(seed):
    net = random_network(seed)
    for i in net.sources():
        try:
            bs = black_split(net, i)
        except ValueError:
            continue
        loop = digraph_measurement(bs.graph, "iu", "ju")
        for j in net.sinks():
            rest = digraph_measurement(bs.graph, "iu", net.boundary_id(j))
            assert rf_equal(boundary_measurement(net, i, j), bs.weight_source * rest / (ONE + loop))


def _between(n, a, x, b):
    return 0 < (x - a) % n < (b - a) % n


@pytest.mark.parametrize("seed", range(12))
def test_black_split_other_sources_follow_the_cyclic_sign_rule(seed):
    net = random_network(seed)
    for p in net.sources():
        try:
            bs = black_split(net, p)
        except ValueError:
            continue
        loop = digraph_measurement(bs.graph, "iu", "ju")
        for q in net.sources():
            if q == p:
                continue
            bq = net.boundary_id(q)
            for j in net.sinks():
                bj = net.boundary_id(j)
                base = digraph_measurement(bs.graph, bq, bj)
                corr = digraph_measurement(bs.graph, bq, "ju") * digraph_measurement(bs.graph, "iu", bj) / (ONE + loop)
                sign = 1 if bs.ju_first == _between(net.n, p, j, q) else -1
                assert rf_equal(boundary_measurement(net, q, j), base + corr * sign)


def _signed(poly):
    cs = [c for _, c in poly.terms()]
    return all(c >= 0 for c in cs) or all(c <= 0 for c in cs)


@given(st.integers(0, 2000))
def test_measurements_are_subtraction_free_up_to_sign(seed):
    net = random_network(seed)
    for i in net.sources():
        for j in net.sinks():
            m = boundary_measurement(net, i, j)
            assert _signed(m.num) and _signed(m.den)


FACTOR = st.sampled_from([("minus", i) for i in (2, 3)] + [("plus", i) for i in (2, 3)] + [("diag", 0)])


@given(st.lists(FACTOR, min_size=1, max_size=6))
def test_random_elementary_compositions_multiply(factors):
    from perfnet.network import diag

    nets = []
    for t, (kind, i) in enumerate(factors):
        if kind == "diag":
            nets.append(diag([f"d{t}a", f"d{t}b", f"d{t}c"]))
        else:
            nets.append((e_minus if kind == "minus" else e_plus)(3, i, f"c{t}"))
    glued, expected = nets[0], a_matrix(nets[0])
    for nxt in nets[1:]:
        glued = concatenate(glued, nxt)
        expected = matmul(expected, a_matrix(nxt))
    assert equal_matrices(a_matrix(glued), expected)
