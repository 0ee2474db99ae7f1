"""Polynomial model over F_p: arithmetic, domains, jet equality and the tangent structure."""

from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rescat.core import leq
from rescat.errors import ShapeMismatch
from rescat.poly import Domain, Poly, PolyModel, all_points, matrix_inverse_mod, ppmap_from_json, rank_mod
from rescat.tangent import check_join_tangent_compat, check_tangent_axioms, universal_lift_map

M = PolyModel(5)

coeffs = st.lists(st.integers(0, 4), min_size=3, max_size=3)


def cubic(c):
    return M.poly_map(1, lambda x: [c[0] + c[1] * x + c[2] * x ** 3])


@given(coeffs, coeffs)
def test_chain_rule(a, b):
    f, g = cubic(a), cubic(b)
    assert M.equal(M.tangent(M.compose(f, g)), M.compose(M.tangent(f), M.tangent(g)))


@given(coeffs)
def test_tangent_is_value_and_derivative(c):
    f = cubic(c)
    for x in range(5):
        for v in range(5):
            got = M.tangent(f).evaluate((x, v))
            assert got == (f.evaluate((x,))[0], (c[1] + 3 * c[2] * x * x) * v % 5)


def test_frobenius_is_pointwise_equal_but_not_jet_equal():
    frob = M.poly_map(1, lambda x: [x ** 5])
    one = M.identity(1)
    X = all_points(5, 1)
    assert np.array_equal(frob.eval_batch(X)[0] % 5, one.eval_batch(X)[0] % 5)
    assert not M.equal(frob, one)


def test_poly_arithmetic():
    x, y = Poly.var(5, 2, 0), Poly.var(5, 2, 1)
    q = (x + y) ** 5
    assert q.evaluate((2, 3)) == (2 + 3) ** 5 % 5
    assert (x * y).deriv(0) == y
    assert (x - x).is_zero()
    assert Poly.from_json(json.loads(json.dumps(q.to_json()))) == q


def test_domains_and_restriction():
    D = Domain.box(5, 2, {0: [0, 1]})
    assert D.size() == 10
    assert D.intersect(Domain.box(5, 2, {1: [3]})).size() == 2
    f = M.poly_map(2, lambda x, y: [x * y])
    r = M.restrict(f, D)
    assert leq(M, r, f) and not leq(M, f, r)
    assert M.equal(M.bar(r), M.idempotent(D))
    vals, defined = r.eval_batch(all_points(5, 2))
    assert defined.sum() == 10


def test_piecewise_json_roundtrip():
    f = M.join_unchecked(
        [
            M.restrict(M.poly_map(1, lambda x: [x ** 2]), Domain.box(5, 1, {0: [0, 1]})),
            M.restrict(M.poly_map(1, lambda x: [2 * x + 1]), Domain.box(5, 1, {0: [3]})),
        ],
        1,
        1,
    )
    again = ppmap_from_json(json.loads(json.dumps(f.to_json())), 1, 1, 5)
    assert M.equal(again, f)


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        M.compose(M.identity(1), M.identity(2))


def test_linear_algebra_mod_p():
    a = np.array([[1, 2], [3, 4]])
    inv = matrix_inverse_mod(a, 5)
    assert np.array_equal((a @ inv) % 5, np.eye(2, dtype=np.int64))
    assert rank_mod(np.array([[1, 2], [2, 4]]), 5) == 1
    assert matrix_inverse_mod(np.array([[1, 2], [2, 4]]), 5) is None


def test_module_formulas_for_tangent_maps():
    n = 2
    X = all_points(5, 4)
    plus, _ = M.t_plus(n).eval_batch(np.concatenate([X, X[:, n:]], axis=1))
    assert np.array_equal(plus % 5, np.concatenate([X[:, :n], 2 * X[:, n:] % 5], axis=1))
    flip, _ = M.t_flip(1).eval_batch(all_points(5, 4))
    assert np.array_equal(flip, all_points(5, 4)[:, [0, 2, 1, 3]])


def test_universal_lift_is_v_to_0v():
    u = universal_lift_map(M, 1)
    assert u.evaluate((2, 3, 4)) is not None


@settings(max_examples=1, deadline=None)
@given(st.just(3))
def test_tangent_axioms_small_prime(p):
    reps = check_tangent_axioms(PolyModel(p), (1,))
    assert [r.law for r in reps if not r.passed] == []


def test_join_tangent_compat():
    assert all(r.passed for r in check_join_tangent_compat(M))
