"""Restriction kernel on the finite-set model: laws, joins, pullbacks, search, JSON."""

from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rescat.core import (
    check_join_laws,
    check_restriction_laws,
    compatible,
    join,
    leq,
    partial_inverse,
    restriction_pullback,
    tot_triv_smoke,
)
from rescat.errors import IncompatibleFamily
from rescat.finset import FinObj, FinSetModel, ParMap, all_partial_maps, cycle, discrete, iso_search, random_parmap

X = FinSetModel()
A = discrete("A", range(4))
B = discrete("B", "xyz")


def parmaps(src: FinObj, tgt: FinObj):
    opts = [None, *tgt.points]
    return st.lists(st.sampled_from(opts), min_size=len(src), max_size=len(src)).map(
        lambda vals: ParMap(src, tgt, {x: v for x, v in zip(src.points, vals) if v is not None})
    )


@given(parmaps(A, B), parmaps(A, B))
def test_r1_r2_r3(f, g):
    bf, bg = X.bar(f), X.bar(g)
    assert X.compose(bf, f) == f
    assert X.compose(bg, bf) == X.compose(bf, bg)
    assert X.bar(X.compose(bg, f)) == X.compose(bg, bf)


@given(parmaps(A, B), parmaps(B, A))
def test_r4(f, h):
    assert X.compose(f, X.bar(h)) == X.compose(X.bar(X.compose(f, h)), f)


@given(parmaps(A, B))
def test_bar_is_domain_idempotent(f):
    bf = X.bar(f)
    assert bf.table == {x: x for x in f.domain}
    assert X.bar(bf) == bf


def test_small_homsets_exhaustive():
    one, two = discrete("1", ["a"]), discrete("2", ["a", "b"])
    sample = [f for a in (one, two) for b in (one, two) for f in all_partial_maps(a, b)]
    assert len(sample) == 2 + 3 + 4 + 9
    reports = check_restriction_laws(X, sample)
    assert all(r.passed for r in reports)
    assert all(r.cases > 0 for r in reports if not r.law.startswith("<= is antisym"))


def test_order_and_compatibility():
    f = ParMap(A, B, {0: "x", 1: "y"})
    g = ParMap(A, B, {0: "x", 1: "y", 2: "z"})
    h = ParMap(A, B, {0: "y"})
    assert leq(X, f, g) and not leq(X, g, f)
    assert compatible(X, f, g)
    assert not compatible(X, f, h)


def test_join_and_incompatible_family():
    f = ParMap(A, B, {0: "x"})
    g = ParMap(A, B, {1: "y"})
    assert join(X, [f, g]) == ParMap(A, B, {0: "x", 1: "y"})
    assert join(X, [], A, B) == X.nowhere(A, B)
    with pytest.raises(IncompatibleFamily):
        join(X, [f, ParMap(A, B, {0: "z"})])


def test_join_laws_random_families():
    rng = random.Random(3)
    fams = []
    for _ in range(20):
        f = random_parmap(rng, A, B, density=1.0)
        fams.append([ParMap(A, B, {x: f(x) for x in A.points if rng.random() < 0.5}) for _ in range(3)])
    sample = [random_parmap(rng, a, b) for a in (A, B) for b in (A, B) for _ in range(4)]
    assert all(r.passed for r in check_join_laws(X, fams, sample))


def test_partial_inverse():
    f = ParMap(A, B, {0: "x", 2: "y"})
    inv = partial_inverse(X, f)
    assert inv == ParMap(B, A, {"x": 0, "y": 2})
    assert partial_inverse(X, ParMap(A, B, {0: "x", 1: "x"})) is None


def test_total_maps_and_trivial_restriction():
    rng = random.Random(1)
    sample = [random_parmap(rng, a, b, density=d) for a in (A, B) for b in (A, B) for d in (0.5, 1.0)]
    assert all(r.passed for r in tot_triv_smoke(X, sample))


def test_pullback_of_totals():
    f = ParMap(A, B, {0: "x", 1: "x", 2: "y", 3: "z"})
    g = ParMap(B, B, {"x": "x", "y": "x", "z": "z"})
    probes = [(X.identity(A), ParMap(A, B, {0: "x", 1: "y", 3: "z"}))]
    cone, reps = restriction_pullback(X, f, g, probes)
    P, pa, pc = cone
    # pairs (a, b) with f(a) = g(b): 0,1 pair with x,y; 3 with z
    assert len(P) == 5
    assert all(r.passed for r in reps)


def test_iso_search_cycles():
    a, b = cycle("C6", 6), cycle("D6", 6)
    assert iso_search(a, b, respect_edges=True).status == "FOUND"
    line = FinObj("L6", range(6), [(i, i + 1) for i in range(5)])
    assert iso_search(a, line, respect_edges=True).status == "NONE"


def test_json_roundtrip():
    f = ParMap(A, B, {0: "x", 3: "z"})
    again = ParMap.from_json(json.loads(json.dumps(f.to_json())))
    assert again == f
    C = cycle("Z5", 5)
    assert FinObj.from_json(json.loads(json.dumps(C.to_json()))) == C


@settings(max_examples=50)
@given(parmaps(A, B), parmaps(B, B), parmaps(B, A))
def test_associativity(f, g, h):
    assert X.compose(X.compose(f, g), h) == X.compose(f, X.compose(g, h))
