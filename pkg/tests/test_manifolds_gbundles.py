"""Atlases, gluing, fibre bundles and G-bundles on the finite-set model."""

from __future__ import annotations

import json

import pytest

from rescat import corpus
from rescat.errors import IllFormedAtlas, IllFormedCocycle, ParseError
from rescat.finset import FinObj, FinSetModel, ParMap, discrete
from rescat.gbundles import (
    GAtlas,
    GroupObject,
    action_orbits,
    check_group,
    cocycle_atlas,
    compose_pbun,
    equivalence_roundtrip,
    equivariant_iso_search,
    fibre_iso_search,
    identity_family,
    orientation_divergence,
    pbun_morphism,
    principal_from_cocycle,
    right_action,
    search_transition_families,
    slice_group,
    torsor_witness,
)
from rescat.manifolds import Atlas, FibreBundle, check_atlas, classify_roundtrip, glue, product_bundle, trivial_atlas

X = FinSetModel()


def failed(reports):
    return [r.law for r in reports if not r.passed]


def test_trivial_atlas_glues_to_its_chart():
    U = discrete("U", range(3))
    gl = glue(trivial_atlas(X, U))
    assert len(gl.obj) == 3 and failed(gl.reports) == []


def test_two_chart_gluing_identifies_overlap():
    U, V = discrete("U", "abc"), discrete("V", "xyz")
    atlas = Atlas(
        X,
        [U, V],
        {
            (0, 0): X.identity(U),
            (1, 1): X.identity(V),
            (0, 1): ParMap(U, V, {"c": "x"}),
            (1, 0): ParMap(V, U, {"x": "c"}),
        },
    )
    assert check_atlas(atlas).passed
    gl = glue(atlas)
    assert len(gl.obj) == 5
    assert failed(gl.reports) == []
    # the overlap point is a single class hit by both charts
    assert gl.charts[0]("c") == gl.charts[1]("x")


def test_ill_formed_atlas_is_rejected():
    U, V = discrete("U", "ab"), discrete("V", "xy")
    atlas = Atlas(X, [U, V], {(0, 0): X.identity(U), (1, 1): X.identity(V), (0, 1): ParMap(U, V, {"a": "x"})})
    with pytest.raises(IllFormedAtlas):
        glue(atlas)


def test_atlas_json_roundtrip_and_parse_error():
    P = corpus.twisted_c2()
    atlas = cocycle_atlas(P.gatlas, P.F, P.action, P.convention)
    again = Atlas.from_json(json.loads(json.dumps(atlas.to_json())))
    assert all(X.equal(again.u(i, j), atlas.u(i, j)) for i in atlas.index for j in atlas.index)
    with pytest.raises(ParseError):
        Atlas.from_json({"charts": []})


def test_moebius_total_space_and_classification():
    P = corpus.twisted_c2()
    assert len(P.bundle.E) == 16
    reps, Phi = classify_roundtrip(P.bundle)
    assert failed(reps) == []
    assert Phi.is_total() and Phi.is_injective()


def test_product_bundle_is_totally_fibred():
    M, F = discrete("M", range(3)), discrete("F", "ab")
    b = product_bundle(X, M, F, [[0, 1], [1, 2]])
    assert isinstance(b, FibreBundle)
    assert failed(b.check()) == [] and b.totally_fibred()


def test_fibre_bundle_json_roundtrip():
    b = corpus.twisted_c2().bundle
    again = FibreBundle.from_json(json.loads(json.dumps(b.to_json())))
    assert len(again.E) == len(b.E) and len(again.alphas) == 2


def test_cyclic_groups_satisfy_group_laws():
    assert failed(check_group(corpus.c2())) == []
    assert failed(check_group(corpus.c3())) == []


def test_group_json_roundtrip():
    g = corpus.c3()
    again = GroupObject.from_json(json.loads(json.dumps(g.to_json())))
    assert failed(check_group(again)) == []
    assert again.mul(1, 2) == g.mul(1, 2)


def test_bad_cocycle_is_rejected():
    g = corpus.c2()
    ga = corpus.two_chart_cocycle(g, "e", "s")
    broken = dict(ga.tau)
    broken[(1, 0)] = ParMap(ga.M, g.carrier, {4: "s", 0: "s"})
    with pytest.raises(IllFormedCocycle):
        principal_from_cocycle(GAtlas(ga.M, g, broken, 2))


def test_gatlas_json_roundtrip():
    ga = corpus.twisted_c2().gatlas
    again = GAtlas.from_json(json.loads(json.dumps(ga.to_json())))
    assert all(X.equal(again.t(i, j), ga.t(i, j)) for i in ga.index for j in ga.index)


@pytest.mark.parametrize("P", corpus.principal_bundles(), ids=lambda P: P.name)
def test_right_action_and_torsor(P):
    r, reps = right_action(P)
    assert failed(reps) == []
    free, trans, local = action_orbits(P, r)
    assert free.passed and local.passed
    assert trans.passed == P.bundle.totally_fibred()
    d, treps = torsor_witness(P, r)
    assert failed(treps) == []
    assert d.is_total() == P.bundle.totally_fibred()


def test_shrunken_bundle_is_not_totally_fibred():
    assert not corpus.shrunken_c2().bundle.totally_fibred()


def test_moebius_search_proves_absence():
    res = equivariant_iso_search(corpus.twisted_c2(), corpus.untwisted_c2())
    assert res.status == "NONE" and not res.pruned_by_cardinality
    assert equivariant_iso_search(corpus.untwisted_c2(), corpus.untwisted_c2()).status == "FOUND"


def test_c3_orientations_diverge_equivariantly_only():
    info = orientation_divergence(corpus.twisted_c3())
    assert info["equivariant_iso"] == "NONE"
    assert info["bundle_iso"] == "FOUND"


def test_fibre_iso_search_on_associated_bundles():
    assert fibre_iso_search(corpus.associated_c2("trivial"), corpus.associated_c2("trivial")).status == "FOUND"


@pytest.mark.parametrize("kind", ["regular", "trivial"])
def test_equivalence_roundtrip(kind):
    assert failed(equivalence_roundtrip(corpus.associated_c2(kind))) == []


def test_identity_principal_morphism_and_composition():
    P = corpus.twisted_c2()
    idM = X.identity(P.gatlas.M)
    f = pbun_morphism(P, P, idM, identity_family(P))
    assert X.equal(f.Phi, X.identity(P.bundle.E))
    _comp, reps = compose_pbun(f, f)
    assert failed(reps) == []


def test_transition_family_search_counts():
    P = corpus.twisted_c2()
    fams, nodes = search_transition_families(P, P, X.identity(P.gatlas.M))
    assert len(fams) >= 2 and nodes > 0
    fams_tw, _ = search_transition_families(P, corpus.untwisted_c2(), X.identity(P.gatlas.M))
    assert fams_tw == []


def test_slice_group():
    M = FinObj("M", range(3))
    _sg, _S, reps = slice_group(M, corpus.c2())
    assert failed(reps) == []
