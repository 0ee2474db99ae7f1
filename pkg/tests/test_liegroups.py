"""Polynomial groups, tangent trivialization, negation, the Lie bracket and vertical bundles."""

from __future__ import annotations

import json

import numpy as np
import pytest

from rescat import liegroups as lg
from rescat.errors import NotInEqualizer, ParseError
from rescat.poly import PolyModel

M = PolyModel(5)
GROUPS = lg.named_groups(M)


def failed(reports):
    return [r.law for r in reports if not r.passed]


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_group_laws(name):
    assert failed(lg.group_laws(GROUPS[name])) == []


def test_skewed_magma_is_not_a_group():
    bad = failed(lg.group_laws(lg.skewed_magma(M)))
    assert any("associativity" in law for law in bad)


def test_poly_group_json_roundtrip():
    g = GROUPS["heisenberg"]
    again = lg.PolyGroup.from_json(json.loads(json.dumps(g.to_json())), M)
    assert M.equal(again.m, g.m) and M.equal(again.inv, g.inv)
    with pytest.raises(ParseError):
        lg.PolyGroup.from_json(g.to_json(), PolyModel(7))


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_trivialization_is_invertible(name):
    _phi, _inv, reps = lg.trivialize(lg.TangentGroup(GROUPS[name]))
    assert failed(reps) == []


@pytest.mark.parametrize("name", ["additive1", "additive2", "quadratic"])
def test_structure_table_on_abelian_groups(name):
    rows = [r for r in lg.table1_check(lg.TangentGroup(GROUPS[name])) if r.law.startswith("row ")]
    assert failed(rows) == []


def test_middle_swap_needs_bracket_term_on_heisenberg():
    rows = {r.law: r for r in lg.table1_check(lg.TangentGroup(GROUPS["heisenberg"])) if r.law.startswith("row ")}
    literal = [r for law, r in rows.items() if law.startswith("row c:")]
    corrected = [r for law, r in rows.items() if law.startswith("row c, with bracket term")]
    assert len(literal) == 1 and not literal[0].passed
    assert len(corrected) == 1 and corrected[0].passed
    assert all(r.passed for law, r in rows.items() if not law.startswith("row c:"))


def test_adjoint_actions_match_matrix_conjugation():
    tg = lg.TangentGroup(GROUPS["heisenberg"])
    assert failed(lg.adjoint_checks(tg)) == []
    assert failed(lg.adjoint_oracle(tg)) == []


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_eckmann_hilton_and_negation(name):
    tg = lg.TangentGroup(GROUPS[name])
    assert failed(lg.eckmann_hilton(tg)) == []
    assert failed(lg.negation_checks(tg)) == []


def test_brace_accepts_equalizer_maps_and_rejects_others():
    good = M.poly_map(1, lambda x: [x, x * x, 0, x ** 3])
    assert lg.brace_equation(M, good, 1)
    assert lg.brace(M, good, 1).evaluate((2,)) == (2, 3)
    bad = M.poly_map(1, lambda x: [x, x * x, x + 1, x ** 3])
    with pytest.raises(NotInEqualizer):
        lg.brace(M, bad, 1)


def test_heisenberg_bracket_table():
    tg = lg.TangentGroup(GROUPS["heisenberg"])
    reps, info = lg.lie_checks(tg)
    assert failed(reps) == []
    table = info["bracket_table"]
    assert table["[X,Y]"] == [0, 0, 1] and table["[Y,X]"] == [0, 0, 4]
    assert lg.heisenberg_oracle_report(tg, table).passed


def test_parametric_bracket_against_oracle():
    tg = lg.TangentGroup(GROUPS["heisenberg"])
    Br = lg.parametric_bracket(tg)
    rng = np.random.default_rng(5)
    for _ in range(20):
        v, w = rng.integers(0, 5, 3), rng.integers(0, 5, 3)
        assert Br.evaluate(tuple(int(t) for t in (*v, *w))) == lg.heisenberg_bracket_oracle(5, v, w)
    assert failed(lg.bracket_algebra_checks(tg, Br)) == []


def test_bracket_vanishes_on_abelian_group():
    tg = lg.TangentGroup(GROUPS["additive2"])
    assert lg.bracket_of_elements(tg, (1, 0), (0, 1)) == (0, 0)


def test_left_invariant_fields():
    tg = lg.TangentGroup(GROUPS["heisenberg"])
    fields, reps = lg.left_invariant_search(tg)
    assert len(fields) == 5 ** 3 and failed(reps) == []
    assert failed(lg.left_invariant_roundtrip(tg)) == []


@pytest.mark.parametrize("i", [0, 1])
def test_vertical_bundle_of_line_bundles(i):
    P = lg.line_bundles(M)[i]
    assert failed(lg.bundle_laws(P)) == []
    reps, info = lg.vertical_bundle(P)
    assert failed(reps) == [] and info["T0"] == 125


def test_small_prime_heisenberg_is_exhaustive():
    tg = lg.TangentGroup(lg.heisenberg_group(PolyModel(3)))
    reps = lg.eckmann_hilton(tg)
    assert failed(reps) == [] and all("exhaustive" in r.regime for r in reps)
