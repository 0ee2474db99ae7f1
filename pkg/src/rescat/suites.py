"""Named verification checks shared by the command line and the acceptance suite.

Each check takes a :class:`Config` and returns a :class:`CheckOutcome`: the
law reports plus a small JSON-friendly ``info`` record.  The registry maps a
stable identifier to the check, its mathematical statement and the config
knobs it reads.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

from . import corpus
from .core import LawReport, all_passed, check_category_laws, check_join_laws, check_restriction_laws, restriction_pullback, tot_triv_smoke
from .errors import UnknownCheck
from .finset import FinObj, FinSetModel, ParMap, all_partial_maps, cycle, discrete, hom_sample, random_parmap
from .gbundles import (
    check_group,
    compose_pbun,
    cocycle_atlas,
    equivalence_roundtrip,
    equivariant_iso_search,
    identity_family,
    inverse_join_lemmas,
    orientation_divergence,
    pbun_morphism,
    right_action,
    action_orbits,
    search_transition_families,
    slice_group,
    torsor_witness,
)
from .manifolds import classify_roundtrip, glue
from .poly import Domain, PolyModel
from .tangent import check_join_tangent_compat, check_tangent_axioms, join_families, naturality_sample
from . import liegroups as lg

MODELS = ("finset", "poly")


@dataclass(frozen=True)
class Config:
    model: str = "poly"
    prime: int = 5
    jet_depth: int = 3
    budget: int = 10**6
    seed: int = 0

    def echo(self) -> dict:
        return {"model": self.model, "prime": self.prime, "jet_depth": self.jet_depth, "budget": self.budget, "seed": self.seed}

    def poly(self) -> PolyModel:
        return PolyModel(self.prime, self.jet_depth)


@dataclass
class CheckOutcome:
    reports: list[LawReport]
    info: dict = field(default_factory=dict)
    skipped: str | None = None

    @property
    def verdict(self) -> str:
        if self.skipped:
            return "SKIPPED"
        return "PASS" if all_passed(self.reports) else "FAIL"


@dataclass(frozen=True)
class Check:
    id: str
    statement: str
    knobs: tuple[str, ...]
    run: Callable[[Config], CheckOutcome]
    models: tuple[str, ...] = MODELS


REGISTRY: dict[str, Check] = {}


def register(id: str, statement: str, knobs: tuple[str, ...] = ("seed",), models: tuple[str, ...] = MODELS):
    def wrap(fn: Callable[[Config], CheckOutcome]) -> Callable[[Config], CheckOutcome]:
        REGISTRY[id] = Check(id, statement, knobs, fn, models)
        return fn

    return wrap


def get_check(id: str) -> Check:
    try:
        return REGISTRY[id]
    except KeyError:
        raise UnknownCheck(f"unknown check {id!r}", known=sorted(REGISTRY)) from None


def run_check(id: str, cfg: Config) -> CheckOutcome:
    chk = get_check(id)
    if cfg.model not in chk.models:
        return CheckOutcome([], {}, skipped=f"check needs model {' or '.join(chk.models)}")
    return chk.run(cfg)


# finite samples


def finset_objects() -> list[FinObj]:
    return [discrete("1pt", ["a"]), discrete("2pt", ["a", "b"]), discrete("4pt", range(4)), cycle("Z8", 8), discrete("16pt", range(16))]


def finset_sample(seed: int) -> list[ParMap]:
    """Every partial map among the 1- and 2-point objects plus random maps among all objects up to 16 points."""
    rng = random.Random(seed)
    objs = finset_objects()
    small = objs[:2]
    maps = [f for a, b in itertools.product(small, repeat=2) for f in all_partial_maps(a, b)]
    maps += hom_sample(FinSetModel(), objs[2:], rng, per_pair=2)
    return maps


def finset_families(seed: int) -> list[list[ParMap]]:
    """Compatible parallel families: a map cut into restrictions, and disjoint pieces of different maps."""
    rng = random.Random(seed)
    objs = finset_objects()
    out = []
    for a, b in itertools.product(objs, repeat=2):
        f = random_parmap(rng, a, b, density=1.0)
        pts = list(a.points)
        k = rng.randint(1, 3)
        parts = [ParMap(a, b, {x: f(x) for x in pts if rng.random() < 0.6}) for _ in range(k)]
        out.append(parts)
        g = random_parmap(rng, a, b, density=1.0)
        cut = len(pts) // 2
        out.append([ParMap(a, b, {x: f(x) for x in pts[:cut]}), ParMap(a, b, {x: g(x) for x in pts[cut:]})])
    return out


def poly_sample(M: PolyModel) -> list:
    p = M.p
    maps = list(naturality_sample(M))
    maps += [M.identity(1), M.identity(2), M.nowhere(1, 2), M.nowhere(2, 1)]
    maps += [M.idempotent(Domain.box(p, 1, {0: [0, 2]})), M.idempotent(Domain.box(p, 2, {0: [1], 1: [0, 1, 2]}))]
    maps += [f for fam in join_families(M) for f in fam]
    return maps


def _regime_note(reports: list[LawReport], text: str) -> list[LawReport]:
    for r in reports:
        r.note(text)
    return reports


# checks


@register(
    "restriction-laws",
    "Every morphism satisfies bar(f) f = f, restriction idempotents commute, bar(bar(g) f) = bar(g) bar(f) and "
    "f bar(g) = bar(f g) f; the derived order is a partial order; joins of compatible families are least upper "
    "bounds that are stable under precomposition and under bar.",
    ("model", "prime", "jet_depth", "seed"),
)
def _restriction_laws(cfg: Config) -> CheckOutcome:
    if cfg.model == "finset":
        X = FinSetModel()
        sample = finset_sample(cfg.seed)
        fams = finset_families(cfg.seed)
        note = "equality by full tables; hom-sets among 1- and 2-point objects enumerated completely, random maps among objects up to 16 points"
        totals = [f for f in sample if f.is_total()]
        pb = []
        rng = random.Random(cfg.seed)
        for _ in range(6):
            f, g = rng.choice(totals), rng.choice(totals)
            if f.tgt != g.tgt:
                continue
            probes = []
            for h in totals:
                if h.tgt == f.src:
                    for k in totals:
                        if k.src == h.src and k.tgt == g.src and X.equal(X.compose(h, f), X.compose(k, g)):
                            probes.append((h, k))
            _, reps = restriction_pullback(X, f, g, probes[:20])
            pb += reps
    else:
        X = cfg.poly()
        sample = poly_sample(X)
        fams = join_families(X)
        note = f"equality by jets to depth {cfg.jet_depth} over F{cfg.prime}, arities 1 and 2"
        pb = []
    reps = check_category_laws(X, sample) + check_restriction_laws(X, sample) + check_join_laws(X, fams, sample)
    reps += tot_triv_smoke(X, sample) + pb
    return CheckOutcome(_regime_note(reps, note), {"sample": len(sample), "families": len(fams)})


@register(
    "tangent-axioms",
    "T preserves restrictions and joins; p, 0, +, l and c are natural; T_n M is a pullback preserved by T^m; "
    "(p, 0, +) is an additive bundle; l and c satisfy the coherences; l is universal and c is an involution.",
    ("prime", "jet_depth", "seed"),
    ("poly",),
)
def _tangent_axioms(cfg: Config) -> CheckOutcome:
    M = cfg.poly()
    reps = check_tangent_axioms(M, (1, 2), seed=cfg.seed) + check_join_tangent_compat(M)
    return CheckOutcome(reps, {"arities": [1, 2], "jet_depth": cfg.jet_depth})


@register(
    "moebius",
    "The C2 atlas over the 8-point circle with one sign flip glues to a 16-point total space satisfying the gluing "
    "identities; regluing its atlas gives a canonically isomorphic bundle; it admits no equivariant isomorphism "
    "to the untwisted bundle; its torsor map is total.",
    ("budget",),
    ("finset",),
)
def _moebius(cfg: Config) -> CheckOutcome:
    P = corpus.twisted_c2()
    U = corpus.untwisted_c2()
    atlas = cocycle_atlas(P.gatlas, P.F, P.action, P.convention)
    gl = glue(atlas)
    size = LawReport("moebius: glued total space has 16 points")
    size.record(len(gl.obj) == 16, size=len(gl.obj))
    rt, _Phi = classify_roundtrip(P.bundle)
    tw = equivariant_iso_search(P, U, cfg.budget)
    same = equivariant_iso_search(U, corpus.untwisted_c2(), cfg.budget)
    cert = LawReport("moebius: no equivariant isomorphism to the untwisted bundle")
    cert.record(tw.status == "NONE" and not tw.pruned_by_cardinality, status=tw.status, nodes=tw.nodes)
    ctrl = LawReport("moebius: the untwisted bundle is isomorphic to itself (search control)")
    ctrl.record(same.status == "FOUND", status=same.status, nodes=same.nodes)
    r, _ = right_action(P)
    _d, tors = torsor_witness(P, r)
    reps = gl.reports + [size] + rt + [cert, ctrl] + tors
    return CheckOutcome(reps, {"total_space": len(gl.obj), "twisted_vs_untwisted": tw.status, "nodes": tw.nodes, "control": same.status})


@register(
    "right-action",
    "On a principal bundle the chart-wise left multiplications glue to a total right action r: P x G -> P with "
    "(r x 1) r = (1 x m) r, (1 x u) r = 1 and r q = pi0 q; it is free, and transitive on fibres when the bundle is "
    "totally fibred.",
    ("seed",),
    ("finset",),
)
def _right_action(cfg: Config) -> CheckOutcome:
    reps, info = [], {}
    for P in corpus.principal_bundles():
        r, rr = right_action(P)
        free, trans, local = action_orbits(P, r)
        tf = P.bundle.totally_fibred()
        expect = LawReport(f"{P.name}: global fibre transitivity holds exactly when totally fibred")
        expect.record(trans.passed == tf, totally_fibred=tf, transitive=trans.passed)
        reps += [_tag(x, P.name) for x in rr + [free, local]] + [expect]
        info[P.name] = {"points": len(P.bundle.E), "totally_fibred": tf, "globally_transitive": trans.passed}
    return CheckOutcome(reps, info)


@register(
    "torsor",
    "d* = join of the chart shears is a partial inverse of <pi0, r>: P x G -> P x_M P; it is total exactly when "
    "the bundle is totally fibred, and then <pi0, r> is a bijection.",
    ("seed",),
    ("finset",),
)
def _torsor(cfg: Config) -> CheckOutcome:
    reps, info = [], {}
    for P in corpus.principal_bundles():
        d, rr = torsor_witness(P)
        reps += [_tag(x, P.name) for x in rr]
        info[P.name] = {"d_total": d.is_total(), "totally_fibred": P.bundle.totally_fibred()}
    return CheckOutcome(reps, info)


@register(
    "principal-iso",
    "Equivariant isomorphism search over the identity of the base: none between the twisted and untwisted C2 "
    "bundles, one between the untwisted bundle and itself.",
    ("budget",),
    ("finset",),
)
def _principal_iso(cfg: Config) -> CheckOutcome:
    tw = equivariant_iso_search(corpus.twisted_c2(), corpus.untwisted_c2(), cfg.budget)
    un = equivariant_iso_search(corpus.untwisted_c2(), corpus.untwisted_c2(), cfg.budget)
    a = LawReport("principal iso: twisted vs untwisted is NONE")
    a.record(tw.status == "NONE", nodes=tw.nodes)
    b = LawReport("principal iso: untwisted vs untwisted is FOUND")
    b.record(un.status == "FOUND", nodes=un.nodes)
    return CheckOutcome([a, b], {"twisted": tw.status, "untwisted": un.status, "nodes": [tw.nodes, un.nodes]})


@register(
    "bundle-equivalence",
    "A G-bundle is recovered, up to the canonical comparison, from its principal bundle and its fibre action; "
    "the two cocycle orientations agree for C2 and give non-equivariantly-isomorphic principal bundles for C3.",
    ("budget",),
    ("finset",),
)
def _bundle_equivalence(cfg: Config) -> CheckOutcome:
    reps = []
    for E in (corpus.associated_c2("regular"), corpus.associated_c2("trivial"), corpus.twisted_c3()):
        reps += [_tag(x, E.name) for x in equivalence_roundtrip(E)]
    div3 = orientation_divergence(corpus.twisted_c3(), cfg.budget)
    div2 = orientation_divergence(corpus.twisted_c2(), cfg.budget)
    c2 = LawReport("orientation: C2 cocycles give the same atlas under both orientations")
    c2.record(div2["same_atlas"], **div2)
    c3 = LawReport("orientation: C3 orientations differ equivariantly but not as bundles")
    c3.record(div3["equivariant_iso"] == "NONE" and div3["bundle_iso"] == "FOUND", **div3)
    return CheckOutcome(reps + [c2, c3], {"C2": div2, "C3": div3})


@register(
    "pbun-morphisms",
    "Principal-bundle morphisms given by transition families: identities and composites satisfy the local "
    "conditions; a search over families finds none from the twisted to the untwisted C2 bundle over the identity.",
    ("budget",),
    ("finset",),
)
def _pbun(cfg: Config) -> CheckOutcome:
    reps = []
    info = {}
    for P in (corpus.twisted_c2(), corpus.untwisted_c2(), corpus.twisted_c3()):
        X = P.group.model
        one = X.identity(P.bundle.M)
        f = pbun_morphism(P, P, one, identity_family(P))
        comp, cr = compose_pbun(f, f)
        reps += [_tag(x, P.name) for x in f.reports + cr]
    one = corpus.MODEL.identity(corpus.circle())
    fams, nodes = search_transition_families(corpus.twisted_c2(), corpus.untwisted_c2(), one, cfg.budget)
    none = LawReport("pbun: no transition family from twisted to untwisted C2 over the identity")
    none.record(not fams, found=len(fams), nodes=nodes)
    reps.append(none)
    info["twisted_to_untwisted"] = {"families": len(fams), "nodes": nodes}
    return CheckOutcome(reps, info)


@register(
    "slice-groups",
    "A group in finite sets induces the group M x G -> M in the slice over M; disjoint joins and partial "
    "retractions interact with partial inverses as expected.",
    ("seed",),
    ("finset",),
)
def _slices(cfg: Config) -> CheckOutcome:
    g = corpus.c3()
    _sg, _S, reps = slice_group(corpus.circle(), g)
    reps = check_group(g) + reps + inverse_join_lemmas(corpus.MODEL, finset_objects()[:4], seed=cfg.seed)
    return CheckOutcome(reps)


def _groups(cfg: Config) -> dict[str, lg.PolyGroup]:
    return lg.named_groups(cfg.poly())


@register(
    "group-laws",
    "The shipped polynomial groups and their tangent groups T(G), with T(m), T(u) and T(iota), satisfy "
    "associativity, unit and inverse laws.",
    ("prime", "seed"),
    ("poly",),
)
def _group_laws(cfg: Config) -> CheckOutcome:
    reps = []
    for name, g in _groups(cfg).items():
        reps += [_tag(x, g.name) for x in lg.group_laws(g, cfg.seed)]
        reps += [_tag(x, f"T({g.name})") for x in check_group(lg.TangentGroup(g).tangent_group(), seed=cfg.seed)]
    return CheckOutcome(reps)


@register(
    "trivialization",
    "phi = <p, <!, <p iota 0, 1> T(m)>>: T(G) -> G x T(G)_u and (0 x p_u*) T(m) are mutually inverse.",
    ("prime", "seed"),
    ("poly",),
)
def _trivialization(cfg: Config) -> CheckOutcome:
    reps = []
    for name in ("additive1", "additive2", "heisenberg"):
        g = _groups(cfg)[name]
        _phi, _inv, rr = lg.trivialize(lg.TangentGroup(g), cfg.seed)
        reps += [_tag(x, g.name) for x in rr]
    return CheckOutcome(reps)


@register(
    "structure-transport",
    "Through phi the maps +, 0, p, l, c, T(m), T(u) and T(iota) of T(G) become 1 x +_u, <1, !0_u>, pi0, "
    "<pi0, !0_u, !0_u, pi1>, the middle swap, (1 x s x 1)(m x T(m)_u), <u, 0_u> and the swap of "
    "T(iota)_u x iota followed by s.",
    ("prime", "seed"),
    ("poly",),
)
def _transport(cfg: Config) -> CheckOutcome:
    reps = []
    for name, g in _groups(cfg).items():
        reps += [_tag(x, g.name) for x in lg.table1_check(lg.TangentGroup(g), cfg.seed)]
    return CheckOutcome(reps)


@register(
    "adjoint",
    "Ad_l(g, v) = g v g^-1 and Ad_r(v, h) = h^-1 v h are left and right actions on T(G)_u; s = <pi1, Ad_r> is "
    "invertible and s (0 x p_u*) T(m) = (p_u* x 0) T(m).",
    ("prime", "seed"),
    ("poly",),
)
def _adjoint(cfg: Config) -> CheckOutcome:
    reps = []
    for name, g in _groups(cfg).items():
        tg = lg.TangentGroup(g)
        reps += [_tag(x, g.name) for x in lg.adjoint_checks(tg, cfg.seed)]
        if name == "heisenberg":
            reps += [_tag(x, g.name) for x in lg.adjoint_oracle(tg)]
    return CheckOutcome(reps)


@register(
    "eckmann-hilton",
    "On T(G)_u the fibre addition +_u and the induced multiplication T(m)_u coincide and are commutative, with "
    "unit 0_u and inverse T(iota)_u; a non-unital law x + 2y breaks the coincidence.",
    ("prime", "seed"),
    ("poly",),
)
def _eh(cfg: Config) -> CheckOutcome:
    reps = []
    for name, g in _groups(cfg).items():
        reps += [_tag(x, g.name) for x in lg.eckmann_hilton(lg.TangentGroup(g), cfg.seed)]
    bad = lg.eckmann_hilton(lg.TangentGroup(lg.skewed_magma(cfg.poly())), cfg.seed)
    control = LawReport("eckmann-hilton: x + 2y breaks +_u = T(m)_u (negative control)")
    control.record(not bad[0].passed, counterexample=bad[0].counterexamples[:1])
    return CheckOutcome(reps + [control])


@register(
    "negation",
    "phi (1 x T(iota)_u) phi^-1 is a negation for T(G) -> G compatible with T(m) and +; c T(-) c is a negation "
    "on T^2 G.",
    ("prime", "seed"),
    ("poly",),
)
def _negation(cfg: Config) -> CheckOutcome:
    reps = []
    for name, g in _groups(cfg).items():
        reps += [_tag(x, g.name) for x in lg.negation_checks(lg.TangentGroup(g), cfg.seed)]
    return CheckOutcome(reps)


@register(
    "left-invariant",
    "Left-invariant vector fields correspond to vectors at the unit via V -> (0 x V p_u*) T(m) and "
    "xi -> <1, u xi>; they are closed under 0, + and -.",
    ("prime",),
    ("poly",),
)
def _left_invariant(cfg: Config) -> CheckOutcome:
    reps = []
    for name, g in _groups(cfg).items():
        reps += [_tag(x, g.name) for x in lg.left_invariant_roundtrip(lg.TangentGroup(g))]
    return CheckOutcome(reps)


@register(
    "heisenberg-lie",
    "The bracket {<w1 T(w2), w2 T(w1) c -> +} of left-invariant fields is left-invariant; on the Heisenberg "
    "group [X, Y] = Z and all other basis brackets vanish; the bracket is antisymmetric, bilinear and satisfies "
    "Jacobi on the whole span.",
    ("prime", "seed"),
    ("poly",),
)
def _heisenberg_lie(cfg: Config) -> CheckOutcome:
    tg = lg.TangentGroup(lg.heisenberg_group(cfg.poly()))
    reps, info = lg.lie_checks(tg, seed=cfg.seed)
    reps.append(lg.heisenberg_oracle_report(tg, info["bracket_table"]))
    X = tg.field_of(tg.vector([1, 0, 0]))
    Y = tg.field_of(tg.vector([0, 1, 0]))
    br = LawReport("brace: <{f} l, f p 0> T(+) = f for the bracket sum")
    br.record(lg.brace_equation(tg.M, lg.bracket_sum(tg, X, Y), 3))
    return CheckOutcome(reps + [br], info)


@register(
    "vertical-bundle",
    "For a principal bundle P -> M the map (0 x p_u*) T(r): P x T(G)_u -> T(P) lands in the pullback T_0(P) of "
    "T(q) along 0 and is a bijection onto it, inverted by the join of the chart maps.",
    ("prime",),
)
def _vertical(cfg: Config) -> CheckOutcome:
    reps, info = [], {}
    if cfg.model == "finset":
        for P in corpus.principal_bundles():
            reps.append(lg.finset_vertical_smoke(P))
        return CheckOutcome(reps, {"tangent": "T = 1"})
    for P in lg.line_bundles(cfg.poly()):
        reps += lg.bundle_laws(P)
        rr, ii = lg.vertical_bundle(P)
        reps += rr
        info[P.name] = ii
    return CheckOutcome(reps, info)


def _tag(rep: LawReport, name: str) -> LawReport:
    if not rep.law.startswith(name):
        rep.law = f"{name}: {rep.law}"
    return rep


__all__ = ["Check", "CheckOutcome", "Config", "REGISTRY", "get_check", "run_check", "register"]
