"""Group objects, G-atlases, G-bundles and principal bundles.

Cocycle orientation: a G-atlas tau_ij produces the bundle atlas
u_ij(x, f) = (x, tau_ji(x) . f).  The construction used by the
principal/build functors, u_ij(x, f) = (x, tau_ij(x) . f), is available as
``convention="functor"``; the two agree exactly when every tau_ij is an
involution where defined.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .core import LawReport, all_passed, compatible, leq
from .errors import BadTransitionFamily, IllFormedCocycle, IncompatibleFamily, ModelError, ParseError
from .finset import FinObj, FinSetModel, ParMap, SearchResult, from_jsonable, iso_search, product_object, random_parmap, to_jsonable
from .manifolds import (
    Atlas,
    AtlasMorphism,
    FibreBundle,
    atlas_to_bundle,
    bundle_to_atlas,
    check_atlas_morphism,
    induced_bundle_map,
)

CONVENTIONS = ("def", "functor")


# group objects


@dataclass
class GroupObject:
    """(G, m, u, iota) in a Cartesian restriction model."""

    model: Any
    carrier: Any
    m: Any
    u: Any
    inv: Any
    name: str = "G"

    def mul(self, a: Any, b: Any) -> Any:
        return self.m((a, b))

    @property
    def unit(self) -> Any:
        return self.u(())

    def inverse(self, a: Any) -> Any:
        return self.inv(a)

    def to_json(self) -> dict:
        pts = list(self.carrier.points)
        return {
            "group": self.name,
            "carrier": self.carrier.to_json(),
            "table": [[to_jsonable(self.mul(a, b)) for b in pts] for a in pts],
            "unit": to_jsonable(self.unit),
        }

    @classmethod
    def from_json(cls, data: Mapping, model: FinSetModel | None = None) -> "GroupObject":
        model = model or FinSetModel()
        try:
            G = FinObj.from_json(data["carrier"])
            table = data["table"]
            pts = list(G.points)
            mul = {(a, b): from_jsonable(table[i][j]) for i, a in enumerate(pts) for j, b in enumerate(pts)}
            unit = from_jsonable(data["unit"])
        except (KeyError, TypeError, IndexError) as exc:
            raise ParseError(f"malformed group record: {exc}") from exc
        inv = {a: next((b for b in pts if mul[(a, b)] == unit), None) for a in pts}
        return finset_group(data["group"], G, lambda a, b: mul[(a, b)], unit, lambda a: inv[a], model)


def finset_group(name: str, carrier: FinObj, op: Callable, unit: Any, inverse: Callable, model: FinSetModel | None = None) -> GroupObject:
    X = model or FinSetModel()
    GG = product_object(carrier, carrier)
    m = ParMap(GG, carrier, {(a, b): op(a, b) for (a, b) in GG.points})
    u = X.point(carrier, unit)
    inv = ParMap(carrier, carrier, {a: inverse(a) for a in carrier.points if inverse(a) is not None})
    return GroupObject(X, carrier, m, u, inv, name)


def cyclic_group(n: int, name: str | None = None, labels: Sequence[Any] | None = None, model: FinSetModel | None = None) -> GroupObject:
    """Z/n with the given element labels (default 0..n-1)."""
    labels = list(range(n)) if labels is None else list(labels)
    idx = {x: k for k, x in enumerate(labels)}
    G = FinObj(name or f"C{n}", labels)
    return finset_group(G.name, G, lambda a, b: labels[(idx[a] + idx[b]) % n], labels[0], lambda a: labels[(-idx[a]) % n], model)


def check_group(g: GroupObject, *, pointwise_limit: int = 2_500_000, seed: int = 0) -> list[LawReport]:
    """Associativity, unit and inverse laws by the model's equality (plus evaluation in the poly model)."""
    X = g.model
    G = g.carrier
    one = X.identity(G)
    unit = X.compose(X.bang(G), g.u)
    reps = []

    def law(name: str, lhs: Any, rhs: Any) -> None:
        rep = LawReport(f"group: {name}")
        ok = X.equal(lhs, rhs)
        witness = None
        if not ok and hasattr(lhs, "table"):
            bad = [x for x in lhs.src.points if lhs.table.get(x) != rhs.table.get(x)]
            witness = {"at": bad[0], "left": lhs.table.get(bad[0]), "right": rhs.table.get(bad[0])}
        if hasattr(X, "p"):
            from .poly import pointwise_witness, points_for

            pts, regime = points_for(X.p, lhs.src, pointwise_limit, np.random.default_rng(seed), 20_000)
            rep.regime = f"exact jets + {regime} evaluation"
            pw = pointwise_witness(lhs, rhs, pts)
            ok = ok and pw is None
            witness = witness or pw
        rep.record(ok, witness=witness)
        reps.append(rep)

    tot = LawReport("group: m, u, iota are total")
    tot.record(all(_is_total(X, f) for f in (g.m, g.u, g.inv)))
    reps.append(tot)
    law("associativity (m x 1) m = (1 x m) m", X.compose(X.times(g.m, one), g.m), X.compose(X.assoc(G, G, G), X.compose(X.times(one, g.m), g.m)))
    law("left unit <!u, 1> m = 1", X.compose(X.pair(unit, one), g.m), one)
    law("right unit <1, !u> m = 1", X.compose(X.pair(one, unit), g.m), one)
    law("left inverse <iota, 1> m = !u", X.compose(X.pair(g.inv, one), g.m), unit)
    law("right inverse <1, iota> m = !u", X.compose(X.pair(one, g.inv), g.m), unit)
    return reps


def _is_total(X: Any, f: Any) -> bool:
    return X.equal(X.bar(f), X.identity(X.source(f)))


def check_action(g: GroupObject, F: FinObj, a: ParMap) -> list[LawReport]:
    """Left action laws: (m x 1) a = (1 x a) a and <!u, 1> a = 1_F."""
    X = g.model
    G = g.carrier
    comp = LawReport("G-object: (m x 1) a = (1 x a) a")
    lhs = X.compose(X.times(g.m, X.identity(F)), a)
    rhs = X.compose(X.assoc(G, G, F), X.compose(X.times(X.identity(G), a), a))
    comp.record(X.equal(lhs, rhs))
    unit = LawReport("G-object: <!u, 1> a = 1_F")
    unit.record(X.equal(X.compose(X.pair(X.compose(X.bang(F), g.u), X.identity(F)), a), X.identity(F)))
    tot = LawReport("G-object: a is total")
    tot.record(a.is_total())
    return [tot, comp, unit]


def regular_action(g: GroupObject) -> tuple[FinObj, ParMap]:
    return g.carrier, g.m


def trivial_action(g: GroupObject, F: FinObj) -> ParMap:
    X = g.model
    return X.proj1(g.carrier, F)


def permutation_action(g: GroupObject, F: FinObj, act: Callable[[Any, Any], Any]) -> ParMap:
    GF = product_object(g.carrier, F)
    return ParMap(GF, F, {(h, f): act(h, f) for (h, f) in GF.points})


# G-atlases


@dataclass
class GAtlas:
    """Partial maps tau_ij: M -> G."""

    M: FinObj
    group: GroupObject
    tau: dict
    size: int

    def t(self, i: int, j: int) -> ParMap:
        got = self.tau.get((i, j))
        return self.group.model.nowhere(self.M, self.group.carrier) if got is None else got

    @property
    def index(self) -> range:
        return range(self.size)

    def to_json(self) -> dict:
        return {
            "base": self.M.to_json(),
            "group": self.group.to_json(),
            "cocycle": {f"{i},{j}": {key(x): to_jsonable(v) for x, v in self.t(i, j).table.items()} for i in self.index for j in self.index},
        }

    @classmethod
    def from_json(cls, data: Mapping, model: FinSetModel | None = None) -> "GAtlas":
        model = model or FinSetModel()
        try:
            M = FinObj.from_json(data["base"])
            grp = GroupObject.from_json(data["group"], model)
            by_key = {key(p): p for p in M.points}
            tau = {}
            size = 0
            for k, table in data["cocycle"].items():
                i, j = (int(t) for t in k.split(","))
                size = max(size, i + 1, j + 1)
                tau[(i, j)] = ParMap(M, grp.carrier, {by_key[x]: from_jsonable(v) for x, v in table.items()})
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed cocycle record: {exc}") from exc
        return cls(M, grp, tau, size)


def key(point: Any) -> str:
    from .finset import key_str

    return key_str(point)


def check_gatlas(ga: GAtlas) -> list[LawReport]:
    """(tau_ij, tau_jk) m <= tau_ik, tau_ii <= !u, tau_ji = tau_ij iota."""
    g = ga.group
    X = g.model
    cocycle = LawReport("G-atlas: (tau_ij, tau_jk) m <= tau_ik")
    unit = LawReport("G-atlas: tau_ii <= !u")
    inverse = LawReport("G-atlas: tau_ji = tau_ij iota")
    bang_u = X.compose(X.bang(ga.M), g.u)
    for i, j in itertools.product(ga.index, repeat=2):
        inverse.record(X.equal(ga.t(j, i), X.compose(ga.t(i, j), g.inv)), i=i, j=j)
        for k in ga.index:
            prod = X.compose(X.pair(ga.t(i, j), ga.t(j, k)), g.m)
            cocycle.record(leq(X, prod, ga.t(i, k)), i=i, j=j, k=k)
    for i in ga.index:
        unit.record(leq(X, ga.t(i, i), bang_u), i=i)
    return [cocycle, unit, inverse]


def cocycle_atlas(ga: GAtlas, F: FinObj, a: ParMap, convention: str = "def") -> Atlas:
    """u_ij(x, f) = (x, tau_ji(x) . f) ("def") or (x, tau_ij(x) . f) ("functor")."""
    if convention not in CONVENTIONS:
        raise ModelError(f"unknown cocycle convention {convention!r}")
    X = ga.group.model
    MF = product_object(ga.M, F)
    trans = {}
    for i, j in itertools.product(ga.index, repeat=2):
        t = ga.t(j, i) if convention == "def" else ga.t(i, j)
        trans[(i, j)] = ParMap(MF, MF, {(x, f): (x, a((t(x), f))) for (x, f) in MF.points if x in t.table})
    return Atlas(X, [MF] * ga.size, trans)


# G-bundles


@dataclass
class GBundle:
    """A fibre bundle with a G-action on the fibre and a G-atlas."""

    bundle: FibreBundle
    gatlas: GAtlas
    F: FinObj
    action: ParMap
    convention: str = "def"
    reports: list = field(default_factory=list)

    @property
    def group(self) -> GroupObject:
        return self.gatlas.group

    @property
    def is_principal(self) -> bool:
        return self.F == self.group.carrier and self.action == self.group.m

    @property
    def name(self) -> str:
        return self.bundle.name


def gbundle_from_cocycle(ga: GAtlas, F: FinObj, a: ParMap, convention: str = "def", name: str = "G-bundle") -> GBundle:
    """Glue the bundle atlas of a cocycle and attach the G-structure."""
    laws = check_gatlas(ga)
    if not all_passed(laws):
        raise IllFormedCocycle("cocycle laws fail", failed=[r.law for r in laws if not r.passed])
    atlas = cocycle_atlas(ga, F, a, convention)
    b, _gl, reps = atlas_to_bundle(atlas, ga.M, F, name=name)
    gb = GBundle(b, ga, F, a, convention)
    gb.reports = laws + check_action(ga.group, F, a) + reps + [orientation_report(gb)]
    return gb


def principal_from_cocycle(ga: GAtlas, convention: str = "def", name: str = "principal bundle") -> GBundle:
    g = ga.group
    return gbundle_from_cocycle(ga, g.carrier, g.m, convention, name)


def orientation_report(gb: GBundle) -> LawReport:
    """alpha_i* alpha_j against the atlas (pi0, (pi0 tau_ji, pi1) a) of the definition."""
    X = gb.group.model
    want = cocycle_atlas(gb.gatlas, gb.F, gb.action, "def")
    rep = LawReport("G-bundle: alpha_i* alpha_j = (pi0, (pi0 tau_ji, pi1) a)")
    for i, j in itertools.product(gb.gatlas.index, repeat=2):
        got = X.compose(gb.bundle.alpha_inv(i), gb.bundle.alphas[j])
        rep.record(X.equal(got, want.u(i, j)), i=i, j=j, convention=gb.convention)
    if gb.convention != "def" and not rep.passed:
        rep.note("the functor orientation tau_ij differs from the definition's tau_ji on this cocycle")
    return rep


def conventions_agree(ga: GAtlas, F: FinObj, a: ParMap) -> LawReport:
    """Do the two orientations produce the same bundle atlas?"""
    X = ga.group.model
    d, f = cocycle_atlas(ga, F, a, "def"), cocycle_atlas(ga, F, a, "functor")
    rep = LawReport("cocycle orientations tau_ji and tau_ij give the same atlas")
    for i, j in itertools.product(ga.index, repeat=2):
        rep.record(X.equal(d.u(i, j), f.u(i, j)), i=i, j=j)
    return rep


# the right action


def right_action(P: GBundle) -> tuple[ParMap, list[LawReport]]:
    """r = join of r_i = (alpha_i x 1_G)(1_M x m) alpha_i*."""
    g = P.group
    X = g.model
    b = P.bundle
    G = g.carrier
    PG = product_object(b.E, G)
    comps = []
    bar_rep = LawReport("right action: bar(r_i) = bar(alpha_i) x 1_G")
    for i, alpha in enumerate(b.alphas):
        step = X.compose(X.times(alpha, X.identity(G)), X.assoc(b.M, G, G))
        r_i = X.compose(X.compose(step, X.times(X.identity(b.M), g.m)), b.alpha_inv(i))
        comps.append(r_i)
        bar_rep.record(X.equal(X.bar(r_i), X.times(X.bar(alpha), X.identity(G))), i=i)
    compat = LawReport("right action: r_i pairwise compatible")
    for (i, ri), (j, rj) in itertools.combinations(enumerate(comps), 2):
        compat.record(compatible(X, ri, rj), i=i, j=j)
    try:
        r = X.join(comps, PG, b.E)
    except IncompatibleFamily:
        raise
    total = LawReport("right action: r is total")
    total.record(r.is_total(), missing=sorted(set(PG.points) - r.domain, key=repr)[:5])
    one_P = X.identity(b.E)
    act = LawReport("right action: (r x 1) r = (1 x m) r")
    lhs = X.compose(X.times(r, X.identity(G)), r)
    rhs = X.compose(X.assoc(b.E, G, G), X.compose(X.times(one_P, g.m), r))
    act.record(X.equal(lhs, rhs))
    unit = LawReport("right action: (1 x u) r = 1")
    unit.record(X.equal(X.compose(X.pair(one_P, X.compose(X.bang(b.E), g.u)), r), one_P))
    base = LawReport("right action: r q = pi0 q")
    base.record(X.equal(X.compose(r, b.q), X.compose(X.proj0(b.E, G), b.q)))
    return r, [bar_rep, compat, total, act, unit, base]


def action_orbits(P: GBundle, r: ParMap) -> tuple[LawReport, LawReport, LawReport]:
    """Freeness, global fibre transitivity, and transitivity on each chart's part of a fibre."""
    g = P.group
    b = P.bundle
    e = g.unit
    free = LawReport("right action: free, r(y, g) = y only for g = e")
    trans = LawReport("right action: orbit of y = q-fibre of y")
    local = LawReport("right action: orbit of y = q-fibre of y inside each chart containing y")
    fibres: dict = {}
    for y in b.E.points:
        fibres.setdefault(b.q(y), set()).add(y)
    for y in b.E.points:
        orbit = {r((y, h)) for h in g.carrier.points}
        free.record(all(r((y, h)) != y for h in g.carrier.points if h != e), y=y)
        trans.record(orbit == fibres[b.q(y)], y=y, orbit=len(orbit), fibre=len(fibres[b.q(y)]))
        for i, alpha in enumerate(b.alphas):
            if y in alpha.table:
                part = {z for z in fibres[b.q(y)] if z in alpha.table}
                local.record(orbit == part, y=y, chart=i)
    return free, trans, local


# isomorphism searches


def equivariant_iso_search(P1: GBundle, P2: GBundle, budget: int = 10**6, equivariant: bool = True) -> SearchResult:
    """Total bijection E1 -> E2 over 1_M, continuous, commuting with q and (optionally) the right action."""
    b1, b2 = P1.bundle, P2.bundle
    r1 = right_action(P1)[0] if equivariant else None
    r2 = right_action(P2)[0] if equivariant else None
    G = P1.group.carrier.points

    def consistent(assign: dict, x: Any, y: Any) -> bool:
        if not equivariant:
            return True
        for h in G:
            x2 = r1((x, h))
            if x2 in assign and assign[x2] != r2((y, h)):
                return False
        return True

    return iso_search(b1.E, b2.E, labels=(b1.q, b2.q), consistent=consistent, budget=budget)


def fibre_iso_search(E1: GBundle, E2: GBundle, budget: int = 10**6) -> SearchResult:
    """Continuous total bijection over 1_M commuting with the projections."""
    return equivariant_iso_search(E1, E2, budget, equivariant=False)


# principal bundle morphisms


def chart_components(P: GBundle, P2: GBundle, phi: ParMap, T: Mapping[tuple[int, int], ParMap]) -> dict:
    """A_ik(x, g) = (phi(x), T_ik(x) g)."""
    g = P.group
    MG = product_object(P.bundle.M, g.carrier)
    MG2 = product_object(P2.bundle.M, g.carrier)
    A = {}
    for (i, k), t in T.items():
        table = {}
        for (x, h) in MG.points:
            if x in t.table and x in phi.table:
                table[(x, h)] = (phi(x), g.mul(t(x), h))
        A[(i, k)] = ParMap(MG, MG2, table)
    return A


def transition_conditions(P: GBundle, P2: GBundle, phi: ParMap, T: Mapping, orientation: str) -> list[LawReport]:
    """The three conditions on T in the definition's orientation or as printed in the characterization."""
    g = P.group
    X = g.model
    ga, gb = P.gatlas, P2.gatlas
    I, K = list(ga.index), list(gb.index)
    MG_nowhere = X.nowhere(ga.M, g.carrier)
    Tf = lambda i, k: T.get((i, k), MG_nowhere)
    c1 = LawReport(f"T conditions ({orientation}): source cocycle")
    c2 = LawReport(f"T conditions ({orientation}): target cocycle inequality")
    c3 = LawReport(f"T conditions ({orientation}): target cocycle equation")
    mult = lambda a, b: X.compose(X.pair(a, b), g.m)
    for i, j, k in itertools.product(I, I, K):
        tau = ga.t(j, i) if orientation == "derived" else ga.t(i, j)
        c1.record(leq(X, mult(Tf(j, k), tau), Tf(i, k)), i=i, j=j, k=k)
    for i, k, l in itertools.product(I, K, K):
        tau2 = X.compose(phi, gb.t(l, k) if orientation == "derived" else gb.t(k, l))
        if orientation == "derived":
            c2.record(leq(X, mult(tau2, Tf(i, k)), Tf(i, l)), i=i, k=k, l=l)
        else:
            c2.record(leq(X, mult(tau2, Tf(i, l)), Tf(i, k)), i=i, k=k, l=l)
        c3.record(X.equal(X.compose(X.bar(Tf(i, k)), Tf(i, l)), mult(tau2, Tf(i, k))), i=i, k=k, l=l)
    return [c1, c2, c3]


@dataclass
class PBunMorphism:
    source: GBundle
    target: GBundle
    phi: ParMap
    T: dict
    Phi: ParMap
    reports: list
    printed: list = field(default_factory=list)


def pbun_morphism(P: GBundle, P2: GBundle, phi: ParMap, T: Mapping[tuple[int, int], ParMap]) -> PBunMorphism:
    """Principal bundle morphism from a base map and local transition family."""
    X = P.group.model
    A = chart_components(P, P2, phi, T)
    src_atlas, _ = bundle_to_atlas(P.bundle)
    tgt_atlas, _ = bundle_to_atlas(P2.bundle)
    am = check_atlas_morphism(AtlasMorphism(src_atlas, tgt_atlas, A))
    bad = [r.law for r in am if not r.passed]
    if bad:
        raise BadTransitionFamily("T does not give an atlas morphism", violated=bad)
    Phi = induced_bundle_map(P.bundle, P2.bundle, A)
    comm = LawReport("principal morphism: Phi q' = q phi")
    comm.record(X.equal(X.compose(Phi, P2.bundle.q), X.compose(P.bundle.q, phi)))
    r1, _ = right_action(P)
    r2, _ = right_action(P2)
    eq = LawReport("principal morphism: r Phi = (Phi x 1_G) r'")
    eq.record(X.equal(X.compose(r1, Phi), X.compose(X.times(Phi, X.identity(P.group.carrier)), r2)))
    local = LawReport("principal morphism: alpha_i* Phi alpha'_k = A_ik")
    for (i, k), Aik in A.items():
        got = X.compose(X.compose(P.bundle.alpha_inv(i), Phi), P2.bundle.alphas[k])
        local.record(leq(X, got, Aik) and leq(X, Aik, got), i=i, k=k)
    derived = transition_conditions(P, P2, phi, T, "derived")
    printed = transition_conditions(P, P2, phi, T, "printed")
    agree = LawReport("T conditions: printed orientation agrees with the derived one")
    agree.record(all_passed(derived) == all_passed(printed), derived=all_passed(derived), printed=all_passed(printed))
    return PBunMorphism(P, P2, phi, dict(T), Phi, am + [comm, eq, local] + derived, printed + [agree])


def compose_pbun(f: PBunMorphism, h: PBunMorphism) -> tuple[PBunMorphism, list[LawReport]]:
    """(phi, T)(phi', T') = (phi phi', join_k (phi T'_kl, T_ik) m), checked against Phi Phi'."""
    g = f.source.group
    X = g.model
    I, K, L = f.source.gatlas.index, f.target.gatlas.index, h.target.gatlas.index
    nowhere = X.nowhere(f.source.gatlas.M, g.carrier)
    T2 = {}
    printed = {}
    for i, l in itertools.product(I, L):
        parts, pparts = [], []
        for k in K:
            Tik, Tkl = f.T.get((i, k), nowhere), h.T.get((k, l), nowhere)
            parts.append(X.compose(X.pair(X.compose(f.phi, Tkl), Tik), g.m))
            pparts.append(X.compose(X.pair(Tik, Tkl), g.m) if f.phi == X.identity(f.source.gatlas.M) else X.compose(X.pair(Tik, X.compose(f.phi, Tkl)), g.m))
        T2[(i, l)] = X.join(parts, f.source.gatlas.M, g.carrier)
        printed[(i, l)] = X.join_unchecked(pparts, f.source.gatlas.M, g.carrier)
    phi2 = X.compose(f.phi, h.phi)
    comp = pbun_morphism(f.source, h.target, phi2, T2)
    rep = LawReport("principal morphism composition: Phi'' = Phi Phi'")
    rep.record(X.equal(comp.Phi, X.compose(f.Phi, h.Phi)))
    pr = LawReport("principal morphism composition: printed product order (T_ik, T'_kl) m agrees")
    pr.record(all(X.equal(printed[key_], T2[key_]) for key_ in T2))
    return comp, [rep, pr]


def identity_family(P: GBundle) -> dict:
    """T_ik = tau_ki, so that A_ik = u_ik."""
    ga = P.gatlas
    return {(i, k): ga.t(k, i) for i in ga.index for k in ga.index}


def search_transition_families(
    P: GBundle, P2: GBundle, phi: ParMap, budget: int = 10**6
) -> tuple[list[dict], int]:
    """All continuous T families over phi that give a total, continuous Phi.

    Every condition on T is pointwise in x once phi is fixed, so the search
    enumerates admissible local configurations per base point and glues them
    along the edges of the base.
    """
    g = P.group
    M = P.bundle.M
    I, K = list(P.gatlas.index), list(P2.gatlas.index)
    pairs = [(i, k) for i in I for k in K]
    opts = [None, *g.carrier.points]
    e1 = [set(x.table) for x in P.bundle.e]
    e2 = [set(x.table) for x in P2.bundle.e]
    locals_: dict = {}
    nodes = 0
    for x in M.points:
        good = []
        for choice in itertools.product(opts, repeat=len(pairs)):
            nodes += 1
            if nodes > budget:
                from .errors import SearchBudgetExceeded

                raise SearchBudgetExceeded("transition family search exceeded its budget", budget=budget)
            t = dict(zip(pairs, choice))
            if _local_ok(P, P2, phi, x, t, e1, e2):
                good.append(t)
        locals_[x] = good
    order = list(M.points)
    found: list[dict] = []

    def rec(k: int, chosen: dict) -> None:
        nonlocal nodes
        if k == len(order):
            found.append(dict(chosen))
            return
        x = order[k]
        for t in locals_[x]:
            nodes += 1
            if nodes > budget:
                from .errors import SearchBudgetExceeded

                raise SearchBudgetExceeded("transition family search exceeded its budget", budget=budget)
            ok = True
            for y in M.neighbours(x):
                if y in chosen:
                    for pk in pairs:
                        a, b = t[pk], chosen[y][pk]
                        if a is not None and b is not None and a != b:
                            ok = False
            if ok:
                chosen[x] = t
                rec(k + 1, chosen)
                del chosen[x]

    rec(0, {})
    families = []
    for sol in found:
        T = {pk: ParMap(M, g.carrier, {x: sol[x][pk] for x in M.points if sol[x][pk] is not None}) for pk in pairs}
        families.append(T)
    return families, nodes


def _local_ok(P: GBundle, P2: GBundle, phi: ParMap, x: Any, t: Mapping, e1: list, e2: list) -> bool:
    """The derived conditions on T at one base point, plus totality of Phi over x."""
    g = P.group
    ga, gb = P.gatlas, P2.gatlas
    if x not in phi.table:
        return False
    y = phi(x)
    mul = g.mul
    for (i, k), v in t.items():
        if v is None:
            continue
        if x not in e1[i] or y not in e2[k]:
            return False
    for (i, k), v in t.items():
        for j in ga.index:
            tau = ga.t(j, i).table.get(x)
            w = t.get((j, k))
            if tau is not None and w is not None and (v is None or mul(w, tau) != v):
                return False
        if v is None:
            continue
        for l in gb.index:
            tau2 = gb.t(l, k).table.get(y)
            w = t.get((i, l))
            lhs = None if tau2 is None else mul(tau2, v)
            if lhs != w:
                return False
    return any(v is not None for v in t.values())


# equivalence of G-bundles with principal bundles times G-objects


def principal_of(E: GBundle, convention: str = "functor") -> GBundle:
    """principal: glue u_ij = (tau_ij x 1_G)(1_M x m)."""
    return principal_from_cocycle(E.gatlas, convention, name=f"principal({E.name})")


def fibre_of(E: GBundle) -> tuple[FinObj, ParMap]:
    return E.F, E.action


def build(P: GBundle, F: FinObj, a: ParMap, convention: str = "functor") -> GBundle:
    """build: glue u_ij = ((1_M, tau_ij) x 1_F)(1_M x a)."""
    return gbundle_from_cocycle(P.gatlas, F, a, convention, name=f"build({P.name}, {F.name})")


def canonical_comparison(E1: GBundle, E2: GBundle) -> tuple[ParMap | None, list[LawReport]]:
    """Chart-level iso Phi = join alpha_i alpha'_i* between gluings of one atlas."""
    X = E1.group.model
    a1, _ = bundle_to_atlas(E1.bundle)
    a2, _ = bundle_to_atlas(E2.bundle)
    same = LawReport(f"{E1.name} and {E2.name} have the same bundle atlas")
    for i, j in itertools.product(a1.index, repeat=2):
        same.record(X.equal(a1.u(i, j), a2.u(i, j)), i=i, j=j)
    if not same.passed:
        return None, [same]
    Phi = X.join([X.compose(a, E2.bundle.alpha_inv(i)) for i, a in enumerate(E1.bundle.alphas)], E1.bundle.E, E2.bundle.E)
    iso = LawReport(f"canonical comparison {E1.name} -> {E2.name} is a bijection over 1_M")
    iso.record(Phi.is_total() and Phi.is_injective() and len(E1.bundle.E) == len(E2.bundle.E))
    iso.record(X.equal(X.compose(Phi, E2.bundle.q), E1.bundle.q))
    return Phi, [same, iso]


def equivalence_roundtrip(E: GBundle) -> list[LawReport]:
    """build(principal(E), fibre(E)) = E and (principal, fibre)(build(P, F)) = (P, F), canonically.

    Both functors use the orientation E was glued with.
    """
    reps = []
    P = principal_of(E, E.convention)
    F, a = fibre_of(E)
    E2 = build(P, F, a, E.convention)
    _, r1 = canonical_comparison(E2, E)
    reps += r1
    P2 = principal_of(E2, E.convention)
    Phi, r2 = canonical_comparison(P2, P)
    reps += r2
    if Phi is not None:
        X = P.group.model
        rP2, _ = right_action(P2)
        rP, _ = right_action(P)
        eq = LawReport("principal comparison commutes with the right action")
        eq.record(X.equal(X.compose(rP2, Phi), X.compose(X.times(Phi, X.identity(P.group.carrier)), rP)))
        reps.append(eq)
    fib = LawReport("fibre of build(P, F) is F with its action")
    fib.record(E2.F == F and E2.action == a)
    reps.append(fib)
    return reps


def orientation_divergence(E: GBundle, budget: int = 10**6) -> dict:
    """Compare the principal bundles glued with tau_ji and with tau_ij."""
    d = principal_of(E, "def")
    f = principal_of(E, "functor")
    return {
        "same_atlas": conventions_agree(E.gatlas, E.F, E.action).passed,
        "equivariant_iso": equivariant_iso_search(d, f, budget).status,
        "bundle_iso": fibre_iso_search(d, f, budget).status,
    }


# torsors


def torsor_witness(P: GBundle, r: ParMap | None = None) -> tuple[ParMap, list[LawReport]]:
    """d* = join over i of (alpha_i x_M alpha_i) <pi0, pi1, <pi1 iota, pi2> m> (alpha_i* x 1_G)."""
    g = P.group
    X = g.model
    b = P.bundle
    G = g.carrier
    if r is None:
        r, _ = right_action(P)
    PP, _pa, _pc = X.pullback(b.q, b.q)
    PG = product_object(b.E, G)
    shear = ParMap(PG, PP, {(y, h): (y, r((y, h))) for (y, h) in PG.points})
    parts = []
    for i, alpha in enumerate(b.alphas):
        ainv = b.alpha_inv(i)
        table = {}
        for (y, y2) in PP.points:
            if y in alpha.table and y2 in alpha.table:
                (x, h), h2 = alpha(y), alpha(y2)[1]
                # (x, h, h2) -> (x, h, h^-1 h2) -> (alpha_i*(x, h), h^-1 h2)
                table[(y, y2)] = (ainv((x, h)), g.mul(g.inverse(h), h2))
        parts.append(ParMap(PP, PG, table))
    d = X.join(parts, PP, PG)
    left = LawReport("torsor: <pi0, r> d* = bar(<pi0, r>)")
    left.record(X.equal(X.compose(shear, d), X.bar(shear)))
    right = LawReport("torsor: d* <pi0, r> = bar(d*)")
    right.record(X.equal(X.compose(d, shear), X.bar(d)))
    tf = b.totally_fibred()
    total = LawReport("torsor: d* is total exactly when the bundle is totally fibred")
    missing = sorted(set(PP.points) - d.domain, key=repr)
    total.record(d.is_total() == tf, totally_fibred=tf, d_total=d.is_total(), missing=missing[:6], missing_count=len(missing))
    reps = [left, right, total]
    if tf:
        bij = LawReport("torsor: <pi0, r> is a bijection P x G -> P x_M P")
        bij.record(
            shear.is_total() and shear.is_injective() and len(PP) == len(b.E) * len(G),
            pullback=len(PP),
            expected=len(b.E) * len(G),
        )
        reps.append(bij)
    return d, reps


# slices


@dataclass(frozen=True)
class SliceObj:
    obj: FinObj
    f: ParMap

    @property
    def name(self) -> str:
        return self.obj.name


@dataclass(frozen=True)
class SliceMor:
    src: SliceObj
    tgt: SliceObj
    map: ParMap


class SliceModel:
    """Restriction slice over M: objects (A, f: A -> M), maps phi with f >= phi g."""

    def __init__(self, base: FinObj, model: FinSetModel | None = None):
        self.M = base
        self.X = model or FinSetModel()
        self.name = f"finset/{base.name}"

    def obj(self, A: FinObj, f: ParMap) -> SliceObj:
        return SliceObj(A, f)

    def mor(self, src: SliceObj, tgt: SliceObj, phi: ParMap) -> SliceMor:
        if not leq(self.X, self.X.compose(phi, tgt.f), src.f):
            raise ModelError("not a slice morphism: f >= phi g fails", map=phi)
        return SliceMor(src, tgt, phi)

    def source(self, f: SliceMor) -> SliceObj:
        return f.src

    def target(self, f: SliceMor) -> SliceObj:
        return f.tgt

    def identity(self, a: SliceObj) -> SliceMor:
        return SliceMor(a, a, self.X.identity(a.obj))

    def compose(self, f: SliceMor, g: SliceMor) -> SliceMor:
        return self.mor(f.src, g.tgt, self.X.compose(f.map, g.map))

    def bar(self, f: SliceMor) -> SliceMor:
        return SliceMor(f.src, f.src, self.X.bar(f.map))

    def equal(self, f: SliceMor, g: SliceMor) -> bool:
        return f.src == g.src and f.tgt == g.tgt and f.map == g.map

    def show(self, f: SliceMor) -> str:
        return repr(f.map)

    def terminal(self) -> SliceObj:
        return SliceObj(self.M, self.X.identity(self.M))

    def product(self, a: SliceObj, b: SliceObj) -> SliceObj:
        P, pa, _ = self.X.pullback(a.f, b.f)
        return SliceObj(P, self.X.compose(pa, a.f))

    def proj0(self, a: SliceObj, b: SliceObj) -> SliceMor:
        P, pa, _ = self.X.pullback(a.f, b.f)
        return self.mor(SliceObj(P, self.X.compose(pa, a.f)), a, pa)

    def proj1(self, a: SliceObj, b: SliceObj) -> SliceMor:
        P, pa, pc = self.X.pullback(a.f, b.f)
        return self.mor(SliceObj(P, self.X.compose(pa, a.f)), b, pc)

    def pair(self, f: SliceMor, g: SliceMor) -> SliceMor:
        cone = self.X.pullback(f.tgt.f, g.tgt.f)
        m = self.X.pullback_factor(cone, f.map, g.map)
        return self.mor(f.src, self.product(f.tgt, g.tgt), m)

    def times(self, f: SliceMor, g: SliceMor) -> SliceMor:
        p0, p1 = self.proj0(f.src, g.src), self.proj1(f.src, g.src)
        return self.pair(self.compose(p0, f), self.compose(p1, g))

    def bang(self, a: SliceObj) -> SliceMor:
        return self.mor(a, self.terminal(), a.f)

    def assoc(self, a: SliceObj, b: SliceObj, c: SliceObj) -> SliceMor:
        left = self.product(self.product(a, b), c)
        right = self.product(a, self.product(b, c))
        table = {((x, y), z): (x, (y, z)) for ((x, y), z) in left.obj.points}
        return self.mor(left, right, ParMap(left.obj, right.obj, table))

    def nowhere(self, a: SliceObj, b: SliceObj) -> SliceMor:
        return SliceMor(a, b, self.X.nowhere(a.obj, b.obj))


def slice_group(M: FinObj, g: GroupObject) -> tuple[GroupObject, SliceModel, list[LawReport]]:
    """(M x G, pi0) with 1 x m, 1 x u, 1 x iota as a group object in the slice over M."""
    S = SliceModel(M, g.model)
    X = g.model
    G = g.carrier
    MG = product_object(M, G)
    obj = SliceObj(MG, X.proj0(M, G))
    prod = S.product(obj, obj)
    m = S.mor(prod, obj, ParMap(prod.obj, MG, {((x, a), (_x, b)): (x, g.mul(a, b)) for ((x, a), (_x, b)) in prod.obj.points}))
    u = S.mor(S.terminal(), obj, ParMap(M, MG, {x: (x, g.unit) for x in M.points}))
    inv = S.mor(obj, obj, ParMap(MG, MG, {(x, a): (x, g.inverse(a)) for (x, a) in MG.points}))
    sg = GroupObject(S, obj, m, u, inv, f"{g.name} over {M.name}")
    reps = check_group(sg)
    over = LawReport("slice group: structure maps preserve the projection to M")
    over.record(
        X.equal(X.compose(m.map, obj.f), prod.f)
        and X.equal(X.compose(u.map, obj.f), X.identity(M))
        and X.equal(X.compose(inv.map, obj.f), obj.f)
    )
    return sg, S, reps + [over]


# inverse-join utilities


def inverse_join_lemmas(model: FinSetModel, objects: Sequence[FinObj], trials: int = 200, seed: int = 0) -> list[LawReport]:
    """join f_i join g_j >= join f_i g_i; fg >= bar f gives fg = bar f; bar(f) g <= f gives f ~ g."""
    rng = random.Random(seed)
    r1 = LawReport("join f_i . join g_j >= join f_i g_i", regime="random finite data")
    r2 = LawReport("f g >= bar(f) implies f g = bar(f)", regime="random finite data")
    r3 = LawReport("bar(f) g <= f implies f compatible g", regime="random finite data")
    X = model
    for _ in range(trials):
        A, B, C = (rng.choice(objects) for _ in range(3))
        # compatible families with disjoint domains
        n = rng.randint(1, 3)
        fs = _disjoint_family(rng, X, A, B, n)
        gs = _disjoint_family(rng, X, B, C, n)
        lhs = X.compose(X.join(fs, A, B), X.join(gs, B, C))
        diag = X.join_unchecked([X.compose(f, g) for f, g in zip(fs, gs)], A, C)
        try:
            diag = X.join([X.compose(f, g) for f, g in zip(fs, gs)], A, C)
            r1.record(leq(X, diag, lhs), A=A.name, B=B.name, C=C.name)
        except IncompatibleFamily:
            r1.record(False, reason="diagonal family not compatible", family=repr(diag))
        f = random_parmap(rng, A, B, density=rng.random())
        g = _partial_retraction(rng, f) if rng.random() < 0.6 else random_parmap(rng, B, A, density=rng.random())
        fg = X.compose(f, g)
        if leq(X, X.bar(f), fg):
            r2.record(X.equal(fg, X.bar(f)), f=repr(f), g=repr(g))
        h = X.restrict(f, [x for x in A.points if rng.random() < 0.5]) if rng.random() < 0.6 else random_parmap(rng, A, B, density=rng.random())
        if leq(X, X.compose(X.bar(f), h), f):
            r3.record(compatible(X, f, h), f=repr(f), g=repr(h))
    return [r1, r2, r3]


def _disjoint_family(rng: random.Random, X: FinSetModel, A: FinObj, B: FinObj, n: int) -> list[ParMap]:
    labels = {x: rng.randrange(n + 1) for x in A.points}
    out = []
    for k in range(n):
        out.append(ParMap(A, B, {x: rng.choice(B.points) for x in A.points if labels[x] == k}))
    return out


def _partial_retraction(rng: random.Random, f: ParMap) -> ParMap:
    """A map B -> A sending some f(x) back to x."""
    table = {}
    for x, y in f.table.items():
        if rng.random() < 0.8:
            table.setdefault(y, x)
    return ParMap(f.tgt, f.src, table)
