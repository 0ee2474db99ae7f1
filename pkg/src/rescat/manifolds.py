"""Atlases, gluings and fibre bundles in a join restriction category.

The law checkers work over any model; gluing itself is computed in the
finite-set model by a union-find quotient.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .core import LawReport, all_passed, leq
from .errors import IllFormedAtlas, IncompatibleFamily, NonFunctionalRelation, ParseError
from .finset import FinObj, FinSetModel, ParMap, product_object, random_parmap


# atlases


@dataclass
class Atlas:
    """Charts U_i with transitions u_ij: U_i -> U_j."""

    model: Any
    charts: list
    trans: dict = field(default_factory=dict)

    @property
    def index(self) -> range:
        return range(len(self.charts))

    def u(self, i: int, j: int) -> Any:
        got = self.trans.get((i, j))
        return self.model.nowhere(self.charts[i], self.charts[j]) if got is None else got

    def to_json(self) -> dict:
        return {
            "charts": [c.to_json() for c in self.charts],
            "transitions": {f"{i},{j}": self.u(i, j).to_json() for i in self.index for j in self.index},
        }

    @classmethod
    def from_json(cls, data: Mapping, model: Any = None) -> "Atlas":
        model = model or FinSetModel()
        try:
            charts = [FinObj.from_json(c) for c in data["charts"]]
            trans = {}
            for key, rec in data["transitions"].items():
                i, j = (int(t) for t in key.split(","))
                trans[(i, j)] = ParMap.from_json(rec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed atlas record: {exc}") from exc
        return cls(model, charts, trans)


def trivial_atlas(model: Any, obj: Any) -> Atlas:
    """At(1_U): one chart, identity transition."""
    return Atlas(model, [obj], {(0, 0): model.identity(obj)})


def check_atlas(atlas: Atlas) -> LawReport:
    """u_ii u_ij = u_ij, u_ij u_jk <= u_ik, u_ij u_ji = bar(u_ij) over all indices."""
    M = atlas.model
    rep = LawReport("atlas laws", regime="exhaustive over index triples")
    I = list(atlas.index)
    for i, j in itertools.product(I, repeat=2):
        uij = atlas.u(i, j)
        rep.record(M.equal(M.compose(atlas.u(i, i), uij), uij), law="(i) u_ii u_ij = u_ij", i=i, j=j)
        rep.record(
            M.equal(M.compose(uij, atlas.u(j, i)), M.bar(uij)),
            law="(iii) u_ij u_ji = bar(u_ij)",
            i=i,
            j=j,
            left=M.show(M.compose(uij, atlas.u(j, i))),
            right=M.show(M.bar(uij)),
        )
        for k in I:
            rep.record(leq(M, M.compose(uij, atlas.u(j, k)), atlas.u(i, k)), law="(ii) u_ij u_jk <= u_ik", i=i, j=j, k=k)
    return rep


@dataclass
class AtlasMorphism:
    """Components A_ik: U_i -> V_k between two atlases."""

    source: Atlas
    target: Atlas
    comps: dict

    def A(self, i: int, k: int) -> Any:
        got = self.comps.get((i, k))
        M = self.source.model
        return M.nowhere(self.source.charts[i], self.target.charts[k]) if got is None else got


def check_atlas_morphism(f: AtlasMorphism) -> list[LawReport]:
    """The five atlas-morphism conditions, plus a cross-report that (v) implies (iv)."""
    M = f.source.model
    u, v = f.source.u, f.target.u
    names = [
        "(i) u_ii A_ik = A_ik",
        "(ii) A_ik v_kk = A_ik",
        "(iii) u_ij A_jk <= A_ik",
        "(iv) A_ik v_kl <= A_il",
        "(v) A_ik v_kl = bar(A_ik) A_il",
    ]
    reps = {n: LawReport(f"atlas morphism {n}") for n in names}
    cross = LawReport("atlas morphism: (v) implies (iv)")
    I, K = list(f.source.index), list(f.target.index)
    for i, k in itertools.product(I, K):
        Aik = f.A(i, k)
        reps[names[0]].record(M.equal(M.compose(u(i, i), Aik), Aik), i=i, k=k)
        reps[names[1]].record(M.equal(M.compose(Aik, v(k, k)), Aik), i=i, k=k)
        for j in I:
            reps[names[2]].record(leq(M, M.compose(u(i, j), f.A(j, k)), Aik), i=i, j=j, k=k)
        for l in K:
            lhs = M.compose(Aik, v(k, l))
            iv = leq(M, lhs, f.A(i, l))
            vv = M.equal(lhs, M.compose(M.bar(Aik), f.A(i, l)))
            reps[names[3]].record(iv, i=i, k=k, l=l)
            reps[names[4]].record(vv, i=i, k=k, l=l)
            cross.record(iv or not vv, i=i, k=k, l=l)
    return [*reps.values(), cross]


# gluing in finite sets


class _UnionFind:
    def __init__(self, order: Mapping[Any, int]):
        self.parent = {x: x for x in order}
        self.order = order

    def find(self, x: Any) -> Any:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Any, b: Any) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # the least element stays the root, so roots are the canonical representatives
        if self.order[rb] < self.order[ra]:
            ra, rb = rb, ra
        self.parent[rb] = ra


@dataclass
class Gluing:
    """Glued object G with charts g_i: U_i -> G and partial inverses g_i*: G -> U_i."""

    atlas: Atlas
    obj: FinObj
    charts: list
    inverses: list
    classes: dict
    reports: list = field(default_factory=list)

    def induced(self, family: Sequence[ParMap]) -> ParMap:
        """The map G -> X induced by an atlas morphism f_i: U_i -> X, as the join of g_i* f_i."""
        M = self.atlas.model
        return M.join([M.compose(self.inverses[i], f) for i, f in enumerate(family)], self.obj, family[0].tgt)


def glue(atlas: Atlas, probes: Sequence[tuple[str, Sequence[ParMap]]] | None = None, seed: int = 0) -> Gluing:
    """Quotient of the disjoint union of chart domains by (i, x) ~ (j, u_ij(x))."""
    laws = check_atlas(atlas)
    if not laws.passed:
        raise IllFormedAtlas("atlas laws fail", counterexamples=laws.counterexamples)
    elements = []
    for i, U in enumerate(atlas.charts):
        dom = atlas.u(i, i).domain
        elements += [(i, x) for x in U.points if x in dom]
    order = {e: n for n, e in enumerate(elements)}
    uf = _UnionFind(order)
    for i, j in itertools.product(atlas.index, repeat=2):
        for x, y in atlas.u(i, j).table.items():
            uf.union((i, x), (j, y))
    classes: dict = {}
    for e in elements:
        classes.setdefault(uf.find(e), []).append(e)
    for rep, members in classes.items():
        charts_hit = [i for i, _ in members]
        if len(charts_hit) != len(set(charts_hit)):
            raise NonFunctionalRelation("two points of one chart were identified", cls=rep, members=members)
    reps = sorted(classes, key=order.__getitem__)
    edges = set()
    for rep in reps:
        for i, x in classes[rep]:
            for y in atlas.charts[i].neighbours(x):
                if (i, y) in order:
                    other = uf.find((i, y))
                    if other != rep:
                        edges.add(frozenset((rep, other)))
    name = "glue(" + ",".join(U.name for U in atlas.charts) + ")"
    G = FinObj(name, reps, [tuple(e) for e in edges])
    charts, inverses = [], []
    for i, U in enumerate(atlas.charts):
        table = {x: uf.find((i, x)) for x in U.points if (i, x) in order}
        g = ParMap(U, G, table)
        charts.append(g)
        inverses.append(ParMap(G, U, {c: x for x, c in table.items()}))
    gl = Gluing(atlas, G, charts, inverses, classes)
    gl.reports = check_gluing(gl) + check_universal_property(gl, probes, seed)
    return gl


def check_gluing(gl: Gluing) -> list[LawReport]:
    """The explicit gluing identities."""
    M = gl.atlas.model
    iso = LawReport("gluing: g_i are partial isomorphisms")
    r1 = LawReport("gluing (i): u_ij g_j <= g_i")
    r2 = LawReport("gluing (ii): u_ij = g_i g_j*")
    r3 = LawReport("gluing (iii): join of g_i* g_i = 1_G")
    for i, g in enumerate(gl.charts):
        gi = gl.inverses[i]
        iso.record(M.equal(M.compose(g, gi), M.bar(g)) and M.equal(M.compose(gi, g), M.bar(gi)), i=i)
        for j in gl.atlas.index:
            uij = gl.atlas.u(i, j)
            r1.record(leq(M, M.compose(uij, gl.charts[j]), g), i=i, j=j)
            r2.record(M.equal(uij, M.compose(g, gl.inverses[j])), i=i, j=j)
    whole = M.join([M.compose(gl.inverses[i], g) for i, g in enumerate(gl.charts)], gl.obj, gl.obj)
    r3.record(M.equal(whole, M.identity(gl.obj)), missing=sorted(set(gl.obj.points) - whole.domain, key=repr))
    return [iso, r1, r2, r3]


def default_probes(gl: Gluing, seed: int = 0) -> list[tuple[str, list[ParMap]]]:
    """Atlas morphisms into At(1_X) used to certify the universal property."""
    M = gl.atlas.model
    rng = random.Random(seed)
    X = FinObj("X", ["x0", "x1", "x2"])
    probes = [
        ("charts into the gluing", list(gl.charts)),
        ("collapse to a point", [M.compose(M.bar(gl.atlas.u(i, i)), M.bang(U)) for i, U in enumerate(gl.atlas.charts)]),
    ]
    for n in range(3):
        h = random_parmap(rng, gl.obj, X, density=1.0)
        probes.append((f"random total map G->X #{n}", [M.compose(g, h) for g in gl.charts]))
        half = M.restrict(h, [c for c in gl.obj.points if rng.random() < 0.5])
        probes.append((f"restricted random map G->X #{n}", [M.compose(g, half) for g in gl.charts]))
    return probes


def check_universal_property(gl: Gluing, probes: Sequence[tuple[str, Sequence[ParMap]]] | None = None, seed: int = 0) -> list[LawReport]:
    """For each probe f: g_i f_check = f_i, f_check is the only such map, and f <= f' gives f_check <= f'_check."""
    M = gl.atlas.model
    probes = default_probes(gl, seed) if probes is None else list(probes)
    is_morph = LawReport("universal property: probes are atlas morphisms into At(1_X)", regime="finite probe family")
    fact = LawReport("universal property: g_i f_check = f_i", regime="finite probe family")
    uniq = LawReport("universal property: uniqueness of f_check", regime="finite probe family")
    mono = LawReport("universal property: f <= f' implies f_check <= f'_check", regime="finite probe family")
    induced = []
    for name, fam in probes:
        X = fam[0].tgt
        target = trivial_atlas(M, X)
        ok = all_passed(check_atlas_morphism(AtlasMorphism(gl.atlas, target, {(i, 0): f for i, f in enumerate(fam)})))
        is_morph.record(ok, probe=name)
        fc = gl.induced(fam)
        induced.append((name, fam, fc))
        fact.record(all(M.equal(M.compose(g, fc), fam[i]) for i, g in enumerate(gl.charts)), probe=name)
        # any h with g_i h = f_i equals (join g_i* g_i) h = join g_i* f_i = f_check
        for i, g in enumerate(gl.charts):
            covered = M.compose(gl.inverses[i], g)
            uniq.record(M.equal(M.compose(covered, fc), M.compose(gl.inverses[i], fam[i])), probe=name, i=i)
    for (n1, f1, c1), (n2, f2, c2) in itertools.permutations(induced, 2):
        if f1[0].tgt != f2[0].tgt:
            continue
        if all(leq(M, a, b) for a, b in zip(f1, f2)):
            mono.record(leq(M, c1, c2), smaller=n1, larger=n2)
    names = ", ".join(n for n, _ in probes)
    for r in (is_morph, fact, uniq, mono):
        r.note(f"probes: {names}")
    return [is_morph, fact, uniq, mono]


def gluing_atlas(gl: Gluing) -> Atlas:
    """The atlas u_ij = g_i g_j* recovered from the charts of a gluing."""
    M = gl.atlas.model
    trans = {(i, j): M.compose(gl.charts[i], gl.inverses[j]) for i in gl.atlas.index for j in gl.atlas.index}
    return Atlas(M, list(gl.atlas.charts), trans)


def glue_idempotence(gl: Gluing) -> LawReport:
    """Gluing the atlas of a gluing gives an isomorphic object with matching charts."""
    M = gl.atlas.model
    rep = LawReport("gluing the atlas of a gluing is canonically isomorphic")
    again = glue(gluing_atlas(gl))
    comp = M.join([M.compose(gl.inverses[i], g) for i, g in enumerate(again.charts)], gl.obj, again.obj)
    rep.record(comp.is_total() and comp.is_injective() and len(gl.obj) == len(again.obj), stage="comparison is a bijection")
    rep.record(all(M.equal(M.compose(g, comp), again.charts[i]) for i, g in enumerate(gl.charts)), stage="charts match")
    return rep


# fibre bundles


@dataclass
class FibreBundle:
    """Total space E, projection q: E -> M, trivializations alpha_i: E -> M x F, base idempotents e_i."""

    model: Any
    E: FinObj
    M: FinObj
    F: FinObj
    q: ParMap
    alphas: list
    e: list
    name: str = "bundle"

    @property
    def MF(self) -> FinObj:
        return product_object(self.M, self.F)

    def alpha_inv(self, i: int) -> ParMap:
        inv = self.model.partial_inverse_candidate(self.alphas[i])
        if inv is None:
            raise IllFormedAtlas("trivialization is not injective", chart=i)
        return inv

    def totally_fibred(self) -> bool:
        X = self.model
        return all(X.equal(X.bar(a), X.bar(X.compose(self.q, self.e[i]))) for i, a in enumerate(self.alphas))

    def check(self) -> list[LawReport]:
        X = self.model
        tot = LawReport("bundle: q is total")
        tot.record(self.q.is_total())
        piso = LawReport("bundle: alpha_i are partial isomorphisms")
        square = LawReport("bundle: alpha_i pi0 = bar(alpha_i) q")
        ei = LawReport("bundle: bar(alpha_i*) = e_i x 1_F")
        pi0 = X.proj0(self.M, self.F)
        for i, a in enumerate(self.alphas):
            ok = a.is_injective()
            piso.record(ok, i=i)
            square.record(X.equal(X.compose(a, pi0), X.compose(X.bar(a), self.q)), i=i)
            if ok:
                ei.record(X.equal(X.bar(self.alpha_inv(i)), X.times(self.e[i], X.identity(self.F))), i=i)
        cover = LawReport("bundle: join of bar(alpha_i) = 1_E")
        cover.record(X.equal(X.join([X.bar(a) for a in self.alphas], self.E, self.E), X.identity(self.E)))
        return [tot, piso, square, ei, cover]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "E": self.E.to_json(),
            "M": self.M.to_json(),
            "F": self.F.to_json(),
            "q": self.q.to_json(),
            "charts": [a.to_json() for a in self.alphas],
            "e": [sorted_points(x) for x in self.e],
        }

    @classmethod
    def from_json(cls, data: Mapping, model: Any = None) -> "FibreBundle":
        from .finset import from_jsonable

        model = model or FinSetModel()
        try:
            M = FinObj.from_json(data["M"])
            b = cls(
                model,
                FinObj.from_json(data["E"]),
                M,
                FinObj.from_json(data["F"]),
                ParMap.from_json(data["q"]),
                [ParMap.from_json(a) for a in data["charts"]],
                [model.idempotent(M, [from_jsonable(x) for x in pts]) for pts in data["e"]],
                data.get("name", "bundle"),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed bundle record: {exc}") from exc
        return b


def sorted_points(idem: ParMap) -> list:
    from .finset import to_jsonable

    return [to_jsonable(x) for x in idem.src.points if x in idem.table]


def bundle_to_atlas(b: FibreBundle) -> tuple[Atlas, list[LawReport]]:
    """The bundle atlas u_ij = alpha_i* alpha_j on M x F."""
    X = b.model
    checks = b.check()
    if not all_passed(checks):
        raise IllFormedAtlas("bundle checks fail", failed=[r.law for r in checks if not r.passed])
    MF = b.MF
    trans = {}
    for i, j in itertools.product(range(len(b.alphas)), repeat=2):
        trans[(i, j)] = X.compose(b.alpha_inv(i), b.alphas[j])
    atlas = Atlas(X, [MF] * len(b.alphas), trans)
    return atlas, checks + [check_atlas(atlas)] + check_bundle_atlas(atlas, b.M, b.F, b.e)


def check_bundle_atlas(atlas: Atlas, M: FinObj, F: FinObj, e: Sequence[ParMap] | None = None) -> list[LawReport]:
    """u_ij = <pi0, u_ij pi1> (base preserving) and u_ii = e_i x 1_F."""
    X = atlas.model
    pi0, pi1 = X.proj0(M, F), X.proj1(M, F)
    base = LawReport("bundle atlas: u_ij = <pi0, u_ij pi1>")
    diag = LawReport("bundle atlas: u_ii = e_i x 1_F")
    for i, j in itertools.product(atlas.index, repeat=2):
        uij = atlas.u(i, j)
        base.record(X.equal(uij, X.pair(pi0, X.compose(uij, pi1))), i=i, j=j)
    es = list(e) if e is not None else [base_idempotent(atlas, i, M) for i in atlas.index]
    for i in atlas.index:
        diag.record(X.equal(atlas.u(i, i), X.times(es[i], X.identity(F))), i=i)
    return [base, diag]


def base_idempotent(atlas: Atlas, i: int, M: FinObj) -> ParMap:
    """e_i read off from the domain of u_ii."""
    return atlas.model.idempotent(M, {m for (m, _f) in atlas.u(i, i).domain})


def atlas_to_bundle(atlas: Atlas, M: FinObj, F: FinObj, name: str = "glued bundle") -> tuple[FibreBundle, Gluing, list[LawReport]]:
    """Glue a bundle atlas; alpha_i are the partial inverses of the gluing charts."""
    X = atlas.model
    shape = check_bundle_atlas(atlas, M, F)
    if not all_passed(shape):
        raise IllFormedAtlas("not a bundle atlas", failed=[r.law for r in shape if not r.passed])
    gl = glue(atlas)
    E = gl.obj
    alphas = list(gl.inverses)
    pi0 = X.proj0(M, F)
    try:
        q = X.join([X.compose(a, pi0) for a in alphas], E, M)
    except IncompatibleFamily as exc:
        raise IllFormedAtlas("projections of the charts disagree", detail=exc.to_dict()) from exc
    induced_q = gl.induced([X.compose(X.bar(atlas.u(i, i)), pi0) for i in atlas.index])
    e = [base_idempotent(atlas, i, M) for i in atlas.index]
    b = FibreBundle(X, E, M, F, q, alphas, e, name)
    rederive = LawReport("atlas to bundle: u_ij = alpha_i* alpha_j re-derived")
    for i, j in itertools.product(atlas.index, repeat=2):
        rederive.record(X.equal(atlas.u(i, j), X.compose(b.alpha_inv(i), alphas[j])), i=i, j=j)
    qrep = LawReport("atlas to bundle: q = join alpha_i pi0 is total and universal")
    qrep.record(q.is_total() and X.equal(q, induced_q))
    return b, gl, shape + gl.reports + b.check() + [rederive, qrep]


def induced_bundle_map(b1: FibreBundle, b2: FibreBundle, A: Mapping[tuple[int, int], ParMap]) -> ParMap:
    """Phi = join over (i, k) of alpha_i A_ik alpha'_k*, the map with alpha_i* Phi = A_ik alpha'_k*."""
    X = b1.model
    parts = []
    for (i, k), Aik in sorted(A.items()):
        parts.append(X.compose(X.compose(b1.alphas[i], Aik), b2.alpha_inv(k)))
    return X.join(parts, b1.E, b2.E)


def check_bundle_map(b1: FibreBundle, b2: FibreBundle, Phi: ParMap, phi: ParMap, A: Mapping | None = None) -> list[LawReport]:
    """Phi q' = q phi, and the chart components A_ik = alpha_i* Phi alpha'_k."""
    X = b1.model
    comm = LawReport("bundle map: Phi q' = q phi")
    comm.record(X.equal(X.compose(Phi, b2.q), X.compose(b1.q, phi)))
    reps = [comm]
    if A is not None:
        comp = LawReport("bundle map: A_ik = alpha_i* Phi alpha'_k")
        for i, k in itertools.product(range(len(b1.alphas)), range(len(b2.alphas))):
            got = X.compose(X.compose(b1.alpha_inv(i), Phi), b2.alphas[k])
            want = A.get((i, k), X.nowhere(b1.MF, b2.MF))
            comp.record(X.equal(got, want), i=i, k=k)
        reps.append(comp)
    return reps


def classify_roundtrip(b: FibreBundle) -> tuple[list[LawReport], ParMap]:
    """Bundle -> atlas -> glued bundle, compared by the canonical chart-induced map."""
    X = b.model
    atlas, reps = bundle_to_atlas(b)
    b2, _gl, reps2 = atlas_to_bundle(atlas, b.M, b.F, name=b.name + " (reglued)")
    A = {(i, k): atlas.u(i, k) for i in atlas.index for k in atlas.index}
    Phi = induced_bundle_map(b, b2, A)
    iso = LawReport("classification: canonical comparison is a total bijection over 1_M")
    iso.record(Phi.is_total() and Phi.is_injective() and len(b.E) == len(b2.E), size=len(b.E))
    charts = LawReport("classification: Phi alpha'_i = alpha_i")
    for i in atlas.index:
        charts.record(X.equal(X.compose(Phi, b2.alphas[i]), b.alphas[i]), i=i)
    back = induced_bundle_map(b2, b, A)
    inv = LawReport("classification: comparison maps are mutually inverse")
    inv.record(X.equal(X.compose(Phi, back), X.identity(b.E)) and X.equal(X.compose(back, Phi), X.identity(b2.E)))
    morph = check_bundle_map(b, b2, Phi, X.identity(b.M), A)
    return reps + reps2 + [iso, charts, inv] + morph, Phi


def compare_presentations(b1: FibreBundle, b2: FibreBundle) -> tuple[list[LawReport], ParMap]:
    """Two trivializations of one total space: the atlas morphism A_ik = alpha_i* alpha'_k induces an iso of gluings."""
    X = b1.model
    a1, _ = bundle_to_atlas(b1)
    a2, _ = bundle_to_atlas(b2)
    A = {}
    for i, k in itertools.product(a1.index, a2.index):
        A[(i, k)] = X.compose(b1.alpha_inv(i), b2.alphas[k])
    am = AtlasMorphism(a1, a2, A)
    reps = check_atlas_morphism(am)
    g1, _, _ = atlas_to_bundle(a1, b1.M, b1.F)
    g2, _, _ = atlas_to_bundle(a2, b2.M, b2.F)
    Phi = induced_bundle_map(g1, g2, A)
    iso = LawReport("presentations: induced map of gluings is a total bijection")
    iso.record(Phi.is_total() and Phi.is_injective() and len(g1.E) == len(g2.E), charts=(len(a1.charts), len(a2.charts)))
    return reps + [iso] + check_bundle_map(g1, g2, Phi, X.identity(b1.M), A), Phi


def product_bundle(model: FinSetModel, M: FinObj, F: FinObj, charts: Sequence[Sequence[Any]] | None = None, name: str = "product") -> FibreBundle:
    """E = M x F with charts restricted to the given base subsets (default: one global chart)."""
    E = product_object(M, F)
    subsets = [list(M.points)] if charts is None else [list(c) for c in charts]
    alphas = [model.restrict(model.identity(E), [(m, f) for m in s for f in F.points]) for s in subsets]
    q = model.proj0(M, F)
    e = [model.idempotent(M, s) for s in subsets]
    return FibreBundle(model, E, M, F, q, alphas, e, name)
