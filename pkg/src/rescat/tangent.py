"""Checks of the tangent-category axioms in the polynomial model.

Every law is decided twice: by jet equality (an exact decision over all
points) and by direct evaluation of both sides on the carrier, exhaustively
when it is small enough and on a seeded sample otherwise.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

import numpy as np

from .core import LawReport, compatible, join, leq
from .poly import (
    Domain,
    PiecewisePolyMap,
    PolyModel,
    all_points,
    encode,
    pointwise_witness,
    points_for,
    rank_mod,
)

EXHAUSTIVE_LIMIT = 400_000
SAMPLES = 4_000


class LawRecorder:
    """Collects equality checks into one report per law name."""

    def __init__(self, model: PolyModel, rng: np.random.Generator, limit: int = EXHAUSTIVE_LIMIT, samples: int = SAMPLES):
        self.model = model
        self.rng = rng
        self.limit = limit
        self.samples = samples
        self.reports: dict[str, LawReport] = {}

    def report(self, law: str) -> LawReport:
        if law not in self.reports:
            self.reports[law] = LawReport(law, regime="exact jets + exhaustive evaluation")
        return self.reports[law]

    def equal(self, law: str, lhs: PiecewisePolyMap, rhs: PiecewisePolyMap, depth: int | None = None, **ctx) -> bool:
        rep = self.report(law)
        witness = self.model.jet_witness(lhs, rhs, depth)
        if witness is None:
            X, regime = points_for(self.model.p, lhs.src, self.limit, self.rng, self.samples)
            if regime == "sampled":
                rep.regime = f"exact jets + sampled evaluation ({self.samples} points)"
            witness = pointwise_witness(lhs, rhs, X)
        return rep.record(witness is None, witness=witness, **ctx)

    def truth(self, law: str, ok: bool, regime: str = "exhaustive", **ctx) -> bool:
        rep = self.reports.get(law)
        if rep is None:
            rep = self.reports[law] = LawReport(law, regime=regime)
        elif regime not in rep.regime.split(" / "):
            rep.regime += " / " + regime
        return rep.record(ok, **ctx)

    def result(self) -> list[LawReport]:
        return list(self.reports.values())


def naturality_sample(model: PolyModel) -> list[PiecewisePolyMap]:
    """Global, partial and piecewise maps between arities 1 and 2."""
    p = model.p
    M = model
    out = [
        M.poly_map(1, lambda x: [x ** 2]),
        M.poly_map(1, lambda x: [x ** p]),
        M.poly_map(1, lambda x: [3 * x ** 3 + x + 2]),
        M.poly_map(1, lambda x: [x, x ** 2]),
        M.poly_map(2, lambda x, y: [x * y]),
        M.poly_map(2, lambda x, y: [x * y, x + y ** 3]),
        M.poly_map(2, lambda x, y: [y, x]),
        M.restrict(M.poly_map(2, lambda x, y: [x ** 2 + y ** 3]), Domain.box(p, 2, {0: [0, 1]})),
        M.restrict(M.poly_map(2, lambda x, y: [x + y ** 2, y]), Domain.box(p, 2, {1: [1, 2, p - 2]})),
        M.join_unchecked(
            [
                M.restrict(M.poly_map(1, lambda x: [x ** 2]), Domain.box(p, 1, {0: [0, 1]})),
                M.restrict(M.poly_map(1, lambda x: [2 * x + 1]), Domain.box(p, 1, {0: [v for v in (2, 3) if v < p]})),
            ],
            1,
            1,
        ),
    ]
    return out


def check_tangent_axioms(
    model: PolyModel,
    arities: Iterable[int] = (1, 2),
    sample: Sequence[PiecewisePolyMap] | None = None,
    seed: int = 0,
) -> list[LawReport]:
    """All tangent-structure laws for the given base arities."""
    rng = np.random.default_rng(seed)
    rec = LawRecorder(model, rng)
    M = model
    T = M.tangent
    sample = list(naturality_sample(model) if sample is None else sample)
    arities = list(arities)
    for n in arities:
        p_, z, plus, l, c = M.t_proj(n), M.t_zero(n), M.t_plus(n), M.t_lift(n), M.t_flip(n)
        pi = [M.tk_proj(n, 2, i) for i in range(2)]
        pi3 = [M.tk_proj(n, 3, i) for i in range(3)]
        tp = T(p_)
        ctx = {"n": n}
        # additive bundle
        rec.equal("bundle: 0 p = 1", M.compose(z, p_), M.identity(n), **ctx)
        rec.equal("bundle: + p = pi0 p", M.compose(plus, p_), M.compose(pi[0], p_), **ctx)
        rec.equal("bundle: + p = pi1 p", M.compose(plus, p_), M.compose(pi[1], p_), **ctx)
        left = M.compose(M.tk_pair([M.compose(M.tk_pair([pi3[0], pi3[1]], n), plus), pi3[2]], n), plus)
        right = M.compose(M.tk_pair([pi3[0], M.compose(M.tk_pair([pi3[1], pi3[2]], n), plus)], n), plus)
        rec.equal("bundle: + is associative", left, right, **ctx)
        rec.equal("bundle: + is commutative", M.compose(M.tk_pair([pi[1], pi[0]], n), plus), plus, **ctx)
        rec.equal("bundle: 0 is a unit for +", M.compose(M.tk_pair([M.identity(2 * n), M.compose(p_, z)], n), plus), M.identity(2 * n), **ctx)
        # vertical lift
        rec.equal("lift: l T(p) = p 0", M.compose(l, tp), M.compose(p_, z), **ctx)
        rec.equal("lift: l p_T = p 0", M.compose(l, M.t_proj(2 * n)), M.compose(p_, z), **ctx)
        rec.equal("lift: 0 l = 0 T(0)", M.compose(z, l), M.compose(z, T(z)), **ctx)
        lhs = M.compose(plus, l)
        rhs = M.compose(M.tt2_pair(M.compose(pi[0], l), M.compose(pi[1], l), n), T(plus))
        rec.equal("lift: + l = (l x l) T(+)", lhs, rhs, **ctx)
        # canonical flip
        rec.equal("flip: c p_T = T(p)", M.compose(c, M.t_proj(2 * n)), tp, **ctx)
        rec.equal("flip: T(0) c = 0_T", M.compose(T(z), c), M.t_zero(2 * n), **ctx)
        tpi = [T(q) for q in pi]
        lhs = M.compose(T(plus), c)
        rhs = M.compose(M.tk_pair([M.compose(tpi[0], c), M.compose(tpi[1], c)], 2 * n), M.t_plus(2 * n))
        rec.equal("flip: T(+) c = (c x c) +_T", lhs, rhs, **ctx)
        rec.equal("flip: c c = 1", M.compose(c, c), M.identity(4 * n), **ctx)
        rec.equal("flip: l c = l", M.compose(l, c), l, **ctx)
        # coherence
        lT, cT, Tl, Tc = M.t_lift(2 * n), M.t_flip(2 * n), T(l), T(c)
        rec.equal("coherence: l l_T = l T(l)", M.compose(l, lT), M.compose(l, Tl), **ctx)
        rec.equal(
            "coherence: c_T T(c) c_T = T(c) c_T T(c)",
            M.compose(M.compose(cT, Tc), cT),
            M.compose(M.compose(Tc, cT), Tc),
            **ctx,
        )
        rec.equal("coherence: l_T T(c) c_T = c T(l)", M.compose(M.compose(lT, Tc), cT), M.compose(c, Tl), **ctx)
        # functor and restriction
        rec.equal("functor: T(1) = 1", T(M.identity(n)), M.identity(2 * n), **ctx)
        for f in (g for g in sample if g.src == n):
            fctx = {"n": n, "f": repr(f)}
            m = f.tgt
            Tf, TTf = T(f), T(T(f))
            rec.equal("naturality of p", M.compose(Tf, M.t_proj(m)), M.compose(p_, f), **fctx)
            rec.equal("naturality of 0", M.compose(f, M.t_zero(m)), M.compose(z, Tf), **fctx)
            T2f = M.tk_pair([M.compose(pi[0], Tf), M.compose(pi[1], Tf)], m)
            rec.equal("naturality of +", M.compose(T2f, M.t_plus(m)), M.compose(plus, Tf), **fctx)
            rec.equal("naturality of l", M.compose(Tf, M.t_lift(m)), M.compose(l, TTf), **fctx)
            rec.equal("naturality of c", M.compose(TTf, M.t_flip(m)), M.compose(c, TTf), **fctx)
            rec.equal("restriction: T(bar f) = bar T(f)", T(M.bar(f)), M.bar(Tf), **fctx)
            for g in (h for h in sample if h.src == f.tgt):
                rec.equal(
                    "functor: T(f g) = T(f) T(g)",
                    T(M.compose(f, g)),
                    M.compose(Tf, T(g)),
                    depth=max(model.depth - 1, 0),
                    f=repr(f),
                    g=repr(g),
                )
        for f, g in itertools.combinations([h for h in sample if h.src == n], 2):
            rec.equal(
                "cartesian: T<f, g> = <T(f), T(g)> shuffle",
                T(M.pair(f, g)),
                M.t_pair([T(f), T(g)]),
                f=repr(f),
                g=repr(g),
            )
        for ns in ([n, 1], [n, n], [1, n, 2]):
            sh, un = M.shuffle(ns), M.unshuffle(ns)
            rec.equal("cartesian: shuffle and unshuffle are inverse", M.compose(sh, un), M.identity(sh.src), ns=ns)
            rec.equal("cartesian: shuffle and unshuffle are inverse", M.compose(un, sh), M.identity(sh.src), ns=ns)
        _check_module_formulas(rec, model, n)
        _check_pullback_powers(rec, model, n)
        _check_universality(rec, model, n)
        _check_equalizer(rec, model, n)
    return rec.result()


def _base_equal_mask(rows: Sequence[np.ndarray]) -> np.ndarray:
    ok = np.ones(rows[0].shape[0], dtype=bool)
    for r in rows[1:]:
        ok &= np.all(r == rows[0], axis=1)
    return ok


def _check_pullback_powers(rec: LawRecorder, model: PolyModel, n: int) -> None:
    """T_kM is the k-fold pullback of p, and T, T^2 preserve it (k <= 2)."""
    p = model.p
    for m in (0, 1, 2):
        base = model.tangent_power(model.t_proj(n), m)
        law = "T_kM is the k-fold pullback of p" if m == 0 else f"T^{m} preserves the pullback T_kM"
        for k in (1, 2):
            legs = [model.tangent_power(model.tk_proj(n, k, i), m) for i in range(k)]
            src = legs[0].src
            if p ** src <= rec.limit and p ** base.src <= rec.limit:
                rec.truth(law, _exhaustive_pullback(model, legs, base), regime="exhaustive", n=n, k=k)
            else:
                rec.truth(law, _linear_pullback_certificate(model, legs, base), regime="linear certificate", n=n, k=k)
                rec.report(law).note(f"n={n}, k={k}: carrier F_{p}^{src} decided by an exact rank certificate")


def _exhaustive_pullback(model: PolyModel, legs: Sequence[PiecewisePolyMap], base: PiecewisePolyMap) -> bool:
    """The induced map into the set-theoretic k-fold pullback of ``base`` is a bijection."""
    p = model.p
    X = all_points(p, legs[0].src)
    ims = [leg.eval_batch(X)[0] for leg in legs]
    bases = [base.eval_batch(im)[0] for im in ims]
    lands = bool(_base_equal_mask(bases).all())
    codes = [encode(im, p) for im in ims]
    joint = np.zeros(X.shape[0], dtype=object)
    for c in codes:
        joint = joint * (p ** legs[0].tgt) + c.astype(object)
    injective = len(set(joint.tolist())) == X.shape[0]
    # |pullback| = sum over base points b of |fibre(b)|^k
    fibre_sizes = np.unique(encode(base.eval_batch(all_points(p, base.src))[0], p), return_counts=True)[1]
    size = int(np.sum(fibre_sizes.astype(object) ** len(legs)))
    return lands and injective and size == X.shape[0]


def _linear_pullback_certificate(model: PolyModel, legs: Sequence[PiecewisePolyMap], tp: PiecewisePolyMap) -> bool:
    """Exact bijection test for linear comparison maps onto a linear pullback."""
    p = model.p
    mats = [leg.single_body().linear_part() for leg in legs]
    base = tp.single_body().linear_part()
    if any(m is None for m in mats) or base is None:
        return False
    comp = np.concatenate(mats, axis=0)  # comparison map matrix
    src_dim = comp.shape[1]
    tgt_dim = comp.shape[0]
    # pullback = kernel of the constraints base(t_0) - base(t_i) = 0
    width = mats[0].shape[0]
    cons = []
    for i in range(1, len(mats)):
        row = np.zeros((base.shape[0], tgt_dim), dtype=np.int64)
        row[:, :width] = base
        row[:, i * width:(i + 1) * width] = -base
        cons.append(row)
    E = np.concatenate(cons, axis=0) % p if cons else np.zeros((0, tgt_dim), dtype=np.int64)
    lands = not np.any((E @ comp) % p) if cons else True
    injective = rank_mod(comp, p) == src_dim
    pullback_dim = tgt_dim - (rank_mod(E, p) if cons else 0)
    return bool(lands and injective and pullback_dim == src_dim)


def universal_lift_map(model: PolyModel, n: int) -> PiecewisePolyMap:
    """<pi0 l, pi1 0_T> T(+): T_2M -> T^2M."""
    pi = [model.tk_proj(n, 2, i) for i in range(2)]
    a = model.compose(pi[0], model.t_lift(n))
    b = model.compose(pi[1], model.t_zero(2 * n))
    return model.compose(model.tt2_pair(a, b, n), model.tangent(model.t_plus(n)))


def _check_universality(rec: LawRecorder, model: PolyModel, n: int) -> None:
    """The square (v, pi0 p; T(p), 0) is a pullback, by enumeration of M x T^2M."""
    p = model.p
    v = universal_lift_map(model, n)
    tp = model.tangent(model.t_proj(n))
    TT = all_points(p, 4 * n)
    base = tp.eval_batch(TT)[0]
    pull = []
    for a in all_points(p, n):
        zero_a = np.concatenate([a, np.zeros(n, dtype=np.int64)])
        hit = np.all(base == zero_a, axis=1)
        for row in TT[hit]:
            pull.append(tuple(a.tolist()) + tuple(row.tolist()))
    pull_set = set(pull)
    dom = all_points(p, 3 * n)
    vv = v.eval_batch(dom)[0]
    xs = dom[:, :n]
    induced = {tuple(x) + tuple(y) for x, y in zip(xs.tolist(), vv.tolist())}
    ok = induced == pull_set and len(induced) == dom.shape[0]
    square = model.jet_witness(model.compose(v, tp), model.compose(model.compose(model.tk_proj(n, 2, 0), model.t_proj(n)), model.t_zero(n))) is None
    rec.truth("universality of the vertical lift (pullback)", ok and square, n=n, pullback_size=len(pull_set))


def _check_equalizer(rec: LawRecorder, model: PolyModel, n: int) -> None:
    """On T^2M: f T(p) = f T(p) p 0 holds exactly where the v-coordinate vanishes."""
    p = model.p
    tp = model.tangent(model.t_proj(n))
    X = all_points(p, 4 * n)
    a = tp.eval_batch(X)[0]
    b = model.compose(model.compose(tp, model.t_proj(n)), model.t_zero(n)).eval_batch(X)[0]
    holds = np.all(a == b, axis=1)
    middle_zero = np.all(X[:, 2 * n:3 * n] == 0, axis=1)
    rec.truth("equalizer of T(p) and T(p) p 0 is {v = 0}", bool(np.array_equal(holds, middle_zero)), n=n)


def join_families(model: PolyModel) -> list[list[PiecewisePolyMap]]:
    """Compatible families used by the join laws and the join/T checks."""
    p = model.p
    M = model
    sq = M.poly_map(1, lambda x: [x ** 2])
    cube = M.poly_map(2, lambda x, y: [x * y + y ** 3, x])
    lin = M.poly_map(1, lambda x: [2 * x + 1])
    return [
        [M.restrict(sq, Domain.box(p, 1, {0: [0, 1, 2]})), M.restrict(sq, Domain.box(p, 1, {0: range(2, p)}))],
        [M.restrict(sq, Domain.box(p, 1, {0: [0]})), M.restrict(lin, Domain.box(p, 1, {0: [p - 2, p - 1]}))],
        [M.restrict(cube, Domain.box(p, 2, {0: [0, 1]})), M.restrict(cube, Domain.box(p, 2, {1: [2]}))],
        [sq],
    ]


def check_join_tangent_compat(model: PolyModel, families: Sequence[Sequence[PiecewisePolyMap]] | None = None) -> list[LawReport]:
    """f <= g iff T(f) <= T(g); f ~ g iff T(f) ~ T(g); join commutes with T."""
    families = join_families(model) if families is None else families
    T = model.tangent
    le = LawReport("join/T: f <= g iff T(f) <= T(g)", regime="exact jets")
    co = LawReport("join/T: f compatible g iff T(f) compatible T(g)", regime="exact jets")
    jt = LawReport("join/T: join T(f_i) = T(join f_i)", regime="exact jets")
    maps = [f for fam in families for f in fam]
    # an incompatible pair: same domain, different values
    sq = model.poly_map(1, lambda x: [x ** 2])
    maps += [sq, model.poly_map(1, lambda x: [x ** 2 + 1]), model.poly_map(1, lambda x: [x ** 2 + x ** model.p - x])]
    for f, g in itertools.product(maps, repeat=2):
        if f.src != g.src or f.tgt != g.tgt:
            continue
        le.record(leq(model, f, g) == leq(model, T(f), T(g)), f=repr(f), g=repr(g))
        co.record(compatible(model, f, g) == compatible(model, T(f), T(g)), f=repr(f), g=repr(g))
    for fam in families:
        lhs = join(model, [T(f) for f in fam])
        rhs = T(join(model, fam))
        jt.record(model.equal(lhs, rhs), family=[repr(f) for f in fam])
    return [le, co, jt]


def _check_module_formulas(rec: LawRecorder, model: PolyModel, n: int) -> None:
    """On linear maps T(f) = f x f, and p, 0, +, l, c are the block formulas of free modules."""
    M = model
    for coeffs in ([1, 2], [3, 0], [4, 4]):
        A = M.poly_map(n, lambda *xs: [sum(coeffs[(i + j) % 2] * x for j, x in enumerate(xs)) for i in range(n)])
        rec.equal("module formulas: T(f) = f x f for linear f", M.tangent(A), M.times(A, A), n=n, coeffs=coeffs)
    rec.equal("module formulas: p = pi0", M.t_proj(n), M.proj0(n, n), n=n)
    zero = M.pair(M.identity(n), M.compose(M.bang(n), M.constant(0, [0] * n)))
    rec.equal("module formulas: 0 = <1, 0>", M.t_zero(n), zero, n=n)
    plus = M.pair(M.select(3 * n, range(n)), M.poly_map(3 * n, lambda *z: [z[n + i] + z[2 * n + i] for i in range(n)]))
    rec.equal("module formulas: + = (u, v + w)", M.t_plus(n), plus, n=n)
    lift = M.pair_all([M.proj0(n, n), M.compose(M.bang(2 * n), M.constant(0, [0] * (2 * n))), M.proj1(n, n)])
    rec.equal("module formulas: l inserts two zero blocks", M.t_lift(n), lift, n=n)
    blocks = [M.select(4 * n, range(b * n, (b + 1) * n)) for b in range(4)]
    rec.equal("module formulas: c swaps the middle blocks", M.t_flip(n), M.pair_all([blocks[0], blocks[2], blocks[1], blocks[3]]), n=n)
