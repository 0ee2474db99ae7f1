"""Group objects in the polynomial tangent model and their tangent bundles.

For a polynomial group G of arity n over F_p the tangent space at the unit
T(G)_u is an arity-n object with p_u*(v) = (u, v).  The trivialization
phi: T(G) -> G x T(G)_u and its inverse, the adjoint actions, the
translation of the tangent and group structure maps, negation, left
invariant vector fields, the Lie bracket and the vertical bundle of a
principal bundle are all built from model operations and checked twice:
by jet equality and by evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

from .core import LawReport, compatible, leq
from .errors import ModelError, NotInEqualizer, NotIso, ParseError
from .gbundles import GroupObject, check_group
from .poly import (
    Domain,
    PiecewisePolyMap,
    Poly,
    PolyModel,
    PolyMor,
    all_points,
    matrix_inverse_mod,
    pointwise_witness,
    points_for,
    rank_mod,
)
from .tangent import LawRecorder

TABLE_LIMIT = 600_000
TABLE_SAMPLES = 100_000


def chain(model: PolyModel, *maps: PiecewisePolyMap) -> PiecewisePolyMap:
    out = maps[0]
    for f in maps[1:]:
        out = model.compose(out, f)
    return out


def linear_map(model: PolyModel, mat: np.ndarray) -> PiecewisePolyMap:
    """The linear map x -> mat x (rows are outputs)."""
    rows, cols = mat.shape
    p = model.p
    xs = [Poly.var(p, cols, j) for j in range(cols)]
    comps = []
    for r in range(rows):
        acc = Poly.zero(p, cols)
        for j in range(cols):
            if mat[r, j] % p:
                acc = acc + xs[j].scale(int(mat[r, j]))
        comps.append(acc)
    return model.total(PolyMor(p, cols, tuple(comps)))


def body_of(f: PiecewisePolyMap) -> PolyMor:
    b = f.single_body()
    if b is None or not f.is_total():
        raise ModelError("expected a total single-piece map", map=repr(f))
    return b


# polynomial groups


@dataclass
class PolyGroup:
    """(G, m, u, iota) with G = F_p^n and polynomial structure maps."""

    model: PolyModel
    n: int
    m: PiecewisePolyMap
    u: PiecewisePolyMap
    inv: PiecewisePolyMap
    name: str = "G"

    @property
    def unit(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.u.evaluate(()))

    def group_object(self) -> GroupObject:
        return GroupObject(self.model, self.n, self.m, self.u, self.inv, self.name)

    def to_json(self) -> dict:
        return {
            "group": self.name,
            "p": self.model.p,
            "arity": self.n,
            "m": body_of(self.m).to_json(),
            "iota": body_of(self.inv).to_json(),
            "unit": list(self.unit),
        }

    @classmethod
    def from_json(cls, data: Mapping, model: PolyModel | None = None) -> "PolyGroup":
        try:
            p, n = int(data["p"]), int(data["arity"])
            model = model or PolyModel(p)
            if model.p != p:
                raise ParseError(f"group over F{p} loaded into a model over F{model.p}")
            m = PolyMor(p, 2 * n, tuple(Poly.from_json(c) for c in data["m"]))
            inv = PolyMor(p, n, tuple(Poly.from_json(c) for c in data["iota"]))
            unit = [int(c) for c in data["unit"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed group record: {exc}") from exc
        return cls(model, n, model.total(m), model.point(n, unit), model.total(inv), data.get("group", "G"))


def additive_group(model: PolyModel, n: int = 1) -> PolyGroup:
    return PolyGroup(
        model,
        n,
        model.poly_map(2 * n, lambda *z: [z[i] + z[n + i] for i in range(n)]),
        model.point(n, [0] * n),
        model.poly_map(n, lambda *z: [-c for c in z]),
        f"(F{model.p}^{n}, +)" if n > 1 else f"(F{model.p}, +)",
    )


def heisenberg_group(model: PolyModel) -> PolyGroup:
    """(a, b, c)(a', b', c') = (a + a', b + b', c + c' + a b')."""
    return PolyGroup(
        model,
        3,
        model.poly_map(6, lambda a, b, c, a2, b2, c2: [a + a2, b + b2, c + c2 + a * b2]),
        model.point(3, [0, 0, 0]),
        model.poly_map(3, lambda a, b, c: [-a, -b, -c + a * b]),
        f"Heisenberg/F{model.p}",
    )


def quadratic_group(model: PolyModel) -> PolyGroup:
    """(a, b)(a', b') = (a + a', b + b' + a a'): abelian but not linear."""
    return PolyGroup(
        model,
        2,
        model.poly_map(4, lambda a, b, a2, b2: [a + a2, b + b2 + a * a2]),
        model.point(2, [0, 0]),
        model.poly_map(2, lambda a, b: [-a, -b + a * a]),
        f"quadratic/F{model.p}",
    )


def skewed_magma(model: PolyModel) -> PolyGroup:
    """m(x, y) = x + 2y on F_p: unital on neither side; a deliberate non-group."""
    return PolyGroup(
        model,
        1,
        model.poly_map(2, lambda x, y: [x + 2 * y]),
        model.point(1, [0]),
        model.poly_map(1, lambda x: [-x]),
        "skewed magma",
    )


def product_group(g: PolyGroup, h: PolyGroup) -> PolyGroup:
    M = g.model
    n, k = g.n, h.n
    # (x, y, x', y') -> ((x, x'), (y, y'))
    sel = M.select(2 * (n + k), list(range(n)) + list(range(n + k, 2 * n + k)) + list(range(n, n + k)) + list(range(2 * n + k, 2 * (n + k))))
    m = M.compose(sel, M.times(g.m, h.m))
    u = M.pair(g.u, h.u)
    return PolyGroup(M, n + k, m, u, M.times(g.inv, h.inv), f"{g.name} x {h.name}")


def group_laws(g: PolyGroup, seed: int = 0) -> list[LawReport]:
    return check_group(g.group_object(), seed=seed)


# T(G) and T(G)_u


class TangentGroup:
    """A polynomial group with its tangent bundle, T(G)_u and the trivialization."""

    def __init__(self, g: PolyGroup):
        self.g = g
        self.M = g.model
        self.n = g.n

    # T(G) as a group
    @cached_property
    def Tm(self) -> PiecewisePolyMap:
        """T(m) on T(G) x T(G) laid out as (g, dg, h, dh)."""
        return self.M.compose(self.M.shuffle([self.n, self.n]), self.M.tangent(self.g.m))

    @cached_property
    def Tu(self) -> PiecewisePolyMap:
        return self.M.tangent(self.g.u)

    @cached_property
    def Tinv(self) -> PiecewisePolyMap:
        return self.M.tangent(self.g.inv)

    def tangent_group(self) -> GroupObject:
        return GroupObject(self.M, 2 * self.n, self.Tm, self.Tu, self.Tinv, f"T({self.g.name})")

    @cached_property
    def m3(self) -> PiecewisePolyMap:
        M = self.M
        return M.compose(M.times(self.g.m, M.identity(self.n)), self.g.m)

    @cached_property
    def Tm3(self) -> PiecewisePolyMap:
        return self.M.compose(self.M.shuffle([self.n] * 3), self.M.tangent(self.m3))

    # T(G)_u
    @cached_property
    def pu(self) -> PiecewisePolyMap:
        """p_u*: T(G)_u -> T(G), v -> (u, v)."""
        M = self.M
        return M.pair(M.compose(M.bang(self.n), self.g.u), M.identity(self.n))

    @cached_property
    def tu(self) -> PiecewisePolyMap:
        """T(G) -> T(G)_u, (x, v) -> v on {x = u}: factorization through the pullback."""
        M = self.M
        dom = Domain.box(M.p, 2 * self.n, {i: [c] for i, c in enumerate(self.g.unit)})
        return M.restrict(M.select(2 * self.n, range(self.n, 2 * self.n)), dom)

    def into_tu(self, f: PiecewisePolyMap) -> PiecewisePolyMap:
        """<!, f>: the induced map into T(G)_u of f with f p = !u."""
        M = self.M
        if not M.equal(M.compose(f, M.t_proj(self.n)), M.compose(M.bang(f.src), self.g.u)):
            raise ModelError("map does not lie over the unit")
        return M.compose(f, self.tu)

    @cached_property
    def zero_u(self) -> PiecewisePolyMap:
        """0_u = <!, u 0_G>: 1 -> T(G)_u."""
        return self.into_tu(self.M.compose(self.g.u, self.M.t_zero(self.n)))

    @cached_property
    def plus_u(self) -> PiecewisePolyMap:
        """+_u = <!, <p_u*, p_u*> +>."""
        M, n = self.M, self.n
        into_t2 = M.pair_all([M.compose(M.bang(2 * n), self.g.u), M.identity(2 * n)])
        return self.into_tu(M.compose(into_t2, M.t_plus(n)))

    @cached_property
    def Tm_u(self) -> PiecewisePolyMap:
        M = self.M
        return self.into_tu(M.compose(M.times(self.pu, self.pu), self.Tm))

    @cached_property
    def Tinv_u(self) -> PiecewisePolyMap:
        return self.into_tu(self.M.compose(self.pu, self.Tinv))

    @cached_property
    def lift_u(self) -> PiecewisePolyMap:
        """l_u: T(G)_u -> T(T(G)_u) with l_u T(p_u*) = p_u* l."""
        M = self.M
        return chain(M, self.pu, M.t_lift(self.n), M.tangent(self.tu))

    @cached_property
    def brace_identity(self) -> tuple[PiecewisePolyMap, str]:
        """{1} on T(T(G)_u), derived from a left inverse K of the matrix of l_u: {1} = (1 - p 0) K."""
        M, n, p = self.M, self.n, self.M.p
        L = body_of(self.lift_u).linear_part()
        if L is None:
            raise ModelError("l_u is not linear")
        rows: list[int] = []
        for r in range(L.shape[0]):
            if rank_mod(L[rows + [r]], p) > len(rows):
                rows.append(r)
            if len(rows) == n:
                break
        inv = matrix_inverse_mod(L[rows], p)
        if inv is None or len(rows) < n:
            raise ModelError("l_u has no left inverse")
        K = np.zeros((n, 2 * n), dtype=np.int64)
        K[:, rows] = inv
        P0 = body_of(M.compose(M.t_proj(n), M.t_zero(n))).linear_part()
        mat = (K @ ((np.eye(2 * n, dtype=np.int64) - P0) % p)) % p
        note = f"{{1}} = (1 - p 0) K with K = {K.tolist()} a left inverse of l_u = {L.tolist()}; matrix {mat.tolist()}"
        return linear_map(M, mat), note

    # trivialization
    @cached_property
    def phi(self) -> PiecewisePolyMap:
        """phi = <p, <!, <p iota 0, 1> T(m)>>: T(G) -> G x T(G)_u."""
        M, n = self.M, self.n
        shift = M.pair(chain(M, M.t_proj(n), self.g.inv, M.t_zero(n)), M.identity(2 * n))
        return M.pair(M.t_proj(n), self.into_tu(M.compose(shift, self.Tm)))

    @cached_property
    def phi_inv(self) -> PiecewisePolyMap:
        """phi^-1 = (0 x p_u*) T(m): G x T(G)_u -> T(G)."""
        M = self.M
        return M.compose(M.times(M.t_zero(self.n), self.pu), self.Tm)

    # adjoint actions
    @cached_property
    def Ad_l(self) -> PiecewisePolyMap:
        """<!, <pi0 0, pi1 p_u*, pi0 iota 0> T(m_3)>: G x T(G)_u -> T(G)_u, (g, v) -> g v g^-1."""
        M, n = self.M, self.n
        p0, p1 = M.proj0(n, n), M.proj1(n, n)
        z = M.t_zero(n)
        return self.into_tu(M.compose(M.pair_all([M.compose(p0, z), M.compose(p1, self.pu), chain(M, p0, self.g.inv, z)]), self.Tm3))

    @cached_property
    def Ad_r(self) -> PiecewisePolyMap:
        """<!, <pi1 iota 0, pi0 p_u*, pi1 0> T(m_3)>: T(G)_u x G -> T(G)_u, (v, h) -> h^-1 v h."""
        M, n = self.M, self.n
        p0, p1 = M.proj0(n, n), M.proj1(n, n)
        z = M.t_zero(n)
        return self.into_tu(M.compose(M.pair_all([chain(M, p1, self.g.inv, z), M.compose(p0, self.pu), M.compose(p1, z)]), self.Tm3))

    @cached_property
    def s(self) -> PiecewisePolyMap:
        """s = <pi1, Ad_r>: T(G)_u x G -> G x T(G)_u."""
        M, n = self.M, self.n
        return M.pair(M.proj1(n, n), self.Ad_r)

    @cached_property
    def s_inv(self) -> PiecewisePolyMap:
        M, n = self.M, self.n
        return M.pair(self.Ad_l, M.proj0(n, n))

    # negation on T(G)
    @cached_property
    def neg(self) -> PiecewisePolyMap:
        """- = phi (1 x T(iota)_u) phi^-1."""
        M = self.M
        return chain(M, self.phi, M.times(M.identity(self.n), self.Tinv_u), self.phi_inv)

    @cached_property
    def neg2(self) -> PiecewisePolyMap:
        """c T(-) c: the negation on T^2 G over p_T."""
        M = self.M
        c = M.t_flip(self.n)
        return chain(M, c, M.tangent(self.neg), c)

    # left-invariant fields
    def field_of(self, V: PiecewisePolyMap) -> PiecewisePolyMap:
        """xi_V = (0 x V p_u*) T(m), read as G -> T(G)."""
        M, n = self.M, self.n
        return M.compose(M.pair(M.t_zero(n), chain(M, M.bang(n), V, self.pu)), self.Tm)

    def element_of(self, xi: PiecewisePolyMap) -> PiecewisePolyMap:
        """V_xi = <1, u xi>: 1 -> T(G)_u."""
        return self.into_tu(self.M.compose(self.g.u, xi))

    def vector(self, values: Sequence[int]) -> PiecewisePolyMap:
        return self.M.point(self.n, list(values))


# trivialization and structure checks


def _recorder(tg: TangentGroup, seed: int, limit: int, samples: int) -> LawRecorder:
    return LawRecorder(tg.M, np.random.default_rng(seed), limit=limit, samples=samples)


def trivialize(tg: TangentGroup, seed: int = 0, limit: int = TABLE_LIMIT, samples: int = TABLE_SAMPLES) -> tuple[PiecewisePolyMap, PiecewisePolyMap, list[LawReport]]:
    """phi, phi^-1 and the checks that they are mutually inverse with phi pi0 = p."""
    M, n = tg.M, tg.n
    rec = _recorder(tg, seed, limit, samples)
    phi, phi_inv = tg.phi, tg.phi_inv
    ok1 = rec.equal("trivialization: phi phi^-1 = 1", M.compose(phi, phi_inv), M.identity(2 * n), group=tg.g.name)
    ok2 = rec.equal("trivialization: phi^-1 phi = 1", M.compose(phi_inv, phi), M.identity(2 * n), group=tg.g.name)
    rec.equal("trivialization: phi pi0 = p", M.compose(phi, M.proj0(n, n)), M.t_proj(n), group=tg.g.name)
    X, regime = points_for(M.p, 2 * n, limit, np.random.default_rng(seed), samples)
    vals, defined = phi.eval_batch(X)
    codes = np.unique(vals @ (M.p ** np.arange(2 * n, dtype=np.int64)))
    rec.truth(
        "trivialization: phi is a bijection on points",
        bool(defined.all()) and (regime != "exhaustive" or len(codes) == X.shape[0]),
        regime=regime,
        points=int(X.shape[0]),
    )
    if not (ok1 and ok2):
        raise NotIso("trivialization is not invertible", group=tg.g.name)
    return phi, phi_inv, rec.result()


def adjoint_checks(tg: TangentGroup, seed: int = 0, limit: int = TABLE_LIMIT, samples: int = TABLE_SAMPLES) -> list[LawReport]:
    """s s^-1 = 1 = s^-1 s, the action laws of Ad_l and Ad_r, and the switching square."""
    M, n, g = tg.M, tg.n, tg.g
    rec = _recorder(tg, seed, limit, samples)
    I = M.identity
    rec.equal("adjoint: s s^-1 = 1", M.compose(tg.s, tg.s_inv), I(2 * n))
    rec.equal("adjoint: s^-1 s = 1", M.compose(tg.s_inv, tg.s), I(2 * n))
    unit_l = M.pair(M.compose(M.bang(n), g.u), I(n))
    rec.equal("adjoint: <!u, 1> Ad_l = 1", M.compose(unit_l, tg.Ad_l), I(n))
    rec.equal("adjoint: (m x 1) Ad_l = (1 x Ad_l) Ad_l", M.compose(M.times(g.m, I(n)), tg.Ad_l), M.compose(M.times(I(n), tg.Ad_l), tg.Ad_l))
    unit_r = M.pair(I(n), M.compose(M.bang(n), g.u))
    rec.equal("adjoint: <1, !u> Ad_r = 1", M.compose(unit_r, tg.Ad_r), I(n))
    rec.equal("adjoint: (1 x m) Ad_r = (Ad_r x 1) Ad_r", M.compose(M.times(I(n), g.m), tg.Ad_r), M.compose(M.times(tg.Ad_r, I(n)), tg.Ad_r))
    rec.equal(
        "adjoint: s (0 x p_u*) T(m) = (p_u* x 0) T(m)",
        chain(M, tg.s, M.times(M.t_zero(n), tg.pu), tg.Tm),
        M.compose(M.times(tg.pu, M.t_zero(n)), tg.Tm),
    )
    return rec.result()


def heisenberg_conjugation(p: int, g: np.ndarray, v: np.ndarray, inverse_first: bool = False) -> np.ndarray:
    """g V g^-1 (or g^-1 V g) with unitriangular matrices; rows of g = (a, b, c), of v = (x, y, z)."""
    def group_matrix(a, b, c):
        out = np.zeros((a.shape[0], 3, 3), dtype=np.int64)
        out[:, 0, 0] = out[:, 1, 1] = out[:, 2, 2] = 1
        out[:, 0, 1], out[:, 1, 2], out[:, 0, 2] = a, b, c
        return out

    a, b, c = g[:, 0], g[:, 1], g[:, 2]
    G = group_matrix(a, b, c)
    Ginv = group_matrix(-a, -b, -c + a * b)
    V = np.zeros((v.shape[0], 3, 3), dtype=np.int64)
    V[:, 0, 1], V[:, 1, 2], V[:, 0, 2] = v[:, 0], v[:, 1], v[:, 2]
    left, right = (Ginv, G) if inverse_first else (G, Ginv)
    out = np.einsum("nij,njk,nkl->nil", left, V, right) % p
    return np.stack([out[:, 0, 1], out[:, 1, 2], out[:, 0, 2]], axis=1)


def adjoint_oracle(tg: TangentGroup) -> list[LawReport]:
    """Ad_l(g, v) = g v g^-1 and Ad_r(v, h) = h^-1 v h against matrix conjugation (Heisenberg only)."""
    p = tg.M.p
    X = all_points(p, 6)
    left = LawReport("adjoint: Ad_l matches unitriangular conjugation g V g^-1")
    vals, _ = tg.Ad_l.eval_batch(X)
    want = heisenberg_conjugation(p, X[:, :3], X[:, 3:])
    bad = np.any(vals % p != want, axis=1)
    left.record(not bad.any(), at=X[int(np.argmax(bad))].tolist() if bad.any() else None)
    right = LawReport("adjoint: Ad_r matches unitriangular conjugation h^-1 V h")
    vals, _ = tg.Ad_r.eval_batch(X)
    want = heisenberg_conjugation(p, X[:, 3:], X[:, :3], inverse_first=True)
    bad = np.any(vals % p != want, axis=1)
    right.record(not bad.any(), at=X[int(np.argmax(bad))].tolist() if bad.any() else None)
    return [left, right]


def table1_check(tg: TangentGroup, seed: int = 0, limit: int = TABLE_LIMIT, samples: int = TABLE_SAMPLES) -> list[LawReport]:
    """The eight structure maps of T(G) transported along phi, one report per row."""
    M, n, g = tg.M, tg.n, tg.g
    rec = _recorder(tg, seed, limit, samples)
    I = M.identity
    phi, phi_inv = tg.phi, tg.phi_inv
    bang_zero = lambda k: M.compose(M.bang(k), tg.zero_u)
    # +
    sel = lambda idx: M.select(3 * n, [b * n + i for b in idx for i in range(n)])
    phi2 = M.tk_pair([M.compose(sel([0, 1]), phi_inv), M.compose(sel([0, 2]), phi_inv)], n)
    rec.equal("row +: (1 x +_u) phi^-1 = phi_2^-1 +", M.compose(M.times(I(n), tg.plus_u), phi_inv), M.compose(phi2, M.t_plus(n)))
    # 0
    rec.equal("row 0: <1, !0_u> phi^-1 = 0", M.compose(M.pair(I(n), bang_zero(n)), phi_inv), M.t_zero(n))
    # p
    rec.equal("row p: phi^-1 p = pi0", M.compose(phi_inv, M.t_proj(n)), M.proj0(n, n))
    # T(u)
    rec.equal("row T(u): <u, 0_u> phi^-1 = T(u)", M.compose(M.pair(g.u, tg.zero_u), phi_inv), tg.Tu)
    # l and c, through T(phi) followed by phi x <p, {1}>
    brace, derivation = tg.brace_identity
    brace_rep = LawReport("row l: {1} satisfies <{1} l_u, p 0> T(+_u) = 1")
    tplus_u = M.tangent(tg.plus_u)
    lhs = M.compose(M.t_pair([M.compose(brace, tg.lift_u), M.compose(M.t_proj(n), M.t_zero(n))]), tplus_u)
    brace_rep.record(M.equal(lhs, I(2 * n)) and pointwise_witness(lhs, I(2 * n), all_points(M.p, 2 * n)) is None)
    brace_rep.note(derivation)
    psi = chain(M, M.tangent(phi), M.unshuffle([n, n]), M.times(phi, M.pair(M.t_proj(n), brace)))
    lift_row = M.pair_all([M.proj0(n, n), bang_zero(2 * n), bang_zero(2 * n), M.proj1(n, n)])
    rec.equal("row l: phi^-1 l T(phi) (phi x <p, {1}>) = <pi0, !0_u, !0_u, pi1>", chain(M, phi_inv, M.t_lift(n), psi), lift_row)
    mid = M.select(4 * n, [b * n + i for b in (0, 2, 1, 3) for i in range(n)])
    rec.equal("row c: c Psi = Psi <pi0, pi2, pi1, pi3>", M.compose(M.t_flip(n), psi), M.compose(psi, mid))
    # the middle swap alone misses the second-order cross term: the flip also adds [v, w]
    kappa = M.compose(M.select(4 * n, range(n, 3 * n)), parametric_bracket(tg))
    corrected = M.pair_all([M.compose(mid, M.select(4 * n, range(3 * n))), M.compose(M.pair(M.select(4 * n, range(3 * n, 4 * n)), kappa), tg.plus_u)])
    rec.equal("row c, with bracket term: c Psi = Psi <pi0, pi2, pi1, pi3 + [pi1, pi2]>", M.compose(M.t_flip(n), psi), M.compose(psi, corrected))
    # T(m)
    one_s_one = M.times(M.times(I(n), tg.s), I(n))
    rec.equal(
        "row T(m): (phi^-1 x phi^-1) T(m) = (1 x s x 1)(m x T(m)_u) phi^-1",
        M.compose(M.times(phi_inv, phi_inv), tg.Tm),
        chain(M, one_s_one, M.times(g.m, tg.Tm_u), phi_inv),
    )
    # T(iota): the typed composite sigma (T(iota)_u x iota) s
    sigma = M.swap(n, n)
    typed = chain(M, sigma, M.times(tg.Tinv_u, g.inv), tg.s)
    rec.equal("row T(iota): phi^-1 T(iota) phi = sigma (T(iota)_u x iota) s", chain(M, phi_inv, tg.Tinv, phi), typed)
    rec.equal(
        "row T(iota): phi^-1 T(iota) phi = <pi0 iota, Ad_l T(iota)_u>",
        chain(M, phi_inv, tg.Tinv, phi),
        M.pair(M.compose(M.proj0(n, n), g.inv), M.compose(tg.Ad_l, tg.Tinv_u)),
    )
    literal = chain(M, tg.s, M.times(tg.Tinv_u, g.inv))
    lit_ok = M.equal(literal, chain(M, phi_inv, tg.Tinv, phi))
    reps = rec.result()
    for r in reps:
        if r.law.startswith("row T(iota): phi^-1 T(iota) phi = sigma"):
            r.note(f"the untyped order s (T(iota)_u x iota) {'also agrees' if lit_ok else 'disagrees'} on this group")
    return reps + [brace_rep]


def eckmann_hilton(tg: TangentGroup, seed: int = 0, limit: int = TABLE_LIMIT, samples: int = TABLE_SAMPLES) -> list[LawReport]:
    """+_u = T(m)_u, commutativity, unit 0_u, inverse T(iota)_u."""
    M, n = tg.M, tg.n
    rec = _recorder(tg, seed, limit, samples)
    I = M.identity
    rec.equal("eckmann-hilton: +_u = T(m)_u", tg.plus_u, tg.Tm_u, group=tg.g.name)
    rec.equal("eckmann-hilton: T(m)_u is commutative", M.compose(M.swap(n, n), tg.Tm_u), tg.Tm_u, group=tg.g.name)
    rec.equal("eckmann-hilton: 0_u is a unit", M.compose(M.pair(I(n), M.compose(M.bang(n), tg.zero_u)), tg.Tm_u), I(n), group=tg.g.name)
    rec.equal(
        "eckmann-hilton: T(iota)_u is an inverse",
        M.compose(M.pair(I(n), tg.Tinv_u), tg.Tm_u),
        M.compose(M.bang(n), tg.zero_u),
        group=tg.g.name,
    )
    return rec.result()


def negation_checks(tg: TangentGroup, seed: int = 0, limit: int = TABLE_LIMIT, samples: int = TABLE_SAMPLES) -> list[LawReport]:
    """The negation on T(G), its compatibility with T(m) and +, and c T(-) c on T^2 G."""
    M, n = tg.M, tg.n
    rec = _recorder(tg, seed, limit, samples)
    neg = tg.neg
    rec.equal("negation: <-, 1> + = p 0", M.compose(M.tk_pair([neg, M.identity(2 * n)], n), M.t_plus(n)), M.compose(M.t_proj(n), M.t_zero(n)))
    rec.equal("negation: - - = 1", M.compose(neg, neg), M.identity(2 * n))
    rec.equal("negation: (- x -) T(m) = T(m) -", M.compose(M.times(neg, neg), tg.Tm), M.compose(tg.Tm, neg))
    pi = [M.tk_proj(n, 2, i) for i in range(2)]
    rec.equal(
        "negation: (- x_G -) + = + -",
        M.compose(M.tk_pair([M.compose(pi[0], neg), M.compose(pi[1], neg)], n), M.t_plus(n)),
        M.compose(M.t_plus(n), neg),
    )
    rec.equal("negation: acts fibrewise, - p = p", M.compose(neg, M.t_proj(n)), M.t_proj(n))
    neg2 = tg.neg2
    rec.equal(
        "negation: <c T(-) c, 1> +_T = p_T 0_T on T^2 G",
        M.compose(M.tk_pair([neg2, M.identity(4 * n)], 2 * n), M.t_plus(2 * n)),
        M.compose(M.t_proj(2 * n), M.t_zero(2 * n)),
    )
    coords = M.poly_map(4 * n, lambda *z: list(z[: 2 * n]) + [-c for c in z[2 * n:]])
    rec.equal("negation: c T(-) c = (x, u, -v, -w)", neg2, coords)
    return rec.result()


# brace and the Lie bracket


def brace(model: PolyModel, f: PiecewisePolyMap, n: int) -> PiecewisePolyMap:
    """{f} for f: X -> T^2 M with f T(p) = f p_T p 0, i.e. f = (f0, f1, 0, f3); returns (f0, f3)."""
    M = model
    lhs = M.compose(f, M.tangent(M.t_proj(n)))
    rhs = chain(M, f, M.t_proj(2 * n), M.t_proj(n), M.t_zero(n))
    w = M.jet_witness(lhs, rhs)
    if w is None:
        X, _ = points_for(M.p, f.src, TABLE_LIMIT, np.random.default_rng(0), 20_000)
        w = pointwise_witness(lhs, rhs, X)
    if w is not None:
        raise NotInEqualizer("map is not in the equalizer of T(p) and p p 0", witness=w)
    return M.compose(f, M.select(4 * n, list(range(n)) + list(range(3 * n, 4 * n))))


def brace_equation(model: PolyModel, f: PiecewisePolyMap, n: int) -> bool:
    """<{f} l, f p_T 0> T(+) = f, by jets and evaluation."""
    M = model
    b = brace(M, f, n)
    a = M.compose(b, M.t_lift(n))
    c = chain(M, f, M.t_proj(2 * n), M.t_zero(2 * n))
    lhs = M.compose(M.tt2_pair(a, c, n), M.tangent(M.t_plus(n)))
    X, _ = points_for(M.p, f.src, TABLE_LIMIT, np.random.default_rng(0), 20_000)
    return M.equal(lhs, f) and pointwise_witness(lhs, f, X) is None


def bracket_sum(tg: TangentGroup, w1: PiecewisePolyMap, w2: PiecewisePolyMap) -> PiecewisePolyMap:
    """<w1 T(w2), w2 T(w1) c -> + : G -> T^2 G, with - the negation c T(-) c."""
    M, n = tg.M, tg.n
    a = M.compose(w1, M.tangent(w2))
    b = chain(M, w2, M.tangent(w1), M.t_flip(n), tg.neg2)
    return M.compose(M.tk_pair([a, b], 2 * n), M.t_plus(2 * n))


def lie_bracket(tg: TangentGroup, w1: PiecewisePolyMap, w2: PiecewisePolyMap) -> PiecewisePolyMap:
    """[w1, w2] = {bracket_sum(w1, w2)}."""
    return brace(tg.M, bracket_sum(tg, w1, w2), tg.n)


def is_left_invariant(tg: TangentGroup, xi: PiecewisePolyMap) -> bool:
    M, n = tg.M, tg.n
    lhs = M.compose(tg.g.m, xi)
    rhs = M.compose(M.times(M.t_zero(n), xi), tg.Tm)
    X, _ = points_for(M.p, 2 * n, TABLE_LIMIT, np.random.default_rng(0), 20_000)
    return M.equal(lhs, rhs) and pointwise_witness(lhs, rhs, X) is None


def element_values(V: PiecewisePolyMap) -> tuple[int, ...]:
    return tuple(int(c) for c in V.evaluate(()))


def bracket_of_elements(tg: TangentGroup, v: Sequence[int], w: Sequence[int]) -> tuple[int, ...]:
    """[V, W] through the fields xi_V, xi_W and back to an element."""
    br = lie_bracket(tg, tg.field_of(tg.vector(v)), tg.field_of(tg.vector(w)))
    return element_values(tg.element_of(br))


def parametric_bracket(tg: TangentGroup) -> PiecewisePolyMap:
    """(V, W) -> [V, W] as one polynomial map T(G)_u x T(G)_u -> T(G)_u.

    The fields xi_V, xi_W are extended by zero in the parameter directions to
    fields on (F_p^2n, +) x G, bracketed there with the same formula, and
    the result is read off at the unit.
    """
    M, n = tg.M, tg.n
    big = TangentGroup(product_group(additive_group(M, 2 * n), tg.g))
    k = 3 * n
    par = M.proj0(2 * n, n)
    x = M.proj1(2 * n, n)

    def extended(which: int) -> PiecewisePolyMap:
        V = M.compose(par, M.select(2 * n, range(which * n, (which + 1) * n)))
        # xi_V(x) = T(m)((x, 0), (u, V))
        val = M.compose(M.pair(M.compose(x, M.t_zero(n)), M.compose(V, tg.pu)), tg.Tm)
        vec = M.compose(val, M.select(2 * n, range(n, 2 * n)))
        return M.pair_all([M.identity(k), M.compose(M.bang(k), M.point(2 * n, [0] * (2 * n))), vec])

    br = lie_bracket(big, extended(0), extended(1))
    at_unit = M.pair(M.identity(2 * n), M.compose(M.bang(2 * n), tg.g.u))
    return chain(M, at_unit, br, M.select(2 * k, range(k + 2 * n, 2 * k)))


def bracket_algebra_checks(tg: TangentGroup, Br: PiecewisePolyMap) -> list[LawReport]:
    """Antisymmetry, bilinearity and Jacobi for the parametric bracket over the full span."""
    p, n = tg.M.p, tg.n
    body = body_of(Br)
    vecs = all_points(p, n)
    N = vecs.shape[0]

    def br(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return body.eval_batch(np.concatenate([a, b], axis=1)) % p

    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    A, B = vecs[ii.ravel()], vecs[jj.ravel()]
    vAB = br(A, B)
    anti = LawReport("lie algebra: [v, w] = -[w, v]", regime=f"exhaustive over {N * N} pairs")
    bad = np.any((vAB + br(B, A)) % p != 0, axis=1)
    anti.record(not bad.any(), pair=None if not bad.any() else (A[np.argmax(bad)].tolist(), B[np.argmax(bad)].tolist()))
    scal = LawReport("lie algebra: [k v, w] = k [v, w] for k in F_p", regime=f"exhaustive over {p * N * N} cases")
    for k in range(p):
        bad = np.any(br((k * A) % p, B) != (k * vAB) % p, axis=1)
        scal.record(not bad.any(), k=k)
    add = LawReport("lie algebra: [v + v', w] = [v, w] + [v', w]", regime=f"exhaustive over {N ** 3} triples")
    jac = LawReport("lie algebra: Jacobi identity", regime=f"exhaustive over {N ** 3} triples")
    table = vAB.reshape(N, N, n)
    for i in range(N):
        U = np.repeat(vecs[i: i + 1], N * N, axis=0)
        lhs = br((U + A) % p, B)
        rhs = (br(U, B) + vAB) % p
        bad = np.any(lhs != rhs, axis=1)
        add.record(not bad.any(), v=vecs[i].tolist())
        # [u, [a, b]] + [a, [b, u]] + [b, [u, a]]
        t1 = br(U, vAB)
        bu = table[jj.ravel(), i]
        ua = table[i, ii.ravel()]
        t2 = br(A, bu)
        t3 = br(B, ua)
        bad = np.any((t1 + t2 + t3) % p != 0, axis=1)
        jac.record(not bad.any(), u=vecs[i].tolist())
    return [anti, scal, add, jac]


def heisenberg_bracket_oracle(p: int, v: Sequence[int], w: Sequence[int]) -> tuple[int, ...]:
    """B(v, w) - B(w, v) for the bilinear part B((a,b,c),(a',b',c')) = (0, 0, a b') of the group law."""
    return (0, 0, (v[0] * w[1] - w[0] * v[1]) % p)


def lie_checks(tg: TangentGroup, pairs: int = 24, seed: int = 0) -> tuple[list[LawReport], dict]:
    """Bracket of basis fields, left invariance, agreement of the per-pair and parametric brackets, algebra laws."""
    n, p = tg.n, tg.M.p
    rng = np.random.default_rng(seed)
    basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    names = "XYZUVW"[:n] if n <= 6 else [f"e{i}" for i in range(n)]
    table = {}
    inv = LawReport("lie bracket: [xi_V, xi_W] is left-invariant")
    for (i, v), (j, w) in itertools.product(enumerate(basis), repeat=2):
        br = lie_bracket(tg, tg.field_of(tg.vector(v)), tg.field_of(tg.vector(w)))
        inv.record(is_left_invariant(tg, br), v=v, w=w)
        table[f"[{names[i]},{names[j]}]"] = list(element_values(tg.element_of(br)))
    Br = parametric_bracket(tg)
    agree = LawReport("lie bracket: per-pair and parametric brackets agree", regime=f"basis pairs + {pairs} sampled pairs")
    samples = [(v, w) for v in basis for w in basis]
    samples += [(tuple(rng.integers(0, p, n).tolist()), tuple(rng.integers(0, p, n).tolist())) for _ in range(pairs)]
    for v, w in samples:
        got = bracket_of_elements(tg, v, w)
        par = tuple(int(c) % p for c in body_of(Br).evaluate(list(v) + list(w)))
        agree.record(got == par, v=v, w=w, pair=got, parametric=par)
    reps = [inv, agree] + bracket_algebra_checks(tg, Br)
    return reps, {"bracket_table": table, "parametric": repr(body_of(Br))}


def heisenberg_oracle_report(tg: TangentGroup, table: Mapping[str, Sequence[int]]) -> LawReport:
    rep = LawReport("lie bracket: Heisenberg basis brackets match B(v, w) - B(w, v)")
    names = "XYZ"
    for i, j in itertools.product(range(3), repeat=2):
        v = tuple(int(k == i) for k in range(3))
        w = tuple(int(k == j) for k in range(3))
        got = tuple(table[f"[{names[i]},{names[j]}]"])
        rep.record(got == heisenberg_bracket_oracle(tg.M.p, v, w), bracket=f"[{names[i]},{names[j]}]", got=got)
    return rep


# left-invariant vector fields


def left_invariant_search(tg: TangentGroup) -> tuple[list[np.ndarray], list[LawReport]]:
    """All left-invariant sections G -> T(G) as value tables, by propagation from the unit.

    Invariance at (g, u) forces xi(g) = T(m)((g, 0), xi(u)), so there are at
    most p^n candidates; each is tested against every invariance equation
    xi(g h) = T(m)((g, 0), xi(h)) over all pairs.
    """
    n, p = tg.n, tg.M.p
    if n > 3:
        raise ModelError("left-invariant search is limited to arity 3")
    G = all_points(p, n)
    N = G.shape[0]
    weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)  # lexicographic row index
    Tm = body_of(tg.Tm)
    m = body_of(tg.g.m)
    found = []
    u = np.array(tg.g.unit, dtype=np.int64)
    for V in all_points(p, n):
        base = np.concatenate([G, np.zeros_like(G), np.tile(u, (N, 1)), np.tile(V, (N, 1))], axis=1)
        xi = Tm.eval_batch(base) % p  # xi(g) for every g, rows in G order
        section = bool(np.all(xi[:, :n] == G))
        ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
        gi, hj = G[ii.ravel()], G[jj.ravel()]
        gh = m.eval_batch(np.concatenate([gi, hj], axis=1)) % p
        lhs = xi[(gh @ weights)]
        rhs = Tm.eval_batch(np.concatenate([gi, np.zeros_like(gi), xi[jj.ravel()]], axis=1)) % p
        if section and np.array_equal(lhs, rhs):
            found.append(xi)
    rep = LawReport("left-invariant fields: search finds exactly p^n fields", regime="propagation from the unit, all pairs checked")
    rep.record(len(found) == p ** n, found=len(found), expected=p ** n)
    return found, [rep]


def left_invariant_roundtrip(tg: TangentGroup) -> list[LawReport]:
    """V -> xi_V -> V for every V, xi -> V_xi -> xi for every field found, closure under 0, + and -."""
    M, n, p = tg.M, tg.n, tg.M.p
    G = all_points(p, n)
    vec = LawReport("left-invariant fields: V -> xi_V -> V", regime=f"all {p ** n} vectors")
    inv = LawReport("left-invariant fields: xi_V is a left-invariant section")
    for V in all_points(p, n):
        xi = tg.field_of(tg.vector(V.tolist()))
        vec.record(element_values(tg.element_of(xi)) == tuple(V.tolist()), V=V.tolist())
        inv.record(is_left_invariant(tg, xi) and M.equal(M.compose(xi, M.t_proj(n)), M.identity(n)), V=V.tolist())
    found, reps = left_invariant_search(tg)
    back = LawReport("left-invariant fields: xi -> V_xi -> xi", regime="every field found by search")
    weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    u_row = int(np.array(tg.g.unit) @ weights)
    tables = set()
    for xi in found:
        V = xi[u_row, n:]
        again, _ = tg.field_of(tg.vector(V.tolist())).eval_batch(G)
        back.record(np.array_equal(again % p, xi), V=V.tolist())
        tables.add(xi.tobytes())
    close = LawReport("left-invariant fields: closed under 0, + and -")
    zero = np.concatenate([G, np.zeros_like(G)], axis=1)
    close.record(zero.tobytes() in tables, case="zero")
    plus = body_of(M.t_plus(n))
    negb = body_of(tg.neg)
    for a, b in itertools.islice(itertools.product(found, repeat=2), 0, None, max(1, len(found) // 5)):
        s = plus.eval_batch(np.concatenate([a, b[:, n:]], axis=1)) % p
        close.record(s.tobytes() in tables, case="sum")
    for a in found[:: max(1, len(found) // 25)]:
        close.record((negb.eval_batch(a) % p).tobytes() in tables, case="negation")
    return [vec, inv] + reps + [back, close]


# the vertical bundle


@dataclass
class PolyPrincipalBundle:
    """A principal G-bundle q: P -> M in the polynomial model with charts alpha_i: P -> M x G."""

    model: PolyModel
    m: int
    k: int
    group: PolyGroup
    q: PiecewisePolyMap
    r: PiecewisePolyMap
    alphas: list
    name: str = "P"

    def alpha_inv(self, i: int) -> PiecewisePolyMap:
        inv = self.model.partial_inverse_candidate(self.alphas[i])
        if inv is None:
            raise ModelError("chart is not a partial isomorphism", chart=i)
        return inv


def translation_chart(model: PolyModel, shift: Mapping[int, int], support: Sequence[int]) -> PiecewisePolyMap:
    """(x, y) -> (x, y + shift[x]) on {x in support}: a chart of F_p x F_p with locally constant offset."""
    pieces = []
    for x in support:
        dom = Domain.box(model.p, 2, {0: [x]})
        pieces.append((dom, PolyMor.from_callable(model.p, 2, lambda a, b, c=shift.get(x, 0): [a, b + c])))
    return model.make(2, 2, pieces)


def line_bundles(model: PolyModel) -> list[PolyPrincipalBundle]:
    """The trivial (F_p, +)-bundle over F_p and a two-chart glued one with locally constant transition."""
    p = model.p
    G = additive_group(model, 1)
    q = model.proj0(1, 1)
    r = model.poly_map(3, lambda x, y, g: [x, y + g])
    trivial = PolyPrincipalBundle(model, 1, 2, G, q, r, [model.identity(2)], "trivial line bundle")
    cut = p // 2
    U0 = list(range(0, cut + 1))
    U1 = list(range(cut, p))
    shift1 = {x: (1 if x == cut else 3) for x in U1}
    glued = PolyPrincipalBundle(
        model, 1, 2, G, q, r,
        [translation_chart(model, {}, U0), translation_chart(model, shift1, U1)],
        "two-chart line bundle",
    )
    return [trivial, glued]


def bundle_laws(P: PolyPrincipalBundle) -> list[LawReport]:
    M = P.model
    rep = LawReport(f"{P.name}: charts are partial isos over q covering P and r is the chart-wise right action")
    pi0 = M.proj0(P.m, P.group.n)
    bars = [M.bar(a) for a in P.alphas]
    for i, a in enumerate(P.alphas):
        ainv = P.alpha_inv(i)
        rep.record(M.equal(M.compose(a, ainv), M.bar(a)) and M.equal(M.compose(ainv, a), M.bar(ainv)), chart=i, law="partial iso")
        rep.record(M.equal(M.compose(a, pi0), M.compose(M.bar(a), P.q)), chart=i, law="alpha pi0 = bar(alpha) q")
        local = chain(M, M.times(a, M.identity(P.group.n)), M.times(M.identity(P.m), P.group.m), ainv)
        rep.record(leq(M, local, P.r), chart=i, law="r_i <= r")
    for i, j in itertools.combinations(range(len(bars)), 2):
        rep.record(compatible(M, bars[i], bars[j]), i=i, j=j, law="compatible")
    cover = M.join_unchecked(bars, P.k, P.k)
    rep.record(cover.domain().is_full(), law="charts cover P")
    trans = LawReport(f"{P.name}: transitions are locally constant translations")
    for i, j in itertools.product(range(len(P.alphas)), repeat=2):
        t = M.compose(P.alpha_inv(i), P.alphas[j])
        T = M.tangent(t)
        X, _ = points_for(M.p, 4, TABLE_LIMIT, np.random.default_rng(0), 1000)
        vals, defined = T.eval_batch(X)
        ok = True
        if defined.any():
            ok = bool(np.all(vals[defined][:, 2:] % M.p == X[defined][:, 2:] % M.p))
        trans.record(ok, i=i, j=j)
    return [rep, trans]


def vertical_bundle(P: PolyPrincipalBundle) -> tuple[list[LawReport], dict]:
    """P x T(G)_u -> T_0(P): square, brute-force pullback, bijection, chart inverses."""
    M, m, k, n, p = P.model, P.m, P.k, P.group.n, P.model.p
    tg = TangentGroup(P.group)
    reps = []
    # (a) the square
    comp = chain(M, M.times(M.t_zero(k), tg.pu), M.shuffle([k, n]), M.tangent(P.r))
    sq = LawReport(f"{P.name}: (0 x p_u*) T(r) T(q) = pi0 q 0_M")
    lhs = M.compose(comp, M.tangent(P.q))
    rhs = chain(M, M.proj0(k, n), P.q, M.t_zero(m))
    sq.record(M.equal(lhs, rhs) and pointwise_witness(lhs, rhs, all_points(p, k + n)) is None)
    reps.append(sq)
    # (b) brute-force restriction pullback of T(q) along 0_M
    TP = all_points(p, 2 * k)
    tq, _ = M.tangent(P.q).eval_batch(TP)
    base, _ = P.q.eval_batch(TP[:, :k])
    zero_m, _ = M.t_zero(m).eval_batch(base)
    keep = np.all(tq % p == zero_m % p, axis=1)
    T0 = TP[keep]
    size = LawReport(f"{P.name}: |T_0(P)| = |P| p^n")
    size.record(T0.shape[0] == p ** k * p ** n, size=int(T0.shape[0]), expected=p ** (k + n))
    reps.append(size)
    # (c) the comparison is a total bijection onto T_0(P)
    src = all_points(p, k + n)
    vals, defined = comp.eval_batch(src)
    weights = p ** np.arange(2 * k, dtype=np.int64)
    img = (vals % p) @ weights
    target = set((T0 @ weights).tolist())
    bij = LawReport(f"{P.name}: P x T(G)_u -> T_0(P) is a total bijection")
    bij.record(bool(defined.all()) and len(set(img.tolist())) == src.shape[0] and set(img.tolist()) == target)
    reps.append(bij)
    # (d) chart inverses xi_i = <p, <!, T(alpha_i) pi_G <p iota 0, 1> T(m)>>
    xis = []
    for i, a in enumerate(P.alphas):
        TG = chain(M, M.tangent(a), M.unshuffle([m, n]), M.proj1(2 * m, 2 * n))
        shift = M.pair(chain(M, TG, M.t_proj(n), P.group.inv, M.t_zero(n)), TG)
        xi = M.pair(M.t_proj(k), M.compose(M.compose(shift, tg.Tm), tg.tu))
        xis.append(xi)
    chart = LawReport(f"{P.name}: chart maps xi_i are compatible and their join inverts the comparison on T_0(P)")
    for i, j in itertools.combinations(range(len(xis)), 2):
        chart.record(compatible(M, xis[i], xis[j]), i=i, j=j)
    xi = M.join_unchecked(xis, 2 * k, k + n)
    back, dback = xi.eval_batch(vals % p)
    chart.record(bool(dback.all()) and np.array_equal(back % p, src), law="xi after comparison = 1")
    there, dthere = xi.eval_batch(T0)
    again, dagain = comp.eval_batch(there % p)
    chart.record(bool(dthere.all() and dagain.all()) and np.array_equal(again % p, T0), law="comparison after xi = 1 on T_0(P)")
    reps.append(chart)
    return reps, {"T0": int(T0.shape[0]), "P": p ** k, "p^n": p ** n}


def finset_vertical_smoke(P: Any) -> LawReport:
    """With the trivial tangent structure T = 1, T(G)_u = 1 and T_0(P) = P."""
    X = P.group.model
    b = P.bundle
    from .finset import TERMINAL, product_object

    PT = product_object(b.E, TERMINAL)
    comp = X.proj0(b.E, TERMINAL)
    T0, pa, _pc = X.pullback(b.q, X.identity(b.M))
    rep = LawReport(f"{b.name}: with T = 1 the comparison P x 1 -> T_0(P) is a bijection")
    rep.record(comp.is_total() and comp.is_injective() and len(PT) == len(b.E))
    rep.record(pa.is_total() and pa.is_injective() and len(T0) == len(b.E))
    return rep


def named_groups(model: PolyModel) -> dict[str, PolyGroup]:
    return {
        "additive1": additive_group(model, 1),
        "additive2": additive_group(model, 2),
        "quadratic": quadratic_group(model),
        "heisenberg": heisenberg_group(model),
    }
