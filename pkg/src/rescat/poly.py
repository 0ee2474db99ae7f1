"""Piecewise polynomial partial maps over a prime field F_p.

Objects are arities (F_p^n), products are concatenation and the terminal
object is arity 0.  A morphism is a finite family of pieces (domain, body)
where the body is a tuple of polynomials.  The tangent functor differentiates
the syntax: T(f)(x, v) = (f(x), J_f(x) v).

Equality of morphisms is jet equality: equal domains, and on every overlap of
pieces all formal partial derivatives of order <= depth agree pointwise.
This is exactly pointwise agreement of T^d(f) and T^d(g) for d <= depth,
because every component of T^d(f) is multilinear in the direction variables
with the partials of f as coefficients.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import IncompatibleFamily, ModelError, ParseError, ShapeMismatch

Exp = tuple[int, ...]

FLAGGED_PRIMES = (2, 3)
MAX_ENUMERATION = 20_000_000


def _reduce_exp(e: int, p: int) -> int:
    return 0 if e == 0 else ((e - 1) % (p - 1)) + 1


class Poly:
    """A polynomial in ``arity`` variables over F_p in expanded normal form."""

    __slots__ = ("p", "arity", "terms", "_hash", "_vars")

    def __init__(self, p: int, arity: int, terms: Mapping[Exp, int] | None = None):
        self.p = p
        self.arity = arity
        clean: dict[Exp, int] = {}
        for exp, c in (terms or {}).items():
            if len(exp) != arity:
                raise ShapeMismatch(f"exponent {exp} does not have length {arity}")
            c %= p
            if c:
                clean[tuple(exp)] = c
        self.terms = clean
        self._hash: int | None = None
        self._vars: frozenset | None = None

    @classmethod
    def _raw(cls, p: int, arity: int, terms: dict) -> "Poly":
        obj = cls.__new__(cls)
        obj.p, obj.arity, obj.terms = p, arity, terms
        obj._hash = None
        obj._vars = None
        return obj

    @classmethod
    def const(cls, p: int, arity: int, c: int) -> "Poly":
        return cls(p, arity, {(0,) * arity: c})

    @classmethod
    def var(cls, p: int, arity: int, i: int) -> "Poly":
        if not 0 <= i < arity:
            raise ShapeMismatch(f"variable {i} out of range for arity {arity}")
        e = [0] * arity
        e[i] = 1
        return cls._raw(p, arity, {tuple(e): 1})

    @classmethod
    def zero(cls, p: int, arity: int) -> "Poly":
        return cls._raw(p, arity, {})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Poly) and self.p == other.p and self.arity == other.arity and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.p, self.arity, frozenset(self.terms.items())))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> frozenset:
        if self._vars is None:
            vs = set()
            for exp in self.terms:
                vs.update(i for i, e in enumerate(exp) if e)
            self._vars = frozenset(vs)
        return self._vars

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def _check(self, other: "Poly") -> None:
        if self.p != other.p or self.arity != other.arity:
            raise ShapeMismatch("polynomials live in different rings")

    def __add__(self, other: "Poly | int") -> "Poly":
        if isinstance(other, int):
            other = Poly.const(self.p, self.arity, other)
        self._check(other)
        out = dict(self.terms)
        p = self.p
        for e, c in other.terms.items():
            v = (out.get(e, 0) + c) % p
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Poly._raw(p, self.arity, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        p = self.p
        return Poly._raw(p, self.arity, {e: (-c) % p for e, c in self.terms.items()})

    def __sub__(self, other: "Poly | int") -> "Poly":
        if isinstance(other, int):
            other = Poly.const(self.p, self.arity, other)
        return self + (-other)

    def scale(self, c: int) -> "Poly":
        c %= self.p
        if not c:
            return Poly.zero(self.p, self.arity)
        return Poly._raw(self.p, self.arity, {e: (v * c) % self.p for e, v in self.terms.items()})

    def __mul__(self, other: "Poly | int") -> "Poly":
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        p = self.p
        out: dict[Exp, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = (out.get(e, 0) + c1 * c2) % p
        return Poly._raw(p, self.arity, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        result = Poly.const(self.p, self.arity, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def deriv(self, i: int) -> "Poly":
        """Formal partial derivative in variable i."""
        p = self.p
        out: dict[Exp, int] = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                v = (c * k) % p
                if v:
                    ne = e[:i] + (k - 1,) + e[i + 1:]
                    out[ne] = (out.get(ne, 0) + v) % p
        return Poly._raw(p, self.arity, {e: c for e, c in out.items() if c})

    def substitute(self, args: Sequence["Poly"], _cache: dict | None = None) -> "Poly":
        """Replace variable i by args[i]; all args share one arity."""
        if len(args) != self.arity:
            raise ShapeMismatch(f"substitution needs {self.arity} arguments, got {len(args)}")
        if not args:
            return Poly._raw(self.p, 0, dict(self.terms))
        p, m_arity = self.p, args[0].arity
        cache = _cache if _cache is not None else {}
        out: dict[Exp, int] = {}
        one = Poly.const(p, m_arity, 1)
        for e, c in self.terms.items():
            term = one.scale(c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    pw = cache.get(key)
                    if pw is None:
                        pw = args[i] ** k
                        cache[key] = pw
                    term = term * pw
            for te, tc in term.terms.items():
                out[te] = (out.get(te, 0) + tc) % p
        return Poly._raw(p, m_arity, {e: c for e, c in out.items() if c})

    def reindex(self, new_arity: int, mapping: Sequence[int]) -> "Poly":
        """Rename variable i to mapping[i] inside a ring of ``new_arity`` variables."""
        out: dict[Exp, int] = {}
        for e, c in self.terms.items():
            ne = [0] * new_arity
            for i, k in enumerate(e):
                if k:
                    ne[mapping[i]] += k
            out[tuple(ne)] = (out.get(tuple(ne), 0) + c) % self.p
        return Poly._raw(self.p, new_arity, {e: c for e, c in out.items() if c})

    def fix(self, assign: Mapping[int, int]) -> "Poly":
        """Substitute constants for some variables, keeping the arity."""
        p = self.p
        out: dict[Exp, int] = {}
        for e, c in self.terms.items():
            ne = list(e)
            for i, val in assign.items():
                k = ne[i]
                if k:
                    c = (c * pow(val, k, p)) % p
                    ne[i] = 0
                    if not c:
                        break
            if c:
                t = tuple(ne)
                out[t] = (out.get(t, 0) + c) % p
        return Poly._raw(p, self.arity, {e: c for e, c in out.items() if c})

    def function_reduce(self) -> "Poly":
        """Canonical representative of the induced function (exponents in 1..p-1)."""
        p = self.p
        out: dict[Exp, int] = {}
        for e, c in self.terms.items():
            ne = tuple(_reduce_exp(k, p) for k in e)
            out[ne] = (out.get(ne, 0) + c) % p
        return Poly._raw(p, self.arity, {e: c for e, c in out.items() if c})

    def evaluate(self, point: Sequence[int]) -> int:
        p = self.p
        total = 0
        for e, c in self.terms.items():
            t = c
            for x, k in zip(point, e):
                if k:
                    t = (t * pow(int(x), k, p)) % p
            total += t
        return total % p

    def eval_batch(self, X: np.ndarray, cache: dict | None = None) -> np.ndarray:
        """Evaluate on the rows of an (N, arity) integer array."""
        p = self.p
        cache = {} if cache is None else cache
        out = np.zeros(X.shape[0], dtype=np.int64)
        for e, c in self.terms.items():
            t = np.full(X.shape[0], c, dtype=np.int64)
            for i, k in enumerate(e):
                if k:
                    t = (t * _power(X, i, _reduce_exp(k, p), p, cache)) % p
            out += t
        return out % p

    def to_json(self) -> dict:
        terms = [{"exp": list(e), "coef": c} for e, c in sorted(self.terms.items())]
        return {"p": self.p, "arity": self.arity, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "Poly":
        try:
            return cls(data["p"], data["arity"], {tuple(t["exp"]): t["coef"] for t in data["terms"]})
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed polynomial record: {exc}") from exc

    def __repr__(self) -> str:
        return self.pretty()

    def pretty(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i}" for i in range(self.arity)]
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mon = "*".join(names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k)
            if not mon:
                parts.append(str(c))
            else:
                parts.append(mon if c == 1 else f"{c}*{mon}")
        return " + ".join(parts)


def _power(X: np.ndarray, i: int, k: int, p: int, cache: dict) -> np.ndarray:
    key = (i, k)
    got = cache.get(key)
    if got is None:
        if k == 1:
            got = X[:, i] % p
        else:
            got = (_power(X, i, k - 1, p, cache) * (X[:, i] % p)) % p
        cache[key] = got
    return got


@dataclass(frozen=True)
class PolyMor:
    """A tuple of polynomials: a total polynomial map F_p^n -> F_p^k."""

    p: int
    in_arity: int
    comps: tuple[Poly, ...]

    def __post_init__(self) -> None:
        for c in self.comps:
            if c.arity != self.in_arity or c.p != self.p:
                raise ShapeMismatch("component ring does not match the map")

    @property
    def out_arity(self) -> int:
        return len(self.comps)

    @classmethod
    def identity(cls, p: int, n: int) -> "PolyMor":
        return cls(p, n, tuple(Poly.var(p, n, i) for i in range(n)))

    @classmethod
    def select(cls, p: int, n: int, indices: Sequence[int | None]) -> "PolyMor":
        """Coordinate map x -> (x[i] for i in indices); None gives a zero component."""
        return cls(p, n, tuple(Poly.zero(p, n) if i is None else Poly.var(p, n, i) for i in indices))

    @classmethod
    def constant(cls, p: int, n: int, values: Sequence[int]) -> "PolyMor":
        return cls(p, n, tuple(Poly.const(p, n, v) for v in values))

    @classmethod
    def from_callable(cls, p: int, n: int, fn) -> "PolyMor":
        """Build from a Python function of variable polynomials."""
        xs = [Poly.var(p, n, i) for i in range(n)]
        out = fn(*xs)
        comps = []
        for c in out:
            comps.append(Poly.const(p, n, c) if isinstance(c, int) else c)
        return cls(p, n, tuple(comps))

    def then(self, other: "PolyMor") -> "PolyMor":
        """Diagrammatic composite: first self, then other."""
        if self.out_arity != other.in_arity:
            raise ShapeMismatch(f"cannot compose arity {self.in_arity}->{self.out_arity} with {other.in_arity}->{other.out_arity}")
        if not other.comps:
            return PolyMor(self.p, self.in_arity, ())
        if other.in_arity == 0:
            return PolyMor(self.p, self.in_arity, tuple(Poly.const(self.p, self.in_arity, c.terms.get((), 0)) for c in other.comps))
        cache: dict = {}
        return PolyMor(self.p, self.in_arity, tuple(c.substitute(self.comps, cache) for c in other.comps))

    def concat(self, other: "PolyMor") -> "PolyMor":
        if self.in_arity != other.in_arity:
            raise ShapeMismatch("pairing needs a common source arity")
        return PolyMor(self.p, self.in_arity, self.comps + other.comps)

    def times(self, other: "PolyMor") -> "PolyMor":
        n1, n2 = self.in_arity, other.in_arity
        n = n1 + n2
        a = tuple(c.reindex(n, range(n1)) for c in self.comps)
        b = tuple(c.reindex(n, range(n1, n)) for c in other.comps)
        return PolyMor(self.p, n, a + b)

    def tangent(self) -> "PolyMor":
        """T(f)(x, v) = (f(x), J_f(x) v) in arity 2n."""
        n, p = self.in_arity, self.p
        lift = list(range(n))
        base = tuple(c.reindex(2 * n, lift) for c in self.comps)
        dirs = [Poly.var(p, 2 * n, n + i) for i in range(n)]
        tan = []
        for c in self.comps:
            acc = Poly.zero(p, 2 * n)
            for i in c.variables():
                acc = acc + c.deriv(i).reindex(2 * n, lift) * dirs[i]
            tan.append(acc)
        return PolyMor(p, 2 * n, base + tuple(tan))

    def variables(self) -> frozenset:
        vs: set = set()
        for c in self.comps:
            vs |= c.variables()
        return frozenset(vs)

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        cache: dict = {}
        if not self.comps:
            return np.zeros((X.shape[0], 0), dtype=np.int64)
        return np.stack([c.eval_batch(X, cache) for c in self.comps], axis=1)

    def evaluate(self, point: Sequence[int]) -> tuple[int, ...]:
        return tuple(c.evaluate(point) for c in self.comps)

    def linear_part(self) -> np.ndarray | None:
        """Matrix of an affine map (rows = outputs), or None if not affine."""
        mat = np.zeros((self.out_arity, self.in_arity), dtype=np.int64)
        for r, c in enumerate(self.comps):
            for e, coef in c.terms.items():
                s = sum(e)
                if s > 1:
                    return None
                if s == 1:
                    mat[r, e.index(1)] = coef
        return mat

    def offset(self) -> tuple[int, ...]:
        return tuple(c.terms.get((0,) * self.in_arity, 0) for c in self.comps)

    def to_json(self) -> list:
        return [c.to_json() for c in self.comps]

    def __repr__(self) -> str:
        return "(" + ", ".join(c.pretty() for c in self.comps) + ")"


def encode(rows: np.ndarray, p: int) -> np.ndarray:
    """Injective integer code of short rows of F_p values."""
    if rows.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=np.int64)
    weights = p ** np.arange(rows.shape[1], dtype=np.int64)
    return (rows.astype(np.int64) % p) @ weights


@dataclass(frozen=True)
class Domain:
    """A subset of F_p^arity depending only on the coordinates ``coords``.

    The set is {x | (x[c] for c in coords) in points}.  Construction through
    :meth:`make` drops coordinates the set does not depend on, so equal sets
    have equal representations.
    """

    p: int
    arity: int
    coords: tuple[int, ...]
    points: frozenset

    @classmethod
    def make(cls, p: int, arity: int, coords: Sequence[int], points: Iterable[tuple]) -> "Domain":
        coords = tuple(coords)
        order = sorted(range(len(coords)), key=lambda k: coords[k])
        coords = tuple(coords[k] for k in order)
        pts = {tuple(int(pt[k]) % p for k in order) for pt in points}
        if not pts:
            return cls(p, arity, (), frozenset())
        changed = True
        while changed and coords:
            changed = False
            for j in range(len(coords)):
                groups: dict = {}
                for pt in pts:
                    groups.setdefault(pt[:j] + pt[j + 1:], set()).add(pt[j])
                if all(len(v) == p for v in groups.values()):
                    coords = coords[:j] + coords[j + 1:]
                    pts = set(groups)
                    changed = True
                    break
        return cls(p, arity, coords, frozenset(pts))

    @classmethod
    def full(cls, p: int, arity: int) -> "Domain":
        return cls(p, arity, (), frozenset({()}))

    @classmethod
    def empty(cls, p: int, arity: int) -> "Domain":
        return cls(p, arity, (), frozenset())

    @classmethod
    def from_points(cls, p: int, arity: int, points: Iterable[Sequence[int]]) -> "Domain":
        return cls.make(p, arity, range(arity), [tuple(pt) for pt in points])

    @classmethod
    def box(cls, p: int, arity: int, constraints: Mapping[int, Iterable[int]]) -> "Domain":
        """Product set: coordinate c ranges over constraints[c], others are free."""
        coords = sorted(constraints)
        for c in coords:
            bad = [v for v in constraints[c] if not 0 <= v < p]
            if bad:
                raise ModelError("box coordinate values must lie in F_p", coord=c, values=bad, p=p)
        pts = itertools.product(*[sorted(set(constraints[c])) for c in coords])
        return cls.make(p, arity, coords, pts)

    def is_empty(self) -> bool:
        return not self.points

    def is_full(self) -> bool:
        return not self.coords and bool(self.points)

    def size(self) -> int:
        return len(self.points) * self.p ** (self.arity - len(self.coords))

    def contains(self, point: Sequence[int]) -> bool:
        return tuple(int(point[c]) % self.p for c in self.coords) in self.points

    def mask(self, X: np.ndarray) -> np.ndarray:
        if self.is_empty():
            return np.zeros(X.shape[0], dtype=bool)
        if not self.coords:
            return np.ones(X.shape[0], dtype=bool)
        codes = encode(X[:, list(self.coords)], self.p)
        allowed = encode(np.array(sorted(self.points), dtype=np.int64), self.p)
        return np.isin(codes, allowed)

    def lift(self, coords: Sequence[int]) -> set:
        """The same set described over a superset of coordinates."""
        coords = tuple(sorted(coords))
        extra = [c for c in coords if c not in self.coords]
        pos_self = {c: k for k, c in enumerate(self.coords)}
        out = set()
        for pt in self.points:
            for ext in itertools.product(range(self.p), repeat=len(extra)):
                e = dict(zip(extra, ext))
                out.add(tuple(pt[pos_self[c]] if c in pos_self else e[c] for c in coords))
        return out

    def _same_space(self, other: "Domain") -> None:
        if self.p != other.p or self.arity != other.arity:
            raise ShapeMismatch("domains live in different spaces")

    def intersect(self, other: "Domain") -> "Domain":
        self._same_space(other)
        if self.is_empty() or other.is_empty():
            return Domain.empty(self.p, self.arity)
        if other.is_full():
            return self
        if self.is_full():
            return other
        coords = sorted(set(self.coords) | set(other.coords))
        shared = [c for c in self.coords if c in other.coords]
        ia = {c: k for k, c in enumerate(self.coords)}
        ib = {c: k for k, c in enumerate(other.coords)}
        index: dict = {}
        for q in other.points:
            index.setdefault(tuple(q[ib[c]] for c in shared), []).append(q)
        out = []
        for a in self.points:
            for b in index.get(tuple(a[ia[c]] for c in shared), []):
                out.append(tuple(a[ia[c]] if c in ia else b[ib[c]] for c in coords))
        return Domain.make(self.p, self.arity, coords, out)

    def union(self, other: "Domain") -> "Domain":
        self._same_space(other)
        if self.is_empty() or other.is_full():
            return other
        if other.is_empty() or self.is_full():
            return self
        coords = sorted(set(self.coords) | set(other.coords))
        return Domain.make(self.p, self.arity, coords, self.lift(coords) | other.lift(coords))

    def complement(self) -> "Domain":
        allpts = set(itertools.product(range(self.p), repeat=len(self.coords)))
        return Domain.make(self.p, self.arity, self.coords, allpts - set(self.points))

    def subset_of(self, other: "Domain") -> bool:
        return self.intersect(other) == self

    def widen(self, arity: int, offset: int = 0) -> "Domain":
        """The set viewed inside a bigger space, coordinates shifted by ``offset``."""
        return Domain(self.p, arity, tuple(c + offset for c in self.coords), self.points)

    def product(self, other: "Domain") -> "Domain":
        n = self.arity + other.arity
        if self.is_empty() or other.is_empty():
            return Domain.empty(self.p, n)
        coords = list(self.coords) + [c + self.arity for c in other.coords]
        pts = [a + b for a in self.points for b in other.points]
        return Domain.make(self.p, n, coords, pts)

    def preimage(self, body: PolyMor, within: "Domain") -> "Domain":
        """{x in within | body(x) in self}."""
        if self.is_full():
            return within
        if self.is_empty() or within.is_empty():
            return Domain.empty(within.p, within.arity)
        comps = [body.comps[c] for c in self.coords]
        used = set()
        for c in comps:
            used |= c.variables()
        coords = sorted(set(within.coords) | used)
        count = len(within.points) * self.p ** (len(coords) - len(within.coords))
        if count > MAX_ENUMERATION:
            raise ModelError("domain preimage too large to enumerate", points=count)
        lifted = sorted(within.lift(coords))
        pts = np.array(lifted, dtype=np.int64).reshape(len(lifted), len(coords))
        X = np.zeros((pts.shape[0], body.in_arity), dtype=np.int64)
        if coords:
            X[:, coords] = pts
        vals = np.stack([c.eval_batch(X) for c in comps], axis=1)
        codes = encode(vals, self.p)
        allowed = encode(np.array(sorted(self.points), dtype=np.int64), self.p)
        keep = pts[np.isin(codes, allowed)]
        return Domain.make(within.p, within.arity, coords, [tuple(r) for r in keep.tolist()])

    def enumerate(self) -> np.ndarray:
        """All points as an (N, arity) array (only for small sets)."""
        if self.size() > MAX_ENUMERATION:
            raise ModelError("domain too large to enumerate", size=self.size())
        if not self.points:
            return np.zeros((0, self.arity), dtype=np.int64)
        X = all_points(self.p, self.arity)
        return X[self.mask(X)]

    def to_json(self) -> list:
        return [list(pt) for pt in sorted(self.lift(range(self.arity)))]

    def __repr__(self) -> str:
        if self.is_empty():
            return "{}"
        if self.is_full():
            return f"F{self.p}^{self.arity}"
        pts = sorted(self.points)
        shown = ", ".join(str(pt) for pt in pts[:6]) + (" ..." if len(pts) > 6 else "")
        return f"{{x[{','.join(map(str, self.coords))}] in {shown}}}"


class PiecewisePolyMap:
    """A partial map given by pieces (domain, polynomial body).

    The constructor only normalizes (drops empty pieces, merges pieces with
    identical bodies).  Use :meth:`PolyModel.make` to also validate that
    overlapping pieces have equal jets.
    """

    __slots__ = ("p", "src", "tgt", "pieces", "_domain")

    def __init__(self, p: int, src: int, tgt: int, pieces: Iterable[tuple[Domain, PolyMor]]):
        self.p, self.src, self.tgt = p, src, tgt
        merged: dict[PolyMor, Domain] = {}
        for dom, body in pieces:
            if dom.arity != src or body.in_arity != src or body.out_arity != tgt:
                raise ShapeMismatch(f"piece of shape {body.in_arity}->{body.out_arity} in a map {src}->{tgt}")
            if dom.is_empty():
                continue
            merged[body] = merged[body].union(dom) if body in merged else dom
        self.pieces = tuple((d, b) for b, d in merged.items())
        self._domain: Domain | None = None

    def domain(self) -> Domain:
        if self._domain is None:
            dom = Domain.empty(self.p, self.src)
            for d, _ in self.pieces:
                dom = dom.union(d)
            self._domain = dom
        return self._domain

    def is_total(self) -> bool:
        return self.domain().is_full()

    def single_body(self) -> PolyMor | None:
        return self.pieces[0][1] if len(self.pieces) == 1 else None

    def eval_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Values and a definedness mask on the rows of X (first matching piece wins)."""
        out = np.zeros((X.shape[0], self.tgt), dtype=np.int64)
        defined = np.zeros(X.shape[0], dtype=bool)
        for dom, body in self.pieces:
            m = dom.mask(X) & ~defined
            if m.any():
                out[m] = body.eval_batch(X[m])
                defined |= m
        return out, defined

    def evaluate(self, point: Sequence[int]) -> tuple[int, ...] | None:
        for dom, body in self.pieces:
            if dom.contains(point):
                return body.evaluate(point)
        return None

    def to_json(self) -> list:
        return [{"domain": d.to_json(), "body": b.to_json()} for d, b in self.pieces]

    def __repr__(self) -> str:
        inner = "; ".join(f"{d!r} -> {b!r}" for d, b in self.pieces) or "nowhere"
        return f"<{self.src}->{self.tgt} over F{self.p}: {inner}>"


def ppmap_from_json(data: Sequence[Mapping], src: int, tgt: int, p: int) -> PiecewisePolyMap:
    try:
        pieces = []
        for piece in data:
            dom = Domain.from_points(p, src, piece["domain"])
            comps = tuple(Poly.from_json(c) for c in piece["body"])
            pieces.append((dom, PolyMor(p, src, comps)))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed piecewise map: {exc}") from exc
    return PiecewisePolyMap(p, src, tgt, pieces)


def vanishes_on(q: Poly, dom: Domain) -> tuple[int, ...] | None:
    """None if q is zero at every point of dom, else a witness point (on dom.coords)."""
    if dom.is_empty() or q.is_zero():
        return None
    r = q.function_reduce()
    if r.is_zero():
        return None
    qvars = r.variables()
    relevant = [k for k, c in enumerate(dom.coords) if c in qvars]
    if not relevant:
        return tuple(next(iter(dom.points)))
    seen = set()
    for pt in dom.points:
        key = tuple(pt[k] for k in relevant)
        if key in seen:
            continue
        seen.add(key)
        if not r.fix({dom.coords[k]: pt[k] for k in relevant}).is_zero():
            return pt
    return None


def jets_agree(a: PolyMor, b: PolyMor, dom: Domain, depth: int) -> dict | None:
    """None if every partial derivative of order <= depth agrees on dom, else a witness."""
    for j, (fa, fb) in enumerate(zip(a.comps, b.comps)):
        h = fa - fb
        if h.is_zero():
            continue
        level = {(): h}
        for order in range(depth + 1):
            nxt: dict = {}
            for idx, q in level.items():
                w = vanishes_on(q, dom)
                if w is not None:
                    return {"component": j, "derivative": list(idx), "coords": list(dom.coords), "at": list(w)}
                if order < depth:
                    for i in q.variables():
                        key = tuple(sorted(idx + (i,)))
                        if key not in nxt:
                            d = q.deriv(i)
                            if not d.is_zero():
                                nxt[key] = d
            level = nxt
            if not level:
                break
    return None


class PolyModel:
    """The Cartesian tangent join restriction category of piecewise polynomial maps."""

    def __init__(self, p: int = 5, depth: int = 3):
        if p < 2 or any(p % k == 0 for k in range(2, int(p ** 0.5) + 1)):
            raise ModelError(f"{p} is not prime")
        self.p = p
        self.depth = depth
        self.name = f"poly(F{p}, jet depth {depth})"

    @property
    def flagged(self) -> bool:
        """Small fields where Jacobians degenerate often."""
        return self.p in FLAGGED_PRIMES

    # construction helpers
    def total(self, body: PolyMor) -> PiecewisePolyMap:
        return PiecewisePolyMap(self.p, body.in_arity, body.out_arity, [(Domain.full(self.p, body.in_arity), body)])

    def poly_map(self, n: int, fn) -> PiecewisePolyMap:
        return self.total(PolyMor.from_callable(self.p, n, fn))

    def select(self, n: int, indices: Sequence[int | None]) -> PiecewisePolyMap:
        return self.total(PolyMor.select(self.p, n, indices))

    def constant(self, n: int, values: Sequence[int]) -> PiecewisePolyMap:
        return self.total(PolyMor.constant(self.p, n, values))

    def make(self, src: int, tgt: int, pieces: Iterable[tuple[Domain, PolyMor]], check_depth: int | None = None) -> PiecewisePolyMap:
        """Build a piecewise map, validating jet agreement of overlapping pieces."""
        f = PiecewisePolyMap(self.p, src, tgt, pieces)
        depth = self.depth if check_depth is None else check_depth
        for (d1, b1), (d2, b2) in itertools.combinations(f.pieces, 2):
            overlap = d1.intersect(d2)
            if not overlap.is_empty():
                w = jets_agree(b1, b2, overlap, depth)
                if w is not None:
                    raise IncompatibleFamily("pieces disagree on their overlap", witness=w)
        return f

    # restriction category
    def source(self, f: PiecewisePolyMap) -> int:
        return f.src

    def target(self, f: PiecewisePolyMap) -> int:
        return f.tgt

    def identity(self, n: int) -> PiecewisePolyMap:
        return self.total(PolyMor.identity(self.p, n))

    def compose(self, f: PiecewisePolyMap, g: PiecewisePolyMap) -> PiecewisePolyMap:
        if f.tgt != g.src:
            raise ShapeMismatch(f"cannot compose {f.src}->{f.tgt} with {g.src}->{g.tgt}")
        pieces = []
        for du, a in f.pieces:
            for dv, b in g.pieces:
                dom = dv.preimage(a, du)
                if not dom.is_empty():
                    pieces.append((dom, a.then(b)))
        return PiecewisePolyMap(self.p, f.src, g.tgt, pieces)

    def bar(self, f: PiecewisePolyMap) -> PiecewisePolyMap:
        return PiecewisePolyMap(self.p, f.src, f.src, [(f.domain(), PolyMor.identity(self.p, f.src))])

    def restrict(self, f: PiecewisePolyMap, dom: Domain) -> PiecewisePolyMap:
        return PiecewisePolyMap(self.p, f.src, f.tgt, [(d.intersect(dom), b) for d, b in f.pieces])

    def idempotent(self, dom: Domain) -> PiecewisePolyMap:
        return PiecewisePolyMap(self.p, dom.arity, dom.arity, [(dom, PolyMor.identity(self.p, dom.arity))])

    def jet_witness(self, f: PiecewisePolyMap, g: PiecewisePolyMap, depth: int | None = None) -> dict | None:
        """None if f and g are jet-equal, else a description of a difference."""
        if f.src != g.src or f.tgt != g.tgt:
            raise ShapeMismatch("jet comparison of non-parallel maps")
        depth = self.depth if depth is None else depth
        if f.domain() != g.domain():
            return {"reason": "domains differ", "left": repr(f.domain()), "right": repr(g.domain())}
        for d1, b1 in f.pieces:
            for d2, b2 in g.pieces:
                if b1 == b2:
                    continue
                overlap = d1.intersect(d2)
                if overlap.is_empty():
                    continue
                w = jets_agree(b1, b2, overlap, depth)
                if w is not None:
                    return w
        return None

    def jet_equal(self, f: PiecewisePolyMap, g: PiecewisePolyMap, depth: int | None = None) -> bool:
        return self.jet_witness(f, g, depth) is None

    def equal(self, f: PiecewisePolyMap, g: PiecewisePolyMap) -> bool:
        return self.jet_equal(f, g)

    def show(self, f: PiecewisePolyMap) -> str:
        return repr(f)

    # joins
    def nowhere(self, src: int, tgt: int) -> PiecewisePolyMap:
        return PiecewisePolyMap(self.p, src, tgt, [])

    def join_unchecked(self, family: Sequence[PiecewisePolyMap], src: int, tgt: int) -> PiecewisePolyMap:
        return PiecewisePolyMap(self.p, src, tgt, [pc for f in family for pc in f.pieces])

    def partial_inverse_candidate(self, f: PiecewisePolyMap) -> PiecewisePolyMap | None:
        """Inverse of a map whose pieces are invertible affine maps."""
        pieces = []
        for dom, body in f.pieces:
            mat = body.linear_part()
            if mat is None or mat.shape[0] != mat.shape[1]:
                return None
            inv = matrix_inverse_mod(mat, self.p)
            if inv is None:
                return None
            off = np.array(body.offset(), dtype=np.int64)
            n = f.tgt
            ys = [Poly.var(self.p, n, i) for i in range(n)]
            comps = []
            for r in range(n):
                acc = Poly.zero(self.p, n)
                for c in range(n):
                    if inv[r, c]:
                        acc = acc + (ys[c] - int(off[c])).scale(int(inv[r, c]))
                comps.append(acc)
            back = PolyMor(self.p, n, tuple(comps))
            image = dom.preimage(back, Domain.full(self.p, n))
            pieces.append((image, back))
        return PiecewisePolyMap(self.p, f.tgt, f.src, pieces)

    # Cartesian structure
    def terminal(self) -> int:
        return 0

    def product(self, a: int, b: int) -> int:
        return a + b

    def proj0(self, a: int, b: int) -> PiecewisePolyMap:
        return self.select(a + b, range(a))

    def proj1(self, a: int, b: int) -> PiecewisePolyMap:
        return self.select(a + b, range(a, a + b))

    def pair(self, f: PiecewisePolyMap, g: PiecewisePolyMap) -> PiecewisePolyMap:
        if f.src != g.src:
            raise ShapeMismatch("pairing needs a common source")
        pieces = []
        for d1, a in f.pieces:
            for d2, b in g.pieces:
                d = d1.intersect(d2)
                if not d.is_empty():
                    pieces.append((d, a.concat(b)))
        return PiecewisePolyMap(self.p, f.src, f.tgt + g.tgt, pieces)

    def pair_all(self, maps: Sequence[PiecewisePolyMap]) -> PiecewisePolyMap:
        out = maps[0]
        for m in maps[1:]:
            out = self.pair(out, m)
        return out

    def times(self, f: PiecewisePolyMap, g: PiecewisePolyMap) -> PiecewisePolyMap:
        pieces = [(d1.product(d2), a.times(b)) for d1, a in f.pieces for d2, b in g.pieces]
        return PiecewisePolyMap(self.p, f.src + g.src, f.tgt + g.tgt, pieces)

    def bang(self, a: int) -> PiecewisePolyMap:
        return self.total(PolyMor(self.p, a, ()))

    def assoc(self, a: int, b: int, c: int) -> PiecewisePolyMap:
        """Products are concatenation, so reassociation is the identity."""
        return self.identity(a + b + c)

    def point(self, n: int, values: Sequence[int]) -> PiecewisePolyMap:
        """The global element 0 -> n with the given coordinates."""
        return self.constant(0, values)

    def swap(self, a: int, b: int) -> PiecewisePolyMap:
        return self.select(a + b, list(range(a, a + b)) + list(range(a)))

    # tangent structure
    def tangent(self, f: PiecewisePolyMap) -> PiecewisePolyMap:
        """T(f): each piece (U, g) becomes (U x F_p^n, T(g))."""
        n = f.src
        return PiecewisePolyMap(self.p, 2 * n, 2 * f.tgt, [(d.widen(2 * n), b.tangent()) for d, b in f.pieces])

    def tangent_power(self, f: PiecewisePolyMap, k: int) -> PiecewisePolyMap:
        for _ in range(k):
            f = self.tangent(f)
        return f

    def t_proj(self, n: int) -> PiecewisePolyMap:
        """p: TM -> M, (x, v) -> x."""
        return self.select(2 * n, range(n))

    def t_zero(self, n: int) -> PiecewisePolyMap:
        """0: M -> TM, x -> (x, 0)."""
        return self.select(n, list(range(n)) + [None] * n)

    def t_plus(self, n: int) -> PiecewisePolyMap:
        """+: T_2M -> TM, (x, v1, v2) -> (x, v1 + v2)."""
        return self.poly_map(3 * n, lambda *z: list(z[:n]) + [z[n + i] + z[2 * n + i] for i in range(n)])

    def t_lift(self, n: int) -> PiecewisePolyMap:
        """l: TM -> T^2M, (x, v) -> (x, 0, 0, v)."""
        return self.select(2 * n, list(range(n)) + [None] * (2 * n) + list(range(n, 2 * n)))

    def t_flip(self, n: int) -> PiecewisePolyMap:
        """c: T^2M -> T^2M, (x, u, v, w) -> (x, v, u, w)."""
        return self.select(4 * n, _blocks(n, [0, 2, 1, 3]))

    def tk_proj(self, n: int, k: int, i: int) -> PiecewisePolyMap:
        """pi_i: T_kM -> TM, (x, v_1..v_k) -> (x, v_i), i counted from 0."""
        return self.select((k + 1) * n, list(range(n)) + list(range((i + 1) * n, (i + 2) * n)))

    def tk_pair(self, maps: Sequence[PiecewisePolyMap], n: int) -> PiecewisePolyMap:
        """Induced map into T_kM from maps into TM with a common base point."""
        base = self.compose(maps[0], self.t_proj(n))
        for m in maps[1:]:
            if not self.equal(self.compose(m, self.t_proj(n)), base):
                raise ModelError("maps into the tangent bundle do not share a base point")
        out = self.compose(maps[0], self.identity(2 * n))
        for m in maps[1:]:
            out = self.pair(out, self.compose(m, self.select(2 * n, range(n, 2 * n))))
        return out

    def tt2_pair(self, a: PiecewisePolyMap, b: PiecewisePolyMap, n: int) -> PiecewisePolyMap:
        """Induced map into T(T_2M) from two maps into T^2M agreeing after T(p)."""
        tp = self.tangent(self.t_proj(n))
        if not self.equal(self.compose(a, tp), self.compose(b, tp)):
            raise ModelError("maps into T^2M do not agree after T(p)")
        # T^2M = (x, u, v, w); T(T_2M) = (x, a1, a2, dx, da1, da2)
        left = self.compose(a, self.select(4 * n, _blocks(n, [0, 1])))
        mid = self.compose(b, self.select(4 * n, _blocks(n, [1])))
        right_a = self.compose(a, self.select(4 * n, _blocks(n, [2, 3])))
        right_b = self.compose(b, self.select(4 * n, _blocks(n, [3])))
        return self.pair_all([left, mid, right_a, right_b])

    def shuffle(self, ns: Sequence[int]) -> PiecewisePolyMap:
        """T(A_1) x ... x T(A_k) -> T(A_1 x ... x A_k): (a1, da1, a2, da2, ..) -> (a.., da..)."""
        total = 2 * sum(ns)
        starts, s = [], 0
        for n in ns:
            starts.append(s)
            s += 2 * n
        base = [starts[k] + i for k, n in enumerate(ns) for i in range(n)]
        tan = [starts[k] + n + i for k, n in enumerate(ns) for i in range(n)]
        return self.select(total, base + tan)

    def unshuffle(self, ns: Sequence[int]) -> PiecewisePolyMap:
        """Inverse of :meth:`shuffle`."""
        total = 2 * sum(ns)
        half = sum(ns)
        idx, off = [], 0
        for n in ns:
            idx += list(range(off, off + n)) + list(range(half + off, half + off + n))
            off += n
        return self.select(total, idx)

    def t_pair(self, maps: Sequence[PiecewisePolyMap]) -> PiecewisePolyMap:
        """<f_1, .., f_k> into T(A_1 x .. x A_k) from maps f_i into T(A_i)."""
        return self.compose(self.pair_all(maps), self.shuffle([m.tgt // 2 for m in maps]))


def _blocks(n: int, order: Sequence[int]) -> list[int]:
    return [b * n + i for b in order for i in range(n)]


def matrix_inverse_mod(mat: np.ndarray, p: int) -> np.ndarray | None:
    """Inverse of a square matrix over F_p by Gauss-Jordan, None if singular."""
    n = mat.shape[0]
    a = np.concatenate([mat % p, np.eye(n, dtype=np.int64)], axis=1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r, col] % p), None)
        if piv is None:
            return None
        a[[col, piv]] = a[[piv, col]]
        a[col] = (a[col] * pow(int(a[col, col]), -1, p)) % p
        for r in range(n):
            if r != col and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[col]) % p
    return a[:, n:]


def rank_mod(mat: np.ndarray, p: int) -> int:
    """Rank of a matrix over F_p."""
    a = np.array(mat, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if a[r, col]), None)
        if piv is None:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        a[rank] = (a[rank] * pow(int(a[rank, col]), -1, p)) % p
        for r in range(rows):
            if r != rank and a[r, col]:
                a[r] = (a[r] - a[r, col] * a[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank


def all_points(p: int, n: int) -> np.ndarray:
    """Every point of F_p^n as an (p^n, n) array, in lexicographic order."""
    if p ** n > MAX_ENUMERATION:
        raise ModelError("carrier too large to enumerate", size=p ** n)
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(p, dtype=np.int64)] * n, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def sample_points(p: int, n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, p, size=(count, n), dtype=np.int64)


def pointwise_witness(f: PiecewisePolyMap, g: PiecewisePolyMap, X: np.ndarray) -> dict | None:
    """Compare values and definedness on the rows of X; None if they agree."""
    vf, df = f.eval_batch(X)
    vg, dg = g.eval_batch(X)
    bad = (df != dg) | (df & np.any(vf != vg, axis=1))
    if not bad.any():
        return None
    k = int(np.argmax(bad))
    return {
        "at": X[k].tolist(),
        "left": vf[k].tolist() if df[k] else None,
        "right": vg[k].tolist() if dg[k] else None,
    }


def points_for(p: int, n: int, limit: int, rng: np.random.Generator, samples: int) -> tuple[np.ndarray, str]:
    """All points when p^n <= limit, otherwise a uniform sample; returns the regime too."""
    if p ** n <= limit:
        return all_points(p, n), "exhaustive"
    return sample_points(p, n, samples, rng), "sampled"


__all__ = [
    "Domain",
    "Poly",
    "PolyMor",
    "PolyModel",
    "PiecewisePolyMap",
    "all_points",
    "jets_agree",
    "matrix_inverse_mod",
    "pointwise_witness",
    "points_for",
    "ppmap_from_json",
    "rank_mod",
    "sample_points",
]

