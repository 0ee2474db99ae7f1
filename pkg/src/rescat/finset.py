"""Finite sets and partial maps: the motivating join restriction category.

Objects may carry an optional adjacency relation (an undirected graph on the
points).  It plays the role of a discrete topology: continuity of a partial map
means adjacent defined points go to equal or adjacent points.  Plain finite
sets simply have no edges.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import IncompatibleFamily, ParseError, SearchBudgetExceeded, ShapeMismatch

Point = Hashable


def key_str(point: Point) -> str:
    """Canonical string used for JSON mapping keys."""
    return point if isinstance(point, str) else json.dumps(to_jsonable(point), separators=(",", ":"))


def to_jsonable(point: Point) -> Any:
    if isinstance(point, tuple):
        return [to_jsonable(p) for p in point]
    return point


def from_jsonable(value: Any) -> Point:
    if isinstance(value, list):
        return tuple(from_jsonable(v) for v in value)
    return value


class FinObj:
    """A finite carrier with a canonical point order and optional adjacency."""

    __slots__ = ("name", "points", "edges", "_index", "_hash", "_nbrs")

    def __init__(self, name: str, points: Iterable[Point], edges: Iterable[Iterable[Point]] = ()):
        self.name = name
        self.points = tuple(points)
        self._index = {p: i for i, p in enumerate(self.points)}
        if len(self._index) != len(self.points):
            raise ShapeMismatch(f"object {name!r} has repeated points")
        keys = {key_str(p) for p in self.points}
        if len(keys) != len(self.points):
            raise ShapeMismatch(f"object {name!r} has points with colliding keys")
        es = set()
        for e in edges:
            a, b = tuple(e)
            if a not in self._index or b not in self._index or a == b:
                raise ShapeMismatch(f"bad edge {e!r} in object {name!r}")
            es.add(frozenset((a, b)))
        self.edges = frozenset(es)
        self._hash = hash((self.name, self.points, self.edges))
        self._nbrs: dict | None = None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, FinObj)
            and self._hash == other._hash
            and self.name == other.name
            and self.points == other.points
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __contains__(self, p: Point) -> bool:
        return p in self._index

    def __repr__(self) -> str:
        return f"FinObj({self.name!r}, {len(self.points)} pts)"

    def index(self, p: Point) -> int:
        return self._index[p]

    def neighbours(self, p: Point) -> frozenset:
        if self._nbrs is None:
            nb: dict = {q: set() for q in self.points}
            for e in self.edges:
                a, b = tuple(e)
                nb[a].add(b)
                nb[b].add(a)
            self._nbrs = {q: frozenset(s) for q, s in nb.items()}
        return self._nbrs[p]

    def adjacent(self, a: Point, b: Point) -> bool:
        return frozenset((a, b)) in self.edges

    def to_json(self) -> dict:
        out: dict = {"object": self.name, "points": [to_jsonable(p) for p in self.points]}
        if self.edges:
            out["edges"] = sorted(
                ([to_jsonable(p) for p in sorted(e, key=self.index)] for e in self.edges),
                key=lambda pair: (self.index(from_jsonable(pair[0])), self.index(from_jsonable(pair[1]))),
            )
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "FinObj":
        try:
            pts = [from_jsonable(p) for p in data["points"]]
            edges = [tuple(from_jsonable(p) for p in e) for e in data.get("edges", [])]
            return cls(data["object"], pts, edges)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed object record: {exc}") from exc


def cycle(name: str, n: int) -> FinObj:
    """The discrete circle Z_n: points 0..n-1, i adjacent to i+1 mod n."""
    return FinObj(name, range(n), [(i, (i + 1) % n) for i in range(n)])


def discrete(name: str, points: Iterable[Point]) -> FinObj:
    return FinObj(name, points)


TERMINAL = FinObj("1", [()])


@lru_cache(maxsize=4096)
def product_object(a: FinObj, b: FinObj) -> FinObj:
    """Carrier of ordered pairs with the strong-product adjacency."""
    pts = [(x, y) for x in a.points for y in b.points]
    edges = []
    if a.edges or b.edges:
        for (x, y), (x2, y2) in itertools.combinations(pts, 2):
            ex = x == x2 or a.adjacent(x, x2)
            ey = y == y2 or b.adjacent(y, y2)
            if ex and ey:
                edges.append(((x, y), (x2, y2)))
    return FinObj(f"({a.name}x{b.name})", pts, edges)


@dataclass(frozen=True, eq=False)
class ParMap:
    """A partial map given by its table on the domain of definition."""

    src: FinObj
    tgt: FinObj
    table: Mapping[Point, Point]
    _hash: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self) -> None:
        for k, v in self.table.items():
            if k not in self.src or v not in self.tgt:
                raise ShapeMismatch(f"table entry {k!r}->{v!r} outside {self.src.name}->{self.tgt.name}")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ParMap)
            and self.src == other.src
            and self.tgt == other.tgt
            and dict(self.table) == dict(other.table)
        )

    def __hash__(self) -> int:
        if not self._hash:
            self._hash.append(hash((self.src, self.tgt, frozenset(self.table.items()))))
        return self._hash[0]

    def __call__(self, x: Point) -> Point:
        return self.table[x]

    def get(self, x: Point, default: Any = None) -> Any:
        return self.table.get(x, default)

    @property
    def domain(self) -> frozenset:
        return frozenset(self.table)

    def defined(self, x: Point) -> bool:
        return x in self.table

    def is_total(self) -> bool:
        return len(self.table) == len(self.src)

    def is_injective(self) -> bool:
        return len(set(self.table.values())) == len(self.table)

    def image(self) -> frozenset:
        return frozenset(self.table.values())

    def is_continuous(self) -> bool:
        """Adjacent defined points are sent to equal or adjacent points."""
        for e in self.src.edges:
            a, b = tuple(e)
            if a in self.table and b in self.table:
                fa, fb = self.table[a], self.table[b]
                if fa != fb and not self.tgt.adjacent(fa, fb):
                    return False
        return True

    def __repr__(self) -> str:
        items = ", ".join(f"{k!r}->{v!r}" for k, v in sorted(self.table.items(), key=lambda kv: self.src.index(kv[0]))[:8])
        more = "" if len(self.table) <= 8 else f", ... ({len(self.table)} entries)"
        return f"<{self.src.name}->{self.tgt.name}: {items}{more}>"

    def to_json(self) -> dict:
        order = sorted(self.table, key=self.src.index)
        return {
            "map": {
                "src": self.src.to_json(),
                "tgt": self.tgt.to_json(),
                "table": {key_str(k): to_jsonable(self.table[k]) for k in order},
            }
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ParMap":
        try:
            body = data["map"]
            src, tgt = FinObj.from_json(body["src"]), FinObj.from_json(body["tgt"])
            by_key = {key_str(p): p for p in src.points}
            table = {by_key[k]: from_jsonable(v) for k, v in body["table"].items()}
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed map record: {exc}") from exc
        return cls(src, tgt, table)


def dumps(record: Any) -> str:
    """Canonical JSON text used for round-trips."""
    return json.dumps(record.to_json(), sort_keys=False, separators=(",", ":"), ensure_ascii=False)


class FinSetModel:
    """Finite sets and partial maps with joins, products and pullbacks."""

    name = "finset"

    def __init__(self, size_bound: int = 64):
        self.size_bound = size_bound

    # restriction category
    def source(self, f: ParMap) -> FinObj:
        return f.src

    def target(self, f: ParMap) -> FinObj:
        return f.tgt

    def identity(self, a: FinObj) -> ParMap:
        return ParMap(a, a, {x: x for x in a.points})

    def compose(self, f: ParMap, g: ParMap) -> ParMap:
        if f.tgt != g.src:
            raise ShapeMismatch(f"cannot compose {f.src.name}->{f.tgt.name} with {g.src.name}->{g.tgt.name}")
        gt = g.table
        return ParMap(f.src, g.tgt, {x: gt[y] for x, y in f.table.items() if y in gt})

    def bar(self, f: ParMap) -> ParMap:
        return ParMap(f.src, f.src, {x: x for x in f.table})

    def equal(self, f: ParMap, g: ParMap) -> bool:
        return f == g

    def show(self, f: ParMap) -> str:
        return repr(f)

    def regime(self, objects: Iterable[FinObj]) -> str:
        return "exhaustive" if all(len(o) <= self.size_bound for o in objects) else "sampled"

    # joins
    def nowhere(self, src: FinObj, tgt: FinObj) -> ParMap:
        return ParMap(src, tgt, {})

    def join_unchecked(self, family: Sequence[ParMap], src: FinObj, tgt: FinObj) -> ParMap:
        table: dict = {}
        for f in family:
            table.update(f.table)
        return ParMap(src, tgt, table)

    def join(self, family: Sequence[ParMap], src: FinObj | None = None, tgt: FinObj | None = None) -> ParMap:
        """Table union, raising on the first disagreement."""
        family = list(family)
        if not family:
            return self.nowhere(src, tgt)
        src, tgt = family[0].src, family[0].tgt
        table: dict = {}
        for i, f in enumerate(family):
            if f.src != src or f.tgt != tgt:
                raise ShapeMismatch("join family is not parallel")
            for x, y in f.table.items():
                if table.setdefault(x, y) != y:
                    raise IncompatibleFamily("join family disagrees", point=x, index=i)
        return ParMap(src, tgt, table)

    def restrict(self, f: ParMap, subset: Iterable[Point]) -> ParMap:
        s = set(subset)
        return ParMap(f.src, f.tgt, {x: y for x, y in f.table.items() if x in s})

    def idempotent(self, a: FinObj, subset: Iterable[Point]) -> ParMap:
        s = set(subset)
        return ParMap(a, a, {x: x for x in a.points if x in s})

    def from_function(self, src: FinObj, tgt: FinObj, fn: Callable[[Point], Point], domain: Iterable[Point] | None = None) -> ParMap:
        pts = src.points if domain is None else domain
        return ParMap(src, tgt, {x: fn(x) for x in pts})

    def partial_inverse_candidate(self, f: ParMap) -> ParMap | None:
        if not f.is_injective():
            return None
        return ParMap(f.tgt, f.src, {y: x for x, y in f.table.items()})

    # Cartesian structure
    def terminal(self) -> FinObj:
        return TERMINAL

    def product(self, a: FinObj, b: FinObj) -> FinObj:
        return product_object(a, b)

    def proj0(self, a: FinObj, b: FinObj) -> ParMap:
        return ParMap(product_object(a, b), a, {(x, y): x for x in a.points for y in b.points})

    def proj1(self, a: FinObj, b: FinObj) -> ParMap:
        return ParMap(product_object(a, b), b, {(x, y): y for x in a.points for y in b.points})

    def pair(self, f: ParMap, g: ParMap) -> ParMap:
        if f.src != g.src:
            raise ShapeMismatch("pairing needs a common source")
        gt = g.table
        return ParMap(f.src, product_object(f.tgt, g.tgt), {x: (y, gt[x]) for x, y in f.table.items() if x in gt})

    def times(self, f: ParMap, g: ParMap) -> ParMap:
        ft, gt = f.table, g.table
        return ParMap(
            product_object(f.src, g.src),
            product_object(f.tgt, g.tgt),
            {(x, y): (ft[x], gt[y]) for x in f.src.points if x in ft for y in g.src.points if y in gt},
        )

    def bang(self, a: FinObj) -> ParMap:
        return ParMap(a, TERMINAL, {x: () for x in a.points})

    def point(self, a: FinObj, x: Point) -> ParMap:
        return ParMap(TERMINAL, a, {(): x})

    def assoc(self, a: FinObj, b: FinObj, c: FinObj) -> ParMap:
        """Coherence renaming (A x B) x C -> A x (B x C)."""
        left = product_object(product_object(a, b), c)
        right = product_object(a, product_object(b, c))
        return ParMap(left, right, {((x, y), z): (x, (y, z)) for ((x, y), z) in left.points})

    def swap(self, a: FinObj, b: FinObj) -> ParMap:
        return ParMap(product_object(a, b), product_object(b, a), {(x, y): (y, x) for x in a.points for y in b.points})

    # restriction pullbacks
    def pullback(self, f: ParMap, g: ParMap):
        """Set-theoretic pullback {(a, c) | f(a) = g(c)} with total projections."""
        if f.tgt != g.tgt:
            raise ShapeMismatch("cospan legs must share a target")
        pts = [(a, c) for a in f.src.points if a in f.table for c in g.src.points if c in g.table and f.table[a] == g.table[c]]
        name = f"({f.src.name}x[{f.tgt.name}]{g.src.name})"
        edges = [
            (p, q)
            for p, q in itertools.combinations(pts, 2)
            if (p[0] == q[0] or f.src.adjacent(p[0], q[0])) and (p[1] == q[1] or g.src.adjacent(p[1], q[1]))
        ] if (f.src.edges or g.src.edges) else []
        x = FinObj(name, pts, edges)
        pa = ParMap(x, f.src, {p: p[0] for p in pts})
        pc = ParMap(x, g.src, {p: p[1] for p in pts})
        return x, pa, pc

    def pullback_factor(self, cone, ra: ParMap, rc: ParMap) -> ParMap:
        x = cone[0]
        table = {z: (ra.table[z], rc.table[z]) for z in ra.table if z in rc.table}
        return ParMap(ra.src, x, table)

    def jointly_monic(self, pa: ParMap, pc: ParMap) -> bool:
        seen = {(pa.table[x], pc.table[x]) for x in pa.src.points}
        return len(seen) == len(pa.src)


def all_partial_maps(a: FinObj, b: FinObj) -> Iterator[ParMap]:
    """Every partial map a -> b; there are (|b|+1)^|a| of them."""
    options = [None, *b.points]
    for choice in itertools.product(options, repeat=len(a)):
        yield ParMap(a, b, {x: y for x, y in zip(a.points, choice) if y is not None})


def random_parmap(rng: random.Random, a: FinObj, b: FinObj, density: float = 0.7, injective: bool = False) -> ParMap:
    dom = [x for x in a.points if rng.random() < density]
    if injective:
        dom = dom[: len(b)]
        vals = rng.sample(list(b.points), len(dom))
    else:
        vals = [rng.choice(b.points) for _ in dom] if b.points else []
        if not b.points:
            dom = []
    return ParMap(a, b, dict(zip(dom, vals)))


@dataclass
class SearchResult:
    """Outcome of an isomorphism search: ``found`` is None when none exists."""

    found: ParMap | None
    nodes: int
    pruned_by_cardinality: bool = False

    @property
    def status(self) -> str:
        return "FOUND" if self.found is not None else "NONE"


def iso_search(
    a: FinObj,
    b: FinObj,
    *,
    candidates: Callable[[Point], Iterable[Point]] | None = None,
    consistent: Callable[[dict, Point, Point], bool] | None = None,
    accept: Callable[[ParMap], bool] | None = None,
    labels: tuple[Callable[[Point], Any], Callable[[Point], Any]] | None = None,
    respect_edges: bool = True,
    budget: int = 10**6,
    order: Sequence[Point] | None = None,
) -> SearchResult:
    """Backtracking search for a total bijection a -> b satisfying a constraint.

    ``labels`` gives fibre labels on both sides; points may only map to
    points with the same label and the label fibre cardinalities must agree
    (otherwise NONE without search).  ``consistent(partial, x, y)`` prunes
    partial assignments, ``accept`` is the final predicate.  With
    ``respect_edges`` the bijection must be a graph isomorphism.  Raises
    SearchBudgetExceeded when more than ``budget`` nodes are visited.
    """
    if len(a) != len(b):
        return SearchResult(None, 0, True)
    if labels is not None:
        la, lb = labels
        count_a: dict = {}
        count_b: dict = {}
        for x in a.points:
            count_a[la(x)] = count_a.get(la(x), 0) + 1
        for y in b.points:
            count_b[lb(y)] = count_b.get(lb(y), 0) + 1
        if count_a != count_b:
            return SearchResult(None, 0, True)
        by_label: dict = {}
        for y in b.points:
            by_label.setdefault(lb(y), []).append(y)
    if respect_edges and len(a.edges) != len(b.edges):
        return SearchResult(None, 0, True)
    if order is None:
        order = _bfs_order(a)
    nodes = 0
    assign: dict = {}
    inverse: dict = {}

    def options(x: Point) -> Iterable[Point]:
        if candidates is not None:
            return candidates(x)
        if labels is not None:
            return by_label.get(labels[0](x), [])
        return b.points

    def ok(x: Point, y: Point) -> bool:
        if y in inverse:
            return False
        if respect_edges:
            for x2 in a.neighbours(x):
                if x2 in assign and not b.adjacent(y, assign[x2]):
                    return False
            for y2 in b.neighbours(y):
                if y2 in inverse and not a.adjacent(x, inverse[y2]):
                    return False
        return consistent is None or consistent(assign, x, y)

    def rec(k: int) -> ParMap | None:
        nonlocal nodes
        if k == len(order):
            cand = ParMap(a, b, dict(assign))
            return cand if accept is None or accept(cand) else None
        x = order[k]
        for y in options(x):
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded("isomorphism search exceeded its node budget", budget=budget)
            if not ok(x, y):
                continue
            assign[x] = y
            inverse[y] = x
            found = rec(k + 1)
            if found is not None:
                return found
            del assign[x]
            del inverse[y]
        return None

    return SearchResult(rec(0), nodes)


def _bfs_order(a: FinObj) -> list:
    seen: list = []
    mark: set = set()
    for start in a.points:
        if start in mark:
            continue
        queue = [start]
        mark.add(start)
        while queue:
            x = queue.pop(0)
            seen.append(x)
            for y in sorted(a.neighbours(x), key=a.index):
                if y not in mark:
                    mark.add(y)
                    queue.append(y)
    return seen


def hom_sample(model: FinSetModel, objects: Sequence[FinObj], rng: random.Random, per_pair: int = 3) -> list[ParMap]:
    """Identities, empty maps and random partial maps between the given objects."""
    out: list[ParMap] = []
    for a in objects:
        out.append(model.identity(a))
    for a, b in itertools.product(objects, repeat=2):
        out.append(model.nowhere(a, b))
        for _ in range(per_pair):
            out.append(random_parmap(rng, a, b, density=rng.choice([0.3, 0.7, 1.0])))
    return out


def finset_law_report_regime(model: FinSetModel, maps: Iterable[ParMap]) -> str:
    objs = set()
    for f in maps:
        objs.add(f.src)
        objs.add(f.tgt)
    return model.regime(objs)


__all__ = [
    "FinObj",
    "ParMap",
    "FinSetModel",
    "SearchResult",
    "TERMINAL",
    "all_partial_maps",
    "cycle",
    "discrete",
    "dumps",
    "hom_sample",
    "iso_search",
    "key_str",
    "product_object",
    "random_parmap",
]
