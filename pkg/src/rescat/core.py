"""Model-independent kernel for (join) restriction categories.

A model is any object implementing :class:`RestrictionModel` (and optionally
:class:`JoinModel` / :class:`CartesianModel`).  Composition is diagrammatic:
``compose(f, g)`` means "first f, then g".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol, Sequence, runtime_checkable

from .errors import IncompatibleFamily, ModelError, ShapeMismatch

MAX_STORED_COUNTEREXAMPLES = 10


@dataclass
class LawReport:
    """Outcome of one law checked over a family of cases."""

    law: str
    cases: int = 0
    failures: int = 0
    counterexamples: list[dict] = field(default_factory=list)
    regime: str = "exhaustive"
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def record(self, ok: bool, **witness: Any) -> bool:
        self.cases += 1
        if not ok:
            self.failures += 1
            if len(self.counterexamples) < MAX_STORED_COUNTEREXAMPLES:
                self.counterexamples.append({k: _render(v) for k, v in witness.items()})
        return ok

    def note(self, text: str) -> "LawReport":
        self.notes.append(text)
        return self

    def to_dict(self) -> dict:
        return {
            "law": self.law,
            "verdict": self.verdict,
            "cases": self.cases,
            "failures": self.failures,
            "regime": self.regime,
            "counterexamples": self.counterexamples,
            "notes": self.notes,
        }


def _render(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_render(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _render(v) for k, v in value.items()}
    return repr(value)


def all_passed(reports: Iterable[LawReport]) -> bool:
    return all(r.passed for r in reports)


def single_check(law: str, ok: bool, regime: str = "exhaustive", **witness: Any) -> LawReport:
    report = LawReport(law, regime=regime)
    report.record(ok, **witness)
    return report


@runtime_checkable
class RestrictionModel(Protocol):
    """Minimal contract: a category with a restriction operator and an equality test."""

    name: str

    def source(self, f: Any) -> Any: ...

    def target(self, f: Any) -> Any: ...

    def identity(self, obj: Any) -> Any: ...

    def compose(self, f: Any, g: Any) -> Any: ...

    def bar(self, f: Any) -> Any: ...

    def equal(self, f: Any, g: Any) -> bool: ...

    def show(self, f: Any) -> str: ...


class JoinModel(RestrictionModel, Protocol):
    def nowhere(self, src: Any, tgt: Any) -> Any: ...

    def join_unchecked(self, family: Sequence[Any], src: Any, tgt: Any) -> Any: ...


class CartesianModel(RestrictionModel, Protocol):
    def terminal(self) -> Any: ...

    def product(self, a: Any, b: Any) -> Any: ...

    def proj0(self, a: Any, b: Any) -> Any: ...

    def proj1(self, a: Any, b: Any) -> Any: ...

    def pair(self, f: Any, g: Any) -> Any: ...

    def bang(self, a: Any) -> Any: ...


def times(model: CartesianModel, f: Any, g: Any) -> Any:
    """f x g as the pairing <pi0 f, pi1 g>."""
    a, b = model.source(f), model.source(g)
    return model.pair(model.compose(model.proj0(a, b), f), model.compose(model.proj1(a, b), g))


def chain(model: RestrictionModel, *maps: Any) -> Any:
    """Diagrammatic composite of a non-empty sequence."""
    out = maps[0]
    for m in maps[1:]:
        out = model.compose(out, m)
    return out


def _parallel(model: RestrictionModel, f: Any, g: Any) -> None:
    if model.source(f) != model.source(g) or model.target(f) != model.target(g):
        raise ShapeMismatch("morphisms are not parallel", f=model.show(f), g=model.show(g))


def _composable(model: RestrictionModel, f: Any, g: Any) -> bool:
    return model.target(f) == model.source(g)


def safe_compose(model: RestrictionModel, f: Any, g: Any) -> Any:
    try:
        return model.compose(f, g)
    except ShapeMismatch as exc:
        raise ModelError("model rejected a composite required by a law", f=model.show(f), g=model.show(g)) from exc


def leq(model: RestrictionModel, f: Any, g: Any) -> bool:
    """f <= g iff bar(f) g = f."""
    _parallel(model, f, g)
    return model.equal(model.compose(model.bar(f), g), f)


def compatible(model: RestrictionModel, f: Any, g: Any) -> bool:
    """f and g agree where both are defined: bar(f) g = bar(g) f."""
    _parallel(model, f, g)
    return model.equal(model.compose(model.bar(f), g), model.compose(model.bar(g), f))


def join(model: JoinModel, family: Sequence[Any], src: Any = None, tgt: Any = None) -> Any:
    """Join of a pairwise compatible family; the empty family gives the nowhere-defined map."""
    family = list(family)
    if not family:
        if src is None or tgt is None:
            raise ShapeMismatch("empty join needs explicit source and target")
        return model.nowhere(src, tgt)
    src = model.source(family[0]) if src is None else src
    tgt = model.target(family[0]) if tgt is None else tgt
    for f in family:
        if model.source(f) != src or model.target(f) != tgt:
            raise ShapeMismatch("join family is not parallel", f=model.show(f))
    for i, j in itertools.combinations(range(len(family)), 2):
        if not compatible(model, family[i], family[j]):
            raise IncompatibleFamily(
                "join family is not pairwise compatible",
                index=(i, j), f=model.show(family[i]), g=model.show(family[j]),
            )
    return model.join_unchecked(family, src, tgt)


def is_partial_inverse(model: RestrictionModel, f: Any, f_star: Any) -> bool:
    return model.equal(model.compose(f, f_star), model.bar(f)) and model.equal(
        model.compose(f_star, f), model.bar(f_star)
    )


def partial_inverse(model: RestrictionModel, f: Any) -> Any | None:
    """The partial inverse f* (ff* = bar f, f*f = bar f*) or None if f is not a partial iso."""
    candidate = model.partial_inverse_candidate(f)  # type: ignore[attr-defined]
    if candidate is None or not is_partial_inverse(model, f, candidate):
        return None
    return candidate


def compose_restrictions(model: RestrictionModel, idempotents: Sequence[Any], key: Callable[[Any], Any] = repr) -> Any:
    """Product of restriction idempotents in a canonical (sorted) order.

    Restriction idempotents commute, so the order is immaterial for the value;
    sorting makes the composite syntactically reproducible.
    """
    ordered = sorted(idempotents, key=key)
    return chain(model, *ordered)


def check_category_laws(model: RestrictionModel, sample: Sequence[Any]) -> list[LawReport]:
    unit = LawReport("category: unit laws")
    assoc = LawReport("category: associativity")
    for f in sample:
        src, tgt = model.source(f), model.target(f)
        unit.record(
            model.equal(model.compose(model.identity(src), f), f)
            and model.equal(model.compose(f, model.identity(tgt)), f),
            f=model.show(f),
        )
    for f, g in itertools.product(sample, repeat=2):
        if not _composable(model, f, g):
            continue
        fg = safe_compose(model, f, g)
        for h in sample:
            if _composable(model, g, h):
                lhs = model.compose(fg, h)
                rhs = model.compose(f, model.compose(g, h))
                assoc.record(model.equal(lhs, rhs), f=model.show(f), g=model.show(g), h=model.show(h))
    return [unit, assoc]


def check_restriction_laws(model: RestrictionModel, sample: Sequence[Any], regime: str = "exhaustive") -> list[LawReport]:
    """Evaluate the four restriction axioms and their standard consequences.

    Every applicable tuple drawn from ``sample`` is checked; one report per law.
    """
    sample = list(sample)
    reports = {
        name: LawReport(name, regime=regime)
        for name in (
            "R1: bar(f) f = f",
            "R2: bar(g) bar(f) = bar(f) bar(g)",
            "R3: bar(bar(g) f) = bar(g) bar(f)",
            "R4: f bar(h) = bar(f h) f",
            "bar is idempotent: bar(f) bar(f) = bar(f)",
            "double bar: bar(bar(f)) = bar(f)",
            "bar(f bar(g)) = bar(f g)",
            "restriction idempotents are compatible",
            "f <= g implies f compatible with g",
            "<= is reflexive",
            "<= is antisymmetric",
            "<= is transitive",
        )
    }
    r = list(reports.values())
    bars = {id(f): model.bar(f) for f in sample}
    for f in sample:
        bf = bars[id(f)]
        r[0].record(model.equal(model.compose(bf, f), f), f=model.show(f))
        r[4].record(model.equal(model.compose(bf, bf), bf), f=model.show(f))
        r[5].record(model.equal(model.bar(bf), bf), f=model.show(f))
        r[9].record(leq(model, f, f), f=model.show(f))
    for f, g in itertools.product(sample, repeat=2):
        bf, bg = bars[id(f)], bars[id(g)]
        if model.source(f) == model.source(g):
            lhs, rhs = model.compose(bg, bf), model.compose(bf, bg)
            r[1].record(model.equal(lhs, rhs), f=model.show(f), g=model.show(g), lhs=model.show(lhs), rhs=model.show(rhs))
            lhs, rhs = model.bar(model.compose(bg, f)), model.compose(bg, bf)
            r[2].record(model.equal(lhs, rhs), f=model.show(f), g=model.show(g), lhs=model.show(lhs), rhs=model.show(rhs))
            r[7].record(compatible(model, bf, bg), f=model.show(f), g=model.show(g))
        if _composable(model, f, g):
            fg = safe_compose(model, f, g)
            lhs, rhs = model.compose(f, bg), model.compose(model.bar(fg), f)
            r[3].record(model.equal(lhs, rhs), f=model.show(f), h=model.show(g), lhs=model.show(lhs), rhs=model.show(rhs))
            lhs, rhs = model.bar(model.compose(f, bg)), model.bar(fg)
            r[6].record(model.equal(lhs, rhs), f=model.show(f), g=model.show(g))
        if model.source(f) == model.source(g) and model.target(f) == model.target(g):
            f_le_g = leq(model, f, g)
            if f_le_g:
                r[8].record(compatible(model, f, g), f=model.show(f), g=model.show(g))
                if leq(model, g, f):
                    r[10].record(model.equal(f, g), f=model.show(f), g=model.show(g))
                for h in sample:
                    if model.source(h) == model.source(g) and model.target(h) == model.target(g) and leq(model, g, h):
                        r[11].record(leq(model, f, h), f=model.show(f), g=model.show(g), h=model.show(h))
    return r


def check_join_laws(
    model: JoinModel,
    families: Sequence[Sequence[Any]],
    sample: Sequence[Any],
    regime: str = "exhaustive",
) -> list[LawReport]:
    """Join laws on compatible parallel families; ``sample`` supplies probes.

    Probes g composed in front test left distributivity, parallel probes t
    test the supremum property.
    """
    names = (
        "join: bar(join s) = join bar(s)",
        "join: g (join s) = join (g s)",
        "join: upper bound s_i <= join s",
        "join: least upper bound",
        "join: singleton and idempotence",
        "join: commutative",
        "join: associative",
        "join: empty join is least",
    )
    r = [LawReport(n, regime=regime) for n in names]
    for fam in families:
        fam = list(fam)
        src, tgt = model.source(fam[0]), model.target(fam[0])
        j = join(model, fam)
        r[0].record(model.equal(model.bar(j), join(model, [model.bar(f) for f in fam], src, src)), family=[model.show(f) for f in fam])
        for i, f in enumerate(fam):
            r[2].record(leq(model, f, j), family=[model.show(f) for f in fam], index=i)
        for g in sample:
            if model.target(g) == src:
                lhs = model.compose(g, j)
                rhs = join(model, [model.compose(g, f) for f in fam], model.source(g), tgt)
                r[1].record(model.equal(lhs, rhs), g=model.show(g), family=[model.show(f) for f in fam])
            if model.source(g) == src and model.target(g) == tgt:
                if all(leq(model, f, g) for f in fam):
                    r[3].record(leq(model, j, g), t=model.show(g), family=[model.show(f) for f in fam])
                r[7].record(leq(model, model.nowhere(src, tgt), g), t=model.show(g))
        r[4].record(model.equal(join(model, fam + fam), j) and model.equal(join(model, [fam[0]]), fam[0]))
        r[5].record(model.equal(join(model, list(reversed(fam))), j))
        if len(fam) >= 2:
            inner = join(model, fam[1:])
            r[6].record(model.equal(join(model, [fam[0], inner]), j), family=[model.show(f) for f in fam])
    return r


def tot_triv_smoke(model: RestrictionModel, sample: Sequence[Any]) -> list[LawReport]:
    """Total maps form a subcategory; declaring every bar trivial is a restriction structure."""
    totals = [f for f in sample if model.equal(model.bar(f), model.identity(model.source(f)))]
    closed = LawReport("total maps closed under composition", regime="exhaustive")
    for f, g in itertools.product(totals, repeat=2):
        if _composable(model, f, g):
            fg = model.compose(f, g)
            closed.record(model.equal(model.bar(fg), model.identity(model.source(f))), f=model.show(f), g=model.show(g))
    closed.note(f"{len(totals)} total maps, {closed.cases} composable pairs enumerated")
    ids = LawReport("identities are total")
    for f in sample:
        for obj in (model.source(f), model.target(f)):
            i = model.identity(obj)
            ids.record(model.equal(model.bar(i), i), obj=repr(obj))
    triv = check_restriction_laws(TrivialRestriction(model), sample)
    for rep in triv:
        rep.law = "trivial restriction: " + rep.law
    return [closed, ids, *triv]


class TrivialRestriction:
    """The same category with every bar replaced by an identity."""

    def __init__(self, inner: RestrictionModel):
        self.inner = inner
        self.name = f"triv({inner.name})"

    def source(self, f):
        return self.inner.source(f)

    def target(self, f):
        return self.inner.target(f)

    def identity(self, obj):
        return self.inner.identity(obj)

    def compose(self, f, g):
        return self.inner.compose(f, g)

    def bar(self, f):
        return self.inner.identity(self.inner.source(f))

    def equal(self, f, g):
        return self.inner.equal(f, g)

    def show(self, f):
        return self.inner.show(f)


def restriction_pullback(model: Any, f: Any, g: Any, probes: Sequence[tuple[Any, Any]] = ()) -> tuple[tuple[Any, Any, Any] | None, list[LawReport]]:
    """Pullback cone of the cospan f: A -> B <- C: g with checks of its universal property.

    ``probes`` are pairs (r_A, r_C) with r_A f = r_C g; each must factor
    uniquely through the cone.  Returns (None, []) when the model cannot
    build the carrier.
    """
    cone = model.pullback(f, g)
    if cone is None:
        return None, []
    x, pa, pc = cone
    square = single_check("pullback square commutes", model.equal(model.compose(pa, f), model.compose(pc, g)))
    total = single_check(
        "pullback projections are total",
        model.equal(model.bar(pa), model.identity(x)) and model.equal(model.bar(pc), model.identity(x)),
    )
    univ = LawReport("pullback universal property on probes")
    for ra, rc in probes:
        h = model.pullback_factor(cone, ra, rc)
        ok = model.equal(model.compose(h, pa), model.compose(model.bar(rc), ra)) and model.equal(
            model.compose(h, pc), model.compose(model.bar(ra), rc)
        )
        ok = ok and model.jointly_monic(pa, pc)
        univ.record(ok, ra=model.show(ra), rc=model.show(rc))
    return cone, [square, total, univ]
