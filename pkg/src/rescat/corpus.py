"""The shipped finite examples: C2 and C3 cocycles over the 8-point circle."""

from __future__ import annotations

from functools import lru_cache

from .finset import FinObj, FinSetModel, ParMap, cycle
from .gbundles import GAtlas, GBundle, GroupObject, cyclic_group, permutation_action, principal_from_cocycle, gbundle_from_cocycle, trivial_action

MODEL = FinSetModel()

#: chart supports on Z8: two overlapping arcs meeting at 0 and 4
CHART_0 = (0, 1, 2, 3, 4)
CHART_1 = (4, 5, 6, 7, 0)


def circle() -> FinObj:
    return cycle("Z8", 8)


def c2() -> GroupObject:
    return cyclic_group(2, "C2", ["e", "s"], MODEL)


def c3() -> GroupObject:
    return cyclic_group(3, "C3", [0, 1, 2], MODEL)


def two_chart_cocycle(g: GroupObject, at4: object, at0: object | None, name_base: FinObj | None = None) -> GAtlas:
    """tau_01 = at4 at 4 and at0 at 0 (omitted when None); tau_10 = tau_01 iota; tau_ii = u on chart i."""
    M = name_base or circle()
    e = g.unit
    t01 = {4: at4}
    if at0 is not None:
        t01[0] = at0
    tau = {
        (0, 0): ParMap(M, g.carrier, {x: e for x in CHART_0}),
        (1, 1): ParMap(M, g.carrier, {x: e for x in CHART_1}),
        (0, 1): ParMap(M, g.carrier, t01),
        (1, 0): ParMap(M, g.carrier, {x: g.inverse(v) for x, v in t01.items()}),
    }
    return GAtlas(M, g, tau, 2)


@lru_cache(maxsize=None)
def twisted_c2() -> GBundle:
    """The discrete Moebius band: one sign flip on the overlap at 0."""
    g = c2()
    return principal_from_cocycle(two_chart_cocycle(g, "e", "s"), name="twisted C2 over Z8")


@lru_cache(maxsize=None)
def untwisted_c2() -> GBundle:
    g = c2()
    return principal_from_cocycle(two_chart_cocycle(g, "e", "e"), name="untwisted C2 over Z8")


@lru_cache(maxsize=None)
def shrunken_c2() -> GBundle:
    """The twisted atlas with tau_01 undefined at 0: a bundle that is not totally fibred."""
    g = c2()
    return principal_from_cocycle(two_chart_cocycle(g, "e", None), name="shrunken C2 over Z8")


@lru_cache(maxsize=None)
def twisted_c3(convention: str = "def") -> GBundle:
    """Monodromy 1 in C3; the two cocycle orientations give the inverse monodromy."""
    g = c3()
    return principal_from_cocycle(two_chart_cocycle(g, 0, 1), convention, name=f"twisted C3 over Z8 ({convention})")


@lru_cache(maxsize=None)
def untwisted_c3() -> GBundle:
    g = c3()
    return principal_from_cocycle(two_chart_cocycle(g, 0, 0), name="untwisted C3 over Z8")


def sign_fibre() -> FinObj:
    return FinObj("S", ["+", "-"])


def associated_c2(kind: str = "regular") -> GBundle:
    """C2 acting on a two-point fibre, regularly (swap) or trivially, along the twisted cocycle."""
    g = c2()
    F = sign_fibre()
    if kind == "regular":
        a = permutation_action(g, F, lambda h, f: f if h == "e" else {"+": "-", "-": "+"}[f])
    elif kind == "trivial":
        a = trivial_action(g, F)
    else:
        raise ValueError(f"unknown action kind {kind!r}")
    return gbundle_from_cocycle(two_chart_cocycle(g, "e", "s"), F, a, name=f"twisted C2 on S ({kind})")


def product_over(g: GroupObject, F: FinObj, a: ParMap, name: str) -> GBundle:
    """Same two charts, identity transitions."""
    return gbundle_from_cocycle(two_chart_cocycle(g, g.unit, g.unit), F, a, name=name)


def principal_bundles() -> list[GBundle]:
    return [twisted_c2(), untwisted_c2(), shrunken_c2(), twisted_c3(), untwisted_c3()]
