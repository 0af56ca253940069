"""Bohr systems ``B_eta = {x : ||gamma(x)|| < eta * delta(gamma) for all gamma}``.

Membership is exact.  Each element ``x`` has a radius
``r(x) = max_gamma ||gamma(x)|| / delta(gamma)`` and ``x`` lies in ``B_eta``
exactly when ``r(x) < eta``, so the family only changes at these radii.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .covering import covering_number_exact
from .errors import EtaOutOfRange, GroupMismatch, LambdaOutOfRange
from .groups import FiniteAbelianGroup, Subgroup, annihilator


def as_fraction(value) -> Fraction:
    """Exact rational for ints, Fractions, rational strings, or floats (binary value)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    return Fraction(float(value))


def fraction_at_least(value: float) -> Fraction:
    """Smallest float at or above ``value``, as an exact rational."""
    f = Fraction(value)
    if f < value:
        f = Fraction(math.nextafter(value, math.inf))
    return f


@dataclass(frozen=True, eq=False)
class BohrSystem:
    """Generator pair ``(Gamma, delta)``.

    Parameters
    ----------
    group : FiniteAbelianGroup
    characters : tuple of int
        Character indices.  Repeated characters keep their smallest width.
    widths : tuple of Fraction
        Positive width per character.
    """

    group: FiniteAbelianGroup
    characters: tuple[int, ...]
    widths: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.characters) != len(self.widths):
            raise ValueError("one width per character")
        merged: dict[int, Fraction] = {}
        for a, w in zip(self.characters, self.widths):
            w = as_fraction(w)
            if w <= 0:
                raise ValueError("widths must be positive")
            a = int(a)
            merged[a] = min(w, merged.get(a, w))
        chars = tuple(sorted(merged))
        object.__setattr__(self, "characters", chars)
        object.__setattr__(self, "widths", tuple(merged[a] for a in chars))

    @property
    def rank(self) -> int:
        return len(self.characters)

    @cached_property
    def radii(self) -> tuple[Fraction, ...]:
        G = self.group
        if not self.characters:
            return tuple(Fraction(0) for _ in range(G.order))
        L = G.exponent_lcm
        dist = G.distance_table[list(self.characters)]
        approx = dist / (L * np.array([float(w) for w in self.widths]))[:, None]
        top = approx.max(axis=0)
        out = []
        for x in range(G.order):
            near = np.flatnonzero(approx[:, x] >= top[x] * (1 - 1e-9))
            out.append(max(Fraction(int(dist[i, x]), L) / self.widths[i] for i in near))
        return tuple(out)

    @cached_property
    def _levels(self):
        distinct = sorted(set(self.radii))
        rank = np.array([bisect.bisect_left(distinct, r) for r in self.radii], dtype=np.int64)
        return distinct, rank

    def bohr_set(self, eta=1) -> frozenset[int]:
        eta = as_fraction(eta)
        if not 0 < eta <= 1:
            raise EtaOutOfRange(f"eta = {eta} outside (0, 1]")
        distinct, rank = self._levels
        k = bisect.bisect_left(distinct, eta)
        return frozenset(np.flatnonzero(rank < k).tolist())

    def __call__(self, eta=1) -> frozenset[int]:
        return self.bohr_set(eta)


def bohr_set(B: BohrSystem, eta=1) -> frozenset[int]:
    return B.bohr_set(eta)


def constant_system(group: FiniteAbelianGroup, characters: Iterable[int], width) -> BohrSystem:
    chars = tuple(characters)
    w = as_fraction(width)
    return BohrSystem(group, chars, tuple(w for _ in chars))


def meet(B: BohrSystem, C: BohrSystem) -> BohrSystem:
    """``(B wedge C)_eta = B_eta & C_eta``, generated by the union of characters with the smaller width."""
    if B.group != C.group:
        raise GroupMismatch("Bohr systems on different groups")
    return BohrSystem(B.group, B.characters + C.characters, B.widths + C.widths)


def dilate(B: BohrSystem, lam) -> BohrSystem:
    """``(lam B)_eta = B_{lam eta}``."""
    lam = as_fraction(lam)
    if not 0 < lam <= 1:
        raise LambdaOutOfRange(f"lambda = {lam} outside (0, 1]")
    return BohrSystem(B.group, B.characters, tuple(w * lam for w in B.widths))


def width(B: BohrSystem) -> Fraction:
    """Largest stored width (0 for the empty frequency set)."""
    return max(B.widths, default=Fraction(0))


def critical_radii(B: BohrSystem) -> list[Fraction]:
    """Sorted distinct ``||gamma(x)|| / delta(gamma)`` in ``(0, 1]``."""
    G = B.group
    L = G.exponent_lcm
    values = set()
    for a, w in zip(B.characters, B.widths):
        for d in np.unique(G.distance_table[a]).tolist():
            r = Fraction(d, L) / w
            if 0 < r <= 1:
                values.add(r)
    return sorted(values)


def breakpoints(B: BohrSystem) -> list[Fraction]:
    """Element radii in ``(0, 1]``: the only ``eta`` where ``B_eta`` changes."""
    distinct, _ = B._levels
    return [r for r in distinct if 0 < r <= 1]


def eta_grid(B: BohrSystem) -> list[Fraction]:
    """Candidate ``eta`` values covering every joint step of ``B_eta`` and ``B_{eta/2}``."""
    pts = set(breakpoints(B))
    pts |= {2 * r for r in pts if 2 * r <= 1}
    pts.add(Fraction(1))
    ordered = sorted(pts)
    mids = {(a + b) / 2 for a, b in zip(ordered, ordered[1:])}
    return sorted(set(ordered) | mids)


@dataclass(frozen=True)
class DoublingProfile:
    worst_cover: int
    worst_eta: Fraction
    covers: dict

    @property
    def dimension(self) -> float:
        return math.log2(self.worst_cover)


def doubling_profile(B: BohrSystem, node_budget: int | None = None) -> DoublingProfile:
    """``C(B_eta; B_{eta/2})`` over the candidate grid, keeping the worst."""
    cache: dict[tuple[frozenset, frozenset], int] = {}
    covers = {}
    worst = (0, Fraction(1))
    kwargs = {} if node_budget is None else {"node_budget": node_budget}
    for eta in eta_grid(B):
        key = (B.bohr_set(eta), B.bohr_set(eta / 2))
        if key not in cache:
            cache[key], _ = covering_number_exact(key[0], key[1], B.group, **kwargs)
        covers[eta] = cache[key]
        if cache[key] > worst[0]:
            worst = (cache[key], eta)
    return DoublingProfile(worst[0], worst[1], covers)


def doubling_dimension(B: BohrSystem) -> float:
    """``dim* B = sup_eta log2 C(B_eta; B_{eta/2})``."""
    return doubling_profile(B).dimension


def dimension_interval(B: BohrSystem) -> tuple[float, float]:
    """Certified interval ``[dim* B, 2 dim* B]`` for the difference-covering dimension."""
    d = doubling_dimension(B)
    return d, 2 * d


@dataclass(frozen=True)
class GrowthReport:
    width_ok: bool
    worst_doubling_cover: int
    cover_one_eighth: int
    sandwich_holds: bool | None

    @property
    def doubling_dimension(self) -> float:
        return math.log2(self.worst_doubling_cover)

    @property
    def log2_cover_one_eighth(self) -> float:
        return math.log2(self.cover_one_eighth)


def growth_check(B: BohrSystem) -> GrowthReport:
    """Compare ``dim* B``, ``log2 C(B_1; B_{1/8})`` and ``3 dim* B`` in exact integers.

    When the stored width is not below 1/4 the hypothesis is unmet and
    ``sandwich_holds`` is None.
    """
    width_ok = width(B) < Fraction(1, 4)
    worst = doubling_profile(B).worst_cover
    c18, _ = covering_number_exact(B.bohr_set(1), B.bohr_set(Fraction(1, 8)), B.group)
    holds = (worst <= c18 <= worst**3) if width_ok else None
    return GrowthReport(width_ok, worst, c18, holds)


def subgroup_to_bohr(H: Subgroup) -> BohrSystem:
    """Annihilator of ``H`` at constant width ``1/|G|``; every ``B_eta`` equals ``H``."""
    G = H.group
    return constant_system(G, sorted(annihilator(G, H.members)), Fraction(1, G.order))


def bohr_to_json(B: BohrSystem) -> dict:
    return {
        "group": list(B.group.factors),
        "characters": [list(B.group.element(a)) for a in B.characters],
        "widths": [str(w) for w in B.widths],
    }


def bohr_from_json(data: dict, group: FiniteAbelianGroup | None = None) -> BohrSystem:
    if group is None:
        group = FiniteAbelianGroup(tuple(data["group"]))
    chars = [group.index(c) for c in data["characters"]]
    widths = [Fraction(w) for w in data["widths"]]
    return BohrSystem(group, tuple(chars), tuple(widths))


def systems_equal_as_sets(B: BohrSystem, C: BohrSystem, etas: Sequence[Fraction] | None = None) -> bool:
    """Set equality of ``B_eta`` and ``C_eta`` at every joint breakpoint and midpoint."""
    if etas is None:
        pts = sorted(set(breakpoints(B)) | set(breakpoints(C)) | {Fraction(1)})
        etas = sorted(set(pts) | {(a + b) / 2 for a, b in zip([Fraction(0)] + pts, pts)})
    return all(B.bohr_set(e) == C.bohr_set(e) for e in etas)
