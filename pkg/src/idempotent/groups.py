"""Finite Abelian groups given as explicit products of cyclic factors.

Elements are addressed by their index in the lexicographic enumeration of
coordinate tuples, so ``Z/n`` elements coincide with their residues.  Sets of
elements are ``frozenset`` objects of indices.  Characters use the same
indexing: the character with index ``a`` has coefficient tuple
``group.element(a)`` and evaluates to ``exp(2 pi i sum_j a_j x_j / n_j)``.

>>> G = FiniteAbelianGroup((4, 2))
>>> G.order
8
>>> G.element(G.add(G.index((3, 1)), G.index((2, 1))))
(1, 0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import IllFormedHomomorphism, OrderLimitExceeded

DEFAULT_ORDER_LIMIT = 256


def circle_norm(theta: Fraction) -> Fraction:
    """Distance from the rational angle ``theta`` to the nearest integer.

    >>> circle_norm(Fraction(3, 4))
    Fraction(1, 4)
    """
    frac = Fraction(theta) % 1
    return min(frac, 1 - frac)


def parse_group_spec(spec: str) -> "FiniteAbelianGroup":
    """Parse ``"2,4"`` into ``Z/2 x Z/4``."""
    try:
        factors = tuple(int(tok) for tok in spec.replace(" ", "").split(",") if tok)
    except ValueError as exc:
        raise ValueError(f"malformed group spec {spec!r}") from exc
    if not factors:
        raise ValueError(f"malformed group spec {spec!r}")
    return FiniteAbelianGroup(factors)


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """The group ``Z/n_1 x ... x Z/n_k``.

    Parameters
    ----------
    factors : tuple of int
        Cyclic orders, each at least 1.
    """

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(n) for n in self.factors)
        if not factors or any(n < 1 for n in factors):
            raise ValueError(f"cyclic factors must be positive, got {self.factors!r}")
        object.__setattr__(self, "factors", factors)

    def __repr__(self):
        return "Z/" + " x Z/".join(str(n) for n in self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    @cached_property
    def order(self) -> int:
        return math.prod(self.factors)

    @cached_property
    def strides(self) -> np.ndarray:
        strides = np.ones(self.rank, dtype=np.int64)
        for j in range(self.rank - 2, -1, -1):
            strides[j] = strides[j + 1] * self.factors[j + 1]
        return strides

    @cached_property
    def coords(self) -> np.ndarray:
        """``(order, rank)`` array of coordinates in canonical order."""
        if self.order == 0:
            return np.zeros((0, self.rank), dtype=np.int64)
        return np.array(list(product(*(range(n) for n in self.factors))), dtype=np.int64).reshape(
            self.order, self.rank
        )

    @cached_property
    def exponent_lcm(self) -> int:
        return math.lcm(*self.factors)

    def elements(self) -> range:
        return range(self.order)

    def element(self, index: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.coords[index])

    def index(self, coordinates: Sequence[int]) -> int:
        if len(coordinates) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(coordinates)}")
        return int(sum((int(c) % n) * int(s) for c, n, s in zip(coordinates, self.factors, self.strides)))

    def indices_of(self, coordinate_rows: np.ndarray) -> np.ndarray:
        """Vectorised ``index`` for an ``(N, rank)`` integer array."""
        rows = np.mod(np.asarray(coordinate_rows, dtype=np.int64), np.array(self.factors, dtype=np.int64))
        return rows @ self.strides

    def set_of(self, elements: Iterable) -> frozenset[int]:
        """Index set from coordinate tuples (or plain residues when rank is 1)."""
        out = set()
        for e in elements:
            if isinstance(e, (int, np.integer)):
                if self.rank != 1:
                    raise ValueError("bare integers only name elements of cyclic groups")
                out.add(int(e) % self.factors[0])
            else:
                out.add(self.index(tuple(e)))
        return frozenset(out)

    @property
    def zero(self) -> int:
        return 0

    @cached_property
    def add_table(self) -> np.ndarray:
        idx = self.indices_of(self.coords[:, None, :] + self.coords[None, :, :])
        return idx.reshape(self.order, self.order)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return self.indices_of(-self.coords)

    def add(self, x: int, y: int) -> int:
        return int(self.add_table[x, y])

    def neg(self, x: int) -> int:
        return int(self.neg_table[x])

    def sub(self, x: int, y: int) -> int:
        return int(self.add_table[x, self.neg_table[y]])

    def multiply(self, k: int, x: int) -> int:
        return self.index(tuple(k * c for c in self.element(x)))

    def element_order(self, x: int) -> int:
        return math.lcm(*(n // math.gcd(n, c) for n, c in zip(self.factors, self.element(x))))

    # set arithmetic -------------------------------------------------------

    def mask(self, S: Iterable[int]) -> np.ndarray:
        m = np.zeros(self.order, dtype=bool)
        m[list(S)] = True
        return m

    def measure(self, S: Iterable[int]) -> float:
        return len(frozenset(S)) / self.order

    def sumset(self, A: Iterable[int], B: Iterable[int]) -> frozenset[int]:
        a = np.fromiter(A, dtype=np.int64)
        b = np.fromiter(B, dtype=np.int64)
        if a.size == 0 or b.size == 0:
            return frozenset()
        return frozenset(np.unique(self.add_table[np.ix_(a, b)]).tolist())

    def negset(self, A: Iterable[int]) -> frozenset[int]:
        return frozenset(self.neg_table[list(A)].tolist())

    def diffset(self, A: Iterable[int], B: Iterable[int]) -> frozenset[int]:
        return self.sumset(A, self.negset(B))

    def translate_set(self, A: Iterable[int], x: int) -> frozenset[int]:
        return frozenset(self.add_table[x, list(A)].tolist())

    def iterated_sumset(self, X: Iterable[int], n: int) -> frozenset[int]:
        """``nX``, the ``n``-fold sumset; ``0X = {0}``."""
        out = frozenset({0})
        X = frozenset(X)
        for _ in range(n):
            out = self.sumset(out, X)
        return out

    def is_symmetric(self, X: Iterable[int]) -> bool:
        X = frozenset(X)
        return self.negset(X) == X

    # characters -------------------------------------------------------------

    @cached_property
    def phase_table(self) -> np.ndarray:
        """``P[a, x]`` with ``gamma_a(x) = exp(2 pi i P[a, x] / L)``, ``L = exponent_lcm``."""
        L = self.exponent_lcm
        scale = np.array([L // n for n in self.factors], dtype=np.int64)
        weighted = self.coords * scale
        return np.mod(weighted @ self.coords.T, L)

    @cached_property
    def distance_table(self) -> np.ndarray:
        """``D[a, x] = L * ||gamma_a(x)||`` as exact integers."""
        P = self.phase_table
        return np.minimum(P, self.exponent_lcm - P)

    @cached_property
    def character_table(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.phase_table / self.exponent_lcm)

    def character_angle(self, a: int, x: int) -> Fraction:
        return Fraction(int(self.phase_table[a, x]), self.exponent_lcm)

    def circle_distance(self, a: int, x: int) -> Fraction:
        return circle_norm(self.character_angle(a, x))


@dataclass(frozen=True)
class Subgroup:
    group: FiniteAbelianGroup
    members: tuple[int, ...]
    generators: tuple[int, ...]

    def __contains__(self, x):
        return x in self.member_set

    def __len__(self):
        return len(self.members)

    @cached_property
    def member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    @property
    def order(self) -> int:
        return len(self.members)

    def cosets(self) -> list["Coset"]:
        seen = np.zeros(self.group.order, dtype=bool)
        out = []
        for x in range(self.group.order):
            if not seen[x]:
                coset = Coset(self, x)
                seen[list(coset.members)] = True
                out.append(coset)
        return out


@dataclass(frozen=True)
class Coset:
    """``representative + subgroup``; the representative is the least index."""

    subgroup: Subgroup
    representative: int

    def __post_init__(self):
        G = self.subgroup.group
        least = int(G.add_table[self.representative, list(self.subgroup.members)].min())
        object.__setattr__(self, "representative", least)

    @cached_property
    def members(self) -> tuple[int, ...]:
        G = self.subgroup.group
        return tuple(sorted(G.add_table[self.representative, list(self.subgroup.members)].tolist()))

    @cached_property
    def member_set(self) -> frozenset[int]:
        return frozenset(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, x):
        return x in self.member_set

    def indicator(self) -> np.ndarray:
        return self.subgroup.group.mask(self.members).astype(np.int64)


def closure(group: FiniteAbelianGroup, generators: Iterable[int]) -> frozenset[int]:
    """Subgroup generated by ``generators``."""
    H = np.zeros(group.order, dtype=bool)
    H[0] = True
    for g in generators:
        H = _extend(group, H, int(g))
    return frozenset(np.flatnonzero(H).tolist())


def _extend(group: FiniteAbelianGroup, H: np.ndarray, g: int) -> np.ndarray:
    if H[g]:
        return H
    members = np.flatnonzero(H)
    out = H.copy()
    shift = g
    while not H[shift]:
        out[group.add_table[shift, members]] = True
        shift = int(group.add_table[shift, g])
    return out


def enumerate_subgroups(group: FiniteAbelianGroup, limit: int = DEFAULT_ORDER_LIMIT) -> list[Subgroup]:
    """Every subgroup exactly once, ordered by size then member list.

    Subgroups are grown one generator at a time from the trivial subgroup, so
    each one is first reached with a minimal number of generators.
    """
    if group.order > limit:
        raise OrderLimitExceeded(f"|G| = {group.order} exceeds limit {limit}")
    trivial = np.zeros(group.order, dtype=bool)
    trivial[0] = True
    found: dict[bytes, tuple[np.ndarray, tuple[int, ...]]] = {trivial.tobytes(): (trivial, ())}
    frontier = [trivial.tobytes()]
    while frontier:
        next_frontier = []
        for key in frontier:
            H, gens = found[key]
            for g in range(group.order):
                if H[g]:
                    continue
                K = _extend(group, H, g)
                kkey = K.tobytes()
                if kkey not in found:
                    found[kkey] = (K, gens + (g,))
                    next_frontier.append(kkey)
        frontier = next_frontier
    subgroups = [
        Subgroup(group, tuple(np.flatnonzero(H).tolist()), gens) for H, gens in found.values()
    ]
    subgroups.sort(key=lambda H: (H.order, H.members))
    return subgroups


def enumerate_cosets(group: FiniteAbelianGroup, limit: int = DEFAULT_ORDER_LIMIT) -> list[Coset]:
    """All cosets of all subgroups, grouped by subgroup in canonical order."""
    return [W for H in enumerate_subgroups(group, limit) for W in H.cosets()]


def subgroup_from_set(group: FiniteAbelianGroup, members: Iterable[int]) -> Subgroup:
    """Wrap a set already known to be a subgroup, recovering a small generating list."""
    target = frozenset(members)
    gens: list[int] = []
    H = np.zeros(group.order, dtype=bool)
    H[0] = True
    for g in sorted(target):
        if not H[g]:
            H = _extend(group, H, g)
            gens.append(g)
    if frozenset(np.flatnonzero(H).tolist()) != target:
        raise ValueError("set is not a subgroup")
    return Subgroup(group, tuple(sorted(target)), tuple(gens))


def annihilator(group: FiniteAbelianGroup, members: Iterable[int]) -> frozenset[int]:
    """Characters (by index) trivial on every element of ``members``."""
    members = list(members)
    trivial = np.all(group.phase_table[:, members] == 0, axis=1)
    return frozenset(np.flatnonzero(trivial).tolist())


@dataclass(frozen=True)
class Homomorphism:
    """Homomorphism fixed by the images of the standard cyclic generators.

    ``images[j]`` is the codomain index of the image of the generator of the
    ``j``-th domain factor.
    """

    domain: FiniteAbelianGroup
    codomain: FiniteAbelianGroup
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.domain.rank:
            raise IllFormedHomomorphism("one image per domain factor required")
        for n, img in zip(self.domain.factors, self.images):
            if self.codomain.multiply(n, img) != 0:
                raise IllFormedHomomorphism(
                    f"image {self.codomain.element(img)} has order not dividing {n}"
                )

    @cached_property
    def table(self) -> np.ndarray:
        image_coords = self.codomain.coords[list(self.images)]
        return self.codomain.indices_of(self.domain.coords @ image_coords)

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def image_of(self, S: Iterable[int]) -> frozenset[int]:
        return frozenset(self.table[list(S)].tolist())

    def preimage(self, U: Iterable[int]) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.codomain.mask(U)[self.table]).tolist())


def apply_homomorphism(phi: Homomorphism, x: int) -> int:
    return phi(x)


def projection(domain: FiniteAbelianGroup, keep: Sequence[int]) -> Homomorphism:
    """Coordinate projection onto the factors listed in ``keep``."""
    codomain = FiniteAbelianGroup(tuple(domain.factors[j] for j in keep))
    images = []
    for j in range(domain.rank):
        coords = [1 if k == j else 0 for k in keep]
        images.append(codomain.index(coords))
    return Homomorphism(domain, codomain, tuple(images))
