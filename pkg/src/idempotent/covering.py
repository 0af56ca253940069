"""Covering numbers ``C(S;T) = min{|X| : S subset X+T}`` and related bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCoveringSet, SearchBudgetExceeded, ZeroNotInT
from .groups import FiniteAbelianGroup, Homomorphism, enumerate_subgroups

DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class CoverCertificate:
    group: FiniteAbelianGroup
    translates: frozenset[int]
    covered: frozenset[int]
    by: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.translates)

    def verify(self) -> bool:
        if not self.covered:
            return True
        if not self.translates or not self.by:
            return False
        return self.covered <= self.group.sumset(self.translates, self.by)


def _candidates(group, S, T):
    """Distinct, non-dominated coverage masks over the elements of ``S``."""
    s_list = sorted(S)
    pos = np.full(group.order, -1, dtype=np.int64)
    pos[s_list] = np.arange(len(s_list))
    t = np.array(sorted(T), dtype=np.int64)
    xs = sorted(group.diffset(S, T))
    by_mask: dict[int, int] = {}
    for x in xs:
        hit = pos[group.add_table[x, t]]
        hit = hit[hit >= 0]
        mask = 0
        for h in hit.tolist():
            mask |= 1 << h
        if mask and mask not in by_mask:
            by_mask[mask] = x
    masks = sorted(by_mask, key=lambda m: (-m.bit_count(), by_mask[m]))
    kept: list[int] = []
    for m in masks:
        if not any(m & k == m for k in kept):
            kept.append(m)
    return s_list, [(m, by_mask[m]) for m in kept]


def covering_number_greedy(S: Iterable[int], T: Iterable[int], group: FiniteAbelianGroup):
    """Greedy maximum-coverage translates; returns ``(size, certificate)``."""
    S, T = frozenset(S), frozenset(T)
    if not T:
        raise EmptyCoveringSet("T is empty")
    if not S:
        return 0, CoverCertificate(group, frozenset(), S, T)
    s_list, cands = _candidates(group, S, T)
    cands.sort(key=lambda mx: mx[1])
    full = (1 << len(s_list)) - 1
    covered = 0
    chosen = []
    while covered != full:
        best = max(cands, key=lambda mx: ((mx[0] & ~covered).bit_count(), -mx[1]))
        covered |= best[0]
        chosen.append(best[1])
    cert = CoverCertificate(group, frozenset(chosen), S, T)
    return len(chosen), cert


def covering_number_exact(
    S: Iterable[int], T: Iterable[int], group: FiniteAbelianGroup, node_budget: int = DEFAULT_NODE_BUDGET
):
    """Exact ``C(S;T)`` by branch and bound; returns ``(size, certificate)``.

    Branching picks the uncovered element with fewest covering candidates.
    Pruning uses the greedy incumbent and the bound
    ``ceil(|uncovered| / max coverage of uncovered)``.
    """
    S, T = frozenset(S), frozenset(T)
    if not T:
        raise EmptyCoveringSet("T is empty")
    if not S:
        return 0, CoverCertificate(group, frozenset(), S, T)
    greedy_size, greedy_cert = covering_number_greedy(S, T, group)
    t_size = len(T)
    if greedy_size <= math.ceil(len(S) / t_size):
        return greedy_size, greedy_cert
    s_list, cands = _candidates(group, S, T)
    n = len(s_list)
    full = (1 << n) - 1
    covers_of: list[list[int]] = [[] for _ in range(n)]
    for ci, (m, _) in enumerate(cands):
        for i in range(n):
            if m >> i & 1:
                covers_of[i].append(ci)
    cmask = [m for m, _ in cands]
    best = [greedy_size, [None]]
    nodes = [0]

    def lower_bound(uncovered):
        top = max((m & uncovered).bit_count() for m in cmask)
        return math.ceil(uncovered.bit_count() / top)

    def search(covered, chosen):
        nodes[0] += 1
        if nodes[0] > node_budget:
            raise SearchBudgetExceeded(f"more than {node_budget} nodes")
        if covered == full:
            if len(chosen) < best[0]:
                best[0] = len(chosen)
                best[1] = list(chosen)
            return
        uncovered = full & ~covered
        if len(chosen) + lower_bound(uncovered) >= best[0]:
            return
        pivot = min(
            (i for i in range(n) if uncovered >> i & 1),
            key=lambda i: len(covers_of[i]),
        )
        options = sorted(covers_of[pivot], key=lambda ci: -(cmask[ci] & uncovered).bit_count())
        for ci in options:
            chosen.append(ci)
            search(covered | cmask[ci], chosen)
            chosen.pop()
            if len(chosen) + 1 >= best[0]:
                break

    search(0, [])
    if best[1] == [None]:
        return greedy_size, greedy_cert
    X = frozenset(cands[ci][1] for ci in best[1])
    cert = CoverCertificate(group, X, S, T)
    return len(X), cert


def ruzsa_cover(A: Iterable[int], B: Iterable[int], group: FiniteAbelianGroup) -> CoverCertificate:
    """Maximal ``X`` in ``A`` whose translates ``x+B`` are disjoint.

    Maximality forces ``A`` into ``X + B - B``, and disjointness gives
    ``|X| <= m(A+B)/m(B)``.
    """
    A, B = frozenset(A), frozenset(B)
    if not B:
        raise EmptyCoveringSet("B is empty")
    b = np.array(sorted(B), dtype=np.int64)
    occupied = np.zeros(group.order, dtype=bool)
    X = []
    for a in sorted(A):
        shifted = group.add_table[a, b]
        if not occupied[shifted].any():
            occupied[shifted] = True
            X.append(a)
    return CoverCertificate(group, frozenset(X), A, group.diffset(B, B))


@dataclass(frozen=True)
class DifferenceCoveringInterval:
    """Certified interval ``lower <= C^Delta(S;T) <= upper``.

    ``witness`` is the set ``V`` in the codomain of ``homomorphism`` (``None``
    meaning the identity) with ``phi^-1(V-V)`` inside ``T`` that realises the
    upper bound ``C(phi(S); V)``.
    """

    lower: int
    upper: int
    witness: frozenset[int]
    homomorphism: Homomorphism | None


def _difference_roots(group, T, extra=()):
    """Sets ``V`` containing 0 with ``V - V`` inside ``T``."""
    T = frozenset(T)
    roots = {frozenset({0})}
    for V in extra:
        V = frozenset(V)
        if V and group.diffset(V, V) <= T:
            roots.add(V)
    if group.order <= 64:
        for H in enumerate_subgroups(group):
            if H.member_set <= T:
                roots.add(H.member_set)
    tmask = group.mask(T)
    for seed in sorted(T):
        V = [0]
        for v in [seed] + sorted(T):
            if v in V:
                continue
            ok = all(tmask[group.sub(v, w)] and tmask[group.sub(w, v)] for w in V)
            if ok:
                V.append(v)
        roots.add(frozenset(V))
    return sorted(roots, key=lambda V: (-len(V), sorted(V)))


def difference_covering_upper(
    S: Iterable[int],
    T: Iterable[int],
    group: FiniteAbelianGroup,
    homomorphisms: Sequence[Homomorphism] = (),
    extra_roots: Sequence[Iterable[int]] = (),
) -> DifferenceCoveringInterval:
    """Interval ``[C(S;T), best upper bound]`` for the difference covering number.

    The upper bound searches sets ``V`` with ``V - V`` inside ``T`` for the
    identity map, and for each supplied homomorphism ``phi`` sets ``V`` whose
    difference set has every fibre inside ``T``.
    """
    S, T = frozenset(S), frozenset(T)
    if 0 not in T:
        raise ZeroNotInT("0 must lie in T")
    lower, _ = covering_number_exact(S, T, group)
    best = (len(S), frozenset({0}), None)
    for V in _difference_roots(group, T, extra_roots):
        c, _ = covering_number_exact(S, V, group)
        if c < best[0]:
            best = (c, V, None)
    for phi in homomorphisms:
        if phi.domain != group:
            continue
        H = phi.codomain
        # h is usable in V - V iff its whole fibre lies in T
        inside = np.ones(H.order, dtype=bool)
        tmask = group.mask(T)
        inside[phi.table[~tmask]] = False
        T_phi = frozenset(np.flatnonzero(inside).tolist())
        if 0 not in T_phi:
            continue
        U = phi.image_of(S)
        for V in _difference_roots(H, T_phi):
            c, _ = covering_number_exact(U, V, H)
            if c < best[0]:
                best = (c, V, phi)
    return DifferenceCoveringInterval(lower, best[0], best[1], best[2])


def pullback_cover(phi: Homomorphism, U: Iterable[int], V: Iterable[int], cover: CoverCertificate) -> CoverCertificate:
    """Transport a cover of ``U`` by ``V`` in the codomain to a cover of
    ``phi^-1(U)`` by ``phi^-1(V - V)`` in the domain, of no larger size.
    """
    H, G = phi.codomain, phi.domain
    U, V = frozenset(U), frozenset(V)
    image = phi.table
    Z = []
    for x in sorted(cover.translates):
        target = H.mask(H.translate_set(V, x))
        hits = np.flatnonzero(target[image])
        if hits.size:
            Z.append(int(hits[0]))
    return CoverCertificate(G, frozenset(Z), phi.preimage(U), phi.preimage(H.diffset(V, V)))


@dataclass(frozen=True)
class RevisitedBound:
    factor: float
    interval: DifferenceCoveringInterval
    bound: float


def ruzsa_cover_revisited_bound(A, B, X, group: FiniteAbelianGroup, homomorphisms=()) -> RevisitedBound:
    """``C^Delta(A;B) <= (m(A+X)/m(X)) * C^Delta(X-X;B)`` with the upper end of the interval."""
    A, B, X = frozenset(A), frozenset(B), frozenset(X)
    if not X:
        raise EmptyCoveringSet("X is empty")
    factor = len(group.sumset(A, X)) / len(X)
    interval = difference_covering_upper(group.diffset(X, X), B, group, homomorphisms)
    return RevisitedBound(factor, interval, factor * interval.upper)
