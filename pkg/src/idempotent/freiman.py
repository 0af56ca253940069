"""From small doubling to a Bohr system on which ``A`` has large density.

Stages: Konyagin's iteration of almost-period neighbourhoods, polynomial
growth of the resulting set, passage from growth to a Bohr system, an
approximately invariant measure on it, and a Bogolyubov-Chang refinement.
Every set inclusion a stage relies on is recomputed by exhaustive membership.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .bohr import BohrSystem, bohr_to_json, constant_system, dilate, dimension_interval
from .covering import DifferenceCoveringInterval, covering_number_exact, difference_covering_upper
from .errors import (
    HypothesisViolated,
    InclusionFailed,
    InvariantBroken,
    NotSymmetric,
    SamplingFailed,
    SearchBudgetExceeded,
)
from .fourier import DenseFunction, convolve, dft, indicator, lp_norm
from .groups import FiniteAbelianGroup
from .measures import InvariantMeasure, Measure, convolve_measures, invariant_on_bohr, restrict, smooth, tilde_measure, uniform
from .spectral import croot_sisask_sample, translate_deviation

DEFAULT_C_CHANG = 4
GAMMA_WIDTH = Fraction(1, 16)


def _require_symmetric(G: FiniteAbelianGroup, X: frozenset[int]) -> None:
    if not X or 0 not in X or not G.is_symmetric(X):
        raise NotSymmetric("expected a symmetric set containing 0")


@dataclass(frozen=True)
class GrowthProfile:
    """``sizes[n-1] = |nX|`` for ``n = 1..N``.

    ``complete`` means ``nX`` stopped growing within the profile, so ``order``
    is the exact supremum over all ``n``.
    """

    base: frozenset[int]
    sizes: tuple[int, ...]
    complete: bool

    @property
    def ratios(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(s, self.sizes[0]) for s in self.sizes)

    @property
    def order(self) -> float:
        best = 0.0
        for n, s in enumerate(self.sizes[1:], start=2):
            best = max(best, math.log(s / self.sizes[0]) / math.log(n))
        return best


def growth_profile(X: Iterable[int], group: FiniteAbelianGroup, N: int | None = None) -> GrowthProfile:
    """Exact ``|nX|`` for ``n = 1..N``; with ``N=None`` run until ``nX`` stabilises."""
    X = frozenset(X)
    _require_symmetric(group, X)
    sizes = [len(X)]
    current = X
    complete = False
    while N is None or len(sizes) < N:
        nxt = group.sumset(current, X)
        if len(nxt) == len(current):
            complete = True
            break
        sizes.append(len(nxt))
        current = nxt
    if N is not None:
        sizes += [sizes[-1]] * (N - len(sizes))
    return GrowthProfile(X, tuple(sizes), complete)


@dataclass(frozen=True)
class ChangVerdict:
    k: int
    lhs: int
    rhs: int
    hypothesis: bool
    order: float
    c_chang: float

    @property
    def order_ok(self) -> bool | None:
        """``order <= c_chang * k`` when the hypothesis holds, else None."""
        if not self.hypothesis:
            return None
        return self.order <= self.c_chang * self.k + 1e-12


def chang_cover_check(X: Iterable[int], k: int, group: FiniteAbelianGroup, c_chang: float = DEFAULT_C_CHANG) -> ChangVerdict:
    """Evaluate ``|(3k+1)X| < 2^k |X|`` exactly, alongside the measured growth order."""
    X = frozenset(X)
    profile = growth_profile(X, group)
    n = 3 * k + 1
    lhs = profile.sizes[min(n, len(profile.sizes)) - 1]
    rhs = 2**k * len(X)
    return ChangVerdict(k, lhs, rhs, lhs < rhs, profile.order, c_chang)


@dataclass(frozen=True, eq=False)
class SymmetrySet:
    members: frozenset[int]
    deviations: np.ndarray
    threshold: float
    L: float
    floor: float


def symmetry_set(f: DenseFunction, S: Iterable[int], T: Iterable[int], p: float, eta: float) -> SymmetrySet:
    """``X = {x : ||tau_x(f*m_S) - f*m_S||_p <= eta ||f||_p}`` over all of ``G``.

    ``floor`` is the predicted size ``(2L)^(-p/eta^2) m(T)`` with unit
    constant, kept only for comparison.
    """
    G = f.group
    S, T = frozenset(S), frozenset(T)
    if not S or not T:
        raise ValueError("S and T must be non-empty")
    L = len(G.sumset(S, T)) / len(S)
    g = smooth(f, uniform(G, S))
    weights = np.full(G.order, 1.0 / G.order)
    dev = translate_deviation(g, range(G.order), p, weights)
    threshold = eta * lp_norm(f.values, p, weights)
    members = frozenset(np.flatnonzero(dev <= threshold * (1 + 1e-12)).tolist())
    floor = (2 * L) ** (-p / eta**2) * len(T) / G.order
    return SymmetrySet(members, dev, threshold, L, floor)


def key_neighbourhood(
    A: Iterable[int],
    S: Iterable[int],
    T: Iterable[int],
    m: int,
    group: FiniteAbelianGroup,
    K: float | None = None,
    L: float | None = None,
) -> tuple[frozenset[int], dict]:
    """Symmetric ``X`` with ``mX`` inside ``S + A - A - S``.

    ``X`` is the almost-period set of ``1_{A+S} * m_{-S}`` with
    ``p = 2 + log K`` and ``eta = min(1/4, 1/(2 K^(1/p))) / m``, which keeps
    ``eta m K^(1/p) <= 1/2``.
    """
    A, S, T = frozenset(A), frozenset(S), frozenset(T)
    if m < 1:
        raise ValueError("m must be a positive integer")
    AS = group.sumset(A, S)
    K_actual = len(AS) / len(A)
    L_actual = len(group.sumset(S, T)) / len(S)
    if K is not None and K_actual > K * (1 + 1e-12):
        raise HypothesisViolated(f"m(A+S)/m(A) = {K_actual:.6g} exceeds K = {K}")
    if L is not None and L_actual > L * (1 + 1e-12):
        raise HypothesisViolated(f"m(S+T)/m(S) = {L_actual:.6g} exceeds L = {L}")
    p = 2 + math.log(K_actual)
    eta = min(0.25, 1 / (2 * K_actual ** (1 / p))) / m
    sym = symmetry_set(indicator(group, AS), group.negset(S), T, p, eta)
    X = sym.members
    target = group.sumset(group.diffset(S, A), group.diffset(A, S))
    if not group.iterated_sumset(X, m) <= target:
        raise InclusionFailed("mX escapes S + A - A - S")
    return X, {"K": K_actual, "L": L_actual, "p": p, "eta": eta, "size": len(X), "floor": sym.floor}


@dataclass(frozen=True)
class KonyaginResult:
    m: int
    T: frozenset[int]
    log: list

    def __iter__(self):
        return iter((self.m, self.T, self.log))


def konyagin_iteration(A: Iterable[int], r: int, s: int, group: FiniteAbelianGroup) -> KonyaginResult:
    """Integer ``m`` and symmetric ``T`` with ``mT`` inside ``r(A-A)``.

    Runs the nested neighbourhoods ``S_i, T_i`` with ``r_i = 3 * 2^i - 2``,
    stopping at the largest ``i`` with ``2 r_{i-1} + 1 <= r``.  The pigeonhole
    index ``l_i`` is the smallest one meeting its inequality.
    """
    A = frozenset(A)
    if not A:
        raise HypothesisViolated("A is empty")
    if r < 3 or s < 1:
        raise HypothesisViolated("need r >= 3 and s >= 1")
    K = len(group.sumset(A, A)) / len(A)
    D = group.diffset(A, A)
    rs = [3 * 2**i - 2 for i in range(64)]
    stop = max(i for i in range(1, 64) if 2 * rs[i - 1] + 1 <= r)

    multiples = {1: D}

    def multiple(n: int) -> frozenset[int]:
        # n(A-A) built from the largest cached multiple below n
        if n not in multiples:
            base = max(k for k in multiples if k < n)
            cur = multiples[base]
            for j in range(base + 1, n + 1):
                cur = group.sumset(cur, D)
                multiples[j] = cur
        return multiples[n]

    S_i, T_i = D, D
    log = []
    m_i = 0
    for i in range(stop):
        K_next = len(multiple(rs[i + 1])) / len(A)
        L_i = len(group.sumset(S_i, T_i)) / len(S_i)
        if L_i > math.exp(4 * math.log(2 * K) ** (2.0**-i)) * (1 + 1e-12):
            raise InvariantBroken(f"round {i}: L_i = {L_i:.6g} above its ceiling")
        m_i = s * math.ceil(math.log(2 * K_next) / math.sqrt(math.log(2 * L_i)))
        T_next, key_log = key_neighbourhood(A, S_i, T_i, m_i, group)
        mT = group.iterated_sumset(T_next, m_i)
        if not group.sumset(mT, D) <= multiple(rs[i + 1]):
            raise InvariantBroken(f"round {i}: m_i T_(i+1) + (A-A) escapes r_(i+1)(A-A)")
        bound = (len(multiple(rs[i + 1])) / len(D)) ** (s / m_i)
        sT = group.iterated_sumset(T_next, s)
        chosen = None
        for l in range(m_i // s):
            lower = group.sumset(group.iterated_sumset(T_next, s * l), D)
            upper = group.sumset(sT, lower)
            if len(upper) <= bound * len(lower) * (1 + 1e-12):
                chosen = (l, lower)
                break
        if chosen is None:
            raise InvariantBroken(f"round {i}: no pigeonhole index below m_i / s")
        l_i, S_next = chosen
        if not (D <= S_next <= multiple(rs[i + 1]) and group.is_symmetric(S_next) and 0 in T_next):
            raise InvariantBroken(f"round {i}: S_(i+1) outside [A-A, r_(i+1)(A-A)] or not symmetric")
        log.append(
            {"round": i, "r_next": rs[i + 1], "K_next": K_next, "L": L_i, "m": m_i, "l": l_i, "T_size": len(T_next), **key_log}
        )
        S_i, T_i = S_next, T_next
    if not group.iterated_sumset(T_i, m_i) <= multiple(r):
        raise InclusionFailed("mT escapes r(A-A)")
    return KonyaginResult(m_i, T_i, log)


def _tail_k(q_tail: np.ndarray, q_head: np.ndarray) -> int:
    """Smallest ``k >= 1`` with ``sum q_tail^(2k) <= sum q_head^(2k)``.

    Every head value exceeds every tail value, so the ratio is non-increasing
    in ``k`` and bisection applies.
    """

    def ok(k: int) -> bool:
        return float(np.sum(q_tail ** (2 * k))) <= float(np.sum(q_head ** (2 * k)))

    if q_tail.size == 0 or ok(1):
        return 1
    top = float(q_tail.max())
    # sum q_tail^(2k) <= n top^(2k) <= 1 <= head once k is this large
    hi = max(2, math.ceil(math.log(q_tail.size) / (-2 * math.log(top))) + 1)
    while not ok(hi):
        hi *= 2
    lo = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True, eq=False)
class GrowthBohr:
    bohr: BohrSystem
    base: BohrSystem
    l: int
    pigeonhole_m: int
    epsilon: float
    k: int
    k_cap: float
    j: int
    log: dict = field(default_factory=dict)

    @property
    def k_within_cap(self) -> bool:
        return self.k <= self.k_cap


def growth_to_bohr(X: Iterable[int], d: float, group: FiniteAbelianGroup, node_budget: int = 200_000) -> GrowthBohr:
    """Bohr system ``B`` with ``X - X`` inside ``B_1`` for ``X`` of growth order at most ``d``.

    ``Gamma`` collects the characters where ``|1_{lX}^|`` exceeds
    ``(1 - eps) m(lX)``; ``B = 2^-(5j+1) Bohr(Gamma, 1/16)`` for the ``j``
    minimising ``C(B'_{2^-(5j+1)}; B'_{2^-(5j+4)})``.
    """
    X = frozenset(X)
    _require_symmetric(group, X)
    d = float(d)
    if d < 1:
        raise ValueError("d must be at least 1")
    M = 2
    while M ** (d / (M - 1)) > 1.5:
        M += 1
    sizes = [len(group.iterated_sumset(X, n)) for n in range(1, M + 1)]
    if sizes[-1] > M**d * sizes[0] * (1 + 1e-12):
        raise HypothesisViolated(f"|{M}X| / |X| = {sizes[-1] / sizes[0]:.6g} exceeds {M}^{d}")
    bound = (sizes[-1] / sizes[0]) ** (1 / (M - 1))
    l = next(n for n in range(2, M + 1) if sizes[n - 1] <= bound * sizes[n - 2] * (1 + 1e-12))
    if sizes[l - 1] > 1.5 * sizes[l - 2]:
        raise InvariantBroken("pigeonhole ratio above 3/2")
    lX = group.iterated_sumset(X, l)
    mags = np.abs(dft(indicator(group, lX)).coefficients)
    size_lX = len(lX) / group.order
    epsilon = 1 / (2**18 * d * d)
    head = mags > (1 - epsilon) * size_lX
    gamma = np.flatnonzero(head).tolist()
    base = constant_system(group, gamma, GAMMA_WIDTH)
    diff = group.diffset(X, X)
    if not diff <= base.bohr_set(Fraction(1) / Fraction(32 * d)):
        raise InclusionFailed("X - X escapes B'_{1/32d}")
    q = mags / size_lX
    k = _tail_k(q[~head], q[head])
    B1 = base.bohr_set(1)
    if len(B1) > 8 * (k * l) ** d * len(lX) * (1 + 1e-9):
        raise InvariantBroken("m(B'_1) above 8 (kl)^d m(lX)")
    J = int(math.floor(math.log2(d) / 5))
    ratios = []
    for j in range(J + 1):
        c, _ = covering_number_exact(
            base.bohr_set(Fraction(1, 2 ** (5 * j + 1))), base.bohr_set(Fraction(1, 2 ** (5 * j + 4))), group, node_budget=node_budget
        )
        ratios.append(c)
    j = int(np.argmin(ratios))
    B = dilate(base, Fraction(1, 2 ** (5 * j + 1)))
    if not diff <= B.bohr_set(1):
        raise InclusionFailed("X - X escapes B_1")
    cap = 10 * d**3 * (1 + math.log(d))
    log = {
        "gamma_size": len(gamma),
        "lX_size": len(lX),
        "B1_size": len(B.bohr_set(1)),
        "base_B1_size": len(B1),
        "B1_over_X": len(B.bohr_set(1)) / len(X),
        "covers": ratios,
    }
    return GrowthBohr(B, base, l, M, epsilon, k, cap, j, log)


@dataclass(frozen=True, eq=False)
class ChangOutcome:
    bohr: BohrSystem
    samples: int
    sampler_measured: float
    sampler_bound: float
    min_pairing: float
    pairing_floor: float
    s_inside_b1: bool


def bogolyubov_chang(
    A: Iterable[int],
    B: BohrSystem,
    mu: Measure,
    S: Iterable[int],
    L: Iterable[int],
    epsilon: float,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    c_cs: float = 64,
) -> ChangOutcome:
    """Refine ``B`` to ``B'`` with ``B'_1`` inside ``L - L + S - S``.

    Almost periods of ``1_L * 1_{-L}`` in ``L_p(mu * mu~)`` are sampled with
    ``p = 2 + 2 log(1/mu(S))`` and ``eta = eps / 2e``.  ``A`` only enters
    through covering numbers reported by the caller.  ``S`` lying in ``B_1``
    is recorded rather than required; the inclusion does not use it.
    """
    G = B.group
    S, L = frozenset(S), frozenset(L)
    if not L:
        raise HypothesisViolated("L is empty")
    mass_S = mu.of(S)
    if mass_S <= 0:
        raise HypothesisViolated("mu(S) = 0")
    mu_S = restrict(mu, S)
    one_L = indicator(G, L)
    energy = float(np.mean(np.abs(smooth(one_L, mu_S).values) ** 2))
    m_L = len(L) / G.order
    if energy < epsilon * m_L * (1 - 1e-12):
        raise HypothesisViolated(f"||1_L * mu_S||^2 = {energy:.6g} below eps m(L) = {epsilon * m_L:.6g}")
    if rng is None:
        rng = np.random.default_rng(seed)
    h = convolve(one_L, indicator(G, G.negset(L)))
    nu = convolve_measures(mu, tilde_measure(mu))
    p = 2 + 2 * math.log(1 / mass_S)
    eta = epsilon / (2 * math.e)
    for _ in range(2):
        B_new, _, report = croot_sisask_sample(h, B, nu, p, eta, rng=rng, c_cs=c_cs)
        if report.success:
            break
    else:
        raise SamplingFailed(f"sampler failed twice (measured {report.measured:.4g} > {report.bound:.4g})")
    B1 = B_new.bohr_set(1)
    if not B1 <= G.sumset(G.diffset(L, L), G.diffset(S, S)):
        raise InclusionFailed("B'_1 escapes L - L + S - S")
    pair = convolve_measures(mu_S, tilde_measure(mu_S)).mass
    # <tau_x h, pair> = sum_y h(y - x) pair(y)
    vals = np.array([float(np.real(h.values[G.add_table[G.neg(x)]] @ pair)) for x in sorted(B1)])
    floor = epsilon / 2 * m_L
    if vals.min() < floor * (1 - 1e-9):
        raise InvariantBroken(f"pairing {vals.min():.6g} below eps m(L) / 2 = {floor:.6g}")
    return ChangOutcome(B_new, report.samples, report.measured, report.bound, float(vals.min()), floor, S <= B.bohr_set(1))


@dataclass(frozen=True, eq=False)
class FreimanCertificate:
    """Outcome of the full pipeline, with every claimed inclusion recomputable by :meth:`verify`."""

    group: FiniteAbelianGroup
    A: frozenset[int]
    bohr: BohrSystem
    growth_bohr: BohrSystem
    K: float
    r: int
    s: int
    m: int
    X: frozenset[int]
    l: int
    S: frozenset[int]
    L: frozenset[int]
    epsilon: float
    covering: DifferenceCoveringInterval | None
    dimension: tuple[float, float] | None
    density_lower: float
    density_uniform: float
    density_shape: float
    inclusions: dict
    stages: dict

    def verify(self) -> dict:
        G, A = self.group, self.A
        D = G.diffset(A, A)

        def mult(n: int) -> frozenset[int]:
            out = frozenset({0})
            for _ in range(n):
                out = G.sumset(out, D)
            return out

        B1 = self.bohr.bohr_set(1)
        checks = {
            "mT_in_rD": G.iterated_sumset(self.X, self.m) <= mult(self.r),
            "XX_in_growth_B1": G.diffset(self.X, self.X) <= self.growth_bohr.bohr_set(1),
            "B1_in_LLSS": B1 <= G.sumset(G.diffset(self.L, self.L), G.diffset(self.S, self.S)),
            "B1_in_2r+1": B1 <= mult(2 * self.r + 1),
            "B1_in_2r+2": B1 <= mult(2 * self.r + 2),
        }
        density = float(smooth(indicator(G, A), uniform(G, B1)).values.real.max())
        checks["density_positive"] = density > 0
        checks["density_matches"] = abs(density - self.density_uniform) <= 1e-12
        checks["density_floor"] = density >= len(A) / len(G.sumset(A, B1)) - 1e-12
        return checks

    def to_json(self) -> dict:
        cov = None
        if self.covering is not None:
            cov = {"lower": self.covering.lower, "upper": self.covering.upper}
        return {
            "group": list(self.group.factors),
            "A": sorted(self.A),
            "bohr": bohr_to_json(self.bohr),
            "B1": sorted(self.bohr.bohr_set(1)),
            "K": self.K,
            "r": self.r,
            "s": self.s,
            "m": self.m,
            "X": sorted(self.X),
            "l": self.l,
            "epsilon": self.epsilon,
            "covering_interval": cov,
            "dimension_interval": list(self.dimension) if self.dimension else None,
            "density_lower": self.density_lower,
            "density_uniform_beta": self.density_uniform,
            "density_shape": self.density_shape,
            "inclusions": self.inclusions,
            "stages": self.stages,
        }


def freiman_bohr(
    A: Iterable[int],
    group: FiniteAbelianGroup,
    r: int = 3,
    s: int = 1,
    seed: int | None = None,
    c_cs: float = 64,
    c_chang: float = DEFAULT_C_CHANG,
    node_budget: int = 200_000,
) -> FreimanCertificate:
    """Bohr system ``B`` with ``B_1`` inside ``(2r+2)(A-A)`` on which ``A`` has positive density."""
    A = frozenset(A)
    if not A:
        raise HypothesisViolated("A is empty")
    G = group
    rng = np.random.default_rng(seed)
    K = len(G.sumset(A, A)) / len(A)
    D = G.diffset(A, A)
    stages: dict = {"K": K}

    m, X, klog = konyagin_iteration(A, r, s, G)
    stages["konyagin"] = klog
    chang = chang_cover_check(X, m**3, G, c_chang)
    stages["chang"] = {"k": chang.k, "lhs": chang.lhs, "rhs": chang.rhs, "hypothesis": chang.hypothesis, "order": chang.order}
    if chang.order_ok is False:
        raise InvariantBroken(f"growth order {chang.order:.4g} above {c_chang} k")
    d = max(1.0, chang.order)
    grown = growth_to_bohr(X, d, G, node_budget=node_budget)
    stages["growth_to_bohr"] = dict(grown.log, d=d, l=grown.l, k=grown.k, k_within_cap=grown.k_within_cap, j=grown.j)

    inv: InvariantMeasure = invariant_on_bohr(grown.bohr)
    mu = inv.measure
    if not mu.support() <= grown.bohr.bohr_set(1):
        raise InvariantBroken("invariant measure escapes B'_1")
    inner = dilate(grown.bohr, inv.lam)
    stages["invariant"] = {"lam": float(inv.lam), "kappa": str(inv.kappa), "support": len(mu.support())}

    xs = sorted(X)
    mass_near = mu.mass[G.add_table[:, xs]].sum(axis=1)
    x_star = int(np.argmax(mass_near))
    S = G.translate_set(X, x_star)

    mS = G.iterated_sumset(S, m)
    bound = (len(G.sumset(D, mS)) / len(D)) ** (1 / m)
    lS = frozenset({0})
    chosen = None
    for l in range(m):
        base = G.sumset(D, lS)
        if len(G.sumset(base, S)) <= bound * len(base) * (1 + 1e-12):
            chosen = (l, base)
            break
        lS = G.sumset(lS, S)
    if chosen is None:
        raise InvariantBroken("no pigeonhole index l below m")
    l, L = chosen
    one_L = indicator(G, L)
    mu_S = restrict(mu, S)
    epsilon = float(np.mean(np.abs(smooth(one_L, mu_S).values) ** 2)) / (len(L) / G.order)
    if epsilon < len(L) / len(G.sumset(L, S)) * (1 - 1e-9):
        raise InvariantBroken("Cauchy-Schwarz floor m(L)/m(L+S) violated")
    stages["pigeonhole"] = {"x": x_star, "mu_S": float(mass_near[x_star]), "l": l, "L_size": len(L), "epsilon": epsilon}

    bc = bogolyubov_chang(A, inner, mu, S, L, epsilon, rng=rng, c_cs=c_cs)
    B = bc.bohr
    stages["bogolyubov_chang"] = {
        "samples": bc.samples,
        "characters": B.rank,
        "min_pairing": bc.min_pairing,
        "pairing_floor": bc.pairing_floor,
        "S_inside_B1": bc.s_inside_b1,
    }
    B1 = B.bohr_set(1)
    if not B1:
        raise InvariantBroken("B_1 is empty")

    try:
        covering = difference_covering_upper(A, B1, G)
    except SearchBudgetExceeded:
        covering = None
    try:
        dims = dimension_interval(B)
    except SearchBudgetExceeded:
        dims = None
    density_uniform = float(smooth(indicator(G, A), uniform(G, B1)).values.real.max())
    density_lower = len(A) / len(G.sumset(A, B1))
    log2K = math.log(2 * K)
    shape = math.exp(-log2K * math.log(2 * log2K)) if 2 * log2K > 1 else 1.0

    cert = FreimanCertificate(
        G, A, B, grown.bohr, K, r, s, m, X, l, S, L, epsilon, covering, dims,
        density_lower, density_uniform, shape, {}, stages,
    )
    checks = cert.verify()
    object.__setattr__(cert, "inclusions", checks)
    required = ("mT_in_rD", "XX_in_growth_B1", "B1_in_LLSS", "B1_in_2r+2", "density_positive", "density_floor")
    failed = [name for name in required if not checks[name]]
    if failed:
        raise InclusionFailed(f"certificate checks failed: {failed}")
    return cert
