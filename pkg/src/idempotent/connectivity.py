"""Arithmetic connectivity, additive energy and the Chebyshev argument linking them to the algebra norm.

A set ``A`` is ``(m, l)``-connected when every ``x`` in ``A^m`` has some
``sigma`` in ``Z^m`` with ``||sigma||_1 <= l``, at least two coordinates equal
to ``+-1``, and ``sigma . x`` in ``A``.  Witnesses are canonical: smallest
``||sigma||_1`` first, then lexicographically smallest.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, EpsilonTooLarge, HypothesisViolated, InvariantBroken, NotAlmostInteger, NotConnected
from .fourier import DenseFunction, almost_round, convolve, dft, indicator, wiener_norm
from .groups import FiniteAbelianGroup

DEFAULT_BUDGET = 10**7
DEFAULT_TRIALS = 200
SIGMA_TABLE_LIMIT = 20_000
DEFAULT_C_MEL = 4.0
DEFAULT_C3 = 2.0
DEFAULT_C2 = 1.0


class Mode(enum.Enum):
    EXHAUSTIVE = "EXHAUSTIVE"
    SAMPLED = "SAMPLED"


def _exact_norm(m: int, n: int, prefix=()):
    """All ``sigma`` in ``Z^m`` with ``||sigma||_1 = n``, lexicographically."""
    if m == 0:
        if n == 0:
            yield prefix
        return
    if m == 1:
        yield from ((prefix + (v,)) for v in sorted({-n, n}))
        return
    for v in range(-n, n + 1):
        yield from _exact_norm(m - 1, n - abs(v), prefix + (v,))


def sigma_vectors(m: int, l: int, admissible_only: bool = True):
    """``sigma`` with ``||sigma||_1 <= l`` in canonical order; optionally only those with two unit entries."""
    for n in range(l + 1):
        for s in _exact_norm(m, n):
            if not admissible_only or sum(1 for v in s if abs(v) == 1) >= 2:
                yield s


def sigma_count_bound(m: int, l: int) -> int:
    """``sum_{r <= l} binom(r+m, m) 2^l``, an upper bound for the number of ``||sigma||_1 <= l``."""
    return sum(math.comb(r + m, m) for r in range(l + 1)) * 2**l


@functools.lru_cache(maxsize=64)
def _sigma_table(m: int, l: int, limit: int = SIGMA_TABLE_LIMIT) -> np.ndarray | None:
    if sigma_count_bound(m, l) > 64 * limit:
        return None
    rows = []
    for s in sigma_vectors(m, l):
        rows.append(s)
        if len(rows) > limit:
            return None
    return np.array(rows, dtype=np.int64).reshape(len(rows), m)


class _Reach:
    """Suffix reachability: ``R[i][g, n, c]`` says positions ``i..m-1`` can sum
    to ``g`` with exact ``l1`` norm ``n`` and ``min(2, #units) = c``."""

    def __init__(self, group: FiniteAbelianGroup, x: Sequence[int], l: int):
        self.G, self.x, self.l = group, list(x), l
        m = len(self.x)
        self.mults = [[group.multiply(v, xi) for v in range(-l, l + 1)] for xi in self.x]
        R = np.zeros((group.order, l + 1, 3), dtype=bool)
        R[0, 0, 0] = True
        self.R = [None] * (m + 1)
        self.R[m] = R
        add, neg = group.add_table, group.neg_table
        for i in range(m - 1, -1, -1):
            old = self.R[i + 1]
            new = np.zeros_like(old)
            for v in range(-l, l + 1):
                a = abs(v)
                # new[g] |= old[g - v x_i]
                shifted = old[add[:, neg[self.mults[i][v + l]]]]
                if a == 0:
                    new |= shifted
                    continue
                part = shifted[:, : l + 1 - a, :]
                if a == 1:
                    new[:, a:, 1] |= part[:, :, 0]
                    new[:, a:, 2] |= part[:, :, 1] | part[:, :, 2]
                else:
                    new[:, a:, :] |= part
            self.R[i] = new

    def find(self, A_mask: np.ndarray) -> tuple[int, ...] | None:
        G, l = self.G, self.l
        A_idx = np.flatnonzero(A_mask)
        if A_idx.size == 0:
            return None
        start = self.R[0][A_idx][:, :, 2].any(axis=0)
        norms = np.flatnonzero(start)
        if norms.size == 0:
            return None
        rem = int(norms[0])
        prefix, units, sigma = 0, 0, []
        add, neg = G.add_table, G.neg_table
        for i in range(len(self.x)):
            nxt = self.R[i + 1]
            for v in range(-rem, rem + 1):
                p = int(add[prefix, self.mults[i][v + l]])
                u = min(2, units + (abs(v) == 1))
                targets = add[A_idx, neg[p]]
                if nxt[targets, rem - abs(v), max(0, 2 - u):].any():
                    sigma.append(v)
                    prefix, units, rem = p, u, rem - abs(v)
                    break
            else:  # pragma: no cover - reachability guarantees a continuation
                raise InvariantBroken("reachability table inconsistent")
        return tuple(sigma)


def _dot(group: FiniteAbelianGroup, sigma: Sequence[int], x: Sequence[int]) -> int:
    coords = group.coords[list(x)]
    return int(group.indices_of(np.asarray(sigma, dtype=np.int64) @ coords))


def admissible_sigma(x: Sequence[int], A: Iterable[int], l: int, group: FiniteAbelianGroup) -> tuple[int, ...] | None:
    """First ``sigma`` (by ``l1`` norm, then lexicographic) with two unit entries and ``sigma . x`` in ``A``."""
    A_mask = group.mask(A)
    if not A_mask.any() or len(x) < 2 or l < 2:
        return None
    table = _sigma_table(len(x), l)
    if table is not None:
        coords = group.coords[list(x)]
        hits = A_mask[group.indices_of(table @ coords)]
        idx = np.flatnonzero(hits)
        return tuple(int(v) for v in table[idx[0]]) if idx.size else None
    hit = _pair_sigma(x, A_mask, group)
    if hit is not None:
        return hit
    return _Reach(group, x, l).find(A_mask)


def _pair_sigma(x: Sequence[int], A_mask: np.ndarray, group: FiniteAbelianGroup) -> tuple[int, ...] | None:
    """Lexicographically first ``sigma`` of norm 2 (two entries ``+-1``) with ``sigma . x`` in ``A``."""
    m = len(x)
    coords = group.coords[list(x)]
    i, j = np.triu_indices(m, 1)
    best = None
    for a in (-1, 1):
        for b in (-1, 1):
            hits = np.flatnonzero(A_mask[group.indices_of(a * coords[i] + b * coords[j])])
            if hits.size == 0:
                continue
            # lex order: a -1 entry sorts earlier the further left it sits, a +1 entry the further right
            k1 = i[hits] if a < 0 else -i[hits]
            k2 = j[hits] if b < 0 else -j[hits]
            order = np.lexsort((k2, k1))
            h = hits[order[0]]
            key = (a > 0, int(k1[order[0]]), b > 0, int(k2[order[0]]))
            if best is None or key < best[0]:
                best = (key, int(i[h]), a, int(j[h]), b)
    if best is None:
        return None
    sigma = [0] * m
    sigma[best[1]], sigma[best[3]] = best[2], best[4]
    return tuple(sigma)


def admissible_sigma_reach(x: Sequence[int], A: Iterable[int], l: int, group: FiniteAbelianGroup) -> tuple[int, ...] | None:
    """Same answer as :func:`admissible_sigma`, always via the reachability table."""
    if len(x) < 2 or l < 2:
        return None
    return _Reach(group, x, l).find(group.mask(A))


@dataclass(frozen=True)
class ConnectivityVerdict:
    m: int
    l: int
    mode: Mode
    connected: bool
    counterexample: tuple[int, ...] | None = None
    trials: int | None = None
    seed: int | None = None
    tuples_checked: int = 0

    def to_json(self, group: FiniteAbelianGroup | None = None) -> dict:
        ce = self.counterexample
        if ce is not None and group is not None:
            ce = [list(group.element(v)) for v in ce]
        return {
            "m": self.m,
            "l": self.l,
            "mode": self.mode.value,
            "connected": self.connected,
            "counterexample": None if ce is None else list(ce),
            "trials": self.trials,
            "seed": self.seed,
            "tuples_checked": self.tuples_checked,
        }


def _sweep(group: FiniteAbelianGroup, A_sorted: np.ndarray, m: int, table: np.ndarray, chunk: int = 100_000):
    """First tuple of ``A^m`` (lexicographic in sorted ``A``) with no admissible sigma, or None."""
    A_mask = group.mask(A_sorted.tolist())
    k = A_sorted.size
    total = k**m
    coords = group.coords
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = np.empty((flat.size, m), dtype=np.int64)
        rest = flat.copy()
        for j in range(m - 1, -1, -1):
            digits[:, j] = rest % k
            rest //= k
        tup = A_sorted[digits]
        tc = coords[tup]  # (N, m, rank)
        ok = np.zeros(flat.size, dtype=bool)
        for s in table:
            pending = ~ok
            if not pending.any():
                break
            vals = np.einsum("j,njr->nr", s, tc[pending])
            ok[pending] = A_mask[group.indices_of(vals)]
        if not ok.all():
            return tuple(int(v) for v in tup[np.flatnonzero(~ok)[0]])
    return None


def is_arithmetically_connected(
    A: Iterable[int],
    m: int,
    l: int,
    group: FiniteAbelianGroup,
    mode: Mode | str = Mode.EXHAUSTIVE,
    seed: int | None = None,
    trials: int = DEFAULT_TRIALS,
    budget: int = DEFAULT_BUDGET,
) -> ConnectivityVerdict:
    """Decide ``(m, l)``-connectivity exhaustively, or sample ``trials`` tuples for a one-sided verdict.

    Exhaustive answers are cross-checked: a true verdict against 100 random
    tuples through the reachability route, a counterexample by the same route
    over every ``sigma``.
    """
    mode = Mode(mode)
    A = frozenset(A)
    if m < 1 or l < 0:
        raise ValueError("need m >= 1 and l >= 0")
    if not A:
        return ConnectivityVerdict(m, l, mode, True, None, trials if mode is Mode.SAMPLED else None, seed, 0)
    A_sorted = np.array(sorted(A), dtype=np.int64)
    rng = np.random.default_rng(seed)
    if mode is Mode.EXHAUSTIVE:
        total = len(A) ** m
        if total > budget:
            raise BudgetExceeded(f"|A|^m = {total} exceeds budget {budget}")
        table = _sigma_table(m, l) if m >= 2 and l >= 2 else np.zeros((0, m), dtype=np.int64)
        if table is None:
            counter = None
            for tup in itertools.product(A_sorted.tolist(), repeat=m):
                if admissible_sigma_reach(tup, A, l, group) is None:
                    counter = tuple(tup)
                    break
        else:
            counter = _sweep(group, A_sorted, m, table)
        if counter is not None:
            if admissible_sigma_reach(counter, A, l, group) is not None:
                raise InvariantBroken("counterexample has an admissible sigma")
            return ConnectivityVerdict(m, l, mode, False, counter, None, seed, total)
        for _ in range(100):
            tup = tuple(rng.choice(A_sorted, size=m).tolist())
            if admissible_sigma_reach(tup, A, l, group) is None:
                raise InvariantBroken(f"tuple {tup} lacks a sigma despite exhaustive success")
        return ConnectivityVerdict(m, l, mode, True, None, None, seed, total)
    for t in range(trials):
        tup = tuple(rng.choice(A_sorted, size=m).tolist())
        if admissible_sigma(tup, A, l, group) is None:
            return ConnectivityVerdict(m, l, mode, False, tup, trials, seed, t + 1)
    return ConnectivityVerdict(m, l, mode, True, None, trials, seed, trials)


def energy(A: Iterable[int], group: FiniteAbelianGroup) -> float:
    """``||1_A * 1_A||_2^2`` with normalised counting measure."""
    one = indicator(group, A)
    return float(np.mean(np.abs(convolve(one, one).values) ** 2))


def energy_spectral(A: Iterable[int], group: FiniteAbelianGroup) -> float:
    """``sum_gamma |1_A^(gamma)|^4``; equal to :func:`energy` by Parseval."""
    return float(np.sum(np.abs(dft(indicator(group, A)).coefficients) ** 4))


@dataclass(frozen=True)
class EnergyReport:
    ratio: float | None
    m: int
    l: int
    exponent: int | None
    verdict: ConnectivityVerdict


def energy_lower_check(A: Iterable[int], m: int, l: int, group: FiniteAbelianGroup, budget: int = DEFAULT_BUDGET) -> EnergyReport:
    """``energy(A) / m(A)^3`` and the least integer ``C >= 0`` with ratio ``>= m^(-C l)``.

    Requires an exhaustive connectivity certificate.
    """
    A = frozenset(A)
    verdict = is_arithmetically_connected(A, m, l, group, Mode.EXHAUSTIVE, budget=budget)
    if not verdict.connected:
        raise NotConnected(f"A is not ({m},{l})-connected; counterexample {verdict.counterexample}")
    if not A:
        return EnergyReport(None, m, l, None, verdict)
    ratio = energy(A, group) / (len(A) / group.order) ** 3
    if ratio >= 1 - 1e-12:
        C = 0
    elif m <= 1 or l == 0:
        C = None
    else:
        C = max(0, math.ceil(-math.log(ratio) / (l * math.log(m)) - 1e-12))
    return EnergyReport(ratio, m, l, C, verdict)


@dataclass(frozen=True)
class ChebyshevCoefficients:
    """``T_{2l+1}(x) = sum_j coefficients[j] x^(2j+1)``."""

    l: int
    coefficients: tuple[int, ...]

    @property
    def degree(self) -> int:
        return 2 * self.l + 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return sum(c * x ** (2 * j + 1) for j, c in enumerate(self.coefficients))


def chebyshev_recurrence(n: int) -> list[int]:
    """Integer coefficients of ``T_n`` (index = power) from ``T_{k+1} = 2x T_k - T_{k-1}``."""
    prev, cur = [1], [0, 1]
    if n == 0:
        return prev
    for _ in range(n - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


def chebyshev_coeffs(l: int) -> ChebyshevCoefficients:
    """Closed-form odd coefficients of ``T_{2l+1}``, checked against the recurrence."""
    if not 0 <= l <= 64:
        raise ValueError("l must lie in [0, 64]")
    coeffs = []
    for j in range(l + 1):
        c = Fraction(4**j * (-1) ** (l - j) * (2 * l + 1), 2 * j + 1) * math.comb(l + j, 2 * j)
        if c.denominator != 1:
            raise InvariantBroken(f"c({j},{l}) = {c} is not an integer")
        coeffs.append(int(c))
    expanded = chebyshev_recurrence(2 * l + 1)
    if any(expanded[2 * j + 1] != coeffs[j] for j in range(l + 1)) or any(expanded[0::2]):
        raise InvariantBroken("closed form disagrees with the recurrence")
    return ChebyshevCoefficients(l, tuple(coeffs))


@dataclass(frozen=True, eq=False)
class MelaReport:
    """Every term of the Chebyshev chain for one candidate tuple ``x``.

    ``pairings[r]`` is ``<h^^(2r+1), g^>`` and ``integer_pairings[r]`` the same
    against ``g_Z``.  ``lower_bound`` is the exact right-hand side
    ``(2l+1)|b_0| - eps sum|c| - sum_{r>=1} |c_r||b_r|``; a contradiction is
    ``lower_bound > M``.
    """

    m: int
    l: int
    case: int
    omega: np.ndarray
    case_sum: complex
    case_floor: float
    counterexample: bool
    chebyshev_value: float
    lower_bound: float
    pairings: np.ndarray
    integer_pairings: np.ndarray
    key_bounds: np.ndarray
    asymptotic_shape: float
    M: float
    epsilon: float
    log: dict = field(default_factory=dict)

    @property
    def contradiction(self) -> bool:
        return self.lower_bound > self.M


def mela_refutation(g: DenseFunction, epsilon: float, M: float, m: int, l: int, x: Sequence[int]) -> MelaReport:
    """Evaluate the Chebyshev chain that rules out ``x`` as an ``(m, 2l+1)`` counterexample.

    ``omega`` follows the three sign cases on ``g_Z(x_j)`` versus
    ``g_Z(-x_j)``; the opposite-sign case uses ``i sgn g_Z(x_j)`` so the
    terms cannot cancel.
    """
    G = g.group
    x = [int(v) for v in x]
    if len(x) != m or m < 1:
        raise HypothesisViolated("x must have m entries")
    try:
        gz, dev = almost_round(g, epsilon)
    except NotAlmostInteger as exc:
        raise HypothesisViolated(str(exc)) from exc
    norm = wiener_norm(g)
    if norm > M + 1e-9:
        raise HypothesisViolated(f"||g||_A = {norm:.6g} exceeds M = {M}")
    z = np.real(gz.values).astype(np.int64)
    A = frozenset(np.flatnonzero(z).tolist())
    if not set(x) <= A:
        raise HypothesisViolated("x must lie in supp g_Z")
    counter = admissible_sigma(x, A, 2 * l + 1, G) is None

    pos = z[x]
    negv = z[G.neg_table[x]]
    zero = negv == 0
    same = (~zero) & (np.sign(pos) == np.sign(negv))
    opp = (~zero) & ~same
    omega = np.zeros(m, dtype=complex)
    if 3 * zero.sum() >= m:
        case, floor = 1, m / 6
        omega[zero] = np.sign(pos[zero])
    elif 3 * same.sum() >= m:
        case, floor = 2, m / 3
        omega[same] = np.sign(pos[same])
    else:
        case, floor = 3, m / 3
        omega[opp] = 1j * np.sign(pos[opp])
    case_sum = complex(np.sum(0.5 * (omega * pos + np.conj(omega) * negv)))
    if abs(case_sum) < floor - 1e-9:
        raise InvariantBroken(f"case {case} sum {abs(case_sum):.6g} below {floor}")

    h = np.zeros(G.order, dtype=complex)
    for w, xj in zip(omega, x):
        h[xj] += 0.5 * w * G.order / m
        h[G.neg(xj)] += 0.5 * np.conj(w) * G.order / m
    h_hat = dft(DenseFunction(G, h)).coefficients
    if np.abs(h_hat.imag).max() > 1e-9 or np.abs(h_hat.real).max() > 1 + 1e-9:
        raise InvariantBroken("h^ is not real with values in [-1, 1]")
    h_hat = h_hat.real
    g_hat = dft(g).coefficients
    gz_hat = dft(DenseFunction(G, z.astype(float))).coefficients
    powers = np.array([h_hat ** (2 * r + 1) for r in range(l + 1)])
    a = powers @ np.conj(g_hat)
    b = powers @ np.conj(gz_hat)
    if np.any(np.abs(a - b) > epsilon + 1e-9):
        raise InvariantBroken("|<h^k, g - g_Z>| exceeds epsilon")
    cheb = chebyshev_coeffs(l).coefficients
    c = np.array(cheb, dtype=float)
    value = float(abs(np.sum(c * a)))
    if value > M + 1e-6:
        raise InvariantBroken(f"|<T(h^), g^>| = {value:.6g} exceeds M")
    lower = (2 * l + 1) * abs(b[0]) - epsilon * np.abs(c).sum() - float(np.sum(np.abs(c[1:]) * np.abs(b[1:])))
    if value < lower - 1e-6:
        raise InvariantBroken("Chebyshev chain out of order")
    sup_z = float(np.abs(z).max())
    key = np.array([math.comb(m, r + 1) * (r + 1) ** (2 * r + 1) * sup_z / m ** (2 * r + 1) for r in range(l + 1)])
    if counter and np.any(np.abs(b) > key + 1e-9):
        raise InvariantBroken("pairing with g_Z above the counting bound")
    shape = l / 3 - epsilon * math.exp(l) - M * l**3 / m * math.exp(l * l / m)
    return MelaReport(
        m, l, case, omega, case_sum, floor, counter, value, float(lower), a, b, key, shape, M, epsilon,
        {"deviation": dev, "norm": norm},
    )


def connectivity_from_norm(
    f: DenseFunction,
    epsilon: float,
    M: float,
    c_mel: float = DEFAULT_C_MEL,
    c3: float = DEFAULT_C3,
    c2: float = DEFAULT_C2,
    trials: int = DEFAULT_TRIALS,
    seed: int | None = None,
) -> tuple[int, int, ConnectivityVerdict]:
    """Sampled connectivity of ``supp f_Z`` at ``m = ceil(c2 l^3)`` and ``l1`` bound ``2l + 1``, ``l = ceil(c3 M)``.

    Returns ``(m, 2l + 1, verdict)``.
    """
    if epsilon > math.exp(-c_mel * M):
        raise EpsilonTooLarge(f"epsilon = {epsilon} exceeds exp(-{c_mel} * {M})")
    norm = wiener_norm(f)
    if norm > M + 1e-9:
        raise HypothesisViolated(f"||f||_A = {norm:.6g} exceeds M = {M}")
    fz, _ = almost_round(f, epsilon)
    A = fz.support()
    l = math.ceil(c3 * M)
    m = math.ceil(c2 * l**3)
    verdict = is_arithmetically_connected(A, m, 2 * l + 1, f.group, Mode.SAMPLED, seed=seed, trials=trials)
    return m, 2 * l + 1, verdict
