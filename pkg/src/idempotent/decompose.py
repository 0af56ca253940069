"""Decomposition of integer-valued functions into integer combinations of coset indicators.

Three strategies produce a :class:`DecompositionResult`:

* ``ORACLE`` solves the minimal-weight problem exactly as an integer program
  over the full coset dictionary;
* ``PAPER_PIPELINE`` iterates :func:`mitlem_step`, peeling off an
  ``H``-invariant integer part per round while the algebra norm drops by at
  least 1/2;
* ``SUBGROUP_GREEDY`` repeatedly subtracts the unit coset term that most
  reduces ``sum |f|``.

Every result is checked by exact integer resynthesis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .connectivity import DEFAULT_C_MEL, connectivity_from_norm
from .errors import (
    ClaimFailed,
    EpsilonTooLarge,
    HypothesisViolated,
    IdempotentError,
    Infeasible,
    InvariantBroken,
    OrderLimitExceeded,
    RoundBudgetExceeded,
)
from .fourier import CosetCombination, DenseFunction, almost_round, dft, synthesize, wiener_norm
from .freiman import freiman_bohr
from .groups import Coset, FiniteAbelianGroup, closure, enumerate_cosets, subgroup_from_set
from .measures import convolve_measures, fourier_measure, smooth, tilde_measure
from .continuity import quantitative_continuity, translated_lp

ORACLE_LIMIT = 32
# Integrality tolerances below this are not resolvable in double precision.
NUMERIC_FLOOR = 1e-9
DEFAULT_CONNECTIVITY_TRIALS = 8


class Strategy(enum.Enum):
    ORACLE = "ORACLE"
    PAPER_PIPELINE = "PAPER_PIPELINE"
    SUBGROUP_GREEDY = "SUBGROUP_GREEDY"


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    group: FiniteAbelianGroup
    combination: CosetCombination
    residual_sup: float
    rounds: list
    strategy: Strategy

    @property
    def l1_weight(self) -> int:
        return self.combination.l1_weight

    def to_json(self) -> dict:
        G = self.group
        terms = []
        for W, c in sorted(self.combination.terms, key=lambda t: (t[0].subgroup.members, t[0].representative)):
            terms.append(
                {
                    "subgroup_generators": [list(G.element(g)) for g in W.subgroup.generators],
                    "coset_rep": list(G.element(W.representative)),
                    "coefficient": int(c),
                }
            )
        return {
            "strategy": self.strategy.value,
            "terms": terms,
            "l1": self.l1_weight,
            "residual_sup": self.residual_sup,
            "rounds": self.rounds,
        }


@lru_cache(maxsize=32)
def _dictionary(group: FiniteAbelianGroup, limit: int) -> tuple[tuple[Coset, ...], np.ndarray]:
    cosets = tuple(enumerate_cosets(group, limit))
    matrix = np.zeros((group.order, len(cosets)), dtype=np.int64)
    for j, W in enumerate(cosets):
        matrix[list(W.members), j] = 1
    return cosets, matrix


def _integer_values(f: DenseFunction) -> np.ndarray:
    if not f.is_integer_valued():
        raise ValueError("f must be integer-valued")
    return np.round(np.real(np.asarray(f.values))).astype(np.int64)


def _result(f_int: np.ndarray, group, combination, rounds, strategy) -> DecompositionResult:
    synth = synthesize(combination, group).values
    residual = float(np.abs(f_int - synth).max()) if f_int.size else 0.0
    return DecompositionResult(group, combination, residual, rounds, strategy)


def oracle_min_l1(f: DenseFunction, limit: int = ORACLE_LIMIT) -> DecompositionResult:
    """Exact minimum of ``sum |z(W)|`` over integer ``z`` with ``sum z(W) 1_W = f``.

    Solved as a mixed-integer program (``z = z+ - z-``) by branch and bound.
    The objective is confined between the rounded-up LP relaxation and the
    greedy incumbent; when those meet the incumbent is already optimal.  The
    result is checked by resynthesis.
    """
    G = f.group
    if G.order > limit:
        raise OrderLimitExceeded(f"|G| = {G.order} exceeds oracle limit {limit}")
    target = _integer_values(f)
    cosets, matrix = _dictionary(G, limit)
    n = len(cosets)
    if not target.any():
        return _result(target, G, CosetCombination(), [], Strategy.ORACLE)
    A = np.hstack([matrix, -matrix]).astype(float)
    b = target.astype(float)
    incumbent = subgroup_greedy(f)
    relaxed = linprog(np.ones(2 * n), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if relaxed.status != 0:
        raise Infeasible(f"LP relaxation status {relaxed.status}: {relaxed.message}")
    lower = math.ceil(relaxed.fun - 1e-6)
    if incumbent.l1_weight <= lower:
        return _result(target, G, incumbent.combination, [], Strategy.ORACLE)
    res = milp(
        c=np.ones(2 * n),
        constraints=[
            LinearConstraint(A, b, b),
            LinearConstraint(np.ones((1, 2 * n)), lower, incumbent.l1_weight),
        ],
        integrality=np.ones(2 * n),
        bounds=Bounds(0, np.inf),
        options={"mip_rel_gap": 0.0},
    )
    if res.status != 0 or res.x is None:
        raise Infeasible(f"solver status {res.status}: {res.message}")
    z = np.round(res.x[:n] - res.x[n:]).astype(np.int64)
    combination = CosetCombination(tuple((cosets[j], int(z[j])) for j in np.flatnonzero(z)))
    result = _result(target, G, combination, [], Strategy.ORACLE)
    if result.residual_sup != 0:
        raise Infeasible("solver output does not resynthesize f")
    if combination.l1_weight > incumbent.l1_weight:
        raise Infeasible("solver optimum worse than the greedy incumbent")
    return result


def subgroup_greedy(f: DenseFunction, limit: int = 256) -> DecompositionResult:
    """Subtract the unit coset term that most reduces ``sum |f|`` until ``f = 0``.

    Ties go to the larger subgroup, then to the earlier coset in canonical
    order.  Singletons always reduce the sum by one, so this terminates with
    weight at most ``sum |f|``.
    """
    G = f.group
    target = _integer_values(f)
    cosets, matrix = _dictionary(G, limit)
    sizes = matrix.sum(axis=0)
    rest = target.copy()
    terms = []
    # Sort key: larger reduction, then larger subgroup, then canonical index.
    order_key = -sizes * len(cosets) + np.arange(len(cosets))
    while rest.any():
        pos = matrix.T @ (rest > 0)
        neg = matrix.T @ (rest < 0)
        gains = np.stack([2 * pos - sizes, 2 * neg - sizes])
        best = gains.max()
        candidates = [(order_key[j], s, j) for s in (0, 1) for j in np.flatnonzero(gains[s] == best)]
        _, s, j = min(candidates)
        sign = 1 if s == 0 else -1
        terms.append((cosets[j], sign))
        rest[matrix[:, j] == 1] -= sign
    return _result(target, G, CosetCombination(tuple(terms)), [], Strategy.SUBGROUP_GREEDY)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    exact: bool
    first_mismatch: tuple | None
    weight: int
    wiener_norm: float
    norm_within_weight: bool

    def __bool__(self):
        return self.ok


def verify_decomposition(f: DenseFunction, result: DecompositionResult, epsilon: float = 0.0) -> Verdict:
    """Exact resynthesis against ``f_Z`` and the bound ``||f||_A <= weight``."""
    G = f.group
    values = np.asarray(f.values)
    target = np.round(np.real(values)).astype(np.int64)
    synth = synthesize(result.combination, G).values
    diff = np.flatnonzero(target != synth)
    exact = diff.size == 0 and float(np.abs(values - target).max(initial=0.0)) <= max(epsilon, NUMERIC_FLOOR)
    mismatch = None if diff.size == 0 else G.element(int(diff[0]))
    weight = sum(abs(int(c)) for _, c in result.combination.terms)
    norm = wiener_norm(DenseFunction(G, target))
    norm_ok = norm <= weight + 1e-9
    return Verdict(exact and norm_ok, exact, mismatch, weight, norm, norm_ok)


def bsg_heuristic(A: Iterable[int], group: FiniteAbelianGroup) -> tuple[frozenset[int], float]:
    """Densest large component of the popularity graph of ``A`` and its doubling ``|A'+A'|/|A'|``.

    ``a ~ b`` when ``a + b`` has at least ``theta |A|`` representations in
    ``A + A``; ``theta`` runs over 1, 3/4, 1/2, ... until some component holds
    at least half of ``A``.  Components are ranked by edge density, then
    size, then least element.
    """
    A = sorted(frozenset(A))
    if not A:
        raise ValueError("A must be non-empty")
    n = len(A)
    mask = group.mask(A).astype(np.int64)
    idx = np.array(A)
    reps = np.array([int(mask[group.add_table[a, idx]].sum()) for a in range(group.order)])
    # reps[x] = #{(u, v) in A^2 : u + v = x}
    pair_reps = reps[group.add_table[np.ix_(idx, idx)]]
    thetas = [1.0, 0.75] + [2.0**-k for k in range(1, 2 + math.ceil(math.log2(n + 1)))]
    for theta in thetas:
        adj = pair_reps >= theta * n
        comps = _components(adj)
        big = [c for c in comps if 2 * len(c) >= n]
        if big:
            break
    else:  # pragma: no cover - theta below 1/n makes the graph complete
        big = [list(range(n))]

    def density(c):
        sub = adj[np.ix_(c, c)]
        edges = (int(sub.sum()) + int(np.trace(sub))) // 2
        return edges / (len(c) * (len(c) + 1) / 2)

    best = max(big, key=lambda c: (density(c), len(c), -min(c)))
    A_prime = frozenset(int(idx[i]) for i in best)
    doubling = len(group.sumset(A_prime, A_prime)) / len(A_prime)
    return A_prime, doubling


def _components(adj: np.ndarray) -> list[list[int]]:
    n = adj.shape[0]
    label = -np.ones(n, dtype=int)
    comps = []
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = len(comps)
        stack, comp = [s], []
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in np.flatnonzero(adj[u] & (label < 0)):
                label[v] = len(comps)
                stack.append(int(v))
        comps.append(sorted(comp))
    return comps


@dataclass(frozen=True, eq=False)
class MitlemResult:
    g: DenseFunction
    H: object
    z: dict
    log: dict

    def __iter__(self):
        return iter((self.g, self.H, self.z, self.log))


def mitlem_step(
    f: DenseFunction,
    epsilon: float,
    M: float,
    eta: float,
    seed: int | None = None,
    c_mel: float = DEFAULT_C_MEL,
    c_cs: float = 64,
    connectivity_trials: int = DEFAULT_CONNECTIVITY_TRIALS,
) -> MitlemResult:
    """One extraction round: ``g`` close to the integer-valued, ``H``-invariant ``k``.

    Returns ``(g, H, z, log)`` where ``g_Z = k = sum_W z(W) 1_W`` over cosets
    of ``H``.  All five intermediate claims are checked and a failing one
    raises :class:`ClaimFailed`.
    """
    if epsilon > min(math.exp(-c_mel * M), 1 / 8):
        raise EpsilonTooLarge(f"epsilon = {epsilon} exceeds min(exp(-{c_mel} M), 1/8)")
    G = f.group
    tol = max(epsilon, NUMERIC_FLOOR)
    fz, _ = almost_round(f, tol)
    A = fz.support()
    if not A:
        raise HypothesisViolated("f_Z vanishes identically")
    log: dict = {"A_size": len(A)}

    m_conn, l_conn, verdict = connectivity_from_norm(
        f, min(epsilon, math.exp(-c_mel * M)), M, c_mel=c_mel, trials=connectivity_trials, seed=seed
    )
    log["connectivity"] = {"m": m_conn, "l": l_conn, "connected": verdict.connected}

    A_prime, doubling = bsg_heuristic(A, G)
    log["A_prime"] = sorted(A_prime)
    log["doubling"] = doubling
    cert = freiman_bohr(A_prime, G, seed=seed, c_cs=c_cs)
    psi = cert.density_lower
    log["psi"] = psi

    delta = 1 / (16 * M)
    kappa = 1 / (32 * M)
    p = max(100 * c_mel * M, 1 + math.log2(1 / psi), 3 + math.log(M, 3) + math.log(1 / eta, 3))
    log["p"] = p
    cont = quantitative_continuity(A_prime, cert.bohr, f, delta, kappa, p, seed=seed, c_cs=c_cs)
    B_prime, mu, nu = cont.bohr, cont.mu, cont.nu
    log["continuity_rounds"] = len(cont.rounds)

    smoothed = smooth(f, mu)
    k_vals = np.round(np.real(smoothed.values)).astype(np.int64)
    quarter = float(np.abs(smoothed.values - k_vals).max())
    log["quarter_deviation"] = quarter
    if quarter > 0.25:
        raise ClaimFailed("quarter_integrality", f"||f*mu - k||_inf = {quarter:.4g}")
    k = DenseFunction(G, k_vals)
    near = translated_lp(fz - k, nu, p)
    log["lp_to_k"] = float(near.max())

    core = sorted(B_prime.bohr_set(kappa))
    for y in core:
        if np.any(k_vals[G.add_table[y]] != k_vals):
            raise ClaimFailed("kappa_invariance", f"k moves under translation by {G.element(y)}")
    H = subgroup_from_set(G, closure(G, core))
    z = {}
    for W in H.cosets():
        vals = k_vals[list(W.members)]
        if np.any(vals != vals[0]):
            raise InvariantBroken("k is not constant on a coset of H")
        if vals[0] != 0:
            z[W] = int(vals[0])
    log["H_order"] = H.order
    log["H_generators"] = [list(G.element(g)) for g in H.generators]

    nunu = convolve_measures(nu, tilde_measure(nu))
    g = smooth(f, nunu)
    gap = float(np.abs(g.values - k_vals).max())
    log["g_integrality"] = gap
    if gap > max(epsilon + eta, NUMERIC_FLOOR):
        raise ClaimFailed("g_integrality", f"||g - k||_inf = {gap:.4g} exceeds eps + eta")
    if not k_vals.any():
        raise ClaimFailed("k_nonzero")
    l1 = float(np.abs(k_vals).mean())
    if l1 > 2 * M * len(A) / G.order * (1 + 1e-12):
        raise ClaimFailed("k_l1", f"||k||_1 = {l1:.4g} exceeds 2M m(A)")

    f_norm = wiener_norm(f)
    rest_norm = wiener_norm(f - g)
    nu_hat = fourier_measure(nunu)
    predicted = float((np.abs(dft(f).coefficients) * (1 - np.real(nu_hat))).sum())
    if abs(rest_norm - predicted) > 1e-7 * max(1.0, f_norm):
        raise InvariantBroken(f"||f - g||_A = {rest_norm:.9g} but the spectral formula gives {predicted:.9g}")
    log["norm_before"] = f_norm
    log["norm_after"] = rest_norm
    log["norm_drop"] = f_norm - rest_norm
    return MitlemResult(g, H, z, log)


def _epsilon_schedule(i: int, epsilon: float, M: float, c_mel: float) -> float:
    return 2**i * epsilon + 4.0 ** (i - 2 * M - 4) * math.exp(-c_mel * M)


def decompose_paper(
    f: DenseFunction,
    epsilon: float = 0.0,
    M: float | None = None,
    seed: int | None = None,
    c_mel: float = DEFAULT_C_MEL,
    c_mel_gate: float | None = None,
    c_cs: float = 64,
    fallback: bool = True,
    oracle_limit: int = ORACLE_LIMIT,
    connectivity_trials: int = DEFAULT_CONNECTIVITY_TRIALS,
) -> DecompositionResult:
    """Iterated extraction rounds until ``f_Z`` is exhausted.

    ``f_{i+1} = f_i - g_i`` with ``||f_{i+1}||_A <= ||f_i||_A - 1/2`` asserted,
    so at most ``2M + 1`` rounds run.  When a round fails its checks the
    remainder goes to :func:`subgroup_greedy` (and to the oracle if the
    greedy pass fails), unless ``fallback`` is off.
    """
    G = f.group
    c_gate = c_mel + 2 if c_mel_gate is None else c_mel_gate
    norm = wiener_norm(f)
    if M is None:
        M = max(1.0, norm)
    if epsilon > math.exp(-c_gate * M):
        raise EpsilonTooLarge(f"epsilon = {epsilon} exceeds exp(-{c_gate} * {M})")
    if norm > M + 1e-9:
        raise HypothesisViolated(f"||f||_A = {norm:.6g} exceeds M = {M}")
    fz, _ = almost_round(f, max(epsilon, NUMERIC_FLOOR))
    target = np.asarray(fz.values)
    eta = 4.0 ** (-2 * M - 3) * math.exp(-c_mel * M)
    budget = math.floor(2 * M) + 1
    ceiling = min(math.exp(-c_mel * M), 1 / 8)

    terms: list = []
    rounds: list = []
    current = f
    failure = None
    for i in range(budget + 1):
        eps_i = _epsilon_schedule(i, epsilon, M, c_mel)
        if not eps_i < ceiling:
            raise InvariantBroken(f"round {i}: eps_i = {eps_i:.4g} not below {ceiling:.4g}")
        cz, dev = almost_round(current, max(eps_i, NUMERIC_FLOOR))
        if not np.any(cz.values):
            break
        if i == budget:
            failure = RoundBudgetExceeded(f"f_Z nonzero after {budget} rounds")
            break
        try:
            step = mitlem_step(
                current, eps_i, M, eta, seed=None if seed is None else seed + i, c_mel=c_mel, c_cs=c_cs,
                connectivity_trials=connectivity_trials,
            )
        except (ClaimFailed, IdempotentError) as exc:
            if isinstance(exc, (EpsilonTooLarge, HypothesisViolated)) and not fallback:
                raise
            failure = exc
            rounds.append({"round": i, "failed": type(exc).__name__, "detail": str(exc)})
            break
        drop = step.log["norm_drop"]
        if step.log["norm_after"] > step.log["norm_before"] - 0.5 + 1e-6:
            raise InvariantBroken(f"round {i}: norm drop {drop:.6g} below 1/2")
        terms.extend(step.z.items())
        rounds.append(
            {
                "round": i,
                "epsilon_i": eps_i,
                "deviation": dev,
                "H_order": step.H.order,
                "H_generators": step.log["H_generators"],
                "z": {str(list(G.element(W.representative))): c for W, c in step.z.items()},
                "norm_before": step.log["norm_before"],
                "norm_after": step.log["norm_after"],
                "norm_drop": drop,
            }
        )
        current = current - step.g

    strategy = Strategy.PAPER_PIPELINE
    if failure is not None:
        if not fallback:
            raise failure
        rest_vals = target - synthesize(CosetCombination(tuple(terms)), G).values
        rest = DenseFunction(G, rest_vals)
        try:
            extra = subgroup_greedy(rest)
            strategy = Strategy.SUBGROUP_GREEDY
        except IdempotentError:
            if G.order > oracle_limit:
                raise failure
            extra = oracle_min_l1(rest, oracle_limit)
            strategy = Strategy.ORACLE
        terms.extend(extra.combination.terms)
        rounds.append({"fallback": strategy.value, "reason": type(failure).__name__, "weight": extra.l1_weight})
    result = _result(target, G, CosetCombination(tuple(terms)), rounds, strategy)
    if result.residual_sup != 0:
        raise InvariantBroken(f"reconstruction off by {result.residual_sup}")
    return result


def decompose(f: DenseFunction, strategy: str | Strategy = Strategy.ORACLE, **kwargs) -> DecompositionResult:
    """Dispatch by strategy name (``oracle``, ``paper`` or ``greedy``)."""
    if isinstance(strategy, str):
        strategy = {"oracle": Strategy.ORACLE, "paper": Strategy.PAPER_PIPELINE, "greedy": Strategy.SUBGROUP_GREEDY}[
            strategy.lower()
        ]
    if strategy is Strategy.ORACLE:
        return oracle_min_l1(f, kwargs.get("oracle_limit", ORACLE_LIMIT))
    if strategy is Strategy.SUBGROUP_GREEDY:
        return subgroup_greedy(f)
    return decompose_paper(f, **kwargs)
