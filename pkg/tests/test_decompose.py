import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idempotent.decompose import (
    DecompositionResult,
    Strategy,
    bsg_heuristic,
    decompose,
    decompose_paper,
    mitlem_step,
    oracle_min_l1,
    subgroup_greedy,
    verify_decomposition,
)
from idempotent.errors import EpsilonTooLarge, HypothesisViolated, OrderLimitExceeded
from idempotent.fourier import CosetCombination, DenseFunction, indicator, synthesize, wiener_norm
from idempotent.groups import FiniteAbelianGroup, enumerate_cosets, enumerate_subgroups

from . import oracles


def integer_function(G, values):
    return DenseFunction(G, np.asarray(values, dtype=float))


def subgroup_of_order(G, order):
    return [H for H in enumerate_subgroups(G) if H.order == order][0]


def test_oracle_examples():
    G = FiniteAbelianGroup((12,))
    H = subgroup_of_order(G, 4)
    assert oracle_min_l1(indicator(G, H.members)).l1_weight == 1
    Z4 = FiniteAbelianGroup((4,))
    assert oracle_min_l1(indicator(Z4, {0, 1})).l1_weight == 2
    assert oracle_min_l1(DenseFunction(Z4, np.zeros(4))).l1_weight == 0


@pytest.mark.parametrize("p", [7, 11, 13])
def test_oracle_on_intervals(p):
    G = FiniteAbelianGroup((p,))
    for L in range(1, p + 1):
        res = oracle_min_l1(indicator(G, range(L)))
        assert res.l1_weight == oracles.ap_min_weight(p, L) == min(L, p - L + 1)
        assert res.residual_sup == 0


@pytest.mark.parametrize("factors", [(4,), (2, 2), (5,)])
def test_oracle_matches_breadth_first_search(factors):
    G = FiniteAbelianGroup(factors)
    dist = oracles.box_minimum_weights(factors, bound=3)
    rng = np.random.default_rng(len(factors) + sum(factors))
    for _ in range(40):
        values = rng.integers(-2, 3, size=G.order)
        f = integer_function(G, values)
        assert oracle_min_l1(f).l1_weight == dist[oracles.encode(values, 3)]


def test_oracle_order_limit():
    G = FiniteAbelianGroup((40,))
    with pytest.raises(OrderLimitExceeded):
        oracle_min_l1(indicator(G, {0}))


def test_greedy_examples():
    G = FiniteAbelianGroup((12,))
    H = subgroup_of_order(G, 6)
    res = subgroup_greedy(indicator(G, H.members))
    assert len(res.combination.terms) == 1 and res.l1_weight == 1
    W, Wp = subgroup_of_order(G, 4).cosets()[1], subgroup_of_order(G, 2).cosets()[0]
    f = 2 * indicator(G, W.members) - indicator(G, Wp.members)
    res = subgroup_greedy(f)
    assert 2 <= len(res.combination.terms) <= 3
    assert verify_decomposition(f, res)


@given(st.lists(st.integers(-3, 3), min_size=8, max_size=8))
@settings(max_examples=60, deadline=None)
def test_greedy_weight_at_most_l1(values):
    G = FiniteAbelianGroup((8,))
    f = integer_function(G, values)
    res = subgroup_greedy(f)
    assert res.residual_sup == 0
    assert res.l1_weight <= sum(abs(v) for v in values)


def test_verify_detects_corrupted_coefficient():
    G = FiniteAbelianGroup((2, 4))
    f = indicator(G, subgroup_of_order(G, 4).members)
    good = oracle_min_l1(f)
    assert verify_decomposition(f, good)
    (W, c), *rest = good.combination.terms
    bad = CosetCombination(((W, c + 1), *rest))
    result = DecompositionResult(G, bad, 1.0, [], Strategy.ORACLE)
    verdict = verify_decomposition(f, result)
    assert not verdict
    assert not verdict.exact
    assert verdict.first_mismatch == G.element(min(W.members))


def test_verify_flags_non_integer_input():
    G = FiniteAbelianGroup((4,))
    f = DenseFunction(G, np.array([1.0, 0.0, 0.0, 0.05]))
    res = oracle_min_l1(indicator(G, {0}))
    assert not verify_decomposition(f, res)
    assert verify_decomposition(f, res, epsilon=0.1)


def test_bsg_examples():
    G = FiniteAbelianGroup((12,))
    H = subgroup_of_order(G, 4).member_set
    A_prime, doubling = bsg_heuristic(H, G)
    assert A_prime == H and doubling == 1
    A_prime, _ = bsg_heuristic(H | {1}, G)
    assert A_prime == H
    rng = np.random.default_rng(0)
    A = frozenset(rng.choice(12, 6, replace=False).tolist())
    A_prime, doubling = bsg_heuristic(A, G)
    assert A_prime <= A
    assert doubling == pytest.approx(len(G.sumset(A_prime, A_prime)) / len(A_prime))
    with pytest.raises(ValueError):
        bsg_heuristic(set(), G)


def mitlem_eta(M):
    return 4.0 ** (-2 * M - 3) * math.exp(-4 * M)


def test_mitlem_step_on_subgroup_indicator():
    G = FiniteAbelianGroup((12,))
    H = subgroup_of_order(G, 4)
    f = indicator(G, H.members)
    step = mitlem_step(f, 0.0, 1.0, mitlem_eta(1.0), seed=0)
    assert step.log["norm_drop"] >= 0.5
    assert synthesize(CosetCombination(tuple(step.z.items())), G).values.tolist() == f.values.tolist()
    assert np.allclose(step.g.values, f.values, atol=1e-9)


def test_mitlem_step_on_two_subgroups():
    G = FiniteAbelianGroup((12,))
    f = indicator(G, subgroup_of_order(G, 4).members) + indicator(G, subgroup_of_order(G, 3).members)
    M = wiener_norm(f)
    g, H, z, log = mitlem_step(f, 0.0, M, mitlem_eta(M), seed=0)
    assert log["norm_drop"] >= 0.5
    k = synthesize(CosetCombination(tuple(z.items())), G).values
    assert np.allclose(g.values, k, atol=1e-9)
    for W in H.cosets():
        assert len({k[x] for x in W.members}) == 1


def test_mitlem_step_rejects_empty_and_large_epsilon():
    G = FiniteAbelianGroup((12,))
    with pytest.raises(HypothesisViolated):
        mitlem_step(DenseFunction(G, np.zeros(12)), 0.0, 1.0, mitlem_eta(1.0))
    with pytest.raises(EpsilonTooLarge):
        mitlem_step(indicator(G, {0}), 0.3, 1.0, mitlem_eta(1.0))


def test_pipeline_on_constant():
    G = FiniteAbelianGroup((6,))
    res = decompose_paper(3 * indicator(G, range(6)), seed=0)
    assert res.l1_weight == 3 and res.residual_sup == 0
    assert verify_decomposition(3 * indicator(G, range(6)), res)


def test_pipeline_on_mixed_combination():
    G = FiniteAbelianGroup((2, 4))
    H, Hp = subgroup_of_order(G, 4), [H for H in enumerate_subgroups(G) if H.order == 2][1]
    coset = [W for W in enumerate_cosets(G) if W.subgroup.order == 2 and W.representative != 0][0]
    f = indicator(G, H.members) - indicator(G, Hp.members) + indicator(G, coset.members)
    res = decompose_paper(f, seed=0)
    assert res.residual_sup == 0
    assert res.l1_weight <= 8 * oracle_min_l1(f).l1_weight
    assert verify_decomposition(f, res)
    for r in res.rounds:
        if "norm_drop" in r:
            assert r["norm_drop"] >= 0.5 - 1e-6


def test_pipeline_rejects_large_epsilon():
    G = FiniteAbelianGroup((6,))
    with pytest.raises(EpsilonTooLarge):
        decompose_paper(indicator(G, {0}), epsilon=0.3)


def test_pipeline_rejects_norm_above_m():
    G = FiniteAbelianGroup((6,))
    with pytest.raises(HypothesisViolated):
        decompose_paper(indicator(G, {0, 1}), M=1.0)


def test_dispatch_and_json():
    G = FiniteAbelianGroup((6,))
    f = indicator(G, {0, 3})
    for name, strategy in (("oracle", Strategy.ORACLE), ("greedy", Strategy.SUBGROUP_GREEDY)):
        res = decompose(f, name)
        assert res.strategy is strategy and res.l1_weight == 1
    doc = decompose(f, "paper", seed=0).to_json()
    assert set(doc) == {"strategy", "terms", "l1", "residual_sup", "rounds"}
    assert doc["l1"] == sum(abs(t["coefficient"]) for t in doc["terms"])
    assert all(set(t) == {"subgroup_generators", "coset_rep", "coefficient"} for t in doc["terms"])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_weight_sandwich(seed):
    rng = np.random.default_rng(seed)
    G = FiniteAbelianGroup([(6,), (8,), (2, 4), (3, 3), (10,)][seed % 5])
    f = integer_function(G, rng.integers(-2, 3, size=G.order))
    res = oracle_min_l1(f)
    assert res.residual_sup == 0
    assert wiener_norm(f) <= res.l1_weight + 1e-9
    assert res.l1_weight <= np.abs(f.values).sum()
    assert res.l1_weight <= subgroup_greedy(f).l1_weight


def test_pipeline_falls_back_when_a_claim_fails(monkeypatch):
    import sys

    from idempotent.errors import ClaimFailed

    # The package re-exports a function named ``decompose``, so go through sys.modules.
    dec = sys.modules["idempotent.decompose"]

    def failing(*args, **kwargs):
        raise ClaimFailed("quarter_integrality", "forced")

    monkeypatch.setattr(dec, "mitlem_step", failing)
    G = FiniteAbelianGroup((2, 4))
    f = indicator(G, {0, 1, 5})
    res = decompose_paper(f, seed=0)
    assert res.strategy is Strategy.SUBGROUP_GREEDY
    assert res.residual_sup == 0 and verify_decomposition(f, res)
    assert res.rounds[0]["failed"] == "ClaimFailed"
    assert res.rounds[-1]["fallback"] == Strategy.SUBGROUP_GREEDY.value
    with pytest.raises(ClaimFailed):
        decompose_paper(f, seed=0, fallback=False)
