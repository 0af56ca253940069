import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idempotent.bohr import BohrSystem, constant_system, dilate, subgroup_to_bohr
from idempotent.errors import HypothesisViolated, ZeroFunction
from idempotent.fourier import DenseFunction, Spectrum, idft, indicator, wiener_norm
from idempotent.groups import FiniteAbelianGroup, annihilator as exact_annihilator, enumerate_subgroups
from idempotent.measures import build_invariant_measure, haar, invariant_on_bohr, uniform
from idempotent.spectral import (
    annihilator,
    bohr_from_support,
    bohr_invariance_deviation,
    chord_table,
    croot_sisask_sample,
    duality_embed_chars,
    duality_embed_set,
    majorising_annihilator_check,
    sumset_spectrum_containment,
    translate_deviation,
)

from . import oracles


def oracle_annihilator(factors, S, rho):
    els = oracles.elements(factors)
    return frozenset(
        a for a, ga in enumerate(els) if all(abs(1 - oracles.character_value(factors, ga, els[x])) < rho for x in S)
    )


def spectrum_function(G, chars, rng, norm=None):
    F = np.zeros(G.order, dtype=complex)
    F[list(chars)] = rng.normal(size=len(chars)) + 1j * rng.normal(size=len(chars))
    g = idft(Spectrum(G, F))
    if norm is not None:
        g = DenseFunction(G, g.values * norm / wiener_norm(g))
    return g


def test_annihilator_examples():
    G = FiniteAbelianGroup((8,))
    assert annihilator({0}, 0.1, G).characters == frozenset(range(8))
    assert annihilator(range(8), 0.5, G).characters == frozenset({0})
    assert 0 in annihilator({1, 3, 5}, 1e-6, G)
    with pytest.raises(ValueError):
        annihilator({0}, 0, G)


@pytest.mark.parametrize("factors", [(8,), (12,), (2, 6), (3, 3)])
def test_annihilator_against_definition(factors):
    G = FiniteAbelianGroup(factors)
    rng = np.random.default_rng(sum(factors))
    for _ in range(10):
        S = frozenset(rng.choice(G.order, int(rng.integers(1, 4)), replace=False).tolist())
        rho = float(rng.uniform(0.2, 2.1))
        assert annihilator(S, rho, G).characters == oracle_annihilator(factors, S, rho)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_annihilator_axioms(seed):
    rng = np.random.default_rng(seed)
    G = FiniteAbelianGroup([(12,), (4, 4), (2, 2, 3), (30,)][seed % 4])
    S = frozenset(rng.choice(G.order, int(rng.integers(1, 5)), replace=False).tolist())
    r1, r2 = (float(v) for v in rng.uniform(0.1, 1.5, size=2))
    N1, N2 = annihilator(S, r1, G).characters, annihilator(S, r2, G).characters
    assert 0 in N1
    assert G.negset(N1) == N1
    if r1 <= r2:
        assert N1 <= N2
    assert G.sumset(N1, N2) <= annihilator(S, r1 + r2 + 1e-12, G).characters


@pytest.mark.parametrize("factors", [(64,), (8, 8), (2, 4, 6), (5, 12)])
def test_chord_bridge_inequality(factors):
    G = FiniteAbelianGroup(factors)
    chord = chord_table(G)
    dist = G.distance_table / G.exponent_lcm
    assert np.all(2 * math.sqrt(2) * dist <= chord + 1e-12)
    assert np.all(chord <= 2 * math.pi * dist + 1e-12)


def test_chord_against_complex_exponential():
    G = FiniteAbelianGroup((3, 4))
    els = oracles.elements(G.factors)
    chord = chord_table(G)
    for a, ga in enumerate(els):
        for x, gx in enumerate(els):
            assert chord[a, x] == pytest.approx(abs(1 - oracles.character_value(G.factors, ga, gx)), abs=1e-12)


def test_majorising_for_subgroup_measure():
    G = FiniteAbelianGroup((12,))
    for H in enumerate_subgroups(G):
        mu = uniform(G, H.members)
        rep = majorising_annihilator_check(mu, subgroup_to_bohr(H), Fraction(1, 2), Fraction(1, 2))
        assert rep.left == exact_annihilator(G, H.member_set)
        assert rep.holds
        for kappa in (Fraction(1), Fraction(1, 4)):
            for eta in (Fraction(1), Fraction(1, 8)):
                assert majorising_annihilator_check(mu, subgroup_to_bohr(H), kappa, eta).holds


def test_majorising_for_haar():
    G = FiniteAbelianGroup((2, 6))
    B = BohrSystem(G, (1, 7), (Fraction(1, 3), Fraction(1, 5)))
    rep = majorising_annihilator_check(haar(G), B, Fraction(1, 2), Fraction(1, 4))
    assert rep.left == frozenset({0}) and rep.holds


def test_majorising_for_constructed_measure():
    G = FiniteAbelianGroup((100,))
    B = constant_system(G, [1], Fraction(1, 4))
    X = B.bohr_set(Fraction(1, 2))
    built = build_invariant_measure(B, X, len(G.sumset(X, B.bohr_set(1))) / len(X))
    rep = majorising_annihilator_check(built.measure, dilate(B, built.lam), Fraction(1, 2), Fraction(1, 2))
    assert rep.holds and rep.violations == frozenset()


def test_duality_embed_set_examples():
    G = FiniteAbelianGroup((12,))
    H = enumerate_subgroups(G)[3]
    B = duality_embed_set(H.members, 0.01, G)
    assert frozenset(B.characters) == exact_annihilator(G, H.member_set)
    assert H.member_set <= B.bohr_set(1)
    assert 0 in duality_embed_set({0}, 0.3, G).bohr_set(1)
    X = {0, 1}
    B = duality_embed_set(X, 0.5, G)
    assert frozenset(X) <= B.bohr_set(1)
    assert B.widths[0] >= Fraction(0.5 / (2 * math.sqrt(2)))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_duality_embed_set_random(seed):
    rng = np.random.default_rng(seed)
    G = FiniteAbelianGroup([(24,), (4, 6)][seed % 2])
    X = frozenset(rng.choice(G.order, int(rng.integers(1, 5)), replace=False).tolist())
    B = duality_embed_set(X, float(rng.uniform(0.05, 1)), G)
    assert X <= B.bohr_set(1)


def test_duality_embed_chars_examples():
    G = FiniteAbelianGroup((12,))
    eps, rep = duality_embed_chars(constant_system(G, [0], Fraction(1, 5)))
    assert rep.holds
    eps, rep = duality_embed_chars(constant_system(G, [1], Fraction(1, 5)))
    assert eps == pytest.approx(2 * math.pi / 5) and rep.holds
    Z24 = FiniteAbelianGroup((24,))
    rng = np.random.default_rng(7)
    for _ in range(20):
        chars = tuple(int(a) for a in rng.integers(0, 24, size=3))
        widths = tuple(Fraction(int(rng.integers(1, 10)), 40) for _ in range(3))
        assert duality_embed_chars(BohrSystem(Z24, chars, widths))[1].holds


def test_sumset_spectrum_examples():
    G = FiniteAbelianGroup((12,))
    H = enumerate_subgroups(G)[3].member_set
    assert sumset_spectrum_containment(H, H, 0.5, 1, G).holds
    full = frozenset(range(12))
    rep = sumset_spectrum_containment(full, full, 0.5, 1, G)
    assert rep.left == frozenset({0}) and rep.holds
    Z16 = FiniteAbelianGroup((16,))
    rep = sumset_spectrum_containment(range(4), {0, 1}, 0.1, 5 / 4, Z16)
    assert rep.holds and 0 in rep.left
    with pytest.raises(HypothesisViolated):
        sumset_spectrum_containment(range(4), {0, 1}, 0.1, 1.0, Z16)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_sumset_spectrum_random(seed):
    rng = np.random.default_rng(seed)
    G = FiniteAbelianGroup([(20,), (2, 8), (3, 6)][seed % 3])
    S = frozenset(rng.choice(G.order, int(rng.integers(1, 7)), replace=False).tolist())
    T = frozenset(rng.choice(G.order, int(rng.integers(1, 4)), replace=False).tolist())
    K = len(G.sumset(S, T)) / len(S)
    assert sumset_spectrum_containment(S, T, float(rng.uniform(0.01, 1)), K, G).holds


def test_bohr_from_support_examples():
    odd = FiniteAbelianGroup((3, 5))
    assert bohr_from_support(range(odd.order), odd).bohr_set(1) == frozenset(range(odd.order))
    G = FiniteAbelianGroup((12,))
    f = DenseFunction(G, np.full(12, 2.0))
    dev, bound = bohr_invariance_deviation(bohr_from_support({0}, G), f, 0.25)
    assert dev == pytest.approx(0, abs=1e-12)


def test_bohr_from_support_invariance_on_z24():
    G = FiniteAbelianGroup((24,))
    rng = np.random.default_rng(11)
    for _ in range(10):
        chars = frozenset(rng.choice(24, 3, replace=False).tolist())
        f = spectrum_function(G, chars, rng)
        B = bohr_from_support(chars, G)
        dev, bound = bohr_invariance_deviation(B, f, 0.25)
        shifts = B.bohr_set(Fraction(0.25 / math.pi))
        brute = max(
            abs(f.values[(y - x) % 24] - f.values[y]) for x in shifts for y in range(24)
        )
        assert dev == pytest.approx(brute, abs=1e-12)
        assert dev <= bound + 1e-12


def test_sampler_on_subgroup_indicator():
    G = FiniteAbelianGroup((12,))
    H = enumerate_subgroups(G)[3]
    g = indicator(G, H.members)
    B = subgroup_to_bohr(H)
    _, approx, rep = croot_sisask_sample(g, B, uniform(G, H.members), 2, 0.5, seed=1)
    assert rep.measured == pytest.approx(0, abs=1e-12) and rep.success
    assert approx.wiener_norm() <= wiener_norm(g) + 1e-9


def test_sampler_zero_function():
    G = FiniteAbelianGroup((6,))
    with pytest.raises(ZeroFunction):
        croot_sisask_sample(DenseFunction(G, np.zeros(6)), subgroup_to_bohr(enumerate_subgroups(G)[-1]), haar(G), 2, 0.5)


def test_sampler_report_against_direct_deviation():
    G = FiniteAbelianGroup((24,))
    rng = np.random.default_rng(2)
    g = spectrum_function(G, [1, 5, 7], rng, norm=3)
    B = constant_system(G, [1], Fraction(1, 4))
    mu = invariant_on_bohr(B).measure
    Bp, approx, rep = croot_sisask_sample(g, B, mu, 2, 0.5, seed=3)
    assert rep.samples == math.ceil(64 * 2 / 0.25)
    assert Bp.bohr_set(1) <= B.bohr_set(1)
    worst = 0.0
    for x in Bp.bohr_set(1):
        diff = np.array([g.values[(y - x) % 24] - g.values[y] for y in range(24)])
        worst = max(worst, float(np.sum(np.abs(diff) ** 2 * mu.mass) ** 0.5))
    assert rep.measured == pytest.approx(worst, abs=1e-12)
    assert np.allclose(translate_deviation(g, [0], 2, mu.mass), 0)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_sampled_approximant_norm(seed):
    rng = np.random.default_rng(seed)
    G = FiniteAbelianGroup((4, 6))
    g = spectrum_function(G, rng.choice(24, 5, replace=False), rng)
    _, approx, _ = croot_sisask_sample(g, constant_system(G, [0], Fraction(1, 3)), haar(G), 2, 0.9, rng=rng)
    assert approx.wiener_norm() <= wiener_norm(g) + 1e-9
    assert sum(approx.counts) == approx.samples
