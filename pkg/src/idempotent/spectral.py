"""Approximate annihilators, Bohr/annihilator duality and L_p almost-periodicity sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .bohr import BohrSystem, as_fraction, constant_system, dilate, fraction_at_least, meet
from .errors import HypothesisViolated, InclusionFailed, ZeroFunction
from .fourier import DenseFunction, dft, translation_matrix
from .groups import FiniteAbelianGroup
from .measures import Measure, fourier_measure

DEFAULT_C_CS = 64
DEFAULT_ATTEMPTS = 4


@dataclass(frozen=True)
class AnnihilatorSet:
    characters: frozenset[int]
    source: frozenset[int]
    rho: float

    def __contains__(self, a):
        return a in self.characters

    def __len__(self):
        return len(self.characters)


def chord_table(group: FiniteAbelianGroup) -> np.ndarray:
    """``|1 - gamma_a(x)| = 2 sin(pi ||gamma_a(x)||)`` from exact angles."""
    return 2 * np.sin(np.pi * group.distance_table / group.exponent_lcm)


def annihilator(S: Iterable[int], rho: float, group: FiniteAbelianGroup) -> AnnihilatorSet:
    """``N(S, rho) = {gamma : |1 - gamma(x)| < rho for all x in S}``."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    S = frozenset(S)
    if S:
        worst = chord_table(group)[:, sorted(S)].max(axis=1)
        chars = np.flatnonzero(worst < rho)
    else:
        chars = np.arange(group.order)
    return AnnihilatorSet(frozenset(chars.tolist()), S, float(rho))


@dataclass(frozen=True)
class ContainmentReport:
    left: frozenset[int]
    right: frozenset[int]

    @property
    def holds(self) -> bool:
        return self.left <= self.right

    @property
    def violations(self) -> frozenset[int]:
        return self.left - self.right


def majorising_annihilator_check(mu: Measure, B: BohrSystem, kappa, eta) -> ContainmentReport:
    """``{|mu^| > kappa}`` against ``N(B_{kappa eta / 2}, eta)``."""
    kappa, eta = as_fraction(kappa), as_fraction(eta)
    large = np.flatnonzero(np.abs(fourier_measure(mu)) > float(kappa))
    right = annihilator(B.bohr_set(kappa * eta / 2), float(eta), B.group)
    return ContainmentReport(frozenset(large.tolist()), right.characters)


def duality_embed_set(X: Iterable[int], epsilon: float, group: FiniteAbelianGroup) -> BohrSystem:
    """Bohr system on ``N(X, eps)`` at constant width ``eps / (2 sqrt 2)`` whose ``B_1`` holds ``X``.

    The irrational width is rounded up to the next double.
    """
    X = frozenset(X)
    if not X:
        raise ValueError("X must be non-empty")
    N = annihilator(X, epsilon, group)
    B = constant_system(group, sorted(N.characters), fraction_at_least(epsilon / (2 * math.sqrt(2))))
    if not X <= B.bohr_set(1):
        raise InclusionFailed("X not inside B_1")
    return B


def duality_embed_chars(B: BohrSystem) -> tuple[float, ContainmentReport]:
    """``Gamma`` against ``N(Bohr(Gamma, delta), 2 pi ||delta||_inf)``."""
    eps = 2 * math.pi * float(max(B.widths, default=0))
    if eps == 0:
        return eps, ContainmentReport(frozenset(), frozenset())
    N = annihilator(B.bohr_set(1), eps, B.group)
    return eps, ContainmentReport(frozenset(B.characters), N.characters)


def sumset_spectrum_containment(S, T, epsilon: float, K: float, group: FiniteAbelianGroup) -> ContainmentReport:
    """``{|1_{S+T}^| > (1-eps) m(S+T)}`` against ``N(T - T, 2 sqrt(2 eps K))``."""
    S, T = frozenset(S), frozenset(T)
    ST = group.sumset(S, T)
    if len(ST) > K * len(S) * (1 + 1e-12):
        raise HypothesisViolated(f"m(S+T)/m(S) = {len(ST) / len(S)} exceeds K = {K}")
    spec = np.abs(dft(DenseFunction(group, group.mask(ST).astype(float))).coefficients)
    left = np.flatnonzero(spec > (1 - epsilon) * len(ST) / group.order)
    right = annihilator(group.diffset(T, T), 2 * math.sqrt(2 * epsilon * K), group)
    return ContainmentReport(frozenset(left.tolist()), right.characters)


def bohr_from_support(characters: Iterable[int], group: FiniteAbelianGroup) -> BohrSystem:
    """Constant width 1/2 on ``characters``; its ``B_1`` is all of ``G``."""
    return constant_system(group, sorted(set(characters)), Fraction(1, 2))


def bohr_invariance_deviation(B: BohrSystem, f: DenseFunction, epsilon: float) -> tuple[float, float]:
    """``max_{x in B_{eps/pi}} ||tau_x f - f||_inf`` and the bound ``eps ||f||_A``."""
    xs = sorted(B.bohr_set(Fraction(epsilon / math.pi)))
    rows = translation_matrix(f.values, f.group, xs)
    dev = float(np.abs(rows - f.values[None, :]).max())
    bound = epsilon * float(np.abs(dft(f).coefficients).sum())
    return dev, bound


def lp_rows(rows: np.ndarray, p: float, weights: np.ndarray) -> np.ndarray:
    """Row-wise ``(sum_y |h(y)|^p w(y))^(1/p)``."""
    a = np.abs(rows)
    top = a.max(axis=1)
    safe = np.where(top > 0, top, 1.0)
    return np.where(top > 0, top * (((a / safe[:, None]) ** p) @ weights) ** (1.0 / p), 0.0)


def translate_deviation(g: DenseFunction, shifts: Iterable[int], p: float, weights: np.ndarray) -> np.ndarray:
    """``||tau_x g - g||_{L_p(weights)}`` for each shift ``x``."""
    rows = translation_matrix(g.values, g.group, sorted(shifts)) - g.values[None, :]
    return lp_rows(rows, p, weights)


@dataclass(frozen=True, eq=False)
class SampledApproximant:
    """``f = ||g||_A (1/l) sum_i omega_i gamma_i`` with multiplicities ``counts``."""

    group: FiniteAbelianGroup
    characters: tuple[int, ...]
    counts: tuple[int, ...]
    omegas: np.ndarray
    scale: float
    samples: int
    seed: int | None

    def spectrum(self) -> np.ndarray:
        out = np.zeros(self.group.order, dtype=complex)
        out[list(self.characters)] = self.scale * np.array(self.counts) * self.omegas / self.samples
        return out

    def wiener_norm(self) -> float:
        return float(np.abs(self.spectrum()).sum())


@dataclass(frozen=True)
class SamplerReport:
    measured: float
    bound: float
    samples: int
    attempts: int
    success: bool
    distinct_characters: int


def croot_sisask_sample(
    g: DenseFunction,
    B: BohrSystem,
    mu: Measure,
    p: float,
    epsilon: float,
    seed: int | None = None,
    c_cs: float = DEFAULT_C_CS,
    attempts: int = DEFAULT_ATTEMPTS,
    rng: np.random.Generator | None = None,
):
    """Sample characters of ``g`` and return ``(B', approximant, report)``.

    ``l = ceil(c_cs p / eps^2)`` characters are drawn with probability
    ``|g^(gamma)| / ||g||_A``; ``B' = B meet (eps/2pi) Bohr(sampled, 1/2)``.
    Success means ``||tau_x g - g||_{L_p(mu)} <= eps ||g||_A`` for every
    ``x`` in ``B'_1``.  A failed attempt doubles ``l``.
    """
    G = g.group
    coeffs = dft(g).coefficients
    mags = np.abs(coeffs)
    norm = float(mags.sum())
    if norm == 0 or not np.any(g.values != 0):
        raise ZeroFunction("g vanishes identically")
    if rng is None:
        rng = np.random.default_rng(seed)
    probs = mags / norm
    omegas_all = np.where(mags > 0, coeffs / np.where(mags > 0, mags, 1), 1)
    samples = math.ceil(c_cs * p / epsilon**2)
    bound = epsilon * norm
    factor = Fraction(epsilon / (2 * math.pi))
    for attempt in range(1, attempts + 1):
        counts = rng.multinomial(samples, probs)
        chars = tuple(np.flatnonzero(counts).tolist())
        approx = SampledApproximant(
            G, chars, tuple(int(counts[a]) for a in chars), omegas_all[list(chars)], norm, samples, seed
        )
        B_new = meet(B, dilate(bohr_from_support(chars, G), factor))
        shifts = B_new.bohr_set(1)
        measured = float(translate_deviation(g, shifts, p, mu.mass).max())
        success = measured <= bound * (1 + 1e-12)
        if success or attempt == attempts:
            report = SamplerReport(measured, bound, samples, attempt, success, len(chars))
            return B_new, approx, report
        samples *= 2
