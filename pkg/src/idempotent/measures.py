"""Measures on a finite Abelian group and approximately invariant measures."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .bohr import BohrSystem, as_fraction, dilate
from .covering import covering_number_exact
from .errors import GroupMismatch, HypothesisViolated, NoKappaFound, NotProbability, NullSet
from .fourier import DenseFunction, translation_matrix
from .groups import FiniteAbelianGroup

DEFAULT_ETAS = (Fraction(1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
ENVELOPE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Measure:
    group: FiniteAbelianGroup
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.shape != (self.group.order,):
            raise ValueError(f"expected {self.group.order} masses, got shape {mass.shape}")
        if np.any(mass < 0):
            raise ValueError("masses must be non-negative")
        object.__setattr__(self, "mass", mass)

    @property
    def total(self) -> float:
        return float(self.mass.sum())

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total - 1.0) <= tol

    def support(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.mass > 0).tolist())

    def of(self, S: Iterable[int]) -> float:
        return float(self.mass[list(S)].sum())


def uniform(group: FiniteAbelianGroup, S: Iterable[int]) -> Measure:
    S = list(S)
    if not S:
        raise NullSet("uniform measure on the empty set")
    mass = np.zeros(group.order)
    mass[S] = 1.0 / len(S)
    return Measure(group, mass)


def haar(group: FiniteAbelianGroup) -> Measure:
    return Measure(group, np.full(group.order, 1.0 / group.order))


def point_mass(group: FiniteAbelianGroup, x: int = 0) -> Measure:
    mass = np.zeros(group.order)
    mass[x] = 1.0
    return Measure(group, mass)


def restrict(mu: Measure, S: Iterable[int]) -> Measure:
    """``mu_S(T) = mu(S & T) / mu(S)``."""
    S = list(S)
    weight = mu.of(S)
    if weight <= 0:
        raise NullSet("restriction to a null set")
    mass = np.zeros(mu.group.order)
    mass[S] = mu.mass[S] / weight
    return Measure(mu.group, mass)


def translate_measure(mu: Measure, x: int) -> Measure:
    """``tau_x(mu)({y}) = mu({y - x})``."""
    G = mu.group
    return Measure(G, mu.mass[G.add_table[:, G.neg_table[x]]])


def tilde_measure(mu: Measure) -> Measure:
    return Measure(mu.group, mu.mass[mu.group.neg_table])


def convolve_measures(mu: Measure, nu: Measure) -> Measure:
    """``(mu * nu)({x}) = sum_y mu({y}) nu({x - y})``."""
    if mu.group != nu.group:
        raise GroupMismatch("measures on different groups")
    G = mu.group
    shape = G.factors
    out = np.fft.ifftn(np.fft.fftn(mu.mass.reshape(shape)) * np.fft.fftn(nu.mass.reshape(shape))).real
    return Measure(G, np.clip(out.reshape(-1), 0.0, None))


def smooth(f: DenseFunction, mu: Measure) -> DenseFunction:
    """``f * mu (x) = sum_y f(x - y) mu({y})``."""
    if f.group != mu.group:
        raise GroupMismatch("function and measure on different groups")
    G = f.group
    shape = G.factors
    out = np.fft.ifftn(np.fft.fftn(np.asarray(f.values).reshape(shape)) * np.fft.fftn(mu.mass.reshape(shape)))
    out = out.reshape(-1)
    if np.isrealobj(f.values):
        out = out.real
    return DenseFunction(G, out)


def fourier_measure(mu: Measure) -> np.ndarray:
    """``mu^(gamma) = sum_x mu({x}) conj(gamma(x))``."""
    return np.fft.fftn(mu.mass.reshape(mu.group.factors)).reshape(-1)


def total_variation(mu: Measure, nu: Measure) -> float:
    return float(np.abs(mu.mass - nu.mass).sum())


@dataclass(frozen=True, eq=False)
class InvarianceCertificate:
    """Envelope totals per tested ``eta``.

    ``upper[eta] = sum_y max_{x in B_eta} tau_x(mu)({y})`` and ``lower`` uses the
    minimum.  Valid iff every ``upper <= 1 + eta`` and ``lower >= 1 - eta``.
    """

    bohr_system: BohrSystem
    measure: Measure
    etas: tuple[Fraction, ...]
    upper: dict
    lower: dict

    @property
    def valid(self) -> bool:
        return all(
            self.upper[e] <= 1 + float(e) + ENVELOPE_TOL and self.lower[e] >= 1 - float(e) - ENVELOPE_TOL
            for e in self.etas
        )

    def witnesses(self, eta) -> tuple[Measure, Measure]:
        """Probability measures ``(mu_minus, mu_plus)`` sandwiching every translate."""
        eta = as_fraction(eta)
        rows = _translates(self.measure, self.bohr_system, eta)
        top, bottom = rows.max(axis=0), rows.min(axis=0)
        G = self.measure.group
        plus = Measure(G, top / top.sum())
        minus = Measure(G, bottom / bottom.sum()) if bottom.sum() > 0 else self.measure
        return minus, plus


def _translates(mu: Measure, B: BohrSystem, eta) -> np.ndarray:
    xs = sorted(B.bohr_set(eta))
    return translation_matrix(mu.mass, mu.group, xs)


def is_approximately_invariant(mu: Measure, B: BohrSystem, etas: Sequence = DEFAULT_ETAS) -> InvarianceCertificate:
    if not mu.is_probability(1e-9):
        raise NotProbability(f"total mass {mu.total}")
    etas = tuple(as_fraction(e) for e in etas)
    upper, lower = {}, {}
    for eta in etas:
        rows = _translates(mu, B, eta)
        upper[eta] = float(rows.max(axis=0).sum())
        lower[eta] = float(rows.min(axis=0).sum())
    return InvarianceCertificate(B, mu, etas, upper, lower)


@dataclass(frozen=True, eq=False)
class InvariantMeasure:
    """Outcome of the invariant-measure construction.

    Unpacks as ``(lam, measure)``.
    """

    lam: Fraction
    measure: Measure
    kappa: Fraction
    K: float
    certificate: InvarianceCertificate
    log: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.lam, self.measure))


class _SumsetSizes:
    """``|X + B_t|`` as a step function of ``t``, cached per level."""

    def __init__(self, B: BohrSystem, X: frozenset[int]):
        self.B = B
        self.levels, self.rank = B._levels
        self.x = np.array(sorted(X), dtype=np.int64)
        self.cache: dict[int, int] = {}

    def level(self, t: Fraction) -> int:
        return bisect.bisect_left(self.levels, t)

    def size(self, t: Fraction) -> int:
        k = self.level(t)
        if k not in self.cache:
            members = np.flatnonzero(self.rank < k)
            if members.size == 0:
                self.cache[k] = 0
            else:
                table = self.B.group.add_table[np.ix_(self.x, members)]
                self.cache[k] = int(np.unique(table).size)
        return self.cache[k]


def _kappa_ok(sizes: _SumsetSizes, kappa: Fraction, lam: Fraction) -> bool:
    """``|X+B_{k+d}| / |X+B_{k-d}| <= exp(d / 2 lam)`` for every ``d`` in ``(0, lam]``."""
    cuts = {Fraction(0), lam}
    for c in sizes.levels:
        if 0 <= c - kappa < lam:
            cuts.add(c - kappa)
        if 0 < kappa - c <= lam:
            cuts.add(kappa - c)
    cuts = sorted(cuts)
    lam_f = float(lam)
    for left, right in zip(cuts, cuts[1:]):
        bound = math.exp(float(left) / (2 * lam_f))
        probes = [(left + right) / 2]
        if left > 0:
            probes.append(left)
        for d in probes:
            num = sizes.size(kappa + d)
            den = sizes.size(kappa - d)
            if den == 0 or num > bound * den * (1 + 1e-12):
                return False
    top = sizes.size(kappa + lam)
    den = sizes.size(kappa - lam)
    return den > 0 and top <= math.exp(0.5) * den * (1 + 1e-12)


def _kappa_candidates(B: BohrSystem, lam: Fraction, grid: int = 256) -> list[Fraction]:
    lo, hi = Fraction(1, 4), Fraction(3, 4)
    pts = {lo, hi}
    pts |= {c for c in B._levels[0] if lo <= c <= hi}
    ordered = sorted(pts)
    pts |= {(a + b) / 2 for a, b in zip(ordered, ordered[1:])}
    pts |= {lo + (hi - lo) * Fraction(i, grid) for i in range(grid + 1)}
    return sorted(pts)


def build_invariant_measure(
    B: BohrSystem, X: Iterable[int], K: float, etas: Sequence = DEFAULT_ETAS
) -> InvariantMeasure:
    """Uniform measure on ``X + B_kappa`` that is approximately invariant for ``lam B``.

    ``lam = 1/(24 log 2K)`` (natural logarithm, stored as the exact rational
    value of the double).  ``kappa`` is the first candidate in ``[1/4, 3/4]``
    where ``|X+B_t|`` grows slowly on both sides.
    """
    X = frozenset(X)
    if not X:
        raise HypothesisViolated("X is empty")
    G = B.group
    K = float(K)
    ratio = len(G.sumset(X, B.bohr_set(1))) / len(X)
    if K < 1 or ratio > K * (1 + 1e-12):
        raise HypothesisViolated(f"m(X+B_1)/m(X) = {ratio} exceeds K = {K}")
    lam = Fraction(1 / (24 * math.log(2 * K)))
    sizes = _SumsetSizes(B, X)
    tried = 0
    for kappa in _kappa_candidates(B, lam):
        if not _kappa_ok(sizes, kappa, lam):
            continue
        tried += 1
        support = G.sumset(X, B.bohr_set(kappa))
        mu = uniform(G, support)
        cert = is_approximately_invariant(mu, dilate(B, lam), etas)
        if cert.valid:
            return InvariantMeasure(lam, mu, kappa, K, cert, {"ratio": ratio, "kappa_checks": tried})
    raise NoKappaFound(f"no admissible kappa among candidates (lam = {float(lam):.4g})")


def invariant_on_bohr(B: BohrSystem, d: float | None = None, etas: Sequence = DEFAULT_ETAS) -> InvariantMeasure:
    """Approximately invariant probability measure supported on ``B_1``.

    Runs the construction with ``X = B_{1/2}``, the system ``B/2`` and
    ``K = C(B_{1/2}; B_{1/4})^2``; the returned ``lam`` is relative to ``B``,
    i.e. half the construction's value.
    """
    half = B.bohr_set(Fraction(1, 2))
    quarter = B.bohr_set(Fraction(1, 4))
    c, _ = covering_number_exact(half, quarter, B.group)
    if d is not None and math.log2(c) > d + 1e-12:
        raise HypothesisViolated(f"log2 C(B_1/2; B_1/4) = {math.log2(c):.4g} exceeds d = {d}")
    built = build_invariant_measure(dilate(B, Fraction(1, 2)), half, float(c * c), etas)
    log = dict(built.log, cover_half_quarter=c)
    return InvariantMeasure(built.lam / 2, built.measure, built.kappa, built.K, built.certificate, log)


@dataclass(frozen=True)
class StabilityReport:
    value: float
    eta: Fraction
    worst_shift: int

    @property
    def ok(self) -> bool:
        return self.value <= float(self.eta) + 1e-12


def translation_stability(mu: Measure, B: BohrSystem, eta) -> StabilityReport:
    """``max_{x in B_{eta/2}} ||mu - tau_x mu||``."""
    eta = as_fraction(eta)
    xs = sorted(B.bohr_set(eta / 2))
    rows = translation_matrix(mu.mass, mu.group, xs)
    tv = np.abs(rows - mu.mass[None, :]).sum(axis=1)
    i = int(np.argmax(tv))
    return StabilityReport(float(tv[i]), eta, xs[i])


def measure_to_json(mu: Measure) -> dict:
    return {"group": list(mu.group.factors), "mass": [float(v) for v in mu.mass]}


def measure_from_json(data: dict) -> Measure:
    return Measure(FiniteAbelianGroup(tuple(data["group"])), np.array(data["mass"], dtype=float))
