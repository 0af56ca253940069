"""Quantitative continuity: find ``B', mu, nu`` with ``f`` close to ``f * mu`` in ``L_p`` along translates of ``nu``."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .bohr import BohrSystem, as_fraction, dilate
from .errors import CertificateMissing, InvariantBroken, IterationBudgetExceeded, SamplingFailed
from .fourier import DenseFunction, dft, lp_norm, translate, translation_matrix, wiener_norm
from .measures import InvarianceCertificate, Measure, fourier_measure, invariant_on_bohr, point_mass, smooth
from .spectral import annihilator, croot_sisask_sample

DEFAULT_ROUND_CONSTANT = 64


class Case(enum.Enum):
    SMOOTHED = "SMOOTHED"
    SPECTRAL_MASS = "SPECTRAL_MASS"


def translated_lp(h: DenseFunction, nu: Measure, p: float) -> np.ndarray:
    """``||h||_{L_p(tau_x nu)}`` for every ``x`` in canonical order."""
    G = h.group
    a = np.abs(np.asarray(h.values))
    top = float(a.max()) if a.size else 0.0
    if top == 0.0:
        return np.zeros(G.order)
    rows = translation_matrix(nu.mass, G, range(G.order))  # rows[x, y] = nu(y - x)
    return top * np.clip(rows @ ((a / top) ** p), 0.0, None) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class ContinuityOutcome:
    case: Case
    measured_sup: float
    bound: float
    bohr: BohrSystem | None = None
    rho: float | None = None
    witness: frozenset[int] = frozenset()
    witness_mass: float = 0.0
    rounds: list = field(default_factory=list)


def continuity_step(
    A: Iterable[int],
    B: BohrSystem,
    nu: Measure,
    mu: Measure,
    f: DenseFunction,
    delta: float,
    eta: float,
    p: float,
    seed: int | None = None,
    X: Iterable[int] | None = None,
    nu_certificate: InvarianceCertificate | None = None,
    rng: np.random.Generator | None = None,
    c_cs: float = 64,
) -> ContinuityOutcome:
    """Either certify ``sup_x ||f - f*mu||_{L_p(tau_x nu)} <= delta ||f||_A`` or
    exhibit Fourier mass of ``f`` on ``N(B'_{2^-7 delta eta}, eta) minus N(X, 2^-5 delta)``.

    The second case runs the smoothing loop from the worst translate: each
    round samples an almost-period system for ``g_i``, builds an invariant
    measure on it and convolves, until the algebra norm of ``g_i`` stops
    halving.
    """
    if nu_certificate is not None and not nu_certificate.valid:
        raise CertificateMissing("nu is not certified invariant")
    G = f.group
    X = mu.support() if X is None else frozenset(X)
    if rng is None:
        rng = np.random.default_rng(seed)
    f_norm = wiener_norm(f)
    bound = delta * f_norm
    h = f - smooth(f, mu)
    profile = translated_lp(h, nu, p)
    worst = int(np.argmax(profile))
    if profile[worst] <= bound * (1 + 1e-12):
        return ContinuityOutcome(Case.SMOOTHED, float(profile[worst]), bound, B)

    shifted = translate(f, G.neg(worst))
    kappa = Fraction(1, math.ceil(math.log2(8 / delta)))
    budget = int(1 / kappa) + 1
    g = shifted - smooth(shifted, mu)
    rounds = []
    last_nu = point_mass(G)
    last_system = B
    for i in range(budget + 1):
        g_norm = wiener_norm(g)
        g_lp = lp_norm(g.values, p, nu.mass)
        delta_i = (1 - float(kappa)) ** i * delta
        if not g_lp > delta_i * f_norm * (1 - 1e-12):
            raise InvariantBroken(f"round {i}: ||g||_p = {g_lp:.6g} not above {delta_i * f_norm:.6g}")
        if g_norm > 2 ** (1 - i) * f_norm * (1 + 1e-12):
            break
        if i == budget:
            raise IterationBudgetExceeded(f"no termination within {budget} rounds")
        eps_i = float(kappa) * g_lp / g_norm
        for retry in range(2):
            B_i, _, report = croot_sisask_sample(g, B, nu, p, eps_i, rng=rng, c_cs=c_cs)
            if report.success:
                break
        else:
            raise SamplingFailed(f"round {i}: sampler failed twice (measured {report.measured:.4g})")
        inv = invariant_on_bohr(B_i)
        last_nu, last_system = inv.measure, dilate(B_i, inv.lam)
        g = smooth(g, inv.measure)
        rounds.append(
            {
                "round": i,
                "epsilon": eps_i,
                "samples": report.samples,
                "lam": float(inv.lam),
                "g_lp": g_lp,
                "g_algebra_norm": g_norm,
            }
        )
    else:  # pragma: no cover - loop always breaks or raises
        raise IterationBudgetExceeded("loop exhausted")

    terminal = len(rounds)
    rho = 2.0 ** (-terminal - 1)
    small = frozenset(
        annihilator(last_system.bohr_set(Fraction(delta) * Fraction(eta) / 128), eta, G).characters
    )
    near_one = annihilator(X, delta / 32, G).characters
    witness = small - near_one
    mags = np.abs(dft(f).coefficients)
    mass = float(mags[sorted(witness)].sum()) if witness else 0.0
    large_nu = frozenset(np.flatnonzero(np.abs(fourier_measure(last_nu)) > delta / 64).tolist())
    if not (large_nu - near_one) <= witness:
        raise InvariantBroken("large spectrum of the last smoothing measure escapes the annihilator")
    if mass < rho * f_norm * (1 - 1e-9):
        raise InvariantBroken(f"witness mass {mass:.6g} below rho ||f||_A = {rho * f_norm:.6g}")
    return ContinuityOutcome(
        Case.SPECTRAL_MASS,
        float(profile[worst]),
        bound,
        last_system,
        rho,
        witness,
        mass,
        rounds,
    )


@dataclass(frozen=True, eq=False)
class ContinuityResult:
    bohr: BohrSystem
    mu: Measure
    nu: Measure
    measured_sup: float
    bound: float
    rounds: list

    def __iter__(self):
        return iter((self.bohr, self.mu, self.nu, self.rounds))


def quantitative_continuity(
    A: Iterable[int],
    B: BohrSystem,
    f: DenseFunction,
    delta: float,
    kappa: float,
    p: float,
    seed: int | None = None,
    round_constant: int = DEFAULT_ROUND_CONSTANT,
    c_cs: float = 64,
) -> ContinuityResult:
    """Bohr system ``B' <= B``, invariant ``mu`` and ``nu`` on ``B'_kappa`` with
    ``sup_x ||f - f*mu||_{L_p(tau_x nu)} <= delta ||f||_A``, verified over all ``x``.
    """
    A = frozenset(A)
    G = f.group
    rng = np.random.default_rng(seed)
    kappa = as_fraction(kappa)
    budget = math.ceil(round_constant / delta)
    f_norm = wiener_norm(f)
    mags = np.abs(dft(f).coefficients)
    current = B
    rounds = []
    claimed = np.zeros(G.order, dtype=bool)
    rho_total = 0.0
    eta = delta / 32
    for i in range(budget):
        mu_part = invariant_on_bohr(current)
        base = dilate(current, kappa * mu_part.lam)
        nu_part = invariant_on_bohr(base)
        step_system = dilate(base, nu_part.lam)
        X = current.bohr_set(1)
        outcome = continuity_step(
            A, step_system, nu_part.measure, mu_part.measure, f, delta, eta, p, X=X, rng=rng, c_cs=c_cs
        )
        entry = {
            "round": i,
            "case": outcome.case.value,
            "lam": float(mu_part.lam),
            "lam_nu": float(nu_part.lam),
            "B1_size": len(X),
            "measured_sup": outcome.measured_sup,
        }
        if outcome.case is Case.SMOOTHED:
            final = dilate(current, mu_part.lam)
            nu = nu_part.measure
            if not nu.support() <= final.bohr_set(kappa):
                raise InvariantBroken("nu escapes B'_kappa")
            h = f - smooth(f, mu_part.measure)
            sup = float(translated_lp(h, nu, p).max())
            if sup > delta * f_norm * (1 + 1e-12):
                raise InvariantBroken(f"final sup {sup:.6g} exceeds {delta * f_norm:.6g}")
            entry["rho"] = None
            rounds.append(entry)
            return ContinuityResult(final, mu_part.measure, nu, sup, delta * f_norm, rounds)
        nxt = dilate(outcome.bohr, Fraction(delta) ** 2 / 4096)
        new_near = annihilator(nxt.bohr_set(1), delta / 32, G).characters
        old_near = annihilator(X, delta / 32, G).characters
        witness = sorted(new_near - old_near)
        if claimed[witness].any():
            raise InvariantBroken("witness sets overlap across rounds")
        claimed[witness] = True
        rho_total += outcome.rho
        entry.update(rho=outcome.rho, witness_mass=float(mags[witness].sum()), B1_next=len(nxt.bohr_set(1)))
        rounds.append(entry)
        if float(mags[claimed].sum()) > f_norm * (1 + 1e-9) or rho_total > 1 + 1e-9:
            raise InvariantBroken("spectral mass accounting exceeds ||f||_A")
        current = nxt
    raise IterationBudgetExceeded(f"no smoothing within {budget} rounds")
