"""Fourier analysis on a finite Abelian group.

Normalisation: the transform carries ``1/|G|`` and the inverse carries no
factor, so ``wiener_norm`` of a subgroup indicator is exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import GroupMismatch, NotAlmostInteger
from .groups import Coset, FiniteAbelianGroup


@dataclass(frozen=True, eq=False)
class DenseFunction:
    """Complex (or real) values indexed by canonical element order."""

    group: FiniteAbelianGroup
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.group.order,):
            raise ValueError(f"expected {self.group.order} values, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    def __add__(self, other):
        _same_group(self, other)
        return DenseFunction(self.group, self.values + other.values)

    def __sub__(self, other):
        _same_group(self, other)
        return DenseFunction(self.group, self.values - other.values)

    def __neg__(self):
        return DenseFunction(self.group, -self.values)

    def __mul__(self, other):
        if isinstance(other, DenseFunction):
            _same_group(self, other)
            return DenseFunction(self.group, self.values * other.values)
        return DenseFunction(self.group, self.values * other)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def lp_norm(self, p: float, weights: np.ndarray | None = None) -> float:
        """``L_p`` norm against ``weights`` (default: uniform probability)."""
        if weights is None:
            weights = np.full(self.group.order, 1.0 / self.group.order)
        return lp_norm(self.values, p, weights)

    def support(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(np.abs(self.values) > 0).tolist())

    def is_integer_valued(self) -> bool:
        v = self.values
        return bool(np.all(np.imag(v) == 0) and np.all(np.real(v) == np.round(np.real(v))))

    def mean(self) -> complex:
        return complex(np.mean(self.values))


@dataclass(frozen=True, eq=False)
class Spectrum:
    group: FiniteAbelianGroup
    coefficients: np.ndarray


@dataclass(frozen=True)
class CosetCombination:
    """Integer combination of coset indicators.  Duplicate cosets merge and zero terms drop."""

    terms: tuple[tuple[Coset, int], ...] = field(default=())

    def __post_init__(self):
        merged: dict[Coset, int] = {}
        for W, c in self.terms:
            c = int(c)
            merged[W] = merged.get(W, 0) + c
        groups = {W.subgroup.group for W in merged}
        if len(groups) > 1:
            raise GroupMismatch("cosets from different groups")
        terms = tuple((W, c) for W, c in merged.items() if c != 0)
        object.__setattr__(self, "terms", terms)

    @property
    def l1_weight(self) -> int:
        return sum(abs(c) for _, c in self.terms)

    def __len__(self):
        return len(self.terms)


def _same_group(f, g):
    if f.group != g.group:
        raise GroupMismatch(f"{f.group!r} vs {g.group!r}")


def lp_norm(values: np.ndarray, p: float, weights: np.ndarray) -> float:
    """``(sum |h|^p w)^(1/p)``, rescaled by the maximum so large ``p`` cannot overflow."""
    a = np.abs(values)
    top = float(a.max()) if a.size else 0.0
    if top == 0.0:
        return 0.0
    if np.isinf(p):
        return float(a[weights > 0].max()) if np.any(weights > 0) else 0.0
    return top * float(np.sum((a / top) ** p * weights)) ** (1.0 / p)


def indicator(group: FiniteAbelianGroup, S: Iterable[int]) -> DenseFunction:
    return DenseFunction(group, group.mask(S).astype(float))


def _transform(group: FiniteAbelianGroup, values: np.ndarray) -> np.ndarray:
    return np.fft.fftn(np.asarray(values, dtype=complex).reshape(group.factors)).reshape(-1) / group.order


def _inverse(group: FiniteAbelianGroup, coefficients: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(np.asarray(coefficients, dtype=complex).reshape(group.factors)).reshape(-1) * group.order


def dft(f: DenseFunction, method: str = "fft") -> Spectrum:
    """``f^(gamma) = |G|^-1 sum_x f(x) conj(gamma(x))``.

    ``method="direct"`` evaluates the defining sum against the exact character
    table; ``"fft"`` applies one FFT per cyclic factor.
    """
    if method == "direct":
        coeffs = np.conj(f.group.character_table) @ np.asarray(f.values, dtype=complex) / f.group.order
    elif method == "fft":
        coeffs = _transform(f.group, f.values)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Spectrum(f.group, coeffs)


def idft(F: Spectrum, method: str = "fft") -> DenseFunction:
    """``f(x) = sum_gamma F(gamma) gamma(x)``."""
    if method == "direct":
        values = F.group.character_table.T @ np.asarray(F.coefficients, dtype=complex)
    elif method == "fft":
        values = _inverse(F.group, F.coefficients)
    else:
        raise ValueError(f"unknown method {method!r}")
    return DenseFunction(F.group, values)


def wiener_norm(f: DenseFunction) -> float:
    return float(np.sum(np.abs(_transform(f.group, f.values))))


def convolve(f: DenseFunction, g: DenseFunction) -> DenseFunction:
    """``f*g(x) = |G|^-1 sum_y f(y) g(x-y)``."""
    _same_group(f, g)
    G = f.group
    values = _inverse(G, _transform(G, f.values) * _transform(G, g.values))
    if np.isrealobj(f.values) and np.isrealobj(g.values):
        values = values.real
    return DenseFunction(G, values)


def convolve_direct(f: DenseFunction, g: DenseFunction) -> DenseFunction:
    _same_group(f, g)
    G = f.group
    diff = G.add_table[:, G.neg_table]  # diff[x, y] = x - y
    values = (g.values[diff] * f.values[None, :]).sum(axis=1) / G.order
    return DenseFunction(G, values)


def tilde(f: DenseFunction) -> DenseFunction:
    """``x -> conj(f(-x))``."""
    return DenseFunction(f.group, np.conj(f.values[f.group.neg_table]))


def translate(f: DenseFunction, x: int) -> DenseFunction:
    """``tau_x f (y) = f(y - x)``."""
    G = f.group
    return DenseFunction(G, f.values[G.add_table[:, G.neg_table[x]]])


def translation_matrix(values: np.ndarray, group: FiniteAbelianGroup, shifts: Sequence[int]) -> np.ndarray:
    """Rows ``tau_x h`` for each ``x`` in ``shifts``."""
    shifts = np.asarray(list(shifts), dtype=np.int64)
    # (y - x) for each shift x and element y
    idx = group.add_table[:, group.neg_table[shifts]].T
    return np.asarray(values)[idx]


def inner_product(f: DenseFunction, g: DenseFunction) -> complex:
    """``<f, g>`` in ``L_2(m_G)``."""
    _same_group(f, g)
    return complex(np.mean(f.values * np.conj(g.values)))


def synthesize(combination: CosetCombination, group: FiniteAbelianGroup | None = None) -> DenseFunction:
    if combination.terms:
        group = combination.terms[0][0].subgroup.group
    elif group is None:
        raise ValueError("empty combination needs an explicit group")
    values = np.zeros(group.order, dtype=np.int64)
    for W, c in combination.terms:
        values[list(W.members)] += c
    return DenseFunction(group, values)


def almost_round(f: DenseFunction, epsilon: float) -> tuple[DenseFunction, float]:
    """Nearest-integer rounding ``f_Z`` and the achieved ``||f - f_Z||_inf``.

    Raises NotAlmostInteger when the deviation exceeds ``epsilon``.
    """
    if not 0 <= epsilon < 0.5:
        raise ValueError("epsilon must lie in [0, 1/2)")
    v = np.asarray(f.values)
    rounded = np.round(np.real(v)).astype(np.int64)
    dev = np.abs(v - rounded)
    worst = int(np.argmax(dev)) if dev.size else 0
    deviation = float(dev[worst]) if dev.size else 0.0
    if deviation > epsilon:
        raise NotAlmostInteger(f.group.element(worst), deviation)
    return DenseFunction(f.group, rounded), deviation


def function_to_json(f: DenseFunction) -> dict:
    vals = []
    for v in f.values:
        if np.iscomplexobj(v) and np.imag(v) != 0:
            vals.append([float(np.real(v)), float(np.imag(v))])
        else:
            r = float(np.real(v))
            vals.append(int(r) if r == int(r) and np.issubdtype(f.values.dtype, np.integer) else r)
    return {"group": list(f.group.factors), "values": vals}


def function_from_json(data: dict) -> DenseFunction:
    group = FiniteAbelianGroup(tuple(data["group"]))
    raw = data["values"]
    if len(raw) != group.order:
        raise ValueError(f"expected {group.order} values, got {len(raw)}")
    if all(isinstance(v, int) for v in raw):
        return DenseFunction(group, np.array(raw, dtype=np.int64))
    vals = []
    complex_seen = False
    for v in raw:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError("complex values are [re, im] pairs")
            vals.append(complex(float(v[0]), float(v[1])))
            complex_seen = True
        elif isinstance(v, (int, float)):
            vals.append(float(v))
        else:
            raise ValueError(f"unsupported value {v!r}")
    return DenseFunction(group, np.array(vals, dtype=complex if complex_seen else float))


def spectrum_to_json(F: Spectrum) -> dict:
    return {
        "group": list(F.group.factors),
        "coefficients": [[float(c.real), float(c.imag)] for c in np.asarray(F.coefficients, dtype=complex)],
    }
