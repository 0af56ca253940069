"""Wiener-algebra norms, Bohr systems and coset decompositions on finite Abelian groups.

The modules build on each other in this order: ``groups`` and ``fourier``
supply the arithmetic, ``covering``, ``bohr`` and ``measures`` the
approximate-group machinery, ``spectral`` and ``continuity`` the
almost-periodicity step, ``freiman`` and ``connectivity`` the structural
pipelines, and ``decompose`` the end-to-end decomposition with an exact
oracle.
"""

from .bohr import BohrSystem
from .decompose import (
    DecompositionResult,
    Strategy,
    decompose,
    decompose_paper,
    oracle_min_l1,
    subgroup_greedy,
    verify_decomposition,
)
from .errors import IdempotentError
from .fourier import CosetCombination, DenseFunction, dft, indicator, synthesize, wiener_norm
from .groups import Coset, FiniteAbelianGroup, Subgroup, enumerate_cosets, enumerate_subgroups, parse_group_spec
from .measures import Measure

__version__ = "0.1.0"

__all__ = [
    "BohrSystem",
    "Coset",
    "CosetCombination",
    "DecompositionResult",
    "DenseFunction",
    "FiniteAbelianGroup",
    "IdempotentError",
    "Measure",
    "Strategy",
    "Subgroup",
    "decompose",
    "decompose_paper",
    "dft",
    "enumerate_cosets",
    "enumerate_subgroups",
    "indicator",
    "oracle_min_l1",
    "parse_group_spec",
    "subgroup_greedy",
    "synthesize",
    "verify_decomposition",
    "wiener_norm",
]
