"""Entropies in bits and slack-valued checks of the entropy inequalities.

Convention: ``0 * log2(0) = 0`` throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import TRACE_TOL, DensityMatrix, ProbabilityDistribution, make_density
from .errors import BadDistribution, DimensionMismatch, MixingOutOfRange, OutOfRange

INEQUALITY_TOL = 1e-9


def _plogp(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = -p[pos] * np.log2(p[pos])
    return out


def shannon_entropy(p) -> float:
    weights = getattr(p, "weights", p)
    return float(_plogp(weights).sum())


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return shannon_entropy(rho.eigenvalues())


def binary_entropy(r: float) -> float:
    if not 0 <= r <= 1:
        raise OutOfRange(f"r = {r!r} outside [0, 1]")
    return shannon_entropy([r, 1 - r])


def f_entropy(x: float) -> float:
    """``-x log2 x`` on [0, 1]."""
    if not 0 <= x <= 1:
        raise OutOfRange(f"x = {x!r} outside [0, 1]")
    return float(_plogp([x])[0])


def mixing_bound_slack(components: Sequence[tuple[float, DensityMatrix]]) -> float:
    """``H(weights) + sum w_i S(rho_i) - S(sum w_i rho_i)``; nonnegative, zero for orthogonal supports."""
    weights = np.array([w for w, _ in components], dtype=float)
    states = [s for _, s in components]
    if len({s.dim for s in states}) != 1:
        raise DimensionMismatch("components must share one dimension")
    ProbabilityDistribution(weights)
    mix = make_density(sum(w * s.matrix for w, s in components))
    bound = shannon_entropy(weights) + sum(w * von_neumann_entropy(s) for w, s in components)
    return bound - von_neumann_entropy(mix)


def mixed_distribution(p, a: float) -> np.ndarray:
    """Outcome distribution of the reversible family in terms of the base one: ``(1 - n a) p + a``."""
    weights = np.asarray(getattr(p, "weights", p), dtype=float)
    return (1 - weights.size * a) * weights + a


@dataclass(frozen=True)
class Prop1Report:
    h_base: float
    h_reversible: float
    penalty: float
    lower_ok: bool
    upper_ok: bool

    @property
    def lower_slack(self) -> float:
        return self.h_base - (self.h_reversible - self.penalty)

    @property
    def upper_slack(self) -> float:
        return self.h_reversible - self.h_base


def prop1_check(p: ProbabilityDistribution, a: float, tol: float = INEQUALITY_TOL) -> Prop1Report:
    """Sandwich ``H(p_u) - n max(f(a), f(1-na+a)) <= H(p) <= H(p_u)``."""
    n = len(p)
    if not 0 < a < 1 / n:
        raise MixingOutOfRange(f"a = {a!r} outside (0, 1/{n})")
    h_base = shannon_entropy(p)
    h_rev = shannon_entropy(mixed_distribution(p, a))
    penalty = n * max(f_entropy(a), f_entropy(1 - n * a + a))
    return Prop1Report(
        h_base=h_base,
        h_reversible=h_rev,
        penalty=penalty,
        lower_ok=h_rev - penalty <= h_base + tol,
        upper_ok=h_base <= h_rev + tol,
    )


@dataclass(frozen=True)
class Lemma1Report:
    lhs: float
    rhs: float
    slack: float


def lemma1_check(
    rho1: DensityMatrix, rho2: DensityMatrix, p0: float, p1: float, p2: float
) -> Lemma1Report:
    """Entropy bound for ``(p0 + p1) rho1 + p2 rho2`` obtained from strong subadditivity."""
    probs = np.array([p0, p1, p2], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1) > TRACE_TOL:
        raise BadDistribution(f"(p0, p1, p2) = {tuple(probs)} is not a distribution")
    if rho1.dim != rho2.dim:
        raise DimensionMismatch(f"dims {rho1.dim} and {rho2.dim} differ")
    lhs = von_neumann_entropy(make_density((p0 + p1) * rho1.matrix + p2 * rho2.matrix))
    rhs = p0 * von_neumann_entropy(rho1) + binary_entropy(min(max(p2, 0.0), 1.0))
    tail = p1 + p2
    if tail > 0:
        w = p1 / tail
        inner = make_density(w * rho1.matrix + (1 - w) * rho2.matrix)
        rhs += tail * von_neumann_entropy(inner) - tail * binary_entropy(w)
    return Lemma1Report(lhs=lhs, rhs=rhs, slack=rhs - lhs)
