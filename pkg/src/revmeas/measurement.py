"""Measurements: projective bases, the mixed reversible family, statistics and reversal."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    PSD_TOL,
    DensityMatrix,
    ProbabilityDistribution,
    check_hermitian,
    fidelity,
    haar_unitary,
    make_density,
    psd_sqrt,
)
from .errors import (
    DimensionMismatch,
    MixingOutOfRange,
    NotComplete,
    NotIdempotent,
    NotOrthogonal,
    NotPositive,
    NotReversible,
    ZeroProbabilityOutcome,
)

COMPLETENESS_TOL = 1e-10
PROB_FLOOR = 1e-12
INVERTIBLE_TOL = 1e-10
RECOVERY_FIDELITY = 1 - 1e-8


def _freeze(ops) -> tuple[np.ndarray, ...]:
    out = []
    for op in ops:
        m = np.array(op, dtype=complex)
        m.setflags(write=False)
        out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class Povm:
    elements: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def kraus(self, x: int) -> np.ndarray:
        """PSD square root of element ``x``."""
        return psd_sqrt(self.elements[x])

    def min_eigenvalues(self) -> np.ndarray:
        return np.array([np.linalg.eigvalsh(e)[0] for e in self.elements])


@dataclass(frozen=True)
class ProjectiveMeasurement(Povm):
    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return self.elements


@dataclass(frozen=True)
class ReversibleMeasurement(Povm):
    base: ProjectiveMeasurement = field(default=None, repr=False)
    a: float = 0.0


@dataclass(frozen=True)
class ReversalOutcome:
    bound_per_outcome: np.ndarray
    total_bound: float
    empirical_total: float | None = None
    trials: int = 0
    recovered_fidelity_min: float | None = None


def _check_complete(ops: Sequence[np.ndarray]) -> None:
    total = sum(ops)
    dev = np.max(np.abs(total - np.eye(total.shape[0])))
    if dev > COMPLETENESS_TOL:
        raise NotComplete(f"elements sum to identity only within {dev:.3e}")


def make_povm(elements: Sequence) -> Povm:
    ops = [check_hermitian(e) for e in elements]
    if not ops:
        raise NotComplete("a measurement needs at least one element")
    dims = {op.shape[0] for op in ops}
    if len(dims) != 1:
        raise DimensionMismatch(f"elements have mixed dimensions {sorted(dims)}")
    for x, op in enumerate(ops):
        low = np.linalg.eigvalsh(op)[0]
        if low < -PSD_TOL:
            raise NotPositive(f"element {x} has eigenvalue {low:.3e}")
    _check_complete(ops)
    return Povm(_freeze(ops))


def make_projective(projectors: Sequence) -> ProjectiveMeasurement:
    ops = [check_hermitian(p) for p in projectors]
    if not ops:
        raise NotComplete("a measurement needs at least one projector")
    for x, p in enumerate(ops):
        dev = np.max(np.abs(p @ p - p))
        if dev > COMPLETENESS_TOL:
            raise NotIdempotent(f"projector {x}: max |P^2 - P| = {dev:.3e}")
    _check_complete(ops)
    for x in range(len(ops)):
        for y in range(x + 1, len(ops)):
            dev = np.max(np.abs(ops[x] @ ops[y]))
            if dev > COMPLETENESS_TOL:
                raise NotOrthogonal(f"projectors {x} and {y} overlap ({dev:.3e})")
    return ProjectiveMeasurement(_freeze(ops))


def basis_measurement(unitary) -> ProjectiveMeasurement:
    """Rank-one projective measurement onto the columns of ``unitary``."""
    u = np.asarray(unitary, dtype=complex)
    return make_projective([np.outer(u[:, k], u[:, k].conj()) for k in range(u.shape[1])])


def computational_basis(dim: int) -> ProjectiveMeasurement:
    return basis_measurement(np.eye(dim))


def random_basis(dim: int, rng: np.random.Generator) -> ProjectiveMeasurement:
    return basis_measurement(haar_unitary(dim, rng))


def construct_reversible(base: ProjectiveMeasurement, a: float) -> ReversibleMeasurement:
    """Mix each projector with weight ``a`` on all the others.

    Element x is ``(1 - (n-1) a) P_x + a * sum_{y != x} P_y``; every element
    then has smallest eigenvalue ``a`` and so is invertible.
    """
    n = base.n
    if not 0 < a < 1 / n:
        raise MixingOutOfRange(f"a = {a!r} outside (0, 1/{n})")
    elements = []
    for x, px in enumerate(base.projectors):
        others = sum((py for y, py in enumerate(base.projectors) if y != x), np.zeros_like(px))
        elements.append((1 - (n - 1) * a) * px + a * others)
    _check_complete(elements)
    return ReversibleMeasurement(_freeze(elements), base=base, a=float(a))


def outcome_distribution(meas: Povm, rho: DensityMatrix) -> ProbabilityDistribution:
    if meas.dim != rho.dim:
        raise DimensionMismatch(f"measurement on dim {meas.dim}, state of dim {rho.dim}")
    p = np.array([np.real(np.vdot(e, rho.matrix)) for e in meas.elements])
    p = np.clip(p, 0.0, None)
    return ProbabilityDistribution(p / p.sum())


def post_measurement_state(meas: Povm, rho: DensityMatrix, x: int) -> DensityMatrix:
    p = outcome_distribution(meas, rho).weights[x]
    if p <= PROB_FLOOR:
        raise ZeroProbabilityOutcome(f"outcome {x} has probability {p:.3e}")
    a_x = meas.kraus(x)
    out = a_x @ rho.matrix @ a_x
    return make_density(out / np.trace(out).real)


def is_logically_reversible(meas: Povm) -> bool:
    return bool(np.all(meas.min_eigenvalues() > INVERTIBLE_TOL))


def reversal_bounds(meas: Povm, rho: DensityMatrix) -> ReversalOutcome:
    """Per-outcome and total upper bounds on the probability of undoing ``meas``."""
    if not is_logically_reversible(meas):
        raise NotReversible("some measurement element is singular")
    a_min = meas.min_eigenvalues()
    p = outcome_distribution(meas, rho).weights
    with np.errstate(divide="ignore", invalid="ignore"):
        per = np.where(p > PROB_FLOOR, a_min / p, np.nan)
    return ReversalOutcome(bound_per_outcome=np.minimum(per, 1.0), total_bound=float(a_min.sum()))


def simulate_reversal(meas: Povm, rho: DensityMatrix, trials: int, seed) -> ReversalOutcome:
    """Monte Carlo of measure-then-undo with the optimal reversal operation.

    After outcome x the reversal is the two-outcome measurement
    ``{R^dag R, 1 - R^dag R}`` with ``R = sqrt(a_min) * A_x^{-1}``; the first
    outcome counts as success and must hand back ``rho``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    bounds = reversal_bounds(meas, rho)
    p = outcome_distribution(meas, rho).weights
    a_min = meas.min_eigenvalues()
    success_prob = np.zeros(meas.n)
    recovered_fid = np.ones(meas.n)
    for x in range(meas.n):
        if p[x] <= PROB_FLOOR:
            continue
        rho_x = post_measurement_state(meas, rho, x)
        r = np.sqrt(a_min[x]) * np.linalg.inv(meas.kraus(x))
        out = r @ rho_x.matrix @ r.conj().T
        success_prob[x] = min(np.trace(out).real, 1.0)
        recovered_fid[x] = fidelity(rho, out / np.trace(out).real)

    rng = np.random.default_rng(seed)
    outcomes = rng.choice(meas.n, size=trials, p=p)
    succeeded = rng.random(trials) < success_prob[outcomes]
    seen = np.unique(outcomes[succeeded])
    fid_min = float(recovered_fid[seen].min()) if seen.size else float("nan")
    return ReversalOutcome(
        bound_per_outcome=bounds.bound_per_outcome,
        total_bound=bounds.total_bound,
        empirical_total=float(succeeded.mean()),
        trials=trials,
        recovered_fidelity_min=fid_min,
    )
