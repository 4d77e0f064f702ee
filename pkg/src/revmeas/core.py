"""Dense Hermitian linear algebra for small quantum systems.

States are stored as validated complex numpy arrays wrapped in frozen
dataclasses. Bipartite indices follow ``index = a * dim_b + b``, so subsystem
A is the slow index everywhere (``np.kron(op_a, op_b)`` ordering).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import (
    BadDistribution,
    BadRank,
    DimensionMismatch,
    NotHermitian,
    NotPositive,
    TraceNotOne,
)

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
GROUPING_TOL = 1e-9


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, dtype=complex)
    matrix.setflags(write=False)
    return matrix


def check_hermitian(op, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``op`` as a complex array, raising NotHermitian if it is not."""
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise NotHermitian(f"operator must be square, got shape {op.shape}")
    dev = np.max(np.abs(op - op.conj().T)) if op.size else 0.0
    if dev > tol:
        raise NotHermitian(f"max |A - A^dagger| = {dev:.3e} exceeds {tol:.0e}")
    return op


@dataclass(frozen=True)
class DensityMatrix:
    """A validated state. Build with :func:`make_density` rather than directly."""

    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)


@dataclass(frozen=True)
class BipartiteState:
    state: DensityMatrix
    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1 or self.dim_a * self.dim_b != self.state.dim:
            raise DimensionMismatch(
                f"dims ({self.dim_a}, {self.dim_b}) do not factor a {self.state.dim}-dim state"
            )

    @property
    def matrix(self) -> np.ndarray:
        return self.state.matrix

    def tensor(self) -> np.ndarray:
        """The state as a rank-4 tensor ``R[a, b, a', b']``."""
        return self.matrix.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)


@dataclass(frozen=True)
class ProbabilityDistribution:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise BadDistribution("weights must be a nonempty vector")
        if np.any(w < 0):
            raise BadDistribution(f"negative weight {w.min():.3e}")
        if abs(w.sum() - 1.0) > TRACE_TOL:
            raise BadDistribution(f"weights sum to {w.sum():.12g}, not 1")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues and the projectors onto their eigenspaces."""

    eigenvalues: np.ndarray
    projectors: tuple[np.ndarray, ...]

    def reconstruct(self) -> np.ndarray:
        return sum(v * p for v, p in zip(self.eigenvalues, self.projectors))

    def __len__(self) -> int:
        return len(self.projectors)


def make_density(matrix) -> DensityMatrix:
    """Validate ``matrix`` as a density matrix.

    A negative eigenvalue tail down to -1e-10 is clipped to zero and the
    trace renormalised; anything worse raises.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix must be square, got shape {m.shape}")
    m = check_hermitian(m)
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"trace is {tr:.12g}")
    m = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(m)
    if vals[0] < -PSD_TOL:
        raise NotPositive(f"eigenvalue {vals[0]:.3e} below -{PSD_TOL:.0e}")
    if vals[0] < 0:
        vals = np.clip(vals, 0.0, None)
        m = (vecs * vals) @ vecs.conj().T
    return DensityMatrix(_frozen(m / np.trace(m).real))


def pure_state(vector) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return make_density(np.outer(v, v.conj()))


def maximally_mixed(dim: int) -> DensityMatrix:
    return make_density(np.eye(dim) / dim)


def bipartite(matrix, dim_a: int, dim_b: int) -> BipartiteState:
    state = matrix if isinstance(matrix, DensityMatrix) else make_density(matrix)
    return BipartiteState(state, dim_a, dim_b)


def bell_state() -> BipartiteState:
    return BipartiteState(pure_state([1, 0, 0, 1]), 2, 2)


def spectral_decompose(op, tol: float = GROUPING_TOL) -> SpectralDecomposition:
    """Group the spectrum of a Hermitian operator into distinct eigenvalues.

    Sorted eigenvalues within ``tol`` of the first member of a group are
    merged; the group's value is their mean.
    """
    op = check_hermitian(op)
    vals, vecs = np.linalg.eigh(0.5 * (op + op.conj().T))
    groups: list[list[int]] = []
    for i, v in enumerate(vals):
        if groups and v - vals[groups[-1][0]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigenvalues = np.array([vals[g].mean() for g in groups])
    projectors = tuple(vecs[:, g] @ vecs[:, g].conj().T for g in groups)
    return SpectralDecomposition(eigenvalues, projectors)


def psd_sqrt(op) -> np.ndarray:
    """Principal square root of a positive semidefinite operator."""
    vals, vecs = np.linalg.eigh(check_hermitian(op, tol=1e-10))
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def tensor_product(a: DensityMatrix, b: DensityMatrix) -> BipartiteState:
    return BipartiteState(make_density(np.kron(a.matrix, b.matrix)), a.dim, b.dim)


def partial_trace(state: BipartiteState, keep: Literal["A", "B"]) -> DensityMatrix:
    r = state.tensor()
    if keep == "A":
        reduced = np.einsum("ibjb->ij", r)
    elif keep == "B":
        reduced = np.einsum("aiaj->ij", r)
    else:
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    return make_density(reduced)


def random_state(dim: int, rank: int, seed) -> DensityMatrix:
    """Ginibre-distributed mixed state of the given rank."""
    if not 1 <= rank <= dim:
        raise BadRank(f"rank {rank} outside [1, {dim}]")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return make_density(rho / np.trace(rho).real)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_distribution(n: int, rng: np.random.Generator) -> ProbabilityDistribution:
    w = rng.dirichlet(np.ones(n))
    return ProbabilityDistribution(w / w.sum())


def fidelity(rho: DensityMatrix | np.ndarray, sigma: DensityMatrix | np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    r = getattr(rho, "matrix", rho)
    s = getattr(sigma, "matrix", sigma)
    sr = psd_sqrt(r)
    inner = sr @ s @ sr
    vals = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(vals, 0.0, None))) ** 2)


def as_matrices(ops: Sequence) -> list[np.ndarray]:
    return [np.asarray(getattr(op, "matrix", op), dtype=complex) for op in ops]
