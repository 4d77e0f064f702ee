"""Mutual information, classical correlation and discord.

Both discords minimise a measurement-conditioned entropy of B over rank-one
projective bases on A. For the reversible family the basis is still the
optimisation variable; only the elements handed to B change, with the mixing
weight ``a`` held fixed.

For a qubit A the basis is ``{|v><v|, 1 - |v><v|}`` with
``|v> = cos(t/2)|0> + exp(i f) sin(t/2)|1>``; a coarse ``(t, f)`` grid seeds a
Nelder-Mead refinement, and further random starts are refined independently.
For larger A the basis is the column set of a product of Givens rotations and
only random starts are used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .core import BipartiteState, partial_trace
from .entropy import shannon_entropy, von_neumann_entropy
from .errors import DimensionMismatch, DimensionTooLarge, MixingOutOfRange
from .measurement import Povm

MAX_DIM_A = 8
GRID_SHAPE = (64, 128)
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class MeasurementParams:
    """Angles of a rank-one projective basis on A.

    ``angles`` is ``(theta, phi)`` for a qubit, otherwise one
    ``(angle, phase)`` pair per Givens rotation in ``combinations(range(d), 2)`` order.
    """

    dim: int
    angles: tuple[float, ...]

    def unitary(self) -> np.ndarray:
        return _unitary(self.dim, np.asarray(self.angles, dtype=float))

    def projectors(self) -> list[np.ndarray]:
        u = self.unitary()
        return [np.outer(u[:, k], u[:, k].conj()) for k in range(self.dim)]


@dataclass(frozen=True)
class DiscordResult:
    """An optimised correlation quantity.

    ``value`` is the best entry of ``restart_values`` (the smallest for
    discords, the largest for classical correlations); ``spread`` is the
    max - min over restarts.
    """

    value: float
    optimal_params: MeasurementParams
    restart_values: np.ndarray = field(repr=False)
    spread: float


@dataclass(frozen=True)
class _Optimum:
    ce: float
    params: MeasurementParams
    restart_ce: np.ndarray

    @property
    def spread(self) -> float:
        return float(np.ptp(self.restart_ce))


def _qubit_projectors(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    v = np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)
    p0 = v[..., :, None] * v[..., None, :].conj()
    return np.stack([p0, np.eye(2) - p0], axis=-3)


def _unitary(dim: int, angles: np.ndarray) -> np.ndarray:
    if dim == 2:
        return _qubit_unitary(*angles)
    u = np.eye(dim, dtype=complex)
    for k, (p, q) in enumerate(combinations(range(dim), 2)):
        t, f = angles[2 * k], angles[2 * k + 1]
        g = np.eye(dim, dtype=complex)
        g[p, p] = g[q, q] = np.cos(t)
        g[p, q] = -np.exp(-1j * f) * np.sin(t)
        g[q, p] = np.exp(1j * f) * np.sin(t)
        u = u @ g
    return u


def _qubit_unitary(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * phi)
    return np.array([[c, -np.conj(e) * s], [e * s, c]], dtype=complex)


def _projectors(dim: int, angles: np.ndarray) -> np.ndarray:
    if dim == 2:
        return _qubit_projectors(angles[0], angles[1])
    u = _unitary(dim, angles)
    return np.einsum("ik,jk->kij", u, u.conj())


def _check_state(state: BipartiteState) -> None:
    if state.dim_a > MAX_DIM_A:
        raise DimensionTooLarge(f"d_A = {state.dim_a} exceeds {MAX_DIM_A}")


def _check_mixing(n: int, a: float | None) -> None:
    if a is not None and not 0 < a < 1 / n:
        raise MixingOutOfRange(f"a = {a!r} outside (0, 1/{n})")


def _blocks(state: BipartiteState, projs: np.ndarray, a: float | None) -> np.ndarray:
    """Unnormalised conditional states of B, shape ``(..., k, d_B, d_B)``.

    Entry x is ``Tr_A((E_x (x) 1) rho)`` where ``E_x`` is the projector itself,
    or for the reversible family ``(1 - n a) P_x + a 1``.
    """
    m = np.einsum("...kij,jbic->...kbc", projs, state.tensor())
    if a is None:
        return m
    rho_b = np.einsum("aiaj->ij", state.tensor())
    n = projs.shape[-3]
    return (1 - n * a) * m + a * rho_b


def _entropy_of_blocks(blocks: np.ndarray) -> np.ndarray:
    """``sum_x eta_x S(N_x / eta_x)`` for unnormalised blocks ``N_x``."""
    herm = 0.5 * (blocks + np.swapaxes(blocks, -1, -2).conj())
    vals = np.clip(np.linalg.eigvalsh(herm), 0.0, None)
    eta = vals.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        h_vals = -np.where(vals > 0, vals * np.log2(vals), 0.0).sum(axis=-1)
        h_eta = -np.where(eta > 0, eta * np.log2(eta), 0.0)
    terms = np.where(eta > PROB_FLOOR, h_vals - h_eta, 0.0)
    return terms.sum(axis=-1)


def conditional_entropy_for_params(
    state: BipartiteState, params: MeasurementParams, a: float | None = None
) -> float:
    projs = _projectors(params.dim, np.asarray(params.angles, dtype=float))
    return float(_entropy_of_blocks(_blocks(state, projs, a)))


def conditional_entropy_after_measurement(state: BipartiteState, meas_on_a: Povm) -> float:
    """``sum_x eta_x S(rho_{B|x})`` for an arbitrary measurement on A."""
    if meas_on_a.dim != state.dim_a:
        raise DimensionMismatch(f"measurement on dim {meas_on_a.dim}, d_A = {state.dim_a}")
    projs = np.stack(meas_on_a.elements)
    return float(_entropy_of_blocks(_blocks(state, projs, None)))


def qubit_grid_values(
    state: BipartiteState, shape: tuple[int, int] = GRID_SHAPE, a: float | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Conditional entropy on a ``(theta, phi)`` grid for qubit A."""
    theta = np.linspace(0.0, np.pi, shape[0])
    phi = np.linspace(0.0, 2 * np.pi, shape[1], endpoint=False)
    tt, ff = np.meshgrid(theta, phi, indexing="ij")
    values = _entropy_of_blocks(_blocks(state, _qubit_projectors(tt, ff), a))
    return theta, phi, values


def _canonical(dim: int, x: np.ndarray) -> MeasurementParams:
    if dim != 2:
        return MeasurementParams(dim, tuple(float(v) for v in x))
    theta, phi = x
    z = np.cos(theta)
    bloch_phase = np.angle(np.sin(theta) * np.exp(1j * phi)) if abs(np.sin(theta)) > 0 else 0.0
    return MeasurementParams(2, (float(np.arccos(np.clip(z, -1, 1))), float(bloch_phase % (2 * np.pi))))


def _scalar_objective(state: BipartiteState, a: float | None):
    """Single-point version of ``_entropy_of_blocks(_blocks(...))`` with the state pre-reshaped."""
    d_a, d_b = state.dim_a, state.dim_b
    # row (i, j) holds R[j, :, i, :] so that flattened projectors contract in one matmul
    r_mat = np.einsum("jbic->ijbc", state.tensor()).reshape(d_a * d_a, d_b * d_b)
    rho_b = np.einsum("aiaj->ij", state.tensor())
    scale = None if a is None else 1 - d_a * a
    eye = np.eye(2)

    def objective(x):
        if d_a == 2:
            c, s = np.cos(x[0] / 2), np.sin(x[0] / 2)
            v = np.array([c, np.exp(1j * x[1]) * s])
            p0 = np.outer(v, v.conj())
            projs = np.array([p0, eye - p0])
        else:
            projs = _projectors(d_a, x)
        m = (projs.reshape(d_a, -1) @ r_mat).reshape(d_a, d_b, d_b)
        if scale is not None:
            m = scale * m + a * rho_b
        if d_b == 2:
            half = 0.5 * (m[:, 0, 0].real + m[:, 1, 1].real)
            diff = 0.5 * (m[:, 0, 0].real - m[:, 1, 1].real)
            root = np.sqrt(diff * diff + np.abs(m[:, 0, 1]) ** 2)
            vals = np.stack([half - root, half + root], axis=1)
        else:
            vals = np.linalg.eigvalsh(m)
        eta = vals.sum(axis=1)
        keep = eta > PROB_FLOOR
        vals = vals[keep]
        vals = vals[vals > 0]
        return float(-(vals * np.log2(vals)).sum() + (eta[keep] * np.log2(eta[keep])).sum())

    return objective


def _refine(objective, x0: np.ndarray, step: float) -> tuple[float, np.ndarray]:
    simplex = np.vstack([x0, x0 + step * np.eye(x0.size)])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": 1e-10,
            "fatol": 1e-14,
            "maxfev": 400 * x0.size * x0.size + 400,
            "adaptive": x0.size > 2,
        },
    )
    return float(res.fun), res.x


def minimize_conditional_entropy(
    state: BipartiteState, a: float | None, restarts: int, seed
) -> _Optimum:
    """Smallest conditional entropy over rank-one bases, with per-restart evidence.

    Restart 0 refines the best grid cell (qubit A only); restarts 1..R refine
    uniformly random starts. Ties resolve to the lowest restart index.
    """
    _check_state(state)
    dim = state.dim_a
    _check_mixing(dim, a)
    if restarts < 0:
        raise ValueError("restarts must be nonnegative")

    objective = _scalar_objective(state, a)

    starts: list[tuple[np.ndarray, float]] = []
    if dim == 2:
        theta, phi, grid = qubit_grid_values(state, GRID_SHAPE, a)
        i, j = np.unravel_index(np.argmin(grid), grid.shape)
        starts.append((np.array([theta[i], phi[j]]), np.pi / GRID_SHAPE[0]))
    elif restarts == 0:
        restarts = 1
    seq = np.random.SeedSequence(seed)
    for rng in (np.random.default_rng(s) for s in seq.spawn(restarts)):
        if dim == 2:
            x0 = np.array([np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi)])
        else:
            x0 = rng.uniform(0, 2 * np.pi, size=dim * (dim - 1))
        starts.append((x0, 0.25))

    values = np.empty(len(starts))
    points = []
    for k, (x0, step) in enumerate(starts):
        values[k], x = _refine(objective, x0, step)
        points.append(x)
    best = int(np.argmin(values))
    return _Optimum(ce=float(values[best]), params=_canonical(dim, points[best]), restart_ce=values)


def mutual_information(state: BipartiteState) -> float:
    return (
        von_neumann_entropy(partial_trace(state, "A"))
        + von_neumann_entropy(partial_trace(state, "B"))
        - von_neumann_entropy(state.state)
    )


def _correlation(state: BipartiteState, opt: _Optimum) -> DiscordResult:
    s_b = von_neumann_entropy(partial_trace(state, "B"))
    vals = s_b - opt.restart_ce
    return DiscordResult(float(s_b - opt.ce), opt.params, vals, opt.spread)


def _discord(state: BipartiteState, opt: _Optimum) -> DiscordResult:
    offset = von_neumann_entropy(partial_trace(state, "A")) - von_neumann_entropy(state.state)
    vals = offset + opt.restart_ce
    return DiscordResult(float(offset + opt.ce), opt.params, vals, opt.spread)


def classical_correlation_vn(state: BipartiteState, restarts: int = 8, seed=0) -> DiscordResult:
    return _correlation(state, minimize_conditional_entropy(state, None, restarts, seed))


def discord_vn(state: BipartiteState, restarts: int = 8, seed=0) -> DiscordResult:
    return _discord(state, minimize_conditional_entropy(state, None, restarts, seed))


def classical_correlation_reversible(
    state: BipartiteState, a: float, restarts: int = 8, seed=0
) -> DiscordResult:
    return _correlation(state, minimize_conditional_entropy(state, a, restarts, seed))


def discord_reversible(state: BipartiteState, a: float, restarts: int = 8, seed=0) -> DiscordResult:
    return _discord(state, minimize_conditional_entropy(state, a, restarts, seed))


def h_pna(n: int, a: float) -> float:
    """Entropy of ``(1 - (n-1) a, a, ..., a)``."""
    if n < 1:
        raise ValueError("n must be positive")
    _check_mixing(n, a)
    return shannon_entropy([1 - (n - 1) * a] + [a] * (n - 1))


@dataclass(frozen=True)
class Theorem1Report:
    d_vn: float
    d_u: float
    j_u: float
    j_vn: float
    n: int
    a: float
    h_pna: float
    lower: float
    upper: float
    gap_lhs: float
    gap_rhs: float
    lower_ok: bool
    upper_ok: bool
    gap_ok: bool
    spread_vn: float
    spread_u: float
    eta_u_min: float

    @property
    def all_ok(self) -> bool:
        return self.lower_ok and self.upper_ok and self.gap_ok


def reversible_outcome_weights(state: BipartiteState, params: MeasurementParams, a: float) -> np.ndarray:
    """Outcome probabilities of the reversible measurement built on ``params``."""
    projs = _projectors(params.dim, np.asarray(params.angles, dtype=float))
    blocks = _blocks(state, projs, a)
    return np.real(np.trace(blocks, axis1=-2, axis2=-1))


def theorem1_check(
    state: BipartiteState,
    a: float,
    restarts: int = 8,
    seed=0,
    tol: float = 2e-3,
    vn: _Optimum | None = None,
) -> Theorem1Report:
    """Discord sandwich between the von Neumann and reversible measurements.

    ``vn`` lets a sweep over ``a`` reuse one von Neumann optimisation per state.
    """
    n = state.dim_a
    _check_mixing(n, a)
    if vn is None:
        vn = minimize_conditional_entropy(state, None, restarts, seed)
    u = minimize_conditional_entropy(state, a, restarts, seed)
    d_vn = _discord(state, vn).value
    j_vn = _correlation(state, vn).value
    d_u = _discord(state, u).value
    j_u = _correlation(state, u).value
    h = h_pna(n, a)
    scaled = n * a * j_u / (1 - n * a)
    upper = d_u - scaled
    lower = upper - h
    return Theorem1Report(
        d_vn=d_vn,
        d_u=d_u,
        j_u=j_u,
        j_vn=j_vn,
        n=n,
        a=float(a),
        h_pna=h,
        lower=lower,
        upper=upper,
        gap_lhs=d_u - d_vn,
        gap_rhs=scaled,
        lower_ok=lower <= d_vn + tol,
        upper_ok=d_vn <= upper + tol,
        gap_ok=d_u - d_vn >= scaled - tol,
        spread_vn=vn.spread,
        spread_u=u.spread,
        eta_u_min=float(reversible_outcome_weights(state, u.params, a).min()),
    )
