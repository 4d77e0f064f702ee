"""Randomised verification campaigns behind the ``revmeas`` command line.

Every campaign is a deterministic function of its config: state ``i`` draws
from ``SeedSequence([seed, i, stream])`` so rows do not depend on the order in
which workers finish.
"""
from __future__ import annotations

import json
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import BipartiteState, random_distribution, random_state
from .discord import minimize_conditional_entropy, theorem1_check
from .entropy import lemma1_check, prop1_check
from .errors import ConfigInvalid
from .formats import emit_report, parse_measurement_file, parse_state_file
from .measurement import construct_reversible, random_basis, simulate_reversal

COMMANDS = ("entropy-bounds", "lemma1", "theorem1-sweep", "reversal-sim", "discord")
STATE_STREAM, OPTIMIZER_STREAM, AUX_STREAM = 0, 1, 2
ETA_TOL = 1e-12


@dataclass(frozen=True)
class CampaignConfig:
    command: str
    dims: tuple[int, int] = (2, 2)
    a_grid: tuple[float, ...] | None = None
    num_states: int = 10
    rank: int | None = None
    seed: int = 1
    restarts: int = 8
    tol: float = 2e-3
    output_path: str = "report.csv"
    format: str = "csv"
    trials: int = 100_000
    state_paths: tuple[str, ...] = ()
    measurement_path: str | None = None
    corrupt_checks: bool = False

    @property
    def effective_a_grid(self) -> tuple[float, ...]:
        if self.a_grid is not None:
            return self.a_grid
        return default_a_grid(self.dims[0])

    @property
    def effective_rank(self) -> int:
        return self.rank if self.rank is not None else self.state_dim

    @property
    def state_dim(self) -> int:
        if self.command in ("entropy-bounds", "lemma1", "reversal-sim"):
            return self.dims[0]
        return self.dims[0] * self.dims[1]

    @property
    def margin_shift(self) -> float:
        # test hook: every check demands one extra unit of margin, which none can meet
        return -1.0 if self.corrupt_checks else 0.0

    @property
    def check_tol(self) -> float:
        return self.tol + self.margin_shift


@dataclass(frozen=True)
class CampaignRow:
    state_id: int
    a: float
    d_vn: float
    d_u: float
    j_vn: float
    j_u: float
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


@dataclass(frozen=True)
class EntropyBoundsRow:
    state_id: int
    a: float
    n: int
    h_base: float
    h_reversible: float
    penalty: float
    lower_slack: float
    upper_slack: float
    lower_ok: bool
    upper_ok: bool


@dataclass(frozen=True)
class Lemma1Row:
    state_id: int
    dim: int
    p0: float
    p1: float
    p2: float
    lhs: float
    rhs: float
    slack: float
    ok: bool


@dataclass(frozen=True)
class ReversalRow:
    state_id: int
    a: float
    n: int
    trials: int
    total_bound: float
    empirical_total: float
    ci_halfwidth: float
    recovered_fidelity_min: float
    within_ci: bool
    fidelity_ok: bool


@dataclass
class CampaignResult:
    rows: list
    violations: list[str] = field(default_factory=list)

    @property
    def exit_status(self) -> int:
        return 0 if not self.violations else 1


def default_a_grid(dim_a: int) -> tuple[float, ...]:
    """Nine evenly spaced interior points of (0, 1/dim_a)."""
    return tuple(round(k / (10 * dim_a), 12) for k in range(1, 10))


def parse_dims(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*(?:[xX]\s*(\d+))?\s*", str(text))
    if not m:
        raise ConfigInvalid(f"dims: expected 'AxB' or 'A', got {text!r}")
    d_a, d_b = int(m.group(1)), int(m.group(2) or 1)
    if d_a < 1 or d_b < 1:
        raise ConfigInvalid(f"dims: dimensions must be positive, got {text!r}")
    return d_a, d_b


def parse_a_grid(text: str | Sequence[float]) -> tuple[float, ...]:
    """``start:stop:step`` (both ends inclusive) or a comma-separated list."""
    if not isinstance(text, str):
        try:
            return tuple(float(v) for v in text)
        except (TypeError, ValueError):
            raise ConfigInvalid(f"a_grid: expected numbers, got {text!r}") from None
    try:
        if ":" not in text:
            return tuple(float(v) for v in text.split(",") if v.strip())
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigInvalid(f"a_grid: cannot parse {text!r}") from None
    if step <= 0:
        raise ConfigInvalid(f"a_grid: step must be positive in {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + k * step, 12) for k in range(max(count, 0)))


def validate_config(cfg: CampaignConfig) -> CampaignConfig:
    if cfg.command not in COMMANDS:
        raise ConfigInvalid(f"command: {cfg.command!r} is not one of {', '.join(COMMANDS)}")
    if cfg.format not in ("csv", "json"):
        raise ConfigInvalid(f"format: expected csv or json, got {cfg.format!r}")
    if cfg.num_states < 1:
        raise ConfigInvalid(f"states: must be at least 1, got {cfg.num_states}")
    if cfg.restarts < 0:
        raise ConfigInvalid(f"restarts: must be nonnegative, got {cfg.restarts}")
    if cfg.trials < 1:
        raise ConfigInvalid(f"trials: must be at least 1, got {cfg.trials}")
    if not 1 <= cfg.effective_rank <= cfg.state_dim:
        raise ConfigInvalid(f"rank: {cfg.effective_rank} outside [1, {cfg.state_dim}]")
    if cfg.command != "lemma1":
        grid = cfg.effective_a_grid
        if not grid:
            raise ConfigInvalid("a_grid: no values")
        limit = 1 / cfg.dims[0]
        bad = [a for a in grid if not 0 < a < limit]
        if bad:
            raise ConfigInvalid(f"a_grid: values {bad} outside (0, 1/{cfg.dims[0]})")
    return cfg


_CONFIG_KEYS = {f.name for f in fields(CampaignConfig)} | {"states", "out"}


def _line_of(text: str, key: str) -> int | None:
    for lineno, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return lineno
    return None


def load_config_file(path: str | os.PathLike) -> dict:
    """Read a JSON config whose keys mirror the CLI flags; errors name the line and field."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigInvalid(f"{path}:1: config must be a JSON object")
    out = {}
    for key, value in raw.items():
        name = key.replace("-", "_")
        name = {"states": "num_states", "out": "output_path"}.get(name, name)
        where = f"{path}:{_line_of(text, key)}: field '{key}'"
        if name not in _CONFIG_KEYS:
            raise ConfigInvalid(f"{where}: unknown field")
        try:
            out[name] = _coerce(name, value)
        except (ConfigInvalid, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"{where}: {exc}") from None
    return out


def _coerce(name: str, value):
    if name == "dims":
        return tuple(value) if isinstance(value, list) else parse_dims(value)
    if name == "a_grid":
        return parse_a_grid(value)
    if name == "state_paths":
        return tuple(value) if isinstance(value, list) else (value,)
    if name in ("num_states", "rank", "seed", "restarts", "trials"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigInvalid(f"expected an integer, got {value!r}")
        return value
    if name == "tol":
        return float(value)
    if name == "corrupt_checks":
        return bool(value)
    if not isinstance(value, str):
        raise ConfigInvalid(f"expected a string, got {value!r}")
    return value


def _seed(cfg: CampaignConfig, state_id: int, stream: int) -> list[int]:
    return [cfg.seed, state_id, stream]


def _discord_rows(cfg: CampaignConfig, state_id: int, state: BipartiteState) -> tuple[list, list]:
    opt_seed = _seed(cfg, state_id, OPTIMIZER_STREAM)
    vn = minimize_conditional_entropy(state, None, cfg.restarts, opt_seed)
    rows, violations = [], []
    for a in cfg.effective_a_grid:
        r = theorem1_check(state, a, cfg.restarts, opt_seed, cfg.check_tol, vn=vn)
        rows.append(
            CampaignRow(
                state_id, a, r.d_vn, r.d_u, r.j_vn, r.j_u, r.h_pna, r.lower, r.upper,
                r.gap_lhs, r.gap_rhs, r.lower_ok, r.upper_ok, r.gap_ok, r.spread_vn, r.spread_u,
            )
        )
        failed = [name for name in ("lower_ok", "upper_ok", "gap_ok") if not getattr(r, name)]
        if failed:
            violations.append(f"state {state_id}, a={a:g}: {', '.join(failed)} false")
        if r.eta_u_min < a - ETA_TOL:
            violations.append(f"state {state_id}, a={a:g}: outcome weight {r.eta_u_min:.3e} below a")
    return rows, violations


def _theorem1_task(cfg: CampaignConfig, state_id: int) -> tuple[list, list]:
    d_a, d_b = cfg.dims
    rho = random_state(d_a * d_b, cfg.effective_rank, _seed(cfg, state_id, STATE_STREAM))
    return _discord_rows(cfg, state_id, BipartiteState(rho, d_a, d_b))


def _discord_file_task(cfg: CampaignConfig, state_id: int) -> tuple[list, list]:
    state = parse_state_file(cfg.state_paths[state_id])
    if not isinstance(state, BipartiteState):
        raise ConfigInvalid(f"{cfg.state_paths[state_id]}: state file needs 'dims' for a discord run")
    return _discord_rows(cfg, state_id, state)


def _entropy_task(cfg: CampaignConfig, state_id: int) -> tuple[list, list]:
    n = cfg.dims[0]
    p = random_distribution(n, np.random.default_rng(_seed(cfg, state_id, STATE_STREAM)))
    rows, violations = [], []
    for a in cfg.effective_a_grid:
        r = prop1_check(p, a, tol=1e-9 + cfg.margin_shift)
        rows.append(
            EntropyBoundsRow(
                state_id, a, n, r.h_base, r.h_reversible, r.penalty,
                r.lower_slack, r.upper_slack, r.lower_ok, r.upper_ok,
            )
        )
        if not (r.lower_ok and r.upper_ok):
            violations.append(f"distribution {state_id}, a={a:g}: entropy sandwich violated")
    return rows, violations


def _lemma1_task(cfg: CampaignConfig, state_id: int) -> tuple[list, list]:
    dim = cfg.dims[0]
    rho1 = random_state(dim, cfg.effective_rank, _seed(cfg, state_id, STATE_STREAM))
    rho2 = random_state(dim, cfg.effective_rank, _seed(cfg, state_id, AUX_STREAM))
    p = random_distribution(3, np.random.default_rng(_seed(cfg, state_id, OPTIMIZER_STREAM))).weights
    r = lemma1_check(rho1, rho2, *p)
    ok = r.slack >= -1e-9 - cfg.margin_shift
    violations = [] if ok else [f"instance {state_id}: slack {r.slack:.3e}"]
    return [Lemma1Row(state_id, dim, p[0], p[1], p[2], r.lhs, r.rhs, r.slack, ok)], violations


def _reversal_task(cfg: CampaignConfig, state_id: int) -> tuple[list, list]:
    n = cfg.dims[0]
    if cfg.state_paths:
        rho = parse_state_file(cfg.state_paths[state_id])
        rho = getattr(rho, "state", rho)
    else:
        rho = random_state(n, cfg.effective_rank, _seed(cfg, state_id, STATE_STREAM))
    fixed = parse_measurement_file(cfg.measurement_path) if cfg.measurement_path else None
    rows, violations = [], []
    for k, a in enumerate(cfg.effective_a_grid):
        if fixed is not None and hasattr(fixed, "base"):
            meas, a = fixed, fixed.a
        else:
            base = fixed or random_basis(n, np.random.default_rng(_seed(cfg, state_id, AUX_STREAM)))
            meas = construct_reversible(base, a)
        out = simulate_reversal(meas, rho, cfg.trials, _seed(cfg, state_id, 100 + k))
        half = 3 * math.sqrt(out.total_bound * (1 - out.total_bound) / cfg.trials)
        within = abs(out.empirical_total - out.total_bound) <= half + cfg.margin_shift
        fid_ok = out.recovered_fidelity_min >= 1 - 1e-8 - cfg.margin_shift
        rows.append(
            ReversalRow(
                state_id, a, meas.n, cfg.trials, out.total_bound, out.empirical_total,
                half, out.recovered_fidelity_min, within, fid_ok,
            )
        )
        if not within:
            violations.append(
                f"state {state_id}, a={a:g}: success rate {out.empirical_total:.5f} vs bound {out.total_bound:.5f}"
            )
        if not fid_ok:
            violations.append(f"state {state_id}, a={a:g}: recovered fidelity {out.recovered_fidelity_min:.12f}")
        if fixed is not None and hasattr(fixed, "base"):
            break
    return rows, violations


_TASKS: dict[str, Callable[[CampaignConfig, int], tuple[list, list]]] = {
    "entropy-bounds": _entropy_task,
    "lemma1": _lemma1_task,
    "theorem1-sweep": _theorem1_task,
    "reversal-sim": _reversal_task,
    "discord": _theorem1_task,
}


def _run_task(args):
    cfg, state_id = args
    if cfg.command == "discord" and cfg.state_paths:
        return _discord_file_task(cfg, state_id)
    return _TASKS[cfg.command](cfg, state_id)


def worker_count() -> int:
    raw = os.environ.get("REVMEAS_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigInvalid(f"REVMEAS_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)


def execute(cfg: CampaignConfig) -> CampaignResult:
    """Compute all rows of a campaign without writing anything."""
    cfg = validate_config(cfg)
    count = len(cfg.state_paths) if cfg.state_paths and cfg.command in ("discord", "reversal-sim") else cfg.num_states
    jobs = [(cfg, i) for i in range(count)]
    workers = min(worker_count(), count)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, jobs, chunksize=max(1, count // (4 * workers))))
    else:
        results = [_run_task(job) for job in jobs]
    result = CampaignResult(rows=[])
    for rows, violations in results:
        result.rows.extend(rows)
        result.violations.extend(violations)
    return result


def run(cfg: CampaignConfig) -> CampaignResult:
    """Execute a campaign and write its report; violations never stop the run."""
    result = execute(cfg)
    emit_report(result.rows, cfg.format, cfg.output_path)
    return result

