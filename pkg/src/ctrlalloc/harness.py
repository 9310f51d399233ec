"""Scenario engine: stationary comparison, Monte Carlo study, time simulation.

Every allocator is driven through :func:`allocate`, which also assembles the
inputs only IDCA needs (weights and the steady-state target). Wall time is
measured around that whole call with a monotonic clock.
"""
from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .allocators import AllocationResult, idca, pica, qpca, rpica, rspica, saturated_pica
from .ams import contains, moment_set
from .config import ScenarioConfig
from .core import ActuatorLimits, ActuatorState, EffectiveBounds, effective_bounds
from .reference import generic_qp
from .steady_state import steady_state_target
from .weighting import compute_weights

DISPLAY_NAMES = {
    "pica": "PICA",
    "saturated_pica": "Saturated PICA",
    "rpica": "RPICA",
    "rspica": "RSPICA",
    "qpca": "QPCA",
    "idca": "IDCA",
    "generic_qp": "Generic QP",
}
METRICS = ("cost", "error", "time_s")


def steady_state_for(cfg: ScenarioConfig, u_r, delta_nu) -> np.ndarray:
    if cfg.steady_state == "conditional":
        return steady_state_target(cfg.B, u_r, delta_nu)
    if cfg.steady_state == "pseudoinverse":
        return np.asarray(u_r, dtype=float) + np.linalg.pinv(cfg.B) @ np.asarray(delta_nu, dtype=float)
    return np.asarray(u_r, dtype=float).copy()


def allocate(name: str, cfg: ScenarioConfig, nu, limits: ActuatorLimits, state: ActuatorState,
             u_r=None) -> AllocationResult:
    """Run one allocator on one demand; ``elapsed`` covers the whole call."""
    B = cfg.B
    t0 = time.perf_counter()
    if name == "pica":
        res = pica(B, nu)
    elif name == "saturated_pica":
        res = saturated_pica(B, nu, limits, state)
    elif name == "rpica":
        res = rpica(B, nu, limits, state, cfg.rpica_iterations, residual_tol=cfg.idca.residual_tol)
    elif name == "rspica":
        res = rspica(B, nu, limits, state, cfg.rpica_iterations, residual_tol=cfg.idca.residual_tol)
    elif name == "qpca":
        res = qpca(B, nu, limits, state, reg_lambda=cfg.qpca_lambda)
    elif name == "generic_qp":
        res = generic_qp(B, nu, limits, state, reg_lambda=cfg.qpca_lambda)
    elif name == "idca":
        u_r = cfg.u_r if u_r is None else u_r
        delta_nu = np.asarray(nu, dtype=float) - B @ u_r
        u_s = steady_state_for(cfg, u_r, delta_nu)
        weights = compute_weights(limits, state, cfg.weighting)
        res = idca(B, nu, limits, state, u_s, weights, cfg.idca)
    else:
        raise ValueError(f"unknown algorithm {name!r}")
    res.elapsed = time.perf_counter() - t0
    return res


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class TrialRecord:
    algorithm: str
    result: AllocationResult
    sample: int | None = None
    t: float | None = None


# ---------------------------------------------------------------- stationary

@dataclass
class StationaryTable:
    nu: np.ndarray
    records: list[TrialRecord]

    def write_csv(self, path) -> Path:
        path = Path(path)
        m = max((r.result.u.size for r in self.records), default=0)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["algorithm", "cost", "error", "time_s", *(f"u{i + 1}" for i in range(m))])
            for rec in self.records:
                r = rec.result
                w.writerow([rec.algorithm, _fmt(r.cost), _fmt(r.error), _fmt(r.elapsed), *map(_fmt, r.u)])
        return path

    def format(self) -> str:
        lines = [f"{'algorithm':<16}{'cost':>12}{'error':>14}{'time [s]':>12}  u"]
        for rec in self.records:
            r = rec.result
            u = ", ".join(f"{x:.4f}" for x in r.u)
            lines.append(f"{DISPLAY_NAMES.get(rec.algorithm, rec.algorithm):<16}"
                         f"{r.cost:>12.4f}{r.error:>14.4e}{r.elapsed:>12.3e}  [{u}]")
        return "\n".join(lines)


def _constant_command(cfg: ScenarioConfig) -> np.ndarray:
    c = cfg.command
    if c.kind == "constant":
        return np.asarray(c.value, dtype=float)
    if c.kind == "gaussian":
        return np.asarray(c.mean, dtype=float)
    raise ValueError("stationary comparison needs a constant (or gaussian mean) command")


def run_stationary(cfg: ScenarioConfig) -> StationaryTable:
    """Run every selected algorithm once on the constant demand."""
    nu = _constant_command(cfg)
    limits = cfg.limits_at(0.0)
    state = ActuatorState.at_rest(cfg.u0, cfg.dt)
    recs = [TrialRecord(name, allocate(name, cfg, nu, limits, state)) for name in cfg.algorithms]
    return StationaryTable(nu, recs)


# ---------------------------------------------------------------- timing

@dataclass
class TimingRow:
    algorithm: str
    cost: float
    error: float
    median_s: float
    p95_s: float


def run_timing(cfg: ScenarioConfig, repeats: int | None = None, reference: bool = True,
               reference_repeats: int | None = None) -> list[TimingRow]:
    """Repeat each allocator on the stationary demand and report wall-time percentiles."""
    repeats = repeats or cfg.repeats
    nu = _constant_command(cfg)
    limits = cfg.limits_at(0.0)
    state = ActuatorState.at_rest(cfg.u0, cfg.dt)
    names = list(cfg.algorithms)
    if reference and "generic_qp" not in names:
        names.append("generic_qp")
    rows = []
    for name in names:
        n = repeats if name != "generic_qp" else (reference_repeats or max(1, min(repeats, 100)))
        allocate(name, cfg, nu, limits, state)  # warm caches and imports
        times = np.empty(n)
        res = None
        for k in range(n):
            res = allocate(name, cfg, nu, limits, state)
            times[k] = res.elapsed
        rows.append(TimingRow(name, res.cost, res.error, float(np.median(times)),
                              float(np.percentile(times, 95))))
    return rows


def write_timing_csv(rows: list[TimingRow], path) -> Path:
    path = Path(path)
    ref = next((r.median_s for r in rows if r.algorithm == "generic_qp"), None)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "cost", "error", "median_time_s", "p95_time_s", "reference_ratio"])
        for r in rows:
            ratio = ref / r.median_s if ref else float("nan")
            w.writerow([r.algorithm, _fmt(r.cost), _fmt(r.error), _fmt(r.median_s), _fmt(r.p95_s), _fmt(ratio)])
    return path


# ---------------------------------------------------------------- Monte Carlo

def sample_commands(cfg: ScenarioConfig, n: int | None = None) -> np.ndarray:
    """Gaussian demands; sample ``i`` uses its own stream seeded by ``(seed, i)``."""
    c = cfg.command
    if c.kind != "gaussian":
        raise ValueError("Monte Carlo needs a gaussian command source")
    n = c.samples if n is None else n
    mean = np.asarray(c.mean, dtype=float)
    sigma = np.asarray(c.sigma, dtype=float)
    out = np.empty((n, mean.size))
    for i in range(n):
        z = np.random.default_rng([c.seed, i]).standard_normal(mean.size)
        out[i] = mean + sigma * z
    return out


@dataclass
class MonteCarloResult:
    nus: np.ndarray
    results: dict[str, list[AllocationResult]]
    record_timing: bool = True

    def metric(self, algorithm: str, metric: str) -> np.ndarray:
        rs = self.results[algorithm]
        if metric == "cost":
            return np.array([r.cost for r in rs])
        if metric == "error":
            return np.array([r.error for r in rs])
        if metric == "time_s":
            return np.array([r.elapsed if self.record_timing else np.nan for r in rs])
        raise ValueError(metric)

    def summary(self) -> list[tuple[str, str, float, float, float, float]]:
        rows = []
        for alg in self.results:
            for met in METRICS:
                v = self.metric(alg, met)
                if np.all(np.isnan(v)):
                    rows.append((alg, met, np.nan, np.nan, np.nan, np.nan))
                    continue
                p5, p50, p95 = np.percentile(v, [5, 50, 95])
                rows.append((alg, met, float(p5), float(p50), float(p95), float(v.mean())))
        return rows

    def write_csv(self, out_dir) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        raw = out_dir / "mc_raw.csv"
        with raw.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample", "algorithm", "cost", "error", "time_s"])
            for i in range(self.nus.shape[0]):
                for alg, rs in self.results.items():
                    r = rs[i]
                    t = r.elapsed if self.record_timing else float("nan")
                    w.writerow([i, alg, _fmt(r.cost), _fmt(r.error), _fmt(t)])
        summ = out_dir / "mc_summary.csv"
        with summ.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["algorithm", "metric", "p5", "p50", "p95", "mean"])
            for row in self.summary():
                w.writerow([row[0], row[1], *map(_fmt, row[2:])])
        return raw, summ

    def format(self) -> str:
        lines = [f"{'algorithm':<16}{'metric':<8}{'p5':>12}{'p50':>12}{'p95':>12}{'mean':>12}"]
        for alg, met, *vals in self.summary():
            lines.append(f"{DISPLAY_NAMES.get(alg, alg):<16}{met:<8}" + "".join(f"{v:>12.4g}" for v in vals))
        return "\n".join(lines)


def run_monte_carlo(cfg: ScenarioConfig, *, workers: int = 1, record_timing: bool = True) -> MonteCarloResult:
    """Run every selected algorithm on every sampled demand.

    With ``workers > 1`` samples run on a thread pool; results are assembled
    by sample index, so the output does not depend on the thread count.
    """
    nus = sample_commands(cfg)
    limits = cfg.limits_at(0.0)
    state = ActuatorState.at_rest(cfg.u0, cfg.dt)

    def one(nu):
        return [allocate(name, cfg, nu, limits, state) for name in cfg.algorithms]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, nus))
    else:
        rows = [one(nu) for nu in nus]
    results = {name: [row[k] for row in rows] for k, name in enumerate(cfg.algorithms)}
    return MonteCarloResult(nus, results, record_timing)


# ---------------------------------------------------------------- time simulation

def command_amplitude(cfg: ScenarioConfig) -> np.ndarray:
    """Sinusoid amplitude; ``auto`` scales the per-axis half-extent of the initial moment set."""
    c = cfg.command
    if c.amplitude is not None:
        return np.asarray(c.amplitude, dtype=float)
    lim = cfg.limits_at(0.0)
    ms = moment_set(cfg.B, EffectiveBounds(lim.u_min, lim.u_max), hull=False)
    return c.amplitude_scale * ms.half_extent


def command_at(cfg: ScenarioConfig, t: float, amplitude=None) -> np.ndarray:
    """Moment increment demanded at time ``t``."""
    c = cfg.command
    if c.kind == "constant":
        return np.asarray(c.value, dtype=float)
    if c.kind == "gaussian":
        return np.asarray(c.mean, dtype=float)
    amp = command_amplitude(cfg) if amplitude is None else amplitude
    return c.offset + amp * np.sin(2.0 * np.pi * c.frequency * t + c.phase)


@dataclass
class TimeLog:
    algorithm: str
    t: np.ndarray
    nu_cmd: np.ndarray
    nu_ach: np.ndarray
    u: np.ndarray
    udot: np.ndarray
    lo: np.ndarray  # magnitude limits in force at each step
    hi: np.ndarray
    rlo: np.ndarray  # rate limits in force at each step
    rhi: np.ndarray
    u_prev: np.ndarray  # deflection entering each step
    iterations: np.ndarray
    elapsed: np.ndarray

    @property
    def err(self) -> np.ndarray:
        return self.nu_cmd - self.nu_ach

    def write_csv(self, path) -> Path:
        path = Path(path)
        o = self.nu_cmd.shape[1]
        m = self.u.shape[1]
        ax = ["x", "y", "z"] if o == 3 else [str(k + 1) for k in range(o)]
        head = ["t", *(f"nu_cmd_{a}" for a in ax), *(f"nu_ach_{a}" for a in ax), *(f"err_{a}" for a in ax)]
        for p in ("u", "udot", "lo", "hi", "rlo", "rhi"):
            head += [f"{p}{i + 1}" for i in range(m)]
        err = self.err
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(head)
            for k in range(self.t.size):
                row = [self.t[k], *self.nu_cmd[k], *self.nu_ach[k], *err[k], *self.u[k], *self.udot[k],
                       *self.lo[k], *self.hi[k], *self.rlo[k], *self.rhi[k]]
                w.writerow([_fmt(x) for x in row])
        return path


def run_timesim(cfg: ScenarioConfig, algorithms=None) -> dict[str, TimeLog]:
    """Step the scenario from ``t = dt`` to ``duration``, one closed history per algorithm.

    Each step builds the actuator state from the two previous commands,
    evaluates the limit schedule, and asks the allocator for
    ``nu = B u_r + delta_nu(t)``.
    """
    algorithms = list(cfg.algorithms if algorithms is None else algorithms)
    n = int(round(cfg.duration / cfg.dt))
    ts = cfg.dt * np.arange(1, n + 1)
    amp = command_amplitude(cfg) if cfg.command.kind == "sinusoid" else None
    B = cfg.B
    o, m = B.shape
    nus = np.array([B @ cfg.u_r + command_at(cfg, t, amp) for t in ts]).reshape(n, o)
    lims = [cfg.limits_at(t) for t in ts]
    logs = {}
    for name in algorithms:
        u_hist = np.empty((n, m))
        u_in = np.empty((n, m))
        iters = np.empty(n, dtype=int)
        elapsed = np.empty(n)
        prev, prev2 = cfg.u0.copy(), cfg.u0.copy()
        for k in range(n):
            state = ActuatorState(prev, prev2, cfg.dt)
            res = allocate(name, cfg, nus[k], lims[k], state)
            u_in[k] = prev
            u_hist[k] = res.u
            iters[k] = res.iterations
            elapsed[k] = res.elapsed
            prev2, prev = prev, res.u.copy()
        logs[name] = TimeLog(
            algorithm=name, t=ts, nu_cmd=nus, nu_ach=u_hist @ B.T, u=u_hist,
            udot=(u_hist - u_in) / cfg.dt,
            lo=np.array([lim.u_min for lim in lims]), hi=np.array([lim.u_max for lim in lims]),
            rlo=np.array([lim.rate_min for lim in lims]), rhi=np.array([lim.rate_max for lim in lims]),
            u_prev=u_in, iterations=iters, elapsed=elapsed,
        )
    return logs


@dataclass
class TimesimAudit:
    steps: int
    magnitude_violations: int
    rate_violations: int
    reachable_steps: int
    inexact_reachable_steps: int
    bound_rate_violations: int
    max_reachable_error: float
    details: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.magnitude_violations or self.rate_violations
                    or self.inexact_reachable_steps or self.bound_rate_violations)

    def format(self) -> str:
        return (f"steps={self.steps} magnitude_violations={self.magnitude_violations} "
                f"rate_violations={self.rate_violations} reachable_steps={self.reachable_steps} "
                f"inexact_reachable={self.inexact_reachable_steps} "
                f"max_reachable_error={self.max_reachable_error:.3e} "
                f"bound_rate_violations={self.bound_rate_violations}")


def audit_timesim(log: TimeLog, cfg: ScenarioConfig, *, tol: float = 1e-9, exact_tol: float = 1e-6,
                  sit_tol: float = 1e-12, check_exactness: bool = True) -> TimesimAudit:
    """Post-hoc check of a time-simulation log.

    * every deflection inside its magnitude limits and every rate inside its
      rate limits (``tol``);
    * whenever the rate-intersected box can produce the demand (membership
      oracle on the box of that step), the moment error is at most
      ``exact_tol``;
    * an effector that enters a step on a magnitude limit does not move
      towards (or past) that limit faster than the limit itself moves.
    """
    mag = int(np.count_nonzero((log.u < log.lo - tol) | (log.u > log.hi + tol)))
    rate = int(np.count_nonzero((log.udot < log.rlo - tol) | (log.udot > log.rhi + tol)))
    details = []

    reach = inexact = 0
    max_err = 0.0
    if check_exactness:
        errs = np.linalg.norm(log.err, axis=1)
        for k in range(log.t.size):
            lim = ActuatorLimits(log.lo[k], log.hi[k], log.rlo[k], log.rhi[k])
            eb = effective_bounds(lim, ActuatorState(log.u_prev[k], log.u_prev[k], cfg.dt))
            if contains(cfg.B, eb, log.nu_cmd[k], exact_tol):
                reach += 1
                max_err = max(max_err, float(errs[k]))
                if errs[k] > exact_tol:
                    inexact += 1
                    if len(details) < 10:
                        details.append(f"t={log.t[k]:.2f}: reachable demand missed by {errs[k]:.3e}")

    # Limit velocities between consecutive steps; the first step compares with the first limits.
    bad = 0
    lo_prev = np.vstack([log.lo[:1], log.lo[:-1]])
    hi_prev = np.vstack([log.hi[:1], log.hi[:-1]])
    dt = cfg.dt
    on_hi = np.abs(log.u_prev - hi_prev) <= sit_tol
    on_lo = np.abs(log.u_prev - lo_prev) <= sit_tol
    hi_rate = (log.hi - hi_prev) / dt
    lo_rate = (log.lo - lo_prev) / dt
    bad += int(np.count_nonzero(on_hi & (log.udot - hi_rate > tol)))
    bad += int(np.count_nonzero(on_lo & (lo_rate - log.udot > tol)))
    return TimesimAudit(log.t.size, mag, rate, reach, inexact, bad, max_err, details)


def with_seed(cfg: ScenarioConfig, seed: int) -> ScenarioConfig:
    return replace(cfg, command=replace(cfg.command, seed=int(seed)))
