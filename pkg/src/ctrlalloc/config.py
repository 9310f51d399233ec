"""Scenario configuration: YAML schema, defaults and validation.

A scenario file is a YAML mapping. Matrices are written row-major as lists of
lists; per-effector vectors accept either a list or a scalar broadcast to all
effectors. :func:`validate_config` checks everything and reports every problem
it finds, not just the first. The full schema with defaults is documented in
``configs/SCHEMA.md``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .allocators import IdcaConfig
from .core import ActuatorLimits, DEFAULT_DT
from .weighting import DEFAULT_EPSILON, DragModel, WeightingConfig

ALGORITHMS = ("pica", "saturated_pica", "rpica", "rspica", "qpca", "idca")
EXTRA_ALGORITHMS = ("generic_qp",)
WAVEFORMS = ("raised_cosine", "sine", "constant")
COMMAND_KINDS = ("constant", "sinusoid", "gaussian")
STEADY_STATE_MODES = ("conditional", "pseudoinverse", "zero")
UNBOUNDED_RATE = 1e6

_TOP_KEYS = {"name", "description", "B", "limits", "dt", "duration", "command", "u_r", "u0",
             "steady_state", "weighting", "idca", "qpca", "rpica", "algorithms", "repeats"}


class ConfigError(ValueError):
    """Configuration failed validation; ``errors`` lists every diagnostic."""

    def __init__(self, errors, source: str | None = None):
        self.errors = list(errors)
        self.source = source
        head = f"invalid configuration {source}" if source else "invalid configuration"
        super().__init__(head + ":\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass(frozen=True)
class Modulation:
    """Waveform ``Lambda(t)`` (rad) scaling the upper magnitude limit by ``cos(Lambda)``."""

    waveform: str = "raised_cosine"
    amplitude: float = 0.6
    period: float = 60.0
    offset: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.waveform == "raised_cosine":
            return self.offset + self.amplitude * 0.5 * (1.0 - np.cos(2.0 * np.pi * t / self.period))
        if self.waveform == "sine":
            return self.offset + self.amplitude * np.sin(2.0 * np.pi * t / self.period)
        return self.offset + self.amplitude + 0.0 * t

    def extremes(self) -> tuple[float, float]:
        """Smallest and largest value the waveform can take."""
        a, c = self.amplitude, self.offset
        if self.waveform == "raised_cosine":
            return min(c, c + a), max(c, c + a)
        if self.waveform == "sine":
            return c - abs(a), c + abs(a)
        return c + a, c + a


@dataclass(frozen=True)
class LimitSchedule:
    """Time-varying limits: ``u_max(t) = u_max_full*cos(Lambda(t))``, linear rate ramps."""

    u_max_full: np.ndarray
    modulation: Modulation
    rate_max: tuple[float, float] = (20.0, 10.0)
    rate_min: tuple[float, float] = (-20.0, -30.0)


@dataclass(frozen=True)
class CommandSource:
    kind: str
    value: np.ndarray | None = None  # constant
    amplitude: np.ndarray | None = None  # sinusoid; None means auto from the AMS
    amplitude_scale: float = 1.2
    frequency: np.ndarray | None = None
    phase: np.ndarray | None = None
    offset: np.ndarray | None = None
    mean: np.ndarray | None = None  # gaussian
    sigma: np.ndarray | None = None
    samples: int = 0
    seed: int | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    B: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    rate_min: np.ndarray
    rate_max: np.ndarray
    command: CommandSource
    u_r: np.ndarray
    u0: np.ndarray
    dt: float = DEFAULT_DT
    duration: float = 60.0
    schedule: LimitSchedule | None = None
    steady_state: str = "conditional"
    weighting: WeightingConfig = field(default_factory=WeightingConfig)
    idca: IdcaConfig = field(default_factory=IdcaConfig)
    qpca_lambda: float = 1e-6
    rpica_iterations: int = 8
    algorithms: tuple[str, ...] = ALGORITHMS
    repeats: int = 1000
    description: str = ""

    @property
    def o(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def limits_at(self, t: float) -> ActuatorLimits:
        """Actuator limits in force at time ``t``."""
        if self.schedule is None:
            return ActuatorLimits(self.u_min, self.u_max, self.rate_min, self.rate_max)
        s = self.schedule
        frac = min(max(t / self.duration, 0.0), 1.0) if self.duration > 0 else 0.0
        u_max = s.u_max_full * math.cos(float(s.modulation(t)))
        r_max = s.rate_max[0] + (s.rate_max[1] - s.rate_max[0]) * frac
        r_min = s.rate_min[0] + (s.rate_min[1] - s.rate_min[0]) * frac
        u_max = np.maximum(u_max, self.u_min)
        return ActuatorLimits(self.u_min, u_max, np.full(self.m, r_min), np.full(self.m, r_max))

    def with_overrides(self, *, seed: int | None = None, algorithms=None) -> "ScenarioConfig":
        from dataclasses import replace
        cfg = self
        if seed is not None:
            cfg = replace(cfg, command=replace(cfg.command, seed=int(seed)))
        if algorithms is not None:
            cfg = replace(cfg, algorithms=tuple(algorithms))
        return cfg


class _Checker:
    """Collects diagnostics while pulling typed values out of the raw mapping."""

    def __init__(self):
        self.errors: list[str] = []

    def err(self, msg: str):
        self.errors.append(msg)

    def number(self, raw, key, default=None, *, positive=False, nonneg=False, integer=False):
        val = raw.get(key.rsplit(".", 1)[-1], default) if isinstance(raw, dict) else default
        if val is None:
            if default is None:
                self.err(f"{key}: required")
            return default
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.err(f"{key}: expected a number, got {val!r}")
            return default
        if integer and int(val) != val:
            self.err(f"{key}: expected an integer, got {val!r}")
            return default
        if not math.isfinite(val):
            self.err(f"{key}: must be finite")
            return default
        if positive and not val > 0:
            self.err(f"{key}: must be > 0, got {val!r}")
        if nonneg and val < 0:
            self.err(f"{key}: must be >= 0, got {val!r}")
        return int(val) if integer else float(val)

    def vector(self, val, key, size):
        """Scalar or list of numbers of length ``size``; returns None on error."""
        if val is None:
            self.err(f"{key}: required")
            return None
        if isinstance(val, bool):
            self.err(f"{key}: expected number or list, got {val!r}")
            return None
        if isinstance(val, (int, float)):
            arr = np.full(size, float(val))
        elif isinstance(val, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
            arr = np.array(val, dtype=float)
            if size is not None and arr.size != size:
                self.err(f"{key}: expected {size} entries, got {arr.size}")
                return None
        else:
            self.err(f"{key}: expected number or list of numbers, got {val!r}")
            return None
        if not np.all(np.isfinite(arr)):
            self.err(f"{key}: entries must be finite")
            return None
        return arr


def _parse_matrix(chk: _Checker, raw):
    if raw is None:
        chk.err("B: required")
        return None
    if not isinstance(raw, list) or not raw:
        chk.err("B: expected a non-empty list of rows")
        return None
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raw = [raw]
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            chk.err(f"B[{i}]: expected a list of numbers")
            return None
        rows.append(row)
    if len({len(r) for r in rows}) != 1:
        chk.err("B: rows have different lengths")
        return None
    B = np.array(rows, dtype=float)
    if not np.all(np.isfinite(B)):
        chk.err("B: entries must be finite")
        return None
    o, m = B.shape
    if m < o:
        chk.err(f"B: needs at least as many effectors as axes, got {o}x{m}")
    return B


def _effectors(idx) -> str:
    return ", ".join(str(i + 1) for i in idx)


def _parse_schedule(chk, raw, m, u_min, duration):
    if not isinstance(raw, dict):
        chk.err("limits.schedule: expected a mapping")
        return None
    full = chk.vector(raw.get("u_max_full", 20.0), "limits.schedule.u_max_full", m)
    mod_raw = raw.get("modulation", {}) or {}
    if not isinstance(mod_raw, dict):
        chk.err("limits.schedule.modulation: expected a mapping")
        mod_raw = {}
    waveform = mod_raw.get("waveform", "raised_cosine")
    if waveform not in WAVEFORMS:
        chk.err(f"limits.schedule.modulation.waveform: unknown {waveform!r}, expected one of {list(WAVEFORMS)}")
        waveform = "raised_cosine"
    amp = chk.number(mod_raw, "limits.schedule.modulation.amplitude", 0.6)
    period = chk.number(mod_raw, "limits.schedule.modulation.period", duration, positive=True)
    offset = chk.number(mod_raw, "limits.schedule.modulation.offset", 0.0)
    mod = Modulation(waveform, amp, period, offset)
    lo, hi = mod.extremes()
    if max(abs(lo), abs(hi)) >= math.pi / 2:
        chk.err(f"limits.schedule.modulation: |Lambda(t)| reaches {max(abs(lo), abs(hi)):.4g} rad >= pi/2, "
                "which drives u_max(t) = u_max_full*cos(Lambda) to zero or below")
    ramps = {}
    for key, default, sign in (("rate_max", (20.0, 10.0), 1), ("rate_min", (-20.0, -30.0), -1)):
        r = raw.get(key, {"start": default[0], "end": default[1]})
        if not isinstance(r, dict):
            chk.err(f"limits.schedule.{key}: expected a mapping with start and end")
            ramps[key] = default
            continue
        start = chk.number(r, f"limits.schedule.{key}.start", default[0])
        end = chk.number(r, f"limits.schedule.{key}.end", default[1])
        for name, v in (("start", start), ("end", end)):
            if v is not None and sign * v <= 0:
                chk.err(f"limits.schedule.{key}.{name}: must be {'> 0' if sign > 0 else '< 0'}, got {v!r}")
        ramps[key] = (start, end)
    if full is not None and u_min is not None:
        worst = full * math.cos(max(abs(lo), abs(hi))) if max(abs(lo), abs(hi)) < math.pi / 2 else full * 0.0
        bad = np.flatnonzero(np.minimum(full, worst) < u_min)
        if bad.size:
            chk.err(f"limits.schedule: scheduled u_max falls below u_min for effector(s) {_effectors(bad)}")
    if full is None:
        return None
    return LimitSchedule(full, mod, ramps["rate_max"], ramps["rate_min"])


def _parse_command(chk, raw, o):
    if not isinstance(raw, dict):
        chk.err("command: required mapping with a 'kind' key")
        return None
    kind = raw.get("kind")
    if kind not in COMMAND_KINDS:
        chk.err(f"command.kind: expected one of {list(COMMAND_KINDS)}, got {kind!r}")
        return None
    if kind == "constant":
        return CommandSource("constant", value=chk.vector(raw.get("value"), "command.value", o))
    if kind == "sinusoid":
        amp = raw.get("amplitude", "auto")
        amplitude = None if amp == "auto" else chk.vector(amp, "command.amplitude", o)
        scale = chk.number(raw, "command.amplitude_scale", 1.2, positive=True)
        freq = chk.vector(raw.get("frequency", [0.1, 0.15, 0.05][:o] if o <= 3 else None), "command.frequency", o)
        if freq is not None and np.any(freq < 0):
            chk.err("command.frequency: must be >= 0")
        phase = chk.vector(raw.get("phase", 0.0), "command.phase", o)
        offset = chk.vector(raw.get("offset", 0.0), "command.offset", o)
        return CommandSource("sinusoid", amplitude=amplitude, amplitude_scale=scale, frequency=freq,
                             phase=phase, offset=offset)
    mean = chk.vector(raw.get("mean"), "command.mean", o)
    sigma = chk.vector(raw.get("sigma"), "command.sigma", o)
    if sigma is not None and np.any(sigma < 0):
        chk.err("command.sigma: must be >= 0")
    samples = chk.number(raw, "command.samples", None, positive=True, integer=True)
    seed = raw.get("seed")
    if seed is None:
        chk.err("command.seed: required for the gaussian sampler")
    elif isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        chk.err(f"command.seed: expected a non-negative integer, got {seed!r}")
        seed = None
    return CommandSource("gaussian", mean=mean, sigma=sigma, samples=samples or 0, seed=seed)


def _parse_weighting(chk, raw, m):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        chk.err("weighting: expected a mapping")
        return WeightingConfig()
    eps = chk.number(raw, "weighting.epsilon", DEFAULT_EPSILON, positive=True)
    drag_raw = raw.get("drag", {}) or {}
    d = DragModel()
    c0 = chk.vector(drag_raw.get("c0", d.c0.tolist() if m == 4 else 0.001), "weighting.drag.c0", m)
    c1 = chk.vector(drag_raw.get("c1", d.c1.tolist() if m == 4 else 0.004), "weighting.drag.c1", m)
    floor = chk.number(drag_raw, "weighting.drag.floor", 1e-6, positive=True)
    if c0 is None or c1 is None or not (eps and eps > 0) or not (floor and floor > 0):
        return WeightingConfig()
    return WeightingConfig(eps, DragModel(c0, c1, floor))


def _parse_idca(chk, raw):
    raw = raw or {}
    if not isinstance(raw, dict):
        chk.err("idca: expected a mapping")
        return IdcaConfig()
    kw = dict(
        max_iterations=chk.number(raw, "idca.max_iterations", 8, positive=True, integer=True),
        residual_tol=chk.number(raw, "idca.residual_tol", 1e-6, positive=True),
        rank_tol=chk.number(raw, "idca.rank_tol", 1e-12, positive=True),
        adjust_steady_state=raw.get("adjust_steady_state", True),
        rate_update=raw.get("rate_update", "telescoping"),
        freeze_policy=raw.get("freeze_policy", "rank_guarded"),
    )
    if not isinstance(kw["adjust_steady_state"], bool):
        chk.err("idca.adjust_steady_state: expected true or false")
        kw["adjust_steady_state"] = True
    for key, allowed in (("rate_update", ("telescoping", "verbatim")), ("freeze_policy", ("rank_guarded", "all"))):
        if kw[key] not in allowed:
            chk.err(f"idca.{key}: expected one of {list(allowed)}, got {kw[key]!r}")
            kw[key] = allowed[0]
    try:
        return IdcaConfig(**kw)
    except (TypeError, ValueError):
        return IdcaConfig()


def validate_config(text: str, source: str | None = None) -> ScenarioConfig:
    """Parse and validate a YAML scenario; raises :class:`ConfigError` listing all problems."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"YAML syntax: {exc}"], source) from None
    if not isinstance(raw, dict):
        raise ConfigError(["top level: expected a mapping of keys"], source)
    chk = _Checker()
    for key in sorted(set(raw) - _TOP_KEYS):
        chk.err(f"{key}: unknown key")

    B = _parse_matrix(chk, raw.get("B"))
    o, m = (B.shape if B is not None else (None, None))

    dt = chk.number(raw, "dt", DEFAULT_DT, positive=True)
    duration = chk.number(raw, "duration", 60.0, positive=True)
    if dt and duration and dt > 0 and duration > 0 and dt > duration:
        chk.err("dt: larger than duration")

    lim = raw.get("limits")
    u_min = u_max = r_min = r_max = schedule = None
    if not isinstance(lim, dict):
        chk.err("limits: required mapping")
    elif m is not None:
        u_min = chk.vector(lim.get("u_min"), "limits.u_min", m)
        has_schedule = lim.get("schedule") is not None
        u_max_raw = lim.get("u_max")
        if u_max_raw is None and has_schedule and isinstance(lim["schedule"], dict):
            # The schedule defines u_max; its full value doubles as the static limit.
            u_max_raw = lim["schedule"].get("u_max_full", 20.0)
        u_max = chk.vector(u_max_raw, "limits.u_max", m)
        r_min = chk.vector(lim.get("rate_min", -UNBOUNDED_RATE), "limits.rate_min", m)
        r_max = chk.vector(lim.get("rate_max", UNBOUNDED_RATE), "limits.rate_max", m)
        if u_min is not None and u_max is not None:
            bad = np.flatnonzero(u_min > u_max)
            if bad.size:
                chk.err(f"limits: u_min > u_max for effector(s) {_effectors(bad)}")
        if r_min is not None:
            bad = np.flatnonzero(r_min > 0)
            if bad.size:
                chk.err(f"limits.rate_min: must be <= 0 for effector(s) {_effectors(bad)}")
        if r_max is not None:
            bad = np.flatnonzero(r_max < 0)
            if bad.size:
                chk.err(f"limits.rate_max: must be >= 0 for effector(s) {_effectors(bad)}")
        if has_schedule:
            schedule = _parse_schedule(chk, lim["schedule"], m, u_min, duration or 60.0)

    command = _parse_command(chk, raw.get("command"), o) if o is not None else None
    u_r = chk.vector(raw.get("u_r", 0.0), "u_r", m) if m is not None else None
    u0 = chk.vector(raw.get("u0", 0.0), "u0", m) if m is not None else None

    steady = raw.get("steady_state", "conditional")
    if steady not in STEADY_STATE_MODES:
        chk.err(f"steady_state: expected one of {list(STEADY_STATE_MODES)}, got {steady!r}")
    elif steady == "conditional" and B is not None and B.shape != (3, 4):
        chk.err(f"steady_state: 'conditional' needs a 3x4 effectiveness matrix, got {B.shape[0]}x{B.shape[1]}")

    weighting = _parse_weighting(chk, raw.get("weighting"), m or 4)
    idca_cfg = _parse_idca(chk, raw.get("idca"))
    qp_raw = raw.get("qpca") or {}
    qpca_lambda = chk.number(qp_raw, "qpca.reg_lambda", 1e-6, nonneg=True)
    rp_raw = raw.get("rpica") or {}
    rpica_iterations = chk.number(rp_raw, "rpica.max_iterations", 8, positive=True, integer=True)
    repeats = chk.number(raw, "repeats", 1000, positive=True, integer=True)

    algs = raw.get("algorithms", list(ALGORITHMS))
    if not isinstance(algs, list) or not all(isinstance(a, str) for a in algs):
        chk.err("algorithms: expected a list of names")
        algs = []
    else:
        for a in algs:
            if a not in ALGORITHMS + EXTRA_ALGORITHMS:
                chk.err(f"algorithms: unknown algorithm {a!r}, expected from {list(ALGORITHMS + EXTRA_ALGORITHMS)}")

    name = raw.get("name", Path(source).stem if source else "scenario")
    if chk.errors:
        raise ConfigError(chk.errors, source)
    return ScenarioConfig(
        name=str(name), B=B, u_min=u_min, u_max=u_max, rate_min=r_min, rate_max=r_max,
        command=command, u_r=u_r, u0=u0, dt=dt, duration=duration, schedule=schedule,
        steady_state=steady, weighting=weighting, idca=idca_cfg, qpca_lambda=qpca_lambda,
        rpica_iterations=rpica_iterations, algorithms=tuple(algs), repeats=repeats,
        description=str(raw.get("description", "")),
    )


def bundled_configs() -> list[str]:
    root = resources.files("ctrlalloc") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_config(ref: str | Path) -> ScenarioConfig:
    """Load a scenario from a file path or the name of a bundled config."""
    path = Path(ref)
    if path.is_file():
        return validate_config(path.read_text(), str(path))
    name = str(ref)
    if name.endswith(".yaml"):
        name = name[:-5]
    if "/" not in name and name in bundled_configs():
        res = resources.files("ctrlalloc") / "configs" / f"{name}.yaml"
        return validate_config(res.read_text(), f"{name}.yaml")
    raise FileNotFoundError(f"config file not found: {ref}")
