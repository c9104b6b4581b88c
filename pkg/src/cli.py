"""Command-line front end: run configurations, grids, presets and output.

A run configuration is a flat document of ``section.key = value`` lines:

    # weak Ohmic bath, Zeno scan
    bath.kind = ohmic
    bath.alpha = 0.01
    bath.omega_c = 10
    task.name = zeno
    grid.tau = logspace(0.01, 20, 200)
    numerics.quad_epsrel = 1e-10

Sections are ``bath``, ``numerics``, ``task``, ``grid``, ``output`` and
``run``. Grid values are comma-separated numbers or ``linspace(a, b, n)`` /
``logspace(a, b, n)`` with the endpoints given as values.
"""

import argparse
import json
import logging
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src import __version__
from src.bath import BathKind, BathSpec, spectral_density
from src.config import DEFAULT_NUMERICS, Numerics
from src.dynamics import DEFAULT_TIMES, fit_damped_cosine, residue_series, sigma_x_series
from src.errors import ConfigError, DomainError, GridError, MethodValidityError, NumericalError, ZenoError
from src.oracle import Scheme, SingleExcitationOracle, discretize, oracle_survival
from src.renorm import solve_eta
from src.selfenergy import decay_width, level_shift
from src.utils import format_float, get_default_jobs, get_log_level, save_results, to_jsonable, utc_timestamp
from src.zeno import DEFAULT_TAUS, gamma_tau, interaction_f, zeno_scan

logger = logging.getLogger(__name__)

TASKS = ("eta", "spectrum", "dynamics", "zeno", "oracle")
FORMATS = ("csv", "json")
ORACLE_TARGETS = ("dynamics", "zeno")
ORACLE_SCHEMES = ("auto", "linear", "logarithmic")

DEFAULT_OMEGAS = np.linspace(0.01, 5.0, 500)
ORACLE_TAUS = np.geomspace(0.1, 5.0, 40)

REFERENCE_BATHS = {
    "lorentzian_weak": BathSpec.lorentzian(0.01, 0.09),
    "ohmic_weak": BathSpec.ohmic(0.01, 10.0),
    "lorentzian_strong": BathSpec.lorentzian(0.1, 0.3),
    "ohmic_strong": BathSpec.ohmic(0.1, 10.0),
}

PRESETS = {
    "fig1": ("spectrum", ("lorentzian_weak", "lorentzian_strong", "ohmic_weak", "ohmic_strong")),
    "fig2a": ("dynamics", ("lorentzian_weak", "ohmic_weak")),
    "fig2b": ("dynamics", ("lorentzian_strong", "ohmic_strong")),
    "fig3": ("zeno", ("lorentzian_weak", "ohmic_weak")),
    "fig4": ("zeno", ("lorentzian_strong", "ohmic_strong")),
}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VALIDITY = 4

_GRID_CALL = re.compile(r"^(linspace|logspace)\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\)$")


@dataclass(frozen=True)
class GridAxes:
    """Optional value lists; bath axes span cells, tau/t/omega sample inside a cell."""

    alpha: Optional[Tuple[float, ...]] = None
    lam: Optional[Tuple[float, ...]] = None
    omega_c: Optional[Tuple[float, ...]] = None
    tau: Optional[Tuple[float, ...]] = None
    t: Optional[Tuple[float, ...]] = None
    omega: Optional[Tuple[float, ...]] = None


@dataclass
class RunConfig:
    """Everything a run needs; every field has a default."""

    bath: BathSpec = REFERENCE_BATHS["lorentzian_weak"]
    numerics: Numerics = DEFAULT_NUMERICS
    task: str = "eta"
    oracle_target: str = "dynamics"
    oracle_scheme: str = "auto"
    grid: GridAxes = field(default_factory=GridAxes)
    output_path: Optional[str] = None
    output_format: str = "csv"
    jobs: Optional[int] = None
    preset: Optional[str] = None

    @property
    def workers(self) -> int:
        return self.jobs or 1

    def as_dict(self) -> Dict[str, Any]:
        return {
            "bath": self.bath.as_dict(),
            "numerics": self.numerics.as_dict(),
            "task": {"name": self.task, "oracle_target": self.oracle_target, "oracle_scheme": self.oracle_scheme},
            "grid": {k: list(v) for k, v in _grid_items(self.grid)},
            "output": {"path": self.output_path, "format": self.output_format},
            "run": {"jobs": self.jobs, "preset": self.preset},
        }


@dataclass
class TaskResult:
    """Output of one task on one bath."""

    scalars: Dict[str, Any]
    table: pd.DataFrame
    warnings: List[str] = field(default_factory=list)


@dataclass
class ResultEnvelope:
    """A task result with the configuration and provenance that produced it."""

    label: str
    task: str
    config: Dict[str, Any]
    scalars: Dict[str, Any]
    table: pd.DataFrame
    warnings: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    version: str = __version__
    generated_at: str = field(default_factory=utc_timestamp)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "task": self.task,
            "version": self.version,
            "generated_at": self.generated_at,
            "wall_time": self.wall_time,
            "config": self.config,
            "scalars": self.scalars,
            "warnings": list(self.warnings),
            "table": {"columns": list(self.table.columns), "rows": self.table.values.tolist()},
        }

    def to_json(self) -> str:
        return json.dumps(to_jsonable(self.to_dict()), indent=2, allow_nan=False)

    def to_csv(self) -> str:
        return self.table.to_csv(index=False, float_format="%.17g", lineterminator="\n")


# ---------------------------------------------------------------------------
# configuration text
# ---------------------------------------------------------------------------

_GRID_KEYS = {"alpha": "alpha", "lambda": "lam", "omega_c": "omega_c", "tau": "tau", "t": "t", "omega": "omega"}


def _grid_items(grid: GridAxes):
    for key, attr in _GRID_KEYS.items():
        values = getattr(grid, attr)
        if values is not None:
            yield key, values


def _parse_float(value: str, key: str, line: Optional[int]) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}", line) from None


def _parse_int(value: str, key: str, line: Optional[int]) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}", line) from None


def parse_grid_values(value: str, key: str = "grid", line: Optional[int] = None) -> Tuple[float, ...]:
    """Parse ``a, b, c`` or ``linspace(a, b, n)`` / ``logspace(a, b, n)``."""
    match = _GRID_CALL.match(value.strip())
    if match:
        kind, start, stop, count = match.groups()
        a, b = _parse_float(start, key, line), _parse_float(stop, key, line)
        n = _parse_int(count.strip(), key, line)
        if n < 1:
            raise ConfigError(f"{key}: point count must be >= 1", line)
        if kind == "logspace":
            if a <= 0 or b <= 0:
                raise ConfigError(f"{key}: logspace endpoints must be > 0", line)
            return tuple(float(x) for x in np.geomspace(a, b, n))
        return tuple(float(x) for x in np.linspace(a, b, n))
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"{key}: empty value list", line)
    return tuple(_parse_float(item, key, line) for item in items)


class _ConfigBuilder:
    def __init__(self):
        self.bath: Dict[str, Tuple[str, Optional[int]]] = {}
        self.numerics: Dict[str, Any] = {}
        self.grid: Dict[str, Tuple[float, ...]] = {}
        self.values: Dict[str, Any] = {}

    def apply(self, key: str, value: str, line: Optional[int]) -> None:
        if "." not in key:
            raise ConfigError(f"expected 'section.key', got {key!r}", line)
        section, name = key.split(".", 1)
        if section == "bath":
            if name not in ("kind", "alpha", "lambda", "omega_c"):
                raise ConfigError(f"unknown key {key!r}", line)
            self.bath[name] = (value, line)
        elif section == "numerics":
            kinds = {f.name: f.type for f in fields(Numerics)}
            if name not in kinds:
                raise ConfigError(f"unknown key {key!r}", line)
            parse = _parse_int if kinds[name] in (int, "int") else _parse_float
            parsed = parse(value, key, line)
            try:
                DEFAULT_NUMERICS.replace(**{name: parsed})
            except ConfigError as e:
                raise ConfigError(str(e), line) from None
            self.numerics[name] = parsed
        elif section == "grid":
            if name not in _GRID_KEYS:
                raise ConfigError(f"unknown key {key!r}", line)
            self.grid[_GRID_KEYS[name]] = parse_grid_values(value, key, line)
        elif section == "task":
            choices = {"name": TASKS, "oracle_target": ORACLE_TARGETS, "oracle_scheme": ORACLE_SCHEMES}
            if name not in choices:
                raise ConfigError(f"unknown key {key!r}", line)
            if value not in choices[name]:
                raise ConfigError(f"{key} must be one of {', '.join(choices[name])}, got {value!r}", line)
            self.values["task" if name == "name" else name] = value
        elif section == "output":
            if name == "path":
                self.values["output_path"] = value
            elif name == "format":
                if value not in FORMATS:
                    raise ConfigError(f"{key} must be csv or json, got {value!r}", line)
                self.values["output_format"] = value
            else:
                raise ConfigError(f"unknown key {key!r}", line)
        elif section == "run":
            if name == "jobs":
                jobs = _parse_int(value, key, line)
                if jobs < 1:
                    raise ConfigError(f"{key} must be >= 1", line)
                self.values["jobs"] = jobs
            elif name == "preset":
                if value not in PRESETS:
                    raise ConfigError(f"unknown preset {value!r}", line)
                self.values["preset"] = value
            else:
                raise ConfigError(f"unknown key {key!r}", line)
        else:
            raise ConfigError(f"unknown section {section!r}", line)

    def _build_bath(self) -> BathSpec:
        kind_text, kind_line = self.bath.get("kind", ("lorentzian", None))
        try:
            kind = BathKind(kind_text)
        except ValueError:
            raise ConfigError(f"bath.kind must be lorentzian or ohmic, got {kind_text!r}", kind_line) from None
        width_key, other = ("lambda", "omega_c") if kind is BathKind.LORENTZIAN else ("omega_c", "lambda")
        if other in self.bath:
            raise ConfigError(f"bath.{other} does not apply to the {kind.value} bath", self.bath[other][1])
        default = REFERENCE_BATHS["lorentzian_weak" if kind is BathKind.LORENTZIAN else "ohmic_weak"]
        alpha_text, alpha_line = self.bath.get("alpha", (None, None))
        width_text, width_line = self.bath.get(width_key, (None, None))
        alpha = default.alpha if alpha_text is None else _parse_float(alpha_text, "bath.alpha", alpha_line)
        width = default.width if width_text is None else _parse_float(width_text, f"bath.{width_key}", width_line)
        try:
            return BathSpec(kind, alpha, width)
        except DomainError as e:
            raise ConfigError(str(e), width_line if "alpha" not in str(e) else alpha_line) from None

    def build(self) -> RunConfig:
        numerics = DEFAULT_NUMERICS.replace(**self.numerics)
        return RunConfig(bath=self._build_bath(), numerics=numerics, grid=GridAxes(**self.grid), **self.values)


def parse_config(text: str, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Parse a run configuration and apply ``key=value`` overrides on top.

    Args:
        text: The configuration document
        overrides: Extra assignments, later ones winning

    Returns:
        RunConfig with defaults filled in

    Raises:
        ConfigError: On syntax errors, unknown keys, duplicate keys or
            invalid values, naming the offending line
    """
    builder = _ConfigBuilder()
    seen = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'section.key = value', got {raw.strip()!r}", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}", number)
        seen.add(key)
        builder.apply(key, value, number)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        builder.apply(key, value, None)
    return builder.build()


def emit_config(config: RunConfig) -> str:
    """Write ``config`` as a document that ``parse_config`` reads back unchanged."""
    bath = config.bath
    width_key = "lambda" if bath.kind is BathKind.LORENTZIAN else "omega_c"
    lines = [
        "# qubit Zeno dynamics run configuration",
        f"bath.kind = {bath.kind.value}",
        f"bath.alpha = {format_float(bath.alpha)}",
        f"bath.{width_key} = {format_float(bath.width)}",
        f"task.name = {config.task}",
        f"task.oracle_target = {config.oracle_target}",
        f"task.oracle_scheme = {config.oracle_scheme}",
    ]
    for f in fields(Numerics):
        value = getattr(config.numerics, f.name)
        lines.append(f"numerics.{f.name} = {value if isinstance(value, int) else format_float(value)}")
    for key, values in _grid_items(config.grid):
        lines.append(f"grid.{key} = {', '.join(format_float(v) for v in values)}")
    if config.output_path is not None:
        lines.append(f"output.path = {config.output_path}")
    lines.append(f"output.format = {config.output_format}")
    if config.jobs is not None:
        lines.append(f"run.jobs = {config.jobs}")
    if config.preset is not None:
        lines.append(f"run.preset = {config.preset}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------

def _axis(values: Optional[Tuple[float, ...]], default: np.ndarray) -> np.ndarray:
    return default if values is None else np.asarray(values, dtype=float)


def _eta_warnings(bath: BathSpec, config: RunConfig) -> List[str]:
    warnings = list(bath.warnings())
    renorm = solve_eta(bath, numerics=config.numerics)
    if renorm.method == "bisection":
        warnings.append("fixed-point iteration for eta stalled; bisection was used")
    return warnings


def _run_eta(bath: BathSpec, config: RunConfig, jobs: int) -> TaskResult:
    renorm = solve_eta(bath, numerics=config.numerics)
    table = pd.DataFrame([renorm.as_dict()])
    return TaskResult(renorm.as_dict(), table)


def _run_spectrum(bath: BathSpec, config: RunConfig, jobs: int) -> TaskResult:
    eta = solve_eta(bath, numerics=config.numerics).eta
    omega = _axis(config.grid.omega, DEFAULT_OMEGAS)
    shift = np.asarray(level_shift(bath, eta, omega, config.numerics))
    width = np.asarray(decay_width(bath, eta, omega))
    weight = width / (np.pi * ((omega - eta - shift) ** 2 + width ** 2))
    table = pd.DataFrame(
        {
            "omega": omega,
            "J": spectral_density(bath, omega),
            "R": shift,
            "Gamma": width,
            "f": interaction_f(omega, eta),
            "weight": weight,
        }
    )
    return TaskResult({"eta": eta}, table)


def _run_dynamics(bath: BathSpec, config: RunConfig, jobs: int) -> TaskResult:
    times = _axis(config.grid.t, DEFAULT_TIMES)
    series = sigma_x_series(bath, times, config.numerics)
    scalars: Dict[str, Any] = {
        "eta": series.eta,
        "omega0": series.omega0,
        "gamma_pole": series.gamma_pole,
        "shift": series.shift.value,
        "coherence_time": series.coherence_time,
    }
    table = pd.DataFrame({"t": series.times, "sigma_x": series.values})
    warnings = list(series.warnings)
    if not bath.is_trivial:
        table["residue_estimate"] = residue_series(bath, series.times, config.numerics)
        try:
            fit = fit_damped_cosine(series)
            scalars.update(fit_freq=fit.freq, fit_rate=fit.rate)
        except (DomainError, NumericalError) as e:
            warnings.append(f"damped-cosine fit skipped: {e}")
    return TaskResult(scalars, table, warnings)


def _run_zeno(bath: BathSpec, config: RunConfig, jobs: int) -> TaskResult:
    curve = zeno_scan(bath, _axis(config.grid.tau, DEFAULT_TAUS), config.numerics, jobs=jobs)
    table = pd.DataFrame(
        {
            "tau": curve.taus,
            "gamma": curve.gamma,
            "gamma_rwa": curve.gamma_rwa,
            "gamma0": np.full(curve.taus.size, curve.gamma0),
            "ratio": curve.ratio,
            "ratio_rwa": curve.ratio_rwa,
            "regime": [r.value for r in curve.regime],
        }
    )
    scalars = {"eta": curve.eta, "gamma0": curve.gamma0, "anti_zeno_window": curve.has_anti_zeno_window}
    return TaskResult(scalars, table)


def _trim(axis: np.ndarray, limit: float, name: str, warnings: List[str]) -> np.ndarray:
    kept = axis[axis < limit]
    if kept.size < axis.size:
        message = f"{name} grid trimmed to the recurrence time {limit:.6g} of the discrete bath"
        logger.warning(message)
        warnings.append(message)
    if kept.size == 0:
        raise DomainError(f"no {name} value lies below the recurrence time {limit:.6g}")
    return kept


def _run_oracle(bath: BathSpec, config: RunConfig, jobs: int) -> TaskResult:
    num = config.numerics
    scheme = None if config.oracle_scheme == "auto" else Scheme(config.oracle_scheme)
    disc = discretize(bath, scheme=scheme, numerics=num)
    oracle = SingleExcitationOracle(disc, num)
    warnings: List[str] = []
    scalars: Dict[str, Any] = {
        "eta": solve_eta(bath, numerics=num).eta,
        "oracle_eta": oracle.eta,
        "n_modes": disc.n_modes,
        "scheme": disc.scheme.value,
        "recurrence_time": oracle.recurrence_time,
    }

    if config.oracle_target == "dynamics":
        times = _trim(_axis(config.grid.t, DEFAULT_TIMES), oracle.recurrence_time, "time", warnings)
        formula = sigma_x_series(bath, times, num).values
        reference = oracle.sigma_x(times)
        deviation = formula - reference
        table = pd.DataFrame({"t": times, "sigma_x": formula, "oracle": reference, "deviation": deviation})
        scalars["max_deviation"] = float(np.max(np.abs(deviation)))
    else:
        taus = _trim(_axis(config.grid.tau, ORACLE_TAUS), oracle.recurrence_time, "tau", warnings)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            formula = np.array(list(pool.map(lambda tau: gamma_tau(bath, tau, num), taus.tolist())))
        survival = np.array([abs(oracle.survival_amplitude(tau)) ** 2 for tau in taus])
        reference = -np.log(survival) / taus
        with np.errstate(divide="ignore", invalid="ignore"):
            deviation = np.where(formula > 0, (formula - reference) / formula, np.nan)
        table = pd.DataFrame({"tau": taus, "gamma": formula, "oracle_gamma": reference, "deviation": deviation})
        checked = float(taus[taus.size // 2])
        oracle_survival(disc, checked, num)
        scalars["consistency_checked_tau"] = checked
        scalars["max_deviation"] = float(np.nanmax(np.abs(deviation))) if np.any(np.isfinite(deviation)) else None
    return TaskResult(scalars, table, warnings)


_RUNNERS = {
    "eta": _run_eta,
    "spectrum": _run_spectrum,
    "dynamics": _run_dynamics,
    "zeno": _run_zeno,
    "oracle": _run_oracle,
}


def run_task(task: str, bath: BathSpec, config: RunConfig, jobs: int = 1) -> TaskResult:
    """
    Run one task on one bath.

    Args:
        task: One of ``TASKS``
        bath: Bath model
        config: Numerics, sample grids and oracle options
        jobs: Worker threads available inside the task

    Returns:
        TaskResult
    """
    if task not in _RUNNERS:
        raise ConfigError(f"unknown task {task!r}")
    result = _RUNNERS[task](bath, config, max(1, jobs))
    result.warnings[:0] = _eta_warnings(bath, config)
    for key, value in result.scalars.items():
        logger.info("%s %s: %s = %s", task, bath.label(), key, value)
    return result


def grid_baths(config: RunConfig) -> List[BathSpec]:
    """Cartesian product of the bath axes, alpha varying slowest."""
    bath = config.bath
    foreign = "omega_c" if bath.kind is BathKind.LORENTZIAN else "lam"
    if getattr(config.grid, foreign) is not None:
        name = "grid.omega_c" if foreign == "omega_c" else "grid.lambda"
        raise ConfigError(f"{name} does not apply to the {bath.kind.value} bath")
    widths = config.grid.lam if bath.kind is BathKind.LORENTZIAN else config.grid.omega_c
    alphas = config.grid.alpha or (bath.alpha,)
    widths = widths or (bath.width,)
    try:
        return [BathSpec(bath.kind, a, w) for a, w in product(alphas, widths)]
    except DomainError as e:
        raise ConfigError(str(e)) from None


def run_grid(config: RunConfig, label: Optional[str] = None) -> ResultEnvelope:
    """
    Evaluate ``config.task`` on every cell of the bath grid.

    Cells run on ``config.workers`` threads and are reported in grid order. A
    failed cell is recorded and the rest continue; a single-cell grid
    re-raises its error.

    Raises:
        GridError: If every cell of a multi-cell grid fails
    """
    start = time.perf_counter()
    baths = grid_baths(config)
    inner_jobs = config.workers if len(baths) == 1 else 1

    def cell(bath: BathSpec):
        try:
            return run_task(config.task, bath, config, inner_jobs), None
        except ZenoError as e:
            if len(baths) == 1:
                raise
            logger.warning("grid cell %s failed: %s", bath.label(), e)
            return None, e

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        outcomes = list(pool.map(cell, baths))

    failures = [(i, str(err)) for i, (_, err) in enumerate(outcomes) if err is not None]
    if len(failures) == len(baths):
        raise GridError(failures)

    if len(baths) == 1:
        result = outcomes[0][0]
        scalars, table, warnings = result.scalars, result.table, result.warnings
        label = label or f"{config.task}_{baths[0].label()}"
    else:
        frames, cells, warnings = [], [], []
        for i, (bath, (result, err)) in enumerate(zip(baths, outcomes)):
            cells.append({"cell": i, "bath": bath.as_dict(), "scalars": result.scalars if result else None,
                          "error": str(err) if err else None})
            if result is None:
                warnings.append(f"cell {i} ({bath.label()}) failed: {err}")
                continue
            warnings.extend(f"cell {i}: {w}" for w in result.warnings)
            frame = result.table.copy()
            frame.insert(0, "width", bath.width)
            frame.insert(0, "alpha", bath.alpha)
            frame.insert(0, "cell", i)
            frames.append(frame)
        scalars, table = {"cells": cells}, pd.concat(frames, ignore_index=True)
        label = label or f"{config.task}_grid_{config.bath.kind.value}"

    return ResultEnvelope(
        label=label,
        task=config.task,
        config=config.as_dict(),
        scalars=scalars,
        table=table,
        warnings=warnings,
        wall_time=time.perf_counter() - start,
    )


def preset_configs(name: str, base: Optional[RunConfig] = None) -> List[RunConfig]:
    """One configuration per bath of a figure preset, on top of ``base``."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    base = base or RunConfig()
    task, keys = PRESETS[name]
    return [
        RunConfig(
            bath=REFERENCE_BATHS[key],
            numerics=base.numerics,
            task=task,
            oracle_target=base.oracle_target,
            oracle_scheme=base.oracle_scheme,
            grid=GridAxes(tau=base.grid.tau, t=base.grid.t, omega=base.grid.omega),
            output_path=base.output_path,
            output_format=base.output_format,
            jobs=base.jobs,
            preset=name,
        )
        for key in keys
    ]


def run_preset(name: str, base: Optional[RunConfig] = None) -> List[ResultEnvelope]:
    """Run the parameter sets of a figure preset, one envelope per bath."""
    return [
        run_grid(config, label=f"{name}_{config.task}_{config.bath.label()}")
        for config in preset_configs(name, base)
    ]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def render(envelope: ResultEnvelope, fmt: str) -> str:
    return envelope.to_csv() if fmt == "csv" else envelope.to_json() + "\n"


def write_envelopes(envelopes: List[ResultEnvelope], fmt: str, out: Optional[str], stream=None) -> List[Path]:
    """
    Emit envelopes to ``stream`` or to files.

    Several envelopes on one stream are separated by ``# <label>`` lines.
    With several envelopes, or when ``out`` is a directory, one file per
    envelope is written into it.
    """
    stream = stream or sys.stdout
    if out is None:
        for envelope in envelopes:
            if len(envelopes) > 1:
                stream.write(f"# {envelope.label}\n")
            stream.write(render(envelope, fmt))
        return []

    target = Path(out)
    suffix = f".{fmt}"
    if len(envelopes) == 1 and not target.is_dir() and not out.endswith(("/", "\\")):
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as f:
            f.write(render(envelopes[0], fmt))
        return [target]
    return [
        save_results(e.label, e.to_dict(), target, table_text=e.to_csv() if fmt == "csv" else None, suffix=suffix)
        for e in envelopes
    ]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file")
    common.add_argument("--out", help="output file, or directory for several results")
    common.add_argument("--format", choices=FORMATS, help="output format (default csv)")
    common.add_argument("--jobs", type=int, help="worker threads (default $ZENO_JOBS or 1)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key, repeatable")
    common.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"),
                        help="log level (default $ZENO_LOG_LEVEL or WARNING)")

    parser = argparse.ArgumentParser(
        prog="zeno",
        description="Qubit decoherence and quantum Zeno rates beyond the rotating-wave approximation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eta", parents=[common], help="self-consistent renormalization factor")
    sub.add_parser("spectrum", parents=[common], help="J, R, Gamma and spectral weight tables")
    sub.add_parser("dynamics", parents=[common], help="<sigma_x(t)> without measurements")
    sub.add_parser("zeno", parents=[common], help="decay rate under repeated measurement")
    sub.add_parser("oracle", parents=[common], help="discrete-bath cross-check")
    reproduce = sub.add_parser("reproduce", parents=[common], help="run a figure preset")
    reproduce.add_argument("preset", help=", ".join(PRESETS))
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or get_log_level())

    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
        config = parse_config(text, args.set)
        if args.command != "reproduce":
            config.task = args.command
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        config.jobs = args.jobs or config.jobs or get_default_jobs()
        fmt = args.format or config.output_format
        out = args.out or config.output_path

        if args.command == "reproduce":
            envelopes = run_preset(args.preset, config)
        elif config.preset is not None:
            envelopes = run_preset(config.preset, config)
        else:
            envelopes = [run_grid(config)]
        for envelope in envelopes:
            for warning in envelope.warnings:
                logger.warning("%s: %s", envelope.label, warning)
        write_envelopes(envelopes, fmt, out)
    except OSError as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except (ConfigError, DomainError) as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    except MethodValidityError as e:
        logger.error("method not applicable: %s", e)
        return EXIT_VALIDITY
    except (NumericalError, GridError) as e:
        logger.error("numerical failure: %s", e)
        return EXIT_NUMERICAL
    return EXIT_OK
