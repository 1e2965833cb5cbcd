"""Parameter sweeps over one or two experiment axes.

Grid points are independent; with ``workers > 1`` they run in a process
pool and results are placed by their precomputed index, so row order is the
Cartesian order of the axes whatever the completion order.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .covariance import beam_splitter, combine, log_negativity
from .errors import ConfigError, GIEError, NotEntangled
from .metrology import SnrBudget, steady_budget
from .params import (CONFIG_KEYS, ExperimentParams, PhysicalConstants, derive,
                     frequency_input_conversion, from_config, to_config)
from .riccati import IntegratorConfig, Trajectory, evolve_pair
from .steady import SteadyReport, settling_time, steady_report

PIPELINES = ("steady_only", "full_evolution")
PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(ExperimentParams))


def log_axis(start: float, stop: float, num: int) -> list[float]:
    return list(np.logspace(math.log10(start), math.log10(stop), num))


@dataclass
class SweepSpec:
    """Axes are keyed by ExperimentParams field names with SI values."""

    base: ExperimentParams
    axes: dict[str, list[float]]
    pipeline: str = "steady_only"
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    consts: PhysicalConstants = field(default_factory=PhysicalConstants)
    target_snr: float = 1.0
    keep_trajectories: bool = False

    def __post_init__(self) -> None:
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep needs one or two axes")
        for name, values in self.axes.items():
            if name not in PARAM_FIELDS:
                raise ConfigError(f"unknown sweep axis {name!r}")
            if len(values) == 0:
                raise ConfigError(f"axis {name!r} is empty")
            if any(not (v > 0 and math.isfinite(v)) for v in values):
                raise ConfigError(f"axis {name!r} must hold positive finite values")
        if self.pipeline not in PIPELINES:
            raise ConfigError(f"pipeline must be one of {PIPELINES}")

    def points(self) -> list[dict[str, float]]:
        names = list(self.axes)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.axes.values())]

    def echo(self) -> dict[str, Any]:
        cfg = dataclasses.asdict(self.integrator)
        if cfg["output_grid"] is not None:
            cfg["output_grid"] = [float(x) for x in cfg["output_grid"]]
        return {
            "base": to_config(self.base),
            "axes": {k: [float(v) for v in vals] for k, vals in self.axes.items()},
            "pipeline": self.pipeline,
            "integrator": cfg,
            "constants": dataclasses.asdict(self.consts),
            "target_snr": self.target_snr,
        }


@dataclass
class SweepRow:
    index: int
    point: dict[str, float]
    report: SteadyReport | None = None
    budget: SnrBudget | None = None
    budget_note: str | None = None
    settling_time: float | None = None
    onset_time: float | None = None
    onset_bracket: tuple[float, float] | None = None
    en_final: float | None = None
    converged_at: float | None = None
    trajectory: Trajectory | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def negativity_series(traj: Trajectory, epsilon: float) -> np.ndarray:
    bs = beam_splitter(epsilon)
    return np.array([log_negativity(combine(vp, vm, bs)).raw for _, vp, vm in traj.samples()])


def onset(t: np.ndarray, en: np.ndarray) -> tuple[float | None, tuple[float, float] | None]:
    """First sampled time with positive raw negativity and the bracketing interval."""
    idx = np.flatnonzero(en > 0.0)
    if idx.size == 0:
        return None, None
    i = int(idx[0])
    lo = float(t[i - 1]) if i > 0 else float(t[i])
    return float(t[i]), (lo, float(t[i]))


def _run_point(args: tuple[int, dict[str, float], SweepSpec]) -> SweepRow:
    index, point, spec = args
    row = SweepRow(index=index, point=point)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = spec.base.replace(**point)
        d = derive(params, spec.consts)
        row.report = steady_report(d)
        row.settling_time = settling_time(d)
        try:
            row.budget = steady_budget(d, spec.target_snr)
        except NotEntangled as exc:
            row.budget_note = str(exc)
        if spec.pipeline == "full_evolution":
            traj = evolve_pair(d, spec.integrator)
            en = negativity_series(traj, d.epsilon)
            row.onset_time, row.onset_bracket = onset(traj.t, en)
            row.en_final = float(en[-1])
            row.converged_at = traj.converged_at
            if spec.keep_trajectories:
                row.trajectory = traj
    except (GIEError, ArithmeticError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]

    def columns(self) -> list[str]:
        cols = list(self.spec.axes)
        cols += ["ok", "error"]
        cols += [
            "Vqq_plus", "Vqp_plus", "Vpp_plus", "Vqq_minus", "Vqp_minus", "Vpp_minus",
            "gamma_plus", "gamma_minus", "EN_numeric", "EN_analytic",
            "criterion_met", "criterion_margin", "t_en_s", "in_regime", "settling_time_s",
            "var_EN", "n_meas", "t_meas_s", "tau_s",
        ]
        if self.spec.pipeline == "full_evolution":
            cols += ["onset_s", "onset_lo_s", "onset_hi_s", "EN_final", "converged_at_s"]
        return cols

    def records(self) -> list[dict[str, Any]]:
        out = []
        for row in self.rows:
            rec: dict[str, Any] = dict(row.point)
            rec["ok"] = row.ok
            rec["error"] = row.error or ""
            r = row.report
            if r is not None:
                rec.update({
                    "Vqq_plus": r.v_plus.vqq, "Vqp_plus": r.v_plus.vqp, "Vpp_plus": r.v_plus.vpp,
                    "Vqq_minus": r.v_minus.vqq, "Vqp_minus": r.v_minus.vqp,
                    "Vpp_minus": r.v_minus.vpp,
                    "gamma_plus": r.gamma_plus, "gamma_minus": r.gamma_minus,
                    "EN_numeric": r.en_numeric, "EN_analytic": r.en_analytic,
                    "criterion_met": r.criterion_met, "criterion_margin": r.criterion_margin,
                    "t_en_s": r.t_en, "in_regime": r.in_regime,
                })
            rec["settling_time_s"] = row.settling_time
            b = row.budget
            if b is not None:
                rec.update({"var_EN": b.var_en, "n_meas": b.n_meas, "t_meas_s": b.t_meas,
                            "tau_s": b.tau})
            if self.spec.pipeline == "full_evolution":
                rec["onset_s"] = row.onset_time
                rec["onset_lo_s"] = row.onset_bracket[0] if row.onset_bracket else None
                rec["onset_hi_s"] = row.onset_bracket[1] if row.onset_bracket else None
                rec["EN_final"] = row.en_final
                rec["converged_at_s"] = row.converged_at
            out.append({c: rec.get(c) for c in self.columns()})
        return out

    def to_csv(self, path: str | Path) -> None:
        from .io import format_value

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            cols = self.columns()
            writer.writerow(cols)
            for rec in self.records():
                writer.writerow([format_value(rec[c]) for c in cols])

    def summary(self) -> dict[str, Any]:
        return {
            "spec": self.spec.echo(),
            "n_points": len(self.rows),
            "n_failed": sum(not r.ok for r in self.rows),
            "columns": self.columns(),
        }

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2), encoding="utf-8")


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    jobs = [(i, point, spec) for i, point in enumerate(spec.points())]
    rows: list[SweepRow | None] = [None] * len(jobs)
    if workers <= 1 or len(jobs) == 1:
        for job in jobs:
            rows[job[0]] = _run_point(job)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for row in pool.map(_run_point, jobs):
                rows[row.index] = row
    return SweepResult(spec=spec, rows=rows)  # type: ignore[arg-type]


def _axis_values(entry: Any) -> list[float]:
    if isinstance(entry, Mapping):
        if "values" in entry:
            return [float(v) for v in entry["values"]]
        if "logspace" in entry:
            start, stop, num = entry["logspace"]
            return log_axis(float(start), float(stop), int(num))
        if "linspace" in entry:
            start, stop, num = entry["linspace"]
            return list(np.linspace(float(start), float(stop), int(num)))
        raise ConfigError(f"axis entry needs 'values', 'logspace' or 'linspace': {entry!r}")
    if isinstance(entry, Sequence) and not isinstance(entry, str):
        return [float(v) for v in entry]
    raise ConfigError(f"bad axis entry {entry!r}")


def spec_from_mapping(raw: Mapping[str, Any], base_config: Mapping[str, Any] | None = None
                      ) -> SweepSpec:
    """Build a sweep from its JSON form.

    Axis names may be ExperimentParams fields (SI, rad/s) or config keys such
    as ``kappa_over_2pi_Hz``, which are converted like config values.
    """
    from .params import constants_from_config

    base_raw = dict(base_config or {})
    base_raw.update(raw.get("base", {}))
    base = from_config(base_raw)
    consts = constants_from_config(base_raw)
    axes_raw = raw.get("axes")
    if not isinstance(axes_raw, Mapping):
        raise ConfigError("sweep spec needs an 'axes' mapping")
    axes: dict[str, list[float]] = {}
    for name, entry in axes_raw.items():
        values = _axis_values(entry)
        if name in CONFIG_KEYS:
            field_name, is_freq = CONFIG_KEYS[name]
            if is_freq:
                values = [frequency_input_conversion(v) for v in values]
            axes[field_name] = values
        else:
            axes[name] = values
    icfg = raw.get("integrator", {}) or {}
    try:
        integrator = IntegratorConfig(**icfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad integrator settings: {exc}") from exc
    return SweepSpec(
        base=base,
        axes=axes,
        pipeline=raw.get("pipeline", "steady_only"),
        integrator=integrator,
        consts=consts,
        target_snr=float(raw.get("target_snr", 1.0)),
    )
