"""Tabulated data behind the time-evolution, negativity and squeezing figures.

Each builder returns ``(header, rows)`` ready for :func:`gie.io.write_csv`.
Time grids are the 400-point logarithmic grid on ``[1e-2 s, t_end]``; the
``t = 0`` initial sample is omitted since the figures are log-scaled in time.
"""

from __future__ import annotations

import math
from typing import Any

from .covariance import CovMat2, purity, squeezing_diagnostics
from .params import ExperimentParams, PhysicalConstants, derive, frequency_input_conversion
from .riccati import IntegratorConfig, evolve_pair
from .sweep import SweepSpec, negativity_series, run_sweep

FIG3_KAPPAS_HZ = (1e8, 1e7, 1e6)
FIGURES = ("fig2", "fig3", "fig4")
DEFAULT_T_END = 2000.0


def _wrap_angle(x: float) -> float:
    x = math.remainder(x, math.pi)
    return 0.5 * math.pi if x <= -0.5 * math.pi else x


def fig2(params: ExperimentParams, consts: PhysicalConstants,
         t_end: float = DEFAULT_T_END) -> tuple[list[str], list[list[float]]]:
    d = derive(params, consts)
    traj = evolve_pair(d, IntegratorConfig(t_end=t_end))
    header = ["t_s", "Vqq_plus", "Vqp_plus", "Vpp_plus"]
    rows = [[t, *v] for t, v in zip(traj.t[1:], traj.v_plus[1:])]
    return header, rows


def fig3(params: ExperimentParams, consts: PhysicalConstants, t_end: float = DEFAULT_T_END,
         workers: int = 1) -> tuple[tuple[list[str], list[list[float]]],
                                    tuple[list[str], list[list[Any]]]]:
    """Negativity curves for the three cavity linewidths plus an onset summary."""
    kappas = [frequency_input_conversion(k) for k in FIG3_KAPPAS_HZ]
    spec = SweepSpec(base=params, axes={"kappa": kappas}, pipeline="full_evolution",
                     integrator=IntegratorConfig(t_end=t_end), consts=consts,
                     keep_trajectories=True)
    result = run_sweep(spec, workers=workers)
    # epsilon does not depend on kappa
    epsilon = derive(params, consts).epsilon
    t = None
    raw_cols = []
    summary_rows = []
    for k_hz, row in zip(FIG3_KAPPAS_HZ, result.rows):
        if not row.ok:
            raise RuntimeError(f"kappa/2pi={k_hz:g} Hz failed: {row.error}")
        traj = row.trajectory
        en = negativity_series(traj, epsilon)
        t = traj.t[1:]
        raw_cols.append(en[1:])
        lo, hi = row.onset_bracket if row.onset_bracket else (None, None)
        summary_rows.append([k_hz, row.onset_time, lo, hi, row.report.en_numeric,
                             row.report.en_analytic, row.settling_time])
    tags = [f"{k:.0e}Hz".replace("+0", "") for k in FIG3_KAPPAS_HZ]
    header = (["t_s"] + [f"EN_kappa_{tag}" for tag in tags]
              + [f"EN_raw_kappa_{tag}" for tag in tags])
    rows = []
    for i, ti in enumerate(t):
        raws = [c[i] for c in raw_cols]
        rows.append([ti, *[max(r, 0.0) for r in raws], *raws])
    summary_header = ["kappa_over_2pi_Hz", "onset_s", "onset_lo_s", "onset_hi_s",
                      "EN_steady", "EN_analytic", "settling_time_s"]
    return (header, rows), (summary_header, summary_rows)


def fig4(params: ExperimentParams, consts: PhysicalConstants,
         t_end: float = DEFAULT_T_END) -> tuple[list[str], list[list[float]]]:
    """Common-mode purity and squeezing with scaled common-minus-differential differences."""
    d = derive(params, consts)
    traj = evolve_pair(d, IntegratorConfig(t_end=t_end))
    header = ["t_s", "purity_plus", "sq_angle_plus", "eig_ratio_plus",
              "purity_diff_x100", "sq_angle_diff_x10", "eig_ratio_diff_x10"]
    rows = []
    for t, vp, vm in list(traj.samples())[1:]:
        pp, pm = purity(vp), purity(vm)
        sp, sm = squeezing_diagnostics(vp), squeezing_diagnostics(vm)
        rows.append([
            t, pp, sp.angle, sp.eig_ratio,
            100.0 * (pp - pm),
            10.0 * _wrap_angle(sp.angle - sm.angle),
            10.0 * (sp.eig_ratio - sm.eig_ratio),
        ])
    return header, rows


def diagnostics_row(vp: CovMat2, vm: CovMat2) -> list[float]:
    sp, sm = squeezing_diagnostics(vp), squeezing_diagnostics(vm)
    return [purity(vp), purity(vm), sp.angle, sm.angle, sp.eig_ratio, sm.eig_ratio]

