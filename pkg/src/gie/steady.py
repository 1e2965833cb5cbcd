"""Closed-form steady state, analytic negativity and reference timescales."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple

from .covariance import CovMat2, Negativity, beam_splitter, combine, log_negativity
from .errors import DegenerateMeasurement, EpsilonOutOfRange, LogDomain, RegimeWarning
from .params import DerivedParams, Mode

# "a >> b" is read as a >= MUCH_GREATER * b in regime checks
MUCH_GREATER = 10.0


def effective_rate(d: DerivedParams, mode: Mode) -> float:
    """gamma_pm, the positive root; always >= gamma_m."""
    mp = d.mode(mode)
    gm = d.params.gamma_m
    return math.sqrt(gm**2 + _excess_sq(mp.Omega, mp.n_bar * mp.lam))


def _excess_sq(Om: float, nl: float) -> float:
    # 2 Om (sqrt(Om^2 + nl) - Om), written without cancellation
    return 2.0 * Om * nl / (math.sqrt(Om**2 + nl) + Om)


def steady_covariance(d: DerivedParams, mode: Mode) -> CovMat2:
    mp = d.mode(mode)
    if mp.lam <= 0.0:
        raise DegenerateMeasurement(f"measurement rate of the {mode} mode is zero")
    gm = d.params.gamma_m
    gamma = effective_rate(d, mode)
    # gamma - gamma_m without subtracting nearly equal numbers
    excess = _excess_sq(mp.Omega, mp.n_bar * mp.lam) / (gamma + gm)
    Om = mp.Omega
    lam = mp.lam
    vqq = excess / lam
    vqp = excess**2 / (2.0 * lam * Om)
    vpp = excess * (2.0 * Om**2 + gamma**2 - gm * gamma) / (2.0 * lam * Om**2)
    return CovMat2(vqq, vqp, vpp)


def steady_negativity(d: DerivedParams) -> Negativity:
    """Negativity of the exact steady covariances through the beam splitter."""
    v4 = combine(steady_covariance(d, "plus"), steady_covariance(d, "minus"),
                 beam_splitter(d.epsilon))
    return log_negativity(v4)


def regime_flags(d: DerivedParams, factor: float = MUCH_GREATER) -> dict[str, bool]:
    """Which assumptions behind the analytic negativity hold at ``d``."""
    gm = d.params.gamma_m
    Om2 = d.Omega_plus**2
    ratio = 4.0 * d.g_plus**2 / (d.params.kappa * gm)
    return {
        "measurement_dominates": d.n_bar_plus * d.lambda_plus >= factor * Om2,
        "underdamped": Om2 >= factor * gm**2,
        "strong_readout": ratio >= factor * d.n_th_plus,
        "thermal_occupation": d.n_th_plus >= 1.0,
    }


def in_regime(d: DerivedParams, factor: float = MUCH_GREATER) -> bool:
    return all(regime_flags(d, factor).values())


def analytic_bracket(d: DerivedParams) -> float:
    gm = d.params.gamma_m
    Om = d.params.Omega
    prefactor = d.params.kappa * gm / (16.0 * d.g_plus**2)
    return 1.0 - prefactor * (Om * d.epsilon / (math.sqrt(2.0) * gm) - 4.0 * d.n_th_plus)


def analytic_negativity(d: DerivedParams, warn: bool = True) -> float:
    """Steady-state negativity in the strong-measurement approximation.

    Negative values mean separable. Raises LogDomain when the bracket is not
    positive, i.e. when entanglement is too strong for the expansion.
    """
    if warn:
        bad = [k for k, ok in regime_flags(d).items() if not ok]
        if bad:
            warnings.warn(f"analytic negativity outside its regime: {bad}", RegimeWarning,
                          stacklevel=2)
    bracket = analytic_bracket(d)
    if bracket <= 0.0:
        raise LogDomain(f"bracket {bracket:.3g} <= 0: outside the expansion's validity")
    return -0.5 * math.log2(bracket)


class Criterion(NamedTuple):
    met: bool
    margin: float


def entanglement_criterion(d: DerivedParams) -> Criterion:
    """``Omega eps > 4 sqrt(2) gamma_m n_th+``, reported as the ratio of the two sides."""
    rhs = 4.0 * math.sqrt(2.0) * d.params.gamma_m * d.n_th_plus
    lhs = d.params.Omega * d.epsilon
    margin = lhs / rhs if rhs > 0.0 else math.inf
    return Criterion(margin > 1.0, margin)


def t_entangle(d: DerivedParams) -> float:
    """Entangling time of two gravitating oscillators without light."""
    if d.epsilon <= 0.0:
        raise EpsilonOutOfRange("t_en is undefined without gravitational coupling")
    return math.pi / (d.params.Omega * d.epsilon)


def settling_time(d: DerivedParams) -> float:
    """kappa / g_+^2, the scale on which the conditional state settles."""
    return d.params.kappa / d.g_plus**2


@dataclass(frozen=True)
class SteadyReport:
    v_plus: CovMat2
    v_minus: CovMat2
    gamma_plus: float
    gamma_minus: float
    en_analytic: float | None
    en_numeric: float
    criterion_met: bool
    criterion_margin: float
    t_en: float | None
    in_regime: bool

    def as_record(self) -> dict[str, float | bool | None]:
        rec: dict[str, float | bool | None] = {}
        for key, value in asdict(self).items():
            if isinstance(value, dict):
                for sub, x in value.items():
                    rec[f"{key}_{sub}"] = x
            else:
                rec[key] = value
        return rec


def steady_report(d: DerivedParams) -> SteadyReport:
    try:
        en_an = analytic_negativity(d, warn=False)
    except LogDomain:
        en_an = None
    crit = entanglement_criterion(d)
    return SteadyReport(
        v_plus=steady_covariance(d, "plus"),
        v_minus=steady_covariance(d, "minus"),
        gamma_plus=effective_rate(d, "plus"),
        gamma_minus=effective_rate(d, "minus"),
        en_analytic=en_an,
        en_numeric=steady_negativity(d).raw,
        criterion_met=crit.met,
        criterion_margin=crit.margin,
        t_en=t_entangle(d) if d.epsilon > 0.0 else None,
        in_regime=in_regime(d),
    )
