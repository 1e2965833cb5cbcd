"""Physical inputs and the couplings, frequencies and noise numbers derived from them.

All rates are angular (rad/s) internally. Configuration files follow the
table convention of quoting rates as ordinary frequencies ``X/2pi`` in Hz;
:func:`frequency_input_conversion` is the only place the factor 2pi enters.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Mapping

from .errors import ConfigError, EpsilonOutOfRange, NonPositiveInput, RegimeWarning

Mode = Literal["plus", "minus"]
MODES: tuple[Mode, Mode] = ("plus", "minus")

BAD_CAVITY_RATIO = 1e3


def frequency_input_conversion(f: float) -> float:
    """Ordinary frequency in Hz to angular rate in rad/s."""
    return 2.0 * math.pi * f


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-2018 values by default."""

    G: float = 6.67430e-11
    hbar: float = 1.054571817e-34
    k_B: float = 1.380649e-23

    def __post_init__(self) -> None:
        # G = 0 is allowed so gravity can be switched off in comparison runs
        if not (self.G >= 0.0 and math.isfinite(self.G)):
            raise NonPositiveInput(f"G must be finite and >= 0, got {self.G!r}")
        for name in ("hbar", "k_B"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise NonPositiveInput(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class ExperimentParams:
    """Raw experimental inputs in SI units, rates in rad/s.

    ``m = rho * L**3 * Lambda`` ties the mass, density and geometry factor
    to the mirror separation ``L``.
    """

    Gamma: float
    Omega: float
    gamma_m: float
    kappa: float
    omega_c: float
    P_in: float
    ell: float
    T: float
    rho: float
    m: float
    Lambda: float

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{f.name} must be a number, got {value!r}")
            if not (value > 0.0 and math.isfinite(value)):
                raise NonPositiveInput(f"{f.name} must be finite and > 0, got {value!r}")
        if self.Gamma > self.gamma_m:
            raise ConfigError(
                f"bare dissipation Gamma={self.Gamma:g} exceeds the feedback rate "
                f"gamma_m={self.gamma_m:g}"
            )
        if self.kappa / self.Omega <= BAD_CAVITY_RATIO:
            warnings.warn(
                f"kappa/Omega = {self.kappa / self.Omega:.3g} is not deep in the "
                "bad-cavity regime (> 1e3)",
                RegimeWarning,
                stacklevel=3,
            )

    @classmethod
    def reference(cls) -> "ExperimentParams":
        return from_config({})

    def replace(self, **changes: float) -> "ExperimentParams":
        return dataclasses.replace(self, **changes)


# config key -> (ExperimentParams field, converts from Hz/2pi)
CONFIG_KEYS: dict[str, tuple[str, bool]] = {
    "Gamma_over_2pi_Hz": ("Gamma", True),
    "Omega_over_2pi_Hz": ("Omega", True),
    "gamma_m_over_2pi_Hz": ("gamma_m", True),
    "kappa_over_2pi_Hz": ("kappa", True),
    "omega_c_over_2pi_Hz": ("omega_c", True),
    "P_in_W": ("P_in", False),
    "ell_m": ("ell", False),
    "T_K": ("T", False),
    "rho_kg_m3": ("rho", False),
    "m_kg": ("m", False),
    "Lambda": ("Lambda", False),
}

REFERENCE_CONFIG: dict[str, float] = {
    "Gamma_over_2pi_Hz": 1e-18,
    "Omega_over_2pi_Hz": 1e-3,
    "gamma_m_over_2pi_Hz": 1e-6,
    "kappa_over_2pi_Hz": 1e8,
    "omega_c_over_2pi_Hz": 2.8e14,
    "P_in_W": 1e-4,
    "ell_m": 1.0,
    "T_K": 1.0,
    "rho_kg_m3": 2.0e4,
    "m_kg": 0.1,
    "Lambda": 2.0,
}

CONSTANT_KEYS = {"G": "G", "hbar": "hbar", "k_B": "k_B"}


def resolve_config(raw: Mapping[str, Any]) -> dict[str, Any]:
    """Fill missing keys from the reference table and reject unknown ones.

    An optional ``constants`` sub-mapping overrides ``G``, ``hbar``, ``k_B``.
    """
    unknown = set(raw) - set(CONFIG_KEYS) - {"constants"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    resolved: dict[str, Any] = dict(REFERENCE_CONFIG)
    for key in CONFIG_KEYS:
        if key in raw:
            resolved[key] = raw[key]
    consts = dict(dataclasses.asdict(PhysicalConstants()))
    extra = raw.get("constants", {}) or {}
    if not isinstance(extra, Mapping):
        raise ConfigError("'constants' must be a mapping")
    bad = set(extra) - set(CONSTANT_KEYS)
    if bad:
        raise ConfigError(f"unknown constants: {sorted(bad)}")
    consts.update(extra)
    resolved["constants"] = consts
    return resolved


def from_config(raw: Mapping[str, Any]) -> ExperimentParams:
    resolved = resolve_config(raw)
    kwargs = {}
    for key, (field, is_freq) in CONFIG_KEYS.items():
        value = resolved[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        kwargs[field] = frequency_input_conversion(value) if is_freq else float(value)
    return ExperimentParams(**kwargs)


def constants_from_config(raw: Mapping[str, Any]) -> PhysicalConstants:
    consts = resolve_config(raw)["constants"]
    try:
        return PhysicalConstants(**{k: float(v) for k, v in consts.items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad constants: {exc}") from exc


def to_config(params: ExperimentParams) -> dict[str, float]:
    out = {}
    for key, (field, is_freq) in CONFIG_KEYS.items():
        value = getattr(params, field)
        out[key] = value / (2.0 * math.pi) if is_freq else value
    return out


def load_config(path: str | Path | None) -> dict[str, Any]:
    """Read a JSON config file; ``None`` yields the reference table."""
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return raw


@dataclass(frozen=True)
class ModeParams:
    """The per-mode numbers entering the Riccati system."""

    mode: Mode
    Omega: float
    g: float
    n_th: float
    n_bar: float
    lam: float


@dataclass(frozen=True)
class DerivedParams:
    params: ExperimentParams
    consts: PhysicalConstants
    L: float
    epsilon: float
    Omega_plus: float
    Omega_minus: float
    g: float
    g_plus: float
    g_minus: float
    n_th_plus: float
    n_th_minus: float
    n_bar_plus: float
    n_bar_minus: float
    lambda_plus: float
    lambda_minus: float

    def mode(self, which: Mode) -> ModeParams:
        if which == "plus":
            return ModeParams("plus", self.Omega_plus, self.g_plus, self.n_th_plus,
                              self.n_bar_plus, self.lambda_plus)
        if which == "minus":
            return ModeParams("minus", self.Omega_minus, self.g_minus, self.n_th_minus,
                              self.n_bar_minus, self.lambda_minus)
        raise ValueError(f"mode must be 'plus' or 'minus', got {which!r}")

    def as_record(self) -> dict[str, float]:
        return {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if f.name not in ("params", "consts")
        }


def derive(params: ExperimentParams, consts: PhysicalConstants | None = None) -> DerivedParams:
    """Compute every derived coupling, frequency and noise number.

    Raises EpsilonOutOfRange when the gravitational coupling reaches 1, where
    the differential-mode frequency turns imaginary.
    """
    if consts is None:
        consts = PhysicalConstants()
    p = params
    L3 = p.m / (p.rho * p.Lambda)
    L = L3 ** (1.0 / 3.0)
    epsilon = 4.0 * consts.G * p.m / (L3 * p.Omega**2)
    if not epsilon < 1.0:
        raise EpsilonOutOfRange(
            f"gravitational coupling epsilon={epsilon:.6g} >= 1: differential mode unstable"
        )
    Omega_plus = p.Omega
    Omega_minus = p.Omega * math.sqrt(1.0 - epsilon)
    g = (p.omega_c / p.ell) * math.sqrt(consts.hbar / (2.0 * p.m * p.Omega))

    def per_mode(Om: float) -> tuple[float, float, float, float]:
        g_pm = g * math.sqrt(4.0 * p.P_in * p.Omega / (consts.hbar * p.omega_c * p.kappa * Om))
        lam = 16.0 * g_pm**2 / p.kappa
        n_th = consts.k_B * p.T * p.Gamma / (p.gamma_m * consts.hbar * Om)
        n_bar = 2.0 * p.gamma_m * (2.0 * n_th + 1.0) + lam
        return g_pm, n_th, n_bar, lam

    g_plus, n_th_plus, n_bar_plus, lambda_plus = per_mode(Omega_plus)
    g_minus, n_th_minus, n_bar_minus, lambda_minus = per_mode(Omega_minus)
    return DerivedParams(
        params=params,
        consts=consts,
        L=L,
        epsilon=epsilon,
        Omega_plus=Omega_plus,
        Omega_minus=Omega_minus,
        g=g,
        g_plus=g_plus,
        g_minus=g_minus,
        n_th_plus=n_th_plus,
        n_th_minus=n_th_minus,
        n_bar_plus=n_bar_plus,
        n_bar_minus=n_bar_minus,
        lambda_plus=lambda_plus,
        lambda_minus=lambda_minus,
    )
