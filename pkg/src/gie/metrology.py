"""Error propagation for the negativity estimate and the repetition/time budget."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .covariance import CovMat2, beam_splitter, combine, log_negativity
from .errors import NegativeVariance, NotEntangled, RegimeWarning
from .params import DerivedParams
from .steady import MUCH_GREATER, entanglement_criterion, settling_time, steady_covariance

ENTRIES = ("qq", "qp", "pp")
FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class NegativityGradient:
    """dE_N / dV_j for j in (qq, qp, pp) of the common and differential modes."""

    plus: tuple[float, float, float]
    minus: tuple[float, float, float]

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.plus + self.minus)

    @classmethod
    def from_vector(cls, g) -> "NegativityGradient":
        g = [float(x) for x in g]
        return cls(tuple(g[:3]), tuple(g[3:]))


def _raw_en(x: np.ndarray, epsilon: float) -> float:
    bs = beam_splitter(epsilon)
    v4 = combine(CovMat2(*x[:3]), CovMat2(*x[3:]), bs)
    return log_negativity(v4).raw


def negativity_gradient(vp: CovMat2, vm: CovMat2, epsilon: float,
                        rel_step: float = FD_REL_STEP) -> NegativityGradient:
    """Central finite differences of the raw negativity through the full
    beam-splitter pipeline."""
    x0 = np.array(vp.as_tuple() + vm.as_tuple())
    grad = np.empty(6)
    for i in range(6):
        h = rel_step * max(abs(x0[i]), 1e-300)
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (_raw_en(xp, epsilon) - _raw_en(xm, epsilon)) / (2.0 * h)
    return NegativityGradient.from_vector(grad)


def negativity_gradient_chain(vp: CovMat2, vm: CovMat2, epsilon: float) -> NegativityGradient:
    """Exact gradient via the chain rule through ``Sigma`` and ``det V``.

    For the half beam splitter the block determinants collapse to
    ``Sigma = r^2 a f + c d / r^2 - 2 b e`` and ``det V = det V+ det V-``
    with ``V+ = [[a, b], [b, c]]``, ``V- = [[d, e], [e, f]]``,
    ``r = (1 - eps)^(1/4)``.
    """
    a, b, c = vp.as_tuple()
    d, e, f = vm.as_tuple()
    r2 = math.sqrt(1.0 - epsilon)
    sigma = r2 * a * f + c * d / r2 - 2.0 * b * e
    det_p = a * c - b * b
    det_m = d * f - e * e
    det_v = det_p * det_m
    root = math.sqrt(max(sigma**2 - 4.0 * det_v, 0.0))
    nu2 = 2.0 * det_v / (sigma + root)

    dsigma = np.array([r2 * f, -2.0 * e, d / r2, c / r2, -2.0 * b, r2 * a])
    ddet = np.array([c * det_m, -2.0 * b * det_m, a * det_m,
                     f * det_p, -2.0 * e * det_p, d * det_p])
    # nu2 = (sigma - root) / 2  =>  dnu2 = (dsigma - (sigma dsigma - 2 ddet) / root) / 2
    dnu2 = 0.5 * (dsigma - (sigma * dsigma - 2.0 * ddet) / root)
    grad = -dnu2 / (2.0 * math.log(2.0) * nu2)
    return NegativityGradient.from_vector(grad)


@dataclass(frozen=True)
class GaussianMoments:
    """Second moments of single-shot covariance-entry fluctuations."""

    qq_qq: float
    qp_qp: float
    pp_pp: float
    qq_qp: float
    qq_pp: float
    pp_qp: float

    @property
    def matrix(self) -> np.ndarray:
        """Moment matrix in (qq, qp, pp) order."""
        return np.array([
            [self.qq_qq, self.qq_qp, self.qq_pp],
            [self.qq_qp, self.qp_qp, self.pp_qp],
            [self.qq_pp, self.pp_qp, self.pp_pp],
        ])


def covariance_moment_matrix(v: CovMat2, linear_pp_moment: bool = False) -> GaussianMoments:
    """Gaussian fourth-moment relations for the entries of ``v``.

    ``linear_pp_moment`` replaces ``<dVpp^2> = 2 Vpp^2`` by the linear ``2 Vpp``,
    which is not homogeneous with the other moments.
    """
    qq, qp, pp = v.as_tuple()
    return GaussianMoments(
        qq_qq=2.0 * qq**2,
        qp_qp=qq * pp + qp**2,
        pp_pp=2.0 * pp if linear_pp_moment else 2.0 * pp**2,
        qq_qp=2.0 * qq * qp,
        qq_pp=2.0 * qp**2,
        pp_qp=2.0 * pp * qp,
    )


def monte_carlo_moments(v: CovMat2, n_samples: int = 1_000_000, seed: int = 0,
                        chunks: int = 8) -> tuple[GaussianMoments, GaussianMoments]:
    """Empirical fluctuation moments of single-sample covariance estimates.

    Draws ``(q, p) ~ N(0, V)``, forms ``(q^2, qp, p^2)`` and returns the
    moment estimates together with their standard errors. Each chunk owns a
    spawned child stream, so the result depends only on ``seed``, ``chunks``
    and ``n_samples``.
    """
    mean = np.array(v.as_tuple())
    children = np.random.SeedSequence(seed).spawn(chunks)
    sizes = [n_samples // chunks + (i < n_samples % chunks) for i in range(chunks)]
    pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (2, 1)]
    sums = np.zeros(6)
    sq_sums = np.zeros(6)
    chol = np.linalg.cholesky(v.matrix)
    for child, size in zip(children, sizes):
        rng = np.random.default_rng(child)
        z = rng.standard_normal((size, 2)) @ chol.T
        q, p = z[:, 0], z[:, 1]
        dev = np.stack([q * q, q * p, p * p], axis=1) - mean
        prods = np.stack([dev[:, i] * dev[:, j] for i, j in pairs], axis=1)
        sums += prods.sum(axis=0)
        sq_sums += (prods**2).sum(axis=0)
    est = sums / n_samples
    var = np.maximum(sq_sums / n_samples - est**2, 0.0)
    se = np.sqrt(var / n_samples)
    return GaussianMoments(*map(float, est)), GaussianMoments(*map(float, se))


def variance_en(grad: NegativityGradient, vp: CovMat2, vm: CovMat2,
                linear_pp_moment: bool = False) -> float:
    """<dE_N^2>: the gradient contracted with each mode's moment matrix.

    Expanded, this is the twelve-term sum with coefficients 2, 1, 2, 4, 4, 4
    per mode.
    """
    total = 0.0
    for g, v in ((grad.plus, vp), (grad.minus, vm)):
        g = np.asarray(g)
        total += float(g @ covariance_moment_matrix(v, linear_pp_moment).matrix @ g)
    if total < 0.0:
        if total < -1e-12:
            raise NegativeVariance(f"<dE_N^2> = {total:.3g} < 0")
        total = 0.0
    return total


@dataclass(frozen=True)
class SnrBudget:
    en: float
    var_en: float
    target_snr: float
    n_meas_exact: float
    n_meas: int
    t_meas: float
    tau: float

    def as_record(self) -> dict[str, float]:
        return asdict(self)


def snr_budget(d: DerivedParams, en: float, var_en: float, target_snr: float = 1.0,
               t_meas_factor: float = 1.0) -> SnrBudget:
    """Repetitions and total time needed for ``S/N = target_snr``.

    One repetition lasts ``t_meas_factor * kappa / g_+^2``.
    """
    if not en > 0.0:
        raise NotEntangled(f"E_N = {en:.3g} <= 0: nothing to detect")
    n_exact = target_snr**2 * var_en / en**2
    n_meas = math.ceil(n_exact)
    t_meas = t_meas_factor * settling_time(d)
    return SnrBudget(
        en=en,
        var_en=var_en,
        target_snr=target_snr,
        n_meas_exact=n_exact,
        n_meas=n_meas,
        t_meas=t_meas,
        tau=n_meas * t_meas,
    )


def steady_budget(d: DerivedParams, target_snr: float = 1.0, linear_pp_moment: bool = False,
                  t_meas_factor: float = 1.0) -> SnrBudget:
    """Budget at the exact steady state of ``d``."""
    vp = steady_covariance(d, "plus")
    vm = steady_covariance(d, "minus")
    en = log_negativity(combine(vp, vm, beam_splitter(d.epsilon))).raw
    if not en > 0.0:
        raise NotEntangled(
            f"steady E_N = {en:.3g} <= 0 (criterion margin "
            f"{entanglement_criterion(d).margin:.3g})"
        )
    grad = negativity_gradient(vp, vm, d.epsilon)
    var = variance_en(grad, vp, vm, linear_pp_moment)
    return snr_budget(d, en, var, target_snr, t_meas_factor)


def en_smallcoupling(d: DerivedParams) -> float:
    """Negativity estimate ``kappa G rho / (8 sqrt(2) g_+^2 Omega)`` valid when
    gravity dominates thermal decoherence."""
    margin = entanglement_criterion(d).margin
    if margin < MUCH_GREATER:
        warnings.warn(
            f"criterion margin {margin:.3g} is not >> 1; small-coupling estimate is rough",
            RegimeWarning,
            stacklevel=2,
        )
    p = d.params
    return p.kappa * d.consts.G * p.rho / (8.0 * math.sqrt(2.0) * d.g_plus**2 * p.Omega)
