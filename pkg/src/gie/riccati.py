"""Per-mode linear-Gaussian system and the conditional-covariance Riccati flow.

For each mode the conditional covariance obeys

    dV/dt = A V + V A^T + N - V C^T C V

with drift ``A = [[0, Om], [-Om, -gamma_m]]``, measurement row
``C = (4 g / sqrt(kappa), 0)`` and force noise ``N = diag(0, n_bar)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .covariance import UNCERTAINTY_TOL, CovMat2
from .errors import PositivityLost, StepSizeUnderflow
from .params import MODES, DerivedParams, Mode


@dataclass(frozen=True)
class ModeSystem:
    mode: Mode
    a_mat: np.ndarray
    c_vec: np.ndarray
    n_mat: np.ndarray

    @property
    def ctc(self) -> np.ndarray:
        return np.outer(self.c_vec, self.c_vec)


def build_system(d: DerivedParams, mode: Mode) -> ModeSystem:
    mp = d.mode(mode)
    gamma_m = d.params.gamma_m
    a_mat = np.array([[0.0, mp.Omega], [-mp.Omega, -gamma_m]])
    c_vec = np.array([4.0 * mp.g / math.sqrt(d.params.kappa), 0.0])
    n_mat = np.diag([0.0, mp.n_bar])
    return ModeSystem(mode, a_mat, c_vec, n_mat)


def initial_covariance(d: DerivedParams) -> tuple[CovMat2, CovMat2]:
    """Separable thermal start; both modes use the common-mode noise level."""
    scale = d.n_bar_plus / (2.0 * d.params.gamma_m)
    return CovMat2.identity(scale), CovMat2.identity(scale)


def _as_matrix(v) -> np.ndarray:
    if isinstance(v, CovMat2):
        return v.matrix
    return np.asarray(v, dtype=float)


def riccati_rhs(v, sys: ModeSystem) -> np.ndarray:
    V = _as_matrix(v)
    AV = sys.a_mat @ V
    CV = sys.c_vec @ V
    out = AV + AV.T + sys.n_mat - np.outer(CV, CV)
    return 0.5 * (out + out.T)


@dataclass
class IntegratorConfig:
    """Step control and sampling.

    ``output_grid=None`` means 400 log-spaced samples on ``[1e-2, t_end]``.
    The converged flag is raised once ``||rhs||_F < conv_tol * ||V||_F``
    holds for ``conv_window`` consecutive accepted steps; ``conv_tol``
    defaults to ``rel_tol``.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    t_end: float = 2000.0
    output_grid: Sequence[float] | None = None
    max_step: float = math.inf
    conv_tol: float | None = None
    conv_window: int = 10
    stop_on_converged: bool = False
    grid_points: int = 400
    grid_t_min: float = 1e-2

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be >= 0")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        grid = self.grid()
        if grid.size and (np.any(np.diff(grid) <= 0) or grid[0] < 0 or grid[-1] > self.t_end):
            raise ValueError("output grid must be strictly increasing inside [0, t_end]")

    def grid(self) -> np.ndarray:
        if self.output_grid is not None:
            return np.asarray(self.output_grid, dtype=float)
        return default_grid(self.t_end, self.grid_points, self.grid_t_min)


def default_grid(t_end: float, points: int = 400, t_min: float = 1e-2) -> np.ndarray:
    if t_end <= 0:
        return np.zeros(0)
    if t_end <= t_min:
        return np.array([t_end])
    grid = np.logspace(math.log10(t_min), math.log10(t_end), points)
    grid[-1] = t_end
    return grid


@dataclass
class ModeTrajectory:
    mode: Mode
    t: np.ndarray
    v: np.ndarray  # (n, 3): vqq, vqp, vpp
    converged: bool
    converged_at: float | None
    uncertainty_violations: int
    n_accepted: int
    n_rejected: int

    def cov(self, i: int) -> CovMat2:
        return CovMat2(*map(float, self.v[i]))


@dataclass
class Trajectory:
    """Sampled conditional covariances of both modes on a shared time grid."""

    t: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    converged: bool
    converged_at: float | None
    uncertainty_violations: int
    modes: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.t)

    def samples(self):
        for i in range(len(self.t)):
            yield (float(self.t[i]), CovMat2(*map(float, self.v_plus[i])),
                   CovMat2(*map(float, self.v_minus[i])))


CSV_HEADER = ("t_s", "Vqq_plus", "Vqp_plus", "Vpp_plus", "Vqq_minus", "Vqp_minus", "Vpp_minus")


# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# fifth-order minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI controller exponents for a fourth-order error estimate
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5


def _err_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, rtol: float, atol: float) -> float:
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(f, y0, f0, rtol, atol, h_max) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, h_max)
    f1 = f(y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, h_max)


def evolve(sys: ModeSystem, v0: CovMat2, cfg: IntegratorConfig | None = None) -> ModeTrajectory:
    """Integrate one mode with adaptive Dormand-Prince steps and PI step control.

    The state is re-symmetrised after every accepted step. Output times are
    hit exactly by shortening the step that would cross them. Raises
    PositivityLost when an eigenvalue drops below ``-abs_tol`` and
    StepSizeUnderflow when the step collapses to round-off size.
    """
    cfg = cfg or IntegratorConfig()
    rtol, atol = cfg.rel_tol, cfg.abs_tol
    conv_tol = cfg.conv_tol if cfg.conv_tol is not None else rtol

    def f(V: np.ndarray) -> np.ndarray:
        return riccati_rhs(V, sys)

    grid = cfg.grid()
    V = v0.matrix.copy()
    t = 0.0
    ts = [0.0]
    vs = [v0.as_tuple()]
    violations = int(v0.det < 1.0 - UNCERTAINTY_TOL)

    converged_at = None
    streak_start = None
    streak = 0
    n_acc = n_rej = 0

    k0 = f(V)
    h = _initial_step(f, V, k0, rtol, atol, min(cfg.max_step, max(cfg.t_end, 1e-300)))
    err_prev = 1e-4
    gi = 0
    if gi < len(grid) and grid[gi] == 0.0:
        gi += 1

    while gi < len(grid):
        target = grid[gi]
        h = min(h, cfg.max_step)
        hit = t + h >= target
        h_step = target - t if hit else h
        if h_step <= 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise StepSizeUnderflow(f"step size {h_step:.3g} underflowed at t={t:.6g}")

        ks = [k0]
        for i in range(1, 7):
            yi = V.copy()
            for j, a in enumerate(_A[i]):
                if a:
                    yi += h_step * a * ks[j]
            ks.append(f(yi))
        # stage 7 evaluates at the fifth-order solution (FSAL)
        V_new = V + h_step * sum(b * k for b, k in zip(_B, ks[:6]) if b)
        err = h_step * sum(e * k for e, k in zip(_E, ks) if e)
        err_n = _err_norm(err, V, V_new, rtol, atol)

        if err_n <= 1.0:
            n_acc += 1
            V = 0.5 * (V_new + V_new.T)
            t = target if hit else t + h_step
            k0 = f(V)
            eigmin = np.linalg.eigvalsh(V)[0]
            if eigmin < -atol:
                raise PositivityLost(f"eigenvalue {eigmin:.3g} < -abs_tol at t={t:.6g}")

            if np.linalg.norm(k0) < conv_tol * np.linalg.norm(V):
                if streak == 0:
                    streak_start = t
                streak += 1
                if streak >= cfg.conv_window and converged_at is None:
                    converged_at = streak_start
            else:
                streak = 0
                if converged_at is None:
                    streak_start = None

            if hit:
                ts.append(t)
                vs.append((V[0, 0], V[0, 1], V[1, 1]))
                if V[0, 0] * V[1, 1] - V[0, 1] ** 2 < 1.0 - UNCERTAINTY_TOL:
                    violations += 1
                gi += 1
                if cfg.stop_on_converged and converged_at is not None:
                    break

            err_n = max(err_n, 1e-10)
            factor = _SAFETY * err_n ** (-_ALPHA) * err_prev**_BETA
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_prev = err_n
            # a step shortened to land on the grid says little about the next one
            h = h * factor if not hit or h_step >= h else max(h, h_step * factor)
        else:
            n_rej += 1
            factor = max(_MIN_FACTOR, _SAFETY * err_n ** (-1 / 5))
            h = h_step * factor

    return ModeTrajectory(
        mode=sys.mode,
        t=np.array(ts),
        v=np.array(vs, dtype=float).reshape(-1, 3),
        converged=converged_at is not None,
        converged_at=converged_at,
        uncertainty_violations=violations,
        n_accepted=n_acc,
        n_rejected=n_rej,
    )


def evolve_pair(
    d: DerivedParams,
    cfg: IntegratorConfig | None = None,
    v0: tuple[CovMat2, CovMat2] | None = None,
) -> Trajectory:
    """Integrate both modes from the thermal start (or ``v0``) on a shared grid."""
    cfg = cfg or IntegratorConfig()
    starts = v0 if v0 is not None else initial_covariance(d)
    runs = {m: evolve(build_system(d, m), s, cfg) for m, s in zip(MODES, starts)}
    n = min(len(r.t) for r in runs.values())
    plus, minus = runs["plus"], runs["minus"]
    conv_times = [r.converged_at for r in runs.values()]
    converged = all(c is not None for c in conv_times)
    return Trajectory(
        t=plus.t[:n].copy(),
        v_plus=plus.v[:n].copy(),
        v_minus=minus.v[:n].copy(),
        converged=converged,
        converged_at=max(conv_times) if converged else None,
        uncertainty_violations=sum(r.uncertainty_violations for r in runs.values()),
        modes=runs,
    )


def regime_approximation(t: float, d: DerivedParams, mode: Mode, regime: str) -> CovMat2:
    """Closed-form attractor solutions for the early (t < 10 s) and
    intermediate (30 s < t < 300 s) phases."""
    if not t > 0:
        raise ValueError("t must be positive")
    mp = d.mode(mode)
    kappa = d.params.kappa
    g2 = mp.g**2
    if regime == "early":
        return CovMat2(kappa / (16.0 * t * g2), mp.Omega * (mp.n_th + 0.5) * t, 2.0 * mp.n_th + 1.0)
    if regime == "intermediate":
        return CovMat2(
            kappa / (4.0 * t * g2),
            3.0 * kappa / (8.0 * t**2 * g2 * mp.Omega),
            3.0 * kappa / (8.0 * t**3 * g2 * mp.Omega**2),
        )
    raise ValueError(f"regime must be 'early' or 'intermediate', got {regime!r}")

