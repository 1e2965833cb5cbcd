"""Two-mode Gaussian covariance algebra.

Covariances are vacuum-normalised: with ``[q, p] = 2i`` the vacuum state
has the identity as covariance matrix, a pure single-mode state has unit
determinant and every physical single-mode covariance has ``det >= 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ComplexBranch, EpsilonOutOfRange, NotPSD, SingularCovariance

PSD_TOL = 1e-12
UNCERTAINTY_TOL = 1e-9


@dataclass(frozen=True)
class CovMat2:
    """Symmetric 2x2 covariance of one mode, stored by its three entries."""

    vqq: float
    vqp: float
    vpp: float

    @classmethod
    def from_matrix(cls, m) -> "CovMat2":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    @classmethod
    def identity(cls, scale: float = 1.0) -> "CovMat2":
        return cls(scale, 0.0, scale)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.vqq, self.vqp], [self.vqp, self.vpp]])

    @property
    def det(self) -> float:
        return self.vqq * self.vpp - self.vqp**2

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.vqq, self.vqp, self.vpp)

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        scale = max(abs(self.vqq), abs(self.vpp), abs(self.vqp), 1.0)
        return (
            self.vqq >= -tol * scale
            and self.vpp >= -tol * scale
            and self.det >= -tol * scale**2
        )

    def scaled(self, c: float) -> "CovMat2":
        return CovMat2(c * self.vqq, c * self.vqp, c * self.vpp)


@dataclass(frozen=True)
class CovMat4:
    """Covariance of the two individual mirrors in (qA, pA, qB, pB) order."""

    VA: CovMat2
    VB: CovMat2
    VAB: np.ndarray

    @classmethod
    def from_matrix(cls, m) -> "CovMat4":
        m = np.asarray(m, dtype=float)
        return cls(CovMat2.from_matrix(m[:2, :2]), CovMat2.from_matrix(m[2:, 2:]),
                   np.array(m[:2, 2:], dtype=float))

    @property
    def matrix(self) -> np.ndarray:
        top = np.hstack([self.VA.matrix, self.VAB])
        bottom = np.hstack([self.VAB.T, self.VB.matrix])
        return np.vstack([top, bottom])

    @property
    def det_AB(self) -> float:
        c = self.VAB
        return float(c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0])


def symplectic_form(n_modes: int = 2) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class BeamSplitterMap:
    s: np.ndarray
    epsilon: float


def beam_splitter(epsilon: float) -> BeamSplitterMap:
    """Half beam splitter from (common, differential) modes to mirrors A and B.

    The differential-mode quadratures carry the rescaling ``(1 - eps)**(-1/4)``
    on q and ``(1 - eps)**(1/4)`` on p from the mode frequency shift.
    """
    if not (0.0 <= epsilon < 1.0):
        raise EpsilonOutOfRange(f"epsilon must lie in [0, 1), got {epsilon!r}")
    r = (1.0 - epsilon) ** 0.25
    s = np.array(
        [
            [1.0, 0.0, 1.0 / r, 0.0],
            [0.0, 1.0, 0.0, r],
            [1.0, 0.0, -1.0 / r, 0.0],
            [0.0, 1.0, 0.0, -r],
        ]
    ) / math.sqrt(2.0)
    return BeamSplitterMap(s=s, epsilon=epsilon)


def combine(vplus: CovMat2, vminus: CovMat2, bs: BeamSplitterMap) -> CovMat4:
    """Mirror covariance ``S diag(V+, V-) S^T``."""
    for name, v in (("vplus", vplus), ("vminus", vminus)):
        if not v.is_psd():
            raise NotPSD(f"{name} is not positive semidefinite: {v}")
    block = np.zeros((4, 4))
    block[:2, :2] = vplus.matrix
    block[2:, 2:] = vminus.matrix
    full = bs.s @ block @ bs.s.T
    return CovMat4.from_matrix(0.5 * (full + full.T))


class Negativity(NamedTuple):
    raw: float
    clamped: float

    @property
    def entangled(self) -> bool:
        return self.raw > 0.0


def log_negativity(v: CovMat4, tol: float = 1e-9) -> Negativity:
    """Logarithmic negativity from the block determinants.

    ``raw`` keeps the sign (negative means separable); ``clamped`` is
    ``max(raw, 0)``.
    """
    det_a = v.VA.det
    det_b = v.VB.det
    sigma = det_a + det_b - 2.0 * v.det_AB
    det_v = float(np.linalg.det(v.matrix))
    disc = sigma**2 - 4.0 * det_v
    if disc < 0.0:
        if disc < -tol * sigma**2:
            raise ComplexBranch(
                f"sigma^2 - 4 det V = {disc:.3g} < 0: covariance is unphysical"
            )
        disc = 0.0
    root = math.sqrt(disc)
    # smaller root of x^2 - sigma x + det V, in cancellation-free form
    if sigma > 0.0:
        nu2 = 2.0 * det_v / (sigma + root)
    else:
        nu2 = 0.5 * (sigma - root)
    if nu2 <= 0.0:
        raise ComplexBranch(f"partially transposed symplectic eigenvalue^2 = {nu2:.3g} <= 0")
    raw = -0.5 * math.log2(nu2)
    return Negativity(raw, max(raw, 0.0))


def purity(v: CovMat2) -> float:
    det = v.det
    if det <= 0.0:
        raise SingularCovariance(f"det V = {det:.3g} <= 0")
    if det < 1.0 - UNCERTAINTY_TOL:
        warnings.warn(
            f"det V = {det:.12g} < 1 violates the uncertainty bound",
            RuntimeWarning,
            stacklevel=2,
        )
    return 1.0 / math.sqrt(det)


class Squeezing(NamedTuple):
    angle: float
    eig_ratio: float


def squeezing_diagnostics(v: CovMat2, degenerate_tol: float = 1e-14) -> Squeezing:
    """Minor-axis orientation from the q axis in (-pi/2, pi/2] and the
    min/max eigenvalue ratio."""
    half_diff = 0.5 * (v.vqq - v.vpp)
    mean = 0.5 * (v.vqq + v.vpp)
    radius = math.hypot(half_diff, v.vqp)
    if radius <= degenerate_tol * max(abs(mean), 1e-300):
        return Squeezing(0.0, 1.0)
    lam_max = mean + radius
    lam_min = mean - radius
    major = 0.5 * math.atan2(2.0 * v.vqp, v.vqq - v.vpp)
    angle = math.remainder(major + 0.5 * math.pi, math.pi)
    if angle <= -0.5 * math.pi:
        angle = 0.5 * math.pi
    return Squeezing(angle, lam_min / lam_max)
