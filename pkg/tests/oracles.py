"""Independent reference implementations used only by the tests.

Nothing here imports the package's numerical code paths: the Riccati flow is
expanded by hand into three scalar ODEs and stepped with classical RK4, and
the negativity is taken from the eigenvalues of ``i J V~`` with ``V~`` the
partially transposed covariance.
"""

from __future__ import annotations

import math

import numpy as np


def riccati_scalar_rhs(a, b, c, Om, gm, lam, nbar):
    # V = [[a, b], [b, c]], A = [[0, Om], [-Om, -gm]], C^T C = diag(lam, 0)
    da = 2.0 * Om * b - lam * a * a
    db = Om * (c - a) - gm * b - lam * a * b
    dc = -2.0 * Om * b - 2.0 * gm * c + nbar - lam * b * b
    return da, db, dc


def rk4_reference(v0, Om, gm, lam, nbar, times, dt):
    """Fixed-step RK4 from t=0; returns (a, b, c) at each requested time.

    Each interval between requested times is split into equal steps no
    longer than ``dt``.
    """
    a, b, c = v0
    t = 0.0
    out = []
    f = riccati_scalar_rhs
    for target in times:
        n = max(1, math.ceil((target - t) / dt - 1e-9)) if target > t else 0
        h = (target - t) / n if n else 0.0
        for _ in range(n):
            k1 = f(a, b, c, Om, gm, lam, nbar)
            k2 = f(a + 0.5 * h * k1[0], b + 0.5 * h * k1[1], c + 0.5 * h * k1[2], Om, gm, lam, nbar)
            k3 = f(a + 0.5 * h * k2[0], b + 0.5 * h * k2[1], c + 0.5 * h * k2[2], Om, gm, lam, nbar)
            k4 = f(a + h * k3[0], b + h * k3[1], c + h * k3[2], Om, gm, lam, nbar)
            a += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
            b += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
            c += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        t = target
        out.append((a, b, c))
    return out


def pt_symplectic_negativity(v4):
    """Signed log negativity ``-log2(nu_min)`` of a two-mode covariance.

    Ordering (qA, pA, qB, pB), vacuum normalised to the identity.
    """
    v4 = np.asarray(v4, dtype=float)
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    vt = flip @ v4 @ flip
    j = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    nu = np.sort(np.abs(np.linalg.eigvals(1j * j @ vt)))
    return -math.log2(nu[0])


def _rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def _direct_sum(x, y):
    out = np.zeros((4, 4))
    out[:2, :2] = x
    out[2:, 2:] = y
    return out


def random_symplectic(rng):
    """Product of local rotations, local squeezers and a mixing beam splitter,
    which together generate Sp(4, R)."""
    def local():
        return _direct_sum(_rotation(rng.uniform(0, 2 * math.pi)),
                           _rotation(rng.uniform(0, 2 * math.pi)))

    r1, r2 = rng.uniform(-1.2, 1.2, size=2)
    squeeze = np.diag([math.exp(r1), math.exp(-r1), math.exp(r2), math.exp(-r2)])
    th = rng.uniform(0, math.pi)
    bs = np.block([[math.cos(th) * np.eye(2), math.sin(th) * np.eye(2)],
                   [-math.sin(th) * np.eye(2), math.cos(th) * np.eye(2)]])
    th2 = rng.uniform(0, math.pi)
    bs2 = np.block([[math.cos(th2) * np.eye(2), math.sin(th2) * np.eye(2)],
                    [-math.sin(th2) * np.eye(2), math.cos(th2) * np.eye(2)]])
    return local() @ bs @ squeeze @ local() @ bs2 @ local()


def random_gaussian_state(rng):
    """Physical two-mode covariance ``S diag(n1, n1, n2, n2) S^T`` with n >= 1."""
    n1, n2 = 1.0 + rng.exponential(1.0, size=2)
    s = random_symplectic(rng)
    v = s @ np.diag([n1, n1, n2, n2]) @ s.T
    return 0.5 * (v + v.T)


def tmsv(r):
    """Two-mode squeezed vacuum covariance."""
    ch, sh = math.cosh(2 * r), math.sinh(2 * r)
    z = np.diag([1.0, -1.0])
    return np.block([[ch * np.eye(2), sh * z], [sh * z, ch * np.eye(2)]])
