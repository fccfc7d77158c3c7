"""Plateau bump function and the graph function built from it.

The bump is 1 on ``[-a, a]``, decays through a symmetric smooth-step to 0 at
``|t| = b`` and vanishes beyond.  With ``a + b = 1`` its integral is exactly 1.
The graph function is

    g(x1, x2) = (x1 / sqrt(3)) * I(x2 / x1),   I(s) = int_{-s}^{s} bump,

defined on the half-plane ``x1 > 0``.  It is 1-homogeneous, so its Hessian
scales like ``1 / r`` toward the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT3 = np.sqrt(3.0)

# Smallest admissible x1; the graph function only extends smoothly away from 0.
X1_GUARD = 1e-12


# Smooth-step profiles S on [0, 1] with S(s) + S(1 - s) = 1.
# Each entry: (S, S', int_0^s S, sup S').
def _quintic(s):
    return s**3 * (10.0 - 15.0 * s + 6.0 * s**2)


def _quintic_d(s):
    return 30.0 * s**2 * (1.0 - s) ** 2


def _quintic_int(s):
    return s**4 * (2.5 - 3.0 * s + s**2)


def _septic(s):
    return s**4 * (35.0 - 84.0 * s + 70.0 * s**2 - 20.0 * s**3)


def _septic_d(s):
    return 140.0 * s**3 * (1.0 - s) ** 3


def _septic_int(s):
    return s**5 * (7.0 - 14.0 * s + 10.0 * s**2 - 2.5 * s**3)


PROFILES = {
    "quintic": (_quintic, _quintic_d, _quintic_int, 1.875),
    "septic": (_septic, _septic_d, _septic_int, 2.1875),
}


class DomainError(ValueError):
    """Raised when the graph function is evaluated outside ``x1 > 0``."""


@dataclass(frozen=True)
class Bump:
    """Even plateau bump with a smooth-step transition.

    ``plateau`` is the half-width of the region where the bump equals 1 and
    ``outer`` the half-width of its support.
    """

    plateau: float = 0.25
    outer: float = 0.75
    profile: str = "quintic"

    def __post_init__(self):
        if not 0.0 < self.plateau < self.outer < 1.0:
            raise ValueError(f"need 0 < plateau < outer < 1, got {self.plateau}, {self.outer}")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")

    @property
    def width(self) -> float:
        return self.outer - self.plateau

    @property
    def breakpoints(self) -> tuple[float, float]:
        return (self.plateau, self.outer)

    @property
    def max_slope(self) -> float:
        return PROFILES[self.profile][3] / self.width

    def _local(self, t):
        u = np.abs(np.asarray(t, dtype=float))
        s = np.clip((u - self.plateau) / self.width, 0.0, 1.0)
        return u, s

    def __call__(self, t):
        S = PROFILES[self.profile][0]
        u, s = self._local(t)
        out = 1.0 - S(s)
        return np.where(u >= self.outer, 0.0, out)

    def deriv(self, t):
        dS = PROFILES[self.profile][1]
        t = np.asarray(t, dtype=float)
        u, s = self._local(t)
        mag = dS(s) / self.width
        inside = (u > self.plateau) & (u < self.outer)
        return np.where(inside, -np.sign(t) * mag, 0.0)

    def half_integral(self, u):
        """``int_0^u bump`` for ``u >= 0``; equals 1/2 for ``u >= outer``."""
        Sint = PROFILES[self.profile][2]
        u = np.asarray(u, dtype=float)
        s = np.clip((u - self.plateau) / self.width, 0.0, 1.0)
        ramp = self.plateau + (u - self.plateau) - self.width * Sint(s)
        out = np.where(u <= self.plateau, u, ramp)
        return np.where(u >= self.outer, self.plateau + 0.5 * self.width, out)

    def sym_integral(self, s):
        """``int_{-s}^{s} bump``, an odd function of ``s``."""
        s = np.asarray(s, dtype=float)
        return 2.0 * np.sign(s) * self.half_integral(np.abs(s))


BUMPS = {
    "quintic-plateau": Bump(0.25, 0.75, "quintic"),
    "alt": Bump(0.2, 0.8, "septic"),
    # Violates sup|bump'| <= 4; kept for exercising the failure path.
    "steep": Bump(0.45, 0.55, "quintic"),
}

DEFAULT_BUMP = BUMPS["quintic-plateau"]


def get_bump(name: str) -> Bump:
    try:
        return BUMPS[name]
    except KeyError:
        raise ValueError(f"unknown bump {name!r}; choose from {sorted(BUMPS)}") from None


def check_bump(bump: Bump, samples: int = 20001, tol: float = 1e-12) -> list[str]:
    """Sample the six bump requirements; return the list of violations."""
    t = np.linspace(-1.5, 1.5, samples)
    v = bump(t)
    d = bump.deriv(t)
    problems = []
    if v.min() < -tol or v.max() > 1.0 + tol or abs(float(bump(0.0)) - 1.0) > tol:
        problems.append("range: need 0 <= bump <= 1 and bump(0) = 1")
    if np.any(v[np.abs(t) >= 1.0] != 0.0):
        problems.append("support: bump must vanish for |t| >= 1")
    if np.max(np.abs(v - v[::-1])) > tol:
        problems.append("symmetry: bump(-t) != bump(t)")
    if np.any(d[t >= 0] > tol):
        problems.append("monotone: bump' > 0 somewhere on t >= 0")
    slope = max(float(np.max(np.abs(d))), bump.max_slope)
    if slope > 4.0 + tol:
        problems.append(f"slope: sup|bump'| = {slope:.4g} > 4")
    total = float(bump.sym_integral(1.0))
    if abs(total - 1.0) > 1e-12:
        problems.append(f"normalization: integral = {total!r}")
    return problems


class GraphFunction:
    """The graph function ``g`` with closed-form first and second derivatives.

    All methods accept scalars or arrays (broadcast together) and reject
    ``x1 <= X1_GUARD``.
    """

    def __init__(self, bump: Bump = DEFAULT_BUMP):
        self.bump = bump

    @staticmethod
    def _prep(x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if np.any(x1 <= X1_GUARD):
            raise DomainError("graph function requires x1 > 0")
        return x1, x2, x2 / x1

    def value(self, x1, x2):
        x1, x2, s = self._prep(x1, x2)
        return x1 / SQRT3 * self.bump.sym_integral(s)

    def grad(self, x1, x2):
        """Stacked ``(d1 g, d2 g)`` along a trailing axis."""
        x1, x2, s = self._prep(x1, x2)
        phi = self.bump(s)
        g1 = (self.bump.sym_integral(s) - 2.0 * s * phi) / SQRT3
        g2 = 2.0 / SQRT3 * phi
        return np.stack(np.broadcast_arrays(g1, g2), axis=-1)

    def hess(self, x1, x2):
        """Hessian as a trailing ``(2, 2)`` block; exactly zero where ``|x2| >= outer * x1``."""
        x1, x2, s = self._prep(x1, x2)
        c = 2.0 * self.bump.deriv(s) / (SQRT3 * x1)
        h11 = c * s * s
        h12 = -c * s
        h22 = c
        h11, h12, h22 = np.broadcast_arrays(h11, h12, h22)
        return np.stack([np.stack([h11, h12], -1), np.stack([h12, h22], -1)], -2)

    def hess_norm(self, x1, x2):
        """Frobenius norm of the Hessian, in closed form."""
        x1, x2, s = self._prep(x1, x2)
        return 2.0 * np.abs(self.bump.deriv(s)) / (SQRT3 * x1) * (1.0 + s * s)

    def extended_value(self, x1, x2):
        """``g`` continued to the closed half-plane: 0 on ``x1 = 0``."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        safe = np.where(x1 > X1_GUARD, x1, 1.0)
        out = safe / SQRT3 * self.bump.sym_integral(x2 / safe)
        return np.where(x1 > X1_GUARD, out, 0.0)


_DEFAULT_G = GraphFunction()


def bump_eval(t, bump: Bump = DEFAULT_BUMP):
    return bump(t)


def bump_deriv(t, bump: Bump = DEFAULT_BUMP):
    return bump.deriv(t)


def g_eval(x1, x2, bump: Bump | None = None):
    return (GraphFunction(bump) if bump else _DEFAULT_G).value(x1, x2)


def g_grad(x1, x2, bump: Bump | None = None):
    return (GraphFunction(bump) if bump else _DEFAULT_G).grad(x1, x2)


def g_hess(x1, x2, bump: Bump | None = None):
    return (GraphFunction(bump) if bump else _DEFAULT_G).hess(x1, x2)
