"""First variation, distributional boundary and the curvature-varifold functional.

For a union ``E`` of half-sheets and a test function ``phi(x, P)`` on
position x (3x3 matrix) space,

    B_l(E, phi) = int_E  T_lj D_j phi + D*_jk phi A_ljk + phi A_jlj  d(area),

evaluated at ``P = T(x)``.  For a sheet with boundary this equals
``-int phi d(boundary_l)``; :func:`boundary_closed_form` gives that right-hand
side for unions of full sheets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bump import DEFAULT_BUMP, PROFILES, Bump
from .exact import ExactMat3, conormal, distinct_planes, eta, plane_projection
from .model import (
    SIGNS,
    curve_direction,
    HalfSheetSet,
    QuadratureGrid,
    integrate_line,
    integrate_sheet,
    sheet_samples,
)

Array = np.ndarray


@dataclass(frozen=True)
class TestFunction:
    """A C^1 function of (position, 3x3 matrix) with both gradients.

    Callables take ``x`` of shape ``(N, 3)`` and ``P`` of shape ``(N, 3, 3)``.
    ``support_radius`` bounds ``|x|`` on the support (``inf`` if unbounded).
    """

    __test__ = False  # not a pytest class

    value: Callable[[Array, Array], Array]
    grad_x: Callable[[Array, Array], Array]
    grad_P: Callable[[Array, Array], Array]
    support_radius: float = np.inf
    name: str = "phi"

    def __mul__(self, other: TestFunction) -> TestFunction:
        f, g = self, other
        return TestFunction(
            lambda x, P: f.value(x, P) * g.value(x, P),
            lambda x, P: f.grad_x(x, P) * g.value(x, P)[:, None] + f.value(x, P)[:, None] * g.grad_x(x, P),
            lambda x, P: f.grad_P(x, P) * g.value(x, P)[:, None, None] + f.value(x, P)[:, None, None] * g.grad_P(x, P),
            min(f.support_radius, g.support_radius),
            f"{f.name}*{g.name}",
        )

    def __add__(self, other: TestFunction) -> TestFunction:
        f, g = self, other
        return TestFunction(
            lambda x, P: f.value(x, P) + g.value(x, P),
            lambda x, P: f.grad_x(x, P) + g.grad_x(x, P),
            lambda x, P: f.grad_P(x, P) + g.grad_P(x, P),
            max(f.support_radius, g.support_radius),
            f"({f.name}+{g.name})",
        )

    def named(self, name: str) -> TestFunction:
        return TestFunction(self.value, self.grad_x, self.grad_P, self.support_radius, name)

    def at(self, x, P):
        """Evaluate at a single point; returns ``(value, D, D*)``."""
        x = np.asarray(x, dtype=float)[None]
        P = np.asarray(P, dtype=float)[None]
        return float(self.value(x, P)[0]), self.grad_x(x, P)[0], self.grad_P(x, P)[0]


def _zeros_P(x, P):
    return np.zeros((len(x), 3, 3))


def _zeros_x(x, P):
    return np.zeros((len(x), 3))


def spatial(value, grad, support_radius=np.inf, name="s") -> TestFunction:
    return TestFunction(lambda x, P: value(x), lambda x, P: grad(x), _zeros_P, support_radius, name)


def grassmann(value, grad, name="f") -> TestFunction:
    return TestFunction(lambda x, P: value(P), _zeros_x, lambda x, P: grad(P), np.inf, name)


def _exp_profile(q):
    """``exp(1 - 1/(1 - q))`` for ``q < 1`` and its derivative in ``q``."""
    inside = q < 1.0
    qq = np.where(inside, q, 0.0)
    val = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - qq)), 0.0)
    return val, -val / (1.0 - qq) ** 2


def exp_bump(center, radius) -> TestFunction:
    """Smooth bump equal to 1 at ``center`` and supported in ``B(center, radius)``."""
    c = np.asarray(center, dtype=float)

    def value(x):
        return _exp_profile(np.sum((x - c) ** 2, -1) / radius**2)[0]

    def grad(x):
        val, dq = _exp_profile(np.sum((x - c) ** 2, -1) / radius**2)
        return dq[:, None] * 2.0 * (x - c) / radius**2

    return spatial(value, grad, float(np.linalg.norm(c) + radius), f"bump({tuple(center)},{radius})")


def shell(r_in, r_out) -> TestFunction:
    """Smooth radial bump supported in ``r_in < |x| < r_out``."""
    mid, half = 0.5 * (r_in + r_out), 0.5 * (r_out - r_in)

    def value(x):
        u = (np.linalg.norm(x, axis=-1) - mid) / half
        return _exp_profile(u * u)[0]

    def grad(x):
        rho = np.linalg.norm(x, axis=-1)
        u = (rho - mid) / half
        _, dq = _exp_profile(u * u)
        safe = np.where(rho > 0, rho, 1.0)
        return (dq * 2.0 * u / half / safe)[:, None] * x

    return spatial(value, grad, r_out, f"shell({r_in},{r_out})")


def affine(c0, a) -> TestFunction:
    a = np.asarray(a, dtype=float)
    return spatial(lambda x: c0 + x @ a, lambda x: np.broadcast_to(a, x.shape).copy(), np.inf, "affine")


def plane_linear(M, c0=0.0) -> TestFunction:
    """``c0 + sum_jk M_jk P_jk``."""
    M = np.asarray(M, dtype=float)
    return grassmann(
        lambda P: c0 + np.einsum("njk,jk->n", P, M),
        lambda P: np.broadcast_to(M, P.shape).copy(),
        "linear(P)",
    )


def chordal_bump(Q, eps) -> TestFunction:
    """``exp(1 - 1/(1 - s))`` with ``s = |P - Q|_F^2 / eps^2``; 1 at ``Q``, 0 for ``s >= 1``."""
    Q = Q.to_array() if isinstance(Q, ExactMat3) else np.asarray(Q, dtype=float)

    def value(P):
        return _exp_profile(np.sum((P - Q) ** 2, axis=(-2, -1)) / eps**2)[0]

    def grad(P):
        _, dq = _exp_profile(np.sum((P - Q) ** 2, axis=(-2, -1)) / eps**2)
        return dq[:, None, None] * 2.0 * (P - Q) / eps**2

    return grassmann(value, grad, f"chordal({eps})")


def cutoff(eps) -> TestFunction:
    """1 on ``B(0, eps)``, 0 outside ``B(0, 2 eps)``, gradient at most ``1.875 / eps``."""
    S, dS = PROFILES["quintic"][:2]

    def value(x):
        s = np.clip(np.linalg.norm(x, axis=-1) / eps - 1.0, 0.0, 1.0)
        return 1.0 - S(s)

    def grad(x):
        rho = np.linalg.norm(x, axis=-1)
        s = np.clip(rho / eps - 1.0, 0.0, 1.0)
        safe = np.where(rho > 0, rho, 1.0)
        return (-dS(s) / eps / safe)[:, None] * x

    return spatial(value, grad, 2.0 * eps, f"cutoff({eps})")


def planar_profile() -> TestFunction:
    """``phi(x2) psi(x1^2 + x3^2)`` with ``supp phi = (1, 3)``, ``int phi = 1``,
    ``supp psi`` in ``(-1/2, 1/2)`` and ``psi(0) = 1``."""
    c = 35.0 / 32.0  # 1 / int_{-1}^{1} (1 - u^2)^3 du

    def parts(x):
        u = x[:, 1] - 2.0
        inside = np.abs(u) < 1.0
        a = np.where(inside, 1.0 - u * u, 0.0)
        phi = c * a**3
        dphi = np.where(inside, c * 3.0 * a**2 * (-2.0 * u), 0.0)
        s = x[:, 0] ** 2 + x[:, 2] ** 2
        inner = s < 0.5
        b = np.where(inner, 1.0 - 4.0 * s * s, 0.0)
        psi = b**3
        dpsi = np.where(inner, 3.0 * b**2 * (-8.0 * s), 0.0)
        return phi, dphi, psi, dpsi

    def value(x):
        phi, _, psi, _ = parts(x)
        return phi * psi

    def grad(x):
        phi, dphi, psi, dpsi = parts(x)
        return np.stack([phi * dpsi * 2.0 * x[:, 0], dphi * psi, phi * dpsi * 2.0 * x[:, 2]], -1)

    return spatial(value, grad, float(np.sqrt(9.0 + 0.5)), "planar-profile")


class SupportTooWide(ValueError):
    pass


def chordal_distance(P, Q) -> float:
    P = P.to_array() if isinstance(P, ExactMat3) else np.asarray(P)
    Q = Q.to_array() if isinstance(Q, ExactMat3) else np.asarray(Q)
    return float(np.linalg.norm(P - Q))


def make_test_function(spatial_part: TestFunction | None, center: ExactMat3, eps: float) -> TestFunction:
    """``spatial_part(x) * f(P)`` with ``f`` a chordal bump of radius ``eps`` at ``center``.

    Rejects ``eps`` unless every other table plane is farther than ``2 eps``
    from ``center``.
    """
    for P in distinct_planes():
        if P == center:
            continue
        d = chordal_distance(P, center)
        if d <= 2.0 * eps:
            raise SupportTooWide(f"eps={eps} too large: planes at chordal distance {d:.6g} <= 2*eps")
    base = planar_profile() if spatial_part is None else spatial_part
    return (base * chordal_bump(center, eps)).named(f"planar-support({eps})")


@dataclass(frozen=True)
class VectorField:
    """Compactly supported field with ``jacobian[n, i, j] = d_j Y_i``."""

    value: Callable[[Array], Array]
    jacobian: Callable[[Array], Array]
    support_radius: float
    name: str = "Y"


def localized_field(center, radius, vector, matrix=None, name=None) -> VectorField:
    """``Y(x) = b(x) (v + M (x - c))`` for the smooth bump ``b`` on ``B(c, radius)``."""
    c = np.asarray(center, dtype=float)
    v = np.asarray(vector, dtype=float)
    M = np.zeros((3, 3)) if matrix is None else np.asarray(matrix, dtype=float)
    b = exp_bump(c, radius)

    def value(x):
        bx = b.value(x, None)
        return bx[:, None] * (v + (x - c) @ M.T)

    def jacobian(x):
        bx = b.value(x, None)
        db = b.grad_x(x, None)
        inner = v + (x - c) @ M.T
        return inner[:, :, None] * db[:, None, :] + bx[:, None, None] * M

    return VectorField(value, jacobian, b.support_radius, name or f"Y@{tuple(center)}")


# ---------------------------------------------------------------- functionals


def _by_sheet(sel: HalfSheetSet):
    for i in range(1, 7):
        halves = tuple(s for s in SIGNS if (i, s) in sel)
        if halves:
            yield i, halves


def curvature_integrand(phi: TestFunction):
    def integrand(smp):
        P = smp.T
        val = phi.value(smp.x, P)
        D = phi.grad_x(smp.x, P)
        Ds = phi.grad_P(smp.x, P)
        return np.einsum("nlj,nj->nl", P, D) + np.einsum("njk,nljk->nl", Ds, smp.A) + val[:, None] * smp.H

    return integrand


def curvature_residual(sel: HalfSheetSet, phi: TestFunction, grid=QuadratureGrid(), bump: Bump = DEFAULT_BUMP, radius=None) -> Array:
    """``B(sel, phi)`` as a 3-vector."""
    radius = phi.support_radius if radius is None else radius
    if not np.isfinite(radius):
        raise ValueError("test function must have bounded support")
    total = np.zeros(3)
    for i, halves in _by_sheet(sel):
        total += integrate_sheet(i, curvature_integrand(phi), radius, grid, bump, halves=halves)
    return total


def boundary_closed_form(sel: HalfSheetSet, phi: TestFunction, grid=QuadratureGrid()) -> Array:
    """``-sum_i sum_s int_{L^s} phi(x, P_i^s) nu_i^s`` over the full sheets of ``sel``."""
    sheets = sel.full_sheets()
    if sheets is None:
        raise ValueError(f"closed form needs full sheets, got {sel.name}")
    total = np.zeros(3)
    for i in sheets:
        for s in SIGNS:
            P = plane_projection(i, s).to_array()
            nu = conormal(i, s).to_array()

            def f(pts, P=P):
                return phi.value(pts, np.broadcast_to(P, (len(pts), 3, 3)))

            total -= integrate_line("L" + s, f, phi.support_radius, grid) * nu
    return total


def first_variation(sel: HalfSheetSet, Y: VectorField, grid=QuadratureGrid(), bump: Bump = DEFAULT_BUMP) -> float:
    """``sum over half-sheets of int trace(T DY)``."""
    total = 0.0
    for i, halves in _by_sheet(sel):
        total += integrate_sheet(
            i, lambda smp: np.einsum("nij,nij->n", smp.T, Y.jacobian(smp.x)), Y.support_radius, grid, bump, halves=halves
        )
    return float(total)


def distributional_boundary(sel: HalfSheetSet, Y: VectorField, grid=QuadratureGrid(), bump: Bump = DEFAULT_BUMP) -> float:
    """``V dE (Y) = -int_E <H, Y> - delta(V restricted to E)(Y)``."""

    def integrand(smp):
        return -np.einsum("ni,ni->n", smp.H, Y.value(smp.x)) - np.einsum("nij,nij->n", smp.T, Y.jacobian(smp.x))

    total = 0.0
    for i, halves in _by_sheet(sel):
        total += integrate_sheet(i, integrand, Y.support_radius, grid, bump, halves=halves)
    return float(total)


def boundary_flux(sel: HalfSheetSet, Y: VectorField, grid=QuadratureGrid()) -> float:
    """Line-integral prediction for :func:`distributional_boundary`:
    ``int_{L^s} <Y, nu_i^s> + int_{T_k} <Y, eta_i^s>`` summed over ``sel``."""
    total = 0.0
    for i, s in sel.halves():
        k = (i + 1) // 2
        for curve, vec in (("L" + s, conormal(i, s)), (f"T{k}", eta(i, s))):
            n = vec.to_array()
            total += integrate_line(curve, lambda p, n=n: Y.value(p) @ n, Y.support_radius, grid)
    return float(total)


# ---------------------------------------------------------------- cutoff study


def cutoff_study(sel: HalfSheetSet, phi: TestFunction, eps_list, grid=QuadratureGrid(), bump: Bump = DEFAULT_BUMP):
    """Contribution of ``psi_eps * phi`` near the origin, for decreasing ``eps``.

    Each row holds ``|B(sel, psi_eps phi)|``, the a-priori bound
    ``(6/eps sup|phi| + 3 sup|D phi|) mass(B_2eps) + (9 sup|D* phi| + 3 sup|phi|) max_jk int_{B_2eps} |A_ijk|``
    and ``int_{B_eps} |A|``.
    """
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    rows = []
    for eps in eps_list:
        b_val = curvature_residual(sel, cutoff(eps) * phi, grid, bump, radius=2.0 * eps)
        mass, a_comp, sup_v, sup_d, sup_ds = 0.0, np.zeros((3, 3, 3)), 0.0, 0.0, 0.0
        a_mass_eps = 0.0
        for i, halves in _by_sheet(sel):
            for smp in sheet_samples(i, 2.0 * eps, grid, bump, halves):
                mass += smp.w.sum()
                a_comp += np.tensordot(smp.w, np.abs(smp.A), axes=(0, 0))
                sup_v = max(sup_v, float(np.abs(phi.value(smp.x, smp.T)).max()))
                sup_d = max(sup_d, float(np.linalg.norm(phi.grad_x(smp.x, smp.T), axis=-1).max()))
                sup_ds = max(sup_ds, float(np.linalg.norm(phi.grad_P(smp.x, smp.T), axis=(-2, -1)).max()))
            a_mass_eps += integrate_sheet(
                i, lambda smp: np.linalg.norm(smp.A.reshape(len(smp.w), -1), axis=-1), eps, grid, bump, halves=halves
            )
        bound = (6.0 / eps * sup_v + 3.0 * sup_d) * mass + (9.0 * sup_ds + 3.0 * sup_v) * float(a_comp.max())
        rows.append(
            {
                "eps": eps,
                "B_norm": float(np.linalg.norm(b_val)),
                "bound": float(bound),
                "mass_2eps": float(mass),
                "A_mass_eps": float(a_mass_eps),
            }
        )
    return rows


# ---------------------------------------------------------------- batteries


def battery() -> list[TestFunction]:
    """Fixed set of test functions with nonzero single-sheet boundary terms."""
    P1 = plane_projection(1, "+")
    P3m = plane_projection(3, "-")
    E = np.zeros((3, 3))
    E[2, 2], E[0, 1] = 1.0, 0.5
    return [
        shell(0.5, 3.0).named("shell"),
        (shell(0.5, 3.0) * affine(1.0, (0.3, -0.2, 0.25))).named("shell-affine"),
        (shell(0.5, 3.0) * plane_linear(E, 0.2)).named("shell-plane-linear"),
        (exp_bump((0.5, 1.5, 0.3), 1.5) * chordal_bump(P1, 0.9)).named("blob-chordal-P1+"),
        (shell(1.0, 3.0) * affine(1.0, (0.0, 0.4, 0.0)) * chordal_bump(P3m, 0.8)).named("shell-chordal-P3-"),
        (exp_bump((0.0, 0.0, 0.0), 2.5) * (affine(0.5, (0.2, 0.0, 0.0)) + plane_linear(np.diag([1.0, 0.0, -0.5]))))
        .named("origin-mixed"),
    ]


def field_battery() -> list[VectorField]:
    """Three vector fields probing ``L^+`` and ``T_1`` together and separately."""
    M = np.array([[0.1, 0.2, 0.0], [0.0, -0.3, 0.1], [0.2, 0.0, 0.1]])
    return [
        localized_field((0.0, 0.0, 0.0), 2.5, (1.0, 0.5, -0.3), M, "origin"),
        localized_field((1.0, 0.5, 0.4), 1.5, (0.3, 1.0, 0.6), None, "corner"),
        localized_field((2.0, 0.3, 0.0), 1.2, (0.2, 1.0, 0.7), M, "ray-T1"),
    ]


def detection_fields() -> list[VectorField]:
    """One field localized on each of ``L^+``, ``L^-``, ``T_1``, ``T_2``, ``T_3``."""
    v = (1.0, 0.37, 0.61)
    return [localized_field(2.0 * curve_direction(c), 1.5, v, None, f"probe-{c}") for c in ("L+", "L-", "T1", "T2", "T3")]
