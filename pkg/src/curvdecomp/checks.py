"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a :class:`SuiteResult` holding a pass flag, a one-line
message and JSON-friendly details.  Quadrature-heavy results are cached per
(bump, level) so consecutive suites reuse them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bump import Bump, GraphFunction, check_bump, get_bump
from .decomposition import ClassificationFailure, classification_report
from .exact import IdentityFailure, conormal, plane_projection, verify_identities
from .model import W, Z1, Z2, HalfSheetSet, QuadratureGrid
from .tangent import curvature_tensor, projection_deriv, projection_from_gradient
from .weak import (
    battery,
    boundary_closed_form,
    boundary_flux,
    curvature_residual,
    cutoff_study,
    distributional_boundary,
    field_battery,
    make_test_function,
)

# frozen from calibration: sup |A| / |D^2 g| over 3 x 1e5 samples is 1.2714 for both bumps
A_HESS_CONSTANT = 1.28
PLANAR_EPS = 0.5


@dataclass
class SuiteResult:
    name: str
    passed: bool
    message: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0


@dataclass(frozen=True)
class Tolerances:
    derivative: float = 1e-5
    residual: float = 1e-3
    cancellation: float = 1e-2
    planar: float = 1e-2
    flux: float = 1e-3


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------- exact / scalar


@_timed
def identity_suite() -> SuiteResult:
    try:
        res = verify_identities()
    except IdentityFailure as exc:
        return SuiteResult("exact identities", False, str(exc))
    return SuiteResult("exact identities", True, f"{len(res)} identities exact", {"count": len(res)})


@_timed
def bump_suite(bump: Bump) -> SuiteResult:
    problems = check_bump(bump)
    details = {"plateau": bump.plateau, "outer": bump.outer, "profile": bump.profile, "max_slope": bump.max_slope}
    if problems:
        return SuiteResult("bump", False, problems[0], details | {"violations": problems})
    return SuiteResult("bump", True, f"compliant, sup|Phi'| = {bump.max_slope:.6g}", details)


def sample_points(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``x1`` log-uniform on ``[1e-2, 3]``, slope ``x2/x1`` uniform on ``[-1.5, 1.5]``."""
    rng = np.random.default_rng(seed)
    x1 = np.exp(rng.uniform(np.log(1e-2), np.log(3.0), n))
    return x1, x1 * rng.uniform(-1.5, 1.5, n)


def derivative_errors(bump: Bump, n: int = 1000, seed: int = 0, rel_step: float = 1e-4) -> dict:
    """Closed-form derivatives against central differences with step ``rel_step * x1``.

    Errors are normalized by ``max(|exact|, scale)`` with scale 1 for the
    gradient and ``1/x1`` for second-order quantities, their natural size.
    """
    g = GraphFunction(bump)
    x1, x2 = sample_points(n, seed)
    h = rel_step * x1
    grad = g.grad(x1, x2)
    hess = g.hess(x1, x2)
    dT = projection_deriv(grad, hess)
    steps = [(h, 0 * h), (0 * h, h)]
    fd_grad = np.stack([(g.value(x1 + a, x2 + b) - g.value(x1 - a, x2 - b)) / (2 * h) for a, b in steps], -1)
    fd_hess = np.stack([(g.grad(x1 + a, x2 + b) - g.grad(x1 - a, x2 - b)) / (2 * h)[:, None] for a, b in steps], -2)
    fd_dT = np.stack(
        [
            (projection_from_gradient(g.grad(x1 + a, x2 + b)) - projection_from_gradient(g.grad(x1 - a, x2 - b)))
            / (2 * h)[:, None, None]
            for a, b in steps
        ],
        1,
    )

    def rel(exact, approx, scale):
        axes = tuple(range(1, exact.ndim))
        num = np.sqrt(np.sum((exact - approx) ** 2, axis=axes))
        return num / np.maximum(np.sqrt(np.sum(exact**2, axis=axes)), scale)

    planar = x1 < np.abs(x2)
    hn = np.linalg.norm(hess, axis=(-2, -1))
    A = curvature_tensor(grad, hess)
    an = np.sqrt(np.sum(A**2, axis=(-3, -2, -1)))
    curved = hn > 0
    return {
        "points": n,
        "grad": float(rel(grad, fd_grad, 1.0).max()),
        "hess": float(rel(hess, fd_hess, 1.0 / x1).max()),
        "dT": float(rel(dT, fd_dT, 1.0 / x1).max()),
        "planar_points": int(planar.sum()),
        "planar_hess_exact_zero": bool(np.all(hess[planar] == 0.0)),
        "A_over_hess_max": float((an[curved] / hn[curved]).max()) if curved.any() else 0.0,
        "A_zero_where_hess_zero": bool(np.all(an[~curved] == 0.0)),
    }


@_timed
def derivative_suite(bump: Bump, tol: float = 1e-5, seed: int = 0, n: int = 1000) -> SuiteResult:
    d = derivative_errors(bump, n, seed)
    worst = max(d["grad"], d["hess"], d["dT"])
    if worst > tol:
        return SuiteResult("derivatives", False, f"max relative FD error {worst:.3e} > {tol:g}", d)
    if not d["planar_hess_exact_zero"]:
        return SuiteResult("derivatives", False, "D^2 g not exactly zero on x1 < |x2|", d)
    if d["A_over_hess_max"] > A_HESS_CONSTANT * (1 + 1e-9) or not d["A_zero_where_hess_zero"]:
        return SuiteResult("derivatives", False, f"|A| <= C|D^2 g| violated (ratio {d['A_over_hess_max']:.6g})", d)
    return SuiteResult("derivatives", True, f"max relative FD error {worst:.3e} at {n} points", d)


# ---------------------------------------------------------------- quadrature suites


@lru_cache(maxsize=8)
def sheet_boundary_table(bump_name: str, level: int) -> dict:
    """``B(W_i, phi)`` and the closed form for every sheet and battery function."""
    bump = get_bump(bump_name)
    grid = QuadratureGrid(level)
    out = {}
    for phi in battery():
        for i in range(1, 7):
            out[(phi.name, i)] = (curvature_residual(W[i], phi, grid, bump), boundary_closed_form(W[i], phi, grid))
    return out


def sheet_errors(table: dict) -> dict[tuple[str, int], float]:
    return {k: float(np.linalg.norm(b - c) / max(1.0, np.linalg.norm(c))) for k, (b, c) in table.items()}


@_timed
def sheet_boundary_suite(bump_name: str, level: int, tol: float = 1e-3) -> SuiteResult:
    fine = sheet_errors(sheet_boundary_table(bump_name, level))
    worst_key = max(fine, key=fine.get)
    details = {"level": level, "max_error": fine[worst_key], "worst": f"{worst_key[0]} on W{worst_key[1]}"}
    if level >= 2:
        coarse = sheet_errors(sheet_boundary_table(bump_name, level - 1))
        details["coarse_max_error"] = max(coarse.values())
        decreased = details["max_error"] < details["coarse_max_error"] and all(
            fine[k] < coarse[k] or fine[k] == coarse[k] == 0.0 for k in fine
        )
        details["decreased"] = decreased
    if not fine[worst_key] <= tol:
        return SuiteResult("sheet boundary", False, f"|B - closed form| = {fine[worst_key]:.3e} > {tol:g} ({details['worst']})", details)
    if level >= 2 and not details["decreased"]:
        return SuiteResult("sheet boundary", False, "error did not decrease under refinement", details)
    return SuiteResult("sheet boundary", True, f"max relative error {fine[worst_key]:.3e} at level {level}", details)


def cancellation_ratios(bump_name: str, level: int) -> dict[str, float]:
    """``|B(V, phi)| / max_i |closed form(W_i, phi)|`` per battery function, with ``B(V) = sum_i B(W_i)``."""
    table = sheet_boundary_table(bump_name, level)
    ratios = {}
    for phi in battery():
        total = sum(table[(phi.name, i)][0] for i in range(1, 7))
        scale = max(np.linalg.norm(table[(phi.name, i)][1]) for i in range(1, 7))
        if scale > 0:
            ratios[phi.name] = float(np.linalg.norm(total) / scale)
    return ratios


@_timed
def cancellation_suite(bump_name: str, level: int, tol: float = 1e-2) -> SuiteResult:
    ratios = cancellation_ratios(bump_name, level)
    worst = max(ratios, key=ratios.get)
    if not ratios or ratios[worst] > tol:
        return SuiteResult("V cancellation", False, f"|B(V)| ratio {ratios.get(worst, float('nan')):.3e} > {tol:g} ({worst})", ratios)
    return SuiteResult("V cancellation", True, f"max ratio {ratios[worst]:.3e} over {len(ratios)} functions", ratios)


def planar_pairings(bump: Bump, level: int, eps: float = PLANAR_EPS) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Boundary pairing ``-B(Z, phi)`` for the planar-support function and the expected conormal."""
    grid = QuadratureGrid(level)
    out = {}
    for name, sel, (i, s) in (("Z1", Z1, (1, "+")), ("Z2", Z2, (2, "+"))):
        phi = make_test_function(None, plane_projection(i, s), eps)
        out[name] = (-curvature_residual(sel, phi, grid, bump), conormal(i, s).to_array())
    return out


@_timed
def planar_suite(bump: Bump, level: int, tol: float = 1e-2) -> SuiteResult:
    details = {}
    for name, (pairing, nu) in planar_pairings(bump, level).items():
        err = float(np.linalg.norm(pairing - nu) / np.linalg.norm(nu))
        details[name] = {"pairing": pairing.tolist(), "expected": nu.tolist(), "error": err}
        if not err <= tol:
            return SuiteResult("Z1/Z2 boundary", False, f"{name}: boundary pairing off by {err:.3e}", details)
    return SuiteResult("Z1/Z2 boundary", True, "boundary pairing equals nu_1^+ and nu_2^+", details)


@_timed
def flux_suite(bump: Bump, level: int, tol: float = 1e-3) -> SuiteResult:
    grid = QuadratureGrid(level)
    sel = HalfSheetSet.of((1, "+"))
    details = {}
    for Y in field_battery():
        num = distributional_boundary(sel, Y, grid, bump)
        ref = boundary_flux(sel, Y, grid)
        err = abs(num - ref) / max(abs(ref), 1e-300)
        details[Y.name] = {"numeric": num, "line": ref, "error": err}
        if not err <= tol:
            return SuiteResult("distributional boundary", False, f"field {Y.name}: error {err:.3e} > {tol:g}", details)
    return SuiteResult("distributional boundary", True, f"{len(details)} fields agree with line integrals", details)


CUTOFF_EPS = (0.4, 0.2, 0.1, 0.05)


def cutoff_rows(bump: Bump, level: int, eps_list=CUTOFF_EPS) -> list[dict]:
    phi = next(p for p in battery() if p.name == "origin-mixed")
    return cutoff_study(W[1], phi, eps_list, QuadratureGrid(level), bump)


@_timed
def cutoff_suite(bump: Bump, level: int) -> SuiteResult:
    """Origin contribution shrinks with eps, stays under the a-priori bound, and
    ``int_{B_eps}|A|`` decreases linearly (ratio near 2 per halving)."""
    rows = cutoff_rows(bump, level)
    details = {"rows": rows}
    b = [r["B_norm"] for r in rows]
    a = [r["A_mass_eps"] for r in rows]
    if any(r["B_norm"] > r["bound"] for r in rows):
        return SuiteResult("origin cutoff", False, "cutoff contribution exceeds its bound", details)
    if not all(y < x for x, y in zip(b, b[1:])) or not all(y < x for x, y in zip(a, a[1:])):
        return SuiteResult("origin cutoff", False, "cutoff values not decreasing in eps", details)
    ratios = [x / y for x, y in zip(a, a[1:])]
    details["A_mass_ratios"] = ratios
    if not all(1.5 < r < 2.5 for r in ratios):
        return SuiteResult("origin cutoff", False, f"A mass not linear in eps (ratios {ratios})", details)
    return SuiteResult("origin cutoff", True, f"|B| {b[0]:.3g} -> {b[-1]:.3g}, A mass {a[0]:.3g} -> {a[-1]:.3g}", details)


@_timed
def classification_suite() -> SuiteResult:
    try:
        rep = classification_report()
    except ClassificationFailure as exc:
        return SuiteResult("classification", False, str(exc))
    return SuiteResult("classification", True, rep["verdict"], rep)


def verify_all(bump_name: str, level: int, tol: Tolerances = Tolerances(), seed: int = 0):
    """Run every suite in order, yielding results and stopping after the first failure."""
    bump = get_bump(bump_name)
    suites = (
        identity_suite,
        lambda: bump_suite(bump),
        lambda: derivative_suite(bump, tol.derivative, seed),
        lambda: sheet_boundary_suite(bump_name, level, tol.residual),
        lambda: cancellation_suite(bump_name, level, tol.cancellation),
        lambda: planar_suite(bump, level, tol.planar),
        lambda: flux_suite(bump, level, tol.flux),
        lambda: cutoff_suite(bump, min(level, 3)),
        classification_suite,
    )
    for run in suites:
        res = run()
        yield res
        if not res.passed:
            return

