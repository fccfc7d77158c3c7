import numpy as np
import pytest

from curvdecomp.bump import DEFAULT_BUMP, GraphFunction, get_bump
from curvdecomp.exact import plane_projection
from curvdecomp.model import (
    EMPTY,
    V_ALL,
    W,
    Z1,
    Z2,
    HalfSheetSet,
    NonConvergence,
    QuadratureGrid,
    Region,
    export_obj,
    hess_mass,
    integrate_line,
    integrate_sheet,
    region_membership,
    sheet_mesh,
    sheet_samples,
)

SQRT3 = np.sqrt(3.0)


def test_half_sheet_set_algebra():
    assert Z1 | Z2 == V_ALL
    assert (Z1 & Z2).is_empty()
    assert Z1.complement() == Z2
    assert Z1 ^ Z1 == EMPTY
    assert len(V_ALL) == 12 and len(W[3]) == 2
    assert W[1].issubset(Z1) and not W[2].issubset(Z1)
    assert (2, "-") in Z2 and (2, "-") not in Z1
    assert HalfSheetSet.of((1, "+")).full_sheets() is None
    assert Z1.full_sheets() == [1, 3, 5]
    assert Z1.name == "Z1" and HalfSheetSet.of((4, "-")).name == "{S4-}"
    with pytest.raises(ValueError):
        HalfSheetSet(1 << 12)


def test_regions():
    assert region_membership([0.0, 0.0, 0.0], Region.ball(1.0))
    assert region_membership([0.0, 2.0, 0.0], Region.halfspace("+"))
    assert not region_membership([0.0, -2.0, 0.0], Region.halfspace("+"))
    from curvdecomp.exact import ray

    for k in (1, 2, 3):
        p = 2.0 * ray(k).to_array()
        assert region_membership(p, Region.cone(k))
        assert not region_membership(p, Region.planar())
        assert region_membership(p, Region.cone(k) & Region.ball(3.0))
    assert region_membership([0.0, 1.0, 0.0], Region.planar())
    with pytest.raises(ValueError):
        region_membership([0.0, 0.0, 0.0], Region.cone(1))
    with pytest.raises(ValueError):
        region_membership([0.0, 0.0, 0.0], Region.planar() & Region.ball(1.0))


def brute_force_area(R, bump, n=1200):
    """Midpoint rule in (x1, x2) over the chart window, keeping |x| < R."""
    g = GraphFunction(bump)
    h1, h2 = R / n, 2 * R / (2 * n)
    x1 = (np.arange(n) + 0.5) * h1
    total = 0.0
    for chunk in np.array_split(np.arange(2 * n), 8):
        x2 = -R + (chunk + 0.5) * h2
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        z = g.value(X1, X2)
        gr = g.grad(X1, X2)
        inside = X1**2 + X2**2 + z**2 < R**2
        total += np.sum(np.sqrt(1 + np.sum(gr**2, -1)) * inside) * h1 * h2
    return total


@pytest.mark.parametrize("bump", ["quintic-plateau", "alt"])
def test_sheet_area_in_ball_matches_brute_force(bump):
    b = get_bump(bump)
    area = integrate_sheet(1, lambda s: np.ones(len(s.w)), 1.5, QuadratureGrid(3), b)
    assert area == pytest.approx(brute_force_area(1.5, b), rel=1e-3)
    # all six sheets are congruent
    for i in range(2, 7):
        assert integrate_sheet(i, lambda s: np.ones(len(s.w)), 1.5, QuadratureGrid(3), b) == pytest.approx(area, rel=1e-12)


def test_area_scales_quadratically():
    f = lambda s: np.ones(len(s.w))  # noqa: E731
    a1 = integrate_sheet(1, f, 1.0, QuadratureGrid(2))
    a3 = integrate_sheet(1, f, 3.0, QuadratureGrid(2))
    assert a3 == pytest.approx(9 * a1, rel=1e-12)


@pytest.mark.parametrize("bump", ["quintic-plateau", "alt"])
def test_hess_mass_against_slope_integral(bump):
    # int_{|x| < R} |D^2 g| dx = (2R/sqrt3) int |bump'(s)| sqrt(1 + s^2) ds in chart polar form
    b = get_bump(bump)
    t, w = np.polynomial.legendre.leggauss(40)
    a, c = b.breakpoints
    s = a + (c - a) * (t + 1) / 2
    oracle = 2 * np.sum(w * (c - a) / 2 * np.abs(b.deriv(s)) * np.sqrt(1 + s * s)) * 2 / SQRT3
    # the grid omits a disk of radius R * 2**-20 at the origin
    for R in (0.5, 2.0):
        assert hess_mass(R, grid=QuadratureGrid(3), bump=b) == pytest.approx(R * oracle, rel=1e-6)


def test_hess_mass_refinement_guard():
    with pytest.raises(NonConvergence):
        integrate_sheet(1, lambda s: np.exp(-np.sum(s.x**2, 1) * 50), 1.0, QuadratureGrid(1, order=1), check_tol=0.0)


def test_line_integral_is_exact_for_polynomials():
    grid = QuadratureGrid(1)
    lo = 2.0**-grid.n_annuli  # innermost radius, as a fraction of the outer one
    val = integrate_line("L+", lambda p: p[:, 1] ** 2, 2.0, grid)
    assert val == pytest.approx(8.0 / 3.0 * (1 - lo**3), rel=1e-13)
    val = integrate_line("T2", lambda p: np.linalg.norm(p, axis=1), 3.0, grid)
    assert val == pytest.approx(4.5 * (1 - lo**2), rel=1e-13)


@pytest.mark.parametrize("i", range(1, 7))
def test_samples_match_exact_planes_and_half_labels(i):
    b = DEFAULT_BUMP
    for smp in sheet_samples(i, 2.0, QuadratureGrid(1), b):
        assert np.all(np.sign(smp.x[:, 1]) == smp.half)
        flat = np.abs(smp.chart[:, 1]) > b.outer * smp.chart[:, 0] * (1 + 1e-12)
        for s, sgn in (("+", 1.0), ("-", -1.0)):
            sel = flat & (smp.half == sgn)
            P = plane_projection(i, s).to_array()
            assert np.allclose(smp.T[sel], P, atol=1e-14)
            assert np.all(smp.A[sel] == 0.0)


def test_mesh_heights_on_planar_wedges(tmp_path):
    verts = export_obj(tmp_path / "m.obj", 2.0, 8)
    text = (tmp_path / "m.obj").read_text()
    assert [ln for ln in text.splitlines() if ln.startswith("o ")] == [f"o sheet_{i}" for i in range(1, 7)]
    v = verts[1]
    wedge = np.abs(v[:, 1]) >= DEFAULT_BUMP.outer * v[:, 0]
    assert np.allclose(v[wedge, 2], np.sign(v[wedge, 1]) * v[wedge, 0] / SQRT3)
    assert np.all(v[v[:, 0] == 0, 2] == 0)
    _, faces = sheet_mesh(2, 1.0, 4)
    assert faces.shape == (2 * 4 * 8, 3)
    with pytest.raises(ValueError):
        sheet_mesh(1, 0.0)
