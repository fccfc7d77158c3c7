import numpy as np
import pytest

from curvdecomp.exact import conormal, distinct_planes, plane_projection
from curvdecomp.model import EMPTY, V_ALL, W, Z1, Z2, HalfSheetSet, QuadratureGrid
from curvdecomp.decomposition import boundary_signature
from curvdecomp.weak import (
    SupportTooWide,
    affine,
    battery,
    boundary_closed_form,
    boundary_flux,
    chordal_distance,
    curvature_residual,
    cutoff,
    cutoff_study,
    detection_fields,
    distributional_boundary,
    field_battery,
    make_test_function,
    planar_profile,
)

GRID3 = QuadratureGrid(3)


def random_planes(rng, n):
    out = []
    for _ in range(n):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        out.append(q[:, :2] @ q[:, :2].T)
    return np.array(out)


@pytest.mark.parametrize("phi", battery() + [planar_profile(), make_test_function(None, plane_projection(1, "+"), 0.5)], ids=lambda p: p.name)
def test_test_function_gradients_by_differences(phi):
    rng = np.random.default_rng(7)
    x = rng.uniform(-2, 2, size=(40, 3))
    x[:, 1] += 1.5
    P = random_planes(rng, 40)
    P[:5] = plane_projection(1, "+").to_array()
    h = 1e-6
    gx = phi.grad_x(x, P)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd = (phi.value(x + e, P) - phi.value(x - e, P)) / (2 * h)
        assert np.allclose(gx[:, k], fd, atol=1e-6)
    gP = phi.grad_P(x, P)
    for j in range(3):
        for k in range(3):
            E = np.zeros((3, 3))
            E[j, k] = h
            fd = (phi.value(x, P + E) - phi.value(x, P - E)) / (2 * h)
            assert np.allclose(gP[:, j, k], fd, atol=1e-6)


def test_cutoff_profile():
    c = cutoff(0.3)
    x = np.array([[0.1, 0, 0], [0.0, 0.3, 0.0], [0.0, 0.0, 0.61], [0.5, 0.0, 0.0]])
    v = c.value(x, None)
    assert np.allclose(v[:3], [1, 1, 0]) and 0 < v[3] < 1
    r = np.linspace(0.3, 0.6, 1001)
    pts = np.stack([r, 0 * r, 0 * r], 1)
    assert np.abs(c.grad_x(pts, None)).max() <= 1.875 / 0.3 + 1e-9


def test_plane_bump_support_guard():
    P = plane_projection(1, "+")
    d = min(chordal_distance(P, Q) for Q in distinct_planes() if Q != P)
    assert d == pytest.approx(np.sqrt(1.5))
    make_test_function(None, P, 0.6)
    with pytest.raises(SupportTooWide):
        make_test_function(None, P, 0.62)


def test_planar_profile_integrates_to_one_on_the_axis():
    phi = planar_profile()
    t, w = np.polynomial.legendre.leggauss(30)
    y = 2 + t
    pts = np.stack([0 * y, y, 0 * y], 1)
    assert np.sum(w * phi.value(pts, None)) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("i", [1, 4])
def test_sheet_boundary_level3(i):
    for phi in battery()[:3]:
        b = curvature_residual(W[i], phi, GRID3)
        c = boundary_closed_form(W[i], phi, GRID3)
        assert np.linalg.norm(b - c) <= 2e-3 * max(1.0, np.linalg.norm(c))


def test_closed_form_requires_full_sheets_and_bounded_support():
    with pytest.raises(ValueError):
        boundary_closed_form(HalfSheetSet.of((1, "+")), battery()[0])
    with pytest.raises(ValueError):
        curvature_residual(W[1], affine(1.0, (0.0, 0.0, 0.0)))


def test_planar_support_function_on_Z1():
    # only the sheet-1 half on L+ has plane P_1^+, and the profile integrates to 1 there
    nu = conormal(1, "+").to_array()
    phi = make_test_function(None, plane_projection(1, "+"), 0.5)
    assert np.allclose(boundary_closed_form(Z1, phi, GRID3), -nu, atol=1e-12)
    assert np.allclose(curvature_residual(Z1, phi, GRID3), -nu, atol=1e-3)


def test_distributional_boundary_of_single_half_sheets():
    Y = field_battery()[1]
    for half in ((3, "-"), (6, "+")):
        sel = HalfSheetSet.of(half)
        assert distributional_boundary(sel, Y, GRID3) == pytest.approx(boundary_flux(sel, Y, GRID3), rel=1e-3, abs=1e-9)


def test_detection_separates_boundary_free_sets():
    tol = 1e-3
    for sel in (EMPTY, Z1, Z2, V_ALL):
        for Y in field_battery():
            assert abs(distributional_boundary(sel, Y, GRID3)) <= tol * 1e-3
    rng = np.random.default_rng(11)
    free = {0, Z1.mask, Z2.mask, V_ALL.mask}
    masks = [m for m in rng.permutation(4096)[:40].tolist() if m not in free][:10]
    probes = detection_fields()
    for m in masks:
        sel = HalfSheetSet(m)
        assert not boundary_signature(sel).is_zero()
        vals = [distributional_boundary(sel, Y, GRID3) for Y in probes]
        assert max(map(abs, vals)) > 10 * tol
        for Y, v in zip(probes, vals):
            assert v == pytest.approx(boundary_flux(sel, Y, GRID3), rel=1e-3, abs=1e-6)


def test_cutoff_study_shape_and_validation():
    rows = cutoff_study(W[1], battery()[-1], [0.4, 0.2], QuadratureGrid(2))
    assert set(rows[0]) == {"eps", "B_norm", "bound", "mass_2eps", "A_mass_eps"}
    assert rows[1]["B_norm"] < rows[0]["B_norm"] <= rows[0]["bound"]
    with pytest.raises(ValueError):
        cutoff_study(W[1], battery()[-1], [0.2, 0.4])
