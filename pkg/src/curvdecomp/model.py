"""The six graph sheets, their halves, regions of space and quadrature on them.

Sheet 1 is the graph of ``g`` over the half-plane ``x1 > 0``.  The others are
images of sheet 1 under words in the rotation ``rho`` (angle 2*pi/3 about the
x2-axis) and the reflection ``sigma`` (x2 -> -x2).

Surface quadrature is polar in the chart.  Because ``g`` is 1-homogeneous,
``|(x, g(x))| = r * c(theta)`` with ``c`` depending only on the chart angle, so
the radial coordinate used here is the *ambient* distance to the origin: an
origin-centred ball is integrated exactly by stopping at its radius.  Radii are
split into dyadic annuli toward 0; angles are split at ``x2 = 0``, at the bump
breakpoints and at ``|x2| = x1`` so every cell sees a smooth integrand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .bump import DEFAULT_BUMP, Bump, GraphFunction
from .exact import REFL, ROT, SIGNS, ray
from .tangent import TangentFrame, frame_from_derivatives, pushforward_frame

COS_CONE = np.sqrt(3.0 / 7.0)

_R = ROT.to_array()
_S = REFL.to_array()
SHEET_WORDS = {1: "", 2: "s", 3: "r", 4: "rs", 5: "rr", 6: "rrs"}


def isometry(i: int) -> np.ndarray:
    """Matrix of the isometry word of sheet ``i`` (leftmost letter applied last)."""
    Q = np.eye(3)
    for letter in SHEET_WORDS[i]:
        Q = Q @ (_R if letter == "r" else _S)
    return Q


def chart_sign(i: int, s: str) -> int:
    """Sign of chart ``x2`` covering the half-sheet ``(i, s)``; ``sigma`` flips it."""
    base = 1 if s == "+" else -1
    return -base if SHEET_WORDS[i].endswith("s") else base


# ---------------------------------------------------------------- selections

_NAMES = [(i, s) for i in range(1, 7) for s in SIGNS]


@dataclass(frozen=True, order=True)
class HalfSheetSet:
    """A union of half-sheets with multiplicity one, stored as a 12-bit mask.

    Bit ``2*(i-1)`` is the half-sheet ``(i, '+')`` and bit ``2*(i-1)+1`` is
    ``(i, '-')``.
    """

    mask: int = 0

    def __post_init__(self):
        if not 0 <= self.mask < 1 << 12:
            raise ValueError(f"mask out of range: {self.mask}")

    @staticmethod
    def bit(i: int, s: str) -> int:
        return 1 << (2 * (i - 1) + (0 if s == "+" else 1))

    @classmethod
    def of(cls, *halves: tuple[int, str]) -> HalfSheetSet:
        m = 0
        for i, s in halves:
            m |= cls.bit(i, s)
        return cls(m)

    @classmethod
    def sheets(cls, *indices: int) -> HalfSheetSet:
        return cls.of(*[(i, s) for i in indices for s in SIGNS])

    def __contains__(self, half) -> bool:
        return bool(self.mask & self.bit(*half))

    def halves(self) -> list[tuple[int, str]]:
        return [h for h in _NAMES if h in self]

    def __or__(self, other):
        return HalfSheetSet(self.mask | other.mask)

    def __and__(self, other):
        return HalfSheetSet(self.mask & other.mask)

    def __xor__(self, other):
        return HalfSheetSet(self.mask ^ other.mask)

    def complement(self) -> HalfSheetSet:
        return HalfSheetSet(~self.mask & 0xFFF)

    def __len__(self):
        return bin(self.mask).count("1")

    def is_empty(self) -> bool:
        return self.mask == 0

    def issubset(self, other) -> bool:
        return self.mask & ~other.mask == 0

    def full_sheets(self) -> list[int] | None:
        """Sheet indices if every included sheet has both halves, else ``None``."""
        out = []
        for i in range(1, 7):
            plus, minus = (i, "+") in self, (i, "-") in self
            if plus != minus:
                return None
            if plus:
                out.append(i)
        return out

    @property
    def name(self) -> str:
        for label, value in NAMED_SETS.items():
            if value == self:
                return label
        return "{" + ",".join(f"S{i}{s}" for i, s in self.halves()) + "}"


EMPTY = HalfSheetSet(0)
V_ALL = HalfSheetSet(0xFFF)
Z1 = HalfSheetSet.sheets(1, 3, 5)
Z2 = HalfSheetSet.sheets(2, 4, 6)
W = {i: HalfSheetSet.sheets(i) for i in range(1, 7)}
NAMED_SETS = {"EMPTY": EMPTY, "V": V_ALL, "Z1": Z1, "Z2": Z2, **{f"W{i}": w for i, w in W.items()}}


# ---------------------------------------------------------------- regions


@dataclass(frozen=True)
class Region:
    """A subset of R^3: ``ball``, ``halfspace`` (sign of x2), ``cone`` ``C_k``,
    ``D`` (complement of the closed cones) or an ``intersection``."""

    kind: str
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    radius: float = 0.0
    sign: int = 1
    k: int = 1
    parts: tuple[Region, ...] = ()

    @classmethod
    def ball(cls, radius, center=(0.0, 0.0, 0.0)):
        return cls("ball", center=tuple(center), radius=float(radius))

    @classmethod
    def halfspace(cls, sign):
        return cls("halfspace", sign=1 if sign in (1, "+") else -1)

    @classmethod
    def cone(cls, k):
        return cls("cone", k=k)

    @classmethod
    def planar(cls):
        return cls("D")

    def __and__(self, other):
        return Region("intersection", parts=(self, other))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return np.linalg.norm(x - np.asarray(self.center), axis=-1) < self.radius
        if self.kind == "halfspace":
            return self.sign * x[..., 1] > 0
        if self.kind == "cone":
            return _cone_cos(x, self.k) > COS_CONE
        if self.kind == "D":
            cos = np.max([_cone_cos(x, k) for k in (1, 2, 3)], axis=0)
            return cos < COS_CONE
        if self.kind == "intersection":
            out = np.ones(x.shape[:-1], dtype=bool)
            for p in self.parts:
                out &= p.contains(x)
            return out
        raise ValueError(f"unknown region kind {self.kind!r}")


def _cone_cos(x, k):
    norm = np.linalg.norm(x, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return (x @ ray(k).to_array()) / norm


def region_membership(x, region: Region) -> bool:
    x = np.asarray(x, dtype=float)
    if _needs_direction(region) and not np.any(x):
        raise ValueError("cone membership is undefined at the origin")
    return bool(region.contains(x))


def _needs_direction(region: Region) -> bool:
    if region.kind in ("cone", "D"):
        return True
    return any(_needs_direction(p) for p in region.parts)


# ---------------------------------------------------------------- quadrature


class NonConvergence(RuntimeError):
    """Two successive refinement levels disagree by more than the tolerance."""


@dataclass(frozen=True)
class QuadratureGrid:
    """Nested polar grid.

    ``level`` doubles the angular and radial cell counts per step and adds four
    dyadic annuli toward the origin.  ``annuli`` and the cell counts may be
    overridden explicitly.
    """

    level: int = 4
    order: int = 8
    annuli: int | None = None
    angular_cells: int | None = None
    radial_cells: int | None = None

    def __post_init__(self):
        if self.level < 1 or self.order < 1:
            raise ValueError("level and order must be positive")

    @property
    def n_annuli(self) -> int:
        return self.annuli if self.annuli is not None else 8 + 4 * self.level

    @property
    def n_angular(self) -> int:
        return self.angular_cells if self.angular_cells is not None else 2**self.level

    @property
    def n_radial(self) -> int:
        """Cells in the outermost annulus; each inner annulus gets half as many (at least 2)."""
        return self.radial_cells if self.radial_cells is not None else 2 ** (self.level + 1)

    def refined(self) -> QuadratureGrid:
        return QuadratureGrid(self.level + 1, self.order)


@lru_cache(maxsize=None)
def _gauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def gauss_on_cells(edges, order: int):
    """Gauss-Legendre nodes and weights on consecutive cells ``[edges[j], edges[j+1]]``."""
    t, w = _gauss(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    return (lo + half * (t + 1.0)).ravel(), (half * w).ravel()


def split_cells(breaks, n: int) -> np.ndarray:
    """Subdivide each interval between sorted ``breaks`` into ``n`` equal cells."""
    breaks = np.asarray(breaks, dtype=float)
    parts = [np.linspace(a, b, n + 1)[:-1] for a, b in zip(breaks[:-1], breaks[1:])]
    return np.concatenate(parts + [breaks[-1:]])


def radial_edges(grid: QuadratureGrid, r_out: float = 1.0, r_in: float = 0.0) -> np.ndarray:
    """Dyadic annuli from ``r_out`` down to ``r_in`` (or ``r_out * 2**-n_annuli``).

    Annulus ``k`` (counted from the outside) is split into
    ``max(2, n_radial >> k)`` equal cells.
    """
    if r_in > 0.0:
        n = max(1, int(np.ceil(np.log2(r_out / r_in))))
        bounds = r_out * 2.0 ** -np.arange(n + 1)
        bounds[-1] = r_in
    else:
        bounds = r_out * 2.0 ** -np.arange(grid.n_annuli + 1)
    edges = [bounds[0]]
    for k, (hi, lo) in enumerate(zip(bounds[:-1], bounds[1:])):
        cells = max(2, grid.n_radial >> k)
        edges.extend(np.linspace(hi, lo, cells + 1)[1:])
    return np.array(edges[::-1])


def chart_angle_breaks(bump: Bump) -> np.ndarray:
    a, b = bump.breakpoints
    pos = [np.arctan(a), np.arctan(b), np.pi / 4, np.pi / 2]
    return np.array([-p for p in pos[::-1]] + [0.0] + pos)


def angular_rule(grid: QuadratureGrid, bump: Bump, lo=-np.pi / 2, hi=np.pi / 2):
    breaks = chart_angle_breaks(bump)
    breaks = np.unique(np.clip(np.concatenate([breaks, [lo, hi]]), lo, hi))
    return gauss_on_cells(split_cells(breaks, grid.n_angular), grid.order)


@dataclass(frozen=True)
class _AngularData:
    theta: np.ndarray
    w_theta: np.ndarray
    direction: np.ndarray  # unit ambient direction of the ray at chart angle theta
    c: np.ndarray  # ambient radius / chart radius
    jac: np.ndarray  # sqrt(1 + |grad g|^2)
    frame: TangentFrame  # at ambient radius 1


@lru_cache(maxsize=32)
def _angular_data(bump: Bump, grid: QuadratureGrid) -> _AngularData:
    gf = GraphFunction(bump)
    theta, w_theta = angular_rule(grid, bump)
    u1, u2 = np.cos(theta), np.sin(theta)
    gh = gf.value(u1, u2)
    c = np.sqrt(1.0 + gh * gh)
    grad = gf.grad(u1, u2)
    hess = gf.hess(u1, u2)
    # chart radius 1/c maps to ambient radius 1; the Hessian scales like 1/r
    frame = frame_from_derivatives(grad, hess * c[:, None, None])
    direction = np.stack([u1, u2, gh], axis=-1) / c[:, None]
    jac = np.sqrt(1.0 + np.sum(grad * grad, axis=-1))
    return _AngularData(theta, w_theta, direction, c, jac, frame)


@dataclass
class SheetSample:
    """Quadrature nodes on one sheet: positions, tangent data and weights."""

    sheet: int
    x: np.ndarray
    T: np.ndarray
    A: np.ndarray
    H: np.ndarray
    w: np.ndarray
    half: np.ndarray  # +1 / -1: which half-sheet (sign of ambient x2)
    chart: np.ndarray = field(repr=False, default=None)


def sheet_samples(
    i: int,
    radius: float,
    grid: QuadratureGrid = QuadratureGrid(),
    bump: Bump = DEFAULT_BUMP,
    halves=SIGNS,
    r_in: float = 0.0,
    block: int = 64,
) -> Iterator[SheetSample]:
    """Yield quadrature nodes of sheet ``i`` inside the ambient ball ``B(0, radius)``."""
    ang = _angular_data(bump, grid)
    Q = isometry(i)
    fr = pushforward_frame(Q, ang.frame)
    direction = ang.direction @ Q.T
    chart_sgn = np.sign(ang.theta)
    half = chart_sgn * (-1.0 if SHEET_WORDS[i].endswith("s") else 1.0)
    keep = np.zeros_like(half, dtype=bool)
    for s in halves:
        keep |= half == (1.0 if s == "+" else -1.0)
    if not keep.any():
        return
    idx = np.nonzero(keep)[0]
    rho, w_rho = gauss_on_cells(radial_edges(grid, radius, r_in), grid.order)
    base_w = (ang.w_theta * ang.jac / ang.c**2)[idx]
    nt = idx.size
    for start in range(0, rho.size, block):
        rb, wb = rho[start : start + block], w_rho[start : start + block]
        nr = rb.size
        x = (rb[:, None, None] * direction[idx][None, :, :]).reshape(-1, 3)
        scale = (1.0 / rb)[:, None]
        T = np.broadcast_to(fr.T[idx], (nr, nt, 3, 3)).reshape(-1, 3, 3)
        A = (fr.A[idx][None] * scale[..., None, None, None]).reshape(-1, 3, 3, 3)
        H = (fr.H[idx][None] * scale[..., None]).reshape(-1, 3)
        w = ((rb * wb)[:, None] * base_w[None, :]).ravel()
        hv = np.broadcast_to(half[idx], (nr, nt)).ravel()
        chart = (rb[:, None, None] / ang.c[idx][None, :, None]) * np.stack(
            [np.cos(ang.theta[idx]), np.sin(ang.theta[idx])], -1
        )[None]
        yield SheetSample(i, x, T, A, H, w, hv, chart.reshape(-1, 2))


def integrate_sheet(
    i: int,
    integrand: Callable[[SheetSample], np.ndarray],
    radius: float,
    grid: QuadratureGrid = QuadratureGrid(),
    bump: Bump = DEFAULT_BUMP,
    region: Region | None = None,
    halves=SIGNS,
    r_in: float = 0.0,
    check_tol: float | None = None,
):
    """Integrate ``integrand`` against the area measure of sheet ``i``.

    ``radius`` must contain the support of the integrand (or the region of
    interest).  The integrand may return shape ``(N,)`` or ``(N, k)``.  With
    ``check_tol`` the integral is repeated on the refined grid and
    :class:`NonConvergence` is raised if the two differ by more than
    ``check_tol`` (relative, floor 1).
    """
    total = 0.0
    for smp in sheet_samples(i, radius, grid, bump, halves, r_in):
        vals = np.asarray(integrand(smp), dtype=float)
        w = smp.w if region is None else smp.w * region.contains(smp.x)
        total = total + np.tensordot(w, vals, axes=(0, 0))
    if check_tol is not None:
        fine = integrate_sheet(i, integrand, radius, grid.refined(), bump, region, halves, r_in)
        delta = np.max(np.abs(np.asarray(fine) - total))
        if delta > check_tol * max(1.0, float(np.max(np.abs(fine)))):
            raise NonConvergence(f"sheet {i}: refinement changed the integral by {delta:.3g}")
        return fine
    return total


CURVES = ("L+", "L-", "T1", "T2", "T3")


def curve_direction(curve: str) -> np.ndarray:
    if curve == "L+":
        return np.array([0.0, 1.0, 0.0])
    if curve == "L-":
        return np.array([0.0, -1.0, 0.0])
    if curve in ("T1", "T2", "T3"):
        return ray(int(curve[1])).to_array()
    raise ValueError(f"unknown curve {curve!r}")


def integrate_line(curve: str, integrand: Callable[[np.ndarray], np.ndarray], radius: float, grid=QuadratureGrid()):
    """Integrate over the half-line ``{lam * dir : 0 < lam < radius}`` with arc length."""
    lam, w = gauss_on_cells(radial_edges(grid, radius), grid.order)
    pts = lam[:, None] * curve_direction(curve)[None, :]
    vals = np.asarray(integrand(pts), dtype=float)
    return np.tensordot(w, vals, axes=(0, 0))


def chart_polar_integral(func, r_in, r_out, grid=QuadratureGrid(), bump=DEFAULT_BUMP, theta_lo=-np.pi / 2, theta_hi=np.pi / 2):
    """Integrate ``func(x1, x2)`` over a chart annulus/sector ``r_in < r < r_out`` (plain Lebesgue measure)."""
    theta, wt = angular_rule(grid, bump, theta_lo, theta_hi)
    r, wr = gauss_on_cells(radial_edges(grid, r_out, r_in), grid.order)
    x1 = r[:, None] * np.cos(theta)[None, :]
    x2 = r[:, None] * np.sin(theta)[None, :]
    vals = func(x1, x2)
    return float(np.sum(vals * (r * wr)[:, None] * wt[None, :]))


def hess_mass(r_out, r_in=0.0, grid=QuadratureGrid(), bump=DEFAULT_BUMP, theta_lo=-np.pi / 2, theta_hi=np.pi / 2, tol=0.01):
    """``int |D^2 g|`` over a chart window, checked against one refinement level.

    Raises :class:`NonConvergence` if the two levels differ by more than
    ``tol`` relative.
    """
    gf = GraphFunction(bump)
    vals = [
        chart_polar_integral(gf.hess_norm, r_in, r_out, gr, bump, theta_lo, theta_hi)
        for gr in (grid, grid.refined())
    ]
    if abs(vals[1] - vals[0]) > tol * max(abs(vals[1]), 1e-300) and vals[1] != 0.0:
        raise NonConvergence(f"hess_mass: {vals[0]!r} vs {vals[1]!r}")
    return vals[1]


# ---------------------------------------------------------------- points


def sheet_point(i: int, chart, bump: Bump = DEFAULT_BUMP) -> tuple[np.ndarray, TangentFrame]:
    """Ambient position and tangent frame of sheet ``i`` at chart point ``(x1, x2)``."""
    x1, x2 = (float(c) for c in chart)
    gf = GraphFunction(bump)
    pos = np.array([x1, x2, float(gf.value(x1, x2))])
    frame = frame_from_derivatives(gf.grad(x1, x2), gf.hess(x1, x2))
    Q = isometry(i)
    return Q @ pos, pushforward_frame(Q, frame)


# ---------------------------------------------------------------- mesh export


def sheet_mesh(i: int, window: float, n: int = 16, bump: Bump = DEFAULT_BUMP):
    """Vertices ``(V, 3)`` and triangles ``(F, 3)`` of sheet ``i`` over ``[0, w] x [-w, w]``."""
    if not window > 0 or n < 1:
        raise ValueError("mesh window must be positive with at least one cell")
    gf = GraphFunction(bump)
    x1, x2 = np.meshgrid(np.linspace(0.0, window, n + 1), np.linspace(-window, window, 2 * n + 1), indexing="ij")
    z = gf.extended_value(x1, x2)
    verts = np.stack([x1, x2, z], -1).reshape(-1, 3) @ isometry(i).T
    cols = 2 * n + 1
    faces = []
    for a in range(n):
        for b in range(2 * n):
            v00 = a * cols + b
            v01, v10, v11 = v00 + 1, v00 + cols, v00 + cols + 1
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    return verts, np.array(faces, dtype=int)


def export_obj(path, window: float, n: int = 16, bump: Bump = DEFAULT_BUMP) -> dict[int, np.ndarray]:
    """Write the six sheets as separate objects of one OBJ file."""
    meshes = {i: sheet_mesh(i, window, n, bump) for i in range(1, 7)}
    lines = ["# six graph sheets meeting along the x2-axis"]
    offset = 1
    for i, (verts, faces) in meshes.items():
        lines.append(f"o sheet_{i}")
        lines.extend(f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in verts)
        lines.extend(f"f {a + offset} {b + offset} {c + offset}" for a, b, c in faces)
        offset += len(verts)
    Path(path).write_text("\n".join(lines) + "\n")
    return {i: m[0] for i, m in meshes.items()}
