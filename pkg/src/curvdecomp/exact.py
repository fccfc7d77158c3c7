"""Exact arithmetic in Q(sqrt 3) and the conormal/plane tables of the six sheets.

Vectors of the ``eta`` family (conormals along the rays ``T_k``) share the
irrational factor ``1/sqrt 7``.  Rather than extend the field, the factor is
carried as a tag on :class:`ExactVec3`; vectors with different tags never add.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import sqrt

import numpy as np

INV_SQRT7 = "1/sqrt7"
_TAG_SQUARES = {None: Fraction(1), INV_SQRT7: Fraction(1, 7)}
_TAG_FLOATS = {None: 1.0, INV_SQRT7: 1.0 / sqrt(7.0)}


@dataclass(frozen=True)
class QSqrt3:
    """The number ``a + b*sqrt(3)`` with rational ``a``, ``b``."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @staticmethod
    def coerce(x) -> QSqrt3:
        if isinstance(x, QSqrt3):
            return x
        if isinstance(x, (int, Fraction)):
            return QSqrt3(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to QSqrt3")

    def __add__(self, other):
        try:
            o = QSqrt3.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt3(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QSqrt3(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-QSqrt3.coerce(other))

    def __rsub__(self, other):
        return QSqrt3.coerce(other) - self

    def __mul__(self, other):
        try:
            o = QSqrt3.coerce(other)
        except TypeError:
            return NotImplemented
        return QSqrt3(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conjugate(self) -> QSqrt3:
        return QSqrt3(self.a, -self.b)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 3 b^2``; zero only for the zero element."""
        return self.a * self.a - 3 * self.b * self.b

    def inverse(self) -> QSqrt3:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt 3)")
        return QSqrt3(self.a / n, -self.b / n)

    def __truediv__(self, other):
        return self * QSqrt3.coerce(other).inverse()

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            o = QSqrt3.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def sign(self) -> int:
        """Exact sign of ``a + b sqrt 3``."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sb == 0 or sa == sb:
            return sa or sb
        # opposite signs: compare a^2 with 3 b^2
        bigger_a = self.a * self.a > 3 * self.b * self.b
        return sa if bigger_a else sb

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __float__(self):
        return float(self.a) + float(self.b) * sqrt(3.0)

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt3"
        return f"{self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}*sqrt3"


ZERO = QSqrt3(0, 0)
ONE = QSqrt3(1, 0)
SQRT3 = QSqrt3(0, 1)
HALF = QSqrt3(Fraction(1, 2), 0)


@dataclass(frozen=True)
class ExactVec3:
    entries: tuple[QSqrt3, QSqrt3, QSqrt3]
    scale: str | None = None

    @classmethod
    def of(cls, x, y, z, scale=None) -> ExactVec3:
        return cls(tuple(QSqrt3.coerce(c) for c in (x, y, z)), scale)

    @classmethod
    def zero(cls, scale=None) -> ExactVec3:
        return cls((ZERO, ZERO, ZERO), scale)

    def _check_family(self, other: ExactVec3):
        if self.scale != other.scale:
            raise ValueError(f"cannot combine vectors scaled by {self.scale} and {other.scale}")

    def __add__(self, other: ExactVec3) -> ExactVec3:
        self._check_family(other)
        return ExactVec3(tuple(p + q for p, q in zip(self.entries, other.entries)), self.scale)

    def __neg__(self) -> ExactVec3:
        return ExactVec3(tuple(-p for p in self.entries), self.scale)

    def __sub__(self, other: ExactVec3) -> ExactVec3:
        return self + (-other)

    def scaled(self, c) -> ExactVec3:
        c = QSqrt3.coerce(c)
        return ExactVec3(tuple(c * p for p in self.entries), self.scale)

    def dot(self, other: ExactVec3) -> QSqrt3:
        self._check_family(other)
        raw = sum((p * q for p, q in zip(self.entries, other.entries)), ZERO)
        return raw * QSqrt3(_TAG_SQUARES[self.scale])

    def norm2(self) -> QSqrt3:
        return self.dot(self)

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.entries)

    def to_array(self) -> np.ndarray:
        return np.array([float(p) for p in self.entries]) * _TAG_FLOATS[self.scale]

    def as_strings(self) -> list[str]:
        vals = [str(p) for p in self.entries]
        return vals if self.scale is None else [f"({v})*{self.scale}" for v in vals]


@dataclass(frozen=True)
class ExactMat3:
    rows: tuple[tuple[QSqrt3, ...], ...]

    @classmethod
    def from_rows(cls, rows) -> ExactMat3:
        return cls(tuple(tuple(QSqrt3.coerce(c) for c in r) for r in rows))

    @classmethod
    def identity(cls) -> ExactMat3:
        return cls.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])

    @classmethod
    def outer(cls, u: ExactVec3, v: ExactVec3) -> ExactMat3:
        u._check_family(v)
        s = QSqrt3(_TAG_SQUARES[u.scale])
        return cls(tuple(tuple(s * p * q for q in v.entries) for p in u.entries))

    def __add__(self, other: ExactMat3) -> ExactMat3:
        return ExactMat3(tuple(tuple(p + q for p, q in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: ExactMat3) -> ExactMat3:
        return ExactMat3(tuple(tuple(p - q for p, q in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __matmul__(self, other):
        if isinstance(other, ExactVec3):
            out = tuple(sum((m * v for m, v in zip(r, other.entries)), ZERO) for r in self.rows)
            return ExactVec3(out, other.scale)
        cols = list(zip(*other.rows))
        return ExactMat3(
            tuple(tuple(sum((p * q for p, q in zip(r, c)), ZERO) for c in cols) for r in self.rows)
        )

    def transpose(self) -> ExactMat3:
        return ExactMat3(tuple(zip(*self.rows)))

    def trace(self) -> QSqrt3:
        return self.rows[0][0] + self.rows[1][1] + self.rows[2][2]

    def frobenius2(self) -> QSqrt3:
        return sum((p * p for r in self.rows for p in r), ZERO)

    def to_array(self) -> np.ndarray:
        return np.array([[float(p) for p in r] for r in self.rows])


# Rotation by 2*pi/3 about the x2-axis, taking the (x1, x3) angle 30 deg to 150 deg.
_C = QSqrt3(Fraction(-1, 2), 0)
_S = QSqrt3(0, Fraction(1, 2))
ROT = ExactMat3.from_rows([[_C, 0, -_S], [0, 1, 0], [_S, 0, _C]])
# Reflection across the x1x3-plane.
REFL = ExactMat3.from_rows([[1, 0, 0], [0, -1, 0], [0, 0, 1]])

E1 = ExactVec3.of(1, 0, 0)
E2 = ExactVec3.of(0, 1, 0)
E3 = ExactVec3.of(0, 0, 1)

SIGNS = ("+", "-")


def rot_apply(v: ExactVec3) -> ExactVec3:
    return ROT @ v


def refl_apply(v: ExactVec3) -> ExactVec3:
    return REFL @ v


def _check(i: int, s: str):
    if i not in range(1, 7) or s not in SIGNS:
        raise ValueError(f"bad conormal index ({i}, {s!r})")


@lru_cache(maxsize=None)
def conormal(i: int, s: str) -> ExactVec3:
    """Inward conormal of the half-sheet ``(i, s)`` along the half-line ``L^s``."""
    _check(i, s)
    sgn = 1 if s == "+" else -1
    if i == 1:
        return ExactVec3.of(SQRT3 * HALF, 0, HALF * sgn)
    if i == 2:
        return ExactVec3.of(SQRT3 * HALF, 0, HALF * -sgn)
    return rot_apply(conormal(i - 2, s))


@lru_cache(maxsize=None)
def eta(i: int, s: str) -> ExactVec3:
    """Inward conormal of the half-sheet ``(i, s)`` along the ray ``T_ceil(i/2)``."""
    _check(i, s)
    sgn = 1 if s == "+" else -1
    if i == 1:
        return ExactVec3.of(0, SQRT3 * sgn, 2 * sgn, scale=INV_SQRT7)
    if i == 2:
        return ExactVec3.of(0, SQRT3 * sgn, -2 * sgn, scale=INV_SQRT7)
    return rot_apply(eta(i - 2, s))


@lru_cache(maxsize=None)
def ray(k: int) -> ExactVec3:
    """Unit direction ``t_k`` of the ray ``T_k``."""
    if k not in (1, 2, 3):
        raise ValueError(f"bad ray index {k}")
    return E1 if k == 1 else rot_apply(ray(k - 1))


@lru_cache(maxsize=None)
def plane_projection(i: int, s: str) -> ExactMat3:
    """Orthogonal projection onto ``span{conormal(i, s), e2}``."""
    nu = conormal(i, s)
    return ExactMat3.outer(nu, nu) + ExactMat3.outer(E2, E2)


def all_planes() -> dict[tuple[int, str], ExactMat3]:
    return {(i, s): plane_projection(i, s) for i in range(1, 7) for s in SIGNS}


def distinct_planes() -> list[ExactMat3]:
    out: list[ExactMat3] = []
    for p in all_planes().values():
        if p not in out:
            out.append(p)
    return out


def opposite_index(i: int, s: str) -> int:
    """The ``j`` with ``conormal(i, s) + conormal(j, s) = 0``."""
    for j in range(1, 7):
        if (conormal(i, s) + conormal(j, s)).is_zero():
            return j
    raise AssertionError(f"no opposite conormal for ({i}, {s})")


class IdentityFailure(AssertionError):
    pass


# Pairs (i, j, sign) with opposite conormals and coinciding planes.
OPPOSITE_PAIRS = (
    (1, 6, "+"),
    (3, 2, "+"),
    (5, 4, "+"),
    (1, 4, "-"),
    (3, 6, "-"),
    (5, 2, "-"),
)


def verify_identities() -> dict[str, bool]:
    """Check every conormal/plane identity exactly.

    Raises :class:`IdentityFailure` naming the first identity that fails;
    otherwise returns ``{identity name: True}``.
    """
    checks: dict[str, bool] = {}

    def record(name, ok):
        if not ok:
            raise IdentityFailure(f"identity failed: {name}")
        checks[name] = True

    for i, j, s in OPPOSITE_PAIRS:
        record(f"nu_{i}^{s} + nu_{j}^{s} = 0", (conormal(i, s) + conormal(j, s)).is_zero())
        record(f"P_{i}^{s} = P_{j}^{s}", plane_projection(i, s) == plane_projection(j, s))
    for s in SIGNS:
        odd = conormal(1, s) + conormal(3, s) + conormal(5, s)
        even = conormal(2, s) + conormal(4, s) + conormal(6, s)
        record(f"nu_1^{s} + nu_3^{s} + nu_5^{s} = 0", odd.is_zero())
        record(f"nu_2^{s} + nu_4^{s} + nu_6^{s} = 0", even.is_zero())
    for i in range(1, 7):
        record(f"eta_{i}^+ + eta_{i}^- = 0", (eta(i, "+") + eta(i, "-")).is_zero())
        for s in SIGNS:
            record(f"|nu_{i}^{s}|^2 = 1", conormal(i, s).norm2() == 1)
            record(f"|eta_{i}^{s}|^2 = 1", eta(i, s).norm2() == 1)
            P = plane_projection(i, s)
            record(f"P_{i}^{s} idempotent symmetric trace 2", P @ P == P and P.transpose() == P and P.trace() == 2)
    for i in range(3, 7):
        for s in SIGNS:
            record(f"nu_{i}^{s} = rot(nu_{i - 2}^{s})", conormal(i, s) == rot_apply(conormal(i - 2, s)))
    return checks
