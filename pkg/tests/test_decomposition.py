import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvdecomp.decomposition import (
    NotBoundaryFree,
    boundary_signature,
    classification_report,
    components,
    decompositions,
    enumerate_boundary_free,
    grassmann_boundary_class,
    half_signature,
    integer_signatures,
    is_indecomposable,
)
from curvdecomp.exact import ExactVec3, conormal, plane_projection
from curvdecomp.model import EMPTY, V_ALL, W, Z1, Z2, HalfSheetSet

masks = st.integers(0, 4095)


@given(masks, masks)
def test_signature_is_additive_over_disjoint_unions(a, b):
    A, B = HalfSheetSet(a), HalfSheetSet(b & ~a)
    assert boundary_signature(A | B) == boundary_signature(A) + boundary_signature(B)


@given(masks)
def test_integer_encoding_agrees_with_exact_arithmetic(m):
    bits = (m >> np.arange(12)) & 1
    row = bits @ integer_signatures()
    sig = boundary_signature(HalfSheetSet(m))
    flat = [c for v in sig.parts().values() for q in v.entries for c in (q.a, q.b)]
    assert [Fraction(int(r), 2) for r in row] == flat


def test_each_half_sheet_touches_one_half_line_and_one_ray():
    for i in range(1, 7):
        for s in "+-":
            nonzero = [k for k, v in half_signature(i, s).parts().items() if not v.is_zero()]
            assert nonzero == ["L" + s, f"T{(i + 1) // 2}"]


def test_boundary_free_sets_and_components():
    free = enumerate_boundary_free()
    assert free == [EMPTY, Z1, Z2, V_ALL]
    assert components(free) == [Z1, Z2]
    assert not is_indecomposable(V_ALL, free)
    assert [set(d) for d in decompositions()] == [{Z1, Z2}]


def test_exhaustive_reference_loop_agrees():
    brute = [m for m in range(4096) if boundary_signature(HalfSheetSet(m)).is_zero()]
    assert brute == [s.mask for s in enumerate_boundary_free()]


def test_grassmann_classes():
    assert grassmann_boundary_class(V_ALL) == {}
    assert grassmann_boundary_class(EMPTY) == {}
    for Z, sheets in ((Z1, (1, 3, 5)), (Z2, (2, 4, 6))):
        atoms = grassmann_boundary_class(Z)
        assert len(atoms) == 6
        assert sorted(c for c, _ in atoms) == ["L+"] * 3 + ["L-"] * 3
        for i in sheets:
            for s in "+-":
                assert atoms[("L" + s, plane_projection(i, s))] == conormal(i, s)


def test_grouping_by_plane_alone_would_hide_the_boundary():
    # nu_1^+ and nu_5^- share a plane but sit on the disjoint half-lines L+ and L-
    assert plane_projection(1, "+") == plane_projection(5, "-")
    assert (conormal(1, "+") + conormal(5, "-")).is_zero()
    by_plane = {}
    for i, s in Z1.halves():
        P = plane_projection(i, s)
        by_plane[P] = by_plane.get(P, ExactVec3.zero()) + conormal(i, s)
    assert all(v.is_zero() for v in by_plane.values())
    assert grassmann_boundary_class(Z1)


def test_class_rejects_sets_with_boundary():
    with pytest.raises(NotBoundaryFree):
        grassmann_boundary_class(W[1])


def test_report_is_json_and_deterministic():
    a = json.dumps(classification_report(), sort_keys=True)
    b = json.dumps(classification_report(), sort_keys=True)
    assert a == b
    rep = json.loads(a)
    assert rep["components"] == ["Z1", "Z2"] and rep["decompositions"] == [["Z1", "Z2"]]
    assert all(rep["checks"].values())
