import numpy as np
import pytest

from matern_imspe import (
    DesignParseError,
    DimensionMismatchError,
    DomainError,
    SingularDesignError,
    assemble,
    load_design,
    matern_correlation,
    product_integral,
    single_integral,
)
from matern_imspe.imspe import Design
from matern_imspe.oracle import kink_spec, quad_product, quad_single


def write(tmp_path, text, name="design.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_single_point(tmp_path):
    d = load_design(write(tmp_path, "x1\n0.0\n"))
    assert (d.n, d.d) == (1, 1)
    assert d.points[0, 0] == 0.0


def test_load_four_by_two(tmp_path):
    d = load_design(write(tmp_path, "x1,x2\n-1,1\n0.5,0.25\n0,-0.75\n1e-3,0.9\n"))
    assert d.points.shape == (4, 2)
    assert d.points[3].tolist() == [1e-3, 0.9]  # row order preserved


def test_out_of_range_names_row_and_column(tmp_path):
    with pytest.raises(DesignParseError) as info:
        load_design(write(tmp_path, "x1,x2\n0.1,0.2\n0.3,1.5\n"))
    assert info.value.line == 3
    assert info.value.column == "x2"
    assert ":3:" in str(info.value) and "x2" in str(info.value)


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("a,b\n0,0\n", 1),
    ("x1,x3\n0,0\n", 1),
    ("x1,x2\n0.1\n", 2),
    ("x1,x2\n0.1,0.2,\n", 2),
    ("x1\n0.1\nabc\n", 3),
    ("x1\nnan\n", 2),
    ("x1\n", 2),
])
def test_malformed(tmp_path, text, line):
    with pytest.raises(DesignParseError) as info:
        load_design(write(tmp_path, text))
    assert info.value.line == line


def test_design_type():
    d = Design([[0.0], [0.5], [0.0]])
    assert d.duplicate_pairs() == [(0, 2)]
    with pytest.raises(ValueError):
        d.points[0, 0] = 1.0
    with pytest.raises(DomainError):
        Design([[2.0]])


def test_single_point_identity():
    m = assemble(2, [0.7], [[0.3]])
    assert m.imspe == pytest.approx(1 - product_integral(2, 0.7, 0.3, 0.3), rel=1e-15)
    assert m.C.tolist() == [[1.0]]


def test_matrix_entries():
    pts = np.array([[-0.5, 0.2], [0.5, -0.3], [0.1, 0.9]])
    th = [1.0, 2.0]
    m = assemble(1, th, pts)
    assert m.C[0, 1] == matern_correlation(1, 1.0, 1.0) * matern_correlation(1, 2.0, 0.5)
    assert m.R0[2] == single_integral(1, 1.0, 0.1) * single_integral(1, 2.0, 0.9)
    assert m.R[1, 2] == product_integral(1, 1.0, 0.5, 0.1) * product_integral(1, 2.0, -0.3, 0.9)
    assert np.array_equal(m.C, m.C.T) and np.array_equal(m.R, m.R.T)
    assert np.all(np.diag(m.C) == 1.0)
    assert np.all((m.R0 > 0) & (m.R0 <= 1)) and np.all((m.R > 0) & (m.R <= 1))
    assert 0 <= m.imspe < 1
    assert m.condition_estimate >= 1


def test_entries_against_oracle():
    pts = np.array([[-0.6, 0.1], [0.4, -0.8]])
    th = [0.3, 5.0]
    p = 3
    m = assemble(p, th, pts)
    for i in range(2):
        r0 = np.prod([quad_single(p, th[k], pts[i, k], kink_spec(p, th[k], (pts[i, k],), 128))
                      for k in range(2)])
        assert abs(m.R0[i] - r0) <= 1e-9 * r0
        for j in range(2):
            r = np.prod([quad_product(p, th[k], pts[i, k], pts[j, k],
                                      kink_spec(p, th[k], (pts[i, k], pts[j, k]), 128))
                         for k in range(2)])
            assert abs(m.R[i, j] - r) <= 1e-9 * r


def test_permutation_and_reflection_invariance():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n, d = rng.integers(2, 7), rng.integers(1, 4)
        pts = rng.uniform(-1, 1, size=(n, d))
        th = rng.uniform(0.5, 20, size=d)
        p = int(rng.integers(0, 5))
        base = assemble(p, th, pts).imspe
        perm = assemble(p, th, pts[rng.permutation(n)]).imspe
        refl = assemble(p, th, -pts).imspe
        assert perm == pytest.approx(base, rel=1e-12, abs=1e-15)
        assert refl == pytest.approx(base, rel=1e-12, abs=1e-15)


def test_more_points_lower_imspe():
    a = assemble(1, [3.0], [[0.0]]).imspe
    b = assemble(1, [3.0], [[-0.5], [0.5]]).imspe
    c = assemble(1, [3.0], [[-0.66], [0.0], [0.66]]).imspe
    assert a > b > c >= 0


def test_singular_small_theta():
    with pytest.raises(SingularDesignError) as info:
        assemble(1, [1e-20], [[-0.5], [0.5]])
    assert info.value.rcond < 1e-14


def test_duplicate_points():
    with pytest.raises(SingularDesignError) as info:
        assemble(1, [1.0], [[0.2], [0.2]])
    assert "duplicate" in str(info.value)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        assemble(1, [1.0], [[0.1, 0.2]])


def test_to_dict():
    m = assemble(1, [1.0, 2.0], [[0.1, 0.2], [-0.4, 0.3]])
    out = m.to_dict(1, [1.0, 2.0])
    assert set(out) == {"p", "theta", "n", "d", "imspe", "condition_estimate"}
    assert (out["n"], out["d"]) == (2, 2)
    full = m.to_dict(1, [1.0, 2.0], include_matrices=True)
    assert set(full["matrices"]) == {"C", "R0", "R"}


def test_permutation_invariance_is_exact():
    pts = np.array([[0.3, -0.1], [-0.7, 0.4], [0.9, 0.8], [-0.2, -0.9]])
    base = assemble(2, [4.0, 1.0], pts).imspe
    assert assemble(2, [4.0, 1.0], pts[[2, 0, 3, 1]]).imspe == base
    assert assemble(2, [4.0, 1.0], -pts[::-1]).imspe == base


def test_accuracy_against_high_precision_solve():
    import mpmath

    rng = np.random.default_rng(9)
    pts = rng.uniform(-1, 1, size=(6, 2))
    m = assemble(1, [2.0, 8.0], pts)
    with mpmath.workdps(50):
        C = mpmath.matrix(m.C.tolist())
        R = mpmath.matrix(m.R.tolist())
        trace = sum(mpmath.lu_solve(C, R.column(i))[i] for i in range(6))
        ref = float(1 - trace)
    assert abs(m.imspe - ref) <= 10 * m.condition_estimate * np.finfo(float).eps
