"""Exact linear algebra kernel: canonical forms, kernels, affine solving.

Oracles are kept independent of the code paths they check: rank via minor
expansion, membership via explicit coordinate constraints, Kronecker
products elementwise.
"""

import random

import pytest

from ncjet.linalg import (
    Mat,
    SpanBuilder,
    Subspace,
    ZERO,
    ONE,
    inverse,
    intersect,
    kernel_of,
    kron,
    left_inverse,
    quotient_data,
    rank,
    rat,
    rat_str,
    right_inverse,
    rref,
    rref_pivots,
    solve_affine,
    span_of,
    vec,
)


# --- oracles -----------------------------------------------------------------

def det_minor_expansion(m: Mat):
    """Determinant by first-row minor expansion; oracle for small matrices."""
    n = m.rows
    if n == 0:
        return ONE
    if n == 1:
        return m.entry(0, 0)
    total = ZERO
    sign = ONE
    for j in range(n):
        a = m.entry(0, j)
        if a:
            minor = m.submatrix(range(1, n), [c for c in range(n) if c != j])
            total += sign * a * det_minor_expansion(minor)
        sign = -sign
    return total


def rank_by_minors(m: Mat):
    """Largest r with a nonvanishing r x r minor (exponential; <= 6x6 only)."""
    from itertools import combinations

    best = 0
    for r in range(1, min(m.rows, m.cols) + 1):
        found = False
        for rows in combinations(range(m.rows), r):
            for cols in combinations(range(m.cols), r):
                if det_minor_expansion(m.submatrix(rows, cols)):
                    found = True
                    break
            if found:
                break
        if found:
            best = r
    return best


def random_mat(rng, rows, cols, denom=3):
    return Mat(
        rows,
        cols,
        [[rat(rng.randint(-3, 3), rng.randint(1, denom)) for _ in range(cols)] for _ in range(rows)],
    )


# --- rref ---------------------------------------------------------------------

def test_rref_identity_fixed_point():
    m = Mat.identity(3)
    assert rref(m) == m


def test_rref_rank_one_forced():
    m = Mat.from_rows([[2, 4], [1, 2]])
    assert rref(m) == Mat.from_rows([[1, 2], [0, 0]])


def test_rref_preserves_rank_of_random_matrices():
    rng = random.Random(7)
    for _ in range(5):
        m = random_mat(rng, 6, 6)
        red, piv = rref_pivots(m)
        assert len(piv) == rank_by_minors(m)


def test_rref_pivot_columns_are_cleared():
    rng = random.Random(11)
    m = random_mat(rng, 5, 7)
    red, piv = rref_pivots(m)
    for r, p in enumerate(piv):
        col = red.col(p)
        assert col[r] == 1
        assert all(not x for i, x in enumerate(col) if i != r)


# --- kernels --------------------------------------------------------------------

def test_kernel_obvious():
    m = Mat.from_rows([[1, 1], [1, 1]])
    k = kernel_of(m)
    assert k.dim == 1
    assert k.contains(vec([1, -1]))


def test_kernel_of_invertible_is_zero():
    m = Mat.from_rows([[1, 2, 0, 0], [0, 1, 0, 3], [5, 0, 1, 0], [0, 0, 0, 1]])
    assert det_minor_expansion(m) != 0
    assert kernel_of(m).dim == 0


def test_rank_nullity_on_random_matrices():
    rng = random.Random(23)
    for _ in range(8):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        m = random_mat(rng, rows, cols)
        assert rank_by_minors(m) + kernel_of(m).dim == cols


def test_kernel_vectors_are_killed():
    rng = random.Random(5)
    m = random_mat(rng, 4, 6)
    for row in kernel_of(m).basis.data:
        assert all(not x for x in m.apply(list(row)))


# --- affine solving ---------------------------------------------------------------

def test_solve_affine_identity():
    t = vec([3, rat(1, 2), -2])
    sol = solve_affine(Mat.identity(3), t)
    assert not sol.empty
    assert sol.particular == t
    assert sol.dim == 0


def test_solve_affine_zero_map():
    sol = solve_affine(Mat.zeros(2, 3), [0, 0])
    assert sol.dim == 3
    assert sol.particular == [ZERO] * 3


def test_solve_affine_underdetermined_by_substitution():
    m = Mat.from_rows([[1, 2, 1], [0, 1, -1]])
    t = vec([4, 1])
    sol = solve_affine(m, t)
    assert sol.dim == 1
    assert m.apply(sol.particular) == t
    for row in sol.direction.basis.data:
        assert all(not x for x in m.apply(list(row)))


def test_solve_affine_inconsistent():
    m = Mat.from_rows([[1, 1], [1, 1]])
    assert solve_affine(m, [0, 1]).empty


def test_solve_affine_deterministic_canonical_representative():
    m = Mat.from_rows([[1, 2, 3], [2, 4, 6]])
    s1 = solve_affine(m, [6, 12])
    s2 = solve_affine(m, [6, 12])
    # free variables zeroed: particular supported on the pivot column only
    assert s1.particular == vec([6, 0, 0])
    assert s1.particular == s2.particular
    assert s1.direction == s2.direction


# --- subspaces ----------------------------------------------------------------------

def membership_constraints(s: Subspace) -> Mat:
    """Oracle: matrix whose kernel is s, built from pivot-coordinate fitting."""
    return s.constraint_matrix()


def test_intersect_self():
    rng = random.Random(3)
    s = span_of([random_mat(rng, 1, 5).row(0) for _ in range(3)], 5)
    assert intersect(s, s) == s


def test_intersect_transverse_planes_is_line():
    a = span_of([vec([1, 0, 0]), vec([0, 1, 0])], 3)
    b = span_of([vec([0, 1, 1]), vec([1, 0, 1])], 3)
    inter = intersect(a, b)
    assert inter.dim == 1
    # oracle: kernel of stacked membership constraints
    stacked = membership_constraints(a).vstack(membership_constraints(b))
    assert inter == kernel_of(stacked)


def test_intersect_with_zero():
    a = span_of([vec([1, 2, 3])], 3)
    assert intersect(a, Subspace.zero(3)).dim == 0


def test_intersect_matches_constraint_oracle_randomly():
    rng = random.Random(91)
    for _ in range(5):
        a = span_of([random_mat(rng, 1, 6).row(0) for _ in range(3)], 6)
        b = span_of([random_mat(rng, 1, 6).row(0) for _ in range(4)], 6)
        stacked = membership_constraints(a).vstack(membership_constraints(b))
        assert intersect(a, b) == kernel_of(stacked)


def test_canonical_representation_of_equal_subspaces():
    base = [vec([1, 2, 0]), vec([0, 1, 1])]
    s1 = span_of(base, 3)
    s2 = span_of([vec_combine(base, [2, 3]), vec_combine(base, [1, -1])], 3)
    assert s1 == s2
    assert s1.basis == s2.basis


def vec_combine(rows, coeffs):
    out = [ZERO] * len(rows[0])
    for c, r in zip(coeffs, rows):
        out = [x + rat(c) * y for x, y in zip(out, r)]
    return out


# --- quotients ----------------------------------------------------------------------

def test_quotient_of_zero_subspace_is_identity():
    proj, sec = quotient_data(Subspace.zero(4))
    assert proj == Mat.identity(4)
    assert sec == Mat.identity(4)


def test_quotient_of_full_space_is_zero():
    proj, sec = quotient_data(Subspace.full(3))
    assert proj.rows == 0


def test_quotient_identities_on_line_in_q3():
    sub = span_of([vec([1, 2, 3])], 3)
    proj, sec = quotient_data(sub)
    assert proj.rows == 2
    assert proj * sec == Mat.identity(2)
    assert all(not x for x in proj.apply(vec([1, 2, 3])))


def test_quotient_kernel_is_exactly_the_subspace():
    rng = random.Random(17)
    sub = span_of([random_mat(rng, 1, 5).row(0) for _ in range(2)], 5)
    proj, _ = quotient_data(sub)
    assert kernel_of(proj) == sub


# --- kron -----------------------------------------------------------------------------

def test_kron_identities():
    assert kron(Mat.identity(2), Mat.identity(3)) == Mat.identity(6)
    assert kron(Mat.from_rows([[1, 2]]), Mat.zeros(2, 2)).is_zero()


def test_kron_on_pure_tensors_elementwise():
    rng = random.Random(29)
    a = random_mat(rng, 3, 2)
    b = random_mat(rng, 2, 3)
    v = [rat(rng.randint(-2, 2)) for _ in range(2)]
    w = [rat(rng.randint(-2, 2)) for _ in range(3)]
    tensor_in = [x * y for x in v for y in w]
    lhs = kron(a, b).apply(tensor_in)
    av, bw = a.apply(v), b.apply(w)
    rhs = [x * y for x in av for y in bw]
    assert lhs == rhs


# --- misc helpers -----------------------------------------------------------------------

def test_inverse_round_trip():
    rng = random.Random(31)
    while True:
        m = random_mat(rng, 4, 4)
        if det_minor_expansion(m):
            break
    assert m * inverse(m) == Mat.identity(4)


def test_one_sided_inverses():
    rng = random.Random(37)
    tall = random_mat(rng, 5, 3)
    while rank(tall) < 3:
        tall = random_mat(rng, 5, 3)
    assert left_inverse(tall) * tall == Mat.identity(3)
    wide = tall.transpose()
    assert wide * right_inverse(wide) == Mat.identity(3)


def test_span_builder_matches_dense_span():
    rng = random.Random(41)
    gens = [random_mat(rng, 1, 7).row(0) for _ in range(10)]
    sb = SpanBuilder(7)
    for gv in gens:
        sb.add(gv)
    dense = Subspace(7, gens)
    assert sb.subspace() == dense


def test_rat_str_round_trip():
    assert rat_str(rat(3, 6)) == "1/2"
    assert rat_str(rat(-8, 2)) == "-4"
    assert rat(rat_str(rat(22, 7))) == rat(22, 7)


def test_dimension_cap(monkeypatch):
    monkeypatch.setenv("NCJET_MAX_DIM", "8")
    with pytest.raises(ValueError):
        Mat.zeros(9, 2)
    monkeypatch.delenv("NCJET_MAX_DIM")
    Mat.zeros(9, 2)
