"""Algebras by structure constants, modules, tensor products over the algebra."""

import pytest

from ncjet.linalg import Mat, SpanBuilder, ZERO, kron, rank, rat, vec
from ncjet.algebra import (
    Algebra,
    Bimodule,
    BimoduleMap,
    functions_on_points,
    matrix_algebra,
    mat_from_flat,
    module_closure,
    quaternion_algebra,
    regular_bimodule,
    solve_module_maps,
    tensor_bimodule,
    validate_algebra,
)


# --- validation ----------------------------------------------------------------

def test_quaternions_validate():
    assert validate_algebra(quaternion_algebra()) == []


def test_one_dimensional_algebra_validates():
    a = Algebra(1, ["1"], [[[1]]], [1])
    assert validate_algebra(a) == []


def test_perturbed_structure_constant_names_associativity():
    a = quaternion_algebra()
    mult = [[list(col) for col in row] for row in a.mult]
    mult[1][2][3] = rat(2)  # break i*j = k by scaling one entry
    bad = Algebra(4, a.basis_names, mult, a.unit)
    problems = validate_algebra(bad)
    assert problems
    assert any("associativity" in p for p in problems)


def test_defining_relations_of_quaternions():
    a = quaternion_algebra()
    i, j, k = a.basis_vector(1), a.basis_vector(2), a.basis_vector(3)
    assert a.mul(i, j) == k
    assert a.mul(k, k) == [rat(-1), ZERO, ZERO, ZERO]
    assert a.mul(k, i) == j
    assert a.mul(j, k) == i


def test_functions_on_points():
    a = functions_on_points(2)
    e1, e2 = a.basis_vector(0), a.basis_vector(1)
    assert a.mul(e1, e2) == [ZERO, ZERO]
    assert a.mul(e1, e1) == e1
    assert a.unit == vec([1, 1])
    assert validate_algebra(a) == []
    with pytest.raises(ValueError):
        functions_on_points(0)


def test_matrix_algebra_units():
    a = matrix_algebra(2)
    assert validate_algebra(a) == []
    e12, e21 = a.basis_vector(1), a.basis_vector(2)
    assert a.mul(e12, e21) == a.basis_vector(0)  # E12 E21 = E11
    assert a.mul(e21, e12) == a.basis_vector(3)


def test_regular_bimodule_axioms():
    for alg in (quaternion_algebra(), functions_on_points(3), matrix_algebra(2)):
        assert regular_bimodule(alg).check_bimodule() == []


def test_bimodule_map_rejects_wrong_linearity():
    alg = quaternion_algebra()
    reg = regular_bimodule(alg)
    # right multiplication by i is left-linear but not right-linear
    rmat = Mat.from_rows(
        [alg.mul(alg.basis_vector(t), alg.basis_vector(1)) for t in range(4)], 4
    ).transpose()
    BimoduleMap(reg, reg, rmat, "left")
    with pytest.raises(ValueError):
        BimoduleMap(reg, reg, rmat, "bilinear")


# --- tensor products over the algebra ---------------------------------------------

def brute_tensor_dim(m, n):
    """Oracle: rank of the balancing-relation span, subtracted from the plain dim."""
    alg = m.algebra
    sb = SpanBuilder(m.dim * n.dim)
    for a in range(alg.dim):
        for x in range(m.dim):
            rx = m.right[a].col(x)
            for y in range(n.dim):
                ly = n.left[a].col(y)
                genv = [ZERO] * (m.dim * n.dim)
                for mm, v in enumerate(rx):
                    genv[mm * n.dim + y] += v
                for nn, w in enumerate(ly):
                    genv[x * n.dim + nn] -= w
                sb.add(genv)
    return m.dim * n.dim - sb.dim


def test_tensor_of_one_forms_over_quaternions_has_dim_16(quat):
    om1 = quat.calc.omega1
    mod, ts = tensor_bimodule(om1, om1)
    assert mod.dim == 16
    assert ts.proj.rows == 16
    assert brute_tensor_dim(om1, om1) == 16
    assert mod.check_bimodule() == []


def test_algebra_tensor_module_is_module(quat):
    reg = quat.base
    mod, ts = tensor_bimodule(reg, reg)
    assert mod.dim == reg.dim
    # the induced map a (x) b -> ab is an isomorphism here
    assert rank(ts.proj) == reg.dim


def test_tensor_with_zero_module(quat):
    alg = quat.calc.algebra
    zero = Bimodule(alg, 0, [Mat.zeros(0, 0)] * 4, [Mat.zeros(0, 0)] * 4, "0")
    mod, _ = tensor_bimodule(quat.base, zero)
    assert mod.dim == 0


def test_tensor_functorial_on_composable_maps(quat):
    # f (x) g descends when f is right-linear and g is left-linear; on those
    # representatives the induced maps compose functorially.
    alg = quat.calc.algebra
    reg = quat.base
    om1 = quat.calc.omega1
    f1, f2 = alg.lmat[1], alg.lmat[2]          # left multiplications: right-linear
    g1, g2 = om1.right[1], om1.right[2]        # right actions: left-linear
    _, ts = tensor_bimodule(reg, om1)

    def induced(f, g):
        return ts.proj * kron(f, g) * ts.sec

    assert induced(f2 * f1, g2 * g1) == induced(f2, g2) * induced(f1, g1)
    assert induced(f1 * f2, g1 * g2) == induced(f1, g1) * induced(f2, g2)


# --- closures -------------------------------------------------------------------------

def test_closure_of_basis_is_everything(quat):
    reg = quat.base
    full = module_closure(reg, [reg.algebra.basis_vector(t) for t in range(4)], use_right=True)
    assert full.dim == 4


def test_closure_of_nothing_is_zero(quat):
    assert module_closure(quat.base, []).dim == 0


def test_closure_of_antisymmetric_frame_tensor_has_dim_4(quat):
    calc = quat.calc
    om11, ts = tensor_bimodule(calc.omega1, calc.omega1)
    di = vec([1, 0, 0, 0, 0, 0, 0, 0])
    dj = vec([0, 0, 0, 0, 1, 0, 0, 0])
    g = [x - y for x, y in zip(ts.class_of(di, dj), ts.class_of(dj, di))]
    two_sided = module_closure(om11, [g], use_right=True)
    left_only = module_closure(om11, [g])
    assert two_sided.dim == 4
    # the left span already equals the two-sided span here
    assert left_only == two_sided


# --- linear map solving -----------------------------------------------------------------

def test_left_linear_endomorphisms_of_quaternions_are_right_multiplications(quat):
    reg = quat.base
    sol = solve_module_maps(reg, reg, "left")
    assert sol.dim == 4
    alg = reg.algebra
    for x in range(4):
        rmat = Mat.from_rows(
            [alg.mul(alg.basis_vector(t), alg.basis_vector(x)) for t in range(4)], 4
        ).transpose()
        flat = [v for row in rmat.data for v in row]
        diff = [a - b for a, b in zip(flat, sol.particular)]
        assert sol.direction.contains(diff)


def test_identity_solves_homogeneous_systems(quat):
    reg = quat.base
    sol = solve_module_maps(reg, reg, "bilinear")
    eye = [v for row in Mat.identity(4).data for v in row]
    diff = [a - b for a, b in zip(eye, sol.particular)]
    assert sol.direction.contains(diff)


def test_contradictory_constraints_are_empty(quat):
    reg = quat.base
    # demand X * I = I and X * I = 2I simultaneously
    sol = solve_module_maps(
        reg, reg, "k",
        compose_eq=[(Mat.identity(4), Mat.identity(4)),
                    (Mat.identity(4), Mat.identity(4).scale(2))],
    )
    assert sol.empty


def test_compose_eq_constraints_hold(quat):
    reg = quat.base
    target = reg.algebra.lmat[3]
    sol = solve_module_maps(reg, reg, "k", compose_eq=[(Mat.identity(4), target)])
    got = mat_from_flat(sol.particular, 4, 4)
    assert got == target
