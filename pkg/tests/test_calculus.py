"""First-order calculi, the exterior tower, wedge products, twisted pairs."""

import itertools

import pytest

from ncjet.linalg import Mat, ZERO, kernel_of, rat
from ncjet.algebra import Algebra, functions_on_points, module_closure, tensor_bimodule
from ncjet.calculus import (
    CalculusError,
    build_calculus,
    twisted_pair,
    universal_calculus,
    validate_fodc,
)


def frame_form(calc, t):
    v = [ZERO] * calc.omega1.dim
    v[t * calc.algebra.dim] = rat(1)
    return v


# --- universal calculus ------------------------------------------------------------

def test_two_point_universal_one_forms():
    a = functions_on_points(2)
    # oracle: multiplication matrix is 2 x 4, full rank, so kernel has dim 2
    cols = []
    for i in range(2):
        for j in range(2):
            cols.append(a.mult[i][j])
    mult = Mat.from_rows(cols, 2).transpose()
    assert mult.rows == 2 and mult.cols == 4
    assert kernel_of(mult).dim == 2
    calc = universal_calculus(a)
    assert calc.omega1.dim == 2
    assert all(not x for x in calc.d[0].apply(a.unit))
    assert calc.relation_space.dim == 0


def test_rationals_have_no_universal_forms():
    calc = universal_calculus(Algebra(1, ["1"], [[[1]]], [1]), max_degree=1)
    assert calc.omega1.dim == 0


def test_universal_tower_is_tensor_algebra(matrix2):
    calc = matrix2.calc
    assert [calc.dim_omega(n) for n in range(4)] == [4, 12, 36, 108]
    assert calc.relation_space.dim == 0


# --- validation --------------------------------------------------------------------

def test_fodc_validator_names_broken_leibniz(quat):
    calc = quat.calc
    bad_d = calc.d[0] + Mat.from_rows(
        [[1 if (r, c) == (0, 0) else 0 for c in range(4)] for r in range(8)]
    )
    problems = validate_fodc(calc.algebra, calc.omega1, bad_d)
    assert any("Leibniz" in p for p in problems)


def test_build_rejects_invalid_calculus(quat):
    calc = quat.calc
    # zeroing d(k) breaks Leibniz on (i, k) while keeping d(1) = 0
    rows = [list(r) for r in calc.d[0].transpose().data]
    rows[3] = [ZERO] * 8
    bad_d = Mat.from_rows(rows, 8).transpose()
    with pytest.raises(CalculusError):
        build_calculus(calc.algebra, calc.omega1, bad_d, 2)


# --- quaternion tower ------------------------------------------------------------------

def test_quaternion_leibniz_on_products(quat):
    calc = quat.calc
    alg = calc.algebra
    i, j = alg.basis_vector(1), alg.basis_vector(2)
    # d(ij) = (di) j + i (dj) = dk
    lhs = calc.d[0].apply(alg.mul(i, j))
    rhs = [
        x + y
        for x, y in zip(
            calc.omega1.act_right(calc.d[0].apply(i), j),
            calc.omega1.act_left(i, calc.d[0].apply(j)),
        )
    ]
    assert lhs == rhs
    assert lhs == calc.d[0].apply(alg.basis_vector(3))


def test_quaternion_right_action_from_relation(quat):
    om1 = quat.calc.omega1
    di = frame_form(quat.calc, 0)
    i = quat.calc.algebra.basis_vector(1)
    assert om1.act_right(di, i) == [-x for x in om1.act_left(i, di)]


def test_d_squared_of_k_via_leibniz(quat):
    calc = quat.calc
    k = calc.algebra.basis_vector(3)
    dk = calc.d[0].apply(k)
    # (dk) k + k (dk) = d(k^2) = d(-1) = 0
    s = [
        x + y
        for x, y in zip(calc.omega1.act_right(dk, k), calc.omega1.act_left(k, dk))
    ]
    assert all(not x for x in s)


def test_quaternion_dims_and_degree_two_relation(quat):
    calc = quat.calc
    assert [calc.dim_omega(n) for n in range(4)] == [4, 8, 12, 16]
    # oracle: quotient of the 16-dim tensor square by the closure of the
    # differential of the degree-1 relations
    om11, ts = tensor_bimodule(calc.omega1, calc.omega1)
    gens = []
    for row in calc.relation_space.basis.data:
        plain = [ZERO] * 64
        for idx, c in enumerate(row):
            if c:
                i, j = divmod(idx, 4)
                dei = calc.d[0].apply(calc.algebra.basis_vector(i))
                dej = calc.d[0].apply(calc.algebra.basis_vector(j))
                for s, x in enumerate(dei):
                    for t, y in enumerate(dej):
                        plain[s * 8 + t] += c * x * y
        gens.append(ts.proj.apply(plain))
    closure = module_closure(om11, gens, use_right=True)
    assert closure.dim == 4
    assert 16 - closure.dim == calc.dim_omega(2)


def test_wedge_relation_and_kernel(quat):
    calc = quat.calc
    ts = calc.tensor_pq(1, 1)
    di, dj = frame_form(calc, 0), frame_form(calc, 1)
    w = calc.wedge_map(1, 1)
    assert w.apply(ts.class_of(di, dj)) == w.apply(ts.class_of(dj, di))
    assert kernel_of(w).dim == 4


def test_wedge_with_degree_zero_is_module_action(quat):
    calc = quat.calc
    w01 = calc.wedge_plain(0, 1)
    for a in range(4):
        for b in range(8):
            av = calc.algebra.basis_vector(a)
            bv = [ZERO] * 8
            bv[b] = rat(1)
            plain = [ZERO] * 32
            plain[a * 8 + b] = rat(1)
            assert w01.apply(plain) == calc.omega1.act_left(av, bv)
    w10 = calc.wedge_plain(1, 0)
    for b in range(8):
        for a in range(4):
            bv = [ZERO] * 8
            bv[b] = rat(1)
            plain = [ZERO] * 32
            plain[b * 4 + a] = rat(1)
            assert w10.apply(plain) == calc.omega1.act_right(bv, calc.algebra.basis_vector(a))


def test_wedge_associativity_on_plain_tensors(quat):
    calc = quat.calc
    from ncjet.linalg import kron

    w11 = calc.wedge_plain(1, 1)
    w21 = calc.wedge_plain(2, 1)
    w12 = calc.wedge_plain(1, 2)
    lhs = w21 * kron(w11, Mat.identity(8))
    rhs = w12 * kron(Mat.identity(8), w11)
    assert lhs == rhs


def test_d_squared_zero_everywhere(all_fixtures):
    for fx in all_fixtures:
        calc = fx.calc
        for n in range(calc.max_degree - 1):
            assert (calc.d[n + 1] * calc.d[n]).is_zero()


def test_graded_leibniz_on_spanning_products(all_fixtures):
    # d(w ^ e) = dw ^ e + (-1)^p w ^ de for spanning one-form products
    for fx in all_fixtures:
        calc = fx.calc
        alg = calc.algebra
        d0, d1, d2 = calc.d[0], calc.d[1], calc.d[2]
        w11 = calc.wedge_plain(1, 1)
        w21 = calc.wedge_plain(2, 1)
        w12 = calc.wedge_plain(1, 2)
        for a, b in itertools.product(range(alg.dim), repeat=2):
            w = calc.omega1.act_left(alg.basis_vector(a), d0.apply(alg.basis_vector(b)))
            for c in range(alg.dim):
                eta = d0.apply(alg.basis_vector(c))
                prod = w11.apply([x * y for x in w for y in eta])
                lhs = d2.apply(prod)
                t1 = w21.apply([x * y for x in d1.apply(w) for y in eta])
                t2 = w12.apply([x * y for x in w for y in d1.apply(eta)])
                assert lhs == [p - q for p, q in zip(t1, t2)]


def test_degenerate_calculus_is_legal():
    calc = universal_calculus(Algebra(1, ["1"], [[[1]]], [1]), max_degree=2)
    assert calc.dim_omega(1) == 0
    assert calc.dim_omega(2) == 0


# --- twisted pairs -----------------------------------------------------------------------

def test_twisted_pair_unit_acts_as_identity(quat):
    calc = quat.calc
    tw, m1, m2 = twisted_pair(calc, quat.base)
    assert tw.left_mult(calc.algebra.unit) == Mat.identity(tw.dim)


def test_twisted_pair_action_formula(quat):
    calc = quat.calc
    e = quat.base
    tw, m1, m2 = twisted_pair(calc, e)
    _, ts1 = calc.form_module(1, e)
    _, ts2 = calc.form_module(2, e)
    di = frame_form(calc, 0)
    alpha = ts1.class_of(di, calc.algebra.unit)
    x = alpha + [ZERO] * m2.dim
    i = calc.algebra.basis_vector(1)
    out = tw.act_left(i, x)
    # first component: i alpha; second: di ^ di (x) 1
    assert out[: m1.dim] == m1.act_left(i, alpha)
    w11 = calc.wedge_plain(1, 1)
    didi = w11.apply([x_ * y_ for x_ in di for y_ in di])
    assert out[m1.dim:] == ts2.class_of(didi, calc.algebra.unit)


def test_twisted_pair_is_associative_on_all_pairs(quat):
    calc = quat.calc
    tw, _, _ = twisted_pair(calc, quat.base)
    # the construction validates the representation law; re-check explicitly
    for a, b in itertools.product(range(4), repeat=2):
        ab = calc.algebra.mul(calc.algebra.basis_vector(a), calc.algebra.basis_vector(b))
        assert tw.left_mult(ab) == tw.left[a] * tw.left[b]
