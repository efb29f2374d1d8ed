"""First-order differential calculi and their maximal exterior towers.

A calculus is built from (algebra, bimodule of one-forms, differential) and
extended to degrees <= max_degree: degree-n forms are the n-fold tensor
power over the algebra modulo the two-sided ideal generated by applying the
differential to the degree-1 relations.  The differential in each degree is
solved from its values on the spanning set a db_1 ^ ... ^ db_n and its
well-definedness is verified, which doubles as a consistency check of the
input calculus.
"""

from __future__ import annotations

from .linalg import (
    Mat,
    SpanBuilder,
    ZERO,
    kernel_of,
    intersect,
    kron,
    quotient_data,
    vec,
)
from .algebra import (
    Algebra,
    Bimodule,
    LeftModule,
    TensorSpace,
    module_closure,
    regular_bimodule,
    tensor_bimodule,
    tensor_space,
    validate_algebra,
)


class CalculusError(Exception):
    """Invalid input calculus or out-of-range degree."""


def validate_fodc(algebra: Algebra, omega1: Bimodule, d0: Mat):
    """Violations of the first-order-calculus axioms (empty list = valid)."""
    problems = validate_algebra(algebra)
    problems += omega1.check_bimodule()
    if problems:
        return problems
    if d0.rows != omega1.dim or d0.cols != algebra.dim:
        return ["differential matrix has wrong shape"]
    from .linalg import is_zero_vec

    if not is_zero_vec(d0.apply(algebra.unit)):
        problems.append("d(1) != 0")
    for i in range(algebra.dim):
        dei = d0.apply(algebra.basis_vector(i))
        for j in range(algebra.dim):
            dej = d0.apply(algebra.basis_vector(j))
            lhs = d0.apply(algebra.mul(algebra.basis_vector(i), algebra.basis_vector(j)))
            rhs = [
                x + y
                for x, y in zip(
                    omega1.act_left(algebra.basis_vector(i), dej),
                    omega1.act_right(dei, algebra.basis_vector(j)),
                )
            ]
            if lhs != rhs:
                problems.append(
                    "Leibniz fails at (%s, %s)"
                    % (algebra.basis_names[i], algebra.basis_names[j])
                )
    sb = SpanBuilder(omega1.dim)
    for i in range(algebra.dim):
        for j in range(algebra.dim):
            sb.add(omega1.act_left(algebra.basis_vector(i), d0.apply(algebra.basis_vector(j))))
    if sb.dim != omega1.dim:
        problems.append("one-forms are not spanned by a*db (surjectivity fails)")
    return problems


class Calculus:
    """Exterior tower of a first-order differential calculus."""

    def __init__(self, algebra, omega, d, step_proj, step_sec, relation_space, name=""):
        self.algebra = algebra
        self.omega = omega            # Bimodule per degree 0..max_degree
        self.d = d                    # d[n]: omega[n] -> omega[n+1], n < max_degree
        self.step_proj = step_proj    # n >= 2: plain(omega[n-1] x omega1) -> omega[n]
        self.step_sec = step_sec
        self.relation_space = relation_space  # degree-1 relations inside A (x) A
        self.name = name
        self.max_degree = len(omega) - 1
        self._wedge_plain = {}
        self._tensor_pq = {}
        self._forms = {}
        self._jets = {}
        self._syms = {}

    @property
    def omega1(self) -> Bimodule:
        return self.omega[1]

    def base_module(self) -> Bimodule:
        """The algebra as a bimodule over itself (cached, identity-stable)."""
        got = getattr(self, "_base_module", None)
        if got is None:
            got = regular_bimodule(self.algebra)
            self._base_module = got
        return got

    def dim_omega(self, n):
        return self.omega[n].dim

    def check_degree(self, n):
        if n < 0 or n > self.max_degree:
            raise CalculusError(
                "degree %d outside tower (max %d)" % (n, self.max_degree)
            )

    # -- wedge machinery ---------------------------------------------------

    def wedge_plain(self, p, q) -> Mat:
        """Wedge on plain tensor coordinates: omega_p x omega_q -> omega_{p+q}."""
        self.check_degree(p + q)
        key = (p, q)
        got = self._wedge_plain.get(key)
        if got is not None:
            return got
        alg = self.algebra
        if p == 0:
            cols = []
            for i in range(alg.dim):
                act = self.omega[q].left[i]
                for j in range(self.omega[q].dim):
                    cols.append(act.col(j))
            w = Mat.from_rows(cols, self.omega[q].dim).transpose()
        elif q == 0:
            cols = []
            for i in range(self.omega[p].dim):
                for j in range(alg.dim):
                    cols.append(self.omega[p].right[j].col(i))
            w = Mat.from_rows(cols, self.omega[p].dim).transpose()
        elif q == 1:
            w = self.step_proj[p + 1]
        else:
            w = (
                self.step_proj[p + q]
                * kron(self.wedge_plain(p, q - 1), Mat.identity(self.omega1.dim))
                * kron(Mat.identity(self.omega[p].dim), self.step_sec[q])
            )
        self._wedge_plain[key] = w
        return w

    def tensor_pq(self, p, q) -> TensorSpace:
        """Presentation of omega_p (x)_A omega_q."""
        key = (p, q)
        got = self._tensor_pq.get(key)
        if got is None:
            got = tensor_space(self.omega[p], self.omega[q])
            self._tensor_pq[key] = got
        return got

    def wedge_map(self, p, q) -> Mat:
        """Wedge as a matrix on omega_p (x)_A omega_q coordinates."""
        ts = self.tensor_pq(p, q)
        w_plain = self.wedge_plain(p, q)
        # the wedge must kill the balancing relations
        for row in ts.relations.basis.data:
            if not all(not x for x in w_plain.apply(list(row))):
                raise CalculusError("wedge %d,%d not balanced" % (p, q))
        return w_plain * ts.sec

    # -- module-valued forms -----------------------------------------------

    def form_module(self, m, mod: LeftModule):
        """(omega_m (x)_A mod as a left module, tensor presentation); m >= 1."""
        if m < 1:
            raise ValueError("form_module needs m >= 1; use the module itself at m = 0")
        self.check_degree(m)
        key = (m, id(mod))
        got = self._forms.get(key)
        if got is None:
            from .algebra import tensor_left_module

            fmod, ts = tensor_left_module(self.omega[m], mod, label="O%d(%s)" % (m, mod.label))
            got = (fmod, ts, mod)
            self._forms[key] = got
        return got[0], got[1]

    def omega_lift(self, m, f: Mat, src: LeftModule, dst: LeftModule) -> Mat:
        """id_{omega_m} (x) f on A-tensor coordinates (f must be A-linear)."""
        if m == 0:
            return f
        _, ts_src = self.form_module(m, src)
        _, ts_dst = self.form_module(m, dst)
        return ts_dst.proj * kron(Mat.identity(self.omega[m].dim), f) * ts_src.sec

    def descend(self, plain_mat: Mat, ts: TensorSpace, what="map") -> Mat:
        """Descend a plain-tensor matrix through a quotient presentation.

        Verifies the matrix kills the balancing relations first; failure
        means the map is not well-defined on the tensor product over A.
        """
        for row in ts.relations.basis.data:
            if not all(not x for x in plain_mat.apply(list(row))):
                raise CalculusError("%s is not well-defined on the tensor product" % what)
        return plain_mat * ts.sec

    # -- misc --------------------------------------------------------------

    def d_of_basis(self, i):
        """d of the i-th algebra basis element, as a one-form."""
        return self.d[0].apply(self.algebra.basis_vector(i))


def _solve_spanning(vmat: Mat, wmat: Mat, what):
    """Solve D * vmat = wmat for D, requiring the columns of vmat to span."""
    n = vmat.rows
    aug = vmat.transpose().hstack(wmat.transpose())
    from .linalg import rref_pivots

    red, piv = rref_pivots(aug)
    if any(p >= n for p in piv):
        raise CalculusError("%s is inconsistent on its spanning set" % what)
    if len(piv) != n:
        raise CalculusError("%s underdetermined: spanning set does not span" % what)
    rows = [[ZERO] * wmat.rows for _ in range(n)]
    for r, p in enumerate(piv):
        rows[p] = list(red.data[r][n:])
    return Mat(n, wmat.rows, rows).transpose()


def build_calculus(algebra: Algebra, omega1: Bimodule, d0: Mat, max_degree=3, name="") -> Calculus:
    """Maximal exterior tower over a validated first-order calculus."""
    problems = validate_fodc(algebra, omega1, d0)
    if problems:
        raise CalculusError("invalid first-order calculus: " + "; ".join(problems))
    if max_degree < 1:
        raise CalculusError("max_degree must be >= 1")

    alg = algebra
    dA = alg.dim
    o1 = omega1.dim
    omega = [regular_bimodule(alg), omega1]
    step_proj = {}
    step_sec = {}

    # degree-1 relations: kernel of A (x) A -> omega1, x (x) y -> x d(y),
    # intersected with the universal one-forms ker(mult).
    mult_cols = []
    to_omega_cols = []
    for i in range(dA):
        for j in range(dA):
            mult_cols.append(alg.mult[i][j])
            to_omega_cols.append(omega1.act_left(alg.basis_vector(i), d0.apply(alg.basis_vector(j))))
    mult_mat = Mat.from_rows(mult_cols, dA).transpose()
    to_omega = Mat.from_rows(to_omega_cols, o1).transpose()
    relation_space = intersect(kernel_of(mult_mat), kernel_of(to_omega))

    # degree-2 relations: two-sided action closure of d applied to them
    pre2_mod, pre2_ts = tensor_bimodule(omega1, omega1, label="O1(x)O1")
    dgens = []
    for row in relation_space.basis.data:
        plain = [ZERO] * (o1 * o1)
        for idx, c in enumerate(row):
            if c:
                i, j = divmod(idx, dA)
                dei = d0.apply(alg.basis_vector(i))
                dej = d0.apply(alg.basis_vector(j))
                for s, x in enumerate(dei):
                    if x:
                        for t, y in enumerate(dej):
                            if y:
                                plain[s * o1 + t] += c * x * y
        dgens.append(pre2_ts.proj.apply(plain))
    rel2 = module_closure(pre2_mod, dgens, use_right=True)

    def quotient_bimodule(pre_mod, pre_ts, rel, degree):
        projq, secq = quotient_data(rel)
        sp = projq * pre_ts.proj
        ss = pre_ts.sec * secq
        left = [projq * pre_mod.left[a] * secq for a in range(dA)]
        right = [projq * pre_mod.right[a] * secq for a in range(dA)]
        mod = Bimodule(alg, projq.rows, left, right, label="O%d" % degree)
        bad = mod.check_bimodule()
        if bad:
            raise CalculusError("degree-%d forms are not a bimodule: %s" % (degree, bad[0]))
        return mod, sp, ss

    om2, sp2, ss2 = quotient_bimodule(pre2_mod, pre2_ts, rel2, 2)
    omega.append(om2)
    step_proj[2] = sp2
    step_sec[2] = ss2
    rel2_plain_lift = pre2_ts.sec  # omega1 (x)_A omega1 coords -> plain

    for n in range(3, max_degree + 1):
        pre_mod, pre_ts = tensor_bimodule(omega[n - 1], omega1, label="O%d(x)O1" % (n - 1))
        sb = SpanBuilder(pre_ts.dim)
        prev_proj = step_proj[n - 1]
        for u in range(omega[n - 2].dim):
            base = u * o1
            for r_row in rel2.basis.data:
                r_pl = rel2_plain_lift.apply(list(r_row))
                acc = {}
                for idx, c in enumerate(r_pl):
                    if c:
                        a_i, b_i = divmod(idx, o1)
                        colv = prev_proj.col(base + a_i)
                        for ii, v in enumerate(colv):
                            if v:
                                key = ii * o1 + b_i
                                acc[key] = acc.get(key, ZERO) + c * v
                dense = [ZERO] * (omega[n - 1].dim * o1)
                for kidx, v in acc.items():
                    dense[kidx] = v
                sb.add(pre_ts.proj.apply(dense))
        reln = sb.subspace()
        omn, spn, ssn = quotient_bimodule(pre_mod, pre_ts, reln, n)
        omega.append(omn)
        step_proj[n] = spn
        step_sec[n] = ssn

    calc = Calculus(alg, omega, [d0], step_proj, step_sec, relation_space, name=name)

    # differentials in higher degree, solved on the spanning set
    basis_d = [d0.apply(alg.basis_vector(i)) for i in range(dA)]
    for n in range(1, max_degree):
        vcols = []
        wcols = []

        def extend(cur, m, one_form):
            dense = [ZERO] * (len(cur) * o1)
            for i, x in enumerate(cur):
                if x:
                    base = i * o1
                    for j, y in enumerate(one_form):
                        if y:
                            dense[base + j] = x * y
            return step_proj[m + 1].apply(dense)

        import itertools

        for tup in itertools.product(range(dA), repeat=n + 1):
            cur = omega1.act_left(alg.basis_vector(tup[0]), basis_d[tup[1]])
            for s in range(2, n + 1):
                cur = extend(cur, s - 1, basis_d[tup[s]])
            vcols.append(cur)
            w = basis_d[tup[0]]
            for s in range(1, n + 1):
                w = extend(w, s, basis_d[tup[s]])
            wcols.append(w)
        vmat = Mat.from_rows(vcols, omega[n].dim).transpose()
        wmat = Mat.from_rows(wcols, omega[n + 1].dim).transpose()
        calc.d.append(_solve_spanning(vmat, wmat, "differential in degree %d" % n))

    # d^2 = 0 on every consecutive pair that exists
    for n in range(max_degree - 1):
        if not (calc.d[n + 1] * calc.d[n]).is_zero():
            raise CalculusError("differential does not square to zero at degree %d" % n)
    return calc


def universal_calculus(a: Algebra, max_degree=3) -> Calculus:
    """Universal calculus: one-forms are ker(mult) with d(a) = 1(x)a - a(x)1."""
    dA = a.dim
    cols = []
    for i in range(dA):
        for j in range(dA):
            cols.append(a.mult[i][j])
    mult_mat = Mat.from_rows(cols, dA).transpose()
    ker = kernel_of(mult_mat)
    emb = ker.basis.transpose()

    def coords(v):
        c = ker.coords(v)
        if c is None:
            raise CalculusError("universal form fell outside ker(mult)")
        return c

    eye = Mat.identity(dA)
    left = []
    right = []
    for s in range(dA):
        big_l = kron(a.lmat[s], eye)
        big_r = kron(eye, a.rmat[s])
        left.append(Mat.from_rows([coords(big_l.apply(emb.col(t))) for t in range(ker.dim)], ker.dim).transpose())
        right.append(Mat.from_rows([coords(big_r.apply(emb.col(t))) for t in range(ker.dim)], ker.dim).transpose())
    om1 = Bimodule(a, ker.dim, left, right, label="O1u(%s)" % a.name)
    dcols = []
    for b in range(dA):
        v = [ZERO] * (dA * dA)
        for i, u in enumerate(a.unit):
            if u:
                v[i * dA + b] += u
                v[b * dA + i] -= u
        dcols.append(coords(v))
    d0 = Mat.from_rows(dcols, ker.dim).transpose()
    return build_calculus(a, om1, d0, max_degree, name="universal(%s)" % a.name)


def quaternion_calculus(max_degree=3) -> Calculus:
    """Maximal exterior tower of the two-frame quaternion calculus.

    One-forms are a free left module on the frame (di, dj); basis vectors
    are q*d(theta) indexed t*4+q for t in (di, dj), q in (1, i, j, k).  The
    right action twists by the algebra automorphism fixing k and negating i
    and j (d(theta)*a = phi(a)*d(theta)), which is the unique choice making
    the Leibniz rule hold for d(k) = -j di + i dj; build_calculus checks
    Leibniz on all 16 basis pairs, so an inconsistent twist cannot slip by.
    """
    from .algebra import quaternion_algebra

    alg = quaternion_algebra()
    phi = [  # 1 -> 1, i -> -i, j -> -j, k -> k
        [1, 0, 0, 0],
        [0, -1, 0, 0],
        [0, 0, -1, 0],
        [0, 0, 0, 1],
    ]
    left = []
    right = []
    for s in range(4):
        left.append(kron(Mat.identity(2), alg.lmat[s]))
        right.append(kron(Mat.identity(2), _right_mult(alg, vec(phi[s]))))
    om1 = Bimodule(alg, 8, left, right, label="O1(H)")
    dcols = [
        [0, 0, 0, 0, 0, 0, 0, 0],    # d(1) = 0
        [1, 0, 0, 0, 0, 0, 0, 0],    # d(i) = di
        [0, 0, 0, 0, 1, 0, 0, 0],    # d(j) = dj
        [0, 0, -1, 0, 0, 1, 0, 0],   # d(k) = -j di + i dj
    ]
    d0 = Mat.from_rows(dcols, 8).transpose()
    calc = build_calculus(alg, om1, d0, max_degree, name="quaternion")
    calc.left_frame_size = 2
    return calc


def _right_mult(a: Algebra, x) -> Mat:
    """Matrix of right multiplication by the coordinate vector x."""
    acc = Mat.zeros(a.dim, a.dim)
    for j, xj in enumerate(x):
        if xj:
            acc = acc + a.rmat[j].scale(xj)
    return acc


def twisted_pair(calc: Calculus, e: LeftModule):
    """Direct sum of one- and two-form valued copies of e with twisted action.

    The algebra acts by a.(alpha, beta) = (a alpha, da ^ alpha + a beta);
    the representation law is verified on all basis pairs.
    """
    calc.check_degree(2)
    m1, ts1 = calc.form_module(1, e)
    m2, ts2 = calc.form_module(2, e)
    alg = calc.algebra
    o1 = calc.omega1.dim
    w11 = calc.wedge_plain(1, 1)
    eye_e = Mat.identity(e.dim)
    left = []
    for a in range(alg.dim):
        da = calc.d_of_basis(a)
        da_col = Mat(o1, 1, [[x] for x in da])
        prepend = kron(da_col, Mat.identity(o1 * e.dim))
        wda = ts2.proj * kron(w11, eye_e) * prepend * ts1.sec
        top = m1.left[a].hstack(Mat.zeros(m1.dim, m2.dim))
        bot = wda.hstack(m2.left[a])
        left.append(top.vstack(bot))
    mod = LeftModule(alg, m1.dim + m2.dim, left, label="tw(%s)" % e.label)
    bad = mod.check_left()
    if bad:
        raise CalculusError("twisted pair action fails: %s" % bad[0])
    return mod, m1, m2
