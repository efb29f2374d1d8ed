"""Connections: affine solving, torsion/curvature, and higher-order theory.

A connection on a left module M is a matrix M -> one-forms (x) M obeying
the left Leibniz rule; the solution set of all connections is an affine
space computed exactly.  Higher-order connections are sections of the jet
projection; the module provides the correspondence between those, left
splittings, and connections on jet modules, together with the curvature
and block-decomposition identities the correspondence rests on.
"""

from __future__ import annotations

from .linalg import (
    Mat,
    AffineSpace,
    ZERO,
    ONE,
    image_of,
    kron,
    left_inverse,
    right_inverse,
    vec,
)
from .algebra import AffineSystem, LeftModule, mat_from_flat, tensor_bimodule
from .calculus import Calculus, CalculusError
from .jets import (
    JetModule,
    dtilde_maps,
    jet_module,
    pair_module,
    spencer_operator,
    sym_module,
    _basis,
)


class InvalidConnection(CalculusError):
    pass


def _twist_mats(calc: Calculus, m: LeftModule):
    """T_a(x) = class of d(e_a) (x) x in one-forms (x) M, per basis a."""
    cache = calc._jets.setdefault("twist", {})
    got = cache.get(id(m))
    if got is not None:
        return got[0]
    _, ts = calc.form_module(1, m)
    alg = calc.algebra
    mats = []
    for a in range(alg.dim):
        da = calc.d_of_basis(a)
        cols = [ts.class_of(da, _basis(m.dim, x)) for x in range(m.dim)]
        mats.append(Mat.from_rows(cols, ts.dim).transpose())
    cache[id(m)] = (mats, m)
    return mats


class Connection:
    """Left connection on a module; the Leibniz rule is checked on build."""

    def __init__(self, calc: Calculus, module: LeftModule, mat: Mat, check=True):
        self.calc = calc
        self.module = module
        fm, _ = calc.form_module(1, module)
        self.form_module = fm
        if mat.rows != fm.dim or mat.cols != module.dim:
            raise InvalidConnection("connection matrix has wrong shape")
        self.mat = mat
        if check:
            bad = self.leibniz_violations()
            if bad:
                raise InvalidConnection("Leibniz rule fails: %s" % bad[0])

    def leibniz_violations(self):
        calc = self.calc
        twist = _twist_mats(calc, self.module)
        out = []
        for a in range(calc.algebra.dim):
            lhs = self.mat * self.module.left[a]
            rhs = self.form_module.left[a] * self.mat + twist[a]
            if lhs != rhs:
                out.append("at basis element %s" % calc.algebra.basis_names[a])
        return out

    def __repr__(self):
        return "Connection(on %s)" % self.module.label


class BimoduleConnection:
    """Connection on the one-forms with a generalized braiding."""

    def __init__(self, calc: Calculus, base: Connection, sigma: Mat, check=True):
        self.calc = calc
        self.base = base
        self.sigma = sigma
        if check:
            bad = self.violations()
            if bad:
                raise InvalidConnection("bimodule connection fails: %s" % bad[0])

    def violations(self):
        calc = self.calc
        out = []
        om11, ts11 = _omega_pair(calc)
        alg = calc.algebra
        for a in range(alg.dim):
            if self.sigma * om11.left[a] != om11.left[a] * self.sigma:
                out.append("braiding not left-linear at %s" % alg.basis_names[a])
            if self.sigma * om11.right[a] != om11.right[a] * self.sigma:
                out.append("braiding not right-linear at %s" % alg.basis_names[a])
        d_right = _d_right_mats(calc)
        for a in range(alg.dim):
            lhs = self.base.mat * calc.omega1.right[a]
            rhs = om11.right[a] * self.base.mat + self.sigma * d_right[a]
            if lhs != rhs:
                out.append("right Leibniz fails at %s" % alg.basis_names[a])
        return out


def _omega_pair(calc: Calculus):
    """One-forms (x)_A one-forms as a bimodule (cached)."""
    got = getattr(calc, "_omega_pair", None)
    if got is None:
        got = tensor_bimodule(calc.omega1, calc.omega1, label="O1(x)O1")
        calc._omega_pair = got
    return got


def _d_right_mats(calc: Calculus):
    """D_a(w) = class of w (x) d(e_a) in one-forms (x) one-forms."""
    got = getattr(calc, "_d_right", None)
    if got is None:
        _, ts = _omega_pair(calc)
        o1 = calc.omega1.dim
        mats = []
        for a in range(calc.algebra.dim):
            da = calc.d_of_basis(a)
            cols = [ts.class_of(_basis(o1, w), da) for w in range(o1)]
            mats.append(Mat.from_rows(cols, ts.dim).transpose())
        got = mats
        calc._d_right = got
    return got


def solve_connections(calc: Calculus, module: LeftModule) -> AffineSpace:
    """Affine space of all left connections on a module."""
    fm, _ = calc.form_module(1, module)
    twist = _twist_mats(calc, module)
    ds, dt = module.dim, fm.dim
    sys = AffineSystem(dt * ds)
    for a in range(calc.algebra.dim):
        l_src = module.left[a]
        l_tgt = fm.left[a]
        scols = [l_src.col(j) for j in range(ds)]
        for i in range(dt):
            trow = l_tgt.data[i]
            for j in range(ds):
                coeffs = {}
                for k, v in enumerate(scols[j]):
                    if v:
                        coeffs[i * ds + k] = coeffs.get(i * ds + k, ZERO) + v
                for k, v in enumerate(trow):
                    if v:
                        key = k * ds + j
                        coeffs[key] = coeffs.get(key, ZERO) - v
                sys.add_row(coeffs, twist[a].entry(i, j))
    return sys.solve()


def connection_from_vector(calc: Calculus, module: LeftModule, flat) -> Connection:
    fm, _ = calc.form_module(1, module)
    return Connection(calc, module, mat_from_flat(list(flat), fm.dim, module.dim))


def bimodule_connection_system(calc: Calculus) -> AffineSystem:
    """Joint linear system for (connection, braiding) pairs on the one-forms.

    Unknowns are the connection entries followed by the braiding entries;
    rows impose the left Leibniz rule, the right Leibniz rule through the
    braiding, and two-sided linearity of the braiding.
    """
    om1 = calc.omega1
    om11, _ = _omega_pair(calc)
    twist = _twist_mats(calc, om1)
    d_right = _d_right_mats(calc)
    o1, qq = om1.dim, om11.dim
    n_nabla = qq * o1
    n_sigma = qq * qq
    sys = AffineSystem(n_nabla + n_sigma)
    alg = calc.algebra

    def nab(i, j):
        return i * o1 + j

    def sig(i, j):
        return n_nabla + i * qq + j

    for a in range(alg.dim):
        # left Leibniz for the connection
        l_src = om1.left[a]
        l_tgt = om11.left[a]
        for i in range(qq):
            for j in range(o1):
                coeffs = {}
                for k in range(o1):
                    v = l_src.entry(k, j)
                    if v:
                        coeffs[nab(i, k)] = coeffs.get(nab(i, k), ZERO) + v
                for k in range(qq):
                    v = l_tgt.entry(i, k)
                    if v:
                        coeffs[nab(k, j)] = coeffs.get(nab(k, j), ZERO) - v
                sys.add_row(coeffs, twist[a].entry(i, j))
        # right Leibniz: nabla R_a - R_a nabla - sigma D_a = 0
        r_src = om1.right[a]
        r_tgt = om11.right[a]
        d_a = d_right[a]
        for i in range(qq):
            for j in range(o1):
                coeffs = {}
                for k in range(o1):
                    v = r_src.entry(k, j)
                    if v:
                        coeffs[nab(i, k)] = coeffs.get(nab(i, k), ZERO) + v
                for k in range(qq):
                    v = r_tgt.entry(i, k)
                    if v:
                        coeffs[nab(k, j)] = coeffs.get(nab(k, j), ZERO) - v
                for k in range(qq):
                    v = d_a.entry(k, j)
                    if v:
                        coeffs[sig(i, k)] = coeffs.get(sig(i, k), ZERO) - v
                sys.add_row(coeffs)
        # braiding linearity on both sides
        for mats in (om11.left, om11.right):
            m_a = mats[a]
            for i in range(qq):
                for j in range(qq):
                    coeffs = {}
                    for k in range(qq):
                        v = m_a.entry(k, j)
                        if v:
                            coeffs[sig(i, k)] = coeffs.get(sig(i, k), ZERO) + v
                        v = m_a.entry(i, k)
                        if v:
                            coeffs[sig(k, j)] = coeffs.get(sig(k, j), ZERO) - v
                    if coeffs:
                        sys.add_row(coeffs)
    return sys


def solve_bimodule_connections(calc: Calculus) -> AffineSpace:
    """Affine space of (connection, braiding) pairs on the one-forms."""
    return bimodule_connection_system(calc).solve()


def bimodule_connection_from_vector(calc: Calculus, flat) -> BimoduleConnection:
    om11, _ = _omega_pair(calc)
    o1, qq = calc.omega1.dim, om11.dim
    n_nabla = qq * o1
    nabla = mat_from_flat(list(flat[:n_nabla]), qq, o1)
    sigma = mat_from_flat(list(flat[n_nabla:]), qq, qq)
    return BimoduleConnection(calc, Connection(calc, calc.omega1, nabla), sigma)


def torsion(calc: Calculus, conn: Connection) -> Mat:
    """Wedge of the connection minus the differential, on one-forms."""
    if conn.module is not calc.omega1:
        raise InvalidConnection("torsion is defined for connections on the one-forms")
    calc.check_degree(2)
    return calc.wedge_map(1, 1) * conn.mat - calc.d[1]


def tensor_connection(calc: Calculus, bconn: BimoduleConnection, connf: Connection) -> Connection:
    """Induced connection on one-forms (x) F from a braided pair.

    nabla(w (x) f) = nabla(w) (x) f + (sigma (x) id)(w (x) nabla f).
    """
    f = connf.module
    fm, ts_f = calc.form_module(1, f)      # O1 (x) F
    _, ts_v = calc.form_module(1, fm)      # O1 (x) (O1 (x) F)
    _, ts11 = _omega_pair(calc)
    o1 = calc.omega1.dim
    sigma_plain = ts11.sec * bconn.sigma * ts11.proj
    eye_f = Mat.identity(f.dim)
    to_v = ts_v.proj * kron(Mat.identity(o1), ts_f.proj)
    term2_map = to_v * kron(sigma_plain, eye_f)
    cols = []
    for b in range(o1):
        nb_plain = ts11.sec.apply(bconn.base.mat.apply(_basis(o1, b)))
        for t in range(f.dim):
            # term 1: nabla(w_b) (x) f_t
            acc = [ZERO] * (o1 * o1 * f.dim)
            for idx, v in enumerate(nb_plain):
                if v:
                    acc[idx * f.dim + t] = v
            col = to_v.apply(acc)
            # term 2: (sigma (x) id)(w_b (x) nabla f_t)
            nf_plain = ts_f.sec.apply(connf.mat.col(t))
            acc2 = [ZERO] * (o1 * o1 * f.dim)
            base = b * o1 * f.dim
            for idx, v in enumerate(nf_plain):
                if v:
                    acc2[base + idx] = v
            col2 = term2_map.apply(acc2)
            cols.append([x + y for x, y in zip(col, col2)])
    plain = Mat.from_rows(cols, ts_v.dim).transpose()
    mat = calc.descend(plain, ts_f, "tensor connection")
    return Connection(calc, fm, mat)


def metric_compatibility(calc: Calculus, bconn: BimoduleConnection, g):
    """Covariant derivative of a metric candidate in one-forms (x) one-forms."""
    conn2 = tensor_connection(calc, bconn, bconn.base)
    return conn2.mat.apply(vec(g))


def covariant_exterior(calc: Calculus, conn: Connection, m: int) -> Mat:
    """Exterior covariant derivative on m-form-valued sections."""
    if m == 0:
        return conn.mat
    calc.check_degree(m + 1)
    mod = conn.module
    _, ts_dom = calc.form_module(m, mod)
    _, ts_tgt = calc.form_module(m + 1, mod)
    _, ts_1 = calc.form_module(1, mod)
    dm = calc.d[m]
    sign = ONE if m % 2 == 0 else -ONE
    cols = []
    from .jets import _wedge_prepend

    for b in range(calc.omega[m].dim):
        dwb = dm.col(b)
        for t in range(mod.dim):
            term1 = ts_tgt.class_of(dwb, _basis(mod.dim, t))
            n_plain = ts_1.sec.apply(conn.mat.col(t))
            term2 = _wedge_prepend(calc, m, b, n_plain, mod.dim, ts_tgt)
            cols.append([x + sign * y for x, y in zip(term1, term2)])
    plain = Mat.from_rows(cols, ts_tgt.dim).transpose()
    return calc.descend(plain, ts_dom, "covariant exterior derivative")


def curvature(calc: Calculus, conn: Connection) -> Mat:
    """Square of the covariant derivative: module -> two-forms (x) module."""
    return covariant_exterior(calc, conn, 1) * conn.mat


class HigherConnection:
    """Section of the jet projection J^{n-1} -> J^n with its left split."""

    def __init__(self, calc: Calculus, jet: JetModule, section: Mat, check=True):
        if jet.n < 1:
            raise InvalidConnection("higher connections need jet order >= 1")
        self.calc = calc
        self.jet = jet
        self.section = section
        lower = jet.lower
        if check:
            if section.rows != jet.dim or section.cols != lower.dim:
                raise InvalidConnection("section has wrong shape")
            if jet.pi * section != Mat.identity(lower.dim):
                raise InvalidConnection("not a section of the jet projection")
            for a in range(calc.algebra.dim):
                if section * lower.mod.left[a] != jet.mod.left[a] * section:
                    raise InvalidConnection("section is not module-linear")
        # left split: iota split = id - section projection
        self.split = left_inverse(jet.iota) * (Mat.identity(jet.dim) - section * jet.pi)
        if check:
            if jet.iota * self.split + section * jet.pi != Mat.identity(jet.dim):
                raise InvalidConnection("splitting identities fail")
            if self.split * jet.iota != Mat.identity(jet.sym.dim):
                raise InvalidConnection("split does not retract the symbol inclusion")

    @property
    def n(self):
        return self.jet.n


def higher_connection_from_split(calc: Calculus, jet: JetModule, split: Mat) -> HigherConnection:
    """Section corresponding to a left splitting of the jet sequence."""
    section = (Mat.identity(jet.dim) - jet.iota * split) * right_inverse(jet.pi)
    hc = HigherConnection(calc, jet, section)
    if hc.split != split:
        raise InvalidConnection("left splitting does not retract the symbol inclusion")
    return hc


def one_connection(calc: Calculus, conn: Connection) -> HigherConnection:
    """The order-1 section of a connection via its canonical jet lift."""
    jet = jet_module(calc, conn.module, 1)
    lift = conn.mat * jet.pi + jet.rho
    return higher_connection_from_split(calc, jet, lift)


def associated_connection(calc: Calculus, hc: HigherConnection) -> Connection:
    """Connection on the lower jet induced by a higher-order section."""
    mat = spencer_operator(calc, hc.jet, 0) * hc.section
    return Connection(calc, hc.jet.lower.mod, mat)


def higher_curvature(calc: Calculus, hc: HigherConnection) -> Mat:
    """Obstruction to prolonging the section one more order.

    Valued in two-forms (x) J^{n-1}; vanishes exactly when the double
    application of the section stays holonomic.
    """
    jet = hc.jet
    lower = jet.lower
    m = lower.mod
    d_first, d_second = dtilde_maps(calc, m)
    omega_c = calc.omega_lift(1, hc.section, lower.mod, jet.mod)
    j1_c = (hc.section.hstack(Mat.zeros(hc.section.rows, omega_c.cols))).vstack(
        Mat.zeros(omega_c.rows, hc.section.cols).hstack(omega_c)
    )
    omega_l = calc.omega_lift(1, jet.l, jet.mod, pair_module(calc, m).mod)
    j1_l = (jet.l.hstack(Mat.zeros(jet.l.rows, omega_l.cols))).vstack(
        Mat.zeros(omega_l.rows, jet.l.cols).hstack(omega_l)
    )
    composite = j1_l * j1_c * jet.l * hc.section
    return -(d_second * composite)


def covariant_exterior_of_section(calc: Calculus, hc: HigherConnection, m: int) -> Mat:
    """Spencer operator composed with the section, on m-form-valued jets."""
    jet = hc.jet
    smat = spencer_operator(calc, jet, m)
    omega_c = calc.omega_lift(m, hc.section, jet.lower.mod, jet.mod)
    return smat * omega_c


def higher_from_jet_connection(calc: Calculus, jet: JetModule, conn: Connection) -> HigherConnection:
    """Section of the jet projection from a connection on the lower jet.

    The connection must project onto the Spencer operator of the lower jet
    and have curvature valued in the symbol part; both hypotheses are
    checked and named on failure.
    """
    n = jet.n
    lower = jet.lower
    if conn.module is not lower.mod:
        raise InvalidConnection("connection lives on the wrong module")
    e = jet.base
    if n >= 2:
        om_pi = calc.omega_lift(1, lower.pi, lower.mod, lower.lower.mod)
        if om_pi * conn.mat != spencer_operator(calc, lower, 0):
            raise InvalidConnection("hypothesis (i) fails: projection of the connection "
                                  "is not the Spencer operator")
        r = curvature(calc, conn)
        om2_iota = calc.omega_lift(2, lower.iota, lower.sym.mod, lower.mod)
        if not image_of(om2_iota).contains_space(image_of(r)):
            raise InvalidConnection("hypothesis (ii) fails: curvature is not valued "
                                  "in the symbol part")
    # nabla' = conn o j^{n-1}: E -> one-forms (x) J^{n-1}
    nabla_prime = conn.mat * lower.j
    sym = sym_module(calc, e, n)
    om_iota = calc.omega_lift(1, lower.iota, sym_module(calc, e, n - 1).mod, lower.mod)
    embed = om_iota * sym.iota_wedge
    nabla_n = left_inverse(embed) * nabla_prime
    if embed * nabla_n != nabla_prime:
        raise InvalidConnection("factorization through the symmetric forms fails")
    # unique module-linear lift to J^n with lift o j^n = nabla_n
    from .algebra import solve_module_maps

    sol = solve_module_maps(jet.mod, sym.mod, "left", compose_eq=[(jet.j, nabla_n)])
    if sol.empty:
        raise InvalidConnection("no jet lift of the candidate splitting")
    split = mat_from_flat(sol.particular, sym.dim, jet.dim)
    return higher_connection_from_split(calc, jet, split)


def jet_connection_from_sym(calc: Calculus, hc: HigherConnection, sym_conn: Connection) -> Connection:
    """Connection on J^n induced by one on S^n through a fixed section."""
    jet = hc.jet
    if sym_conn.module is not jet.sym.mod:
        raise InvalidConnection("connection lives on the wrong symbol module")
    om_c = calc.omega_lift(1, hc.section, jet.lower.mod, jet.mod)
    om_iota = calc.omega_lift(1, jet.iota, jet.sym.mod, jet.mod)
    mat = om_c * spencer_operator(calc, jet, 0) + om_iota * sym_conn.mat * hc.split
    return Connection(calc, jet.mod, mat)


def sym_connection_from_jet(calc: Calculus, hc: HigherConnection, jet_conn: Connection) -> Connection:
    """Connection on S^n recovered from one on J^n (left inverse of the above)."""
    jet = hc.jet
    om_split = calc.omega_lift(1, hc.split, jet.mod, jet.sym.mod)
    mat = om_split * jet_conn.mat * jet.iota
    return Connection(calc, jet.sym.mod, mat)
