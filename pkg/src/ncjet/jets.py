"""Jet modules, symmetric-form modules, Spencer operators and complexes.

Jets of order n live inside the iterated pair space P(M) = M + forms(x)M,
where the 1-jet of M is all of P(M) with the twisted left action
a.(x, w) = (ax, aw - da(x)x).  Holonomic jets are cut out of P(J^{n-1}) by
the vanishing of two obstruction maps; sesquiholonomic jets by the first
obstruction only; nonholonomic jets are the full pair space.
"""

from __future__ import annotations

from .linalg import Mat, Subspace, ZERO, ONE, kernel_of, intersect, span_of
from .algebra import LeftModule, module_closure
from .calculus import Calculus, CalculusError

HOLONOMIC = "holonomic"
SESQUI = "sesquiholonomic"
NONHOLONOMIC = "nonholonomic"


class PairData:
    """P(M) = M + forms(x)M with the jet left action, plus its split maps."""

    def __init__(self, mod, base, form_mod, ts):
        self.mod = mod
        self.base = base
        self.form_mod = form_mod
        self.ts = ts
        self.m0 = base.dim
        self.m1 = form_mod.dim
        eye0 = Mat.identity(self.m0)
        eye1 = Mat.identity(self.m1)
        z01 = Mat.zeros(self.m0, self.m1)
        z10 = Mat.zeros(self.m1, self.m0)
        self.pi = eye0.hstack(z01)          # first component
        self.rho = z10.hstack(eye1)         # second component
        self.j = eye0.vstack(z10)           # x -> (x, 0)
        self.iota = z01.vstack(eye1)        # w -> (0, w)


def pair_module(calc: Calculus, m: LeftModule) -> PairData:
    """The split 1-jet space of a left module (cached per module)."""
    cache = calc._jets.setdefault("pairs", {})
    got = cache.get(id(m))
    if got is not None:
        return got[0]
    fm, ts = calc.form_module(1, m)
    alg = calc.algebra
    left = []
    for a in range(alg.dim):
        da = calc.d_of_basis(a)
        # T_a(x) = class of da (x) x
        tcols = [ts.class_of(da, _basis(m.dim, x)) for x in range(m.dim)]
        t_a = Mat.from_rows(tcols, fm.dim).transpose()
        top = m.left[a].hstack(Mat.zeros(m.dim, fm.dim))
        bot = (-t_a).hstack(fm.left[a])
        left.append(top.vstack(bot))
    mod = LeftModule(alg, m.dim + fm.dim, left, label="P(%s)" % m.label)
    pd = PairData(mod, m, fm, ts)
    cache[id(m)] = (pd, m)
    return pd


def _basis(n, i):
    v = [ZERO] * n
    v[i] = ONE
    return v


def dtilde_maps(calc: Calculus, m: LeftModule):
    """Obstruction maps on P(P(M)): (first, second) component matrices.

    first(xi, alpha) = (id (x) pi)(alpha) - rho(xi), valued in forms(x)M;
    second(xi, alpha) = sum d(w_s) (x) pi(eta_s) + w_s ^ rho(eta_s) for
    alpha = sum w_s (x) eta_s, valued in 2-forms (x) M.
    """
    calc.check_degree(2)
    cache = calc._jets.setdefault("dtilde", {})
    got = cache.get(id(m))
    if got is not None:
        return got[0], got[1]
    pm = pair_module(calc, m)
    p2 = pair_module(calc, pm.mod)
    o1 = calc.omega1.dim
    ts1m = pm.ts                       # O1 (x) M
    _, ts2m = calc.form_module(2, m)   # O2 (x) M
    # first component
    omega_pi = calc.omega_lift(1, pm.pi, pm.mod, m)
    d_first = omega_pi * p2.rho - pm.rho * p2.pi
    # second component, defined on plain O1 (x) P(M) and descended
    pdim = pm.mod.dim
    cols = []
    d1 = calc.d[1]
    for b in range(o1):
        dwb = d1.col(b)
        for s in range(pdim):
            if s < pm.m0:
                cols.append(ts2m.class_of(dwb, _basis(m.dim, s)))
            else:
                w_plain = ts1m.sec.col(s - pm.m0)
                cols.append(_wedge_prepend(calc, 1, b, w_plain, m.dim, ts2m))
    plain = Mat.from_rows(cols, ts2m.dim).transpose()
    d_second_alpha = calc.descend(plain, p2.ts, "second obstruction map")
    d_second = Mat.zeros(ts2m.dim, pm.mod.dim).hstack(d_second_alpha)
    cache[id(m)] = (d_first, d_second, m)
    return d_first, d_second


def _wedge_prepend(calc, k, b_idx, w_plain, t_dim, ts_out):
    """Class of w_b ^ (plain one-form-valued vector) in (k+1)-forms (x) T."""
    wk1 = calc.wedge_plain(k, 1)
    o1 = calc.omega1.dim
    acc = [ZERO] * (calc.omega[k + 1].dim * t_dim)
    for idx, v in enumerate(w_plain):
        if v:
            c, e = divmod(idx, t_dim)
            col = wk1.col(b_idx * o1 + c)
            for r, vv in enumerate(col):
                if vv:
                    acc[r * t_dim + e] += v * vv
    return ts_out.proj.apply(acc)


class SymModule:
    """Symmetric n-forms valued in a module: iterated wedge kernel."""

    def __init__(self, n, mod, iota_wedge, lower):
        self.n = n
        self.mod = mod
        self.iota_wedge = iota_wedge  # S^n -> O1 (x) S^{n-1} coordinates
        self.lower = lower

    @property
    def dim(self):
        return self.mod.dim

    def __repr__(self):
        return "SymModule(n=%d, dim %d)" % (self.n, self.dim)


def sym_module(calc: Calculus, e: LeftModule, n: int) -> SymModule:
    """S^0 = E, S^1 = one-forms (x) E, then kernels of the wedge map."""
    if n < 0:
        raise ValueError("negative symmetric degree")
    cache = calc._syms
    key = (id(e), n)
    got = cache.get(key)
    if got is not None:
        return got[0]
    if n == 0:
        sym = SymModule(0, e, None, None)
    elif n == 1:
        fm, _ = calc.form_module(1, e)
        sym = SymModule(1, fm, Mat.identity(fm.dim), sym_module(calc, e, 0))
    else:
        calc.check_degree(2)
        lower = sym_module(calc, e, n - 1)
        lower2 = sym_module(calc, e, n - 2)
        fm, ts = calc.form_module(1, lower.mod)
        # wedge contraction O1 (x) S^{n-1} -> O2 (x) S^{n-2} on plain coords
        o1 = calc.omega1.dim
        _, ts1low = calc.form_module(1, lower2.mod)
        lift = ts1low.sec
        _, ts2 = calc.form_module(2, lower2.mod)
        cols = []
        for b in range(o1):
            for s in range(lower.dim):
                w_coords = lower.iota_wedge.col(s)
                w_plain = lift.apply(w_coords)
                cols.append(_wedge_prepend(calc, 1, b, w_plain, lower2.mod.dim, ts2))
        plain = Mat.from_rows(cols, ts2.dim).transpose()
        contraction = calc.descend(plain, ts, "wedge contraction")
        ker = kernel_of(contraction)
        emb = ker.basis.transpose()

        def restricted(mats):
            out = []
            for mat in mats:
                cols_a = []
                for t in range(ker.dim):
                    coords = ker.coords(mat.apply(emb.col(t)))
                    if coords is None:
                        raise CalculusError("symmetric forms are not action-stable")
                    cols_a.append(coords)
                out.append(Mat.from_rows(cols_a, ker.dim).transpose())
            return out

        from .algebra import Bimodule

        left = restricted(fm.left)
        label = "S%d(%s)" % (n, e.label)
        if isinstance(fm, Bimodule):
            mod = Bimodule(calc.algebra, ker.dim, left, restricted(fm.right), label=label)
        else:
            mod = LeftModule(calc.algebra, ker.dim, left, label=label)
        sym = SymModule(n, mod, emb, lower)
    cache[key] = (sym, e)
    return sym


class JetModule:
    """Jet space of one flavor with its structure maps.

    l embeds the carrier into P(J^{n-1}); pi and rho are the pair
    components after l; j is the (merely k-linear) prolongation; iota
    includes the symmetric forms (holonomic flavor, when they exist).
    """

    def __init__(self, calc, base, n, flavor, mod, lower, l, j, iota=None, carrier=None, sym=None):
        self.calc = calc
        self.base = base
        self.n = n
        self.flavor = flavor
        self.mod = mod
        self.lower = lower
        self.l = l
        self.j = j
        self.iota = iota
        self.carrier = carrier  # Subspace of P(J^{n-1}) coords, for n >= 2
        self.sym = sym
        if n >= 1:
            pd = pair_module(calc, lower.mod)
            self.pi = pd.pi * l
            self.rho = pd.rho * l
        else:
            self.pi = None
            self.rho = None

    @property
    def dim(self):
        return self.mod.dim

    def spencer0(self) -> Mat:
        """Order-lowering differential J^n -> one-forms (x) J^{n-1}."""
        return -self.rho

    def __repr__(self):
        return "JetModule(%s, n=%d, dim %d)" % (self.flavor, self.n, self.dim)


def _jet_cache(calc):
    return calc._jets.setdefault("jets", {})


def jet_module(calc: Calculus, e: LeftModule, n: int, flavor=HOLONOMIC) -> JetModule:
    if flavor not in (HOLONOMIC, SESQUI, NONHOLONOMIC):
        raise ValueError("unknown jet flavor %r" % flavor)
    if n < 0:
        raise ValueError("negative jet order")
    if flavor == SESQUI and n < 2:
        flavor = HOLONOMIC
    cache = _jet_cache(calc)
    key = (id(e), n, flavor)
    got = cache.get(key)
    if got is not None:
        return got[0]
    if n == 0:
        jm = JetModule(calc, e, 0, HOLONOMIC, e, None, None, Mat.identity(e.dim),
                       iota=Mat.identity(e.dim))
    elif n == 1:
        pd = pair_module(calc, e)
        lower = jet_module(calc, e, 0, HOLONOMIC)
        jm = JetModule(
            calc, e, 1, flavor if flavor == NONHOLONOMIC else HOLONOMIC,
            pd.mod, lower, Mat.identity(pd.mod.dim), pd.j,
            iota=pd.iota, carrier=Subspace.full(pd.mod.dim),
            sym=sym_module(calc, e, 1),
        )
    elif flavor == NONHOLONOMIC:
        lower = jet_module(calc, e, n - 1, NONHOLONOMIC)
        pd = pair_module(calc, lower.mod)
        j = pd.j * lower.j
        jm = JetModule(calc, e, n, NONHOLONOMIC, pd.mod, lower,
                       Mat.identity(pd.mod.dim), j,
                       carrier=Subspace.full(pd.mod.dim))
    else:
        lower = jet_module(calc, e, n - 1, HOLONOMIC)
        pd = pair_module(calc, lower.mod)
        if n == 2:
            into_pp = Mat.identity(pd.mod.dim)
            base_of_pp = e
        else:
            lower2 = jet_module(calc, e, n - 2, HOLONOMIC)
            pd_prev = pair_module(calc, lower2.mod)
            omega_l = calc.omega_lift(1, lower.l, lower.mod, pd_prev.mod)
            top = lower.l.hstack(Mat.zeros(lower.l.rows, omega_l.cols))
            bot = Mat.zeros(omega_l.rows, lower.l.cols).hstack(omega_l)
            into_pp = top.vstack(bot)
            base_of_pp = lower2.mod
        d_first, d_second = dtilde_maps(calc, base_of_pp)
        if flavor == SESQUI:
            constraint = d_first * into_pp
        else:
            constraint = (d_first * into_pp).vstack(d_second * into_pp)
        carrier = kernel_of(constraint)
        l = carrier.basis.transpose()
        # carrier coordinates: pivot extraction against the echelon basis
        def coords(v):
            c = carrier.coords(v)
            if c is None:
                raise CalculusError("element escapes the %s jet carrier" % flavor)
            return c

        alg = calc.algebra
        left = []
        for a in range(alg.dim):
            cols_a = [coords(pd.mod.left[a].apply(l.col(t))) for t in range(carrier.dim)]
            left.append(Mat.from_rows(cols_a, carrier.dim).transpose())
        mod = LeftModule(alg, carrier.dim, left,
                         label="J%d%s(%s)" % (n, "" if flavor == HOLONOMIC else "'", e.label))
        # prolongation: j^n(e) = (j^{n-1}(e), 0)
        jcols = [coords(pd.j.apply(lower.j.col(t))) for t in range(e.dim)]
        j = Mat.from_rows(jcols, carrier.dim).transpose()
        iota = None
        sym = None
        if flavor == HOLONOMIC:
            sym = sym_module(calc, e, n)
            if lower.iota is None:
                raise CalculusError("missing symbol inclusion on lower jet")
            omega_iota = calc.omega_lift(1, lower.iota, sym.lower.mod, lower.mod)
            icols = []
            for t in range(sym.dim):
                w = omega_iota.apply(sym.iota_wedge.col(t))
                icols.append(coords(pd.iota.apply(w)))
            iota = Mat.from_rows(icols, carrier.dim).transpose()
        jm = JetModule(calc, e, n, flavor, mod, lower, l, j,
                       iota=iota, carrier=carrier, sym=sym)
    cache[key] = (jm, e)
    return jm


def flavor_inclusion(calc: Calculus, e: LeftModule, n: int, src=HOLONOMIC, dst=NONHOLONOMIC) -> Mat:
    """Matrix of the canonical inclusion between jet flavors at order n."""
    order = {HOLONOMIC: 0, SESQUI: 1, NONHOLONOMIC: 2}
    if order[src] >= order[dst]:
        raise ValueError("inclusion goes from smaller to larger flavor")
    sj = jet_module(calc, e, n, src)
    dj = jet_module(calc, e, n, dst)
    if n <= 1:
        return Mat.identity(sj.dim)
    if dst == SESQUI:
        # both are subspaces of the same pair space over the holonomic lower
        cols = []
        for t in range(sj.dim):
            v = sj.l.col(t)
            c = dj.carrier.coords(v)
            if c is None:
                raise CalculusError("holonomic jet escapes sesquiholonomic carrier")
            cols.append(c)
        return Mat.from_rows(cols, dj.dim).transpose()
    # dst nonholonomic: P applied to the lower inclusion, then l
    lower_inc = flavor_inclusion(calc, e, n - 1, src, NONHOLONOMIC) if n - 1 >= 2 else (
        Mat.identity(jet_module(calc, e, n - 1, src).dim))
    sl = jet_module(calc, e, n - 1, src)
    nl = jet_module(calc, e, n - 1, NONHOLONOMIC)
    omega_inc = calc.omega_lift(1, lower_inc, sl.mod, nl.mod)
    top = lower_inc.hstack(Mat.zeros(lower_inc.rows, omega_inc.cols))
    bot = Mat.zeros(omega_inc.rows, lower_inc.cols).hstack(omega_inc)
    return top.vstack(bot) * sj.l


def spencer_operator(calc: Calculus, jet: JetModule, m: int) -> Mat:
    """Spencer operator on m-form-valued jets of any flavor.

    Maps m-forms (x) J^n to (m+1)-forms (x) J^{n-1} by
    w (x) xi -> dw (x) pi(xi) - (-1)^m w ^ rho(l(xi)); for sesquiholonomic
    jets the target is the holonomic (n-1)-jet.
    """
    if jet.n < 1:
        raise ValueError("Spencer operator needs jet order >= 1")
    calc.check_degree(m + 1)
    cache = calc._jets.setdefault("spencer", {})
    key = (id(jet), m)
    got = cache.get(key)
    if got is not None:
        return got[0]
    lower = jet.lower
    if m == 0:
        out = -jet.rho
    else:
        _, ts_dom = calc.form_module(m, jet.mod)
        if m + 1 > calc.max_degree:
            raise CalculusError("Spencer target degree exceeds tower")
        _, ts_tgt = calc.form_module(m + 1, lower.mod)
        _, ts_rho = calc.form_module(1, lower.mod)
        dm = calc.d[m]
        sign = ONE if m % 2 == 0 else -ONE
        cols = []
        for b in range(calc.omega[m].dim):
            dwb = dm.col(b)
            for t in range(jet.dim):
                term1 = ts_tgt.class_of(dwb, jet.pi.col(t))
                rho_plain = ts_rho.sec.apply(jet.rho.col(t))
                term2 = _wedge_prepend(calc, m, b, rho_plain, lower.mod.dim, ts_tgt)
                cols.append([x - sign * y for x, y in zip(term1, term2)])
        plain = Mat.from_rows(cols, ts_tgt.dim).transpose()
        out = calc.descend(plain, ts_dom, "Spencer operator")
    cache[key] = (out, jet)
    return out


def spencer_lift_symbol_check(calc: Calculus, jet: JetModule, m: int):
    """Restriction symbol of the Spencer operator vs wedge (x) projection.

    Computes a jet lift of the operator by affine solving and returns the
    pair (computed symbol, expected symbol).
    """
    from .algebra import solve_module_maps, mat_from_flat

    smat = spencer_operator(calc, jet, m)
    dom = calc.form_module(m, jet.mod)[0] if m >= 1 else jet.mod
    tgt_mod = calc.form_module(m + 1, jet.lower.mod)[0]
    j1dom = jet_module_of(calc, dom)
    sol = solve_module_maps(j1dom.mod, tgt_mod, "left", compose_eq=[(j1dom.j, smat)])
    if sol.empty:
        raise CalculusError("Spencer operator admits no order-1 lift")
    lift = mat_from_flat(sol.particular, tgt_mod.dim, j1dom.dim)
    got = lift * j1dom.iota
    # expected: alpha (x) w (x) xi -> (alpha ^ w) (x) pi(xi)
    _, ts_dom1 = calc.form_module(1, dom)
    if m == 0:
        expected_plain_cols = []
        for b in range(calc.omega1.dim):
            for t in range(jet.dim):
                expected_plain_cols.append(
                    calc.form_module(1, jet.lower.mod)[1].class_of(
                        _basis(calc.omega1.dim, b), jet.pi.col(t))
                )
        expected = Mat.from_rows(expected_plain_cols, tgt_mod.dim).transpose() * ts_dom1.sec
        return got, expected
    _, ts_dom_inner = calc.form_module(m, jet.mod)
    _, ts_tgt = calc.form_module(m + 1, jet.lower.mod)
    o1 = calc.omega1.dim
    cols = []
    for b in range(o1):
        for u in range(dom.dim):
            inner_plain = ts_dom_inner.sec.col(u)
            acc = [ZERO] * (calc.omega[m + 1].dim * jet.lower.mod.dim)
            w1m = calc.wedge_plain(1, m)
            for idx, v in enumerate(inner_plain):
                if v:
                    c, t = divmod(idx, jet.dim)
                    wedge_col = w1m.col(b * calc.omega[m].dim + c)
                    picol = jet.pi.col(t)
                    for r, vv in enumerate(wedge_col):
                        if vv:
                            for s, pv in enumerate(picol):
                                if pv:
                                    acc[r * jet.lower.mod.dim + s] += v * vv * pv
            cols.append(ts_tgt.proj.apply(acc))
    expected = Mat.from_rows(cols, ts_tgt.dim).transpose() * ts_dom1.sec
    return got, expected


def jet_module_of(calc: Calculus, mod: LeftModule) -> JetModule:
    """Order-1 jet of an arbitrary left module (used for lifts of operators)."""
    cache = _jet_cache(calc)
    key = (id(mod), 1, HOLONOMIC)
    got = cache.get(key)
    if got is not None:
        return got[0]
    pd = pair_module(calc, mod)
    lower = JetModule(calc, mod, 0, HOLONOMIC, mod, None, None, Mat.identity(mod.dim),
                      iota=Mat.identity(mod.dim))
    jm = JetModule(calc, mod, 1, HOLONOMIC, pd.mod, lower,
                   Mat.identity(pd.mod.dim), pd.j, iota=pd.iota,
                   carrier=Subspace.full(pd.mod.dim), sym=None)
    cache[key] = (jm, mod)
    return jm


def delta_contraction(calc: Calculus, e: LeftModule, h: int, k: int) -> Mat:
    """Wedge contraction on k-forms (x) S^h, valued in (k+1)-forms (x) S^{h-1}."""
    if h < 1:
        raise ValueError("need h >= 1")
    calc.check_degree(k + 1)
    sh = sym_module(calc, e, h)
    slow = sym_module(calc, e, h - 1)
    if k == 0:
        return sh.iota_wedge
    _, ts_dom = calc.form_module(k, sh.mod)
    _, ts_1low = calc.form_module(1, slow.mod)
    _, ts_tgt = calc.form_module(k + 1, slow.mod)
    sign = ONE if k % 2 == 0 else -ONE
    cols = []
    for b in range(calc.omega[k].dim):
        for s in range(sh.dim):
            w_plain = ts_1low.sec.apply(sh.iota_wedge.col(s))
            v = _wedge_prepend(calc, k, b, w_plain, slow.mod.dim, ts_tgt)
            cols.append([sign * x for x in v])
    plain = Mat.from_rows(cols, ts_tgt.dim).transpose()
    return calc.descend(plain, ts_dom, "wedge contraction")


def spencer_complex(calc: Calculus, e: LeftModule, n: int, flavor=HOLONOMIC):
    """The length-n Spencer sequence: maps, complex verdict, cohomology dims.

    Returns a dict with the prolongation, the Spencer operators, whether all
    consecutive composites vanish, and the list of cohomology dimensions at
    positions 0..n+1.
    """
    calc.check_degree(n)
    jets = [jet_module(calc, e, kk, flavor) for kk in range(n + 1)]
    maps = [jets[n].j]
    for k in range(n):
        maps.append(spencer_operator(calc, jets[n - k], k))
    is_complex = True
    for a, b in zip(maps, maps[1:]):
        if not (b * a).is_zero():
            is_complex = False
    dims = []
    # position 0: kernel of the prolongation
    from .linalg import rank, image_of

    dims.append(e.dim - rank(maps[0]))
    for pos in range(1, n + 1):
        ker = kernel_of(maps[pos])
        img = image_of(maps[pos - 1])
        dims.append(ker.dim - intersect(ker, img).dim)
    last = maps[n]
    dims.append(last.rows - rank(last))
    return {"maps": maps, "is_complex": is_complex, "cohomology": dims}


def nu_operator(calc: Calculus, e: LeftModule, m: int):
    """Degree-raising pairing on twisted form pairs.

    nu(w (x) (alpha + beta)) = (-1)^deg(w) dw ^ alpha + w ^ beta, valued in
    (m+2)-forms (x) E.  Returns (matrix, twisted module, one-form part dim).
    """
    from .calculus import twisted_pair

    calc.check_degree(m + 2)
    tw, m1, m2 = twisted_pair(calc, e)
    _, ts_tgt = calc.form_module(m + 2, e)
    _, ts1e = calc.form_module(1, e)
    _, ts2e = calc.form_module(2, e)
    if m == 0:
        # projection onto the second summand
        zero = Mat.zeros(ts_tgt.dim, m1.dim)
        second = Mat.identity(m2.dim) if ts_tgt.dim == m2.dim else None
        if second is None:
            raise CalculusError("degree-2 target misaligned")
        return zero.hstack(second), tw, m1.dim
    _, ts_dom = calc.form_module(m, tw)
    dm = calc.d[m]
    sign = ONE if m % 2 == 0 else -ONE
    o1 = calc.omega1.dim
    cols = []
    wm2 = calc.wedge_plain(m, 2)
    wm11 = calc.wedge_plain(m + 1, 1)
    for b in range(calc.omega[m].dim):
        for t in range(tw.dim):
            if t < m1.dim:
                # (-1)^m dw ^ alpha with alpha in one-forms (x) E
                alpha_plain = ts1e.sec.col(t)
                acc = [ZERO] * (calc.omega[m + 2].dim * e.dim)
                dwb = dm.col(b)
                for idx, v in enumerate(alpha_plain):
                    if v:
                        c, ee = divmod(idx, e.dim)
                        for r1, v1 in enumerate(dwb):
                            if v1:
                                col = wm11.col(r1 * o1 + c)
                                for r, vv in enumerate(col):
                                    if vv:
                                        acc[r * e.dim + ee] += sign * v * v1 * vv
                cols.append(ts_tgt.proj.apply(acc))
            else:
                beta_plain = ts2e.sec.col(t - m1.dim)
                acc = [ZERO] * (calc.omega[m + 2].dim * e.dim)
                for idx, v in enumerate(beta_plain):
                    if v:
                        c, ee = divmod(idx, e.dim)
                        col = wm2.col(b * calc.omega[2].dim + c)
                        for r, vv in enumerate(col):
                            if vv:
                                acc[r * e.dim + ee] += v * vv
                cols.append(ts_tgt.proj.apply(acc))
    plain = Mat.from_rows(cols, ts_tgt.dim).transpose()
    return calc.descend(plain, ts_dom, "nu operator"), tw, m1.dim


def elemental_span(calc: Calculus, jet: JetModule) -> Subspace:
    """Left-action closure of the prolongation image inside the carrier."""
    gens = [jet.j.col(t) for t in range(jet.j.cols)]
    return module_closure(jet.mod, gens)


def holonomic_via_spencer(calc: Calculus, e: LeftModule, n: int) -> Subspace:
    """Holonomic carrier recomputed as a Spencer kernel on sesquiholonomic jets.

    Returns the kernel subspace expressed in P(J^{n-1}) coordinates so it can
    be compared with the holonomic carrier directly.
    """
    if n < 2:
        raise ValueError("needs n >= 2")
    sq = jet_module(calc, e, n, SESQUI)
    lower = jet_module(calc, e, n - 1, HOLONOMIC)
    sbar = -sq.rho  # sesquiholonomic Spencer at m=0, valued in holonomic lower
    s11 = spencer_operator(calc, lower, 1)
    composite = s11 * sbar
    ker = kernel_of(composite)
    gens = [sq.l.apply(list(row)) for row in ker.basis.data]
    return span_of(gens, sq.l.rows)


def jet_exactness(calc: Calculus, e: LeftModule, n: int):
    """Exactness data of the order-n jet sequence plus the pullback check."""
    jet = jet_module(calc, e, n, HOLONOMIC)
    lower = jet.lower
    sym = jet.sym
    from .linalg import rank, image_of

    report = {}
    report["dims"] = (sym.dim, jet.dim, lower.dim)
    report["pi_surjective"] = rank(jet.pi) == lower.dim
    report["iota_injective"] = rank(jet.iota) == sym.dim
    ker_pi = kernel_of(jet.pi)
    im_iota = image_of(jet.iota)
    report["image_is_kernel"] = ker_pi == im_iota
    report["dims_additive"] = jet.dim == lower.dim + sym.dim
    if n >= 1:
        # pullback: carrier intersect (prolongations of the lower jet) equals
        # the prolongation image of the base
        pd = pair_module(calc, lower.mod)
        j1_image = span_of([pd.j.col(t) for t in range(lower.dim)], pd.mod.dim)
        carrier = jet.carrier if jet.carrier is not None else Subspace.full(pd.mod.dim)
        inter = intersect(carrier, j1_image)
        jn_image = span_of([(jet.l * jet.j).col(t) for t in range(e.dim)], pd.mod.dim)
        report["pullback_square"] = inter == jn_image
        report["pullback_dim"] = inter.dim
    report["exact"] = all(
        report[k] for k in ("pi_surjective", "iota_injective", "image_is_kernel", "dims_additive")
    )
    return report


def bicomplex_report(calc: Calculus, e: LeftModule, n: int, corrupt_sign=False):
    """Commutativity of every cell of the jet/symbol double complex.

    Rows k = 0..n read: k-forms (x) S^{n-k} -> k-forms (x) J^{n-k} ->
    k-forms (x) J^{n-k-1}; columns are the wedge contraction (with a minus
    sign), and two Spencer operators.  corrupt_sign flips the contraction
    sign to provide a negative control.
    """
    calc.check_degree(n)
    jets = [jet_module(calc, e, kk, HOLONOMIC) for kk in range(n + 1)]
    syms = [sym_module(calc, e, kk) for kk in range(n + 1)]
    cells = []

    def omega_of(k, f, src, dst):
        return calc.omega_lift(k, f, src, dst) if k >= 1 else f

    # top square: pi o j^n = j^{n-1}
    cells.append(("projection of top prolongation", (jets[n].pi * jets[n].j) == jets[n - 1].j))
    dsign = -ONE if corrupt_sign else ONE
    for k in range(n + 1):
        h = n - k
        # row complex: pi o iota = 0 (when both legs exist)
        if h >= 1:
            om_iota = omega_of(k, jets[h].iota, syms[h].mod, jets[h].mod)
            om_pi = omega_of(k, jets[h].pi, jets[h].mod, jets[h - 1].mod)
            cells.append(("row %d composite" % k, (om_pi * om_iota).is_zero()))
            row_exact = kernel_of(om_pi) == span_of(
                [om_iota.col(t) for t in range(om_iota.cols)], om_iota.rows
            )
            cells.append(("row %d exactness" % k, row_exact))
        if k == n:
            continue
        # vertical maps from row k to row k+1
        if h >= 1:
            delta = delta_contraction(calc, e, h, k).scale(dsign)
            smat = spencer_operator(calc, jets[h], k)
            om_iota = omega_of(k, jets[h].iota, syms[h].mod, jets[h].mod)
            om_iota_low = omega_of(k + 1, jets[h - 1].iota, syms[h - 1].mod, jets[h - 1].mod)
            lhs = smat * om_iota
            rhs = om_iota_low * (-delta)
            cells.append(("left square row %d" % k, lhs == rhs))
            if h >= 2:
                om_pi = omega_of(k, jets[h].pi, jets[h].mod, jets[h - 1].mod)
                om_pi_low = omega_of(k + 1, jets[h - 1].pi, jets[h - 1].mod, jets[h - 2].mod)
                s_low = spencer_operator(calc, jets[h - 1], k)
                cells.append(
                    ("right square row %d" % k, (s_low * om_pi) == (om_pi_low * smat))
                )
        # column composites
        if h >= 2 and k + 2 <= calc.max_degree:
            s1 = spencer_operator(calc, jets[h], k)
            s2 = spencer_operator(calc, jets[h - 1], k + 1)
            cells.append(("middle column %d" % k, (s2 * s1).is_zero()))
            d1 = delta_contraction(calc, e, h, k).scale(dsign)
            d2 = delta_contraction(calc, e, h - 1, k + 1).scale(dsign)
            cells.append(("left column %d" % k, (d2 * d1).is_zero()))
    cells.append(("top Spencer kills prolongation",
                  (spencer_operator(calc, jets[n], 0) * jets[n].j).is_zero()))
    ok = all(flag for _, flag in cells)
    return {"cells": cells, "all_pass": ok}
