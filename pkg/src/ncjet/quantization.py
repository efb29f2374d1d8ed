"""Differential operators, quantization maps, and star products.

An operator E -> F is any linear map; its order is the least n admitting a
module-linear factorization through the order-n jet prolongation.  A
quantization assigns to every degree-n symbol an order-n operator through a
chain of connections on the symmetric-form modules, split by retractions of
the wedge-kernel inclusions.  The star product deforms symbol
multiplication by quantize-compose-resymbolize, graded by a central formal
variable.
"""

from __future__ import annotations

from .linalg import Mat, ONE, rat
from .algebra import LeftModule, mat_from_flat, solve_module_maps
from .calculus import Calculus, CalculusError
from .connections import BimoduleConnection, Connection, tensor_connection
from .jets import HOLONOMIC, JetModule, jet_module, sym_module, elemental_span


class LiftError(CalculusError):
    pass


class OperatorContext:
    """Jet/symbol data for operators from a fixed module to itself or another.

    order_cap defaults to the first degree with vanishing symmetric forms
    (jet stabilization), else to max_order.
    """

    def __init__(self, calc: Calculus, e: LeftModule, f: LeftModule = None, max_order=4):
        self.calc = calc
        self.e = e
        self.f = f if f is not None else e
        cap = None
        for n in range(max_order + 1):
            if sym_module(calc, e, n).dim == 0:
                cap = n
                break
        self.order_cap = cap if cap is not None else max_order
        self._lift_unique = {}
        self._lift_cache = {}
        self._order_cache = {}

    def jet(self, n) -> JetModule:
        return jet_module(self.calc, self.e, n, HOLONOMIC)

    def sym(self, n):
        return sym_module(self.calc, self.e, n)

    def lift_unique(self, n) -> bool:
        """Jet lifts at order n are unique iff prolongations span the jets."""
        got = self._lift_unique.get(n)
        if got is None:
            jet = self.jet(n)
            got = elemental_span(self.calc, jet).dim == jet.dim
            self._lift_unique[n] = got
        return got

    def op_lift(self, mat: Mat, n: int, target: LeftModule = None) -> Mat:
        """Module-linear lift through the order-n jets, canonical when free.

        Raises LiftError when the operator has order above n.
        """
        target = target if target is not None else self.f
        key = (mat, n, id(target))
        got = self._lift_cache.get(key)
        if got is not None:
            return got
        jet = self.jet(n)
        sol = solve_module_maps(jet.mod, target, "left", compose_eq=[(jet.j, mat)])
        if sol.empty:
            raise LiftError("operator does not factor through order-%d jets" % n)
        lift = mat_from_flat(sol.particular, target.dim, jet.dim)
        self._lift_cache[key] = lift
        return lift

    def op_order(self, mat: Mat, target: LeftModule = None):
        """Least order <= cap admitting a jet factorization, or None."""
        key = (mat, id(target) if target is not None else None)
        if key in self._order_cache:
            return self._order_cache[key]
        out = None
        for n in range(self.order_cap + 1):
            try:
                self.op_lift(mat, n, target)
                out = n
                break
            except LiftError:
                continue
        self._order_cache[key] = out
        return out

    def symbol_of(self, mat: Mat, n: int, target: LeftModule = None) -> "Symbol":
        """Degree-n restriction symbol (lift composed with symbol inclusion)."""
        lift = self.op_lift(mat, n, target)
        return Symbol(n, lift * self.jet(n).iota)


class Symbol:
    """Degree-n symbol: a module-linear map on symmetric n-forms."""

    __slots__ = ("degree", "mat")

    def __init__(self, degree, mat: Mat):
        self.degree = degree
        self.mat = mat

    def __eq__(self, other):
        return (
            isinstance(other, Symbol)
            and self.degree == other.degree
            and self.mat == other.mat
        )

    def is_zero(self):
        return self.mat.is_zero()

    def __add__(self, other):
        if other.degree != self.degree:
            raise ValueError("cannot add symbols of different degree")
        return Symbol(self.degree, self.mat + other.mat)

    def __neg__(self):
        return Symbol(self.degree, -self.mat)

    def scale(self, c):
        return Symbol(self.degree, self.mat.scale(c))

    def __repr__(self):
        return "Symbol(deg %d)" % self.degree


class GradedSymbol:
    """Finitely supported map degree -> Symbol."""

    def __init__(self, parts=()):
        self.parts = {}
        for s in parts:
            self._add(s)

    def _add(self, s: Symbol):
        if s.is_zero():
            return
        cur = self.parts.get(s.degree)
        merged = s if cur is None else cur + s
        if merged.is_zero():
            self.parts.pop(s.degree, None)
        else:
            self.parts[s.degree] = merged

    def __add__(self, other):
        out = GradedSymbol(list(self.parts.values()))
        for s in other.parts.values():
            out._add(s)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = rat(c)
        if not c:
            return GradedSymbol()
        return GradedSymbol([s.scale(c) for s in self.parts.values()])

    def __eq__(self, other):
        return isinstance(other, GradedSymbol) and self.parts == other.parts

    def is_zero(self):
        return not self.parts

    def degrees(self):
        return sorted(self.parts)

    def top_degree(self):
        return max(self.parts) if self.parts else None

    def __repr__(self):
        return "GradedSymbol(degrees %s)" % self.degrees()

    @staticmethod
    def of(sym: Symbol):
        return GradedSymbol([sym])


class HPoly:
    """Polynomial in a central variable with graded-symbol coefficients.

    Negative powers are admitted only when allow_negative is set (the
    localized variant used by the deformed total symbol).
    """

    def __init__(self, coeffs=None, allow_negative=False):
        self.allow_negative = allow_negative
        self.coeffs = {}
        if coeffs:
            for p, gs in coeffs.items():
                self._set(p, gs)

    def _set(self, p, gs: GradedSymbol):
        if p < 0 and not self.allow_negative:
            raise ValueError("negative powers are not allowed here")
        if gs.is_zero():
            self.coeffs.pop(p, None)
        else:
            self.coeffs[p] = gs

    def add_term(self, p, gs: GradedSymbol):
        cur = self.coeffs.get(p, GradedSymbol())
        self._set(p, cur + gs)

    def __add__(self, other):
        out = HPoly(dict(self.coeffs), allow_negative=self.allow_negative or other.allow_negative)
        for p, gs in other.coeffs.items():
            out.add_term(p, gs)
        return out

    def __eq__(self, other):
        return isinstance(other, HPoly) and self.coeffs == other.coeffs

    def is_zero(self):
        return not self.coeffs

    def powers(self):
        return sorted(self.coeffs)

    def evaluate(self, hbar) -> GradedSymbol:
        hbar = rat(hbar)
        out = GradedSymbol()
        for p, gs in self.coeffs.items():
            if p < 0:
                if not hbar:
                    raise ZeroDivisionError("cannot evaluate negative powers at zero")
                out = out + gs.scale(ONE / hbar ** (-p))
            else:
                out = out + gs.scale(hbar**p)
        return out

    def __repr__(self):
        return "HPoly(powers %s)" % self.powers()


class Quantization:
    """Per-degree sections of the symbol map, built from a connection chain.

    chain[k] is the universal order-k operator from the base module to the
    symmetric k-forms; q^k(symbol) = symbol o chain[k].  The section law
    (symbol of q^k(s) is s) is verified on construction through the lifts.
    """

    def __init__(self, ctx: OperatorContext, chain, sym_conns, retractions):
        self.ctx = ctx
        self.chain = chain            # k -> Mat E -> S^k
        self.sym_conns = sym_conns    # k -> Connection on S^k (provenance)
        self.retractions = retractions
        self.cap = max(chain)
        self._chain_lift = {}
        self._zeta_cache = {}
        self._trunc_cache = {}
        for k in range(self.cap + 1):
            lift = ctx.op_lift(chain[k], k, target=ctx.sym(k).mod)
            if lift * ctx.jet(k).iota != Mat.identity(ctx.sym(k).dim):
                raise CalculusError(
                    "chain operator at degree %d is not a splitting" % k
                )
            self._chain_lift[k] = lift

    def chain_lift(self, k: int) -> Mat:
        """The left splitting of the order-k jet sequence behind q^k."""
        return self._chain_lift[k]

    def q(self, sym: Symbol) -> Mat:
        """Order-(deg) operator realizing the symbol."""
        if sym.degree > self.cap:
            raise ValueError("degree beyond quantization cap")
        return sym.mat * self.chain[sym.degree]

    def q_graded(self, gs: GradedSymbol) -> Mat:
        out = Mat.zeros(self.ctx.f.dim, self.ctx.e.dim)
        for s in gs.parts.values():
            out = out + self.q(s)
        return out

    def zeta(self, mat: Mat, k: int, target=None) -> Symbol:
        """Degree-k symbol of an operator of order <= k."""
        key = (mat, k, id(target))
        got = self._zeta_cache.get(key)
        if got is None:
            lift = self.ctx.op_lift(mat, k, target=target)
            got = Symbol(k, lift * self.ctx.jet(k).iota)
            self._zeta_cache[key] = got
        return got

    def truncate(self, mat: Mat, k: int, target=None) -> Mat:
        """Order-<=k remainder after stripping quantized top symbols."""
        key = (mat, k, id(target))
        got = self._trunc_cache.get(key)
        if got is not None:
            return got
        order = self.ctx.op_order(mat, target=target)
        if order is None:
            raise LiftError("operator has no finite order within the cap")
        cur = mat
        for j in range(order, k, -1):
            cur = cur - self.q(self.zeta(cur, j, target=target))
        self._trunc_cache[key] = cur
        return cur

    def graded_piece(self, mat: Mat, k: int, target=None) -> Symbol:
        return self.zeta(self.truncate(mat, k, target=target), k, target=target)

    def total_symbol(self, mat: Mat, target=None) -> GradedSymbol:
        order = self.ctx.op_order(mat, target=target)
        if order is None:
            raise LiftError("operator has no finite order within the cap")
        return GradedSymbol(
            [self.graded_piece(mat, k, target=target) for k in range(order + 1)]
        )

    def homogeneous_component(self, mat: Mat, k: int, target=None) -> Mat:
        return self.q(self.graded_piece(mat, k, target=target))

    def star_formal(self, a: Symbol, b: Symbol) -> HPoly:
        """Formal star product of two pure symbols."""
        comp = self.q(a) * self.q(b)
        n = a.degree + b.degree
        out = HPoly()
        for k in range(n + 1):
            piece = self.graded_piece(comp, n - k)
            if not piece.is_zero():
                out.add_term(k, GradedSymbol.of(piece))
        return out

    def star_formal_graded(self, a: GradedSymbol, b: GradedSymbol) -> HPoly:
        out = HPoly()
        for da in sorted(a.parts):
            for db in sorted(b.parts):
                out = out + self.star_formal(a.parts[da], b.parts[db])
        return out

    def star_poly(self, a: HPoly, b: HPoly) -> HPoly:
        """Bilinear extension of the formal star to polynomial arguments."""
        out = HPoly(allow_negative=a.allow_negative or b.allow_negative)
        for pa, ga in a.coeffs.items():
            for pb, gb in b.coeffs.items():
                inner = self.star_formal_graded(ga, gb)
                for p, gs in inner.coeffs.items():
                    out.add_term(pa + pb + p, gs)
        return out

    def star_eval(self, a, b, hbar) -> GradedSymbol:
        """Parametrized star product (evaluation of the formal one)."""
        if isinstance(a, Symbol):
            a = GradedSymbol.of(a)
        if isinstance(b, Symbol):
            b = GradedSymbol.of(b)
        return self.star_formal_graded(a, b).evaluate(hbar)

    def symbol_product(self, a: Symbol, b: Symbol) -> Symbol:
        """Top-degree symbol of the composite of quantized operators."""
        return self.graded_piece(self.q(a) * self.q(b), a.degree + b.degree)

    def q_deformed(self, gs: GradedSymbol, hbar) -> Mat:
        """Sum of hbar^k-weighted degree-k quantizations."""
        hbar = rat(hbar)
        out = Mat.zeros(self.ctx.f.dim, self.ctx.e.dim)
        for k, s in gs.parts.items():
            out = out + self.q(s).scale(hbar**k)
        return out

    def total_symbol_deformed(self, mat: Mat, hbar) -> GradedSymbol:
        """Inverse of the deformed quantization (hbar must be invertible)."""
        hbar = rat(hbar)
        if not hbar:
            raise ZeroDivisionError("deformed total symbol needs nonzero parameter")
        order = self.ctx.op_order(mat)
        if order is None:
            raise LiftError("operator has no finite order within the cap")
        out = GradedSymbol()
        for k in range(order + 1):
            piece = self.graded_piece(mat, k)
            out = out + GradedSymbol.of(piece).scale(ONE / hbar**k)
        return out

    def total_symbol_formal_deformed(self, op_poly: dict) -> HPoly:
        """Formal localized total symbol of a polynomial of operators.

        op_poly maps powers to operator matrices; the result carries the
        graded pieces at shifted (possibly negative) powers.
        """
        out = HPoly(allow_negative=True)
        for p, mat in op_poly.items():
            order = self.ctx.op_order(mat)
            if order is None:
                raise LiftError("operator has no finite order within the cap")
            for k in range(order + 1):
                piece = self.graded_piece(mat, k)
                if not piece.is_zero():
                    out.add_term(p - k, GradedSymbol.of(piece))
        return out

    def q_formal(self, hp: HPoly) -> dict:
        """Formal deformed quantization of a symbol polynomial."""
        out = {}
        for p, gs in hp.coeffs.items():
            for k, s in gs.parts.items():
                mat = self.q(s)
                key = p + k
                out[key] = out.get(key, Mat.zeros(mat.rows, mat.cols)) + mat
        return {p: m for p, m in out.items() if not m.is_zero()}


def retraction_solver(calc: Calculus, e: LeftModule, k: int):
    """Canonical two-sided-linear retraction of the wedge-kernel inclusion.

    Returns a matrix one-forms (x) S^k -> S^{k+1} with s o inclusion = id,
    or None when no bimodule retraction exists.
    """
    sym_hi = sym_module(calc, e, k + 1)
    sym_lo = sym_module(calc, e, k)
    fm, _ = calc.form_module(1, sym_lo.mod)
    if sym_hi.dim == 0:
        return Mat.zeros(0, fm.dim)
    from .algebra import Bimodule

    linearity = "bilinear" if isinstance(fm, Bimodule) else "left"
    sol = solve_module_maps(
        fm, sym_hi.mod, linearity,
        compose_eq=[(sym_hi.iota_wedge, Mat.identity(sym_hi.dim))],
    )
    if sol.empty:
        return None
    return mat_from_flat(sol.particular, sym_hi.dim, fm.dim)


def sym_connection_chain(calc: Calculus, e: LeftModule, bconn: BimoduleConnection,
                         conn_e: Connection, cap: int):
    """Connections on the symmetric-form modules up to the cap.

    Degree 0 is the given connection on the base module; degree k pushes
    the braided tensor connection through the retraction of the wedge-kernel
    inclusion.  Returns (connections dict, retractions dict).
    """
    conns = {0: conn_e}
    retractions = {}
    for k in range(1, cap + 1):
        lower = conns[k - 1]
        tens = tensor_connection(calc, bconn, lower)
        if k == 1:
            conns[1] = tens
            continue
        sym_k = sym_module(calc, e, k)
        s = retraction_solver(calc, e, k - 1)
        if s is None:
            raise CalculusError("no retraction of the wedge-kernel inclusion "
                                "at degree %d" % (k - 1))
        retractions[k - 1] = s
        if sym_k.dim == 0:
            conns[k] = Connection(calc, sym_k.mod,
                                  Mat.zeros(0, 0), check=False)
            continue
        omega_s = calc.omega_lift(1, s, conns[k - 1].form_module, sym_k.mod)
        mat = omega_s * tens.mat * sym_module(calc, e, k).iota_wedge
        conns[k] = Connection(calc, sym_k.mod, mat)
    return conns, retractions


def build_quantization(calc: Calculus, e: LeftModule, bconn: BimoduleConnection,
                       conn_e: Connection, max_order=4) -> Quantization:
    """Full quantization from a braided connection and a base connection."""
    ctx = OperatorContext(calc, e, max_order=max_order)
    cap = ctx.order_cap
    for n in range(cap + 1):
        if not ctx.lift_unique(n):
            raise CalculusError("jet lifts are not unique at order %d; "
                                "quantization refuses to pick silently" % n)
    conns, retractions = sym_connection_chain(calc, e, bconn, conn_e, cap)
    chain = {0: Mat.identity(e.dim), }
    if cap >= 1:
        chain[1] = conn_e.mat
    for k in range(2, cap + 1):
        s = retractions.get(k - 1)
        if s is None:
            s = retraction_solver(calc, e, k - 1)
            if s is None:
                raise CalculusError("no retraction at degree %d" % (k - 1))
            retractions[k - 1] = s
        chain[k] = s * conns[k - 1].mat * chain[k - 1]
    return Quantization(ctx, chain, conns, retractions)


def partial_operators(calc: Calculus):
    """Frame-coefficient operators of the differential, for framed calculi.

    Requires the one-forms to be a declared free left module on a frame;
    returns one matrix per frame element with d(h) = sum (op_t h) * theta_t.
    """
    frame = getattr(calc, "left_frame_size", None)
    if not frame:
        raise CalculusError("calculus has no declared left frame")
    d0 = calc.d[0]
    da = calc.algebra.dim
    ops = []
    for t in range(frame):
        rows = [d0.data[t * da + q] for q in range(da)]
        ops.append(Mat(da, da, rows))
    return ops
