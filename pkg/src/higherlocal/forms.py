"""Differential forms over residue fields with a finite p-base.

Two residue-field shapes arise here: a finite field F_q (empty p-base, so
only degree-0 forms are nonzero) and a one-level Laurent field F_q((t))
(p-base [t], so the interesting forms are x dlog t in degree 1).  Forms are
kept in dlog-monomial normal form: a degree-1 form stores the single
coefficient x of x dlog t.

The quotient Omega^(d-1) / ((F-1)Omega^(d-1) + d Omega^(d-2)) is reduced to
Z/p constructively: quotient_reduce computes the class and residue_decompose
exhibits explicit witnesses eta, xi for membership of the complement.
"""

from .ffield import FFElem, FField
from .tower import INF, FieldConfig, PrecisionError, TowerElement


class FormContext:
    """Where a form lives: ('finite', FField) or ('laurent', FieldConfig d=1)."""

    def __init__(self, field):
        if isinstance(field, FField):
            self.kind = "finite"
            self.ff = field
            self.cfg = None
            self.p_base = ()
        elif isinstance(field, FieldConfig):
            if field.d != 1:
                raise ValueError("forms are supported over F_q and F_q((t)) only")
            self.kind = "laurent"
            self.ff = field.ff
            self.cfg = field
            self.p_base = (field.vars[0],)
        else:
            raise TypeError("expected an FField or a depth-1 FieldConfig")
        self.p = self.ff.p

    def max_degree(self):
        return len(self.p_base)

    def zero_elem(self):
        return self.ff.zero if self.kind == "finite" else self.cfg.zero(1)

    def __eq__(self, other):
        return (
            isinstance(other, FormContext)
            and self.kind == other.kind
            and self.ff == other.ff
        )

    def __repr__(self):
        return f"FormContext({self.kind}, q={self.ff.q})"


class DiffForm:
    """A differential form of fixed degree in dlog-monomial normal form.

    degree 0 stores the field element itself; degree 1 over a Laurent
    residue field stores x with the meaning x dlog t.  Degrees above the
    p-base size collapse to the zero form.
    """

    __slots__ = ("ctx", "degree", "coeff")

    def __init__(self, ctx, degree, coeff=None):
        if degree < 0:
            raise ValueError("negative form degree")
        self.ctx = ctx
        self.degree = degree
        if degree > ctx.max_degree():
            coeff = None  # Omega^q = 0 above the p-base size
        elif coeff is None:
            coeff = ctx.zero_elem()
        self.coeff = coeff

    def is_structural_zero(self):
        return self.coeff is None

    def is_known_zero(self):
        if self.coeff is None:
            return True
        if isinstance(self.coeff, FFElem):
            return self.coeff.is_zero()
        return self.coeff.is_known_zero()

    def is_exact_zero(self):
        if self.coeff is None:
            return True
        if isinstance(self.coeff, FFElem):
            return self.coeff.is_zero()
        return self.coeff.is_exact_zero()

    def _peer(self, other):
        if not isinstance(other, DiffForm) or other.ctx != self.ctx \
                or other.degree != self.degree:
            raise ValueError("forms of different context or degree")
        return other

    def __add__(self, other):
        other = self._peer(other)
        if self.coeff is None:
            return self
        return DiffForm(self.ctx, self.degree, self.coeff + other.coeff)

    def __neg__(self):
        if self.coeff is None:
            return self
        return DiffForm(self.ctx, self.degree, -self.coeff)

    def __sub__(self, other):
        return self + (-self._peer(other))

    def times(self, k):
        if self.coeff is None:
            return self
        return DiffForm(self.ctx, self.degree, self.coeff.times(k))

    def scale(self, c):
        """Multiply by a residue-field element."""
        if self.coeff is None:
            return self
        return DiffForm(self.ctx, self.degree, self.coeff * c)

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        if self.ctx != other.ctx or self.degree != other.degree:
            return False
        if self.coeff is None or other.coeff is None:
            return self.is_known_zero() and other.is_known_zero()
        return self.coeff == other.coeff

    def __hash__(self):
        return hash((self.degree, None if self.coeff is None else
                     (self.coeff.key() if isinstance(self.coeff, TowerElement)
                      else self.coeff.code)))

    def __str__(self):
        if self.is_structural_zero():
            return "0"
        if self.degree == 0:
            return str(self.coeff)
        return f"({self.coeff}) dlog {self.ctx.p_base[0]}"

    def __repr__(self):
        return f"DiffForm<deg {self.degree}: {self}>"


def zero_form(ctx, degree):
    return DiffForm(ctx, degree)


def dlog(ctx, y):
    """dlog y as a degree-1 form; y must be a nonzero residue-field element."""
    if ctx.kind == "finite":
        if y.is_zero():
            raise ZeroDivisionError("dlog of zero")
        return DiffForm(ctx, 1)  # Omega^1 over a perfect field vanishes
    if y.is_exact_zero():
        raise ZeroDivisionError("dlog of zero")
    t = ctx.cfg.var_elem(ctx.p_base[0])
    return DiffForm(ctx, 1, t * y.derivative() / y)


def d(ctx, x):
    """The exterior derivative of a degree-0 form, in dlog normal form."""
    if ctx.kind == "finite":
        return DiffForm(ctx, 1)
    t = ctx.cfg.var_elem(ctx.p_base[0])
    return DiffForm(ctx, 1, t * x.derivative())


def inverse_cartier(form):
    """The semilinear operator F: x dlog y1 ^ ... -> x^p dlog y1 ^ ..."""
    if form.coeff is None:
        return form
    return DiffForm(form.ctx, form.degree, form.coeff.frobenius())


def frobenius_minus_one(form):
    return inverse_cartier(form) - form


def residue(form):
    """Res(x dlog t): the t^0 coefficient of x, as an element of F_q."""
    if form.ctx.kind != "laurent" or form.degree != 1:
        raise ValueError("residue expects a degree-1 form over F_q((t))")
    if form.coeff is None:
        return form.ctx.ff.zero
    if form.coeff.known_to < 1:
        raise PrecisionError("constant coefficient of the residue is unknown")
    return form.coeff.residue0()


def _trace_one_elem(ff):
    """The smallest-code element of trace 1 (exists: trace is surjective)."""
    for c in range(ff.q):
        if ff.trace_code(c) == 1:
            return FFElem(ff, c)
    raise AssertionError("trace cannot be identically zero")


def solve_artin_schreier_const(ff, c):
    """Some e with e^p - e = c, or None (exists iff Tr(c) = 0)."""
    for code in range(ff.q):
        e = FFElem(ff, code)
        if e.frobenius() - e == c:
            return e
    return None


def quotient_reduce(form, dim):
    """The class of a degree-(dim-1) form in
    Omega^(dim-1)/((F-1)Omega^(dim-1) + d Omega^(dim-2)), as an int mod p.

    dim = 1: forms are F_q elements, the class is the trace.
    dim = 2: forms are x dlog t over F_q((t)), the class is Tr(Res(x dlog t)).
    """
    ctx = form.ctx
    if dim == 1:
        if ctx.kind != "finite" or form.degree != 0:
            raise ValueError("dim 1 needs a degree-0 form over F_q")
        return form.coeff.trace()
    if dim == 2:
        if ctx.kind != "laurent" or form.degree != 1:
            raise ValueError("dim 2 needs a degree-1 form over F_q((t))")
        return residue(form).trace()
    raise ValueError("only residue fields of dimension 0 and 1 are supported")


def residue_decompose(form):
    """Witnesses for the degree-1 quotient reduction over F_q((t)).

    Returns (c0, eta, xi) with  form = c0 dlog t + (F-1)eta + d xi  exactly,
    where c0 in F_q has trace equal to quotient_reduce(form, 2), eta is a
    degree-1 form and xi a field element.  Requires an exact coefficient.
    """
    ctx = form.ctx
    if ctx.kind != "laurent" or form.degree != 1:
        raise ValueError("expected a degree-1 form over F_q((t))")
    x = form.coeff
    if x is None:
        x = ctx.zero_elem()
    if x.known_to < INF:
        raise PrecisionError("decomposition requires an exact form")
    ff = ctx.ff
    p = ctx.p
    cfg = ctx.cfg
    work = {e: c for e, c in x.terms.items()}
    eta = {}
    xi = {}
    exps = sorted(e for e in work if e != 0)
    while exps:
        j = exps.pop()
        c = work.pop(j, None)
        if c is None or c.is_zero():
            continue
        if j % p:
            # c t^j dlog t = d((c/j) t^j)
            xi[j] = xi.get(j, ff.zero) + c / ff.from_int(j % p)
        else:
            # c t^j dlog t = (F-1)(r t^(j/p) dlog t) + r t^(j/p) dlog t
            r = c.pth_root()
            jj = j // p
            eta[jj] = eta.get(jj, ff.zero) + r
            if jj == 0:
                work[0] = work.get(0, ff.zero) + r
            else:
                if jj not in work:
                    exps.append(jj)
                    exps.sort()
                work[jj] = work.get(jj, ff.zero) + r
    c = work.get(0, ff.zero)
    tau = c.trace()
    theta = _trace_one_elem(ff)
    c0 = theta.times(tau)
    e = solve_artin_schreier_const(ff, c - c0)
    assert e is not None, "trace-zero constants are Artin-Schreier solvable"
    eta[0] = eta.get(0, ff.zero) + e
    eta_elem = TowerElement(cfg, 1, eta, INF)
    xi_elem = TowerElement(cfg, 1, xi, INF)
    return c0, DiffForm(ctx, 1, eta_elem), xi_elem
