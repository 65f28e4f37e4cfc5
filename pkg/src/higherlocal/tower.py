"""Iterated truncated Laurent series towers K = F_q((t_1))...((t_d)).

Elements track an explicit precision bound ``known_to``: the element is known
exactly below that exponent at its outermost level and is O(var^known_to)
beyond it.  Exact elements (Laurent polynomials) carry ``known_to = INF``.
Operations propagate bounds by the usual big-O rules and raise
:class:`PrecisionError` instead of silently inventing coefficients.

Levels are numbered from the inside out: a level-1 element is a series in
``vars[0]`` with F_q coefficients, a level-2 element is a series in
``vars[1]`` whose coefficients are level-1 elements, and so on.
"""

import ast

from .ffield import FFElem, get_field
from .kernels import conv_trunc

INF = 10**9


class PrecisionError(ArithmeticError):
    """An operation needed coefficients beyond the known precision."""


class ParseError(ValueError):
    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


def _sat_add(a, b):
    return INF if a >= INF or b >= INF else a + b


class FieldConfig:
    """A d-dimensional Laurent tower: base field, variable names, windows.

    ``vars`` lists uniformizers innermost first; ``prec`` gives the per-level
    truncation window used whenever an operation (division, root solving)
    must truncate an infinite expansion.
    """

    def __init__(self, p, f, vars, prec, modulus=None, allow_deep=False):
        if not (2 <= p <= 7):
            raise ValueError("p must be a prime in 2..7")
        if not (1 <= f <= 3):
            raise ValueError("f must be in 1..3")
        vars = tuple(vars)
        prec = tuple(int(m) for m in prec)
        max_d = 3 if allow_deep else 2
        if not (1 <= len(vars) <= max_d):
            raise ValueError(f"tower depth must be in 1..{max_d}")
        if len(prec) != len(vars):
            raise ValueError("prec must list one window per level")
        if any(m < 8 for m in prec):
            raise ValueError("each precision window must be >= 8")
        if len(set(vars)) != len(vars):
            raise ValueError("variable names must be distinct")
        for v in vars:
            if not v.isidentifier() or v == "g":
                raise ValueError(f"bad variable name {v!r}")
        self.ff = get_field(p, f, modulus)
        self.p = p
        self.f = f
        self.q = self.ff.q
        self.modulus = self.ff.modulus
        self.vars = vars
        self.prec = prec
        self.d = len(vars)
        self._sub = None

    @property
    def sub(self):
        """The residue tower (one level shallower); None when d = 1."""
        if self.d == 1:
            return None
        if self._sub is None:
            self._sub = FieldConfig(
                self.p, self.f, self.vars[:-1], self.prec[:-1],
                modulus=self.modulus, allow_deep=True,
            )
        return self._sub

    def at_level(self, level):
        """The config whose top level is `level` (level 0 -> the FField)."""
        if level == 0:
            return self.ff
        cfg = self
        while cfg.d > level:
            cfg = cfg.sub
        return cfg

    # -- element constructors -------------------------------------------

    def zero(self, level=None):
        level = self.d if level is None else level
        if level == 0:
            return self.ff.zero
        return TowerElement(self, level, {}, INF)

    def one(self, level=None):
        level = self.d if level is None else level
        if level == 0:
            return self.ff.one
        return TowerElement(self, level, {0: self.one(level - 1)}, INF)

    def from_int(self, k, level=None):
        level = self.d if level is None else level
        if level == 0:
            return self.ff.from_int(k)
        c = self.from_int(k, level - 1)
        return TowerElement(self, level, {0: c} if not _is_exact_zero(c) else {}, INF)

    def lift(self, x, level=None):
        """Constant-section lift of a depth-(e) element to depth `level`."""
        level = self.d if level is None else level
        cur = _level_of(x)
        while cur < level:
            if _is_exact_zero(x):
                x = TowerElement(self, cur + 1, {}, INF)
            else:
                x = TowerElement(self, cur + 1, {0: x}, INF)
            cur += 1
        return x

    def gen_const(self, level=None):
        """The canonical F_q* generator as a constant of the tower."""
        return self.lift(self.ff.elem(self.ff.generator_code), level)

    def var_elem(self, name):
        i = self.vars.index(name)
        x = TowerElement(self, i + 1, {1: self.one(i)}, INF)
        return self.lift(x, self.d)

    def uniformizer(self, level=None):
        level = self.d if level is None else level
        return self.var_elem(self.vars[level - 1]) if level == self.d \
            else self.at_level(level).uniformizer()

    def describe(self):
        return {
            "p": self.p,
            "f": self.f,
            "modulus": list(self.modulus),
            "vars": list(self.vars),
            "prec": list(self.prec),
        }

    def __eq__(self, other):
        return (
            isinstance(other, FieldConfig)
            and self.ff == other.ff
            and self.vars == other.vars
            and self.prec == other.prec
        )

    def __hash__(self):
        return hash((self.ff, self.vars, self.prec))

    def __repr__(self):
        base = f"F_{self.q}" if self.f > 1 else f"F_{self.p}"
        return base + "".join(f"(({v}))" for v in self.vars)


def _level_of(x):
    return x.level if isinstance(x, TowerElement) else 0


def _is_exact_zero(x):
    if isinstance(x, FFElem):
        return x.code == 0
    return not x.terms and x.known_to >= INF


def _bound(x):
    """A certified lower bound for the valuation (INF for exact zero)."""
    if isinstance(x, FFElem):
        return 0 if x.code else INF
    if x.terms:
        return min(x.terms)
    return x.known_to


def _merge_coeff(cur, c):
    """cur + c for term accumulation; None when the sum is provably zero.

    A sum whose known terms all cancel is normally an unresolved O-term, but
    when the operands are representation-exact negatives of each other the
    cancellation is exact and the entry can be dropped.
    """
    if cur is None:
        return c
    s = cur + c
    if isinstance(s, TowerElement):
        if s.is_exact_zero():
            return None
        if not s.terms and s.known_to < INF and (-c).key() == cur.key():
            return None
        return s
    return None if s.code == 0 else s


class TowerElement:
    """One level of the tower: sparse exponent -> coefficient map plus a
    precision bound.  Immutable after construction."""

    __slots__ = ("cfg", "level", "terms", "known_to", "_key")

    def __init__(self, cfg, level, terms, known_to):
        kept = {}
        for e, c in terms.items():
            if e < known_to and not _is_exact_zero(c):
                kept[e] = c
        self.cfg = cfg
        self.level = level
        self.terms = kept
        self.known_to = known_to if known_to < INF else INF
        self._key = None

    # -- state predicates --------------------------------------------------

    def is_exact_zero(self):
        return not self.terms and self.known_to >= INF

    def is_known_zero(self):
        """No known nonzero coefficient (may still hide content past known_to)."""
        return not any(self._coeff_known_nonzero(c) for c in self.terms.values())

    @staticmethod
    def _coeff_known_nonzero(c):
        if isinstance(c, FFElem):
            return c.code != 0
        return any(TowerElement._coeff_known_nonzero(v) for v in c.terms.values())

    def is_exact(self):
        if self.known_to < INF:
            return False
        if self.level == 1:
            return True
        return all(c.is_exact() for c in self.terms.values())

    # -- structure accessors -------------------------------------------------

    def lead_exp(self):
        """Exponent of the leading term; errors if unknowable or zero."""
        for e in sorted(self.terms):
            c = self.terms[e]
            if self._coeff_known_nonzero(c):
                return e
            raise PrecisionError(
                f"leading term at exponent {e} is unresolved at current precision")
        if self.known_to < INF:
            raise PrecisionError("element is O(%s^%d); leading term unknown"
                                 % (self.cfg.vars[self.level - 1], self.known_to))
        raise ZeroDivisionError("zero element has no leading term")

    def lead_coeff(self):
        return self.terms[self.lead_exp()]

    def coeff(self, e):
        """Coefficient at exponent e; precision-checked."""
        if e >= self.known_to:
            raise PrecisionError(f"coefficient at exponent {e} is beyond known_to")
        c = self.terms.get(e)
        if c is None:
            return self.cfg.ff.zero if self.level == 1 else self.cfg.zero(self.level - 1)
        return c

    def residue0(self):
        """The image in the residue field: the coefficient at exponent 0."""
        return self.coeff(0)

    # -- ring operations ---------------------------------------------------

    def _peer(self, other):
        if isinstance(other, int):
            return self.cfg.from_int(other, self.level)
        if isinstance(other, FFElem):
            return self.cfg.lift(other, self.level)
        if not isinstance(other, TowerElement):
            return NotImplemented
        if other.level != self.level or other.cfg.ff != self.cfg.ff:
            raise ValueError("elements of different fields/levels")
        return other

    def __add__(self, other):
        other = self._peer(other)
        if other is NotImplemented:
            return NotImplemented
        kt = min(self.known_to, other.known_to)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            merged = _merge_coeff(terms.get(e), c)
            if merged is None:
                terms.pop(e, None)
            else:
                terms[e] = merged
        return TowerElement(self.cfg, self.level, terms, kt)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.cfg, self.level,
                            {e: -c for e, c in self.terms.items()}, self.known_to)

    def __sub__(self, other):
        other = self._peer(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._peer(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_exact_zero() or other.is_exact_zero():
            return self.cfg.zero(self.level)
        kt = min(_sat_add(self.known_to, _bound(other)),
                 _sat_add(other.known_to, _bound(self)))
        if not self.terms or not other.terms:
            return TowerElement(self.cfg, self.level, {}, kt)
        if self.level == 1:
            ff = self.cfg.ff
            a_items = sorted(self.terms.items())
            b_items = sorted(other.terms.items())
            exps, codes = conv_trunc(
                [e for e, _ in a_items], [c.code for _, c in a_items],
                [e for e, _ in b_items], [c.code for _, c in b_items],
                kt, ff.tables[1], ff.tables[0], ff.q,
            )
            return TowerElement(self.cfg, 1,
                                {e: FFElem(ff, c) for e, c in zip(exps, codes)}, kt)
        acc = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = ea + eb
                if e >= kt:
                    continue
                merged = _merge_coeff(acc.get(e), ca * cb)
                if merged is None:
                    acc.pop(e, None)
                else:
                    acc[e] = merged
        return TowerElement(self.cfg, self.level, acc, kt)

    __rmul__ = __mul__

    def times(self, k):
        """Integer multiple (k mod p)."""
        c = self.cfg.ff.from_int(k)
        if c.code == 0:
            return self.cfg.zero(self.level)
        if c.code == 1:
            return self
        return self.mul_const(c)

    def mul_const(self, c):
        """Multiply by a coefficient from a lower level (or FFElem)."""
        if _level_of(c) >= self.level:
            raise ValueError("mul_const expects a lower-level coefficient")
        if _is_exact_zero(c) or self.is_exact_zero():
            return self.cfg.zero(self.level)
        if self.level > 1 and _level_of(c) < self.level - 1:
            c = self.cfg.lift(c, self.level - 1)
        out = {e: coeff * c for e, coeff in self.terms.items()}
        return TowerElement(self.cfg, self.level, out, self.known_to)

    def shift(self, k):
        """Multiply by var^k (exact reindexing)."""
        if k == 0:
            return self
        return TowerElement(self.cfg, self.level,
                            {e + k: c for e, c in self.terms.items()},
                            _sat_add(self.known_to, k))

    def truncate(self, n):
        """Forget everything at or above exponent n (sound: claims less)."""
        if n >= self.known_to:
            return self
        return TowerElement(self.cfg, self.level,
                            {e: c for e, c in self.terms.items() if e < n}, n)

    def inverse(self):
        if not self.terms:
            if self.is_exact_zero():
                raise ZeroDivisionError("inverse of zero")
            raise PrecisionError("cannot invert: leading term unknown")
        m = self.lead_exp()
        c = self.lead_coeff()
        window = self.cfg.prec[self.level - 1]
        kt = min(_sat_add(self.known_to, -2 * m), window - m)
        if kt <= -m:
            raise PrecisionError("inverse would be known below its leading exponent")
        cinv = c.inverse()
        one = self.cfg.one(self.level)
        # z = self/(c*var^m) - 1; the diagonal coefficient c*cinv - 1 is
        # exactly zero, so it is omitted rather than left as a truncated
        # residual (which would stall the geometric loop below).
        if self.level > 1 and _level_of(cinv) < self.level - 1:
            cmul = self.cfg.lift(cinv, self.level - 1)
        else:
            cmul = cinv
        zterms = {e - m: coeff * cmul for e, coeff in self.terms.items() if e != m}
        z = TowerElement(self.cfg, self.level,
                         zterms, _sat_add(self.known_to, -m))
        if z.is_exact_zero():
            # monomial: the inverse is exact apart from input uncertainty
            out = one.mul_const(cinv).shift(-m)
            cap = _sat_add(self.known_to, -2 * m)
            return out if cap >= INF else out.truncate(cap)
        negz = (-z).truncate(kt + m)
        acc = one
        power = one
        while True:
            power = (power * negz).truncate(kt + m)
            if not power.terms:
                break
            acc = acc + power
        acc = acc.mul_const(cinv).shift(-m)
        return acc.truncate(kt)

    def __truediv__(self, other):
        other = self._peer(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._peer(other)
        return other * self.inverse()

    def __pow__(self, e):
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        result = self.cfg.one(self.level)
        cur = self
        while e:
            if e & 1:
                result = result * cur
            cur = cur * cur
            e >>= 1
        return result

    def frobenius(self):
        """The p-th power, computed by exponent scaling (char p)."""
        p = self.cfg.p
        terms = {e * p: (c.frobenius() if isinstance(c, (FFElem, TowerElement)) else c)
                 for e, c in self.terms.items()}
        kt = INF if self.known_to >= INF else self.known_to * p
        return TowerElement(self.cfg, self.level, terms, kt)

    def pth_root(self):
        """The p-th root, or None if the support obstructs one."""
        p = self.cfg.p
        terms = {}
        for e, c in self.terms.items():
            if e % p:
                return None
            r = c.pth_root()
            if r is None:
                return None
            terms[e // p] = r
        kt = INF if self.known_to >= INF else -(-self.known_to // p)
        return TowerElement(self.cfg, self.level, terms, kt)

    def derivative(self):
        """d/dvar at this element's own level."""
        terms = {}
        for e, c in self.terms.items():
            scaled = c.times(e) if isinstance(c, TowerElement) else c.times(e)
            if not _is_exact_zero(scaled):
                terms[e - 1] = scaled
        kt = INF if self.known_to >= INF else self.known_to - 1
        return TowerElement(self.cfg, self.level, terms, kt)

    def partial(self, level):
        """Partial derivative with respect to the level-th variable (1-based)."""
        if level == self.level:
            return self.derivative()
        if level > self.level:
            raise ValueError("no such variable at this depth")
        terms = {}
        for e, c in self.terms.items():
            dc = c.partial(level)
            if not _is_exact_zero(dc):
                terms[e] = dc
        return TowerElement(self.cfg, self.level, terms, self.known_to)

    # -- identity / rendering ------------------------------------------------

    def key(self):
        """Canonical hashable form (exponents sorted, innermost little-endian)."""
        if self._key is None:
            items = []
            for e in sorted(self.terms):
                c = self.terms[e]
                items.append((e, c.key() if isinstance(c, TowerElement) else c.code))
            self._key = (self.level, self.known_to, tuple(items))
        return self._key

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.cfg.from_int(other, self.level)
        if not isinstance(other, TowerElement):
            return NotImplemented
        return self.level == other.level and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_data(self):
        """JSON-compatible canonical serialization."""
        out = []
        for e in sorted(self.terms):
            c = self.terms[e]
            out.append([e, c.to_data() if isinstance(c, TowerElement)
                        else self.cfg.ff.decode(c.code)])
        return {"terms": out} if self.known_to >= INF \
            else {"terms": out, "known_to": self.known_to}

    def __str__(self):
        var = self.cfg.vars[self.level - 1]
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            cs = str(c)
            need_parens = ("+" in cs or "-" in cs[1:]) and e != 0
            if e == 0:
                parts.append(cs)
                continue
            if cs == "1":
                head = ""
            else:
                head = (f"({cs})" if need_parens else cs) + "*"
            tail = var if e == 1 else f"{var}^{e}"
            parts.append(head + tail)
        body = " + ".join(parts) if parts else "0"
        if self.known_to < INF:
            body += f" + O({var}^{self.known_to})"
        return body

    def __repr__(self):
        return f"<{self}>"


# -- module-level operations --------------------------------------------


def valuation(a):
    """Lexicographic valuation vector, outermost variable first."""
    if isinstance(a, FFElem):
        if a.code == 0:
            raise ZeroDivisionError("valuation of zero")
        return ()
    m = a.lead_exp()
    return (m,) + valuation(a.lead_coeff())


def unit_decompose(a):
    """Split a nonzero element as var^m * c * w at the outermost level.

    c is the iterated leading F_q coefficient (the constant-section
    Teichmueller representative) and w has iterated leading term 1.
    """
    m = a.lead_exp()
    x = a.lead_coeff()
    while isinstance(x, TowerElement):
        x = x.lead_coeff()
    c = x
    w = a.shift(-m).mul_const(c.inverse())
    return m, c, w


def pth_root(a):
    return a.pth_root()


# -- expression parsing ---------------------------------------------------


_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def parse_elem(cfg, expr):
    """Evaluate an arithmetic expression string into a tower element.

    Allowed: integer literals, the declared variable names, the residue
    generator ``g``, parentheses, and the operators + - * / ^.
    """
    src = expr.replace("^", "**")

    def to_orig(offset):
        # '**' is one character longer than '^'
        count = 0
        for i, ch in enumerate(expr):
            mapped = i + count
            if mapped >= offset:
                return i
            if ch == "^":
                count += 1
        return len(expr)

    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        pos = to_orig((exc.offset or 1) - 1)
        raise ParseError(f"syntax error at position {pos} in {expr!r}", pos) from None

    def eval_int(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -eval_int(node.operand)
        pos = to_orig(node.col_offset)
        raise ParseError(f"exponent must be an integer literal (position {pos})", pos)

    def eval_node(node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, int):
                return cfg.from_int(node.value)
            pos = to_orig(node.col_offset)
            raise ParseError(f"unsupported literal {node.value!r} (position {pos})", pos)
        if isinstance(node, ast.Name):
            if node.id == "g":
                return cfg.gen_const()
            if node.id in cfg.vars:
                return cfg.var_elem(node.id)
            pos = to_orig(node.col_offset)
            raise ParseError(f"unknown name {node.id!r} (position {pos})", pos)
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return -eval_node(node.operand)
            if isinstance(node.op, ast.UAdd):
                return eval_node(node.operand)
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            if isinstance(node.op, ast.Pow):
                return eval_node(node.left) ** eval_int(node.right)
            left = eval_node(node.left)
            right = eval_node(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            return left / right
        pos = to_orig(node.col_offset)
        raise ParseError(f"unsupported syntax at position {pos} in {expr!r}", pos)

    return eval_node(tree.body)


def sample_element(cfg, rng, level=None, span=(-2, 5), nterms=3, unit=False,
                   integral=False):
    """Deterministic random element for sampling batteries.

    Draws a sparse exact Laurent polynomial; with ``unit=True`` the result
    has valuation zero at every level, with ``integral=True`` exponents are
    nonnegative.
    """
    level = cfg.d if level is None else level
    lo, hi = span
    if integral:
        lo = max(lo, 0)

    def draw(lv):
        if lv == 0:
            return cfg.ff.elem(rng.randrange(1, cfg.q))
        exps = sorted(rng.sample(range(lo, hi + 1), min(nterms, hi - lo + 1)))
        if unit or integral:
            exps = [e for e in exps if e >= 0]
        terms = {}
        for e in exps:
            c = draw(lv - 1)
            if not _is_exact_zero(c):
                terms[e] = c
        if unit:
            terms[0] = draw_unit_coeff(lv - 1)
        elem = TowerElement(cfg, lv, terms, INF)
        if not terms:
            return cfg.one(lv) if (unit or rng.random() < 0.5) else cfg.zero(lv)
        return elem

    def draw_unit_coeff(lv):
        if lv == 0:
            return cfg.ff.elem(rng.randrange(1, cfg.q))
        return cfg.lift(draw_unit_coeff(lv - 1), lv)

    x = draw(level)
    if _is_exact_zero(x):
        x = cfg.one(level)
    return x
