"""Arithmetic in finite fields F_q, q = p^f, via F_p[x]/(modulus).

Elements are stored as integer codes: the base-p packing of the little-endian
coefficient vector, so code = c_0 + c_1*p + ... + c_{f-1}*p^(f-1).  Small
fields (q <= 1024) build full add/mul tables once and index into them; larger
fields (only reached through extension fields for root searches) fall back to
direct polynomial arithmetic.
"""

from array import array

from .kernels import poly_mul_mod

TABLE_MAX = 1024

# Canonical minimal irreducible monic polynomials, little-endian coefficient
# tuples, smallest candidate in base-p coefficient order.  Regenerated and
# checked by minimal_irreducible(); shipped so field definitions are stable.
IRREDUCIBLE_TABLE = {
    (2, 1): (0, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (3, 1): (0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 1): (0, 1),
    (5, 2): (2, 0, 1),
    (5, 3): (1, 1, 0, 1),
    (7, 1): (0, 1),
    (7, 2): (1, 0, 1),
    (7, 3): (2, 0, 0, 1),
}


def is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_pow_mod(base, e, modulus, p):
    result = [1]
    cur = list(base)
    while e:
        if e & 1:
            result = poly_mul_mod(result, cur, modulus, p)
        cur = poly_mul_mod(cur, cur, modulus, p)
        e >>= 1
    return result


def _poly_gcd(a, b, p):
    a, b = list(a), list(b)
    inv = [pow(i, p - 2, p) if i else 0 for i in range(p)]

    def deg(v):
        d = len(v) - 1
        while d >= 0 and v[d] == 0:
            d -= 1
        return d

    while deg(b) >= 0:
        da, db = deg(a), deg(b)
        if da < db:
            a, b = b, a
            continue
        lead = (a[da] * inv[b[db]]) % p
        for i in range(db + 1):
            a[da - db + i] = (a[da - db + i] - lead * b[i]) % p
        if deg(a) < deg(b):
            a, b = b, a
    return a[: deg(a) + 1] if deg(a) >= 0 else [0]


def poly_is_irreducible(coeffs, p):
    """Irreducibility over F_p of a monic polynomial (little-endian coeffs).

    Uses the standard criterion: x^(p^d) = x mod f together with
    gcd(x^(p^(d/r)) - x, f) = 1 for every prime r dividing d.
    """
    d = len(coeffs) - 1
    if d < 1 or coeffs[-1] != 1:
        return False
    if d == 1:
        return True
    if coeffs[0] == 0:
        return False
    x = [0, 1]
    xp = _poly_pow_mod(x, p**d, coeffs, p)
    rem = list(xp)
    rem[1] = (rem[1] - 1) % p
    if any(rem):
        return False
    r = 2
    dd = d
    primes = set()
    while dd > 1:
        if dd % r == 0:
            primes.add(r)
            while dd % r == 0:
                dd //= r
        r += 1
    for r in primes:
        xe = _poly_pow_mod(x, p ** (d // r), coeffs, p)
        diff = list(xe)
        diff[1] = (diff[1] - 1) % p
        g = _poly_gcd(diff, coeffs, p)
        if len(g) != 1:
            return False
    return True


def minimal_irreducible(p, deg):
    """Smallest monic irreducible of the given degree over F_p (base-p order
    of the non-leading coefficient vector)."""
    if deg == 1:
        return (0, 1)
    for packed in range(p**deg):
        coeffs = []
        v = packed
        for _ in range(deg):
            coeffs.append(v % p)
            v //= p
        coeffs.append(1)
        if poly_is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise ValueError(f"no irreducible of degree {deg} over F_{p}")


_FIELD_CACHE = {}


class FField:
    """The field F_q with table-backed (or direct) arithmetic on codes."""

    def __init__(self, p, f, modulus=None):
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if f < 1:
            raise ValueError("extension degree must be >= 1")
        if modulus is None:
            modulus = IRREDUCIBLE_TABLE.get((p, f)) or minimal_irreducible(p, f)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != f + 1 or modulus[-1] != 1:
            raise ValueError(f"modulus must be monic of degree {f}")
        if not poly_is_irreducible(list(modulus), p):
            raise ValueError(f"modulus {modulus} is reducible over F_{p}")
        self.p = p
        self.f = f
        self.q = p**f
        self.modulus = modulus
        self._tables = None
        self._dlog = None
        self._gen = None
        if self.q <= TABLE_MAX:
            self._build_tables()
        self._trace = array("q", [self._trace_direct(c) for c in range(min(self.q, TABLE_MAX + 1))]) \
            if self.q <= TABLE_MAX else None
        self.zero = FFElem(self, 0)
        self.one = FFElem(self, 1)

    # -- code <-> coefficient vector ------------------------------------

    def decode(self, code):
        p = self.p
        out = []
        for _ in range(self.f):
            out.append(code % p)
            code //= p
        return out

    def encode(self, coeffs):
        code = 0
        for c in reversed(coeffs[: self.f]):
            code = code * self.p + (c % self.p)
        return code

    # -- table construction ----------------------------------------------

    def _build_tables(self):
        p, q = self.p, self.q
        mod = list(self.modulus)
        add = array("q", bytes(8 * q * q))
        mul = array("q", bytes(8 * q * q))
        vecs = [self.decode(c) for c in range(q)]
        for a in range(q):
            va = vecs[a]
            row = a * q
            for b in range(a, q):
                vb = vecs[b]
                s = self.encode([(va[i] + vb[i]) % p for i in range(self.f)])
                add[row + b] = s
                add[b * q + a] = s
                m = self.encode(poly_mul_mod(va, vb, mod, p))
                mul[row + b] = m
                mul[b * q + a] = m
        neg = array("q", [self.encode([(-c) % p for c in vecs[a]]) for a in range(q)])
        inv = array("q", bytes(8 * q))
        for a in range(1, q):
            if inv[a]:
                continue
            b = self._pow_direct(a, q - 2)
            inv[a] = b
            inv[b] = a
        frob = array("q", [self._pow_direct(a, p) for a in range(q)])
        frob_inv = array("q", bytes(8 * q))
        for a in range(q):
            frob_inv[frob[a]] = a
        self._tables = (add, mul, neg, inv, frob, frob_inv)

    @property
    def tables(self):
        return self._tables

    # -- code arithmetic ---------------------------------------------------

    def add_codes(self, a, b):
        if self._tables:
            return self._tables[0][a * self.q + b]
        p = self.p
        va, vb = self.decode(a), self.decode(b)
        return self.encode([(va[i] + vb[i]) % p for i in range(self.f)])

    def mul_codes(self, a, b):
        if self._tables:
            return self._tables[1][a * self.q + b]
        return self.encode(poly_mul_mod(self.decode(a), self.decode(b), list(self.modulus), self.p))

    def neg_code(self, a):
        if self._tables:
            return self._tables[2][a]
        return self.encode([(-c) % self.p for c in self.decode(a)])

    def inv_code(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        if self._tables:
            return self._tables[3][a]
        return self._pow_direct(a, self.q - 2)

    def _pow_direct(self, a, e):
        result = 1
        cur = a
        mul = self.mul_codes if self._tables else None
        while e:
            if e & 1:
                result = self.mul_codes(result, cur)
            cur = self.mul_codes(cur, cur)
            e >>= 1
        return result

    def pow_code(self, a, e):
        if e < 0:
            return self._pow_direct(self.inv_code(a), -e)
        return self._pow_direct(a, e)

    def frob_code(self, a):
        if self._tables:
            return self._tables[4][a]
        return self._pow_direct(a, self.p)

    def frob_inv_code(self, a):
        if self._tables:
            return self._tables[5][a]
        return self._pow_direct(a, self.q // self.p)

    def _trace_direct(self, a):
        acc = 0
        cur = a
        for _ in range(self.f):
            acc = self.add_codes(acc, cur)
            cur = self.frob_code(cur)
        # traces land in the prime field, whose codes are 0..p-1
        assert acc < self.p
        return acc

    def trace_code(self, a):
        if self._trace is not None:
            return self._trace[a]
        return self._trace_direct(a)

    # -- multiplicative structure -----------------------------------------

    @property
    def generator_code(self):
        """Smallest code generating F_q^*."""
        if self._gen is None:
            n = self.q - 1
            primes = []
            m, r = n, 2
            while m > 1:
                if m % r == 0:
                    primes.append(r)
                    while m % r == 0:
                        m //= r
                r += 1
            for g in range(1, self.q):
                if all(self.pow_code(g, n // r) != 1 for r in primes):
                    self._gen = g
                    break
        return self._gen

    def dlog_code(self, a):
        """Discrete log of a nonzero code against the canonical generator."""
        if a == 0:
            raise ZeroDivisionError("dlog of zero")
        if self._dlog is None:
            table = {}
            g = self.generator_code
            cur = 1
            for k in range(self.q - 1):
                table[cur] = k
                cur = self.mul_codes(cur, g)
            self._dlog = table
        return self._dlog[a]

    # -- elements ----------------------------------------------------------

    def elem(self, code):
        return FFElem(self, code % self.q if code >= 0 else code % self.q)

    def from_int(self, k):
        return FFElem(self, k % self.p)

    def all_elems(self):
        return (FFElem(self, c) for c in range(self.q))

    def __eq__(self, other):
        return (
            isinstance(other, FField)
            and self.p == other.p
            and self.f == other.f
            and self.modulus == other.modulus
        )

    def __hash__(self):
        return hash((self.p, self.f, self.modulus))

    def __repr__(self):
        return f"FField(p={self.p}, f={self.f})"


def get_field(p, f, modulus=None):
    key = (p, f, tuple(modulus) if modulus is not None else None)
    field = _FIELD_CACHE.get(key)
    if field is None:
        field = FField(p, f, modulus)
        _FIELD_CACHE[key] = field
    return field


class FFElem:
    """An element of an FField, wrapped for operator arithmetic."""

    __slots__ = ("field", "code")

    def __init__(self, field, code):
        self.field = field
        self.code = code

    def _check(self, other):
        if not isinstance(other, FFElem):
            if isinstance(other, int):
                return self.field.from_int(other)
            return NotImplemented
        if other.field != self.field:
            raise ValueError("elements of different finite fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return FFElem(self.field, self.field.add_codes(self.code, other.code))

    __radd__ = __add__

    def __neg__(self):
        return FFElem(self.field, self.field.neg_code(self.code))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return FFElem(self.field, self.field.add_codes(self.code, self.field.neg_code(other.code)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return FFElem(self.field, self.field.mul_codes(self.code, other.code))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return FFElem(self.field, self.field.mul_codes(self.code, self.field.inv_code(other.code)))

    def __pow__(self, e):
        return FFElem(self.field, self.field.pow_code(self.code, e))

    def inverse(self):
        return FFElem(self.field, self.field.inv_code(self.code))

    def frobenius(self):
        return FFElem(self.field, self.field.frob_code(self.code))

    def pth_root(self):
        return FFElem(self.field, self.field.frob_inv_code(self.code))

    def trace(self):
        """Trace to the prime field, returned as an integer in 0..p-1."""
        return self.field.trace_code(self.code)

    def dlog(self):
        return self.field.dlog_code(self.code)

    def is_zero(self):
        return self.code == 0

    def times(self, k):
        """Integer multiple (k reduced mod p)."""
        return self * self.field.from_int(k)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.code == other % self.field.p if other in (0, 1) else NotImplemented
        return isinstance(other, FFElem) and self.field == other.field and self.code == other.code

    def __hash__(self):
        return hash((self.field.p, self.field.f, self.code))

    def __repr__(self):
        return f"ff({self.code})"

    def __str__(self):
        if self.field.f == 1:
            return str(self.code)
        coeffs = self.field.decode(self.code)
        parts = []
        for i, c in enumerate(coeffs):
            if not c:
                continue
            if i == 0:
                parts.append(str(c))
            else:
                head = "" if c == 1 else str(c) + "*"
                parts.append(f"{head}g" + (f"^{i}" if i > 1 else ""))
        return "+".join(parts) if parts else "0"


class FieldEmbedding:
    """An embedding F_q -> F_{q^e} determined by the smallest root of the
    base modulus in the extension."""

    def __init__(self, src, ext_degree, modulus=None):
        self.src = src
        self.dst = get_field(src.p, src.f * ext_degree, modulus)
        self.ext_degree = ext_degree
        root = None
        for cand in range(self.dst.q):
            acc = 0
            # Horner evaluation of the src modulus at cand, inside dst
            for c in reversed(src.modulus):
                acc = self.dst.add_codes(self.dst.mul_codes(acc, cand), c % src.p)
            if acc == 0:
                root = cand
                break
        if root is None:
            raise ValueError("base modulus has no root in the extension")
        self.root = root
        self._powers = [1]
        for _ in range(src.f - 1):
            self._powers.append(self.dst.mul_codes(self._powers[-1], root))

    def embed_code(self, code):
        acc = 0
        for i, digit in enumerate(self.src.decode(code)):
            if digit:
                acc = self.dst.add_codes(acc, self.dst.mul_codes(digit, self._powers[i]))
        return acc

    def embed(self, x):
        if x.field != self.src:
            raise ValueError("element not in the embedding source field")
        return FFElem(self.dst, self.embed_code(x.code))

    def section_code(self, code):
        """Partial inverse: the src code mapping to `code`, or None."""
        # brute force is fine at the sizes we use
        for c in range(self.src.q):
            if self.embed_code(c) == code:
                return c
        return None
