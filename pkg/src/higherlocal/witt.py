"""Witt vectors of length n over char-p coefficient rings.

The addition/multiplication laws are the universal Witt polynomials,
generated once over the integers by the ghost-component recursion

    W_k(X) = sum_j p^j X_j^(p^(k-j)),
    S_k = (W_k(x) + W_k(y) - sum_{j<k} p^j S_j^(p^(k-j))) / p^k,
    P_k = (W_k(x) W_k(y) - sum_{j<k} p^j P_j^(p^(k-j))) / p^k,

with every division exact over Z.  For evaluation the polynomials are
reduced mod p and cached as plain term lists, so they can run over table
F_q elements or over tower residue fields alike.

In characteristic p the Witt Frobenius is componentwise x -> x^p and the
Verschiebung prepends a zero; F(V(x)) = p*x holds and is tested.
"""

from .ffield import FFElem, FieldEmbedding


# -- integer multivariate polynomials (internal, exact) -------------------


def _ip_add(a, b):
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, 0) + v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def _ip_scale(a, c):
    if c == 0:
        return {}
    return {k: v * c for k, v in a.items()}


def _ip_mul(a, b):
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            nv = out.get(k, 0) + va * vb
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
    return out


def _ip_pow(a, e):
    nvars = len(next(iter(a), ()))
    out = {tuple([0] * nvars): 1} if a or e == 0 else {}
    cur = a
    while e:
        if e & 1:
            out = _ip_mul(out, cur)
        e >>= 1
        if e:
            cur = _ip_mul(cur, cur)
    return out


def _ip_div_exact(a, c):
    out = {}
    for k, v in a.items():
        q, r = divmod(v, c)
        if r:
            raise ArithmeticError("inexact division in Witt polynomial generation")
        out[k] = q
    return out


def _var(i, nvars):
    k = [0] * nvars
    k[i] = 1
    return {tuple(k): 1}


def _ghost(vals, k, p):
    """W_k of a list of polynomials."""
    acc = {}
    for j in range(k + 1):
        acc = _ip_add(acc, _ip_scale(_ip_pow(vals[j], p ** (k - j)), p**j))
    return acc


def _reduce_mod_p(poly, p):
    """Term list [(exponents, coeff)] with coefficients reduced into 1..p-1."""
    out = []
    for k, v in sorted(poly.items()):
        c = v % p
        if c:
            out.append((k, c))
    return out


_RING_CACHE = {}


class WittRing:
    """Cached universal polynomials for W_n in characteristic p."""

    def __init__(self, p, n):
        if not (1 <= n <= 3):
            raise ValueError("Witt length must be in 1..3")
        self.p = p
        self.n = n
        nv = 2 * n
        xs = [_var(i, nv) for i in range(n)]
        ys = [_var(n + i, nv) for i in range(n)]
        sums, prods = [], []
        sums_z, prods_z = [], []
        for k in range(n):
            acc = _ip_add(_ghost(xs, k, p), _ghost(ys, k, p))
            for j in range(k):
                acc = _ip_add(acc, _ip_scale(_ip_pow(sums_z[j], p ** (k - j)), -(p**j)))
            s = _ip_div_exact(acc, p**k)
            sums_z.append(s)
            sums.append(_reduce_mod_p(s, p))
            acc = _ip_mul(_ghost(xs, k, p), _ghost(ys, k, p))
            for j in range(k):
                acc = _ip_add(acc, _ip_scale(_ip_pow(prods_z[j], p ** (k - j)), -(p**j)))
            m = _ip_div_exact(acc, p**k)
            prods_z.append(m)
            prods.append(_reduce_mod_p(m, p))
        self.sum_polys = sums
        self.prod_polys = prods
        # integer versions kept for independent checks
        self.sum_polys_z = sums_z
        self.prod_polys_z = prods_z

    def __repr__(self):
        return f"WittRing(p={self.p}, n={self.n})"


def get_witt_ring(p, n):
    ring = _RING_CACHE.get((p, n))
    if ring is None:
        ring = WittRing(p, n)
        _RING_CACHE[(p, n)] = ring
    return ring


# -- vectors ----------------------------------------------------------------


def _zero_like(x):
    if isinstance(x, FFElem):
        return x.field.zero
    return x.cfg.zero(x.level)


def _eval_terms(terms, vals, zero):
    acc = zero
    for exps, coeff in terms:
        term = None
        for i, e in enumerate(exps):
            if e:
                factor = vals[i] ** e
                term = factor if term is None else term * factor
        if term is None:
            term = _one_from(zero)
        if coeff != 1:
            term = term.times(coeff)
        acc = acc + term
    return acc


def _one_from(zero):
    if isinstance(zero, FFElem):
        return zero.field.one
    return zero.cfg.one(zero.level)


class WittVector:
    """A length-n Witt vector over a char-p coefficient field."""

    __slots__ = ("ring", "comps")

    def __init__(self, ring, comps):
        comps = tuple(comps)
        if len(comps) != ring.n:
            raise ValueError(f"expected {ring.n} components")
        self.ring = ring
        self.comps = comps

    def _check(self, other):
        if not isinstance(other, WittVector):
            raise TypeError("expected a WittVector")
        if other.ring is not self.ring and (other.ring.p, other.ring.n) != (self.ring.p, self.ring.n):
            raise ValueError("mismatched Witt lengths")
        if type(self.comps[0]) is not type(other.comps[0]):
            raise ValueError("mismatched coefficient fields")
        if isinstance(self.comps[0], FFElem) and self.comps[0].field != other.comps[0].field:
            raise ValueError("mismatched coefficient fields")
        return other

    def _binary(self, other, polys):
        other = self._check(other)
        vals = self.comps + other.comps
        zero = _zero_like(self.comps[0])
        return WittVector(self.ring, [_eval_terms(t, vals, zero) for t in polys])

    def __add__(self, other):
        return self._binary(other, self.ring.sum_polys)

    def __mul__(self, other):
        return self._binary(other, self.ring.prod_polys)

    def __neg__(self):
        if self.ring.p != 2:
            return WittVector(self.ring, [-c for c in self.comps])
        one = _one_from(_zero_like(self.comps[0]))
        all_ones = WittVector(self.ring, [one] * self.ring.n)
        return self * all_ones

    def __sub__(self, other):
        return self + (-other)

    def frobenius(self):
        return WittVector(self.ring, [c.frobenius() for c in self.comps])

    def verschiebung(self):
        zero = _zero_like(self.comps[0])
        return WittVector(self.ring, (zero,) + self.comps[:-1])

    def is_zero(self):
        return all(_coeff_is_zero(c) for c in self.comps)

    def __eq__(self, other):
        if not isinstance(other, WittVector):
            return NotImplemented
        return self.ring.n == other.ring.n and all(
            a == b for a, b in zip(self.comps, other.comps)
        )

    def __hash__(self):
        return hash((self.ring.p, self.ring.n, self.comps))

    def __repr__(self):
        return "W(" + ", ".join(str(c) for c in self.comps) + ")"


def _coeff_is_zero(c):
    if isinstance(c, FFElem):
        return c.code == 0
    return c.is_exact_zero()


def witt_zero(ring, like):
    zero = _zero_like(like)
    return WittVector(ring, [zero] * ring.n)


def witt_one(ring, like):
    zero = _zero_like(like)
    return WittVector(ring, [_one_from(zero)] + [zero] * (ring.n - 1))


def witt_from_int(ring, like, k):
    """The image of the integer k in W_n (repeated addition; k is small)."""
    char = ring.p**ring.n
    k %= char
    acc = witt_zero(ring, like)
    one = witt_one(ring, like)
    for _ in range(k):
        acc = acc + one
    return acc


def witt_add(a, b):
    return a + b


def witt_mul(a, b):
    return a * b


def frobenius(a):
    return a.frobenius()


def verschiebung(a):
    return a.verschiebung()


class NoSolutionError(ValueError):
    """asw_solve exhausted its extension-degree budget."""


def asw_solve(w, max_deg):
    """Solve (F - 1) x = w over the smallest extension F_{q^e}, e <= max_deg.

    w must have FFElem components.  Returns (x, e); the search runs level by
    level with backtracking, embedding w via the canonical root embedding.
    """
    if not isinstance(w.comps[0], FFElem):
        raise TypeError("asw_solve expects finite-field components")
    base = w.comps[0].field
    ring = w.ring
    for e in range(1, max_deg + 1):
        if e == 1:
            big = base
            comps = list(w.comps)
        else:
            emb = FieldEmbedding(base, e)
            big = emb.dst
            comps = [emb.embed(c) for c in w.comps]
        target = WittVector(ring, comps)
        if ring.n == 1:
            w0 = comps[0]
            for cand in big.all_elems():
                if cand.frobenius() - cand == w0:
                    return WittVector(ring, (cand,)), e
            continue
        zero = big.zero
        partials = [()]
        for lvl in range(ring.n):
            extended = []
            for part in partials:
                for code in range(big.q):
                    cand = part + (FFElem(big, code),) + (zero,) * (ring.n - lvl - 1)
                    x = WittVector(ring, cand)
                    diff = (x.frobenius() - x) - target
                    if all(diff.comps[i].code == 0 for i in range(lvl + 1)):
                        extended.append(part + (FFElem(big, code),))
            partials = extended
            if not partials:
                break
        if partials:
            return WittVector(ring, partials[0]), e
    raise NoSolutionError(f"no solution within extension degree {max_deg}")
