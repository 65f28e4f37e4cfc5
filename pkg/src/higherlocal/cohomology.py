"""Cohomology classes of a d-dimensional local field and the invariant map.

The p-part of H^q is presented by sums w (x) b_1 (x) ... (x) b_{q-1} with w
a field element (length-1 Witt coefficient) and the b_i units; the invariant
map on the top group H^{d+1} is computed by iterated residues,

    inv = (1/p) Tr_{F_q/F_p}( Res_1 ... Res_d ( w dlog b_1 ^ ... ^ dlog b_d ) ),

with the dlog factors expanded in the canonical variable basis, innermost
first.  The prime-to-p part is stored as a Kummer-style symbol list and its
invariant is an iterated tame symbol followed by a discrete logarithm
against the canonical generator of F_q^*.

These computations run directly on the symbol data; they never consult the
K-class normal forms, which makes them usable as an independent check of
the latter.
"""

import math

from .ffield import FFElem
from .kgroup import KClass, normalize_terms
from .tower import (
    INF,
    FieldConfig,
    PrecisionError,
    TowerElement,
    valuation,
)

TAME_SIGN = 1  # calibrated against the classical tame-symbol formula


class InvValue:
    """An element of (1/ell) Z/Z, stored as a reduced numerator mod ell."""

    __slots__ = ("num", "ell")

    def __init__(self, num, ell):
        self.ell = ell
        self.num = num % ell

    def is_zero(self):
        return self.num == 0

    def __add__(self, other):
        if not isinstance(other, InvValue) or other.ell != self.ell:
            raise ValueError("mismatched denominators")
        return InvValue(self.num + other.num, self.ell)

    def __neg__(self):
        return InvValue(-self.num, self.ell)

    def times(self, k):
        return InvValue(self.num * k, self.ell)

    def __eq__(self, other):
        return (
            isinstance(other, InvValue)
            and self.ell == other.ell
            and self.num == other.num
        )

    def __hash__(self):
        return hash((self.num, self.ell))

    def render(self):
        return f"{self.num}/{self.ell}"

    def __repr__(self):
        return self.render()


class CohClass:
    """A class in H^q(k) for the presentation above, tagged by its ell-part.

    ``terms`` is a list of (coeff, w, units) for the p-part (w a field
    element, units a tuple of q-1 nonzero elements), or (coeff, units) with
    q entries for the tame part.
    """

    __slots__ = ("cfg", "ell", "qdeg", "terms")

    def __init__(self, cfg, ell, qdeg, terms):
        self.cfg = cfg
        self.ell = ell
        self.qdeg = qdeg
        self.terms = tuple(terms)

    @property
    def is_p_part(self):
        return self.ell == self.cfg.p

    def __add__(self, other):
        if not isinstance(other, CohClass) or (other.cfg, other.ell, other.qdeg) != (
            self.cfg, self.ell, self.qdeg,
        ):
            raise ValueError("mismatched cohomology classes")
        return CohClass(self.cfg, self.ell, self.qdeg, self.terms + other.terms)

    def __neg__(self):
        return CohClass(self.cfg, self.ell, self.qdeg,
                        [(-c,) + rest for (c, *rest) in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        return f"CohClass[q={self.qdeg}, ell={self.ell}, {len(self.terms)} terms]"


def _as_elem(cfg, x):
    if isinstance(x, FFElem):
        return cfg.lift(x, cfg.d)
    if isinstance(x, TowerElement) and x.level < cfg.d:
        return cfg.lift(x, cfg.d)
    return x


def make_class(cfg, w, units, ell):
    """The class of w (x) b_1 (x) ... (x) b_{q-1} in H^q (q = len(units)+1).

    For ell = p this is the length-1 Witt presentation; for ell != p the
    pair (w, units) is read as the Kummer symbol list {w, b_1, ...}.
    """
    units = tuple(_as_elem(cfg, b) for b in units)
    w = _as_elem(cfg, w)
    for b in units:
        if b.is_exact_zero():
            raise ZeroDivisionError("unit entries must be nonzero")
        b.lead_exp()
    if ell == cfg.p:
        return CohClass(cfg, ell, len(units) + 1, [(1, w, units)])
    if w.is_exact_zero():
        raise ZeroDivisionError("Kummer datum must be nonzero")
    return CohClass(cfg, ell, len(units) + 1, [(1, (w,) + units)])


def zero_class(cfg, ell, qdeg):
    return CohClass(cfg, ell, qdeg, [])


def lift_class(xi, cfg):
    """i_F^K: read a class over the residue field F inside K via the
    constant section (coefficient and units lifted termwise)."""
    sub = cfg.sub
    if xi.cfg != sub and xi.cfg.ff != cfg.ff:
        raise ValueError("class is not over the residue field of cfg")
    out = []
    for term in xi.terms:
        if xi.ell == xi.cfg.p:
            c, w, units = term
            out.append((c, cfg.lift(w, cfg.d),
                        tuple(cfg.lift(b, cfg.d) for b in units)))
        else:
            c, units = term
            out.append((c, tuple(cfg.lift(b, cfg.d) for b in units)))
    return CohClass(cfg, xi.ell, xi.qdeg, out)


def kato_i(a, b, pi):
    """(a, b) -> i(a) + i(b) u pi for classes a in H^q(F), b in H^{q-1}(F).

    Either argument may be None (treated as zero); pi must be a prime
    element of K at the outer level.
    """
    some = a if a is not None else b
    if some is None:
        raise ValueError("need at least one class")
    # The caller supplies pi as an element of the bigger field K.
    K = pi.cfg if isinstance(pi, TowerElement) else None
    if K is None or K.d < 1:
        raise ValueError("pi must be a tower element of K")
    v = valuation(pi)
    if v[0] != 1 or any(x != 0 for x in v[1:]):
        raise ValueError("pi is not a prime element")
    ell = some.ell
    qdeg = a.qdeg if a is not None else b.qdeg + 1
    out = zero_class(K, ell, qdeg)
    if a is not None:
        if a.qdeg != qdeg:
            raise ValueError("degree mismatch")
        out = out + lift_class(a, K)
    if b is not None:
        if b.qdeg != qdeg - 1:
            raise ValueError("degree mismatch")
        lifted = lift_class(b, K)
        cupped = []
        for term in lifted.terms:
            if ell == K.p:
                c, w, units = term
                cupped.append((c, w, units + (pi,)))
            else:
                c, units = term
                cupped.append((c, units + (pi,)))
        out = out + CohClass(K, ell, qdeg, cupped)
    return out


# -- the invariant map -----------------------------------------------------


def _dlog_coords(b):
    """Coordinates of dlog b in the basis dlog t_1, ..., dlog t_d:
    component i is t_i (d b / d t_i) / b."""
    cfg = b.cfg
    coords = []
    for i in range(1, cfg.d + 1):
        t_i = cfg.var_elem(cfg.vars[i - 1])
        coords.append(t_i * b.partial(i) / b)
    return coords


def _log_wedge(units):
    """The coefficient of dlog t_1 ^ ... ^ dlog t_d in
    dlog b_1 ^ ... ^ dlog b_d (d = len(units) <= 2)."""
    coords = [_dlog_coords(b) for b in units]
    d = len(units)
    if d == 0:
        return None
    if d == 1:
        return coords[0][0]
    if d == 2:
        return coords[0][0] * coords[1][1] - coords[0][1] * coords[1][0]
    raise ValueError("wedge implemented for d <= 2")


def _iterated_residue(x):
    """Res_d ... Res_1 applied to x dlog t_1 ^ ... ^ dlog t_d: the constant
    coefficient extracted level by level, outermost first."""
    while isinstance(x, TowerElement):
        x = x.residue0()
    return x


def inv(xi):
    """The invariant of a top-degree class, in (1/ell) Z/Z."""
    cfg = xi.cfg
    if xi.qdeg != cfg.d + 1:
        raise ValueError(f"inv needs degree {cfg.d + 1}, got {xi.qdeg}")
    if xi.is_p_part:
        p = cfg.p
        total = 0
        for c, w, units in xi.terms:
            if w.is_exact_zero():
                continue
            if len(units) != cfg.d:
                raise ValueError("wrong number of unit entries")
            dens = _log_wedge(units)
            total += c * _iterated_residue(w * dens).trace()
        return InvValue(total, p)
    return _tame_inv(xi)


def _tame_inv(xi):
    """Iterated tame symbol down to F_q^*, then a discrete logarithm."""
    cfg = xi.cfg
    ell = xi.ell
    if (cfg.q - 1) % ell:
        raise ValueError(f"ell = {ell} does not divide q - 1 = {cfg.q - 1}")
    total = 0
    for c, units in xi.terms:
        cls = _tame_chain(cfg, units, ell)
        total += c * cls
    return InvValue(TAME_SIGN * total, ell)


def _tame_chain(cfg, entries, ell):
    """The discrete-log value of the iterated tame boundary of a symbol."""
    terms = [(1, tuple(entries))]
    level_cfg = cfg
    while True:
        n = normalize_terms(level_cfg, ell, len(entries), terms, 1)
        if n.tail:
            raise PrecisionError("tame chain hit the filtration bound")
        arity = len(entries) - 1
        twist = -1 if (arity % 2) else 1
        if level_cfg.d == 1:
            # bottom boundary: K_{j-1}(F_q); only j-1 = 1 carries data,
            # where F_q*/(F_q*)^ell = Z/ell via the canonical generator
            if arity != 1:
                return 0
            total = 0
            for c, ents in n.tame_aux_atoms:
                total += c * twist * ents[0].dlog()
            return total % ell
        terms = [(c * twist, ents) for c, ents in n.tame_aux_atoms]
        entries = entries[:-1]
        level_cfg = level_cfg.sub


def cup_pair(chi, xi, M=None):
    """The pairing of a degree-1 character datum with a K_d-class.

    chi is a CohClass of degree 1 (p-part: Artin-Schreier datum a; tame:
    Kummer datum a).  The value is inv of the sum over xi's symbols of
    a (x) entries.
    """
    if chi.qdeg != 1:
        raise ValueError("cup_pair expects a degree-1 class")
    cfg = xi.cfg
    if chi.ell != xi.ell:
        raise ValueError("mismatched moduli")
    terms = []
    for kc, entries in xi.terms:
        for term in chi.terms:
            if chi.is_p_part:
                c, w, _ = term
                terms.append((c * kc, w, tuple(entries)))
            else:
                c, units = term
                terms.append((c * kc, units + tuple(entries)))
    cls = CohClass(cfg, xi.ell, cfg.d + 1, terms)
    return inv(cls)
