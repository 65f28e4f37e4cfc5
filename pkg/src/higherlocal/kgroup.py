"""Milnor K-symbol classes modulo a prime, with filtered normal forms.

A class in K_j(K)/ell is a formal sum of symbols whose entries are nonzero
tower elements.  The normal form follows the unit filtration of K:

* gr_0 splits into a K_j(F)-part (all entries units) and a K_{j-1}(F)-part
  (one uniformizer entry), each handled recursively over the residue field;
* gr_m for m >= 1 (only relevant for ell = p; principal units are
  ell-divisible otherwise) is recorded as a pair of differential forms over
  F: the main part of degree j-1 from symbols {1 + pi^m x, y_1, ..} and the
  aux part of degree j-2 from symbols {1 + pi^m x, .., pi}.

Symbols with two principal-unit entries are rewritten with the three-term
identity {1-a, 1-b} = {1-ab, -a} + {1-ab, 1-b} - {1-ab, 1-a}, which strictly
increases filtration levels, so the reduction terminates at the working
bound M.  Content pushed past M is dropped for equality-mod-U_{M+1} purposes
and flagged, making equality answers three-valued (equal / different /
unresolved beyond M).
"""

import heapq
import math

from .ffield import FFElem
from .forms import DiffForm, FormContext, d as form_d, dlog as form_dlog
from .tower import PrecisionError, TowerElement, _is_exact_zero, _level_of

_PRIN, _ULIFT, _LIFT, _PI = 0, 1, 2, 3


class _Atom:
    """One symbol entry in atomic shape: a principal unit of K, the lift of
    a principal unit of F (payload: its residue), a constant-section lift
    (payload: the residue), or the uniformizer."""

    __slots__ = ("kind", "payload", "_key")

    def __init__(self, kind, payload=None):
        self.kind = kind
        self.payload = payload
        self._key = None

    def key(self):
        if self._key is None:
            if self.kind == _PI:
                self._key = (_PI,)
            else:
                p = self.payload
                pk = p.key() if isinstance(p, TowerElement) else p.code
                self._key = (self.kind, pk)
        return self._key

    def __repr__(self):
        name = {_PRIN: "prin", _ULIFT: "ulift", _LIFT: "lift", _PI: "pi"}[self.kind]
        return name + (f"({self.payload})" if self.kind != _PI else "")


def _residue_field_ctx(cfg):
    """Form context over the residue field of cfg (one level down)."""
    return FormContext(cfg.ff if cfg.d == 1 else cfg.sub)


def _is_pth_power_residue(r):
    if isinstance(r, FFElem):
        return True  # finite fields are perfect
    return r.pth_root() is not None


def _drop_p_exponents(elem):
    """Remove terms at p-divisible exponents: the F^p-part of a series."""
    if isinstance(elem, FFElem):
        return elem.field.zero
    p = elem.cfg.p
    return TowerElement(elem.cfg, elem.level,
                        {e: c for e, c in elem.terms.items() if e % p},
                        elem.known_to)


def _minus_one_residue(cfg):
    lvl = cfg.d - 1
    return cfg.ff.from_int(-1) if lvl == 0 else cfg.from_int(-1, lvl)


def _residue_is_one(r):
    if isinstance(r, FFElem):
        return r.code == 1
    one = r.cfg.one(r.level)
    return r == one


def _lead_known_exp(elem):
    """Smallest exponent carrying a known-nonzero coefficient, else None."""
    best = None
    for e, c in elem.terms.items():
        if (best is None or e < best) and TowerElement._coeff_known_nonzero(c):
            best = e
    return best


def _inner_truncate(elem, bound):
    """Truncate the coefficients of a depth-2 element at the inner window.

    Sound (claims less knowledge) and necessary: the unit-lift rewriting
    refines coefficients one inner degree at a time, so exact coefficients
    must be capped at the working window for the loop to exhaust.
    """
    if bound is None or elem.level < 2:
        return elem
    return TowerElement(
        elem.cfg, elem.level,
        {e: c.truncate(bound) for e, c in elem.terms.items()},
        elem.known_to,
    )


class Normal:
    """Normal form of a symbol sum over one field level."""

    __slots__ = ("cfg", "level", "ell", "arity", "M", "value", "unit_dlog",
                 "tame_main_atoms", "tame_aux_atoms", "tame_main", "tame_aux",
                 "graded", "tail")

    def __init__(self, cfg, level, ell, arity, M):
        self.cfg = cfg
        self.level = level
        self.ell = ell
        self.arity = arity
        self.M = M
        self.value = 0          # level 0, arity 0: Z/ell
        self.unit_dlog = 0      # level 0, arity 1: Z/gcd(ell, q-1)
        self.tame_main_atoms = []
        self.tame_aux_atoms = []
        self.tame_main = None
        self.tame_aux = None
        self.graded = {}        # m -> [main DiffForm, aux DiffForm] (raw)
        self.tail = False

    # -- canonical graded data -------------------------------------------

    def canonical_level(self, m):
        """Folded graded pair at level m (for equality and zero tests).

        Uses the reduced records (p-power parts of the peeled coefficients
        already dropped); for p not dividing m the aux part folds into the
        main part through {1+pi^m x, pi} = -(1/m){1+pi^m x, -x}, which at the
        form level is a -(1/m) d(aux) term.
        """
        if not self.level:
            return None
        entry = self.graded.get(m)
        if entry is None:
            return None
        ctx = _residue_field_ctx(self.cfg)
        main, aux = entry[2], entry[3]
        p = self.cfg.p
        if m % p:
            if aux is not None and aux.degree == 0 and not aux.is_structural_zero():
                inv_m = pow(m % p, p - 2, p) if p > 2 else 1
                main = main + form_d(ctx, aux.coeff).times(-inv_m)
            aux = DiffForm(ctx, aux.degree) if aux is not None else None
        return main, aux

    def _canonical_levels(self):
        out = {}
        for m in self.graded:
            pair = self.canonical_level(m)
            if pair is None:
                continue
            main, aux = pair
            if not main.is_known_zero() or (aux is not None and not aux.is_known_zero()):
                out[m] = (main, aux)
        return out

    # -- queries -----------------------------------------------------------

    def is_zero_mod_u(self):
        """Zero modulo U_{M+1} at working precision (tail ignored)."""
        if self.level == 0:
            if self.arity == 0:
                return self.value % self.ell == 0
            if self.arity == 1:
                return self.unit_dlog == 0
            return True
        if self.tame_main is not None and not self.tame_main.is_zero_mod_u():
            return False
        if self.tame_aux is not None and not self.tame_aux.is_zero_mod_u():
            return False
        return not self._canonical_levels()

    def has_tail(self):
        if self.tail:
            return True
        for child in (self.tame_main, self.tame_aux):
            if child is not None and child.has_tail():
                return True
        return False

    def in_u(self, m):
        """Certified membership in U_m (gr_0 and all levels < m vanish)."""
        if self.level == 0:
            return self.is_zero_mod_u()
        for child in (self.tame_main, self.tame_aux):
            if child is not None and not child.is_zero_mod_u():
                return False
        levels = self._canonical_levels()
        return all(k >= m for k in levels)

    def compare(self, other):
        """'equal' / 'different' / 'unresolved' against another normal form
        (same field, arity, modulus, bound)."""
        if self.level == 0:
            same = (self.value - other.value) % self.ell == 0 \
                and self.unit_dlog == other.unit_dlog
            return "equal" if same else "different"
        for a, b in ((self.tame_main, other.tame_main),
                     (self.tame_aux, other.tame_aux)):
            if a is not None and b is not None:
                sub = a.compare(b)
                if sub == "different":
                    return "different"
        mine, theirs = self._canonical_levels(), other._canonical_levels()
        for m in sorted(set(mine) | set(theirs)):
            pa = mine.get(m)
            pb = theirs.get(m)
            for idx in (0, 1):
                fa = pa[idx] if pa else None
                fb = pb[idx] if pb else None
                if fa is None and fb is None:
                    continue
                if fa is None or fb is None:
                    probe = fb if fa is None else fa
                    if not probe.is_known_zero():
                        return "different"
                elif not (fa - fb).is_known_zero():
                    return "different"
        if self.has_tail() or other.has_tail():
            return "unresolved"
        return "equal"


class _Normalizer:
    def __init__(self, cfg, ell, arity, M):
        if cfg.d == 0:
            raise ValueError("need a positive-depth field")
        self.cfg = cfg
        self.level = cfg.d
        self.ell = ell
        self.arity = arity
        self.M = M
        self.normal = Normal(cfg, cfg.d, ell, arity, M)
        self.queue = []
        # one-principal symbols {w, rest} are additive in w:
        # {w1, rest} + {w2, rest} = {w1 w2, rest}, so units sharing the same
        # companion entries accumulate multiplicatively before peeling
        self.buckets = {}
        self._seq = 0
        self.is_p = (ell == cfg.p)
        # inner working window for coefficient refinements (depth 2 only)
        self.inner_cap = cfg.prec[cfg.d - 2] if cfg.d >= 2 else None

    # -- entry decomposition ------------------------------------------------

    def _decompose_entry(self, entry):
        """entry = pi^m * lift(resid) * w, with w principal in pi.

        Coefficients below the leading known exponent are unresolved zeros
        (working-precision content) and are dropped.
        """
        cfg = self.cfg
        m = _lead_known_exp(entry)
        if m is None:
            raise PrecisionError("entry has no resolvable leading term")
        shifted = entry.shift(-m)
        resid = shifted.residue0()
        rinv = resid.inverse()
        if cfg.d > 1 and _level_of(rinv) < cfg.d - 1:
            rinv = cfg.lift(rinv, cfg.d - 1)
        # the exp-0 coefficient resid*rinv is exactly 1; build w without it
        # so truncated inverses cannot leave an unresolved residual there
        wterms = {0: cfg.one(cfg.d - 1) if cfg.d > 1 else cfg.ff.one}
        for e, c in shifted.terms.items():
            if e > 0:
                wterms[e] = c * rinv
        w = TowerElement(cfg, cfg.d, wterms, shifted.known_to)
        return m, resid, w

    def _expand_entry(self, entry):
        """Multilinear pieces of one entry: [(multiplicity, atom)]."""
        m, resid, w = self._decompose_entry(entry)
        pieces = []
        if m:
            pieces.append((m, _Atom(_PI)))
        if not _residue_is_one(resid):
            pieces.append((1, _Atom(_LIFT, resid)))
        if not (w - self.cfg.one(self.cfg.d)).is_exact_zero():
            pieces.append((1, _Atom(_PRIN, w)))
        return pieces

    # -- routing --------------------------------------------------------------

    def add_symbol(self, coeff, entries):
        coeff %= self.ell
        if coeff == 0:
            return
        one = self.cfg.one(self.cfg.d)
        if len(entries) == 2:
            a, b = entries
            if b == one - a or a == one - b:
                return  # Steinberg {a, 1-a} = 0
            if b == -a:
                return  # {a, -a} = 0
        # expand multilinearly into atoms
        choices = [[(coeff, [])]]
        for entry in entries:
            pieces = self._expand_entry(entry)
            new = []
            for c, atoms in choices[-1]:
                for mult, atom in pieces:
                    new.append((c * mult, atoms + [atom]))
            choices.append(new)
        for c, atoms in choices[-1]:
            self._route(c, atoms)

    def _route(self, coeff, atoms):
        coeff %= self.ell
        if coeff == 0:
            return
        atoms, sign, dead = _sort_atoms(atoms, self.cfg)
        if dead:
            return
        coeff = (coeff * sign) % self.ell
        if coeff == 0:
            return
        if self.is_p:
            for a in atoms:
                if a.kind == _LIFT and _is_pth_power_residue(a.payload):
                    return  # {.., lift(z^p), ..} = p*(..) = 0 mod p
        prins = [a for a in atoms if a.kind == _PRIN]
        if not prins:
            # atoms may contain ULIFTs only as three-term byproducts of
            # principal symbols; fold them back into plain lifts for the
            # tame recursion
            pis = 0
            lifts = []
            for a in atoms:
                if a.kind == _PI:
                    pis += 1
                else:
                    lifts.append(a.payload)  # ULIFT payloads are residues too
            if pis == 0:
                self.normal.tame_main_atoms.append((coeff, tuple(lifts)))
            else:
                self.normal.tame_aux_atoms.append((coeff, tuple(lifts)))
            return
        if not self.is_p:
            return  # principal units are ell-divisible for ell != p
        # principal symbols: put companion lifts into canonical shape
        # (powers of the p-base lift, constants, unit-lifts)
        for i, a in enumerate(atoms):
            if a.kind == _LIFT and not self._is_tbase(a.payload):
                self._split_lift(coeff, atoms, i)
                return
        w = prins[0].payload
        rest = [a for a in atoms if a is not prins[0]]
        if len(prins) == 1 and not any(a.kind == _ULIFT for a in rest):
            self._bucket_add(coeff, w, rest)
        else:
            self._enqueue(coeff, w, rest)

    def _is_tbase(self, resid):
        if isinstance(resid, FFElem):
            return False
        sub = self.cfg.sub
        return resid == sub.var_elem(sub.vars[-1])

    def _split_lift(self, coeff, atoms, i):
        """Rewrite the general lift entry atoms[i] as t^a * c * (unit) and
        route the resulting multilinear pieces."""
        resid = atoms[i].payload
        others = atoms[:i] + atoms[i + 1:]
        if isinstance(resid, FFElem):
            return  # constants are p-th powers; the symbol dies mod p
        sub = self.cfg.sub
        a = resid.lead_exp()
        lead = resid.lead_coeff()
        while isinstance(lead, TowerElement):
            lead = lead.lead_coeff()
        if a:
            tbase = sub.var_elem(sub.vars[-1])
            self._route(coeff * a, others + [_Atom(_LIFT, tbase)])
        # the constant piece {.., lift(c), ..} is a p-th power: dead mod p
        unit = resid.shift(-a).mul_const(lead.inverse())
        z = unit - sub.one(sub.d)
        if not z.is_known_zero():
            self._route(coeff, others + [_Atom(_ULIFT, unit)])

    def _check_unit(self, w, slack):
        """Classify w - 1: returns its level, or None when the symbol is
        negligible mod U_{M+1} (tail flagged as needed)."""
        diff = w - self.cfg.one(self.cfg.d)
        if diff.is_exact_zero():
            return None
        m = _lead_known_exp(diff)
        if m is None:
            if diff.known_to + slack <= self.M:
                raise PrecisionError(
                    "principal unit known only to level %d < bound %d"
                    % (diff.known_to, self.M + 1 - slack))
            self.normal.tail = True
            return None
        if m + slack > self.M:
            self.normal.tail = True
            return None
        return m

    def _bucket_add(self, coeff, w, rest):
        if self._check_unit(w, 0) is None:
            return
        key = tuple(a.key() for a in rest)
        slot = self.buckets.get(key)
        power = _inner_truncate((w ** (coeff % self.ell)).truncate(self.M + 2),
                                self.inner_cap)
        if slot is None:
            self.buckets[key] = [power, tuple(rest)]
        else:
            slot[0] = _inner_truncate((slot[0] * power).truncate(self.M + 2),
                                      self.inner_cap)

    def _enqueue(self, coeff, w, rest):
        one = self.cfg.one(self.cfg.d)
        # {U_a, U_b} c U_{a+b}: companion principal entries buy slack
        slack = 0
        for a in rest:
            if a.kind != _PRIN:
                continue
            diff = a.payload - one
            lv = _lead_known_exp(diff)
            if lv is None:
                if diff.is_exact_zero():
                    return  # {.., 1, ..} = 0
                if diff.known_to <= self.M:
                    raise PrecisionError(
                        "principal entry known only to level %d < bound %d"
                        % (diff.known_to, self.M + 1))
                self.normal.tail = True
                return
            slack += lv
        m = self._check_unit(w, slack)
        if m is None:
            return
        self._seq += 1
        heapq.heappush(self.queue, (m, self._seq, coeff, w, tuple(rest)))

    # -- graded reduction -------------------------------------------------------

    def run_graded(self):
        guard = 0
        while self.queue:
            guard += 1
            if guard > 500000:
                raise RuntimeError("graded reduction did not terminate")
            m, _, coeff, w, rest = heapq.heappop(self.queue)
            partner = next((a for a in rest if a.kind in (_PRIN, _ULIFT)), None)
            if partner is None:
                # routing placed canonical one-principal symbols in buckets
                self._bucket_add(coeff, w, rest)
                continue
            self._apply_three_term(coeff, w, partner, rest)
        for unit, rest in self.buckets.values():
            self._peel_bucket(unit, rest)

    def _apply_three_term(self, coeff, w, other, rest):
        """{1-a, 1-b, rest} = {1-ab, -a, rest} + {1-ab, 1-b, rest}
        - {1-ab, 1-a, rest}.

        The partner entry 1-b is a second principal unit of K or the lift
        of a principal unit of F; either way 1-ab is strictly deeper
        (in the pi-filtration resp. in the coefficient filtration), so the
        rewriting terminates at the working precision.
        """
        cfg = self.cfg
        one = cfg.one(cfg.d)
        cap = self.M + 2
        v = other.payload if other.kind == _PRIN else cfg.lift(other.payload, cfg.d)
        remaining = [a for a in rest if a is not other]
        alpha = (one - w).truncate(cap)      # = -a with v >= m
        beta = one - v
        gamma = _inner_truncate((one - alpha * beta).truncate(cap), self.inner_cap)
        gat = _Atom(_PRIN, gamma)
        # {gamma, -alpha, rest}: -alpha = w - 1 expands like an entry
        minus_alpha = _inner_truncate((w - one).truncate(cap), self.inner_cap)
        for mult, atom in self._expand_entry(minus_alpha):
            self._route(coeff * mult, [gat, atom] + remaining)
        self._route(coeff, [gat, other] + remaining)
        self._route(-coeff, [gat, _Atom(_PRIN, w)] + remaining)

    def _peel_bucket(self, w, rest):
        """Layer-by-layer expansion of one accumulated principal unit.

        Coefficients whose known terms all cancelled (zero at working
        precision) are skipped; only outer content past the bound M sets
        the unresolved-tail flag.
        """
        cfg = self.cfg
        one = cfg.one(cfg.d)
        guard = 0
        while True:
            guard += 1
            if guard > 4 * (self.M + 4):
                raise RuntimeError("principal-unit peeling did not terminate")
            diff = w - one
            if diff.is_exact_zero():
                return
            m = _lead_known_exp(diff)
            if m is None:
                if diff.known_to <= self.M:
                    raise PrecisionError(
                        "principal unit known only to level %d < bound %d"
                        % (diff.known_to, self.M + 1))
                self.normal.tail = True
                return
            if m > self.M:
                self.normal.tail = True
                return
            xbar = diff.coeff(m)
            self._record(1, m, xbar, rest)
            # strip the recorded head: w = (1 + pi^m lift(xbar)) * w'
            head = one + cfg.lift(xbar, cfg.d).shift(m)
            head_inv = head.inverse().truncate(self.M + 2)
            numerator = TowerElement(
                cfg, cfg.d,
                {e: c for e, c in diff.terms.items() if e != m},
                diff.known_to,
            )
            w = (one + numerator * head_inv).truncate(self.M + 2)

    def _record(self, coeff, m, xbar, rest):
        if _is_exact_zero(xbar):
            return
        ctx = _residue_field_ctx(self.cfg)
        lifts = [a.payload for a in rest if a.kind == _LIFT]
        has_pi = any(a.kind == _PI for a in rest)
        j = self.arity
        if m not in self.normal.graded:
            blank = [DiffForm(ctx, j - 1), DiffForm(ctx, j - 2) if j >= 2 else None]
            self.normal.graded[m] = blank + [blank[0], blank[1]]
        slot = self.normal.graded[m]
        idx = 1 if has_pi else 0
        deg = j - 2 if has_pi else j - 1
        contrib = self._wedge(ctx, xbar, lifts, deg)
        if contrib is not None:
            slot[idx] = slot[idx] + contrib.times(coeff)
        # canonical (reduced) records quotient the level-m kernel: at p | m
        # the relevant piece is Omega^deg / Z^deg, and with a p-base of size
        # <= 1 the cocycles Z^deg are all of Omega^deg in degree >= 1 and
        # F^p in degree 0
        if m % self.cfg.p == 0:
            if deg >= 1:
                return
            xred = _drop_p_exponents(xbar)
            if _is_exact_zero(xred):
                return
            rcontrib = self._wedge(ctx, xred, lifts, deg)
        else:
            rcontrib = contrib
        if rcontrib is not None:
            slot[idx + 2] = slot[idx + 2] + rcontrib.times(coeff)

    def _wedge(self, ctx, xbar, lifts, degree):
        """xbar dlog y_1 ^ ... in dlog normal form (degree <= 1 supported)."""
        if degree != len(lifts):
            raise AssertionError("arity bookkeeping is off")
        if degree == 0:
            return DiffForm(ctx, 0, xbar)
        if degree == 1:
            base = form_dlog(ctx, lifts[0])
            if base.is_structural_zero():
                return base
            return base.scale(xbar)
        # degree >= 2 vanishes over our residue fields
        return DiffForm(ctx, degree)

    # -- tame recursion -----------------------------------------------------

    def finish(self):
        self.run_graded()
        n = self.normal
        sub_d = self.cfg.d - 1
        if sub_d == 0:
            n.tame_main = _finite_normal(self.cfg.ff, self.ell, self.arity,
                                         n.tame_main_atoms, self.M)
            if self.arity >= 1:
                n.tame_aux = _finite_normal(self.cfg.ff, self.ell, self.arity - 1,
                                            n.tame_aux_atoms, self.M)
        else:
            sub = self.cfg.sub
            n.tame_main = normalize_terms(sub, self.ell, self.arity,
                                          n.tame_main_atoms, self.M)
            if self.arity >= 1:
                n.tame_aux = normalize_terms(sub, self.ell, self.arity - 1,
                                             n.tame_aux_atoms, self.M)
        return n


def _sort_atoms(atoms, cfg):
    """Canonical order (prin < lift < pi) with antisymmetry sign; duplicate
    entries are rewritten with {x, x} = {x, -1}.  Returns (atoms, sign, dead)."""
    sign = 1
    atoms = list(atoms)
    minus_one = _minus_one_residue(cfg)
    mo_key = minus_one.key() if isinstance(minus_one, TowerElement) else minus_one.code
    while True:
        # insertion sort, tracking parity
        changed = True
        while changed:
            changed = False
            for i in range(len(atoms) - 1):
                if atoms[i].key() > atoms[i + 1].key():
                    atoms[i], atoms[i + 1] = atoms[i + 1], atoms[i]
                    sign = -sign
                    changed = True
        dup = None
        for i in range(len(atoms) - 1):
            if atoms[i].key() == atoms[i + 1].key():
                dup = i
                break
        if dup is None:
            return atoms, sign, False
        a = atoms[dup]
        payload_key = a.key()
        if a.kind == _LIFT and (1, mo_key) == payload_key:
            return atoms, sign, True  # {-1, -1} is killed by every prime modulus
        atoms[dup + 1] = _Atom(_LIFT, minus_one)
        if _residue_is_one(minus_one):
            del atoms[dup + 1]  # p = 2: -1 = 1 and {x, 1} = 0
            return atoms, sign, True


def _finite_normal(ff, ell, arity, atom_terms, M):
    """Bottom of the recursion: K_j(F_q)/ell."""
    n = Normal(None, 0, ell, arity, M)
    if arity == 0:
        n.value = sum(c for c, _ in atom_terms) % ell
    elif arity == 1:
        g = math.gcd(ell, ff.q - 1)
        total = 0
        for c, entries in atom_terms:
            total += c * entries[0].dlog()
        n.unit_dlog = total % g if g > 1 else 0
    # arity >= 2: K_2 of a finite field vanishes
    return n


def normalize_terms(cfg, ell, arity, raw_terms, M):
    """Normalize a list of (coeff, entries) over the given tower."""
    nz = _Normalizer(cfg, ell, arity, M)
    for coeff, entries in raw_terms:
        nz.add_symbol(coeff, tuple(entries))
    return nz.finish()


class KClass:
    """A class in K_j(K)/ell as a formal symbol sum with cached normal forms."""

    __slots__ = ("cfg", "ell", "arity", "terms", "_normals")

    def __init__(self, cfg, ell, arity, terms):
        self.cfg = cfg
        self.ell = ell
        self.arity = arity
        self.terms = tuple((c, tuple(e)) for c, e in terms)
        for _, entries in self.terms:
            if len(entries) != arity:
                raise ValueError("inconsistent symbol arity")
        self._normals = {}

    def default_bound(self):
        return self.cfg.prec[-1] - 2

    def normal(self, M=None):
        M = self.default_bound() if M is None else M
        n = self._normals.get(M)
        if n is None:
            n = normalize_terms(self.cfg, self.ell, self.arity, self.terms, M)
            self._normals[M] = n
        return n

    def __add__(self, other):
        if not isinstance(other, KClass):
            return NotImplemented
        if (other.cfg, other.ell, other.arity) != (self.cfg, self.ell, self.arity):
            raise ValueError("mismatched K-classes")
        return KClass(self.cfg, self.ell, self.arity, self.terms + other.terms)

    def __neg__(self):
        return KClass(self.cfg, self.ell, self.arity,
                      [(-c, e) for c, e in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def times(self, k):
        return KClass(self.cfg, self.ell, self.arity,
                      [(c * k, e) for c, e in self.terms])

    def reduces_to_zero(self, M=None):
        """Zero modulo U_{M+1} at working precision."""
        return self.normal(M).is_zero_mod_u()

    def in_u(self, m, M=None):
        return self.normal(M).in_u(m)

    def compare(self, other, M=None):
        """Three-valued equality: 'equal', 'different', or 'unresolved'
        (supported entirely beyond the filtration bound)."""
        return self.normal(M).compare(other.normal(M))

    def render(self):
        sym = []
        for c, entries in self.terms:
            body = "{" + ", ".join(str(e) for e in entries) + "}"
            sym.append(body if c == 1 else f"{c % self.ell}*{body}")
        return " + ".join(sym) if sym else "0"

    def __repr__(self):
        return f"KClass[{self.render()} mod {self.ell}]"


def symbol(cfg, entries, ell):
    """The class of {e_1, .., e_j} in K_j(K)/ell."""
    entries = tuple(entries)
    for e in entries:
        if not isinstance(e, TowerElement) or e.level != cfg.d:
            raise ValueError("symbol entries must be top-level tower elements")
        if e.is_exact_zero():
            raise ZeroDivisionError("symbol entries must be nonzero")
        e.lead_exp()  # raises PrecisionError when the leading term is unknown
    return KClass(cfg, ell, len(entries), [(1, entries)])


def zero_class(cfg, ell, arity):
    return KClass(cfg, ell, arity, [])


class GradedRep:
    """Differential-form representative of a class in gr_m."""

    __slots__ = ("m", "form_main", "form_aux")

    def __init__(self, m, form_main, form_aux):
        self.m = m
        self.form_main = form_main
        self.form_aux = form_aux

    def __repr__(self):
        return f"GradedRep(m={self.m}, main={self.form_main}, aux={self.form_aux})"


def tame_boundary(xi, M=None):
    """The two gr_0 components: (K_j(F)-part, K_{j-1}(F)-part).

    Over a depth->=2 residue field the parts are returned as KClass objects;
    over F_q the unit part is a field element (the K_1 class representative)
    and the K_0 part an integer mod ell.  The aux part carries the boundary
    convention d{pi, u} = [u-bar], i.e. a (-1)^(j-1) twist against the
    pi-last storage order.
    """
    n = xi.normal(M)
    twist = -1 if (xi.arity - 1) % 2 else 1
    cfg = xi.cfg
    if cfg.d == 1:
        ff = cfg.ff
        if xi.arity == 1:
            main = ff.one
            for c, entries in n.tame_main_atoms:
                main = main * entries[0] ** c
            aux = sum(c for c, _ in n.tame_aux_atoms) * twist % xi.ell
            return main, aux
        main_cls = [(c, entries) for c, entries in n.tame_main_atoms]
        aux_elem = ff.one
        for c, entries in n.tame_aux_atoms:
            aux_elem = aux_elem * entries[0] ** (c * twist)
        return main_cls, aux_elem
    sub = cfg.sub
    main = KClass(sub, xi.ell, xi.arity, n.tame_main_atoms)
    aux = KClass(sub, xi.ell, xi.arity - 1,
                 [(c * twist, e) for c, e in n.tame_aux_atoms])
    return main, aux


def graded_expand(xi, m, M=None):
    """The raw form pair representing xi in gr_m; requires xi in U_m."""
    M = xi.default_bound() if M is None else M
    if m < 1 or m > M:
        raise ValueError(f"level {m} outside 1..{M}")
    n = xi.normal(M)
    if not n.in_u(m):
        raise ValueError(f"class is not in U_{m} at the working precision")
    ctx = _residue_field_ctx(xi.cfg)
    entry = n.graded.get(m)
    if entry is None:
        main = DiffForm(ctx, xi.arity - 1)
        aux = DiffForm(ctx, xi.arity - 2) if xi.arity >= 2 else None
    else:
        main, aux = entry[0], entry[1]
    return GradedRep(m, main, aux)


def symbol_from_form(cfg, rep, ell):
    """Rebuild a U_m class from a graded representative (inverse of
    graded_expand up to U_{m+1})."""
    one = cfg.one(cfg.d)
    pi = cfg.uniformizer()
    terms = []
    m = rep.m
    main = rep.form_main
    if main is not None and not main.is_structural_zero() and not main.is_known_zero():
        x = cfg.lift(main.coeff, cfg.d)
        w = one + x.shift(m)
        if main.degree == 0:
            terms.append((1, (w,)))
        else:
            t = cfg.var_elem(main.ctx.p_base[0])
            terms.append((1, (w, t)))
    aux = rep.form_aux
    if aux is not None and not aux.is_structural_zero() and not aux.is_known_zero():
        x = cfg.lift(aux.coeff, cfg.d)
        w = one + x.shift(m)
        if aux.degree == 0:
            terms.append((1, (w, pi)))
        else:
            t = cfg.var_elem(aux.ctx.p_base[0])
            terms.append((1, (w, t, pi)))
    arity = (main.degree + 1) if main is not None else (aux.degree + 2)
    return KClass(cfg, ell, arity, terms)


def k_norm(eta_terms, ext, arity, ell):
    """Norm of an L-symbol sum down to K by the projection formula.

    ``eta_terms`` is a list of (coeff, entries) where each entry is either a
    base-field element or an element of ext's extension field L; at most one
    entry per symbol may lie properly in L.  Symbols entirely from K pick up
    a factor ell and vanish.  Returns a KClass over K.
    """
    cfg = ext.cfg
    out = []
    for coeff, entries in eta_terms:
        proper = [i for i, z in enumerate(entries) if ext.is_proper(z)]
        if len(proper) > 1:
            reduced = ext.reduce_two_entry(entries)
            if reduced is None:
                raise ValueError(
                    "irreducible symbol with two extension-field entries")
            coeff2, entries = reduced
            coeff = coeff * coeff2
            proper = [i for i, z in enumerate(entries) if ext.is_proper(z)]
            if len(proper) > 1:
                raise ValueError(
                    "irreducible symbol with two extension-field entries")
        if not proper:
            continue  # N(res(x)) = ell * x = 0 mod ell
        i = proper[0]
        normed = ext.norm(entries[i])
        new_entries = tuple(
            normed if k == i else ext.coerce_down(z)
            for k, z in enumerate(entries)
        )
        out.append((coeff, new_entries))
    return KClass(cfg, ell, arity, out)


def p_divisibility_check(cfg, samples, rng, M=None):
    """Sampled verification that K_2(F)/p = 0 for F = F_q((t)).

    Returns a report dict; failures list symbols whose normal form did not
    reduce to zero within the filtration bound, inconclusive counts precision
    refusals.
    """
    from .tower import sample_element

    if cfg.d != 1:
        raise ValueError("p-divisibility check runs over F_q((t))")
    p = cfg.p
    M = cfg.prec[0] - 2 if M is None else M
    report = {"samples": samples, "zero": 0, "failures": [], "inconclusive": 0}
    for _ in range(samples):
        a = sample_element(cfg, rng, span=(-3, 5))
        b = sample_element(cfg, rng, span=(-3, 5))
        try:
            cls = symbol(cfg, (a, b), p)
            if cls.reduces_to_zero(M):
                report["zero"] += 1
            else:
                report["failures"].append(cls.render())
        except PrecisionError:
            report["inconclusive"] += 1
    report["ok"] = not report["failures"]
    return report
