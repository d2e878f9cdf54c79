"""Local hypersurface rings and finite linear algebra on monomials.

Membership in (F) + m^{N+1} for a principal ideal is decided by local
division: with monomials ordered graded-lexicographically and pivots taken at
the smallest monomial, the multiples {u*F} are automatically triangular, so
reduction is exact.  Ideals with several generators go through a sparse
echelon (MonomialBasisQuotient) with the same pivot convention.

All certificates are modulo m^{N+1}; m-primary containments m^e <= I proved at
any truncation N >= e are genuine by the Nakayama argument.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import lru_cache

from .errors import CeilingExceeded, NotIsolated, TruncationTooLow
from .series import INF, TruncatedSeries

DEFAULT_TRUNCATION = 32
DEFAULT_CERT_ORDER = 20
DIMENSION_CEILING = 48


@dataclass(frozen=True)
class LocalHypersurface:
    """A presentation k[[vars]]/(F) with a working truncation order."""

    field: object
    vars: tuple
    F: TruncatedSeries
    N: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        if len(self.vars) not in (2, 3):
            raise ValueError("vars must have length 2 or 3")
        if self.F.vars != tuple(self.vars):
            raise ValueError("F is over different variables")
        if len(self.vars) == 2:
            if not self.F.is_zero():
                raise ValueError("2-variable rings must be smooth (F = 0)")
        elif self.F.is_zero():
            raise ValueError("a 3-variable presentation needs F != 0")
        if self.F.constant_term():
            raise ValueError("F must have zero constant term")

    @property
    def smooth_ambient(self):
        return len(self.vars) == 2

    def series(self, s, binding=None):
        from .series import parse_series

        return parse_series(s, self.field, self.vars, binding)

    def zero(self):
        return TruncatedSeries.zero(self.field, self.vars)

    def extend_field(self, big):
        from .field import embedding

        emb = embedding(self.field, big)
        return LocalHypersurface(big, self.vars, self.F.extend_field(big, emb), self.N)

    def __repr__(self):
        return f"k[[{','.join(self.vars)}]]/({self.F.to_str()}) over {self.field}"


def _grlex_key(e):
    return (sum(e), e)


@lru_cache(maxsize=None)
def monomials_of_degree(nvars, d):
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for i in range(remaining + 1):
            rec(prefix + (i,), remaining - i, slots - 1)

    rec((), d, nvars)
    out.sort()
    return tuple(out)


def monomials_upto(nvars, N):
    """All exponent tuples of total degree <= N in grlex order."""
    out = []
    for d in range(N + 1):
        out.extend(monomials_of_degree(nvars, d))
    return out


def count_monomials_upto(nvars, N):
    import math

    return math.comb(N + nvars, nvars)


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def normal_form(g: TruncatedSeries, F: TruncatedSeries, N) -> TruncatedSeries:
    """Canonical representative of g modulo (F) + m^{N+1}.

    Local division by F: repeatedly cancel the grlex-smallest monomial that is
    divisible by F's smallest monomial.  The result has no monomial divisible
    by it, which is the unique normal form.
    """
    if F.is_zero():
        return g.truncate(N)
    fld = g.field
    m0 = min(F.terms, key=_grlex_key)
    c0 = F.terms[m0]
    c0_inv = fld.inv(c0)
    work = dict(g.truncate(N).terms)
    # monomials are processed in increasing grlex order; each cancellation only
    # introduces strictly larger monomials, so one sorted pass suffices
    agenda = sorted(work, key=_grlex_key)
    i = 0
    while i < len(agenda):
        e = agenda[i]
        i += 1
        c = work.get(e)
        if not c or not _divides(m0, e):
            continue
        u = tuple(x - y for x, y in zip(e, m0))
        factor = fld.mul(c, c0_inv)
        for ef, cf in F.terms.items():
            ne = tuple(x + y for x, y in zip(u, ef))
            if sum(ne) > N:
                continue
            s = fld.sub(work.get(ne, 0), fld.mul(factor, cf))
            if s:
                if ne not in work:
                    # insert into the pending agenda preserving grlex order
                    keys = [_grlex_key(a) for a in agenda[i:]]
                    pos = bisect.bisect_left(keys, _grlex_key(ne))
                    agenda.insert(i + pos, ne)
                work[ne] = s
            elif ne in work:
                del work[ne]
    return TruncatedSeries(g.field, g.vars, work, N)


def ideal_membership(g: TruncatedSeries, F: TruncatedSeries, N) -> bool:
    """True iff g lies in (F) + m^{N+1}."""
    return normal_form(g, F, N).is_zero()


class Echelon:
    """Sparse echelon basis of a span of series, pivoted at smallest monomials.

    Rows are stored reduced against each other at the pivot position only
    (lazy full reduction is unnecessary for membership tests).  Rows may be
    exact polynomials; queries are answered modulo m^{cap+1}.
    """

    def __init__(self, fld, vars, cap):
        self.field = fld
        self.vars = vars
        self.cap = cap
        self.rows = {}  # pivot exponent -> dict(exponent -> coeff), monic at pivot

    def _reduce(self, terms, upto=None):
        """Reduce modulo m^{upto+1}; entries beyond `upto` are dropped."""
        fld = self.field
        cap = self.cap if upto is None else upto
        work = {e: c for e, c in terms.items() if sum(e) <= cap}
        while work:
            e = min(work, key=_grlex_key)
            row = self.rows.get(e)
            if row is None:
                return e, work
            c = work[e]
            for er, cr in row.items():
                if sum(er) > cap:
                    continue
                s = fld.sub(work.get(er, 0), fld.mul(c, cr))
                if s:
                    work[er] = s
                elif er in work:
                    del work[er]
        return None, {}

    def insert(self, series: TruncatedSeries):
        """Reduce and adjoin; returns the new pivot or None if dependent."""
        pivot, rem = self._reduce(series.terms)
        if pivot is None:
            return None
        fld = self.field
        inv = fld.inv(rem[pivot])
        self.rows[pivot] = {e: fld.mul(c, inv) for e, c in rem.items()}
        return pivot

    def contains(self, series: TruncatedSeries, upto=None):
        """Membership in the span modulo m^{upto+1}."""
        pivot, _ = self._reduce(series.terms, upto)
        return pivot is None

    def has_unit(self):
        zero = (0,) * len(self.vars)
        return zero in self.rows

    def pivot_count_upto(self, d):
        return sum(1 for e in self.rows if sum(e) <= d)


class IdealSpan:
    """Incremental echelon of the span {u*g_i : monomial u} up to a degree cap.

    `grow(N)` ensures every product with pivot degree <= N has been inserted;
    quotient dimensions at successive N then come for free.
    """

    def __init__(self, gens, cap):
        gens = [g for g in gens if not g.is_zero()]
        if not gens:
            raise ValueError("ideal span needs at least one nonzero generator")
        self.gens = gens
        g0 = gens[0]
        self.ech = Echelon(g0.field, g0.vars, cap)
        self.cap = cap
        self.grown = -1

    def grow(self, N):
        if N <= self.grown:
            return
        nvars = len(self.ech.vars)
        for deg in range(self.grown + 1, N + 1):
            for g in self.gens:
                d0 = g.min_degree()
                if d0 is INF or d0 > deg:
                    continue
                for u in monomials_of_degree(nvars, deg - int(d0)):
                    self.ech.insert(g.mul_monomial(u))
        self.grown = N

    def quotient_dim(self, N):
        self.grow(N)
        return count_monomials_upto(len(self.ech.vars), N) - self.ech.pivot_count_upto(N)

    def contains(self, series, N):
        self.grow(N)
        return self.ech.contains(series.truncate(N), upto=N)

    def has_unit(self, N=2):
        self.grow(N)
        return self.ech.has_unit()


def local_dimension(gens, ceiling=DIMENSION_CEILING, start=1):
    """dim_k k[[vars]]/(gens) when the ideal is m-primary.

    Computed as the truncated quotient dimension at increasing N until two
    consecutive values agree; raises CeilingExceeded (with the last two
    dimensions) otherwise.
    """
    span = IdealSpan(gens, ceiling)
    prev = None
    for N in range(start, ceiling + 1):
        d = span.quotient_dim(N)
        if prev is not None and d == prev:
            return d
        prev = d
    raise CeilingExceeded((prev, span.quotient_dim(ceiling)))


def find_relation(gens, F, d_bound, N, symbols=None):
    """A minimal polynomial relation among gens modulo (F) + m^{N+1}.

    Evaluations of monomials in fresh symbols are echelonized in
    degree-then-lexicographic order; the first dependency encountered is the
    minimal relation, normalized monic at its latest monomial.  Returns None
    when no relation of total degree <= d_bound exists.
    """
    if d_bound < 2:
        raise ValueError("d_bound must be >= 2")
    orders = [g.min_degree() for g in gens]
    if any(o is INF for o in orders):
        orders = [0 if o is INF else o for o in orders]
    if orders and d_bound * max(orders) > N:
        raise TruncationTooLow(
            f"d_bound {d_bound} x max generator order {max(orders)} exceeds N = {N}"
        )
    fld = gens[0].field
    vars = gens[0].vars
    if symbols is None:
        symbols = tuple("UVWXYZ"[i] for i in range(len(gens)))
    zero_F = F is None or F.is_zero()

    ech = Echelon(fld, vars, N)
    combos = {}  # pivot -> dict(rel-monomial -> coeff) expressing pivot row
    pow_cache = [{0: TruncatedSeries.one(fld, vars)} for _ in gens]

    def gen_pow(i, n):
        cache = pow_cache[i]
        if n not in cache:
            half = gen_pow(i, n // 2)
            val = half * half
            if n % 2:
                val = val * gens[i]
            cache[n] = val.truncate(N)
        return cache[n]

    candidates = [m for m in monomials_upto(len(gens), d_bound) if any(m)]
    for mono in candidates:
        val = TruncatedSeries.one(fld, vars)
        for i, e in enumerate(mono):
            if e:
                val = (val * gen_pow(i, e)).truncate(N)
        if not zero_F:
            val = normal_form(val, F, N)
        # reduce against echelon, tracking the relation-monomial combination
        work = dict(val.terms)
        combo = {mono: 1}
        while work:
            e = min(work, key=_grlex_key)
            row = ech.rows.get(e)
            if row is None:
                break
            c = work[e]
            for er, cr in row.items():
                s = fld.sub(work.get(er, 0), fld.mul(c, cr))
                if s:
                    work[er] = s
                elif er in work:
                    del work[er]
            for rm, rc in combos[e].items():
                s = fld.sub(combo.get(rm, 0), fld.mul(c, rc))
                if s:
                    combo[rm] = s
                elif rm in combo:
                    del combo[rm]
        if not work:
            # dependency: combo gives the relation, already monic at `mono`
            return TruncatedSeries(fld, symbols, combo, INF)
        pivot = min(work, key=_grlex_key)
        inv = fld.inv(work[pivot])
        ech.rows[pivot] = {e: fld.mul(c, inv) for e, c in work.items()}
        combos[pivot] = {rm: fld.mul(rc, inv) for rm, rc in combo.items()}
    return None


def is_isolated_or_dim(gens, ceiling=DIMENSION_CEILING):
    """local_dimension wrapped to report non-stabilization as NotIsolated."""
    try:
        return local_dimension(gens, ceiling)
    except CeilingExceeded as exc:
        raise NotIsolated(str(exc)) from exc
