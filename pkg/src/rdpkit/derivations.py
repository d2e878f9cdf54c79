"""Derivations on local hypersurfaces.

A derivation is given by the images of the variables.  Application follows
the Leibniz rule with slack accounting: when every image lies in m the
certification order of D(g) equals min(order(g), image orders); an image with
a unit constant term costs one order (the derivative of an uncertified term
of degree N+1 can surface at degree N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import (
    Inconclusive,
    NotPClosed,
    TruncationUnderflow,
    VariableMismatch,
    WitnessRejected,
)
from .local import (
    Echelon,
    IdealSpan,
    LocalHypersurface,
    monomials_upto,
    normal_form,
)
from .series import INF, TruncatedSeries

H_SOLVE_DEGREE_BOUND = 10


@dataclass(frozen=True)
class Derivation:
    ring: LocalHypersurface
    images: dict  # variable -> TruncatedSeries
    h: Optional[TruncatedSeries] = None

    def __post_init__(self):
        for v in self.ring.vars:
            if v not in self.images:
                raise VariableMismatch(f"missing image for {v}")
            if self.images[v].vars != self.ring.vars:
                raise VariableMismatch(f"image of {v} over wrong ring")
        if all(
            normal_form(img, self.ring.F, self.ring.N).is_zero()
            for img in self.images.values()
        ):
            raise ValueError("derivation is zero modulo (F)")

    def image_list(self):
        return [self.images[v] for v in self.ring.vars]

    def min_image_order(self):
        return min(img.min_degree() for img in self.images.values())

    def scale(self, a: TruncatedSeries):
        return Derivation(self.ring, {v: a * img for v, img in self.images.items()})

    def __repr__(self):
        imgs = ", ".join(f"D({v}) = {self.images[v].to_str()}" for v in self.ring.vars)
        return f"<Derivation {imgs}>"


def apply(D: Derivation, g: TruncatedSeries) -> TruncatedSeries:
    """Leibniz evaluation sum_v dg/dv * D(v) with sharp order accounting.

    Per variable, uncertified terms of g (degree > order) contribute only at
    degree >= order(g) + ord(D(v)), so the derivative's certification may be
    bumped by ord(D(v)) before multiplying; images in m therefore cost no
    slack, a unit image costs one order.
    """
    if g.vars != D.ring.vars:
        raise VariableMismatch("argument over a different ring")
    ring = D.ring
    out = TruncatedSeries.zero(ring.field, ring.vars)
    for v in ring.vars:
        img = D.images[v]
        if img.is_zero() and img.order is INF:
            continue
        dg = g.diff(v)
        if dg.order is not INF:
            bump = img.min_degree()
            bump = 0 if bump is INF else int(bump)
            dg = TruncatedSeries(ring.field, ring.vars, dg.terms, dg.order + bump)
        out = out + dg * img
    return out


def check_derivation(B: LocalHypersurface, D: Derivation, N_out=None):
    """D descends to B iff D(F) lies in (F) + m^{N+1}; returns (ok, residual)."""
    N = N_out if N_out is not None else B.N
    if B.smooth_ambient:
        return True, B.zero()
    residual = normal_form(apply(D, B.F), B.F, N)
    return residual.is_zero(), residual


def p_power(D: Derivation, N_out=None):
    """Images of D^p on the variables, reduced mod (F) + m^{N+1}."""
    ring = D.ring
    p = ring.field.p
    N = N_out if N_out is not None else ring.N
    images = {}
    for v in ring.vars:
        cur = TruncatedSeries.variable(ring.field, ring.vars, v)
        for _ in range(p):
            cur = apply(D, cur)
        if cur.order < N:
            raise TruncationUnderflow(
                f"p-fold application only certified to order {cur.order} < {N}"
            )
        images[v] = normal_form(cur, ring.F, N) if not ring.smooth_ambient else cur.truncate(N)
    return images


def solve_series_system(ring, pairs, d_bound, N):
    """Solve for a series s with s * a_v = b_v mod (F)+m^{N+1} for all pairs.

    pairs: list of (a_v, b_v).  Unknown s has degree <= d_bound (constant term
    allowed).  Returns the solution with free coordinates set to zero, or None.
    Deterministic: monomials processed in grlex order.
    """
    fld = ring.field
    F = None if ring.smooth_ambient else ring.F

    def nf(t):
        return t.truncate(N) if F is None else normal_form(t, F, N)

    # stacked vector space: key = (pair index, exponent)
    ech_rows = {}
    combos = {}
    from .local import _grlex_key

    def stack_key(item):
        i, e = item
        return (i,) + _grlex_key(e)

    def reduce_vec(vec, combo):
        while vec:
            key = min(vec, key=stack_key)
            row = ech_rows.get(key)
            if row is None:
                return key, vec, combo
            c = vec[key]
            for k2, c2 in row.items():
                s = fld.sub(vec.get(k2, 0), fld.mul(c, c2))
                if s:
                    vec[k2] = s
                elif k2 in vec:
                    del vec[k2]
            rc = combos[key]
            for m2, c2 in rc.items():
                s = fld.sub(combo.get(m2, 0), fld.mul(c, c2))
                if s:
                    combo[m2] = s
                elif m2 in combo:
                    del combo[m2]
        return None, {}, combo

    unknowns = monomials_upto(len(ring.vars), d_bound)
    for mono in unknowns:
        vec = {}
        for i, (a_v, _) in enumerate(pairs):
            prod = nf(a_v.mul_monomial(mono))
            for e, c in prod.terms.items():
                vec[(i, e)] = c
        combo = {mono: 1}
        key, vec, combo = reduce_vec(vec, combo)
        if key is not None:
            inv = fld.inv(vec[key])
            ech_rows[key] = {k: fld.mul(c, inv) for k, c in vec.items()}
            combos[key] = {m: fld.mul(c, inv) for m, c in combo.items()}
    # reduce the target; if it lands in the span, read off the combination
    target = {}
    for i, (_, b_v) in enumerate(pairs):
        for e, c in nf(b_v).terms.items():
            target[(i, e)] = c
    combo = {}
    key, target, combo = reduce_vec(target, combo)
    if key is not None:
        return None
    sol = {m: fld.neg(c) for m, c in combo.items()}
    return TruncatedSeries(fld, ring.vars, sol, INF).truncate(N)


def check_p_closed(B: LocalHypersurface, D: Derivation, h_claimed=None, N_out=None,
                   d_bound=H_SOLVE_DEGREE_BOUND):
    """Verify or find the p-closure witness h with D^p = h D.

    With h_claimed: verifies D^p(v) - h*D(v) in (F)+m^{N+1} for every variable
    (WitnessRejected on failure).  Otherwise solves for h by a bounded-degree
    linear solve across all variables simultaneously (NotPClosed if none).
    """
    N = N_out if N_out is not None else B.N
    F = None if B.smooth_ambient else B.F

    def nf(t):
        return t.truncate(N) if F is None else normal_form(t, F, N)

    ppow = p_power(D, N)
    if h_claimed is not None:
        for v in B.vars:
            residual = nf(ppow[v] - h_claimed * D.images[v])
            if not residual.is_zero():
                raise WitnessRejected(v, residual)
        return h_claimed
    pairs = [(D.images[v], ppow[v]) for v in B.vars]
    h = solve_series_system(B, pairs, d_bound, N)
    if h is None:
        raise NotPClosed(f"no witness of degree <= {d_bound}")
    return h


def hochschild_identity(B: LocalHypersurface, D: Derivation, a: TruncatedSeries, N_out=None):
    """Check (aD)^p = a^p D^p + (aD)^{p-1}(a) D on every variable."""
    N = N_out if N_out is not None else B.N
    p = B.field.p
    F = None if B.smooth_ambient else B.F

    def nf(t):
        return t.truncate(N) if F is None else normal_form(t, F, N)

    aD = D.scale(a)
    lhs = p_power(aD, N)
    a_p = a**p
    ppow = p_power(D, N)
    cof = a
    for _ in range(p - 1):
        cof = apply(aD, cof)
    for v in B.vars:
        rhs = a_p * ppow[v] + cof * D.images[v]
        if not nf(lhs[v] - rhs).is_zero():
            return False
    return True


FIXED_POINT_FREE = "FixedPointFree"
M_PRIMARY = "MPrimary"
HAS_DIVISORIAL_PART = "HasDivisorialPart"


@dataclass(frozen=True)
class FixCase:
    tag: str
    witness: object  # unit pivot / exponent e / first failing degree


def fix_case(B: LocalHypersurface, D: Derivation, N_out=None) -> FixCase:
    """Trichotomy of the fixed locus ideal (images of D) + (F).

    FixedPointFree: the ideal contains a unit.  MPrimary: m^e lies in the
    ideal for the smallest such e (a genuine certificate for any truncation
    > e).  HasDivisorialPart: the truncated quotient keeps growing through the
    scan ceiling.  Inconclusive when the quotient stabilizes but no containment
    was found within range.
    """
    N = N_out if N_out is not None else B.N
    gens = [img for img in D.image_list() if not img.is_zero()]
    if not B.smooth_ambient:
        gens = gens + [B.F]
    nvars = len(B.vars)
    span = IdealSpan(gens, N)
    e_max = N - int(max(0, min(g.min_degree() for g in gens)))
    dims = []
    first_fail = None
    scan_cap = min(N, 16)
    for cur in range(1, scan_cap + 1):
        span.grow(cur)
        if span.ech.has_unit():
            return FixCase(FIXED_POINT_FREE, "unit in echelonized ideal basis")
        # try e = cur - 1 (certificate sound since truncation cur > e)
        e = cur - 1
        if 1 <= e <= e_max:
            ok = all(
                span.ech.contains(
                    TruncatedSeries(B.field, B.vars, {mon: 1}, N), upto=cur
                )
                for mon in monomials_upto(nvars, e)
                if sum(mon) == e
            )
            if ok:
                return FixCase(M_PRIMARY, e)
            if first_fail is None:
                first_fail = e
        dims.append(span.quotient_dim(cur))
        if len(dims) >= 3 and dims[-1] == dims[-2] == dims[-3]:
            # an m-primary ideal would have certified m^e at stage e+1 <= here
            raise Inconclusive(
                f"quotient stabilized at {dims[-1]} but no m^e containment; raise N"
            )
    if len(dims) >= 2 and dims[-1] > dims[-2]:
        return FixCase(HAS_DIVISORIAL_PART, first_fail if first_fail is not None else 1)
    raise Inconclusive("scan ceiling reached without certificate; raise N")
