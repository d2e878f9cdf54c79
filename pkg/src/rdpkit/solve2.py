"""Zero-dimensional bivariate polynomial system solving over F_{p^k}.

Points are located by eliminating one variable with a resultant, scanning the
(small) field for roots, and raising the coefficient field until every root of
the squarefree eliminant is rational.  Positive-dimensional systems are
reported as such (the generators share a curve component).

Polynomials here are plain dicts {(i, j): coeff} over a Field; this module is
resolver plumbing and independent of the TruncatedSeries machinery.
"""

from __future__ import annotations

from .errors import FieldCeilingExceeded, NotIsolated
from .field import GF, embedding

EXT_CEILING = 4  # maximum extension degree k of F_{p^k} for point hunting


# --- univariate helpers: polys as coefficient lists (low degree first) ---


def _u_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _u_add(fld, a, b):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = fld.add(out[i], c)
    return _u_trim(out)


def _u_scale(fld, a, c):
    return _u_trim([fld.mul(x, c) for x in a])


def _u_mul(fld, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = fld.add(out[i + j], fld.mul(x, y))
    return _u_trim(out)


def _u_rem(fld, a, b):
    a = list(a)
    inv = fld.inv(b[-1])
    while len(a) >= len(b):
        c = fld.mul(a[-1], inv)
        if c:
            for i in range(len(b)):
                a[len(a) - len(b) + i] = fld.sub(a[len(a) - len(b) + i], fld.mul(c, b[i]))
        a.pop()
        _u_trim(a)
    return a


def _u_gcd(fld, a, b):
    a, b = list(a), list(b)
    while b:
        a, b = b, _u_rem(fld, a, b)
    if a:
        a = _u_scale(fld, a, fld.inv(a[-1]))
    return a


def _u_diff(fld, a):
    return _u_trim([fld.mul(fld.coerce(i), a[i]) for i in range(1, len(a))])


def _u_squarefree(fld, a):
    d = _u_diff(fld, a)
    if not d:
        # a is a p-th power: a(t) = b(t^p); recurse on b
        p = fld.p
        b = [0] * ((len(a) - 1) // p + 1)
        for i, c in enumerate(a):
            if c:
                # coefficient roots exist since Frobenius is bijective
                b[i // p] = fld.pow(c, fld.q // p)
        return _u_squarefree(fld, _u_trim(b))
    g = _u_gcd(fld, a, d)
    if len(g) <= 1:
        return _u_scale(fld, a, fld.inv(a[-1]))
    q = _u_quo(fld, a, g)
    return _u_squarefree(fld, q)


def _u_quo(fld, a, b):
    a = list(a)
    inv = fld.inv(b[-1])
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        c = fld.mul(a[-1], inv)
        q[len(a) - len(b)] = c
        if c:
            for i in range(len(b)):
                a[len(a) - len(b) + i] = fld.sub(a[len(a) - len(b) + i], fld.mul(c, b[i]))
        a.pop()
        _u_trim(a)
    return _u_trim(q)


def _u_roots(fld, a):
    """All roots in the field (brute scan; fields here are tiny)."""
    if not a:
        raise ValueError("zero polynomial")
    roots = []
    for t in fld.elements():
        acc = 0
        for c in reversed(a):
            acc = fld.add(fld.mul(acc, t), c)
        if acc == 0:
            roots.append(t)
    return roots


def _u_splits(fld, a):
    """Does the squarefree part of `a` split over fld?"""
    sf = _u_squarefree(fld, a)
    return len(_u_roots(fld, sf)) == len(sf) - 1


# --- bivariate helpers: polys as {(i, j): coeff} with variables (u, v) ---


def biv_degree(f, axis):
    return max((e[axis] for e in f), default=0)


def biv_eval_u(fld, f, u0):
    """Substitute u = u0; returns univariate coefficient list in v."""
    out = [0] * (biv_degree(f, 1) + 1)
    pows = {0: 1}

    def up(n):
        if n not in pows:
            pows[n] = fld.mul(up(n - 1), u0)
        return pows[n]

    for (i, j), c in f.items():
        out[j] = fld.add(out[j], fld.mul(c, up(i)))
    return _u_trim(out)


def _as_v_poly(fld, f):
    """View {(i,j): c} as a polynomial in v with coefficients in F[u]."""
    dv = biv_degree(f, 1)
    coeffs = [dict() for _ in range(dv + 1)]
    for (i, j), c in f.items():
        coeffs[j][i] = c
    return coeffs  # list of u-polys (dict i -> coeff)


def _upoly_mul(fld, a, b):
    out = {}
    for i, x in a.items():
        if x:
            for j, y in b.items():
                k = i + j
                s = fld.add(out.get(k, 0), fld.mul(x, y))
                if s:
                    out[k] = s
                elif k in out:
                    del out[k]
    return out


def _upoly_sub(fld, a, b):
    out = dict(a)
    for i, c in b.items():
        s = fld.sub(out.get(i, 0), c)
        if s:
            out[i] = s
        elif i in out:
            del out[i]
    return out


def resultant_v(fld, f, g):
    """Res_v(f, g) as a univariate polynomial in u (dict i -> coeff).

    Computed as the determinant of the Sylvester matrix over F[u] by
    fraction-free (Bareiss) elimination.
    """
    fv = _as_v_poly(fld, f)
    gv = _as_v_poly(fld, g)
    m, n = len(fv) - 1, len(gv) - 1
    if m < 0 or n < 0:
        return {}
    if m == 0 and n == 0:
        return {0: 1}
    size = m + n
    M = [[{} for _ in range(size)] for _ in range(size)]
    for r in range(n):
        for k, c in enumerate(reversed(fv)):
            M[r][r + k] = dict(c)
    for r in range(m):
        for k, c in enumerate(reversed(gv)):
            M[n + r][r + k] = dict(c)
    # Bareiss over the integral domain F[u]
    prev = {0: 1}
    sign = 1
    for k in range(size - 1):
        if not M[k][k]:
            swap = next((r for r in range(k + 1, size) if M[r][k]), None)
            if swap is None:
                # column k is zero below the diagonal: determinant vanishes
                return {}
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                num = _upoly_sub(
                    fld,
                    _upoly_mul(fld, M[i][j], M[k][k]),
                    _upoly_mul(fld, M[i][k], M[k][j]),
                )
                M[i][j] = _upoly_exact_div(fld, num, prev)
            M[i][k] = {}
        prev = M[k][k]
    det = M[size - 1][size - 1]
    if sign < 0:
        det = {i: fld.neg(c) for i, c in det.items()}
    return det


def _upoly_exact_div(fld, num, den):
    """Exact division in F[u] (Bareiss guarantees divisibility)."""
    if not num:
        return {}
    nd = max(num)
    dd = max(den)
    den_lc = den[dd]
    inv = fld.inv(den_lc)
    out = {}
    num = dict(num)
    while num:
        cd = max(num)
        if cd < dd:
            raise ArithmeticError("non-exact division in Bareiss step")
        c = fld.mul(num[cd], inv)
        out[cd - dd] = c
        for i, dc in den.items():
            k = cd - dd + i
            s = fld.sub(num.get(k, 0), fld.mul(c, dc))
            if s:
                num[k] = s
            elif k in num:
                del num[k]
    return out


def _upoly_to_list(f):
    if not f:
        return []
    out = [0] * (max(f) + 1)
    for i, c in f.items():
        out[i] = c
    return out


def biv_extend(f, emb):
    return {e: emb(c) for e, c in f.items()}


def _gcd_many(fld, polys):
    g = []
    for a in polys:
        g = _u_gcd(fld, g, a) if g else list(a)
        if len(g) == 1:
            return g
    return g


def solve_bivariate(fld, polys, ceiling=EXT_CEILING):
    """All common zeros of `polys` over the algebraic closure.

    Returns (field, [(u0, v0), ...], emb) where `field` is the (possibly
    extended) coefficient field containing every solution and emb maps the
    input field into it.  Raises NotIsolated for positive-dimensional systems
    and FieldCeilingExceeded if roots live beyond F_{p^ceiling}.
    """
    polys = [dict(f) for f in polys if f]
    if not polys:
        raise NotIsolated("empty system")
    base = fld

    # detect a common curve component: gcd over F(u) of the system viewed in v
    # (constants in v are handled through the eliminant below)
    cur = fld
    emb_total = lambda x: x
    level = 1
    while True:
        ps = [biv_extend(f, emb_total) for f in polys] if cur is not fld else polys
        pts, complete = _solve_over(cur, ps)
        if complete:
            return cur, pts, emb_total
        level *= 2
        if cur.k * 2 > ceiling * base.k:
            raise FieldCeilingExceeded(
                f"roots require extension beyond F_{base.p}^{ceiling * base.k}"
            )
        nxt = GF(cur.p, cur.k * 2)
        step = embedding(cur, nxt)
        prev_total = emb_total
        emb_total = (lambda st, pt: (lambda x: st(pt(x))))(step, prev_total)
        cur = nxt


def _solve_over(fld, polys):
    """Rational points over fld; second value False if roots escape fld."""
    # u-eliminant: use the first pair with a nonzero resultant
    elim = None
    vdegs = [biv_degree(f, 1) for f in polys]
    pure_u = [f for f, d in zip(polys, vdegs) if d == 0]
    proper = [f for f, d in zip(polys, vdegs) if d > 0]
    if not proper:
        # system in u alone: v is free unless contradictory -> positive dim
        g = _gcd_many(fld, [_upoly_to_list({i: c for (i, _), c in f.items()}) for f in polys])
        if len(g) <= 1:
            raise NotIsolated("system has no v-dependence and no common zero set")
        raise NotIsolated("solution set contains vertical lines")
    if len(proper) == 1 and not pure_u:
        raise NotIsolated("a single bivariate equation defines a curve")
    for i in range(len(proper)):
        for j in range(i + 1, len(proper)):
            r = resultant_v(fld, proper[i], proper[j])
            if r:
                elim = _upoly_to_list(r)
                break
        if elim:
            break
    if elim is None and pure_u:
        elim = _gcd_many(fld, [_upoly_to_list({i: c for (i, _), c in f.items()}) for f in pure_u])
        if len(elim) <= 1 and elim:
            return [], True  # unit ideal: no common zeros
    if elim is None:
        # every pair of proper generators shares a factor; check for a common
        # curve of the whole system via iterated gcd in v over F(u) is costly,
        # so fall back: all pairwise resultants vanish and there is no pure-u
        # generator -> common component
        raise NotIsolated("all pairwise resultants vanish")
    if not elim:
        raise NotIsolated("resultant identically zero")
    if not _u_splits(fld, elim):
        return [], False
    pts = []
    for u0 in sorted(set(_u_roots(fld, elim))):
        vs = None
        for f in polys:
            uni = biv_eval_u(fld, f, u0)
            vs = uni if vs is None else _u_gcd(fld, vs, uni)
            if vs == []:
                vs = uni  # gcd with zero polynomial
        if vs is None:
            continue
        if not vs:
            raise NotIsolated(f"vertical line u = {u0} in solution set")
        if len(vs) == 1:
            continue  # no common v-root above u0 (spurious eliminant root)
        if not _u_splits(fld, vs):
            return [], False
        for v0 in sorted(set(_u_roots(fld, vs))):
            pts.append((u0, v0))
    return pts, True


def local_multiplicity(fld, polys, point, cap=12):
    """Intersection length dim F[[u,v]]/(polys) at the given point."""
    (u0, v0) = point
    shifted = []
    for f in polys:
        g = {}
        # substitute u -> u + u0, v -> v + v0 by binomial expansion
        for (i, j), c in f.items():
            for a in range(i + 1):
                for b in range(j + 1):
                    coef = fld.mul(
                        c,
                        fld.mul(
                            fld.mul(fld.coerce(_binom(i, a)), fld.pow(u0, i - a) if i - a else 1),
                            fld.mul(fld.coerce(_binom(j, b)), fld.pow(v0, j - b) if j - b else 1),
                        ),
                    )
                    if coef:
                        e = (a, b)
                        s = fld.add(g.get(e, 0), coef)
                        if s:
                            g[e] = s
                        elif e in g:
                            del g[e]
        shifted.append(g)
    from .local import IdealSpan
    from .series import TruncatedSeries

    gens = [TruncatedSeries(fld, ("u", "v"), g) for g in shifted if g]
    span = IdealSpan(gens, cap)
    prev = None
    for N in range(1, cap + 1):
        d = span.quotient_dim(N)
        if prev is not None and d == prev:
            return d
        prev = d
    return prev


def _binom(n, k):
    import math

    return math.comb(n, k)
