"""Resolution of isolated double points by iterated blow-ups.

Each singular point is a Site: a chart around the origin carrying the strict
transform equation and the exceptional curves through the point (as reduced
two-generator ideals).  Blowing up yields three standard charts; exceptional
directions are partitioned between them (x-chart takes a != 0, y-chart a = 0,
b != 0, z-chart the single direction (0:0:1)) so every point is seen once.
New exceptional components are the components of the projectivized tangent
cone, a conic: a double line, two (possibly conjugate) lines, or an
irreducible conic.  Intersections at smooth surface points become dual-graph
edges; intersections at singular points are carried into the next Site.

Everything is exact polynomial arithmetic; geometric points are hunted over
F_{p^k} with k raised on demand up to a configurable ceiling.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .errors import DepthExceeded, NotIsolated, RdpkitError
from .field import GF, embedding
from .local import local_dimension
from .series import INF, TruncatedSeries
from .solve2 import EXT_CEILING, _solve_over, local_multiplicity

VARS = ("x", "y", "z")
MAX_DEPTH = 16


class TriplePoint(RdpkitError):
    """An infinitely near point of multiplicity >= 3 (never happens on RDPs)."""


class TangentialCurves(RdpkitError):
    """Exceptional curves meeting non-transversally (not simple normal crossing)."""


@dataclass
class DualGraph:
    """Intersection configuration of the exceptional curves."""

    n_vertices: int
    edges: list  # list of (i, j) index pairs, i < j, repeats = multi-edges

    def vertex_names(self):
        return [f"E{i + 1}" for i in range(self.n_vertices)]

    def degree_sequence(self):
        deg = [0] * self.n_vertices
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def ade_type(self):
        """(family, n) if the graph is an ADE Dynkin diagram, else None."""
        n = self.n_vertices
        if n == 0:
            return None
        simple = set()
        for i, j in self.edges:
            if i == j:
                return None
            key = (min(i, j), max(i, j))
            if key in simple:
                return None  # multi-edge
            simple.add(key)
        if len(simple) != n - 1:
            return None  # not a tree (cycle or disconnected)
        adj = {i: set() for i in range(n)}
        for i, j in simple:
            adj[i].add(j)
            adj[j].add(i)
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != n:
            return None
        degs = [len(adj[i]) for i in range(n)]
        if max(degs, default=0) > 3:
            return None
        tri = [i for i in range(n) if degs[i] == 3]
        if not tri:
            return ("A", n)
        if len(tri) > 1:
            return None
        center = tri[0]
        arms = []
        for start in adj[center]:
            length, prev, cur = 1, center, start
            while True:
                nxt = [v for v in adj[cur] if v != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                length += 1
            arms.append(length)
        arms.sort()
        if arms[0] == 1 and arms[1] == 1:
            return ("D", arms[2] + 3)
        if arms[:2] == [1, 2] and arms[2] in (2, 3, 4):
            return ("E", arms[2] + 4)
        return None

    def to_dot(self):
        lines = ["graph dual {"]
        for name in self.vertex_names():
            lines.append(f'  "{name}";')
        for i, j in sorted(self.edges):
            lines.append(f'  "E{i + 1}" -- "E{j + 1}";')
        lines.append("}")
        return "\n".join(lines)


@dataclass
class _Site:
    fld: object
    F: TruncatedSeries  # singular at the origin
    incident: list  # list of (curve_id, [gen, gen])
    depth: int


def _quadratic_part(F):
    return {e: c for e, c in F.terms.items() if sum(e) == 2}


def _eval_form(fld, terms, vec):
    acc = 0
    for e, c in terms.items():
        t = c
        for x, n in zip(vec, e):
            for _ in range(n):
                t = fld.mul(t, x)
        acc = fld.add(acc, t)
    return acc


def _line_terms(coeffs):
    a, b, c = coeffs
    out = {}
    if a:
        out[(1, 0, 0)] = a
    if b:
        out[(0, 1, 0)] = b
    if c:
        out[(0, 0, 1)] = c
    return out


def _double_line(fld, q2):
    """If V(q2) is a double line, return the line's coefficients (up to scale)."""
    p = fld.p
    if p == 2:
        if any(i == 1 for e in q2 for i in e):  # a cross term
            return None
        # diagonal in char 2: always a perfect square via Frobenius roots
        coeffs = []
        for i in range(3):
            e = tuple(2 if j == i else 0 for j in range(3))
            coeffs.append(fld.sqrt(q2.get(e, 0)))
        return tuple(coeffs)
    # char != 2: double line iff the symmetric Gram matrix has rank 1
    M = [[0] * 3 for _ in range(3)]
    inv2 = fld.inv(fld.coerce(2))
    for e, c in q2.items():
        idx = [i for i in range(3) for _ in range(e[i])]
        i, j = idx
        if i == j:
            M[i][i] = c
        else:
            M[i][j] = M[j][i] = fld.mul(c, inv2)
    rows = [tuple(r) for r in M if any(r)]
    if not rows:
        return None
    r0 = rows[0]
    piv = next(i for i, c in enumerate(r0) if c)
    for r in rows[1:]:
        factor = fld.div(r[piv], r0[piv])
        if any(fld.sub(r[i], fld.mul(factor, r0[i])) for i in range(3)):
            return None  # rank >= 2
    return r0  # the component is V(r0) regardless of the scalar


def factor_conic(fld, q2, ceiling=EXT_CEILING):
    """Components of the conic V(q2) in P^2.

    Returns (fld', components) where components is a list of
    ("line", (a,b,c)) entries or a single ("conic", terms) entry, over the
    possibly quadratically-extended field fld'.
    """
    root = _perfect_square_root(fld, q2)
    if root is not None:
        return fld, [("line", root)]
    # find a point on the conic (Chevalley: always exists), move it to (0:0:1)
    pt = _conic_point(fld, q2)
    if pt is None:  # rank-1 non-square scale in odd char: extend once
        big = GF(fld.p, fld.k * 2)
        emb = embedding(fld, big)
        q2b = {e: emb(c) for e, c in q2.items()}
        root = _perfect_square_root(big, q2b)
        if root is None:
            raise RdpkitError("rank-1 form without square root after extension")
        return big, [("line", root)]
    basis = _complete_basis(fld, pt)
    # q2 in new coordinates (columns of basis): coefficient extraction
    new = _change_form(fld, q2, basis)
    # new has no z''^2 term; write as z*l(x,y) + q(x,y)
    lcoef = (new.get((1, 0, 1), 0), new.get((0, 1, 1), 0))
    qxy = {
        (i, j): c for (i, j, k), c in new.items() if k == 0
    }
    if lcoef == (0, 0):
        comps, fld2, emb = _factor_binary(fld, qxy, ceiling)
        lines = [_push_line(fld2, (la, lb, 0), basis, emb) for (la, lb) in comps]
        return fld2, lines
    # reducible iff l divides q
    quot = _binary_divide(fld, qxy, lcoef)
    if quot is None:
        return fld, [("conic", q2)]
    # q2' = l(x,y) * (z + quot(x,y)): two lines (or the same line twice)
    l1 = (lcoef[0], lcoef[1], 0)
    l2 = (quot[0], quot[1], 1)
    lines = [_push_line(fld, l1, basis, None), _push_line(fld, l2, basis, None)]
    return fld, lines


def _conic_point(fld, q2):
    """A projective point on V(q2) over fld, or None."""
    for a in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        if _eval_form(fld, q2, a) == 0:
            return a
    for s in fld.elements():
        for t in fld.elements():
            if _eval_form(fld, q2, (1, s, t)) == 0:
                return (1, s, t)
    for t in fld.elements():
        if _eval_form(fld, q2, (0, 1, t)) == 0:
            return (0, 1, t)
    return None


def _complete_basis(fld, pt):
    """An invertible 3x3 matrix (columns) whose last column is pt."""
    cols = [None, None, pt]
    free = []
    for i in range(3):
        e = tuple(1 if j == i else 0 for j in range(3))
        free.append(e)
    piv = next(i for i in range(3) if pt[i])
    others = [free[i] for i in range(3) if i != piv]
    cols[0], cols[1] = others
    return cols


def _change_form(fld, q2, cols):
    """The form q2 after x -> cols[0], y -> cols[1], z -> cols[2]."""
    out = {}

    def add_term(e, c):
        if c:
            s = fld.add(out.get(e, 0), c)
            if s:
                out[e] = s
            elif e in out:
                del out[e]

    import itertools

    for e, c in q2.items():
        # expand prod_i (sum_j cols[j][i] * var_j)^{e_i}
        factors = []
        for i in range(3):
            for _ in range(e[i]):
                factors.append(i)
        for assignment in itertools.product(range(3), repeat=len(factors)):
            coef = c
            expo = [0, 0, 0]
            for slot, j in zip(factors, assignment):
                coef = fld.mul(coef, cols[j][slot])
                expo[j] += 1
            add_term(tuple(expo), coef)
    return out


def _push_line(fld, l_new, cols, emb):
    """Translate a line in new coordinates back to original coordinates."""
    if emb is not None:
        cols = [tuple(emb(c) for c in col) for col in cols]
    a, b, c = l_new
    out = [0, 0, 0]
    for j, coef in enumerate((a, b, c)):
        if coef:
            for i in range(3):
                out[i] = fld.add(out[i], fld.mul(coef, cols[j][i]))
    return ("line", tuple(out))


def _factor_binary(fld, qxy, ceiling):
    """Factor a binary quadratic a x^2 + b xy + c y^2 into two linear forms.

    Returns ([(a1,b1), (a2,b2)], fld', emb) over at most a quadratic extension.
    """
    a = qxy.get((2, 0), 0)
    b = qxy.get((1, 1), 0)
    c = qxy.get((0, 2), 0)
    if a == 0:
        # y * (b x + c y)
        return [(0, 1), (b, c)], fld, None
    # roots of a t^2 + b t + c: x-coe... factor as a(x - t1 y)(x - t2 y)
    roots, fld2, emb = _quadratic_roots(fld, a, b, c, ceiling)
    a2 = emb(a) if emb else a
    t1, t2 = roots
    return [(a2, fld2.neg(fld2.mul(a2 and 1 or 1, t1) if False else t1)), (1, fld2.neg(t2))], fld2, emb


def _quadratic_roots(fld, a, b, c, ceiling):
    """Both roots of a t^2 + b t + c over fld or its quadratic extension."""

    def try_field(F, a, b, c):
        if F.p == 2:
            if b == 0:
                r = F.sqrt(F.div(c, a))
                return (r, r)
            # t = (b/a) s: s^2 + s + ac/b^2 = 0
            cc = F.div(F.mul(a, c), F.mul(b, b))
            s = F.artin_schreier_root(cc)
            if s is None:
                return None
            t1 = F.mul(F.div(b, a), s)
            t2 = F.add(t1, F.div(b, a))
            return (t1, t2)
        disc = F.sub(F.mul(b, b), F.mul(F.coerce(4), F.mul(a, c)))
        sq = F.sqrt(disc)
        if sq is None:
            return None
        inv2a = F.inv(F.mul(F.coerce(2), a))
        t1 = F.mul(F.sub(sq, b), inv2a)
        t2 = F.mul(F.sub(F.neg(sq), b), inv2a)
        return (t1, t2)

    res = try_field(fld, a, b, c)
    if res is not None:
        return res, fld, None
    big = GF(fld.p, fld.k * 2)
    emb = embedding(fld, big)
    res = try_field(big, emb(a), emb(b), emb(c))
    if res is None:
        raise RdpkitError("quadratic failed to split over quadratic extension")
    return res, big, emb


def _dehomog(terms, axis):
    """Restrict a homogeneous form on P^2 to the affine chart axis != 0."""
    out = {}
    for e, c in terms.items():
        ne = list(e)
        ne[axis] = 0
        ne = tuple(ne)
        out[ne] = c if ne not in out else None
    # redo with addition (needs the field); caller uses _dehomog_f instead
    raise NotImplementedError


def _dehomog_f(fld, terms, axis):
    out = {}
    for e, c in terms.items():
        ne = list(e)
        ne[axis] = 0
        ne = tuple(ne)
        s = fld.add(out.get(ne, 0), c)
        if s:
            out[ne] = s
        elif ne in out:
            del out[ne]
    return out


def _divide_out(series, axis):
    """Divide by the maximal power of variable `axis`; returns (quotient, k)."""
    if series.is_zero():
        return series, 0
    k = min(e[axis] for e in series.terms)
    if k == 0:
        return series, 0
    terms = {}
    for e, c in series.terms.items():
        ne = list(e)
        ne[axis] -= k
        terms[tuple(ne)] = c
    return TruncatedSeries(series.field, series.vars, terms, series.order), k


def _blowup_substitution(fld, axis):
    imgs = {}
    axis_var = VARS[axis]
    for i, v in enumerate(VARS):
        if i == axis:
            terms = { tuple(1 if j == i else 0 for j in range(3)): 1 }
        else:
            e = [0, 0, 0]
            e[axis] += 1
            e[i] += 1
            terms = {tuple(e): 1}
        imgs[v] = TruncatedSeries(fld, VARS, terms)
    return imgs


def _restrict_biv(series, axis):
    """Kill the exceptional variable and return a bivariate dict over the rest."""
    free = [i for i in range(3) if i != axis]
    out = {}
    fld = series.field
    for e, c in series.terms.items():
        if e[axis]:
            continue
        key = (e[free[0]], e[free[1]])
        s = fld.add(out.get(key, 0), c)
        if s:
            out[key] = s
        elif key in out:
            del out[key]
    return out


def _eval_point(series, point):
    fld = series.field
    acc = 0
    for e, c in series.terms.items():
        t = c
        for x, n in zip(point, e):
            if n:
                t = fld.mul(t, fld.pow(x, n)) if x else 0
            if t == 0:
                break
        acc = fld.add(acc, t)
    return acc


def _translate(series, point):
    """Shift coordinates so that `point` becomes the origin."""
    fld = series.field
    imgs = {}
    shifted = False
    for v, c in zip(VARS, point):
        terms = {tuple(1 if w == v else 0 for w in VARS): 1}
        if c:
            terms[(0, 0, 0)] = c
            shifted = True
        imgs[v] = TruncatedSeries(fld, VARS, terms)
    if not shifted:
        return series
    return series.substitute(imgs, allow_units=True)


class Resolver:
    def __init__(self, B, max_depth=MAX_DEPTH, ext_ceiling=EXT_CEILING):
        self.B = B
        self.max_depth = max_depth
        self.ext_ceiling = ext_ceiling
        self.curve_count = 0
        self.edges = []

    def run(self) -> DualGraph:
        F = self.B.F
        if F.order is not INF:
            raise NotIsolated("resolution requires an exact polynomial equation")
        sites = [_Site(self.B.field, F, [], 0)]
        while sites:
            site = sites.pop()
            sites.extend(self._blow_up(site))
        return DualGraph(self.curve_count, self.edges)

    # -- one blow-up ---------------------------------------------------------

    def _blow_up(self, site):
        fld, F = site.fld, site.F
        mult = F.min_degree()
        if mult >= 3:
            raise TriplePoint(f"multiplicity {mult} point")
        if site.depth > self.max_depth:
            raise DepthExceeded(f"resolution depth exceeded {self.max_depth}")
        q2 = _quadratic_part(F)
        fld2, comps = factor_conic(fld, q2, self.ext_ceiling)
        if fld2 is not fld:
            emb = embedding(fld, fld2)
            F = F.extend_field(fld2, emb)
            site = _Site(
                fld2,
                F,
                [(cid, [g.extend_field(fld2, emb) for g in gens]) for cid, gens in site.incident],
                site.depth,
            )
            fld = fld2
        # assign ids to the new exceptional components
        comp_ids = []
        for comp in comps:
            comp_ids.append(self.curve_count)
            self.curve_count += 1
        new_sites = []
        for axis in range(3):
            new_sites.extend(self._child_chart(site, fld, F, axis, comps, comp_ids))
        return new_sites

    def _child_chart(self, site, fld, F, axis, comps, comp_ids):
        imgs = _blowup_substitution(fld, axis)
        total = F.substitute(imgs)
        FT, k = _divide_out(total, axis)
        assert k == 2, "double point total transform must be divisible exactly twice"
        # curves present in this chart
        curves = []
        for comp_id, comp in zip(comp_ids, comps):
            terms = _line_terms(comp[1]) if comp[0] == "line" else comp[1]
            visible = _dehomog_f(fld, terms, axis)
            if list(visible.keys()) == [(0, 0, 0)]:
                continue  # component misses this chart entirely
            e_gen = TruncatedSeries.variable(fld, VARS, VARS[axis])
            c_gen = TruncatedSeries(fld, VARS, visible)
            curves.append((comp_id, [e_gen, c_gen]))
        for cid, gens in site.incident:
            new_gens = []
            absent = False
            for g in gens:
                gt = g.substitute(imgs)
                gt, _ = _divide_out(gt, axis)
                if not gt.is_zero() and gt.min_degree() == 0 and len(gt.terms) == 1:
                    absent = True
                    break
                new_gens.append(gt)
            if not absent:
                curves.append((cid, new_gens))

        points = self._interest_points(fld, FT, axis, curves)
        out_sites = []
        free = [i for i in range(3) if i != axis]
        for (pt2, singular) in points:
            # partition filter between sibling charts
            if axis == 1 and pt2[0] != 0:
                continue
            if axis == 2 and pt2 != (0, 0):
                continue
            pt3 = [0, 0, 0]
            pt3[free[0]], pt3[free[1]] = pt2
            pt3 = tuple(pt3)
            through = []
            for cid, gens in curves:
                if all(_eval_point(g, pt3) == 0 for g in gens):
                    through.append((cid, gens))
            if singular:
                F_local = _translate(FT, pt3)
                inc = [(cid, [_translate(g, pt3) for g in gens]) for cid, gens in through]
                out_sites.append(_Site(fld, F_local, inc, site.depth + 1))
            else:
                self._record_edges(fld, FT, pt3, through)
        return out_sites

    def _interest_points(self, fld, FT, axis, curves):
        """Points on the exceptional line of this chart worth looking at.

        Returns [(point2, singular?)] over a possibly extended field; the
        field extension is applied in place to FT/curves via closure rebinding
        is avoided -- instead systems are (re)solved at one consistent level.
        """
        sing_sys = [_restrict_biv(FT, axis)]
        for v in VARS:
            sing_sys.append(_restrict_biv(FT.diff(v), axis))
        sing_sys = [s for s in sing_sys if s]
        pair_systems = []
        for i in range(len(curves)):
            for j in range(i + 1, len(curves)):
                sys = []
                for g in curves[i][1] + curves[j][1]:
                    r = _restrict_biv(g, axis)
                    if r:
                        sys.append(r)
                pair_systems.append(sys)
        # solve everything over one consistent field, raising k as needed
        level_fld = fld
        while True:
            emb = embedding(fld, level_fld) if level_fld is not fld else (lambda x: x)
            ok = True
            try:
                sing_pts, complete = _solve_over(
                    level_fld, [{e: emb(c) for e, c in s.items()} for s in sing_sys]
                )
            except NotIsolated:
                raise
            if not complete:
                ok = False
            meet_pts = set()
            if ok:
                for sys in pair_systems:
                    if not sys:
                        continue
                    try:
                        pts, complete = _solve_over(
                            level_fld, [{e: emb(c) for e, c in s.items()} for s in sys]
                        )
                    except NotIsolated:
                        raise TangentialCurves("curve pair shares a component")
                    if not complete:
                        ok = False
                        break
                    meet_pts.update(pts)
            if ok:
                if level_fld is not fld:
                    self._lift_chart(fld, level_fld)
                break
            if level_fld.k * 2 > self.ext_ceiling * self.B.field.k:
                from .errors import FieldCeilingExceeded

                raise FieldCeilingExceeded("points beyond the extension ceiling")
            level_fld = GF(level_fld.p, level_fld.k * 2)
        self._level = level_fld
        sing_set = set(sing_pts)
        out = [(pt, True) for pt in sing_pts]
        out.extend((pt, False) for pt in sorted(meet_pts - sing_set))
        return out

    def _lift_chart(self, old, new):
        # marker consumed by _child_chart via self._level; charts themselves
        # are lifted lazily in _child_chart when points need the bigger field
        pass

    def _record_edges(self, fld, FT, pt3, through):
        if len(through) < 2:
            return
        lvl = getattr(self, "_level", fld)
        if lvl is not fld:
            emb = embedding(fld, lvl)
            FT = FT.extend_field(lvl, emb)
            through = [(cid, [g.extend_field(lvl, emb) for g in gens]) for cid, gens in through]
            fld = lvl
        for a in range(len(through)):
            for b in range(a + 1, len(through)):
                ia, gens_a = through[a]
                ib, gens_b = through[b]
                mult = self._pair_multiplicity(fld, FT, pt3, gens_a, gens_b)
                lo, hi = min(ia, ib), max(ia, ib)
                for _ in range(mult):
                    self.edges.append((lo, hi))

    def _pair_multiplicity(self, fld, FT, pt3, gens_a, gens_b):
        gens = [_translate(g, pt3) for g in gens_a + gens_b] + [_translate(FT, pt3)]
        try:
            return local_dimension(gens, ceiling=10)
        except Exception:
            return 2  # non-finite contact: flag as a multi-edge (non-ADE)


def resolve_dual_graph(B, max_depth=MAX_DEPTH, ext_ceiling=EXT_CEILING) -> DualGraph:
    """Blow up until smooth and return the exceptional dual graph."""
    mult = B.F.min_degree()
    if mult != 2:
        raise RdpkitError(f"resolver requires a double point, multiplicity is {mult}")
    return Resolver(B, max_depth, ext_ceiling).run()
