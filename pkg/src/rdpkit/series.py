"""Sparse truncated power series over F_{p^k}.

A TruncatedSeries stores a map {exponent tuple: nonzero coefficient} together
with a certification order N: the series is known exactly modulo m^{N+1},
where m is the maximal ideal of k[[vars]].  Polynomials that are known exactly
carry order = INF.  Every operation computes the certification order of its
output by the slack rules:

  add/mul          min of the operand orders (multiplication costs nothing)
  d/dv             order - 1
  substitution     min(f.order, orders of the images), images must lie in m
  rational mode    substitution images may have unit constant terms, but only
                   when f is an exact polynomial

Division by a variable is not provided; callers extract cofactors explicitly.
"""

from __future__ import annotations

import math
import re

from .errors import NotAUnit, ParseError, TruncationUnderflow
from .field import Field

INF = math.inf


class TruncatedSeries:
    __slots__ = ("field", "vars", "terms", "order")

    def __init__(self, field: Field, vars, terms=None, order=INF):
        self.field = field
        self.vars = tuple(vars)
        self.order = order
        if terms:
            nv = len(self.vars)
            clean = {}
            for e, c in terms.items():
                if c and sum(e) <= order:
                    if len(e) != nv:
                        raise ValueError(f"exponent {e} does not match vars {self.vars}")
                    clean[e] = c
            self.terms = clean
        else:
            self.terms = {}

    # --- constructors ---

    @classmethod
    def zero(cls, field, vars, order=INF):
        return cls(field, vars, {}, order)

    @classmethod
    def one(cls, field, vars, order=INF):
        z = (0,) * len(vars)
        return cls(field, vars, {z: 1}, order)

    @classmethod
    def constant(cls, field, vars, c, order=INF):
        """c is an already-encoded field element (use field.coerce for ints)."""
        z = (0,) * len(vars)
        if not 0 <= c < field.q:
            raise ValueError(f"{c} is not an element encoding of {field}")
        return cls(field, vars, {z: c} if c else {}, order)

    @classmethod
    def variable(cls, field, vars, name, order=INF):
        e = [0] * len(vars)
        e[list(vars).index(name)] = 1
        return cls(field, vars, {tuple(e): 1}, order)

    @classmethod
    def from_int_terms(cls, field, vars, int_terms, order=INF):
        """Build from {exponent: integer} with integers reduced into F_p."""
        terms = {}
        for e, n in int_terms.items():
            c = field.coerce(n)
            if c:
                terms[tuple(e)] = c
        return cls(field, vars, terms, order)

    # --- basic queries ---

    def is_zero(self):
        return not self.terms

    def constant_term(self):
        return self.terms.get((0,) * len(self.vars), 0)

    def min_degree(self):
        """Order of vanishing; INF for the zero series."""
        if not self.terms:
            return INF
        return min(sum(e) for e in self.terms)

    def max_degree(self):
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def linear_part(self):
        return {e: c for e, c in self.terms.items() if sum(e) == 1}

    def homogeneous_part(self, d):
        return TruncatedSeries(
            self.field, self.vars, {e: c for e, c in self.terms.items() if sum(e) == d}, self.order
        )

    def coefficient(self, e):
        return self.terms.get(tuple(e), 0)

    def support_vars(self):
        used = set()
        for e in self.terms:
            for i, x in enumerate(e):
                if x:
                    used.add(self.vars[i])
        return used

    # --- arithmetic ---

    def _check(self, other):
        if self.field != other.field or self.vars != other.vars:
            raise ValueError("series over different rings")

    def truncate(self, N):
        if N >= self.order:
            return self
        return TruncatedSeries(
            self.field, self.vars, {e: c for e, c in self.terms.items() if sum(e) <= N}, N
        )

    def with_order(self, N):
        return TruncatedSeries(self.field, self.vars, self.terms, min(N, self.order))

    def __add__(self, other):
        self._check(other)
        F = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = F.add(out.get(e, 0), c)
            if s:
                out[e] = s
            elif e in out:
                del out[e]
        return TruncatedSeries(F, self.vars, out, min(self.order, other.order))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        F = self.field
        return TruncatedSeries(
            F, self.vars, {e: F.neg(c) for e, c in self.terms.items()}, self.order
        )

    def scale(self, c):
        F = self.field
        if not c:
            return TruncatedSeries.zero(F, self.vars, self.order)
        return TruncatedSeries(
            F, self.vars, {e: F.mul(c, v) for e, v in self.terms.items()}, self.order
        )

    def __mul__(self, other):
        self._check(other)
        F = self.field
        order = min(self.order, other.order)
        out = {}
        # iterate over the smaller operand outside
        a, b = (self.terms, other.terms) if len(self.terms) <= len(other.terms) else (other.terms, self.terms)
        for ea, ca in a.items():
            da = sum(ea)
            for eb, cb in b.items():
                if da + sum(eb) > order:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                s = F.add(out.get(e, 0), F.mul(ca, cb))
                if s:
                    out[e] = s
                elif e in out:
                    del out[e]
        return TruncatedSeries(F, self.vars, out, order)

    def mul_monomial(self, e_shift, c=1):
        F = self.field
        out = {}
        d = sum(e_shift)
        for e, v in self.terms.items():
            if sum(e) + d <= self.order:
                out[tuple(x + y for x, y in zip(e, e_shift))] = F.mul(v, c) if c != 1 else v
        return TruncatedSeries(F, self.vars, out, self.order)

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers not supported; use invert_unit")
        result = TruncatedSeries.one(self.field, self.vars, self.order if n else INF)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        N = min(self.order, other.order)
        return self.truncate(N).terms == other.truncate(N).terms

    def __hash__(self):
        return hash((self.field, self.vars, tuple(sorted(self.terms.items())), self.order))

    def diff(self, var):
        F = self.field
        i = list(self.vars).index(var)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                cc = F.mul(F.coerce(e[i]), c)
                if cc:
                    ne = list(e)
                    ne[i] -= 1
                    ne = tuple(ne)
                    s = F.add(out.get(ne, 0), cc)
                    if s:
                        out[ne] = s
                    elif ne in out:
                        del out[ne]
        order = self.order if self.order is INF else self.order - 1
        return TruncatedSeries(F, self.vars, out, order)

    # --- substitution ---

    def substitute(self, images: dict, N=None, allow_units=False):
        """Compose with the map var -> images[var] (vars absent map to themselves).

        Every image must have zero constant term unless allow_units is set, in
        which case the series itself must be an exact polynomial (rational-map
        mode with pre-inverted denominators).
        """
        F = self.field
        used = self.support_vars()
        full = {}
        out_vars = None
        for v in self.vars:
            img = images.get(v)
            if img is None:
                continue
            if out_vars is None:
                out_vars = img.vars
            elif img.vars != out_vars:
                raise ValueError("substitution images over different rings")
            full[v] = img
        if out_vars is None:
            out_vars = self.vars
        for v in used:
            if v not in full:
                if v not in out_vars:
                    raise ValueError(f"no image for variable {v}")
                full[v] = TruncatedSeries.variable(F, out_vars, v)

        order = self.order
        for v in used:
            img = full[v]
            order = min(order, img.order)
            if img.constant_term():
                if not allow_units:
                    raise ValueError(f"image of {v} has a unit constant term")
                if self.order is not INF:
                    raise TruncationUnderflow(
                        "rational-map substitution requires an exact polynomial"
                    )
        if N is not None:
            if N > order:
                raise TruncationUnderflow(f"cannot certify order {N}, only {order}")
            order = N

        cap = order if order is not INF else self.max_degree() * max(
            (full[v].max_degree() for v in used), default=1
        )
        pow_cache = {v: {0: TruncatedSeries.one(F, out_vars, order)} for v in used}

        def img_pow(v, n):
            cache = pow_cache[v]
            if n not in cache:
                half = img_pow(v, n // 2)
                sq = half * half
                cache[n] = sq * full[v] if n % 2 else sq
            return cache[n]

        total = TruncatedSeries.zero(F, out_vars, order)
        for e, c in self.terms.items():
            term = TruncatedSeries.constant(F, out_vars, c, order)
            for i, exp in enumerate(e):
                if exp:
                    term = term * img_pow(self.vars[i], exp)
                    if term.is_zero():
                        break
            total = total + term
        return total if order is INF else total.truncate(order)

    def rename_vars(self, new_vars):
        if len(new_vars) != len(self.vars):
            raise ValueError("variable count mismatch")
        return TruncatedSeries(self.field, tuple(new_vars), self.terms, self.order)

    def extend_field(self, big, emb=None):
        from .field import embedding

        if emb is None:
            emb = embedding(self.field, big)
        return TruncatedSeries(
            big, self.vars, {e: emb(c) for e, c in self.terms.items()}, self.order
        )

    # --- display ---

    def __repr__(self):
        return f"<{self.to_str()} (mod m^{self.order if self.order is INF else self.order + 1})>"

    def to_str(self):
        if not self.terms:
            return "0"
        F = self.field
        parts = []
        for e in sorted(self.terms, key=lambda e: (sum(e), e)):
            c = self.terms[e]
            factors = []
            if c != 1 or not any(e):
                factors.append(str(c) if F.k == 1 else f"<{c}>")
            for v, x in zip(self.vars, e):
                if x == 1:
                    factors.append(v)
                elif x > 1:
                    factors.append(f"{v}^{x}")
            parts.append("*".join(factors))
        return " + ".join(parts)


def invert_unit(u: TruncatedSeries, N) -> TruncatedSeries:
    """Inverse of a unit series modulo m^{N+1} (geometric series expansion)."""
    c0 = u.constant_term()
    if not c0:
        raise NotAUnit("constant term is zero")
    if N > u.order:
        raise TruncationUnderflow(f"unit only certified to order {u.order}")
    F = u.field
    c0_inv = F.inv(c0)
    v = (TruncatedSeries.one(F, u.vars) - u.scale(c0_inv)).truncate(N)  # v in m
    result = TruncatedSeries.one(F, u.vars, N)
    power = TruncatedSeries.one(F, u.vars, N)
    d = v.min_degree()
    if d is not INF:
        for _ in range(int(N // d) if d else N):
            power = (power * v).truncate(N)
            if power.is_zero():
                break
            result = result + power
    return result.scale(c0_inv).truncate(N)


def frobenius_rewrite(Q: TruncatedSeries, new_vars):
    """Q^p rewritten exactly in p-th-power variables.

    Returns T over new_vars with T(v_1^p, ..., v_n^p) = Q^p; exponents are
    carried over and coefficients are raised to the p-th power (Frobenius is a
    ring homomorphism in characteristic p).
    """
    F = Q.field
    return TruncatedSeries(
        F, tuple(new_vars), {e: F.frobenius(c) for e, c in Q.terms.items()}, Q.order
    )


def rewrite_in_power(f: TruncatedSeries, var, p, new_name=None):
    """Rewrite f, all of whose `var`-exponents are multiples of p, in var^p.

    Used for quotients by d/dz: F in k[[x,y,z^p]] becomes a series in (x,y,Z).
    """
    i = list(f.vars).index(var)
    out_vars = tuple(new_name if v == var else v for v in f.vars) if new_name else f.vars
    terms = {}
    for e, c in f.terms.items():
        if e[i] % p:
            raise ValueError(f"exponent of {var} not divisible by {p}")
        ne = list(e)
        ne[i] //= p
        terms[tuple(ne)] = c
    return TruncatedSeries(f.field, out_vars, terms, f.order)


_TOKEN = re.compile(r"\s*(\d+|[A-Za-z_][A-Za-z_0-9']*|\*|\^|\+|-|\(|\))")


def _tokenize(s, where="expr"):
    pos, out = 0, []
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            raise ParseError(where, f"unexpected character {s[pos]!r} at {pos}")
        out.append(m.group(1))
        pos = m.end()
    out.append(None)
    return out


class _ExprParser:
    """Recursive-descent parser for the series literal grammar.

    Grammar: sums/differences of terms; a term is a product of factors; a
    factor is an integer, a name, or a parenthesized expression, optionally
    raised with ^ to an exponent (integer, name, or parenthesized expression).
    Names must be declared variables or binding parameters.
    """

    def __init__(self, tokens, where):
        self.toks = tokens
        self.i = 0
        self.where = where

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise ParseError(self.where, f"trailing input near {self.peek()!r}")
        return node

    def expr(self):
        sign = 1
        t = self.peek()
        if t in ("+", "-"):
            self.next()
            sign = -1 if t == "-" else 1
        node = self.term()
        if sign == -1:
            node = ("neg", node)
        while self.peek() in ("+", "-"):
            op = self.next()
            rhs = self.term()
            node = ("add", node, ("neg", rhs) if op == "-" else rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() == "*":
            self.next()
            node = ("mul", node, self.factor())
        return node

    def factor(self):
        t = self.next()
        if t is None:
            raise ParseError(self.where, "unexpected end of input")
        if t == "(":
            node = self.expr()
            if self.next() != ")":
                raise ParseError(self.where, "missing )")
        elif t == "-":
            node = ("neg", self.factor())
            return node
        elif t.isdigit():
            node = ("int", int(t))
        elif re.match(r"[A-Za-z_]", t):
            node = ("name", t)
        else:
            raise ParseError(self.where, f"unexpected token {t!r}")
        if self.peek() == "^":
            self.next()
            node = ("pow", node, self.exponent())
        return node

    def exponent(self):
        t = self.next()
        if t == "(":
            node = self.expr()
            if self.next() != ")":
                raise ParseError(self.where, "missing ) in exponent")
            return node
        if t is not None and t.isdigit():
            return ("int", int(t))
        if t is not None and re.match(r"[A-Za-z_]", t):
            return ("name", t)
        raise ParseError(self.where, f"bad exponent near {t!r}")


def _eval_int(node, binding, where):
    kind = node[0]
    if kind == "int":
        return node[1]
    if kind == "name":
        if node[1] not in binding:
            raise ParseError(where, f"unbound parameter {node[1]!r} in exponent")
        return int(binding[node[1]])
    if kind == "neg":
        return -_eval_int(node[1], binding, where)
    if kind == "add":
        return _eval_int(node[1], binding, where) + _eval_int(node[2], binding, where)
    if kind == "mul":
        return _eval_int(node[1], binding, where) * _eval_int(node[2], binding, where)
    if kind == "pow":
        return _eval_int(node[1], binding, where) ** _eval_int(node[2], binding, where)
    raise ParseError(where, f"cannot evaluate {kind} as integer")


def _eval_series(node, field, vars, binding, where):
    kind = node[0]
    if kind == "int":
        return TruncatedSeries.constant(field, vars, field.coerce(node[1]))
    if kind == "name":
        if node[1] in vars:
            return TruncatedSeries.variable(field, vars, node[1])
        if binding and node[1] in binding:
            return TruncatedSeries.constant(field, vars, field.coerce(int(binding[node[1]])))
        raise ParseError(where, f"unknown variable {node[1]!r} (declared: {', '.join(vars)})")
    if kind == "neg":
        return -_eval_series(node[1], field, vars, binding, where)
    if kind == "add":
        return _eval_series(node[1], field, vars, binding, where) + _eval_series(
            node[2], field, vars, binding, where
        )
    if kind == "mul":
        return _eval_series(node[1], field, vars, binding, where) * _eval_series(
            node[2], field, vars, binding, where
        )
    if kind == "pow":
        e = _eval_int(node[2], binding, where)
        if e < 0:
            raise ParseError(where, "negative exponent")
        return _eval_series(node[1], field, vars, binding, where) ** e
    raise ParseError(where, f"bad node {kind}")


def parse_series(s, field, vars, binding=None, where="series"):
    """Parse the series literal grammar into an exact polynomial.

    Integer coefficients, `*` for multiplication, `^` for powers, names from
    the declared variable list; template use additionally permits parameter
    names and arithmetic inside exponents, resolved through `binding`.
    """
    node = _ExprParser(_tokenize(s, where), where).parse()
    return _eval_series(node, field, tuple(vars), binding or {}, where)


def eval_int_expr(s, binding, where="expr"):
    """Evaluate an integer parameter expression (supports pos(q) = max(0,q))."""
    s2 = s.strip()
    m = re.fullmatch(r"pos\((.*)\)", s2)
    if m:
        return max(0, eval_int_expr(m.group(1), binding, where))
    node = _ExprParser(_tokenize(s2, where), where).parse()
    return _eval_int(node, binding, where)
