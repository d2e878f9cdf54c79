"""Exact arithmetic in finite fields F_{p^k}.

Elements are encoded as integers in range(p**k): the element with polynomial
coordinates (c_0, ..., c_{k-1}) in the power basis of the generator is encoded
as sum(c_i * p**i).  All arithmetic is table-driven (exp/log over a primitive
element), so every operation is exact integer work; no floats anywhere.

The modulus for F_{p^k} is chosen deterministically: the monic irreducible
polynomial of degree k over F_p with the smallest integer code, where a monic
polynomial x^k + a_{k-1} x^{k-1} + ... + a_0 has code sum(a_i * p**i).
"""

from __future__ import annotations

import itertools

_FIELD_CACHE: dict[tuple[int, int], "Field"] = {}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_mulmod_fp(a, b, modulus, p):
    # a, b: coefficient lists over F_p (low degree first); reduce mod modulus.
    res = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                res[i + j] = (res[i + j] + ai * bj) % p
    k = len(modulus) - 1
    for i in range(len(res) - 1, k - 1, -1):
        c = res[i]
        if c:
            res[i] = 0
            for j in range(k):
                res[i - k + j] = (res[i - k + j] - c * modulus[j]) % p
    while len(res) > k:
        res.pop()
    while len(res) < k:
        res.append(0)
    return res


def _poly_divides(d, f, p):
    # trial division of monic d into monic f over F_p; both low-first, monic.
    f = list(f)
    while len(f) >= len(d):
        c = f[-1]
        if c == 0:
            f.pop()
            continue
        shift = len(f) - len(d)
        for i, di in enumerate(d):
            f[shift + i] = (f[shift + i] - c * di) % p
        f.pop()
    return all(c == 0 for c in f)


def _monic_polys(p, deg):
    for tail in itertools.product(range(p), repeat=deg):
        # tail is (a_{deg-1}, ..., a_0) so that ascending iteration order
        # matches ascending integer code sum(a_i p^i).
        yield list(reversed(tail)) + [1]


def _irreducibles(p, deg):
    if deg == 1:
        yield from _monic_polys(p, 1)
        return
    lower = []
    for d in range(1, deg // 2 + 1):
        lower.append(list(_irreducibles(p, d)))
    for f in _monic_polys(p, deg):
        if all(not _poly_divides(g, f, p) for degl in lower for g in degl):
            yield f


def smallest_irreducible(p, k):
    """Lexicographically smallest (by integer code) monic irreducible of degree k."""
    for f in _irreducibles(p, k):
        return f
    raise ValueError("no irreducible found")


class Field:
    """The finite field F_{p^k} with table-driven arithmetic.

    Use GF(p, k) to obtain the unique cached instance.  Elements are plain
    ints; the field object supplies add/mul/inv/etc.
    """

    def __init__(self, p, k):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if k < 1:
            raise ValueError("extension degree must be >= 1")
        self.p = p
        self.k = k
        self.q = p**k
        self.modulus = smallest_irreducible(p, k) if k > 1 else [0, 1]
        self._build_tables()

    def _build_tables(self):
        p, k, q = self.p, self.k, self.q
        self._digits = [self._decode(x) for x in range(q)]
        self._neg = [self._encode([(-c) % p for c in self._digits[x]]) for x in range(q)]
        # exp/log over a primitive element
        self._exp = [1] * (q - 1)
        self._log = [0] * q
        gen = self._find_generator()
        acc = 1
        for i in range(q - 1):
            self._exp[i] = acc
            self._log[acc] = i
            acc = self._mul_slow(acc, gen)
        self.generator = gen

    def _decode(self, x):
        out = []
        for _ in range(self.k):
            out.append(x % self.p)
            x //= self.p
        return out

    def _encode(self, digits):
        x = 0
        for c in reversed(digits):
            x = x * self.p + (c % self.p)
        return x

    def _mul_slow(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        prod = _poly_mulmod_fp(self._digits[a], self._digits[b], self.modulus, self.p)
        return self._encode(prod)

    def _find_generator(self):
        q = self.q
        order = q - 1
        factors = set()
        n = order
        d = 2
        while d * d <= n:
            while n % d == 0:
                factors.add(d)
                n //= d
            d += 1
        if n > 1:
            factors.add(n)
        for g in range(1, q):
            if all(self._pow_slow(g, order // f) != 1 for f in factors):
                return g
        raise RuntimeError("no generator")

    def _pow_slow(self, a, e):
        r = 1
        while e:
            if e & 1:
                r = self._mul_slow(r, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return r

    # --- element operations (elements are ints in range(q)) ---

    def coerce(self, n):
        """Integer -> element of the prime subfield."""
        return n % self.p

    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        da, db = self._digits[a], self._digits[b]
        return self._encode([x + y for x, y in zip(da, db)])

    def sub(self, a, b):
        return self.add(a, self._neg[b])

    def neg(self, a):
        return self._neg[a]

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if self.k == 1:
            return (a * b) % self.p
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in finite field")
        if a == 1:
            return 1
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if e == 0:
            return 1
        if a == 0:
            if e < 0:
                raise ZeroDivisionError
            return 0
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def frobenius(self, a):
        return self.pow(a, self.p)

    def mult_order(self, a):
        if a == 0:
            raise ValueError("zero has no multiplicative order")
        n = self.q - 1
        la = self._log[a]
        if la == 0:
            return 1
        import math

        return n // math.gcd(n, la)

    def sqrt(self, a):
        """A square root of a, or None if a is not a square."""
        if a == 0:
            return 0
        if self.p == 2:
            # Frobenius is bijective: sqrt(a) = a^(q/2)
            return self.pow(a, self.q // 2)
        la = self._log[a]
        if la % 2:
            return None
        return self._exp[la // 2]

    def artin_schreier_root(self, c):
        """Solve t^2 + t = c over F_{2^k}; None if no solution. p=2 only."""
        assert self.p == 2
        for t in range(self.q):
            if self.add(self.mul(t, t), t) == c:
                return t
        return None

    def elements(self):
        return range(self.q)

    def units(self):
        return range(1, self.q)

    def element_of_order(self, l):
        """Smallest-encoded element of exact multiplicative order l."""
        if (self.q - 1) % l:
            raise ValueError(f"no element of order {l} in F_{self.q}")
        for a in range(1, self.q):
            if self.mult_order(a) == l:
                return a
        raise RuntimeError("unreachable")

    def __repr__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, Field) and (self.p, self.k) == (other.p, other.k)

    def __hash__(self):
        return hash((self.p, self.k))

    def __reduce__(self):
        return (GF, (self.p, self.k))


def GF(p, k=1):
    """The cached field F_{p^k} with the deterministic modulus."""
    key = (p, k)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = Field(p, k)
    return _FIELD_CACHE[key]


def embedding(small: Field, big: Field):
    """The deterministic embedding F_{p^a} -> F_{p^b} (a | b) as an int->int map.

    The generator of the small field is sent to the smallest-encoded root of
    the small modulus inside the big field.
    """
    if small.p != big.p or big.k % small.k:
        raise ValueError(f"no embedding {small} -> {big}")
    if small.k == big.k:
        return lambda x: x
    if small.k == 1:
        return lambda x: x  # prime subfield encodes identically
    root = None
    for cand in big.elements():
        acc, pw = 0, 1
        for c in small.modulus:
            acc = big.add(acc, big.mul(big.coerce(c), pw))
            pw = big.mul(pw, cand)
        acc = big.add(acc, pw)  # leading monic term
        if acc == 0:
            root = cand
            break
    if root is None:
        raise RuntimeError("modulus has no root in extension field")
    powers = [1]
    for _ in range(small.k - 1):
        powers.append(big.mul(powers[-1], root))

    def emb(x):
        acc = 0
        for c, pw in zip(small._digits[x], powers):
            acc = big.add(acc, big.mul(big.coerce(c), pw))
        return acc

    return emb
