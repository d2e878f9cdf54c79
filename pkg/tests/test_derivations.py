"""Derivation machinery: well-definedness, p-closure, Hochschild, fix locus."""

import random

import pytest

from rdpkit.derivations import (
    FIXED_POINT_FREE,
    HAS_DIVISORIAL_PART,
    M_PRIMARY,
    Derivation,
    apply,
    check_derivation,
    check_p_closed,
    fix_case,
    hochschild_identity,
    p_power,
)
from rdpkit.errors import WitnessRejected
from rdpkit.field import GF
from rdpkit.local import LocalHypersurface, monomials_upto, normal_form
from rdpkit.series import TruncatedSeries as TS
from rdpkit.series import parse_series

V3 = ("x", "y", "z")
V2 = ("x", "y")


def ring(p, F_str, vars=V3, N=24, k=1):
    fld = GF(p, k)
    F = parse_series(F_str, fld, vars) if F_str else TS.zero(fld, vars)
    return LocalHypersurface(fld, vars, F, N)


def deriv(B, *image_strs, h=None):
    images = {v: parse_series(s, B.field, B.vars) for v, s in zip(B.vars, image_strs)}
    hs = parse_series(h, B.field, B.vars) if isinstance(h, str) else h
    return Derivation(B, images, hs)


class TestApply:
    def test_kills_equation_of_table6_row(self):
        B = ring(3, "x*y - z^2")
        D = deriv(B, "x", "-y", "0")
        assert apply(D, B.F) == TS.zero(B.field, V3)

    def test_no_z_dependence(self):
        B = ring(5, "x*y + z^5")
        D = deriv(B, "x", "-y", "0")
        assert apply(D, parse_series("z^5", B.field, V3)).is_zero()

    def test_leibniz_char3(self):
        B = ring(3, "x*y + z^2")
        D = deriv(B, "x", "-y", "0")
        g = parse_series("x^2*y", B.field, V3)
        assert apply(D, g) == parse_series("x^2*y", B.field, V3)


class TestCheckDerivation:
    def test_table2_d_odd_row(self):
        m = 2
        B = ring(2, "x^2 + y*z + x*y^2")
        D = deriv(B, "z + 2*y*x", "y^2", "0")  # z + m y^{m-1} x with m = 2
        ok, residual = check_derivation(B, D)
        assert ok, residual.to_str()

    def test_e8_char3_table_derivation(self):
        B = ring(3, "z^2 + x^3 + y^5")
        D = deriv(B, "0", "z", "-y^4")
        ok, _ = check_derivation(B, D)
        assert ok

    def test_failing_derivation_has_residual(self):
        # d/dx kills F in char 3 (F_x = 3x^2 = 0) so use d/dy which does not
        B = ring(3, "z^2 + x^3 + y^5")
        ok, _ = check_derivation(B, deriv(B, "1", "0", "0"))
        assert ok
        ok, residual = check_derivation(B, deriv(B, "0", "1", "0"))
        assert not ok
        assert residual == parse_series("5*y^4", B.field, V3).truncate(24)


class TestPPower:
    def test_ddz_p_fold(self):
        B = ring(5, "x*y + z^5")
        D = deriv(B, "0", "0", "1")
        assert all(img.is_zero() for img in p_power(D).values())

    def test_e8_e8_char3_additive(self):
        B = ring(3, "z^2 + y^3*x - x^3 + y^5")  # P = z^2+Yw, Q = y^2+zx shape
        # additive-type table derivation D = (y, z, 0)
        D = deriv(B, "y", "z", "0")
        # D^3(x) = D^2(y) = D(z) = 0
        imgs = p_power(D)
        assert imgs["x"].is_zero() and imgs["y"].is_zero() and imgs["z"].is_zero()

    def test_two_fold_char2(self):
        B = ring(2, None, V2)
        D = deriv(B, "x*y^2", "x^2 + y^3")
        imgs = p_power(D)
        assert imgs["x"] == parse_series("x*y^4", B.field, V2)
        assert imgs["y"] == parse_series("y^2*x^2 + y^5", B.field, V2)


class TestPClosed:
    def test_e7_char2_printed_witness(self):
        B = ring(2, None, V2)
        D = deriv(B, "x*y^2", "x^2 + y^3")
        h = parse_series("y^2", B.field, V2)
        assert check_p_closed(B, D, h) == h

    def test_additive_witness(self):
        B = ring(5, "x*y + z^5")
        D = deriv(B, "0", "0", "1")
        h = check_p_closed(B, D, TS.zero(B.field, V3))
        assert h.is_zero()

    def test_e6_e6_char3_multiplicative(self):
        # F = -x^3 + P(Y,z,Q), P = z^2+zw, Q = y^2+yx; D = (-Q_y, Q_x, 0)
        B = ring(3, "-x^3 + z^2 + z*y^2 + z*y*x")
        D = deriv(B, "y - x", "y", "0")
        one = TS.one(B.field, V3)
        assert check_p_closed(B, D, one) == one

    def test_solver_finds_witness(self):
        B = ring(2, None, V2)
        D = deriv(B, "x*y^2", "x^2 + y^3")
        h = check_p_closed(B, D, None)
        assert h == parse_series("y^2", B.field, V2)

    def test_witness_rejected(self):
        B = ring(2, None, V2)
        D = deriv(B, "x*y^2", "x^2 + y^3")
        with pytest.raises(WitnessRejected):
            check_p_closed(B, D, parse_series("x", B.field, V2))


class TestHochschild:
    def test_constant_a(self):
        B = ring(3, "z^2 + x^3 + y^5")
        D = deriv(B, "0", "z", "-y^4")
        a = parse_series("2", B.field, V3)
        assert hochschild_identity(B, D, a, N_out=16)

    def test_e8_char3_a_equals_y(self):
        B = ring(3, "z^2 + y^3*x - x^3 + y^5")
        D = deriv(B, "y", "z", "0")
        assert hochschild_identity(B, D, parse_series("y", B.field, V3), N_out=16)

    def test_random_pairs(self):
        rng = random.Random(91)
        for p in (2, 3, 5):
            B = ring(p, None, V2, N=16)
            mons = monomials_upto(2, 3)
            for _ in range(20):
                imgs = []
                for _ in range(2):
                    terms = {}
                    for _ in range(3):
                        e = rng.choice(mons)
                        c = rng.randrange(p)
                        if c:
                            terms[e] = c
                    imgs.append(TS(B.field, V2, terms))
                if all(t.is_zero() for t in imgs):
                    continue
                D = Derivation(B, dict(zip(V2, imgs)))
                terms = {rng.choice(mons): 1 + rng.randrange(p - 1) if p > 2 else 1}
                a = TS(B.field, V2, terms)
                assert hochschild_identity(B, D, a, N_out=12)


class TestFixCase:
    def test_ddz_fixed_point_free(self):
        B = ring(2, "x*y + z^4")
        D = deriv(B, "0", "0", "1")
        assert fix_case(B, D).tag == FIXED_POINT_FREE

    def test_smooth_multiplicative_m_primary(self):
        B = ring(5, None, V2)
        D = deriv(B, "x", "-y")
        fc = fix_case(B, D)
        assert fc.tag == M_PRIMARY and fc.witness == 1

    def test_table2_a_row_m_primary_exponent(self):
        m = 3
        B = ring(5, "x*y + z^3")
        D = deriv(B, "x", "-y", "0")
        fc = fix_case(B, D)
        assert fc.tag == M_PRIMARY and fc.witness == m

    def test_table5_divisorial(self):
        # l = 2, p = 3: F = -x^2 + yz, D = (x, 2y, 0)
        B = ring(3, "-x^2 + y*z")
        D = deriv(B, "x", "2*y", "0")
        fc = fix_case(B, D)
        assert fc.tag == HAS_DIVISORIAL_PART

    def test_unit_rescaling_invariance(self):
        rng = random.Random(13)
        B = ring(3, "x*y + z^3")
        D = deriv(B, "x", "-y", "0")
        base = fix_case(B, D).tag
        mons = monomials_upto(3, 2)
        for _ in range(10):
            terms = {(0, 0, 0): 1 + rng.randrange(2)}
            for _ in range(2):
                e = rng.choice(mons)
                if sum(e):
                    c = rng.randrange(3)
                    if c:
                        terms[e] = c
            u = TS(B.field, V3, terms)
            assert fix_case(B, D.scale(u)).tag == base


class TestDhZero:
    def test_lemma_on_table_derivation(self):
        # E7^0 char 2 row: D = (xy^2, x^2+y^3), h = y^2; D(h) = 0
        B = ring(2, None, V2)
        D = deriv(B, "x*y^2", "x^2 + y^3")
        h = check_p_closed(B, D, None)
        assert apply(D, h).is_zero()

    def test_scaled_witness_not_unit(self):
        # Corollary: for a in m, the solved witness of aD has zero constant term
        rng = random.Random(3)
        B = ring(3, "x*y + z^3")
        D = deriv(B, "x", "-y", "0")
        mons = [e for e in monomials_upto(3, 2) if sum(e) >= 1]
        for _ in range(5):
            terms = {}
            for _ in range(2):
                e = rng.choice(mons)
                c = rng.randrange(1, 3)
                terms[e] = c
            if not terms:
                continue
            a = TS(B.field, V3, terms)
            aD = D.scale(a)
            h1 = check_p_closed(B, aD, None)
            assert h1.constant_term() == 0
