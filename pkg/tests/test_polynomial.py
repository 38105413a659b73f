import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conecert.errors import AlgebraError
from conecert.polynomial import MonomialExpr, Poly, Radical, clear_powers, nonneg_certificate, poly_arith
from conecert.verdict import Verdict

x1, x2 = Poly.variable(0, 2), Poly.variable(1, 2)

coeff = st.fractions(min_value=-20, max_value=20, max_denominator=12)
exps = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
polys3 = st.dictionaries(exps, coeff, max_size=6).map(lambda d: Poly(d, 3))


def naive_mul(p, q):
    out = {}
    for ea, ca in p.terms.items():
        for eb, cb in q.terms.items():
            e = tuple(a + b for a, b in zip(ea, eb))
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return Poly(out, p.nvars)


def to_sympy(p, syms):
    return sympy.expand(sum(sympy.Rational(c.numerator, c.denominator) * sympy.prod(s**k for s, k in zip(syms, e))
                            for e, c in p.terms.items()))


@settings(max_examples=60, deadline=None)
@given(polys3, polys3, polys3)
def test_ring_axioms(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p * q == q * p
    assert p - p == Poly.zero(3)


@settings(max_examples=40, deadline=None)
@given(polys3, polys3)
def test_mul_matches_naive_oracle(p, q):
    assert p * q == naive_mul(p, q)


def test_random_degree4_products_match_sympy():
    rng = random.Random(3)
    syms = sympy.symbols("a b c")
    for _ in range(20):
        ps = []
        for _ in range(2):
            terms = {}
            for _ in range(5):
                e = [0, 0, 0]
                for _ in range(4):
                    e[rng.randrange(3)] += 1
                terms[tuple(e)] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
            ps.append(Poly(terms, 3))
        prod = poly_arith(ps[0], ps[1], "mul")
        assert prod == naive_mul(*ps)
        assert to_sympy(prod, syms) == sympy.expand(to_sympy(ps[0], syms) * to_sympy(ps[1], syms))


def test_a2_factor_difference():
    diff = poly_arith(x1 + x2, 3, "pow") - x1 * (x1 + Fraction(3, 2) * x2) ** 2
    assert diff == Fraction(3, 4) * x1 * x2**2 + x2**3


@pytest.mark.parametrize("op", ["add", "sub", "mul"])
def test_identities(op):
    p = (x1 + 2 * x2) ** 3
    unit = Poly.constant(1 if op == "mul" else 0, 2)
    assert poly_arith(p, unit, op) == p


def test_pow_zero_and_bad_exponent():
    assert (x1 + x2) ** 0 == Poly.constant(1, 2)
    with pytest.raises(ValueError):
        (x1 + x2) ** -1
    with pytest.raises(ValueError):
        poly_arith(x1, x2, "div")


def test_content_and_primitive():
    p = Fraction(3, 4) * x1 + Fraction(3, 2) * x2
    c, prim = p.primitive()
    assert c == Fraction(3, 4)
    assert prim == x1 + 2 * x2


def test_clear_powers_a2_stage_two():
    # D = J1 * G^2 for the A2 ansatz; the printed expansion is 432 times the primitive difference
    lhs = MonomialExpr(
        [(3 * x1**2 + 6 * x1 * x2 + 4 * x2**2, Fraction(1, 2)), (x1, Fraction(1, 3)),
         (2 * x1 + 3 * x2, Fraction(2, 3)), (x1 + x2, -2)],
        Radical.of(Fraction(1, 3 ** 3 * 2 ** 4), Fraction(1, 6)),
    )
    one = MonomialExpr.const(Radical.one(), 2)
    pl, pr, n = clear_powers(lhs, one)
    assert n == 6
    diff = pr - pl
    c, prim = diff.primitive()
    assert len(diff) == 11
    printed = [216, 2376, 11925, 35838, 71120, 96888, 91152, 57888, 23328, 5184, 432]
    assert [int(v) for _, v in prim.sorted_terms()] == printed
    assert max(prim.terms) == (10, 2)
    assert nonneg_certificate(diff).verdict is Verdict.CERTIFIED


def test_clear_powers_trivial():
    e = MonomialExpr([(x1, 1)], nvars=2)
    pl, pr, n = clear_powers(e, e)
    assert n == 1 and pl == pr


def test_clear_powers_am_gm():
    gm = MonomialExpr([(x1 * x2, Fraction(1, 2))], nvars=2)
    am = MonomialExpr([(x1 + x2, 1)], Radical.of(Fraction(1, 2)), 2)
    pl, pr, n = clear_powers(gm, am)
    assert n == 2
    assert pr - pl == Fraction(1, 4) * (x1 - x2) ** 2


def test_clear_powers_degree_mismatch():
    with pytest.raises(AlgebraError) as exc:
        clear_powers(MonomialExpr([(x1, 1)], nvars=2), MonomialExpr([(x1, 2)], nvars=2))
    assert exc.value.code == "DEGREE_MISMATCH"


def test_clear_powers_sign_soundness():
    rng = random.Random(11)
    lhs = MonomialExpr([(x1 + 3 * x2, Fraction(2, 3)), (x1, Fraction(1, 3)), (x2 + 2 * x1, Fraction(-1, 2))],
                       Radical.of(3, Fraction(1, 2)), 2)
    rhs = MonomialExpr([(x1 + x2, Fraction(1, 2))], nvars=2)
    pl, pr, _ = clear_powers(lhs, rhs)
    for _ in range(1000):
        pt = [Fraction(rng.randint(1, 400), rng.randint(1, 40)) for _ in range(2)]
        direct = float(np.sign(lhs(np.array(pt, float)) - rhs(np.array(pt, float))))
        poly = np.sign(pl.evaluate(pt) - pr.evaluate(pt))
        if abs(lhs(np.array(pt, float)) - rhs(np.array(pt, float))) > 1e-9:
            assert direct == poly


def test_nonneg_certificate_examples():
    assert nonneg_certificate(Poly.zero(2)).verdict is Verdict.CERTIFIED
    assert nonneg_certificate((x1 - x2) ** 2).verdict is Verdict.INCONCLUSIVE
    cert = nonneg_certificate(Fraction(3, 4) * x1 * x2**2 + x2**3)
    assert cert.verdict is Verdict.CERTIFIED and cert.min_coefficient == Fraction(3, 4)


def test_stellar_subdivision_certifies_square_at_its_zero_ray():
    # (x1 - x2)^2 vanishes on the ray (1, 1); subdividing there splits it into nonnegative pieces
    cert = nonneg_certificate((x1 - x2) ** 2, ray=(1, 1))
    assert cert.verdict is Verdict.CERTIFIED and cert.pieces == 2


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)),
                       st.fractions(min_value=-5, max_value=10, max_denominator=6), max_size=6),
       st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=5, max_size=5))
def test_nonneg_certificate_sound(terms, points):
    p = Poly(terms, 2)
    if nonneg_certificate(p).verdict is Verdict.CERTIFIED:
        for pt in points:
            assert p.evaluate_array(np.array([pt])) >= -1e-9


def test_radical_canonical():
    assert Radical.of(Fraction(2, 3), Fraction(1, 2)) ** 2 == Radical.of(Fraction(2, 3))
    assert (Radical.of(8, Fraction(1, 3))).to_fraction() == 2
    assert abs(float(Radical.of(2, Fraction(1, 2))) - 2 ** 0.5) < 1e-15
    with pytest.raises(AlgebraError):
        Radical.of(0)


def test_monomial_merges_equal_bases():
    e = MonomialExpr([(2 * x1 + 2 * x2, Fraction(1, 2)), (x1 + x2, Fraction(1, 2))], nvars=2)
    assert len(e.factors) == 1 and e.constant == Radical.of(2, Fraction(1, 2))
    pt = (Fraction(3), Fraction(5))
    assert e.evaluate_exact(pt) == Radical.of(2, Fraction(7, 2))
