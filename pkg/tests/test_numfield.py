"""Number field layer tests.

Independent oracles: sympy's round_two / prime_decomp for integral bases
and splitting, brute-force factorization of all rational primes for the
prime-enumeration count, resultants for norms, and hand enumerations for
the small discriminant checks.
"""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy import Poly, Symbol

from galres import numfield as nf

x = Symbol("x")


def make(poly, label=""):
    return nf.build_field(poly, label=label)


QZ8 = make([1, 0, 0, 0, 1], "Qzeta8")
QQ = make([0, 1], "Q")


def test_build_field_examples():
    assert QZ8.degree == 4
    assert QZ8.signature == (0, 2)
    assert QZ8.disc == 256
    K = make([-2, 0, 1])
    assert K.signature == (2, 0) and K.disc == 8
    K = make([5, 0, 1])
    assert K.disc == -20
    assert K.basis_den == 1  # basis {1, sqrt(-5)}
    with pytest.raises(nf.Reducible):
        make([1, 2, 1])


def test_build_field_against_sympy_round_two():
    for poly in ([-5, 0, 1], [-8, -2, -1, 1], [1, 0, 0, 0, 1], [3, 1, 0, 1]):
        K = make(poly)
        P = Poly(list(reversed(poly)), x)
        _, dK = sympy.polys.numberfields.basis.round_two(P)
        assert K.disc == int(dK)


def test_fixture_basis_validation():
    # correct basis for Q(sqrt 5)
    K = nf.build_field([-5, 0, 1], fixture_basis=[[1, 0], [Fraction(1, 2), Fraction(1, 2)]])
    assert K.disc == 5
    with pytest.raises(nf.BadFixture):
        nf.build_field([-5, 0, 1], fixture_basis=[[1, 0], [0, 1]])  # not maximal
    with pytest.raises(nf.BadFixture):
        nf.build_field([-5, 0, 1], fixture_basis=[[1, 0], [Fraction(1, 3), Fraction(1, 3)]])


def test_factor_prime_examples():
    ps = nf.factor_prime(QZ8, 7)
    assert [(p.e, p.f, p.norm) for p in ps] == [(1, 2, 49), (1, 2, 49)]
    ps = nf.factor_prime(QZ8, 2)
    assert [(p.e, p.f) for p in ps] == [(4, 1)]
    ps = nf.factor_prime(QZ8, 71)
    assert [p.norm for p in ps] == [5041, 5041]
    # oracle: x^4+1 factors mod 7 into two quadratics
    fac = Poly(x ** 4 + 1, x, modulus=7).factor_list()[1]
    assert sorted(f.degree() for f, _ in fac) == [2, 2]


def test_factor_prime_index_divisor_matches_sympy():
    K = make([-8, -2, -1, 1])  # index 2
    assert K.index == 2
    mine = sorted((p.e, p.f) for p in nf.factor_prime(K, 2))
    dec = sympy.polys.numberfields.primes.prime_decomp(2, Poly(x**3 - x**2 - 2*x - 8, x))
    assert mine == sorted((int(P.e), int(P.f)) for P in dec)


def test_ramification_sum_and_norm_product():
    for K in (QZ8, make([5, 0, 1]), make([-8, -2, -1, 1])):
        for ell in (2, 3, 5, 7, 11, 13):
            ps = nf.factor_prime(K, ell)
            assert sum(p.e * p.f for p in ps) == K.degree
            total = 1
            for p in ps:
                total *= p.norm ** p.e
            assert total == ell ** K.degree


def test_valuations_and_norms():
    ps = nf.factor_prime(QZ8, 7)
    e2 = QZ8.from_power_basis([2, 1, 2])
    vals = sorted(p.valuation_element(e2) for p in ps)
    assert vals == [0, 1]
    assert e2.norm() == 49
    e3 = QZ8.from_power_basis([6, -1, 6])
    assert e3.norm() == 5041
    # oracle: resultant of x^4+1 and 6x^2-x+6
    assert int(sympy.resultant(Poly(x**4 + 1, x), Poly(6 * x**2 - x + 6, x))) == 5041
    p7 = ps[0]
    assert p7.valuation_element(QZ8.one()) == 0
    with pytest.raises(nf.ZeroElement):
        p7.valuation_element(QZ8.zero())


def test_valuation_additive_and_norm_multiplicative():
    ps = nf.factor_prime(QZ8, 7) + nf.factor_prime(QZ8, 2)
    a = QZ8.from_power_basis([2, 1, 2])
    b = QZ8.from_power_basis([1, 1])
    ab = a * b
    assert ab.norm() == a.norm() * b.norm()
    for p in ps:
        assert p.valuation_element(ab) == \
            p.valuation_element(a) + p.valuation_element(b)


def test_ideal_arithmetic():
    p2 = nf.factor_prime(QZ8, 2)[0]
    I = p2.lattice
    assert I.norm == 2
    sq = I * I
    assert sq.norm == 4
    assert (I ** 4).norm == 16
    # (2) = p2^4
    two = nf.principal_ideal(QZ8, QZ8.from_rational(2))
    assert two.hnf == (I ** 4).hnf
    assert nf.ideal_norm(QZ8, two) == 16


def test_primes_up_to():
    assert [(p.ell, p.norm) for p in nf.primes_up_to(QQ, 10)] == \
        [(2, 2), (3, 3), (5, 5), (7, 7)]
    ps = list(nf.primes_up_to(QZ8, 49))
    norms = [p.norm for p in ps]
    assert norms == sorted(norms)
    assert norms.count(49) == 2 and norms.count(17) == 4
    # brute-force oracle: count primes of norm <= 300 by factoring every prime
    count = 0
    for ell in sympy.primerange(2, 301):
        for p in nf.factor_prime(QZ8, int(ell)):
            if p.norm <= 300:
                count += 1
    assert count == len(list(nf.primes_up_to(QZ8, 300)))


def test_kummer_extension_examples():
    L, thL, rt = nf.kummer_extension(QZ8, QZ8.gen(), 2)
    assert list(L.poly) == [1, 0, 0, 0, 0, 0, 0, 0, 1]
    assert (rt * rt - nf.embed_element(QZ8.gen(), thL, L)).is_zero
    d2 = QZ8.from_power_basis([1, 0, -1, 1])
    L2, thL2, rt2 = nf.kummer_extension(QZ8, d2, 2)
    assert L2.degree == 8 and L2.signature == (0, 4)
    assert (rt2 * rt2 - nf.embed_element(d2, thL2, L2)).is_zero
    with pytest.raises(nf.IsPthPower):
        nf.kummer_extension(QQ, QQ.from_rational(4), 2)


def test_embedding_is_a_homomorphism():
    d2 = QZ8.from_power_basis([1, 0, -1, 1])
    L2, thL2, _ = nf.kummer_extension(QZ8, d2, 2)
    a = QZ8.from_power_basis([1, 2, 0, 1])
    b = QZ8.from_power_basis([0, 1, -1])
    ea = nf.embed_element(a, thL2, L2)
    eb = nf.embed_element(b, thL2, L2)
    assert (nf.embed_element(a * b, thL2, L2) - ea * eb).is_zero
    assert (nf.embed_element(a + b, thL2, L2) - (ea + eb)).is_zero


def test_is_pth_power():
    assert nf.is_pth_power(QQ, QQ.from_rational(4), 2) is not None
    assert nf.is_pth_power(QQ, QQ.from_rational(2), 2) is None
    r = nf.is_pth_power(QZ8, QZ8.from_rational(2), 2)
    assert r is not None and (r * r - QZ8.from_rational(2)).is_zero
    assert nf.is_pth_power(QZ8, QZ8.gen(), 2) is None
    assert nf.is_pth_power(QQ, QQ.from_rational(27), 3) is not None
    assert nf.is_pth_power(QQ, QQ.from_rational(9), 3) is None


def test_delta_p_examples():
    p7 = nf.factor_prime(QQ, 7)[0]
    assert nf.delta_p(QQ, p7, 2) == 1
    assert nf.delta_p(QQ, p7, 3) == 1
    p5 = nf.factor_prime(QQ, 5)[0]
    assert nf.delta_p(QQ, p5, 3) == 0
    p3 = nf.factor_prime(QQ, 3)[0]
    assert nf.delta_p(QQ, p3, 3) == 0
    # zeta_3 in Q(sqrt-3) globally, so locally everywhere
    K3 = make([3, 0, 1])
    for ell in (3, 7, 13):
        for p in nf.factor_prime(K3, ell):
            assert nf.delta_p(K3, p, 3) == 1


@settings(max_examples=100, derandomize=True, deadline=None)
@given(st.integers(2, 400))
def test_delta_p_tame_matches_norm_condition(ell):
    if not sympy.isprime(ell):
        return
    for p in (3, 5):
        if ell == p:
            continue
        for pr in nf.factor_prime(QZ8, ell):
            assert nf.delta_p(QZ8, pr, p) == (1 if pr.norm % p == 1 else 0)


def test_residue_field_machinery():
    p7 = nf.factor_prime(QZ8, 7)[0]
    g = p7.residue_generator()
    # generator has order exactly 48 in F_49
    assert p7.res_pow(g, 48) == p7.res_one()
    for d in (2, 3):
        assert p7.res_pow(g, 48 // d) != p7.res_one()
    a = p7.reduce_element(QZ8.gen() + QZ8.from_rational(3))
    dl = p7.res_dlog(a)
    assert p7.res_pow(g, dl) == a


def test_uniformizer_and_anti_uniformizer():
    for ell in (2, 7, 17):
        for p in nf.factor_prime(QZ8, ell):
            pi = p.uniformizer()
            assert p.valuation_element(pi) == 1
            tau = p.anti_uniformizer()
            assert p.valuation_element(tau) == -1
            assert p.valuation_element(pi * tau) == 0


def test_sturm_real_root_count():
    assert nf.sturm_real_roots([-2, 0, 1]) == 2      # x^2-2
    assert nf.sturm_real_roots([1, 0, 1]) == 0       # x^2+1
    assert nf.sturm_real_roots([0, -1, 0, 1]) == 3   # x^3-x
    assert nf.sturm_real_roots([1, 0, 0, 0, 1]) == 0


def test_element_minpoly_and_charpoly():
    th = QZ8.gen()
    assert th.min_poly() == [1, 0, 0, 0, 1]
    sqrt2 = th - th ** 3
    assert sqrt2.min_poly() == [-2, 0, 1]
    assert sqrt2.char_poly() == [4, 0, -4, 0, 1]  # (x^2-2)^2
