"""Tests for the exact linear algebra layer.

The Smith form oracle used here is independent of the implementation: the
product d1*...*dk of the first k invariant factors equals the gcd of all
k x k minors (k-th determinantal divisor), computed by brute-force minor
enumeration for small matrices.
"""

import itertools
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from galres import abgroup as ab


def minor_gcd_oracle(A, k):
    """gcd of all k x k minors, 0 if all vanish."""
    rows = range(len(A))
    cols = range(len(A[0]))
    g = 0
    for rs in itertools.combinations(rows, k):
        for cs in itertools.combinations(cols, k):
            sub = [[A[i][j] for j in cs] for i in rs]
            g = gcd(g, ab.det_bareiss(sub))
    return abs(g)


def snf_oracle(A):
    """Invariant factors (including 1s) via determinantal divisors."""
    n = min(len(A), len(A[0]))
    divisors = [1]
    for k in range(1, n + 1):
        dk = minor_gcd_oracle(A, k)
        if dk == 0:
            break
        divisors.append(dk)
    factors = []
    for k in range(1, len(divisors)):
        factors.append(divisors[k] // divisors[k - 1])
    return [f for f in factors if f > 1]


small_matrix = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(-30, 30), min_size=c, max_size=c),
            min_size=r, max_size=r)))

big_matrix = st.integers(1, 12).flatmap(
    lambda r: st.integers(1, 12).flatmap(
        lambda c: st.lists(
            st.lists(st.integers(-10**6, 10**6), min_size=c, max_size=c),
            min_size=r, max_size=r)))


def test_snf_examples():
    assert ab.snf([[2, 4], [6, 8]]).invariant_factors == (2, 4)
    assert snf_oracle([[2, 4], [6, 8]]) == [2, 4]
    for n in (1, 2, 5):
        eye = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        assert ab.snf(eye).invariant_factors == ()
    for p in (2, 3, 5):
        assert ab.snf([[p, 0], [0, p]]).invariant_factors == (p, p)


@settings(max_examples=200, derandomize=True, deadline=None)
@given(small_matrix)
def test_snf_matches_minor_gcd_oracle(A):
    res = ab.snf(A)
    assert list(res.invariant_factors) == snf_oracle(A)


@settings(max_examples=200, derandomize=True, deadline=None)
@given(big_matrix)
def test_snf_recomposition_and_chain(A):
    res = ab.snf(A)
    U = [list(r) for r in res.U]
    V = [list(r) for r in res.V]
    D = ab.mat_mul(ab.mat_mul(U, A), V)
    for i in range(len(A)):
        for j in range(len(A[0])):
            assert D[i][j] == (res.diag[j] if i == j else 0)
    nz = [d for d in res.diag if d]
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0
    assert abs(ab.det_bareiss(U)) == 1
    assert abs(ab.det_bareiss(V)) == 1


def test_quotient_p_rank_examples():
    g42 = ab.group_from_relations(2, [[4, 0], [0, 2]])
    assert ab.quotient_p_rank(g42, [], 2) == 2
    g93 = ab.group_from_relations(2, [[9, 0], [0, 3]])
    # quotient by the cube of a generator: order 9 group of p-rank 2
    q = g93.quotient_by([g93.dlog([3, 0])])
    assert q.order == 9
    assert ab.quotient_p_rank(g93, [g93.dlog([3, 0])], 3) == 2
    g5 = ab.group_from_relations(1, [[5]])
    assert ab.quotient_p_rank(g5, [g5.dlog([1])], 5) == 0


def test_quotient_p_rank_counts_divisible_factors():
    for rels in ([[4, 0], [0, 6]], [[2, 0], [0, 50]], [[7]]):
        n = len(rels[0])
        G = ab.group_from_relations(n, rels)
        for p in (2, 3, 5, 7):
            assert ab.quotient_p_rank(G, [], p) == sum(
                1 for d in G.invariant_factors if d % p == 0)


def test_discrete_log_basics():
    G = ab.group_from_relations(3, [[4, 0, 0], [0, 6, 0], [0, 0, 5]])
    assert ab.discrete_log(G, [0, 0, 0]) == tuple(0 for _ in G.invariant_factors)
    for i in range(3):
        raw = [0] * 3
        raw[i] = 1
        assert ab.discrete_log(G, raw) == tuple(
            c % d for c, d in zip(G.dlog_matrix[i], G.invariant_factors))
    with pytest.raises(ab.NotInGroup):
        G.dlog([1, 2])


@settings(max_examples=200, derandomize=True, deadline=None)
@given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3),
                min_size=3, max_size=5),
       st.lists(st.integers(-50, 50), min_size=3, max_size=3),
       st.lists(st.integers(-50, 50), min_size=3, max_size=3))
def test_discrete_log_homomorphism(rels, a, b):
    try:
        G = ab.group_from_relations(3, rels)
    except ValueError:
        return
    da, db = G.dlog(a), G.dlog(b)
    ds = G.dlog([x + y for x, y in zip(a, b)])
    dd = G.dlog([2 * x for x in a])
    for x, y, s, d2, d in zip(da, db, ds, dd, G.invariant_factors):
        assert (x + y - s) % d == 0
        assert (2 * x - d2) % d == 0


def test_hnf_membership_and_kernel():
    A = [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]
    H = ab.hnf_rows(A)
    for row in A:
        assert ab.in_row_lattice(H, row)
    assert not ab.in_row_lattice(H, [1, 0, 0])
    K = ab.left_kernel([[1, 2], [2, 4], [3, 6]])
    assert K, "expected a nontrivial left kernel"
    for v in K:
        assert v[0] * 1 + v[1] * 2 + v[2] * 3 == 0
        assert v[0] * 2 + v[1] * 4 + v[2] * 6 == 0


def test_lll_preserves_lattice_and_shortens():
    B = [[201, 37], [1648, 297]]
    R = ab.lll(B)
    assert ab.hnf_rows(B) == ab.hnf_rows(R)
    assert min(sum(x * x for x in r) for r in R) <= min(
        sum(x * x for x in b) for b in B)


def test_lll_with_gram_matrix():
    # reduce under a scaled form; lattice must be preserved
    B = [[1, 0], [7, 1]]
    gram = [[sum(4 * a * b for a, b in zip(B[i], B[j])) for j in range(2)]
            for i in range(2)]
    R = ab.lll(B, gram=gram)
    assert ab.hnf_rows(R) == ab.hnf_rows(B)


def test_nullspace_and_solve_mod():
    A = [[1, 2, 3], [2, 4, 6]]
    for v in ab.nullspace_mod(A, 5):
        assert all(sum(r[j] * v[j] for j in range(3)) % 5 == 0 for r in A)
    x = ab.solve_mod([[1, 1], [0, 2]], [3, 4], 7)
    assert x is not None
    assert (x[0] + x[1]) % 7 == 3 and (2 * x[1]) % 7 == 4
