"""Number fields: construction, integral bases, ideals, and local data.

A field is carried by its monic integer defining polynomial together with
an integral basis expressed over the power basis.  Elements live in exact
coordinates over the integral basis (integer vector / denominator).  Prime
ideals are full-rank sublattices in Hermite form, with two-element
generators, residue-field machinery, and anti-uniformizers for exact
valuations.

Build-vs-buy: sympy supplies commutative polynomial utilities (rational
factorization, factorization mod p, resultants, integer factorization);
the number-theoretic layers (maximality, splitting, valuations, Kummer
towers) are implemented here.  Real-root counting is by Sturm sequences,
never floating point; mpmath supplies high-precision complex embeddings
only where logarithmic data is inherently analytic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt, prod

import mpmath
import sympy

from . import GalresError
from .abgroup import (det_bareiss, hnf_rows, identity, in_row_lattice,
                      nullspace_mod, rref_mod)

_X = sympy.Symbol("x")
_Z = sympy.Symbol("z")


class Reducible(GalresError):
    """Defining polynomial is not irreducible over the rationals."""


class BadFixture(GalresError):
    """A supplied integral-basis / invariants fixture fails validation."""


class MaximalityNotReached(GalresError):
    """The maximal-order loop exceeded its configured effort."""


class ZeroElement(GalresError):
    """Operation undefined for the zero element."""


class IsPthPower(GalresError):
    """Kummer generator is already a p-th power in the base field."""


class MissingRootOfUnity(GalresError):
    """Odd-degree Kummer extension requires the p-th roots of unity."""


# ---------------------------------------------------------------------------
# integer polynomial helpers


def poly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def poly_mul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_mod_monic(a, f):
    """a mod f for monic f, exact arithmetic on rationals or ints."""
    a = list(a)
    n = len(f) - 1
    while len(a) > n:
        c = a[-1]
        if c:
            off = len(a) - 1 - n
            for i in range(n):
                a[off + i] -= c * f[i]
        a.pop()
    return a


def sturm_real_roots(f) -> int:
    """Number of real roots of a squarefree integer polynomial (ascending)."""
    f = [Fraction(c) for c in poly_trim(f)]
    if len(f) <= 1:
        return 0
    fprime = [i * f[i] for i in range(1, len(f))]
    chain = [f, poly_trim(fprime)]
    while len(chain[-1]) > 1:
        rem = _poly_rem_frac(chain[-2], chain[-1])
        rem = poly_trim([-c for c in rem])
        if not rem:
            break
        chain.append(rem)

    def signs_at_inf(sign):
        s, changes, prev = 0, 0, 0
        for p in chain:
            lead = p[-1] * (sign ** ((len(p) - 1) % 2))
            cur = (lead > 0) - (lead < 0)
            if cur and prev and cur != prev:
                changes += 1
            if cur:
                prev = cur
        return changes

    return signs_at_inf(-1) - signs_at_inf(1)


def _poly_rem_frac(a, b):
    a = list(a)
    db = len(b) - 1
    inv = b[-1]
    while len(a) - 1 >= db and poly_trim(a):
        c = a[-1] / inv
        off = len(a) - 1 - db
        for i in range(db):
            a[off + i] -= c * b[i]
        a.pop()
        a = list(a)
        while a and a[-1] == 0 and len(a) - 1 >= db:
            a.pop()
    return a


def factor_poly_mod(poly, ell: int):
    """[(coeffs ascending, multiplicity)] of a monic poly modulo ell."""
    P = sympy.Poly(list(reversed(poly)), _X, modulus=ell, symmetric=False)
    _, factors = P.factor_list()
    out = []
    for fac, mult in factors:
        coeffs = [int(c) % ell for c in reversed(fac.all_coeffs())]
        out.append((coeffs, int(mult)))
    return out


def poly_discriminant(poly) -> int:
    P = sympy.Poly(list(reversed(poly)), _X)
    return int(sympy.discriminant(P))


def poly_is_irreducible(poly) -> bool:
    P = sympy.Poly(list(reversed(poly)), _X)
    return P.is_irreducible


def factor_int(n: int) -> dict[int, int]:
    if n < 0:
        n = -n
    return {int(p): int(e) for p, e in sympy.factorint(n).items()}


# ---------------------------------------------------------------------------
# the field


@dataclass(frozen=True)
class NumberFieldData:
    poly: tuple[int, ...]                 # monic, ascending, integer
    degree: int
    signature: tuple[int, int]            # (r1, r2)
    disc: int                             # field discriminant
    basis_num: tuple[tuple[int, ...], ...]  # integral basis rows / basis_den
    basis_den: int
    label: str = ""
    _cache: dict = dc_field(default_factory=dict, compare=False, repr=False)

    # -- basic data ---------------------------------------------------------

    @property
    def index(self) -> int:
        """Index of Z[theta] in the maximal order."""
        ratio = poly_discriminant(list(self.poly)) // self.disc
        r = isqrt(abs(ratio))
        assert r * r == abs(ratio)
        return r

    def mult_table(self):
        tab = self._cache.get("mult_table")
        if tab is None:
            n = self.degree
            f = [Fraction(c) for c in self.poly]
            basis_pow = [[Fraction(v, self.basis_den) for v in row]
                         for row in self.basis_num]
            inv = _invert_frac_matrix(basis_pow)
            tab = []
            for i in range(n):
                row_tab = []
                for j in range(n):
                    prodp = poly_mod_monic(poly_mul(basis_pow[i], basis_pow[j]), f)
                    prodp += [Fraction(0)] * (n - len(prodp))
                    coords = _vec_mat_frac(prodp, inv)
                    ints = []
                    for c in coords:
                        assert c.denominator == 1
                        ints.append(int(c))
                    row_tab.append(tuple(ints))
                tab.append(tuple(row_tab))
            self._cache["mult_table"] = tab = tuple(tab)
        return tab

    def power_to_basis(self):
        """Exact matrix carrying power-basis rational coords to basis coords."""
        inv = self._cache.get("power_to_basis")
        if inv is None:
            basis_pow = [[Fraction(v, self.basis_den) for v in row]
                         for row in self.basis_num]
            inv = _invert_frac_matrix(basis_pow)
            self._cache["power_to_basis"] = inv
        return inv

    # -- elements -----------------------------------------------------------

    def zero(self):
        return FieldElement(self, (0,) * self.degree, 1)

    def one(self):
        coords = [0] * self.degree
        coords[0] = 1  # basis row 0 is 1 by HNF normalization
        return FieldElement(self, tuple(coords), 1)

    def gen(self):
        """theta, the root of the defining polynomial."""
        return self.from_power_basis([0, 1])

    def from_power_basis(self, coeffs) -> "FieldElement":
        n = self.degree
        vec = [Fraction(c) for c in coeffs[:n]] + [Fraction(0)] * max(0, n - len(coeffs))
        if len(coeffs) > n:
            f = [Fraction(c) for c in self.poly]
            red = poly_mod_monic([Fraction(c) for c in coeffs], f)
            vec = red + [Fraction(0)] * (n - len(red))
        coords = _vec_mat_frac(vec, self.power_to_basis())
        den = 1
        for c in coords:
            den = den * c.denominator // gcd(den, c.denominator)
        num = tuple(int(c * den) for c in coords)
        return FieldElement(self, num, den).normalize()

    def from_rational(self, q) -> "FieldElement":
        q = Fraction(q)
        coords = [0] * self.degree
        coords[0] = q.numerator
        return FieldElement(self, tuple(coords), q.denominator).normalize()

    def element(self, num, den=1) -> "FieldElement":
        return FieldElement(self, tuple(int(v) for v in num), int(den)).normalize()

    # -- embeddings ---------------------------------------------------------

    def embeddings(self, prec: int = 60):
        """Complex embeddings: real roots first, then one per conjugate pair."""
        key = ("emb", prec)
        emb = self._cache.get(key)
        if emb is None:
            with mpmath.workdps(prec):
                roots = mpmath.polyroots([mpmath.mpf(1)] + [
                    mpmath.mpf(c) for c in reversed(self.poly[:-1])],
                    maxsteps=200, extraprec=200)
            reals, pairs = [], []
            for r in roots:
                if abs(mpmath.im(r)) < mpmath.mpf(10) ** (-prec // 2):
                    reals.append(mpmath.mpf(mpmath.re(r)))
                elif mpmath.im(r) > 0:
                    pairs.append(r)
            reals.sort()
            pairs.sort(key=lambda t: (mpmath.re(t), mpmath.im(t)))
            assert len(reals) == self.signature[0] and len(pairs) == self.signature[1]
            emb = [*reals, *pairs]
            self._cache[key] = emb
        return emb

    def __repr__(self):
        return f"NumberField({self.label or list(self.poly)})"


def _invert_frac_matrix(A):
    n = len(A)
    M = [[Fraction(A[i][j]) for j in range(n)] + [Fraction(int(i == j))
         for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if M[i][c])
        M[c], M[piv] = M[piv], M[c]
        inv = M[c][c]
        M[c] = [v / inv for v in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return [row[n:] for row in M]


def _vec_mat_frac(v, A):
    n = len(A)
    return [sum(v[i] * A[i][j] for i in range(n)) for j in range(len(A[0]))]


@dataclass(frozen=True)
class FieldElement:
    """Element in exact coordinates over the field's integral basis."""

    K: NumberFieldData
    num: tuple[int, ...]
    den: int

    def normalize(self) -> "FieldElement":
        den = self.den
        if den < 0:
            den, num = -den, tuple(-v for v in self.num)
        else:
            num = self.num
        g = abs(den)
        for v in num:
            g = gcd(g, v)
            if g == 1:
                break
        if g > 1:
            num = tuple(v // g for v in num)
            den //= g
        return FieldElement(self.K, num, den)

    @property
    def is_zero(self) -> bool:
        return not any(self.num)

    @property
    def is_integral(self) -> bool:
        return self.den == 1

    def __add__(self, o):
        o = self._coerce(o)
        da, db = self.den, o.den
        num = tuple(a * db + b * da for a, b in zip(self.num, o.num))
        return FieldElement(self.K, num, da * db).normalize()

    def __sub__(self, o):
        o = self._coerce(o)
        da, db = self.den, o.den
        num = tuple(a * db - b * da for a, b in zip(self.num, o.num))
        return FieldElement(self.K, num, da * db).normalize()

    def __neg__(self):
        return FieldElement(self.K, tuple(-v for v in self.num), self.den)

    def __mul__(self, o):
        o = self._coerce(o)
        tab = self.K.mult_table()
        n = self.K.degree
        out = [0] * n
        for i, a in enumerate(self.num):
            if not a:
                continue
            for j, b in enumerate(o.num):
                if not b:
                    continue
                ab = a * b
                row = tab[i][j]
                for k in range(n):
                    if row[k]:
                        out[k] += ab * row[k]
        return FieldElement(self.K, tuple(out), self.den * o.den).normalize()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.K.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def _coerce(self, o):
        if isinstance(o, FieldElement):
            assert o.K is self.K
            return o
        return self.K.from_rational(o)

    def mult_matrix(self):
        """Rows: coordinates of self * basis_i (times 1/den)."""
        tab = self.K.mult_table()
        n = self.K.degree
        rows = []
        for i in range(n):
            out = [0] * n
            for j, b in enumerate(self.num):
                if b:
                    row = tab[i][j]
                    for k in range(n):
                        if row[k]:
                            out[k] += b * row[k]
            rows.append(out)
        return rows

    def norm(self) -> Fraction:
        n = self.K.degree
        return Fraction(det_bareiss(self.mult_matrix()), self.den ** n)

    def trace(self) -> Fraction:
        rows = self.mult_matrix()
        return Fraction(sum(rows[i][i] for i in range(len(rows))), self.den)

    def inverse(self) -> "FieldElement":
        if self.is_zero:
            raise ZeroElement("cannot invert zero")
        n = self.K.degree
        rows = self.mult_matrix()  # basis_i * self (over den)
        # solve x * (self) = 1: x coords over basis from linear system
        A = [[Fraction(rows[i][k], self.den) for i in range(n)] for k in range(n)]
        b = [Fraction(int(k == 0)) for k in range(n)]  # coords of 1
        x = _solve_frac(A, b)
        den = 1
        for c in x:
            den = den * c.denominator // gcd(den, c.denominator)
        return FieldElement(self.K, tuple(int(c * den) for c in x), den).normalize()

    def to_power_basis(self) -> list[Fraction]:
        basis = self.K.basis_num
        n = self.K.degree
        return [Fraction(sum(self.num[i] * basis[i][j] for i in range(n)),
                         self.den * self.K.basis_den) for j in range(n)]

    def min_poly(self) -> list[int]:
        """Primitive integer minimal polynomial, ascending coefficients."""
        n = self.K.degree
        powers = [self.K.one()]
        for _ in range(n):
            powers.append(powers[-1] * self)
        # find the first linear dependence among 1, x, x^2, ...
        rows = []
        for k, pw in enumerate(powers):
            rows.append([Fraction(v, pw.den) for v in pw.num])
            dep = _frac_dependence(rows)
            if dep is not None:
                den = 1
                for c in dep:
                    den = den * c.denominator // gcd(den, c.denominator)
                ints = [int(c * den) for c in dep]
                g = 0
                for v in ints:
                    g = gcd(g, v)
                ints = [v // g for v in ints]
                if ints[-1] < 0:
                    ints = [-v for v in ints]
                return ints
        raise AssertionError("element generates no dependence")

    def char_poly(self) -> list[int]:
        """Characteristic polynomial: min_poly to the power n/deg."""
        mp = self.min_poly()
        d = len(mp) - 1
        e = self.K.degree // d
        out = [Fraction(c) for c in mp]
        result = out
        for _ in range(e - 1):
            result = poly_mul(result, out)
        return [int(c) for c in result]

    def __repr__(self):
        return f"Elt({list(self.num)}/{self.den})"


def _solve_frac(A, b):
    n = len(A)
    M = [[Fraction(A[i][j]) for j in range(n)] + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if M[i][c])
        M[c], M[piv] = M[piv], M[c]
        inv = M[c][c]
        M[c] = [v / inv for v in M[c]]
        for i in range(n):
            if i != c and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * bb for a, bb in zip(M[i], M[c])]
    return [M[i][n] for i in range(n)]


def _frac_dependence(rows):
    """Coefficients expressing the last row over the previous ones, or None."""
    k = len(rows)
    if k == 1:
        if not any(rows[0]):
            return [Fraction(1)]
        return None
    n = len(rows[0])
    A = [[rows[i][j] for i in range(k - 1)] for j in range(n)]
    b = [rows[-1][j] for j in range(n)]
    # least-structure exact solve: Gaussian elimination on the rectangular system
    M = [A[j] + [b[j]] for j in range(n)]
    pivots = []
    r = 0
    for c in range(k - 1):
        piv = next((i for i in range(r, n) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = M[r][c]
        M[r] = [v / inv for v in M[r]]
        for i in range(n):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * bb for a, bb in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    sol = [Fraction(0)] * (k - 1)
    for i, c in enumerate(pivots):
        sol[c] = M[i][k - 1]
    # verify consistency
    for j in range(n):
        if sum(A[j][c] * sol[c] for c in range(k - 1)) != b[j]:
            return None
    return [-s for s in sol] + [Fraction(1)]

# ---------------------------------------------------------------------------
# construction of the maximal order


def build_field(poly, fixture_basis=None, label: str = "",
                degree_cap: int = 16, maximality_rounds: int = 64) -> NumberFieldData:
    """Construct a number field with its maximal order.

    ``fixture_basis``, when given, is a list of rows of rationals (over the
    power basis) claiming to be an integral basis; it is validated (closure
    under multiplication, integrality, discriminant consistency, and
    maximality) and rejected with ``BadFixture`` on any failure.  Otherwise
    the maximal order is computed by the Dedekind criterion plus radical
    idealizer enlargement at every prime whose square divides disc(poly).
    """
    poly = [int(c) for c in poly]
    poly = poly_trim(poly)
    n = len(poly) - 1
    if n < 1 or poly[-1] != 1:
        raise Reducible("defining polynomial must be monic of degree >= 1")
    if n > degree_cap:
        raise MaximalityNotReached(f"degree {n} exceeds cap {degree_cap}")
    if n > 1 and not poly_is_irreducible(poly):
        raise Reducible(f"{poly} is reducible over the rationals")
    disc_poly = poly_discriminant(poly) if n > 1 else 1
    if n > 1 and disc_poly == 0:
        raise Reducible("polynomial is not squarefree")
    # squarefree real-root count needs the polynomial itself (irreducible => squarefree)
    r1 = sturm_real_roots(poly) if n > 1 else 1
    r2 = (n - r1) // 2

    if fixture_basis is not None:
        basis_num, basis_den = _normalize_basis_rows(fixture_basis, n)
    else:
        basis_num, basis_den = identity(n), 1
        if n > 1:
            for q, e in sorted(factor_int(disc_poly).items()):
                if e >= 2:
                    basis_num, basis_den = _q_maximal_order(
                        poly, basis_num, basis_den, q, maximality_rounds)
        basis_num, basis_den = _one_first(basis_num, basis_den)
    K = _assemble_field(poly, basis_num, basis_den, r1, r2, label)
    if fixture_basis is not None:
        _validate_maximality(K, maximality_rounds)
    return K


def _normalize_basis_rows(rows, n):
    if len(rows) != n or any(len(r) != n for r in rows):
        raise BadFixture("integral basis must be a square matrix of rationals")
    den = 1
    fr = [[Fraction(v) for v in row] for row in rows]
    for row in fr:
        for v in row:
            den = den * v.denominator // gcd(den, v.denominator)
    ints = [[int(v * den) for v in row] for row in fr]
    H = hnf_rows(ints)
    if len(H) != n:
        raise BadFixture("integral basis rows are linearly dependent")
    g = den
    for row in H:
        for v in row:
            g = gcd(g, v)
    if g > 1:
        den //= g
        H = [[v // g for v in row] for row in H]
    return _one_first([list(r) for r in H], den)


def _one_first(H, den):
    """Change the lattice basis so the first vector is 1 (power coords)."""
    n = len(H)
    target = [den] + [0] * (n - 1)
    try:
        c = _solve_hnf(H, target)
    except AssertionError:
        raise BadFixture("the order does not contain 1") from None
    if c == [1] + [0] * (n - 1):
        return H, den
    from .abgroup import snf as _snf, mat_mul
    res = _snf([c])
    assert res.diag[0] == 1, "1 is imprimitive in the order lattice"
    Vinv = _int_inverse([list(r) for r in res.V])
    newH = mat_mul(Vinv, H)
    assert newH[0] == target
    return newH, den


def _int_inverse(V):
    n = len(V)
    inv = _invert_frac_matrix([[Fraction(v) for v in row] for row in V])
    out = []
    for row in inv:
        r = []
        for v in row:
            assert v.denominator == 1
            r.append(int(v))
        out.append(r)
    return out


def _assemble_field(poly, basis_num, basis_den, r1, r2, label):
    n = len(poly) - 1
    K = NumberFieldData(poly=tuple(poly), degree=n, signature=(r1, r2),
                        disc=0, basis_num=tuple(map(tuple, basis_num)),
                        basis_den=basis_den, label=label)
    # basis row 0 must be 1 (HNF of an order's lattice guarantees the pivot)
    if list(K.basis_num[0]) != [basis_den] + [0] * (n - 1):
        raise BadFixture("integral basis does not contain 1 as its first row")
    try:
        tab = K.mult_table()
    except AssertionError:
        raise BadFixture("basis is not closed under multiplication") from None
    # exact discriminant via the trace form
    tr = _trace_form(K)
    disc = det_bareiss(tr)
    if disc == 0:
        raise BadFixture("degenerate trace form")
    object.__setattr__(K, "disc", disc)
    dp = poly_discriminant(poly) if n > 1 else 1
    ratio = Fraction(dp, disc)
    if ratio.denominator != 1 or isqrt(ratio.numerator) ** 2 != ratio.numerator:
        raise BadFixture("discriminant inconsistent with the defining polynomial")
    return K


def _trace_form(K: NumberFieldData):
    n = K.degree
    # traces of basis_i * basis_j, exactly (integers for an order)
    tab = K.mult_table()
    traces = []
    basis_elems = [FieldElement(K, tuple(int(i == j) for j in range(n)), 1)
                   for i in range(n)]
    tr_basis = [b.trace() for b in basis_elems]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            t = Fraction(0)
            for k in range(n):
                if tab[i][j][k]:
                    t += tab[i][j][k] * tr_basis[k]
            assert t.denominator == 1
            row.append(int(t))
        out.append(row)
    return out


def _validate_maximality(K: NumberFieldData, rounds):
    for q, e in sorted(factor_int(K.disc).items()):
        if e >= 2:
            num, den = _q_maximal_order(list(K.poly), [list(r) for r in K.basis_num],
                                        K.basis_den, q, rounds)
            if den != K.basis_den or [list(r) for r in num] != [list(r) for r in K.basis_num]:
                raise BadFixture(f"supplied order is not maximal at {q}")


def dedekind_maximal_at(poly, q: int) -> bool:
    """Dedekind's criterion: is Z[theta] q-maximal?"""
    fac = factor_poly_mod(poly, q)
    gbar = [1]
    for g, _ in fac:
        gbar = [c % q for c in poly_mul(gbar, g)]
    # lift g, h monic to Z and form (g*h - f)/q
    g_lift = _monic_lift(gbar, q)
    # hbar = fbar / gbar
    fbar = [c % q for c in poly]
    hbar = _poly_divmod_mod(fbar, gbar, q)
    h_lift = _monic_lift(hbar, q)
    F = [(a - b) // q for a, b in itertools.zip_longest(
        poly_mul(g_lift, h_lift), poly, fillvalue=0)]
    Fbar = [c % q for c in F]
    g1 = _poly_gcd_mod(Fbar, gbar, q)
    g2 = _poly_gcd_mod(g1, hbar, q)
    return len(poly_trim(g2)) <= 1


def _monic_lift(c, q):
    out = [v % q for v in c]
    half = [v if v <= q // 2 else v - q for v in out]
    half[-1] = 1
    return half


def _poly_divmod_mod(a, b, q):
    a = [v % q for v in a]
    b = poly_trim([v % q for v in b])
    inv = pow(b[-1], -1, q)
    out = [0] * (len(a) - len(b) + 1)
    while len(poly_trim(a)) >= len(b):
        a = poly_trim(a)
        c = (a[-1] * inv) % q
        d = len(a) - len(b)
        out[d] = c
        for i in range(len(b)):
            a[d + i] = (a[d + i] - c * b[i]) % q
        a.pop()
    return out


def _poly_gcd_mod(a, b, q):
    a = poly_trim([v % q for v in a])
    b = poly_trim([v % q for v in b])
    while b:
        inv = pow(b[-1], -1, q)
        r = a
        while len(poly_trim(r)) >= len(b):
            r = poly_trim(r)
            c = (r[-1] * inv) % q
            d = len(r) - len(b)
            for i in range(len(b)):
                r[d + i] = (r[d + i] - c * b[i]) % q
            r.pop()
        a, b = b, poly_trim(r)
    if a:
        inv = pow(a[-1], -1, q)
        a = [(v * inv) % q for v in a]
    return a


def _q_maximal_order(poly, basis_num, basis_den, q, rounds):
    """Enlarge the order at q via the radical idealizer until q-maximal."""
    n = len(poly) - 1
    if basis_den == 1 and basis_num == identity(n) and dedekind_maximal_at(poly, q):
        return basis_num, basis_den
    for _ in range(rounds):
        K = NumberFieldData(poly=tuple(poly), degree=n, signature=(0, 0), disc=0,
                            basis_num=tuple(map(tuple, basis_num)),
                            basis_den=basis_den, label="")
        tab = K.mult_table()
        # Frobenius matrix on O/qO
        m = 1
        while q ** m < n:
            m += 1
        frob = []
        for i in range(n):
            e = [0] * n
            e[i] = 1
            v = _pow_vec_mod(e, q ** m, tab, q, n)
            frob.append(v)
        rad = nullspace_mod([[frob[i][j] for i in range(n)] for j in range(n)], q)
        # lattice I = radical lifts + q*O, rows over the order's coordinates
        rows = [list(v) for v in rad] + [[q * int(i == j) for j in range(n)]
                                         for i in range(n)]
        I = hnf_rows(rows)
        # U = {u : u*I <= q*I} = kernel of u -> (mult-by-u on I/qI)
        cols = []
        for i in range(n):
            e = [0] * n
            e[i] = 1
            entries = []
            for r in I:
                prod_vec = _elt_mult_vec(e, r, tab, n)
                coords = _solve_hnf(I, prod_vec)
                entries.extend(c % q for c in coords)
            cols.append(entries)
        U = nullspace_mod([[cols[i][j] for i in range(n)] for j in
                           range(len(cols[0]))], q)
        newrows = [[v * q for v in row] for row in basis_num]
        for u in U:
            # u/q in field coords: u over order coords -> power basis
            vec = [sum(u[i] * basis_num[i][j] for i in range(n)) for j in range(n)]
            newrows.append(vec)
        H = hnf_rows(newrows)
        g = basis_den * q
        for row in H:
            for v in row:
                g = gcd(g, v)
        new_num = [[v // g for v in row] for row in H]
        new_den = basis_den * q // g
        if new_den == basis_den and new_num == hnf_rows(basis_num):
            return basis_num, basis_den
        basis_num, basis_den = _one_first(new_num, new_den)
    raise MaximalityNotReached(f"maximal order at {q} not reached")


def _pow_vec_mod(vec, e, tab, q, n):
    out = [0] * n
    out[0] = 1  # representation of 1 (basis row 0 is 1)
    base = [v % q for v in vec]
    while e:
        if e & 1:
            out = _elt_mult_vec(out, base, tab, n, mod=q)
        base = _elt_mult_vec(base, base, tab, n, mod=q)
        e >>= 1
    return out


def _elt_mult_vec(a, b, tab, n, mod=None):
    out = [0] * n
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if not y:
                continue
            xy = x * y
            row = tab[i][j]
            for k in range(n):
                if row[k]:
                    out[k] += xy * row[k]
    if mod is not None:
        out = [v % mod for v in out]
    return out


def _mult_matrix_vec(r, tab, n):
    rows = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        rows.append(_elt_mult_vec(e, r, tab, n))
    return rows


def _solve_hnf(H, v):
    """Solve c * H = v exactly for integer c (H in row HNF).

    Rows below a pivot are zero at that pivot's column, so the coordinates
    read off top-down.
    """
    n = len(H)
    v = list(v)
    coords = [0] * n
    for i in range(n):
        c = next(j for j, x in enumerate(H[i]) if x)
        assert v[c] % H[i][c] == 0, "vector not in the lattice"
        q = v[c] // H[i][c]
        coords[i] = q
        if q:
            row = H[i]
            for j in range(len(v)):
                v[j] -= q * row[j]
    assert not any(v), "vector not in the lattice"
    return coords

# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True)
class Ideal:
    """Integral ideal as a full-rank row-HNF lattice over the integral basis."""

    K: NumberFieldData
    hnf: tuple[tuple[int, ...], ...]

    @property
    def norm(self) -> int:
        return prod(self.hnf[i][i] for i in range(len(self.hnf)))

    def contains(self, x: FieldElement) -> bool:
        if not x.is_integral:
            return False
        return in_row_lattice([list(r) for r in self.hnf], list(x.num))

    def __mul__(self, other: "Ideal") -> "Ideal":
        assert self.K is other.K
        n = self.K.degree
        tab = self.K.mult_table()
        rows = []
        for a in self.hnf:
            for b in other.hnf:
                rows.append(_elt_mult_vec(list(a), list(b), tab, n))
        return Ideal(self.K, tuple(map(tuple, hnf_rows(rows))))

    def __pow__(self, e: int) -> "Ideal":
        assert e >= 0
        result = unit_ideal(self.K)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def intersect_with_scaled(self, m: int) -> "Ideal":
        """self + m*O."""
        n = self.K.degree
        rows = [list(r) for r in self.hnf]
        rows += [[m * int(i == j) for j in range(n)] for i in range(n)]
        return Ideal(self.K, tuple(map(tuple, hnf_rows(rows))))

    def reduce_vec(self, vec) -> tuple[int, ...]:
        """Canonical representative of an integral coordinate vector mod self."""
        v = list(vec)
        for row in self.hnf:
            c = next(j for j, x in enumerate(row) if x)
            q = v[c] // row[c]
            if q:
                for j in range(len(v)):
                    v[j] -= q * row[j]
        return tuple(v)


def unit_ideal(K: NumberFieldData) -> Ideal:
    return Ideal(K, tuple(map(tuple, identity(K.degree))))


def ideal_from_generators(K: NumberFieldData, gens, extra_scalar: int | None = None) -> Ideal:
    """O-ideal generated by field elements (must be integral) and optionally
    a rational integer."""
    n = K.degree
    tab = K.mult_table()
    rows = []
    if extra_scalar:
        for i in range(n):
            e = [0] * n
            e[i] = extra_scalar
            rows.append(e)
    for g in gens:
        assert g.is_integral, "ideal generators must be integral"
        for i in range(n):
            e = [0] * n
            e[i] = 1
            rows.append(_elt_mult_vec(e, list(g.num), tab, n))
    H = hnf_rows(rows)
    assert len(H) == n, "ideal generated by zero"
    return Ideal(K, tuple(map(tuple, H)))


def principal_ideal(K: NumberFieldData, x: FieldElement) -> Ideal:
    if x.is_zero:
        raise ZeroElement("zero generates no ideal")
    assert x.is_integral
    return ideal_from_generators(K, [x])


# ---------------------------------------------------------------------------
# prime ideals


@dataclass(frozen=True)
class PrimeIdealData:
    """Prime ideal with two-element generators (ell, alpha) and local data."""

    K: NumberFieldData
    ell: int
    e: int
    f: int
    alpha: FieldElement          # second generator, (ell, alpha) = the prime
    lattice: Ideal
    index: int                   # position in the canonical factor list of ell
    _cache: dict = dc_field(default_factory=dict, compare=False, repr=False)

    @property
    def norm(self) -> int:
        return self.ell ** self.f

    def __repr__(self):
        return f"Prime({self.ell}:{self.index}, e={self.e}, f={self.f})"

    def key(self):
        return (self.norm, self.ell, self.index)

    # -- residue field machinery (O/p) --------------------------------------

    def _residue_data(self):
        data = self._cache.get("residue")
        if data is None:
            H = [list(r) for r in self.lattice.hnf]
            free_cols = [i for i in range(len(H)) if H[i][i] != 1]
            assert len(free_cols) == self.f
            data = (H, free_cols)
            self._cache["residue"] = data
        return data

    def reduce_element(self, x: FieldElement) -> tuple[int, ...]:
        """Canonical residue of an integral element modulo the prime."""
        assert x.is_integral or x.den % self.ell
        if not x.is_integral:
            inv = pow(x.den % self.ell, -1, self.ell)
            vec = [v * inv for v in x.num]
        else:
            vec = list(x.num)
        return self.lattice.reduce_vec(vec)

    def res_mul(self, a, b):
        n = self.K.degree
        return self.lattice.reduce_vec(
            _elt_mult_vec(list(a), list(b), self.K.mult_table(), n))

    def res_pow(self, a, e: int):
        n = self.K.degree
        one = [0] * n
        one[0] = 1
        result = tuple(one)
        base = tuple(a)
        while e:
            if e & 1:
                result = self.res_mul(result, base)
            base = self.res_mul(base, base)
            e >>= 1
        return result

    def res_is_zero(self, a) -> bool:
        return not any(a)

    def res_one(self):
        n = self.K.degree
        one = [0] * n
        one[0] = 1
        return self.lattice.reduce_vec(one)

    def res_inverse(self, a):
        # Fermat in the residue field of order ell^f
        q = self.norm
        return self.res_pow(a, q - 2)

    def residue_generator(self):
        """A generator of the multiplicative group of the residue field."""
        g = self._cache.get("res_gen")
        if g is not None:
            return g
        q = self.norm
        fac = factor_int(q - 1)
        one = self.res_one()
        n = self.K.degree
        for bound in range(1, 9):
            for vec in _small_vectors(n, bound):
                r = self.lattice.reduce_vec(list(vec))
                if self.res_is_zero(r):
                    continue
                if all(self.res_pow(r, (q - 1) // pp) != one for pp in fac):
                    self._cache["res_gen"] = r
                    return r
        raise AssertionError("no residue generator found")

    def res_dlog(self, a) -> int:
        """Discrete log in the residue field, base residue_generator (BSGS)."""
        q = self.norm
        g = self.residue_generator()
        m = isqrt(q - 1) + 1
        table = self._cache.get("bsgs")
        if table is None:
            table = {}
            cur = self.res_one()
            for j in range(m):
                table.setdefault(cur, j)
                cur = self.res_mul(cur, g)
            self._cache["bsgs"] = table
        # a * g^(-im) lookup
        gm_inv = self.res_inverse(self.res_pow(g, m))
        cur = tuple(a)
        for i in range(m + 1):
            if cur in table:
                return (i * m + table[cur]) % (q - 1)
            cur = self.res_mul(cur, gm_inv)
        raise AssertionError("dlog failed (element not coprime?)")

    # -- valuations ----------------------------------------------------------

    def anti_uniformizer(self) -> FieldElement:
        """tau with v_p(tau) = -1 and v >= 0 at every other prime."""
        tau = self._cache.get("tau")
        if tau is None:
            n = self.K.degree
            tab = self.K.mult_table()
            ell = self.ell
            # {u in O/ell : u * p <= ell O}
            conds = []
            for r in self.lattice.hnf:
                # coords of e_i * r
                mat = []
                for i in range(n):
                    e = [0] * n
                    e[i] = 1
                    mat.append(_elt_mult_vec(e, list(r), tab, n))
                conds.extend([[mat[i][k] % ell for i in range(n)]
                              for k in range(n)])
            ker = nullspace_mod(conds, ell)
            u = next((v for v in ker if any(x % ell for x in v)), None)
            assert u is not None, "prime has no anti-uniformizer (not prime?)"
            tau = FieldElement(self.K, tuple(int(c) for c in u), ell).normalize()
            self._cache["tau"] = tau
        return tau

    def valuation_int_vec(self, vec) -> int:
        """Valuation at this prime of an integral element given by coords."""
        x = FieldElement(self.K, tuple(vec), 1)
        if any(self.lattice.reduce_vec(list(vec))):
            return 0
        tau = self.anti_uniformizer()
        v = 0
        while True:
            x = x * tau
            v += 1
            if not x.is_integral:
                return v
            if any(self.lattice.reduce_vec(list(x.num))):
                return v

    def valuation_element(self, x: FieldElement) -> int:
        if x.is_zero:
            raise ZeroElement("valuation of zero is infinite")
        vden = 0
        d = x.den
        while d % self.ell == 0:
            d //= self.ell
            vden += 1
        return self.valuation_int_vec(list(x.num)) - self.e * vden

    def uniformizer(self) -> FieldElement:
        """pi with v_p(pi) = 1 (deterministic small search in the lattice)."""
        pi = self._cache.get("pi")
        if pi is None:
            rows = [list(r) for r in self.lattice.hnf]
            n = self.K.degree
            for bound in (1, 2, 3):
                for combo in _small_vectors(len(rows), bound):
                    vec = [sum(combo[i] * rows[i][j] for i in range(len(rows)))
                           for j in range(n)]
                    if not any(vec):
                        continue
                    if self.valuation_int_vec(vec) == 1:
                        pi = FieldElement(self.K, tuple(vec), 1)
                        self._cache["pi"] = pi
                        return pi
            raise AssertionError("no uniformizer found")
        return pi


def _small_vectors(n, bound):
    """Deterministic enumeration of small integer vectors, nonzero first coords last."""
    rng = range(-bound, bound + 1)
    for vec in itertools.product(rng, repeat=n):
        if any(vec):
            yield vec


def factor_prime(K: NumberFieldData, ell: int) -> list[PrimeIdealData]:
    """Sorted factorization of a rational prime in K.

    Fast path via factoring the defining polynomial when ell does not
    divide the index of Z[theta]; otherwise the quotient algebra O/ell is
    split into its local components (nilradical by Frobenius kernels, then
    idempotent eigenspace splitting of the etale part).
    """
    cached = K._cache.setdefault("primes", {})
    if ell in cached:
        return cached[ell]
    n = K.degree
    if n == 1:
        lat = Ideal(K, ((ell,),))
        out = [PrimeIdealData(K=K, ell=ell, e=1, f=1,
                              alpha=K.from_rational(ell), lattice=lat, index=0)]
        cached[ell] = out
        return out
    raw = []
    if K.index % ell:
        for g, mult in factor_poly_mod(list(K.poly), ell):
            alpha = K.from_power_basis([c if c <= ell // 2 else c - ell for c in g])
            lat = ideal_from_generators(K, [alpha], extra_scalar=ell)
            raw.append((len(g) - 1, mult, alpha, lat))
    else:
        raw = _factor_via_algebra(K, ell)
    primes = []
    for fdeg, e, alpha, lat in raw:
        primes.append((fdeg, e, alpha, lat))
    # canonical order: ascending norm, then lexicographic two-element rep
    primes.sort(key=lambda t: (t[0], _alpha_key(t[2])))
    out = []
    for idx, (fdeg, e, alpha, lat) in enumerate(primes):
        out.append(PrimeIdealData(K=K, ell=ell, e=e, f=fdeg, alpha=alpha,
                                  lattice=lat, index=idx))
    assert sum(p.e * p.f for p in out) == n, "ramification bookkeeping failed"
    cached[ell] = out
    return out


def _alpha_key(alpha: FieldElement):
    return tuple(alpha.to_power_basis())


def _factor_via_algebra(K: NumberFieldData, ell: int):
    """Split O/ell into local components; return (f, e, alpha, lattice) tuples."""
    n = K.degree
    tab = K.mult_table()
    m = 1
    while ell ** m < n:
        m += 1
    frob = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        frob.append(_pow_vec_mod(e, ell ** m, tab, ell, n))
    nilrad = nullspace_mod([[frob[i][j] for i in range(n)] for j in range(n)], ell)
    # quotient algebra B = A / nilradical: basis = complement coordinates
    comps = _split_etale(K, ell, nilrad)
    out = []
    for comp_basis in comps:
        # maximal ideal: nilradical + other components; easier: the prime is
        # ell*O + kernel of the projection onto this component.  The kernel is
        # spanned by nilradical lifts and the OTHER components' lifts.
        others = [b for b2 in comps if b2 is not comp_basis for b in b2]
        rows = [[v % ell for v in b] for b in nilrad]
        rows += [[v % ell for v in b] for b in others]
        rows += [[ell * int(i == j) for j in range(n)] for i in range(n)]
        lat = Ideal(K, tuple(map(tuple, hnf_rows(rows))))
        fdeg = len(comp_basis)
        prime = PrimeIdealData(K=K, ell=ell, e=0, f=fdeg, alpha=K.zero(),
                               lattice=lat, index=0)
        e_val = prime.valuation_int_vec([ell * int(i == 0) for i in range(n)])
        # alpha: element of p with v_p = 1 and v = 0 at the other primes of ell
        out.append((fdeg, e_val, None, lat))
    # second generators chosen after all lattices are known
    finished = []
    lats = [lat for (_, _, _, lat) in out]
    for k, (fdeg, e_val, _, lat) in enumerate(out):
        alpha = _second_generator(K, ell, lat, [l2 for j, l2 in enumerate(lats) if j != k])
        finished.append((fdeg, e_val, alpha, lat))
    return finished


def _second_generator(K: NumberFieldData, ell: int, lat: Ideal, others):
    """alpha in the prime with v = 1 there and v = 0 at the other primes of ell."""
    n = K.degree
    rows = [list(r) for r in lat.hnf]
    probe = PrimeIdealData(K=K, ell=ell, e=0, f=0, alpha=K.zero(),
                           lattice=lat, index=0)
    for bound in (1, 2, 3):
        for combo in _small_vectors(len(rows), bound):
            vec = [sum(combo[i] * rows[i][j] for i in range(len(rows)))
                   for j in range(n)]
            if not any(vec):
                continue
            if probe.valuation_int_vec(vec) != 1:
                continue
            if any(not any(o.reduce_vec(vec)) for o in others):
                continue
            return FieldElement(K, tuple(vec), 1)
    raise AssertionError("no two-element generator found")


def _split_etale(K: NumberFieldData, ell: int, nilrad):
    """Component bases (lifted coords mod ell) of the etale algebra O/ell/nil."""
    n = K.degree
    tab = K.mult_table()
    # quotient coordinates: reduce modulo the nilradical row space
    nil_rows, nil_pivots = (rref_mod([list(v) for v in nilrad], ell)
                            if nilrad else ([], []))
    free_cols = [c for c in range(n) if c not in nil_pivots]

    def project(vec):
        """Reduce mod the nilradical rows, keep free coordinates."""
        v = [x % ell for x in vec]
        for row, c in zip(nil_rows, nil_pivots):
            if v[c]:
                f = v[c]
                v = [(a - f * b) % ell for a, b in zip(v, row)]
        return tuple(v[c] for c in free_cols)

    def lift(coords):
        v = [0] * n
        for c, x in zip(free_cols, coords):
            v[c] = x % ell
        return v

    dim = len(free_cols)
    # multiplication in the quotient through lifts
    def qmul(a, b):
        return project(_elt_mult_vec(lift(a), lift(b), tab, n, mod=ell))

    def qpow(a, e):
        res = project([1 if i == 0 else 0 for i in range(n)])
        base = a
        while e:
            if e & 1:
                res = qmul(res, base)
            base = qmul(base, base)
            e >>= 1
        return res

    # split recursively by Frobenius-fixed non-scalar elements
    basis0 = [project(lift([0] * i + [1] + [0] * (dim - i - 1))) for i in range(dim)]
    one = project([1 if i == 0 else 0 for i in range(n)])

    def split(space):
        """space: list of quotient-coord vectors spanning a subalgebra with 1."""
        sdim = len(space)
        if sdim == 1:
            return [space]
        # Frobenius-fixed subalgebra inside this component
        frob_rows = []
        for b in space:
            fb = qpow(b, ell)
            frob_rows.append([(x - y) % ell for x, y in zip(fb, b)])
        # solve sum c_i (frob(b_i) - b_i) = 0 over the space coordinates
        A = [[frob_rows[i][j] for i in range(sdim)] for j in range(dim)]
        ker = nullspace_mod(A, ell)
        if len(ker) <= 1:
            return [space]
        # find a kernel combo that is not scalar (independent of 1 in space coords)
        one_in = _express_over(space, one, ell, dim)
        for co in ker:
            vec = [sum(co[i] * space[i][j] for i in range(sdim)) % ell
                   for j in range(dim)]
            if one_in is not None and _is_multiple(vec, [x % ell for x in
                                                         _combine(space, one_in, ell, dim)], ell):
                continue
            # eigen-split by the minimal polynomial of vec
            pieces = _eigen_split(space, vec, qmul, ell, dim)
            if len(pieces) > 1:
                return [piece for p2 in pieces for piece in split(p2)]
        return [space]

    comps = split(basis0)
    return [[lift(b) for b in comp] for comp in comps]


def _express_over(space, target, ell, dim):
    A = [[space[i][j] for i in range(len(space))] for j in range(dim)]
    from .abgroup import solve_mod
    return solve_mod(A, list(target), ell)


def _combine(space, coeffs, ell, dim):
    return [sum(coeffs[i] * space[i][j] for i in range(len(space))) % ell
            for j in range(dim)]


def _is_multiple(v, w, ell):
    """v = c*w mod ell for some scalar c?"""
    piv = next((i for i, x in enumerate(w) if x % ell), None)
    if piv is None:
        return not any(x % ell for x in v)
    c = (v[piv] * pow(w[piv], -1, ell)) % ell
    return all((x - c * y) % ell == 0 for x, y in zip(v, w))


def _eigen_split(space, vec, qmul, ell, dim):
    """Split a commutative algebra by the eigenspaces of multiplication by vec."""
    sdim = len(space)
    # matrix of multiplication by vec on the space
    cols = []
    for b in space:
        prod_v = qmul(tuple(b), tuple(vec))
        co = _express_over(space, prod_v, ell, dim)
        assert co is not None
        cols.append(co)
    Mmat = [[cols[j][i] % ell for j in range(sdim)] for i in range(sdim)]
    # characteristic roots via trying all scalars (ell is small in practice)
    pieces = []
    for lam in range(ell):
        shifted = [[(Mmat[i][j] - (lam if i == j else 0)) % ell
                    for j in range(sdim)] for i in range(sdim)]
        ker = nullspace_mod(shifted, ell)
        if ker:
            piece = [_combine(space, co, ell, dim) for co in ker]
            pieces.append([tuple(v) for v in piece])
    covered = sum(len(p) for p in pieces)
    if covered == sdim and len(pieces) > 1:
        return pieces
    return [space]

# ---------------------------------------------------------------------------
# public valuation / norm operations and prime enumeration


def valuation(K: NumberFieldData, target, prime: PrimeIdealData) -> int:
    """Exact valuation at a prime of a field element or an ideal."""
    if isinstance(target, FieldElement):
        return prime.valuation_element(target)
    if isinstance(target, Ideal):
        return min(prime.valuation_int_vec(list(row)) for row in target.hnf)
    raise TypeError("valuation target must be an element or an ideal")


def ideal_norm(K: NumberFieldData, I: Ideal) -> int:
    return I.norm


def primes_up_to(K: NumberFieldData, X: int):
    """All primes of K with norm <= X, ascending norm, deterministic order."""
    assert X >= 2
    out = []
    for ell in sympy.primerange(2, X + 1):
        for p in factor_prime(K, int(ell)):
            if p.norm <= X:
                out.append(p)
    out.sort(key=lambda p: p.key())
    yield from out


def prime_above(K: NumberFieldData, ell: int, index: int = 0) -> PrimeIdealData:
    return factor_prime(K, ell)[index]


def primes_above_element(K: NumberFieldData, x: FieldElement):
    """Support of the principal fractional ideal (x): [(prime, valuation)]."""
    if x.is_zero:
        raise ZeroElement("zero has no divisor")
    nrm = x.norm()
    support = set(factor_int(nrm.numerator)) | set(factor_int(nrm.denominator)) \
        | set(factor_int(x.den))
    out = []
    for ell in sorted(support):
        for p in factor_prime(K, ell):
            v = p.valuation_element(x)
            if v:
                out.append((p, v))
    return out


# ---------------------------------------------------------------------------
# polynomials over K (coefficients ascending, FieldElement entries)


def kpoly_trim(c):
    c = list(c)
    while c and c[-1].is_zero:
        c.pop()
    return c


def kpoly_mul(a, b, K):
    if not a or not b:
        return []
    out = [K.zero() for _ in range(len(a) + len(b) - 1)]
    for i, x in enumerate(a):
        if x.is_zero:
            continue
        for j, y in enumerate(b):
            if not y.is_zero:
                out[i + j] = out[i + j] + x * y
    return out


def kpoly_divmod(a, b, K):
    """Division with remainder; b need not be monic (leading coeff inverted)."""
    a = [c for c in a]
    b = kpoly_trim(b)
    inv = b[-1].inverse()
    q = [K.zero() for _ in range(max(0, len(a) - len(b) + 1))]
    while len(kpoly_trim(a)) >= len(b):
        a = kpoly_trim(a)
        c = a[-1] * inv
        d = len(a) - len(b)
        q[d] = q[d] + c
        for i in range(len(b)):
            a[d + i] = a[d + i] - c * b[i]
        a.pop()
    return q, kpoly_trim(a)


def kpoly_gcd(a, b, K):
    a, b = kpoly_trim(a), kpoly_trim(b)
    while b:
        _, r = kpoly_divmod(a, b, K)
        a, b = b, r
    if a:
        inv = a[-1].inverse()
        a = [c * inv for c in a]
    return a


def kpoly_eval(a, x, K):
    acc = K.zero()
    for c in reversed(a):
        acc = acc * x + c
    return acc


def kpoly_from_q(poly, K):
    return [K.from_rational(c) for c in poly]


def _kpoly_to_xz(h, K):
    """K[Z] -> sympy polynomial in (x, z) via power-basis coordinates."""
    expr = sympy.Integer(0)
    for i, c in enumerate(h):
        cp = c.to_power_basis()
        cexpr = sum(sympy.Rational(v.numerator, v.denominator) * _X ** j
                    for j, v in enumerate(cp))
        expr += cexpr * _Z ** i
    return expr


def kpoly_norm_resultant(h, K, shift: int = 0):
    """Res_x(f(x), h(z - shift*x)) as an integer-coefficient poly in z
    (assumes the result clears denominators; returns ascending coeffs as
    Fractions)."""
    fx = sum(sympy.Integer(c) * _X ** i for i, c in enumerate(K.poly))
    if shift:
        hz = [c for c in h]
        # substitute z -> z - shift*x by computing h at (z - s x)
        expr = sympy.Integer(0)
        for i, c in enumerate(h):
            cp = c.to_power_basis()
            cexpr = sum(sympy.Rational(v.numerator, v.denominator) * _X ** j
                        for j, v in enumerate(cp))
            expr += cexpr * (_Z - shift * _X) ** i
    else:
        expr = _kpoly_to_xz(h, K)
    res = sympy.resultant(sympy.Poly(fx, _X), sympy.Poly(sympy.expand(expr), _X,
                                                         domain=sympy.QQ[_Z]))
    poly = sympy.Poly(res, _Z)
    return [Fraction(sympy.Rational(c).p, sympy.Rational(c).q)
            for c in reversed(poly.all_coeffs())]


def kpoly_roots(h, K, max_shift: int = 12):
    """Roots in K of a polynomial over K (Trager's method)."""
    h = kpoly_trim(h)
    if len(h) <= 1:
        return []
    inv = h[-1].inverse()
    h = [c * inv for c in h]
    for s in range(max_shift):
        norm = kpoly_norm_resultant(h, K, shift=s)
        den = 1
        for c in norm:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = poly_trim([int(c * den) for c in norm])
        P = sympy.Poly(list(reversed(ints)), _Z)
        if sympy.degree(sympy.gcd(P, P.diff(_Z)), _Z) > 0:
            continue  # not squarefree: bump the shift
        roots = []
        _, factors = P.factor_list()
        for fac, _mult in factors:
            if fac.degree() > K.degree:
                continue
            # gcd over K of h(z) and fac(z + s*theta) picks out the K-factor
            fac_coeffs = [Fraction(sympy.Rational(c).p, sympy.Rational(c).q)
                          for c in reversed(fac.all_coeffs())]
            shifted = _kpoly_shift(kpoly_from_q(fac_coeffs, K), K.gen() * s, K)
            g = kpoly_gcd(h, shifted, K)
            if len(g) == 2:
                roots.append((K.zero() - g[0]) * g[1].inverse())
        # verify
        roots = [r for r in roots if kpoly_eval(h, r, K).is_zero]
        return roots
    raise GalresError("no squarefree shift found for root extraction")


def _kpoly_shift(h, delta: FieldElement, K):
    """h(z + delta), exact."""
    result = [K.zero()]
    power = [K.one()]  # (z + delta)^0
    for i, c in enumerate(h):
        if not c.is_zero:
            term = [c * pc for pc in power]
            result = _kpoly_add(result, term, K)
        if i + 1 < len(h):
            power = kpoly_mul(power, [delta, K.one()], K)
    return kpoly_trim(result)


def _kpoly_add(a, b, K):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else K.zero()
        y = b[i] if i < len(b) else K.zero()
        out.append(x + y)
    return out


def is_pth_power(K: NumberFieldData, u: FieldElement, p: int,
                 probes: int = 24) -> FieldElement | None:
    """Exact p-th root of u in K, or None.

    Cheap local prefilter first: at split primes away from everything the
    residue must be a p-th power; a single failure is a proof of failure.
    Survivors get the exact Trager root extraction.
    """
    if u.is_zero:
        raise ZeroElement("zero is not tested for power classes")
    checked = 0
    nrm = u.norm()
    bad = abs(K.disc * nrm.numerator * nrm.denominator * u.den * p)
    ell = 2
    while checked < probes:
        ell = int(sympy.nextprime(ell))
        if bad % ell == 0:
            continue
        for pr in factor_prime(K, ell):
            q = pr.norm
            if (q - 1) % p:
                continue
            r = pr.reduce_element(u)
            if pr.res_pow(r, (q - 1) // p) != pr.res_one():
                return None
            checked += 1
            if checked >= probes:
                break
    roots = kpoly_roots([K.zero() - u] + [K.zero()] * (p - 1) + [K.one()], K)
    return roots[0] if roots else None


# ---------------------------------------------------------------------------
# compositum, embeddings, Kummer extensions


def field_roots_of(K_small: NumberFieldData, L: NumberFieldData):
    """Roots in L of the defining polynomial of K_small (the embeddings)."""
    return kpoly_roots(kpoly_from_q(list(K_small.poly), L), L)


def embed_element(x: FieldElement, root: FieldElement, L: NumberFieldData) -> FieldElement:
    """Image of x in L sending the generator of its field to ``root``."""
    acc = L.zero()
    for c in reversed(x.to_power_basis()):
        acc = acc * root + L.from_rational(c)
    return acc


def compositum_with_poly(K: NumberFieldData, gpoly, label: str = "",
                         degree_cap: int = 16):
    """Compositum L = K(beta) for beta a root of gpoly (irreducibility over
    K is NOT assumed: an irreducible K-factor is chosen deterministically).

    Returns (L, theta_in_L, beta_in_L).
    """
    return _compositum_with_kpoly(K, kpoly_from_q(gpoly, K), label=label,
                                  degree_cap=degree_cap)


def _kfactor_irreducible(h, K):
    """One irreducible K-factor of h (monic), deterministically the one whose
    norm-factor sorts first."""
    h = kpoly_trim(h)
    inv = h[-1].inverse()
    h = [c * inv for c in h]
    for s in range(16):
        norm = kpoly_norm_resultant(h, K, shift=s)
        den = 1
        for c in norm:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = poly_trim([int(c * den) for c in norm])
        P = sympy.Poly(list(reversed(ints)), _Z)
        if sympy.degree(sympy.gcd(P, P.diff(_Z)), _Z) > 0:
            continue
        _, factors = P.factor_list()
        factors = sorted((fac for fac, _ in factors), key=lambda F: (
            F.degree(), [sympy.Rational(c) for c in F.all_coeffs()].__repr__()))
        for fac in factors:
            fc = [Fraction(sympy.Rational(c).p, sympy.Rational(c).q)
                  for c in reversed(fac.monic().all_coeffs())]
            shifted = _kpoly_shift(kpoly_from_q(fc, K), K.gen() * s, K)
            g = kpoly_gcd(h, shifted, K)
            if 1 < len(g) <= len(h):
                return g
    raise GalresError("K-factorization found no factor")


def kummer_extension(K: NumberFieldData, d: FieldElement, p: int,
                     label: str = "", degree_cap: int = 16):
    """K(d^(1/p)) as an absolute field, with the embedding data.

    Returns (L, theta_in_L, root_in_L).  Requires d not to be a p-th power;
    for odd p the field must contain the p-th roots of unity (so that the
    extension is Galois of degree p).
    """
    if is_pth_power(K, d, p) is not None:
        raise IsPthPower("Kummer generator is a p-th power")
    if p > 2:
        zeta = kpoly_roots(kpoly_from_q(_cyclotomic_poly(p), K), K)
        if not zeta:
            raise MissingRootOfUnity(
                f"K lacks the {p}-th roots of unity needed for a Kummer extension")
    # clear denominators by a p-th power so the ring of integers sees d
    if d.den != 1:
        d = d * K.from_rational(d.den ** p)
        assert d.is_integral
    gK = [K.zero() - d] + [K.zero()] * (p - 1) + [K.one()]
    L, theta_L, root_L = _compositum_with_kpoly(K, gK, label=label,
                                                degree_cap=degree_cap)
    return L, theta_L, root_L


def _compositum_with_kpoly(K: NumberFieldData, gK, label: str = "",
                           degree_cap: int = 16):
    """Compositum construction when the auxiliary polynomial already has
    K-coefficients (Z^p - d and friends)."""
    factor = _kfactor_irreducible(gK, K)
    m = len(factor) - 1
    n = K.degree
    if n * m > degree_cap:
        raise MaximalityNotReached(
            f"extension degree {n * m} exceeds cap {degree_cap}")
    if m == 1:
        beta = (K.zero() - factor[0]) * factor[1].inverse()
        return K, K.gen(), beta
    for s in range(0, 24):
        norm = kpoly_norm_resultant(factor, K, shift=s)
        den = 1
        for c in norm:
            den = den * c.denominator // gcd(den, c.denominator)
        if den != 1:
            continue
        ints = poly_trim([int(c) for c in norm])
        if abs(ints[-1]) != 1:
            continue
        if ints[-1] < 0:
            ints = [-c for c in ints]
        P = sympy.Poly(list(reversed(ints)), _Z)
        if sympy.degree(sympy.gcd(P, P.diff(_Z)), _Z) > 0:
            continue
        if not P.is_irreducible:
            continue
        L = build_field(ints, label=label, degree_cap=degree_cap)
        gamma = L.gen()
        fL = kpoly_from_q(list(K.poly), L)
        shifted = _compose_general(factor, gamma, s, K, L)
        g = kpoly_gcd(fL, shifted, L)
        if len(g) != 2:
            continue
        theta_L = (L.zero() - g[0]) * g[1].inverse()
        beta_L = gamma - theta_L * s
        return L, theta_L, beta_L
    raise GalresError("no good primitive shift found for the extension")


def _compose_general(factor, gamma, s, K, L):
    """sum_i c_i(X) * (gamma - s X)^i in L[X], where c_i are the power-basis
    polynomials of the K-coefficients of ``factor``."""
    out = [L.zero()]
    gz = [gamma, L.from_rational(-s)]
    power = [L.one()]
    for i, c in enumerate(factor):
        cp = c.to_power_basis()
        cX = [L.from_rational(v) for v in cp]
        term = kpoly_mul(cX, power, L)
        out = _kpoly_add(out, term, L)
        if i + 1 < len(factor):
            power = kpoly_mul(power, gz, L)
    return kpoly_trim(out)


def _cyclotomic_poly(p: int):
    return [1] * p  # 1 + x + ... + x^(p-1) for prime p


def primes_above_in_extension(K: NumberFieldData, L: NumberFieldData,
                              theta_L: FieldElement, prime: PrimeIdealData):
    """Primes of L above a prime of K, via the recorded embedding."""
    out = []
    alpha_L = embed_element(prime.alpha, theta_L, L)
    for P in factor_prime(L, prime.ell):
        if P.valuation_element(alpha_L) > 0:
            out.append(P)
    return out


def delta_p(K: NumberFieldData, prime: PrimeIdealData, p: int,
            degree_cap: int = 16) -> int:
    """1 when the completion at the prime contains the p-th roots of unity.

    For p = 2 this is always true; away from p it reduces to norm = 1 mod p;
    above p the prime is split in the compositum with the p-th cyclotomic
    polynomial and the relative (e, f) are inspected.
    """
    if p == 2:
        return 1
    if prime.ell != p:
        return 1 if prime.norm % p == 1 else 0
    key = ("zeta_compositum", p)
    data = K._cache.get(key)
    if data is None:
        data = compositum_with_poly(K, _cyclotomic_poly(p),
                                    label=f"{K.label}(zeta{p})",
                                    degree_cap=degree_cap)
        K._cache[key] = data
    L, theta_L, _ = data
    if L is K:
        return 1
    for P in primes_above_in_extension(K, L, theta_L, prime):
        if P.e == prime.e and P.f == prime.f:
            return 1
    return 0
