"""Truncated mod-p power series in noncommuting variables.

A free pro-p group embeds into the algebra of power series over F_p in d
noncommuting variables by sending the i-th generator to 1 + X_i.  Working
modulo total degree n decides equality modulo the n-th term of the
Zassenhaus filtration (the filtration coincides with the dimension
subgroups, so membership is read off from the lowest-degree term of
image - 1).  Words are stored unreduced; every identity is checked in the
algebra, never by free-group rewriting.

Degree-2 data of a word in two generators is what the one-relator test
consumes: w = x^(pa) y^(pb) [x,y]^c modulo the third filtration step, and
the quotient by the relator is Demushkin exactly when a = b = 0 and c is
prime to p (for p = 2 the same reading is applied verbatim; certification
of p = 2 instances is routed through the subfield rank criterion instead).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from . import GalresError


class NotInF2(GalresError):
    """Word does not lie in the second Zassenhaus filtration step."""


class BoundExceeded(GalresError):
    """Requested truncation/variable count exceeds the configured budget."""


TRUNC_CAP = 6


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True)
class GroupWord:
    """Word in the free group: sequence of (generator index, exponent)."""

    letters: tuple[tuple[int, int], ...]

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def __pow__(self, n: int) -> "GroupWord":
        if n == 0:
            return GroupWord(())
        base = self if n > 0 else self.inverse()
        return GroupWord(base.letters * abs(n))

    @property
    def support(self) -> set[int]:
        return {g for g, _ in self.letters}

    def is_identity_word(self) -> bool:
        return not self.letters


def gen(i: int) -> GroupWord:
    return GroupWord(((i, 1),))


def commutator(u: GroupWord, v: GroupWord) -> GroupWord:
    return u.inverse() * v.inverse() * u * v


def parse_word(text: str) -> GroupWord:
    """Parse ``x``, ``y`` (capitals = inverses), ``[u,v]`` commutators,
    ``^k`` powers, ``*`` or juxtaposition for products.

    Generators beyond the second may be written z, w (letters map to
    indices in order x, y, z, w).
    """
    pos = 0
    names = "xyzw"

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos] in " \t*.·":
            pos += 1

    def parse_atom() -> GroupWord:
        nonlocal pos
        skip_ws()
        if pos >= len(text):
            raise ValueError("unexpected end of word")
        ch = text[pos]
        if ch == "(":
            pos += 1
            w = parse_product(")")
            pos += 1
            return w
        if ch == "[":
            pos += 1
            u = parse_product(",")
            pos += 1
            v = parse_product("]")
            pos += 1
            return commutator(u, v)
        low = ch.lower()
        if low in names:
            pos += 1
            g = GroupWord(((names.index(low), 1),))
            return g.inverse() if ch.isupper() else g
        raise ValueError(f"unexpected character {ch!r} in word")

    def parse_power() -> GroupWord:
        nonlocal pos
        w = parse_atom()
        skip_ws()
        if pos < len(text) and text[pos] == "^":
            pos += 1
            skip_ws()
            start = pos
            if pos < len(text) and text[pos] in "+-":
                pos += 1
            while pos < len(text) and text[pos].isdigit():
                pos += 1
            if start == pos:
                raise ValueError("missing exponent after ^")
            w = w ** int(text[start:pos])
        return w

    def parse_product(closer: str | None = None) -> GroupWord:
        nonlocal pos
        out = GroupWord(())
        while True:
            skip_ws()
            if pos >= len(text) or (closer and text[pos] == closer):
                break
            out = out * parse_power()
        if closer and (pos >= len(text) or text[pos] != closer):
            raise ValueError(f"expected {closer!r}")
        return out

    w = parse_product(None)
    if pos != len(text):
        raise ValueError("trailing input in word")
    return w


# ---------------------------------------------------------------------------
# the truncated algebra


@dataclass(frozen=True)
class TruncatedSeries:
    """Element of F_p<X_1..X_d> truncated below total degree ``trunc``.

    ``coeffs`` maps words (tuples of variable indices, length < trunc) to
    residues in {1, .., p-1}; absent words have coefficient zero.
    """

    p: int
    nvars: int
    trunc: int
    coeffs: dict[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        for w, c in self.coeffs.items():
            assert 0 < c < self.p and len(w) < self.trunc

    def coeff(self, word: tuple[int, ...]) -> int:
        return self.coeffs.get(tuple(word), 0)

    def __eq__(self, other) -> bool:
        return (isinstance(other, TruncatedSeries)
                and (self.p, self.nvars, self.trunc) == (other.p, other.nvars, other.trunc)
                and self.coeffs == other.coeffs)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        assert (self.p, self.nvars, self.trunc) == (other.p, other.nvars, other.trunc)
        n, p = self.trunc, self.p
        out: dict[tuple[int, ...], int] = {}
        for w1, c1 in self.coeffs.items():
            for w2, c2 in other.coeffs.items():
                if len(w1) + len(w2) >= n:
                    continue
                w = w1 + w2
                v = (out.get(w, 0) + c1 * c2) % p
                if v:
                    out[w] = v
                elif w in out:
                    del out[w]
        return TruncatedSeries(p, self.nvars, n, out)

    def __pow__(self, e: int) -> "TruncatedSeries":
        if e < 0:
            return self.inverse() ** (-e)
        result = one(self.p, self.nvars, self.trunc)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> "TruncatedSeries":
        """Inverse of a series with constant term 1 (geometric series)."""
        assert self.coeff(()) == 1, "only unit-constant series are inverted"
        n = self.trunc
        u = TruncatedSeries(self.p, self.nvars, n,
                            {w: c for w, c in self.coeffs.items() if w})
        result = one(self.p, self.nvars, n)
        term = one(self.p, self.nvars, n)
        for k in range(1, n):
            term = term * u
            if not term.coeffs:
                break
            result = _add(result, _neg_pow_scale(term, k))
        return result

    def low_degree(self) -> int | None:
        """Smallest degree with a nonzero coefficient, None if zero series."""
        if not self.coeffs:
            return None
        return min(len(w) for w in self.coeffs)

    def homogeneous_part(self, k: int) -> dict[tuple[int, ...], int]:
        return {w: c for w, c in self.coeffs.items() if len(w) == k}


def one(p: int, nvars: int, trunc: int) -> TruncatedSeries:
    return TruncatedSeries(p, nvars, trunc, {(): 1})


def _add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    out = dict(a.coeffs)
    for w, c in b.coeffs.items():
        v = (out.get(w, 0) + c) % a.p
        if v:
            out[w] = v
        elif w in out:
            del out[w]
    return TruncatedSeries(a.p, a.nvars, a.trunc, out)


def _neg_pow_scale(t: TruncatedSeries, sign_exp: int) -> TruncatedSeries:
    """(-1)^sign_exp * t ... with sign_exp counting the geometric series step."""
    if sign_exp % 2 == 0:
        return t
    return TruncatedSeries(t.p, t.nvars, t.trunc,
                           {w: (-c) % t.p for w, c in t.coeffs.items()})


def _sub(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return _add(a, _neg_pow_scale(b, 1))


# ---------------------------------------------------------------------------
# the embedding and filtration readings


def _generator_power(i: int, e: int, p: int, nvars: int, trunc: int) -> TruncatedSeries:
    """(1 + X_i)^e for any integer e, via generalized binomials."""
    coeffs: dict[tuple[int, ...], int] = {}
    for k in range(trunc):
        c = comb_general(e, k) % p
        if c:
            coeffs[(i,) * k] = c
    return TruncatedSeries(p, nvars, trunc, coeffs)


def comb_general(e: int, k: int) -> int:
    """Binomial coefficient e over k for arbitrary integer e."""
    if k == 0:
        return 1
    if e >= 0:
        return comb(e, k) if k <= e else 0
    num = 1
    for j in range(k):
        num *= e - j
    den = 1
    for j in range(1, k + 1):
        den *= j
    return num // den


def magnus_image(w: GroupWord, p: int, n: int, nvars: int | None = None) -> TruncatedSeries:
    """Image of a word under generator -> 1 + X, truncated below degree n."""
    if n < 2:
        raise ValueError("truncation must be at least 2")
    if n > TRUNC_CAP:
        raise BoundExceeded(f"truncation {n} exceeds cap {TRUNC_CAP}")
    d = nvars if nvars is not None else max(w.support, default=1) + 1
    out = one(p, d, n)
    for g, e in w.letters:
        if g >= d:
            raise ValueError("generator index beyond declared variable count")
        out = out * _generator_power(g, e, p, d, n)
    return out


def filtration_level(w: GroupWord, p: int, n_max: int = TRUNC_CAP,
                     nvars: int | None = None) -> int | str:
    """Smallest k < n_max such that image(w) - 1 has a degree-k term.

    Returns the string ">= n_max" when no such k exists below the cap
    (in particular for the identity).  Membership in the k-th filtration
    step is equivalent to level >= k.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    s = magnus_image(w, p, n_max, nvars=nvars)
    body = {word: c for word, c in s.coeffs.items() if word}
    if not body:
        return f">= {n_max}"
    return min(len(word) for word in body)


@dataclass(frozen=True)
class F2Coordinates:
    """Degree-2 reading of a word in the second filtration step (d = 2):
    w = x^(pa) y^(pb) [x,y]^c modulo the third step."""

    a: int
    b: int
    c: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)


def f2_coordinates(w: GroupWord, p: int) -> F2Coordinates:
    """Coordinates (a, b, c) of a rank-2 word modulo the third filtration step.

    For odd p the generator p-th powers sit in degree p >= 3, so a = b = 0
    by convention and c is the XY coefficient.  For p = 2 the X^2 and Y^2
    coefficients give a and b, and the XY and YX coefficients must agree.
    """
    if w.support - {0, 1}:
        raise ValueError("f2 coordinates are defined for words in two generators")
    s = magnus_image(w, p, 3, nvars=2)
    if any(len(word) == 1 and c for word, c in s.coeffs.items()):
        raise NotInF2("word has nonzero degree-1 terms")
    xy = s.coeff((0, 1))
    yx = s.coeff((1, 0))
    xx = s.coeff((0, 0))
    yy = s.coeff((1, 1))
    if p == 2:
        if xy != yx:
            raise NotInF2("inconsistent degree-2 data")  # cannot happen for group words
        return F2Coordinates(xx, yy, xy)
    if (xy + yx) % p or xx or yy:
        raise NotInF2("degree-2 part is not a commutator multiple")
    return F2Coordinates(0, 0, xy % p)


def demushkin_test(r: GroupWord, p: int) -> str:
    """Classify a rank-2 relator: ``Demushkin(i)`` when the word is the i-th
    power of the basic commutator modulo the third filtration step with i
    prime to p, ``NotDemushkin`` otherwise.  Raises NotInF2 when the word is
    not in the second step.
    """
    coords = f2_coordinates(r, p)
    a, b, c = coords.as_tuple()
    if a == 0 and b == 0 and c % p and gcd_int(c, p) == 1:
        return f"Demushkin({c % p})"
    return "NotDemushkin"


def gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def frobenius_square(j: int, p: int) -> F2Coordinates:
    """Coordinates of ([x,y][x^-1,y^-1])^j, the square of a Frobenius lift
    under the involution x -> x^-1, y -> y^-1.  Always (0, 0, 2j mod p)."""
    if p == 2:
        raise ValueError("defined for odd p")
    x, y = gen(0), gen(1)
    w = (commutator(x, y) * commutator(x.inverse(), y.inverse())) ** j
    return f2_coordinates(w, p)


# ---------------------------------------------------------------------------
# graded pieces and the index of the n-th filtration step


def _hall_basis(d: int, max_weight: int):
    """Basic commutators on d generators up to the given weight.

    Returned as (weight, GroupWord) pairs in Hall order.  Nested entries
    follow the standard condition: [u, v] is basic when u > v and, if
    u = [a, b], then b <= v.
    """
    basic: list[tuple[int, tuple, GroupWord]] = []  # (weight, shape, word)
    for i in range(d):
        basic.append((1, (i,), gen(i)))
    index = {shape: k for k, (_, shape, _) in enumerate(basic)}
    for weight in range(2, max_weight + 1):
        new = []
        for ui, (wu, su, wordu) in enumerate(basic):
            for vi, (wv, sv, wordv) in enumerate(basic):
                if wu + wv != weight or ui <= vi:
                    continue
                if len(su) > 1:
                    # su = (a_shape, b_shape): require b <= v in Hall order
                    b_shape = su[1]
                    if index[b_shape] > vi:
                        continue
                new.append((weight, (su, sv), commutator(wordu, wordv)))
        for entry in new:
            index[entry[1]] = len(basic)
            basic.append(entry)
    return [(w, word) for w, _, word in basic]


def filtration_index(d: int, p: int, n: int, enum_cap: int = 4096) -> int:
    """Order of F/F_n for the free pro-p group on d generators.

    The k-th graded piece is spanned by images of basic commutators of
    weight j raised to the p^i-th power with j * p^i = k; its dimension is
    the F_p-rank of their degree-k coefficients, and the index is p to the
    sum of dimensions in degrees < n.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if n > TRUNC_CAP:
        raise BoundExceeded(f"level {n} exceeds truncation cap {TRUNC_CAP}")
    monomials = sum(d ** k for k in range(1, n))
    if monomials > enum_cap:
        raise BoundExceeded(
            f"{monomials} monomials of degree < {n} exceed the budget {enum_cap}")
    basics = _hall_basis(d, n - 1)
    total_dim = 0
    for k in range(1, n):
        rows = []
        monoms = sorted(_words_of_length(d, k))
        col = {m: i for i, m in enumerate(monoms)}
        for weight, word in basics:
            e = 1
            while weight * e < k:
                e *= p
            if weight * e != k:
                continue
            img = magnus_image(word ** e, p, k + 1, nvars=d)
            part = img.homogeneous_part(k)
            row = [0] * len(monoms)
            for m, c in part.items():
                row[col[m]] = c
            rows.append(row)
        from .abgroup import rank_mod
        total_dim += rank_mod(rows, p) if rows else 0
    return p ** total_dim


def _words_of_length(d: int, k: int):
    if k == 0:
        yield ()
        return
    for rest in _words_of_length(d, k - 1):
        for i in range(d):
            yield (i,) + rest
