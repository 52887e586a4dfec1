"""Exact integer and mod-p linear algebra.

Everything the class-field layer needs reduces to a handful of primitives
over Z and F_p: Smith normal form with recorded unimodular transforms,
Hermite forms of row lattices, integer kernels, finite abelian groups
presented by relation matrices (with discrete logarithms back to the raw
generators), and a rational LLL for the short-vector searches.

All matrices are plain lists of lists of Python ints; arithmetic is exact.
Pivoting is by minimal absolute value with a deterministic tie-break
(smallest row, then column) so transforms are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod


class BadCoordinates(ValueError):
    """Coordinate vector does not match the group presentation."""


class NotInGroup(ValueError):
    """Element is not expressible over the recorded raw generators."""


# ---------------------------------------------------------------------------
# basic matrix helpers


def identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A: list[list[int]], B: list[list[int]]) -> list[list[int]]:
    n, m, k = len(A), len(B[0]), len(B)
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def mat_vec(A: list[list[int]], v: list[int]) -> list[int]:
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def vec_mat(v: list[int], A: list[list[int]]) -> list[int]:
    return [sum(v[i] * A[i][j] for i in range(len(v))) for j in range(len(A[0]))]


def det_bareiss(A: list[list[int]]) -> int:
    """Exact determinant by fraction-free Gaussian elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [row[:] for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[-1][-1]


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SNFResult:
    diag: tuple[int, ...]             # full diagonal of D, zeros included
    U: tuple[tuple[int, ...], ...]    # U * A * V = D
    V: tuple[tuple[int, ...], ...]

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        return tuple(d for d in self.diag if d not in (0, 1))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d != 0)


def _hermite_rows_inplace(M, T, rows, cols, mod: int | None = None):
    """Row Hermite reduction of M with the same ops applied to T.

    Uses single xgcd row combinations per elimination (the Kannan-Bachem
    style that keeps intermediate entries polynomially bounded) and reduces
    entries above each pivot.  Returns True when M was already in Hermite
    form (no work done beyond sign/reduction of the above-pivot entries).

    With ``mod`` set, every entry of M and T is kept reduced modulo it.
    This is only sound when the caller works modulo ``mod`` throughout
    (quotients by a lattice containing mod * Z^cols, coordinates consumed
    modulo divisors of ``mod``).
    """
    changed = False

    def red_row(row):
        if mod is not None:
            for j in range(len(row)):
                row[j] %= mod

    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if M[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
            T[r], T[piv] = T[piv], T[r]
            changed = True
        for i in range(r + 1, rows):
            if not M[i][c]:
                continue
            a, b = M[r][c], M[i][c]
            if b % a == 0:
                q = b // a
                Mr, Mi = M[r], M[i]
                for j in range(c, cols):
                    Mi[j] -= q * Mr[j]
                Tr, Ti = T[r], T[i]
                for j in range(len(Ti)):
                    Ti[j] -= q * Tr[j]
            else:
                g, x, y = _xgcd(a, b)
                ag, bg = a // g, b // g
                Mr, Mi = M[r], M[i]
                for j in range(c, cols):
                    u, v = Mr[j], Mi[j]
                    Mr[j] = x * u + y * v
                    Mi[j] = -bg * u + ag * v
                Tr, Ti = T[r], T[i]
                for j in range(len(Tr)):
                    u, v = Tr[j], Ti[j]
                    Tr[j] = x * u + y * v
                    Ti[j] = -bg * u + ag * v
                red_row(M[r])
                red_row(T[r])
            red_row(M[i])
            red_row(T[i])
            changed = True
        if mod is not None and not M[r][c]:
            # reduction may have cancelled the pivot entirely; retry column
            piv2 = next((i for i in range(r, rows) if M[i][c]), None)
            if piv2 is not None:
                M[r], M[piv2] = M[piv2], M[r]
                T[r], T[piv2] = T[piv2], T[r]
        if not M[r][c]:
            continue
        if M[r][c] < 0:
            M[r] = [-v for v in M[r]]
            T[r] = [-v for v in T[r]]
            red_row(M[r])
            red_row(T[r])
            changed = True
        d = M[r][c]
        for i in range(r):
            q = M[i][c] // d
            if q:
                Mi, Mr = M[i], M[r]
                for j in range(cols):
                    Mi[j] -= q * Mr[j]
                Ti, Tr = T[i], T[r]
                for j in range(len(Ti)):
                    Ti[j] -= q * Tr[j]
                red_row(M[i])
                red_row(T[i])
                changed = True
        r += 1
        if r == rows:
            break
    return changed


def _transpose(M):
    return [list(col) for col in zip(*M)] if M else []


def snf(A: list[list[int]]) -> SNFResult:
    """Smith normal form with unimodular transforms, U*A*V = D.

    The diagonal satisfies d1 | d2 | ...; entries are nonnegative.  The
    matrix is diagonalized by alternating row and column Hermite reductions
    (each elimination is a single xgcd combination, which keeps the
    intermediate entries under control), then the diagonal is repaired to
    satisfy the divisibility chain.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [list(map(int, row)) for row in A]
    U = identity(rows)
    V = identity(cols)
    if rows and cols:
        for _ in range(4 * (rows + cols) + 8):
            _hermite_rows_inplace(M, U, rows, cols)
            Mt = _transpose(M)
            Vt = _transpose(V)
            changed = _hermite_rows_inplace(Mt, Vt, cols, rows)
            M = _transpose(Mt)
            V = _transpose(Vt)
            if not changed:
                break
        else:
            raise RuntimeError("smith normal form did not converge")
    # move the diagonal entries into leading position (zero rows/cols last)
    r = min(rows, cols)
    pos = 0
    for j in range(cols):
        i = next((i for i in range(pos, rows) if M[i][j]), None)
        if i is None:
            continue
        if i != pos:
            M[pos], M[i] = M[i], M[pos]
            U[pos], U[i] = U[i], U[pos]
        if j != pos:
            for row in M:
                row[pos], row[j] = row[j], row[pos]
            for row in V:
                row[pos], row[j] = row[j], row[pos]
        pos += 1
        if pos == r:
            break
    # repair divisibility on the (now diagonal) matrix
    changed = True
    while changed:
        changed = False
        for i in range(r - 1):
            a, b = M[i][i], M[i + 1][i + 1]
            if a == 0 or b % a == 0:
                continue
            changed = True
            # fold column i+1 into column i, then one xgcd row combination
            for k in range(cols):
                V[k][i] += V[k][i + 1]
            M[i + 1][i] = b
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            # rows i, i+1 live only on columns i, i+1
            Mi = [g, y * b]
            Mi1 = [0, ag * b]
            for j in range(rows):
                u, v = U[i][j], U[i + 1][j]
                U[i][j] = x * u + y * v
                U[i + 1][j] = -bg * u + ag * v
            q = Mi[1] // g
            for k in range(cols):
                V[k][i + 1] -= q * V[k][i]
            M[i][i], M[i][i + 1] = g, 0
            M[i + 1][i], M[i + 1][i + 1] = 0, ag * b
    for i in range(r):
        if M[i][i] < 0:
            for j in range(cols):
                M[i][j] = -M[i][j]
            for j in range(rows):
                U[i][j] = -U[i][j]
    diag = tuple(M[i][i] for i in range(r))
    diag = diag + tuple(0 for _ in range(cols - len(diag)))
    return SNFResult(diag=diag, U=tuple(map(tuple, U)), V=tuple(map(tuple, V)))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


# ---------------------------------------------------------------------------
# Hermite form and integer kernels


def hnf_rows(A: list[list[int]], transform: bool = False):
    """Row-style Hermite normal form of the lattice spanned by the rows.

    Returns the nonzero HNF rows (pivots positive, entries above a pivot
    reduced into [0, pivot)).  With ``transform=True`` also returns T with
    T*A = H (rows of T give each HNF row as a combination of input rows,
    and the trailing rows of T span the left kernel of A).
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [list(map(int, r)) for r in A]
    T = identity(rows)
    _hermite_rows_inplace(M, T, rows, cols)
    r = sum(1 for row in M if any(row))
    H = [row for row in M[:r]]
    if transform:
        return H, T, r
    return H


def left_kernel(A: list[list[int]]) -> list[list[int]]:
    """Basis of {x : x*A = 0} as rows."""
    _, T, r = hnf_rows(A, transform=True)
    return [row[:] for row in T[r:]]


def in_row_lattice(H: list[list[int]], v: list[int]) -> bool:
    """Is v in the lattice spanned by HNF rows H?"""
    v = list(v)
    for row in H:
        c = next((j for j, x in enumerate(row) if x), None)
        if c is None:
            continue
        if v[c] % row[c] == 0:
            q = v[c] // row[c]
            if q:
                for j in range(len(v)):
                    v[j] -= q * row[j]
        if v[c]:
            return False
    return not any(v)


# ---------------------------------------------------------------------------
# mod-p linear algebra


def rref_mod(A: list[list[int]], p: int):
    """Reduced row echelon form mod p; returns (R, pivot columns)."""
    M = [[x % p for x in row] for row in A]
    rows = len(M)
    cols = len(M[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] % p), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], -1, p)
        M[r] = [(x * inv) % p for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M[:r], pivots


def rank_mod(A, p: int) -> int:
    return len(rref_mod(A, p)[0])


def nullspace_mod(A, p: int) -> list[list[int]]:
    """Basis of {x : A*x = 0 mod p} (column vectors, returned as rows)."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    R, pivots = rref_mod(A, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * cols
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-R[i][f]) % p
        basis.append(v)
    return basis


def solve_mod(A, b, p: int):
    """One solution x of A*x = b mod p, or None."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    aug = [list(A[i]) + [b[i] % p] for i in range(rows)]
    R, pivots = rref_mod(aug, p)
    x = [0] * cols
    for i, c in enumerate(pivots):
        if c == cols:
            return None
        x[c] = R[i][cols] % p
    return x


# ---------------------------------------------------------------------------
# finite abelian groups with discrete logarithms


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Finite abelian group in Smith normal form coordinates.

    Presented on ``ngens`` raw generators subject to integer relation rows;
    ``dlog_matrix`` (ngens x k) carries a raw exponent vector to SNF
    coordinates, componentwise modulo ``invariant_factors``.
    """

    invariant_factors: tuple[int, ...]          # d1 | d2 | ..., each >= 2
    dlog_matrix: tuple[tuple[int, ...], ...]    # ngens rows, k columns
    generator_labels: tuple[str, ...] = ()

    @property
    def ngens(self) -> int:
        return len(self.dlog_matrix)

    @property
    def order(self) -> int:
        return prod(self.invariant_factors) if self.invariant_factors else 1

    def dlog(self, raw: list[int]) -> tuple[int, ...]:
        if len(raw) != self.ngens:
            raise NotInGroup(
                f"expected exponent vector of length {self.ngens}, got {len(raw)}")
        k = len(self.invariant_factors)
        out = [0] * k
        for i, e in enumerate(raw):
            if e:
                row = self.dlog_matrix[i]
                for j in range(k):
                    out[j] += e * row[j]
        return tuple(c % d for c, d in zip(out, self.invariant_factors))

    def p_rank(self, p: int) -> int:
        return sum(1 for d in self.invariant_factors if d % p == 0)

    def p_valuations(self, p: int) -> tuple[int, ...]:
        """Sorted (descending) p-valuations of the invariant factors, zeros dropped."""
        vals = []
        for d in self.invariant_factors:
            v = 0
            while d % p == 0:
                d //= p
                v += 1
            if v:
                vals.append(v)
        return tuple(sorted(vals, reverse=True))

    def elementary_vector(self, coords: tuple[int, ...], p: int) -> tuple[int, ...]:
        """Image of an element in G/G^p, one coordinate per p-divisible factor."""
        if len(coords) != len(self.invariant_factors):
            raise BadCoordinates("coordinate length mismatch")
        return tuple(c % p for c, d in zip(coords, self.invariant_factors)
                     if d % p == 0)

    def quotient_by(self, vectors: list[tuple[int, ...]]) -> "FiniteAbelianGroup":
        """Quotient by the subgroup generated by elements in SNF coordinates.

        The returned group's dlog_matrix maps *this* group's SNF coordinates
        to the quotient's coordinates.
        """
        k = len(self.invariant_factors)
        rels = [[self.invariant_factors[i] if j == i else 0 for j in range(k)]
                for i in range(k)]
        for v in vectors:
            if len(v) != k:
                raise BadCoordinates("coordinate length mismatch")
            rels.append(list(v))
        return group_from_relations(k, rels)


def _maximal_minor_det(rows_in: list[list[int]], n: int) -> int | None:
    """Determinant of one nonsingular n x n minor (rows chosen greedily),
    or None when the rows have rank < n.  Fraction-free elimination keeps
    the intermediate entries minor-sized."""
    M = [list(map(int, row)) for row in rows_in]
    m = len(M)
    if m < n:
        return None
    sign = 1
    prev = 1
    for k in range(n):
        piv = next((i for i in range(k, m) if M[i][k]), None)
        if piv is None:
            return None
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, m):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * prev


def group_from_relations(ngens: int, relations: list[list[int]],
                         labels: tuple[str, ...] = ()) -> FiniteAbelianGroup:
    """Finite abelian group Z^ngens / <relation rows>.

    Raises ValueError if the quotient is infinite (the relation lattice
    must have full column rank).  The computation first passes to the
    Hermite form to learn the group order d, then keeps every entry reduced
    modulo d while diagonalizing (reductions are valid because d*Z^ngens
    lies inside the relation lattice and is preserved by unimodular column
    changes), so entries never outgrow the group order.
    """
    if ngens == 0:
        return FiniteAbelianGroup(invariant_factors=(), dlog_matrix=(),
                                  generator_labels=labels)
    if not relations:
        raise ValueError("no relations: quotient is infinite")
    d = _maximal_minor_det(relations, ngens)
    if d is None:
        raise ValueError("relation lattice not of full rank: infinite quotient")
    d = abs(d)
    if d == 1:
        return FiniteAbelianGroup(invariant_factors=(), dlog_matrix=tuple(
            () for _ in range(ngens)), generator_labels=labels)
    M = [[x % d for x in row] for row in relations]
    M = [row for row in M if any(row)] or [[0] * ngens]
    V = identity(ngens)
    for _ in range(4 * ngens + 8):
        dummy = [[0] * 0 for _ in range(len(M))]
        _hermite_rows_inplace(M, dummy, len(M), ngens, mod=d)
        M = [row for row in M if any(row)] or [[0] * ngens]
        Mt = _transpose(M)
        Vt = _transpose(V)
        changed = _hermite_rows_inplace(Mt, Vt, ngens, len(M), mod=d)
        M = _transpose(Mt)
        V = _transpose(Vt)
        if not changed:
            break
    else:
        raise RuntimeError("group diagonalization did not converge")
    # columns may be permuted relative to rows; read the diagonal by pivots
    diag = [0] * ngens
    for i, row in enumerate(M):
        nz = [j for j, x in enumerate(row) if x]
        assert len(nz) <= 1, "diagonalization left a non-diagonal row"
        if nz:
            diag[nz[0]] = row[nz[0]]
    orders = [gcd(diag[j], d) if diag[j] else d for j in range(ngens)]
    # repair the divisibility chain on the small diagonal matrix
    res = snf([[orders[i] if i == j else 0 for j in range(ngens)]
               for i in range(ngens)])
    keep = [j for j in range(ngens) if res.diag[j] > 1]
    inv = tuple(res.diag[j] for j in keep)
    W = mat_mul(V, [list(r) for r in res.V])
    dlog = tuple(tuple(W[i][j] % res.diag[j] for j in keep) for i in range(ngens))
    return FiniteAbelianGroup(invariant_factors=inv, dlog_matrix=dlog,
                              generator_labels=labels)


def quotient_p_rank(G: FiniteAbelianGroup, H: list[tuple[int, ...]], p: int) -> int:
    """d_p of G / <H>, H given in SNF coordinates of G."""
    if not H:
        return G.p_rank(p)
    return G.quotient_by(list(H)).p_rank(p)


def discrete_log(G: FiniteAbelianGroup, raw: list[int]) -> tuple[int, ...]:
    """SNF coordinates of an element given as exponents over the raw generators."""
    return G.dlog(raw)


# ---------------------------------------------------------------------------
# LLL over the rationals (used for ideal short vectors and unit logs)


def lll(basis: list[list[int]], delta: Fraction = Fraction(99, 100),
        gram: list[list[int]] | None = None) -> list[list[int]]:
    """LLL-reduce integer basis vectors.

    ``gram``, when given, supplies the inner products <b_i, b_j> of the
    *input* rows under some positive definite integer form; otherwise the
    standard dot product is used.  The Gram matrix is updated exactly under
    every row operation, so the reduction is exact.  Returns the reduced
    vectors (the same integer combinations applied to rows of ``basis``).
    """
    n = len(basis)
    B = [row[:] for row in basis]
    if n <= 1:
        return B
    if gram is None:
        G = [[_dot(B[i], B[j]) for j in range(n)] for i in range(n)]
    else:
        G = [list(map(int, row)) for row in gram]

    # Inner products of current rows are computed through a tracked
    # coefficient matrix applied to the original Gram; n stays small here.
    coeff = identity(n)
    G0 = G

    def ip(i, j):
        tot = 0
        ci, cj = coeff[i], coeff[j]
        for a in range(n):
            if ci[a]:
                row = G0[a]
                s = 0
                for b in range(n):
                    if cj[b]:
                        s += cj[b] * row[b]
                tot += ci[a] * s
        return tot

    def gso_current():
        mu = [[Fraction(0)] * n for _ in range(n)]
        Bstar = [Fraction(0)] * n
        for i in range(n):
            Bstar[i] = Fraction(ip(i, i))
            for j in range(i):
                mu[i][j] = Fraction(ip(i, j))
                for k in range(j):
                    mu[i][j] -= mu[i][k] * mu[j][k] * Bstar[k]
                if Bstar[j]:
                    mu[i][j] /= Bstar[j]
                Bstar[i] -= mu[i][j] ** 2 * Bstar[j]
        return mu, Bstar

    mu, Bstar = gso_current()
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 20000 * n:
            break  # fail safe; callers verify outputs independently
        changed = False
        for j in range(k - 1, -1, -1):
            q = _round_frac(mu[k][j])
            if q:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                coeff[k] = [a - q * b for a, b in zip(coeff[k], coeff[j])]
                changed = True
        if changed:
            mu, Bstar = gso_current()
        if Bstar[k] >= (delta - mu[k][k - 1] ** 2) * Bstar[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            coeff[k], coeff[k - 1] = coeff[k - 1], coeff[k]
            mu, Bstar = gso_current()
            k = max(k - 1, 1)
    return B


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _round_frac(x: Fraction) -> int:
    if x >= 0:
        return int(x + Fraction(1, 2))
    return -int(-x + Fraction(1, 2))
