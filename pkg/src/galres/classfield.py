"""Class groups, units, ray class groups, Selmer groups, p-rationality.

The central object is a per-field ``ClassUnitContext``: factor base, class
group with ideal discrete logarithms, unit group, and principal-ideal
reduction.  Ray class groups are assembled from the exact sequence linking
residue units, the class group and the global units, with the group order
identity asserted at construction.  Modulus towers with growing wild
exponents drive every rank computation; stabilization is detected over
configured windows and failure to stabilize is an explicit error.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import gcd, isqrt, prod

import mpmath
import sympy

from . import EffortExceeded, GalresError, StabilizationFailed
from .abgroup import (FiniteAbelianGroup, group_from_relations, hnf_rows,
                      identity, left_kernel, lll, nullspace_mod, solve_mod)
from .config import DEFAULT, EffortConfig
from .numfield import (FieldElement, Ideal, NumberFieldData, PrimeIdealData,
                       ZeroElement, factor_int, factor_prime, ideal_from_generators,
                       is_pth_power, kpoly_from_q, kpoly_roots, primes_up_to,
                       principal_ideal, unit_ideal, _elt_mult_vec)

log = logging.getLogger(__name__)


class RegulatorCheckFailed(GalresError):
    """Computed unit lattice has implausibly small covolume."""


class NotCoprime(GalresError):
    """Residue discrete log of an element sharing a prime with the modulus."""


class TameDeltaViolation(GalresError):
    """A tame member of the ramification set has norm != 1 mod p."""


class BadCoordinates(GalresError):
    """Ideal or element coordinates inconsistent with the presentation."""


# ---------------------------------------------------------------------------
# result dataclasses


@dataclass(frozen=True)
class UnitGroupData:
    torsion_order: int
    torsion_gen: FieldElement
    fundamental: tuple[FieldElement, ...]
    provenance: str

    @property
    def rank(self) -> int:
        return len(self.fundamental)


@dataclass(frozen=True)
class ClassGroupData:
    invariant_factors: tuple[int, ...]
    generator_ideals: tuple[PrimeIdealData, ...]   # class-group generators
    witnesses: tuple[FieldElement | None, ...]     # gen^order = (witness)
    provenance: str

    @property
    def order(self) -> int:
        return prod(self.invariant_factors) if self.invariant_factors else 1


@dataclass(frozen=True)
class Modulus:
    """Finite part only; tame primes must carry exponent 1."""

    finite: tuple[tuple[PrimeIdealData, int], ...]

    def __post_init__(self):
        seen = set()
        for p, k in self.finite:
            assert k >= 1
            assert p.key() not in seen
            seen.add(p.key())

    @property
    def support(self):
        return tuple(p for p, _ in self.finite)

    def divides_element(self, x: FieldElement) -> bool:
        return any(p.valuation_element(x) != 0 for p in self.support)


# ---------------------------------------------------------------------------
# embeddings / logarithmic data


_LOG_PREC = 60


def _log_vector(x: FieldElement):
    """(a_sigma * log|sigma(x)|) over the infinite places, a = 1 or 2."""
    K = x.K
    r1, r2 = K.signature
    emb = K.embeddings(_LOG_PREC)
    pw = x.to_power_basis()
    out = []
    with mpmath.workdps(_LOG_PREC):
        for idx, root in enumerate(emb):
            val = mpmath.mpf(0)
            acc = mpmath.mpc(0)
            for c in reversed(pw):
                acc = acc * root + mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator)
            mag = mpmath.fabs(acc)
            weight = 1 if idx < r1 else 2
            out.append(weight * mpmath.log(mag))
    return out


def _regulator(units: list[FieldElement]) -> float:
    if not units:
        return 1.0
    rows = [_log_vector(u) for u in units]
    r = len(units)
    with mpmath.workdps(_LOG_PREC):
        M = mpmath.matrix([[rows[i][j] for j in range(r)] for i in range(r)])
        return abs(float(mpmath.det(M)))


# ---------------------------------------------------------------------------
# torsion units


def roots_of_unity(K: NumberFieldData) -> tuple[int, FieldElement]:
    """(w, generator) for the torsion of the unit group."""
    cached = K._cache.get("torsion_units")
    if cached is not None:
        return cached
    n = K.degree
    w = 2
    gen = K.from_rational(-1)
    if K.signature[0] == 0:
        # candidate prime powers q^a with phi(q^a) | n
        candidates = []
        for m in range(3, 4 * n * n + 2):
            fac = factor_int(m)
            if len(fac) != 1:
                continue
            if n % sympy.totient(m):
                continue
            candidates.append(m)
        for m in sorted(candidates, reverse=True):
            if w % m == 0:
                continue
            poly = sympy.polys.specialpolys.cyclotomic_poly(m, sympy.Symbol("x"))
            coeffs = [int(c) for c in reversed(sympy.Poly(poly).all_coeffs())]
            roots = kpoly_roots(kpoly_from_q(coeffs, K), K)
            if roots:
                zeta = roots[0]
                lcm = w * m // gcd(w, m)
                gen = (gen ** (w // gcd(w, m))) if False else gen
                # combine: element of order lcm(w, m)
                gen = _combine_roots(gen, w, zeta, m)
                w = lcm
    K._cache["torsion_units"] = (w, gen)
    return w, gen


def _combine_roots(a: FieldElement, oa: int, b: FieldElement, ob: int) -> FieldElement:
    l = oa * ob // gcd(oa, ob)
    # CRT exponents: element of order l
    target = a
    best = None
    # a^i b^j has order lcm when chosen suitably; search tiny space exactly
    for i in range(oa):
        for j in range(ob):
            cand = (a ** i) * (b ** j)
            if _mult_order(cand, l) == l:
                return cand
    raise AssertionError("could not combine torsion generators")


def _mult_order(x: FieldElement, bound: int) -> int:
    acc = x
    for k in range(1, bound + 1):
        if (acc - x.K.one()).is_zero:
            return k
        acc = acc * x
    return 0


# ---------------------------------------------------------------------------
# the per-field context


@dataclass
class ClassUnitContext:
    K: NumberFieldData
    config: EffortConfig
    fb: list[PrimeIdealData]
    cl: FiniteAbelianGroup               # over the factor base primes
    class_data: ClassGroupData
    units: UnitGroupData
    relation_elements: list[FieldElement]
    relation_matrix: list[list[int]]
    provenance: str
    _cache: dict = dc_field(default_factory=dict)

    # -- discrete logs over the class group ---------------------------------

    def fb_position(self, prime: PrimeIdealData) -> int | None:
        key = prime.key()
        pos = self._cache.setdefault(
            "fbpos", {p.key(): i for i, p in enumerate(self.fb)})
        return pos.get(key)

    def class_dlog_vector(self, vector) -> tuple[int, ...]:
        return self.cl.dlog(list(vector))

    def class_dlog_prime(self, prime: PrimeIdealData,
                         avoid: tuple[PrimeIdealData, ...] = ()) -> tuple[int, ...]:
        pos = self.fb_position(prime)
        if pos is not None:
            vec = [0] * len(self.fb)
            vec[pos] = 1
            return self.cl.dlog(vec)
        x, v = self.reduce_to_fb(prime, avoid)
        return tuple((-c) % d for c, d in zip(self.cl.dlog(v), self.cl.invariant_factors))

    def reduce_to_fb(self, prime: PrimeIdealData,
                     avoid: tuple[PrimeIdealData, ...] = ()):
        """x in the prime with (x) = prime * prod(fb^v), support avoiding
        ``avoid``; returns (x, v)."""
        key = ("reduce", prime.key(), tuple(sorted(p.key() for p in avoid)))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        avoid_keys = {p.key() for p in avoid}
        fb_ells = sorted({p.ell for p in self.fb})
        for x in _short_elements(prime.lattice, bound_steps=6):
            nrm = int(x.norm())
            cof = abs(nrm) // prime.norm
            if abs(nrm) % prime.norm:
                continue
            fac = _trial_factor(cof, fb_ells)
            if fac is None:
                continue
            # valuation vector over the factor base
            v = [0] * len(self.fb)
            ok = True
            if prime.valuation_element(x) != 1:
                continue
            for ell in fac:
                for q in factor_prime(self.K, ell):
                    val = q.valuation_element(x)
                    if q.key() == prime.key():
                        val -= 1
                    if val == 0:
                        continue
                    if q.key() in avoid_keys:
                        ok = False
                        break
                    pos = self.fb_position(q)
                    if pos is None:
                        ok = False
                        break
                    v[pos] = val
                if not ok:
                    break
            if not ok:
                continue
            self._cache[key] = (x, v)
            return x, v
        raise EffortExceeded(f"no factor-base reduction found for {prime}")

    def generator_of_principal_vector(self, vector) -> FieldElement:
        """Element generating prod fb_i^{v_i} exactly (the class must be
        trivial).  The vector is an integer combination of relation rows and
        the same combination of relation elements generates the ideal."""
        return _principal_generator_from_relations(
            self.K, self.relation_matrix, self.relation_elements, vector)


def _principal_generator_from_relations(K, relation_matrix, relation_elements,
                                        vector) -> FieldElement:
    H, T, r = hnf_rows(relation_matrix, transform=True)
    coeffs = _solve_in_rowspace(H, T, r, list(vector))
    if coeffs is None:
        raise BadCoordinates("vector is not in the relation lattice")
    return _realize_power_product(K, relation_elements, coeffs)


def _solve_in_rowspace(H, T, r, target):
    """Express target over the original rows, given hnf transform data."""
    v = list(target)
    comb = [0] * len(T[0])
    for i in range(r):
        row = H[i]
        c = next(j for j, x in enumerate(row) if x)
        if v[c] % row[c]:
            return None
        q = v[c] // row[c]
        if q:
            for j in range(len(v)):
                v[j] -= q * row[j]
            for j in range(len(comb)):
                comb[j] += q * T[i][j]
    if any(v):
        return None
    return comb


def _trial_factor(n: int, ells) -> dict[int, int] | None:
    """Factor n over the given primes, or None if a cofactor remains."""
    if n == 0:
        return None
    n = abs(n)
    out = {}
    for ell in ells:
        while n % ell == 0:
            n //= ell
            out[ell] = out.get(ell, 0) + 1
    return out if n == 1 else None


def _t2_gram(K: NumberFieldData, scale_bits: int = 40):
    """Integer Gram matrix of the trace form on the integral basis."""
    key = ("t2gram", scale_bits)
    G = K._cache.get(key)
    if G is not None:
        return G
    n = K.degree
    r1, r2 = K.signature
    emb = K.embeddings(_LOG_PREC)
    basis_vals = []
    with mpmath.workdps(_LOG_PREC):
        for i in range(n):
            row = []
            pw = FieldElement(K, tuple(int(i == j) for j in range(n)), 1).to_power_basis()
            for root in emb:
                acc = mpmath.mpc(0)
                for c in reversed(pw):
                    acc = acc * root + mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator)
                row.append(acc)
            basis_vals.append(row)
        scale = mpmath.mpf(2) ** scale_bits
        G = []
        for i in range(n):
            row = []
            for j in range(n):
                val = mpmath.mpf(0)
                for idx in range(r1 + r2):
                    w = 1 if idx < r1 else 2
                    val += w * mpmath.re(basis_vals[i][idx] *
                                         mpmath.conj(basis_vals[j][idx]))
                row.append(int(mpmath.nint(val * scale)))
            G.append(row)
    K._cache[key] = G
    return G


def _lll_ideal_basis(I: Ideal):
    K = I.K
    cache = K._cache.setdefault("lll_ideals", {})
    if I.hnf in cache:
        return cache[I.hnf]
    n = K.degree
    G = _t2_gram(K)
    B = [list(r) for r in I.hnf]
    gram = [[sum(B[i][a] * G[a][b] * B[j][b] for a in range(n) for b in range(n))
             for j in range(n)] for i in range(n)]
    R = lll(B, gram=gram)
    cache[I.hnf] = R
    return R


def _combo_shells(n: int, bound_steps: int):
    """Deterministic small coefficient vectors: full unit box first, then
    sparse-support boxes of growing radius."""
    for combo in itertools.product((-1, 0, 1), repeat=n):
        if any(combo):
            yield combo
    for bound in range(2, bound_steps + 1):
        max_support = 4 if n > 5 else n
        for support in itertools.combinations(range(n), min(max_support, n)):
            for vals in itertools.product(range(-bound, bound + 1),
                                          repeat=len(support)):
                if max((abs(v) for v in vals), default=0) != bound:
                    continue
                combo = [0] * n
                for s, v in zip(support, vals):
                    combo[s] = v
                yield tuple(combo)


def _short_elements(I: Ideal, bound_steps: int = 4):
    """Nonzero elements of an ideal, shortest-first-ish, deterministic."""
    K = I.K
    n = K.degree
    R = _lll_ideal_basis(I)
    seen = set()
    for combo in _combo_shells(n, bound_steps):
        vec = tuple(sum(combo[i] * R[i][j] for i in range(n)) for j in range(n))
        if vec in seen or not any(vec):
            continue
        seen.add(vec)
        yield FieldElement(K, vec, 1)


def generator_of_principal(ctx: ClassUnitContext, I: Ideal,
                           max_steps: int = 5) -> FieldElement | None:
    """Search a generator of an integral ideal (None if not found in budget)."""
    target = I.norm
    for x in _short_elements(I, bound_steps=max_steps):
        if abs(int(x.norm())) == target:
            return x
    return None

# ---------------------------------------------------------------------------
# class group and units


def minkowski_bound(K: NumberFieldData) -> int:
    n = K.degree
    r2 = K.signature[1]
    mb = (math.factorial(n) / n ** n) * (4 / math.pi) ** r2 * math.sqrt(abs(K.disc))
    return max(2, math.floor(mb))


def grh_bound(K: NumberFieldData) -> int:
    d = abs(K.disc)
    return max(2, math.floor(12 * math.log(max(3, d)) ** 2))


def class_and_units(K: NumberFieldData, config: EffortConfig = DEFAULT,
                    fixture: dict | None = None) -> ClassUnitContext:
    """Class group and unit group by relation search over a factor base.

    The context is cached on the field object; pass a fixture record (see
    ``load_field_fixture``) to install precomputed class/unit data after
    validation.
    """
    key = ("class_ctx", config.factor_base_style)
    ctx = K._cache.get(key)
    if ctx is not None:
        return ctx
    if fixture is not None:
        ctx = _context_from_fixture(K, config, fixture)
        K._cache[key] = ctx
        return ctx
    bound = minkowski_bound(K) if config.factor_base_style == "minkowski" \
        else max(grh_bound(K), minkowski_bound(K))
    bound = max(bound, 20)
    fb = list(primes_up_to(K, bound))
    if len(fb) > config.factor_base_cap:
        raise EffortExceeded(
            f"factor base of {len(fb)} primes exceeds cap {config.factor_base_cap}")
    ctx = _relation_search(K, fb, config)
    K._cache[key] = ctx
    return ctx


def _relation_search(K: NumberFieldData, fb, config: EffortConfig) -> ClassUnitContext:
    n = K.degree
    r1, r2 = K.signature
    unit_rank = r1 + r2 - 1
    fb_ells = sorted({p.ell for p in fb})
    fbpos = {p.key(): i for i, p in enumerate(fb)}

    relations: list[list[int]] = []
    elements: list[FieldElement] = []
    seen_elts = set()

    def try_element(x: FieldElement) -> bool:
        keyx = (x.num, x.den)
        if keyx in seen_elts or x.is_zero:
            return False
        seen_elts.add(keyx)
        nrm = int(x.norm())
        fac = _trial_factor(nrm, fb_ells)
        if fac is None:
            return False
        vec = [0] * len(fb)
        for ell in fac:
            for q in factor_prime(K, ell):
                v = q.valuation_element(x)
                if v:
                    vec[fbpos[q.key()]] = v
        relations.append(vec)
        elements.append(x)
        return True

    # targeted relations: short vectors in each factor-base prime
    for p in fb:
        found = 0
        for x in _short_elements(p.lattice, bound_steps=3):
            if try_element(x):
                found += 1
                if found >= 3:
                    break

    # global small elements
    for combo in _combo_shells(n, 3):
        if len(relations) > 4 * len(fb) + 40:
            break
        x = FieldElement(K, tuple(combo), 1)
        try_element(x)

    def class_group_now():
        rows = relations + [[0] * len(fb)]
        try:
            return group_from_relations(len(fb), rows)
        except ValueError:
            return None

    # keep adding candidate batches until the group and the unit rank both
    # stabilize over the configured window
    G = class_group_now()
    stable = 0
    shell_iter = _extra_candidates(K, fb, config)
    budget = config.relation_budget
    exhausted = False
    while budget > 0 and not exhausted:
        if G is not None and stable >= config.relation_window:
            if _unit_rank(left_kernel(relations), elements) >= unit_rank:
                break
            stable = 0  # need more relations for units
        added = 0
        for _ in range(64):
            try:
                x = next(shell_iter)
            except StopIteration:
                exhausted = True
                break
            budget -= 1
            if try_element(x):
                added += 1
        if added:
            G2 = class_group_now()
            if G2 is not None and G is not None and \
                    G2.invariant_factors == G.invariant_factors:
                stable += added
            else:
                stable = 0
            G = G2 if G2 is not None else G
        else:
            stable += 8 if G is not None else 0
    if G is None:
        raise EffortExceeded("relation search never reached full rank")

    kernel = left_kernel(relations)
    units, unit_elts = _units_from_kernel(K, kernel, elements, config)
    if len(unit_elts) < unit_rank:
        raise EffortExceeded(
            f"unit rank {len(unit_elts)} < {unit_rank} within the budget")

    cl, class_data = _assemble_class_group(K, fb, relations, elements, G, config)
    ctx = ClassUnitContext(K=K, config=config, fb=fb, cl=cl,
                           class_data=class_data, units=units,
                           relation_elements=elements,
                           relation_matrix=relations,
                           provenance=class_data.provenance)
    _shafarevich_unit_checks(ctx)
    return ctx


def _rank_int(rows):
    if not rows:
        return 0
    return len(hnf_rows(rows))


def _unit_rank(kernel, elements) -> int:
    if not kernel:
        return 0
    logs = []
    for co in kernel:
        vec = None
        for c, x in zip(co, elements):
            if c:
                lv = [c * v for v in _log_vector(x)]
                vec = lv if vec is None else [a + b for a, b in zip(vec, lv)]
        if vec is not None:
            logs.append(vec)
    return _numeric_rank(logs)


def _numeric_rank(rows, tol=1e-20):
    if not rows:
        return 0
    with mpmath.workdps(_LOG_PREC):
        M = [[mpmath.mpf(v) for v in row] for row in rows]
        rank = 0
        cols = len(M[0])
        used = [False] * len(M)
        for c in range(cols):
            piv = None
            best = mpmath.mpf(tol)
            for i in range(len(M)):
                if not used[i] and mpmath.fabs(M[i][c]) > best:
                    best = mpmath.fabs(M[i][c])
                    piv = i
            if piv is None:
                continue
            used[piv] = True
            rank += 1
            for i in range(len(M)):
                if i != piv and mpmath.fabs(M[i][c]) > 0:
                    f = M[i][c] / M[piv][c]
                    M[i] = [a - f * b for a, b in zip(M[i], M[piv])]
        return rank


def _extra_candidates(K: NumberFieldData, fb, config: EffortConfig):
    """Deterministic stream of extra relation candidates."""
    n = K.degree
    # powers of small elements against factor-base primes, then wider shells
    for p in fb:
        count = 0
        for x in _short_elements(p.lattice, bound_steps=4):
            yield x
            count += 1
            if count >= 12:
                break
    for combo in _combo_shells(n, 5):
        yield FieldElement(K, tuple(combo), 1)


def _units_from_kernel(K, kernel, elements, config: EffortConfig):
    w, zeta = roots_of_unity(K)
    r1, r2 = K.signature
    unit_rank = r1 + r2 - 1
    if unit_rank == 0:
        units = UnitGroupData(torsion_order=w, torsion_gen=zeta, fundamental=(),
                              provenance="computed: relation search")
        return units, []
    # realize kernel combinations as elements, filter to independent ones
    combos = []
    logs = []
    for co in kernel:
        vec = None
        for c, x in zip(co, elements):
            if c:
                lv = [c * v for v in _log_vector(x)]
                vec = lv if vec is None else [a + b for a, b in zip(vec, lv)]
        if vec is None:
            continue
        if _numeric_rank(logs + [vec]) > len(logs):
            combos.append(co)
            logs.append(vec)
            if len(logs) == unit_rank:
                break
    # LLL-reduce the log lattice to keep unit elements small
    scale = mpmath.mpf(2) ** 48
    with mpmath.workdps(_LOG_PREC):
        int_logs = [[int(mpmath.nint(v * scale)) for v in row] for row in logs]
    reduced = lll([list(r) for r in identity(len(logs))],
                  gram=[[sum(a * b for a, b in zip(int_logs[i], int_logs[j]))
                         for j in range(len(logs))] for i in range(len(logs))])
    unit_elts = []
    for comb in reduced:
        total = [0] * len(elements)
        for mult, co in zip(comb, combos):
            if mult:
                for i, c in enumerate(co):
                    total[i] += mult * c
        u = _realize_power_product(K, elements, total)
        unit_elts.append(u)
    unit_elts = _saturate_units(K, unit_elts, w, zeta, config)
    reg = _regulator(unit_elts)
    if unit_rank and reg < config.regulator_floor:
        raise RegulatorCheckFailed(f"regulator {reg} below floor")
    units = UnitGroupData(torsion_order=w, torsion_gen=zeta,
                          fundamental=tuple(unit_elts),
                          provenance="computed: relation search, saturated at "
                          + ",".join(map(str, config.unit_saturation_primes)))
    return units, unit_elts


def _realize_power_product(K, elements, exps) -> FieldElement:
    num = K.one()
    den = K.one()
    for c, x in zip(exps, elements):
        if c > 0:
            num = num * x ** c
        elif c < 0:
            den = den * x ** (-c)
    return num * den.inverse()


def _saturate_units(K, unit_elts, w, zeta, config: EffortConfig):
    """Replace the found units by p-th roots whenever a combination is a
    p-th power (up to torsion), for the configured primes."""
    r = len(unit_elts)
    if r == 0:
        return unit_elts
    for p in config.unit_saturation_primes:
        changed = True
        while changed:
            changed = False
            for exps in _fp_directions(r, p):
                u = K.one()
                for e, elt in zip(exps, unit_elts):
                    if e:
                        u = u * elt ** e
                torsion_twists = range(w) if w % p == 0 else (0,)
                for j in torsion_twists:
                    cand = u * zeta ** j if j else u
                    root = is_pth_power(K, cand, p)
                    if root is not None:
                        # the leading exponent is 1, so the substitution keeps
                        # a generating set while enlarging the lattice
                        pos = next(i for i, e in enumerate(exps) if e)
                        unit_elts[pos] = root
                        changed = True
                        break
                if changed:
                    break
    return unit_elts


def _fp_directions(r, p):
    """Nonzero vectors of F_p^r up to scalar, first coordinate normalized."""
    for lead in range(r):
        for tail in itertools.product(range(p), repeat=r - lead - 1):
            vec = [0] * lead + [1] + list(tail)
            yield vec


def _assemble_class_group(K, fb, relations, elements, G: FiniteAbelianGroup,
                          config: EffortConfig):
    """Class group data with generator primes and principality witnesses."""
    factors = G.invariant_factors
    gens: list[PrimeIdealData] = []
    wits: list[FieldElement | None] = []
    # pick a factor-base prime mapping cleanly onto each SNF generator
    for idx, d in enumerate(factors):
        chosen = None
        for i, p in enumerate(fb):
            vec = [0] * len(fb)
            vec[i] = 1
            coords = G.dlog(vec)
            if gcd(coords[idx], d) == 1 and all(
                    c == 0 for j, c in enumerate(coords) if j != idx):
                chosen = (i, p)
                break
        if chosen is None:
            gens.append(fb[0])
            wits.append(None)
            continue
        i, p = chosen
        gens.append(p)
        # the class of p has order exactly d, so d*e_i is a relation vector
        vec = [0] * len(fb)
        vec[i] = d
        try:
            wit = _principal_generator_from_relations(K, relations, elements, vec)
        except BadCoordinates:
            wit = None
        wits.append(wit)
    provenance = ("computed: relation search over factor base of "
                  f"{len(fb)} primes (bound style {config.factor_base_style})")
    data = ClassGroupData(invariant_factors=factors, generator_ideals=tuple(gens),
                          witnesses=tuple(wits), provenance=provenance)
    return G, data


def _shafarevich_unit_checks(ctx: ClassUnitContext):
    """Cheap exactness checks: every unit really is a unit, every relation
    element's ideal matches its vector."""
    for u in ctx.units.fundamental:
        assert u.is_integral and abs(int(u.norm())) == 1
        assert u.inverse().is_integral
    zeta = ctx.units.torsion_gen
    w = ctx.units.torsion_order
    assert (_pow(zeta, w) - ctx.K.one()).is_zero
    for q in factor_int(w):
        assert not (_pow(zeta, w // q) - ctx.K.one()).is_zero


def _pow(x: FieldElement, e: int) -> FieldElement:
    return x ** e

# ---------------------------------------------------------------------------
# fixtures


def _context_from_fixture(K: NumberFieldData, config: EffortConfig,
                          fixture: dict) -> ClassUnitContext:
    """Context backed by validated fixture class/unit data.

    Only trivial-class-group fixtures are accepted as computation backends
    (every bundled field has class number one); anything else falls back to
    a live relation search so the discrete-log machinery stays exact.
    """
    units = fixture["units_data"]
    orders = fixture.get("class_orders", [])
    if orders:
        log.info("fixture with nontrivial class group: falling back to search")
        return class_and_units(K, config)
    w, zeta = units["torsion_order"], units["torsion_gen"]
    fundamental = units["fundamental"]
    for u in fundamental:
        if not (u.is_integral and abs(int(u.norm())) == 1 and u.inverse().is_integral):
            raise GalresError("fixture fundamental element is not a unit")
    if not (_pow(zeta, w) - K.one()).is_zero:
        raise GalresError("fixture torsion generator has wrong order")
    for q in factor_int(w):
        if (_pow(zeta, w // q) - K.one()).is_zero:
            raise GalresError("fixture torsion generator has wrong order")
    r1, r2 = K.signature
    if len(fundamental) != r1 + r2 - 1:
        raise GalresError("fixture unit rank does not match the signature")
    if fundamental:
        reg = _regulator(list(fundamental))
        if reg < config.regulator_floor:
            raise RegulatorCheckFailed("fixture regulator below floor")
    unit_data = UnitGroupData(torsion_order=w, torsion_gen=zeta,
                              fundamental=tuple(fundamental),
                              provenance=fixture.get("provenance", "fixture"))
    class_data = ClassGroupData(invariant_factors=(), generator_ideals=(),
                                witnesses=(),
                                provenance=fixture.get("provenance", "fixture"))
    cl = FiniteAbelianGroup(invariant_factors=(), dlog_matrix=(),
                            generator_labels=())
    ctx = ClassUnitContext(K=K, config=config, fb=[], cl=cl,
                           class_data=class_data, units=unit_data,
                           relation_elements=[], relation_matrix=[],
                           provenance=unit_data.provenance)
    return ctx


# fixture-backed contexts have an empty factor base; ideal reductions then
# go through direct principal generator searches
def _fixture_reduce(ctx: ClassUnitContext, prime: PrimeIdealData):
    key = ("reduce", prime.key(), ())
    hit = ctx._cache.get(key)
    if hit is not None:
        return hit
    x = generator_of_principal(ctx, prime.lattice, max_steps=6)
    if x is None:
        raise EffortExceeded(f"no generator found for {prime} (fixture context)")
    if prime.valuation_element(x) != 1:
        raise EffortExceeded(f"generator has excess valuation at {prime}")
    out = (x, [])
    ctx._cache[key] = out
    return out


def _ctx_reduce(ctx: ClassUnitContext, prime: PrimeIdealData,
                avoid: tuple[PrimeIdealData, ...] = ()):
    if not ctx.fb:
        x, v = _fixture_reduce(ctx, prime)
        # support of (x)/prime must avoid the moduli: verify
        for q in avoid:
            if q.key() != prime.key() and q.valuation_element(x):
                raise EffortExceeded("fixture generator meets the modulus")
        return x, v
    return ctx.reduce_to_fb(prime, avoid)


# ---------------------------------------------------------------------------
# (O/m)^* with discrete logarithms


@dataclass
class ResidueUnitGroup:
    """(O/m)^* as a finite abelian group with a total dlog on coprime
    elements."""

    K: NumberFieldData
    modulus: Modulus
    group: FiniteAbelianGroup
    _components: list
    _offsets: list[int]

    def dlog(self, x: FieldElement) -> tuple[int, ...]:
        raw = []
        for comp in self._components:
            raw.extend(comp.digits(x))
        return self.group.dlog(raw)

    @property
    def order(self) -> int:
        return self.group.order


class _PrimePowerComponent:
    """(O/p^k)^* presented on a Teichmueller generator and layer units."""

    def __init__(self, prime: PrimeIdealData, k: int):
        self.prime = prime
        self.k = k
        K = prime.K
        n = K.degree
        self.lattices = [unit_ideal(K)]
        for _ in range(k):
            self.lattices.append(self.lattices[-1] * prime.lattice)
        self.top = self.lattices[k]
        q = prime.norm
        self.q = q
        # quotient structure of p^i / p^(i+1): express the deeper lattice over
        # the basis of the shallower one, an elementary abelian quotient of
        # rank f over the residue characteristic
        from .abgroup import rank_mod
        from .numfield import _solve_hnf
        self._solve_hnf = _solve_hnf
        self.layer_quotients = []  # index i-1 -> FiniteAbelianGroup
        self.layer_gens = []       # list of (level, coords-of-beta)
        self.layer_classes = []    # list of per-level class matrices
        for i in range(1, k):
            Li, Li1 = self.lattices[i], self.lattices[i + 1]
            Mi = [_solve_hnf([list(r) for r in Li.hnf], list(row))
                  for row in Li1.hnf]
            Gi = group_from_relations(prime.K.degree, Mi)
            assert Gi.invariant_factors == (prime.ell,) * prime.f
            self.layer_quotients.append(Gi)
            chosen = []
            classes = []
            for j, row in enumerate(Li.hnf):
                coords = [0] * prime.K.degree
                coords[j] = 1
                cls = list(Gi.dlog(coords))
                if rank_mod(classes + [cls], prime.ell) > len(classes):
                    classes.append(cls)
                    chosen.append(list(row))
                    if len(chosen) == prime.f:
                        break
            assert len(chosen) == prime.f, "layer basis incomplete"
            self.layer_classes.append(classes)
            for beta in chosen:
                self.layer_gens.append((i, beta))
        # Teichmueller generator (skipped when the residue field is F_2)
        self.teich = None
        if q > 2:
            g0 = list(prime.residue_generator())
            t = self._reduce(g0)
            for _ in range(k * prime.e * prime.f + 4):
                t_next = self._pow(t, q)
                if t_next == t:
                    break
                t = t_next
            assert self._pow(t, q) == t
            self.teich = t

    # -- arithmetic mod p^k ---------------------------------------------------

    def _reduce(self, vec):
        return tuple(self.top.reduce_vec(list(vec)))

    def _mul(self, a, b):
        K = self.prime.K
        return self._reduce(_elt_mult_vec(list(a), list(b), K.mult_table(),
                                          K.degree))

    def _pow(self, a, e):
        K = self.prime.K
        n = K.degree
        one = [0] * n
        one[0] = 1
        result = self._reduce(one)
        base = tuple(a)
        while e:
            if e & 1:
                result = self._mul(result, base)
            base = self._mul(base, base)
            e >>= 1
        return result

    def _one(self):
        n = self.prime.K.degree
        one = [0] * n
        one[0] = 1
        return self._reduce(one)

    def _inverse(self, a):
        """Inverse modulo p^k by Hensel-lifting the residue-field inverse."""
        inv = list(self.prime.res_inverse(self.prime.reduce_element(
            FieldElement(self.prime.K, tuple(a), 1))))
        x = self._reduce(inv)
        # Newton iteration x -> x(2 - a x) doubles the precision
        steps = max(1, self.k.bit_length() + 2)
        two = [0] * self.prime.K.degree
        two[0] = 2
        two = self._reduce(two)
        for _ in range(steps):
            ax = self._mul(a, x)
            x = self._mul(x, self._sub(two, ax))
        assert self._mul(a, x) == self._one()
        return x

    def _sub(self, a, b):
        return self._reduce([x - y for x, y in zip(a, b)])

    def element_vec(self, x: FieldElement):
        """Coordinates of x mod p^k (x must be coprime to p)."""
        if self.prime.valuation_element(x) != 0:
            raise NotCoprime(f"element shares {self.prime} with the modulus")
        num = self._reduce(x.num)
        if x.den % self.prime.ell == 0:
            raise NotCoprime("denominator meets the modulus")
        if x.den != 1:
            dinv = pow(x.den, -1, self.prime.ell ** (self.k * self.prime.e
                                                     * self.prime.f + 1))
            num = self._reduce([v * dinv for v in x.num])
        return num

    # -- digits ----------------------------------------------------------------

    def ngens(self) -> int:
        return (1 if self.teich is not None else 0) + len(self.layer_gens)

    def digits(self, x: FieldElement):
        return self.digits_vec(self.element_vec(x))

    def digits_vec(self, vec):
        out = []
        cur = tuple(vec)
        if self.teich is not None:
            a = self.prime.res_dlog(self.prime.lattice.reduce_vec(list(cur)))
            out.append(a)
            if a:
                tinv = self._inverse(self.teich)
                cur = self._mul(cur, self._pow(tinv, a))
        ell = self.prime.ell
        one = self._one()
        for i in range(1, self.k):
            betas = [b for lev, b in self.layer_gens if lev == i]
            Li = self.lattices[i]
            Gi = self.layer_quotients[i - 1]
            classes = self.layer_classes[i - 1]
            # class of (cur - 1) in p^i / p^(i+1) over the layer basis
            diff = [a - b for a, b in zip(cur, one)]
            coords = self._solve_hnf([list(r) for r in Li.hnf], diff)
            cls = list(Gi.dlog(coords))
            sol = solve_mod([[classes[r][c] for r in range(len(classes))]
                             for c in range(len(cls))], cls, ell)
            assert sol is not None, "layer digit extraction failed"
            coeffs = [s % ell for s in sol]
            for beta, c in zip(betas, coeffs):
                out.append(c)
                if c:
                    u = self._reduce([b + o for b, o in zip(beta, one)])
                    uinv = self._inverse(u)
                    cur = self._mul(cur, self._pow(uinv, c))
        assert cur == self._one(), "digit expansion did not terminate"
        return out

    def relation_rows(self):
        """Relation matrix rows for the presentation on (teich, layer gens)."""
        rows = []
        m = self.ngens()
        off = 1 if self.teich is not None else 0
        if self.teich is not None:
            row = [0] * m
            row[0] = self.q - 1
            # teich^(q-1) = 1 exactly
            assert self._pow(self.teich, self.q - 1) == self._one()
            rows.append(row)
        one = self._one()
        for j, (lev, beta) in enumerate(self.layer_gens):
            u = self._reduce([b + o for b, o in zip(beta, one)])
            digs = self.digits_vec(self._pow(u, self.prime.ell))
            row = [0] * m
            row[off + j] = self.prime.ell
            for t in range(m):
                row[t] -= digs[t]
            rows.append(row)
        return rows


def unit_residue_group(K: NumberFieldData, m: Modulus) -> ResidueUnitGroup:
    """(O/m)^* assembled by CRT from the prime-power components."""
    comps = []
    for prime, k in m.finite:
        comps.append(_PrimePowerComponent(prime, k))
    rows = []
    offsets = []
    total = sum(c.ngens() for c in comps)
    pos = 0
    for c in comps:
        offsets.append(pos)
        for row in c.relation_rows():
            rows.append([0] * pos + row + [0] * (total - pos - c.ngens()))
        pos += c.ngens()
    if total == 0:
        group = FiniteAbelianGroup(invariant_factors=(), dlog_matrix=(),
                                   generator_labels=())
    else:
        group = group_from_relations(total, rows)
    expected = 1
    for prime, k in m.finite:
        expected *= (prime.norm - 1) * prime.norm ** (k - 1)
    assert group.order == expected, "residue unit group order mismatch"
    return ResidueUnitGroup(K=K, modulus=m, group=group,
                            _components=comps, _offsets=offsets)
