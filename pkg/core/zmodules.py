"""
Smith normal forms and finite abelian groups.

The Smith normal form here runs over any Euclidean sympy domain (ZZ, QQ[t],
GF(p)[u]) and keeps both transforms with their inverses, so the same code
serves cokernels of integer matrices, elementary divisors over Q[t] and
lattice computations for linking forms. The second half is the
Littlewood-Richardson combinatorics behind the double branched cover test.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import sympy
from sympy import QQ, ZZ
from sympy.utilities.iterables import partitions as _sympy_partitions

from core.conf import engine_setting
from core.exceptions import PreconditionError, SizeLimitError
from core.laurent import RAT, T, LaurentPoly, monic

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmithForm:
    """U * M * V = D with D diagonal; all matrices are lists of rows."""
    diagonal: tuple
    left: list
    left_inverse: list
    right: list
    right_inverse: list


def euclidean_size(domain, a):
    """Size function that decreases along Euclidean division in `domain`."""
    if domain.is_ZZ:
        return abs(int(a))
    if domain.is_PolynomialRing:
        return a.degree()
    return 0


def _canonical_unit(domain, a):
    """The unit u making u*a canonical (positive, monic, or 1)."""
    if domain.is_ZZ:
        return domain(-1) if a < 0 else domain.one
    if domain.is_PolynomialRing:
        ground = domain.domain
        return domain.ring.ground_new(ground.exquo(ground.one, a.LC))
    return domain.exquo(domain.one, a)


def _identity(n, domain):
    return [[domain.one if i == j else domain.zero for j in range(n)] for i in range(n)]


class _Reducer:
    """Row and column moves that keep U, U^-1, V, V^-1 in step."""

    def __init__(self, matrix, domain):
        self.domain = domain
        self.a = [[domain.convert(x) for x in row] for row in matrix]
        self.rows = len(self.a)
        self.cols = len(self.a[0]) if self.rows else 0
        self.u = _identity(self.rows, domain)
        self.u_inv = _identity(self.rows, domain)
        self.v = _identity(self.cols, domain)
        self.v_inv = _identity(self.cols, domain)
        self.moves = 0

    def swap_rows(self, i, j):
        if i == j:
            return
        for m in (self.a, self.u):
            m[i], m[j] = m[j], m[i]
        for row in self.u_inv:
            row[i], row[j] = row[j], row[i]

    def swap_cols(self, i, j):
        if i == j:
            return
        for m in (self.a, self.v):
            for row in m:
                row[i], row[j] = row[j], row[i]
        self.v_inv[i], self.v_inv[j] = self.v_inv[j], self.v_inv[i]

    def add_row(self, target, source, c):
        """row[target] += c * row[source]."""
        self.moves += 1
        for m in (self.a, self.u):
            m[target] = [x + c * y for x, y in zip(m[target], m[source])]
        for row in self.u_inv:
            row[source] = row[source] - c * row[target]

    def add_col(self, target, source, c):
        """col[target] += c * col[source]."""
        self.moves += 1
        for m in (self.a, self.v):
            for row in m:
                row[target] = row[target] + c * row[source]
        self.v_inv[source] = [x - c * y for x, y in zip(self.v_inv[source], self.v_inv[target])]

    def scale_row(self, i, unit):
        inverse = self.domain.exquo(self.domain.one, unit)
        for m in (self.a, self.u):
            m[i] = [unit * x for x in m[i]]
        for row in self.u_inv:
            row[i] = row[i] * inverse

    def size(self, x):
        return euclidean_size(self.domain, x)

    def smallest_entry(self, start):
        best = None
        for i in range(start, self.rows):
            for j in range(start, self.cols):
                x = self.a[i][j]
                if x and (best is None or self.size(x) < best[0]):
                    best = (self.size(x), i, j)
        return best

    def clear_pivot(self, t):
        """Zero row t and column t outside the pivot, keeping a[t][t] dividing the rest."""
        dom = self.domain
        while True:
            pivot = self.a[t][t]
            for i in range(t + 1, self.rows):
                if self.a[i][t]:
                    q, _ = dom.div(self.a[i][t], pivot)
                    if q:
                        self.add_row(i, t, -q)
            for j in range(t + 1, self.cols):
                if self.a[t][j]:
                    q, _ = dom.div(self.a[t][j], pivot)
                    if q:
                        self.add_col(j, t, -q)
            leftover = [(self.size(self.a[i][t]), 'row', i)
                        for i in range(t + 1, self.rows) if self.a[i][t]]
            leftover += [(self.size(self.a[t][j]), 'col', j)
                         for j in range(t + 1, self.cols) if self.a[t][j]]
            if leftover:
                _, kind, index = min(leftover)
                if kind == 'row':
                    self.swap_rows(t, index)
                else:
                    self.swap_cols(t, index)
                continue
            bad = next(((i, j) for i in range(t + 1, self.rows)
                        for j in range(t + 1, self.cols)
                        if self.a[i][j] and dom.div(self.a[i][j], pivot)[1]), None)
            if bad is None:
                return
            self.add_row(t, bad[0], dom.one)


def smith_normal_form_over(matrix, domain):
    """Smith normal form of `matrix` over a Euclidean sympy domain."""
    red = _Reducer(matrix, domain)
    for t in range(min(red.rows, red.cols)):
        best = red.smallest_entry(t)
        if best is None:
            break
        _, i, j = best
        red.swap_rows(t, i)
        red.swap_cols(t, j)
        red.clear_pivot(t)
        red.scale_row(t, _canonical_unit(domain, red.a[t][t]))
    diagonal = tuple(red.a[i][i] for i in range(min(red.rows, red.cols)))
    logger.debug('smith form over %s: %dx%d matrix, %d moves', domain, red.rows, red.cols, red.moves)
    return SmithForm(diagonal, red.u, red.u_inv, red.v, red.v_inv)


def smith_normal_form(matrix):
    """Smith normal form over Z: (diagonal, U, V) with U*M*V = D, as Python ints."""
    form = smith_normal_form_over(matrix, ZZ)
    to_int = lambda m: [[int(x) for x in row] for row in m]
    return tuple(int(d) for d in form.diagonal), to_int(form.left), to_int(form.right)


@dataclass(frozen=True)
class AbelianGroup:
    """Z/d_1 + ... + Z/d_k + Z^free_rank with d_1 | d_2 | ... and every d_i >= 2."""
    invariant_factors: tuple = ()
    free_rank: int = 0

    def __post_init__(self):
        factors = tuple(int(d) for d in self.invariant_factors)
        if any(d < 2 for d in factors):
            raise PreconditionError(f'invariant factors must be at least 2: {factors}')
        if any(b % a for a, b in zip(factors, factors[1:])):
            raise PreconditionError(f'invariant factors must form a divisibility chain: {factors}')
        object.__setattr__(self, 'invariant_factors', factors)

    @property
    def is_finite(self):
        return self.free_rank == 0

    @property
    def order(self):
        """Group order, with 0 standing for an infinite group."""
        if not self.is_finite:
            return 0
        return math.prod(self.invariant_factors)

    @property
    def rank(self):
        return len(self.invariant_factors) + self.free_rank

    def __str__(self):
        parts = [f'Z/{d}' for d in self.invariant_factors]
        if self.free_rank == 1:
            parts.append('Z')
        elif self.free_rank > 1:
            parts.append(f'Z^{self.free_rank}')
        return ' + '.join(parts) if parts else '0'

    @classmethod
    def from_primary(cls, primary, free_rank=0):
        """Build a group from {p: partition}."""
        length = max((len(lam) for lam in primary.values()), default=0)
        factors = []
        for k in range(length):
            d = 1
            for p, lam in primary.items():
                if k < len(lam):
                    d *= p ** lam[k]
            factors.append(d)
        return cls(tuple(reversed(factors)), free_rank)

    @classmethod
    def from_orders(cls, orders):
        """Build a group from the orders of arbitrary cyclic summands."""
        primary = {}
        for n in orders:
            for p, e in sympy.factorint(n).items():
                primary.setdefault(p, []).append(e)
        return cls.from_primary({p: tuple(sorted(lam, reverse=True))
                                 for p, lam in primary.items()})


def direct_sum(a, b):
    """A + B."""
    torsion_a = primary_decomposition(AbelianGroup(a.invariant_factors))
    torsion_b = primary_decomposition(AbelianGroup(b.invariant_factors))
    return AbelianGroup.from_primary(_merge_primary(torsion_a, torsion_b),
                                     a.free_rank + b.free_rank)


def _merge_primary(first, second):
    merged = {}
    for p in set(first) | set(second):
        parts = list(first.get(p, ())) + list(second.get(p, ()))
        merged[p] = tuple(sorted(parts, reverse=True))
    return merged


def cokernel(matrix):
    """The abelian group presented by an integer matrix (columns are relations)."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    diagonal, _, _ = smith_normal_form(matrix) if rows and cols else ((), None, None)
    factors = tuple(abs(d) for d in diagonal if abs(d) > 1)
    free_rank = sum(1 for d in diagonal if d == 0) + (rows - min(rows, cols))
    return AbelianGroup(factors, free_rank)


def primary_decomposition(group):
    """{p: partition} with the exponents of p in the invariant factors, decreasing."""
    if not group.is_finite:
        raise PreconditionError(f'{group} is infinite')
    primary = {}
    for d in group.invariant_factors:
        for p, e in sympy.factorint(d).items():
            primary.setdefault(p, []).append(e)
    return {p: tuple(sorted(lam, reverse=True)) for p, lam in sorted(primary.items())}


def _partition(values):
    lam = tuple(sorted((int(v) for v in values if v), reverse=True))
    if any(v < 0 for v in lam):
        raise PreconditionError(f'negative part in {values}')
    return lam


def _contains(outer, inner):
    return len(inner) <= len(outer) and all(a >= b for a, b in zip(outer, inner))


def lr_positive(lam, mu, nu):
    """
    True iff there is a Littlewood-Richardson tableau of shape lam/mu and content nu.

    Cells are filled in reading order (rows top to bottom, each row right to
    left) so the lattice-word condition can be checked on the prefix.
    """
    lam, mu, nu = _partition(lam), _partition(mu), _partition(nu)
    if sum(lam) != sum(mu) + sum(nu):
        return False
    if not (_contains(lam, mu) and _contains(lam, nu)):
        return False
    mu_at = lambda r: mu[r] if r < len(mu) else 0
    cells = [(r, c) for r in range(len(lam)) for c in reversed(range(mu_at(r), lam[r]))]
    filling = {}
    counts = [0] * (len(nu) + 1)

    def place(index):
        if index == len(cells):
            return True
        r, c = cells[index]
        low = filling[(r - 1, c)] + 1 if (r - 1, c) in filling else 1
        high = min(len(nu), filling.get((r, c + 1), len(nu)))
        for v in range(low, high + 1):
            if counts[v] >= nu[v - 1]:
                continue
            if v > 1 and counts[v] >= counts[v - 1]:
                continue
            filling[(r, c)] = v
            counts[v] += 1
            if place(index + 1):
                return True
            counts[v] -= 1
            del filling[(r, c)]
        return False

    return place(0)


def partitions_of(n):
    """All partitions of n as decreasing tuples."""
    if n == 0:
        return [()]
    result = []
    for p in _sympy_partitions(n):
        parts = []
        for value, multiplicity in sorted(p.items(), reverse=True):
            parts.extend([value] * multiplicity)
        result.append(tuple(parts))
    return result


def embedding_cokernel_types(lam_a, lam_b):
    """Types nu of A/B over all embeddings of a p-group of type lam_b into one of type lam_a."""
    lam_a, lam_b = _partition(lam_a), _partition(lam_b)
    n = sum(lam_a) - sum(lam_b)
    if n < 0:
        return set()
    return {nu for nu in partitions_of(n)
            if _contains(lam_a, nu) and lr_positive(lam_a, lam_b, nu)}


def square_extension_witness(nu):
    """A mu with an extension 0 -> G -> W -> G -> 0, G of type mu, W of type nu; or None."""
    nu = _partition(nu)
    total = sum(nu)
    if total % 2:
        return None
    for mu in partitions_of(total // 2):
        if lr_positive(nu, mu, mu):
            return mu
    return None


def square_extension_exists(nu):
    return square_extension_witness(nu) is not None


def _group_elements(factors):
    return itertools.product(*(range(d) for d in factors))


def brute_cokernel_types(a, b):
    """
    Cokernel types of all injective homomorphisms B -> A, found by enumeration.

    Returns {p: set of partitions} over the primes dividing |A|, or an empty
    dict when B does not embed in A.
    """
    if not (a.is_finite and b.is_finite):
        raise PreconditionError('brute force needs finite groups')
    limit = engine_setting('BRUTE_FORCE_LIMIT', 10000)
    if a.order > limit:
        raise SizeLimitError(f'|A| = {a.order} exceeds the brute force limit',
                             required=a.order, limit=limit)
    fa, fb = a.invariant_factors, b.invariant_factors
    candidates = []
    for d in fb:
        candidates.append([x for x in _group_elements(fa)
                           if all((d * xi) % ai == 0 for xi, ai in zip(x, fa))])
    primes = sorted(sympy.factorint(a.order)) if a.order > 1 else []
    found = {}
    seen = set()
    homs = 0
    for images in itertools.product(*candidates):
        homs += 1
        image = set()
        for coefficients in _group_elements(fb):
            image.add(tuple(sum(c * x[k] for c, x in zip(coefficients, images)) % ak
                            for k, ak in enumerate(fa)))
        if len(image) != b.order:
            continue
        image = frozenset(image)
        if image in seen:
            continue
        seen.add(image)
        relations = [[ak if k == i else 0 for i in range(len(fa))] for k, ak in enumerate(fa)]
        presentation = [row + [x[k] for x in images] for k, row in enumerate(relations)]
        quotient = cokernel(presentation) if fa else AbelianGroup()
        primary = primary_decomposition(quotient)
        for p in primes:
            found.setdefault(p, set()).add(primary.get(p, ()))
    logger.debug('brute force: %d homomorphisms from %s into %s, %d images',
                 homs, b, a, len(seen))
    return found


def smith_over_rational_polynomials(matrix):
    """Monic elementary divisors over Q[t] of a matrix of Laurent polynomials."""
    rows = []
    for row in matrix:
        row = [entry.with_ring(RAT) for entry in row]
        shift = min((entry.low for entry in row if not entry.is_zero), default=0)
        rows.append([LaurentPoly(RAT, entry.low - shift, entry.coeffs) for entry in row])
    domain = QQ[T]
    form = smith_normal_form_over([[e.to_polynomial(domain) for e in row] for row in rows],
                                  domain)
    return tuple(monic(LaurentPoly.from_ring_element(d, RAT)) for d in form.diagonal)
