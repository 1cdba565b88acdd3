"""
Hermitian linking forms on torsion modules over a discrete valuation ring.

A form is stored on generators e_1, ..., e_n of a module
R/tau^k_1 + ... + R/tau^k_n. The pairing of e_i and e_j is a_ij / tau^m
with m = min(k_i, k_j) and a_ij kept reduced mod tau^m. Two rings are
provided: the integers localized at an odd prime p, and F_p[u] localized
at u. Both have trivial involution and the unit s = (p + 1) / 2 with
s + conj(s) = 1, which is what the diagonalization step needs.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import sympy
from sympy import GF, ZZ
from sympy.ntheory import legendre_symbol

from core.conf import engine_setting
from core.exceptions import (
    InternalConsistencyError,
    PreconditionError,
    SingularFormError,
    SizeLimitError,
)
from core.zmodules import smith_normal_form_over

logger = logging.getLogger(__name__)

SIGNATURE_HYPERBOLIC = (1, 1)
DIMENSION_HYPERBOLIC = (2,)


class DVRSpec:
    """A discrete valuation ring with odd residue characteristic and its uniformizer."""
    name = 'dvr'
    domain = None

    def __init__(self, p):
        p = int(p)
        if p == 2:
            raise PreconditionError('residue characteristic 2 has no unit s with s + conj(s) = 1')
        if not sympy.isprime(p):
            raise PreconditionError(f'{p} is not prime')
        self.p = p

    def __eq__(self, other):
        return type(self) is type(other) and self.p == other.p

    def __hash__(self):
        return hash((type(self).__name__, self.p))

    def __repr__(self):
        return f'{type(self).__name__}({self.p})'

    @property
    def zero(self):
        return self.from_int(0)

    @property
    def one(self):
        return self.from_int(1)

    @property
    def half(self):
        return self.from_int((self.p + 1) // 2)

    def conjugate(self, a):
        return a

    def is_zero(self, a, k):
        return self.valuation(a, k) >= k

    def residue(self, a):
        raise NotImplementedError

    def valuation(self, a, cap):
        """min(v(a), cap); zero has valuation cap."""
        raise NotImplementedError


class LocalIntegers(DVRSpec):
    """Z localized at p, with uniformizer p. Elements are Python ints."""
    name = 'integers'
    domain = ZZ

    @property
    def uniformizer(self):
        return self.p

    def coerce(self, value):
        if isinstance(value, bool) or int(value) != value:
            raise PreconditionError(f'{value!r} is not an integer')
        return int(value)

    def from_int(self, n):
        return int(n)

    def power(self, k):
        return self.p ** k

    def reduce(self, a, k):
        return int(a) % self.p ** k

    def valuation(self, a, cap):
        a = int(a)
        v = 0
        while v < cap and a % self.p == 0:
            a //= self.p
            v += 1
        return v

    def residue(self, a):
        return int(a) % self.p

    def inverse(self, a, k):
        if k == 0:
            return 0
        return pow(int(a), -1, self.p ** k)

    def divide_power(self, a, e):
        q, r = divmod(int(a), self.p ** e)
        if r:
            raise InternalConsistencyError(f'{a} is not divisible by {self.p}^{e}')
        return q

    def elements(self, k):
        return range(self.p ** k)

    def key(self, a):
        return int(a)

    def to_domain(self, a):
        return ZZ(int(a))

    def from_domain(self, a):
        return int(a)


class LocalPolynomials(DVRSpec):
    """F_p[u] localized at u, with uniformizer u."""
    name = 'polynomials'

    def __init__(self, p):
        super().__init__(p)
        self.domain = GF(self.p)[sympy.Symbol('u')]
        self.ring = self.domain.ring
        self.u = self.ring.gens[0]

    @property
    def uniformizer(self):
        return self.u

    def coerce(self, value):
        return self.ring(value)

    def from_int(self, n):
        return self.ring(int(n))

    def power(self, k):
        return self.u ** k

    def reduce(self, a, k):
        a = self.ring(a)
        return self.ring.from_dict({m: c for m, c in a.terms() if m[0] < k})

    def valuation(self, a, cap):
        a = self.reduce(a, cap)
        if not a:
            return cap
        return min(m[0] for m, _ in a.terms())

    def residue(self, a):
        constant = dict(self.ring(a).terms()).get((0,), 0)
        return int(constant) % self.p

    def inverse(self, a, k):
        if k == 0:
            return self.ring.zero
        inverse = self.from_int(pow(self.residue(a), -1, self.p))
        precision = 1
        while precision < k:
            precision = min(2 * precision, k)
            inverse = self.reduce(inverse * (2 - a * inverse), precision)
        return inverse

    def divide_power(self, a, e):
        terms = self.ring(a).terms()
        if any(m[0] < e for m, _ in terms):
            raise InternalConsistencyError(f'{a} is not divisible by u^{e}')
        return self.ring.from_dict({(m[0] - e,): c for m, c in terms})

    def elements(self, k):
        for coeffs in itertools.product(range(self.p), repeat=k):
            yield self.ring.from_dict({(i,): c for i, c in enumerate(coeffs) if c})

    def key(self, a):
        return tuple(sorted((m[0], int(c) % self.p) for m, c in self.ring(a).terms()
                            if int(c) % self.p))

    def to_domain(self, a):
        return self.ring(a)

    def from_domain(self, a):
        return self.ring(a)


@dataclass(frozen=True)
class FormValue:
    """numerator / tau^exponent in Q(R)/R, with a unit numerator unless zero."""
    numerator: object
    exponent: int

    @classmethod
    def normalized(cls, dvr, numerator, exponent):
        v = dvr.valuation(numerator, exponent)
        if v >= exponent:
            return cls(dvr.zero, 0)
        k = exponent - v
        return cls(dvr.reduce(dvr.divide_power(dvr.reduce(numerator, exponent), v), k), k)

    @property
    def is_zero(self):
        return self.exponent == 0

    def aligned(self, dvr, exponent):
        """The numerator over tau^exponent, for exponent >= self.exponent."""
        if exponent < self.exponent:
            raise InternalConsistencyError(
                f'value of order {self.exponent} cannot be written over tau^{exponent}')
        return dvr.reduce(self.numerator * dvr.power(exponent - self.exponent), exponent)


@dataclass(frozen=True)
class TorsionLinkingForm:
    dvr: DVRSpec
    orders: tuple
    gram: tuple

    def __post_init__(self):
        orders = tuple(int(k) for k in self.orders)
        if any(k < 0 for k in orders):
            raise PreconditionError(f'orders must be nonnegative: {orders}')
        n = len(orders)
        if len(self.gram) != n or any(len(row) != n for row in self.gram):
            raise PreconditionError(f'gram must be {n}x{n}')
        dvr = self.dvr
        gram = tuple(
            tuple(dvr.reduce(dvr.coerce(self.gram[i][j]), min(orders[i], orders[j]))
                  for j in range(n))
            for i in range(n))
        for i in range(n):
            for j in range(i + 1, n):
                m = min(orders[i], orders[j])
                if not dvr.is_zero(gram[i][j] - dvr.conjugate(gram[j][i]), m):
                    raise PreconditionError(f'gram is not Hermitian at ({i}, {j})')
        object.__setattr__(self, 'orders', orders)
        object.__setattr__(self, 'gram', gram)

    @property
    def rank(self):
        return len(self.orders)

    @property
    def exponent(self):
        """The largest generator order; tau^exponent kills the module."""
        return max(self.orders, default=0)

    @property
    def length(self):
        """ord(A) as an exponent of tau."""
        return sum(self.orders)

    @cached_property
    def aligned_gram(self):
        """Gram numerators over the common denominator tau^exponent."""
        K = self.exponent
        dvr = self.dvr
        return tuple(
            tuple(dvr.reduce(self.gram[i][j] * dvr.power(K - min(self.orders[i], self.orders[j])), K)
                  for j in range(self.rank))
            for i in range(self.rank))

    def vector(self, coordinates):
        """Coordinates reduced modulo the generator orders."""
        if len(coordinates) != self.rank:
            raise PreconditionError(f'expected {self.rank} coordinates, got {len(coordinates)}')
        return tuple(self.dvr.reduce(self.dvr.coerce(x), k)
                     for x, k in zip(coordinates, self.orders))

    def basis(self):
        return [self.vector([int(i == j) for j in range(self.rank)]) for i in range(self.rank)]

    def is_zero_vector(self, v):
        return all(self.dvr.is_zero(x, k) for x, k in zip(v, self.orders))

    def add(self, v, w, c=1):
        """v + c*w."""
        return tuple(self.dvr.reduce(x + c * y, k) for x, y, k in zip(v, w, self.orders))

    def scale(self, c, v):
        return tuple(self.dvr.reduce(c * x, k) for x, k in zip(v, self.orders))


def order(form):
    return form.length


def nu(form, x):
    """The least k with tau^k x = 0."""
    x = form.vector(x)
    return max((k - form.dvr.valuation(xi, k) for xi, k in zip(x, form.orders)), default=0)


def pairing(form, a, b):
    """lambda(a, b) = sum a_i conj(b_j) lambda(e_i, e_j) in Q(R)/R."""
    dvr = form.dvr
    a, b = form.vector(a), form.vector(b)
    total = dvr.zero
    for i, ai in enumerate(a):
        if not ai:
            continue
        row = form.aligned_gram[i]
        for j, bj in enumerate(b):
            if bj:
                total = total + ai * dvr.conjugate(bj) * row[j]
    return FormValue.normalized(dvr, total, form.exponent)


def gram_of(form, vectors, orders):
    """The form restricted to vectors of the given orders, as a new TorsionLinkingForm."""
    dvr = form.dvr
    gram = []
    for v, k in zip(vectors, orders):
        row = []
        for w, m in zip(vectors, orders):
            row.append(pairing(form, v, w).aligned(dvr, min(k, m)))
        gram.append(tuple(row))
    return TorsionLinkingForm(dvr, tuple(orders), tuple(gram))


def direct_sum(first, second):
    if first.dvr != second.dvr:
        raise PreconditionError(f'forms over {first.dvr!r} and {second.dvr!r}')
    n, m = first.rank, second.rank
    zero = first.dvr.zero
    gram = [list(row) + [zero] * m for row in first.gram]
    gram += [[zero] * n + list(row) for row in second.gram]
    return TorsionLinkingForm(first.dvr, first.orders + second.orders, tuple(map(tuple, gram)))


def negate(form):
    """-lambda on the same module."""
    return TorsionLinkingForm(form.dvr, form.orders,
                              tuple(tuple(-x for x in row) for row in form.gram))


def diagonal_form(dvr, orders, units):
    n = len(orders)
    gram = tuple(tuple(units[i] if i == j else 0 for j in range(n)) for i in range(n))
    return TorsionLinkingForm(dvr, tuple(orders), gram)


@dataclass(frozen=True)
class Diagonalization:
    """An orthogonal basis of cyclic summands with lambda(e_i, e_i) = unit_i / tau^order_i."""
    dvr: DVRSpec
    orders: tuple
    units: tuple
    basis: tuple

    @property
    def residues(self):
        return tuple(self.dvr.residue(u) for u in self.units)

    @property
    def unit_values(self):
        return tuple(FormValue(u, k) for u, k in zip(self.units, self.orders))

    def form(self):
        return diagonal_form(self.dvr, self.orders, self.units)


def diagonalize(form):
    """
    Split off cyclic summands <a> with nu(lambda(a, a)) = nu(a), largest order first.

    The pivot is the lowest-index basis vector of maximal order whose
    self-pairing has full order. When there is none, a = b_i + s r^-1 b_j for
    the first partner b_j with r = lambda(b_i, b_j) of full order. Every other
    basis vector b is then replaced by its projection b - (lambda(b, a) / lambda(a, a)) a.
    """
    dvr = form.dvr
    basis = [(v, k) for v, k in zip(form.basis(), form.orders) if k > 0]
    orders, units, vectors = [], [], []
    while basis:
        top = max(k for _, k in basis)
        candidates = [i for i, (_, k) in enumerate(basis) if k == top]
        index = next((i for i in candidates
                      if pairing(form, basis[i][0], basis[i][0]).exponent == top), None)
        if index is not None:
            pivot = basis[index][0]
        else:
            index = candidates[0]
            b = basis[index][0]
            partner = None
            for j in candidates[1:]:
                value = pairing(form, b, basis[j][0])
                if value.exponent == top:
                    partner = (basis[j][0], value.numerator)
                    break
            if partner is None:
                raise SingularFormError(f'no partner of full order {top} for generator {index}')
            c, r = partner
            pivot = form.add(b, c, dvr.reduce(dvr.half * dvr.inverse(r, top), top))
        u = pairing(form, pivot, pivot)
        if u.exponent != top:
            raise InternalConsistencyError('pivot self-pairing lost full order')
        u_inverse = dvr.inverse(u.numerator, top)
        rest = []
        for i, (v, k) in enumerate(basis):
            if i == index:
                continue
            w = pairing(form, v, pivot).aligned(dvr, top)
            rest.append((form.add(v, pivot, -dvr.reduce(w * u_inverse, top)), k))
        orders.append(top)
        units.append(u.numerator)
        vectors.append(pivot)
        basis = rest
    logger.debug('diagonalized form of rank %d over %r: orders %s', form.rank, dvr, orders)
    return Diagonalization(dvr, tuple(orders), tuple(units), tuple(vectors))


def is_nonsingular(form):
    try:
        diagonalize(form)
    except SingularFormError:
        return False
    return True


@dataclass(frozen=True)
class PhiData:
    """
    The graded residue forms Phi_k: for each k the unit residues of the
    order-k summands of a diagonalization.
    """
    p: int
    pieces: dict = field(default_factory=dict)

    @property
    def is_empty(self):
        return not self.pieces

    def dimension(self, k):
        return len(self.pieces.get(k, ()))

    def discriminant(self, k):
        """Square class of the determinant of Phi_k, as a Legendre symbol."""
        return legendre_symbol(math.prod(self.pieces.get(k, ())) % self.p, self.p)

    def invariants(self):
        """{k: (dim, discriminant class)}: the isometry type of each Phi_k over F_p."""
        return {k: (self.dimension(k), self.discriminant(k)) for k in sorted(self.pieces)}


def phi_graded(form):
    diagonal = diagonalize(form)
    pieces = {}
    for k, residue in zip(diagonal.orders, diagonal.residues):
        pieces.setdefault(k, []).append(residue)
    return PhiData(form.dvr.p, {k: tuple(sorted(v)) for k, v in sorted(pieces.items())})


def phi_dimension_monoid(phi):
    """Phi_k mapped to the dimension monoid N, where H = (2,)."""
    return {k: (phi.dimension(k),) for k in sorted(phi.pieces)}


def _complement_lattice(form, gens):
    """
    A basis of {x in R^n : lambda(x, m) = 0 for m in gens} as V * diag(tau^e).

    Returns (V, V^-1, e) with V, V^-1 over the ring's sympy domain.
    """
    dvr = form.dvr
    n, K = form.rank, form.exponent
    domain = dvr.domain
    gens = [g for g in gens if not form.is_zero_vector(g)]
    if not gens:
        identity = [[domain.one if i == j else domain.zero for j in range(n)] for i in range(n)]
        return identity, [row[:] for row in identity], [0] * n
    rows = []
    for g in gens:
        row = []
        for i in range(n):
            entry = dvr.zero
            for j, gj in enumerate(g):
                if gj:
                    entry = entry + form.aligned_gram[i][j] * dvr.conjugate(gj)
            row.append(dvr.to_domain(dvr.reduce(entry, K)))
        rows.append(row)
    smith = smith_normal_form_over(rows, domain)
    exponents = []
    for i in range(n):
        d = smith.diagonal[i] if i < len(smith.diagonal) else domain.zero
        if not d:
            exponents.append(0)
        else:
            exponents.append(max(0, K - dvr.valuation(dvr.from_domain(d), K)))
    return smith.right, smith.right_inverse, exponents


def orthogonal_complement(form, gens):
    """Generators of M^perp for M generated by gens."""
    dvr = form.dvr
    gens = [form.vector(g) for g in gens]
    right, _, exponents = _complement_lattice(form, gens)
    result = []
    for i, e in enumerate(exponents):
        v = form.vector([dvr.from_domain(right[r][i]) * dvr.power(e) for r in range(form.rank)])
        if not form.is_zero_vector(v):
            result.append(v)
    return result


def submodule_order(form, gens):
    """ord(M) as an exponent of tau."""
    dvr = form.dvr
    n = form.rank
    if n == 0:
        return 0
    columns = [form.vector(g) for g in gens]
    columns += [[dvr.power(k) if r == i else dvr.zero for r in range(n)]
                for i, k in enumerate(form.orders)]
    matrix = [[dvr.to_domain(column[r]) for column in columns] for r in range(n)]
    smith = smith_normal_form_over(matrix, dvr.domain)
    colength = sum(dvr.valuation(dvr.from_domain(d), form.exponent) for d in smith.diagonal)
    return form.length - colength


def contains(form, gens, x):
    return submodule_order(form, list(gens) + [x]) == submodule_order(form, gens)


def same_submodule(form, first, second):
    both = submodule_order(form, list(first) + list(second))
    return submodule_order(form, first) == both == submodule_order(form, second)


def quotient_form(form, isotropic):
    """The form induced on G^perp / G for an isotropic submodule G."""
    dvr = form.dvr
    n = form.rank
    gens = [form.vector(g) for g in isotropic]
    for a in gens:
        for b in gens:
            if not pairing(form, a, b).is_zero:
                raise PreconditionError('submodule is not contained in its orthogonal complement')
    gens = [g for g in gens if not form.is_zero_vector(g)]
    right, right_inverse, exponents = _complement_lattice(form, gens)
    columns = [list(g) for g in gens]
    columns += [[dvr.power(k) if r == i else dvr.zero for r in range(n)]
                for i, k in enumerate(form.orders)]
    # coordinates of the relations in the basis V * diag(tau^e) of the complement
    coordinates = []
    for i in range(n):
        row = []
        for column in columns:
            entry = dvr.zero
            for r in range(n):
                entry = entry + dvr.from_domain(right_inverse[i][r]) * column[r]
            row.append(dvr.to_domain(dvr.divide_power(entry, exponents[i])))
        coordinates.append(row)
    smith = smith_normal_form_over(coordinates, dvr.domain)
    vectors, orders = [], []
    for i, d in enumerate(smith.diagonal):
        k = dvr.valuation(dvr.from_domain(d), form.exponent)
        if k == 0:
            continue
        vector = []
        for r in range(n):
            entry = dvr.zero
            for s in range(n):
                entry = entry + (dvr.from_domain(right[r][s]) * dvr.power(exponents[s])
                                 * dvr.from_domain(smith.left_inverse[s][i]))
            vector.append(entry)
        vectors.append(form.vector(vector))
        orders.append(k)
    ranked = sorted(zip(orders, range(len(orders))), key=lambda item: -item[0])
    vectors = [vectors[i] for _, i in ranked]
    orders = [k for k, _ in ranked]
    logger.debug('quotient by %d generators: orders %s -> %s', len(gens), form.orders, orders)
    return gram_of(form, vectors, orders)


def _module_elements(form):
    ranges = [list(form.dvr.elements(k)) for k in form.orders]
    return [tuple(v) for v in itertools.product(*ranges)]


def find_metabolizer_brute(form):
    """
    A submodule P with P = P^perp, found by exhaustive search, or None.

    Generators are tried in enumeration order, each one isotropic and
    orthogonal to those already chosen, until |P|^2 = |A|.
    """
    dvr = form.dvr
    if form.length % 2:
        return None
    size = dvr.p ** form.length
    limit = engine_setting('METABOLIZER_SEARCH_LIMIT', 6561)
    if size > limit:
        raise SizeLimitError(f'module of order {size} exceeds the metabolizer search limit {limit}',
                             required=size, limit=limit)
    isotropic = [x for x in _module_elements(form)
                 if not form.is_zero_vector(x) and pairing(form, x, x).is_zero]
    scalars = list(dvr.elements(form.exponent))
    keyed = lambda v: tuple(dvr.key(x) for x in v)
    zero = form.vector([0] * form.rank)
    logger.debug('metabolizer search: |A| = %d, %d isotropic elements', size, len(isotropic))

    def closure(span, x):
        grown = dict(span)
        for s in span.values():
            for c in scalars:
                y = form.add(s, x, c)
                grown.setdefault(keyed(y), y)
        return grown

    def search(span, chosen, start):
        if len(span) ** 2 == size:
            return chosen
        for index in range(start, len(isotropic)):
            x = isotropic[index]
            if keyed(x) in span:
                continue
            if any(not pairing(form, x, g).is_zero for g in chosen):
                continue
            grown = closure(span, x)
            if len(grown) ** 2 > size:
                continue
            found = search(grown, chosen + [x], index + 1)
            if found is not None:
                return found
        return None

    return search({keyed(zero): zero}, [], 0)


def is_metabolic_brute(form):
    return find_metabolizer_brute(form) is not None


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    T: dict = field(default_factory=dict)
    h: dict = field(default_factory=dict)


def _tail_sums(phi, top, width):
    """S_n = Phi_n + Phi_{n+2} + ... for 1 <= n <= top."""
    zero = (0,) * width
    sums = {}
    for n in range(top + 2, 0, -1):
        here = phi.get(n, zero)
        above = sums.get(n + 2, zero)
        sums[n] = tuple(a + b for a, b in zip(here, above))
    return sums


def geq_M_feasible(lhs, rhs, hyperbolic=SIGNATURE_HYPERBOLIC):
    """
    Search for T_n >= 0 and h_n in N with T_1 = 0 and h_n >= h_{n+2} such that

        T_n + h_n H + sum_i rhs_{n+2i} = h_{n+1} H + sum_i lhs_{n+2i}

    for every n >= 1. `lhs` and `rhs` map k to a vector in N^d and H is the
    hyperbolic class. Shifting all h_n by a constant leaves T_n unchanged, so
    h_n = 0 beyond the largest order.
    """
    width = len(hyperbolic)
    for phi in (lhs, rhs):
        if any(len(v) != width for v in phi.values()):
            raise PreconditionError(f'monoid elements must have {width} components')
    top = max(list(lhs) + list(rhs), default=0) + 2
    left, right = _tail_sums(lhs, top, width), _tail_sums(rhs, top, width)
    total = sum(sum(v) for v in lhs.values()) + sum(sum(v) for v in rhs.values())
    zero = (0,) * width

    def t_value(n, h_n, h_next):
        s_left = left.get(n, zero)
        s_right = right.get(n, zero)
        return tuple(h_next * hc + a - h_n * hc - b
                     for hc, a, b in zip(hyperbolic, s_left, s_right))

    @lru_cache(maxsize=None)
    def solve(n, h_next, h_next2):
        """Choices h_n, ..., h_1 given h_{n+1} and h_{n+2}."""
        if n == 0:
            return ()
        for h_n in range(h_next2, total + 1):
            t = t_value(n, h_n, h_next)
            if any(x < 0 for x in t):
                if all(hc >= 0 for hc in hyperbolic):
                    break
                continue
            if n == 1 and any(t):
                continue
            rest = solve(n - 1, h_n, h_next)
            if rest is not None:
                return (h_n,) + rest
        return None

    found = solve(top, 0, 0)
    if found is None:
        return FeasibilityResult(False)
    h = {top - i: value for i, value in enumerate(found)}
    T = {n: t_value(n, h[n], h.get(n + 1, 0)) for n in range(1, top + 1)}
    return FeasibilityResult(True, T, h)
