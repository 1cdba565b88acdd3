"""
Twisted Alexander polynomials over Z via Fox calculus.

For a presentation of deficiency one and a representation alpha into
GL(n, Z), the twisted first homology has order W_j * Delta_0 where

    W_j = det(Fox block Jacobian without block column j) / det(t^phi(x_j) alpha(x_j) - I)

and Delta_0 is the order of the twisted zeroth homology. The metabelian
representations come from the left-regular action of the finite group
(H_1(X_infinity) tensor F_p[t]/(t^r - 1)) semidirect Z/r on itself.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy
from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from core.conf import engine_setting
from core.exceptions import (
    InternalConsistencyError,
    PreconditionError,
    SizeLimitError,
    ZeroPolynomialError,
)
from core.laurent import (
    INT,
    RAT,
    LaurentPoly,
    cyclotomic,
    exact_quotient,
    normalize_units,
    one,
    primitive_part,
    resultant,
    to_integral,
)
from core.seifert import cover_module_fp
from core.wirtinger import alexander_module_presentation, fox_derivative
from core.zmodules import smith_over_rational_polynomials

logger = logging.getLogger(__name__)


def _integer_matrix(rows):
    matrix = tuple(tuple(int(x) for x in row) for row in rows)
    if any(len(row) != len(matrix) for row in matrix):
        raise PreconditionError('representation images must be square')
    return matrix


@dataclass(frozen=True)
class Representation:
    """Integer matrices for the generators of a presentation, one per generator."""
    dimension: int
    images: tuple

    def __post_init__(self):
        images = tuple(_integer_matrix(m) for m in self.images)
        if any(len(m) != self.dimension for m in images):
            raise PreconditionError(f'every image must be {self.dimension}x{self.dimension}')
        object.__setattr__(self, 'images', images)

    @classmethod
    def trivial(cls, generators, dimension=1):
        identity = np.identity(dimension, dtype=int).tolist()
        return cls(dimension, (identity,) * generators)

    @cached_property
    def _arrays(self):
        return [np.array(m, dtype=object) for m in self.images]

    @cached_property
    def _inverses(self):
        inverses = []
        for image in self.images:
            matrix = DomainMatrix.from_list([list(row) for row in image], ZZ).convert_to(QQ)
            try:
                inverse = matrix.inv().to_list()
            except DMNonInvertibleMatrixError as exc:
                raise PreconditionError('representation image is singular') from exc
            if any(QQ.to_sympy(x).q != 1 for row in inverse for x in row):
                raise PreconditionError('representation image is not invertible over Z')
            inverses.append(np.array([[int(QQ.to_sympy(x)) for x in row] for row in inverse],
                                     dtype=object))
        return inverses

    def letter(self, g, e):
        return self._arrays[g] if e == 1 else self._inverses[g]

    def word_image(self, word):
        """alpha(word) as an object array of Python integers."""
        result = np.identity(self.dimension, dtype=int).astype(object)
        for g, e in word:
            result = result.dot(self.letter(g, e))
        return result

    def conjugate(self, change):
        """The representation P^-1 alpha P for a unimodular P."""
        P = Representation(self.dimension, (change,))
        P_inv = P.letter(0, -1)
        P_arr = P.letter(0, 1)
        images = [P_inv.dot(self._arrays[g]).dot(P_arr).tolist() for g in range(len(self.images))]
        return Representation(self.dimension, tuple(images))

    def direct_sum(self, other):
        """Block diagonal sum; both must cover the same generators."""
        if len(self.images) != len(other.images):
            raise PreconditionError('representations on different presentations')
        n, m = self.dimension, other.dimension
        images = []
        for a, b in zip(self.images, other.images):
            block = np.zeros((n + m, n + m), dtype=int)
            block[:n, :n] = a
            block[n:, n:] = b
            images.append(block.tolist())
        return Representation(n + m, tuple(images))


class PermutationRepresentation(Representation):
    """A representation by permutation matrices: image g sends basis vector h to perm[h]."""

    def __init__(self, permutations):
        permutations = tuple(tuple(int(x) for x in perm) for perm in permutations)
        size = len(permutations[0]) if permutations else 1
        for perm in permutations:
            if sorted(perm) != list(range(size)):
                raise PreconditionError('images must be permutations of one set')
        object.__setattr__(self, 'permutations', permutations)
        super().__init__(size, tuple(permutation_matrix(perm) for perm in permutations))

    def word_permutation(self, word):
        result = list(range(self.dimension))
        for g, e in reversed(word.letters):
            perm = self.permutations[g]
            if e == -1:
                perm = _inverse_permutation(perm)
            result = [perm[x] for x in result]
        return tuple(result)

    def word_image(self, word):
        return np.array(permutation_matrix(self.word_permutation(word)), dtype=object)

    def letter(self, g, e):
        perm = self.permutations[g] if e == 1 else _inverse_permutation(self.permutations[g])
        return np.array(permutation_matrix(perm), dtype=object)


def permutation_matrix(perm):
    """The matrix with a 1 in row perm[h] of column h."""
    matrix = np.zeros((len(perm), len(perm)), dtype=int)
    matrix[list(perm), range(len(perm))] = 1
    return matrix.tolist()


def _inverse_permutation(perm):
    inverse = [0] * len(perm)
    for h, image in enumerate(perm):
        inverse[image] = h
    return tuple(inverse)


def permutation_charpoly(perm):
    """det(t I - P) of a permutation matrix: the product of t^len - 1 over its cycles."""
    seen = set()
    result = one()
    for start in range(len(perm)):
        if start in seen:
            continue
        length, x = 0, start
        while x not in seen:
            seen.add(x)
            x = perm[x]
            length += 1
        result = result * (LaurentPoly.monomial(length) - 1)
    return result


def validate_representation(pres, rep):
    """True iff every relator of `pres` maps to the identity."""
    if len(rep.images) != pres.generators:
        raise PreconditionError(f'{len(rep.images)} images for {pres.generators} generators')
    identity = np.identity(rep.dimension, dtype=int)
    return all(np.array_equal(rep.word_image(r), identity) for r in pres.relators)


def laurent_determinant(matrix):
    """Exact determinant of a square matrix of integer Laurent polynomials."""
    if not matrix:
        return one()
    domain = INT.polynomial_domain
    rows, shift = [], 0
    for row in matrix:
        low = min((e.low for e in row if not e.is_zero), default=0)
        shift += low
        rows.append([LaurentPoly(INT, e.low - low, e.coeffs).to_polynomial(domain) for e in row])
    det = DomainMatrix(rows, (len(rows), len(rows)), domain).det()
    return LaurentPoly.from_ring_element(det, INT, shift)


def _polynomial_gcd(f, g):
    if f.is_zero:
        return g
    if g.is_zero:
        return f
    return LaurentPoly.from_poly(f.to_poly().gcd(g.to_poly()), INT)


def _twisted_block(rep, phi, word_combination):
    """sum c * alpha(w) t^phi(w) as an n x n grid of {exponent: coefficient}."""
    n = rep.dimension
    block = [[{} for _ in range(n)] for _ in range(n)]
    for w, c in word_combination.items():
        image = rep.word_image(w)
        e = w.degree(phi)
        rows, cols = np.nonzero(image)
        for a, b in zip(rows, cols):
            cell = block[a][b]
            cell[e] = cell.get(e, 0) + c * int(image[a, b])
    return [[LaurentPoly.from_dict(cell, INT) for cell in row] for row in block]


def fox_block_jacobian(pres, rep):
    """The (relators * n) x (generators * n) matrix of twisted Fox derivatives."""
    n = rep.dimension
    matrix = [[LaurentPoly.zero(INT)] * (pres.generators * n) for _ in range(len(pres.relators) * n)]
    for i, relator in enumerate(pres.relators):
        for j in range(pres.generators):
            derivative = fox_derivative(relator, j)
            if not derivative:
                continue
            block = _twisted_block(rep, pres.phi, derivative)
            for a in range(n):
                for b in range(n):
                    matrix[i * n + a][j * n + b] = block[a][b]
    return matrix


def boundary_block(pres, rep, j):
    """t^phi(x_j) alpha(x_j) - I."""
    n = rep.dimension
    image = rep.letter(j, 1)
    t = pres.phi[j]
    return [[LaurentPoly.monomial(t, int(image[a, b])) - (1 if a == b else 0) for b in range(n)]
            for a in range(n)]


def zeroth_order(pres, rep, method='auto'):
    """
    Order of the twisted zeroth homology, normalized and primitive.

    'minors' takes the gcd of all maximal minors of the block row
    [t^phi(x_i) alpha(x_i) - I]_i, stopping once it reaches 1;
    'invariant_factors' multiplies the elementary divisors over Q[t].
    'auto' uses minors while their number stays below MINOR_GCD_THRESHOLD.
    """
    n = rep.dimension
    blocks = [boundary_block(pres, rep, i) for i in range(pres.generators)]
    row = [[entry for block in blocks for entry in block[a]] for a in range(n)]
    columns = len(row[0])
    if method == 'auto':
        threshold = engine_setting('MINOR_GCD_THRESHOLD', 5000)
        method = 'minors' if math.comb(columns, n) <= threshold else 'invariant_factors'
    if method == 'minors':
        gcd = LaurentPoly.zero(INT)
        for chosen in itertools.combinations(range(columns), n):
            minor = laurent_determinant([[r[c] for c in chosen] for r in row])
            gcd = _polynomial_gcd(gcd, normalize_units(minor))
            if not gcd.is_zero and gcd.span == 0:
                return one()
        if gcd.is_zero:
            raise InternalConsistencyError('all maximal minors of the boundary map vanish')
        return normalize_units(primitive_part(gcd))
    if method == 'invariant_factors':
        divisors = smith_over_rational_polynomials(row)
        product = one(RAT)
        for d in divisors:
            if d.is_zero:
                raise InternalConsistencyError('the boundary map has a zero invariant factor')
            product = product * d
        return normalize_units(to_integral(product))
    raise PreconditionError(f'unknown zeroth order method {method!r}')


def twisted_alexander(pres, rep, j=0, method='auto'):
    """
    The twisted Alexander polynomial of `pres` with respect to `rep`, normalized.

    Needs a presentation of deficiency one; column j is the generator whose
    block is dropped from the Fox Jacobian.
    """
    if pres.deficiency != 1:
        raise PreconditionError(f'presentation has deficiency {pres.deficiency}, expected 1')
    if not 0 <= j < pres.generators:
        raise PreconditionError(f'column {j} out of range')
    if len(rep.images) != pres.generators:
        raise PreconditionError(f'{len(rep.images)} images for {pres.generators} generators')
    n = rep.dimension
    denominator = laurent_determinant(boundary_block(pres, rep, j))
    if denominator.is_zero:
        raise PreconditionError(f'det(t alpha(x_{j}) - I) vanishes')
    jacobian = fox_block_jacobian(pres, rep)
    kept = [c for c in range(pres.generators * n) if not j * n <= c < (j + 1) * n]
    numerator = laurent_determinant([[row[c] for c in kept] for row in jacobian])
    delta_0 = zeroth_order(pres, rep, method)
    logger.debug('twisted Alexander: %d x %d Jacobian, numerator span %s',
                 len(jacobian), len(kept), None if numerator.is_zero else numerator.span)
    try:
        result = exact_quotient((numerator * delta_0).with_ring(RAT), denominator.with_ring(RAT))
    except PreconditionError as exc:
        raise InternalConsistencyError(f'W_{j} * Delta_0 is not a polynomial') from exc
    if any(sympy.Rational(c).q != 1 for c in result.coeffs):
        raise InternalConsistencyError(f'W_{j} * Delta_0 has non-integral coefficients')
    return normalize_units(result.with_ring(INT))


@dataclass(frozen=True)
class MetabelianRep:
    """
    The group Gamma = M semidirect Z/r with M = H_1(X_infinity) tensor F_p[t]/(t^r - 1).

    `elements` lists (a, v) pairs in lexicographic order; `permutations`
    gives each generator's left multiplication on that list.
    """
    r: int
    p: int
    dimension: int
    action: tuple
    vectors: tuple
    elements: tuple = field(repr=False)
    permutations: tuple = field(repr=False)

    @property
    def order(self):
        return self.r * self.p ** self.dimension

    @cached_property
    def index(self):
        return {element: n for n, element in enumerate(self.elements)}

    @cached_property
    def representation(self):
        return PermutationRepresentation(self.permutations)

    @cached_property
    def _action_matrix(self):
        return np.array(self.action, dtype=int).reshape(self.dimension, self.dimension)

    def act(self, a, v):
        """T^a v."""
        T = self._action_matrix
        vector = np.array(v, dtype=int)
        for _ in range(a % self.r):
            vector = T.dot(vector) % self.p
        return tuple(int(x) for x in vector)

    def multiply(self, g, h):
        (a, v), (b, w) = g, h
        moved = self.act(a, w)
        return (a + b) % self.r, tuple((x + y) % self.p for x, y in zip(v, moved))

    def regular_permutation(self, g):
        """Left multiplication by g on the enumerated elements."""
        return tuple(self.index[self.multiply(g, h)] for h in self.elements)

    def word_element(self, word):
        result = self.elements[0]
        for g, e in reversed(word.letters):
            perm = self.permutations[g]
            if e == -1:
                perm = _inverse_permutation(perm)
            result = self.elements[perm[self.index[result]]]
        return result


def metabelian_rep(pres, r, p):
    """
    The representation alpha^{r,p} of the knot group through Gamma.

    x_i goes to (1, v_i) with v_0 = 0 and v_i the class of x_i x_0^-1.
    Raises SizeLimitError when |Gamma| exceeds GROUP_ORDER_CAP.
    """
    if r < 1:
        raise PreconditionError(f'r must be positive, got {r}')
    if not sympy.isprime(p):
        raise PreconditionError(f'{p} is not prime')
    if any(d != 1 for d in pres.phi):
        raise PreconditionError('metabelian representations need phi = 1 on every generator')
    matrix = alexander_module_presentation(pres, 0)
    generators = pres.generators - 1
    relations = [[matrix[rel][g] for rel in range(len(matrix))] for g in range(generators)]
    module = cover_module_fp(relations, r, p)
    d = module.dimension
    order = r * p ** d
    cap = engine_setting('GROUP_ORDER_CAP', 2000)
    if order > cap:
        raise SizeLimitError(f'|Gamma| = {order} for r={r}, p={p} exceeds the cap {cap}',
                             required=order, limit=cap)
    vectors = ((0,) * d,) + tuple(module.image(i, 0) for i in range(generators))
    action = module.action
    elements = tuple((a, tuple(v)) for a in range(r)
                     for v in itertools.product(range(p), repeat=d))
    skeleton = MetabelianRep(r, p, d, action, vectors, elements, ())
    permutations = tuple(skeleton.regular_permutation((1 % r, v)) for v in vectors)
    rep = MetabelianRep(r, p, d, action, vectors, elements, permutations)
    identity = elements[0]
    for relator in pres.relators:
        if rep.word_element(relator) != identity:
            raise InternalConsistencyError(f'relator {relator} is not trivial in Gamma')
    logger.info('metabelian representation r=%d p=%d: module dimension %d, |Gamma| = %d',
                r, p, d, order)
    return rep


def delta_rp(pres, r, p, method='auto'):
    """Delta^{r,p}: the twisted Alexander polynomial of alpha^{r,p}; never zero."""
    rep = metabelian_rep(pres, r, p)
    result = twisted_alexander(pres, rep.representation, 0, method)
    if result.is_zero:
        raise InternalConsistencyError(f'Delta^({r},{p}) vanished')
    return result


def satellite_twisted_alexander(delta_alpha, delta_j, charpoly, n=None):
    """
    Twisted polynomial of a satellite with companion J: the product of
    Delta_J over the eigenvalues of alpha([A]) times delta_alpha.

    The eigenvalue product is res(Delta_J, charpoly) up to sign for a monic
    charpoly; the caller guarantees A is null-homologous in the pattern's
    exterior.
    """
    if delta_j.is_zero:
        raise ZeroPolynomialError('the companion has zero Alexander polynomial')
    if charpoly.top_coefficient != 1:
        raise PreconditionError('the characteristic polynomial must be monic')
    if n is not None and charpoly.span != n:
        raise PreconditionError(f'characteristic polynomial of degree {charpoly.span}, expected {n}')
    value = resultant(delta_j, charpoly)
    return normalize_units(delta_alpha * int(value))


def cyclotomic_resultant(m, n):
    """|res(Phi_m, Phi_n)| for m < n: q^phi(m) when n/m is a power of a prime q, else 1."""
    if not 1 <= m < n:
        raise PreconditionError(f'need 1 <= m < n, got m={m}, n={n}')
    if n % m:
        return 1
    factors = sympy.factorint(n // m)
    if len(factors) != 1:
        return 1
    (q,) = factors
    return q ** int(sympy.totient(m))


def satellite_family_delta(pres, r, p, a_class, q):
    """
    Delta^{r,p} of the satellite K_q, as (q^m * Delta^{r,p}_K, m).

    `a_class` is a nonzero vector of the module M; the satellite pattern
    curve represents (0, a_class) in Gamma.
    """
    if not sympy.isprime(q):
        raise PreconditionError(f'{q} is not prime')
    if q == p:
        raise PreconditionError('q must differ from p')
    rep = metabelian_rep(pres, r, p)
    a_class = tuple(int(x) % p for x in a_class)
    if len(a_class) != rep.dimension:
        raise PreconditionError(f'class has {len(a_class)} coordinates, the module has {rep.dimension}')
    if not any(a_class):
        raise PreconditionError('the class of A must be nonzero')
    f = permutation_charpoly(rep.regular_permutation((0, a_class)))
    value = int(resultant(f, cyclotomic(p * q))) ** 2
    factors = sympy.factorint(value)
    if set(factors) != {q}:
        raise InternalConsistencyError(f'res(f, Phi_{p * q})^2 = {value} is not a power of {q}')
    m = factors[q]
    delta = twisted_alexander(pres, rep.representation, 0)
    if delta.is_zero:
        raise InternalConsistencyError(f'Delta^({r},{p}) vanished')
    logger.info('satellite family q=%d: resultant factor %d^%d', q, q, m)
    return normalize_units(delta * q ** m), m
