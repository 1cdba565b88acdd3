"""
Classical invariants from a Seifert matrix.

The Alexander polynomial is det(tV - V^T) up to units, and the
Levine-Tristram signature at w = e^(i*pi*x) is the signature of the
Hermitian matrix (1 - w)V + (1 - conj(w))V^T. With these conventions the
right-handed trefoil V = [[-1, 1], [0, -1]] has signature -2 at x = 1;
knot tables that use the opposite sign must be mirrored before comparison.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import sympy
from sympy import GF, ZZ, Rational
from sympy.polys.matrices import DomainMatrix

from core.conf import engine_setting
from core.exceptions import InvalidSeifertMatrixError, PreconditionError
from core.laurent import (
    INT,
    RAT,
    T,
    LaurentPoly,
    circle_root_multiplicity,
    circle_roots,
    circle_label,
    divides,
    exact_quotient,
    is_symmetric,
    normalize_units,
    rational_circle_factor,
    resultant,
)
from core.zmodules import cokernel, smith_over_rational_polynomials

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeifertMatrix:
    """Square integer matrix V of even size with det(V - V^T) = 1."""
    rows: tuple

    def __post_init__(self):
        try:
            rows = tuple(tuple(_integer(x) for x in row) for row in self.rows)
        except (TypeError, ValueError) as exc:
            raise InvalidSeifertMatrixError(f'entries must be integers: {exc}') from exc
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise InvalidSeifertMatrixError('Seifert matrix must be square')
        if n % 2:
            raise InvalidSeifertMatrixError(f'Seifert matrix must have even size, got {n}')
        if n:
            skew = sympy.Matrix(n, n, lambda i, j: rows[i][j] - rows[j][i])
            if skew.det() != 1:
                raise InvalidSeifertMatrixError(f'det(V - V^T) = {skew.det()}, expected 1')
        object.__setattr__(self, 'rows', rows)

    @property
    def size(self):
        return len(self.rows)

    @property
    def genus(self):
        return self.size // 2

    def entry(self, i, j):
        return self.rows[i][j]

    def transpose(self):
        return tuple(zip(*self.rows)) if self.rows else ()

    def as_lists(self):
        return [list(row) for row in self.rows]

    def __str__(self):
        return str(self.as_lists())


def _integer(x):
    if isinstance(x, bool) or int(x) != x:
        raise ValueError(f'{x!r} is not an integer')
    return int(x)


def _matrix(V):
    return V if isinstance(V, SeifertMatrix) else SeifertMatrix(V)


def presentation_matrix(V):
    """tV - V^T as a matrix of integer Laurent polynomials."""
    V = _matrix(V)
    n = V.size
    return [[LaurentPoly(INT, 0, (-V.entry(j, i), V.entry(i, j))) for j in range(n)]
            for i in range(n)]


def alexander_poly(V):
    """det(tV - V^T), normalized."""
    V = _matrix(V)
    if V.size == 0:
        return LaurentPoly.constant(1)
    domain = ZZ[T]
    t = domain.ring.gens[0]
    rows = [[V.entry(i, j) * t - V.entry(j, i) for j in range(V.size)]
            for i in range(V.size)]
    det = DomainMatrix(rows, (V.size, V.size), domain).det()
    return normalize_units(LaurentPoly.from_ring_element(det, INT))


def determinant(V):
    """|det(V + V^T)|."""
    V = _matrix(V)
    if V.size == 0:
        return 1
    n = V.size
    return abs(int(sympy.Matrix(n, n, lambda i, j: V.entry(i, j) + V.entry(j, i)).det()))


def double_cover_homology(V):
    """H_1 of the double branched cover, presented by -V - V^T."""
    V = _matrix(V)
    n = V.size
    return cokernel([[-V.entry(i, j) - V.entry(j, i) for j in range(n)] for i in range(n)])


def branched_cover_order(V, r):
    """|H_1| of the r-fold branched cover, 0 when it is infinite."""
    if r < 2:
        raise PreconditionError(f'cover degree must be at least 2, got {r}')
    delta = alexander_poly(V)
    cyclic = LaurentPoly(INT, 0, (1,) * r)
    return abs(int(resultant(delta, cyclic)))


@dataclass(frozen=True)
class CoverModule:
    """
    A module presented over F_p[t]/(t^r - 1), made explicit as an F_p vector space.

    `projection` maps the free module, with basis e_i t^k at index i*r + k,
    onto F_p^dimension; `action` is multiplication by t on the quotient.
    """
    p: int
    r: int
    dimension: int
    action: tuple
    projection: tuple
    generators: int

    def image(self, i, power=0):
        """Coordinates of the class of e_i t^power."""
        column = i * self.r + power % self.r
        return tuple(row[column] for row in self.projection)


def _to_ints(matrix, p):
    return tuple(tuple(int(x) % p for x in row) for row in matrix.to_list())


def cover_module_fp(relations, r, p):
    """
    The cokernel of a relation matrix over F_p[t]/(t^r - 1).

    `relations` has one row per generator and one column per relation, with
    integer Laurent polynomial entries.
    """
    if r < 1:
        raise PreconditionError(f'cover degree must be positive, got {r}')
    if not sympy.isprime(p):
        raise PreconditionError(f'{p} is not prime')
    k = len(relations)
    size = k * r
    if size == 0:
        return CoverModule(p, r, 0, (), (), k)
    field = GF(p)
    columns = []
    for j in range(len(relations[0])):
        for s in range(r):
            column = [0] * size
            for i in range(k):
                for e, c in relations[i][j].terms():
                    column[i * r + (e + s) % r] += c
            columns.append(column)
    if columns:
        matrix = DomainMatrix.from_list(
            [[column[i] % p for column in columns] for i in range(size)], field)
        rank = matrix.rank()
    else:
        rank = 0
    dimension = size - rank
    logger.debug('cover module over F_%d, r=%d: %d generators, dimension %d', p, r, k, dimension)
    if dimension == 0:
        return CoverModule(p, r, 0, (), (), k)
    # rows of the projection annihilate every relation column
    annihilators = matrix.transpose().nullspace() if rank else DomainMatrix.eye(size, field)
    projection, pivots = annihilators.rref()
    shift = DomainMatrix.from_list(
        [[1 if row == i * r + (s + 1) % r else 0 for i in range(k) for s in range(r)]
         for row in range(size)], field)
    lift = DomainMatrix.from_list(
        [[1 if row == pivot else 0 for pivot in pivots] for row in range(size)], field)
    action = projection * shift * lift
    return CoverModule(p, r, dimension, _to_ints(action, p), _to_ints(projection, p), k)


def branched_cover_fp(V, r, p):
    """(dimension, t-action) of H_1 of the r-fold branched cover with F_p coefficients."""
    module = cover_module_fp(presentation_matrix(V), r, p)
    return module.dimension, module.action


def hermitian_matrix(V, x):
    """(1 - w)V + (1 - conj(w))V^T at w = e^(i*pi*x), as a numpy array."""
    V = _matrix(V)
    v = np.array(V.as_lists(), dtype=float).reshape(V.size, V.size)
    w = np.exp(1j * np.pi * x)
    return (1 - w) * v + (1 - np.conj(w)) * v.T


@dataclass(frozen=True)
class SignatureValue:
    signature: int
    nullity: int
    ambiguous: bool = False


def signature_value(V, x, nullity=None):
    """
    Signature and nullity at x from Hermitian eigenvalues.

    When the nullity is known exactly it is used to decide which eigenvalues
    are zero. `ambiguous` is set when an eigenvalue sits within ten times the
    zero threshold of the boundary.
    """
    if not 0 < x < 2:
        raise PreconditionError(f'x must lie in (0, 2), got {x}')
    V = _matrix(V)
    if V.size == 0:
        return SignatureValue(0, 0)
    matrix = hermitian_matrix(V, x)
    eigenvalues = np.linalg.eigvalsh(matrix)
    tol = engine_setting('SIGNATURE_REL_TOL', 1e-8)
    threshold = tol * max(1.0, float(np.max(np.abs(matrix))))
    order = sorted(range(len(eigenvalues)), key=lambda k: abs(eigenvalues[k]))
    if nullity is None:
        zero = {k for k in order if abs(eigenvalues[k]) <= threshold}
        ambiguous = any(threshold < abs(eigenvalues[k]) <= 10 * threshold for k in order)
    else:
        zero = set(order[:nullity])
        ambiguous = (any(abs(eigenvalues[k]) > 10 * threshold for k in zero)
                     or any(abs(eigenvalues[k]) <= 10 * threshold for k in order[nullity:]))
    signature = sum(1 if eigenvalues[k] > 0 else -1 for k in order if k not in zero)
    if ambiguous:
        logger.debug('signature at x=%s is close to the zero threshold', x)
    return SignatureValue(signature, len(zero), ambiguous)


def zeta_elementary_divisors(V, zeta):
    """{i: number of zeta^i blocks} among the elementary divisors of tV - V^T over Q[t]."""
    zeta = normalize_units(zeta.with_ring(RAT))
    if zeta.is_zero or zeta.span == 0 or not zeta.to_poly().is_irreducible:
        raise PreconditionError(f'{zeta} is not irreducible over Q')
    if not is_symmetric(zeta):
        raise PreconditionError(f'{zeta} is not symmetric under t -> t^-1')
    V = _matrix(V)
    if V.size == 0:
        return {}
    blocks = {}
    for divisor in smith_over_rational_polynomials(presentation_matrix(V)):
        if divisor.is_zero:
            continue
        power = 0
        while divides(zeta, divisor):
            divisor = exact_quotient(divisor, zeta)
            power += 1
        if power:
            blocks[power] = blocks.get(power, 0) + 1
    return blocks


@dataclass(frozen=True)
class LevineData:
    """deg, eta and sigma at one point, with how they were obtained."""
    x: float
    degree: int
    nullity: int
    signature: int
    exact: bool
    ambiguous: bool

    @property
    def label(self):
        return circle_label(self.x)


def levine_data(V, x, delta=None):
    """
    deg_x, eta_x and sigma_x.

    When 2cos(pi*x) is rational, deg and eta are read off exactly from the
    elementary divisors; otherwise deg comes from root matching and eta is
    taken as 0 away from roots of the Alexander polynomial.
    """
    V = _matrix(V)
    delta = delta if delta is not None else alexander_poly(V)
    zeta = rational_circle_factor(x)
    if zeta is not None:
        blocks = zeta_elementary_divisors(V, zeta)
        degree = sum(i * n for i, n in blocks.items())
        nullity = sum(blocks.values())
        value = signature_value(V, x, nullity)
        exact = True
    else:
        degree = circle_root_multiplicity(delta, x) if delta.span else 0
        value = signature_value(V, x, 0 if degree == 0 else None)
        nullity = value.nullity
        exact = degree == 0
    return LevineData(x, degree, nullity, value.signature, exact, value.ambiguous)


def signature_nullity(V, x):
    """(sigma_x, eta_x) at w = e^(i*pi*x)."""
    data = levine_data(V, x)
    return data.signature, data.nullity


@dataclass(frozen=True)
class SignatureJump:
    x: float
    degree: int
    nullity: int
    signature: int
    defect: Rational
    exact: bool

    @property
    def label(self):
        return circle_label(self.x)


@dataclass(frozen=True)
class SignatureArc:
    start: float
    end: float
    signature: int

    @property
    def midpoint(self):
        return (self.start + self.end) / 2


@dataclass(frozen=True)
class SignatureProfile:
    jumps: tuple = ()
    arcs: tuple = field(default_factory=lambda: (SignatureArc(0.0, 2.0, 0),))

    def signature_at(self, x):
        """The signature on the open arc containing x, or at the jump x."""
        for jump in self.jumps:
            if math.isclose(jump.x, x, abs_tol=1e-9):
                return jump.signature
        for arc in self.arcs:
            if arc.start < x < arc.end:
                return arc.signature
        raise PreconditionError(f'x must lie in (0, 2), got {x}')


def signature_profile(V):
    """Jumps of the signature function at unit-circle roots of the Alexander polynomial."""
    V = _matrix(V)
    delta = alexander_poly(V)
    roots = circle_roots(delta) if delta.span else []
    points = [0.0] + [root.x for root in roots] + [2.0]
    arcs = []
    for start, end in zip(points, points[1:]):
        value = signature_value(V, (start + end) / 2, 0)
        arcs.append(SignatureArc(start, end, value.signature))
    jumps = []
    for k, root in enumerate(roots):
        data = levine_data(V, root.x, delta)
        defect = Rational(data.signature) - Rational(arcs[k].signature + arcs[k + 1].signature, 2)
        jumps.append(SignatureJump(root.x, data.degree, data.nullity, data.signature,
                                   defect, data.exact))
    return SignatureProfile(tuple(jumps), tuple(arcs))


def block_sum(V, W):
    V, W = _matrix(V), _matrix(W)
    n, m = V.size, W.size
    rows = [list(row) + [0] * m for row in V.rows] + [[0] * n + list(row) for row in W.rows]
    return SeifertMatrix(rows)


def connected_sum(V, W):
    """Seifert matrix of the connected sum: the block sum."""
    return block_sum(V, W)


def mirror(V):
    V = _matrix(V)
    return SeifertMatrix([[-x for x in row] for row in V.rows])


def reverse(V):
    V = _matrix(V)
    return SeifertMatrix(V.transpose())


def concordance_inverse(V):
    """Seifert matrix -V^T of the reversed mirror image."""
    return mirror(reverse(V))


def is_trivial_alexander(V):
    """Every cyclic branched cover is a homology sphere iff this holds."""
    return alexander_poly(V) == LaurentPoly.constant(1)


def homology_sphere_covers(V, r_max):
    """The degrees 2 <= r <= r_max whose branched covers have trivial H_1."""
    return [r for r in range(2, r_max + 1) if branched_cover_order(V, r) == 1]


def is_metabolic_candidate(V):
    """Necessary conditions for an algebraically slice knot: square determinant, zero signatures."""
    det = determinant(V)
    if math.isqrt(det) ** 2 != det:
        return False
    return all(arc.signature == 0 for arc in signature_profile(V).arcs)
