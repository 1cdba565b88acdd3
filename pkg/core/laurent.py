"""
Exact Laurent polynomials over Z, Q and F_p.

Every invariant the engine produces ends up as one of these: Alexander
polynomials, twisted Alexander polynomials, cyclotomic factors. Values are
immutable and compare structurally, so two polynomials that agree up to a
unit ±t^k (c·t^k over a field) are equal after normalize_units().
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy
from sympy import GF, QQ, ZZ, Poly, Rational
from sympy.polys.matrices import DomainMatrix

from core.conf import engine_setting
from core.exceptions import (
    PreconditionError,
    RingMismatchError,
    ZeroPolynomialError,
)

logger = logging.getLogger(__name__)

T = sympy.Symbol('t')

# Roots this far off the unit circle are not on it.
CIRCLE_MODULUS_TOL = 1e-6


@dataclass(frozen=True)
class Ring:
    """Coefficient ring tag: 'int', 'rat' or 'prime' with its modulus."""
    kind: str
    modulus: int = 0

    def __str__(self):
        if self.kind == 'prime':
            return f'F_{self.modulus}'
        return {'int': 'Z', 'rat': 'Q'}[self.kind]

    @property
    def is_field(self):
        return self.kind != 'int'

    @property
    def domain(self):
        """The sympy coefficient domain."""
        if self.kind == 'int':
            return ZZ
        if self.kind == 'rat':
            return QQ
        return GF(self.modulus)

    @property
    def polynomial_domain(self):
        """The sympy domain of ordinary polynomials in t over this ring."""
        return self.domain[T]

    def coerce(self, value):
        """Bring a number into the canonical Python representation of the ring."""
        if isinstance(value, float):
            raise PreconditionError(f'floating point coefficient {value!r}')
        value = Rational(value)
        if self.kind == 'int':
            if value.q != 1:
                raise PreconditionError(f'{value} is not an integer')
            return int(value.p)
        if self.kind == 'rat':
            return value
        m = self.modulus
        return (int(value.p) * pow(int(value.q), -1, m)) % m

    def from_domain(self, element):
        """Convert a sympy domain coefficient into this ring."""
        if self.kind == 'prime':
            return int(element) % self.modulus
        return self.coerce(self.domain.to_sympy(element))

    def to_domain(self, value):
        return self.domain.from_sympy(Rational(value))


INT = Ring('int')
RAT = Ring('rat')


def prime_field(p):
    """Ring tag for F_p."""
    if not sympy.isprime(p):
        raise PreconditionError(f'{p} is not prime')
    return Ring('prime', int(p))


@dataclass(frozen=True)
class LaurentPoly:
    """Sum of coeffs[i] * t^(low + i) over `ring`."""
    ring: Ring
    low: int
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(self.ring.coerce(c) for c in self.coeffs)
        start, end = 0, len(coeffs)
        while start < end and coeffs[start] == 0:
            start += 1
        while end > start and coeffs[end - 1] == 0:
            end -= 1
        object.__setattr__(self, 'coeffs', coeffs[start:end])
        object.__setattr__(self, 'low', int(self.low) + start if start < end else 0)

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls, ring=INT):
        return cls(ring, 0, ())

    @classmethod
    def constant(cls, value, ring=INT):
        return cls(ring, 0, (value,))

    @classmethod
    def monomial(cls, exponent, coefficient=1, ring=INT):
        return cls(ring, exponent, (coefficient,))

    @classmethod
    def from_dict(cls, terms, ring=INT):
        """Build from {exponent: coefficient}."""
        terms = {e: c for e, c in terms.items() if c != 0}
        if not terms:
            return cls.zero(ring)
        low = min(terms)
        coeffs = [0] * (max(terms) - low + 1)
        for e, c in terms.items():
            coeffs[e - low] = c
        return cls(ring, low, tuple(coeffs))

    @classmethod
    def from_poly(cls, poly, ring=INT, low=0):
        """Build t^low * poly from a univariate sympy Poly."""
        coeffs = [ring.coerce(c) for c in reversed(poly.all_coeffs())]
        return cls(ring, low, tuple(coeffs))

    @classmethod
    def from_ring_element(cls, element, ring=INT, low=0):
        """Build t^low * element from an element of ring.polynomial_domain."""
        terms = {}
        for (e,), c in element.terms():
            terms[e + low] = ring.from_domain(c)
        return cls.from_dict(terms, ring)

    @classmethod
    def parse(cls, text, ring=INT):
        """Parse the text form written by __str__, e.g. '2*t^2 - 5*t + 2'."""
        cleaned = str(text).replace('^', '**').replace('−', '-').strip()
        if not cleaned:
            raise PreconditionError('empty polynomial')
        try:
            expr = sympy.expand(sympy.sympify(cleaned, locals={'t': T}))
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise PreconditionError(f'cannot parse polynomial {text!r}') from exc
        terms = {}
        for term in sympy.Add.make_args(expr):
            coeff, exponent = term.as_coeff_exponent(T)
            if coeff.free_symbols or not exponent.is_integer:
                raise PreconditionError(f'not a Laurent polynomial in t: {text!r}')
            terms[int(exponent)] = terms.get(int(exponent), 0) + coeff
        return cls.from_dict(terms, ring)

    # -- views --------------------------------------------------------

    @property
    def is_zero(self):
        return not self.coeffs

    @property
    def high(self):
        return self.low + len(self.coeffs) - 1

    @property
    def span(self):
        """Difference between the top and bottom exponents."""
        if self.is_zero:
            raise ZeroPolynomialError('the zero polynomial has no span')
        return len(self.coeffs) - 1

    @property
    def top_coefficient(self):
        return self.coeffs[-1] if self.coeffs else 0

    def terms(self):
        """Yield (exponent, coefficient) pairs with nonzero coefficient."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                yield self.low + i, c

    def as_dict(self):
        return dict(self.terms())

    def to_poly(self):
        """t^(-low) * self as a sympy Poly; low itself is dropped."""
        coeffs = list(reversed(self.coeffs)) or [0]
        if self.ring.kind == 'prime':
            return Poly(coeffs, T, modulus=self.ring.modulus)
        return Poly(coeffs, T, domain=self.ring.domain)

    def to_polynomial(self, domain=None):
        """self as an element of a sympy polynomial domain; needs low >= 0."""
        if self.low < 0:
            raise PreconditionError(f'{self} has negative exponents')
        domain = domain or self.ring.polynomial_domain
        ground = domain.domain
        return domain.ring.from_dict(
            {(e,): ground.convert(self.ring.to_domain(c)) for e, c in self.terms()}
        )

    def to_ring_element(self, domain=None):
        """t^(-low) * self as an element of a sympy polynomial domain."""
        return LaurentPoly(self.ring, 0, self.coeffs).to_polynomial(domain)

    def with_ring(self, ring):
        """Coerce the coefficients into another ring (Z -> Q, Z -> F_p, Q -> F_p)."""
        return LaurentPoly(ring, self.low, self.coeffs)

    def __str__(self):
        if self.is_zero:
            return '0'
        parts = []
        for exponent, c in sorted(self.terms(), reverse=True):
            negative = c < 0 if self.ring.kind != 'prime' else False
            magnitude = -c if negative else c
            if exponent == 0:
                body = str(magnitude)
            else:
                mono = 't' if exponent == 1 else f't^{exponent}'
                body = mono if magnitude == 1 else f'{magnitude}*{mono}'
            if not parts:
                parts.append(f'-{body}' if negative else body)
            else:
                parts.append(f'- {body}' if negative else f'+ {body}')
        return ' '.join(parts)

    def __repr__(self):
        return f'LaurentPoly({str(self)!r}, ring={self.ring})'

    # -- arithmetic ---------------------------------------------------

    def _lift(self, other):
        if isinstance(other, LaurentPoly):
            if other.ring != self.ring:
                raise RingMismatchError(f'{self.ring} and {other.ring}')
            return other
        if isinstance(other, (int, Rational, Fraction)):
            return LaurentPoly.constant(other, self.ring)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        terms = self.as_dict()
        for e, c in other.terms():
            terms[e] = terms.get(e, 0) + c
        return LaurentPoly.from_dict(terms, self.ring)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.ring, self.low, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return LaurentPoly.zero(self.ring)
        product = self.to_poly() * other.to_poly()
        return LaurentPoly.from_poly(product, self.ring, self.low + other.low)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise PreconditionError('negative powers are not Laurent polynomials')
        result = LaurentPoly.constant(1, self.ring)
        for _ in range(n):
            result = result * self
        return result


def one(ring=INT):
    return LaurentPoly.constant(1, ring)


def t_power(k, ring=INT):
    return LaurentPoly.monomial(k, 1, ring)


def normalize_units(p):
    """Canonical representative of the class of p up to units."""
    if p.is_zero:
        return p
    top = p.top_coefficient
    if p.ring.kind == 'prime':
        inverse = pow(top, -1, p.ring.modulus)
        coeffs = tuple(c * inverse for c in p.coeffs)
    elif top < 0:
        coeffs = tuple(-c for c in p.coeffs)
    else:
        coeffs = p.coeffs
    return LaurentPoly(p.ring, 0, coeffs)


def _check_rings(f, g):
    if f.ring != g.ring:
        raise RingMismatchError(f'{f.ring} and {g.ring}')


def _division(g, f):
    """Quotient and remainder of the shifted g by the shifted f, over a field."""
    field_ring = RAT if f.ring.kind == 'int' else f.ring
    numerator = g.with_ring(field_ring).to_poly()
    denominator = f.with_ring(field_ring).to_poly()
    return numerator.div(denominator), field_ring


def divides(f, g):
    """True iff g = f*h for some Laurent polynomial h over the common ring."""
    _check_rings(f, g)
    if f.is_zero:
        return g.is_zero
    if g.is_zero:
        return True
    (quotient, remainder), _ = _division(g, f)
    if not remainder.is_zero:
        return False
    if f.ring.kind == 'int':
        return all(Rational(c).q == 1 for c in quotient.all_coeffs())
    return True


def exact_quotient(g, f):
    """The h with g = f*h; raises PreconditionError when f does not divide g."""
    _check_rings(f, g)
    if f.is_zero:
        raise ZeroPolynomialError('division by the zero polynomial')
    if g.is_zero:
        return g
    (quotient, remainder), field_ring = _division(g, f)
    if not remainder.is_zero:
        raise PreconditionError(f'{f} does not divide {g}')
    h = LaurentPoly.from_poly(quotient, field_ring, g.low - f.low)
    if f.ring.kind == 'int':
        if any(Rational(c).q != 1 for c in h.coeffs):
            raise PreconditionError(f'{f} does not divide {g} over Z')
        return h.with_ring(INT)
    return h


def involution(p):
    """p(t^-1)."""
    if p.is_zero:
        return p
    return LaurentPoly(p.ring, -p.high, tuple(reversed(p.coeffs)))


def is_symmetric(p):
    """True iff p agrees with p(t^-1) up to units."""
    return normalize_units(p) == normalize_units(involution(p))


def sylvester_matrix(f, g):
    """Sylvester matrix of the ordinary-polynomial representatives, rows of f first."""
    m, n = f.span, g.span
    size = m + n
    rows = []
    for top, count in ((list(reversed(f.coeffs)), n), (list(reversed(g.coeffs)), m)):
        for shift in range(count):
            row = [0] * size
            row[shift:shift + len(top)] = top
            rows.append([f.ring.to_domain(c) for c in row])
    return DomainMatrix(rows, (size, size), f.ring.domain)


def resultant(f, g):
    """Resultant of the ordinary-polynomial representatives (low shifted to 0).

    Computed as the Sylvester determinant, so res(f, g) = lc(f)^deg g * prod g(roots of f).
    """
    _check_rings(f, g)
    if f.is_zero or g.is_zero:
        raise ZeroPolynomialError('resultant of the zero polynomial')
    if f.span == 0:
        return f.ring.coerce(Rational(f.top_coefficient) ** g.span)
    if g.span == 0:
        return f.ring.coerce(Rational(g.top_coefficient) ** f.span)
    det = sylvester_matrix(f, g).det()
    logger.debug('resultant via %dx%d Sylvester determinant', f.span + g.span, f.span + g.span)
    return f.ring.from_domain(det)


def cyclotomic(n):
    """The n-th cyclotomic polynomial over Z."""
    if n < 1:
        raise PreconditionError(f'cyclotomic index must be positive, got {n}')
    return LaurentPoly.from_poly(sympy.cyclotomic_poly(n, T, polys=True), INT)


def evaluate(p, value):
    """Exact value of p at a nonzero integer or rational point."""
    value = Rational(value)
    if value == 0 and p.low < 0:
        raise PreconditionError('cannot evaluate negative powers at 0')
    total = Rational(0)
    for e, c in p.terms():
        total += Rational(c) * value ** e
    if p.ring.kind == 'prime':
        return p.ring.coerce(total)
    return total


def content(p):
    """Gcd of the integer coefficients (0 for the zero polynomial)."""
    if p.ring.kind != 'int':
        raise PreconditionError('content is defined over Z only')
    return math.gcd(*p.coeffs) if p.coeffs else 0


def primitive_part(p):
    """p divided by its content."""
    c = content(p)
    if c == 0:
        return p
    return LaurentPoly(p.ring, p.low, tuple(x // c for x in p.coeffs))


def monic(p):
    """p scaled to top coefficient 1 over a field ring."""
    if p.is_zero:
        return p
    if not p.ring.is_field:
        raise PreconditionError('monic scaling needs a field')
    top = p.top_coefficient
    if p.ring.kind == 'prime':
        inverse = pow(top, -1, p.ring.modulus)
        return LaurentPoly(p.ring, p.low, tuple(c * inverse for c in p.coeffs))
    return LaurentPoly(p.ring, p.low, tuple(Rational(c) / top for c in p.coeffs))


def to_integral(p):
    """The primitive integer polynomial with the same roots as a rational p."""
    if p.is_zero:
        return LaurentPoly.zero(INT)
    denominators = [Rational(c).q for c in p.coeffs]
    scale = math.lcm(*denominators)
    scaled = LaurentPoly(INT, p.low, tuple(int(Rational(c) * scale) for c in p.coeffs))
    return primitive_part(scaled)


@dataclass(frozen=True)
class CircleRoot:
    """A root e^(i*pi*x) of a polynomial, x in (0, 2)."""
    x: float
    multiplicity: int

    @property
    def label(self):
        return circle_label(self.x)


def circle_label(x):
    """Short text for x: a fraction with small denominator when x is one."""
    exact = exact_argument(x)
    if exact is not None:
        return str(exact)
    return f'{x:.12g}'


def exact_argument(x, max_denominator=720):
    """x as a sympy Rational when it is one up to the clustering tolerance."""
    tol = engine_setting('ROOT_CLUSTER_TOL', 1e-9)
    candidate = Fraction(x).limit_denominator(max_denominator)
    if abs(float(candidate) - x) <= tol:
        return Rational(candidate.numerator, candidate.denominator)
    return None


def _squarefree_factors(p):
    poly = p.with_ring(RAT).to_poly() if p.ring.kind == 'int' else p.to_poly()
    _, factors = poly.sqf_list()
    return [(factor, multiplicity) for factor, multiplicity in factors
            if factor.degree() > 0]


def _circle_arguments(factor):
    """Arguments x in (0, 2) of the unit-circle roots of a squarefree factor."""
    coeffs = [float(c) for c in factor.all_coeffs()]
    found = []
    for root in np.roots(coeffs):
        if abs(abs(root) - 1.0) > CIRCLE_MODULUS_TOL:
            continue
        x = (float(np.angle(root)) / math.pi) % 2.0
        if 0.0 < x < 2.0 and min(x, 2.0 - x) > 1e-12:
            found.append(x)
    return found


def _same_argument(a, b, tol):
    diff = abs(a - b)
    return min(diff, 2.0 - diff) <= tol


def circle_root_multiplicity(p, x):
    """Multiplicity of e^(i*pi*x) as a root of the integer polynomial p."""
    if p.is_zero:
        raise ZeroPolynomialError('the zero polynomial vanishes everywhere')
    tol = engine_setting('ROOT_CLUSTER_TOL', 1e-9)
    match_tol = max(tol, 1e-7)
    total = 0
    for factor, multiplicity in _squarefree_factors(p):
        if any(_same_argument(x, y, match_tol) for y in _circle_arguments(factor)):
            total += multiplicity
    return total


def circle_roots(p):
    """All unit-circle roots of p as CircleRoot values, sorted by argument."""
    if p.is_zero:
        raise ZeroPolynomialError('the zero polynomial vanishes everywhere')
    found = []
    for factor, multiplicity in _squarefree_factors(p):
        for x in _circle_arguments(factor):
            found.append((x, multiplicity))
    found.sort()
    merged = []
    for x, multiplicity in found:
        if merged and _same_argument(merged[-1][0], x, 1e-7):
            merged[-1] = (merged[-1][0], merged[-1][1] + multiplicity)
        else:
            merged.append((x, multiplicity))
    exact = []
    for x, m in merged:
        value = exact_argument(x)
        exact.append((float(value) if value is not None else x, m))
    logger.debug('circle roots of %s: %s', p, exact)
    return [CircleRoot(x, m) for x, m in exact]


def rational_circle_factor(x):
    """
    The integer minimal polynomial of e^(i*pi*x) when 2cos(pi*x) is rational.

    Rational values of 2cos(pi*x) are algebraic integers, so only -2, -1, 0
    and 1 occur for x in (0, 2) off 0. Returns None otherwise.
    """
    c = 2.0 * math.cos(math.pi * x)
    nearest = round(c)
    if abs(c - nearest) > 1e-9:
        return None
    if nearest == -2:
        return LaurentPoly(INT, 0, (1, 1))
    if nearest in (-1, 0, 1):
        return LaurentPoly(INT, 0, (1, -nearest, 1))
    return None
