"""
Linking Form Tests
Tests for torsion linking forms over discrete valuation rings in core/linkform.py
"""
import random

from django.test import SimpleTestCase, override_settings

from core.exceptions import PreconditionError, SingularFormError, SizeLimitError
from core.linkform import (
    DIMENSION_HYPERBOLIC,
    FormValue,
    LocalIntegers,
    LocalPolynomials,
    TorsionLinkingForm,
    diagonal_form,
    diagonalize,
    direct_sum,
    find_metabolizer_brute,
    geq_M_feasible,
    gram_of,
    is_metabolic_brute,
    is_nonsingular,
    negate,
    nu,
    orthogonal_complement,
    pairing,
    phi_dimension_monoid,
    phi_graded,
    quotient_form,
    same_submodule,
    submodule_order,
)

Z3 = LocalIntegers(3)
Z5 = LocalIntegers(5)


def hyperbolic(dvr, k=1):
    return TorsionLinkingForm(dvr, (k, k), ((0, 1), (1, 0)))


def random_form(dvr, rng, orders, units=None):
    """A diagonal form moved by random automorphisms of the underlying module."""
    units = units or [rng.randrange(1, dvr.p) for _ in orders]
    form = diagonal_form(dvr, orders, units)
    vectors = form.basis()
    n = len(orders)
    for _ in range(3 * n if n > 1 else 0):
        i, j = rng.sample(range(n), 2)
        c = dvr.from_int(rng.randrange(dvr.p)) + dvr.from_int(rng.randrange(dvr.p)) * dvr.uniformizer
        if orders[j] > orders[i]:
            c = c * dvr.power(orders[j] - orders[i])
        vectors[i] = form.add(vectors[i], vectors[j], c)
    return gram_of(form, vectors, orders)


def random_orders(rng, max_length):
    while True:
        orders = sorted((rng.randint(1, 3) for _ in range(rng.randint(1, 4))), reverse=True)
        if sum(orders) <= max_length:
            return tuple(orders)


def random_vector(form, rng):
    return form.vector([rng.randrange(form.dvr.p ** k) for k in form.orders])


class DVRSpecTests(SimpleTestCase):
    """Tests for the DVRSpec instances."""

    def test_even_characteristic(self):
        """p = 2 has no unit s with s + s = 1."""
        with self.assertRaises(PreconditionError):
            LocalIntegers(2)

    def test_not_prime(self):
        with self.assertRaises(PreconditionError):
            LocalPolynomials(9)

    def test_half(self):
        """2 * s = 1 in the residue field."""
        for dvr in [Z3, Z5, LocalPolynomials(7)]:
            self.assertEqual(dvr.residue(2 * dvr.half), 1)

    def test_inverse(self):
        """Units are inverted modulo tau^k."""
        dvr = LocalPolynomials(5)
        a = 1 + dvr.uniformizer
        self.assertEqual(dvr.reduce(a * dvr.inverse(a, 3), 3), dvr.one)
        self.assertEqual(Z3.inverse(2, 2) * 2 % 9, 1)

    def test_valuation(self):
        self.assertEqual(Z3.valuation(18, 5), 2)
        self.assertEqual(Z3.valuation(0, 4), 4)
        dvr = LocalPolynomials(3)
        self.assertEqual(dvr.valuation(dvr.uniformizer ** 2 + dvr.uniformizer ** 3, 5), 2)


class TorsionLinkingFormTests(SimpleTestCase):
    """Tests for the TorsionLinkingForm value type."""

    def test_entries_reduced(self):
        form = TorsionLinkingForm(Z3, (2, 1), ((10, 4), (4, 2)))
        self.assertEqual(form.gram, ((1, 1), (1, 2)))

    def test_not_hermitian(self):
        with self.assertRaises(PreconditionError):
            TorsionLinkingForm(Z5, (1, 1), ((1, 2), (3, 1)))

    def test_shape(self):
        with self.assertRaises(PreconditionError):
            TorsionLinkingForm(Z5, (1, 1), ((1,),))

    def test_direct_sum_and_negate(self):
        form = direct_sum(diagonal_form(Z3, (2,), (1,)), negate(diagonal_form(Z3, (1,), (1,))))
        self.assertEqual(form.orders, (2, 1))
        self.assertEqual(form.gram, ((1, 0), (0, 2)))
        self.assertEqual(form.length, 3)


class NuTests(SimpleTestCase):
    """Tests for nu function."""

    form = diagonal_form(Z3, (3,), (1,))

    def test_generator(self):
        self.assertEqual(nu(self.form, [1]), 3)

    def test_zero(self):
        self.assertEqual(nu(self.form, [0]), 0)

    def test_multiple(self):
        """tau * e has order tau^2."""
        self.assertEqual(nu(self.form, [3]), 2)


class PairingTests(SimpleTestCase):
    """Tests for pairing function."""

    form = TorsionLinkingForm(Z3, (2, 1), ((1, 1), (1, 2)))

    def test_generators(self):
        """lambda(e_i, e_j) is the gram entry."""
        self.assertEqual(pairing(self.form, [1, 0], [1, 0]), FormValue(1, 2))
        self.assertEqual(pairing(self.form, [1, 0], [0, 1]), FormValue(1, 1))
        self.assertEqual(pairing(self.form, [0, 1], [0, 1]), FormValue(2, 1))

    def test_linear(self):
        """lambda(tau a, b) = tau lambda(a, b)."""
        self.assertEqual(pairing(self.form, [3, 0], [1, 0]), FormValue(1, 1))

    def test_zero(self):
        self.assertTrue(pairing(self.form, [1, 1], [0, 0]).is_zero)

    def test_hermitian(self):
        """lambda(a, b) = conj lambda(b, a)."""
        rng = random.Random(3)
        for _ in range(20):
            a, b = random_vector(self.form, rng), random_vector(self.form, rng)
            self.assertEqual(pairing(self.form, a, b), pairing(self.form, b, a))


class DiagonalizeTests(SimpleTestCase):
    """Tests for diagonalize function."""

    def test_cyclic(self):
        """A one-generator form is already diagonal."""
        diagonal = diagonalize(diagonal_form(Z5, (3,), (2,)))
        self.assertEqual(diagonal.orders, (3,))
        self.assertEqual(diagonal.residues, (2,))

    def test_hyperbolic(self):
        """The hyperbolic plane over Z_(3) splits as <1> + <-1>."""
        diagonal = diagonalize(hyperbolic(Z3))
        self.assertEqual(diagonal.orders, (1, 1))
        self.assertEqual(diagonal.residues, (1, 2))
        self.assertEqual(diagonal.basis, ((1, 2), (2, 2)))

    def test_polynomial_ring(self):
        """The hyperbolic plane of order u^2 over F_5[u] has discriminant -1."""
        dvr = LocalPolynomials(5)
        form = hyperbolic(dvr, 2)
        diagonal = diagonalize(form)
        self.assertEqual(diagonal.orders, (2, 2))
        self.assertEqual(gram_of(form, diagonal.basis, diagonal.orders), diagonal.form())
        self.assertEqual(diagonal.residues[0] * diagonal.residues[1] % 5, 4)

    def test_singular(self):
        with self.assertRaises(SingularFormError):
            diagonalize(TorsionLinkingForm(Z3, (1,), ((0,),)))
        with self.assertRaises(SingularFormError):
            diagonalize(TorsionLinkingForm(Z3, (1, 1), ((1, 0), (0, 0))))
        self.assertFalse(is_nonsingular(TorsionLinkingForm(Z3, (1,), ((3,),))))

    def test_random_congruence(self):
        """The new basis is orthogonal with nu(lambda(e_i, e_i)) = nu(e_i) and the orders are kept."""
        rng = random.Random(11)
        for dvr in [Z3, Z5, LocalPolynomials(3)]:
            for _ in range(10):
                orders = random_orders(rng, 6)
                form = random_form(dvr, rng, orders)
                diagonal = diagonalize(form)
                self.assertEqual(sorted(diagonal.orders), sorted(orders))
                self.assertEqual(gram_of(form, diagonal.basis, diagonal.orders), diagonal.form())
                for vector, k in zip(diagonal.basis, diagonal.orders):
                    self.assertEqual(nu(form, vector), k)
                    self.assertEqual(pairing(form, vector, vector).exponent, k)


class PhiGradedTests(SimpleTestCase):
    """Tests for phi_graded function."""

    def test_dimensions(self):
        phi = phi_graded(diagonal_form(Z3, (2, 1, 1), (1, 1, 2)))
        self.assertEqual(phi.dimension(1), 2)
        self.assertEqual(phi.dimension(2), 1)
        self.assertEqual(phi_dimension_monoid(phi), {1: (2,), 2: (1,)})

    def test_hyperbolic(self):
        """Phi_1 of the hyperbolic plane is the hyperbolic plane over F_3."""
        phi = phi_graded(hyperbolic(Z3))
        self.assertEqual(phi.invariants(), {1: (2, -1)})

    def test_trivial(self):
        self.assertTrue(phi_graded(TorsionLinkingForm(Z3, (), ())).is_empty)

    def test_isometry_invariant(self):
        """dim and discriminant of each Phi_k survive random congruence."""
        rng = random.Random(5)
        for dvr in [Z3, Z5]:
            for _ in range(10):
                orders = random_orders(rng, 6)
                units = [rng.randrange(1, dvr.p) for _ in orders]
                moved = random_form(dvr, rng, orders, units)
                base = diagonal_form(dvr, orders, units)
                self.assertEqual(phi_graded(moved).invariants(), phi_graded(base).invariants())


class OrthogonalComplementTests(SimpleTestCase):
    """Tests for orthogonal_complement and submodule_order functions."""

    def test_zero_submodule(self):
        form = hyperbolic(Z3, 2)
        self.assertTrue(same_submodule(form, orthogonal_complement(form, []), form.basis()))

    def test_whole_module(self):
        form = hyperbolic(Z3, 2)
        self.assertEqual(orthogonal_complement(form, form.basis()), [])

    def test_self_orthogonal_line(self):
        """<tau e> is its own complement in <e> of order tau^2."""
        form = diagonal_form(Z3, (2,), (1,))
        self.assertEqual(orthogonal_complement(form, [[3]]), [(3,)])

    def test_submodule_order(self):
        form = diagonal_form(Z3, (2, 1), (1, 1))
        self.assertEqual(submodule_order(form, [[3, 0]]), 1)
        self.assertEqual(submodule_order(form, [[1, 1]]), 2)
        self.assertEqual(submodule_order(form, form.basis()), 3)

    def test_order_product(self):
        """ord M * ord M^perp = ord A and M^perp^perp = M."""
        rng = random.Random(17)
        for dvr, max_length in [(Z3, 6), (Z5, 4)]:
            for _ in range(12):
                form = random_form(dvr, rng, random_orders(rng, max_length))
                gens = [random_vector(form, rng) for _ in range(rng.randint(1, 2))]
                perp = orthogonal_complement(form, gens)
                self.assertEqual(submodule_order(form, gens) + submodule_order(form, perp),
                                 form.length)
                self.assertTrue(same_submodule(form, orthogonal_complement(form, perp), gens))


class QuotientFormTests(SimpleTestCase):
    """Tests for quotient_form function."""

    def test_zero_submodule(self):
        form = TorsionLinkingForm(Z5, (2, 1), ((1, 2), (2, 3)))
        quotient = quotient_form(form, [])
        self.assertEqual(quotient.length, form.length)
        self.assertEqual(phi_graded(quotient).invariants(), phi_graded(form).invariants())

    def test_metabolizer(self):
        """The quotient by a metabolizer is trivial."""
        self.assertEqual(quotient_form(hyperbolic(Z3), [[1, 0]]).length, 0)

    def test_self_orthogonal_line(self):
        self.assertEqual(quotient_form(diagonal_form(Z3, (2,), (1,)), [[3]]).length, 0)

    def test_not_isotropic(self):
        with self.assertRaises(PreconditionError):
            quotient_form(hyperbolic(Z3), [[1, 1]])

    def test_devissage(self):
        """Phi(lambda) >= Phi(lambda') for random isotropic G, over the dimension monoid."""
        rng = random.Random(23)
        checked = 0
        for dvr in [Z3, Z5, LocalPolynomials(3)]:
            for _ in range(15):
                orders = random_orders(rng, 6)
                if orders[0] < 2:
                    continue
                form = random_form(dvr, rng, orders)
                candidates = [random_vector(form, rng) for _ in range(40)]
                candidates.append(form.scale(dvr.power(orders[0] - 1), form.basis()[0]))
                x = next(v for v in candidates
                         if not form.is_zero_vector(v) and pairing(form, v, v).is_zero)
                quotient = quotient_form(form, [x])
                self.assertEqual(quotient.length, form.length - 2 * submodule_order(form, [x]))
                result = geq_M_feasible(phi_dimension_monoid(phi_graded(form)),
                                        phi_dimension_monoid(phi_graded(quotient)),
                                        DIMENSION_HYPERBOLIC)
                self.assertTrue(result.feasible)
                checked += 1
        self.assertGreater(checked, 0)


class FindMetabolizerBruteTests(SimpleTestCase):
    """Tests for find_metabolizer_brute function."""

    def assertMetabolizer(self, form, gens):
        self.assertIsNotNone(gens)
        self.assertEqual(2 * submodule_order(form, gens), form.length)
        self.assertTrue(same_submodule(form, orthogonal_complement(form, gens), gens))

    def test_hyperbolic(self):
        form = hyperbolic(Z3)
        self.assertMetabolizer(form, find_metabolizer_brute(form))

    def test_odd_length(self):
        """A line over F_p has no metabolizer."""
        self.assertIsNone(find_metabolizer_brute(diagonal_form(Z5, (1,), (2,))))

    def test_anisotropic_plane(self):
        """x^2 + y^2 only vanishes at 0 mod 3, but has isotropic vectors mod 5."""
        self.assertFalse(is_metabolic_brute(diagonal_form(Z3, (1, 1), (1, 1))))
        self.assertTrue(is_metabolic_brute(diagonal_form(Z5, (1, 1), (1, 1))))

    def test_form_plus_negative(self):
        form = diagonal_form(Z3, (2,), (2,))
        doubled = direct_sum(form, negate(form))
        self.assertMetabolizer(doubled, find_metabolizer_brute(doubled))

    def test_cyclic_square_order(self):
        form = diagonal_form(Z3, (2,), (1,))
        self.assertMetabolizer(form, find_metabolizer_brute(form))

    @override_settings(METABOLIZER_SEARCH_LIMIT=10)
    def test_size_limit(self):
        with self.assertRaises(SizeLimitError):
            find_metabolizer_brute(hyperbolic(Z3, 2))


class GeqMFeasibleTests(SimpleTestCase):
    """Tests for geq_M_feasible function."""

    def test_equal(self):
        phi = {1: (1, 0), 2: (0, 2)}
        result = geq_M_feasible(phi, phi)
        self.assertTrue(result.feasible)
        self.assertFalse(any(result.h.values()))
        self.assertTrue(all(t == (0, 0) for t in result.T.values()))

    def test_hyperbolic_quotient(self):
        """Removing a hyperbolic order-1 plane needs h_1 = 1."""
        result = geq_M_feasible({1: (1, 1)}, {})
        self.assertTrue(result.feasible)
        self.assertEqual(result.h[1], 1)
        self.assertTrue(all(t == (0, 0) for t in result.T.values()))

    def test_signature_mismatch(self):
        self.assertFalse(geq_M_feasible({1: (1, 0)}, {1: (0, 1)}).feasible)

    def test_dimension_monoid(self):
        self.assertTrue(geq_M_feasible({2: (2,)}, {}, DIMENSION_HYPERBOLIC).feasible)
        self.assertFalse(geq_M_feasible({}, {1: (1,)}, DIMENSION_HYPERBOLIC).feasible)

    def test_width_mismatch(self):
        with self.assertRaises(PreconditionError):
            geq_M_feasible({1: (1,)}, {})
