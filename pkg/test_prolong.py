import os
import unittest

import numpy as np

from quasigroup_prolong.utils.core import (
    LatinSquare,
    OrderMismatchError,
    Permutation,
    apply_isotopy,
    cyclic_table,
    klein_table,
    parse_square,
    random_square,
    validate,
)
from quasigroup_prolong.utils.isotopy import are_isotopic
from quasigroup_prolong.utils.mappings import (
    MappingError,
    MappingKind,
    classify,
    find_complete_mappings,
    find_quasicomplete_mappings,
)
from quasigroup_prolong.utils.prolong import (
    Method,
    ProlongationSpec,
    eligible_mappings,
    prolong,
    prolong_belyavskaya,
    prolong_classical,
    prolong_classical_idempotent,
    prolong_quasicomplete,
)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'quasigroup_prolong', 'data')

SIGMA = Permutation([4, 2, 1, 5, 3])
TAU = Permutation([3, 1, 2, 5, 4])
QUASI = Permutation([4, 5, 2, 3, 1])


def load_fixture(name):
    with open(os.path.join(DATA_DIR, name + '.txt'), 'r') as f:
        return parse_square(f.read())


def tabulate(op, size):
    return [[op(x, y) for y in range(1, size + 1)] for x in range(1, size + 1)]


# Cell-by-cell rules for the constructions, written out case by case

def classical_rule(square, sigma):
    q = square.order + 1
    inverse = sigma.inverse()

    def op(x, y):
        if x < q and y < q:
            return q if y == sigma(x) else square.cell(x, y)
        if x < q:
            return square.cell(x, sigma(x))
        if y < q:
            return square.cell(inverse(y), y)
        return q
    return tabulate(op, q)


def idempotent_loop_rule(square):
    q = square.order + 1

    def op(x, y):
        if x == y:
            return q
        if x < q and y < q:
            return square.cell(x, y)
        return x if y == q else y
    return tabulate(op, q)


def diagonal_rule(square):
    q = square.order + 1

    def op(x, y):
        if x == y:
            return q
        if x < q and y < q:
            return square.cell(x, y)
        return square.cell(x, x) if y == q else square.cell(y, y)
    return tabulate(op, q)


def belyavskaya_rule(square, sigma, a):
    q = square.order + 1
    inverse = sigma.inverse()
    x_a = next(x for x in range(1, q) if square.cell(x, sigma(x)) == a)

    def op(x, y):
        if x < q and y < q:
            if y != sigma(x):
                return square.cell(x, y)
            return a if x == x_a else q
        if x < q:
            return q if x == x_a else square.cell(x, sigma(x))
        if y < q:
            return q if y == sigma(x_a) else square.cell(inverse(y), y)
        return a
    return tabulate(op, q)


def belyavskaya_idempotent_rule(square, a):
    q = square.order + 1

    def op(x, y):
        if x < q and y < q:
            if x != y:
                return square.cell(x, y)
            return a if x == a else q
        if (x, y) == (q, q):
            return a
        if a in (x, y):
            return q
        return x if y == q else y
    return tabulate(op, q)


def belyavskaya_diagonal_rule(square, a):
    q = square.order + 1
    x_a = square.diagonal().index(a) + 1

    def op(x, y):
        if x < q and y < q:
            if x != y:
                return square.cell(x, y)
            return a if x == x_a else q
        if (x, y) == (q, q):
            return a
        if x_a in (x, y):
            return q
        return square.cell(x, x) if y == q else square.cell(y, y)
    return tabulate(op, q)


def quasicomplete_rule(square, sigma, x1, x2, a, d):
    q = square.order + 1
    inverse = sigma.inverse()

    def op(x, y):
        if x < q and y < q:
            if y != sigma(x):
                return square.cell(x, y)
            return a if x == x1 else q
        if (x, y) == (q, q):
            return d
        if (x, y) in ((x1, q), (q, sigma(x1))):
            return q
        if (x, y) in ((x2, q), (q, sigma(x2))):
            return a
        return square.cell(x, sigma(x)) if y == q else square.cell(inverse(y), y)
    return tabulate(op, q)


def quasicomplete_rule_without_x2(square, sigma, x1, a, d):
    """The quasicomplete rule with every x2 case struck out"""
    q = square.order + 1
    inverse = sigma.inverse()

    def op(x, y):
        if x < q and y < q:
            if y != sigma(x):
                return square.cell(x, y)
            return a if x == x1 else q
        if (x, y) == (q, q):
            return d
        if (x, y) in ((x1, q), (q, sigma(x1))):
            return q
        return square.cell(x, sigma(x)) if y == q else square.cell(inverse(y), y)
    return tabulate(op, q)


def quasicomplete_diagonal_rule(square, x1, x2, a, d):
    q = square.order + 1

    def op(x, y):
        if x < q and y < q:
            if x != y:
                return square.cell(x, y)
            return a if x == x1 else q
        if (x, y) == (q, q):
            return d
        if x1 in (x, y):
            return q
        if x2 in (x, y):
            return a
        return x if y == q else y
    return tabulate(op, q)


def linear_idempotent(p):
    """x·y = 2x + (p-1)y mod p, idempotent for odd p"""
    return LatinSquare([[(2 * x + (p - 1) * y) % p + 1 for y in range(p)] for x in range(p)])


def random_permutation(n, rng):
    return Permutation(rng.permutation(n) + 1)


class TestGoldenTables(unittest.TestCase):
    def setUp(self):
        self.square = load_fixture('order5_square')

    def test_classical(self):
        self.assertEqual(prolong_classical(self.square, SIGMA).result, load_fixture('order5_classical_sigma'))
        self.assertEqual(prolong_classical(self.square, TAU).result, load_fixture('order5_classical_tau'))

    def test_classical_z3(self):
        z3 = cyclic_table(3)
        self.assertEqual(prolong_classical(z3, Permutation.identity(3)).result, load_fixture('z3_classical_identity'))
        self.assertEqual(prolong_classical(z3, Permutation([3, 1, 2])).result, load_fixture('z3_classical_sigma'))
        self.assertEqual(prolong_classical(z3, Permutation([2, 3, 1])).result, load_fixture('z3_classical_tau'))
        self.assertEqual(prolong_classical_idempotent(z3).result, load_fixture('z3_classical_identity'))

    def test_belyavskaya(self):
        self.assertEqual(prolong_belyavskaya(self.square, SIGMA, 2).result, load_fixture('order5_belyavskaya_a2'))
        self.assertEqual(prolong_belyavskaya(self.square, SIGMA, 3).result, load_fixture('order5_belyavskaya_a3'))
        z3 = prolong_belyavskaya(cyclic_table(3), Permutation.identity(3), 2)
        self.assertEqual(z3.result, load_fixture('z3_belyavskaya_diagonal'))
        self.assertEqual(z3.result.cell(4, 4), 2)

    def test_quasicomplete(self):
        self.assertEqual(prolong_quasicomplete(self.square, QUASI, 2).result, load_fixture('order5_quasicomplete_x1_2'))
        self.assertEqual(prolong_quasicomplete(self.square, QUASI, 4).result, load_fixture('order5_quasicomplete_x1_4'))

    def test_dispatcher(self):
        spec = ProlongationSpec(Method.BELYAVSKAYA, SIGMA, a=3)
        self.assertEqual(prolong(self.square, spec).result, load_fixture('order5_belyavskaya_a3'))
        spec = ProlongationSpec(Method.DD, QUASI, x1=4)
        self.assertEqual(prolong(self.square, spec).result, load_fixture('order5_quasicomplete_x1_4'))
        self.assertEqual(
            prolong(self.square, ProlongationSpec(Method.CLASSICAL, TAU)).result, load_fixture('order5_classical_tau')
        )
        with self.assertRaises(MappingError):
            prolong(self.square, ProlongationSpec(Method.BELYAVSKAYA, SIGMA))
        with self.assertRaises(MappingError):
            prolong(self.square, ProlongationSpec(Method.DD, QUASI))

    def test_dispatcher_reports_mapping_kind_before_parameters(self):
        with self.assertRaisesRegex(MappingError, "is complete, not quasicomplete"):
            prolong(self.square, ProlongationSpec(Method.DD, SIGMA))
        with self.assertRaisesRegex(MappingError, "is quasicomplete, not complete"):
            prolong(self.square, ProlongationSpec(Method.BELYAVSKAYA, QUASI))
        with self.assertRaisesRegex(MappingError, "needs the special preimage x1"):
            prolong(self.square, ProlongationSpec(Method.DD, QUASI))

    def test_header(self):
        text = prolong_belyavskaya(self.square, SIGMA, 2).to_text()
        self.assertIn("# method: belyavskaya\n", text)
        self.assertIn("# a: 2\n# x_a: 3\n", text)
        self.assertIn("# q: 6\n", text)
        self.assertEqual(parse_square(text), load_fixture('order5_belyavskaya_a2'))

        text = prolong_quasicomplete(self.square, QUASI, 4).to_text()
        self.assertIn("# d: 1 a: 2 x1: 4 x2: 2\n", text)
        self.assertIn("# conjugate: 4,2,5,2,3\n", text)


class TestConstructionErrors(unittest.TestCase):
    def setUp(self):
        self.square = load_fixture('order5_square')

    def test_wrong_mapping_kind(self):
        with self.assertRaises(MappingError) as ctx:
            prolong_classical(self.square, QUASI)
        self.assertIn("defect: 1", str(ctx.exception))
        with self.assertRaises(MappingError):
            prolong_belyavskaya(self.square, QUASI, 2)
        with self.assertRaises(MappingError):
            prolong_quasicomplete(self.square, SIGMA, 2)

    def test_parameters_out_of_range(self):
        for a in (0, 6):
            with self.assertRaises(MappingError):
                prolong_belyavskaya(self.square, SIGMA, a)
        with self.assertRaises(MappingError) as ctx:
            prolong_quasicomplete(self.square, QUASI, 3)
        self.assertIn("expected 2 or 4", str(ctx.exception))

    def test_order_mismatch(self):
        with self.assertRaises(OrderMismatchError):
            prolong_classical(self.square, Permutation.identity(4))

    def test_diagonal_must_be_a_bijection(self):
        with self.assertRaises(MappingError):
            prolong_classical_idempotent(klein_table())
        with self.assertRaises(MappingError):
            prolong_classical_idempotent(cyclic_table(4))

    def test_method_names(self):
        self.assertIs(Method.from_name('dd'), Method.DD)
        self.assertIs(Method.from_name('classical'), Method.CLASSICAL)
        with self.assertRaises(MappingError):
            Method.from_name('bruck')


class TestSpecialCases(unittest.TestCase):
    def test_order_one(self):
        result = prolong_classical(cyclic_table(1), Permutation.identity(1)).result
        self.assertEqual(result.rows, ((2, 1), (1, 2)))
        self.assertEqual(result.identity_element(), 2)
        self.assertIsNotNone(are_isotopic(result, cyclic_table(2)))

    def test_idempotent_square_gives_loop_with_identity_q(self):
        square = LatinSquare([[1, 3, 2], [3, 2, 1], [2, 1, 3]])
        result = prolong_classical_idempotent(square).result
        self.assertEqual(result.rows, ((4, 3, 2, 1), (3, 4, 1, 2), (2, 1, 4, 3), (1, 2, 3, 4)))
        self.assertEqual(result.identity_element(), 4)

    def test_cyclic_six_through_quasicomplete_mapping(self):
        z6 = cyclic_table(6)
        self.assertEqual(eligible_mappings(z6, Method.CLASSICAL), [])
        for sigma in find_quasicomplete_mappings(z6, limit=5):
            info = classify(z6, sigma)
            for x1 in info.special_preimages:
                result = prolong_quasicomplete(z6, sigma, x1).result
                self.assertEqual(result.order, 7)
                self.assertTrue(validate(result.cells).valid)

    def test_eligible_mappings(self):
        square = load_fixture('order5_square')
        self.assertEqual(eligible_mappings(square, Method.BELYAVSKAYA), find_complete_mappings(square))
        self.assertEqual(eligible_mappings(square, Method.DD, limit=3), find_quasicomplete_mappings(square, 3))


class TestConstructionProperties(unittest.TestCase):
    def check_prolongation(self, square, sigma, prolongation, expected_rows):
        n = square.order
        result = prolongation.result
        self.assertEqual(result.order, n + 1)
        self.assertTrue(validate(result.cells).valid)
        self.assertEqual([list(row) for row in result.rows], expected_rows)
        for x in range(1, n + 1):
            for y in range(1, n + 1):
                if y != sigma(x):
                    self.assertEqual(result.cell(x, y), square.cell(x, y))

    def test_random_squares_follow_the_cell_rules(self):
        rng = np.random.default_rng(31337)
        for _ in range(200):
            n = int(rng.integers(1, 9))
            square = random_square(n, rng)

            for sigma in find_complete_mappings(square, limit=2):
                classical = prolong_classical(square, sigma)
                self.check_prolongation(square, sigma, classical, classical_rule(square, sigma))
                border = [classical.result.cell(x, n + 1) for x in range(1, n + 2)]
                self.assertEqual(sorted(border), list(range(1, n + 2)))
                for a in range(1, n + 1):
                    self.check_prolongation(
                        square, sigma, prolong_belyavskaya(square, sigma, a), belyavskaya_rule(square, sigma, a)
                    )

            for sigma in find_quasicomplete_mappings(square, limit=2):
                info = classify(square, sigma)
                for x1 in info.special_preimages:
                    x2 = next(x for x in info.special_preimages if x != x1)
                    expected = quasicomplete_rule(square, sigma, x1, x2, info.special, info.defect_element)
                    self.check_prolongation(square, sigma, prolong_quasicomplete(square, sigma, x1), expected)

    def test_fixture_squares_with_every_parameter(self):
        for square in (load_fixture('order5_square'), cyclic_table(3), cyclic_table(5), klein_table(), cyclic_table(4)):
            for sigma in find_complete_mappings(square):
                for a in range(1, square.order + 1):
                    self.check_prolongation(
                        square, sigma, prolong_belyavskaya(square, sigma, a), belyavskaya_rule(square, sigma, a)
                    )
            for sigma in find_quasicomplete_mappings(square):
                for x1 in classify(square, sigma).special_preimages:
                    self.assertTrue(validate(prolong_quasicomplete(square, sigma, x1).result.cells).valid)


class TestSpecializations(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(5)
        self.idempotent = []
        for p in (3, 5, 7):
            base = linear_idempotent(p)
            self.idempotent.append(base)
            for _ in range(3):
                pi = random_permutation(p, rng)
                self.idempotent.append(apply_isotopy(base, pi, pi, pi))

        # Moving a mapping onto the diagonal: M(x, x) = L(x, sigma(x))
        self.diagonal_bijective = []
        self.diagonal_short = []
        for _ in range(40):
            n = int(rng.integers(2, 8))
            square = random_square(n, rng)
            identity = Permutation.identity(n)
            for sigma in find_complete_mappings(square, limit=1):
                self.diagonal_bijective.append(apply_isotopy(square, identity, sigma.inverse(), identity))
            for sigma in find_quasicomplete_mappings(square, limit=1):
                self.diagonal_short.append(apply_isotopy(square, identity, sigma.inverse(), identity))

    def test_squares_are_what_the_rules_assume(self):
        for square in self.idempotent:
            self.assertTrue(square.is_idempotent())
        for square in self.diagonal_bijective:
            self.assertIs(classify(square, Permutation.identity(square.order)).kind, MappingKind.COMPLETE)
        for square in self.diagonal_short:
            self.assertIs(classify(square, Permutation.identity(square.order)).kind, MappingKind.QUASICOMPLETE)
        self.assertTrue(self.diagonal_bijective)
        self.assertTrue(self.diagonal_short)

    def test_idempotent_classical_is_a_loop(self):
        for square in self.idempotent:
            result = prolong_classical_idempotent(square).result
            self.assertEqual([list(row) for row in result.rows], idempotent_loop_rule(square))
            self.assertEqual(result.identity_element(), square.order + 1)

    def test_diagonal_classical(self):
        for square in self.diagonal_bijective + self.idempotent:
            result = prolong_classical(square, Permutation.identity(square.order)).result
            self.assertEqual([list(row) for row in result.rows], diagonal_rule(square))

    def test_idempotent_belyavskaya(self):
        for square in self.idempotent:
            identity = Permutation.identity(square.order)
            for a in range(1, square.order + 1):
                result = prolong_belyavskaya(square, identity, a).result
                self.assertEqual([list(row) for row in result.rows], belyavskaya_idempotent_rule(square, a))

    def test_diagonal_belyavskaya(self):
        for square in self.diagonal_bijective:
            identity = Permutation.identity(square.order)
            for a in range(1, square.order + 1):
                result = prolong_belyavskaya(square, identity, a).result
                self.assertEqual([list(row) for row in result.rows], belyavskaya_diagonal_rule(square, a))

    def test_quasicomplete_on_normalized_diagonal(self):
        for square in self.diagonal_short:
            n = square.order
            identity = Permutation.identity(n)
            info = classify(square, identity)
            first, second = info.special_preimages
            # relabel symbols so every x outside {first, second} is idempotent
            relabel = [0] * n
            for x in range(1, n + 1):
                if x != second:
                    relabel[info.conjugate(x) - 1] = x
            relabel[info.defect_element - 1] = second
            normal = apply_isotopy(square, identity, identity, Permutation(relabel))
            normal_info = classify(normal, identity)
            self.assertEqual(normal_info.special_preimages, (first, second))
            for x1, x2 in ((first, second), (second, first)):
                result = prolong_quasicomplete(normal, identity, x1).result
                expected = quasicomplete_diagonal_rule(
                    normal, x1, x2, normal_info.special, normal_info.defect_element
                )
                self.assertEqual([list(row) for row in result.rows], expected)

    def test_quasicomplete_rule_without_x2_is_belyavskaya(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            n = int(rng.integers(1, 8))
            square = random_square(n, rng)
            for sigma in find_complete_mappings(square, limit=2):
                conj = classify(square, sigma).conjugate
                for a in range(1, n + 1):
                    x_a = conj.values.index(a) + 1
                    expected = quasicomplete_rule_without_x2(square, sigma, x_a, a, a)
                    result = prolong_belyavskaya(square, sigma, a).result
                    self.assertEqual([list(row) for row in result.rows], expected)


if __name__ == '__main__':
    unittest.main()
