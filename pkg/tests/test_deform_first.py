"""First-order deformation analysis and the coboundary machinery.

The skewsymmetry relations are checked against the closed-form expressions
(B = (3/2)A' and the symmetrized E, F, G formulas), evaluated per symmetry
orbit.  Shape letters here: A l^3, B l^2 dw, C l d^2w, D l (dw)^2,
E d^3w, F dw d^2w, G (dw)^3 (C and D swap roles relative to the usual
naming of the l(dw)^2 and l d^2w classes; the tests look shapes up
structurally, never by letter).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from random import Random

import pytest

from pva.diffalg import Alg, Coefficient, DiffPoly, Sym, idx_unit, random_poly
from pva.bracket import BracketTable, LambdaPoly, skew_adjoint
from pva.deform import (
    Ansatz,
    DeformError,
    MiuraTransform,
    coboundary_by_formula,
    coboundary_by_substitution,
    generate_ansatz,
    generic_miura,
    impose_skewsymmetry,
    jacobi_defect_linear,
    match_trivial,
    solve_deformation,
    targeted_class_predicate,
    trivial_coboundary,
)
from pva.linsolve import ConstraintSystem, Solution, solve


def brute_force_shape_count(degree: int, D: int) -> int:
    """Independent oracle: count monomials l^K prod w_{I_j} of total degree
    ``degree`` with every |I_j| >= 1, by direct enumeration."""
    def indices(total):
        if D == 1:
            return [(total,)]
        return [(a, total - a) for a in range(total + 1)]

    def jet_multisets(budget):
        if budget == 0:
            return [()]
        out = set()
        for first_order in range(1, budget + 1):
            for idx in indices(first_order):
                for rest in jet_multisets(budget - first_order):
                    out.add(tuple(sorted((idx,) + rest)))
        return sorted(out)

    count = 0
    for lam_order in range(degree + 1):
        for _K in indices(lam_order):
            count += len(jet_multisets(degree - lam_order))
    return count


def orbit_sym(ansatz, n_lambda, jet_orders, lam, jets, deriv=0) -> Sym:
    jets = tuple(sorted(jets, key=lambda i: (sum(i), i)))
    for o in ansatz.orbits_of_shape(n_lambda, jet_orders):
        if o.lam == lam and o.jets == jets:
            return Sym(o.base, deriv)
    raise KeyError((n_lambda, jet_orders, lam, jets))


def e(*directions):
    """Multi-index from 1-based direction digits, D=2."""
    out = [0, 0]
    for d in directions:
        out[d - 1] += 1
    return tuple(out)


class TestAnsatzGeneration:
    def test_parameter_counts(self):
        assert len(generate_ansatz(3, 2).orbits) == 36
        assert len(generate_ansatz(3, 1).orbits) == 7
        assert len(generate_ansatz(4, 2).orbits) == 92

    def test_counts_match_enumeration_oracle(self):
        for degree, D in ((3, 1), (3, 2), (4, 1), (4, 2), (5, 1)):
            assert len(generate_ansatz(degree, D).orbits) == brute_force_shape_count(degree, D)

    def test_shape_census_degree3(self):
        a = generate_ansatz(3, 2)
        census = {(s.n_lambda, s.jet_orders): len(a.orbits_of_shape(s.n_lambda, s.jet_orders)) for s in a.shapes}
        assert census == {
            (3, ()): 4,
            (2, (1,)): 6,
            (1, (2,)): 6,
            (1, (1, 1)): 6,
            (0, (3,)): 4,
            (0, (2, 1)): 6,
            (0, (1, 1, 1)): 4,
        }

    def test_entry_homogeneous(self):
        for degree in (3, 4):
            a = generate_ansatz(degree, 2)
            assert a.entry.homogeneous_degree() == degree

    def test_multiplicities_follow_tensor_sum(self):
        # l1^2 w_y carries its orbit coefficient once, l1 l2 w_y twice
        a = generate_ansatz(3, 2)
        entry = a.entry
        sym_11_2 = orbit_sym(a, 2, (1,), e(1, 1), (e(2),))
        sym_12_2 = orbit_sym(a, 2, (1,), e(1, 2), (e(2),))
        mono = ((0, e(2)),)
        assert entry.terms[(e(1, 1),)].terms[mono] == Coefficient.of(sym_11_2)
        assert entry.terms[(e(1, 2),)].terms[mono] == Coefficient.of(sym_12_2).scale(2)

    def test_degree_below_three_rejected(self):
        with pytest.raises(DeformError):
            generate_ansatz(2, 2)


@pytest.fixture(scope="module")
def reduced3():
    return impose_skewsymmetry(generate_ansatz(3, 2))


@pytest.fixture(scope="module")
def pipeline(euler_table):
    reduced, _ = impose_skewsymmetry(generate_ansatz(3, 2))
    system = jacobi_defect_linear(euler_table, reduced)
    return reduced, system


class TestSkewSymmetry:
    def test_free_count_and_classes(self, reduced3):
        reduced, _ = reduced3
        assert len(reduced.free_bases) == 16
        odd = {o.base for o in reduced.orbits if o.shape.n_lambda % 2 == 1}
        assert set(reduced.free_bases) == odd

    def test_fixed_point(self, reduced3):
        reduced, _ = reduced3
        assert skew_adjoint(reduced.entry) == reduced.entry

    def test_top_relation(self, reduced3):
        # coefficient of two alphabet symbols and one first-order jet equals
        # 3/2 times the derivative of the pure-alphabet coefficient
        reduced, solution = reduced3
        a = reduced
        for ab in ((1, 1), (1, 2), (2, 2)):
            for c in (1, 2):
                lhs = orbit_sym(a, 2, (1,), e(*ab), (e(c),))
                rhs = orbit_sym(a, 3, (), e(*ab, c), (), deriv=1)
                assert solution.substitution[lhs] == {rhs: Fraction(3, 2)}

    def test_third_jet_relation(self, reduced3):
        # E^{abc} = (1/12)(2 D^{a,bc} + 2 D^{b,ca} + 2 D^{c,ab} - 3 A^{abc}')
        # with D the l d^2w class
        reduced, solution = reduced3
        a = reduced
        for abc in ((1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2)):
            lhs = orbit_sym(a, 0, (3,), (0, 0), (e(*abc),))
            expected: dict[Sym, Fraction] = {}
            for k in range(3):
                x = abc[k]
                rest = abc[:k] + abc[k + 1:]
                sym = orbit_sym(a, 1, (2,), e(x), (e(*rest),))
                expected[sym] = expected.get(sym, Fraction(0)) + Fraction(2, 12)
            expected[orbit_sym(a, 3, (), e(*abc), (), deriv=1)] = Fraction(-3, 12)
            assert solution.substitution[lhs] == expected

    def test_mixed_jet_relation(self, reduced3):
        # F^{a,bc} = (1/4)(2 C^{b,ca} + 2 C^{c,ab} + 2 D^{a,bc}' - 3 A^{abc}'')
        # with C the l (dw)^2 class and D the l d^2w class
        reduced, solution = reduced3
        a = reduced
        for first in (1, 2):
            for bc in ((1, 1), (1, 2), (2, 2)):
                lhs = orbit_sym(a, 0, (2, 1), (0, 0), (e(first), e(*bc)))
                expected: dict[Sym, Fraction] = {}
                for k in range(2):
                    x = bc[k]
                    other = bc[1 - k]
                    sym = orbit_sym(a, 1, (1, 1), e(x), (e(other), e(first)))
                    expected[sym] = expected.get(sym, Fraction(0)) + Fraction(2, 4)
                dsym = orbit_sym(a, 1, (2,), e(first), (e(*bc),), deriv=1)
                expected[dsym] = expected.get(dsym, Fraction(0)) + Fraction(2, 4)
                expected[orbit_sym(a, 3, (), e(first, *bc), (), deriv=2)] = Fraction(-3, 4)
                assert solution.substitution[lhs] == expected

    def test_triple_jet_relation(self, reduced3):
        # G^{abc} = (1/12)(2 C^{a,bc}' + 2 C^{b,ca}' + 2 C^{c,ab}' - 3 A^{abc}''')
        reduced, solution = reduced3
        a = reduced
        for abc in ((1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2)):
            lhs = orbit_sym(a, 0, (1, 1, 1), (0, 0), tuple(e(x) for x in abc))
            expected: dict[Sym, Fraction] = {}
            for k in range(3):
                x = abc[k]
                rest = abc[:k] + abc[k + 1:]
                sym = orbit_sym(a, 1, (1, 1), e(x), (e(rest[0]), e(rest[1])), deriv=1)
                expected[sym] = expected.get(sym, Fraction(0)) + Fraction(2, 12)
            expected[orbit_sym(a, 3, (), e(*abc), (), deriv=3)] = Fraction(-3, 12)
            assert solution.substitution[lhs] == expected

    def test_one_dimensional_relations(self):
        # hand-expanded fixed-point relations in one independent variable
        reduced, solution = impose_skewsymmetry(generate_ansatz(3, 1))
        assert reduced.free_bases == ["A{111}", "C{1|11}", "D{1|1.1}"]
        sub = solution.substitution
        assert sub[Sym("B{11|1}")] == {Sym("A{111}", 1): Fraction(3, 2)}
        assert sub[Sym("E{111}")] == {Sym("C{1|11}"): Fraction(1, 2), Sym("A{111}", 1): Fraction(-1, 4)}
        assert sub[Sym("F{1.11}")] == {
            Sym("D{1|1.1}"): Fraction(1),
            Sym("C{1|11}", 1): Fraction(1, 2),
            Sym("A{111}", 2): Fraction(-3, 4),
        }
        assert sub[Sym("G{1.1.1}")] == {
            Sym("D{1|1.1}", 1): Fraction(1, 2),
            Sym("A{111}", 3): Fraction(-1, 4),
        }

    def test_zero_ansatz_stays_zero(self):
        a = generate_ansatz(3, 2)
        zeroed = Ansatz(a.alg, 3, LambdaPoly.zero(a.alg), a.shapes, a.orbits)
        reduced, solution = impose_skewsymmetry(zeroed)
        assert reduced.entry.is_zero
        assert solution.substitution == {}


class TestFirstOrderSystem:
    def test_all_unknowns_vanish(self, pipeline):
        reduced, system = pipeline
        solution = solve_deformation(system, reduced)
        assert solution.dimension == 0
        assert all(form == {} for form in solution.substitution.values())

    def test_targeted_classes_suffice(self, pipeline):
        reduced, system = pipeline
        restricted = system.filtered(targeted_class_predicate)
        assert 0 < len(restricted) < len(system)
        solution = solve_deformation(restricted, reduced)
        assert solution.dimension == 0
        assert all(form == {} for form in solution.substitution.values())

    def test_zero_deformation_gives_empty_system(self, euler_table):
        a = generate_ansatz(3, 2)
        zeroed = Ansatz(a.alg, 3, LambdaPoly.zero(a.alg), a.shapes, a.orbits)
        assert len(jacobi_defect_linear(euler_table, zeroed)) == 0

    def test_equation_order_irrelevant(self, pipeline):
        reduced, system = pipeline
        rng = Random(13)
        shuffled = ConstraintSystem(list(system.equations))
        rng.shuffle(shuffled.equations)
        a = solve_deformation(system, reduced)
        b = solve_deformation(shuffled, reduced)
        assert a.substitution == b.substitution
        assert a.free_bases == b.free_bases

    def test_match_trivial_on_zero_solution(self, pipeline, euler_table):
        reduced, system = pipeline
        solution = solve_deformation(system, reduced)
        verdict = match_trivial(solution, reduced, euler_table)
        assert verdict.verdict == "trivial"


class TestCoboundary:
    def test_zero_correction(self, euler_table):
        alg = euler_table.alg
        m = MiuraTransform(1, DiffPoly.zero(alg))
        assert trivial_coboundary(euler_table, m).is_zero

    def test_first_order_corrections_are_inert(self, euler_table):
        # any degree-1 correction, even with an opaque coefficient function,
        # induces the zero change of the vorticity bracket
        alg = euler_table.alg
        h = DiffPoly.const(alg, Coefficient.symbol("h"))
        for d in range(2):
            F = h * DiffPoly.jet(alg, 0, idx_unit(2, d))
            assert trivial_coboundary(euler_table, MiuraTransform(1, F)).is_zero

    def test_routes_agree_on_random_corrections(self, euler_table):
        alg = euler_table.alg
        rng = Random(2024)
        checked = 0
        while checked < 100:
            p = random_poly(alg, rng, max_terms=3, max_degree=3, allow_symbols=True)
            deg = p.homogeneous_degree()
            if deg is None or deg < 1:
                continue
            m = MiuraTransform(deg, p)
            a = coboundary_by_formula(euler_table, m)
            b = coboundary_by_substitution(euler_table, m)
            assert a == b
            checked += 1

    def test_degree_bookkeeping(self, euler_table):
        alg = euler_table.alg
        rng = Random(99)
        for degree in (1, 2, 3):
            made = 0
            while made < 5:
                p = random_poly(alg, rng, max_terms=2, max_degree=degree)
                if p.homogeneous_degree() != degree:
                    continue
                cb = trivial_coboundary(euler_table, MiuraTransform(degree, p))
                if not cb.is_zero:
                    assert cb.homogeneous_degree() == degree + 2
                made += 1

    def test_generic_coboundary_is_compatible(self, euler_table):
        miura, _ = generic_miura(euler_table.alg, 2)
        cb = trivial_coboundary(euler_table, miura)
        assert skew_adjoint(cb) == cb
        holder = Ansatz(euler_table.alg, 4, cb, [], [])
        assert len(jacobi_defect_linear(euler_table, holder)) == 0

    def test_non_homogeneous_correction_rejected(self, euler_table):
        alg = euler_table.alg
        bad = DiffPoly.gen(alg, 0) + DiffPoly.jet(alg, 0, (1, 0))
        with pytest.raises(DeformError):
            MiuraTransform(1, bad)
