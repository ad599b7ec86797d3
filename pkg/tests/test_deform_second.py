"""Second-order deformation analysis: the full classification run."""

from __future__ import annotations

from fractions import Fraction

import pytest

from pva.diffalg import Coefficient, DiffPoly, Sym
from pva.bracket import LambdaPoly, skew_adjoint
from pva.deform import (
    Ansatz,
    generate_ansatz,
    generic_miura,
    impose_skewsymmetry,
    jacobi_defect_linear,
    match_trivial,
    solve_deformation,
    trivial_coboundary,
)
from pva.linsolve import SolveBoundError, Solution


@pytest.fixture(scope="module")
def order2(euler_table):
    ansatz = generate_ansatz(4, 2)
    reduced, skew_solution = impose_skewsymmetry(ansatz)
    system = jacobi_defect_linear(euler_table, reduced)
    solution = solve_deformation(system, reduced)
    verdict = match_trivial(solution, reduced, euler_table)
    return {
        "ansatz": ansatz,
        "reduced": reduced,
        "system": system,
        "solution": solution,
        "verdict": verdict,
    }


class TestSecondOrder:
    def test_raw_parameter_count(self, order2):
        assert len(order2["ansatz"].orbits) == 92

    def test_skew_reduction_count(self, order2):
        assert len(order2["reduced"].free_bases) == 36

    def test_free_classes_after_skew(self, order2):
        # the odd-alphabet classes: l^3 dw (8), l d^3w (8), l dw d^2w (12),
        # l (dw)^3 (8)
        reduced = order2["reduced"]
        census = {}
        free = set(reduced.free_bases)
        for orbit in reduced.orbits:
            if orbit.base in free:
                key = (orbit.shape.n_lambda, orbit.shape.jet_orders)
                census[key] = census.get(key, 0) + 1
        assert census == {(3, (1,)): 8, (1, (3,)): 8, (1, (2, 1)): 12, (1, (1, 1, 1)): 8}

    def test_pure_alphabet_class_eliminated(self, order2):
        # no skewsymmetric scalar operator has even leading order: the l^4
        # coefficients are forced to zero outright, and no jet-free key
        # survives in the reduced entry
        entry = order2["reduced"].entry
        surviving = {s.base for poly in entry.terms.values() for s in poly.symbols()}
        for orbit in order2["ansatz"].orbits_of_shape(4, ()):
            assert orbit.base not in surviving
        assert all(() not in poly.terms for poly in entry.terms.values() if poly)

    def test_solution_dimension_six(self, order2):
        assert order2["solution"].dimension == 6

    def test_verdict_trivial_with_witness(self, order2):
        verdict = order2["verdict"]
        assert verdict.verdict == "trivial"
        assert verdict.witness
        text = verdict.witness_text()
        assert text and "=" in text

    def test_witness_solves_matching_system(self, order2, euler_table):
        # substitute the witness into the generic coboundary and compare with
        # the general solution entry, symbolically in the free parameters
        reduced = order2["reduced"]
        solution = order2["solution"]
        verdict = order2["verdict"]
        general = reduced.entry.substitute_symbols(
            {s: Coefficient({(k,): v for k, v in form.items()}) for s, form in solution.substitution.items()}
        )
        miura, bases = generic_miura(euler_table.alg, 2)
        cb = trivial_coboundary(euler_table, miura)
        needed = {s for p in cb.terms.values() for s in p.symbols() if s.base in set(bases)}
        from pva.deform import _complete_witness

        witness = _complete_witness(verdict.witness, needed)
        substituted = cb.substitute_symbols(
            {s: Coefficient({(k,): v for k, v in form.items()}) for s, form in witness.items()}
        )
        assert substituted == general

    def test_miura_unknown_count(self, euler_table):
        _, bases = generic_miura(euler_table.alg, 2)
        assert len(bases) == 6


class TestNontrivialDirection:
    def test_central_extension_is_not_a_coboundary(self, epdiff1_table):
        # t * l^3 over the degree-1 momentum bracket: a skewsymmetric
        # compatible direction (for constant t) that no second-kind Miura
        # transformation generates
        alg = epdiff1_table.alg
        entry = LambdaPoly(alg, 1, {((3,),): DiffPoly.const(alg, Coefficient.symbol("t"))})
        synthetic = Ansatz(alg, 3, entry, [], [])
        synthetic.free_bases = ["t"]
        solution = Solution({}, [Sym("t")], ["t"], 0)
        verdict = match_trivial(solution, synthetic, epdiff1_table)
        assert verdict.verdict == "nontrivial"
        assert verdict.obstructions
        flattened = {s for form in verdict.obstructions for s in form}
        assert {s.base for s in flattened} == {"t"}

    def test_constant_coefficient_constraints_reported(self, epdiff1_table):
        # with t an unknown *function*, compatibility demands t' = 0; the
        # solver refuses to count constants as free functions
        alg = epdiff1_table.alg
        entry = LambdaPoly(alg, 1, {((3,),): DiffPoly.const(alg, Coefficient.symbol("t"))})
        synthetic = Ansatz(alg, 3, entry, [], [])
        synthetic.free_bases = ["t"]
        system = jacobi_defect_linear(epdiff1_table, synthetic)
        assert len(system) > 0
        assert all(set(eq.form) <= {Sym("t", k) for k in range(1, 6)} for eq in system.equations)
        with pytest.raises(SolveBoundError):
            solve_deformation(system, synthetic)
