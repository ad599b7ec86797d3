"""Command line front end.

Commands
--------
verify        run all six PVA axiom checks on a bracket
deform        run the deformation pipeline (ansatz -> skew -> Jacobi ->
              solve -> triviality matching) and write a report
epdiff        derive the geodesic evolution equations and compare them
              against the independently assembled pattern
reduce-check  check the divergence-free reduction and the stream-function
              commutator identities on seeded random polynomials

Exit codes: 0 success (or verdict trivial), 1 mathematical failure,
2 usage or parse error, 3 verdict nontrivial, 4 verdict undetermined.
Reports are deterministic given identical inputs and flags; only the
timings differ between runs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from random import Random

from pva.bracket import (
    BracketTable,
    check_jacobi,
    check_leibniz,
    check_sesquilinearity,
    check_skewsymmetry,
    jacobi_is_zero,
)
from pva.deform import (
    DeformError,
    generate_ansatz,
    impose_skewsymmetry,
    jacobi_defect_linear,
    match_trivial,
    solve_deformation,
)
from pva.linsolve import SolveBoundError
from pva.models import (
    PolyStreamFunction,
    divfree_commutator,
    epdiff_bracket,
    epdiff_evolution,
    epdiff_expected_pattern,
    euler_bracket,
    reduction_consistency_check,
    stream_jacobian,
)
from pva.parser import ParseError, parse_bracket_source

EXIT_OK = 0
EXIT_MATH_FAILURE = 1
EXIT_USAGE = 2
EXIT_NONTRIVIAL = 3
EXIT_UNDETERMINED = 4

BUILTINS = ("euler", "epdiff1", "epdiff2")


def resolve_bracket(source: str) -> tuple[str, BracketTable]:
    """A builtin name or ``file:PATH`` to a definition file."""
    if source == "euler":
        return source, euler_bracket().table
    if source == "epdiff1":
        return source, epdiff_bracket(1).table
    if source == "epdiff2":
        return source, epdiff_bracket(2).table
    if source.startswith("file:"):
        path = Path(source[len("file:"):])
        try:
            text = path.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc.strerror}", 0, 0)
        return str(path), parse_bracket_source(text)
    raise ParseError(f"unknown bracket source {source!r} (builtins: {', '.join(BUILTINS)})", 0, 0)


# ---------------------------------------------------------------------------
# verify


_AXES = (
    "sesquilinearity-1",
    "sesquilinearity-2",
    "left-leibniz",
    "right-leibniz",
    "skewsymmetry",
    "jacobi",
)


def cmd_verify(args) -> int:
    try:
        name, table = resolve_bracket(args.bracket)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    failures: dict[str, list[str]] = {axis: [] for axis in _AXES}
    for text in check_sesquilinearity(table):
        axis = "sesquilinearity-1" if text.startswith("sesquilinearity-1") else "sesquilinearity-2"
        failures[axis].append(text)
    for text in check_leibniz(table):
        axis = "left-leibniz" if text.startswith("left-leibniz") else "right-leibniz"
        failures[axis].append(text)
    failures["skewsymmetry"] = check_skewsymmetry(table)
    if not jacobi_is_zero(check_jacobi(table)):
        failures["jacobi"] = ["PVA-Jacobi defect is nonzero"]

    ok = True
    for axis in _AXES:
        bad = failures[axis]
        status = "pass" if not bad else "FAIL"
        ok = ok and not bad
        print(f"{name}: {axis}: {status}")
        if bad and not args.quiet:
            for item in bad[:3]:
                print(f"    {item}")
    return EXIT_OK if ok else EXIT_MATH_FAILURE


# ---------------------------------------------------------------------------
# deform


@dataclass
class Report:
    order: int
    raw_param_count: int
    skew_param_count: int | None = None
    solution_dim: int | None = None
    free_symbols: list[str] = field(default_factory=list)
    verdict: str | None = None
    miura_witness: str | None = None
    timings: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "order": self.order,
            "raw_param_count": self.raw_param_count,
            "skew_param_count": self.skew_param_count,
            "solution_dim": self.solution_dim,
            "free_symbols": self.free_symbols,
            "verdict": self.verdict,
            "miura_witness": self.miura_witness,
            "timings": self.timings,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _validate_base(table: BracketTable, validate: bool) -> str | None:
    """Reject degenerate deformation bases; returns a diagnostic or None."""
    if table.alg.N != 1:
        return "deformation analysis needs a scalar bracket (one generator)"
    if table.is_zero:
        return "base bracket is zero; a valid degree-2 bracket is required"
    if table.homogeneous_degree() != 2:
        return "base bracket must be homogeneous of degree 2"
    if validate:
        if check_skewsymmetry(table):
            return "base bracket is not skewsymmetric"
        if not jacobi_is_zero(check_jacobi(table)):
            return "base bracket does not satisfy the Jacobi identity"
    return None


def cmd_deform(args) -> int:
    try:
        name, table = resolve_bracket(args.bracket)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    diagnostic = _validate_base(table, validate=not args.no_validate)
    if diagnostic:
        print(f"{name}: {diagnostic}", file=sys.stderr)
        return EXIT_USAGE

    degree = args.order + 2
    report = Report(order=args.order, raw_param_count=0)
    timings = report.timings

    def timed(stage, fn):
        start = time.perf_counter()
        out = fn()
        timings[stage] = round((time.perf_counter() - start) * 1000.0, 3)
        return out

    ansatz = timed("ansatz", lambda: generate_ansatz(degree, table.alg.D, table.alg))
    report.raw_param_count = len(ansatz.orbits)
    try:
        reduced, _ = timed("skewsymmetry", lambda: impose_skewsymmetry(ansatz))
        report.skew_param_count = len(reduced.free_bases)
        system = timed("jacobi", lambda: jacobi_defect_linear(table, reduced))
        solution = timed("solve", lambda: solve_deformation(system, reduced))
        report.solution_dim = solution.dimension
        report.free_symbols = list(solution.free_bases)
        verdict = timed("match", lambda: match_trivial(solution, reduced, table))
        report.verdict = verdict.verdict
        report.miura_witness = verdict.witness_text()
    except SolveBoundError as exc:
        report.verdict = "undetermined"
        report.miura_witness = None
        if not args.quiet:
            print(f"solver bound exhausted: {exc}", file=sys.stderr)

    if args.out:
        Path(args.out).write_text(report.to_json())
    if not args.quiet:
        print(f"bracket: {name}")
        print(f"order: {report.order}  degree: {degree}")
        print(f"raw parameters: {report.raw_param_count}")
        print(f"after skewsymmetry: {report.skew_param_count}")
        print(f"solution dimension: {report.solution_dim}")
        if report.free_symbols:
            print(f"free parameters: {', '.join(report.free_symbols)}")
        print(f"verdict: {report.verdict}")
        if report.miura_witness:
            print(f"miura witness: {report.miura_witness}")
    return {
        "trivial": EXIT_OK,
        "nontrivial": EXIT_NONTRIVIAL,
        "undetermined": EXIT_UNDETERMINED,
    }.get(report.verdict, EXIT_MATH_FAILURE)


# ---------------------------------------------------------------------------
# epdiff


def cmd_epdiff(args) -> int:
    derived = epdiff_evolution(args.dim)
    expected = epdiff_expected_pattern(args.dim)
    ok = True
    for k, (lhs, rhs) in enumerate(zip(derived, expected)):
        gen = expected[k].alg.gens[k] if args.dim > 1 else "m"
        match = lhs == rhs
        ok = ok and match
        print(f"d{gen}/dt = {lhs}")
        print(f"   pattern: {rhs}  [{'match' if match else 'MISMATCH'}]")
    return EXIT_OK if ok else EXIT_MATH_FAILURE


# ---------------------------------------------------------------------------
# reduce-check


def cmd_reduce_check(args) -> int:
    if args.trials < 1:
        print("trials must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    ok, derived, expected = reduction_consistency_check(args.orientation)
    print(f"structure-function reduction equals vorticity bracket: {'pass' if ok else 'FAIL'}")
    if not ok and not args.quiet:
        print(f"    derived:  {derived}")
        print(f"    expected: {expected}")
    rng = Random(args.seed)
    failures = 0
    for _ in range(args.trials):
        phi = PolyStreamFunction.random(rng, max_degree=4)
        psi = PolyStreamFunction.random(rng, max_degree=4)
        # divergence freeness is asserted inside the commutator
        _, chi = divfree_commutator(phi, psi, args.orientation)
        if chi != stream_jacobian(phi, psi, args.orientation).drop_constant():
            failures += 1
    print(f"random stream-function trials: {args.trials - failures}/{args.trials} pass")
    return EXIT_OK if ok and failures == 0 else EXIT_MATH_FAILURE


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pva",
        description="Exact Poisson vertex algebra computations and dispersive deformation analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check the six PVA axioms")
    p.add_argument("--bracket", required=True, help="euler | epdiff1 | epdiff2 | file:PATH")
    p.add_argument("--quiet", action="store_true", help="suppress failure details")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("deform", help="deformation analysis of a scalar bracket")
    p.add_argument("--bracket", required=True, help="euler | epdiff1 | epdiff2 | file:PATH")
    p.add_argument("--order", type=int, choices=(1, 2), required=True)
    p.add_argument("--out", help="write the machine-readable report here")
    p.add_argument("--quiet", action="store_true", help="suppress the stdout summary")
    p.add_argument("--no-validate", action="store_true", help="skip base bracket axiom validation")
    p.set_defaults(fn=cmd_deform)

    p = sub.add_parser("epdiff", help="derive the geodesic evolution equations")
    p.add_argument("--dim", type=int, choices=(1, 2), required=True)
    p.set_defaults(fn=cmd_epdiff)

    p = sub.add_parser("reduce-check", help="divergence-free reduction checks")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--orientation", type=int, choices=(1, -1), default=1)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_reduce_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (DeformError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
