"""Exact solving of linear systems over unknown function symbols.

The unknowns are formal functions of the generator together with their
formal derivatives; each ``(base, deriv_order)`` pair is one column.  An
equation is a rational linear form set to zero (plus, for matching
problems, an inhomogeneous right-hand side over designated parameter
symbols).

Because equations hold identically in the generator, their formal
derivatives hold as well; the solver closes the system under
differentiation up to one order beyond the highest derivative present and
then runs exact reduced row echelon elimination over Q.  After
elimination the substitution map is validated to be differentially
consistent: whenever ``(base, d)`` and ``(base, d+1)`` are both resolved,
the second must be the formal derivative of the first.  A base whose
order-0 symbol stays free must be free at every visible order (a free
*function*); other patterns abort loudly rather than report an
ill-defined dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from pva.diffalg import Sym

LinForm = dict[Sym, Fraction]

_ONE = Fraction(1)


class SolveBoundError(RuntimeError):
    """Prolongation bound exhausted or an inconsistent derivative tower."""


def lf_add(a: LinForm, b: LinForm, scale: Fraction = _ONE) -> LinForm:
    out = dict(a)
    for sym, q in b.items():
        s = out.get(sym, Fraction(0)) + q * scale
        if s:
            out[sym] = s
        else:
            out.pop(sym, None)
    return out


def lf_scale(a: LinForm, q: Fraction) -> LinForm:
    return {s: c * q for s, c in a.items()} if q else {}


def lf_deriv(a: LinForm) -> LinForm:
    """Formal derivative of a linear form: each symbol's order is bumped."""
    return {s.d(): c for s, c in a.items()}


def lf_normalize(a: LinForm) -> tuple[tuple[Sym, Fraction], ...]:
    """Canonical representative of the ray through ``a`` (for dedup)."""
    if not a:
        return ()
    items = sorted(a.items())
    lead = items[0][1]
    return tuple((s, c / lead) for s, c in items)


def lf_str(a: LinForm) -> str:
    if not a:
        return "0"
    parts = []
    for sym, q in sorted(a.items()):
        if q == 1:
            parts.append(sym.display())
        elif q == -1:
            parts.append(f"-{sym.display()}")
        else:
            parts.append(f"{q}*{sym.display()}")
    return " + ".join(parts).replace("+ -", "- ")


@dataclass
class Equation:
    """A linear equation ``form == 0`` with a provenance tag."""

    form: LinForm
    tag: object = None


@dataclass
class ConstraintSystem:
    """Homogeneous linear equations over function symbols."""

    equations: list[Equation] = field(default_factory=list)

    def add(self, form: LinForm, tag=None):
        if form:
            self.equations.append(Equation(form, tag))

    def filtered(self, predicate) -> "ConstraintSystem":
        return ConstraintSystem([e for e in self.equations if predicate(e.tag)])

    def symbols(self) -> set[Sym]:
        return {s for e in self.equations for s in e.form}

    def __len__(self) -> int:
        return len(self.equations)


@dataclass
class Solution:
    """Result of exact elimination plus derivative prolongation."""

    substitution: dict[Sym, LinForm]
    free_symbols: list[Sym]
    free_bases: list[str]
    max_order: int

    @property
    def dimension(self) -> int:
        return len(self.free_bases)

    def reduce(self, form: LinForm) -> LinForm:
        """Rewrite a linear form modulo the substitution."""
        out: LinForm = {}
        for sym, q in form.items():
            rep = self.substitution.get(sym)
            if rep is None:
                out = lf_add(out, {sym: q})
            else:
                out = lf_add(out, rep, q)
        return out


def _close_under_derivative(equations: list[Equation], max_order: int) -> list[LinForm]:
    """All formal derivatives of the equations with symbols of order <= max_order."""
    seen: set[tuple] = set()
    out: list[LinForm] = []
    for eq in equations:
        form = eq.form
        while form and max(s.deriv for s in form) <= max_order:
            key = lf_normalize(form)
            if key in seen:
                break
            seen.add(key)
            out.append(form)
            form = lf_deriv(form)
    return out


def _rref(rows: list[LinForm], columns: list[Sym]) -> dict[Sym, LinForm]:
    """Reduced row echelon form over Q.

    Returns pivot column -> normalized pivot row (pivot coefficient 1, no
    other pivot columns present).  The result is canonical for the row
    space and the given column order.
    """
    work = [dict(r) for r in rows if r]
    pivot_rows: dict[Sym, LinForm] = {}
    for col in columns:
        pivot = None
        for row in work:
            if row.get(col):
                pivot = row
                break
        if pivot is None:
            continue
        work.remove(pivot)
        lead = pivot[col]
        pivot = {s: c / lead for s, c in pivot.items()}
        for p, r in pivot_rows.items():
            q = r.get(col)
            if q:
                pivot_rows[p] = lf_add(r, pivot, -q)
        nxt = []
        for row in work:
            q = row.get(col)
            if q:
                row = lf_add(row, pivot, -q)
            if row:
                nxt.append(row)
        work = nxt
        pivot_rows[col] = pivot
    return pivot_rows


def solve(
    system: ConstraintSystem,
    column_key=None,
    known_symbols: list[Sym] | None = None,
) -> Solution:
    """Solve a homogeneous system exactly.

    ``column_key`` orders the columns (earlier columns are preferred as
    pivots); the default solves low derivative orders first so surviving
    free symbols are genuinely free functions.  ``known_symbols`` adds
    columns that must be accounted for even if no equation mentions them
    (they come out free).
    """
    if column_key is None:
        column_key = lambda s: (s.deriv, s.base)

    symbols = system.symbols() | set(known_symbols or ())
    if not symbols:
        return Solution({}, [], [], 0)
    max_order = max(s.deriv for s in symbols) + 1
    rows = _close_under_derivative(system.equations, max_order)
    all_syms = {s for row in rows for s in row} | set(known_symbols or ())
    columns = sorted(all_syms, key=column_key)
    pivot_rows = _rref(rows, columns)

    substitution = {
        col: {s: -c for s, c in row.items() if s != col}
        for col, row in pivot_rows.items()
    }
    free_symbols = [s for s in columns if s not in substitution]
    _validate_towers(substitution, free_symbols, max_order)

    free_base_names = sorted({s.base for s in free_symbols})
    for base in free_base_names:
        pivot_orders = {s.deriv for s in substitution if s.base == base}
        free_orders = {s.deriv for s in free_symbols if s.base == base}
        if pivot_orders and min(pivot_orders) >= min(free_orders):
            raise SolveBoundError(
                f"mixed derivative tower for {base}: free at order {min(free_orders)}, "
                f"constrained at order {min(pivot_orders)}"
            )
    return Solution(substitution, free_symbols, free_base_names, max_order)


def _validate_towers(substitution: dict[Sym, LinForm], free_symbols: list[Sym], max_order: int):
    """Check d/dx-consistency of the substitution map within the bound."""
    free = set(free_symbols)

    def reduce(form: LinForm) -> LinForm:
        out: LinForm = {}
        for sym, q in form.items():
            rep = substitution.get(sym)
            if rep is None:
                out = lf_add(out, {sym: q})
            else:
                out = lf_add(out, rep, q)
        return out

    for sym, rhs in substitution.items():
        nxt = sym.d()
        if nxt.deriv > max_order or (nxt not in substitution and nxt not in free):
            continue
        want = lf_deriv(rhs)
        if any(s.deriv > max_order for s in want):
            continue  # cannot be compared within the bound
        if reduce(want) != reduce({nxt: _ONE}):
            raise SolveBoundError(
                f"derivative tower of {sym.base} inconsistent at order {sym.deriv}"
            )


@dataclass
class MatchResult:
    """Outcome of matching a solution family against a parametric family."""

    solvable: bool
    witness: dict[Sym, LinForm]
    obstructions: list[LinForm]


def match(
    system_rows: list[tuple[LinForm, object]],
    unknown_bases: set[str],
    column_key=None,
) -> MatchResult:
    """Solve ``L(unknowns) = R(parameters)`` for the unknowns.

    Rows mix unknown-base symbols and parameter symbols in one linear form
    (parameters carried with their signs).  The system is solvable for
    *every* value of the parameters iff elimination leaves no
    parameter-only rows; any such rows are returned as obstructions.
    """
    sys = ConstraintSystem()
    for form, tag in system_rows:
        sys.add(form, tag)
    if column_key is None:
        column_key = lambda s: (s.deriv, s.base)

    symbols = sys.symbols()
    if not symbols:
        return MatchResult(True, {}, [])
    max_order = max(s.deriv for s in symbols) + 1
    rows = _close_under_derivative(sys.equations, max_order)
    all_syms = {s for row in rows for s in row}
    unknown_cols = sorted((s for s in all_syms if s.base in unknown_bases), key=column_key)
    param_cols = sorted((s for s in all_syms if s.base not in unknown_bases), key=column_key)
    pivot_rows = _rref(rows, unknown_cols + param_cols)

    witness: dict[Sym, LinForm] = {}
    obstructions: list[LinForm] = []
    for col, row in pivot_rows.items():
        if col.base in unknown_bases:
            witness[col] = {s: -c for s, c in row.items() if s != col}
        else:
            obstructions.append(row)

    # free unknown directions are fixed to zero; that is only consistent when
    # their whole derivative tower is free, so mixed towers abort loudly
    free_unknowns = [s for s in unknown_cols if s not in witness]
    pivot_bases = {s.base for s in witness}
    for sym in free_unknowns:
        if sym.base in pivot_bases:
            raise SolveBoundError(f"mixed derivative tower for {sym.base} in match system")
    free_bases = {s.base for s in free_unknowns}
    for sym in list(witness):
        witness[sym] = {s: c for s, c in witness[sym].items() if s.base not in free_bases}
    for sym in free_unknowns:
        witness[sym] = {}
    return MatchResult(not obstructions, witness, obstructions)
