"""Exact arithmetic for differential polynomials in jet variables.

Representation
--------------
Fix ``D`` independent variables x^1..x^D and ``N`` generators u^0..u^{N-1}.
A *jet variable* is a pair ``(generator, index)`` where ``index`` is a
multi-index (a D-tuple of non-negative integers) recording how often each
derivation has been applied; ``(k, (0,...,0))`` is the undifferentiated
generator itself.  A differential polynomial is a finite sum of terms

    coefficient * jet-monomial

where the jet monomial is a multiset of jet variables (stored as a sorted
tuple) and the coefficient lives in the ring Q[function symbols].

Function symbols (:class:`Sym`) are opaque scalar functions of generator 0
with a formal derivative order: ``A``, ``A'``, ``A''``...  No closed forms
are ever attached to them; the total derivative applies the chain rule
``A -> A' * u_{e_d}`` and nothing else.

Everything is exact: scalars are ``fractions.Fraction``, never floats.
Values are canonical on construction (zero terms pruned, keys sorted), so
``==`` is structural equality and all results are deterministic.  Instances
are treated as immutable; every operation returns a new value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random

Index = tuple[int, ...]
JetVar = tuple[int, Index]  # (generator id, multi-index)

# Formal constant used for nilpotent first-order bookkeeping (it is *not* a
# function of the generator: its chain-rule derivative is zero).
EPS_BASE = "__eps__"


class AlgebraError(ValueError):
    """Raised on dimension or generator-set mismatches."""


# ---------------------------------------------------------------------------
# multi-indices


def idx_zero(D: int) -> Index:
    return (0,) * D


def idx_unit(D: int, d: int) -> Index:
    """Unit multi-index e_d (directions are 0-based here)."""
    return tuple(1 if k == d else 0 for k in range(D))


def idx_add(a: Index, b: Index) -> Index:
    return tuple(x + y for x, y in zip(a, b))


def idx_sub(a: Index, b: Index) -> Index:
    out = tuple(x - y for x, y in zip(a, b))
    if any(x < 0 for x in out):
        raise AlgebraError(f"multi-index subtraction {a} - {b} is negative")
    return out


def idx_total(a: Index) -> int:
    return sum(a)


def idx_le(a: Index, b: Index) -> bool:
    return all(x <= y for x, y in zip(a, b))


def idx_key(a: Index) -> tuple:
    """Graded-lexicographic sort key."""
    return (sum(a), a)


def idx_iter_le(bound: Index):
    """All multi-indices componentwise <= bound, in graded-lex order."""
    def rec(pos: int, cur: tuple):
        if pos == len(bound):
            yield cur
            return
        for v in range(bound[pos] + 1):
            yield from rec(pos + 1, cur + (v,))

    return sorted(rec(0, ()), key=idx_key)


def idx_binom(a: Index, b: Index) -> int:
    """Product of componentwise binomial coefficients C(a_k, b_k)."""
    out = 1
    for x, y in zip(a, b):
        out *= _binom(x, y)
    return out


def _binom(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


# ---------------------------------------------------------------------------
# function symbols and coefficients


@dataclass(frozen=True, order=True)
class Sym:
    """A formal function of generator 0 with a formal derivative order."""

    base: str
    deriv: int = 0

    def d(self, k: int = 1) -> "Sym":
        return Sym(self.base, self.deriv + k)

    @property
    def is_eps(self) -> bool:
        return self.base == EPS_BASE

    def display(self) -> str:
        return self.base + "'" * self.deriv

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.display()


Monomial = tuple[Sym, ...]  # sorted multiset of symbols; () is the unit

_ZERO = Fraction(0)


def _q(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


class Coefficient:
    """Polynomial in function symbols with exact rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Monomial, Fraction] | None = None):
        self.terms: dict[Monomial, Fraction] = {}
        if terms:
            for mono, q in terms.items():
                if q:
                    self.terms[mono] = q

    # -- constructors -------------------------------------------------
    @classmethod
    def rational(cls, value) -> "Coefficient":
        q = _q(value)
        return cls({(): q} if q else {})

    @classmethod
    def symbol(cls, base: str, deriv: int = 0) -> "Coefficient":
        return cls({(Sym(base, deriv),): Fraction(1)})

    @classmethod
    def of(cls, sym: Sym) -> "Coefficient":
        return cls({(sym,): Fraction(1)})

    ZERO: "Coefficient"
    ONE: "Coefficient"

    # -- ring operations ----------------------------------------------
    def __add__(self, other: "Coefficient") -> "Coefficient":
        out = dict(self.terms)
        for mono, q in other.terms.items():
            s = out.get(mono, _ZERO) + q
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return Coefficient(out)

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        return self + (-other)

    def __neg__(self) -> "Coefficient":
        return Coefficient({m: -q for m, q in self.terms.items()})

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        out: dict[Monomial, Fraction] = {}
        for ma, qa in self.terms.items():
            for mb, qb in other.terms.items():
                mono = tuple(sorted(ma + mb))
                s = out.get(mono, _ZERO) + qa * qb
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        return Coefficient(out)

    def scale(self, q) -> "Coefficient":
        q = _q(q)
        if not q:
            return Coefficient()
        return Coefficient({m: c * q for m, c in self.terms.items()})

    # -- structure ------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def rational_value(self) -> Fraction:
        """The value of a constant coefficient (raises otherwise)."""
        if not self.terms:
            return _ZERO
        if set(self.terms) != {()}:
            raise AlgebraError("coefficient is not a rational constant")
        return self.terms[()]

    def symbols(self) -> set[Sym]:
        return {s for mono in self.terms for s in mono}

    def deriv(self) -> "Coefficient":
        """Formal derivative with respect to the generator (Leibniz on
        monomials, ``A -> A'``; the nilpotent constant is killed)."""
        out = Coefficient()
        for mono, q in self.terms.items():
            for k, sym in enumerate(mono):
                if sym.is_eps:
                    continue
                bumped = tuple(sorted(mono[:k] + (sym.d(),) + mono[k + 1:]))
                out = out + Coefficient({bumped: q})
        return out

    def substitute(self, mapping: dict[Sym, "Coefficient"]) -> "Coefficient":
        """Replace symbols by coefficient polynomials, expanding products."""
        out = Coefficient()
        for mono, q in self.terms.items():
            term = Coefficient.rational(q)
            for sym in mono:
                rep = mapping.get(sym)
                term = term * (rep if rep is not None else Coefficient.of(sym))
            out = out + term
        return out

    def linear_form(self) -> dict[Sym, Fraction]:
        """View a homogeneous-linear coefficient as {symbol: rational}."""
        out: dict[Sym, Fraction] = {}
        for mono, q in self.terms.items():
            if len(mono) != 1:
                raise AlgebraError(f"coefficient is not linear: {self}")
            out[mono[0]] = q
        return out

    def eps_split(self) -> dict[int, "Coefficient"]:
        """Split by the power of the nilpotent constant (which is removed)."""
        out: dict[int, Coefficient] = {}
        for mono, q in self.terms.items():
            power = sum(1 for s in mono if s.is_eps)
            rest = tuple(s for s in mono if not s.is_eps)
            bucket = out.setdefault(power, Coefficient())
            bucket.terms[rest] = bucket.terms.get(rest, _ZERO) + q
        return {p: Coefficient(c.terms) for p, c in out.items() if not Coefficient(c.terms).is_zero}

    # -- comparison / display -------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, Coefficient) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        return sorted(self.terms.items())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, q in self.sorted_terms():
            syms = "*".join(s.display() for s in mono)
            if not syms:
                parts.append(str(q))
            elif q == 1:
                parts.append(syms)
            elif q == -1:
                parts.append(f"-{syms}")
            else:
                parts.append(f"{q}*{syms}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


Coefficient.ZERO = Coefficient()
Coefficient.ONE = Coefficient.rational(1)


# ---------------------------------------------------------------------------
# the differential polynomial algebra


@dataclass(frozen=True)
class Alg:
    """Algebra context: number of independent variables and generator names."""

    D: int
    gens: tuple[str, ...]

    def __post_init__(self):
        if self.D < 1:
            raise AlgebraError("need at least one independent variable")
        if not self.gens:
            raise AlgebraError("need at least one generator")

    @property
    def N(self) -> int:
        return len(self.gens)

    def zero_index(self) -> Index:
        return idx_zero(self.D)

    def jet_name(self, v: JetVar) -> str:
        gen, idx = v
        name = self.gens[gen]
        if not any(idx):
            return name
        return f"{name}_[{','.join(str(i) for i in idx)}]"


JetMonomial = tuple[JetVar, ...]  # sorted multiset


def _jet_key(v: JetVar) -> tuple:
    return (v[0], idx_key(v[1]))


def _mono_sorted(mono) -> JetMonomial:
    return tuple(sorted(mono, key=_jet_key))


class DiffPoly:
    """A differential polynomial over a fixed algebra context."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Alg, terms: dict[JetMonomial, Coefficient] | None = None):
        self.alg = alg
        self.terms: dict[JetMonomial, Coefficient] = {}
        if terms:
            for mono, c in terms.items():
                if not c.is_zero:
                    self.terms[mono] = c

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, alg: Alg) -> "DiffPoly":
        return cls(alg)

    @classmethod
    def const(cls, alg: Alg, value) -> "DiffPoly":
        c = value if isinstance(value, Coefficient) else Coefficient.rational(value)
        return cls(alg, {(): c})

    @classmethod
    def gen(cls, alg: Alg, k: int = 0) -> "DiffPoly":
        return cls.jet(alg, k, idx_zero(alg.D))

    @classmethod
    def jet(cls, alg: Alg, k: int, index: Index) -> "DiffPoly":
        if not (0 <= k < alg.N):
            raise AlgebraError(f"no generator {k}")
        if len(index) != alg.D:
            raise AlgebraError(f"index {index} has wrong dimension for D={alg.D}")
        return cls(alg, {((k, tuple(index)),): Coefficient.ONE})

    # -- ring operations ----------------------------------------------
    def _check(self, other: "DiffPoly"):
        if self.alg != other.alg:
            raise AlgebraError("operands live over different algebras")

    def __add__(self, other: "DiffPoly") -> "DiffPoly":
        self._check(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            s = out.get(mono)
            s = c if s is None else s + c
            if s.is_zero:
                out.pop(mono, None)
            else:
                out[mono] = s
        return DiffPoly(self.alg, out)

    def __sub__(self, other: "DiffPoly") -> "DiffPoly":
        return self + (-other)

    def __neg__(self) -> "DiffPoly":
        return DiffPoly(self.alg, {m: -c for m, c in self.terms.items()})

    def __mul__(self, other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            self._check(other)
            out: dict[JetMonomial, Coefficient] = {}
            for ma, ca in self.terms.items():
                for mb, cb in other.terms.items():
                    mono = _mono_sorted(ma + mb)
                    c = ca * cb
                    s = out.get(mono)
                    s = c if s is None else s + c
                    if s.is_zero:
                        out.pop(mono, None)
                    else:
                        out[mono] = s
            return DiffPoly(self.alg, out)
        return self.coef_mul(other)

    __rmul__ = __mul__

    def coef_mul(self, c) -> "DiffPoly":
        if not isinstance(c, Coefficient):
            c = Coefficient.rational(c)
        if c.is_zero:
            return DiffPoly(self.alg)
        out = {}
        for mono, cc in self.terms.items():
            s = cc * c
            if not s.is_zero:
                out[mono] = s
        return DiffPoly(self.alg, out)

    # -- calculus -------------------------------------------------------
    def total_derivative(self, d: int) -> "DiffPoly":
        """The commuting derivation in direction ``d`` (0-based): Leibniz on
        jet factors plus the chain rule on function symbols."""
        if not (0 <= d < self.alg.D):
            raise AlgebraError(f"no direction {d}")
        e = idx_unit(self.alg.D, d)
        out = DiffPoly(self.alg)
        for mono, c in self.terms.items():
            for k, (g, idx) in enumerate(mono):
                raised = _mono_sorted(mono[:k] + ((g, idx_add(idx, e)),) + mono[k + 1:])
                out = out + DiffPoly(self.alg, {raised: c})
            dc = c.deriv()
            if not dc.is_zero:
                chained = _mono_sorted(mono + ((0, e),))
                out = out + DiffPoly(self.alg, {chained: dc})
        return out

    def partial_jet(self, v: JetVar) -> "DiffPoly":
        """Formal partial derivative with respect to one jet variable.  For
        the order-0 jet of generator 0 this also differentiates the function
        symbols in the coefficients."""
        g, idx = v
        v = (g, tuple(idx))
        is_gen0 = g == 0 and not any(idx)
        out = DiffPoly(self.alg)
        for mono, c in self.terms.items():
            count = sum(1 for jv in mono if jv == v)
            if count:
                pos = mono.index(v)
                reduced = mono[:pos] + mono[pos + 1:]
                out = out + DiffPoly(self.alg, {reduced: c.scale(count)})
            if is_gen0:
                dc = c.deriv()
                if not dc.is_zero:
                    out = out + DiffPoly(self.alg, {mono: dc})
        return out

    def partials(self, gen: int) -> list[tuple[Index, "DiffPoly"]]:
        """All nonzero partial derivatives with respect to jets of ``gen``,
        including the order-0 jet when function symbols are present."""
        indices = {idx for mono in self.terms for (g, idx) in mono if g == gen}
        if gen == 0 and any(c.symbols() for c in self.terms.values()):
            indices.add(idx_zero(self.alg.D))
        out = []
        for idx in sorted(indices, key=idx_key):
            dp = self.partial_jet((gen, idx))
            if not dp.is_zero:
                out.append((idx, dp))
        return out

    # -- structure ------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def jet_vars(self) -> list[JetVar]:
        return sorted({v for mono in self.terms for v in mono}, key=_jet_key)

    def symbols(self) -> set[Sym]:
        return {s for c in self.terms.values() for s in c.symbols()}

    def term_degrees(self) -> set[int]:
        return {sum(idx_total(idx) for (_, idx) in mono) for mono in self.terms}

    def homogeneous_degree(self) -> int | None:
        """Common jet degree, or None if inhomogeneous/zero."""
        degs = self.term_degrees()
        return degs.pop() if len(degs) == 1 else None

    def map_coefficients(self, fn) -> "DiffPoly":
        out = {}
        for mono, c in self.terms.items():
            s = fn(c)
            if not s.is_zero:
                out[mono] = s
        return DiffPoly(self.alg, out)

    def substitute_symbols(self, mapping: dict[Sym, Coefficient]) -> "DiffPoly":
        return self.map_coefficients(lambda c: c.substitute(mapping))

    def eps_component(self, power: int) -> "DiffPoly":
        out = DiffPoly(self.alg)
        for mono, c in self.terms.items():
            part = c.eps_split().get(power)
            if part is not None:
                out = out + DiffPoly(self.alg, {mono: part})
        return out

    # -- comparison / display -------------------------------------------
    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DiffPoly)
            and self.alg == other.alg
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.alg, frozenset((m, hash(c)) for m, c in self.terms.items())))

    def sorted_terms(self) -> list[tuple[JetMonomial, Coefficient]]:
        return sorted(self.terms.items(), key=lambda kv: [_jet_key(v) for v in kv[0]])

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            jets = "*".join(self.alg.jet_name(v) for v in mono)
            cs = str(c)
            if not jets:
                parts.append(f"({cs})" if " " in cs else cs)
            elif cs == "1":
                parts.append(jets)
            elif cs == "-1":
                parts.append(f"-{jets}")
            else:
                parts.append((f"({cs})" if " " in cs or "*" in cs else cs) + "*" + jets)
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


# ---------------------------------------------------------------------------
# degree with explicit markers

DEGREE_ZERO = "zero"
DEGREE_MIXED = "inhomogeneous"


def degree_of(p: DiffPoly):
    """Total jet degree of a homogeneous polynomial, or a marker."""
    if p.is_zero:
        return DEGREE_ZERO
    deg = p.homogeneous_degree()
    return DEGREE_MIXED if deg is None else deg


# ---------------------------------------------------------------------------
# seeded random samples (bounds documented; used by the axiom checks and the
# property suites: at most `max_terms` terms, total degree <= `max_degree`)


def random_poly(
    alg: Alg,
    rng: Random,
    max_terms: int = 3,
    max_degree: int = 4,
    allow_symbols: bool = False,
) -> DiffPoly:
    rationals = [Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2), Fraction(-1, 3), Fraction(3)]
    out = DiffPoly.zero(alg)
    for _ in range(rng.randint(1, max_terms)):
        budget = rng.randint(0, max_degree)
        mono: list[JetVar] = []
        for _ in range(rng.randint(0, 3)):
            order = rng.randint(0, min(2, budget))
            idx = [0] * alg.D
            for _ in range(order):
                idx[rng.randrange(alg.D)] += 1
            budget -= order
            mono.append((rng.randrange(alg.N), tuple(idx)))
        coeff = Coefficient.rational(rng.choice(rationals))
        if allow_symbols and rng.random() < 0.3:
            coeff = coeff * Coefficient.symbol("h", rng.randint(0, 1))
        out = out + DiffPoly(alg, {_mono_sorted(mono): coeff})
    return out
