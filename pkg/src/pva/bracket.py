"""Lambda-brackets on differential polynomial algebras.

A lambda-polynomial is a finite sum  sum_K  lambda^K (x) p_K  with p_K
differential polynomials.  To support identities mixing two formal
alphabets (lambda and mu) the key is a tuple of multi-indices, one per
alphabet; ordinary brackets use a single alphabet.

A bracket table stores the bracket of every ordered generator pair.  The
bracket of arbitrary differential polynomials is produced by the master
formula

    {f_l g} = sum (dg/du^j_M) (l+d)^M {u^i_{l+d} u^j} (-l-d)^L (df/du^i_L)

read right to left: the (-l-d)^L factor acts on df/du^i_L alone, each
bracket-entry operator (l+d)^S acts on everything to its right, and the
(l+d)^M factor acts on everything to its right including the entry
coefficients.  The shift operators expand binomially; the derivation part
never touches the formal alphabet symbols.

All six PVA axioms have executable checks; the sesquilinearity and Leibniz
properties are theorems of the master formula, so their checks guard the
implementation on seeded random samples rather than the mathematics.
"""

from __future__ import annotations

from random import Random

from pva.diffalg import (
    Alg,
    AlgebraError,
    DiffPoly,
    Index,
    idx_add,
    idx_binom,
    idx_iter_le,
    idx_key,
    idx_sub,
    idx_total,
    idx_unit,
    idx_zero,
    random_poly,
)

LKey = tuple[Index, ...]


class LambdaPoly:
    """Polynomial in one or more formal alphabets with DiffPoly coefficients."""

    __slots__ = ("alg", "n_alph", "terms")

    def __init__(self, alg: Alg, n_alph: int = 1, terms: dict[LKey, DiffPoly] | None = None):
        self.alg = alg
        self.n_alph = n_alph
        self.terms: dict[LKey, DiffPoly] = {}
        if terms:
            for key, p in terms.items():
                if not p.is_zero:
                    self.terms[key] = p

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, alg: Alg, n_alph: int = 1) -> "LambdaPoly":
        return cls(alg, n_alph)

    @classmethod
    def from_diff(cls, p: DiffPoly, n_alph: int = 1) -> "LambdaPoly":
        key = tuple(idx_zero(p.alg.D) for _ in range(n_alph))
        return cls(p.alg, n_alph, {key: p})

    def zero_key(self) -> LKey:
        return tuple(idx_zero(self.alg.D) for _ in range(self.n_alph))

    # -- linear structure ----------------------------------------------
    def _check(self, other: "LambdaPoly"):
        if self.alg != other.alg or self.n_alph != other.n_alph:
            raise AlgebraError("lambda-polynomials are not compatible")

    def __add__(self, other: "LambdaPoly") -> "LambdaPoly":
        self._check(other)
        out = dict(self.terms)
        for key, p in other.terms.items():
            s = out.get(key)
            s = p if s is None else s + p
            if s.is_zero:
                out.pop(key, None)
            else:
                out[key] = s
        return LambdaPoly(self.alg, self.n_alph, out)

    def __sub__(self, other: "LambdaPoly") -> "LambdaPoly":
        return self + (-other)

    def __neg__(self) -> "LambdaPoly":
        return LambdaPoly(self.alg, self.n_alph, {k: -p for k, p in self.terms.items()})

    def mul_diff(self, p: DiffPoly) -> "LambdaPoly":
        """Left multiplication by a differential polynomial."""
        out = {}
        for key, q in self.terms.items():
            s = p * q
            if not s.is_zero:
                out[key] = s
        return LambdaPoly(self.alg, self.n_alph, out)

    def scale(self, q) -> "LambdaPoly":
        return LambdaPoly(self.alg, self.n_alph, {k: p.coef_mul(q) for k, p in self.terms.items()})

    def key_shift(self, alph: int, index: Index) -> "LambdaPoly":
        """Multiply by alphabet^index."""
        out = {}
        for key, p in self.terms.items():
            new = list(key)
            new[alph] = idx_add(new[alph], index)
            out[tuple(new)] = p
        return LambdaPoly(self.alg, self.n_alph, out)

    def total_derivative(self, d: int) -> "LambdaPoly":
        out = LambdaPoly(self.alg, self.n_alph)
        for key, p in self.terms.items():
            out = out + LambdaPoly(self.alg, self.n_alph, {key: p.total_derivative(d)})
        return out

    # -- structure ------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    def at_zero(self) -> DiffPoly:
        """Evaluate all alphabets at zero."""
        return self.terms.get(self.zero_key(), DiffPoly.zero(self.alg))

    def map_values(self, fn) -> "LambdaPoly":
        out = {}
        for key, p in self.terms.items():
            s = fn(p)
            if not s.is_zero:
                out[key] = s
        return LambdaPoly(self.alg, self.n_alph, out)

    def substitute_symbols(self, mapping) -> "LambdaPoly":
        return self.map_values(lambda p: p.substitute_symbols(mapping))

    def term_degrees(self) -> set[int]:
        degs = set()
        for key, p in self.terms.items():
            shift = sum(idx_total(k) for k in key)
            degs |= {shift + d for d in p.term_degrees()}
        return degs

    def homogeneous_degree(self) -> int | None:
        degs = self.term_degrees()
        return degs.pop() if len(degs) == 1 else None

    def widen(self, n_alph: int, positions: tuple[int, ...]) -> "LambdaPoly":
        """Embed into more alphabets: old alphabet i becomes ``positions[i]``."""
        zero = idx_zero(self.alg.D)
        out = {}
        for key, p in self.terms.items():
            new = [zero] * n_alph
            for i, idx in enumerate(key):
                new[positions[i]] = idx
            out[tuple(new)] = p
        return LambdaPoly(self.alg, n_alph, out)

    def sorted_terms(self) -> list[tuple[LKey, DiffPoly]]:
        return sorted(self.terms.items(), key=lambda kv: tuple(idx_key(i) for i in kv[0]))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LambdaPoly)
            and self.alg == other.alg
            and self.n_alph == other.n_alph
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.alg, self.n_alph, frozenset((k, hash(p)) for k, p in self.terms.items())))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = "lm"
        parts = []
        for key, p in self.sorted_terms():
            lam = "*".join(
                f"{names[a]}{d + 1}" + (f"^{k}" if k > 1 else "")
                for a, idx in enumerate(key)
                for d, k in enumerate(idx)
                if k
            )
            ps = str(p)
            if not lam:
                parts.append(ps)
            elif ps == "1":
                parts.append(lam)
            else:
                parts.append((f"({ps})" if " " in ps else ps) + "*" + lam)
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


# ---------------------------------------------------------------------------
# shift operators


def apply_shift_once(x: LambdaPoly, d: int, alphas: tuple[int, ...], sign: int) -> LambdaPoly:
    """Apply sign*(sum of alphabet symbols in direction d + derivation d)."""
    out = x.total_derivative(d)
    for a in alphas:
        out = out + x.key_shift(a, idx_unit(x.alg.D, d))
    return out if sign > 0 else -out

def apply_shift(x: LambdaPoly, M: Index, alphas: tuple[int, ...], sign: int) -> LambdaPoly:
    """Apply the operator (sign*(alphabets + derivation))^M to ``x``.

    The factors commute, so the powers are applied one direction at a time.
    """
    out = x
    for d, power in enumerate(M):
        for _ in range(power):
            out = apply_shift_once(out, d, alphas, sign)
    return out


def expand_alphabet_sum(p: LambdaPoly) -> LambdaPoly:
    """Substitute the single alphabet by the sum of two: l^S -> (l+m)^S.

    This is a polynomial substitution (the binomial expansion); no
    derivations are involved, those were distributed when ``p`` was built.
    """
    if p.n_alph != 1:
        raise AlgebraError("alphabet-sum expansion expects a single alphabet")
    out = LambdaPoly.zero(p.alg, 2)
    for (S,), q in p.terms.items():
        for J in idx_iter_le(S):
            c = idx_binom(S, J)
            out = out + LambdaPoly(p.alg, 2, {(J, idx_sub(S, J)): q.coef_mul(c)})
    return out


def lambda_shift_apply(p: LambdaPoly, target: DiffPoly, sign: int = 1) -> LambdaPoly:
    """Compute sum_I B_I (s*l + s*d)^I target for p = sum_I B_I l^I.

    The operators act on ``target`` only; the coefficients B_I multiply the
    result from the left.  This is the reading rule for composite left
    arguments and, with sign -1, the adjoint insertion.
    """
    if p.n_alph != 1:
        raise AlgebraError("shift application expects a single alphabet")
    out = LambdaPoly.zero(p.alg)
    base = LambdaPoly.from_diff(target)
    for (key,), coeff in p.terms.items():
        out = out + apply_shift(base, key, (0,), sign).mul_diff(coeff)
    return out


def skew_adjoint(p: LambdaPoly) -> LambdaPoly:
    """The formal adjoint  sum_I B_I l^I  ->  -sum_I (-l-d)^I B_I.

    A scalar bracket entry is skewsymmetric exactly when it is a fixed
    point; for several generators the entry (i,j) must map to entry (j,i).
    """
    if p.n_alph != 1:
        raise AlgebraError("skew adjoint expects a single alphabet")
    out = LambdaPoly.zero(p.alg)
    for (key,), coeff in p.terms.items():
        out = out + apply_shift(LambdaPoly.from_diff(coeff), key, (0,), -1)
    return -out


# ---------------------------------------------------------------------------
# bracket tables and the master formula


class BracketTable:
    """The lambda-bracket of every ordered generator pair."""

    def __init__(self, alg: Alg, entries: dict[tuple[int, int], LambdaPoly]):
        self.alg = alg
        self.entries: dict[tuple[int, int], LambdaPoly] = {}
        for (i, j), p in entries.items():
            if p.alg != alg or p.n_alph != 1:
                raise AlgebraError("bracket entries must be single-alphabet over the table's algebra")
            if not p.is_zero:
                self.entries[(i, j)] = p

    def entry(self, i: int, j: int) -> LambdaPoly:
        return self.entries.get((i, j), LambdaPoly.zero(self.alg))

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def homogeneous_degree(self) -> int | None:
        degs = set()
        for p in self.entries.values():
            degs |= p.term_degrees()
        return degs.pop() if len(degs) == 1 else None

    def map_entries(self, fn) -> "BracketTable":
        return BracketTable(self.alg, {ij: fn(p) for ij, p in self.entries.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BracketTable)
            and self.alg == other.alg
            and all(self.entry(i, j) == other.entry(i, j)
                    for i in range(self.alg.N) for j in range(self.alg.N))
        )


def master_formula(f: DiffPoly, g: DiffPoly, table: BracketTable) -> LambdaPoly:
    """Bracket of two differential polynomials via the generator table."""
    alg = table.alg
    if f.alg != alg or g.alg != alg:
        raise AlgebraError("arguments live over a different algebra than the table")
    out = LambdaPoly.zero(alg)
    g_partials = {j: g.partials(j) for j in range(alg.N)}
    for i in range(alg.N):
        for L, df in f.partials(i):
            x1 = apply_shift(LambdaPoly.from_diff(df), L, (0,), -1)
            for j in range(alg.N):
                entry = table.entry(i, j)
                if entry.is_zero:
                    continue
                x2 = LambdaPoly.zero(alg)
                for (S,), coeff in entry.terms.items():
                    x2 = x2 + apply_shift(x1, S, (0,), 1).mul_diff(coeff)
                for M, dg in g_partials[j]:
                    out = out + apply_shift(x2, M, (0,), 1).mul_diff(dg)
    return out


def hamiltonian_flow(h: DiffPoly, table: BracketTable) -> list[DiffPoly]:
    """Evolution right-hand side {h_l u^k} at l = 0 for every generator.

    ``h`` is treated as a density; no integration by parts is performed
    (evaluating at l = 0 absorbs it).
    """
    return [master_formula(h, DiffPoly.gen(table.alg, k), table).at_zero() for k in range(table.alg.N)]


# ---------------------------------------------------------------------------
# axiom checks


def _default_samples(alg: Alg, count: int = 6, seed: int = 20250) -> list[DiffPoly]:
    rng = Random(seed)
    samples = [DiffPoly.gen(alg, k) for k in range(alg.N)]
    while len(samples) < count + alg.N:
        p = random_poly(alg, rng, max_terms=2, max_degree=3, allow_symbols=alg.N == 1)
        if not p.is_zero:
            samples.append(p)
    return samples


def check_sesquilinearity(table: BracketTable, samples: list[DiffPoly] | None = None) -> list[str]:
    """Verify {d_i f_l g} = -l_i {f_l g} and {f_l d_i g} = (d_i + l_i){f_l g}."""
    alg = table.alg
    samples = samples if samples is not None else _default_samples(alg)
    failures = []
    for f in samples:
        for g in samples:
            base = master_formula(f, g, table)
            for d in range(alg.D):
                lhs1 = master_formula(f.total_derivative(d), g, table)
                rhs1 = -base.key_shift(0, idx_unit(alg.D, d))
                if lhs1 != rhs1:
                    failures.append(f"sesquilinearity-1 fails in direction {d + 1} for f={f}, g={g}")
                lhs2 = master_formula(f, g.total_derivative(d), table)
                rhs2 = base.total_derivative(d) + base.key_shift(0, idx_unit(alg.D, d))
                if lhs2 != rhs2:
                    failures.append(f"sesquilinearity-2 fails in direction {d + 1} for f={f}, g={g}")
    return failures


def check_leibniz(table: BracketTable, samples: list[DiffPoly] | None = None) -> list[str]:
    """Verify {f_l gh} = {f_l g}h + {f_l h}g and the composite left rule."""
    alg = table.alg
    samples = samples if samples is not None else _default_samples(alg)
    failures = []
    n = len(samples)
    triples = [(samples[a], samples[b], samples[(a + b) % n]) for a in range(n) for b in range(n)]
    for f, g, h in triples:
        right = master_formula(f, g * h, table)
        expand = master_formula(f, g, table).mul_diff(h) + master_formula(f, h, table).mul_diff(g)
        if right != expand:
            failures.append(f"left-leibniz fails for f={f}, g={g}, h={h}")
        left = master_formula(f * g, h, table)
        expand = lambda_shift_apply(master_formula(f, h, table), g) + lambda_shift_apply(
            master_formula(g, h, table), f
        )
        if left != expand:
            failures.append(f"right-leibniz fails for f={f}, g={g}, h={h}")
    return failures


def check_skewsymmetry(table: BracketTable) -> list[str]:
    failures = []
    for i in range(table.alg.N):
        for j in range(table.alg.N):
            if skew_adjoint(table.entry(i, j)) != table.entry(j, i):
                gi, gj = table.alg.gens[i], table.alg.gens[j]
                failures.append(f"skewsymmetry fails on entry ({gi},{gj})")
    return failures


def jacobi_mixed(outer: BracketTable, inner: BracketTable) -> dict[tuple[int, int, int], LambdaPoly]:
    """Jacobi-type defect with the inner bracket taken from a second table:

      {a_l {b_m c}'} - {b_m {a_l c}'} - {{a_l b}'_{l+m} c}

    with ' the inner table and the unprimed brackets the outer one.  The
    result lives in two alphabets (l at slot 0, m at slot 1).  For
    ``outer is inner`` this is the PVA-Jacobi defect.
    """
    alg = outer.alg
    if inner.alg != alg:
        raise AlgebraError("tables live over different algebras")
    out: dict[tuple[int, int, int], LambdaPoly] = {}
    gens = [DiffPoly.gen(alg, k) for k in range(alg.N)]
    for a in range(alg.N):
        for b in range(alg.N):
            for c in range(alg.N):
                defect = LambdaPoly.zero(alg, 2)
                # {a_l {b_m c}'}: inner keys ride along in the m alphabet
                for (K,), q in inner.entry(b, c).terms.items():
                    t = master_formula(gens[a], q, outer).widen(2, (0,))
                    defect = defect + t.key_shift(1, K)
                # {b_m {a_l c}'}: inner keys ride along in the l alphabet
                for (K,), q in inner.entry(a, c).terms.items():
                    t = master_formula(gens[b], q, outer).widen(2, (1,))
                    defect = defect - t.key_shift(0, K)
                # {{a_l b}'_{l+m} c}: bracket parameter becomes the alphabet
                # sum by pure substitution (the inner key rides along in l)
                for (K,), q in inner.entry(a, b).terms.items():
                    t = expand_alphabet_sum(master_formula(q, gens[c], outer))
                    defect = defect - t.key_shift(0, K)
                out[(a, b, c)] = defect
    return out


def check_jacobi(table: BracketTable) -> dict[tuple[int, int, int], LambdaPoly]:
    """PVA-Jacobi defects per generator triple; the bracket is Poisson iff
    every defect is zero."""
    return jacobi_mixed(table, table)


def jacobi_is_zero(defects: dict[tuple[int, int, int], LambdaPoly]) -> bool:
    return all(p.is_zero for p in defects.values())
