"""A small definition language for bracket tables, with a pretty-printer.

Grammar (whitespace-insensitive, ``#`` starts a line comment, statements
end with ``;``)::

    D = 2;
    gens = w;                      # or: gens = p1, p2;
    bracket(w, w) = w_[1,0]*l2 - w_[0,1]*l1;

Expressions use rational literals (``3``, ``1/2``), generator names, jet
variables ``name_[i1,...,iD]``, alphabet symbols ``l1`` .. ``lD``, the
operators ``+ - * ^`` and parentheses.  Undeclared bracket entries are
zero.  The pretty-printer emits the canonical form of a table in the same
grammar; parse -> print -> parse is the identity on canonical forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from pva.diffalg import Alg, DiffPoly, Index, idx_key, idx_total
from pva.bracket import BracketTable, LambdaPoly


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


@dataclass
class _Token:
    kind: str  # INT, IDENT, or a literal symbol
    value: str
    line: int
    col: int


_SYMBOLS = set("+-*^()=;,[]/_")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            while i < len(text) and text[i].isdigit():
                i += 1
            tokens.append(_Token("INT", text[start:i], line, col))
            col += i - start
            continue
        if ch.isalpha():
            start = i
            while i < len(text) and (text[i].isalnum()):
                i += 1
            tokens.append(_Token("IDENT", text[start:i], line, col))
            col += i - start
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.D: int | None = None
        self.gens: tuple[str, ...] | None = None
        self.alg: Alg | None = None
        self.entries: dict[tuple[int, int], LambdaPoly] = {}

    # -- token helpers --------------------------------------------------
    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.value!r}", tok.line, tok.col)
        return tok

    def error(self, msg: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    # -- statements ------------------------------------------------------
    def parse(self) -> BracketTable:
        while self.peek().kind != "EOF":
            tok = self.expect("IDENT")
            if tok.value == "D":
                self.expect("=")
                self.D = int(self.expect("INT").value)
                if self.D < 1:
                    self.error("D must be positive", tok)
            elif tok.value == "gens":
                self.expect("=")
                names = [self.expect("IDENT").value]
                while self.peek().kind == ",":
                    self.next()
                    names.append(self.expect("IDENT").value)
                if len(set(names)) != len(names):
                    self.error("duplicate generator name", tok)
                self.gens = tuple(names)
            elif tok.value == "bracket":
                self._bracket_statement(tok)
            else:
                self.error(f"unknown statement {tok.value!r}", tok)
            self.expect(";")
        if self.alg is None:
            if self.D is None or self.gens is None:
                tok = self.peek()
                raise ParseError("file must declare D and gens", tok.line, tok.col)
            self.alg = Alg(self.D, self.gens)
        return BracketTable(self.alg, self.entries)

    def _require_alg(self, tok: _Token) -> Alg:
        if self.alg is None:
            if self.D is None or self.gens is None:
                self.error("D and gens must be declared before brackets", tok)
            self.alg = Alg(self.D, self.gens)
        return self.alg

    def _bracket_statement(self, tok: _Token):
        alg = self._require_alg(tok)
        self.expect("(")
        a = self.expect("IDENT")
        self.expect(",")
        b = self.expect("IDENT")
        self.expect(")")
        for t in (a, b):
            if t.value not in alg.gens:
                self.error(f"unknown generator {t.value!r}", t)
        i, j = alg.gens.index(a.value), alg.gens.index(b.value)
        if (i, j) in self.entries:
            self.error(f"duplicate bracket({a.value},{b.value}) entry", tok)
        self.expect("=")
        self.entries[(i, j)] = self._sum()

    # -- expressions (precedence: sum < product < power < unary) ---------
    def _sum(self) -> LambdaPoly:
        if self.peek().kind == "-":
            self.next()
            value = -self._product()
        else:
            value = self._product()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            rhs = self._product()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _product(self) -> LambdaPoly:
        value = self._power()
        while self.peek().kind == "*":
            self.next()
            value = _mul(value, self._power(), self.alg)
        return value

    def _power(self) -> LambdaPoly:
        base = self._primary()
        if self.peek().kind == "^":
            tok = self.next()
            exp = int(self.expect("INT").value)
            if exp < 0:
                self.error("negative exponent", tok)
            out = _const(self.alg, Fraction(1))
            for _ in range(exp):
                out = _mul(out, base, self.alg)
            return out
        return base

    def _primary(self) -> LambdaPoly:
        tok = self.peek()
        if tok.kind == "(":
            self.next()
            value = self._sum()
            self.expect(")")
            return value
        if tok.kind == "-":
            self.next()
            return -self._primary()
        if tok.kind == "INT":
            self.next()
            num = int(tok.value)
            if self.peek().kind == "/":
                self.next()
                den = int(self.expect("INT").value)
                if den == 0:
                    self.error("division by zero", tok)
                return _const(self.alg, Fraction(num, den))
            return _const(self.alg, Fraction(num))
        if tok.kind == "IDENT":
            return self._symbol()
        self.error(f"unexpected token {tok.value!r}")

    def _symbol(self) -> LambdaPoly:
        alg = self.alg
        tok = self.expect("IDENT")
        name = tok.value
        if self.peek().kind == "_":
            # jet variable name_[i1,...,iD]
            self.next()
            self.expect("[")
            idx = [int(self.expect("INT").value)]
            while self.peek().kind == ",":
                self.next()
                idx.append(int(self.expect("INT").value))
            self.expect("]")
            if name not in alg.gens:
                self.error(f"unknown generator {name!r}", tok)
            if len(idx) != alg.D:
                self.error(f"jet index has {len(idx)} entries, expected D={alg.D}", tok)
            return LambdaPoly.from_diff(DiffPoly.jet(alg, alg.gens.index(name), tuple(idx)))
        if name in alg.gens:
            return LambdaPoly.from_diff(DiffPoly.gen(alg, alg.gens.index(name)))
        if len(name) >= 2 and name[0] == "l" and name[1:].isdigit():
            d = int(name[1:])
            if 1 <= d <= alg.D:
                key = tuple(1 if k == d - 1 else 0 for k in range(alg.D))
                return LambdaPoly(alg, 1, {(key,): DiffPoly.const(alg, 1)})
        self.error(f"unknown symbol {name!r}", tok)


def _const(alg: Alg, q: Fraction) -> LambdaPoly:
    return LambdaPoly.from_diff(DiffPoly.const(alg, q))


def _mul(a: LambdaPoly, b: LambdaPoly, alg: Alg) -> LambdaPoly:
    """Commutative product of alphabet polynomials (definition files carry
    no operator ordering: alphabet symbols are plain commuting variables)."""
    out = LambdaPoly.zero(alg)
    for ka, pa in a.terms.items():
        for kb, pb in b.terms.items():
            key = tuple(tuple(x + y for x, y in zip(ia, ib)) for ia, ib in zip(ka, kb))
            out = out + LambdaPoly(alg, 1, {key: pa * pb})
    return out


def parse_bracket_source(text: str) -> BracketTable:
    """Parse a definition file into a bracket table."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# pretty-printer (canonical form in the same grammar)


def _format_rational(q: Fraction) -> str:
    return str(q)


def _format_entry(p: LambdaPoly, alg: Alg) -> str:
    if p.is_zero:
        return "0"
    pieces: list[tuple[str, bool]] = []  # (rendered magnitude, negative?)
    for (key,), poly in p.sorted_terms():
        lam = [
            f"l{d + 1}" + (f"^{k}" if k > 1 else "")
            for d, k in enumerate(key)
            if k
        ]
        for mono, coeff in poly.sorted_terms():
            q = coeff.rational_value()  # file grammar carries no symbols
            jets = []
            for v in dict.fromkeys(mono):
                count = mono.count(v)
                jets.append(alg.jet_name(v) + (f"^{count}" if count > 1 else ""))
            factors = jets + lam
            mag = abs(q)
            body = "*".join(factors) if factors else ""
            if not body:
                text = _format_rational(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{_format_rational(mag)}*{body}"
            pieces.append((text, q < 0))
    out = []
    for k, (text, neg) in enumerate(pieces):
        if k == 0:
            out.append(f"-{text}" if neg else text)
        else:
            out.append(f" - {text}" if neg else f" + {text}")
    return "".join(out)


def format_bracket_table(table: BracketTable) -> str:
    """Canonical definition-file text for a table."""
    alg = table.alg
    lines = [f"D = {alg.D};", f"gens = {', '.join(alg.gens)};"]
    for i in range(alg.N):
        for j in range(alg.N):
            entry = table.entry(i, j)
            if entry.is_zero and alg.N > 1:
                continue
            lines.append(
                f"bracket({alg.gens[i]}, {alg.gens[j]}) = {_format_entry(entry, alg)};"
            )
    return "\n".join(lines) + "\n"
