"""Two-level Boolean algebra: covers, static-1 hazards and their removal.

Minterms and assignments are handled as integers internally, with variable
``i`` stored in bit ``n - 1 - i`` so that ``int("100", 2)`` is the assignment
A=1, B=0, C=0 for variables ``(A, B, C)``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_EXHAUSTIVE_VARS = 20


class ExpressionSyntaxError(ValueError):
    """Malformed expression text; ``position`` is a 0-based column."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NotTwoLevelError(ValueError):
    """The expression is valid Boolean syntax but not a sum of products."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True, order=True)
class Variable:
    index: int
    name: str


@dataclass(frozen=True, order=True)
class Literal:
    var: int
    complemented: bool = False

    def holds(self, bits: Sequence[int]) -> bool:
        return bool(bits[self.var]) != self.complemented


@dataclass(frozen=True)
class ProductTerm:
    """Conjunction of literals; the empty term is the constant 1."""

    literals: tuple[Literal, ...] = ()

    def __post_init__(self):
        lits = tuple(sorted(set(self.literals)))
        vars_ = [l.var for l in lits]
        if len(set(vars_)) != len(vars_):
            raise ValueError(f"variable repeated in product term: {lits}")
        object.__setattr__(self, "literals", lits)

    @classmethod
    def of(cls, *pairs: tuple[int, bool]) -> "ProductTerm":
        return cls(tuple(Literal(v, c) for v, c in pairs))

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(l.var for l in self.literals)

    def phase(self, var: int) -> bool | None:
        """Complement flag of ``var`` in this term, or None when absent."""
        for lit in self.literals:
            if lit.var == var:
                return lit.complemented
        return None

    def masks(self, n: int) -> tuple[int, int]:
        """(care, value) bit masks over minterm integers with ``n`` variables."""
        care = value = 0
        for lit in self.literals:
            bit = 1 << (n - 1 - lit.var)
            care |= bit
            if not lit.complemented:
                value |= bit
        return care, value

    def covers(self, minterm: int, n: int) -> bool:
        care, value = self.masks(n)
        return minterm & care == value

    def sort_key(self) -> tuple:
        return (len(self.literals), tuple((l.var, l.complemented) for l in self.literals))

    def __len__(self) -> int:
        return len(self.literals)


@dataclass(frozen=True)
class Cover:
    """Sum of products over ordered variables; no terms means constant 0."""

    variables: tuple[str, ...]
    terms: tuple[ProductTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variable names: {self.variables}")
        n = len(self.variables)
        for term in self.terms:
            for lit in term.literals:
                if not 0 <= lit.var < n:
                    raise ValueError(f"literal references undeclared variable {lit.var}")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def vars(self) -> tuple[Variable, ...]:
        return tuple(Variable(i, name) for i, name in enumerate(self.variables))

    def is_constant(self) -> bool:
        return not self.terms or any(len(t) == 0 for t in self.terms)

    def term_set(self) -> frozenset[ProductTerm]:
        return frozenset(self.terms)

    def with_terms(self, terms: Iterable[ProductTerm]) -> "Cover":
        return Cover(self.variables, tuple(terms))

    def term_text(self, term: ProductTerm, complement: str = "'", conj: str = "") -> str:
        if not term.literals:
            return "1"
        parts = []
        for lit in term.literals:
            name = self.variables[lit.var]
            if lit.complemented:
                parts.append(f"~{name}" if complement == "~" else f"{name}'")
            else:
                parts.append(name)
        return conj.join(parts)

    def to_text(self, complement: str = "'", conj: str = "") -> str:
        if not self.terms:
            return "0"
        return " + ".join(self.term_text(t, complement, conj) for t in self.terms)

    def __str__(self) -> str:
        return self.to_text()


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z][0-9_]*)|(?P<const>[01])|(?P<op>[+*'~()]))")


@dataclass
class _Style:
    complement: str = "'"
    conj: str = ""


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    return tokens


class _Parser:
    """Recursive descent over  expr := term ('+' term)* ;  term := factor ('*'? factor)*."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.names: list[str] = []
        self.style = _Style()

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def eof_pos(self) -> int:
        return len(self.text)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def var_index(self, name: str) -> int:
        if name not in self.names:
            self.names.append(name)
        return self.names.index(name)

    # Each sum is a list of products; each product is a set of (var, comp) or None for 0.
    def parse(self) -> list[set | None]:
        if not self.tokens:
            raise ExpressionSyntaxError("empty expression", 0)
        products = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ExpressionSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return products

    def expr(self) -> list:
        products = self.term()
        while (tok := self.peek()) is not None and tok[1] == "+":
            self.take()
            products = products + self.term()
        return products

    def term(self) -> list:
        start = self.peek()
        factors = [self.factor()]
        while (tok := self.peek()) is not None and tok[1] not in ("+", ")"):
            if tok[1] == "*":
                self.style.conj = "*"
                self.take()
            factors.append(self.factor())
        sums = [f for f in factors if len(f) > 1]
        if sums and len(factors) > 1:
            raise NotTwoLevelError("OR nested inside AND", start[2])
        if len(factors) == 1:
            return factors[0]
        prod: set | None = set()
        for f in factors:
            (p,) = f
            prod = None if prod is None or p is None else prod | p
        return [prod]

    def factor(self) -> list:
        tok = self.take()
        if tok is None:
            raise ExpressionSyntaxError("unexpected end of expression", self.eof_pos())
        kind, value, pos = tok
        if value == "~":
            self.style.complement = "~"
            inner = self.factor()
            return self._complement(inner, pos)
        if kind == "ident":
            result = [{(self.var_index(value), False)}]
        elif kind == "const":
            result = [set()] if value == "1" else [None]
        elif value == "(":
            result = self.expr()
            close = self.take()
            if close is None:
                raise ExpressionSyntaxError("missing ')'", self.eof_pos())
            if close[1] != ")":
                raise ExpressionSyntaxError(f"expected ')' but found {close[1]!r}", close[2])
        else:
            raise ExpressionSyntaxError(f"unexpected {value!r}", pos)
        while (nxt := self.peek()) is not None and nxt[1] == "'":
            self.take()
            result = self._complement(result, nxt[2])
        return result

    @staticmethod
    def _complement(sop: list, pos: int) -> list:
        if len(sop) != 1:
            raise NotTwoLevelError("complement of a sum", pos)
        (prod,) = sop
        if prod is None:
            return [set()]
        if not prod:
            return [None]
        if len(prod) != 1:
            raise NotTwoLevelError("complement of a product", pos)
        ((var, comp),) = prod
        return [{(var, not comp)}]


def _product_to_term(prod: set) -> ProductTerm | None:
    seen: dict[int, bool] = {}
    for var, comp in prod:
        if seen.get(var, comp) != comp:
            return None  # x·x' is constant 0
        seen[var] = comp
    return ProductTerm.of(*seen.items())


def parse_expression_styled(text: str) -> tuple[Cover, str, str]:
    """Parse and also return the (complement, conjunction) style of the input."""
    parser = _Parser(text)
    products = parser.parse()
    terms: list[ProductTerm] = []
    for prod in products:
        if prod is None:
            continue
        term = _product_to_term(prod)
        if term is not None and term not in terms:
            terms.append(term)
    return Cover(tuple(parser.names), tuple(terms)), parser.style.complement, parser.style.conj


def parse_expression(text: str) -> Cover:
    """Parse an SOP expression such as ``"AB' + BC'"`` into a :class:`Cover`.

    Complement is ``'`` (postfix) or ``~`` (prefix); AND is juxtaposition or
    ``*``; OR is ``+``. Identifiers are a letter followed by optional digits,
    so ``AB`` is two variables. Variable order is order of first appearance.
    """
    return parse_expression_styled(text)[0]


# -- evaluation --------------------------------------------------------------

def assignment_from_string(bits: str) -> tuple[int, ...]:
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"assignment must be a string of 0/1, got {bits!r}")
    return tuple(int(c) for c in bits)


def assignment_to_int(bits: Sequence[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | (1 if b else 0)
    return value


def int_to_assignment(minterm: int, n: int) -> tuple[int, ...]:
    return tuple((minterm >> (n - 1 - i)) & 1 for i in range(n))


def format_assignment(bits: Sequence[int]) -> str:
    return "".join("1" if b else "0" for b in bits)


def eval_term(term: ProductTerm, bits: Sequence[int]) -> bool:
    return all(lit.holds(bits) for lit in term.literals)


def eval_cover(cover: Cover, bits: Sequence[int]) -> bool:
    if len(bits) != cover.n:
        raise ValueError(f"assignment has {len(bits)} bits, cover has {cover.n} variables")
    return any(eval_term(t, bits) for t in cover.terms)


def truth_table(cover: Cover) -> list[bool]:
    """Function values indexed by minterm integer."""
    n = cover.n
    masks = [t.masks(n) for t in cover.terms]
    return [any(m & c == v for c, v in masks) for m in range(1 << n)]


def majority(a: int, b: int, c: int) -> int:
    return int((a and b) or (b and c) or (c and a))


# -- hazards -----------------------------------------------------------------

@dataclass(frozen=True)
class Hazard:
    minterm_a: tuple[int, ...]
    minterm_b: tuple[int, ...]
    toggled_variable: Variable
    curing_term: ProductTerm


@dataclass(frozen=True)
class HazardReport:
    hazards: tuple[Hazard, ...] = ()
    added_terms: tuple[ProductTerm, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.hazards)

    def __len__(self) -> int:
        return len(self.hazards)


def consensus(t1: ProductTerm, t2: ProductTerm) -> ProductTerm | None:
    """Consensus of two terms opposed in exactly one variable, else None."""
    opposed = [l.var for l in t1.literals if t2.phase(l.var) is not None and t2.phase(l.var) != l.complemented]
    if len(opposed) != 1:
        return None
    (var,) = opposed
    return ProductTerm(tuple(l for l in t1.literals + t2.literals if l.var != var))


def uncovered_adjacent_pairs(cover: Cover) -> list[tuple[int, int, int]]:
    """(m_low, m_high, var) for adjacent true minterms sharing no covering term."""
    n = cover.n
    if n > MAX_EXHAUSTIVE_VARS:
        raise ValueError(f"exhaustive hazard analysis limited to {MAX_EXHAUSTIVE_VARS} variables")
    table = truth_table(cover)
    masks = [t.masks(n) for t in cover.terms]
    pairs = []
    for m in range(1 << n):
        if not table[m]:
            continue
        for var in range(n):
            bit = 1 << (n - 1 - var)
            if m & bit or not table[m | bit]:
                continue
            partner = m | bit
            if not any(m & c == v and not c & bit for c, v in masks):
                pairs.append((m, partner, var))
    return pairs


def _term_from_masks(care: int, value: int, n: int) -> ProductTerm:
    return ProductTerm.of(*(
        (i, not value & (1 << (n - 1 - i)))
        for i in range(n) if care & (1 << (n - 1 - i))
    ))


def prime_implicants(cover: Cover) -> list[ProductTerm]:
    """All prime implicants of the cover's function (Quine-McCluskey)."""
    n = cover.n
    full = (1 << n) - 1
    table = truth_table(cover)
    current = {(full, m) for m in range(1 << n) if table[m]}
    primes: set[tuple[int, int]] = set()
    while current:
        merged: set[tuple[int, int]] = set()
        used: set[tuple[int, int]] = set()
        by_care: dict[int, set[int]] = {}
        for care, value in current:
            by_care.setdefault(care, set()).add(value)
        for care, values in by_care.items():
            for value in values:
                bit = care
                while bit:
                    low = bit & -bit
                    bit ^= low
                    if value & low:
                        continue
                    other = value | low
                    if other in values:
                        merged.add((care & ~low, value))
                        used.add((care, value))
                        used.add((care, other))
        primes |= current - used
        current = merged
    return sorted((_term_from_masks(c, v, n) for c, v in primes), key=ProductTerm.sort_key)


def _curing_term(cover: Cover, lo: int, hi: int, var: int, primes: list[ProductTerm] | None) -> tuple[ProductTerm, list]:
    n = cover.n
    candidates = []
    for t1 in cover.terms:
        if not t1.covers(lo, n):
            continue
        for t2 in cover.terms:
            if t2.covers(hi, n):
                c = consensus(t1, t2)
                if c is not None and c.phase(var) is None:
                    candidates.append(c)
    if not candidates:
        if primes is None:
            primes = prime_implicants(cover)
        candidates = [p for p in primes if p.covers(lo, n) and p.covers(hi, n)]
    return min(candidates, key=ProductTerm.sort_key), primes


def detect_static1_hazards(cover: Cover) -> HazardReport:
    """Every pair of adjacent true minterms that no single term covers.

    Each record carries a curing term: the smallest consensus of a term
    covering one side with a term covering the other, or failing that the
    smallest prime implicant covering both minterms.
    """
    n = cover.n
    hazards = []
    primes = None
    for lo, hi, var in uncovered_adjacent_pairs(cover):
        cure, primes = _curing_term(cover, lo, hi, var, primes)
        hazards.append(Hazard(
            int_to_assignment(lo, n), int_to_assignment(hi, n),
            Variable(var, cover.variables[var]), cure,
        ))
    added = []
    for h in hazards:
        if h.curing_term not in added:
            added.append(h.curing_term)
    return HazardReport(tuple(hazards), tuple(added))


def eliminate_hazards(cover: Cover) -> Cover:
    """Add redundant prime implicants until no static-1 hazard remains.

    Greedy: each round adds the prime implicant that covers the most
    remaining hazard pairs, ties going to fewer literals then term order.
    """
    n = cover.n
    pairs = uncovered_adjacent_pairs(cover)
    if not pairs:
        return cover
    primes = prime_implicants(cover)
    terms = list(cover.terms)
    while pairs:
        def gain(p: ProductTerm) -> int:
            return sum(1 for lo, hi, _ in pairs if p.covers(lo, n) and p.covers(hi, n))
        best = min((p for p in primes if p not in terms), key=lambda p: (-gain(p), p.sort_key()))
        terms.append(best)
        care, value = best.masks(n)
        pairs = [(lo, hi, v) for lo, hi, v in pairs
                 if not (lo & care == value and hi & care == value)]
    return cover.with_terms(terms)


def all_terms(n: int) -> Iterable[ProductTerm]:
    """Every product term over ``n`` variables (3**n of them)."""
    for phases in itertools.product((None, False, True), repeat=n):
        yield ProductTerm.of(*((i, c) for i, c in enumerate(phases) if c is not None))

