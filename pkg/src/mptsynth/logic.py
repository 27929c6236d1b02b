"""LTL formulas: syntax tree, parser, desugaring, and lasso-word semantics.

The lasso evaluator is exact on ultimately periodic words and is kept
independent of the automata pipeline so it can serve as a semantic oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterable, Optional


class LtlSyntaxError(ValueError):
    """Raised on malformed formula text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class TrueConst(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


TRUE = TrueConst()
FALSE = Not(TRUE)


def atoms_of(f: Formula) -> frozenset[str]:
    """All proposition names occurring in f."""
    match f:
        case Atom(name):
            return frozenset({name})
        case TrueConst():
            return frozenset()
        case Not(a) | Next(a) | Eventually(a) | Always(a):
            return atoms_of(a)
        case And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b):
            return atoms_of(a) | atoms_of(b)
    raise TypeError(f"not a formula: {f!r}")


def format_formula(f: Formula) -> str:
    """Render f in the concrete syntax accepted by parse_ltl (fully parenthesized)."""
    match f:
        case TrueConst():
            return "true"
        case Atom(name):
            return name
        case Not(a):
            return f"!({format_formula(a)})"
        case Next(a):
            return f"X({format_formula(a)})"
        case Eventually(a):
            return f"F({format_formula(a)})"
        case Always(a):
            return f"G({format_formula(a)})"
        case And(a, b):
            return f"({format_formula(a)} & {format_formula(b)})"
        case Or(a, b):
            return f"({format_formula(a)} | {format_formula(b)})"
        case Implies(a, b):
            return f"({format_formula(a)} -> {format_formula(b)})"
        case Iff(a, b):
            return f"({format_formula(a)} <-> {format_formula(b)})"
        case Until(a, b):
            return f"({format_formula(a)} U {format_formula(b)})"
    raise TypeError(f"not a formula: {f!r}")


_UNARY = {"!", "X", "F", "G"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    # token kinds: ident, op, lparen, rparen
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "(":
            tokens.append(("lparen", ch, i))
            i += 1
        elif ch == ")":
            tokens.append(("rparen", ch, i))
            i += 1
        elif text.startswith("<->", i):
            tokens.append(("op", "<->", i))
            i += 3
        elif text.startswith("->", i):
            tokens.append(("op", "->", i))
            i += 2
        elif ch in "!&|":
            tokens.append(("op", ch, i))
            i += 1
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in ("X", "F", "G", "U"):
                tokens.append(("op", word, i))
            else:
                tokens.append(("ident", word, i))
            i = j
        else:
            raise LtlSyntaxError(f"unexpected character {ch!r}", i)
    return tokens


class _Parser:
    """Recursive descent over: iff < implies < or < and < until < unary < atom.

    U and -> associate to the right.
    """

    def __init__(self, tokens: list[tuple[str, str, int]], text_len: int,
                 ap: Optional[AbstractSet[str]]):
        self.tokens = tokens
        self.pos = 0
        self.text_len = text_len
        self.ap = ap

    def peek(self) -> Optional[tuple[str, str, int]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise LtlSyntaxError("unexpected end of input", self.text_len)
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> bool:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == op:
            self.pos += 1
            return True
        return False

    def parse(self) -> Formula:
        f = self.parse_iff()
        tok = self.peek()
        if tok is not None:
            raise LtlSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return f

    def parse_iff(self) -> Formula:
        left = self.parse_implies()
        while self.expect_op("<->"):
            right = self.parse_implies()
            left = Iff(left, right)
        return left

    def parse_implies(self) -> Formula:
        left = self.parse_or()
        if self.expect_op("->"):
            right = self.parse_implies()  # right-associative
            return Implies(left, right)
        return left

    def parse_or(self) -> Formula:
        left = self.parse_and()
        while self.expect_op("|"):
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Formula:
        left = self.parse_until()
        while self.expect_op("&"):
            left = And(left, self.parse_until())
        return left

    def parse_until(self) -> Formula:
        left = self.parse_unary()
        if self.expect_op("U"):
            right = self.parse_until()  # right-associative
            return Until(left, right)
        return left

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] in _UNARY:
            self.pos += 1
            operand = self.parse_unary()
            return {
                "!": Not,
                "X": Next,
                "F": Eventually,
                "G": Always,
            }[tok[1]](operand)
        return self.parse_primary()

    def parse_primary(self) -> Formula:
        tok = self.take()
        kind, value, position = tok
        if kind == "lparen":
            inner = self.parse_iff()
            closing = self.peek()
            if closing is None or closing[0] != "rparen":
                raise LtlSyntaxError("missing closing parenthesis", position)
            self.pos += 1
            return inner
        if kind == "ident":
            if value == "true":
                return TRUE
            if value == "false":
                return FALSE
            if self.ap is not None and value not in self.ap:
                raise LtlSyntaxError(f"unknown atomic proposition {value!r}", position)
            return Atom(value)
        raise LtlSyntaxError(f"unexpected token {value!r}", position)


def parse_ltl(text: str, ap: Optional[AbstractSet[str]] = None) -> Formula:
    """Parse formula text; atoms must lie in ap when an AP set is declared."""
    tokens = _tokenize(text)
    if not tokens:
        raise LtlSyntaxError("empty formula", 0)
    return _Parser(tokens, len(text), ap).parse()


def desugar(f: Formula) -> Formula:
    """Rewrite to the core connectives: true, atoms, !, &, X, U."""
    match f:
        case TrueConst() | Atom(_):
            return f
        case Not(a):
            return Not(desugar(a))
        case And(a, b):
            return And(desugar(a), desugar(b))
        case Next(a):
            return Next(desugar(a))
        case Until(a, b):
            return Until(desugar(a), desugar(b))
        case Or(a, b):
            return Not(And(Not(desugar(a)), Not(desugar(b))))
        case Implies(a, b):
            return desugar(Or(Not(a), b))
        case Iff(a, b):
            return desugar(And(Implies(a, b), Implies(b, a)))
        case Eventually(a):
            return Until(TRUE, desugar(a))
        case Always(a):
            return Not(Until(TRUE, Not(desugar(a))))
    raise TypeError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic word prefix . cycle^omega; cycle must be nonempty."""

    prefix: tuple[frozenset[str], ...]
    cycle: tuple[frozenset[str], ...]

    def __post_init__(self):
        if len(self.cycle) == 0:
            raise ValueError("lasso cycle must be nonempty")

    @staticmethod
    def of(prefix: Iterable[Iterable[str]], cycle: Iterable[Iterable[str]]) -> "LassoWord":
        return LassoWord(
            tuple(frozenset(letter) for letter in prefix),
            tuple(frozenset(letter) for letter in cycle),
        )

    def letter(self, i: int) -> frozenset[str]:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def rotate(self) -> "LassoWord":
        """Shift the first cycle letter onto the prefix; denotes the same word."""
        return LassoWord(self.prefix + (self.cycle[0],),
                         self.cycle[1:] + (self.cycle[0],))


def eval_on_lasso(f: Formula, w: LassoWord) -> bool:
    """Whether the infinite unrolling of w satisfies f.

    Works bottom-up over subformulas, computing the exact set of positions
    0..|prefix|+|cycle|-1 whose suffix satisfies each subformula.  Position
    |prefix|+k stands for every unrolled position congruent to it, so Until
    is resolved by a fixpoint over the finitely many distinct suffixes.
    """
    total = len(w.prefix) + len(w.cycle)
    letters = list(w.prefix) + list(w.cycle)

    def succ(i: int) -> int:
        return i + 1 if i + 1 < total else len(w.prefix)

    cache: dict[Formula, frozenset[int]] = {}

    def sat(g: Formula) -> frozenset[int]:
        if g in cache:
            return cache[g]
        match g:
            case TrueConst():
                result = frozenset(range(total))
            case Atom(name):
                result = frozenset(i for i in range(total) if name in letters[i])
            case Not(a):
                result = frozenset(range(total)) - sat(a)
            case And(a, b):
                result = sat(a) & sat(b)
            case Next(a):
                inner = sat(a)
                result = frozenset(i for i in range(total) if succ(i) in inner)
            case Until(a, b):
                hold = set(sat(b))
                left = sat(a)
                changed = True
                while changed:
                    changed = False
                    for i in range(total - 1, -1, -1):
                        if i not in hold and i in left and succ(i) in hold:
                            hold.add(i)
                            changed = True
                result = frozenset(hold)
            case Or(_, _) | Implies(_, _) | Iff(_, _) | Eventually(_) | Always(_):
                result = sat(desugar(g))
            case _:
                raise TypeError(f"not a formula: {g!r}")
        cache[g] = result
        return result

    return 0 in sat(f)
