"""Deterministic Rabin automata: LTL translation, lasso acceptance, HOA I/O.

The translation pipeline is self-contained: a tableau turns the formula
into a generalized Buchi automaton over truth assignments of its basic
subformulas, a counter degeneralizes it, and a Safra-tree construction
determinizes the result into a complete DRA.  Letters are bitsets over the
ordered proposition list.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import AbstractSet, Iterable, Optional, Sequence

from mptsynth.logic import (
    And,
    Atom,
    Formula,
    LassoWord,
    Next,
    Not,
    TrueConst,
    Until,
    atoms_of,
    desugar,
)


class HoaError(ValueError):
    pass


class StateBudgetError(RuntimeError):
    """Translation exceeded its state budget; import a pre-built automaton
    in HOA format instead."""


def letter_index(letter: AbstractSet[str], ap: Sequence[str]) -> int:
    """Bitset encoding of a letter under the AP order (extra props ignored)."""
    idx = 0
    for bit, name in enumerate(ap):
        if name in letter:
            idx |= 1 << bit
    return idx


def letter_set(index: int, ap: Sequence[str]) -> frozenset[str]:
    return frozenset(name for bit, name in enumerate(ap) if index & (1 << bit))


@dataclass(frozen=True)
class Dra:
    """Complete deterministic Rabin automaton over the alphabet 2^ap.

    transitions[s][i] is the successor of state s on the letter with bitset
    index i; pairs are (L, K) state sets accepting runs with Inf disjoint
    from L and meeting K.
    """

    ap: tuple[str, ...]
    initial: int
    transitions: tuple[tuple[int, ...], ...]
    pairs: tuple[tuple[frozenset[int], frozenset[int]], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("a Rabin automaton needs at least one pair")
        width = 1 << len(self.ap)
        for s, row in enumerate(self.transitions):
            if len(row) != width:
                raise ValueError(f"state {s} has {len(row)} successors, "
                                 f"expected one per letter ({width})")

    @property
    def num_states(self) -> int:
        return len(self.transitions)

    def step(self, state: int, letter: AbstractSet[str]) -> int:
        return self.transitions[state][letter_index(letter, self.ap)]


# ---------------------------------------------------------------------------
# Tableau: core LTL -> generalized Buchi over basic-subformula assignments


def _subformulas(f: Formula) -> list[Formula]:
    out: list[Formula] = []
    seen = set()

    def walk(g: Formula):
        if g in seen:
            return
        seen.add(g)
        out.append(g)
        for attr in ("operand", "left", "right"):
            child = getattr(g, attr, None)
            if child is not None:
                walk(child)

    walk(f)
    return out


def _evaluate(g: Formula, basis: frozenset[Formula]) -> bool:
    """Truth of g under an assignment to the basic (atom/next/until) subformulas."""
    if isinstance(g, TrueConst):
        return True
    if isinstance(g, Not):
        return not _evaluate(g.operand, basis)
    if isinstance(g, And):
        return _evaluate(g.left, basis) and _evaluate(g.right, basis)
    return g in basis  # Atom, Next, Until


def _tableau_nba(core: Formula, ap: Sequence[str], budget: int):
    """Degeneralized Buchi automaton for a core-syntax formula.

    Returns (initial_states, transitions, accepting) where transitions maps
    state -> letter index -> tuple of successors.
    """
    subs = _subformulas(core)
    basic = [g for g in subs if isinstance(g, (Atom, Next, Until))]
    untils = [g for g in subs if isinstance(g, Until)]
    if len(basic) > 24:
        raise StateBudgetError(f"formula has {len(basic)} basic subformulas; "
                               "translate it externally and import the HOA file")

    assignments = []
    for bits in itertools.product([False, True], repeat=len(basic)):
        basis = frozenset(g for g, bit in zip(basic, bits) if bit)
        ok = True
        for u in untils:
            holds = u in basis
            right = _evaluate(u.right, basis)
            left = _evaluate(u.left, basis)
            if right and not holds:
                ok = False  # the promise is already fulfilled
                break
            if holds and not right and not left:
                ok = False  # nothing sustains the promise
                break
        if ok:
            assignments.append(basis)

    atoms = [g for g in basic if isinstance(g, Atom)]
    letters = list(range(1 << len(ap)))

    def compatible(basis: frozenset[Formula], letter: int) -> bool:
        for a in atoms:
            bit = 1 << ap.index(a.name)
            if ((a in basis) and not (letter & bit)) or (
                    (a not in basis) and (letter & bit)):
                return False
        return True

    def succ_ok(basis: frozenset[Formula], nxt: frozenset[Formula]) -> bool:
        for g in basic:
            if isinstance(g, Next):
                if (g in basis) != _evaluate(g.operand, nxt):
                    return False
            elif isinstance(g, Until):
                expansion = _evaluate(g.right, basis) or (
                    _evaluate(g.left, basis) and g in nxt)
                if (g in basis) != expansion:
                    return False
        return True

    gba_succ = {
        basis: tuple(nxt for nxt in assignments if succ_ok(basis, nxt))
        for basis in assignments
    }
    gba_letters = {
        basis: tuple(letter for letter in letters if compatible(basis, letter))
        for basis in assignments
    }
    acc_sets = [
        frozenset(b for b in assignments
                  if u not in b or _evaluate(u.right, b))
        for u in untils
    ]
    k = max(1, len(untils))
    if not untils:
        acc_sets = [frozenset(assignments)]

    # Counter construction: advance past slot i upon leaving a state in the
    # i-th acceptance set; accepting states sit at slot 0.
    states = [(basis, i) for basis in assignments for i in range(k)]
    index = {s: n for n, s in enumerate(states)}
    if len(states) > budget:
        raise StateBudgetError(f"tableau produced {len(states)} states, over "
                               f"the budget of {budget}; translate externally "
                               "and import the HOA file")
    transitions: dict[int, dict[int, tuple[int, ...]]] = {}
    for basis, i in states:
        nxt_slot = (i + 1) % k if basis in acc_sets[i] else i
        row = {}
        successors = tuple(index[(nxt, nxt_slot)] for nxt in gba_succ[basis])
        for letter in gba_letters[basis]:
            row[letter] = successors
        transitions[index[(basis, i)]] = row
    initial = tuple(index[(basis, 0)] for basis in assignments
                    if _evaluate(core, basis))
    accepting = frozenset(index[(basis, 0)] for basis in acc_sets[0])
    return initial, transitions, accepting


def _trim_nba(initial, transitions, accepting):
    """Drop states with no accepting continuation (keeps the language)."""
    from mptsynth.analysis import tarjan_scc

    adj = {s: sorted({t for succs in row.values() for t in succs})
           for s, row in transitions.items()}
    sccs = tarjan_scc(adj)
    good_states: set[int] = set()
    for scc in sccs:
        members = set(scc)
        has_cycle = len(scc) > 1 or any(
            s in adj.get(s, ()) for s in scc)
        if has_cycle and members & accepting:
            good_states |= members
    # states that can reach a good SCC
    reverse: dict[int, set[int]] = {s: set() for s in adj}
    for s, succs in adj.items():
        for t in succs:
            reverse.setdefault(t, set()).add(s)
    alive = set(good_states)
    stack = list(good_states)
    while stack:
        s = stack.pop()
        for r in reverse.get(s, ()):
            if r not in alive:
                alive.add(r)
                stack.append(r)
    trimmed = {
        s: {letter: tuple(t for t in succs if t in alive)
            for letter, succs in row.items()}
        for s, row in transitions.items() if s in alive
    }
    return tuple(s for s in initial if s in alive), trimmed, accepting & alive


# ---------------------------------------------------------------------------
# Safra determinization

# A Safra tree node is (name, label frozenset, marked, children tuple);
# the empty tree is None.


def _safra_initial(initial_states: Iterable[int]):
    label = frozenset(initial_states)
    return (0, label, False, ()) if label else None


def _safra_step(tree, letter: int, transitions, accepting: frozenset[int],
                name_pool: int):
    if tree is None:
        return None
    used = set()

    def collect(node):
        used.add(node[0])
        for c in node[3]:
            collect(c)

    collect(tree)
    free = iter(sorted(set(range(name_pool)) - used))

    def spawn(node):
        name, label, _, children = node
        new_children = [spawn(c) for c in children]
        if label & accepting:
            new_children.append((next(free), label & accepting, False, ()))
        return (name, label, False, tuple(new_children))

    def powerset(node):
        name, label, mark, children = node
        moved = frozenset(t for s in label
                          for t in transitions.get(s, {}).get(letter, ()))
        return (name, moved, mark, tuple(powerset(c) for c in children))

    def merge_horizontal(node, forbidden):
        name, label, mark, children = node
        label = label - forbidden
        claimed: frozenset[int] = frozenset()
        new_children = []
        for c in children:
            c2 = merge_horizontal(c, forbidden | claimed)
            claimed = claimed | c2[1]
            new_children.append(c2)
        return (name, label, mark, tuple(new_children))

    def prune(node):
        name, label, mark, children = node
        if not label:
            return None
        kept = tuple(c2 for c in children if (c2 := prune(c)) is not None)
        return (name, label, mark, kept)

    def merge_vertical(node):
        name, label, mark, children = node
        children = tuple(merge_vertical(c) for c in children)
        if children and frozenset().union(*(c[1] for c in children)) == label:
            return (name, label, True, ())
        return (name, label, mark, children)

    tree = spawn(tree)
    tree = powerset(tree)
    tree = merge_horizontal(tree, frozenset())
    tree = prune(tree)
    if tree is None:
        return None
    return merge_vertical(tree)


def _tree_names(tree, marked_only=False) -> frozenset[int]:
    if tree is None:
        return frozenset()
    names = set()

    def walk(node):
        if not marked_only or node[2]:
            names.add(node[0])
        for c in node[3]:
            walk(c)

    walk(tree)
    return frozenset(names)


def ltl_to_dra(f: Formula, ap: Optional[Iterable[str]] = None,
               state_budget: int = 10**6) -> Dra:
    """Translate an LTL formula into a language-equivalent complete DRA.

    The proposition order defaults to the sorted atoms of the formula; pass
    ap explicitly to align the automaton with a model's proposition set.
    """
    ap_order = tuple(ap) if ap is not None else tuple(sorted(atoms_of(f)))
    missing = atoms_of(f) - set(ap_order)
    if missing:
        raise ValueError(f"formula atoms {sorted(missing)} not in the AP list")

    core = desugar(f)
    initial, transitions, accepting = _tableau_nba(core, ap_order, state_budget)
    initial, transitions, accepting = _trim_nba(initial, transitions, accepting)
    name_pool = 2 * max(1, len(transitions))

    letters = list(range(1 << len(ap_order)))
    start = _safra_initial(initial)
    index: dict = {start: 0}
    rows: list[list[int]] = []
    queue = [start]
    while queue:
        tree = queue.pop(0)
        row = []
        for letter in letters:
            nxt = _safra_step(tree, letter, transitions, accepting, name_pool)
            if nxt not in index:
                if len(index) >= state_budget:
                    raise StateBudgetError(
                        f"determinization exceeded {state_budget} states; "
                        "translate externally and import the HOA file")
                index[nxt] = len(index)
                queue.append(nxt)
            row.append(index[nxt])
        rows.append(row)

    trees = list(index)
    pairs = []
    for name in sorted({n for t in trees for n in _tree_names(t)}):
        K = frozenset(index[t] for t in trees if name in _tree_names(t, True))
        if not K:
            continue
        L = frozenset(index[t] for t in trees if name not in _tree_names(t))
        pairs.append((L, K))
    if not pairs:
        pairs = [(frozenset(range(len(trees))), frozenset())]
    return Dra(ap_order, 0, tuple(tuple(r) for r in rows), tuple(pairs))


def dra_accepts_lasso(r: Dra, w: LassoWord) -> bool:
    """Run the automaton on the lasso and test the Rabin pairs against the
    states visited infinitely often."""
    state = r.initial
    for letter in w.prefix:
        state = r.step(state, letter)

    seen: dict[int, int] = {}
    passes: list[set[int]] = []
    while state not in seen:
        seen[state] = len(passes)
        visited: set[int] = set()
        for letter in w.cycle:
            state = r.step(state, letter)
            visited.add(state)
        passes.append(visited)
    inf: set[int] = set()
    for visited in passes[seen[state]:]:
        inf |= visited
    return any(not (inf & L) and (inf & K) for L, K in r.pairs)


# ---------------------------------------------------------------------------
# HOA v1 interchange (state-based Rabin subset)


def export_hoa(r: Dra) -> str:
    d = len(r.pairs)
    acc = " | ".join(f"(Fin({2 * i}) & Inf({2 * i + 1}))" for i in range(d))
    lines = [
        "HOA: v1",
        f"States: {r.num_states}",
        f"Start: {r.initial}",
        f"AP: {len(r.ap)} " + " ".join(f'"{p}"' for p in r.ap),
        f"acc-name: Rabin {d}",
        f"Acceptance: {2 * d} {acc}",
        "properties: trans-labels explicit-labels state-acc deterministic complete",
        "--BODY--",
    ]
    for s in range(r.num_states):
        sigs = []
        for i, (L, K) in enumerate(r.pairs):
            if s in L:
                sigs.append(2 * i)
            if s in K:
                sigs.append(2 * i + 1)
        sig_text = (" {" + " ".join(map(str, sigs)) + "}") if sigs else ""
        lines.append(f"State: {s}{sig_text}")
        for letter, dest in enumerate(r.transitions[s]):
            terms = [
                (str(bit) if letter & (1 << bit) else f"!{bit}")
                for bit in range(len(r.ap))
            ] or ["t"]
            lines.append(f"[{' & '.join(terms)}] {dest}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


class _LabelExpr:
    """Parser/evaluator for HOA edge-label boolean expressions."""

    def __init__(self, text: str):
        self.tokens = re.findall(r"\d+|[tf!&|()]", text)
        if "".join(self.tokens).replace(" ", "") != text.replace(" ", ""):
            raise HoaError(f"unsupported label expression {text!r}")
        self.pos = 0

    def parse(self):
        node = self.parse_or()
        if self.pos != len(self.tokens):
            raise HoaError(f"trailing tokens in label expression")
        return node

    def parse_or(self):
        node = self.parse_and()
        while self.peek() == "|":
            self.pos += 1
            rhs = self.parse_and()
            node = ("or", node, rhs)
        return node

    def parse_and(self):
        node = self.parse_atom()
        while self.peek() == "&":
            self.pos += 1
            rhs = self.parse_atom()
            node = ("and", node, rhs)
        return node

    def parse_atom(self):
        tok = self.peek()
        if tok is None:
            raise HoaError("truncated label expression")
        self.pos += 1
        if tok == "!":
            return ("not", self.parse_atom())
        if tok == "(":
            node = self.parse_or()
            if self.peek() != ")":
                raise HoaError("unbalanced parentheses in label expression")
            self.pos += 1
            return node
        if tok == "t":
            return ("true",)
        if tok == "f":
            return ("false",)
        if tok.isdigit():
            return ("ap", int(tok))
        raise HoaError(f"unexpected token {tok!r} in label expression")

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None


def _eval_label(node, letter: int) -> bool:
    kind = node[0]
    if kind == "true":
        return True
    if kind == "false":
        return False
    if kind == "ap":
        return bool(letter & (1 << node[1]))
    if kind == "not":
        return not _eval_label(node[1], letter)
    if kind == "and":
        return _eval_label(node[1], letter) and _eval_label(node[2], letter)
    return _eval_label(node[1], letter) or _eval_label(node[2], letter)


def _parse_acceptance(formula: str) -> list[tuple[int, int]]:
    """Map an acceptance formula onto (Fin set, Inf set) id pairs; anything
    that is not a disjunction of Fin&Inf conjuncts is rejected."""
    pairs = []
    for disjunct in formula.split("|"):
        disjunct = disjunct.strip()
        while disjunct.startswith("(") and disjunct.endswith(")"):
            disjunct = disjunct[1:-1].strip()
        fin = inf = None
        for conjunct in disjunct.split("&"):
            m = re.fullmatch(r"\s*(Fin|Inf)\(\s*(\d+)\s*\)\s*", conjunct)
            if not m:
                raise HoaError(f"unsupported acceptance condition "
                               f"(expected Rabin pairs): {formula!r}")
            if m.group(1) == "Fin":
                if fin is not None:
                    raise HoaError(f"unsupported acceptance condition "
                                   f"(two Fin terms in one pair): {formula!r}")
                fin = int(m.group(2))
            else:
                if inf is not None:
                    raise HoaError(f"unsupported acceptance condition "
                                   f"(two Inf terms in one pair): {formula!r}")
                inf = int(m.group(2))
        if fin is None or inf is None:
            raise HoaError(f"unsupported acceptance condition "
                           f"(expected Fin&Inf pairs): {formula!r}")
        pairs.append((fin, inf))
    return pairs


def import_hoa(text: str) -> Dra:
    """Parse a HOA v1 automaton with deterministic, complete, state-based
    Rabin acceptance into a Dra."""
    if "--BODY--" not in text:
        raise HoaError("missing --BODY-- section")
    header_text, body_text = text.split("--BODY--", 1)
    body_text = body_text.split("--END--", 1)[0]

    headers: dict[str, list[str]] = {}
    for line in header_text.splitlines():
        line = line.strip()
        if not line or line.startswith("/*"):
            continue
        key, _, value = line.partition(":")
        headers.setdefault(key.strip(), []).append(value.strip())

    if headers.get("HOA", [""])[0] != "v1":
        raise HoaError("expected HOA v1 header")
    if "States" not in headers:
        raise HoaError("missing States header")
    num_states = int(headers["States"][0])
    starts = headers.get("Start", [])
    if len(starts) != 1 or not re.fullmatch(r"\d+", starts[0]):
        raise HoaError("need exactly one initial state (deterministic automata only)")
    initial = int(starts[0])

    ap_line = headers.get("AP", ["0"])[0]
    ap_match = re.fullmatch(r"(\d+)\s*(.*)", ap_line, re.DOTALL)
    ap_count = int(ap_match.group(1))
    ap = tuple(re.findall(r'"([^"]*)"', ap_match.group(2)))
    if len(ap) != ap_count:
        raise HoaError(f"AP header declares {ap_count} names, found {len(ap)}")

    if "Acceptance" not in headers:
        raise HoaError("missing Acceptance header")
    acc_value = headers["Acceptance"][0]
    acc_match = re.fullmatch(r"(\d+)\s+(.*)", acc_value, re.DOTALL)
    if not acc_match:
        raise HoaError(f"malformed Acceptance header: {acc_value!r}")
    acc_name = headers.get("acc-name", [""])[0]
    if acc_name and not acc_name.startswith("Rabin"):
        raise HoaError(f"unsupported acceptance {acc_name!r} (only Rabin)")
    id_pairs = _parse_acceptance(acc_match.group(2))

    num_letters = 1 << len(ap)
    table: list[list[Optional[int]]] = [
        [None] * num_letters for _ in range(num_states)]
    state_sigs: dict[int, frozenset[int]] = {}

    current: Optional[int] = None
    for raw in body_text.splitlines():
        line = raw.split("/*")[0].strip()
        if not line:
            continue
        if line.startswith("State:"):
            rest = line[len("State:"):].strip()
            m = re.fullmatch(
                r"(?:\[[^\]]*\]\s*)?(\d+)(?:\s+\"[^\"]*\")?(?:\s*\{([\d\s]*)\})?",
                rest)
            if not m:
                raise HoaError(f"malformed State line: {line!r}")
            current = int(m.group(1))
            if current >= num_states:
                raise HoaError(f"state index {current} out of range")
            sig = frozenset(int(t) for t in (m.group(2) or "").split())
            state_sigs[current] = sig
            continue
        m = re.fullmatch(r"\[(.*)\]\s+(\d+)(\s*\{[\d\s]*\})?", line)
        if not m:
            raise HoaError(f"unsupported edge syntax (explicit labels required): "
                           f"{line!r}")
        if m.group(3):
            raise HoaError("transition-based acceptance is unsupported")
        if current is None:
            raise HoaError("edge before any State line")
        dest = int(m.group(2))
        if dest >= num_states:
            raise HoaError(f"edge target {dest} out of range")
        expr = _LabelExpr(m.group(1)).parse()
        for letter in range(num_letters):
            if _eval_label(expr, letter):
                if table[current][letter] is not None:
                    raise HoaError(f"nondeterministic: state {current} has two "
                                   f"edges for letter {letter}")
                table[current][letter] = dest

    for s in range(num_states):
        for letter in range(num_letters):
            if table[s][letter] is None:
                raise HoaError(f"incomplete: state {s} lacks an edge for "
                               f"letter {letter}")

    pairs = []
    for fin_id, inf_id in id_pairs:
        L = frozenset(s for s, sig in state_sigs.items() if fin_id in sig)
        K = frozenset(s for s, sig in state_sigs.items() if inf_id in sig)
        pairs.append((L, K))
    if not pairs:
        raise HoaError("automaton declares no Rabin pairs")
    return Dra(ap, initial, tuple(tuple(row) for row in table), tuple(pairs))
