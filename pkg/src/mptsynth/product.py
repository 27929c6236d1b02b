"""Product of a controlled system with a deterministic Rabin automaton.

The automaton consumes the label of the current model state, so the pair
((x, r), a) steps to (f(x, a), f_R(r, L(x))).  Rabin pairs are lifted by
their automaton component and restricted to the reachable fragment.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

from mptsynth.automata import Dra
from mptsynth.model import ControlledSystem, JointAction, MarkovChain

ProductState = tuple[str, int]


@dataclass(frozen=True)
class ProductAutomaton:
    states: tuple[ProductState, ...]
    initial: ProductState
    edges: Mapping[ProductState, Mapping[JointAction, tuple[float, ProductState]]]
    pairs: tuple[tuple[frozenset[ProductState], frozenset[ProductState]], ...]


def build_product(cs: ControlledSystem, r: Dra) -> ProductAutomaton:
    """Synchronize the controlled system with the automaton, keeping only
    the states reachable from the initial pair."""
    model_ap = frozenset(cs.model.atomic_props)
    dra_ap = frozenset(r.ap)
    if model_ap != dra_ap:
        raise ValueError(
            "proposition sets differ between model and automaton: "
            f"{sorted(model_ap ^ dra_ap)}")

    start: ProductState = (cs.initial, r.initial)
    edges: dict[ProductState, dict[JointAction, tuple[float, ProductState]]] = {}
    order: list[ProductState] = []
    queue = deque([start])
    seen = {start}
    while queue:
        x, q = queue.popleft()
        order.append((x, q))
        q_next = r.step(q, cs.label(x))
        row = {}
        for a in cs.enabled_joint_actions(x):
            succ = (cs.transition(x, a), q_next)
            row[a] = (cs.probability(x, a), succ)
            if succ not in seen:
                seen.add(succ)
                queue.append(succ)
        edges[(x, q)] = row

    states = tuple(order)
    pairs = tuple(
        (
            frozenset(s for s in states if s[1] in L),
            frozenset(s for s in states if s[1] in K),
        )
        for L, K in r.pairs
    )
    return ProductAutomaton(states, start, edges, pairs)


def product_chain(g: ProductAutomaton) -> MarkovChain:
    """Merge parallel action edges between identical state pairs."""
    probs: dict[ProductState, dict[ProductState, float]] = {}
    for s in g.states:
        row: dict[ProductState, float] = {}
        for prob, succ in g.edges[s].values():
            row[succ] = row.get(succ, 0.0) + prob
        probs[s] = row
    return MarkovChain(g.states, g.initial, probs)


def product_to_dot(g: ProductAutomaton, accepting=frozenset()) -> str:
    """GraphViz rendering with per-node Rabin-pair membership annotations."""
    def node_id(s: ProductState) -> str:
        return f'"{s[0]}|{s[1]}"'

    lines = ["digraph product {", "  rankdir=LR;"]
    for s in g.states:
        tags = []
        for i, (L, K) in enumerate(g.pairs):
            if s in L:
                tags.append(f"L{i}")
            if s in K:
                tags.append(f"K{i}")
        label = f"{s[0]},{s[1]}" + (f"\\n{' '.join(tags)}" if tags else "")
        style = ' style=filled fillcolor=palegreen' if s in accepting else ""
        shape = " peripheries=2" if s == g.initial else ""
        lines.append(f'  {node_id(s)} [label="{label}"{style}{shape}];')
    for s in g.states:
        merged: dict[ProductState, list[str]] = {}
        for a, (prob, succ) in g.edges[s].items():
            merged.setdefault(succ, []).append(f"{','.join(a)}:{prob:.4g}")
        for succ, texts in merged.items():
            lines.append(f'  {node_id(s)} -> {node_id(succ)} '
                         f'[label="{" ".join(texts)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
