"""Accepting components and reachability probabilities of product chains.

Bottom strongly connected components are the trap sets of a finite Markov
chain; a run almost surely enters one and then visits all of its states
infinitely often, so Rabin acceptance reduces to reaching an accepting
bottom component.
"""

from __future__ import annotations

from typing import AbstractSet, Hashable, Iterable, Mapping

import numpy as np

from mptsynth.automata import Dra, ltl_to_dra
from mptsynth.logic import Formula
from mptsynth.model import ControlledSystem, MarkovChain
from mptsynth.product import ProductAutomaton, build_product, product_chain


def tarjan_scc(graph: Mapping[Hashable, Iterable[Hashable]]) -> list[list[Hashable]]:
    """Strongly connected components, iteratively (no recursion limit).

    Returns the partition in reverse topological order of the condensation.
    """
    nodes = list(graph)
    known = set(nodes)
    for succs in graph.values():
        for t in succs:
            if t not in known:
                known.add(t)
                nodes.append(t)

    index: dict = {}
    lowlink: dict = {}
    on_stack: set = set()
    stack: list = []
    sccs: list[list] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(graph.get(root, ())))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(graph.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                sccs.append(component)
    return sccs


def _product_adjacency(g: ProductAutomaton) -> dict:
    return {
        s: sorted({succ for _, succ in g.edges[s].values()})
        for s in g.states
    }


def bottom_sccs_graph(adj: Mapping) -> list[frozenset]:
    """SCCs of a plain directed graph with no outgoing edges."""
    bottoms = []
    for scc in tarjan_scc(adj):
        members = frozenset(scc)
        if all(t in members for s in scc for t in adj.get(s, ())):
            bottoms.append(members)
    return bottoms


def bottom_sccs(g: ProductAutomaton) -> list[frozenset]:
    """SCCs of the product graph that no enabled action leaves."""
    return bottom_sccs_graph(_product_adjacency(g))


def accepting_components(g: ProductAutomaton) -> frozenset:
    """Union of the bottom SCCs that satisfy some lifted Rabin pair."""
    result: set = set()
    for bscc in bottom_sccs(g):
        if any(not (bscc & L) and (bscc & K) for L, K in g.pairs):
            result |= bscc
    return frozenset(result)


def reachability_probability(chain: MarkovChain,
                             target: AbstractSet) -> dict:
    """Least solution of the reach-target equations, one value per state.

    States with no graph path to the target get exactly 0; the rest is
    solved by Gaussian elimination on the remaining linear system.
    """
    states = list(chain.states)
    state_set = set(states)
    extra = set(target) - state_set
    if extra:
        raise ValueError(f"target states not in the chain: {sorted(extra)}")

    reverse: dict = {s: [] for s in states}
    for s in states:
        for t in chain.successors(s):
            reverse[t].append(s)
    can_reach = set(target)
    frontier = list(target)
    while frontier:
        t = frontier.pop()
        for s in reverse[t]:
            if s not in can_reach:
                can_reach.add(s)
                frontier.append(s)

    values = {s: 0.0 for s in states}
    for s in target:
        values[s] = 1.0
    unknowns = [s for s in states if s in can_reach and s not in target]
    if unknowns:
        pos = {s: i for i, s in enumerate(unknowns)}
        n = len(unknowns)
        coeff = np.eye(n)
        rhs = np.zeros(n)
        for s in unknowns:
            for t, p in chain.successors(s).items():
                if t in target:
                    rhs[pos[s]] += p
                elif t in pos:
                    coeff[pos[s], pos[t]] -= p
        solution = np.linalg.solve(coeff, rhs)
        for s in unknowns:
            values[s] = float(min(1.0, max(0.0, solution[pos[s]])))
    return values


def probability_of_satisfaction(cs: ControlledSystem, f: Formula,
                                dra: Dra | None = None) -> float:
    """Probability that a run of the controlled system satisfies f.

    Translates f (unless a pre-built automaton is supplied), builds the
    product, and computes the reachability probability of its accepting
    components from the initial pair.
    """
    if dra is None:
        dra = ltl_to_dra(f, ap=sorted(cs.model.atomic_props))
    g = build_product(cs, dra)
    acs = accepting_components(g)
    chain = product_chain(g)
    return reachability_probability(chain, acs)[g.initial]
