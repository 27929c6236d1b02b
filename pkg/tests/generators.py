"""Seeded random generators for models, chains, graphs, and automata."""

from __future__ import annotations

import random

from mptsynth.automata import Dra
from mptsynth.model import Controller, MarkovChain, Mpts, cooperative_joint_actions


def random_mpts(rng: random.Random, max_states=4, players=("P1", "P2"),
                cooperative=("P1",), actions=("a", "b", "c"),
                ap=("p", "q"), max_enabled=2) -> Mpts:
    """A valid random model: positive rows normalized per player and state,
    transitions defined on exactly the enabled joint actions."""
    n = rng.randint(1, max_states)
    states = tuple(f"s{k}" for k in range(n))
    dist: dict = {i: {} for i in players}
    for i in players:
        for x in states:
            enabled = rng.sample(actions, rng.randint(1, min(max_enabled,
                                                             len(actions))))
            weights = [rng.uniform(0.1, 1.0) for _ in enabled]
            total = sum(weights)
            dist[i][x] = {a: w / total for a, w in zip(enabled, weights)}
    transitions = {}
    for x in states:
        import itertools
        per_player = [
            tuple(a for a in actions if dist[i][x].get(a, 0.0) > 0.0)
            for i in players
        ]
        for joint in itertools.product(*per_player):
            transitions[(x, joint)] = rng.choice(states)
    labels = {
        x: frozenset(p for p in ap if rng.random() < 0.4) for x in states
    }
    return Mpts(
        players=tuple(players),
        cooperative=frozenset(cooperative),
        states=states,
        actions=tuple(actions),
        player_dist=dist,
        transitions=transitions,
        initial=states[0],
        atomic_props=frozenset(ap),
        labels=labels,
    )


def random_controller(rng: random.Random, model: Mpts) -> Controller:
    """Total on its own reachable set, chosen at random."""
    from collections import deque

    from mptsynth.synthesis import _successor_states

    choices: dict = {}
    seen = {model.initial}
    queue = deque([model.initial])
    while queue:
        x = queue.popleft()
        joint = rng.choice(cooperative_joint_actions(model, x))
        choices[x] = joint
        for nxt in _successor_states(model, x, joint):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return Controller(choices)


def random_chain(rng: random.Random, max_states=10,
                 absorbing_fraction=0.3) -> MarkovChain:
    n = rng.randint(2, max_states)
    states = tuple(range(n))
    probs: dict = {}
    for s in states:
        if rng.random() < absorbing_fraction:
            probs[s] = {s: 1.0}
            continue
        succs = rng.sample(states, rng.randint(1, min(3, n)))
        weights = [rng.uniform(0.1, 1.0) for _ in succs]
        total = sum(weights)
        probs[s] = {t: w / total for t, w in zip(succs, weights)}
    return MarkovChain(states, 0, probs)


def random_digraph(rng: random.Random, max_nodes=12, density=0.25):
    n = rng.randint(1, max_nodes)
    nodes = list(range(n))
    edges = {u: [v for v in nodes if rng.random() < density] for u in nodes}
    return nodes, edges


def random_dra(rng: random.Random, max_states=5, ap=("p", "q")) -> Dra:
    n = rng.randint(1, max_states)
    width = 1 << len(ap)
    transitions = tuple(
        tuple(rng.randrange(n) for _ in range(width)) for _ in range(n)
    )
    num_pairs = rng.randint(1, 2)
    pairs = []
    for _ in range(num_pairs):
        L = frozenset(s for s in range(n) if rng.random() < 0.3)
        K = frozenset(s for s in range(n) if rng.random() < 0.4)
        pairs.append((L, K))
    return Dra(tuple(ap), rng.randrange(n), transitions, tuple(pairs))


def random_lasso(rng: random.Random, ap=("p", "q"), max_prefix=5, max_cycle=5):
    from mptsynth.logic import LassoWord

    prefix = tuple(
        frozenset(p for p in ap if rng.random() < 0.5)
        for _ in range(rng.randint(0, max_prefix))
    )
    cycle = tuple(
        frozenset(p for p in ap if rng.random() < 0.5)
        for _ in range(rng.randint(1, max_cycle))
    )
    return LassoWord(prefix, cycle)
