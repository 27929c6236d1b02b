"""Bundled example: three dining philosophers, two of them allied.

Each philosopher runs the same five-state automaton:

    A (thinking)      --a--> A        --b--> B
    B (hungry)        --c--> D (took left fork)
                      --d--> C (took right fork)
                      --f--> B (keeps waiting)
    D (holding left)  --d--> E        --f--> D
    C (holding right) --c--> E        --f--> C
    E (eating)        --e--> A (puts both forks back)

The joint model is the componentwise product: a global state is the triple
of local states (written e.g. "BAA"), a joint action picks one action per
philosopher, and each component moves independently.  Philosophers 1 and 2
are the cooperative alliance; philosopher 3 plays adversarially at random.

Propositions: q1/q2/q3 mark exactly one philosopher eating, q4 marks
nobody eating; states where two philosophers eat simultaneously carry no
proposition.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from mptsynth.model import Controller, Mpts

LOCAL_STATES = ("A", "B", "C", "D", "E")
ACTIONS = ("a", "b", "c", "d", "e", "f")

LOCAL_MOVES = {
    ("A", "a"): "A",
    ("A", "b"): "B",
    ("B", "c"): "D",
    ("B", "d"): "C",
    ("B", "f"): "B",
    ("C", "c"): "E",
    ("C", "f"): "C",
    ("D", "d"): "E",
    ("D", "f"): "D",
    ("E", "e"): "A",
}

PLAYERS = ("P1", "P2", "P3")

# Probabilities that are part of the example's definition.
FIXED_PROBS = {
    ("P1", "B"): {"c": 0.7, "d": 0.2, "f": 0.1},
    ("P2", "A"): {"b": 0.7, "a": 0.3},
    ("P3", "A"): {"b": 0.5, "a": 0.5},
}

# Free parameters; any strictly positive row works (the headline
# probability-one property depends only on the transition structure).
DEFAULT_FREE_PROBS = {
    "A": {"a": 0.3, "b": 0.7},
    "B": {"c": 0.7, "d": 0.2, "f": 0.1},
    "C": {"c": 0.7, "f": 0.3},
    "D": {"d": 0.7, "f": 0.3},
    "E": {"e": 1.0},
}


def _local_actions(s: str) -> tuple[str, ...]:
    return tuple(a for a in ACTIONS if (s, a) in LOCAL_MOVES)


def _local_rows(rng: Optional[np.random.Generator]) -> dict:
    """Per-player, per-local-state action distributions."""
    rows: dict[tuple[str, str], dict[str, float]] = {}
    for player in PLAYERS:
        for s in LOCAL_STATES:
            if (player, s) in FIXED_PROBS:
                rows[(player, s)] = dict(FIXED_PROBS[(player, s)])
                continue
            acts = _local_actions(s)
            if rng is None or len(acts) == 1:
                rows[(player, s)] = dict(DEFAULT_FREE_PROBS[s])
            else:
                weights = rng.uniform(0.05, 1.0, size=len(acts))
                weights /= weights.sum()
                rows[(player, s)] = {a: float(w) for a, w in zip(acts, weights)}
    return rows


def _label(state: str) -> frozenset[str]:
    eating = [c == "E" for c in state]
    if eating.count(True) == 1:
        return frozenset({f"q{eating.index(True) + 1}"})
    if eating.count(True) == 0:
        return frozenset({"q4"})
    return frozenset()


def generate_philosophers(rng: Optional[np.random.Generator] = None) -> Mpts:
    """Build the 125-state model.

    With an rng, the probabilities the example leaves unspecified are
    redrawn as random strictly positive rows; the fixed ones stay put.
    """
    rows = _local_rows(rng)
    states = tuple(
        x1 + x2 + x3
        for x1 in LOCAL_STATES for x2 in LOCAL_STATES for x3 in LOCAL_STATES
    )

    player_dist = {
        player: {x: dict(rows[(player, x[k])]) for x in states}
        for k, player in enumerate(PLAYERS)
    }

    transitions = {}
    for x in states:
        per_player = [_local_actions(c) for c in x]
        for a1 in per_player[0]:
            for a2 in per_player[1]:
                for a3 in per_player[2]:
                    joint = (a1, a2, a3)
                    succ = "".join(LOCAL_MOVES[(c, a)] for c, a in zip(x, joint))
                    transitions[(x, joint)] = succ

    return Mpts(
        players=PLAYERS,
        cooperative=frozenset({"P1", "P2"}),
        states=states,
        actions=ACTIONS,
        player_dist=player_dist,
        transitions=transitions,
        initial="AAA",
        atomic_props=frozenset({"q1", "q2", "q3", "q4"}),
        labels={x: _label(x) for x in states},
    )


# A hand-checked controller for the alliance: both allied philosophers eat
# infinitely often with probability one.  Only the states reachable under
# the controller itself are mapped; the last four rows close the loop for
# the interleavings where philosopher 3 advances during the alliance's
# fork handoff.
REFERENCE_CONTROLLER_ROWS = {
    "AAA": ("b", "b"),
    "BBA": ("c", "d"),
    "BBB": ("f", "f"),
    "BBD": ("f", "f"),
    "DCA": ("d", "f"),
    "DCB": ("d", "f"),
    "BBC": ("f", "f"),
    "ECA": ("e", "c"),
    "BBE": ("f", "f"),
    "ECB": ("e", "c"),
    "AEA": ("a", "e"),
    "AEB": ("a", "e"),
    "AEC": ("a", "e"),
    "AAB": ("b", "b"),
    "AAC": ("a", "a"),
    "AAD": ("a", "a"),
    "AAE": ("b", "b"),
    "ECC": ("e", "c"),
    "ECD": ("e", "c"),
    "AED": ("a", "e"),
    "AEE": ("a", "e"),
}


def reference_controller() -> Controller:
    return Controller(dict(REFERENCE_CONTROLLER_ROWS))
