"""Multi-agent probabilistic transition systems, controllers, and path measure.

A model couples per-player action distributions with a joint transition
table.  An action is enabled for a player in a state when its probability
is positive; a joint action is enabled when every component is.  The
transition table must be defined on exactly the enabled pairs, which makes
the joint probabilities sum to one in every state.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping

PROB_TOL = 1e-9

JointAction = tuple[str, ...]


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Mpts:
    players: tuple[str, ...]
    cooperative: frozenset[str]
    states: tuple[str, ...]
    actions: tuple[str, ...]
    player_dist: Mapping[str, Mapping[str, Mapping[str, float]]]
    transitions: Mapping[tuple[str, JointAction], str]
    initial: str
    atomic_props: frozenset[str]
    labels: Mapping[str, frozenset[str]]

    @property
    def adversarial(self) -> tuple[str, ...]:
        return tuple(i for i in self.players if i not in self.cooperative)

    @property
    def cooperative_ordered(self) -> tuple[str, ...]:
        return tuple(i for i in self.players if i in self.cooperative)

    def action_index(self, a: str) -> int:
        return self.actions.index(a)

    def enabled_actions(self, player: str, x: str) -> tuple[str, ...]:
        """Player's positive-probability actions at x, in action order."""
        dist = self.player_dist.get(player, {}).get(x, {})
        return tuple(a for a in self.actions if dist.get(a, 0.0) > 0.0)

    def label(self, x: str) -> frozenset[str]:
        return self.labels.get(x, frozenset())


def _check_known_state(model: Mpts, x: str) -> None:
    if x not in model.states:
        raise ModelError(f"unknown state {x!r}")


def enabled_joint_actions(model: Mpts, x: str) -> list[JointAction]:
    """Joint actions whose every component is enabled at x, in lexicographic
    order of per-player action indices."""
    _check_known_state(model, x)
    per_player = [model.enabled_actions(i, x) for i in model.players]
    return [joint for joint in itertools.product(*per_player)
            if (x, joint) in model.transitions]


def joint_probability(model: Mpts, x: str, a: JointAction) -> float:
    """Probability of the joint action: product over all players."""
    _check_known_state(model, x)
    prob = 1.0
    for i, ai in zip(model.players, a):
        p = model.player_dist.get(i, {}).get(x, {}).get(ai, 0.0)
        if p <= 0.0:
            raise ModelError(f"action {ai!r} of player {i!r} is disabled at {x!r}")
        prob *= p
    if (x, a) not in model.transitions:
        raise ModelError(f"joint action {a!r} has no transition from {x!r}")
    return prob


def cooperative_joint_actions(model: Mpts, x: str) -> list[JointAction]:
    """Enabled cooperative joint actions at x, in lexicographic order."""
    _check_known_state(model, x)
    per_player = [model.enabled_actions(i, x) for i in model.cooperative_ordered]
    return [joint for joint in itertools.product(*per_player)]


def validate(model: Mpts) -> list[str]:
    """Diagnostics for every violated model invariant; empty when valid."""
    diags: list[str] = []
    if not model.cooperative <= set(model.players):
        diags.append("cooperative set contains unknown players: "
                     f"{sorted(model.cooperative - set(model.players))}")
    if model.initial not in model.states:
        diags.append(f"initial state {model.initial!r} not in state set")
    for x, props in model.labels.items():
        if x not in model.states:
            diags.append(f"label entry for unknown state {x!r}")
        extra = set(props) - set(model.atomic_props)
        if extra:
            diags.append(f"label of {x!r} uses undeclared propositions {sorted(extra)}")

    for i in model.players:
        rows = model.player_dist.get(i, {})
        for x in model.states:
            row = rows.get(x, {})
            for a, pr in row.items():
                if a not in model.actions:
                    diags.append(f"unknown action {a!r} in distribution of "
                                 f"(player {i}, {x})")
                if not (0.0 <= pr <= 1.0):
                    diags.append(f"probability {pr} out of range at "
                                 f"(player {i}, {x}, {a})")
            total = sum(row.values())
            if abs(total - 1.0) > PROB_TOL:
                diags.append(f"distribution sum ≠ 1 at (player {i}, {x}): {total}")

    enabled_pairs = set()
    for x in model.states:
        joints = [joint for joint in itertools.product(
            *[model.enabled_actions(i, x) for i in model.players])]
        for joint in joints:
            enabled_pairs.add((x, joint))
        missing = [joint for joint in joints if (x, joint) not in model.transitions]
        if missing:
            diags.append(f"transition undefined for enabled joint action "
                         f"{missing[0]!r} at {x!r}")
        if not joints:
            diags.append(f"terminating state {x!r}: no enabled joint action")

    for (x, joint), nxt in model.transitions.items():
        if x not in model.states:
            diags.append(f"transition from unknown state {x!r}")
        elif (x, joint) not in enabled_pairs:
            diags.append(f"transition for disabled joint action {joint!r} at {x!r}")
        if nxt not in model.states:
            diags.append(f"transition from {x!r} targets unknown state {nxt!r}")
    return diags


@dataclass(frozen=True)
class Controller:
    """Per-state choice of a cooperative joint action; partial maps are
    allowed as long as every state reachable under the controller is mapped."""

    choices: Mapping[str, JointAction]

    def __getitem__(self, x: str) -> JointAction:
        return self.choices[x]

    def __contains__(self, x: str) -> bool:
        return x in self.choices


def validate_controller(model: Mpts, c: Controller) -> list[str]:
    diags = []
    coop = model.cooperative_ordered
    for x, joint in c.choices.items():
        if x not in model.states:
            diags.append(f"controller maps unknown state {x!r}")
            continue
        if len(joint) != len(coop):
            diags.append(f"controller at {x!r} has {len(joint)} actions, "
                         f"expected {len(coop)}")
            continue
        for i, ai in zip(coop, joint):
            if model.player_dist.get(i, {}).get(x, {}).get(ai, 0.0) <= 0.0:
                diags.append(f"controller selects disabled action {ai!r} "
                             f"for player {i} at {x!r}")
    return diags


@dataclass(frozen=True)
class ControlledSystem:
    """Sub-model induced by a controller: the cooperative components are
    pinned to C(x) and the joint probability is the product over the
    adversarial players only."""

    model: Mpts
    controller: Controller
    reachable: tuple[str, ...]

    def enabled_joint_actions(self, x: str) -> list[JointAction]:
        m = self.model
        coop_choice = dict(zip(m.cooperative_ordered, self.controller[x]))
        per_player = [
            (coop_choice[i],) if i in m.cooperative else m.enabled_actions(i, x)
            for i in m.players
        ]
        return [joint for joint in itertools.product(*per_player)]

    def probability(self, x: str, a: JointAction) -> float:
        m = self.model
        prob = 1.0
        for i, ai in zip(m.players, a):
            if i in m.cooperative:
                continue
            prob *= m.player_dist[i][x][ai]
        return prob

    def transition(self, x: str, a: JointAction) -> str:
        return self.model.transitions[(x, a)]

    def label(self, x: str) -> frozenset[str]:
        return self.model.label(x)

    @property
    def initial(self) -> str:
        return self.model.initial


def apply_controller(model: Mpts, c: Controller) -> ControlledSystem:
    """Construct the controlled system, walking the states reachable under c.

    Fails if c leaves a reachable state unmapped or picks a disabled action.
    """
    coop = model.cooperative_ordered
    reachable: list[str] = []
    seen = {model.initial}
    queue = deque([model.initial])
    while queue:
        x = queue.popleft()
        reachable.append(x)
        if x not in c:
            raise ModelError(f"controller undefined at reachable state {x!r}")
        choice = c[x]
        if len(choice) != len(coop):
            raise ModelError(f"controller at {x!r} has {len(choice)} actions, "
                             f"expected {len(coop)}")
        for i, ai in zip(coop, choice):
            if model.player_dist.get(i, {}).get(x, {}).get(ai, 0.0) <= 0.0:
                raise ModelError(f"controller selects disabled action {ai!r} "
                                 f"for player {i} at {x!r}")
        coop_choice = dict(zip(coop, choice))
        per_player = [
            (coop_choice[i],) if i in model.cooperative else model.enabled_actions(i, x)
            for i in model.players
        ]
        for joint in itertools.product(*per_player):
            if (x, joint) not in model.transitions:
                raise ModelError(f"no transition for joint action {joint!r} at {x!r}")
            nxt = model.transitions[(x, joint)]
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return ControlledSystem(model, c, tuple(reachable))


@dataclass(frozen=True)
class FinitePath:
    """Alternating state/joint-action sequence x0 a0 x1 ... a_{n-1} x_n."""

    states: tuple[str, ...]
    actions: tuple[JointAction, ...]

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("a path over n actions needs n+1 states")

    def __len__(self) -> int:
        return len(self.actions)


def cylinder_probability(model: Mpts, h: FinitePath) -> float:
    """Measure of all infinite continuations of h: the product of the joint
    probabilities along it.  The bare initial state has measure 1."""
    if h.states[0] != model.initial:
        raise ModelError(f"path must start at the initial state {model.initial!r}")
    prob = 1.0
    for k, a in enumerate(h.actions):
        x, nxt = h.states[k], h.states[k + 1]
        if model.transitions.get((x, a)) != nxt:
            raise ModelError(f"path step {k} ({x!r}, {a!r}) -> {nxt!r} "
                             "contradicts the transition function")
        prob *= joint_probability(model, x, a)
    return prob


@dataclass(frozen=True)
class MarkovChain:
    """Row-stochastic labeled chain over an arbitrary hashable state type."""

    states: tuple
    initial: object
    probs: Mapping[object, Mapping[object, float]]
    labels: Mapping[object, frozenset[str]] = field(default_factory=dict)

    def successors(self, s):
        return self.probs.get(s, {})


def to_markov_chain(cs: ControlledSystem) -> MarkovChain:
    """Merge parallel joint-action edges by summing their probabilities,
    keeping only the states reachable from the initial one."""
    probs: dict[str, dict[str, float]] = {}
    labels = {}
    for x in cs.reachable:
        row: dict[str, float] = {}
        for a in cs.enabled_joint_actions(x):
            nxt = cs.transition(x, a)
            row[nxt] = row.get(nxt, 0.0) + cs.probability(x, a)
        probs[x] = row
        labels[x] = cs.label(x)
    return MarkovChain(tuple(cs.reachable), cs.initial, probs, labels)


def model_to_json(model: Mpts) -> dict:
    return {
        "players": list(model.players),
        "cooperative": [i for i in model.players if i in model.cooperative],
        "states": list(model.states),
        "actions": list(model.actions),
        "initial": model.initial,
        "atomic_props": sorted(model.atomic_props),
        "labels": {x: sorted(model.label(x)) for x in model.states},
        "dist": {
            i: {x: dict(row) for x, row in model.player_dist.get(i, {}).items()}
            for i in model.players
        },
        "transitions": [
            {"state": x, "joint": list(joint), "next": nxt}
            for (x, joint), nxt in model.transitions.items()
        ],
    }


def model_from_json(data: dict) -> Mpts:
    try:
        transitions = {
            (rec["state"], tuple(rec["joint"])): rec["next"]
            for rec in data["transitions"]
        }
        return Mpts(
            players=tuple(data["players"]),
            cooperative=frozenset(data["cooperative"]),
            states=tuple(data["states"]),
            actions=tuple(data["actions"]),
            player_dist={
                i: {x: {a: float(pr) for a, pr in row.items()}
                    for x, row in per_state.items()}
                for i, per_state in data["dist"].items()
            },
            transitions=transitions,
            initial=data["initial"],
            atomic_props=frozenset(data["atomic_props"]),
            labels={x: frozenset(props) for x, props in data.get("labels", {}).items()},
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ModelError(f"malformed model file: {exc}") from exc


def load_model(fp: IO[str]) -> Mpts:
    try:
        data = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file is not valid JSON: {exc}") from exc
    return model_from_json(data)


def save_model(model: Mpts, fp: IO[str]) -> None:
    json.dump(model_to_json(model), fp, indent=2)
    fp.write("\n")
