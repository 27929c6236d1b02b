"""Controller search: enumerate candidates, verify, return the first hit.

Candidates are built by backtracking over the states reachable under the
partial assignment, so choices are only ever made for states that matter;
two controllers differing on unreachable states are the same candidate.
"""

from __future__ import annotations

import json
from collections import deque
from typing import IO, Iterator, Optional

from mptsynth.analysis import probability_of_satisfaction
from mptsynth.automata import ltl_to_dra
from mptsynth.logic import Formula
from mptsynth.model import (
    Controller,
    JointAction,
    ModelError,
    Mpts,
    apply_controller,
    cooperative_joint_actions,
    validate_controller,
)

THRESHOLD_TOL = 1e-9


class CandidateCapError(RuntimeError):
    """Search aborted at the candidate cap without exhausting the space."""

    def __init__(self, cap: int, tried: int, best: float):
        super().__init__(
            f"stopped after {tried} candidates (cap {cap}); "
            f"best probability seen {best:.6f}; the space was not exhausted")
        self.cap = cap
        self.tried = tried
        self.best = best


def _successor_states(model: Mpts, x: str, coop: JointAction) -> tuple[str, ...]:
    coop_choice = dict(zip(model.cooperative_ordered, coop))
    import itertools
    per_player = [
        (coop_choice[i],) if i in model.cooperative else model.enabled_actions(i, x)
        for i in model.players
    ]
    out: list[str] = []
    seen = set()
    for joint in itertools.product(*per_player):
        nxt = model.transitions[(x, joint)]
        if nxt not in seen:
            seen.add(nxt)
            out.append(nxt)
    return tuple(out)


def enumerate_controllers(model: Mpts) -> Iterator[Controller]:
    """All controllers, each total on its own reachable set, in a fixed
    order: states are discovered breadth-first from the initial state and
    candidate cooperative joints are tried in lexicographic action order."""
    options_cache: dict[str, list[JointAction]] = {}
    succ_cache: dict[tuple[str, JointAction], tuple[str, ...]] = {}

    def options(x: str) -> list[JointAction]:
        if x not in options_cache:
            options_cache[x] = cooperative_joint_actions(model, x)
        return options_cache[x]

    def succs(x: str, coop: JointAction) -> tuple[str, ...]:
        key = (x, coop)
        if key not in succ_cache:
            succ_cache[key] = _successor_states(model, x, coop)
        return succ_cache[key]

    assignment: dict[str, JointAction] = {}

    def next_unassigned() -> Optional[str]:
        seen = {model.initial}
        queue = deque([model.initial])
        while queue:
            x = queue.popleft()
            if x not in assignment:
                return x
            for nxt in succs(x, assignment[x]):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return None

    first = next_unassigned()
    if first is None:  # unreachable: the initial state is always unassigned
        return
    stack: list[list] = [[first, -1]]
    while stack:
        top = stack[-1]
        top[1] += 1
        x = top[0]
        opts = options(x)
        if top[1] >= len(opts):
            assignment.pop(x, None)
            stack.pop()
            continue
        assignment[x] = opts[top[1]]
        nxt = next_unassigned()
        if nxt is None:
            yield Controller(dict(assignment))
        else:
            stack.append([nxt, -1])


def verify_controller(model: Mpts, c: Controller, f: Formula) -> float:
    """Probability that the system controlled by c satisfies f."""
    problems = validate_controller(model, c)
    if problems:
        raise ModelError("; ".join(problems))
    return probability_of_satisfaction(apply_controller(model, c), f)


def synthesize(model: Mpts, f: Formula, threshold: float,
               candidate_cap: int = 10**7,
               state_budget: int = 10**6) -> Optional[Controller]:
    """First controller in enumeration order whose controlled system
    satisfies f with probability >= threshold, or None after exhausting
    the candidate space.

    The automaton is translated once and shared across candidates.  Hitting
    the candidate cap raises CandidateCapError rather than returning None,
    so a None answer always means genuine exhaustion.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    dra = ltl_to_dra(f, ap=sorted(model.atomic_props), state_budget=state_budget)
    tried = 0
    best = 0.0
    for c in enumerate_controllers(model):
        if tried >= candidate_cap:
            raise CandidateCapError(candidate_cap, tried, best)
        tried += 1
        p = probability_of_satisfaction(apply_controller(model, c), f, dra=dra)
        best = max(best, p)
        if p >= threshold - THRESHOLD_TOL:
            return c
    return None


def controller_to_json(c: Controller) -> dict:
    return {x: list(joint) for x, joint in c.choices.items()}


def controller_from_json(data: dict) -> Controller:
    if not isinstance(data, dict):
        raise ModelError("controller file must be a JSON object")
    return Controller({x: tuple(joint) for x, joint in data.items()})


def load_controller(fp: IO[str]) -> Controller:
    try:
        return controller_from_json(json.load(fp))
    except json.JSONDecodeError as exc:
        raise ModelError(f"controller file is not valid JSON: {exc}") from exc


def save_controller(c: Controller, fp: IO[str]) -> None:
    json.dump(controller_to_json(c), fp, indent=2)
    fp.write("\n")
