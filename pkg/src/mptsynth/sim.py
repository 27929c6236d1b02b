"""Monte Carlo estimation of the satisfaction probability.

Runs of the product chain are sampled until they enter a bottom SCC; the
component's Rabin status then decides the run, since almost every run
entering a bottom component visits all of its states forever after.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mptsynth.analysis import bottom_sccs
from mptsynth.product import ProductAutomaton, product_chain

GENERATOR_NAME = "numpy-pcg64"


@dataclass(frozen=True)
class SimulationResult:
    estimate: float
    std_error: float
    runs: int
    censored: int
    generator: str = GENERATOR_NAME


def estimate_probability(g: ProductAutomaton, runs: int, seed: int,
                         step_cap: int = 10**6) -> SimulationResult:
    """Sampled fraction of runs that end in an accepting bottom component.

    Deterministic for fixed (g, runs, seed); runs that exceed the step cap
    before entering a bottom component are counted as censored (and not as
    accepting).
    """
    if runs < 1:
        raise ValueError("need at least one run")

    accepting_bscc: dict = {}
    for bscc in bottom_sccs(g):
        good = any(not (bscc & L) and (bscc & K) for L, K in g.pairs)
        for s in bscc:
            accepting_bscc[s] = good

    chain = product_chain(g)
    successors = {}
    cumulative = {}
    for s in chain.states:
        row = chain.successors(s)
        succ = list(row)
        weights = np.array([row[t] for t in succ], dtype=float)
        successors[s] = succ
        cumulative[s] = np.cumsum(weights)

    rng = np.random.Generator(np.random.PCG64(seed))
    accepted = 0
    censored = 0
    for _ in range(runs):
        state = g.initial
        for _ in range(step_cap):
            if state in accepting_bscc:
                accepted += accepting_bscc[state]
                break
            u = rng.random() * cumulative[state][-1]
            state = successors[state][int(np.searchsorted(cumulative[state], u,
                                                          side="right"))]
        else:
            censored += 1

    estimate = accepted / runs
    std_error = float(np.sqrt(estimate * (1.0 - estimate) / runs))
    return SimulationResult(estimate, std_error, runs, censored)
