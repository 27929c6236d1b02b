"""Controller synthesis for multi-agent probabilistic discrete-event systems.

Pipeline: parse an LTL specification, translate it to a deterministic Rabin
automaton, enumerate controllers of the plant model, build the product of
each controlled system with the automaton, and model-check reachability of
the accepting components until a controller meets the probability threshold.
"""

from mptsynth.logic import Formula, LassoWord, parse_ltl
from mptsynth.model import Controller, ControlledSystem, Mpts, apply_controller
from mptsynth.automata import Dra, ltl_to_dra
from mptsynth.product import ProductAutomaton, build_product
from mptsynth.analysis import probability_of_satisfaction
from mptsynth.synthesis import synthesize, verify_controller

__all__ = [
    "Formula",
    "LassoWord",
    "parse_ltl",
    "Mpts",
    "Controller",
    "ControlledSystem",
    "apply_controller",
    "Dra",
    "ltl_to_dra",
    "ProductAutomaton",
    "build_product",
    "probability_of_satisfaction",
    "synthesize",
    "verify_controller",
]
