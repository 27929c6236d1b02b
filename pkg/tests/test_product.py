import random

import pytest

from generators import random_controller, random_mpts

from mptsynth.automata import Dra, dra_accepts_lasso, ltl_to_dra
from mptsynth.logic import LassoWord, parse_ltl
from mptsynth.model import Controller, Mpts, apply_controller
from mptsynth.philosophers import generate_philosophers, reference_controller
from mptsynth.product import build_product, product_chain, product_to_dot


def self_loop_system(label=("p",)):
    m = Mpts(
        players=("P1",), cooperative=frozenset(), states=("x",),
        actions=("u",), player_dist={"P1": {"x": {"u": 1.0}}},
        transitions={("x", ("u",)): "x"}, initial="x",
        atomic_props=frozenset({"p"}),
        labels={"x": frozenset(label)},
    )
    return apply_controller(m, Controller({"x": ()}))


# Hand-built automaton for "always p": state 0 survives as long as p holds,
# state 1 is the rejecting sink.
ALWAYS_P = Dra(
    ap=("p",),
    initial=0,
    transitions=((1, 0), (1, 1)),
    pairs=((frozenset({1}), frozenset({0})),),
)


class TestBuildProduct:
    def test_self_loop_stays_in_accepting_state(self):
        g = build_product(self_loop_system(), ALWAYS_P)
        assert g.states == (("x", 0),)
        ((prob, succ),) = g.edges[("x", 0)].values()
        assert prob == 1.0 and succ == ("x", 0)
        L, K = g.pairs[0]
        assert ("x", 0) in K and ("x", 0) not in L

    def test_hand_automaton_matches_translation(self):
        f = parse_ltl("G p")
        translated = ltl_to_dra(f, ap=["p"])
        rng = random.Random(0)
        for _ in range(200):
            prefix = tuple(frozenset({"p"}) if rng.random() < 0.5 else frozenset()
                           for _ in range(rng.randint(0, 4)))
            cycle = tuple(frozenset({"p"}) if rng.random() < 0.5 else frozenset()
                          for _ in range(rng.randint(1, 4)))
            w = LassoWord(prefix, cycle)
            assert dra_accepts_lasso(ALWAYS_P, w) == dra_accepts_lasso(translated, w)

    def test_philosophers_rows_sum_to_one(self):
        phil = generate_philosophers()
        cs = apply_controller(phil, reference_controller())
        dra = ltl_to_dra(parse_ltl("G(F q1 & F q2)"), ap=sorted(phil.atomic_props))
        g = build_product(cs, dra)
        for s in g.states:
            total = sum(prob for prob, _ in g.edges[s].values())
            assert abs(total - 1.0) < 1e-9

    def test_size_bound(self):
        phil = generate_philosophers()
        cs = apply_controller(phil, reference_controller())
        dra = ltl_to_dra(parse_ltl("G(F q1 & F q2)"), ap=sorted(phil.atomic_props))
        g = build_product(cs, dra)
        assert len(g.states) <= len(cs.reachable) * dra.num_states

    def test_ap_mismatch_lists_difference(self):
        cs = self_loop_system()
        dra = ltl_to_dra(parse_ltl("G q"), ap=["q"])
        with pytest.raises(ValueError, match="'p'.*'q'|'q'.*'p'"):
            build_product(cs, dra)

    def test_projection_onto_controlled_system(self):
        rng = random.Random(21)
        for _ in range(20):
            m = random_mpts(rng)
            cs = apply_controller(m, random_controller(rng, m))
            dra = ltl_to_dra(parse_ltl("F p"), ap=sorted(m.atomic_props))
            g = build_product(cs, dra)
            s = g.initial
            for _ in range(8):
                a, (prob, succ) = rng.choice(sorted(g.edges[s].items()))
                x = s[0]
                assert a in cs.enabled_joint_actions(x)
                assert abs(prob - cs.probability(x, a)) < 1e-12
                assert succ[0] == cs.transition(x, a)
                s = succ

    def test_deterministic_lift(self):
        rng = random.Random(22)
        for _ in range(10):
            m = random_mpts(rng)
            cs = apply_controller(m, random_controller(rng, m))
            dra = ltl_to_dra(parse_ltl("G p"), ap=sorted(m.atomic_props))
            g = build_product(cs, dra)
            for s in g.states:
                # one entry per joint action: a second edge with the same
                # action from the same state cannot exist
                assert len(g.edges[s]) == len(set(g.edges[s]))
                q_targets = {succ[1] for _, succ in g.edges[s].values()}
                assert len(q_targets) == 1

    def test_acceptance_transfer_on_sampled_lassos(self):
        rng = random.Random(23)
        for _ in range(30):
            m = random_mpts(rng, max_states=4)
            cs = apply_controller(m, random_controller(rng, m))
            dra = ltl_to_dra(parse_ltl("G F p"), ap=sorted(m.atomic_props))
            g = build_product(cs, dra)

            # random walk until a product state repeats: a lasso run
            walk = [g.initial]
            first_index = {g.initial: 0}
            while True:
                s = walk[-1]
                _, (_, succ) = rng.choice(sorted(g.edges[s].items()))
                if succ in first_index:
                    start = first_index[succ]
                    break
                first_index[succ] = len(walk)
                walk.append(succ)

            inf = set(walk[start:])
            rabin_holds = any(not (inf & L) and (inf & K) for L, K in g.pairs)

            word = LassoWord(
                tuple(cs.label(s[0]) for s in walk[:start]),
                tuple(cs.label(s[0]) for s in walk[start:]),
            )
            assert rabin_holds == dra_accepts_lasso(dra, word)


class TestChainAndDot:
    def test_chain_merges_parallel_edges(self):
        phil = generate_philosophers()
        cs = apply_controller(phil, reference_controller())
        dra = ltl_to_dra(parse_ltl("true"), ap=sorted(phil.atomic_props))
        g = build_product(cs, dra)
        chain = product_chain(g)
        for s in chain.states:
            assert abs(sum(chain.successors(s).values()) - 1.0) < 1e-9

    def test_dot_output_mentions_pairs(self):
        g = build_product(self_loop_system(), ALWAYS_P)
        dot = product_to_dot(g, accepting=frozenset(g.states))
        assert dot.startswith("digraph")
        assert "K0" in dot and "palegreen" in dot
