from __future__ import annotations

import hypothesis.strategies as st

from mptsynth.logic import (
    Always,
    And,
    Atom,
    Eventually,
    Iff,
    Implies,
    LassoWord,
    Next,
    Not,
    Or,
    TrueConst,
    Until,
)

AP3 = ("p", "q", "r")


def formulas(ap=AP3, max_depth=5):
    leaves = st.one_of(
        st.just(TrueConst()),
        st.sampled_from([Atom(name) for name in ap]),
    )

    def extend(children):
        unary = st.builds(
            lambda op, a: op(a),
            st.sampled_from([Not, Next, Eventually, Always]),
            children,
        )
        binary = st.builds(
            lambda op, a, b: op(a, b),
            st.sampled_from([And, Or, Implies, Iff, Until]),
            children,
            children,
        )
        return st.one_of(unary, binary)

    return st.recursive(leaves, extend, max_leaves=2 ** max_depth)


def letters(ap=AP3):
    return st.frozensets(st.sampled_from(list(ap)))


def lassos(ap=AP3, max_prefix=6, max_cycle=6):
    return st.builds(
        LassoWord,
        st.lists(letters(ap), max_size=max_prefix).map(tuple),
        st.lists(letters(ap), min_size=1, max_size=max_cycle).map(tuple),
    )
