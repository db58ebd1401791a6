"""Shared term/knowledge-base generators for the test suite.

A fixed pool of eight atoms (one data value, two asymmetric pairs, one
symmetric key, two secrets) keeps randomly generated knowledge bases at
desk scale.  Seeded ``random.Random`` generators drive the bulk
acceptance counts deterministically; hypothesis strategies drive the
shrinking property tests.
"""

from __future__ import annotations

import random

import hypothesis.strategies as st

from streamsec.terms import AtomKind, AtomTable, EncTerm, SigTerm, TagTerm


def _make_pool():
    table = AtomTable()
    k1, k1_inv = table.asym_pair("K1")
    k2, k2_inv = table.asym_pair("K2")
    sym = table.sym_key("KS")
    atoms = (
        table.data("a"),
        k1,
        k1_inv,
        k2,
        k2_inv,
        sym,
        table.secret("s1"),
        table.secret("s2"),
    )
    return table, atoms


POOL_TABLE, POOL_ATOMS = _make_pool()
POOL_KEYS = tuple(a for a in POOL_ATOMS if a.kind is AtomKind.KEY)


def random_item(rng: random.Random, depth: int):
    roll = rng.random()
    if depth <= 0 or roll < 0.55:
        return rng.choice(POOL_ATOMS)
    if roll < 0.75:
        return EncTerm(rng.choice(POOL_KEYS), random_expression(rng, depth - 1))
    if roll < 0.92:
        return SigTerm(rng.choice(POOL_KEYS), random_expression(rng, depth - 1))
    return TagTerm(
        "rec",
        (rng.choice(POOL_ATOMS), rng.choice(POOL_ATOMS), random_expression(rng, depth - 1)),
    )


def random_expression(rng: random.Random, depth: int = 2, max_len: int = 3):
    return tuple(random_item(rng, depth) for _ in range(rng.randint(0, max_len)))


def random_nonempty_expression(rng: random.Random, depth: int = 2, max_len: int = 3):
    return tuple(random_item(rng, depth) for _ in range(rng.randint(1, max_len)))


def random_kb_terms(rng: random.Random, max_terms: int = 6, depth: int = 2):
    count = rng.randint(1, max_terms)
    return frozenset(random_nonempty_expression(rng, depth) for _ in range(count))


atoms_st = st.sampled_from(POOL_ATOMS)
keys_st = st.sampled_from(POOL_KEYS)

expressions_st = st.recursive(
    st.lists(atoms_st, max_size=3).map(tuple),
    lambda inner: st.lists(
        st.one_of(
            atoms_st,
            st.builds(EncTerm, keys_st, inner),
            st.builds(SigTerm, keys_st, inner),
        ),
        max_size=3,
    ).map(tuple),
    max_leaves=8,
)

kb_terms_st = st.frozensets(expressions_st.filter(lambda e: len(e) > 0), min_size=1, max_size=6)
