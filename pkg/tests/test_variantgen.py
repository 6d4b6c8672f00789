from functools import lru_cache
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kusuri.prefilter import Lexicon
from kusuri.variantgen import (
    ALL_OPS,
    DELETION,
    INSERTION,
    SUBSTITUTION,
    TRANSPOSITION,
    VariantConfig,
    build_variant_lexicon,
    generate_variants,
)

from oracles import brute_force_variants, distance1_oracle, restricted_edit_distance


@lru_cache(maxsize=None)
def brute(name, ops):
    return frozenset(brute_force_variants(name, ops, SMALL))

SMALL = "abc"
op_subsets = [frozenset(c) for r in range(1, 5) for c in combinations(sorted(ALL_OPS), r)]


def cfg(ops=ALL_OPS, **kw):
    kw.setdefault("min_length", 1)
    return VariantConfig(ops_enabled=frozenset(ops), **kw)


def test_deletion_example():
    assert generate_variants("xanax", cfg({DELETION})) == {"anax", "xnax", "xaax", "xanx", "xana"}


def test_length_filter_example():
    assert generate_variants("abc", cfg({DELETION}, min_length=4)) == set()


def test_substitution_example():
    assert "benadril" in generate_variants("benadryl", cfg({SUBSTITUTION}))


def test_variant_lexicon_examples():
    lex = Lexicon.from_strings(["xanax"])
    assert len(build_variant_lexicon(lex, cfg({DELETION}))) == 5
    assert len(build_variant_lexicon(Lexicon(), cfg({DELETION}))) == 0
    filtered = build_variant_lexicon(lex, cfg({DELETION}, common_words={"xana"}))
    assert len(filtered) == 4 and ("xana",) not in filtered


def test_variant_lexicon_skips_multi_token_and_originals():
    lex = Lexicon.from_strings(["sleep aid", "abcd", "abce"])
    out = build_variant_lexicon(lex, cfg({SUBSTITUTION}))
    assert all(len(p) == 1 for p in out.phrases)
    assert ("abce",) not in out.phrases and ("abcd",) not in out.phrases


@pytest.mark.parametrize("ops", op_subsets, ids=lambda o: "+".join(sorted(o)))
@settings(max_examples=15)
@given(name=st.text(SMALL, min_size=1, max_size=6))
def test_distance1_equals_brute_force(ops, name):
    got = generate_variants(name, cfg(ops, alphabet=SMALL))
    assert got == brute(name, ops)


@pytest.mark.parametrize("name", ["advil", "xanax", "aleve", "midol", "zyrtec", "ambien"])
def test_distance1_full_alphabet(name):
    config = VariantConfig(min_length=4, common_words=frozenset({"alive", "amber"}))
    expected = distance1_oracle(name, ALL_OPS, config.alphabet, min_length=4,
                                common=config.common_words)
    assert generate_variants(name, config) == expected


@settings(max_examples=15)
@given(name=st.text(SMALL, min_size=1, max_size=3))
def test_distance2_is_two_step_reachability(name):
    got = generate_variants(name, cfg(alphabet=SMALL, max_edit_distance=2))
    one = brute(name, ALL_OPS)
    two = set(one)
    for v in one:
        two |= brute(v, ALL_OPS)
    two.discard(name)
    assert got == two


@given(st.text(SMALL, min_size=1, max_size=5), st.sampled_from(op_subsets),
       st.sampled_from(op_subsets))
def test_more_ops_never_fewer_variants(name, a, b):
    small = generate_variants(name, cfg(a, alphabet=SMALL))
    big = generate_variants(name, cfg(a | b, alphabet=SMALL))
    assert small <= big


@given(st.text("abcdefgh", min_size=1, max_size=6), st.sampled_from([1, 2]))
def test_name_excluded_and_within_distance(name, d):
    out = generate_variants(name, cfg(alphabet="abcdefgh", max_edit_distance=d))
    assert name not in out
    if d == 1:
        assert all(restricted_edit_distance(name, v, ALL_OPS) == 1 for v in out)
    else:
        assert all(abs(len(v) - len(name)) <= 2 for v in out)


def test_errors():
    with pytest.raises(ValueError):
        generate_variants("", VariantConfig())
    with pytest.raises(ValueError):
        generate_variants("sleep aid", VariantConfig())
    with pytest.raises(ValueError):
        VariantConfig(max_edit_distance=3)
    with pytest.raises(ValueError):
        VariantConfig(ops_enabled=frozenset({"swap"}))
    assert {INSERTION, TRANSPOSITION} <= ALL_OPS
