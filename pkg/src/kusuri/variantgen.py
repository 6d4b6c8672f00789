"""Misspelling variants of drug names by exhaustive edit operations.

A variant is any string reachable from the name by at most
``max_edit_distance`` enabled edit operations, with inserted and
substituted characters drawn from ``alphabet``.  Variants that are too
short, that equal the name, or that are common words are dropped.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

from .prefilter.lexicon import Lexicon

DELETION = "deletion"
INSERTION = "insertion"
SUBSTITUTION = "substitution"
TRANSPOSITION = "adjacent_transposition"
ALL_OPS = frozenset({DELETION, INSERTION, SUBSTITUTION, TRANSPOSITION})
DEFAULT_ALPHABET = string.ascii_lowercase + string.digits


@dataclass(frozen=True)
class VariantConfig:
    max_edit_distance: int = 1
    min_length: int = 4
    ops_enabled: frozenset = ALL_OPS
    common_words: frozenset = field(default_factory=frozenset)
    alphabet: str = DEFAULT_ALPHABET

    def __post_init__(self):
        if self.max_edit_distance not in (1, 2):
            raise ValueError("max_edit_distance must be 1 or 2")
        if self.min_length < 1:
            raise ValueError("min_length must be >= 1")
        unknown = set(self.ops_enabled) - ALL_OPS
        if unknown:
            raise ValueError(f"unknown edit operations: {sorted(unknown)}")
        object.__setattr__(self, "ops_enabled", frozenset(self.ops_enabled))
        object.__setattr__(self, "common_words", frozenset(self.common_words))


def _edits1(word: str, ops: frozenset, alphabet: str) -> set[str]:
    splits = [(word[:i], word[i:]) for i in range(len(word) + 1)]
    out: set[str] = set()
    if DELETION in ops:
        out.update(a + b[1:] for a, b in splits if b)
    if TRANSPOSITION in ops:
        out.update(a + b[1] + b[0] + b[2:] for a, b in splits if len(b) > 1)
    if SUBSTITUTION in ops:
        out.update(a + c + b[1:] for a, b in splits if b for c in alphabet)
    if INSERTION in ops:
        out.update(a + c + b for a, b in splits for c in alphabet)
    return out


def generate_variants(name: str, config: VariantConfig = VariantConfig()) -> set[str]:
    if not name:
        raise ValueError("empty name")
    if any(c.isspace() for c in name):
        raise ValueError(f"name must be a single token, got {name!r}")
    reached = {name}
    frontier = {name}
    for _ in range(config.max_edit_distance):
        frontier = {v for w in frontier for v in _edits1(w, config.ops_enabled, config.alphabet)}
        frontier -= reached
        reached |= frontier
    reached.discard(name)
    return {v for v in reached
            if len(v) >= config.min_length and v not in config.common_words}


def build_variant_lexicon(lexicon: Lexicon, config: VariantConfig = VariantConfig()) -> Lexicon:
    """Variants of every single-token phrase; multi-token phrases contribute none."""
    variants: set[tuple[str, ...]] = set()
    for phrase in lexicon.phrases:
        if len(phrase) == 1:
            variants.update((v,) for v in generate_variants(phrase[0], config))
    variants -= lexicon.phrases
    return Lexicon(frozenset(variants), source=f"variants of {lexicon.source}".strip(),
                   fold_plurals=lexicon.fold_plurals)
