"""Module-1 lexical classifiers: lexicon, spelling variants and patterns."""

from .automaton import TokenAutomaton
from .lexicon import (
    Lexicon,
    LexiconError,
    MatchSpan,
    lexicon_classify,
    load_lexicon,
    variant_classify,
    write_lexicon,
)
from .mining import mine_context_ngrams
from .patterns import PatternError, PatternSet, compile_patterns, pattern_classify
from .verdict import FilterVerdict, run_filters, run_filters_batch

__all__ = [
    "FilterVerdict",
    "Lexicon",
    "LexiconError",
    "MatchSpan",
    "PatternError",
    "PatternSet",
    "TokenAutomaton",
    "compile_patterns",
    "lexicon_classify",
    "load_lexicon",
    "mine_context_ngrams",
    "pattern_classify",
    "run_filters",
    "run_filters_batch",
    "variant_classify",
    "write_lexicon",
]
