"""Drug-name lexicons and token-boundary phrase matching."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

from ..textcore import Tweet, normalize, tokenize
from .automaton import TokenAutomaton

log = logging.getLogger(__name__)

MAX_PHRASE_TOKENS = 5


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class MatchSpan:
    start_token: int
    end_token: int
    phrase: tuple[str, ...]


def phrase_of(text: str) -> tuple[str, ...]:
    """Normalize and tokenize a lexicon entry into a token tuple."""
    return tuple(t.text for t in tokenize(normalize(text)))


def fold_plural(token: str) -> str:
    return token[:-1] if len(token) > 1 and token.endswith("s") else token


@dataclass(frozen=True)
class Lexicon:
    """Immutable set of normalized phrases.

    ``fold_plurals`` strips one trailing ``s`` from phrase and tweet tokens
    before lookup; it trades precision for recall and is off by default.
    """

    phrases: frozenset = field(default_factory=frozenset)
    source: str = ""
    fold_plurals: bool = False

    def __post_init__(self):
        for p in self.phrases:
            if not p or not isinstance(p, tuple):
                raise LexiconError(f"invalid phrase {p!r}")

    @classmethod
    def from_strings(cls, entries: Iterable[str], source: str = "",
                     fold_plurals: bool = False) -> "Lexicon":
        phrases = set()
        for entry in entries:
            p = phrase_of(entry)
            if p:
                phrases.add(p)
        return cls(frozenset(phrases), source, fold_plurals)

    def __len__(self) -> int:
        return len(self.phrases)

    def __contains__(self, phrase) -> bool:
        if isinstance(phrase, str):
            phrase = phrase_of(phrase)
        return tuple(phrase) in self.phrases

    def _key(self, tokens):
        return [fold_plural(t) for t in tokens] if self.fold_plurals else list(tokens)

    @cached_property
    def automaton(self) -> TokenAutomaton:
        return TokenAutomaton(sorted(tuple(self._key(p)) for p in self.phrases))

    def sorted_phrases(self) -> list[tuple[str, ...]]:
        return sorted(self.phrases)

    def find(self, tokens) -> list[MatchSpan]:
        tokens = list(tokens)
        spans = [MatchSpan(s, e, tuple(tokens[s:e + 1]))
                 for s, e, _ in self.automaton.finditer(self._key(tokens))]
        spans.sort(key=lambda m: (m.start_token, m.end_token))
        return spans

    def matches(self, tokens) -> bool:
        return self.automaton.contains_any(self._key(tokens))


def read_phrase_lines(stream: TextIO) -> list[str]:
    entries = []
    for line in stream:
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return entries


def load_lexicon(stream: TextIO, source: str = "", fold_plurals: bool = False) -> Lexicon:
    entries = read_phrase_lines(stream)
    if not entries:
        raise LexiconError("empty lexicon")
    phrases = set()
    for entry in entries:
        p = phrase_of(entry)
        if not p:
            continue
        if len(p) > MAX_PHRASE_TOKENS:
            log.warning("skipping lexicon phrase longer than %d tokens: %r",
                        MAX_PHRASE_TOKENS, entry)
            continue
        phrases.add(p)
    if not phrases:
        raise LexiconError("empty lexicon")
    return Lexicon(frozenset(phrases), source, fold_plurals)


def write_lexicon(lexicon: Lexicon, stream: TextIO, header: str | None = None) -> None:
    if header:
        for line in header.splitlines():
            stream.write(f"# {line}\n")
    for phrase in lexicon.sorted_phrases():
        stream.write(" ".join(phrase) + "\n")


def lexicon_classify(lexicon: Lexicon, tweet: Tweet) -> tuple[bool, list[MatchSpan]]:
    spans = lexicon.find(tweet.words)
    return bool(spans), spans


def variant_classify(variants: Lexicon, tweet: Tweet) -> tuple[bool, list[MatchSpan]]:
    # same contract as the lexicon classifier, over the generated variants
    return lexicon_classify(variants, tweet)
