"""Pattern classifier over a restricted regular-expression dialect.

Accepted constructs: literals, ``.``, character classes ``[...]`` (ranges
and negation allowed), alternation ``|``, grouping ``(...)``, quantifiers
``* + ? {m} {m,n}``, and the escapes ``\\b \\w \\s`` plus escaped
metacharacters.  Anchors, backreferences, lookaround, lazy quantifiers and
every ``(?...)`` extension are rejected.  Validated patterns are compiled
with ASCII semantics for ``\\w``/``\\b`` so behaviour does not depend on
the regex engine's Unicode tables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from ..textcore import Tweet

_META = set(".[](){}|*+?\\^$")
_CLASS_ESCAPES = {"w", "s"}
_ESCAPABLE = _META | set("-/ #'\"&~,:;<>=!@%")


class PatternError(ValueError):
    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        self.msg = message
        self.line = line
        self.offset = offset
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"col {offset + 1}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class _Validator:
    def __init__(self, text: str):
        self.s = text
        self.i = 0

    def fail(self, msg: str):
        raise PatternError(msg, offset=self.i)

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else None

    def run(self):
        if not self.s:
            self.fail("empty pattern")
        self.alternation()
        if self.i < len(self.s):
            self.fail(f"unbalanced {self.s[self.i]!r}")

    def alternation(self):
        self.concat()
        while self.peek() == "|":
            self.i += 1
            self.concat()

    def concat(self):
        while self.peek() not in (None, "|", ")"):
            self.atom()
            self.quantifier()

    def atom(self):
        c = self.peek()
        if c == "(":
            if self.s.startswith("(?", self.i):
                self.fail("'(?' extensions (lookaround, non-capturing, flags) are not supported")
            self.i += 1
            self.alternation()
            if self.peek() != ")":
                self.fail("missing ')'")
            self.i += 1
        elif c == "[":
            self.char_class()
        elif c == "\\":
            self.escape(in_class=False)
        elif c in ("^", "$"):
            self.fail(f"anchor {c!r} is not supported")
        elif c in ("*", "+", "?", "{"):
            self.fail(f"quantifier {c!r} without a target")
        elif c in ("]", "}"):
            self.fail(f"unescaped {c!r}")
        else:
            self.i += 1

    def escape(self, in_class: bool):
        nxt = self.s[self.i + 1] if self.i + 1 < len(self.s) else None
        if nxt is None:
            self.fail("dangling backslash")
        if nxt.isdigit():
            self.fail(f"backreference '\\{nxt}' is not supported")
        allowed = _CLASS_ESCAPES if in_class else _CLASS_ESCAPES | {"b"}
        if nxt not in allowed and nxt not in _ESCAPABLE:
            self.fail(f"escape '\\{nxt}' is not supported")
        self.i += 2

    def char_class(self):
        self.i += 1
        if self.peek() == "^":
            self.i += 1
        first = True
        while True:
            c = self.peek()
            if c is None:
                self.fail("missing ']'")
            if c == "]" and not first:
                self.i += 1
                return
            if c == "\\":
                self.escape(in_class=True)
            elif c == "[":
                self.fail("nested '[' in character class")
            else:
                self.i += 1
            first = False

    def quantifier(self):
        c = self.peek()
        if c in ("*", "+", "?"):
            self.i += 1
        elif c == "{":
            m = re.compile(r"\{(\d+)(?:,(\d+))?\}").match(self.s, self.i)
            if not m:
                self.fail("malformed repetition, expected {m} or {m,n}")
            lo, hi = int(m.group(1)), m.group(2)
            if hi is not None and int(hi) < lo:
                self.fail("repetition {m,n} with n < m")
            self.i = m.end()
        else:
            return
        if self.peek() in ("*", "+", "?", "{"):
            self.fail("stacked or lazy quantifiers are not supported")


def validate_pattern(text: str) -> None:
    """Raise PatternError if ``text`` leaves the restricted dialect."""
    _Validator(text).run()


def compile_pattern(text: str) -> re.Pattern:
    validate_pattern(text)
    try:
        return re.compile(text, re.ASCII | re.IGNORECASE)
    except re.error as exc:  # e.g. reversed class range [z-a]
        raise PatternError(exc.msg, offset=exc.pos) from None


@dataclass(frozen=True)
class CompiledPattern:
    source: str
    line: int
    regex: re.Pattern = field(compare=False, repr=False)

    def search(self, text: str) -> bool:
        return self.regex.search(text) is not None


@dataclass(frozen=True)
class PatternSet:
    patterns: tuple[CompiledPattern, ...] = ()

    @classmethod
    def from_strings(cls, sources: Iterable[str]) -> "PatternSet":
        compiled = []
        for lineno, src in enumerate(sources, start=1):
            try:
                compiled.append(CompiledPattern(src, lineno, compile_pattern(src)))
            except PatternError as exc:
                raise PatternError(exc.msg, line=lineno, offset=exc.offset) from None
        return cls(tuple(compiled))

    def __len__(self) -> int:
        return len(self.patterns)

    def matching(self, text: str) -> list[CompiledPattern]:
        return [p for p in self.patterns if p.search(text)]


def compile_patterns(stream: TextIO) -> PatternSet:
    """One pattern per line; whitespace-only lines are skipped.

    Lines are not comment-stripped because ``#`` is a literal (hashtags).
    """
    compiled = []
    for lineno, line in enumerate(stream, start=1):
        src = line.rstrip("\r\n")
        if not src.strip():
            continue
        try:
            compiled.append(CompiledPattern(src, lineno, compile_pattern(src)))
        except PatternError as exc:
            raise PatternError(f"{exc.msg} in {src!r}", line=lineno, offset=exc.offset) from None
    return PatternSet(tuple(compiled))


def pattern_classify(pattern_set: PatternSet, tweet: Tweet) -> bool:
    return any(p.search(tweet.norm) for p in pattern_set.patterns)
