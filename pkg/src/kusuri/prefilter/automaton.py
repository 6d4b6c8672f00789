"""Aho-Corasick automaton over token sequences.

Symbols are whole tokens, not characters, so a phrase only matches on
token boundaries.  After construction a scan is a single left-to-right
pass: amortised O(len(tokens) + number of matches), independent of the
number of phrases.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence


class TokenAutomaton:
    def __init__(self, phrases: Iterable[Sequence[str]]):
        self._goto: list[dict[str, int]] = [{}]
        self._fail: list[int] = [0]
        # output[s]: phrases (as tuples) ending at state s, own + via failure chain
        self._out: list[list[tuple[str, ...]]] = [[]]
        for phrase in phrases:
            self._insert(tuple(phrase))
        self._link()

    def __len__(self) -> int:
        """Number of states, the root included."""
        return len(self._goto)

    def _insert(self, phrase: tuple[str, ...]) -> None:
        if not phrase:
            raise ValueError("empty phrase")
        state = 0
        for sym in phrase:
            nxt = self._goto[state].get(sym)
            if nxt is None:
                nxt = len(self._goto)
                self._goto.append({})
                self._fail.append(0)
                self._out.append([])
                self._goto[state][sym] = nxt
            state = nxt
        if phrase not in self._out[state]:
            self._out[state].append(phrase)

    def _link(self) -> None:
        queue = deque(self._goto[0].values())
        while queue:
            state = queue.popleft()
            for sym, child in self._goto[state].items():
                queue.append(child)
                f = self._fail[state]
                while f and sym not in self._goto[f]:
                    f = self._fail[f]
                target = self._goto[f].get(sym, 0)
                self._fail[child] = target if target != child else 0
                self._out[child] = self._out[child] + self._out[self._fail[child]]

    def finditer(self, tokens: Sequence[str]):
        """Yield ``(start, end, phrase)`` for every occurrence, end inclusive."""
        goto, fail, out = self._goto, self._fail, self._out
        state = 0
        for i, sym in enumerate(tokens):
            while state and sym not in goto[state]:
                state = fail[state]
            state = goto[state].get(sym, 0)
            for phrase in out[state]:
                yield i - len(phrase) + 1, i, phrase

    def contains_any(self, tokens: Sequence[str]) -> bool:
        goto, fail, out = self._goto, self._fail, self._out
        state = 0
        for sym in tokens:
            while state and sym not in goto[state]:
                state = fail[state]
            state = goto[state].get(sym, 0)
            if out[state]:
                return True
        return False
