"""Symbol space, words, and subshifts of finite type.

Words over the alphabet {0, ..., kappa-1} are plain tuples of ints.  A
compact shift-forward-invariant set K is described by a finite list of
forbidden factor words (a subshift of finite type); the full shift is the
spec with no forbidden words.  Compilation produces a pruned de Bruijn-style
automaton whose paths enumerate exactly the level sets

    K_n = { first n letters of some infinite allowed sequence },

i.e. words that avoid every forbidden factor *and* extend to an infinite
allowed sequence.  Dead states (no outgoing transition) are pruned to a
fixpoint, so every surviving word is infinitely extendable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import BadSubshift, EmptySubshift, LetterOutOfRange

Word = tuple[int, ...]


def contains_factor(word: Sequence[int], factor: Sequence[int]) -> bool:
    """True iff `factor` occurs as a contiguous block of `word`."""
    lf = len(factor)
    if lf == 0:
        return True
    f = tuple(factor)
    return any(tuple(word[i:i + lf]) == f for i in range(len(word) - lf + 1))


def _validate_word(w: Sequence[int], kappa: int) -> Word:
    word = tuple(int(a) for a in w)
    for a in word:
        if not 0 <= a < kappa:
            raise LetterOutOfRange(f"letter {a} outside [0, {kappa})")
    return word


@dataclass(frozen=True)
class SubshiftSpec:
    """Finite description of a subshift of finite type.

    Forbidden words must have length >= 2; a forbidden single letter would
    just shrink the alphabet.  On construction the list is deduplicated and
    any forbidden word containing another as a factor is dropped (the
    shorter one already excludes it).
    """

    kappa: int
    forbidden_words: tuple[Word, ...] = ()

    def __post_init__(self):
        if self.kappa < 1:
            raise BadSubshift("alphabet size must be >= 1")
        seen: list[Word] = []
        for fw in self.forbidden_words:
            w = _validate_word(fw, self.kappa)
            if len(w) < 2:
                raise BadSubshift(f"forbidden word {w} shorter than 2 letters")
            if w not in seen:
                seen.append(w)
        normalized = tuple(
            w for w in seen
            if not any(u != w and contains_factor(w, u) for u in seen)
        )
        object.__setattr__(self, "forbidden_words", normalized)


def full_shift(kappa: int) -> "SubshiftAutomaton":
    """Automaton of the unconstrained shift on kappa letters."""
    return compile_subshift(SubshiftSpec(kappa))


@dataclass(frozen=True, eq=False)
class SubshiftAutomaton:
    """Compiled word enumerator for a subshift of finite type.

    states[i] is the i-th live memory word (length `memory`, sorted
    lexicographically); transitions[i, a] is the index of the state reached
    by appending letter a, or -1 when the extended word is disallowed or
    dead.  Immutable after compilation; queries are read-only.
    """

    spec: SubshiftSpec
    memory: int
    states: tuple[Word, ...]
    transitions: np.ndarray
    _state_index: dict = field(repr=False)
    _prefixes: tuple[frozenset, ...] = field(repr=False)

    @property
    def kappa(self) -> int:
        return self.spec.kappa

    def state_of(self, w: Sequence[int]) -> int:
        """Index of the live state with memory word w, or -1."""
        return self._state_index.get(tuple(w), -1)

    def is_allowed(self, w: Sequence[int]) -> bool:
        """True iff w lies in K_{len(w)} (extendable prefix of K)."""
        word = _validate_word(w, self.kappa)
        m = self.memory
        if len(word) <= m:
            return word in self._prefixes[len(word)]
        s = self.state_of(word[:m])
        if s < 0:
            return False
        for a in word[m:]:
            s = int(self.transitions[s, a])
            if s < 0:
                return False
        return True

    def count(self, n: int) -> int:
        """Exact #K_n via dynamic programming (Python big ints)."""
        if n < 0:
            raise ValueError("depth must be >= 0")
        if n <= self.memory:
            return len(self._prefixes[n])
        paths = [1] * len(self.states)
        trans = self.transitions
        for _ in range(n - self.memory):
            paths = [
                sum(paths[t] for t in trans[s] if t >= 0)
                for s in range(len(self.states))
            ]
        return sum(paths)

    def words(self, n: int) -> Iterator[Word]:
        """Yield K_n in lexicographic order, duplicate-free."""
        if n < 0:
            raise ValueError("depth must be >= 0")
        m = self.memory
        if n <= m:
            yield from sorted(self._prefixes[n])
            return
        trans = self.transitions
        kappa = self.kappa

        def extend(state: int, tail: list[int], remaining: int):
            if remaining == 0:
                yield tuple(tail)
                return
            for a in range(kappa):
                t = int(trans[state, a])
                if t >= 0:
                    tail.append(a)
                    yield from extend(t, tail, remaining - 1)
                    tail.pop()

        for i, sw in enumerate(self.states):
            yield from (sw + suffix for suffix in extend(i, [], n - m))

    def least_tail(self, w: Sequence[int], length: int) -> Word:
        """First `length` letters of the lexicographically least infinite
        continuation of w inside K."""
        word = _validate_word(w, self.kappa)
        if not self.is_allowed(word):
            raise BadSubshift(f"word {word} not in K")
        m = self.memory
        if len(word) < m:
            # extend w to a full memory word first, smallest completion
            stem = min(s for s in self.states if s[:len(word)] == word)
            head = stem[len(word):]
            word = stem
        else:
            head = ()
            word = word[-m:] if m > 0 else ()
        tail = list(head)
        s = self.state_of(word)
        while len(tail) < length:
            for a in range(self.kappa):
                t = int(self.transitions[s, a])
                if t >= 0:
                    tail.append(a)
                    s = t
                    break
        return tuple(tail[:length])


def compile_subshift(spec: SubshiftSpec) -> SubshiftAutomaton:
    """Build the pruned automaton realizing the level sets K_n.

    Raises EmptySubshift when dead-state pruning removes every state,
    i.e. the forbidden words leave no infinite sequence.
    """
    kappa = spec.kappa
    forb = spec.forbidden_words
    memory = max(1, max((len(f) for f in forb), default=2) - 1)

    def clean(w: Word) -> bool:
        return not any(contains_factor(w, f) for f in forb)

    def suffix_ok(w: Word) -> bool:
        # w was clean before its last letter; only suffix factors are new
        return not any(len(f) <= len(w) and w[-len(f):] == f for f in forb)

    states = [w for w in _all_words(kappa, memory) if clean(w)]
    alive = set(states)
    # transition targets before pruning
    succ = {
        w: {a: w[1:] + (a,) for a in range(kappa)
            if suffix_ok(w + (a,)) and w[1:] + (a,) in alive}
        for w in states
    }
    changed = True
    while changed:
        changed = False
        for w in list(alive):
            succ[w] = {a: v for a, v in succ[w].items() if v in alive}
            if not succ[w]:
                alive.discard(w)
                changed = True
    if not alive:
        raise EmptySubshift(
            f"forbidden words {forb} admit no infinite sequence")

    live = tuple(sorted(alive))
    index = {w: i for i, w in enumerate(live)}
    trans = np.full((len(live), kappa), -1, dtype=np.int64)
    for w in live:
        for a, v in succ[w].items():
            trans[index[w], a] = index[v]
    prefixes = tuple(
        frozenset(w[:k] for w in live) for k in range(memory + 1)
    )
    return SubshiftAutomaton(spec, memory, live, trans, index, prefixes)


def _all_words(kappa: int, n: int) -> Iterator[Word]:
    if n == 0:
        yield ()
        return
    for w in _all_words(kappa, n - 1):
        for a in range(kappa):
            yield w + (a,)


def words(automaton: SubshiftAutomaton, n: int) -> Iterator[Word]:
    """K_n as a lexicographic stream (module-level alias)."""
    return automaton.words(n)


def count(automaton: SubshiftAutomaton, n: int) -> int:
    """#K_n without materializing the stream."""
    return automaton.count(n)


def is_allowed(automaton: SubshiftAutomaton, w: Sequence[int]) -> bool:
    """Membership of w in K_{len(w)}."""
    return automaton.is_allowed(w)
