"""Reduced words in a free group and their conjugacy classes.

Letters are signed generator indices: ``+i`` is the i-th generator and ``-i``
its inverse (``i >= 1``). A word is a tuple of letters, applied left to right
as a matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

GroupWord = tuple[int, ...]


def letters(k: int) -> list[int]:
    """All 2k letters in canonical order +1, -1, +2, -2, ..."""
    out = []
    for i in range(1, k + 1):
        out += [i, -i]
    return out


def letter_key(x: int) -> int:
    return 2 * (abs(x) - 1) + (0 if x > 0 else 1)


def is_reduced(w: GroupWord) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def is_cyclically_reduced(w: GroupWord) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[0] != -w[-1])


def invert(w: GroupWord) -> GroupWord:
    return tuple(-x for x in reversed(w))


def free_reduce(w) -> GroupWord:
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(w) -> GroupWord:
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


def _keys(w: GroupWord) -> tuple[int, ...]:
    return tuple(letter_key(x) for x in w)


def canonical_form(w) -> GroupWord:
    """Representative of the unoriented conjugacy class of ``w``.

    The word is cyclically reduced first, then the lexicographic minimum
    (in the order +1 < -1 < +2 < ...) over all rotations of it and of its
    inverse is returned.
    """
    w = cyclic_reduce(w)
    if not w:
        return w
    best = None
    best_key = None
    for cand in (w, invert(w)):
        n = len(cand)
        for r in range(n):
            rot = cand[r:] + cand[:r]
            key = _keys(rot)
            if best_key is None or key < best_key:
                best, best_key = rot, key
    return best


def is_proper_power(w: GroupWord) -> bool:
    n = len(w)
    return any(n % p == 0 and w[p:] + w[:p] == w for p in range(1, n))


@dataclass(frozen=True)
class ConjClass:
    canonical: GroupWord
    primitive: bool

    @property
    def length(self) -> int:
        return len(self.canonical)


def conj_class(w) -> ConjClass:
    c = canonical_form(w)
    return ConjClass(c, not is_proper_power(c))


def _extend(k: int, prefix: list[int], n: int) -> Iterator[GroupWord]:
    if len(prefix) == n:
        yield tuple(prefix)
        return
    last = prefix[-1]
    for x in letters(k):
        if x != -last:
            prefix.append(x)
            yield from _extend(k, prefix, n)
            prefix.pop()


def words_of_length(k: int, n: int, first_letter: Optional[int] = None) -> Iterator[GroupWord]:
    starts = letters(k) if first_letter is None else [first_letter]
    for x in starts:
        yield from _extend(k, [x], n)


def enumerate_words(k: int, L: int, first_letter: Optional[int] = None) -> Iterator[GroupWord]:
    """All reduced words of length 1..L, each exactly once.

    ``first_letter`` restricts the stream to one partition, so that the 2k
    partitions can be consumed independently.
    """
    if k < 1 or L < 1:
        raise ValueError("need k >= 1 and L >= 1")
    for n in range(1, L + 1):
        yield from words_of_length(k, n, first_letter)


def count_reduced_words(k: int, n: int) -> int:
    return 2 * k * (2 * k - 1) ** (n - 1)


@lru_cache(maxsize=32)
def _primitive_classes(k: int, L: int) -> tuple[ConjClass, ...]:
    out = []
    for n in range(1, L + 1):
        for w in words_of_length(k, n):
            if n > 1 and w[0] == -w[-1]:
                continue
            if canonical_form(w) != w or is_proper_power(w):
                continue
            out.append(ConjClass(w, True))
    return tuple(out)


def primitive_classes(k: int, L: int) -> list[ConjClass]:
    """Unoriented primitive conjugacy classes of word length <= L.

    A class and its inverse class are identified; each appears once through
    its canonical representative.
    """
    if k < 1 or L < 1:
        raise ValueError("need k >= 1 and L >= 1")
    return list(_primitive_classes(k, L))
