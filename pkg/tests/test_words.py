import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractalweyl.words import (canonical_form, conj_class, count_reduced_words, cyclic_reduce, enumerate_words,
                               free_reduce, invert, is_cyclically_reduced, is_proper_power, is_reduced, letters,
                               primitive_classes, words_of_length)


def mobius_mu(n):
    out, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    return -out if m > 1 else out


def oriented_primitive_count(k, n):
    """Necklace count of primitive cyclically reduced classes of length n in F_k."""
    def cyc(d):
        return (2 * k - 1) ** d + 1 + (k - 1) * (1 + (-1) ** d)
    return sum(mobius_mu(n // d) * cyc(d) for d in range(1, n + 1) if n % d == 0) // n


def brute_force_classes(k, L):
    """Cyclically reduced words up to rotation and inversion, proper powers dropped."""
    seen = set()
    for n in range(1, L + 1):
        for w in itertools.product(letters(k), repeat=n):
            if not is_cyclically_reduced(w):
                continue
            orbit = set()
            for cand in (w, invert(w)):
                for r in range(n):
                    orbit.add(cand[r:] + cand[:r])
            if any(is_proper_power(v) for v in orbit):
                continue
            seen.add(frozenset(orbit))
    return len(seen)


def test_enumerate_word_counts():
    assert len(list(enumerate_words(2, 1))) == 4
    assert len(list(enumerate_words(2, 2))) == 16
    assert len(list(enumerate_words(2, 3))) == 52
    for k in (1, 2, 3):
        for n in range(1, 6):
            ws = list(words_of_length(k, n))
            assert len(ws) == count_reduced_words(k, n) == len(set(ws))
            assert all(is_reduced(w) for w in ws)


def test_partition_by_first_letter():
    full = sorted(enumerate_words(2, 4))
    parts = sorted(w for x in letters(2) for w in enumerate_words(2, 4, x))
    assert full == parts


def test_primitive_class_examples():
    assert len(primitive_classes(2, 1)) == 2
    # frozen regression values, from brute force below
    assert len(primitive_classes(2, 2)) == 4
    assert len(primitive_classes(2, 3)) == 8


@pytest.mark.parametrize("k,L", [(1, 4), (2, 4), (2, 5), (3, 3)])
def test_primitive_classes_match_brute_force(k, L):
    assert len(primitive_classes(k, L)) == brute_force_classes(k, L)


@pytest.mark.parametrize("k", [2, 3])
def test_primitive_classes_match_necklace_formula(k):
    for L in range(1, 7):
        oriented = sum(oriented_primitive_count(k, n) for n in range(1, L + 1))
        assert 2 * len(primitive_classes(k, L)) == oriented


def test_classes_unique_and_canonical():
    cls = primitive_classes(2, 6)
    reps = [c.canonical for c in cls]
    assert len(set(reps)) == len(reps)
    for c in cls:
        assert c.primitive
        assert is_cyclically_reduced(c.canonical)
        assert canonical_form(c.canonical) == c.canonical


def test_canonical_invariance_brute_force():
    for w in enumerate_words(2, 4):
        c = canonical_form(w)
        n = len(w)
        for r in range(n):
            assert canonical_form(w[r:] + w[:r]) == c
        assert canonical_form(invert(w)) == c
        for g in letters(2):
            assert canonical_form(free_reduce((g,) + w + (-g,))) == c


reduced_words = st.lists(st.sampled_from(letters(3)), min_size=1, max_size=12).map(free_reduce).filter(len)


@settings(max_examples=200, deadline=None)
@given(reduced_words, st.integers(0, 20))
def test_canonical_rotation_property(w, r):
    w = cyclic_reduce(w)
    if not w:
        return
    r %= len(w)
    assert canonical_form(w[r:] + w[:r]) == canonical_form(w)
    assert canonical_form(canonical_form(w)) == canonical_form(w)


@settings(max_examples=200, deadline=None)
@given(reduced_words)
def test_proper_power_detection(w):
    w = cyclic_reduce(w)
    if not w:
        return
    assert is_proper_power(w + w)
    assert conj_class(w + w + w).primitive is False


def test_free_reduce():
    assert free_reduce((1, -1, 2)) == (2,)
    assert free_reduce((1, 2, -2, -1)) == ()
    assert cyclic_reduce((2, 1, 1, -2)) == (1, 1)
