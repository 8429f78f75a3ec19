"""System-call window featurization as n-gram relative frequencies."""
from __future__ import annotations

import itertools
from collections import Counter
from typing import Hashable, Sequence

from ..errors import ConfigError, InputError


def enumerate_vocab(alphabet: Sequence[Hashable], n: int) -> list[tuple]:
    """Every length-``n`` tuple over ``alphabet``, in lexicographic product order."""
    if n < 1:
        raise ConfigError(f"n-gram length must be >= 1, got {n}")
    if not alphabet:
        raise ConfigError("alphabet must not be empty")
    return list(itertools.product(alphabet, repeat=n))


def ngrams(window: Sequence[Hashable], n: int) -> list[tuple]:
    return [tuple(window[i:i + n]) for i in range(len(window) - n + 1)]


def syscall_featurize(window: Sequence[Hashable], n: int,
                      vocab: Sequence[tuple]) -> list[float]:
    """Relative frequency of each vocabulary n-gram in a sliding window.

    n-grams outside ``vocab`` are ignored and the frequencies are taken over
    the in-vocabulary occurrences, so the components always sum to 1.
    """
    if not vocab:
        raise ConfigError("n-gram vocabulary must not be empty")
    if n < 1:
        raise ConfigError(f"n-gram length must be >= 1, got {n}")
    if len(window) == 0:
        raise InputError("empty system-call window")
    if len(window) < n:
        raise InputError(f"window of {len(window)} calls is shorter than n={n}")
    vocab = [tuple(g) for g in vocab]
    counts = Counter(ngrams(window, n))
    hits = [counts.get(g, 0) for g in vocab]
    total = sum(hits)
    if total == 0:
        raise InputError("window contains no n-gram from the vocabulary")
    return [h / total for h in hits]
