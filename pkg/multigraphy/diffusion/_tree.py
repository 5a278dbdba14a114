import logging
import math
import numbers
from functools import reduce

import numpy as np

from ..exceptions import ArgumentsError
from ..multigraph import commutator_norm
from ..multigraph import spectral_norm
from ..multigraph._core import check_normalized

logger = logging.getLogger(__name__)

IDENTITY = ()


def word_key(word):
    """Canonical sort key: by length, then lexicographic."""
    return (len(word), tuple(word))


def word_to_str(word):
    """``()`` -> "I", ``(0, 1)`` -> "0-1"."""
    return "I" if len(word) == 0 else "-".join(str(i) for i in word)


def word_from_str(text):
    text = text.strip()
    if text == "I":
        return IDENTITY
    try:
        return tuple(int(t) for t in text.split("-"))
    except ValueError:
        raise ArgumentsError(
            f"Words are 'I' or dash-joined class indices, got {text!r}"
        )


def _has_pruned_pair(word, pruned):
    return any((a, b) in pruned for a, b in zip(word, word[1:]))


class DiffusionTree:
    """Ordered set of words (operator monomials) up to depth ``K``.

    Words are tuples of class indices. The word ``(a, b, c)`` stands for
    ``S_a S_b S_c``; ``()`` is the identity. Every word's suffix ``w[1:]``
    belongs to the tree as well, which is what filter evaluation relies on
    to share diffused signals between words.

    Parameters
    ----------

    m : int
        Number of edge classes.

    depth : int
        Maximal word length ``K``.

    words : iterable of tuple
        Words to hold; sorted canonically on construction.

    epsilon : float, default=inf
        Pruning cutoff the tree was generated with.

    pruned : iterable of (j, i), default=()
        Adjacent pairs no word may contain.

    """

    def __init__(self, m, depth, words, epsilon=math.inf, pruned=()):
        self.m = m
        self.depth = depth
        self.epsilon = epsilon
        self.pruned = frozenset(tuple(p) for p in pruned)
        self.words = tuple(
            sorted({tuple(int(i) for i in w) for w in words}, key=word_key)
        )
        self.__validate_input()
        self._index = {w: k for k, w in enumerate(self.words)}

    def __validate_input(self):
        if not isinstance(self.m, numbers.Integral) or self.m < 1:
            raise ValueError(f"m should be a positive integer, got {self.m}")
        if not isinstance(self.depth, numbers.Integral) or self.depth < 0:
            raise ValueError(
                f"depth should be a non-negative integer, got {self.depth}"
            )
        if IDENTITY not in self.words:
            raise ValueError("The identity word must belong to the tree")
        word_set = set(self.words)
        for w in self.words:
            if len(w) > self.depth:
                raise ValueError(
                    f"Word {word_to_str(w)} is longer than depth {self.depth}"
                )
            if any(i < 0 or i >= self.m for i in w):
                raise ValueError(
                    f"Word {word_to_str(w)} uses a class outside [0, {self.m})"
                )
            if w and w[1:] not in word_set:
                raise ValueError(
                    f"Word {word_to_str(w)} is present without its suffix"
                    f" {word_to_str(w[1:])}"
                )
            if _has_pruned_pair(w, self.pruned):
                raise ValueError(
                    f"Word {word_to_str(w)} contains a pruned adjacent pair"
                )
        for j, i in self.pruned:
            if (i, j) in self.pruned:
                raise ValueError(
                    f"Both orders of the pair ({i}, {j}) are pruned"
                )

    @classmethod
    def full(cls, m, depth):
        """Unpruned tree: every word of length ``<= depth``."""
        return cls(m, depth, _enumerate_words(m, depth, frozenset()))

    @classmethod
    def from_words(cls, m, depth, words):
        """Smallest tree holding ``words``, their suffixes and the identity."""
        closure = {IDENTITY}
        for w in words:
            w = tuple(w)
            while w:
                closure.add(w)
                w = w[1:]
        return cls(m, depth, closure)

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, word):
        return tuple(word) in self._index

    def index(self, word):
        return self._index[tuple(word)]

    def level_counts(self):
        counts = [0] * (self.depth + 1)
        for w in self.words:
            counts[len(w)] += 1
        return counts

    def __eq__(self, other):
        return (
            isinstance(other, DiffusionTree)
            and self.m == other.m
            and self.words == other.words
        )

    def __repr__(self):
        return (
            f"DiffusionTree(m={self.m}, depth={self.depth},"
            f" epsilon={self.epsilon}, n_words={len(self.words)})"
        )


def _enumerate_words(m, depth, pruned):
    # breadth first; a word (k,) + w is kept when (k, w[0]) is not pruned
    words = [IDENTITY]
    level = [IDENTITY]
    for _ in range(depth):
        level = [
            (k,) + w
            for w in level
            for k in range(m)
            if not (w and (k, w[0]) in pruned)
        ]
        words.extend(level)
    return words


def pruned_pairs(mg, epsilon):
    """Adjacent pairs ``(j, i)``, ``i < j``, whose operators commute within
    ``epsilon``; the ordering ``S_i S_j`` is kept."""
    pruned = set()
    if epsilon == math.inf:
        return frozenset(pruned)
    for i in range(mg.n_classes):
        for j in range(i + 1, mg.n_classes):
            if commutator_norm(mg[i], mg[j]) <= epsilon:
                pruned.add((j, i))
    return frozenset(pruned)


def generate_pruned_tree(mg, epsilon=math.inf, depth=2):
    """Enumerate the words of the filter algebra up to ``depth``, pruning
    near-commutative redundancy.

    Parameters
    ----------

    mg : Multigraph

    epsilon : float or inf, default=inf
        Commutator cutoff. ``inf`` disables pruning; ``None`` is read as
        ``inf``.

    depth : int, default=2

    Returns
    -------

    tree : DiffusionTree

    """
    if epsilon is None:
        epsilon = math.inf
    if not isinstance(depth, numbers.Integral) or depth < 0:
        raise ValueError(
            f"depth should be a non-negative integer, got {depth}"
        )
    if not (epsilon >= 0):
        raise ValueError(f"epsilon should be non-negative, got {epsilon}")
    if epsilon < math.inf:
        check_normalized(mg, "Pruning")

    pruned = pruned_pairs(mg, epsilon)
    words = _enumerate_words(mg.n_classes, depth, pruned)
    tree = DiffusionTree(mg.n_classes, depth, words, epsilon, pruned)
    logger.debug(
        "diffusion tree m=%d K=%d eps=%s: %d words, %d pruned pairs",
        mg.n_classes,
        depth,
        epsilon,
        len(tree),
        len(pruned),
    )
    return tree


def word_operator(word, mg):
    """Dense matrix ``S_{w1} S_{w2} ... S_{wk}`` (written order)."""
    matrices = mg.matrices if hasattr(mg, "matrices") else np.asarray(mg)
    n = matrices.shape[-1]
    return reduce(np.matmul, (matrices[i] for i in word), np.eye(n))


def verify_pruning_bound(mg, left, pair, right):
    """``|| L (S_i S_j - S_j S_i) R ||_2`` for ``L``, ``R`` the operators of
    the ``left`` and ``right`` words. With normalized operators this never
    exceeds ``commutator_norm(S_i, S_j)``."""
    i, j = pair
    Si, Sj = mg.matrices[i], mg.matrices[j]
    L = word_operator(left, mg)
    R = word_operator(right, mg)
    return spectral_norm(L @ (Si @ Sj - Sj @ Si) @ R)


def split_homogeneous(tree):
    """Partition words into pure powers ``S_i^k`` (plus the identity) and
    class-mixing words."""
    homogeneous = [w for w in tree.words if len(set(w)) <= 1]
    heterogeneous = [w for w in tree.words if len(set(w)) > 1]
    return homogeneous, heterogeneous


def pruned_witness(word, pruned):
    """Rewrite ``word`` into a word free of pruned adjacent pairs.

    Each step swaps one pruned adjacent pair ``(j, i)`` into ``(i, j)``.

    Returns
    -------

    (witness, n_swaps) : the surviving word and the number of adjacent
    transpositions applied.

    """
    w = list(word)
    swaps = 0
    changed = True
    while changed:
        changed = False
        for k in range(len(w) - 1):
            if (w[k], w[k + 1]) in pruned:
                w[k], w[k + 1] = w[k + 1], w[k]
                swaps += 1
                changed = True
    return tuple(w), swaps
