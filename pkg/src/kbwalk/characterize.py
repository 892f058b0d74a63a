"""Combinatorial return characterizations.

A *pattern block* of order ``k`` is the length ``k+1`` word of ``k`` equal
signs closed by the opposite sign (``++...+-`` or ``--...-+``). Over any
window ``f_p..f_{p+k}`` of a k-bonacci sequence its weighted sum vanishes,
because ``f_{p+k}`` is the sum of the ``k`` terms before it.

The ``predicted_*`` functions below decide returns purely from the sign
word. They never look at sequence values; the test-suite checks them
against big-integer partial sums from :mod:`kbwalk.walk`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .sequence import KBonacciSpec, generate
from .walk import SignSequence, all_signed_sums, as_signs


class Pattern(enum.Enum):
    PLUS = "PLUS"
    MINUS = "MINUS"
    NONE = "NONE"


@dataclass(frozen=True)
class BlockPattern:
    kind: Pattern
    k: int

    @property
    def is_pattern(self) -> bool:
        return self.kind is not Pattern.NONE


def pattern_word(kind: Pattern, k: int) -> SignSequence:
    if kind is Pattern.PLUS:
        return SignSequence((1,) * k + (-1,))
    if kind is Pattern.MINUS:
        return SignSequence((-1,) * k + (1,))
    raise ValueError("NONE has no word")


def classify_block(window, k: int | None = None) -> BlockPattern:
    window = as_signs(window)
    if k is None:
        k = len(window) - 1
    if len(window) != k + 1:
        raise ValueError(f"window must have length k+1 = {k + 1}, got {len(window)}")
    s = window.signs
    if all(x == s[0] for x in s[:k]) and s[k] == -s[0]:
        return BlockPattern(Pattern.PLUS if s[0] > 0 else Pattern.MINUS, k)
    return BlockPattern(Pattern.NONE, k)


def block_holds(signs, p: int, k: int) -> bool:
    """Whether positions ``p..p+k`` (1-based) form a pattern block."""
    signs = as_signs(signs)
    if p < 1 or p + k > len(signs):
        raise ValueError(f"block {p}..{p + k} outside 1..{len(signs)}")
    return classify_block(signs.signs[p - 1 : p + k], k).is_pattern


@dataclass(frozen=True)
class Residue:
    n: int
    k: int
    m: int
    t: int


def residue(n: int, k: int) -> Residue:
    """Write ``n = (k+1) m + t`` with ``0 <= t <= k``."""
    m, t = divmod(n, k + 1)
    return Residue(n, k, m, t)


def _leading_blocks(signs: SignSequence, k: int, start: int) -> int:
    """Number of consecutive pattern blocks beginning at 1-based ``start``."""
    count = 0
    p = start
    while p + k <= len(signs) and block_holds(signs, p, k):
        count += 1
        p += k + 1
    return count


def predicted_zero_times(signs, k: int) -> list[int]:
    """Times ``n`` with ``F_n = 0``, read off the sign word alone.

    ``F_n = 0`` exactly when ``n = (k+1) m`` and the first ``m`` aligned
    blocks are all pattern blocks.
    """
    signs = as_signs(signs)
    run = _leading_blocks(signs, k, 1)
    return [(k + 1) * (i + 1) for i in range(run)]


def predicted_f1_times_tribonacci(signs) -> list[int]:
    """Times ``n`` with ``F_n = f_1`` for the order-3 sequence 0, 1, 3, 6, ...

    Requires ``w_1 = +1``; then the visits are ``n = 1`` and ``n = 4m+1`` for
    every ``m`` such that the aligned blocks starting at ``2, 6, ..., 4m-2``
    are all pattern blocks.
    """
    signs = as_signs(signs)
    if len(signs) == 0 or signs.w(1) != 1:
        return []
    run = _leading_blocks(signs, 3, 2)
    return [1] + [4 * (j + 1) + 1 for j in range(run)]


def predicted_neg_f1_times_tribonacci(signs) -> list[int]:
    """Mirror of :func:`predicted_f1_times_tribonacci` for visits to ``-f_1``.

    Negating every sign negates every partial sum, so this is the ``+f_1``
    predicate applied to the flipped word.
    """
    return predicted_f1_times_tribonacci(as_signs(signs).flipped())


def _pattern_values(k: int) -> tuple[int, int]:
    # bit j set <=> sign -1; PLUS = k pluses then a minus, MINUS the complement
    return 1 << k, (1 << k) - 1


def block_pattern_flags(length: int, k: int, block: int) -> np.ndarray:
    """For every sign mask of ``length`` bits, whether aligned block ``block`` (0-based) is a pattern."""
    masks = np.arange(1 << length, dtype=np.uint64)
    field = (masks >> np.uint64((k + 1) * block)) & np.uint64((1 << (k + 1)) - 1)
    plus, minus = _pattern_values(k)
    return (field == np.uint64(plus)) | (field == np.uint64(minus))


def predicted_zero_masks(length: int, k: int) -> np.ndarray:
    """Vectorized :func:`predicted_zero_times` over all ``2**length`` sign masks.

    Returns visit bitmasks (bit ``n-1`` set when a return at ``n`` is predicted).
    """
    pred = np.zeros(1 << length, dtype=np.uint64)
    alive = np.ones(1 << length, dtype=bool)
    for i in range(length // (k + 1)):
        alive &= block_pattern_flags(length, k, i)
        bit = np.uint64(1) << np.uint64((k + 1) * (i + 1) - 1)
        pred |= alive.astype(np.uint64) * bit
    return pred


@dataclass(frozen=True)
class LemmaReport:
    p: int
    k: int
    block_sum: int
    walk_value: int
    bound: int
    block_ok: bool
    walk_ok: bool

    @property
    def ok(self) -> bool:
        return self.block_ok and self.walk_ok


def lemma_pp_bound(spec: KBonacciSpec, signs, p: int) -> LemmaReport:
    """Evaluate the non-pattern block bounds at ``p`` with exact integers.

    When the block ``p..p+k`` is not a pattern block, its weighted sum has
    absolute value at least ``2 f_p`` and ``|F_{p+k}| > 1``.
    """
    signs = as_signs(signs)
    k = spec.k
    if len(signs) < p + k:
        raise ValueError(f"need at least {p + k} signs, got {len(signs)}")
    if block_holds(signs, p, k):
        raise ValueError(f"block at p={p} is a pattern block; the bound does not apply")
    f = generate(spec, p + k).terms
    block = sum(signs.w(j) * f[j] for j in range(p, p + k + 1))
    walk_value = sum(signs.w(j) * f[j] for j in range(1, p + k + 1))
    bound = 2 * f[p]
    return LemmaReport(p, k, block, walk_value, bound, abs(block) >= bound, abs(walk_value) > 1)


@dataclass(frozen=True)
class LemmaSweep:
    p: int
    k: int
    checked: int
    block_violations: int
    walk_violations: int

    @property
    def ok(self) -> bool:
        return self.block_violations == 0 and self.walk_violations == 0


def lemma_pp_exhaustive(spec: KBonacciSpec, p: int) -> LemmaSweep:
    """Check the non-pattern bounds at ``p`` over all ``2**(p+k)`` sign vectors."""
    k = spec.k
    f = generate(spec, p + k).terms
    before = all_signed_sums(f[1:p])
    block = all_signed_sums(f[p : p + k + 1])
    plus, minus = _pattern_values(k)
    idx = np.arange(block.size)
    non_pattern = (idx != plus) & (idx != minus)
    block_np = block[non_pattern]
    block_bad = int(np.count_nonzero(np.abs(block_np) < 2 * f[p])) * before.size
    walk = block_np[:, None] + before[None, :]
    walk_bad = int(np.count_nonzero(np.abs(walk) <= 1))
    return LemmaSweep(p, k, int(non_pattern.sum()) * before.size, block_bad, walk_bad)
