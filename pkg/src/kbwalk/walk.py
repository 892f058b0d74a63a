"""Walk partial sums, visit detection and seeded sign streams.

Positions are 1-based everywhere in the public API: ``w_1`` is the first
sign and ``F_n = w_1 f_1 + ... + w_n f_n``.

Sign vectors are also addressed by integer masks. Bit ``n-1`` of a mask is
set exactly when ``w_n = -1``; mask 0 is the all-plus word.

Random signs come from numpy's Philox4x64-10 bit generator keyed by
``(seed, stream)``. Only the raw 64-bit output words are used (bit ``j`` of
a word is one sign, least significant bit first), which keeps the streams
independent of numpy's distribution-sampling code paths.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .sequence import KBonacciSpec, generate

INT64_SAFE = 1 << 62
MASK64 = (1 << 64) - 1
DEFAULT_CHUNK_BITS = 20


@dataclass(frozen=True)
class SignSequence:
    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        signs = tuple(int(s) for s in self.signs)
        for s in signs:
            if s not in (1, -1):
                raise ValueError(f"signs must be +1 or -1, got {s}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_text(cls, text: str) -> "SignSequence":
        try:
            return cls(tuple({"+": 1, "-": -1}[c] for c in text.strip()))
        except KeyError as exc:
            raise ValueError(f"sign text may contain only '+' and '-', got {text!r}") from exc

    @classmethod
    def from_mask(cls, mask: int, length: int) -> "SignSequence":
        return cls(tuple(-1 if (mask >> j) & 1 else 1 for j in range(length)))

    def to_mask(self) -> int:
        mask = 0
        for j, s in enumerate(self.signs):
            if s < 0:
                mask |= 1 << j
        return mask

    def to_text(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    def flipped(self) -> "SignSequence":
        return SignSequence(tuple(-s for s in self.signs))

    def w(self, n: int) -> int:
        """The sign at 1-based position ``n``."""
        if not 1 <= n <= len(self.signs):
            raise IndexError(f"position {n} outside 1..{len(self.signs)}")
        return self.signs[n - 1]

    def __len__(self) -> int:
        return len(self.signs)

    def __add__(self, other: "SignSequence") -> "SignSequence":
        return SignSequence(self.signs + other.signs)

    def __str__(self) -> str:
        return self.to_text()


def as_signs(value) -> SignSequence:
    if isinstance(value, SignSequence):
        return value
    if isinstance(value, str):
        return SignSequence.from_text(value)
    return SignSequence(tuple(value))


@dataclass(frozen=True)
class WalkTrace:
    spec: KBonacciSpec
    signs: SignSequence
    sums: tuple[int, ...] = field(repr=False)

    def at(self, n: int) -> int:
        """``F_n`` for 1-based ``n``; ``F_0 = 0``."""
        return 0 if n == 0 else self.sums[n - 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["n", "w_n", "F_n"])
        for n, (w, s) in enumerate(zip(self.signs.signs, self.sums), start=1):
            writer.writerow([n, w, str(s)])
        return buf.getvalue()


def signed_partial_sums(terms, signs) -> list[int]:
    """``F_1..F_n`` for ``terms = [f_0, f_1, ...]``; no spec validation involved."""
    signs = as_signs(signs)
    if len(terms) <= len(signs):
        raise ValueError(f"need terms f_0..f_{len(signs)}")
    total = 0
    sums = []
    for n, w in enumerate(signs.signs, start=1):
        total += w * terms[n]
        sums.append(total)
    return sums


def partial_sums(spec: KBonacciSpec, signs) -> WalkTrace:
    signs = as_signs(signs)
    f = generate(spec, len(signs)).terms
    return WalkTrace(spec, signs, tuple(signed_partial_sums(f, signs)))


def visit_times(trace: WalkTrace, target: int) -> list[int]:
    return [n for n, s in enumerate(trace.sums, start=1) if s == target]


# -- seeded sign streams ---------------------------------------------------

def _philox(seed: int, stream: int) -> np.random.Philox:
    return np.random.Philox(key=np.array([seed & MASK64, stream & MASK64], dtype=np.uint64))


def _words_to_bits(words: np.ndarray, nbits: int) -> np.ndarray:
    raw = words.astype("<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:nbits]


def sign_bits(seed: int, horizon: int, stream: int = 0) -> np.ndarray:
    """``horizon`` fair bits (1 means a ``-1`` sign) from stream ``(seed, stream)``."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    words = _philox(seed, stream).random_raw(-(-horizon // 64))
    return _words_to_bits(np.asarray(words, dtype=np.uint64), horizon)


def simulate(spec: KBonacciSpec, horizon: int, seed: int, stream: int = 0) -> SignSequence:
    """Draw ``horizon`` i.i.d. fair signs.

    The output depends only on ``(seed, stream, horizon)``; ``spec`` is
    accepted so call sites read like the walk they drive. Distinct streams
    are independent Philox keys, so parallel batches stay reproducible.
    """
    del spec
    bits = sign_bits(seed, horizon, stream)
    return SignSequence(tuple((1 - 2 * bits.astype(np.int8)).tolist()))


def trial_bits(seed: int, stream: int, trials: int, horizon: int) -> np.ndarray:
    """Bit matrix ``(trials, horizon)`` for one batch; each trial uses whole 64-bit words."""
    per_trial = -(-horizon // 64)
    words = np.asarray(_philox(seed, stream).random_raw(trials * per_trial), dtype=np.uint64)
    raw = words.astype("<u8").view(np.uint8).reshape(trials, per_trial * 8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :horizon]


# -- exhaustive enumeration over all sign vectors ---------------------------

def int64_safe(terms, target: int = 0) -> bool:
    return sum(abs(t) for t in terms) < INT64_SAFE and abs(target) < INT64_SAFE


def all_signed_sums(terms) -> np.ndarray:
    """Signed sums ``sum_j w_j terms[j]`` for every sign vector, indexed by mask.

    Entry ``mask`` uses ``w_j = -1`` exactly where bit ``j`` of ``mask`` is set.
    """
    terms = list(terms)
    if not int64_safe(terms):
        raise OverflowError("terms too large for int64 enumeration")
    s = np.zeros(1, dtype=np.int64)
    for t in terms:
        s = np.concatenate([s + t, s - t])
    return s


def _clamp_target(terms, target: int) -> int:
    bound = sum(abs(t) for t in terms)
    # targets beyond reach never compare equal; keep them inside int64
    return target if abs(target) <= bound else bound + 1


@dataclass
class Enumeration:
    """Visit statistics over all ``2**length`` sign vectors.

    ``histogram[c]`` counts vectors with exactly ``c`` visits. ``masks``,
    when requested, holds per-vector visit bitmasks (bit ``n-1`` set when
    ``F_n == target``), indexed by sign mask.
    """

    length: int
    target: int
    histogram: list[int]
    masks: np.ndarray | None = None

    @property
    def total(self) -> int:
        return 1 << self.length


def _outer_prefix(f, n_outer: int, mask: int, target: int):
    s = 0
    c = 0
    vm = 0
    for j in range(n_outer):
        s += -f[j + 1] if (mask >> j) & 1 else f[j + 1]
        if s == target:
            c += 1
            vm |= 1 << j
    return s, c, vm


def _inner_block(f, n_outer: int, length: int, target: int, s0: int, c0: int, vm0: int, want_masks: bool):
    s = np.array([s0], dtype=np.int64)
    c = np.array([c0], dtype=np.int16)
    vm = np.array([vm0], dtype=np.uint64) if want_masks else None
    for pos in range(n_outer + 1, length + 1):
        t = f[pos]
        sp = s + t
        sm = s - t
        hp = sp == target
        hm = sm == target
        c = np.concatenate([c + hp, c + hm])
        if want_masks:
            bit = np.uint64(1) << np.uint64(pos - 1)
            vm = np.concatenate([vm | (hp.astype(np.uint64) * bit), vm | (hm.astype(np.uint64) * bit)])
        s = np.concatenate([sp, sm])
    return c, vm


def enumerate_visits(
    spec: KBonacciSpec,
    target: int,
    length: int,
    *,
    want_masks: bool = False,
    chunk_bits: int = DEFAULT_CHUNK_BITS,
    workers: int = 1,
) -> Enumeration:
    """Count visits to ``target`` for every sign vector of the given length.

    Exact: numpy int64 is used only when every reachable partial sum fits;
    otherwise falls back to Python integers. The split into chunks (and the
    number of worker threads) never changes the result.
    """
    if length < 0:
        raise ValueError(f"length must be >= 0, got {length}")
    if want_masks and length > 63:
        raise ValueError("visit masks need length <= 63")
    f = generate(spec, length).terms
    if not int64_safe(f[1:]):
        return _enumerate_python(f, target, length, want_masks)
    target = _clamp_target(f[1:], target)

    n_inner = min(length, chunk_bits)
    n_outer = length - n_inner
    histogram = np.zeros(length + 1, dtype=np.int64)
    masks = np.zeros(1 << length, dtype=np.uint64) if want_masks else None
    inner_index = np.arange(1 << n_inner, dtype=np.int64) << n_outer if want_masks else None

    def run(outer: int):
        s0, c0, vm0 = _outer_prefix(f, n_outer, outer, target)
        c, vm = _inner_block(f, n_outer, length, target, s0, c0, vm0, want_masks)
        return outer, np.bincount(c, minlength=length + 1), vm

    outers = range(1 << n_outer)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(run, outers)
            for outer, hist, vm in results:
                histogram += hist
                if want_masks:
                    masks[inner_index + outer] = vm
    else:
        for outer in outers:
            _, hist, vm = run(outer)
            histogram += hist
            if want_masks:
                masks[inner_index + outer] = vm
    return Enumeration(length, target, [int(x) for x in histogram], masks)


def _enumerate_python(f, target: int, length: int, want_masks: bool) -> Enumeration:
    histogram = [0] * (length + 1)
    masks = np.zeros(1 << length, dtype=np.uint64) if want_masks else None
    for mask in range(1 << length):
        _, c, vm = _outer_prefix(f, length, mask, target)
        histogram[c] += 1
        if want_masks:
            masks[mask] = vm
    return Enumeration(length, target, histogram, masks)


def visit_mask(spec: KBonacciSpec, signs, target: int) -> int:
    """Visit bitmask of a single walk, via :func:`visit_times`."""
    out = 0
    for n in visit_times(partial_sums(spec, signs), target):
        out |= 1 << (n - 1)
    return out
