"""Geometry of the infinite-return set in sequence space.

Sign sequences carry the metric ``d(u, v) = sum_i |u_i - v_i| / 2^i``. The
walks that return to 0 infinitely often are exactly the infinite
concatenations of the two pattern blocks of order ``k``, a self-similar set
for the two maps that prepend a block (ratio ``2^-(k+1)`` each).

Covering numbers use cylinder covers: the length-``m`` cylinders have
diameter ``2^(1-m)``, so ``log2 N_m`` against ``m`` has the box dimension
as its slope.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .characterize import Pattern, pattern_word
from .dyadic import ZERO, Dyadic
from .walk import SignSequence, as_signs, sign_bits

PREFIX_ENUM_CAP = 40
MORAN_MAX_ITER = 200


# -- metric -------------------------------------------------------------------

def seq_distance(u, v, depth: int) -> Dyadic:
    """Partial sum of ``d(u, v)`` over positions ``1..depth``, exact.

    The untruncated distance lies in ``[result, result + 2^(1-depth)]``.
    """
    u, v = as_signs(u), as_signs(v)
    if len(u) < depth or len(v) < depth:
        raise ValueError(f"both sequences need length >= {depth}")
    total = ZERO
    for i in range(1, depth + 1):
        if u.w(i) != v.w(i):
            total = total + Dyadic(1, i - 1)  # |u_i - v_i| / 2^i = 2 / 2^i
    return total


def distance_bracket(u, v, depth: int) -> tuple[Dyadic, Dyadic]:
    low = seq_distance(u, v, depth)
    return low, low + cylinder_diameter(depth)


def cylinder_diameter(m: int) -> Dyadic:
    """Diameter ``2^(1-m)`` of a length-``m`` cylinder."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    return Dyadic(2) if m == 0 else Dyadic(1, m - 1)


@dataclass(frozen=True)
class Cylinder:
    prefix: SignSequence
    k: int | None = None

    @property
    def diameter(self) -> Dyadic:
        return cylinder_diameter(len(self.prefix))


# -- prefix language ------------------------------------------------------------

def block_words(k: int) -> tuple[str, str]:
    return pattern_word(Pattern.PLUS, k).to_text(), pattern_word(Pattern.MINUS, k).to_text()


def pattern_prefixes(k: int, m: int, lead: str = "") -> set[str]:
    """All length-``m`` prefixes of ``lead`` followed by an infinite block word."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if m <= len(lead):
        return {lead[:m]}
    words = {lead}
    blocks = block_words(k)
    while min(len(w) for w in words) < m:
        words = {w + b for w in words for b in blocks}
    return {w[:m] for w in words}


def closed_form_count(k: int, m: int) -> int:
    """``2^ceil(m/(k+1))``: each block contributes one binary choice, fixed by its first sign."""
    return 1 << -(-m // (k + 1))


def count_N_prefixes(k: int, m: int, *, cap: int = PREFIX_ENUM_CAP) -> int:
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if m <= cap:
        return len(pattern_prefixes(k, m))
    return closed_form_count(k, m)


def tribonacci_f1_prefix_count(m: int, *, cap: int = PREFIX_ENUM_CAP) -> int:
    """Length-``m`` prefixes of ``+`` followed by an infinite order-3 block word."""
    if m <= cap:
        return len(pattern_prefixes(3, m, lead="+"))
    return closed_form_count(3, m - 1)


# -- box-counting ----------------------------------------------------------------

@dataclass
class CoveringProfile:
    """Cylinder covering counts ``N_m`` at scales ``delta_m = 2^(1-m)`` with an OLS slope fit."""

    entries: list[tuple[int, int, Dyadic]]
    fitted_slope: float
    r_squared: float
    intercept: float = 0.0
    target: float | None = None
    label: str = ""

    @property
    def abs_error(self) -> float | None:
        return None if self.target is None else abs(self.fitted_slope - self.target)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["m", "N_m", "delta", "log2N"])
        for m, n, delta in self.entries:
            writer.writerow([m, str(n), repr(float(delta)), repr(math.log2(n))])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "entries": [
                {"m": m, "N_m": str(n), "delta": delta.to_json(), "log2N": math.log2(n)}
                for m, n, delta in self.entries
            ],
            "fitted_slope": self.fitted_slope,
            "r_squared": self.r_squared,
            "target": self.target,
            "abs_error": self.abs_error,
        }


def fit_profile(counts: dict[int, int], *, target: float | None = None, label: str = "") -> CoveringProfile:
    ms = sorted(counts)
    if len(ms) < 2:
        raise ValueError("need at least two scales to fit a slope")
    xs = np.array(ms, dtype=float)
    ys = np.array([math.log2(counts[m]) for m in ms])
    if np.ptp(ys) == 0:
        slope, intercept, r2 = 0.0, float(ys[0]), 1.0
    else:
        fit = stats.linregress(xs, ys)
        slope, intercept, r2 = float(fit.slope), float(fit.intercept), float(fit.rvalue**2)
    entries = [(m, counts[m], cylinder_diameter(m)) for m in ms]
    return CoveringProfile(entries, slope, r2, intercept, target, label)


def box_dimension_estimate(k: int, m_max: int) -> CoveringProfile:
    if m_max < 2 * (k + 1):
        raise ValueError(f"m_max must be >= 2(k+1) = {2 * (k + 1)}")
    counts = {m: count_N_prefixes(k, m) for m in range(1, m_max + 1)}
    return fit_profile(counts, target=1.0 / (k + 1), label=f"N(k={k})")


def full_space_profile(m_max: int) -> CoveringProfile:
    """Calibration: every prefix is admissible, ``N_m = 2^m``, slope 1."""
    return fit_profile({m: 1 << m for m in range(1, m_max + 1)}, target=1.0, label="full space")


def tribonacci_f1_dimension(m_max: int = 121) -> CoveringProfile:
    counts = {m: tribonacci_f1_prefix_count(m) for m in range(1, m_max + 1)}
    return fit_profile(counts, target=0.25, label="N_1(tribonacci)")


# -- Moran equation -----------------------------------------------------------------

@dataclass(frozen=True)
class SimilaritySystem:
    ratios: tuple[float, ...]

    def __post_init__(self) -> None:
        ratios = tuple(float(r) for r in self.ratios)
        if len(ratios) < 2:
            raise ValueError("a similarity system needs at least two maps")
        for r in ratios:
            if not 0.0 < r < 1.0:
                raise ValueError(f"contraction ratio must lie in (0, 1), got {r}")
        object.__setattr__(self, "ratios", ratios)

    def pressure(self, s: float) -> float:
        """``sum_i r_i^s - 1``; strictly decreasing in ``s``."""
        return math.fsum(r**s for r in self.ratios) - 1.0

    @classmethod
    def kbonacci(cls, k: int) -> "SimilaritySystem":
        r = 2.0 ** -(k + 1)
        return cls((r, r))


class MoranConvergenceError(RuntimeError):
    pass


def moran_dimension(system, tolerance: float = 1e-12) -> float:
    """The unique ``s >= 0`` with ``sum_i r_i^s = 1``.

    Root isolation by Brent's method on a bracket grown by doubling; the
    residual ``|sum r_i^s - 1|`` is checked against ``tolerance``.
    """
    if not isinstance(system, SimilaritySystem):
        system = SimilaritySystem(tuple(system))
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    lo, hi = 0.0, 1.0
    for _ in range(MORAN_MAX_ITER):
        if system.pressure(hi) < 0:
            break
        lo, hi = hi, 2 * hi
    else:
        raise MoranConvergenceError("could not bracket the Moran root")
    s, info = optimize.brentq(
        system.pressure, lo, hi, xtol=min(tolerance, 1e-15), maxiter=MORAN_MAX_ITER, full_output=True
    )
    if not info.converged or abs(system.pressure(s)) > tolerance:
        raise MoranConvergenceError(f"Moran root not within tolerance {tolerance}: {info.flag}")
    return float(s)


def equal_ratio_dimension(p: int, r: float) -> float:
    """Closed form ``-log p / log r`` for ``p`` maps of common ratio ``r``."""
    return -math.log(p) / math.log(r)


# -- self-similarity checks ------------------------------------------------------------

@dataclass
class SelfSimilarityReport:
    k: int
    depth: int
    union_ok: bool
    disjoint_ok: bool
    contraction_ok: bool
    pairs_checked: int
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.union_ok and self.disjoint_ok and self.contraction_ok

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "depth": self.depth,
            "union_ok": self.union_ok,
            "disjoint_ok": self.disjoint_ok,
            "contraction_ok": self.contraction_ok,
            "pairs_checked": self.pairs_checked,
            "violations": self.violations,
        }


def random_signs(length: int, seed: int, stream: int) -> SignSequence:
    bits = sign_bits(seed, length, stream)
    return SignSequence(tuple((1 - 2 * bits.astype(np.int8)).tolist()))


def _prepend_check(prefix: SignSequence, depth: int, pairs: int, seed: int) -> int:
    """Count sampled pairs where prepending ``prefix`` fails to scale ``d`` by ``2^-len(prefix)``."""
    shift = len(prefix)
    bad = 0
    for j in range(pairs):
        u = random_signs(depth, seed, 2 * j)
        v = random_signs(depth, seed, 2 * j + 1)
        if j == 0:
            v = u  # identical pair: distance 0 maps to 0
        before = seq_distance(u, v, depth)
        after = seq_distance(prefix + u, prefix + v, depth + shift)
        if after != before * Dyadic(1, shift):
            bad += 1
    return bad


def verify_self_similarity(k: int, depth_blocks: int, *, pairs: int = 100, seed: int = 0) -> SelfSimilarityReport:
    if depth_blocks < 1:
        raise ValueError("depth_blocks must be >= 1")
    m = (k + 1) * depth_blocks
    plus, minus = block_words(k)
    whole = pattern_prefixes(k, m)
    inner = pattern_prefixes(k, m - (k + 1))
    image_plus = {plus + w for w in inner}
    image_minus = {minus + w for w in inner}
    violations = []
    union_ok = whole == image_plus | image_minus
    if not union_ok:
        violations.append("prefix set differs from union of images")
    disjoint_ok = not (image_plus & image_minus)
    if not disjoint_ok:
        violations.append("images overlap")
    bad = 0
    for word in (plus, minus):
        bad += _prepend_check(SignSequence.from_text(word), 8 * (k + 1), pairs, seed)
    contraction_ok = bad == 0
    if not contraction_ok:
        violations.append(f"{bad} sampled pairs not contracted by 2^-{k + 1}")
    return SelfSimilarityReport(k, m, union_ok, disjoint_ok, contraction_ok, 2 * pairs, violations)


def prepend_plus_check(pairs: int = 100, depth: int = 64, seed: int = 0) -> int:
    """Violations of ``d(+u, +v) = d(u, v) / 2`` over sampled pairs at ``depth``."""
    return _prepend_check(SignSequence((1,)), depth, pairs, seed)
