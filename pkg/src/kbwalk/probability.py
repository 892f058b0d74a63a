"""Exact and simulated return probabilities.

Closed forms are exact dyadic rationals. The brute-force oracle enumerates
every sign prefix with big-integer (or overflow-checked int64) partial sums
from :mod:`kbwalk.walk`; it never consults :mod:`kbwalk.characterize`.

Two published formulas need care:

* For visits to 0 the count law is ``P(exactly i returns) = (2^k - 1) / 2^(k(i+1))``.
  The alternative value ``1 / 2^((k+1) i)`` is available through
  ``as_stated=True`` for comparison only; it does not sum to one and
  disagrees with enumeration for every ``i >= 1``.
* For visits to ``f_1`` on the order-3 sequence 0, 1, 3, 6, ... the event
  ``E_i = {F_(4i+1) = 1 and F_(4i+5) != 1}`` has probability
  ``7 / 2^(3(i+1)+1)``. Enumeration shows ``E_i`` is the event of exactly
  ``i + 1`` visits when the visit at ``n = 1`` is counted; the visit-count
  law itself is given by :func:`f1_visit_count_prob`.
"""

from __future__ import annotations

import csv
import io
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dyadic import ONE, ZERO, Dyadic, dyadic_sum
from .sequence import KBonacciSpec, generate, tribonacci_spec
from .walk import enumerate_visits, int64_safe, trial_bits

DEFAULT_ENUM_CAP = 26
ENUM_CAP_ENV = "KBWALK_ENUM_CAP"
MC_BATCH = 1 << 16


class EnumerationCapError(ValueError):
    pass


class AsStatedFormulaWarning(UserWarning):
    """Emitted when the non-normalized ``1 / 2^((k+1) i)`` value is requested."""


def enumeration_cap() -> int:
    value = os.environ.get(ENUM_CAP_ENV)
    return int(value) if value else DEFAULT_ENUM_CAP


def check_prob(p: Dyadic) -> Dyadic:
    if not ZERO <= p <= ONE:
        raise ValueError(f"{p} is not a probability")
    return p


# -- closed forms -----------------------------------------------------------

def exact_zero_hit_prob(k: int, i: int) -> Dyadic:
    """``P(F_((k+1) i) = 0) = 2^i / 2^((k+1) i) = 1 / 2^(k i)``."""
    _check_k_i(k, i)
    return Dyadic(1, k * i)


def exact_return_count_prob(k: int, i: int, *, as_stated: bool = False) -> Dyadic:
    """Probability of exactly ``i`` returns to the origin.

    With ``as_stated=True`` returns ``1 / 2^((k+1) i)`` instead and warns;
    that value fails normalization and the enumeration oracle.
    """
    _check_k_i(k, i)
    if as_stated:
        warnings.warn(
            "1/2^((k+1)i) does not match enumeration for i >= 1 and does not sum to 1; "
            "use the default (2^k-1)/2^(k(i+1))",
            AsStatedFormulaWarning,
            stacklevel=2,
        )
        return Dyadic(1, (k + 1) * i)
    return Dyadic((1 << k) - 1, k * (i + 1))


def exact_f1_event_prob(i: int) -> Dyadic:
    """``P(F_(4i+1) = 1 and F_(4i+5) != 1) = 7 / 2^(3(i+1)+1)`` for the order-3 walk."""
    if i < 0:
        raise ValueError(f"i must be >= 0, got {i}")
    return Dyadic(7, 3 * (i + 1) + 1)


def f1_event_visit_count(i: int) -> int:
    """Number of visits to ``f_1`` (``n = 1`` included) on the event ``E_i``."""
    return i + 1


def f1_visit_count_prob(v: int) -> Dyadic:
    """Probability of exactly ``v`` visits to ``f_1`` (counting ``n = 1``).

    ``v = 0`` is the event ``w_1 = -1``; for ``v >= 1`` it coincides with ``E_(v-1)``.
    """
    if v < 0:
        raise ValueError(f"v must be >= 0, got {v}")
    if v == 0:
        return Dyadic(1, 1)
    return exact_f1_event_prob(v - 1)


def _check_k_i(k: int, i: int) -> None:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if i < 0:
        raise ValueError(f"i must be >= 0, got {i}")


# -- distributions ------------------------------------------------------------

@dataclass(frozen=True)
class ReturnDistribution:
    """``probs[i]`` = P(exactly i visits) for ``i <= i_max``; ``tail`` = P(at least i_max+1)."""

    k: int
    target: int
    prefix_len: int | None
    probs: tuple[Dyadic, ...]
    tail: Dyadic
    histogram: tuple[int, ...] = field(default=(), repr=False)

    @property
    def i_max(self) -> int:
        return len(self.probs) - 1

    def total(self) -> Dyadic:
        return dyadic_sum(self.probs) + self.tail

    def at_least(self, m: int) -> Dyadic:
        if m > self.i_max + 1:
            raise ValueError(f"at_least({m}) needs i_max >= {m - 1}")
        return dyadic_sum(self.probs[m:]) + self.tail

    def to_json(self) -> list[dict]:
        rows = [{"i": i, **p.to_json()} for i, p in enumerate(self.probs)]
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["i", "num", "exp", "value"])
        for i, p in enumerate(self.probs):
            writer.writerow([i, str(p.num), p.exp, repr(float(p))])
        writer.writerow([f">={self.i_max + 1}", str(self.tail.num), self.tail.exp, repr(float(self.tail))])
        return buf.getvalue()


def exact_distribution(k: int, i_max: int) -> ReturnDistribution:
    probs = tuple(exact_return_count_prob(k, i) for i in range(i_max + 1))
    return ReturnDistribution(k, 0, None, probs, Dyadic(1, k * (i_max + 1)))


def exact_f1_distribution(v_max: int) -> ReturnDistribution:
    probs = tuple(f1_visit_count_prob(v) for v in range(v_max + 1))
    # at least v_max+1 visits: w_1 = +1 and the first v_max aligned blocks are patterns
    return ReturnDistribution(3, 1, None, probs, Dyadic(1, 1 + 3 * v_max))


def brute_force_distribution(
    spec: KBonacciSpec,
    target: int,
    prefix_len: int,
    *,
    i_max: int | None = None,
    cap: int | None = None,
    workers: int = 1,
) -> ReturnDistribution:
    """Visit-count law within the first ``prefix_len`` steps, by full enumeration.

    By default ``i_max`` is one less than the largest visit count seen, so
    the tail holds the top count; an unreachable target puts all mass at 0.
    """
    cap = enumeration_cap() if cap is None else cap
    if prefix_len > cap:
        raise EnumerationCapError(f"prefix length {prefix_len} exceeds enumeration cap {cap}")
    if prefix_len < 0:
        raise ValueError(f"prefix_len must be >= 0, got {prefix_len}")
    enum = enumerate_visits(spec, target, prefix_len, workers=workers)
    hist = enum.histogram
    top = max(c for c, n in enumerate(hist) if n)
    if i_max is None:
        i_max = max(top - 1, 0)
    probs = tuple(Dyadic.from_count(hist[i] if i < len(hist) else 0, prefix_len) for i in range(i_max + 1))
    tail = Dyadic.from_count(sum(hist[i_max + 1 :]), prefix_len)
    return ReturnDistribution(spec.k, target, prefix_len, probs, tail, tuple(hist))


def bruteforce_event_prob(spec: KBonacciSpec, length: int, predicate) -> Dyadic:
    """Probability that ``predicate(sums)`` holds, over all sign vectors of ``length``.

    ``sums[n]`` is ``F_n`` with ``sums[0] = 0``. Pure Python; meant for short prefixes.
    """
    f = generate(spec, length).terms
    hits = 0
    for mask in range(1 << length):
        sums = [0]
        for n in range(1, length + 1):
            sums.append(sums[-1] + (-f[n] if (mask >> (n - 1)) & 1 else f[n]))
        if predicate(sums):
            hits += 1
    return Dyadic.from_count(hits, length)


def f1_event_bruteforce(i: int) -> Dyadic:
    """``P(E_i)`` for the order-3 walk, by enumerating all prefixes of length ``4i+5``."""
    a, b = 4 * i + 1, 4 * (i + 1) + 1
    return bruteforce_event_prob(tribonacci_spec(), b, lambda s: s[a] == 1 and s[b] != 1)


# -- Monte Carlo ----------------------------------------------------------------

@dataclass
class MonteCarloResult:
    """Empirical visit statistics from ``trials`` simulated prefixes."""

    k: int
    target: int
    horizon: int
    trials: int
    seed: int
    count_hist: list[int]
    step_hits: list[int]

    def freq_count(self, c: int) -> float:
        return (self.count_hist[c] if c < len(self.count_hist) else 0) / self.trials

    def freq_hit(self, n: int) -> float:
        """Empirical ``P(F_n = target)``, 1-based ``n``."""
        return self.step_hits[n - 1] / self.trials

    def stderr(self, p: float) -> float:
        return float(np.sqrt(p * (1.0 - p) / self.trials))

    def z_score(self, empirical: float, exact: Dyadic) -> float:
        p = float(exact)
        se = self.stderr(p)
        if se == 0.0:
            return 0.0 if empirical == p else float("inf")
        return (empirical - p) / se

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "target": str(self.target),
            "horizon": self.horizon,
            "trials": self.trials,
            "seed": self.seed,
            "counts": [
                {"visits": c, "n": n, "freq": n / self.trials, "stderr": self.stderr(n / self.trials)}
                for c, n in enumerate(self.count_hist)
            ],
            "step_hits": [
                {"step": s, "n": n, "freq": n / self.trials, "stderr": self.stderr(n / self.trials)}
                for s, n in enumerate(self.step_hits, start=1)
            ],
        }


def _mc_batch(f_arr, target, horizon, seed, batch, size):
    bits = trial_bits(seed, batch, size, horizon)
    signs = 1 - 2 * bits.astype(f_arr.dtype if f_arr.dtype != object else np.int64)
    if f_arr.dtype == object:
        signs = signs.astype(object)
    sums = np.cumsum(signs * f_arr[None, :], axis=1)
    hits = sums == target
    counts = hits.sum(axis=1).astype(np.int64)
    return np.bincount(counts, minlength=horizon + 1), hits.sum(axis=0).astype(np.int64)


def monte_carlo_distribution(
    spec: KBonacciSpec,
    target: int,
    horizon: int,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> MonteCarloResult:
    """Simulate ``trials`` walks of ``horizon`` steps.

    Trials are cut into fixed batches of ``MC_BATCH``; batch ``b`` draws from
    Philox stream ``(seed, b)``. Results are therefore identical for any
    ``workers`` value.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    f = generate(spec, horizon).terms[1:]
    f_arr = np.array(f, dtype=np.int64 if int64_safe(f, target) else object)
    sizes = [min(MC_BATCH, trials - start) for start in range(0, trials, MC_BATCH)]
    count_hist = np.zeros(horizon + 1, dtype=np.int64)
    step_hits = np.zeros(horizon, dtype=np.int64)

    def run(b):
        return _mc_batch(f_arr, target, horizon, seed, b, sizes[b])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(sizes))))
    else:
        results = [run(b) for b in range(len(sizes))]
    for ch, sh in results:
        count_hist += ch
        step_hits += sh
    return MonteCarloResult(
        spec.k, target, horizon, trials, seed,
        [int(x) for x in count_hist], [int(x) for x in step_hits],
    )
