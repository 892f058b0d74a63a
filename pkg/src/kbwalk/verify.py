"""One-shot reproduction: every oracle check, one result line each.

Each ``check_*`` function returns a :class:`CheckResult`. Tolerances and
seeds are module constants so the CLI ``verify`` command and the test-suite
run identical checks.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import characterize as ch
from . import fractal as fr
from . import probability as pr
from .dyadic import Dyadic, dyadic_sum
from .sequence import AdmissibilityError, kbonacci_terms, make_spec, powers_init, tribonacci_spec
from .walk import SignSequence, enumerate_visits, signed_partial_sums

SLOPE_TOL = 0.02
MORAN_TOL = 1e-12
Z_MAX = 4.0
MC_SEED = 20261015
MC_TRIALS = 10**6
SLOPE_M_MAX = {2: 120, 3: 150, 4: 150, 5: 150}
TRIBONACCI_M_MAX = 121


@dataclass
class CheckResult:
    name: str
    ok: bool
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name} ({self.seconds:.2f}s)"

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "seconds": round(self.seconds, 3), "detail": self.detail}


def _timed(name):
    def wrap(fn):
        def run(*args, **kwargs) -> CheckResult:
            t0 = time.perf_counter()
            ok, detail = fn(*args, **kwargs)
            return CheckResult(name, bool(ok), time.perf_counter() - t0, detail)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed("fibonacci anchor: P(exactly i returns) = 3/4^(i+1), k=2, i<=5")
def check_fibonacci_anchor():
    rows = []
    ok = True
    for i in range(6):
        anchor = Dyadic.of(Fraction(3, 4 ** (i + 1)))
        exact = pr.exact_return_count_prob(2, i)
        brute = pr.brute_force_distribution(powers_init(2), 0, 3 * (i + 1), i_max=i).probs[i]
        agree = exact == anchor == brute
        ok &= agree
        rows.append({"i": i, "exact": str(exact), "bruteforce": str(brute), "agree": agree})
    return ok, {"rows": rows}


@_timed("return-count law (2^k-1)/2^(k(i+1)) vs enumeration, k=2,3,4, prefix<=26")
def check_return_count_law():
    per_k = []
    ok = True
    for k in (2, 3, 4):
        i_max = 26 // (k + 1) - 1
        length = (k + 1) * (i_max + 1)
        dist = pr.brute_force_distribution(powers_init(k), 0, length, i_max=i_max)
        exact = [pr.exact_return_count_prob(k, i) for i in range(i_max + 1)]
        agree = list(dist.probs) == exact
        normalized = dist.total() == 1 and dist.tail == Dyadic(1, k * (i_max + 1))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", pr.AsStatedFormulaWarning)
            stated = [pr.exact_return_count_prob(k, i, as_stated=True) for i in range(i_max + 1)]
        stated_fails = all(stated[i] != dist.probs[i] for i in range(1, i_max + 1))
        ok &= agree and normalized and stated_fails
        per_k.append({"k": k, "prefix_len": length, "i_max": i_max, "agree": agree,
                      "normalized": normalized, "as_stated_rejected": stated_fails})
    return ok, {"per_k": per_k}


def zero_return_mismatches(spec, length: int) -> int:
    truth = enumerate_visits(spec, 0, length, want_masks=True).masks
    predicted = ch.predicted_zero_masks(length, spec.k)
    return int(np.count_nonzero(truth != predicted))


@_timed("zero-return characterization vs big-integer visits, all words of length min(20, 4(k+1))")
def check_zero_characterization():
    rows = []
    specs = [powers_init(2), powers_init(3), tribonacci_spec(), powers_init(4)]
    for spec in specs:
        length = min(20, 4 * (spec.k + 1))
        rows.append({"spec": spec.to_json(), "length": length, "mismatches": zero_return_mismatches(spec, length)})
    return all(r["mismatches"] == 0 for r in rows), {"rows": rows}


@_timed("non-pattern block bounds, all words with p+k<=16, k=2,3")
def check_block_bounds():
    rows = []
    for spec in (powers_init(2), powers_init(3), tribonacci_spec()):
        for p in range(1, 16 - spec.k + 1):
            sweep = ch.lemma_pp_exhaustive(spec, p)
            rows.append({"spec": spec.to_json(), "p": p, "checked": sweep.checked,
                         "block_violations": sweep.block_violations, "walk_violations": sweep.walk_violations})
    ok = all(r["block_violations"] == 0 and r["walk_violations"] == 0 for r in rows)
    return ok, {"sweeps": len(rows), "checked": sum(r["checked"] for r in rows),
                "violations": sum(r["block_violations"] + r["walk_violations"] for r in rows)}


def f1_mismatches(length: int = 13) -> dict:
    spec = tribonacci_spec()
    plus = enumerate_visits(spec, 1, length, want_masks=True).masks
    minus = enumerate_visits(spec, -1, length, want_masks=True).masks
    bad_plus = bad_minus = 0
    for mask in range(1 << length):
        word = SignSequence.from_mask(mask, length)
        pred_plus = sum(1 << (n - 1) for n in ch.predicted_f1_times_tribonacci(word))
        pred_minus = sum(1 << (n - 1) for n in ch.predicted_neg_f1_times_tribonacci(word))
        bad_plus += int(plus[mask]) != pred_plus
        bad_minus += int(minus[mask]) != pred_minus
    return {"length": length, "plus_mismatches": bad_plus, "minus_mismatches": bad_minus}


@_timed("tribonacci visits to f1: E_i law, visit-count table, characterization incl. -f1 mirror")
def check_tribonacci_f1():
    events = []
    ok = True
    for i in (0, 1):
        exact = pr.exact_f1_event_prob(i)
        brute = pr.f1_event_bruteforce(i)
        ok &= exact == brute
        events.append({"i": i, "exact": str(exact), "bruteforce": str(brute),
                       "visits_on_event": pr.f1_event_visit_count(i)})
    dist = pr.brute_force_distribution(tribonacci_spec(), 1, 9, i_max=2)
    table = [{"visits": v, "bruteforce": str(p), "formula": str(pr.f1_visit_count_prob(v))}
             for v, p in enumerate(dist.probs)]
    ok &= all(row["bruteforce"] == row["formula"] for row in table)
    # sum over i > 40 of 7/2^(3i+4) is 1/2^124
    partition = dyadic_sum(pr.exact_f1_event_prob(i) for i in range(41)) + Dyadic(1, 124)
    ok &= partition == Dyadic(1, 1)
    mism = f1_mismatches(13)
    ok &= mism["plus_mismatches"] == 0 and mism["minus_mismatches"] == 0
    return ok, {"events": events, "visit_table": table, "partition_half": partition == Dyadic(1, 1), **mism}


@_timed("box dimension 1/(k+1), Moran root, self-similarity, k=2..5")
def check_box_dimension():
    rows = []
    ok = True
    for k in (2, 3, 4, 5):
        prof = fr.box_dimension_estimate(k, SLOPE_M_MAX[k])
        moran = fr.moran_dimension(fr.SimilaritySystem.kbonacci(k), MORAN_TOL)
        ss = fr.verify_self_similarity(k, 3)
        row_ok = prof.abs_error <= SLOPE_TOL and abs(moran - 1 / (k + 1)) <= MORAN_TOL and ss.ok
        ok &= row_ok
        rows.append({"k": k, "m_max": SLOPE_M_MAX[k], "slope": prof.fitted_slope, "moran": moran,
                     "self_similar": ss.ok, "ok": row_ok})
    return ok, {"rows": rows}


@_timed("tribonacci f1 set: slope 1/4, prepend map halves distances")
def check_tribonacci_dimension():
    prof = fr.tribonacci_f1_dimension(TRIBONACCI_M_MAX)
    bad = fr.prepend_plus_check(pairs=100, depth=64)
    ok = prof.abs_error <= SLOPE_TOL and bad == 0
    return ok, {"slope": prof.fitted_slope, "halving_violations": bad}


def montecarlo_checks(k: int, trials: int = MC_TRIALS, seed: int = MC_SEED, workers: int = 1):
    """z-scores of the first return events against exact values; horizon ``4(k+1)``."""
    spec = powers_init(k)
    horizon = 4 * (k + 1)
    res = pr.monte_carlo_distribution(spec, 0, horizon, trials, seed, workers=workers)
    checks = {
        "exactly_0": (res.freq_count(0), pr.exact_return_count_prob(k, 0)),
        "exactly_1": (res.freq_count(1), pr.exact_return_count_prob(k, 1)),
        "return_at_k+1": (res.freq_hit(k + 1), pr.exact_zero_hit_prob(k, 1)),
        "return_at_2(k+1)": (res.freq_hit(2 * (k + 1)), pr.exact_zero_hit_prob(k, 2)),
    }
    return res, {name: res.z_score(emp, exact) for name, (emp, exact) in checks.items()}


@_timed("Monte Carlo gate: |z| < 4 at 1e6 trials, reruns byte-identical")
def check_montecarlo(trials: int = MC_TRIALS):
    rows = []
    ok = True
    for k in (2, 3):
        res, z = montecarlo_checks(k, trials)
        rerun, _ = montecarlo_checks(k, trials, workers=4)
        identical = json.dumps(res.to_json()) == json.dumps(rerun.to_json())
        row_ok = identical and all(abs(v) < Z_MAX for v in z.values())
        ok &= row_ok
        rows.append({"k": k, "z": z, "identical": identical})
    return ok, {"seed": MC_SEED, "trials": trials, "rows": rows}


def inadmissible_zero_hits(k: int = 2, init=(1, 1)) -> list[str]:
    """Sign words shorter than ``k+1`` whose partial sum vanishes for unvalidated ``init``."""
    terms = kbonacci_terms(k, init, k)
    found = []
    for length in range(1, k + 1):
        for mask in range(1 << length):
            word = SignSequence.from_mask(mask, length)
            if signed_partial_sums(terms, word)[-1] == 0:
                found.append(word.to_text())
    return found


@_timed("admissibility is necessary: init [1,1] returns to 0 before step 3")
def check_admissibility_necessity():
    try:
        make_spec(2, [1, 1])
        rejected = False
    except AdmissibilityError:
        rejected = True
    hits = inadmissible_zero_hits()
    return rejected and bool(hits), {"rejected": rejected, "early_zero_words": hits}


ALL_CHECKS = [
    check_fibonacci_anchor,
    check_return_count_law,
    check_zero_characterization,
    check_block_bounds,
    check_tribonacci_f1,
    check_box_dimension,
    check_tribonacci_dimension,
    check_montecarlo,
    check_admissibility_necessity,
]


def run_all() -> list[CheckResult]:
    return [check() for check in ALL_CHECKS]
