"""Command-line interface.

Subcommands: sequence, walk, probs, dimension, montecarlo, verify.

Output goes to stdout as JSON (default), CSV or a plain table. Exact
rationals are written as ``{"num": "<decimal>", "exp": <int>}`` and large
integers as decimal strings. Exit status: 0 when every agreement check
passed, 1 when a check disagreed, 2 on invalid input (with a JSON error
object on stdout).

Flags override values from ``--config FILE`` (a JSON object with the same
keys as the long flags, dashes replaced by underscores), which override the
built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from . import characterize as ch
from . import fractal as fr
from . import probability as pr
from . import verify as vf
from .dyadic import Dyadic
from .sequence import (
    AdmissibilityError,
    SpecError,
    check_growth_inequalities,
    generate,
    make_spec,
    powers_init,
    tribonacci_spec,
)
from .walk import partial_sums, simulate, visit_times, SignSequence

DEFAULTS = {
    "k": 2,
    "format": "json",
    "n": 20,
    "target": "zero",
    "imax": 2,
    "mmax": 120,
    "trials": 10**5,
    "horizon": None,
    "tolerance": 1e-12,
    "workers": 1,
    "zmax": vf.Z_MAX,
}


MIN_GATED_VARIANCE = 10.0


class UsageError(Exception):
    pass


# -- helpers ------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _resolve(args, name):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in args.config_values:
        return args.config_values[name]
    return DEFAULTS.get(name)


def _spec(args):
    if _resolve(args, "tribonacci"):
        return tribonacci_spec()
    k = int(_resolve(args, "k"))
    init = _resolve(args, "init")
    if init is not None and not _resolve(args, "powers"):
        if isinstance(init, str):
            init = _int_list(init)
        return make_spec(k, init)
    return powers_init(k)


def _target(args, spec) -> tuple[int, str]:
    raw = str(_resolve(args, "target"))
    f1 = spec.init[0]
    if raw in ("zero", "0"):
        return 0, "0"
    if raw == "f1":
        return f1, "f1"
    if raw in ("neg_f1", "-f1"):
        return -f1, "-f1"
    try:
        value = int(raw)
    except ValueError as exc:
        raise UsageError(f"target must be zero, f1, neg_f1 or an integer, got {raw!r}") from exc
    return value, str(value)


def _emit(obj, fmt: str, csv_text: str | None = None, table: str | None = None) -> None:
    if fmt == "csv" and csv_text is not None:
        sys.stdout.write(csv_text)
    elif fmt == "table" and table is not None:
        sys.stdout.write(table.rstrip("\n") + "\n")
    else:
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _rows_table(header, rows) -> str:
    cols = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cols)


# -- subcommands --------------------------------------------------------------------

def cmd_sequence(args) -> int:
    spec = _spec(args)
    n = int(_resolve(args, "n"))
    table = generate(spec, n)
    out = {"spec": spec.to_json(), "terms": [str(t) for t in table.terms]}
    if args.check_growth:
        report = check_growth_inequalities(spec, max(n, spec.k + 1))
        out["growth"] = report.to_json()
    _emit(out, _resolve(args, "format"), table.to_csv(),
          _rows_table(["n", "f_n"], list(enumerate(table.terms))))
    return 0 if out.get("growth", {}).get("ok", True) else 1


def _predicate(spec, signs: SignSequence, target_label: str, target: int):
    trace = partial_sums(spec, signs)
    actual = visit_times(trace, target)
    if target_label == "0":
        predicted = ch.predicted_zero_times(signs, spec.k)
    elif spec == tribonacci_spec() and target_label == "f1":
        predicted = ch.predicted_f1_times_tribonacci(signs)
    elif spec == tribonacci_spec() and target_label == "-f1":
        predicted = ch.predicted_neg_f1_times_tribonacci(signs)
    else:
        predicted = None
    return trace, {
        "n": len(signs),
        "predicted": predicted,
        "actual": actual,
        "agree": None if predicted is None else predicted == actual,
    }


def cmd_walk(args) -> int:
    spec = _spec(args)
    target, label = _target(args, spec)
    if args.signs is not None:
        signs = SignSequence.from_text(args.signs)
    else:
        seed = _resolve(args, "seed")
        horizon = _resolve(args, "horizon")
        if seed is None or horizon is None:
            raise UsageError("walk needs --signs, or --seed together with --horizon")
        signs = simulate(spec, int(horizon), int(seed))
    trace, pred = _predicate(spec, signs, label, target)
    out = {"spec": spec.to_json(), "target": label, "signs": signs.to_text(),
           "sums": [str(s) for s in trace.sums], **pred}
    rows = [(n, w, s) for n, (w, s) in enumerate(zip(signs.signs, trace.sums), start=1)]
    _emit(out, _resolve(args, "format"), trace.to_csv(), _rows_table(["n", "w_n", "F_n"], rows))
    return 1 if pred["agree"] is False else 0


def _probs_zero(spec, i_max: int, workers: int, as_stated: bool) -> dict:
    k = spec.k
    length = (k + 1) * (i_max + 1)
    brute = pr.brute_force_distribution(spec, 0, length, i_max=i_max, workers=workers)
    exact = pr.exact_distribution(k, i_max)
    rows = [p.to_json() | {"i": i, "agree": p == b}
            for i, (p, b) in enumerate(zip(exact.probs, brute.probs))]
    out = {
        "k": k,
        "target": "0",
        "prefix_len": length,
        "exact": [{"i": r["i"], "num": r["num"], "exp": r["exp"]} for r in rows],
        "bruteforce": brute.to_json(),
        "tail": {"exact": exact.tail.to_json(), "bruteforce": brute.tail.to_json()},
        "per_i_agree": [r["agree"] for r in rows],
        "agree": all(r["agree"] for r in rows) and exact.tail == brute.tail,
    }
    if as_stated:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", pr.AsStatedFormulaWarning)
            stated = [pr.exact_return_count_prob(k, i, as_stated=True) for i in range(i_max + 1)]
        out["as_stated"] = [{"i": i, **p.to_json(), "matches_bruteforce": p == brute.probs[i]}
                            for i, p in enumerate(stated)]
        out["note"] = ("1/2^((k+1)i) is shown for comparison only; it disagrees with enumeration "
                       "for i >= 1 and does not sum to 1")
    return out


def _probs_f1(spec, label: str, i_max: int, workers: int) -> dict:
    if spec != tribonacci_spec():
        raise UsageError("targets f1 / neg_f1 have closed forms only for --tribonacci")
    target = 1 if label == "f1" else -1
    length = 4 * (i_max + 1) + 1
    brute = pr.brute_force_distribution(spec, target, length, i_max=i_max + 1, workers=workers)
    formula = [pr.f1_visit_count_prob(v) for v in range(i_max + 2)]
    agree_counts = [a == b for a, b in zip(formula, brute.probs)]
    events = []
    for i in range(i_max + 1):
        exact = pr.exact_f1_event_prob(i)
        # the event E_i is exactly i+1 visits, read off the enumerated count table
        oracle = brute.probs[pr.f1_event_visit_count(i)]
        events.append({"i": i, **exact.to_json(), "visits": pr.f1_event_visit_count(i),
                       "bruteforce": oracle.to_json(), "agree": exact == oracle})
    return {
        "k": 3,
        "target": label,
        "prefix_len": length,
        "exact": [{"i": i, **p.to_json()} for i, p in enumerate(formula)],
        "bruteforce": brute.to_json(),
        "events": events,
        "agree": all(agree_counts) and all(e["agree"] for e in events),
        "note": ("exact[i] is P(exactly i visits), counting n=1; the event "
                 "{F_(4i+1)=1, F_(4i+5)!=1} with probability 7/2^(3(i+1)+1) is exactly i+1 visits"),
    }


def cmd_probs(args) -> int:
    spec = _spec(args)
    target, label = _target(args, spec)
    i_max = int(_resolve(args, "imax"))
    workers = int(_resolve(args, "workers"))
    if label == "0":
        out = _probs_zero(spec, i_max, workers, args.as_stated)
    elif label in ("f1", "-f1"):
        out = _probs_f1(spec, label, i_max, workers)
    else:
        length = _resolve(args, "horizon") or (spec.k + 1) * (i_max + 1)
        brute = pr.brute_force_distribution(spec, target, int(length), workers=workers)
        out = {"k": spec.k, "target": label, "prefix_len": int(length), "exact": [],
               "bruteforce": brute.to_json(), "agree": True}
    rows = [(r["i"], f'{r["num"]}/2^{r["exp"]}') for r in out["bruteforce"]]
    csv_lines = ["i,num,exp"] + [f'{r["i"]},{r["num"]},{r["exp"]}' for r in out["bruteforce"]]
    _emit(out, _resolve(args, "format"), "\r\n".join(csv_lines) + "\r\n", _rows_table(["i", "bruteforce"], rows))
    return 0 if out["agree"] else 1


def cmd_dimension(args) -> int:
    fmt = _resolve(args, "format")
    tol = float(_resolve(args, "tolerance"))
    ratios = _resolve(args, "ratios")
    if ratios is not None:
        if isinstance(ratios, str):
            ratios = _float_list(ratios)
        system = fr.SimilaritySystem(tuple(ratios))
        s = fr.moran_dimension(system, tol)
        out = {"ratios": list(system.ratios), "moran": s}
        if len(set(system.ratios)) == 1:
            out["closed_form"] = fr.equal_ratio_dimension(len(system.ratios), system.ratios[0])
        _emit(out, fmt, None, f"moran  {s!r}")
        return 0
    m_max = int(_resolve(args, "mmax"))
    if args.tribonacci_f1:
        profile = fr.tribonacci_f1_dimension(m_max)
        moran = fr.moran_dimension(fr.SimilaritySystem.kbonacci(3), tol)
    else:
        k = int(_resolve(args, "k"))
        profile = fr.box_dimension_estimate(k, m_max)
        moran = fr.moran_dimension(fr.SimilaritySystem.kbonacci(k), tol)
    out = profile.to_json() | {"moran": moran, "moran_abs_error": abs(moran - profile.target)}
    rows = [(m, n, float(d)) for m, n, d in profile.entries]
    table = _rows_table(["m", "N_m", "delta"], rows) + (
        f"\nslope {profile.fitted_slope:.6f}  r2 {profile.r_squared:.6f}  "
        f"target {profile.target:.6f}  moran {moran:.12f}"
    )
    _emit(out, fmt, profile.to_csv(), table)
    return 0


def cmd_montecarlo(args) -> int:
    seed = _resolve(args, "seed")
    if seed is None:
        raise UsageError("montecarlo requires an explicit --seed")
    spec = _spec(args)
    target, label = _target(args, spec)
    k = spec.k
    horizon = int(_resolve(args, "horizon") or 4 * (k + 1))
    trials = int(_resolve(args, "trials"))
    zmax = float(_resolve(args, "zmax"))
    res = pr.monte_carlo_distribution(spec, target, horizon, trials, int(seed),
                                      workers=int(_resolve(args, "workers")))
    comparisons = []
    if label == "0":
        for i in range(horizon // (k + 1)):
            # exactly-i is decided by the first i+1 blocks
            comparisons.append((f"exactly_{i}", res.freq_count(i), pr.exact_return_count_prob(k, i)))
        for i in range(1, horizon // (k + 1) + 1):
            comparisons.append((f"return_at_{(k + 1) * i}", res.freq_hit((k + 1) * i), pr.exact_zero_hit_prob(k, i)))
    elif label == "f1" and spec == tribonacci_spec():
        for v in range((horizon - 1) // 4):
            comparisons.append((f"exactly_{v}", res.freq_count(v), pr.f1_visit_count_prob(v)))
    rows = []
    for name, emp, exact in comparisons:
        z = res.z_score(emp, exact)
        p = float(exact)
        # z-scores are only meaningful once the normal approximation holds
        gated = trials * p * (1.0 - p) >= MIN_GATED_VARIANCE
        rows.append({"event": name, "empirical": emp, "exact": exact.to_json(),
                     "stderr": res.stderr(p), "z": z, "gated": gated, "ok": abs(z) < zmax or not gated})
    out = res.to_json() | {"target": label, "zmax": zmax, "comparisons": rows,
                           "agree": all(r["ok"] for r in rows)}
    table = _rows_table(["event", "empirical", "exact", "z"],
                        [(r["event"], f'{r["empirical"]:.6f}', f'{float(Dyadic.from_json(r["exact"])):.6f}',
                          f'{r["z"]:+.3f}') for r in rows])
    csv_lines = ["event,empirical,exact_num,exact_exp,stderr,z"] + [
        f'{r["event"]},{r["empirical"]!r},{r["exact"]["num"]},{r["exact"]["exp"]},{r["stderr"]!r},{r["z"]!r}'
        for r in rows
    ]
    _emit(out, _resolve(args, "format"), "\r\n".join(csv_lines) + "\r\n", table)
    return 0 if out["agree"] else 1


def cmd_verify(args) -> int:
    results = vf.run_all()
    fmt = _resolve(args, "format")
    if fmt == "json":
        _emit({"checks": [r.to_json() for r in results], "ok": all(r.ok for r in results)}, fmt)
    else:
        sys.stdout.write("\n".join(r.line() for r in results) + "\n")
    return 0 if all(r.ok for r in results) else 1


# -- parser ----------------------------------------------------------------------------

def _add_spec_flags(p):
    p.add_argument("--k", type=int, help="order k >= 2 (default 2)")
    p.add_argument("--init", help="comma-separated initial terms f_1..f_k")
    p.add_argument("--powers", action="store_true", default=None, help="initial terms 1, 2, 4, ...")
    p.add_argument("--tribonacci", action="store_true", default=None, help="order 3 with initial terms 1, 3, 6")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of default flag values")
    common.add_argument("--format", choices=["json", "csv", "table"])
    parser = argparse.ArgumentParser(prog="kbwalk", description="k-bonacci random walks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sequence", parents=[common], help="generate f_0..f_n")
    _add_spec_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--check-growth", action="store_true")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("walk", parents=[common], help="partial sums and visit times of one walk")
    _add_spec_flags(p)
    p.add_argument("--signs", help="sign word such as ++-")
    p.add_argument("--seed", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--target", help="zero, f1, neg_f1 or an integer")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("probs", parents=[common], help="exact return probabilities against enumeration")
    _add_spec_flags(p)
    p.add_argument("--target")
    p.add_argument("--imax", type=int)
    p.add_argument("--horizon", type=int, help="prefix length for custom targets")
    p.add_argument("--as-stated", action="store_true", help="also show 1/2^((k+1)i)")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_probs)

    p = sub.add_parser("dimension", parents=[common], help="box-counting slope and Moran root")
    p.add_argument("--k", type=int)
    p.add_argument("--mmax", type=int)
    p.add_argument("--tribonacci-f1", action="store_true")
    p.add_argument("--ratios", help="comma-separated contraction ratios")
    p.add_argument("--tolerance", type=float)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("montecarlo", parents=[common], help="simulated visit statistics with z-scores")
    _add_spec_flags(p)
    p.add_argument("--target")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--zmax", type=float)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("verify", parents=[common], help="run every oracle check")
    p.set_defaults(func=cmd_verify)
    return parser


def _error(kind: str, message: str, **extra) -> int:
    sys.stdout.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")
    return 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.config_values = {}
    try:
        if args.config:
            with open(args.config) as fh:
                args.config_values = json.load(fh)
        return args.func(args)
    except AdmissibilityError as exc:
        return _error("admissibility", str(exc), n=exc.n, signs="".join("+" if s > 0 else "-" for s in exc.signs))
    except pr.EnumerationCapError as exc:
        return _error("enumeration_cap", str(exc))
    except (SpecError, UsageError, ValueError, OSError) as exc:
        return _error(type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
