"""k-bonacci sequences with arbitrary-precision terms.

A sequence of order ``k`` starts at ``f_0 = 0``, takes ``k`` user-supplied
initial terms ``f_1..f_k`` and continues with ``f_n = f_{n-1} + ... + f_{n-k}``.
The initial terms must be *admissible*: no signed sum ``±f_1 ± ... ± f_n``
with ``n <= k`` may vanish.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from itertools import product

MAX_VALIDATED_ORDER = 30

TRIBONACCI_INIT = (1, 3, 6)


class SpecError(ValueError):
    """Invalid order or wrong number of initial terms."""


class AdmissibilityError(SpecError):
    """Initial terms admit a vanishing signed partial sum.

    ``n`` is the partial-sum length and ``signs`` the offending sign vector.
    """

    def __init__(self, n: int, signs: tuple[int, ...]):
        self.n = n
        self.signs = signs
        text = "".join("+" if s > 0 else "-" for s in signs)
        super().__init__(f"signed sum of f_1..f_{n} vanishes for signs {text}")


def first_vanishing_sum(init) -> tuple[int, tuple[int, ...]] | None:
    """Return the first ``(n, signs)`` with ``sum(signs[j] * init[j]) == 0``.

    Lengths are scanned in increasing order, sign vectors in lexicographic
    order with ``+1`` before ``-1``. ``None`` means the terms are admissible.
    """
    for n in range(1, len(init) + 1):
        terms = init[:n]
        for signs in product((1, -1), repeat=n):
            if sum(s * t for s, t in zip(signs, terms)) == 0:
                return n, signs
    return None


@dataclass(frozen=True)
class KBonacciSpec:
    """Order ``k`` plus the initial terms ``f_1..f_k``; validated on construction."""

    k: int
    init: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "init", tuple(int(x) for x in self.init))
        if self.k < 2:
            raise SpecError(f"order k must be >= 2, got {self.k}")
        if len(self.init) != self.k:
            raise SpecError(f"expected {self.k} initial terms, got {len(self.init)}")
        if self.k > MAX_VALIDATED_ORDER:
            raise SpecError(
                f"order k={self.k} exceeds {MAX_VALIDATED_ORDER}; admissibility check is exhaustive"
            )
        if 0 in self.init:
            raise SpecError("initial terms must be nonzero")
        bad = first_vanishing_sum(self.init)
        if bad is not None:
            raise AdmissibilityError(*bad)

    @property
    def positive(self) -> bool:
        return all(x > 0 for x in self.init)

    def terms(self, n_max: int) -> list[int]:
        return generate(self, n_max).terms

    def to_json(self) -> dict:
        return {"k": self.k, "init": list(self.init)}

    @classmethod
    def from_json(cls, obj: dict | str) -> "KBonacciSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return make_spec(int(obj["k"]), [int(x) for x in obj["init"]])


def make_spec(k: int, init) -> KBonacciSpec:
    return KBonacciSpec(k, tuple(init))


def powers_init(k: int) -> KBonacciSpec:
    """Initial terms ``f_n = 1 + f_0 + ... + f_{n-1}``, i.e. ``1, 2, 4, ..., 2**(k-1)``."""
    if k < 2:
        raise SpecError(f"order k must be >= 2, got {k}")
    init = [0]
    for _ in range(k):
        init.append(1 + sum(init))
    return KBonacciSpec(k, tuple(init[1:]))


def tribonacci_spec() -> KBonacciSpec:
    """The order-3 sequence 0, 1, 3, 6, 10, 19, ... used for visits to ``f_1``."""
    return KBonacciSpec(3, TRIBONACCI_INIT)


@dataclass(frozen=True)
class SequenceTable:
    spec: KBonacciSpec
    terms: list[int] = field(hash=False)

    def __getitem__(self, n: int) -> int:
        return self.terms[n]

    def __len__(self) -> int:
        return len(self.terms)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["n", "f_n"])
        for n, f in enumerate(self.terms):
            writer.writerow([n, str(f)])
        return buf.getvalue()


def kbonacci_terms(k: int, init, n_max: int) -> list[int]:
    """``f_0..f_{n_max}`` without any admissibility check."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    terms = [0, *init][: n_max + 1]
    # running window sum keeps generation linear in n_max
    window = sum(terms[-k:])
    while len(terms) <= n_max:
        nxt = window
        window += nxt - terms[-k]
        terms.append(nxt)
    return terms


def generate(spec: KBonacciSpec, n_max: int) -> SequenceTable:
    return SequenceTable(spec, kbonacci_terms(spec.k, spec.init, n_max))


@dataclass(frozen=True)
class GrowthReport:
    ok: bool
    n_checked: int
    violation: dict | None = None
    advisory: bool = False

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "n_checked": self.n_checked,
            "violation": self.violation,
            "advisory": self.advisory,
        }


def check_growth_inequalities(spec: KBonacciSpec, n_max: int) -> GrowthReport:
    """Check ``f_1 + ... + f_n < f_{n+2}`` and ``2 f_n >= 1 + f_{n+1}`` for ``k+1 <= n <= n_max``.

    The inequalities are only expected for positive initial terms; for specs
    with a negative entry the report is flagged ``advisory``.
    """
    k = spec.k
    if n_max < k + 1:
        raise ValueError(f"n_max must be >= k+1 = {k + 1}, got {n_max}")
    f = generate(spec, n_max + 2).terms
    partial = sum(f[1 : k + 1])
    advisory = not spec.positive
    for n in range(k + 1, n_max + 1):
        partial += f[n]
        if not partial < f[n + 2]:
            return GrowthReport(False, n - k, {"n": n, "inequality": "sum_lt_f_n_plus_2",
                                              "lhs": str(partial), "rhs": str(f[n + 2])}, advisory)
        if not 2 * f[n] >= 1 + f[n + 1]:
            return GrowthReport(False, n - k, {"n": n, "inequality": "two_f_n_ge_1_plus_f_n_plus_1",
                                              "lhs": str(2 * f[n]), "rhs": str(1 + f[n + 1])}, advisory)
    return GrowthReport(True, n_max - k, None, advisory)
