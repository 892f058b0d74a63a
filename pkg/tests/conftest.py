import json
from itertools import product
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas"


def words(length):
    """All sign tuples of ``length``, +1 before -1."""
    return product((1, -1), repeat=length)


def naive_terms(k, init, n):
    f = [0, *init]
    while len(f) <= n:
        f.append(sum(f[-k:]))
    return f[: n + 1]


def naive_sums(f, w):
    out, s = [], 0
    for n, x in enumerate(w, start=1):
        s += x * f[n]
        out.append(s)
    return out


@pytest.fixture
def schema():
    def load(name):
        return json.loads((SCHEMAS / name).read_text())

    return load
