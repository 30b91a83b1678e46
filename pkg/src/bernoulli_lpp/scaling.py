"""Closed-form widths, centring constants and thresholds near the soft edge.

All exponents are in ``(0, 1)``; ``q = 1 - p``.  ``log`` is natural.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

__all__ = [
    "EdgeParams",
    "TwTable",
    "width_m",
    "tw_width",
    "tw_scaling_constants",
    "centering_c",
    "tw_event_threshold",
    "lln_limit",
    "g_a",
    "load_tw_table",
    "tw_cdf",
    "TW_TABLE_ENV",
]

TW_TABLE_ENV = "BLIP_TW_TABLE"


def _pq(p):
    p = float(p)
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return p, 1.0 - p


@dataclass(frozen=True)
class EdgeParams:
    p: float
    a: float
    x: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        _pq(self.p)
        if not 0 < self.a < 1:
            raise ValueError("a must lie in (0, 1)")

    @property
    def q(self) -> float:
        return 1.0 - self.p


def width_m(n: int, p: float, a: float, x: float) -> int:
    """floor(n/p - x n^a), the soft-edge rectangle width."""
    p, _ = _pq(p)
    m = math.floor(n / p - x * n ** a)
    if m < 1:
        raise ValueError(f"width {m} is not positive for n={n}, p={p}, a={a}, x={x}")
    return m


def tw_scaling_constants(p: float, a: float, s: float) -> tuple[float, float]:
    """The fixed offset coefficient x and the shift y(s) of the TW theorem."""
    p, q = _pq(p)
    if not 0 < a < 1:
        raise ValueError("a must lie in (0, 1)")
    x = 2.0 / math.sqrt(p) * (q / p) ** a
    y = s * math.sqrt(p) / q * (p / q) ** ((1 + a) / 3)
    return x, y


def tw_width(n: int, p: float, a: float, s: float, exact: bool = False):
    """n/p - x n^a - y(s) n^((2-a)/3), floored unless ``exact``."""
    x, y = tw_scaling_constants(p, a, s)
    w = n / p - x * n ** a - y * n ** ((2 - a) / 3)
    if exact:
        return w
    m = math.floor(w)
    if m < 1:
        raise ValueError(f"width {m} is not positive")
    return m


def _variant_for(a: float) -> int:
    if 0.5 < a < 2 / 3:
        return 1
    if 2 / 3 <= a < 5 / 7:
        return 2
    raise ValueError(f"a={a} outside (1/2, 5/7)")


def centering_c(n: int, p: float, a: float, variant: int | None = None) -> float:
    p, q = _pq(p)
    if not 0.5 < a < 5 / 7:
        raise ValueError(f"a={a} outside (1/2, 5/7)")
    variant = _variant_for(a) if variant is None else variant
    base = (q / p) ** (2 * a - 1) * n ** (2 * a - 1)
    if variant == 1:
        return base
    if variant == 2:
        x, _ = tw_scaling_constants(p, a, 0.0)
        return base - (2 * a - 1) * x * (q / p) ** (2 * a - 2) * n ** (3 * a - 2)
    raise ValueError("variant must be 1 or 2")


def tw_event_threshold(n: int, p: float, a: float, case: int | None = None) -> float:
    """Right-hand side of the event {G <= threshold} in the TW theorem."""
    p, q = _pq(p)
    if case is None:
        case = 1 if 0.5 < a < 2 / 3 else 2
    if case == 1:
        if not 0.5 < a < 2 / 3:
            raise ValueError("case 1 needs 1/2 < a < 2/3")
        return n - (q * n / p) ** (2 * a - 1)
    if case == 2:
        if not 2 / 3 <= a <= 5 / 7:
            raise ValueError("case 2 needs 2/3 <= a <= 5/7")
        x, _ = tw_scaling_constants(p, a, 0.0)
        return n - (q * n / p) ** (2 * a - 1) + a * x * (q / p) ** (2 * a - 2) * n ** (3 * a - 2)
    raise ValueError("case must be 1 or 2")


def lln_limit(p: float, x: float) -> float:
    p, q = _pq(p)
    return (p * x) ** 2 / (4 * q)


def g_a(n: float, a: float) -> float:
    if n < 2:
        raise ValueError("n must be at least 2")
    if a <= 0.5:
        return math.sqrt(n * math.log(n))
    return n ** a


# --- Tracy-Widom GUE table ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwTable:
    s: np.ndarray
    F: np.ndarray
    sha256: str = ""

    def __post_init__(self):
        s, F = np.asarray(self.s, float), np.asarray(self.F, float)
        if s.shape != F.shape or s.ndim != 1 or s.size < 2:
            raise ValueError("table needs matching 1-d columns")
        if not (np.all(np.diff(s) > 0) and np.all(np.diff(F) > 0)):
            raise ValueError("table must be strictly increasing in s and F")
        if not (F[0] > 0 and F[-1] < 1):
            raise ValueError("table values must lie in (0, 1)")
        if s[0] > -6 or s[-1] < 4 or np.diff(s).max() > 0.1 + 1e-12:
            raise ValueError("table must cover [-6, 4] at step <= 0.1")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "F", F)

    def cdf(self, s):
        return np.interp(s, self.s, self.F, left=self.F[0], right=self.F[-1])


def _read_table(fh) -> tuple[np.ndarray, np.ndarray]:
    rows = list(csv.DictReader(fh))
    return np.array([float(r["s"]) for r in rows]), np.array([float(r["F"]) for r in rows])


@lru_cache(maxsize=4)
def load_tw_table(path: str | None = None) -> TwTable:
    """Load the table from ``path``, the ``BLIP_TW_TABLE`` variable, or package data."""
    path = path or os.environ.get(TW_TABLE_ENV)
    if path:
        with open(path, "rb") as fh:
            raw = fh.read()
    else:
        raw = resources.files("bernoulli_lpp").joinpath("data/tw_gue.csv").read_bytes()
    s, F = _read_table(raw.decode("utf-8").splitlines())
    return TwTable(s, F, hashlib.sha256(raw).hexdigest())


def tw_cdf(s, table: TwTable | None = None):
    """Tracy-Widom GUE distribution function by linear interpolation."""
    table = table or load_tw_table()
    out = table.cdf(s)
    return float(out) if np.ndim(out) == 0 else out
