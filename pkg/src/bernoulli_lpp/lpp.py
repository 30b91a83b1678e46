"""Last-passage dynamic programs on three-step lattice paths.

A diagonal step into site ``(i, j)`` scores ``1`` when ``omega[i, j] = 1``
(a match) and ``-alpha`` otherwise (a mismatch); every axis step (a gap)
scores ``-beta``.  Scores and passage times are exact ``Fraction`` values.

The fast routes scale the rational penalties to integers and maximise the
int64 key ``K * score - gaps`` with ``K = m + n + 1``, which selects the
minimal-gap maximiser (MGM) without a second pass.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .env import Alignment, Environment, IndependentBernoulli, WeightGrid, pack_rows

__all__ = [
    "Step",
    "Path",
    "PathStats",
    "Penalty",
    "as_penalty",
    "as_fraction",
    "format_fraction",
    "corner_growth_T",
    "passage_G",
    "zero_penalty_passage",
    "mgm_stats",
    "mgm_stats_reference",
    "reconstruct_path",
    "path_score",
    "path_stats",
    "enumerate_paths",
    "delannoy",
    "u_n",
    "strategy_S_path",
]

_KEY_LIMIT = 1 << 62


class Step(enum.Enum):
    E1 = "H"
    E2 = "V"
    DIAG = "D"

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]


_DELTAS = {Step.E1: (1, 0), Step.E2: (0, 1), Step.DIAG: (1, 1)}


@dataclass(frozen=True)
class Path:
    steps: tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(Step(s) if not isinstance(s, Step) else s
                                                for s in self.steps))

    @property
    def endpoint(self) -> tuple[int, int]:
        i = sum(s is not Step.E2 for s in self.steps)
        j = sum(s is not Step.E1 for s in self.steps)
        return i, j

    def points(self) -> Iterator[tuple[int, int]]:
        i = j = 0
        yield i, j
        for s in self.steps:
            di, dj = s.delta
            i, j = i + di, j + dj
            yield i, j

    def to_string(self) -> str:
        return "".join(s.value for s in self.steps)

    @classmethod
    def from_string(cls, text: str) -> "Path":
        try:
            return cls(tuple(Step(c) for c in text.strip().upper()))
        except ValueError:
            raise ValueError(f"path strings use only H, V, D: {text!r}") from None

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class PathStats:
    """Mismatches ``x``, gaps ``y``, matches ``z``."""

    x: int
    y: int
    z: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("penalties must be finite")
        return Fraction(repr(v))
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    return Fraction(str(v).strip())


def format_fraction(v: Fraction) -> str:
    v = as_fraction(v)
    return f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class Penalty:
    """Mismatch cost ``alpha`` and gap cost ``beta``, both exact rationals.

    Negative values are accepted; the cone reduction maps into
    ``beta >= -1/2`` and the constant-weight point is ``(-1, -1/2)``.
    """

    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        object.__setattr__(self, "beta", as_fraction(self.beta))


def as_penalty(pen) -> Penalty:
    """Penalty, ``(alpha, beta)`` pair, or a bare ``beta`` with ``alpha = 0``."""
    if isinstance(pen, Penalty):
        return pen
    if isinstance(pen, (tuple, list)):
        alpha, beta = pen
        return Penalty(alpha, beta)
    return Penalty(0, pen)


# --- integer scaling ----------------------------------------------------------

@dataclass(frozen=True)
class _Scaled:
    L: int
    w_match: int
    w_mismatch: int
    w_gap: int
    K: int

    @classmethod
    def of(cls, pen: Penalty, m: int, n: int) -> "_Scaled":
        L = math.lcm(pen.alpha.denominator, pen.beta.denominator)
        return cls(L, L, int(-pen.alpha * L), int(-pen.beta * L), m + n + 1)

    def fits(self, m: int, n: int) -> bool:
        w = max(abs(self.w_match), abs(self.w_mismatch), abs(self.w_gap))
        return (m + n + 1) * (w * self.K + 1) < _KEY_LIMIT

    def decode(self, key: int) -> tuple[int, int]:
        """key -> (scaled score, gaps)."""
        score = -((-key) // self.K)
        return score, score * self.K - key


def _integer_sites(env: Environment) -> np.ndarray:
    return np.ascontiguousarray(env.sites, dtype=np.uint8)


def _stats_from(score_scaled: int, gaps: int, sc: _Scaled, pen: Penalty, m: int, n: int) -> PathStats:
    # 2x = m + n - y - 2z turns the score into a linear equation for z.
    a, b = pen.alpha, pen.beta
    num = Fraction(score_scaled, sc.L) + a * Fraction(m + n - gaps, 2) + b * gaps
    z = num / (1 + a)
    if z.denominator != 1:
        raise ArithmeticError("inconsistent MGM key")
    z = int(z)
    x2 = m + n - gaps - 2 * z
    return PathStats(x2 // 2, gaps, z)


# --- reference dynamic program -----------------------------------------------

_DEFAULT_ORDER = (Step.DIAG, Step.E1, Step.E2)


def _reference_table(env: Environment, pen: Penalty, order: Sequence[Step] = _DEFAULT_ORDER):
    """Pure-Python exact table of (score, -gaps, x, z) with explicit tie order."""
    m, n = env.shape
    a, b = pen.alpha, pen.beta
    t = [[None] * (n + 1) for _ in range(m + 1)]
    t[0][0] = (Fraction(0), 0, 0, 0)
    for i in range(m + 1):
        for j in range(n + 1):
            if i == 0 and j == 0:
                continue
            best = None
            for step in order:
                di, dj = step.delta
                pi, pj = i - di, j - dj
                if pi < 0 or pj < 0:
                    continue
                s, ng, x, z = t[pi][pj]
                if step is Step.DIAG:
                    if env.sites[i - 1, j - 1]:
                        cand = (s + 1, ng, x, z + 1)
                    else:
                        cand = (s - a, ng, x + 1, z)
                else:
                    cand = (s - b, ng - 1, x, z)
                if best is None or cand[:2] > best[:2]:
                    best = cand
            t[i][j] = best
    return t


def mgm_stats_reference(env: Environment, pen=0, order: Sequence[Step] = _DEFAULT_ORDER) -> PathStats:
    """Slow exact MGM statistics that track the triple through the table.

    ``order`` fixes which predecessor wins among exact (score, gaps) ties.
    """
    pen = as_penalty(pen)
    s, ng, x, z = _reference_table(env, pen, order)[env.m][env.n]
    return PathStats(x, -ng, z)


def _reference_passage(env: Environment, pen: Penalty) -> Fraction:
    return _reference_table(env, pen)[env.m][env.n][0]


# --- public operations --------------------------------------------------------

def corner_growth_T(grid: WeightGrid) -> int:
    """Corner-growth passage time with steps e1, e2, collecting every site."""
    if not isinstance(grid, WeightGrid):
        grid = WeightGrid(grid)
    return int(_kernels.corner_growth_last(np.ascontiguousarray(grid.weights)))


def zero_penalty_passage(env: Environment) -> int:
    """G at alpha = beta = 0 via the bit-parallel recurrence."""
    if env.m == 0 or env.n == 0:
        return 0
    return int(_kernels.zero_penalty_bits(pack_rows(env.sites), env.m))


def _keyed(env: Environment, pen: Penalty):
    m, n = env.shape
    sc = _Scaled.of(pen, m, n)
    if not sc.fits(m, n):
        return sc, None
    key = _kernels.keyed_dp_last(_integer_sites(env), sc.w_match, sc.w_mismatch, sc.w_gap, sc.K)
    return sc, int(key)


def passage_G(env: Environment, pen=(0, 0)) -> Fraction:
    """Point-to-point last-passage time from (0, 0) to (m, n)."""
    pen = as_penalty(pen)
    m, n = env.shape
    if m == 0 or n == 0:
        return -pen.beta * (m + n)
    sc, key = _keyed(env, pen)
    if key is None:
        return _reference_passage(env, pen)
    return Fraction(sc.decode(key)[0], sc.L)


def mgm_stats(env: Environment, pen=0) -> PathStats:
    """(x, y, z) shared by every minimal-gap maximiser."""
    pen = as_penalty(pen)
    if pen.alpha <= -1:
        raise ValueError("MGM statistics need alpha > -1")
    m, n = env.shape
    if m == 0 or n == 0:
        return PathStats(0, m + n, 0)
    sc, key = _keyed(env, pen)
    if key is None:
        return mgm_stats_reference(env, pen)
    score, gaps = sc.decode(key)
    return _stats_from(score, gaps, sc, pen, m, n)


def reconstruct_path(env: Environment, pen=(0, 0)) -> Path:
    """An MGM path, read back from the keyed table."""
    pen = as_penalty(pen)
    m, n = env.shape
    sc = _Scaled.of(pen, m, n)
    if sc.fits(m, n):
        table = _kernels.keyed_dp_table(_integer_sites(env), sc.w_match, sc.w_mismatch,
                                        sc.w_gap, sc.K)
        gap_key = sc.w_gap * sc.K - 1

        def value(i, j):
            return int(table[i, j])

        def incr(step, i, j):
            if step is Step.DIAG:
                return (sc.w_match if env.sites[i - 1, j - 1] else sc.w_mismatch) * sc.K
            return gap_key
    else:
        ref = _reference_table(env, pen)

        def value(i, j):
            s, ng, _, _ = ref[i][j]
            return (s, ng)

        def incr(step, i, j):
            if step is Step.DIAG:
                return (Fraction(1) if env.sites[i - 1, j - 1] else -pen.alpha, 0)
            return (-pen.beta, -1)

    steps = []
    i, j = m, n
    while i or j:
        here = value(i, j)
        for step in _DEFAULT_ORDER:
            di, dj = step.delta
            pi, pj = i - di, j - dj
            if pi < 0 or pj < 0:
                continue
            d = incr(step, i, j)
            prev = value(pi, pj)
            got = (prev[0] + d[0], prev[1] + d[1]) if isinstance(prev, tuple) else prev + d
            if got == here:
                steps.append(step)
                i, j = pi, pj
                break
        else:  # pragma: no cover - table is self-consistent by construction
            raise ArithmeticError("backtracking failed")
    return Path(tuple(reversed(steps)))


def _check_path(path: Path, env: Environment):
    if path.endpoint != env.shape:
        raise ValueError(f"path ends at {path.endpoint}, environment is {env.shape}")


def path_stats(path: Path, env: Environment) -> PathStats:
    _check_path(path, env)
    x = y = z = 0
    i = j = 0
    for s in path.steps:
        di, dj = s.delta
        i, j = i + di, j + dj
        if s is Step.DIAG:
            if env.sites[i - 1, j - 1]:
                z += 1
            else:
                x += 1
        else:
            y += 1
    return PathStats(x, y, z)


def path_score(path: Path, env: Environment, pen=(0, 0)) -> Fraction:
    pen = as_penalty(pen)
    st = path_stats(path, env)
    return st.z - pen.alpha * st.x - pen.beta * st.y


@lru_cache(maxsize=None)
def delannoy(m: int, n: int) -> int:
    """Number of three-step paths from (0, 0) to (m, n)."""
    if m == 0 or n == 0:
        return 1
    return delannoy(m - 1, n) + delannoy(m, n - 1) + delannoy(m - 1, n - 1)


def enumerate_paths(m: int, n: int) -> Iterator[Path]:
    """Every admissible path from (0, 0) to (m, n)."""
    steps: list[Step] = []

    def rec(i, j):
        if i == m and j == n:
            yield Path(tuple(steps))
            return
        for s in (Step.E1, Step.E2, Step.DIAG):
            di, dj = s.delta
            if i + di <= m and j + dj <= n:
                steps.append(s)
                yield from rec(i + di, j + dj)
                steps.pop()

    yield from rec(0, 0)


# --- strategy (S) -------------------------------------------------------------

def _alphabet_of(env: Environment) -> float:
    prov = env.provenance
    if isinstance(prov, Alignment):
        return prov.wx.alphabet_size
    if isinstance(prov, IndependentBernoulli):
        return 1.0 / prov.p
    raise ValueError("alphabet size is unknown for a hand-built environment; pass it")


def u_n(n: int, a: float, x: float, alphabet_size: float, c1: float, c2: float) -> int:
    """Diagonal length of the initial run of strategy (S)."""
    log_term = n * math.log(n) if n > 1 else 0.0
    if a <= 0.5:
        return math.floor(math.sqrt(c1 * log_term))
    return math.floor(x * n ** a / (alphabet_size - 1)) + math.floor(math.sqrt(c2 * log_term))


def strategy_S_path(env: Environment, a: float, x: float, c1: float | None = None,
                    c2: float | None = None, alphabet_size: float | None = None):
    """Greedy low-gap path: diagonal run, then diagonal on matches, east otherwise.

    Returns ``(path, exited_north)``.  For the independent model the
    alphabet size defaults to ``1/p``.
    """
    A = float(alphabet_size) if alphabet_size is not None else _alphabet_of(env)
    if A <= 1:
        raise ValueError("alphabet size must exceed 1")
    floor_c = 2.0 / (A - 1) ** 2
    c1 = 12.0 / (A - 1) ** 2 if c1 is None else float(c1)
    c2 = 12.0 / (A - 1) ** 2 if c2 is None else float(c2)
    if c1 <= floor_c or c2 <= floor_c:
        raise ValueError(f"c1 and c2 must exceed 2/(|A|-1)^2 = {floor_c}")
    m, n = env.shape
    u = u_n(n, a, x, A, c1, c2)
    if u > min(m, n):
        raise ValueError(f"diagonal run length {u} leaves the {m}x{n} rectangle")
    steps = [Step.DIAG] * u
    i = j = u
    while i < m and j < n:
        if env.sites[i, j]:
            steps.append(Step.DIAG)
            i, j = i + 1, j + 1
        else:
            steps.append(Step.E1)
            i += 1
    exited_north = j == n
    steps += [Step.E1] * (m - i) + [Step.E2] * (n - j)
    return Path(tuple(steps)), exited_north
