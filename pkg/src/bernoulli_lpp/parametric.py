"""Optimality regions of the gap penalty at zero mismatch cost.

For ``alpha = 0`` every path contributes the line ``beta -> z - beta * y``
and the passage time is their upper envelope, a convex piecewise-linear
function of ``beta``.  Breakpoints are found exactly by ray search: the
intersection of two envelope lines is probed with one MGM evaluation, which
either certifies it as a breakpoint or yields a new envelope line between
them.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .env import Environment
from .lpp import as_fraction, delannoy, mgm_stats, PathStats

__all__ = [
    "ScoreLine",
    "RegionDecomposition",
    "critical_penalties",
    "brute_force_envelope",
    "path_stat_set",
    "map_to_alpha_zero",
    "affine_score_shift",
    "naive_region_bound",
    "totient_region_bound",
    "region_count",
    "region_summary",
]


@dataclass(frozen=True, order=True)
class ScoreLine:
    z: int
    y: int

    def value(self, beta) -> Fraction:
        return self.z - as_fraction(beta) * self.y

    def stats(self, m: int, n: int) -> PathStats:
        return PathStats((m + n - self.y - 2 * self.z) // 2, self.y, self.z)


@dataclass(frozen=True)
class RegionDecomposition:
    """``lines[k]`` is the MGM line on ``(breakpoints[k-1], breakpoints[k])``."""

    m: int
    n: int
    breakpoints: tuple[Fraction, ...]
    lines: tuple[ScoreLine, ...]

    def __post_init__(self):
        if len(self.lines) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one more line than breakpoints")

    @property
    def num_breakpoints(self) -> int:
        return len(self.breakpoints)

    @property
    def num_regions(self) -> int:
        return len(self.lines)

    def stats(self) -> list[PathStats]:
        return [ln.stats(self.m, self.n) for ln in self.lines]

    def line_at(self, beta) -> ScoreLine:
        """Optimal line at ``beta``; at a breakpoint the higher-beta side."""
        beta = as_fraction(beta)
        k = sum(b <= beta for b in self.breakpoints)
        return self.lines[k]

    def value(self, beta) -> Fraction:
        return max(ln.value(beta) for ln in self.lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "beta_num", "beta_den", "x", "y", "z"])
        betas = (Fraction(0),) + self.breakpoints
        for k, (b, st) in enumerate(zip(betas, self.stats())):
            w.writerow([k, b.numerator, b.denominator, st.x, st.y, st.z])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, m: int, n: int) -> "RegionDecomposition":
        rows = list(csv.DictReader(io.StringIO(text)))
        betas = [Fraction(int(r["beta_num"]), int(r["beta_den"])) for r in rows]
        lines = [ScoreLine(int(r["z"]), int(r["y"])) for r in rows]
        return cls(m, n, tuple(betas[1:]), tuple(lines))


def _line(env: Environment, beta: Fraction) -> ScoreLine:
    st = mgm_stats(env, beta)
    return ScoreLine(st.z, st.y)


def _crossing(a: ScoreLine, b: ScoreLine) -> Fraction:
    return Fraction(a.z - b.z, a.y - b.y)


def critical_penalties(env: Environment) -> RegionDecomposition:
    m, n = env.shape
    left = _line(env, Fraction(0))
    beta_hi = Fraction(max(min(m, n), 1))
    right = _line(env, beta_hi)
    breakpoints: list[Fraction] = []
    lines = [left]
    # Depth-first, left interval first, so breakpoints come out sorted.
    stack = [(left, right)]
    while stack:
        a, b = stack.pop()
        if a == b:
            continue
        beta = _crossing(a, b)
        c = _line(env, beta)
        if c.value(beta) == a.value(beta):
            breakpoints.append(beta)
            lines.append(b)
        else:
            stack.append((c, b))
            stack.append((a, c))
    return RegionDecomposition(m, n, tuple(breakpoints), tuple(lines))


def path_stat_set(env: Environment) -> set[tuple[int, int]]:
    """Every (z, y) realised by some admissible path, by exhaustive union."""
    m, n = env.shape
    cells = [[None] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        for j in range(n + 1):
            if i == 0 and j == 0:
                cells[i][j] = {(0, 0)}
                continue
            here = set()
            if i:
                here.update((z, y + 1) for z, y in cells[i - 1][j])
            if j:
                here.update((z, y + 1) for z, y in cells[i][j - 1])
            if i and j:
                hit = int(env.sites[i - 1, j - 1])
                here.update((z + hit, y) for z, y in cells[i - 1][j - 1])
            cells[i][j] = here
        if i:
            cells[i - 1] = None
    return cells[m][n]


def brute_force_envelope(env: Environment, cap: int = 10 ** 6) -> RegionDecomposition:
    """Upper envelope over all paths, built directly from their statistics."""
    m, n = env.shape
    count = delannoy(m, n)
    if count > cap:
        raise ValueError(f"{count} paths exceed the enumeration cap {cap}")
    best: dict[int, int] = {}
    for z, y in path_stat_set(env):
        if z > best.get(y, -1):
            best[y] = z
    pool = [ScoreLine(z, y) for y, z in best.items()]
    cur = max(pool, key=lambda ln: (ln.z, -ln.y))
    lines, breakpoints = [cur], []
    at = Fraction(0)
    while True:
        nxt = None
        for ln in pool:
            if ln.y >= cur.y:
                continue
            beta = _crossing(cur, ln)
            if nxt is None or (beta, ln.y) < (nxt[0], nxt[1].y):
                nxt = (beta, ln)
        if nxt is None:
            break
        beta, cur = nxt
        if beta <= at and breakpoints:
            raise ArithmeticError("envelope is not convex")
        breakpoints.append(beta)
        lines.append(cur)
        at = beta
    return RegionDecomposition(m, n, tuple(breakpoints), tuple(lines))


def map_to_alpha_zero(alpha, beta) -> Fraction:
    """Gap penalty at ``alpha = 0`` with the same optimal paths as ``(alpha, beta)``."""
    alpha, beta = as_fraction(alpha), as_fraction(beta)
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    out = (beta - alpha / 2) / (alpha + 1)
    assert out >= Fraction(-1, 2)
    return out


def affine_score_shift(score_at_zero, alpha, m: int, n: int) -> Fraction:
    """Score under ``(alpha, beta)`` from the score under ``(0, beta')``."""
    alpha = as_fraction(alpha)
    return (1 + alpha) * as_fraction(score_at_zero) - alpha * Fraction(m + n, 2)


def naive_region_bound(stats0: PathStats, stats_last: PathStats, m: int, n: int) -> int:
    return min(
        stats0.z - stats_last.z,
        (stats_last.x - stats0.x) // 2,
        (stats0.y - stats_last.y) // 2,
        min(m, n) - stats0.z,
    )


def totient_region_bound(g: int) -> int:
    """Largest number of distinct fractions a/b whose a + b sum to at most ``g``.

    Returns ``sum(phi(k), k <= M)`` for the largest ``M`` with
    ``sum(k * phi(k), k <= M) <= g``.
    """
    from sympy import totient

    if int(g) != g or g < 1:
        raise ValueError("g must be a positive integer")
    acc = bound = 0
    k = 1
    while True:
        phi = int(totient(k))
        if acc + k * phi > g:
            return bound
        acc += k * phi
        bound += phi
        k += 1


def region_count(env: Environment) -> tuple[int, int]:
    """(breakpoints, regions); regions = breakpoints + 1."""
    dec = critical_penalties(env)
    return dec.num_breakpoints, dec.num_regions


def region_summary(env: Environment, dec: RegionDecomposition | None = None) -> dict:
    """Breakpoints together with every region-count bound the statistics allow."""
    dec = dec or critical_penalties(env)
    m, n = env.shape
    s0, sl = dec.stats()[0], dec.stats()[-1]
    g = (s0.z - sl.z) + (s0.y - sl.y)
    return {
        "m": m,
        "n": n,
        "breakpoints": list(dec.breakpoints),
        "num_breakpoints": dec.num_breakpoints,
        "num_regions": dec.num_regions,
        "lines": [st.as_tuple() for st in dec.stats()],
        "naive_bound": naive_region_bound(s0, sl, m, n),
        "passage_bound": min(m, n) - s0.z,
        "envelope_span": g,
        "totient_bound": totient_region_bound(g) if g >= 1 else 0,
    }
