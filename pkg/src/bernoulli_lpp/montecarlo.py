"""Seeded Monte-Carlo experiments on soft-edge rectangles.

Trial ``(n, rep)`` of an experiment draws from the stream
``SeedSpec(seed, <experiment>, (n, rep))``, so results do not depend on the
number of workers or on scheduling.  Results are reduced in trial order.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import kolmogorov

from . import _kernels
from .env import alignment_env, bernoulli_rows, gen_bernoulli_env, gen_word
from .lpp import as_fraction, format_fraction, passage_G
from .parametric import critical_penalties
from .scaling import g_a, tw_cdf, tw_event_threshold, tw_width
from .seeds import SeedSpec

__all__ = [
    "McConfig",
    "McRecord",
    "McReport",
    "KsResult",
    "ks_two_sample",
    "rectangle_width",
    "sample_environment",
    "zero_penalty_sample",
    "mc_region_profile",
    "mc_edge_distribution",
    "mc_tw_check",
    "mc_alignment_lpp",
    "fit_exponent",
]

log = logging.getLogger(__name__)

MODELS = ("independent", "alignment")


@dataclass(frozen=True)
class McConfig:
    model: str = "independent"
    p: float | None = 0.5
    alphabet: int | None = None
    a: float = 0.5
    x: float = 1.0
    n_start: int = 100
    n_stop: int = 100
    n_step: int = 10
    reps: int = 25
    seed: int = 0
    workers: int = 1
    beta: str = "0"
    s_grid: tuple[float, ...] = (-2.0, -1.0, 0.0, 1.0)
    kmax: int = 8
    keep_samples: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.model == "independent":
            if self.p is None or not 0 < self.p < 1:
                raise ValueError("independent model needs 0 < p < 1")
        else:
            if self.alphabet is None or int(self.alphabet) < 2:
                raise ValueError("alignment model needs an alphabet of size >= 2")
        if not 0 < self.a < 1:
            raise ValueError("a must lie in (0, 1)")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.n_step < 1:
            raise ValueError("n step must be >= 1")
        if self.n_start < 1 or self.n_stop < self.n_start:
            raise ValueError("n range must satisfy 1 <= start <= stop")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if as_fraction(self.beta) < 0:
            raise ValueError("beta must be nonnegative")
        object.__setattr__(self, "s_grid", tuple(float(s) for s in self.s_grid))
        object.__setattr__(self, "beta", format_fraction(as_fraction(self.beta)))

    @property
    def ns(self) -> list[int]:
        return list(range(self.n_start, self.n_stop + 1, self.n_step))

    @property
    def density(self) -> float:
        """Match probability per site: p, or 1/|A| for words."""
        return self.p if self.model == "independent" else 1.0 / self.alphabet

    def to_dict(self) -> dict:
        """Config echo; ``workers`` is left out because results never depend on it."""
        d = asdict(self)
        del d["workers"]
        d["s_grid"] = list(self.s_grid)
        return d


@dataclass
class McRecord:
    n: int
    m: int
    reps: int
    min: float
    mean: float
    max: float
    se: float
    samples: list | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, n, m, values, keep=False, **extra) -> "McRecord":
        v = np.asarray(values, dtype=float)
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        mn, mean, mx = float(v.min()), float(v.mean()), float(v.max())
        mean = min(max(mean, mn), mx)      # guard the invariant against rounding
        return cls(n, m, int(v.size), mn, mean, mx, se,
                   [_plain(x) for x in values] if keep else None, extra)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["samples"] is None:
            del d["samples"]
        return d


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


@dataclass
class McReport:
    experiment: str
    config: McConfig
    records: list[McRecord]
    wall_clock: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "experiment": self.experiment,
            "config": self.config.to_dict(),
            "seeds": {"master_seed": self.config.seed, "stream_label": self.experiment,
                      "trial_index": ["n", "rep"]},
            "records": [r.to_dict() for r in self.records],
        }
        if include_timing:
            d["wall_clock"] = self.wall_clock
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        extra_keys = sorted({k for r in self.records for k, v in r.extra.items()
                             if not isinstance(v, (list, dict))})
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "min", "mean", "max", "se", "reps"] + extra_keys)
        for r in self.records:
            w.writerow([r.n, repr(r.min), repr(r.mean), repr(r.max), repr(r.se), r.reps]
                       + [_csv_cell(r.extra.get(k, "")) for k in extra_keys])
        return buf.getvalue()

    def gnuplot_script(self, csv_path: str = "report.csv") -> str:
        return "\n".join([
            "set datafile separator ','",
            "set key top left",
            f"set title '{self.experiment}'",
            "set xlabel 'n'",
            f"plot '{csv_path}' using 1:2 every ::1 with lines title 'min', \\",
            f"     '{csv_path}' using 1:3 every ::1 with lines title 'mean', \\",
            f"     '{csv_path}' using 1:4 every ::1 with lines title 'max'",
            "",
        ])


def _csv_cell(v):
    return repr(v) if isinstance(v, float) else v


# --- trial plumbing -----------------------------------------------------------

def rectangle_width(cfg: McConfig, n: int) -> int:
    """floor(n/p - x n^a), with 1/p = |A| for the alignment model."""
    if cfg.model == "alignment":
        m = math.floor(cfg.alphabet * n - cfg.x * n ** cfg.a)
    else:
        m = math.floor(n / cfg.p - cfg.x * n ** cfg.a)
    if m < 1:
        raise ValueError(f"width {m} is not positive at n={n}")
    return m


def sample_environment(cfg: McConfig, m: int, n: int, seed: SeedSpec):
    if cfg.model == "independent":
        return gen_bernoulli_env(m, n, cfg.p, seed)
    wx = gen_word(m, cfg.alphabet, seed.child("wx"))
    wy = gen_word(n, cfg.alphabet, seed.child("wy"))
    return alignment_env(wx, wy)


def zero_penalty_sample(cfg: McConfig, m: int, n: int, seed: SeedSpec) -> int:
    """G at zero penalty on the environment ``sample_environment`` would draw."""
    if cfg.model == "independent":
        rows = bernoulli_rows(m, n, cfg.p, seed)
    else:
        wx = gen_word(m, cfg.alphabet, seed.child("wx")).letters
        wy = gen_word(n, cfg.alphabet, seed.child("wy")).letters
        words = (m + 63) // 64
        masks = np.zeros((cfg.alphabet, words * 64), dtype=np.uint8)
        masks[wx, np.arange(m)] = 1
        packed = np.packbits(masks, axis=1, bitorder="little").view("<u8")
        rows = np.ascontiguousarray(packed.astype(np.uint64)[wy])
    return int(_kernels.zero_penalty_bits(rows, m))


def _run(fn, cfg: McConfig, jobs: list[tuple]) -> list:
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            return list(ex.map(fn, [cfg] * len(jobs), jobs,
                               chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    return [fn(cfg, job) for job in jobs]


def _trial_seed(cfg: McConfig, label: str, *index: int) -> SeedSpec:
    return SeedSpec(cfg.seed, label, tuple(index))


# --- experiments --------------------------------------------------------------

def _breakpoint_trial(cfg: McConfig, job):
    n, m, rep = job
    env = sample_environment(cfg, m, n, _trial_seed(cfg, "mc-regions", n, rep))
    return critical_penalties(env).num_breakpoints


def mc_region_profile(cfg: McConfig) -> McReport:
    """Breakpoint counts of the gap-penalty decomposition per n."""
    t0 = time.perf_counter()
    widths = {n: rectangle_width(cfg, n) for n in cfg.ns}
    jobs = [(n, widths[n], rep) for n in cfg.ns for rep in range(cfg.reps)]
    out = _run(_breakpoint_trial, cfg, jobs)
    records = []
    for k, n in enumerate(cfg.ns):
        vals = out[k * cfg.reps:(k + 1) * cfg.reps]
        records.append(McRecord.from_samples(n, widths[n], vals, cfg.keep_samples))
        log.debug("n=%d mean breakpoints %.3f", n, records[-1].mean)
    return McReport("mc-regions", cfg, records, time.perf_counter() - t0)


def _edge_trial(cfg: McConfig, job):
    n, m, rep = job
    return n - zero_penalty_sample(cfg, m, n, _trial_seed(cfg, "mc-edge", n, rep))


def mc_edge_distribution(cfg: McConfig) -> McReport:
    """Distribution of the edge deficiency ``n - G`` at zero penalty."""
    t0 = time.perf_counter()
    widths = {n: rectangle_width(cfg, n) for n in cfg.ns}
    jobs = [(n, widths[n], rep) for n in cfg.ns for rep in range(cfg.reps)]
    out = np.asarray(_run(_edge_trial, cfg, jobs))
    records = []
    for k, n in enumerate(cfg.ns):
        d = out[k * cfg.reps:(k + 1) * cfg.reps]
        ks = np.arange(cfg.kmax + 1)
        tail = (d[None, :] >= ks[:, None]).mean(axis=1)
        scale = n ** (2 * cfg.a - 1)
        records.append(McRecord.from_samples(
            n, widths[n], d, cfg.keep_samples,
            tail=[float(t) for t in tail],
            tail_se=[float(math.sqrt(t * (1 - t) / d.size)) for t in tail],
            normalized_median=float(np.median(d) / scale),
            normalized_mean=float(d.mean() / scale),
        ))
    return McReport("mc-edge", cfg, records, time.perf_counter() - t0)


def _tw_trial(cfg: McConfig, job):
    n, m, s_idx, rep, threshold = job
    g = zero_penalty_sample(cfg, m, n, _trial_seed(cfg, "mc-tw", n, s_idx, rep))
    return int(g <= threshold)


def mc_tw_check(cfg: McConfig) -> McReport:
    """Frequency of the TW-theorem event per (n, s), next to F_TW(s).

    The offset coefficient is fixed by the theorem, so ``cfg.x`` is unused.
    """
    if cfg.model != "independent":
        raise ValueError("the TW check is stated for the independent model")
    if not 0.5 < cfg.a <= 5 / 7:
        raise ValueError("the TW check needs 1/2 < a <= 5/7")
    t0 = time.perf_counter()
    jobs, keys = [], []
    for n in cfg.ns:
        thr = tw_event_threshold(n, cfg.p, cfg.a)
        for si, s in enumerate(cfg.s_grid):
            m = tw_width(n, cfg.p, cfg.a, s)
            keys.append((n, m, s, thr))
            jobs += [(n, m, si, rep, thr) for rep in range(cfg.reps)]
    out = _run(_tw_trial, cfg, jobs)
    records = []
    for k, (n, m, s, thr) in enumerate(keys):
        hits = out[k * cfg.reps:(k + 1) * cfg.reps]
        f = float(np.mean(hits))
        rec = McRecord.from_samples(n, m, hits, cfg.keep_samples, s=s, threshold=thr,
                                    tw_cdf=tw_cdf(s))
        rec.se = math.sqrt(f * (1 - f) / len(hits))
        records.append(rec)
    return McReport("mc-tw", cfg, records, time.perf_counter() - t0)


def _alignment_trial(cfg: McConfig, job):
    n, m, rep = job
    beta = as_fraction(cfg.beta)
    seed = _trial_seed(cfg, "mc-align", n, rep)
    if beta == 0:
        L = zero_penalty_sample(cfg, m, n, seed)
    else:
        L = passage_G(sample_environment(cfg, m, n, seed), (0, beta))
    A = cfg.alphabet
    return float((n * (1 + beta - beta * A) - L) / g_a(n, cfg.a))


def mc_alignment_lpp(cfg: McConfig) -> McReport:
    """Normalised deficiency of the alignment score under gap penalty ``beta``."""
    if cfg.model != "alignment":
        raise ValueError("mc_alignment_lpp needs the alignment model")
    if cfg.n_start < 2:
        raise ValueError("n must be at least 2")
    t0 = time.perf_counter()
    A, beta = cfg.alphabet, float(as_fraction(cfg.beta))
    if cfg.a <= 0.5:
        upper, lower = math.sqrt(2) / (A - 1) - 1 / A, 0.0
    else:
        upper, lower = 1 / (A * (A - 1)) - beta * cfg.x, -beta * cfg.x
    widths = {n: rectangle_width(cfg, n) for n in cfg.ns}
    jobs = [(n, widths[n], rep) for n in cfg.ns for rep in range(cfg.reps)]
    out = _run(_alignment_trial, cfg, jobs)
    records = [
        McRecord.from_samples(n, widths[n], out[k * cfg.reps:(k + 1) * cfg.reps],
                              cfg.keep_samples, upper_bound=upper, lower_bound=lower)
        for k, n in enumerate(cfg.ns)
    ]
    return McReport("mc-align", cfg, records, time.perf_counter() - t0)


def fit_exponent(report: McReport, stat: str = "max") -> float:
    """Least-squares slope of log(stat) on log(n) over records with stat > 0."""
    pts = [(math.log(r.n), math.log(getattr(r, stat))) for r in report.records
           if getattr(r, stat) > 0]
    if len(pts) < 2:
        raise ValueError("need at least two positive records to fit an exponent")
    xs, ys = np.array(pts).T
    return float(np.polyfit(xs, ys, 1)[0])


# --- two-sample Kolmogorov-Smirnov -------------------------------------------

@dataclass(frozen=True)
class KsResult:
    statistic: float
    n1: int
    n2: int
    pvalue: float
    critical_1: float
    critical_5: float

    @property
    def reject_1(self) -> bool:
        return self.statistic > self.critical_1

    @property
    def reject_5(self) -> bool:
        return self.statistic > self.critical_5


def _ks_critical(alpha: float, n1: int, n2: int) -> float:
    return math.sqrt(-math.log(alpha / 2) / 2) * math.sqrt((n1 + n2) / (n1 * n2))


def ks_two_sample(a, b) -> KsResult:
    """Sup-distance of the two empirical CDFs with asymptotic critical values."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    d = float(np.abs(fa - fb).max())
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    return KsResult(d, a.size, b.size, float(kolmogorov(d * en)),
                    _ks_critical(0.01, a.size, b.size), _ks_critical(0.05, a.size, b.size))
