"""Discrete TASEP with backward (left-to-right) updating.

Particle ``j`` starts at site ``j`` and tries to jump one site left at time
``l`` when the field bit under it, ``b[eta_j(l-1), l]``, is 1.  Particles
are updated in label order within a time step, so a jump onto the site just
vacated by particle ``j - 1`` in the same step is allowed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels
from .env import BernoulliField, Environment, IndependentBernoulli, coupled_field
from .lpp import passage_G
from .seeds import as_seed, make_rng

__all__ = [
    "DtasepTrace",
    "TauMatrix",
    "simulate",
    "tau_from_trace",
    "tau_by_recursion",
    "recursion_residuals",
    "IdentityCheck",
    "blip_identity_check",
    "EdgeProbe",
    "edge_coupling_probe",
    "sample_zero_penalty",
    "sample_corner_growth",
]


@dataclass(frozen=True, eq=False)
class DtasepTrace:
    """``positions[l, j - 1]`` is the site of particle ``j`` at time ``l``."""

    positions: np.ndarray

    @property
    def num_particles(self) -> int:
        return self.positions.shape[1]

    @property
    def horizon(self) -> int:
        return self.positions.shape[0] - 1

    def to_csv(self) -> str:
        lines = ["time,particle,position"]
        for ell, row in enumerate(self.positions):
            lines += [f"{ell},{j + 1},{int(p)}" for j, p in enumerate(row)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class TauMatrix:
    """``values[i - 1, j - 1]`` is the time of particle ``j``'s ``i``-th jump.

    Entries are ``inf`` when the jump does not happen within the horizon.
    The boundary ``tau[0, j] = tau[i, 0] = 0`` is implicit.
    """

    values: np.ndarray

    def __getitem__(self, key) -> float:
        i, j = key
        if i == 0 or j == 0:
            return 0
        return self.values[i - 1, j - 1]

    @property
    def shape(self):
        return self.values.shape


def simulate(field: BernoulliField, P: int, L: int) -> DtasepTrace:
    if P < 1 or L < 0:
        raise ValueError("need at least one particle and a nonnegative horizon")
    if L and (field.k_lo > 2 - L or field.k_hi < P or field.horizon < L):
        raise ValueError(
            f"field covers k in [{field.k_lo}, {field.k_hi}], l <= {field.horizon}; "
            f"{P} particles over {L} steps need k in [{2 - L}, {P}], l <= {L}")
    bits = field.values.tolist()
    k0 = field.k_lo
    eta = list(range(1, P + 1))
    out = np.empty((L + 1, P), dtype=np.int64)
    out[0] = eta
    for ell in range(1, L + 1):
        col = ell - 1
        left = None
        for j in range(P):
            pos = eta[j]
            if bits[pos - k0][col] and left != pos - 1:
                pos -= 1
                eta[j] = pos
            left = pos
        out[ell] = eta
    return DtasepTrace(out)


def tau_from_trace(trace: DtasepTrace, I: int | None = None) -> TauMatrix:
    """First times each particle has made ``i`` jumps, ``i = 1..I``."""
    L = trace.horizon
    I = L if I is None else int(I)
    labels = np.arange(1, trace.num_particles + 1)
    jumps = labels[None, :] - trace.positions          # nondecreasing in time
    tau = np.full((I, trace.num_particles), np.inf)
    targets = np.arange(1, I + 1)
    for j in range(trace.num_particles):
        first = np.searchsorted(jumps[:, j], targets, side="left")
        hit = first <= L
        tau[hit, j] = first[hit]
    return TauMatrix(tau)


def tau_by_recursion(zeta_tilde, I: int | None = None, J: int | None = None) -> TauMatrix:
    """``tau[i, j] = max(tau[i, j-1], tau[i-1, j] + 1) + zeta_tilde[i, j]``.

    ``zeta_tilde`` may carry leading batch axes; the last two are ``(I, J)``.
    """
    zt = np.asarray(zeta_tilde)
    if zt.ndim < 2:
        raise ValueError("zeta_tilde must be at least 2-d")
    if zt.size and zt.min() < 0:
        raise ValueError("zeta_tilde must be nonnegative")
    I = zt.shape[-2] if I is None else int(I)
    J = zt.shape[-1] if J is None else int(J)
    zt = zt[..., :I, :J].astype(np.int64)
    tau = np.zeros(zt.shape[:-2] + (I + 1, J + 1), dtype=np.int64)
    for i in range(1, I + 1):
        for j in range(1, J + 1):
            tau[..., i, j] = np.maximum(tau[..., i, j - 1], tau[..., i - 1, j] + 1) + zt[..., i - 1, j - 1]
    return TauMatrix(tau[..., 1:, 1:])


def recursion_residuals(tau: TauMatrix) -> np.ndarray:
    """``tau[i, j] - max(tau[i, j-1], tau[i-1, j] + 1)``; nan where undefined."""
    v = np.asarray(tau.values, dtype=float)
    I, J = v.shape[-2:]
    padded = np.zeros(v.shape[:-2] + (I + 1, J + 1))
    padded[..., 1:, 1:] = v
    base = np.maximum(padded[..., 1:, :-1], padded[..., :-1, 1:] + 1)
    with np.errstate(invalid="ignore"):
        res = v - base
    res[~np.isfinite(v)] = np.nan
    return res


@dataclass(frozen=True)
class IdentityCheck:
    m: int
    n: int
    seed: int
    lhs: int
    rhs: int
    match: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def blip_identity_check(env: Environment, seed=0) -> IdentityCheck:
    """Compare G at zero penalty with the particle count read off the coupled DTASEP."""
    if not isinstance(env.provenance, IndependentBernoulli):
        raise ValueError("identity check needs an independent Bernoulli environment")
    m, n = env.shape
    spec = as_seed(seed, "coupled-field")
    trace = simulate(coupled_field(env, horizon=n, seed=spec), P=m, L=n)
    tau = tau_from_trace(trace, I=n)
    k_star = 0
    for k in range(max(m - n, 1), m + 1):
        if tau[k + n - m, k] <= n:
            k_star = k
    lhs = passage_G(env, (0, 0))
    return IdentityCheck(m, n, spec.master_seed, int(lhs), m - k_star, int(lhs) == m - k_star)


# --- sampling helpers -------------------------------------------------------

def _chunks(reps: int, size: int):
    start = 0
    c = 0
    while start < reps:
        yield c, min(size, reps - start)
        start += size
        c += 1


def sample_zero_penalty(m: int, n: int, p: float, reps: int, seed, chunk: int = 2000) -> np.ndarray:
    """G at zero penalty on ``reps`` independent Bernoulli(p) environments."""
    spec = as_seed(seed, "zero-penalty")
    out = []
    for c, size in _chunks(reps, chunk):
        rng = make_rng(spec.child(None, c))
        sites = (rng.random((size, m, n)) < p).astype(np.uint8)
        out.append(_kernels.zero_penalty_batch(sites))
    return np.concatenate(out) if out else np.empty(0, np.int64)


def sample_corner_growth(m: int, n: int, p: float, reps: int, seed, chunk: int = 5000) -> np.ndarray:
    """Corner-growth passage times on ``reps`` grids of Geom(1 - p) weights."""
    spec = as_seed(seed, "corner-growth")
    if m == 0 or n == 0:
        return np.zeros(reps, np.int64)
    out = []
    for c, size in _chunks(reps, chunk):
        rng = make_rng(spec.child(None, c))
        out.append(_kernels.corner_growth_batch(rng.geometric(1.0 - p, size=(size, m, n))))
    return np.concatenate(out)


@dataclass(frozen=True)
class EdgeProbe:
    p_left: float
    p_right: float
    se_left: float
    se_right: float
    reps: int

    @property
    def se(self) -> float:
        return float(np.hypot(self.se_left, self.se_right))


def _binomial(hits: np.ndarray):
    f = float(np.mean(hits))
    return f, float(np.sqrt(f * (1 - f) / hits.size))


def edge_coupling_probe(m: int, n: int, N: int, reps: int, seed, p: float = 0.5) -> EdgeProbe:
    """Estimate both sides of P{G(m, n) <= m - N} = P{T(n - m + N, N) <= n + N - 1}."""
    if reps < 1:
        raise ValueError("reps must be positive")
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N > 0 and n - m + N < 1:
        raise ValueError("need n - m + N >= 1")
    if N == 0:
        return EdgeProbe(1.0, 1.0, 0.0, 0.0, reps)
    spec = as_seed(seed, "edge-probe")
    G = sample_zero_penalty(m, n, p, reps, spec.child("edge-left"))
    T = sample_corner_growth(n - m + N, N, p, reps, spec.child("edge-right"))
    pl, sl = _binomial(G <= m - N)
    pr, sr = _binomial(T <= n + N - 1)
    return EdgeProbe(pl, pr, sl, sr, reps)
