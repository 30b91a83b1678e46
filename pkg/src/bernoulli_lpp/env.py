"""Random environments, words, weight grids and the coupled Bernoulli field.

Site ``(i, j)`` of an ``m x n`` environment (1-based, ``1 <= i <= m``,
``1 <= j <= n``) is stored at ``sites[i - 1, j - 1]``.  Paths run from the
lattice point ``(0, 0)`` to ``(m, n)``; the origin row and column carry no
weight.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .seeds import make_rng

__all__ = [
    "IndependentBernoulli",
    "Alignment",
    "Word",
    "Environment",
    "WeightGrid",
    "BernoulliField",
    "gen_bernoulli_env",
    "gen_word",
    "alignment_env",
    "gen_geometric_grid",
    "coupled_field",
    "bernoulli_words",
    "bernoulli_rows",
    "pack_rows",
    "unpack_rows",
    "format_env",
    "parse_env",
    "read_env",
    "write_env",
    "format_grid",
    "parse_grid",
]


def _check_prob(p) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    return p


def _check_dims(m, n):
    if int(m) != m or int(n) != n:
        raise TypeError("dimensions must be integers")
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got {m}x{n}")
    return int(m), int(n)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Word:
    letters: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        letters = np.asarray(self.letters, dtype=np.int64)
        if letters.ndim != 1 or letters.size < 1:
            raise ValueError("a word needs at least one letter")
        if self.alphabet_size < 2:
            raise ValueError("alphabet must have at least two letters")
        if letters.min() < 0 or letters.max() >= self.alphabet_size:
            raise ValueError("letter outside the alphabet")
        object.__setattr__(self, "letters", _frozen(letters.copy()))

    def __len__(self):
        return int(self.letters.size)

    def __eq__(self, other):
        if not isinstance(other, Word):
            return NotImplemented
        return self.alphabet_size == other.alphabet_size and np.array_equal(self.letters, other.letters)

    def __hash__(self):
        return hash((self.alphabet_size, self.letters.tobytes()))

    @classmethod
    def from_string(cls, text: str, alphabet_size: int | None = None) -> "Word":
        """Letters 'A', 'B', ... map to 0, 1, ...."""
        letters = [ord(c) - ord("A") for c in text.strip().upper()]
        if any(not 0 <= c < 26 for c in letters):
            raise ValueError(f"cannot parse word {text!r}")
        size = alphabet_size if alphabet_size is not None else max(2, max(letters) + 1)
        return cls(np.array(letters), size)

    def to_string(self) -> str:
        if self.alphabet_size <= 26:
            return "".join(chr(ord("A") + int(c)) for c in self.letters)
        return " ".join(str(int(c)) for c in self.letters)


@dataclass(frozen=True)
class IndependentBernoulli:
    p: float

    @property
    def tag(self) -> str:
        return f"bernoulli:{self.p!r}"


@dataclass(frozen=True)
class Alignment:
    wx: Word
    wy: Word

    @property
    def tag(self) -> str:
        return f"alignment:{self.wx.alphabet_size}"


Provenance = Union[IndependentBernoulli, Alignment, None]


@dataclass(frozen=True, eq=False)
class Environment:
    """An ``m x n`` grid of bits with the law it was drawn from.

    ``provenance`` is ``None`` for hand-built grids.
    """

    sites: np.ndarray
    provenance: Provenance = None

    def __post_init__(self):
        sites = np.asarray(self.sites)
        if sites.ndim != 2:
            raise ValueError("sites must be a 2-d array")
        if sites.size and not np.isin(sites, (0, 1)).all():
            raise ValueError("site values must be 0 or 1")
        sites = sites.astype(np.uint8)
        prov = self.provenance
        if isinstance(prov, Alignment):
            if sites.shape != (len(prov.wx), len(prov.wy)):
                raise ValueError("environment shape does not match word lengths")
            expect = prov.wx.letters[:, None] == prov.wy.letters[None, :]
            if not np.array_equal(sites.astype(bool), expect):
                raise ValueError("sites disagree with the generating words")
        object.__setattr__(self, "sites", _frozen(sites.copy()))

    @property
    def m(self) -> int:
        return self.sites.shape[0]

    @property
    def n(self) -> int:
        return self.sites.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.sites.shape

    def omega(self, i: int, j: int) -> int:
        """Site value at 1-based ``(i, j)``."""
        if not (1 <= i <= self.m and 1 <= j <= self.n):
            raise IndexError((i, j))
        return int(self.sites[i - 1, j - 1])

    def __eq__(self, other):
        if not isinstance(other, Environment):
            return NotImplemented
        return self.provenance == other.provenance and np.array_equal(self.sites, other.sites)

    def __hash__(self):
        return hash((self.shape, self.sites.tobytes()))

    @classmethod
    def from_rows(cls, rows, provenance: Provenance = None) -> "Environment":
        """Build from strings of '0'/'1'; ``rows[j-1]`` holds row ``j``."""
        grid = np.array([[int(c) for c in r.strip()] for r in rows], dtype=np.uint8)
        return cls(grid.T, provenance)

    def rows(self) -> list[str]:
        return ["".join(str(int(b)) for b in self.sites[:, j]) for j in range(self.n)]


@dataclass(frozen=True, eq=False)
class WeightGrid:
    """Corner-growth weights ``zeta[i-1, j-1] >= 1``."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.ndim != 2 or w.size == 0:
            raise ValueError("weights must be a nonempty 2-d array")
        if not np.issubdtype(w.dtype, np.integer):
            if not np.all(np.mod(w, 1) == 0):
                raise ValueError("weights must be integers")
        w = w.astype(np.int64)
        if w.min() < 1:
            raise ValueError("weights must be >= 1")
        object.__setattr__(self, "weights", _frozen(w.copy()))

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    def __eq__(self, other):
        if not isinstance(other, WeightGrid):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BernoulliField:
    """Bits ``b[k, l]`` for ``k_lo <= k <= k_hi`` and ``1 <= l <= horizon``."""

    values: np.ndarray
    k_lo: int
    q: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.uint8)
        if v.ndim != 2:
            raise ValueError("field values must be 2-d")
        if v.size and v.max() > 1:
            raise ValueError("field values must be 0 or 1")
        object.__setattr__(self, "values", _frozen(v.copy()))

    @property
    def k_hi(self) -> int:
        return self.k_lo + self.values.shape[0] - 1

    @property
    def horizon(self) -> int:
        return self.values.shape[1]

    def covers(self, k: int, ell: int) -> bool:
        return self.k_lo <= k <= self.k_hi and 1 <= ell <= self.horizon

    def __getitem__(self, key) -> int:
        k, ell = key
        if not self.covers(k, ell):
            raise IndexError(f"field cell ({k}, {ell}) outside declared range")
        return int(self.values[k - self.k_lo, ell - 1])


# --- Bernoulli bit words ----------------------------------------------------

def _binary_digits(p: float):
    frac = Fraction(p)
    while frac:
        frac *= 2
        d = int(frac >= 1)
        frac -= d
        yield d, frac == 0


def bernoulli_words(rng: np.random.Generator, shape, p: float) -> np.ndarray:
    """Words of 64 i.i.d. Bernoulli(p) bits.

    Each bit compares a uniform binary fraction with the binary expansion of
    ``p`` digit by digit, so P(bit = 1) equals the double ``p`` exactly.
    """
    p = _check_prob(p)
    shape = tuple(np.atleast_1d(shape))
    size = int(np.prod(shape))
    out = np.zeros(size, dtype=np.uint64)
    undecided = np.full(size, np.uint64(0xFFFFFFFFFFFFFFFF))
    for digit, last in _binary_digits(p):
        r = rng.bit_generator.random_raw(size).astype(np.uint64, copy=False)
        if digit:
            out |= undecided & ~r
            undecided &= r
        else:
            undecided &= ~r
        if last or not undecided.any():
            break
    return out.reshape(shape)


def pack_rows(sites: np.ndarray) -> np.ndarray:
    """``(m, n)`` bits -> ``(n, ceil(m/64))`` uint64, bit ``i-1`` of row ``j``."""
    m, n = sites.shape
    words = (m + 63) // 64
    buf = np.zeros((n, words * 64), dtype=np.uint8)
    buf[:, :m] = np.asarray(sites, dtype=np.uint8).T
    packed = np.packbits(buf, axis=1, bitorder="little")
    return packed.view("<u8").reshape(n, words).astype(np.uint64, copy=False)


def unpack_rows(rows: np.ndarray, m: int) -> np.ndarray:
    n = rows.shape[0]
    raw = np.ascontiguousarray(rows.astype("<u8")).view(np.uint8).reshape(n, -1)
    bits = np.unpackbits(raw, axis=1, bitorder="little")[:, :m]
    return np.ascontiguousarray(bits.T)


def bernoulli_rows(m: int, n: int, p: float, seed) -> np.ndarray:
    """Packed rows of a Bernoulli(p) environment; same bits as gen_bernoulli_env."""
    m, n = _check_dims(m, n)
    rng = make_rng(seed)
    rows = bernoulli_words(rng, (n, (m + 63) // 64), p)
    tail = m % 64
    if tail:
        rows[:, -1] &= np.uint64((1 << tail) - 1)
    return rows


# --- generators -------------------------------------------------------------

def gen_bernoulli_env(m: int, n: int, p: float, seed) -> Environment:
    p = _check_prob(p)
    rows = bernoulli_rows(m, n, p, seed)
    return Environment(unpack_rows(rows, m), IndependentBernoulli(p))


def gen_word(length: int, alphabet_size: int, seed) -> Word:
    if alphabet_size < 2:
        raise ValueError("alphabet must have at least two letters")
    if length < 1:
        raise ValueError("word length must be positive")
    rng = make_rng(seed)
    return Word(rng.integers(0, alphabet_size, size=int(length)), int(alphabet_size))


def alignment_env(wx: Word, wy: Word) -> Environment:
    if wx.alphabet_size != wy.alphabet_size:
        raise ValueError("words are drawn from different alphabets")
    sites = (wx.letters[:, None] == wy.letters[None, :]).astype(np.uint8)
    return Environment(sites, Alignment(wx, wy))


def gen_geometric_grid(m: int, n: int, p: float, seed) -> WeightGrid:
    """i.i.d. weights with P{zeta = l} = q p^(l-1), l >= 1, q = 1 - p."""
    p = _check_prob(p)
    m, n = _check_dims(m, n)
    rng = make_rng(seed)
    return WeightGrid(rng.geometric(1.0 - p, size=(m, n)))


def coupled_field(env: Environment, horizon: int | None = None, extra_margin: int = 0,
                  seed=0) -> BernoulliField:
    """DTASEP attempt field coupled to ``env``.

    A particle sitting at position ``k`` just before time ``l`` reads
    ``b[k, l]``; the coupling is ``b[k - l + 1, l] = 1 - omega[k, l]`` on
    ``1 <= k <= m``, ``1 <= l <= horizon``.  Other cells get fresh
    Bernoulli(q) bits.  Positions run over ``[1 - horizon, m + extra_margin]``,
    which is every site particles ``1..m + extra_margin`` can occupy.
    """
    if not isinstance(env.provenance, IndependentBernoulli):
        raise ValueError("coupled field needs an independent Bernoulli environment")
    m, n = env.shape
    horizon = n if horizon is None else int(horizon)
    if not 1 <= horizon <= n:
        raise ValueError(f"horizon must lie in [1, {n}]")
    if extra_margin < 0:
        raise ValueError("extra_margin must be nonnegative")
    q = 1.0 - env.provenance.p
    k_lo, k_hi = 1 - horizon, m + int(extra_margin)
    rng = make_rng(seed)
    values = (rng.random((k_hi - k_lo + 1, horizon)) < q).astype(np.uint8)
    ks = np.arange(1, m + 1)
    for ell in range(1, horizon + 1):
        values[ks - ell + 1 - k_lo, ell - 1] = 1 - env.sites[:, ell - 1]
    return BernoulliField(values, k_lo, q)


# --- text formats -----------------------------------------------------------

def _parse_tag(tag: str):
    kind, _, arg = tag.partition(":")
    if kind == "bernoulli":
        return "bernoulli", float(arg)
    if kind == "alignment":
        return "alignment", int(arg)
    if kind == "custom":
        return "custom", None
    raise ValueError(f"unknown provenance tag {tag!r}")


def _parse_word(line: str, size: int) -> Word:
    line = line.strip()
    if " " in line or size > 26:
        return Word(np.array([int(t) for t in line.split()]), size)
    return Word.from_string(line, size)


def format_env(env: Environment) -> str:
    prov = env.provenance
    tag = prov.tag if prov is not None else "custom"
    lines = [f"ENV {env.m} {env.n} {tag}"]
    if isinstance(prov, Alignment):
        lines += [prov.wx.to_string(), prov.wy.to_string()]
    lines += env.rows()
    return "\n".join(lines) + "\n"


def parse_env(text: str) -> Environment:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty environment file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "ENV":
        raise ValueError("environment header must read 'ENV m n provenance-tag'")
    m, n = _check_dims(int(head[1]), int(head[2]))
    kind, arg = _parse_tag(head[3])
    body = lines[1:]
    if kind == "alignment":
        if len(body) < 2:
            raise ValueError("alignment environment file is missing its words")
        wx, wy = _parse_word(body[0], arg), _parse_word(body[1], arg)
        body = body[2:]
    if len(body) != n or any(len(r.strip()) != m for r in body):
        raise ValueError(f"expected {n} rows of {m} characters")
    grid = Environment.from_rows(body).sites
    if kind == "alignment":
        return Environment(grid, Alignment(wx, wy))
    if kind == "bernoulli":
        return Environment(grid, IndependentBernoulli(_check_prob(arg)))
    return Environment(grid)


def read_env(path) -> Environment:
    with open(os.fspath(path)) as fh:
        return parse_env(fh.read())


def write_env(env: Environment, path) -> None:
    with open(os.fspath(path), "w") as fh:
        fh.write(format_env(env))


def format_grid(grid: WeightGrid) -> str:
    buf = io.StringIO()
    buf.write(f"GRID {grid.m} {grid.n}\n")
    for j in range(grid.n):
        buf.write(" ".join(str(int(v)) for v in grid.weights[:, j]) + "\n")
    return buf.getvalue()


def parse_grid(text: str) -> WeightGrid:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if len(head) != 3 or head[0] != "GRID":
        raise ValueError("grid header must read 'GRID m n'")
    m, n = _check_dims(int(head[1]), int(head[2]))
    rows = [[int(t) for t in ln.split()] for ln in lines[1:]]
    if len(rows) != n or any(len(r) != m for r in rows):
        raise ValueError(f"expected {n} rows of {m} integers")
    return WeightGrid(np.array(rows, dtype=np.int64).T)
