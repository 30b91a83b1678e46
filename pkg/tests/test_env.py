import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from bernoulli_lpp.env import (
    Alignment, BernoulliField, Environment, IndependentBernoulli, WeightGrid, Word,
    alignment_env, bernoulli_rows, bernoulli_words, coupled_field, format_env, format_grid,
    gen_bernoulli_env, gen_geometric_grid, gen_word, pack_rows, parse_env, parse_grid,
    read_env, unpack_rows, write_env,
)
from bernoulli_lpp.seeds import SeedSpec, make_rng

from conftest import FIG1_ROWS, ones


def test_bernoulli_env_is_deterministic():
    a = gen_bernoulli_env(2, 2, 0.999, SeedSpec(11, "t"))
    b = gen_bernoulli_env(2, 2, 0.999, SeedSpec(11, "t"))
    assert a == b and a.sites.tobytes() == b.sites.tobytes()
    assert a.provenance == IndependentBernoulli(0.999)


def test_bernoulli_env_streams_differ():
    a = gen_bernoulli_env(50, 50, 0.5, SeedSpec(1, "t"))
    assert a != gen_bernoulli_env(50, 50, 0.5, SeedSpec(2, "t"))
    assert a != gen_bernoulli_env(50, 50, 0.5, SeedSpec(1, "u"))
    assert a != gen_bernoulli_env(50, 50, 0.5, SeedSpec(1, "t", (3,)))


def test_bernoulli_env_density():
    env = gen_bernoulli_env(1000, 1000, 0.5, 3)
    assert abs(env.sites.mean() - 0.5) < 0.01


@pytest.mark.parametrize("p", [0.1, 0.37, 0.9])
def test_bernoulli_words_bit_probability(p):
    w = bernoulli_words(make_rng(5), 4000, p)
    bits = np.unpackbits(w.view(np.uint8))
    se = np.sqrt(p * (1 - p) / bits.size)
    assert abs(bits.mean() - p) < 6 * se


@pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.5])
def test_bernoulli_env_rejects_bad_p(p):
    with pytest.raises(ValueError):
        gen_bernoulli_env(3, 3, p, 0)


@pytest.mark.parametrize("m,n", [(0, 3), (3, 0)])
def test_bernoulli_env_rejects_zero_dimension(m, n):
    with pytest.raises(ValueError):
        gen_bernoulli_env(m, n, 0.5, 0)


def test_rows_match_unpacked_env():
    rows = bernoulli_rows(130, 7, 0.3, SeedSpec(4, "x"))
    env = gen_bernoulli_env(130, 7, 0.3, SeedSpec(4, "x"))
    assert np.array_equal(unpack_rows(rows, 130), env.sites)
    assert np.array_equal(pack_rows(env.sites), rows)


@given(st.integers(1, 150), st.integers(1, 5), st.integers(0, 2 ** 32))
def test_pack_roundtrip(m, n, seed):
    sites = make_rng(seed).integers(0, 2, size=(m, n)).astype(np.uint8)
    assert np.array_equal(unpack_rows(pack_rows(sites), m), sites)


def test_seed_is_required():
    with pytest.raises(ValueError):
        gen_bernoulli_env(2, 2, 0.5, None)


def test_gen_word_shape_and_errors():
    w = gen_word(6, 2, 0)
    assert len(w) == 6 and set(w.letters.tolist()) <= {0, 1}
    with pytest.raises(ValueError):
        gen_word(6, 1, 0)
    with pytest.raises(ValueError):
        gen_word(0, 2, 0)


def test_gen_word_letter_frequencies():
    w = gen_word(10 ** 5, 4, 9)
    freq = np.bincount(w.letters, minlength=4) / 10 ** 5
    assert np.all(np.abs(freq - 0.25) < 0.01)


def test_word_string_roundtrip():
    w = Word.from_string("AABABA")
    assert w.letters.tolist() == [0, 0, 1, 0, 1, 0] and w.to_string() == "AABABA"
    with pytest.raises(ValueError):
        Word(np.array([0, 2]), 2)


def test_alignment_env_figure_grid(fig1):
    assert fig1.rows() == FIG1_ROWS
    assert fig1.omega(1, 1) == 1 and fig1.omega(3, 1) == 0
    assert isinstance(fig1.provenance, Alignment)


def test_alignment_env_identical_words_diagonal():
    w = gen_word(20, 3, 1)
    env = alignment_env(w, w)
    assert np.all(np.diag(env.sites) == 1)


def test_alignment_env_disjoint_letters():
    env = alignment_env(Word.from_string("AAAA", 2), Word.from_string("BBB", 2))
    assert env.sites.sum() == 0


def test_alignment_env_alphabet_mismatch():
    with pytest.raises(ValueError):
        alignment_env(Word.from_string("AB", 2), Word.from_string("AB", 3))


def test_alignment_provenance_is_checked():
    wx, wy = Word.from_string("AB"), Word.from_string("AB")
    with pytest.raises(ValueError):
        Environment(np.zeros((2, 2), np.uint8), Alignment(wx, wy))


def test_alignment_marginal_law():
    # diagonal cells of one word pair are independent of each other
    A, L = 3, 10 ** 5
    wx, wy = gen_word(L, A, SeedSpec(2, "x")), gen_word(L, A, SeedSpec(2, "y"))
    cells = wx.letters == wy.letters
    se = np.sqrt((1 / A) * (1 - 1 / A) / L)
    assert abs(cells.mean() - 1 / A) < 6 * se


def test_environment_rejects_non_bits():
    with pytest.raises(ValueError):
        Environment(np.array([[0, 2]]))


def test_geometric_grid():
    g = gen_geometric_grid(1000, 1000, 0.5, 4)
    assert g.weights.min() >= 1
    assert abs(g.weights.mean() - 2) < 0.01
    assert g == gen_geometric_grid(1000, 1000, 0.5, 4)
    with pytest.raises(ValueError):
        gen_geometric_grid(2, 2, 1.0, 0)
    with pytest.raises(ValueError):
        WeightGrid(np.array([[0, 1]]))


def test_coupled_field_complements_all_ones():
    env = ones(4, 3)
    f = coupled_field(env, seed=1)
    for k in range(1, 5):
        for ell in range(1, 4):
            assert f[k - ell + 1, ell] == 0


def test_coupled_field_index_by_index():
    env = Environment(np.array([[1, 0], [0, 0]], np.uint8), IndependentBernoulli(0.5))
    f = coupled_field(env, horizon=2, seed=0)
    assert (f.k_lo, f.k_hi, f.horizon) == (-1, 2, 2)
    assert f[1, 1] == 0 and f[2, 1] == 1      # l = 1: b[k, 1] = 1 - omega[k, 1]
    assert f[0, 2] == 1 and f[1, 2] == 1      # l = 2: b[k - 1, 2] = 1 - omega[k, 2]
    with pytest.raises(IndexError):
        f[3, 1]


def test_coupled_field_consistency_random():
    env = gen_bernoulli_env(17, 9, 0.4, 8)
    f = coupled_field(env, extra_margin=3, seed=2)
    for k in range(1, 18):
        for ell in range(1, 10):
            assert f[k - ell + 1, ell] + env.omega(k, ell) == 1


def test_coupled_field_marginals_chi_square():
    p = 0.3
    env = gen_bernoulli_env(400, 250, p, 12)
    f = coupled_field(env, seed=13)
    bits = f.values.ravel()
    assert bits.size >= 10 ** 5
    ones_ = int(bits.sum())
    expected = np.array([bits.size * p, bits.size * (1 - p)])
    chi2 = stats.chisquare([bits.size - ones_, ones_], expected)
    assert chi2.pvalue > 1e-3


def test_coupled_field_needs_independent_env(fig1):
    with pytest.raises(ValueError):
        coupled_field(fig1)


def test_bernoulli_field_validation():
    with pytest.raises(ValueError):
        BernoulliField(np.array([[2]]), 0, 0.5)


def test_env_text_roundtrip(tmp_path, fig1):
    for env in (fig1, gen_bernoulli_env(7, 3, 0.25, 1), Environment(np.eye(3, dtype=np.uint8))):
        assert parse_env(format_env(env)) == env
        path = tmp_path / "e.env"
        write_env(env, path)
        assert read_env(path) == env


def test_env_text_layout(fig1):
    lines = format_env(fig1).splitlines()
    assert lines[:3] == ["ENV 6 6 alignment:2", "AABABA", "ABAABA"]
    assert lines[3:] == FIG1_ROWS


@pytest.mark.parametrize("text", ["", "ENV 2 2\n00\n00\n", "ENV 2 2 custom\n00\n", "ENV 2 1 weird\n00\n",
                                  "ENV 2 1 custom\n02\n"])
def test_env_text_errors(text):
    with pytest.raises(ValueError):
        parse_env(text)


def test_grid_roundtrip():
    g = gen_geometric_grid(4, 3, 0.6, 2)
    text = format_grid(g)
    assert text.splitlines()[0] == "GRID 4 3"
    assert parse_grid(text) == g
    with pytest.raises(ValueError):
        parse_grid("GRID 2 1\n1\n")
