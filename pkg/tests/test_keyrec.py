from __future__ import annotations

from fractions import Fraction
from statistics import median

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bvdiff.ciphers import get_cipher
from bvdiff.finder import TruncatedDifferential, parse_trits
from bvdiff.keyrec import rank_of, required_pairs, run_counting_attack, signal_to_noise

PLANTED = get_cipher("planted-ls-8")


def test_sn_examples():
    r = signal_to_noise(64, Fraction(3, 4), 4)
    assert r.gamma == 4 and r.ratio == 12 and r.lam == 1
    assert signal_to_noise(64, Fraction(1, 16), 4).ratio == 1
    r = signal_to_noise(16, "0.6", 2)
    assert r.gamma == 4 and r.ratio == Fraction(12, 5)
    with pytest.raises(ValueError):
        signal_to_noise(16, 2, 2)
    with pytest.raises(ValueError):
        signal_to_noise(16, Fraction(1, 2), 0)


@given(st.integers(1, 1 << 12), st.fractions(0, 1), st.integers(1, 12))
def test_sn_formula_exact(size, p, t):
    r = signal_to_noise(size, p, t)
    assert r.gamma == Fraction(size, 1 << t)
    assert r.ratio == size * p / (r.gamma * r.lam)


def test_required_pairs_examples():
    assert required_pairs(Fraction(3, 2), Fraction(1, 2)) == 80
    assert required_pairs(50, Fraction(1, 2)) == 8
    with pytest.raises(ValueError):
        required_pairs("0.9", Fraction(1, 2))


@given(st.fractions(Fraction(1, 100), 1), st.fractions(Fraction(1, 100), 1), st.sampled_from([1.5, 5, 20]))
def test_required_pairs_monotone(p1, p2, sn):
    lo, hi = sorted((p1, p2))
    assert required_pairs(sn, hi) <= required_pairs(sn, lo)


def test_rank_pessimistic():
    c = np.array([3, 5, 5, 1])
    assert rank_of(c, 1) == 2 and rank_of(c, 2) == 2 and rank_of(c, 3) == 4


def test_zero_pairs():
    run = run_counting_attack(PLANTED, (1, "1000xxxx"), 0, seed=1)
    assert run.right_key_rank is None and int(run.counters.sum()) == 0


def test_planted_recovery():
    td = TruncatedDifferential(8, 1, parse_trits("1000xxxx"), 4, Fraction(56, 5))
    ranks = [run_counting_attack(PLANTED, td, 40, seed=s, p=1).right_key_rank for s in range(20)]
    assert sum(r == 1 for r in ranks) >= 18


def test_right_key_count_converges_to_p():
    for s in range(10):
        run = run_counting_attack(PLANTED, (1, "1000xxxx"), 64, seed=s)
        assert run.right_pairs == 64


def test_wrong_key_mean_on_random_cipher():
    # on the 4-bit S-box Feistel, wrong keys collide with the right key far more
    # often than the random model predicts, so this is checked on random-8 only
    spec = get_cipher("random-8")
    N, size = 256, 16
    means = []
    for s in range(20):
        run = run_counting_attack(spec, (0x21, "0110xxxx"), N, seed=s)
        means.append(np.delete(run.counters, run.right_key).mean())
    expected = N / size  # gamma * N / |S| with gamma = |S| / 2^t, t = 4
    spread = np.std(means) / np.sqrt(len(means))
    assert abs(np.mean(means) - expected) <= 3 * spread + 0.5


def test_random_differential_negative_control():
    rng = np.random.default_rng(4)
    ranks = []
    for s in range(20):
        b = "".join(rng.choice(list("01"), size=4)) + "xxxx"
        ranks.append(run_counting_attack(PLANTED, (int(rng.integers(1, 256)) | 0x10, b), 40, seed=s).right_key_rank)
    assert median(ranks) > 16 / 4


def test_transcript_fields():
    run = run_counting_attack(PLANTED, (1, "1000xxxx"), 40, seed=3, p=1)
    d = run.to_dict(top_k=3)
    assert set(d) >= {"N", "sn_report", "top_k_ranking", "right_key_rank", "seed"}
    assert d["top_k_ranking"][0]["key"] == run.right_key
    assert d["sn_report"]["ratio"] == "16"
    assert run.histogram_csv().splitlines()[0] == "key,count"


def test_too_many_pairs():
    with pytest.raises(ValueError):
        run_counting_attack(PLANTED, (1, "1000xxxx"), 257, seed=0)
