from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from bvdiff import oracle
from bvdiff.boolfn import ArityCapExceeded
from bvdiff.ciphers import get_cipher
from oracles import ddt_row_naive, trit_match

PLANTED = get_cipher("planted-ls-8")


def test_truncated_prob_trivial_cases():
    assert oracle.truncated_prob(PLANTED, 3, 0, "xxxxxxxx") == 1
    assert oracle.truncated_prob(PLANTED, 3, 0, "1xxxxxxx") == 0
    assert oracle.truncated_prob(PLANTED, 3, 0, "00000000") == 1


def test_truncated_prob_planted():
    for k in (0, 77, 255):
        assert oracle.truncated_prob(PLANTED, k, 1, "1000xxxx") == 1
        assert oracle.truncated_prob(PLANTED, k, 1, "1000xxx0") < 1


@pytest.mark.parametrize("name", ["planted-ls-8", "mitm-8", "random-8", "spn-8"])
def test_two_routes_agree(name):
    spec = get_cipher(name)
    rng = np.random.default_rng(1)
    t = spec.rounds - 1
    d = spec.to_dict()
    for _ in range(6):
        k = int(rng.integers(0, 1 << spec.key_bits(t)))
        a = int(rng.integers(0, 256))
        b = "".join(rng.choice(list("01xx"), size=8))
        p1 = oracle.truncated_prob(spec, k, a, b)
        p2 = oracle.truncated_prob_ddt(spec, k, a, b)
        row = ddt_row_naive(d, t, k, a)
        p3 = Fraction(sum(c for delta, c in row.items() if trit_match(delta, b)), 256)
        assert p1 == p2 == p3


def test_full_prediction_equals_ddt_entry():
    spec = get_cipher("random-8")
    table = oracle.ddt(spec, 5)
    for a, delta in [(1, 0), (3, 7), (200, 19)]:
        b = oracle.trits_from_difference(delta, 8)
        assert oracle.truncated_prob(spec, 5, a, b) == Fraction(int(table[a, delta]), 256)
    assert table.sum(axis=1).tolist() == [256] * 256
    csv = oracle.ddt_csv(table[:2, :4])
    assert csv.splitlines()[0] == "a,0,1,2,3"


def test_key_fraction_examples():
    rep = oracle.key_fraction(PLANTED, 1, "1000xxxx", Fraction(99, 100))
    assert rep.fraction == 1 and rep.mode == "exhaustive" and rep.keys == 256
    rep = oracle.key_fraction(PLANTED, 5, "0000xxxx", -1)
    assert rep.fraction == 1
    rnd = oracle.key_fraction(get_cipher("random-8"), 1, "10000000", 0.9)
    assert rnd.fraction == 0 and rnd.v_max < Fraction(1, 4)


def test_key_fraction_sampled_mode_agrees():
    spec = get_cipher("feistel-8")
    t = 3
    exact = oracle.key_fraction(spec, 1, "1000xxxx", Fraction(1, 2), t=t, cap=1 << 12)
    assert exact.mode == "exhaustive" and exact.keys == 4096
    sampled = oracle.key_fraction(spec, 1, "1000xxxx", Fraction(1, 2), t=t, cap=1 << 8, samples=4096, seed=9)
    assert sampled.mode == "sampled" and sampled.keys >= 4096 and sampled.seed == 9
    p = float(exact.fraction)
    sd = (p * (1 - p) / sampled.keys) ** 0.5
    assert abs(float(sampled.fraction) - p) <= 3 * sd + 1e-12
    again = oracle.key_fraction(spec, 1, "1000xxxx", Fraction(1, 2), t=t, cap=1 << 8, samples=4096, seed=9)
    assert again == sampled


def test_verify_trivial_cases():
    assert oracle.verify_impossible(PLANTED, 0, 5).holds
    assert not oracle.verify_impossible(PLANTED, 0, 0).holds
    assert oracle.verify_probability_one(PLANTED, 0, 0).holds


def test_verify_planted_and_random():
    assert oracle.verify_impossible(get_cipher("mitm-8"), 1, 0x10).holds
    assert oracle.verify_probability_one(get_cipher("planted-match-8"), 1, 1).holds
    rng = np.random.default_rng(2)
    dx, dy, check = oracle.random_pair_counterexample(get_cipher("random-8"), rng)
    assert not check.holds and check.counterexample is not None
    x, k = check.counterexample
    spec = get_cipher("random-8")
    from bvdiff.ciphers import encrypt_reduced

    assert encrypt_reduced(spec, 2, x ^ dx, k) ^ encrypt_reduced(spec, 2, x, k) != dy


@pytest.mark.parametrize("name", ["mitm-8", "planted-match-8", "random-8", "planted-ls-8"])
def test_impossible_and_probability_one_exclusive(name):
    spec = get_cipher(name)
    for dx, dy in [(1, 0x10), (1, 1), (0, 0), (0, 3), (5, 9)]:
        assert not (oracle.verify_impossible(spec, dx, dy).holds and oracle.verify_probability_one(spec, dx, dy).holds)


def test_delta_prime_F():
    assert oracle.delta_prime_F(get_cipher("identity-8")) == 0
    d = oracle.delta_prime_F(PLANTED)
    assert 0 < d < 1 and d == Fraction(3, 4)
    with pytest.raises(ArityCapExceeded):
        oracle.delta_prime_F(PLANTED, cap=10)


def test_verify_finding_dispatch():
    out = oracle.verify_finding(PLANTED, {"type": "truncated", "a_hex": "01", "b_trits": "1000xxxx"}, "0.3", 4)
    assert out["passes"] and out["key_fraction"]["fraction"] == "1"
    out = oracle.verify_finding(get_cipher("mitm-8"), {"type": "impossible", "dx1_hex": "01", "dy2_hex": "10", "flag": 0})
    assert out["passes"]
    out = oracle.verify_finding(get_cipher("mitm-8"), {"type": "impossible", "dx1_hex": "01", "dy2_hex": "10", "flag": 1})
    assert not out["passes"]
    with pytest.raises(ValueError):
        oracle.verify_finding(PLANTED, {"type": "other"})
