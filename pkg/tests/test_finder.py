from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvdiff import oracle
from bvdiff.boolfn import BooleanFunction, derivative_histogram, from_bitstring, linear_structures_exact
from bvdiff.ciphers import CipherSpec, as_vector_function, get_cipher, make_random_spn
from bvdiff.finder import (
    REASON_BUDGET,
    REASON_GATE,
    REASON_NONE,
    Algo2Config,
    ImpossibleResult,
    TruncatedDifferential,
    algorithm1,
    find_impossible_differential,
    find_truncated_differential,
    parse_trits,
    run_impossible_search,
    run_truncated_search,
    sn_gate,
)

AND2 = BooleanFunction(2, [0, 0, 0, 1])


def test_algorithm1_xor():
    f = BooleanFunction.from_callable(2, lambda x: (x ^ (x >> 1)) & 1)
    res = algorithm1(f, 4, seed=0)
    assert res.H == (3,)
    assert res.members(0) == [0, 3] and res.members(1) == [1, 2]
    assert not res.no_structure
    assert res.candidates() == [(3, 0), (1, 1), (2, 1)]


def test_algorithm1_and_rarely_finds_anything():
    found = sum(not algorithm1(AND2, 32, seed=s).no_structure for s in range(100))
    assert found <= 1


def test_algorithm1_constant():
    res = algorithm1(BooleanFunction.constant(3, 0), 5, seed=1)
    assert res.H == (0,)
    assert res.A0.size == 8 and res.A1.empty
    assert [a for a, _ in res.candidates()] == list(range(1, 8))


def test_algorithm1_rejects_bad_p():
    with pytest.raises(ValueError):
        algorithm1(AND2, 0)


@given(st.integers(2, 8), st.integers(1, 40), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_algorithm1_sampled_constraint_soundness(arity, p, seed):
    f = BooleanFunction.random(arity, np.random.default_rng(seed))
    res = algorithm1(f, p, seed=seed)
    for i in (0, 1):
        for a in res.members(i):
            assert all(bin(a & w).count("1") % 2 == i for w in res.H)


def test_algorithm1_exact_structures_always_survive():
    rng = np.random.default_rng(3)
    for s in range(30):
        f = BooleanFunction.random(6, rng)
        exact = linear_structures_exact(f)
        res = algorithm1(f, 12, seed=s)
        assert set(exact.U0) <= set(res.members(0))
        assert set(exact.U1) <= set(res.members(1))


def _noisy_structure(arity: int, flips: int, seed: int) -> BooleanFunction:
    """``x_1`` plus sparse noise, so ``e_1`` is a near-structure."""
    rng = np.random.default_rng(seed)
    table = (np.arange(1 << arity) & 1).astype(np.uint8)
    table[rng.choice(1 << arity, size=flips, replace=False)] ^= 1
    return BooleanFunction(arity, table)


def test_algorithm1_emitted_vectors_match_well():
    # adversarial fixtures: near-structures with match rates between 0.9 and 1
    for seed in range(10):
        f = _noisy_structure(8, 6, seed)
        size = 1 << f.arity
        res = algorithm1(f, 150, seed=seed)
        for a, i in res.candidates():
            c = derivative_histogram(f, a)
            assert Fraction(c[i], size) >= Fraction(9, 10)


def test_sn_gate_examples():
    assert sn_gate(1, Fraction(1, 2)) == (False, 1)
    assert sn_gate(2, Fraction(1, 2)) == (True, 2)
    ok, v = sn_gate(4, "0.9")
    assert ok and v == Fraction(8, 5)
    with pytest.raises(ValueError):
        sn_gate(3, 1)


def test_config_validation():
    cfg = Algo2Config("0.5", 2)
    assert cfg.p(4) == 512 and cfg.p_exact(4) == 512
    assert Algo2Config("0.3", 4).p_exact(8) == Fraction(409600, 9)
    for bad in (0, 1, "1.5"):
        with pytest.raises(ValueError):
            Algo2Config(bad, 2)


@pytest.fixture(scope="module")
def planted_report():
    spec = get_cipher("planted-ls-8")
    return spec, run_truncated_search(as_vector_function(spec), Algo2Config("0.3", 4), seed=7,
                                      gate_cost=spec.gate_cost(2))


def test_truncated_planted(planted_report):
    spec, rep = planted_report
    td = rep.finding
    assert td is not None and rep.reason is None
    assert td.a == 1 and td.b_trits == "1000xxxx" and td.t == 4
    assert td.sn == Fraction(56, 5)
    kf = oracle.key_fraction(spec, td.a, td.b, Fraction(7, 10))
    assert kf.mode == "exhaustive" and kf.fraction == 1


def test_truncated_ledger_exact(planted_report):
    spec, rep = planted_report
    assert rep.ledger.universal_gates == rep.formula.universal_gates
    assert rep.ledger.qubits == 8 + 8 + 1 == rep.formula.qubits
    assert rep.ledger.quantum_queries == rep.formula.quantum_queries


def test_truncated_full_width_plant():
    spec = get_cipher("planted-ls-8f")
    td = find_truncated_differential(as_vector_function(spec), Algo2Config("0.3", 2), seed=1)
    assert td is not None and td.t == 8
    assert td.a == 0x80 and td.b_trits == "00000001"
    assert oracle.verify_probability_one(spec, td.a, 0x80).holds


def test_truncated_gate_failure():
    spec = get_cipher("planted-ls-8")
    rep = run_truncated_search(as_vector_function(spec), Algo2Config("0.99999", 1), seed=0)
    assert rep.finding is None and rep.reason == REASON_GATE


def test_truncated_budget_exhausted():
    spec = get_cipher("planted-ls-8")
    rep = run_truncated_search(as_vector_function(spec), Algo2Config("0.3", 1, budget=10), seed=0)
    assert rep.finding is None and rep.reason == REASON_BUDGET


def test_truncated_random_control():
    spec = make_random_spn(seed=101)
    rep = run_truncated_search(as_vector_function(spec), Algo2Config("0.1", 1), seed=3)
    assert rep.finding is None and rep.reason == REASON_NONE


def test_truncated_deterministic():
    spec = get_cipher("planted-ls-8")
    F = as_vector_function(spec)
    a = run_truncated_search(F, Algo2Config("0.5", 1), seed=5).to_dict()
    b = run_truncated_search(F, Algo2Config("0.5", 1), seed=5).to_dict()
    assert a == b


def test_truncated_differential_roundtrip():
    td = TruncatedDifferential(8, 1, parse_trits("1000xxxx"), 4, Fraction(56, 5), (1, 2, 3, 4))
    assert TruncatedDifferential.from_dict(td.to_dict()) == td
    with pytest.raises(ValueError):
        TruncatedDifferential(8, 0, parse_trits("1000xxxx"), 4, Fraction(1))


def test_impossible_mitm():
    spec = get_cipher("mitm-8")
    res = find_impossible_differential(spec, seed=1)
    assert res == ImpossibleResult(8, 0x01, 0x10, 0x01, 0x10, 0, 1)
    assert oracle.verify_impossible(spec, res.dx1, res.dy2).holds


def test_impossible_matched_halves():
    spec = get_cipher("planted-match-8")
    res = find_impossible_differential(spec, seed=1)
    assert (res.dx1, res.dy1, res.dx2, res.dy2, res.flag) == (1, 1, 1, 1, 1)
    assert oracle.verify_probability_one(spec, res.dx1, res.dy2).holds


def test_impossible_random_control():
    rep = run_impossible_search(get_cipher("random-8"), seed=1)
    assert rep.finding is None and rep.reason == REASON_NONE
    assert rep.trace[0]["outcome"].startswith("A-")


def test_impossible_trivial_b_flagged():
    rnd = make_random_spn(seed=4, rounds=3)
    spec = CipherSpec("lin-then-random", "spn", 8, 3, (4, 4, 4),
                      (tuple(range(256)), rnd.sboxes[1], rnd.sboxes[2]), round_cost=10)
    res = find_impossible_differential(spec, seed=2)
    assert res is not None and res.b_trivial and res.dx2 == 0 and res.dy2 == 0
    assert res.flag == 0
    assert oracle.verify_impossible(spec, res.dx1, res.dy2).holds


def test_impossible_full_sweep_ledger():
    spec = get_cipher("feistel-8", rounds=4)
    full = run_impossible_search(spec, seed=3, full_sweep=True)
    assert full.ledger.universal_gates == full.formula.universal_gates
    assert full.ledger.quantum_queries == full.formula.quantum_queries
    assert full.ledger.qubits <= full.formula.qubits
    early = run_impossible_search(spec, seed=3)
    assert early.ledger.universal_gates <= full.ledger.universal_gates
    assert early.finding == full.finding


def test_impossible_result_roundtrip_and_validation():
    r = ImpossibleResult(8, 1, 2, 3, 4, 0, 1)
    assert ImpossibleResult.from_dict(r.to_dict()) == r
    with pytest.raises(ValueError):
        ImpossibleResult(8, 0, 2, 3, 4, 0, 1)
    with pytest.raises(ValueError):
        run_impossible_search(get_cipher("spn-8"))
