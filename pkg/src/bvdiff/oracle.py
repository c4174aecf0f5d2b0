"""Brute-force ground truth for everything the finder emits.

All probabilities are exact rationals computed by enumerating plaintexts.
Two independent routes exist for truncated-differential probabilities: a
direct loop over ``x`` and an aggregation of a difference distribution
table row; the test-suite checks they agree.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import ciphers
from .boolfn import DEFAULT_BRUTE_CAP, ArityCapExceeded, delta_prime
from .finder import parse_trits, trits_masks

DEFAULT_KEY_CAP = 1 << 16
SAMPLED_KEYS = 4096
SAMPLE_SEED = 20240501


def _trits(b) -> tuple[int | None, ...]:
    return parse_trits(b) if isinstance(b, str) else tuple(b)


def _keyed_outputs(spec, t: int, k: int) -> np.ndarray:
    """``F_k(x)`` for every ``x`` (``F = E^(t)``)."""
    x = np.arange(1 << spec.n, dtype=np.uint64)
    return ciphers.apply_rounds(spec, x, np.uint64(k), 0, t)


def _rounds(spec, t: int | None) -> int:
    return spec.rounds - 1 if t is None else t


def output_differences(spec, k: int, a: int, t: int | None = None) -> np.ndarray:
    y = _keyed_outputs(spec, _rounds(spec, t), k)
    x = np.arange(1 << spec.n, dtype=np.uint64)
    return y[x ^ np.uint64(a)] ^ y


def truncated_prob(spec, k: int, a: int, b, t: int | None = None) -> Fraction:
    """Exact ``Pr_x[F_k(x+a)+F_k(x) matches b]`` by a direct loop."""
    mask, value = trits_masks(_trits(b))
    d = output_differences(spec, k, a, t)
    hits = int(np.count_nonzero((d & np.uint64(mask)) == np.uint64(value)))
    return Fraction(hits, 1 << spec.n)


def ddt_row(spec, k: int, a: int, t: int | None = None) -> np.ndarray:
    """Row ``a`` of the DDT of ``F_k``, built pair by pair."""
    n = spec.n
    y = [int(v) for v in _keyed_outputs(spec, _rounds(spec, t), k)]
    row = np.zeros(1 << n, dtype=np.int64)
    for x in range(1 << n):
        row[y[x ^ a] ^ y[x]] += 1
    return row


def ddt(spec, k: int, t: int | None = None) -> np.ndarray:
    """Full ``2^n x 2^n`` difference distribution table of ``F_k``."""
    n = spec.n
    if n > 12:
        raise ArityCapExceeded(f"DDT of a {n}-bit block is too large")
    y = _keyed_outputs(spec, _rounds(spec, t), k).astype(np.int64)
    x = np.arange(1 << n, dtype=np.int64)
    table = np.zeros((1 << n, 1 << n), dtype=np.int64)
    for a in range(1 << n):
        np.add.at(table[a], y[x ^ a] ^ y, 1)
    return table


def ddt_csv(table: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    size = table.shape[1]
    w.writerow(["a"] + [format(d, "x") for d in range(size)])
    for a, row in enumerate(table):
        w.writerow([format(a, "x")] + [int(v) for v in row])
    return buf.getvalue()


def truncated_prob_ddt(spec, k: int, a: int, b, t: int | None = None) -> Fraction:
    """Same quantity as :func:`truncated_prob`, summed from a DDT row."""
    mask, value = trits_masks(_trits(b))
    row = ddt_row(spec, k, a, t)
    deltas = np.arange(row.size)
    hit = (deltas & mask) == value
    return Fraction(int(row[hit].sum()), 1 << spec.n)


# key fractions -----------------------------------------------------------


@dataclass(frozen=True)
class KeyFractionReport:
    threshold: Fraction
    v_min: Fraction
    v_max: Fraction
    v_mean: Fraction
    fraction: Fraction
    mode: str
    keys: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "threshold": str(self.threshold),
            "v_min": str(self.v_min),
            "v_max": str(self.v_max),
            "v_mean": str(self.v_mean),
            "fraction": str(self.fraction),
            "fraction_float": float(self.fraction),
            "mode": self.mode,
            "keys": self.keys,
            "seed": self.seed,
        }


def _key_set(m: int, cap: int, samples: int, seed: int) -> tuple[np.ndarray, str, int | None]:
    if (1 << m) <= cap:
        return np.arange(1 << m, dtype=np.uint64), "exhaustive", None
    rng = np.random.default_rng(seed)
    samples = max(samples, SAMPLED_KEYS)
    return rng.integers(0, 1 << m, size=samples, dtype=np.uint64), "sampled", seed


def per_key_probabilities(spec, keys: np.ndarray, a: int, b, t: int | None = None) -> np.ndarray:
    """Hit counts (out of ``2^n``) for every key, vectorised over plaintexts."""
    mask, value = trits_masks(_trits(b))
    n = spec.n
    t = _rounds(spec, t)
    x = np.arange(1 << n, dtype=np.uint64)
    out = np.empty(len(keys), dtype=np.int64)
    chunk = max(1, (1 << 20) >> n)
    for s in range(0, len(keys), chunk):
        kk = keys[s : s + chunk, None]
        y0 = ciphers.apply_rounds(spec, x[None, :], kk, 0, t)
        y1 = ciphers.apply_rounds(spec, (x ^ np.uint64(a))[None, :], kk, 0, t)
        out[s : s + chunk] = np.count_nonzero(((y0 ^ y1) & np.uint64(mask)) == np.uint64(value), axis=1)
    return out


def key_fraction(
    spec,
    a: int,
    b,
    theta,
    t: int | None = None,
    cap: int = DEFAULT_KEY_CAP,
    samples: int = SAMPLED_KEYS,
    seed: int = SAMPLE_SEED,
) -> KeyFractionReport:
    """Fraction of keys ``k`` with ``V(k) > theta``."""
    theta = Fraction(theta) if not isinstance(theta, float) else Fraction(repr(theta))
    t = _rounds(spec, t)
    keys, mode, used_seed = _key_set(spec.key_bits(t), cap, samples, seed)
    hits = per_key_probabilities(spec, keys, a, b, t)
    size = 1 << spec.n
    above = int(np.count_nonzero(hits * theta.denominator > theta.numerator * size))
    return KeyFractionReport(
        threshold=theta,
        v_min=Fraction(int(hits.min()), size),
        v_max=Fraction(int(hits.max()), size),
        v_mean=Fraction(int(hits.sum()), size * len(keys)),
        fraction=Fraction(above, len(keys)),
        mode=mode,
        keys=len(keys),
        seed=used_seed,
    )


# impossible / probability-one differentials ------------------------------


@dataclass(frozen=True)
class DifferentialCheck:
    holds: bool
    mode: str
    pairs_checked: int
    counterexample: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "mode": self.mode,
            "pairs_checked": self.pairs_checked,
            "counterexample": None if self.counterexample is None else list(self.counterexample),
        }


def _scan(spec, dx: int, dy: int, t: int | None, want_equal: bool, cap: int, samples: int, seed: int) -> DifferentialCheck:
    """Search for an ``(x, k)`` that breaks the claim."""
    t = _rounds(spec, t)
    n = spec.n
    keys, mode, _ = _key_set(spec.key_bits(t), cap, samples, seed)
    x = np.arange(1 << n, dtype=np.uint64)
    chunk = max(1, (1 << 20) >> n)
    for s in range(0, len(keys), chunk):
        kk = keys[s : s + chunk, None]
        d = ciphers.apply_rounds(spec, x[None, :], kk, 0, t) ^ ciphers.apply_rounds(
            spec, (x ^ np.uint64(dx))[None, :], kk, 0, t
        )
        bad = (d != np.uint64(dy)) if want_equal else (d == np.uint64(dy))
        if bad.any():
            ki, xi = map(int, np.argwhere(bad)[0])
            return DifferentialCheck(False, mode, (s + ki) * (1 << n) + xi + 1, (xi, int(keys[s + ki])))
    return DifferentialCheck(True, mode, len(keys) << n)


def verify_impossible(
    spec, dx: int, dy: int, t: int | None = None, cap: int = DEFAULT_KEY_CAP, samples: int = SAMPLED_KEYS, seed: int = SAMPLE_SEED
) -> DifferentialCheck:
    """No ``(x, k)`` gives ``F_k(x+dx)+F_k(x) = dy``."""
    return _scan(spec, dx, dy, t, False, cap, samples, seed)


def verify_probability_one(
    spec, dx: int, dy: int, t: int | None = None, cap: int = DEFAULT_KEY_CAP, samples: int = SAMPLED_KEYS, seed: int = SAMPLE_SEED
) -> DifferentialCheck:
    """Every ``(x, k)`` gives ``F_k(x+dx)+F_k(x) = dy``."""
    return _scan(spec, dx, dy, t, True, cap, samples, seed)


def delta_prime_F(spec, cap: int = DEFAULT_BRUTE_CAP) -> Fraction:
    """Max of ``delta'`` over every component of every split half."""
    r = spec.rounds
    if r < 3:
        raise ValueError("need r >= 3 rounds")
    best = Fraction(0)
    for v in range(1, r - 1):
        widest = spec.n + max(spec.key_bits(v), spec.key_bits(r - 1) - spec.key_bits(v))
        if widest > cap:
            raise ArityCapExceeded(f"component arity {widest} exceeds cap {cap}")
        sp = ciphers.split(spec, v, cap=cap)
        for G in (sp.F_hat, sp.F_check):
            for j in range(1, spec.n + 1):
                best = max(best, delta_prime(G.component(j), cap))
    return best


def verify_finding(spec, finding: dict, sigma=None, q=None) -> dict:
    """Re-check a serialised finding against brute force."""
    kind = finding.get("type")
    if kind == "truncated":
        a = int(finding["a_hex"], 16)
        b = finding["b_trits"]
        out: dict = {"type": "truncated", "a_hex": finding["a_hex"], "b_trits": b}
        if sigma is not None:
            sigma = Fraction(repr(sigma)) if isinstance(sigma, float) else Fraction(sigma)
            rep = key_fraction(spec, a, b, 1 - sigma)
            out["key_fraction"] = rep.to_dict()
            need = Fraction(1) - (Fraction(1) / Fraction(q) if q is not None else 0)
            out["required_fraction"] = str(need)
            out["passes"] = rep.fraction >= need
        else:
            rep = key_fraction(spec, a, b, Fraction(0))
            out["key_fraction"] = rep.to_dict()
            out["passes"] = True
        return out
    if kind == "impossible":
        dx, dy = int(finding["dx1_hex"], 16), int(finding["dy2_hex"], 16)
        flag = int(finding["flag"])
        check = verify_impossible(spec, dx, dy) if flag == 0 else verify_probability_one(spec, dx, dy)
        return {"type": "impossible", "flag": flag, "check": check.to_dict(), "passes": check.holds}
    raise ValueError(f"unknown finding type {kind!r}")


def random_pair_counterexample(spec, rng: np.random.Generator, t: int | None = None) -> tuple[int, int, DifferentialCheck]:
    """A random nonzero ``(dx, dy)`` and its probability-one check (expected to fail)."""
    n = spec.n
    dx = int(rng.integers(1, 1 << n))
    dy = int(rng.integers(0, 1 << n))
    return dx, dy, verify_probability_one(spec, dx, dy, t)


def trits_from_difference(delta: int, n: int, positions: Sequence[int] | None = None) -> str:
    """Full (or partial, 1-based ``positions``) pattern string of a difference."""
    pos = set(range(1, n + 1)) if positions is None else set(positions)
    return "".join(str((delta >> (j - 1)) & 1) if j in pos else "x" for j in range(1, n + 1))
