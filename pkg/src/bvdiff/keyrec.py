"""Last-round key recovery by counting, driven by a truncated differential."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ciphers
from .finder import TruncatedDifferential, parse_trits, trits_masks

LAMBDA = Fraction(1)
HIGH_SN_THRESHOLD = 10
PAIRS_LOW_SN = 40
PAIRS_HIGH_SN = 4


def _exact(x) -> Fraction:
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class SNReport:
    key_space: int
    p: Fraction
    t: int
    gamma: Fraction
    lam: Fraction
    ratio: Fraction

    def to_dict(self) -> dict:
        return {
            "key_space": self.key_space,
            "p": str(self.p),
            "t": self.t,
            "gamma": str(self.gamma),
            "lambda": str(self.lam),
            "ratio": str(self.ratio),
            "ratio_float": float(self.ratio),
        }


def signal_to_noise(key_space: int, p, t: int) -> SNReport:
    """``S/N = |S| p / (gamma lambda)`` with ``gamma = |S| / 2^t`` and ``lambda = 1``."""
    p = _exact(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if t < 1:
        raise ValueError("t must be >= 1")
    if key_space < 1:
        raise ValueError("key space must be nonempty")
    gamma = Fraction(key_space, 1 << t)
    return SNReport(key_space, p, t, gamma, LAMBDA, key_space * p / (gamma * LAMBDA))


def required_pairs(sn_value, p) -> int:
    """Pairs needed: about 4 right pairs at high S/N, about 40 otherwise."""
    sn_value, p = _exact(sn_value), _exact(p)
    if sn_value <= 1:
        raise ValueError("counting needs S/N > 1")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    right = PAIRS_HIGH_SN if sn_value >= HIGH_SN_THRESHOLD else PAIRS_LOW_SN
    return math.ceil(right / p)


@dataclass(eq=False)
class CountingRun:
    N: int
    counters: np.ndarray
    ranking: list[int]
    right_key: int
    right_key_rank: int | None
    right_pairs: int
    seed: int
    sn_report: SNReport | None = None

    def top(self, k: int = 8) -> list[tuple[int, int]]:
        return [(s, int(self.counters[s])) for s in self.ranking[:k]]

    def to_dict(self, top_k: int = 8) -> dict:
        return {
            "N": self.N,
            "seed": self.seed,
            "right_key": self.right_key,
            "right_key_rank": self.right_key_rank,
            "right_pairs": self.right_pairs,
            "total_count": int(self.counters.sum()),
            "top_k_ranking": [{"key": s, "count": c} for s, c in self.top(top_k)],
            "sn_report": None if self.sn_report is None else self.sn_report.to_dict(),
        }

    def histogram_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "count"])
        for s, c in enumerate(self.counters):
            w.writerow([s, int(c)])
        return buf.getvalue()


def rank_of(counters: np.ndarray, key: int) -> int:
    """Pessimistic rank: ties with the right key count against it."""
    return int(np.count_nonzero(counters >= counters[key]))


def run_counting_attack(
    spec,
    td: TruncatedDifferential | tuple[int, str],
    N: int,
    seed: int,
    key: int | None = None,
    p=None,
) -> CountingRun:
    """Encrypt ``N`` chosen pairs ``(x, x+a)``, undo the last round under every ``s``, count matches of ``b``."""
    if isinstance(td, TruncatedDifferential):
        a, trits, t = td.a, td.b, td.t
    else:
        a, trits = td[0], parse_trits(td[1])
        t = sum(v is not None for v in trits)
    n = spec.n
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N > 1 << n:
        raise ValueError(f"cannot draw {N} distinct plaintexts from 2^{n}")
    rng = np.random.default_rng(seed)
    m = spec.key_bits()
    if key is None:
        key = int(rng.integers(0, 1 << m)) if m else 0
    s_bits = spec.last_round_key_bits
    right_key = (key >> spec.key_offset(spec.rounds - 1)) & ((1 << s_bits) - 1)
    size = 1 << s_bits
    sn = signal_to_noise(size, p, t) if p is not None and t >= 1 else None
    counters = np.zeros(size, dtype=np.int64)
    if N == 0:
        return CountingRun(0, counters, list(range(size)), right_key, None, 0, seed, sn)
    xs = rng.choice(1 << n, size=N, replace=False).astype(np.uint64)
    k = np.uint64(key)
    y0 = ciphers.apply_rounds(spec, xs, k, 0, spec.rounds)
    y1 = ciphers.apply_rounds(spec, xs ^ np.uint64(a), k, 0, spec.rounds)
    mask, value = trits_masks(trits)
    s = np.arange(size, dtype=np.uint64)[:, None]
    d = ciphers.round_inverse(spec, spec.rounds - 1, y0[None, :], s) ^ ciphers.round_inverse(
        spec, spec.rounds - 1, y1[None, :], s
    )
    match = (d & np.uint64(mask)) == np.uint64(value)
    counters[:] = match.sum(axis=1)
    ranking = sorted(range(size), key=lambda c: (-int(counters[c]), c))
    return CountingRun(
        N,
        counters,
        ranking,
        right_key,
        rank_of(counters, right_key),
        int(counters[right_key]),
        seed,
        sn,
    )
