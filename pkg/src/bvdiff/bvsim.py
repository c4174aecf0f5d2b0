"""Classical stand-in for the Bernstein-Vazirani subroutine, with gate accounting.

Running BV on ``f`` and measuring yields ``w`` with probability ``S_f(w)^2``.
The sampler draws from that law with integer weights ``raw[w]^2`` (total
``4^arity``), so no probability is ever rounded.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .boolfn import BooleanFunction, WalshSpectrum, walsh_spectrum

MAX_EXACT_ARITY = 31  # cumulative weights 4^arity must fit in int64


@dataclass
class ResourceLedger:
    """Universal gates, qubits, (self-implemented) oracle calls and classical ops."""

    universal_gates: int = 0
    qubits: int = 0
    quantum_queries: int = 0
    classical_ops: int = 0

    def record_bv_runs(self, arity: int, gate_cost: int, runs: int = 1) -> None:
        if runs <= 0:
            return
        self.universal_gates += runs * (2 * arity + 1 + gate_cost)
        self.qubits = max(self.qubits, arity + 1)
        self.quantum_queries += runs

    def merge(self, other: "ResourceLedger") -> "ResourceLedger":
        """Sum of two ledgers; qubits are reused so they combine by max."""
        return ResourceLedger(
            self.universal_gates + other.universal_gates,
            max(self.qubits, other.qubits),
            self.quantum_queries + other.quantum_queries,
            self.classical_ops + other.classical_ops,
        )

    def to_dict(self, formula_predicted: dict | None = None) -> dict:
        d = asdict(self)
        d["formula_predicted"] = formula_predicted
        return d


def merge_ledgers(ledgers: Sequence[ResourceLedger]) -> ResourceLedger:
    total = ResourceLedger()
    for led in ledgers:
        total = total.merge(led)
    return total


def split_cost(total: int, parts: int) -> list[int]:
    """Distribute an integer gate budget over ``parts`` components, exactly.

    The first ``total % parts`` components carry one extra gate.
    """
    if parts < 1:
        raise ValueError("parts must be >= 1")
    if total < 0:
        raise ValueError("gate cost must be nonnegative")
    q, r = divmod(total, parts)
    return [q + (1 if j < r else 0) for j in range(parts)]


@dataclass(frozen=True)
class GateCostModel:
    """Per-component circuit sizes ``|F_j|_Q`` whose sum is ``|F|_Q``."""

    component_costs: tuple[int, ...]

    @classmethod
    def uniform(cls, total: int, n: int) -> "GateCostModel":
        return cls(tuple(split_cost(total, n)))

    @property
    def total(self) -> int:
        return sum(self.component_costs)

    def __getitem__(self, j: int) -> int:
        """Cost of the 1-based component ``F_j``."""
        return self.component_costs[j - 1]


class BVSampler:
    """Seeded sampler over ``N_f`` with law ``S_f(w)^2``; accrues a ledger."""

    def __init__(
        self,
        f: BooleanFunction | WalshSpectrum,
        seed: int | Sequence[int] | np.random.Generator = 0,
        gate_cost: int = 0,
        ledger: ResourceLedger | None = None,
    ):
        spectrum = f if isinstance(f, WalshSpectrum) else walsh_spectrum(f)
        if spectrum.arity > MAX_EXACT_ARITY:
            raise ValueError(f"arity {spectrum.arity} too large for exact int64 weights")
        self.spectrum = spectrum
        self.arity = spectrum.arity
        self.support = spectrum.support.astype(np.int64)
        weights = spectrum.raw[self.support].astype(np.int64) ** 2
        self.cumulative = np.cumsum(weights)
        self.total_weight = int(self.cumulative[-1])
        if self.total_weight != 1 << (2 * self.arity):
            raise AssertionError("Parseval violated; spectrum is corrupt")
        self.gate_cost = gate_cost
        self.ledger = ledger if ledger is not None else ResourceLedger()
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def probability(self, w: int) -> Fraction:
        r = int(self.spectrum.raw[w])
        return Fraction(r * r, self.total_weight)

    def sample_many(self, count: int) -> np.ndarray:
        """``count`` independent BV outcomes as an int64 array."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        if count == 0:
            return np.zeros(0, dtype=np.int64)
        draws = self.rng.integers(0, self.total_weight, size=count, dtype=np.int64)
        idx = np.searchsorted(self.cumulative, draws, side="right")
        self.ledger.record_bv_runs(self.arity, self.gate_cost, count)
        return self.support[idx]

    def sample(self) -> int:
        return int(self.sample_many(1)[0])

    def sample_truncated(self, keep: int, count: int) -> np.ndarray:
        """Full-width samples with everything above the first ``keep`` bits dropped."""
        if not 0 <= keep <= self.arity:
            raise ValueError(f"keep={keep} outside 0..{self.arity}")
        return self.sample_many(count) & ((1 << keep) - 1)


def bv_sample(state: BVSampler) -> int:
    return state.sample()


def bv_sample_truncated(state: BVSampler, keep: int, count: int) -> list[int]:
    return [int(w) for w in state.sample_truncated(keep, count)]


# closed-form predictions ----------------------------------------------


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float (via its repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def algorithm2_runs(n: int, sigma, q) -> tuple[Fraction, int]:
    """Per-component BV run count ``q^2 n^3 / (2 sigma^2)``: exact value and ceiling."""
    sigma = as_fraction(sigma)
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    q = as_fraction(q)
    if q <= 0:
        raise ValueError("q(n) must be positive")
    exact = q * q * n**3 / (2 * sigma * sigma)
    return exact, math.ceil(exact)


@dataclass(frozen=True)
class FormulaPrediction:
    p_exact: Fraction
    p: int
    universal_gates: int
    universal_gates_exact: Fraction
    qubits: int
    quantum_queries: int
    classical_bound: int

    def to_dict(self) -> dict:
        return {
            "p_exact": str(self.p_exact),
            "p": self.p,
            "universal_gates": self.universal_gates,
            "universal_gates_exact": str(self.universal_gates_exact),
            "qubits": self.qubits,
            "quantum_queries": self.quantum_queries,
            "classical_bound": self.classical_bound,
        }


def ledger_close_forms(n: int, m: int, sigma, q, total_cost: int) -> FormulaPrediction:
    """Gate/qubit totals of the truncated-differential search.

    ``p(n) [2n^2 + (2m+1)n + |F|_Q]`` gates on ``n+m+1`` qubits; the integer
    total uses the ceiling of ``p(n)``.
    """
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    p_exact, p = algorithm2_runs(n, sigma, q)
    per_round = 2 * n * n + (2 * m + 1) * n + total_cost
    return FormulaPrediction(
        p_exact=p_exact,
        p=p,
        universal_gates=p * per_round,
        universal_gates_exact=p_exact * per_round,
        qubits=n + m + 1,
        quantum_queries=p * n,
        # 2n systems of p(n) equations in n unknowns
        classical_bound=2 * p * n**3,
    )


def ledger_close_forms_alg3(n: int, m: int, r: int, total_cost: int, p: int | None = None) -> FormulaPrediction:
    """Gate totals of the impossible-differential search over all ``r-2`` splits.

    With ``p = n`` this is ``(r-2)(4n^3 + 2n^2 + 2mn^2 + n|F|_Q)``.
    """
    if r < 3:
        raise ValueError("need r >= 3 rounds")
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    p = n if p is None else p
    gates = p * (r - 2) * (4 * n * n + 2 * n + 2 * m * n + total_cost)
    return FormulaPrediction(
        p_exact=Fraction(p),
        p=p,
        universal_gates=gates,
        universal_gates_exact=Fraction(gates),
        qubits=n + m + 1,
        quantum_queries=2 * p * n * (r - 2),
        classical_bound=4 * (r - 2) * n * p * n * n,
    )
