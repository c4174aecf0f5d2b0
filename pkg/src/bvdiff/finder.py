"""The three structure-finding algorithms over ``bvsim`` and ``gf2``.

* :func:`algorithm1`: approximate linear structures of a single Boolean function.
* :func:`run_truncated_search`: truncated differentials of a keyless view.
* :func:`run_impossible_search`: miss-in-the-middle impossible differentials.

Every sampling loop draws from its own seeded stream, so results do not
depend on loop order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gf2
from .boolfn import BooleanFunction, VectorBooleanFunction, dot
from .bvsim import (
    BVSampler,
    FormulaPrediction,
    GateCostModel,
    ResourceLedger,
    algorithm2_runs,
    as_fraction,
    ledger_close_forms,
    ledger_close_forms_alg3,
)

DEFAULT_BUDGET = 10**8

REASON_GATE = "sn-gate-failed"
REASON_BUDGET = "budget-exhausted"
REASON_NONE = "no-nontrivial-structure"


def _distinct(samples: np.ndarray) -> list[int]:
    return [int(w) for w in np.unique(samples)]


# Algorithm 1 -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Algo1Result:
    """Solution sets ``A^0``, ``A^1`` of the sampled system ``{x.w = i : w in H}``."""

    arity: int
    H: tuple[int, ...]
    A0: gf2.AffineSolutionSet
    A1: gf2.AffineSolutionSet
    ledger: ResourceLedger

    @property
    def no_structure(self) -> bool:
        """True when ``A^0 | A^1`` holds nothing but the zero vector."""
        return self.A0.dim == 0 and self.A1.empty

    def members(self, i: int, cap: int = 1 << 16) -> list[int]:
        return gf2.enumerate_members(self.A0 if i == 0 else self.A1, cap)

    def candidates(self, cap: int = 1 << 16) -> list[tuple[int, int]]:
        """Nonzero ``(a, i)`` pairs emitted as approximate structures."""
        return [(a, 0) for a in self.members(0, cap) if a] + [(a, 1) for a in self.members(1, cap)]


def algorithm1(
    f: BooleanFunction,
    p: int,
    seed: int | Sequence[int] = 0,
    gate_cost: int = 0,
    ledger: ResourceLedger | None = None,
) -> Algo1Result:
    if p < 1:
        raise ValueError("p must be >= 1")
    ledger = ledger if ledger is not None else ResourceLedger()
    sampler = BVSampler(f, seed, gate_cost, ledger)
    H = _distinct(sampler.sample_many(p))
    ops = gf2.OpCounter()
    sols = [gf2.solve(gf2.LinearSystemGF2(f.arity, [(w, i) for w in H]), ops) for i in (0, 1)]
    ledger.classical_ops += ops.ops
    return Algo1Result(f.arity, tuple(H), sols[0], sols[1], ledger)


# Algorithm 2 -------------------------------------------------------------


def sn_gate(t: int, sigma) -> tuple[bool, Fraction]:
    """``(2^t (1 - sigma) > 1, 2^t (1 - sigma))`` in exact arithmetic."""
    sigma = as_fraction(sigma)
    if not 0 <= sigma < 1:
        raise ValueError(f"sigma must lie in [0, 1), got {sigma}")
    value = (1 << t) * (1 - sigma)
    return value > 1, value


@dataclass(frozen=True)
class Algo2Config:
    sigma: Fraction
    q: Fraction
    budget: int = DEFAULT_BUDGET

    def __init__(self, sigma, q, budget: int = DEFAULT_BUDGET):
        sigma, q = as_fraction(sigma), as_fraction(q)
        if not 0 < sigma < 1:
            raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
        if q <= 0:
            raise ValueError("q must be positive")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "budget", int(budget))

    def p_exact(self, n: int) -> Fraction:
        return algorithm2_runs(n, self.sigma, self.q)[0]

    def p(self, n: int) -> int:
        return algorithm2_runs(n, self.sigma, self.q)[1]


def format_trits(b: Sequence[int | None]) -> str:
    return "".join("x" if v is None else str(v) for v in b)


def parse_trits(s: str) -> tuple[int | None, ...]:
    out = []
    for c in s.strip().lower():
        if c in "x×*":
            out.append(None)
        elif c in "01":
            out.append(int(c))
        else:
            raise ValueError(f"bad trit {c!r} in {s!r}")
    return tuple(out)


def trits_masks(b: Sequence[int | None]) -> tuple[int, int]:
    """``(mask of predicted positions, their values)`` as integers."""
    mask = value = 0
    for j, v in enumerate(b):
        if v is not None:
            mask |= 1 << j
            value |= v << j
    return mask, value


@dataclass(frozen=True)
class TruncatedDifferential:
    """Input difference ``a`` and output pattern ``b`` (``None`` = unpredicted)."""

    n: int
    a: int
    b: tuple[int | None, ...]
    t: int
    sn: Fraction
    components: tuple[int, ...] = ()

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("input difference must be nonzero")
        if len(self.b) != self.n or sum(v is not None for v in self.b) != self.t:
            raise ValueError("b must have n trits with exactly t predicted")

    @property
    def b_trits(self) -> str:
        return format_trits(self.b)

    @property
    def a_hex(self) -> str:
        return format(self.a, f"0{max(1, (self.n + 3) // 4)}x")

    def to_dict(self) -> dict:
        return {
            "type": "truncated",
            "n": self.n,
            "a_hex": self.a_hex,
            "b_trits": self.b_trits,
            "t": self.t,
            "sn": str(self.sn),
            "components": list(self.components),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TruncatedDifferential":
        b = parse_trits(d["b_trits"])
        t = sum(v is not None for v in b)
        sn = Fraction(d["sn"]) if "sn" in d else Fraction(0)
        comps = tuple(d.get("components") or [j + 1 for j, v in enumerate(b) if v is not None])
        return cls(int(d.get("n", len(b))), int(d["a_hex"], 16), b, t, sn, comps)


@dataclass(eq=False)
class Algo2Report:
    finding: TruncatedDifferential | None
    reason: str | None
    ledger: ResourceLedger
    formula: FormulaPrediction
    p: int
    component_dims: tuple[int, ...]
    probes: int = 0

    def to_dict(self) -> dict:
        return {
            "finding": None if self.finding is None else self.finding.to_dict(),
            "reason": self.reason,
            "p": self.p,
            "component_dims": list(self.component_dims),
            "subset_probes": self.probes,
            "ledger": self.ledger.to_dict(self.formula.to_dict()),
        }


def component_structure_space(
    sampler: BVSampler, n: int, p: int, counter: gf2.OpCounter | None = None
) -> tuple[gf2.Subspace, int]:
    """Sample ``p`` truncated outcomes; return ``A = A^0 | A^1`` and a reference ``w0``.

    A member ``a`` lies in ``A^i`` with ``i = a.w0``.
    """
    H = _distinct(sampler.sample_truncated(n, p))
    return gf2.common_derivative_space(H, n, counter), H[0]


def _first_subset(
    spaces: dict[int, gf2.Subspace], t: int
) -> tuple[tuple[tuple[int, ...], gf2.Subspace] | None, int]:
    """Lexicographically first ``t`` components with a nonzero common subspace.

    Depth-first, pruning as soon as a partial intersection collapses; also
    returns the number of pairwise intersections tried.
    """
    keys = sorted(spaces)
    found: list = []
    probes = [0]

    def dfs(start: int, chosen: list[int], acc: gf2.Subspace | None) -> bool:
        if len(chosen) == t:
            found.append((tuple(chosen), acc))
            return True
        for idx in range(start, len(keys) - (t - len(chosen)) + 1):
            j = keys[idx]
            nxt = spaces[j] if acc is None else gf2.intersect([acc, spaces[j]])
            probes[0] += 1
            if nxt.is_trivial():
                continue
            chosen.append(j)
            if dfs(idx + 1, chosen, nxt):
                return True
            chosen.pop()
        return False

    dfs(0, [], None)
    return (found[0] if found else None), probes[0]


def _budget_cost(n: int, t: int, alpha: int) -> float:
    return math.comb(n, t) * t * alpha * max(1.0, math.log2(alpha))


def run_truncated_search(
    F: VectorBooleanFunction,
    cfg: Algo2Config,
    seed: int = 0,
    gate_cost: int | GateCostModel = 0,
    n: int | None = None,
) -> Algo2Report:
    """Sampling phase over every ``F_j`` followed by the ``t``-descent."""
    n = F.out_width if n is None else n
    m = F.arity - n
    if m < 0:
        raise ValueError("keyless view narrower than the block")
    costs = gate_cost if isinstance(gate_cost, GateCostModel) else GateCostModel.uniform(gate_cost, n)
    if len(costs.component_costs) != n:
        raise ValueError("need one gate cost per component")
    p = cfg.p(n)
    ledger = ResourceLedger()
    counter = gf2.OpCounter()
    spaces: dict[int, gf2.Subspace] = {}
    refs: dict[int, int] = {}
    for j in range(1, n + 1):
        sampler = BVSampler(F.component(j), [seed, j], costs[j], ledger)
        spaces[j], refs[j] = component_structure_space(sampler, n, p, counter)
    ledger.classical_ops += counter.ops
    formula = ledger_close_forms(n, m, cfg.sigma, cfg.q, costs.total)
    dims = tuple(spaces[j].dim for j in range(1, n + 1))

    nontrivial = {j: s for j, s in spaces.items() if not s.is_trivial()}
    alpha = max(s.size for s in spaces.values())
    probes = 0
    reason = REASON_GATE
    for t in range(n, 0, -1):
        ok, sn = sn_gate(t, cfg.sigma)
        if not ok:
            break
        reason = REASON_NONE
        if _budget_cost(n, t, alpha) > cfg.budget:
            reason = REASON_BUDGET
            break
        if len(nontrivial) < t:
            continue
        hit, used = _first_subset(nontrivial, t)
        probes += used
        if hit is None:
            continue
        comps, common = hit
        a = common.min_nonzero()
        chosen = set(comps)
        b = tuple(dot(a, refs[j]) if j in chosen else None for j in range(1, n + 1))
        td = TruncatedDifferential(n, a, b, t, sn, comps)
        return Algo2Report(td, None, ledger, formula, p, dims, probes)
    return Algo2Report(None, reason, ledger, formula, p, dims, probes)


def find_truncated_differential(
    F: VectorBooleanFunction, cfg: Algo2Config, seed: int = 0, gate_cost: int | GateCostModel = 0
) -> TruncatedDifferential | None:
    return run_truncated_search(F, cfg, seed, gate_cost).finding


# Algorithm 3 -------------------------------------------------------------


@dataclass(frozen=True)
class ImpossibleResult:
    """``(dx1, dy2)`` with flag 0 (impossible) or 1 (probability one)."""

    n: int
    dx1: int
    dy1: int
    dx2: int
    dy2: int
    flag: int
    split_v: int
    b_trivial: bool = False

    def __post_init__(self):
        if self.dx1 == 0:
            raise ValueError("dx1 must be nonzero")
        if self.flag not in (0, 1):
            raise ValueError("flag must be 0 or 1")

    def _hex(self, v: int) -> str:
        return format(v, f"0{max(1, (self.n + 3) // 4)}x")

    def to_dict(self) -> dict:
        return {
            "type": "impossible",
            "n": self.n,
            "a_hex": self._hex(self.dx1),
            "dx1_hex": self._hex(self.dx1),
            "dy1_hex": self._hex(self.dy1),
            "dx2_hex": self._hex(self.dx2),
            "dy2_hex": self._hex(self.dy2),
            "flag": self.flag,
            "split_v": self.split_v,
            "b_trivial": self.b_trivial,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImpossibleResult":
        return cls(
            int(d["n"]),
            int(d["dx1_hex"], 16),
            int(d["dy1_hex"], 16),
            int(d["dx2_hex"], 16),
            int(d["dy2_hex"], 16),
            int(d["flag"]),
            int(d["split_v"]),
            bool(d.get("b_trivial", False)),
        )


@dataclass(eq=False)
class Algo3Report:
    finding: ImpossibleResult | None
    reason: str | None
    ledger: ResourceLedger
    formula: FormulaPrediction
    p: int
    trace: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "finding": None if self.finding is None else self.finding.to_dict(),
            "reason": self.reason,
            "p": self.p,
            "trace": self.trace,
            "ledger": self.ledger.to_dict(self.formula.to_dict()),
        }


def _half_spaces(
    G: VectorBooleanFunction,
    n: int,
    p: int,
    costs: GateCostModel,
    ledger: ResourceLedger,
    seed_prefix: list[int],
    counter: gf2.OpCounter,
    stop_on_trivial: bool,
) -> tuple[list[gf2.Subspace], list[int], bool]:
    """Per-component spaces of one half; ``collapsed`` reports an early break."""
    spaces, refs = [], []
    collapsed = False
    for j in range(1, n + 1):
        sampler = BVSampler(G.component(j), [*seed_prefix, j], costs[j], ledger)
        space, w0 = component_structure_space(sampler, n, p, counter)
        spaces.append(space)
        refs.append(w0)
        if space.is_trivial():
            collapsed = True
            if stop_on_trivial:
                break
    return spaces, refs, collapsed


def _output_difference(a: int, refs: Sequence[int]) -> int:
    return sum(dot(a, w) << j for j, w in enumerate(refs))


def run_impossible_search(
    spec,
    p: int | None = None,
    seed: int = 0,
    cap: int | None = None,
    full_sweep: bool = False,
) -> Algo3Report:
    """Miss-in-the-middle over the splits ``v = 1..r-2`` of ``F = E^(r-1)``.

    With ``full_sweep`` every split and component is sampled (for ledger
    audits); the reported finding is unchanged.
    """
    from . import ciphers

    n, r = spec.n, spec.rounds
    if r < 3:
        raise ValueError("need r >= 3 rounds")
    p = n if p is None else p
    if p < 1:
        raise ValueError("p must be >= 1")
    cap = ciphers.DEFAULT_TABLE_CAP if cap is None else cap
    m = spec.key_bits(r - 1)
    formula = ledger_close_forms_alg3(n, m, r, spec.gate_cost(r - 1), p)
    ledger = ResourceLedger()
    counter = gf2.OpCounter()
    trace: list[dict] = []
    finding: ImpossibleResult | None = None
    for v in range(1, r - 1):
        sp = ciphers.split(spec, v, cap)
        hat_costs = GateCostModel.uniform(spec.gate_cost(v), n)
        chk_costs = GateCostModel.uniform(spec.gate_cost(r - 1 - v), n)
        stop = finding is None and not full_sweep
        A, a_refs, collapsed = _half_spaces(sp.F_hat, n, p, hat_costs, ledger, [seed, v, 0], counter, stop)
        step = {"v": v, "A_dims": [s.dim for s in A]}
        trace.append(step)
        if collapsed:
            step["outcome"] = "A-component-trivial"
            if full_sweep:
                _half_spaces(sp.F_check, n, p, chk_costs, ledger, [seed, v, 1], counter, False)
            continue
        A_v = gf2.intersect(A, counter)
        step["A_v_dim"] = A_v.dim
        if A_v.is_trivial():
            step["outcome"] = "A-intersection-trivial"
            if full_sweep:
                _half_spaces(sp.F_check, n, p, chk_costs, ledger, [seed, v, 1], counter, False)
            continue
        a = A_v.min_nonzero()
        dy1 = _output_difference(a, a_refs)
        B, b_refs, _ = _half_spaces(sp.F_check, n, p, chk_costs, ledger, [seed, v, 1], counter, False)
        B_v = gf2.intersect(B, counter)
        step["B_dims"] = [s.dim for s in B]
        step["B_v_dim"] = B_v.dim
        b = B_v.min_nonzero()
        b_trivial = b is None
        b = 0 if b is None else b
        dy2 = _output_difference(b, b_refs)
        flag = 0 if dy1 != b else 1
        step["outcome"] = f"flag-{flag}"
        if finding is None:
            finding = ImpossibleResult(n, a, dy1, b, dy2, flag, v, b_trivial)
        if not full_sweep:
            break
    ledger.classical_ops += counter.ops
    reason = None if finding is not None else REASON_NONE
    return Algo3Report(finding, reason, ledger, formula, p, trace)


def find_impossible_differential(spec, p: int | None = None, seed: int = 0) -> ImpossibleResult | None:
    return run_impossible_search(spec, p, seed).finding
