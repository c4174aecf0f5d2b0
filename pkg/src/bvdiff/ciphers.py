"""Toy block ciphers, their reduced versions and keyless views.

Key model: round ``i`` (0-based) takes an independent subkey of width
``key_widths[i]``; the master key is the concatenation with round 0 in the
lowest bits.  The keyless view of ``E^(t)`` is the function of
``z = x | (k << n)`` where ``k`` holds the first ``t`` subkeys.

Topologies (``x = L | R << n/2`` for the Feistel variants):

* ``identity``            ``x -> x``
* ``feistel``             ``(L, R) -> (R, L ^ f(R, k))``
* ``unswapped-feistel``   ``(L, R) -> (L ^ f(R, k), R)``
* ``spn``                 ``x -> P(S(x ^ K))`` with ``K`` the subkey repeated to ``n`` bits

with ``f(R, k) = P(S(R' ^ k))`` and ``R'`` equal to ``R`` minus the round's
ignored bits.  ``S`` applies one S-box to every chunk of its width.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .boolfn import VectorBooleanFunction

DEFAULT_TABLE_CAP = 24
TOPOLOGIES = ("identity", "feistel", "unswapped-feistel", "spn")


class CipherError(ValueError):
    pass


class TableCapExceeded(CipherError):
    pass


def _u64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint64)


def _parse_int(v) -> int:
    return int(v, 16) if isinstance(v, str) else int(v)


@dataclass(frozen=True)
class CipherSpec:
    name: str
    topology: str
    block_bits: int
    rounds: int
    key_widths: tuple[int, ...]
    sboxes: tuple[tuple[int, ...], ...] = ()
    perm: tuple[int, ...] | None = None
    ignore_masks: tuple[int, ...] | None = None
    round_cost: int = 0
    description: str = ""
    planted: dict | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        n = self.block_bits
        if self.topology not in TOPOLOGIES:
            raise CipherError(f"unknown topology {self.topology!r}")
        if self.rounds < 1:
            raise CipherError("need at least one round")
        if len(self.key_widths) != self.rounds:
            raise CipherError("one subkey width per round")
        if self.topology in ("feistel", "unswapped-feistel"):
            if n % 2:
                raise CipherError("Feistel block size must be even")
            if any(w != n // 2 for w in self.key_widths):
                raise CipherError("Feistel subkeys must be half a block wide")
        if self.topology == "spn" and any(w == 0 or n % w for w in self.key_widths):
            raise CipherError("SPN subkey width must divide the block size")
        if self.topology == "identity" and any(self.key_widths):
            raise CipherError("identity rounds take no key")
        if self.topology != "identity":
            if len(self.sboxes) not in (1, self.rounds):
                raise CipherError("give one shared S-box or one per round")
            word = self._sbox_word()
            for s in self.sboxes:
                w = len(s).bit_length() - 1
                if len(s) != 1 << w or word % w:
                    raise CipherError("S-box size must be a power of two dividing the word")
                if sorted(s) != list(range(len(s))):
                    raise CipherError("S-boxes must be bijective")
        if self.perm is not None and sorted(self.perm) != list(range(self._sbox_word())):
            raise CipherError("perm must be a permutation of the S-layer word bits")
        if self.ignore_masks is not None and len(self.ignore_masks) != self.rounds:
            raise CipherError("one ignore mask per round")

    # metadata -----------------------------------------------------------

    @property
    def n(self) -> int:
        return self.block_bits

    def key_bits(self, t: int | None = None) -> int:
        """Width of the key of ``E^(t)`` (all rounds by default)."""
        t = self.rounds if t is None else t
        return sum(self.key_widths[:t])

    def key_offset(self, i: int) -> int:
        return sum(self.key_widths[:i])

    @property
    def last_round_key_bits(self) -> int:
        return self.key_widths[-1]

    def gate_cost(self, rounds: int) -> int:
        """``|E^(rounds)|_Q`` under the fixed per-round cost constant."""
        return rounds * self.round_cost

    def _sbox_word(self) -> int:
        return self.block_bits // 2 if self.topology.endswith("feistel") else self.block_bits

    def sbox(self, i: int) -> tuple[int, ...]:
        return self.sboxes[i if len(self.sboxes) > 1 else 0]

    def with_rounds(self, rounds: int) -> "CipherSpec":
        if len(self.sboxes) > 1 or (self.ignore_masks and len(set(self.ignore_masks)) > 1):
            raise CipherError(f"{self.name} has per-round tables; cannot change its round count")
        width = self.key_widths[0]
        masks = None if self.ignore_masks is None else (self.ignore_masks[0],) * rounds
        return replace(
            self,
            rounds=rounds,
            key_widths=(width,) * rounds,
            ignore_masks=masks,
            name=f"{self.name}@r{rounds}",
            planted=None,
        )

    # serialisation ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "topology": self.topology,
            "block_bits": self.block_bits,
            "rounds": self.rounds,
            "key_widths": list(self.key_widths),
            "sboxes": [[f"{v:#x}" for v in s] for s in self.sboxes],
            "perm": None if self.perm is None else list(self.perm),
            "ignore_masks": None if self.ignore_masks is None else [f"{m:#x}" for m in self.ignore_masks],
            "round_cost": self.round_cost,
            "description": self.description,
            "planted": self.planted,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CipherSpec":
        masks = d.get("ignore_masks")
        perm = d.get("perm")
        return cls(
            name=d["name"],
            topology=d["topology"],
            block_bits=int(d["block_bits"]),
            rounds=int(d["rounds"]),
            key_widths=tuple(int(w) for w in d["key_widths"]),
            sboxes=tuple(tuple(_parse_int(v) for v in s) for s in d.get("sboxes", [])),
            perm=None if perm is None else tuple(int(i) for i in perm),
            ignore_masks=None if masks is None else tuple(_parse_int(m) for m in masks),
            round_cost=int(d.get("round_cost", 0)),
            description=d.get("description", ""),
            planted=d.get("planted"),
        )


# round primitives --------------------------------------------------------


def _sbox_layer(spec: CipherSpec, i: int, u: np.ndarray, word: int, inverse: bool = False) -> np.ndarray:
    table = np.asarray(spec.sbox(i), dtype=np.uint64)
    if inverse:
        inv = np.empty_like(table)
        inv[table] = np.arange(table.size, dtype=np.uint64)
        table = inv
    w = table.size.bit_length() - 1
    mask = np.uint64((1 << w) - 1)
    out = np.zeros_like(u)
    for c in range(0, word, w):
        sh = np.uint64(c)
        out |= table[(u >> sh) & mask] << sh
    return out


def _permute(perm: Sequence[int] | None, u: np.ndarray, inverse: bool = False) -> np.ndarray:
    if perm is None:
        return u
    out = np.zeros_like(u)
    for src, dst in enumerate(perm):
        if inverse:
            src, dst = dst, src
        out |= ((u >> np.uint64(src)) & np.uint64(1)) << np.uint64(dst)
    return out


def _feistel_f(spec: CipherSpec, i: int, r: np.ndarray, k: np.ndarray) -> np.ndarray:
    h = spec.n // 2
    if spec.ignore_masks is not None:
        r = r & np.uint64(~spec.ignore_masks[i] & ((1 << h) - 1))
    return _permute(spec.perm, _sbox_layer(spec, i, r ^ k, h))


def _expand_key(spec: CipherSpec, i: int, k: np.ndarray) -> np.ndarray:
    w = spec.key_widths[i]
    out = np.zeros_like(k)
    for c in range(0, spec.n, w):
        out |= k << np.uint64(c)
    return out


def round_forward(spec: CipherSpec, i: int, x, k) -> np.ndarray:
    """Round ``i`` (0-based) on blocks ``x`` under subkeys ``k`` (broadcasting)."""
    x, k = np.broadcast_arrays(_u64(x), _u64(k))
    n = spec.n
    if spec.topology == "identity":
        return x.copy()
    if spec.topology == "spn":
        u = x ^ _expand_key(spec, i, k)
        return _permute(spec.perm, _sbox_layer(spec, i, u, n))
    h = np.uint64(n // 2)
    mh = np.uint64((1 << (n // 2)) - 1)
    left, right = x & mh, x >> h
    f = _feistel_f(spec, i, right, k)
    if spec.topology == "feistel":
        return right | ((left ^ f) << h)
    return (left ^ f) | (right << h)


def round_inverse(spec: CipherSpec, i: int, y, k) -> np.ndarray:
    y, k = np.broadcast_arrays(_u64(y), _u64(k))
    n = spec.n
    if spec.topology == "identity":
        return y.copy()
    if spec.topology == "spn":
        u = _sbox_layer(spec, i, _permute(spec.perm, y, inverse=True), n, inverse=True)
        return u ^ _expand_key(spec, i, k)
    h = np.uint64(n // 2)
    mh = np.uint64((1 << (n // 2)) - 1)
    if spec.topology == "feistel":
        right, mixed = y & mh, y >> h
        return (mixed ^ _feistel_f(spec, i, right, k)) | (right << h)
    mixed, right = y & mh, y >> h
    return (mixed ^ _feistel_f(spec, i, right, k)) | (right << h)


def _subkey(spec: CipherSpec, i: int, key: np.ndarray, base: int = 0) -> np.ndarray:
    w = spec.key_widths[i]
    off = spec.key_offset(i) - spec.key_offset(base)
    return (key >> np.uint64(off)) & np.uint64((1 << w) - 1)


def apply_rounds(spec: CipherSpec, x, key, start: int, stop: int) -> np.ndarray:
    """Rounds ``start..stop-1``; ``key`` packs only those rounds' subkeys."""
    x, key = np.broadcast_arrays(_u64(x), _u64(key))
    y = x.copy()
    for i in range(start, stop):
        y = round_forward(spec, i, y, _subkey(spec, i, key, base=start))
    return y


def encrypt_reduced(spec: CipherSpec, t: int, x, k):
    """``E^(t)(x)`` under master key ``k``; scalars in, int out."""
    if not 1 <= t <= spec.rounds:
        raise CipherError(f"t={t} outside 1..{spec.rounds}")
    out = apply_rounds(spec, x, k, 0, t)
    return int(out) if out.ndim == 0 else out


def encrypt(spec: CipherSpec, x, k):
    return encrypt_reduced(spec, spec.rounds, x, k)


def decrypt(spec: CipherSpec, y, k):
    y, k = np.broadcast_arrays(_u64(y), _u64(k))
    x = y.copy()
    for i in reversed(range(spec.rounds)):
        x = round_inverse(spec, i, x, _subkey(spec, i, k))
    return int(x) if x.ndim == 0 else x


def last_round_decrypt(spec: CipherSpec, s, y):
    """Undo the final round under last-round subkey ``s``."""
    out = round_inverse(spec, spec.rounds - 1, y, s)
    return int(out) if out.ndim == 0 else out


# keyless views -----------------------------------------------------------


def _materialise(spec: CipherSpec, start: int, stop: int, cap: int) -> VectorBooleanFunction:
    n = spec.n
    kbits = spec.key_offset(stop) - spec.key_offset(start)
    arity = n + kbits
    if arity > cap:
        raise TableCapExceeded(f"truth table of arity {arity} exceeds cap {cap}")
    z = np.arange(1 << arity, dtype=np.uint64)
    x = z & np.uint64((1 << n) - 1)
    k = z >> np.uint64(n)
    return VectorBooleanFunction(arity, n, apply_rounds(spec, x, k, start, stop))


def as_vector_function(spec: CipherSpec, t: int | None = None, cap: int = DEFAULT_TABLE_CAP) -> VectorBooleanFunction:
    """Keyless view of ``E^(t)`` (default ``t = r-1``), ``z = x | k << n``."""
    t = spec.rounds - 1 if t is None else t
    if not 1 <= t <= spec.rounds:
        raise CipherError(f"t={t} outside 1..{spec.rounds}")
    return _materialise(spec, 0, t, cap)


@dataclass(frozen=True, eq=False)
class CipherSplit:
    v: int
    l_v: int
    h_v: int
    F_hat: VectorBooleanFunction
    F_check: VectorBooleanFunction


def split(spec: CipherSpec, v: int, cap: int = DEFAULT_TABLE_CAP) -> CipherSplit:
    """Cut ``F = E^(r-1)`` after round ``v``: first ``v`` rounds, then the remaining ``r-1-v``."""
    r = spec.rounds
    if not 1 <= v <= r - 2:
        raise CipherError(f"split v={v} outside 1..{r - 2}")
    l_v = spec.key_bits(v)
    h_v = spec.key_bits(r - 1) - l_v
    return CipherSplit(
        v, l_v, h_v, _materialise(spec, 0, v, cap), _materialise(spec, v, r - 1, cap)
    )


# registry ------------------------------------------------------------------

_DATA = "data"


def load_cipher_file(path: str | Path) -> CipherSpec:
    return CipherSpec.from_dict(json.loads(Path(path).read_text()))


def available_ciphers() -> list[str]:
    root = resources.files(__package__) / _DATA
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def get_cipher(name: str, rounds: int | None = None) -> CipherSpec:
    """A zoo cipher by name, or a JSON definition by path."""
    p = Path(name)
    if p.suffix == ".json" and p.exists():
        spec = load_cipher_file(p)
    else:
        res = resources.files(__package__) / _DATA / f"{name}.json"
        if not res.is_file():
            raise CipherError(f"unknown cipher {name!r}; known: {', '.join(available_ciphers())}")
        spec = CipherSpec.from_dict(json.loads(res.read_text()))
    if rounds is not None and rounds != spec.rounds:
        spec = spec.with_rounds(rounds)
    return spec


def make_random_spn(seed: int, n: int = 8, rounds: int = 3, key_width: int = 4, round_cost: int = 64) -> CipherSpec:
    """Negative control: every round is a fresh random ``n``-bit permutation."""
    rng = np.random.default_rng([0x5EED, seed])
    boxes = tuple(tuple(int(v) for v in rng.permutation(1 << n)) for _ in range(rounds))
    return CipherSpec(
        name=f"random-spn-{n}-s{seed}",
        topology="spn",
        block_bits=n,
        rounds=rounds,
        key_widths=(key_width,) * rounds,
        sboxes=boxes,
        round_cost=round_cost,
        description="random full-width S-box per round (negative control)",
    )
