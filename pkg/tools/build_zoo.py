"""Regenerate the cipher definitions in src/bvdiff/data/ (run once, output is committed)."""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from bvdiff.ciphers import CipherSpec, make_random_spn  # noqa: E402

HEYS = (0xE, 0x4, 0xD, 0x1, 0x2, 0xF, 0xB, 0x8, 0x3, 0xA, 0x6, 0xC, 0x5, 0x9, 0x0, 0x7)
PRESENT = (0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2)
SBOX4_COST = 20  # per 4-bit S-box
CNOT = 1


def feistel_cost(n: int) -> int:
    h = n // 2
    return h * CNOT + (h // 4) * SBOX4_COST + h * CNOT


def spn_cost(n: int) -> int:
    return n * CNOT + (n // 4) * SBOX4_COST


def zoo() -> list[CipherSpec]:
    out = [
        CipherSpec("identity-8", "identity", 8, 3, (0, 0, 0), round_cost=0,
                   description="every round is the identity; keyless"),
        CipherSpec("feistel-8", "feistel", 8, 4, (4,) * 4, (HEYS,), round_cost=feistel_cost(8),
                   description="4-round balanced Feistel, f = S(R ^ k) with a 4-bit S-box"),
        CipherSpec("feistel-16", "feistel", 16, 4, (8,) * 4, (HEYS,), perm=(0, 4, 1, 5, 2, 6, 3, 7),
                   round_cost=feistel_cost(16),
                   description="4-round balanced Feistel, f = P(S(R ^ k)) with two 4-bit S-boxes"),
        CipherSpec("spn-8", "spn", 8, 2, (8,) * 2, (PRESENT,), perm=(0, 2, 4, 6, 1, 3, 5, 7),
                   round_cost=spn_cost(8),
                   description="2-round SPN: key XOR, two 4-bit S-boxes, bit permutation"),
        CipherSpec("spn-16", "spn", 16, 3, (16,) * 3, (PRESENT,),
                   perm=tuple((4 * i) % 15 if i < 15 else 15 for i in range(16)), round_cost=spn_cost(16),
                   description="3-round SPN: key XOR, four 4-bit S-boxes, bit permutation"),
        CipherSpec("planted-ls-8", "feistel", 8, 3, (4,) * 3, (HEYS,), round_cost=feistel_cost(8),
                   description="3-round Feistel; every left-half input difference passes the first two rounds "
                               "into a fixed left-half output difference",
                   planted={"kind": "truncated", "a_hex": "01", "b_trits": "1000xxxx", "t": 4,
                            "probability": "1",
                            "note": "(d, 0) for any nonzero d in the left half gives left output difference d"}),
        CipherSpec("planted-ls-8f", "feistel", 8, 3, (4,) * 3, (HEYS,), ignore_masks=(0x8, 0x0, 0x0),
                   round_cost=feistel_cost(8),
                   description="3-round Feistel whose first round function ignores bit 4 of R",
                   planted={"kind": "truncated", "a_hex": "80", "b_trits": "00000001", "t": 8,
                            "probability": "1",
                            "note": "flipping the ignored bit is a full linear structure of two rounds"}),
        CipherSpec("mitm-8", "feistel", 8, 3, (4,) * 3, (PRESENT,), round_cost=feistel_cost(8),
                   description="3-round Feistel; one-round differentials meet with different middle values",
                   planted={"kind": "impossible", "flag": 0, "dx_hex": "01", "dy_hex": "10", "split_v": 1}),
        CipherSpec("planted-match-8", "unswapped-feistel", 8, 3, (4,) * 3, (HEYS,), round_cost=feistel_cost(8),
                   description="3-round Feistel without the half swap; left-half differences pass unchanged",
                   planted={"kind": "impossible", "flag": 1, "dx_hex": "01", "dy_hex": "01", "split_v": 1}),
    ]
    rnd = make_random_spn(seed=8)
    out.append(CipherSpec(**{**rnd.__dict__, "name": "random-8",
                             "description": "3-round SPN of independent random 8-bit permutations; "
                                            "4-bit subkeys repeated over both nibbles (negative control)"}))
    return out


def main() -> None:
    root = Path(__file__).resolve().parents[1] / "src" / "bvdiff" / "data"
    root.mkdir(parents=True, exist_ok=True)
    for spec in zoo():
        (root / f"{spec.name}.json").write_text(json.dumps(spec.to_dict(), indent=1) + "\n")
        print(spec.name)


if __name__ == "__main__":
    main()
