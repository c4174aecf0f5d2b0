"""Command-line experiment runner.

Exit status: 0 when something was found (or the command simply ran), 2 when
an algorithm answered "No", 1 on errors.  Every report is JSON with sorted
keys and no timestamps, so identical seeds give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, boolfn, ciphers, finder, keyrec, oracle

SCHEMA = "bvdiff.report/1"
SEED_ENV = "BVDIFF_SEED"
EXIT_OK, EXIT_ERROR, EXIT_NONE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise ConfigError(f"--seed is required (or set {SEED_ENV})")
    try:
        return int(env, 0)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from exc


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _hex(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not hex: {text!r}") from exc


def _load_function(path: str) -> boolfn.BooleanFunction:
    return boolfn.from_json(Path(path).read_text())


def _cipher(args) -> ciphers.CipherSpec:
    return ciphers.get_cipher(args.cipher, getattr(args, "rounds", None))


def _base(command: str, status: str, **extra) -> dict:
    return {"schema": SCHEMA, "command": command, "status": status, "version": __version__, **extra}


# commands ----------------------------------------------------------------


def cmd_algo1(args) -> tuple[dict, int]:
    seed = _seed(args)
    if args.fn:
        f = _load_function(args.fn)
    elif args.random_arity:
        f = boolfn.BooleanFunction.random(args.random_arity, np.random.default_rng([seed, 1]))
    else:
        raise ConfigError("give --fn or --random-arity")
    res = finder.algorithm1(f, args.p, seed=seed)
    cap = 1 << 12
    report = _base(
        "algo1",
        "no" if res.no_structure else "found",
        seed=seed,
        config={"p": args.p, "arity": f.arity},
        result={
            "H_size": len(res.H),
            "A0_dim": res.A0.dim,
            "A1_dim": None if res.A1.empty else res.A1.dim,
            "A0": res.members(0, cap) if res.A0.size <= cap else None,
            "A1": res.members(1, cap) if res.A1.size <= cap else None,
            "exact": {
                "U0": list(boolfn.linear_structures_exact(f).U0),
                "U1": list(boolfn.linear_structures_exact(f).U1),
            }
            if f.arity <= 12
            else None,
        },
        ledger=res.ledger.to_dict(None),
    )
    return report, EXIT_NONE if res.no_structure else EXIT_OK


def cmd_truncdiff(args) -> tuple[dict, int]:
    seed = _seed(args)
    spec = _cipher(args)
    cfg = finder.Algo2Config(args.sigma, args.q, args.budget)
    F = ciphers.as_vector_function(spec, cap=args.cap)
    rep = finder.run_truncated_search(F, cfg, seed=seed, gate_cost=spec.gate_cost(spec.rounds - 1))
    body = rep.to_dict()
    verification = None
    if rep.finding is not None and not args.no_verify:
        verification = oracle.verify_finding(spec, rep.finding.to_dict(), cfg.sigma, cfg.q)
    report = _base(
        "truncdiff",
        "found" if rep.finding else "none",
        seed=seed,
        config={
            "cipher": spec.name,
            "rounds": spec.rounds,
            "sigma": str(cfg.sigma),
            "q": str(cfg.q),
            "budget": cfg.budget,
        },
        finding=body["finding"],
        reason=rep.reason,
        result={k: body[k] for k in ("p", "component_dims", "subset_probes")},
        verification=verification,
        ledger=body["ledger"],
    )
    return report, EXIT_OK if rep.finding else EXIT_NONE


def cmd_impdiff(args) -> tuple[dict, int]:
    seed = _seed(args)
    spec = _cipher(args)
    rep = finder.run_impossible_search(spec, args.p, seed=seed, cap=args.cap, full_sweep=args.full_sweep)
    body = rep.to_dict()
    verification = None
    if rep.finding is not None and not args.no_verify:
        verification = oracle.verify_finding(spec, rep.finding.to_dict())
    report = _base(
        "impdiff",
        "found" if rep.finding else "none",
        seed=seed,
        config={"cipher": spec.name, "rounds": spec.rounds, "p": rep.p, "full_sweep": args.full_sweep},
        finding=body["finding"],
        reason=rep.reason,
        result={"trace": body["trace"]},
        verification=verification,
        ledger=body["ledger"],
    )
    return report, EXIT_OK if rep.finding else EXIT_NONE


def _read_finding(path: str) -> dict:
    obj = json.loads(Path(path).read_text())
    if "finding" in obj and "command" in obj:
        obj = obj["finding"]
    if not obj:
        raise ConfigError(f"{path} holds no finding")
    return obj


def cmd_keyrec(args) -> tuple[dict, int]:
    seed = _seed(args)
    spec = _cipher(args)
    if args.finding:
        f = _read_finding(args.finding)
        if f.get("type") != "truncated":
            raise ConfigError("key recovery needs a truncated differential")
        a, b = int(f["a_hex"], 16), f["b_trits"]
    elif args.a is not None and args.b:
        a, b = args.a, args.b
    else:
        raise ConfigError("give --finding or both --a and --b")
    trits = finder.parse_trits(b)
    if len(trits) != spec.n:
        raise ConfigError(f"b must have {spec.n} trits")
    t = sum(v is not None for v in trits)
    # mean exact probability over keys of the reduced cipher
    p = args.p if args.p is not None else oracle.key_fraction(spec, a, b, 0).v_mean
    sn = keyrec.signal_to_noise(1 << spec.last_round_key_bits, p, t) if t else None
    N = args.pairs
    if N is None:
        if sn is None or sn.ratio <= 1 or p == 0:
            raise ConfigError("S/N <= 1; give --pairs explicitly")
        N = keyrec.required_pairs(sn.ratio, p)
    run = keyrec.run_counting_attack(spec, (a, b), N, seed, key=args.key, p=p if t else None)
    if args.csv:
        Path(args.csv).write_text(run.histogram_csv())
    report = _base(
        "keyrec",
        "ranked",
        seed=seed,
        config={"cipher": spec.name, "a_hex": format(a, "x"), "b_trits": b, "pairs": N},
        result=run.to_dict(args.top),
    )
    return report, EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    spec = _cipher(args)
    f = _read_finding(args.finding)
    out = oracle.verify_finding(spec, f, args.sigma, args.q)
    report = _base("verify", "pass" if out["passes"] else "fail", config={"cipher": spec.name}, verification=out)
    return report, EXIT_OK if out["passes"] else EXIT_NONE


def cmd_spectrum(args) -> tuple[dict, int]:
    f = _load_function(args.fn)
    spec = boolfn.walsh_spectrum(f)
    support = [int(w) for w in spec.support]
    report = _base(
        "spectrum",
        "ok",
        config={"arity": f.arity},
        result={
            "raw": [int(v) for v in spec.raw],
            "support": support,
            "parseval_sum": spec.parseval_sum(),
            "parseval_expected": 1 << (2 * f.arity),
            "parseval_ok": spec.parseval_sum() == 1 << (2 * f.arity),
            "delta_prime": str(boolfn.delta_prime(f)) if f.arity <= boolfn.DEFAULT_BRUTE_CAP else None,
        },
    )
    return report, EXIT_OK


def cmd_ddt(args) -> tuple[dict, int]:
    spec = _cipher(args)
    t = spec.rounds - 1 if args.t is None else args.t
    table = oracle.ddt(spec, args.key, t)
    text = oracle.ddt_csv(table)
    if args.csv:
        Path(args.csv).write_text(text)
    report = _base(
        "ddt",
        "ok",
        config={"cipher": spec.name, "key": args.key, "t": t},
        result={"max_entry": int(table[1:].max()), "csv": args.csv},
    )
    return report, EXIT_OK


def cmd_ciphers(args) -> tuple[dict, int]:
    rows = []
    for name in ciphers.available_ciphers():
        c = ciphers.get_cipher(name)
        rows.append(
            {
                "name": c.name,
                "topology": c.topology,
                "n": c.n,
                "rounds": c.rounds,
                "key_bits": c.key_bits(),
                "round_cost": c.round_cost,
                "planted": c.planted,
            }
        )
    return _base("ciphers", "ok", result={"ciphers": rows}), EXIT_OK


# parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bvdiff", description="Quantum-style differential search on toy ciphers.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True, cipher=True):
        p.add_argument("--out", "-o", help="write the JSON report here (default stdout)")
        if seed:
            p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV})")
        if cipher:
            p.add_argument("--cipher", required=True, help="zoo name or path to a cipher JSON file")
            p.add_argument("--rounds", type=int, default=None, help="override the round count")

    p = sub.add_parser("algo1", help="approximate linear structures of one Boolean function")
    common(p, cipher=False)
    p.add_argument("--fn", help="function JSON {arity, table_hex}")
    p.add_argument("--random-arity", type=int, help="use a seeded random function instead")
    p.add_argument("--p", type=int, required=True, help="BV run count")
    p.set_defaults(func=cmd_algo1)

    p = sub.add_parser("truncdiff", help="search a truncated differential")
    common(p)
    p.add_argument("--sigma", type=_fraction, required=True)
    p.add_argument("--q", type=_fraction, required=True)
    p.add_argument("--budget", type=int, default=finder.DEFAULT_BUDGET, help="subset-search budget g(n)")
    p.add_argument("--cap", type=int, default=ciphers.DEFAULT_TABLE_CAP, help="truth-table arity cap")
    p.add_argument("--no-verify", action="store_true")
    p.set_defaults(func=cmd_truncdiff)

    p = sub.add_parser("impdiff", help="search an impossible differential")
    common(p)
    p.add_argument("--p", type=int, default=None, help="BV runs per component (default n)")
    p.add_argument("--cap", type=int, default=ciphers.DEFAULT_TABLE_CAP)
    p.add_argument("--full-sweep", action="store_true", help="sample every split (ledger audit)")
    p.add_argument("--no-verify", action="store_true")
    p.set_defaults(func=cmd_impdiff)

    p = sub.add_parser("keyrec", help="last-round key recovery by counting")
    common(p)
    p.add_argument("--finding", help="report or finding JSON with a truncated differential")
    p.add_argument("--a", type=_hex, help="input difference (hex)")
    p.add_argument("--b", help="output pattern, e.g. 1000xxxx")
    p.add_argument("--p", type=_fraction, default=None, help="differential probability (default: exact mean)")
    p.add_argument("--pairs", "-N", type=int, default=None, help="pair count (default from S/N)")
    p.add_argument("--key", type=int, default=None, help="fixed master key (default: seeded random)")
    p.add_argument("--top", type=int, default=8)
    p.add_argument("--csv", help="write the per-key count histogram here")
    p.set_defaults(func=cmd_keyrec)

    p = sub.add_parser("verify", help="re-check a finding by brute force")
    common(p, seed=False)
    p.add_argument("--finding", required=True)
    p.add_argument("--sigma", type=_fraction, default=None)
    p.add_argument("--q", type=_fraction, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectrum", help="Walsh spectrum dump")
    common(p, seed=False, cipher=False)
    p.add_argument("--fn", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ddt", help="difference distribution table as CSV")
    common(p, seed=False)
    p.add_argument("--key", type=int, default=0)
    p.add_argument("--t", type=int, default=None, help="rounds (default r-1)")
    p.add_argument("--csv", help="CSV output path")
    p.set_defaults(func=cmd_ddt)

    p = sub.add_parser("ciphers", help="list the cipher zoo")
    common(p, seed=False, cipher=False)
    p.set_defaults(func=cmd_ciphers)
    return ap


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        report, code = args.func(args)
    except (ConfigError, ciphers.CipherError, boolfn.ArityCapExceeded, ValueError, OSError) as exc:
        report = _base(args.command, "error", error={"type": type(exc).__name__, "message": str(exc)})
        code = EXIT_ERROR
    report["exit_code"] = code
    _emit(report, getattr(args, "out", None))
    return code


if __name__ == "__main__":
    sys.exit(main())
