"""Command-line front door: ``dnfcover {analyze,simulate,random-order,bounds,families,verify}``.

Exit codes: 0 ok, 1 other analysis error, 2 validation or input error,
3 cap exceeded, 4 acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import __version__, acceptance, bounds, experiments, markov, offline
from .core import (
    CapExceeded,
    DiscreteDistribution,
    DnfCoverError,
    ItemList,
    ValidationError,
    family_fmk,
    family_pp1,
    family_pptwo,
    family_uniform_discrete,
    fmt,
    induced_distribution,
    rational,
)
from .dnf import stopping_time_samples
from .rng import DEFAULT_SEED, RandomSeed

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_CAP = 3
EXIT_ACCEPTANCE = 4


@dataclass
class RunConfig:
    command: str
    inputs: list
    seed: int = DEFAULT_SEED
    trials: int = 100_000
    threads: Optional[int] = None
    state_cap: int = markov.DEFAULT_STATE_CAP
    exact_cap: int = markov.DEFAULT_EXACT_CAP
    opt_cap: int = offline.DEFAULT_OPT_CAP
    format: str = "json"
    output: Optional[str] = None

    def __post_init__(self):
        for name in ("trials", "state_cap", "exact_cap", "opt_cap"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name.replace('_', '-')} must be positive")
        if self.threads is not None and self.threads <= 0:
            raise ValidationError("threads must be positive")
        if not 0 <= self.seed < 1 << 64:
            raise ValidationError("seed must fit in 64 bits")


def _num(v):
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def load_distribution(path: str) -> DiscreteDistribution:
    return DiscreteDistribution.from_json(_read(path))


def load_list(path: str) -> ItemList:
    text = _read(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from None
    items = data.get("items") if isinstance(data, dict) else data
    if not isinstance(items, list):
        raise ValidationError("list file needs an 'items' array")
    for v in items:
        if not isinstance(v, (str, int)) or isinstance(v, bool):
            raise ValidationError(f"items must be 'p/q' strings, got {v!r}")
    return ItemList(tuple(rational(v) for v in items))


def _emit(report: dict, cfg: RunConfig, out) -> None:
    report = {"schema_version": SCHEMA_VERSION, **report}
    if cfg.format == "json":
        text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["field", "value"])
        for k, v in report.items():
            w.writerow([k, json.dumps(v) if isinstance(v, (dict, list)) else v])
        text = buf.getvalue()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


# -- commands ----------------------------------------------------------------------------


def cmd_analyze(cfg: RunConfig, want_degree: bool = False, dump_chain: Optional[str] = None) -> dict:
    dist = load_distribution(cfg.inputs[0])
    chain = markov.build_chain(dist, cfg.state_cap)
    if dump_chain:
        with open(dump_chain, "w", encoding="utf-8") as fh:
            fh.write(chain.to_json())
    res = markov.analyze(dist, cfg.state_cap, cfg.exact_cap)
    cert = offline.is_perfect_packing(dist)
    report = {
        "command": "analyze",
        "distribution": dist.to_dict(),
        "states": res.states,
        "period": res.period,
        "exact": res.exact,
        "expected_T": _num(res.expected_T),
        "expected_overshoot": _num(res.expected_overshoot),
        "expected_size": _num(res.expected_size),
        "aecr": _num(res.aecr),
        "aecr_provenance": res.aecr_provenance,
        "wald_identity": res.wald_holds() if res.exact else None,
        "perfect_packing": cert.to_dict(),
    }
    if not cert.feasible:
        g = offline.gamma_rate(dist)
        report["gamma"] = {"upper": _num(g.upper), "provenance": g.provenance}
        if res.aecr_provenance == "lp-bound":
            report["aecr_note"] = "lower bound: rate divided by the covering-LP upper bound on gamma"
    if want_degree and cert.feasible:
        d = offline.degree(dist)
        report["degree"] = d.degree
        report["degree_witness"] = d.witness.to_dict()
    return report


def cmd_simulate(cfg: RunConfig) -> dict:
    dist = load_distribution(cfg.inputs[0])
    seed = RandomSeed(cfg.seed)
    t, r, scale = stopping_time_samples(dist, cfg.trials, seed, cfg.threads)
    n = cfg.trials
    sd_t = float(t.std(ddof=1)) if n > 1 else 0.0
    sd_r = float(r.std(ddof=1)) / scale if n > 1 else 0.0
    report = {
        "command": "simulate",
        "distribution": dist.to_dict(),
        "seed": cfg.seed,
        "trials": n,
        "mean_T": float(t.mean()),
        "stderr_T": sd_t / math.sqrt(n),
        "mean_overshoot": float(r.mean()) / scale,
        "stderr_overshoot": sd_r / math.sqrt(n),
    }
    try:
        chain = markov.build_chain(dist, cfg.state_cap)
        report["exact_T"] = _num(markov.expected_items_per_bin(chain, cfg.exact_cap))
        report["exact_overshoot"] = _num(markov.expected_overshoot(chain, cfg.exact_cap))
    except CapExceeded:
        report["exact_T"] = None
    return report


def cmd_random_order(cfg: RunConfig) -> dict:
    items = load_list(cfg.inputs[0])
    seed = RandomSeed(cfg.seed)
    opt = offline.opt_value(items, cfg.opt_cap)
    rep = experiments.random_order_ratio_estimate(items, cfg.trials, seed, opt=opt, threads=cfg.threads)
    report = {
        "command": "random-order",
        "items": len(items),
        "total_size": fmt(items.total),
        "opt": opt,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "estimate": rep.estimate,
        "stderr": rep.stderr,
    }
    nonzero = [x for x in items if x > 0]
    if nonzero:
        try:
            aecr, prov = markov.aecr_exact(induced_distribution(nonzero), cfg.state_cap, cfg.exact_cap)
            report["aecr_induced"] = _num(aecr)
            report["aecr_provenance"] = prov
        except CapExceeded:
            report["aecr_induced"] = None
    return report


def cmd_bounds(cfg: RunConfig, out) -> None:
    rows = bounds.constants_table()
    if cfg.format == "json":
        _emit({"command": "bounds", "rows": rows}, cfg, out)
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["schema_version", "name", "reference", "computed", "tail_bound", "status"])
    for r in rows:
        w.writerow([SCHEMA_VERSION, r["name"], repr(r["reference"]), repr(r["computed"]), repr(r["tail_bound"]), r["status"]])
    text = buf.getvalue()
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def _split(text: str) -> list[str]:
    return [t for t in text.replace(" ", "").split(",") if t]


def cmd_families(args) -> DiscreteDistribution:
    fam = args.family
    if fam == "fmk":
        return family_fmk(args.m, args.k)
    if fam == "uniform":
        return family_uniform_discrete(args.k)
    if fam == "pp1":
        sizes = [rational(s) for s in _split(args.sizes)]
        try:
            config = [int(c) for c in _split(args.config)]
        except ValueError:
            raise ValidationError("--config must be comma-separated integers") from None
        return family_pp1(sizes, config)
    if fam == "pptwo":
        pairs = []
        for tok in _split(args.pairs):
            g, _, s = tok.partition(":")
            if not s:
                raise ValidationError(f"pair {tok!r} must look like g:s")
            pairs.append((rational(g), rational(s)))
        return family_pptwo(pairs)
    raise ValidationError(f"unknown family {fam!r}")


def cmd_verify(cfg: RunConfig, quick: bool, only, out) -> int:
    results = acceptance.run_acceptance(quick=quick, seed=RandomSeed(cfg.seed), only=only, threads=cfg.threads)
    failed = [r for r in results if not r.passed]
    if cfg.format == "json":
        _emit({"command": "verify", "quick": quick, "results": [r.to_dict() for r in results], "passed": not failed}, cfg, out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["schema_version", "criterion", "name", "verdict", "seconds", "detail"])
        for r in results:
            w.writerow([SCHEMA_VERSION, r.number, r.name, "pass" if r.passed else "fail", f"{r.seconds:.2f}", r.detail])
        text = buf.getvalue()
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            out.write(text)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    if failed:
        sys.stderr.write("failed: " + ", ".join(f"{r.number} ({r.name})" for r in failed) + "\n")
        return EXIT_ACCEPTANCE
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------------------


def _seed_arg(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed {text!r} is not an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed_arg, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED:#x})")
    common.add_argument("--trials", type=int, default=100_000)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: logical CPUs)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--output", "-o", default=None)
    common.add_argument("--state-cap", type=int, default=markov.DEFAULT_STATE_CAP)
    common.add_argument("--exact-cap", type=int, default=markov.DEFAULT_EXACT_CAP, help="largest chain solved exactly")
    common.add_argument("--opt-cap", type=int, default=offline.DEFAULT_OPT_CAP)

    p = argparse.ArgumentParser(prog="dnfcover", description="Exact analysis and simulation of Dual Next-Fit bin covering")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="exact chain analysis of a distribution file")
    a.add_argument("--input", "-i", required=True)
    a.add_argument("--degree", action="store_true", help="also compute the degree of p")
    a.add_argument("--dump-chain", default=None, metavar="PATH")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo stopping times")
    s.add_argument("--input", "-i", required=True)

    r = sub.add_parser("random-order", parents=[common], help="random-order ratio of a list file")
    r.add_argument("--input", "-i", required=True)

    sub.add_parser("bounds", parents=[common], help="table of constants and bounds")

    f = sub.add_parser("families", parents=[common], help="write a named family as a distribution file")
    f.add_argument("family", choices=("fmk", "uniform", "pp1", "pptwo"))
    f.add_argument("--m", type=int)
    f.add_argument("--k", type=int)
    f.add_argument("--sizes", help="pp1: comma-separated sizes")
    f.add_argument("--config", help="pp1: comma-separated multiplicities")
    f.add_argument("--pairs", help="pptwo: comma-separated g:s pairs")

    v = sub.add_parser("verify", parents=[common], help="run the acceptance battery")
    v.add_argument("--quick", action="store_true", help="reduced trial counts")
    v.add_argument("--only", default=None, help="comma-separated criterion numbers")
    return p


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ValidationError(f"{args.family} needs --" + ", --".join(missing))


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    default_format = "csv" if args.command in ("bounds", "verify") else "json"
    try:
        cfg = RunConfig(
            command=args.command,
            inputs=[getattr(args, "input", None)],
            seed=args.seed,
            trials=args.trials,
            threads=args.threads,
            state_cap=args.state_cap,
            exact_cap=args.exact_cap,
            opt_cap=args.opt_cap,
            format=args.format or default_format,
            output=args.output,
        )
        if args.command == "analyze":
            _emit(cmd_analyze(cfg, args.degree, args.dump_chain), cfg, out)
        elif args.command == "simulate":
            _emit(cmd_simulate(cfg), cfg, out)
        elif args.command == "random-order":
            _emit(cmd_random_order(cfg), cfg, out)
        elif args.command == "bounds":
            cmd_bounds(cfg, out)
        elif args.command == "families":
            if args.family == "fmk":
                _require(args, "m", "k")
            elif args.family == "uniform":
                _require(args, "k")
            elif args.family == "pp1":
                _require(args, "sizes", "config")
            else:
                _require(args, "pairs")
            dist = cmd_families(args)
            text = json.dumps({"schema_version": SCHEMA_VERSION, **dist.to_dict()}) + "\n"
            if cfg.output:
                with open(cfg.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                out.write(text)
        elif args.command == "verify":
            only = None
            if args.only:
                try:
                    only = {int(x) for x in _split(args.only)}
                except ValueError:
                    raise ValidationError("--only takes comma-separated integers") from None
            return cmd_verify(cfg, args.quick, only, out)
    except ValidationError as exc:
        sys.stderr.write(f"dnfcover: invalid input: {exc}\n")
        return EXIT_VALIDATION
    except CapExceeded as exc:
        sys.stderr.write(f"dnfcover: cap exceeded: {exc}\n")
        return EXIT_CAP
    except DnfCoverError as exc:
        sys.stderr.write(f"dnfcover: {exc}\n")
        return EXIT_ERROR
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
