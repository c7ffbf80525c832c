"""Command-line entry point.

Every report carries the artifact version, the seed and the full run
configuration, and contains no timestamps, so re-running the embedded
configuration reproduces the report byte for byte.

Exit status: 0 on success, 2 on a validation error (nothing has run yet),
1 on a runtime failure or a failed ``verify`` suite.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import MAX_CHECKS, bound_scan, fit_exponent, iid_stats, monte_carlo_attack
from .attack import Strategy, typical_attack_guesses
from .bitsource import (BitSequence, FeedbackPolynomial, LfsrState, default_polynomial,
                        iid_bits, lfsr_generate, make_rng)
from .cipher import Symbol, absg_encode
from .gaps import sorted_class_stream, typical_set_size
from .reconstruct import gaps_from_x_window, gaps_from_x_window_any, x_from_gaps
from .verify import SUITES, run_suite

OUTPUT_DIR_ENV = "QUBAR_OUTPUT_DIR"


class ValidationError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    L: list | int | None = None
    seed: int = 0
    budget: int | None = None
    trials: int | None = None
    strategy: str | None = None
    epsilon: float | None = None
    check: str | None = None
    horizon: int | None = None
    format: str = "json"
    output: str | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        extra = d.pop("extra")
        d.pop("output")
        d.update(extra)
        return {k: v for k, v in d.items() if v is not None}


# --- parsing helpers -------------------------------------------------------------

def parse_l_values(text: str) -> list[int]:
    """``48``, ``12,18,24`` or inclusive range ``min:max:step``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            lo, hi, step = parts
            if step <= 0 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad L specification {text!r}; use N, a,b,c or min:max:step")


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def parse_int(text: str) -> int:
    """Decimal, ``0x`` hex, or a power written ``2^k``."""
    try:
        if "^" in text:
            base, exp = text.split("^")
            return int(base) ** int(exp)
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")


def resolve_output(path: str | None) -> Path | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def emit(text: str, path: str | None):
    target = resolve_output(path)
    if target is None:
        sys.stdout.write(text)
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)


def report(cfg: RunConfig, result) -> str:
    doc = {"artifact": "qubar", "version": __version__, "seed": cfg.seed,
           "config": cfg.to_dict(), "result": result}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _single_l(cfg: RunConfig) -> int:
    if cfg.L is None:
        raise ValidationError("--l is required")
    if isinstance(cfg.L, list):
        if len(cfg.L) != 1:
            raise ValidationError("this subcommand takes a single --l value")
        cfg.L = cfg.L[0]
    return cfg.L


def _read_bits(path: str) -> BitSequence:
    text = "".join(Path(path).read_text().split())
    try:
        return BitSequence.from_string(text)
    except ValueError as e:
        raise ValidationError(f"{path}: {e}") from None


def _read_ints(path: str) -> list[int]:
    text = Path(path).read_text().replace("\n", ",")
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"{path}: expected comma-separated integers") from None


# --- subcommands -----------------------------------------------------------------

def _poly_for(args, L: int) -> FeedbackPolynomial:
    if args.poly:
        poly = FeedbackPolynomial.from_hex(args.poly)
        if poly.degree != L:
            raise ValidationError(f"polynomial 0x{args.poly} has degree {poly.degree}, not L={L}")
        return poly
    return default_polynomial(L)


def validate_keystream(cfg: RunConfig, args):
    if args.length < 0:
        raise ValidationError("--length must be non-negative")
    if args.source == "lfsr":
        L = _single_l(cfg)
        cfg.extra["poly"] = _poly_for(args, L).to_hex()
    if args.format == "text" and args.output is None:
        raise ValidationError("--format text writes four files; give --output PREFIX")


def run_keystream(cfg: RunConfig, args) -> int:
    if args.source == "iid":
        x = iid_bits(cfg.seed, args.length, args.p)
    else:
        L = cfg.L
        poly = FeedbackPolynomial.from_hex(cfg.extra["poly"])
        if args.init is not None:
            init = LfsrState.from_int(int(args.init, 16), L)
        else:
            init = LfsrState.from_int(int(make_rng(cfg.seed).integers(1, 1 << L)), L)
        cfg.extra["init"] = format(init.to_int(), "x")
        x = lfsr_generate(poly, init, args.length)
    rec = absg_encode(x)
    H = ",".join(map(str, rec.H))
    Q = ",".join(map(str, rec.Q))
    if cfg.format == "text":
        prefix = args.output
        for name, body in (("x", x.to_string()), ("z", rec.z.to_string()), ("H", H), ("Q", Q)):
            emit(body + "\n", f"{prefix}.{name}.txt")
        emit(report(cfg, {"files": [f"{prefix}.{n}.txt" for n in "xzHQ"],
                          "consumed": rec.consumed, "outputs": len(rec.z)}), None)
        return 0
    result = {"x": x.to_string(), "z": rec.z.to_string(), "H": H, "Q": Q,
              "consumed": rec.consumed, "unconsumed": rec.unconsumed}
    emit(report(cfg, result), cfg.output)
    return 0


def validate_stats(cfg: RunConfig, args):
    if args.length < 10**4:
        raise ValidationError("--length must be at least 10^4 for the gap statistics")
    if not 0 < args.p < 1:
        raise ValidationError("--p must lie strictly between 0 and 1")


def run_stats(cfg: RunConfig, args) -> int:
    if args.p == 0.5:
        result = iid_stats(cfg.seed, args.length)
    else:
        from .analysis import q_distribution_test, rate_test
        x = iid_bits(cfg.seed, args.length, args.p)
        fit = q_distribution_test(x)
        result = {"rate": rate_test(x), "tv_distance": fit.tv_distance,
                  "chi_square": fit.chi_square, "p_value": fit.p_value, "n_gaps": fit.n_gaps}
    emit(report(cfg, result), cfg.output)
    return 0


def validate_reduce(cfg: RunConfig, args):
    if args.x_file:
        if args.z_file or args.q_file:
            raise ValidationError("give either --x-file or --z-file/--q-file, not both")
        _single_l(cfg)
        if args.offset is None or args.offset < 0:
            raise ValidationError("--offset (non-negative) is required with --x-file")
    elif not (args.z_file and args.q_file):
        raise ValidationError("need --z-file and --q-file, or --x-file with --offset and --l")


def run_reduce(cfg: RunConfig, args) -> int:
    if args.x_file:
        x = _read_bits(args.x_file)
        if args.offset > len(x):
            raise ValidationError(f"--offset {args.offset} beyond input of length {len(x)}")
        if args.symbol == "auto":
            found = gaps_from_x_window_any(x, args.offset, cfg.L)
            windows = [(s.name.lower(), w) for s, w in found]
        else:
            w = gaps_from_x_window(x, args.offset, Symbol.parse(args.symbol), cfg.L)
            if not w:
                emit(report(cfg, {"found": False, "reason": w.reason, "scanned": w.scanned}), cfg.output)
                return 1
            windows = [(args.symbol, w)]
        result = {"found": bool(windows), "windows": [
            {"symbol": s, "i": w.i, "theta": w.theta, "q": list(w.q),
             "z": BitSequence(w.z).to_string(), "start": w.start, "span": w.span}
            for s, w in windows]}
        emit(report(cfg, result), cfg.output)
        return 0 if windows else 1
    z = _read_bits(args.z_file)
    q = _read_ints(args.q_file)
    if len(z) != len(q):
        raise ValidationError(f"{len(z)} output bits but {len(q)} gaps")
    seg = x_from_gaps(z.bits, q)
    emit(report(cfg, {"x": seg.bits.to_string(), "length": seg.length}), cfg.output)
    return 0


def validate_classes(cfg: RunConfig, args):
    L = _single_l(cfg)
    if L % 2 or L < 2:
        raise ValidationError(f"--l must be a positive even number, got {L}")


def run_classes(cfg: RunConfig, args) -> int:
    buf = io.StringIO()
    buf.write(f"# qubar {__version__} classes L={cfg.L}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["B", "alpha", "theta", "beta", "cardinality", "minimal", "mass", "minimal_mass"])
    for c in sorted_class_stream(cfg.L):
        w.writerow([c.cost, c.alpha, c.theta, c.beta, c.cardinality, c.minimal_count,
                    str(c.mass()), str(c.mass(minimal=True))])
    emit(buf.getvalue(), cfg.output)
    return 0


def validate_attack(cfg: RunConfig, args):
    L = _single_l(cfg)
    try:
        strat = Strategy(cfg.strategy, cfg.epsilon, not args.all_members)
        strat.validate(L)
    except ValueError as e:
        raise ValidationError(str(e)) from None
    if cfg.budget is None:
        if cfg.strategy != "typical":
            raise ValidationError(f"--budget is required for the {cfg.strategy} strategy")
        cfg.budget = typical_set_size(L // 3, cfg.epsilon)
    if cfg.budget < 0 or cfg.trials < 0:
        raise ValidationError("--budget and --trials must be non-negative")
    if cfg.budget * cfg.trials > MAX_CHECKS:
        raise ValidationError(f"budget x trials = {cfg.budget * cfg.trials:.3g} checks exceeds "
                              f"{MAX_CHECKS:.0e}; lower --budget or --trials")
    if cfg.check == "lfsr":
        cfg.extra["poly"] = _poly_for(args, L).to_hex()
        if cfg.horizon is None:
            cfg.horizon = 2 * L
    cfg.extra["minimal_only"] = not args.all_members


def run_attack(cfg: RunConfig, args) -> int:
    strat = Strategy(cfg.strategy, cfg.epsilon, cfg.extra["minimal_only"])
    poly = FeedbackPolynomial.from_hex(cfg.extra["poly"]) if cfg.check == "lfsr" else None
    records = None
    on_result = None
    if args.records:
        records = io.StringIO()

        def on_result(t, res):
            d = res.to_dict()
            d["trial"] = t
            records.write(json.dumps(d, sort_keys=True) + "\n")
    stats = monte_carlo_attack(strat, cfg.L, cfg.budget, cfg.trials, cfg.seed, cfg.check,
                               cfg.horizon, poly, on_result)
    if records is not None:
        emit(records.getvalue(), args.records)
    emit(report(cfg, stats.to_dict()), cfg.output)
    return 0


def validate_bound_scan(cfg: RunConfig, args):
    if cfg.L is None:
        raise ValidationError("--l is required")
    for L in cfg.L:
        if args.mode == "exhaustive" and L % 6:
            raise ValidationError(f"exhaustive scan needs every L divisible by 6; {L} is not")
        if args.mode == "general" and (L % 2 or L < 2):
            raise ValidationError(f"general scan needs even L; {L} is not")
    if args.fit and len(set(cfg.L)) < 4:
        raise ValidationError("--fit needs at least 4 distinct L values")
    if not 0 < args.target < 1:
        raise ValidationError("--target must lie strictly between 0 and 1")
    cfg.extra.update(mode=args.mode, target=str(args.target))


def run_bound_scan(cfg: RunConfig, args) -> int:
    rows = bound_scan(args.mode, cfg.L, args.target)
    buf = io.StringIO()
    buf.write(f"# qubar {__version__} bound-scan mode={args.mode} target={args.target} "
              f"L={','.join(map(str, cfg.L))}\n")
    cols = ["L", "c_star", "exponent", "theorem_bound", "p1", "p2", "p3",
            "mass_at_c_star", "bound_ok", "p1_ok", "p2_ok", "pass"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        d = r.to_dict()
        w.writerow({k: ("" if d[k] is None else d[k]) for k in cols})
    if args.fit:
        slope, err = fit_exponent(rows)
        buf.write(f"# slope={slope:.6f} stderr={err:.6f}\n")
    emit(buf.getvalue(), cfg.output)
    failed = [r.L for r in rows if not r.passed]
    if failed:
        print(f"qubar: bound check fails at L={','.join(map(str, failed))}", file=sys.stderr)
    return 0


def validate_verify(cfg: RunConfig, args):
    cfg.extra["suite"] = args.suite


def run_verify(cfg: RunConfig, args) -> int:
    ok, checks = run_suite(args.suite, cfg.seed)
    emit(report(cfg, {"suite": args.suite, "passed": ok,
                      "checks": [c.to_dict() for c in checks]}), cfg.output)
    return 0 if ok else 1


COMMANDS = {
    "keystream": (validate_keystream, run_keystream),
    "stats": (validate_stats, run_stats),
    "reduce": (validate_reduce, run_reduce),
    "classes": (validate_classes, run_classes),
    "attack": (validate_attack, run_attack),
    "bound-scan": (validate_bound_scan, run_bound_scan),
    "verify": (validate_verify, run_verify),
}


# --- argument parser -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qubar",
        description="ABSG keystream generator and query-based key-recovery experiments.",
        epilog=f"Relative --output paths are placed under ${OUTPUT_DIR_ENV} when it is set.")
    ap.add_argument("--version", action="version", version=f"qubar {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p, l_type=int):
        p.add_argument("--seed", type=parse_int, default=0)
        p.add_argument("--output", "-o", help="output file (default: stdout)")
        p.add_argument("--l", dest="L", type=l_type)

    poly_help = ("feedback taps as a hex mask, bit j-1 set for tap j "
                 "(x^4+x+1 is 9); default: a tabulated primitive polynomial")

    p = sub.add_parser("keystream", help="generate input bits and encode them")
    common(p, parse_l_values)
    p.add_argument("--source", choices=("iid", "lfsr"), default="iid")
    p.add_argument("--length", type=parse_int, required=True, help="number of input bits")
    p.add_argument("--p", type=float, default=0.5, help="bias of i.i.d. bits")
    p.add_argument("--poly", help=poly_help)
    p.add_argument("--init", help="LFSR start state as hex, register[k] = bit k")
    p.add_argument("--format", choices=("json", "text"), default="json")

    p = sub.add_parser("stats", help="output rate and gap-law fit on i.i.d. input")
    common(p)
    p.add_argument("--length", type=parse_int, default=10**6)
    p.add_argument("--p", type=float, default=0.5)

    p = sub.add_parser("reduce", help="convert between gap windows and input bits")
    common(p, parse_l_values)
    p.add_argument("--z-file", help="output bits as a 0/1 string")
    p.add_argument("--q-file", help="gaps as comma-separated integers")
    p.add_argument("--x-file", help="input bits as a 0/1 string")
    p.add_argument("--offset", type=int, help="number of input bits already consumed")
    p.add_argument("--symbol", default="empty", choices=("empty", "0", "1", "auto"),
                   help="internal symbol after --offset bits (auto tries all three)")

    p = sub.add_parser("classes", help="sorted guess-class table as CSV")
    common(p, parse_l_values)

    p = sub.add_parser("attack", help="Monte Carlo runs of a guess/check attack")
    common(p, parse_l_values)
    p.add_argument("--strategy", choices=Strategy.KINDS, required=True)
    p.add_argument("--budget", type=parse_int, help="queries per attack (typical: whole set)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--check", choices=("oracle", "lfsr"), default="oracle")
    p.add_argument("--horizon", type=int, help="output bits compared by the lfsr check (default 2L)")
    p.add_argument("--trials", type=parse_int, default=1)
    p.add_argument("--poly", help=poly_help)
    p.add_argument("--all-members", action="store_true",
                   help="sorted strategy: keep guesses that extend a valid guess")
    p.add_argument("--records", help="write one JSON line per attack to this file ('-' = stdout)")

    p = sub.add_parser("bound-scan", help="minimal budget for success above a target")
    common(p, parse_l_values)
    p.add_argument("--mode", choices=("exhaustive", "general"), required=True)
    p.add_argument("--target", type=parse_fraction, default=Fraction(1, 2))
    p.add_argument("--fit", action="store_true", help="append the fitted exponent")

    p = sub.add_parser("verify", help="run a self-check suite")
    common(p)
    p.add_argument("--suite", choices=tuple(SUITES), required=True)
    return ap


def config_from_args(args) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        L=args.L,
        seed=args.seed,
        budget=getattr(args, "budget", None),
        trials=getattr(args, "trials", None),
        strategy=getattr(args, "strategy", None),
        epsilon=getattr(args, "epsilon", None),
        check=getattr(args, "check", None),
        horizon=getattr(args, "horizon", None),
        format=getattr(args, "format", "csv" if args.subcommand in ("classes", "bound-scan") else "json"),
        output=args.output,
    )


def dispatch(cfg: RunConfig, args) -> int:
    validate, run = COMMANDS[cfg.subcommand]
    try:
        validate(cfg, args)
    except (ValidationError, ValueError) as e:
        print(f"qubar {cfg.subcommand}: error: {e}", file=sys.stderr)
        return 2
    try:
        return run(cfg, args)
    except ValidationError as e:
        print(f"qubar {cfg.subcommand}: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure
        print(f"qubar {cfg.subcommand}: failed: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return dispatch(config_from_args(args), args)


if __name__ == "__main__":
    raise SystemExit(main())
