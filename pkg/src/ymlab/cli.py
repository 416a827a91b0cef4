"""Command-line front end for the verification suites and wave experiments.

Each subcommand reads an optional JSON config (validated against a schema that
rejects unknown keys); the scalar flags --seed and --out override the config.
Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema

from .report import Report
from .suites import UsageError, WAVE_PRESETS, run_wave, verify_algebra, verify_symbols, verify_transport, write_rows
from .wave.solver import CFLError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_INT = {"type": "integer"}
_NUM = {"type": "number"}
_POINT = {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4}

_COMMON = {"suite": {"type": "string"}, "seed": _INT, "out": {"type": "string"}}

SCHEMAS = {
    "verify-symbols": {"order": _INT},
    "verify-algebra": {"n_max": _INT, "random_pairs": {"type": "integer", "minimum": 0}},
    "run-wave": {
        "preset": {"enum": list(WAVE_PRESETS)},
        "n": _INT,
        "nt": {"type": ["integer", "null"]},
        "ratio": {"type": "number", "exclusiveMinimum": 0},
        "epsilon": _NUM,
        "nonlinear": {"type": "boolean"},
        "margin": {"type": "number", "minimum": 0},
        "leakage_tol": {"type": "number", "exclusiveMinimum": 0},
        "constraint_h2": {"type": "number", "exclusiveMinimum": 0},
    },
    "transport": {
        "preset": {"enum": ["zero", "gauge-pair"]},
        "count": {"type": "integer", "minimum": 1},
        "eps0": {"type": "number", "exclusiveMinimum": 0},
        "steps": {"type": "integer", "minimum": 1},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "triples": {"type": "array", "items": {
            "type": "object", "additionalProperties": False, "required": ["x", "y", "z"],
            "properties": {"x": _POINT, "y": _POINT, "z": _POINT}}},
    },
}


def schema_for(command: str) -> dict:
    return {"type": "object", "additionalProperties": False,
            "properties": {**_COMMON, **SCHEMAS[command]}}


def load_config(command: str, path: str | None) -> dict:
    """Read and validate a config file; an absent path means the defaults."""
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(cfg, schema_for(command))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"invalid config at {where}: {exc.message}") from exc
    if cfg.get("suite", command) != command:
        raise UsageError(f"config is for suite {cfg['suite']!r}, not {command!r}")
    return cfg


def _kwargs(cfg: dict, args: argparse.Namespace, extra: dict) -> dict:
    kw = {k: v for k, v in cfg.items() if k not in ("suite", "out")}
    if args.seed is not None:
        kw["seed"] = args.seed
    kw.update({k: v for k, v in extra.items() if v is not None})
    return kw


def _emit(rep: Report, args: argparse.Namespace, out_dir: Path | None) -> int:
    text = rep.to_json() if args.json else rep.to_text()
    sys.stdout.write(text)
    if out_dir is not None:
        (out_dir / "report.json").write_text(rep.to_json())
    return EXIT_OK if rep.passed else EXIT_FAIL


def _out_dir(cfg: dict, args: argparse.Namespace) -> Path | None:
    out = args.out if args.out is not None else cfg.get("out")
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_verify_symbols(args) -> int:
    cfg = load_config("verify-symbols", args.config)
    kw = _kwargs(cfg, args, {"order": args.order})
    seed = kw.pop("seed", None)
    rep = verify_symbols(**kw)
    rep.seed = seed
    return _emit(rep, args, _out_dir(cfg, args))


def cmd_verify_algebra(args) -> int:
    cfg = load_config("verify-algebra", args.config)
    kw = _kwargs(cfg, args, {"n_max": args.n_max})
    return _emit(verify_algebra(**kw), args, _out_dir(cfg, args))


def cmd_run_wave(args) -> int:
    cfg = load_config("run-wave", args.config)
    kw = _kwargs(cfg, args, {"preset": args.preset, "n": args.n})
    out = _out_dir(cfg, args)
    rep, rows = run_wave(**kw)
    if out is not None:
        write_rows(rows, out / "diagnostics.csv")
    return _emit(rep, args, out)


def cmd_transport(args) -> int:
    cfg = load_config("transport", args.config)
    kw = _kwargs(cfg, args, {"preset": args.preset, "count": args.count})
    return _emit(verify_transport(**kw), args, _out_dir(cfg, args))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ymlab", description="Yang-Mills inverse-problem verification suites")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", metavar="PATH", help="JSON config file")
        p.add_argument("--json", action="store_true", help="print the report as JSON")
        p.add_argument("--seed", type=int, help="random seed (overrides the config)")
        p.add_argument("--out", metavar="DIR", help="write report.json (and CSV output) here")
        p.set_defaults(func=func)
        return p

    p = add("verify-symbols", cmd_verify_symbols, "exact symbol-calculus identities")
    p.add_argument("--order", type=int, help="Laurent truncation order N")
    p = add("verify-algebra", cmd_verify_algebra, "nested-commutator spans and algebra identities")
    p.add_argument("--n-max", dest="n_max", type=int, help="largest n for su(n)")
    p = add("run-wave", cmd_run_wave, "march the gauge-fixed wave system and log diagnostics")
    p.add_argument("--preset", choices=WAVE_PRESETS)
    p.add_argument("--n", type=int, help="grid points per spatial axis")
    p = add("transport", cmd_transport, "parallel-transport identity suite")
    p.add_argument("--preset", choices=["zero", "gauge-pair"])
    p.add_argument("--count", type=int, help="number of random broken triples")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CFLError as exc:
        print(f"error: CFL condition violated: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
