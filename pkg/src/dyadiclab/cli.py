"""Command-line front end: ``dyadiclab <command> [flags]``.

Every flag may also come from a JSON config file (``--config``); flags on
the command line win. Each run writes its records (CSV or JSON lines) and a
``<output>.config.json`` snapshot that reproduces the run.

Exit codes: 0 ok, 2 usage error, 3 config error, 4 runtime contract
violation, 5 unwritable output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__, _kernels
from .cesaro import CesaroOrder, exact_rank
from .cones import ConeError, ln_index, resolve_cone
from .dyadic import GroupPoint, ResolutionError
from .experiments import (
    MAX_RANK_1D,
    MAX_RANK_2D,
    MAX_RANK_SETS,
    MAX_RATIO_N1,
    cone_index,
    convergence_experiment,
    lower_bound_experiment,
    kernel_contrast_probe,
    kernel_survey_experiment,
    make_test_function,
    ratio_experiment,
    exceedance_probe,
    systems_check,
)
from .records import ExperimentRecord, to_csv, to_jsonl
from .systems import SystemKind

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_CONTRACT = 4
EXIT_OUTPUT = 5

COMMANDS = ("systems-check", "kernel-survey", "lower-bound", "counterexample", "converge", "exceedance", "contrast")

# builtin defaults; argparse defaults are None so config values can fill gaps
DEFAULTS = {
    "format": "csv",
    "threads": os.cpu_count() or 1,
    "timing": False,
    "m": 10,
    "transform_m": 20,
    "samples": 500,
    "seed": 0,
    "system": "kaczmarz",
    "alpha": "0.5",
    "max_n": 4096,
    "rank": None,
    "n": "4..12",
    "variant": "both",
    "cone": "identity",
    "beta": 1.0,
    "n1": "6..12:2",
    "oracle": True,
    "function": "indicator",
    "j": "3..11",
    "x": "e0",
    "c": "0.1,0.5,1.0",
}


class ConfigError(ValueError):
    pass


def parse_range(text) -> list[int]:
    """``"6..12"``, ``"6..12:2"``, ``"4,6,8"`` or a single integer."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = span.split("..")
            step = int(step) if step else 1
            if step < 1:
                raise ConfigError(f"range step must be positive in {part!r}")
            out.extend(range(int(lo), int(hi) + 1, step))
        elif part:
            out.append(int(part))
    if not out:
        raise ConfigError(f"empty range {text!r}")
    return out


def parse_floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _add_common(p):
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default=None, help="record format (default csv)")
    p.add_argument("--config", help="JSON file with flag values; command-line flags win")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--backend", choices=_kernels.BACKENDS, default=None, help="kernel backend override")
    p.add_argument("--timing", action="store_true", default=None, help="add a wall_time column (not reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyadiclab", description="Walsh-Kaczmarz Cesàro summability experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("systems-check", help="orthonormality, block equality and transform fidelity")
    _add_common(p)
    p.add_argument("--m", type=int, default=None, help="rank for the set and orthonormality checks (default 10)")
    p.add_argument("--transform-m", dest="transform_m", type=int, default=None,
                   help="rank for the transform checks (default 20)")
    p.add_argument("--samples", type=int, default=None, help="random Kaczmarz indices to check (default 500)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")

    p = sub.add_parser("kernel-survey", help="L1 norms of (C,alpha) kernels and their block maxima")
    _add_common(p)
    p.add_argument("--system", choices=("paley", "kaczmarz"), default=None)
    p.add_argument("--alpha", default=None, help="comma-separated orders in (0,1]")
    p.add_argument("--max-n", dest="max_n", type=int, default=None, help="largest kernel index (default 4096)")
    p.add_argument("--rank", type=int, default=None, help="sampling rank (default: exact rank per block)")

    p = sub.add_parser("lower-bound", help="the lower-bound integral, exponent inside (inner) or outside (outer)")
    _add_common(p)
    p.add_argument("--alpha", default=None)
    p.add_argument("--n", default=None, help="range of n, e.g. 4..12")
    p.add_argument("--variant", choices=("inner", "outer", "both"), default=None)

    p = sub.add_parser("counterexample", help="growth of the maximal-operator ratio R(n1)")
    _add_common(p)
    p.add_argument("--alpha", default=None, help="one order per dimension, nondecreasing (one value is broadcast)")
    p.add_argument("--cone", default=None, help="CRF catalog name (identity, power:<p>, xlog) or JSON file")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--n1", default=None, help="range of n1, e.g. 6..12:2")
    p.add_argument("--no-oracle", dest="oracle", action="store_false", default=None,
                   help="skip the full-grid cross-check at the smallest n1")

    p = sub.add_parser("converge", help="cone-restricted convergence errors")
    _add_common(p)
    p.add_argument("--alpha", default=None, help="one order per dimension (one value is broadcast)")
    p.add_argument("--cone", default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--n1", default=None)
    p.add_argument("--function", choices=("indicator", "polynomial", "constant"), default=None)
    p.add_argument("--rank", type=int, default=None, help="grid rank per dimension (default: largest n1)")
    p.add_argument("--system", choices=("paley", "kaczmarz"), default=None)

    p = sub.add_parser("exceedance", help="exceedance measures of D_n^kappa / log n")
    _add_common(p)
    p.add_argument("--j", default=None, help="blocks j; probes n = 2^j - 1")
    p.add_argument("--m", type=int, default=None, help="grid rank (default: largest j)")
    p.add_argument("--c", default=None, help="comma-separated thresholds C")

    p = sub.add_parser("contrast", help="K_{2^j}(x) for both systems at a dyadic rational")
    _add_common(p)
    p.add_argument("--j", default=None)
    p.add_argument("--x", default=None, help="point: e<k> or an integer bit pattern (default e0)")
    p.add_argument("--alpha", default=None, help="Cesàro order (default 1)")
    return parser


def _merge(args) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        cfg.pop("version", None)
        cfg_cmd = cfg.pop("command", args.command)
        if cfg_cmd != args.command:
            raise ConfigError(f"config is for {cfg_cmd!r}, not {args.command!r}")
    out = {"command": args.command}
    for key, val in vars(args).items():
        if key in ("command", "config"):
            continue
        if val is None:
            val = cfg.get(key, DEFAULTS.get(key))
        out[key] = val
    unknown = set(cfg) - set(out)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if args.command == "contrast" and args.alpha is None and "alpha" not in cfg:
        out["alpha"] = "1"
    return out


def _orders(text):
    try:
        return [CesaroOrder(a).alpha for a in parse_floats(text)]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check_range(name, values, lo, hi):
    bad = [v for v in values if not lo <= v <= hi]
    if bad:
        raise ConfigError(f"{name} values {bad} outside [{lo}, {hi}]")


def _parse_point(text, resolution):
    text = str(text)
    if text.startswith("e"):
        return GroupPoint.unit(int(text[1:]), resolution)
    return GroupPoint(int(text, 0), resolution)


def validate(cfg) -> dict:
    """Resolve and range-check everything before any computation starts."""
    cmd = cfg["command"]
    plan = dict(cfg)
    try:
        if cmd == "systems-check":
            _check_range("m", [cfg["m"]], 1, MAX_RANK_SETS)
            _check_range("transform-m", [cfg["transform_m"]], 1, MAX_RANK_1D)
            if cfg["samples"] < 0:
                raise ConfigError("samples must be >= 0")
        elif cmd == "kernel-survey":
            plan["alpha"] = _orders(cfg["alpha"])
            plan["system"] = SystemKind.parse(cfg["system"])
            _check_range("max-n", [cfg["max_n"]], 1, 1 << MAX_RANK_1D)
            if cfg["rank"] is not None:
                _check_range("rank", [cfg["rank"]], exact_rank(cfg["max_n"]), MAX_RANK_1D)
        elif cmd == "lower-bound":
            plan["alpha"] = _orders(cfg["alpha"])
            plan["n"] = parse_range(cfg["n"])
            _check_range("n", plan["n"], 1, MAX_RANK_1D)
        elif cmd in ("counterexample", "converge"):
            plan["alpha"] = _orders(cfg["alpha"])
            plan["n1"] = parse_range(cfg["n1"])
            cone = resolve_cone(cfg["cone"], max(2, len(plan["alpha"])), cfg["beta"])
            if len(plan["alpha"]) == 1:
                plan["alpha"] = plan["alpha"] * cone.d
            if cone.d != len(plan["alpha"]):
                raise ConfigError(f"cone is {cone.d}-dimensional but {len(plan['alpha'])} orders given")
            if cone.d < 2:
                raise ConfigError("need at least two dimensions")
            plan["cone_spec"] = cone
            if cmd == "counterexample":
                _check_range("n1", plan["n1"], 1, MAX_RATIO_N1)
                if any(b < a for a, b in zip(plan["alpha"], plan["alpha"][1:])):
                    raise ConfigError("orders must be nondecreasing for the counterexample")
                for n1 in plan["n1"]:
                    for n in (1, (1 << n1) - 1):
                        ln_index(cone, n1, n)
            else:
                rank = cfg["rank"] if cfg["rank"] is not None else max(plan["n1"])
                _check_range("n1", plan["n1"], 0, rank)
                _check_range("rank", [rank], 1, MAX_RANK_2D)
                for n1 in plan["n1"]:
                    idx = cone_index(cone, n1)
                    if any(v > 1 << rank for v in idx):
                        raise ConfigError(f"cone index {idx} exceeds the rank-{rank} grid")
                plan["rank"] = rank
                plan["system"] = SystemKind.parse(cfg["system"])
        elif cmd == "exceedance":
            plan["j"] = parse_range(cfg["j"])
            m = cfg["m"] if cfg["m"] is not None else max(plan["j"])
            _check_range("m", [m], 2, MAX_RANK_1D)
            _check_range("j", plan["j"], 2, m)
            plan["m"] = m
            plan["c"] = parse_floats(cfg["c"])
        elif cmd == "contrast":
            plan["j"] = parse_range(cfg["j"])
            _check_range("j", plan["j"], 1, MAX_RANK_1D)
            plan["alpha"] = _orders(cfg["alpha"])[0]
            plan["point"] = _parse_point(cfg["x"], max(plan["j"]))
        plan["threads"] = max(1, int(cfg["threads"]))
    except (ConeError, ResolutionError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return plan


def execute(plan) -> list[ExperimentRecord]:
    cmd = plan["command"]
    if cmd == "systems-check":
        return systems_check(plan["m"], plan["transform_m"], plan["samples"], plan["seed"])
    if cmd == "kernel-survey":
        out = []
        for a in plan["alpha"]:
            out += kernel_survey_experiment(plan["system"], a, plan["max_n"], plan["rank"])
        return out
    if cmd == "lower-bound":
        out = []
        for a in plan["alpha"]:
            out += lower_bound_experiment(plan["n"], a, plan["variant"])
        return out
    if cmd == "counterexample":
        return ratio_experiment(plan["n1"], plan["cone_spec"], plan["alpha"], plan["oracle"])
    if cmd == "converge":
        cone = plan["cone_spec"]
        f = make_test_function(plan["function"], (plan["rank"],) * cone.d)
        return convergence_experiment(f, cone, plan["alpha"], plan["n1"], plan["system"], plan["function"])
    if cmd == "exceedance":
        return exceedance_probe([(1 << j) - 1 for j in plan["j"]], plan["m"], plan["c"])
    if cmd == "contrast":
        return kernel_contrast_probe(plan["point"], plan["j"], plan["alpha"])
    raise ConfigError(f"unknown command {cmd}")


def _check_writable(path):
    p = Path(path)
    parent = p.parent if str(p.parent) else Path(".")
    if p.is_dir():
        return False
    if p.exists():
        return os.access(p, os.W_OK)
    return parent.is_dir() and os.access(parent, os.W_OK)


def _summary(cmd, records):
    if not records:
        return f"{cmd}: no records"
    last = records[-1]
    return f"{cmd}: {len(records)} records; last {last.experiment} = {last.value!r}"


def _snapshot(cfg):
    snap = {k: v for k, v in cfg.items() if k not in ("output", "threads", "backend", "timing")}
    snap["version"] = __version__
    return snap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _merge(args)
        plan = validate(cfg)
    except ConfigError as exc:
        print(f"dyadiclab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_path = cfg.get("output")
    if out_path and not (_check_writable(out_path) and _check_writable(str(out_path) + ".config.json")):
        print(f"dyadiclab: cannot write output {out_path}", file=sys.stderr)
        return EXIT_OUTPUT
    previous = _kernels.get_backend()
    if cfg.get("backend"):
        _kernels.set_backend(cfg["backend"])
    _kernels.set_threads(plan["threads"])
    try:
        records = execute(plan)
    except (ResolutionError, ConeError, ValueError, RuntimeError) as exc:
        print(f"dyadiclab: contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    finally:
        _kernels.set_backend(previous)
    text = to_csv(records, cfg["timing"]) if cfg["format"] == "csv" else to_jsonl(records, cfg["timing"])
    summary = _summary(cfg["command"], records)
    if out_path:
        try:
            Path(out_path).write_text(text, encoding="utf-8")
            Path(str(out_path) + ".config.json").write_text(
                json.dumps(_snapshot(cfg), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        except OSError as exc:
            print(f"dyadiclab: cannot write output: {exc}", file=sys.stderr)
            return EXIT_OUTPUT
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return EXIT_OK


def main():
    sys.exit(run())
