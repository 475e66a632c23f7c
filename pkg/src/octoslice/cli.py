"""Command line front end: ``octoslice run | list-suites | describe``.

Exit codes: 0 when every selected suite passes, 1 when a suite fails, 2 on a
configuration or usage error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .suites import CUSTOM_STEMS, SUITE_NAMES, SUITES

SCHEMA = 1
TIMING_KEYS = ("timing_s", "total_timing_s")

DEFAULT_CONFIG = {
    "suites": list(SUITE_NAMES),
    "seed": 0,
    "grid": {"n_alpha": 6, "n_beta": 6},
    "quadrature": {"n_psi": 24, "n_theta": 24, "n_phi": 48, "n_radial": 16},
    "samples": {"algebra": 10000, "cauchy": 4, "extremum": 20, "o3_rotations": 8},
    "tolerances": {
        "algebra": 1e-12,
        "slice": 1e-10,
        "gamma_fd": 1e-6,
        "analytic": 1e-9,
        "vekua": 1e-8,
        "cauchy": 1e-4,
        "exterior": 5e-4,
        "series": 1e-10,
        "camshaft": 1e-10,
    },
    "corpus": {"example_draws": 4, "custom": ["identity", "constant", "poly3", "product", "nonslice"]},
}


class ConfigError(ValueError):
    """Invalid campaign configuration; the message names the offending field."""


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown field '{where}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"field '{where}' must be an object")
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def validate(config):
    """Check the invariants of a merged config; raises :class:`ConfigError`."""
    suites = config["suites"]
    if not isinstance(suites, list) or not suites:
        raise ConfigError("field 'suites' must be a non-empty list")
    for name in suites:
        if name not in SUITES:
            raise ConfigError(f"field 'suites': unknown suite '{name}'")
    config["suites"] = [n for n in SUITE_NAMES if n in suites]
    if not isinstance(config["seed"], int) or isinstance(config["seed"], bool) or config["seed"] < 0:
        raise ConfigError("field 'seed' must be a nonnegative integer")
    for key, value in config["tolerances"].items():
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
            raise ConfigError(f"field 'tolerances.{key}' must be a positive number")
    for key, value in config["grid"].items():
        if not isinstance(value, int) or value < 2:
            raise ConfigError(f"field 'grid.{key}' must be an integer >= 2")
    for key, value in config["quadrature"].items():
        if not isinstance(value, int) or value < 1:
            raise ConfigError(f"field 'quadrature.{key}' must be a positive integer")
    for key, value in config["samples"].items():
        if not isinstance(value, int) or value < 1:
            raise ConfigError(f"field 'samples.{key}' must be a positive integer")
    corpus = config["corpus"]
    if not isinstance(corpus["example_draws"], int) or corpus["example_draws"] < 0:
        raise ConfigError("field 'corpus.example_draws' must be a nonnegative integer")
    for name in corpus["custom"]:
        if name not in CUSTOM_STEMS:
            raise ConfigError(f"field 'corpus.custom': unknown corpus entry '{name}'")
    return config


def load_config(path=None, overrides=None):
    """Read a JSON config (if any), merge it over the defaults and validate."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: the config must be a JSON object")
        config = _merge(config, data)
    if overrides:
        config = _merge(config, overrides)
    return validate(config)


def suite_rngs(seed):
    """One independent generator per known suite, keyed by suite name.

    Substreams are spawned for every suite in a fixed order, so selecting a
    subset of suites does not change the draws of the others.
    """
    children = np.random.SeedSequence(seed).spawn(len(SUITE_NAMES))
    return {name: np.random.default_rng(child) for name, child in zip(SUITE_NAMES, children)}


def _run_suite(name, config, rng):
    start = time.perf_counter()
    entry = {"name": name, "passed": False, "checks": [], "error": None}
    try:
        checks = SUITES[name][0](config, rng)
        entry["checks"] = [c.to_dict() for c in checks]
        entry["passed"] = bool(checks) and all(c.passed for c in checks)
        finite = [c.max_residual for c in checks if np.isfinite(c.max_residual)]
        entry["stats"] = {"n_checks": len(checks), "n_failed": sum(not c.passed for c in checks),
                          "max_residual": max(finite) if finite else None}
    except Exception as exc:  # a crashing suite is reported, not propagated
        entry["error"] = f"{type(exc).__name__}: {exc}"
        entry["traceback"] = traceback.format_exc(limit=3)
        entry["stats"] = {"n_checks": 0, "n_failed": 0, "max_residual": None}
    entry["timing_s"] = time.perf_counter() - start
    return entry


def run(config, jobs=1):
    """Run the selected suites and return the campaign report (a dict)."""
    start = time.perf_counter()
    rngs = suite_rngs(config["seed"])
    names = [n for n in SUITE_NAMES if n in config["suites"]]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_suite, n, config, rngs[n]) for n in names]
            entries = [f.result() for f in futures]
    else:
        entries = [_run_suite(n, config, rngs[n]) for n in names]
    return {
        "schema": SCHEMA,
        "toolkit": {"name": "octoslice", "version": __version__},
        "config": config,
        "seed": config["seed"],
        "passed": all(e["passed"] for e in entries),
        "suites": entries,
        "total_timing_s": time.perf_counter() - start,
    }


def strip_timing(report):
    """Copy of ``report`` without timing fields (for determinism comparisons)."""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if k not in TIMING_KEYS}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


def to_csv(report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["suite", "check", "max_residual", "tol", "passed", "count"])
    for entry in report["suites"]:
        if entry["error"]:
            writer.writerow([entry["name"], "error: " + entry["error"], "", "", False, 0])
        for c in entry["checks"]:
            writer.writerow([entry["name"], c["name"], repr(c["max_residual"]), repr(c["tol"]),
                             c["passed"], c["count"]])
    return buf.getvalue()


def render(report, fmt="json") -> str:
    if fmt == "csv":
        return to_csv(report)
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _parser():
    parser = argparse.ArgumentParser(prog="octoslice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run verification suites")
    p_run.add_argument("--config", type=Path, help="JSON campaign config")
    p_run.add_argument("--suite", action="append", dest="suites", metavar="NAME",
                       help="suite to run (repeatable); overrides the config")
    p_run.add_argument("--seed", type=int, help="campaign seed (overrides the config)")
    p_run.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p_run.add_argument("--format", choices=("json", "csv"), default="json")
    p_run.add_argument("--jobs", type=int, default=1, help="suites run in parallel (default 1)")
    sub.add_parser("list-suites", help="print the suite names, one per line")
    p_desc = sub.add_parser("describe", help="describe one suite")
    p_desc.add_argument("suite")
    return parser


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "list-suites":
        print("\n".join(SUITE_NAMES))
        return 0
    if args.command == "describe":
        if args.suite not in SUITES:
            print(f"error: unknown suite '{args.suite}'", file=sys.stderr)
            return 2
        print(f"{args.suite}: {SUITES[args.suite][1]}")
        return 0
    overrides = {}
    if args.suites:
        overrides["suites"] = args.suites
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        config = load_config(args.config, overrides)
    except (ConfigError, OSError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return 2
    report = run(config, jobs=args.jobs)
    text = render(report, args.format)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    for entry in report["suites"]:
        status = "PASS" if entry["passed"] else "FAIL"
        print(f"{status} {entry['name']}", file=sys.stderr)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
