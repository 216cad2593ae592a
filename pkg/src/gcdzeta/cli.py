"""Experiment runner: configuration, cached constructions, records and reports.

    python3 -m gcdzeta construct --config cfg.json --out record.json
    python3 -m gcdzeta verify --verbose

Exit codes: 0 success, 1 a checked inequality or criterion failed,
2 configuration error, 3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import construction as cons
from . import gcdsum, resonance, zeta
from .errors import ConvergenceError, DomainError, GcdZetaError, ResourceBudgetError
from .presets import SMOOTHED_SUM_GRID

log = logging.getLogger("gcdzeta")

CACHE_ENV = "GCDZETA_CACHE"
CACHE_FORMAT = 1
EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3

DEFAULTS = {
    "construct": {"N": 10**6, "gamma": 0.5, "a": None, "budget": 10**5, "direct_check": True, "eps": 2.0},
    "gcdsum": {
        "N": 10**6, "gamma": 0.5, "a": None, "budget": 10**5,
        "brute_N": 2, "brute_bound": 50, "eigen": False,
    },
    "resonate": {
        "N": 10**6, "gamma": 0.5, "a": 1.5, "budget": 10**5,
        "T": 1e3, "beta": 0.4, "scan_budget": 4000, "zeta_source": "em",
        "smoothed_sum_grid": list(SMOOTHED_SUM_GRID), "moments": True,
    },
    "zeta": {"t": [0.0, 14.134725141], "T": 1e4, "evaluator": "reference", "tol": 1e-10},
    "verify": {"only": []},
}


class ConfigError(GcdZetaError, ValueError):
    pass


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats as shortest round-trip repr."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: dict
    seed: int = 0

    @classmethod
    def build(cls, command: str, overrides: dict | None = None, seed: int | None = None) -> "ExperimentConfig":
        if command not in DEFAULTS:
            raise ConfigError(f"unknown command {command!r}")
        params = dict(DEFAULTS[command])
        overrides = dict(overrides or {})
        file_seed = overrides.pop("seed", 0)
        unknown = set(overrides) - set(params)
        if unknown:
            raise ConfigError(f"unknown {command} parameters: {sorted(unknown)}")
        params.update(overrides)
        seed = file_seed if seed is None else seed
        if not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return cls(command, params, seed)

    def to_dict(self) -> dict:
        return {"command": self.command, "params": self.params, "seed": self.seed}

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        d = json.loads(text)
        return cls(d["command"], d["params"], d["seed"])

    @property
    def config_hash(self) -> str:
        return digest(self.to_dict())

    def construction_params(self) -> cons.ConstructionParams:
        p = self.params
        return cons.ConstructionParams(int(p["N"]), float(p["gamma"]), p["a"], int(p["budget"]))


@dataclass
class ExperimentRecord:
    config: ExperimentConfig
    started: str = field(default_factory=lambda: _now())
    finished: str | None = None
    outputs: list[dict] = field(default_factory=list)
    oracles: list[str] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)
    log: list[str] = field(default_factory=list)

    def add(self, name: str, value, op: str, module: str) -> None:
        if isinstance(value, complex):
            value = [value.real, value.imag]
        elif isinstance(value, (np.floating, np.integer)):
            value = value.item()
        self.outputs.append({"name": name, "value": value, "op": op, "module": f"gcdzeta.{module} {__version__}"})

    def check(self, name: str, ok: bool, detail: str) -> None:
        self.checks.append({"name": name, "passed": bool(ok), "detail": detail})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config.config_hash,
            "config": self.config.to_dict(),
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
            "oracles": self.oracles,
            "checks": self.checks,
            "log": self.log,
        }

    def value(self, name: str):
        for o in self.outputs:
            if o["name"] == name:
                return o["value"]
        raise KeyError(name)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["parameter", "value", "op", "module"])
        for k, v in sorted(self.config.params.items()):
            w.writerow([f"config.{k}", json.dumps(v), "config", ""])
        for o in self.outputs:
            w.writerow([o["name"], json.dumps(o["value"]), o["op"], o["module"]])
        for c in self.checks:
            w.writerow([f"check.{c['name']}", json.dumps(c["passed"]), "check", c["detail"]])
        return buf.getvalue()


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- construction cache ------------------------------------------------------

def construction_key(params: cons.ConstructionParams) -> str:
    return digest({"format": CACHE_FORMAT, "params": params.as_dict()})


def _payload(mset: cons.ExtremalSet, key: str) -> dict:
    masks = [format(m, "x") for m in mset.masks]
    return {
        "format": CACHE_FORMAT,
        "version": __version__,
        "key": key,
        "params": mset.params.as_dict(),
        "primes": [int(p) for p in mset.table.primes],
        "masks": masks,
        "masks_sha256": digest(masks),
        "truncated": mset.truncated,
        "full_count": str(mset.full_count),
    }


def save_construction(mset: cons.ExtremalSet, cache_dir: Path) -> Path:
    key = construction_key(mset.params)
    path = cache_dir / f"construction-{key[:32]}.json"
    atomic_write(path, canonical_json(_payload(mset, key)))
    return path


def load_construction(params: cons.ConstructionParams, cache_dir: Path) -> cons.ExtremalSet | None:
    """Cached set for params, or None if absent; raises ValueError if the file is corrupt."""
    key = construction_key(params)
    path = cache_dir / f"construction-{key[:32]}.json"
    if not path.exists():
        return None
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"unreadable cache file {path}: {exc}") from exc
    if data.get("format") != CACHE_FORMAT or data.get("key") != key or data.get("params") != params.as_dict():
        raise ValueError(f"cache file {path} does not match its configuration hash")
    if digest(data["masks"]) != data.get("masks_sha256"):
        raise ValueError(f"cache file {path} fails its content checksum")
    table = cons.prime_window(params)
    if [int(p) for p in table.primes] != data["primes"]:
        raise ValueError(f"cache file {path} was built on a different prime window")
    weight = cons.WeightFunction.for_params(params, table)
    group_masks, caps = cons._group_structure(params, table)
    masks = [int(m, 16) for m in data["masks"]]
    return cons.ExtremalSet(params, table, weight, group_masks, caps, masks, data["truncated"], int(data["full_count"]))


def cached_set(params: cons.ConstructionParams, cache_dir: Path | None, record: ExperimentRecord | None = None):
    note = record.log.append if record else (lambda s: None)
    if cache_dir is not None:
        try:
            mset = load_construction(params, cache_dir)
        except ValueError as exc:
            log.warning("%s; rebuilding", exc)
            note(f"cache corrupt, rebuilt: {exc}")
            mset = None
        if mset is not None:
            log.info("cache hit for %s, enumeration skipped", construction_key(params)[:12])
            note("cache hit, enumeration skipped")
            return mset
    mset = cons.build_set(params)
    if cache_dir is not None:
        path = save_construction(mset, cache_dir)
        note(f"cache written: {path.name}")
    return mset


# -- commands ----------------------------------------------------------------

def cmd_construct(config: ExperimentConfig, cache_dir: Path | None) -> ExperimentRecord:
    rec = ExperimentRecord(config)
    params = config.construction_params()
    mset = cached_set(params, cache_dir, rec)
    lo, hi = cons.window_bounds(params)
    rec.add("window_lo", lo, "window_bounds", "construction")
    rec.add("window_hi", hi, "window_bounds", "construction")
    rec.add("P_size", len(mset.table), "prime_window", "construction")
    rec.add("caps", list(mset.caps), "group_cap", "construction")
    rec.add("M_size", len(mset), "build_set", "construction")
    rec.add("M_full_count", str(mset.full_count), "build_set", "construction")
    rec.add("truncated", mset.truncated, "build_set", "construction")
    a_n = cons.a_n_product(params, mset.table)
    rec.add("A_N", a_n, "a_n_product", "construction")
    rec.add("sum_f_squared", cons.sum_f_squared_total(params, mset.table), "sum_f_squared_total", "construction")
    if config.params["direct_check"] and len(mset.table) <= 22:
        direct = cons.a_n_direct(params)
        rec.add("A_N_direct", direct, "a_n_direct", "construction")
        rec.oracles.append("a_n_direct: subset enumeration of the Euler product")
        rec.check("euler_product", abs(direct - a_n) <= 1e-10 * abs(direct), f"{a_n!r} vs {direct!r}")
    rec.add("divisor_tail", cons.divisor_tail(mset, float(config.params["eps"])), "divisor_tail", "construction")
    rec.finished = _now()
    return rec


def cmd_gcdsum(config: ExperimentConfig, cache_dir: Path | None) -> ExperimentRecord:
    rec = ExperimentRecord(config)
    p = config.params
    bf = gcdsum.brute_force_gamma(int(p["brute_N"]), int(p["brute_bound"]))
    rec.add("gamma_brute_force", bf.value, "brute_force_gamma", "gcdsum")
    rec.add("gamma_brute_force_witness", list(bf.witness), "brute_force_gamma", "gcdsum")
    rec.add("gamma_brute_force_exact", {str(r): str(q) for r, q in bf.terms.items()}, "exact_gamma_terms", "gcdsum")
    rec.oracles.append("brute_force_gamma: exhaustive subsets, exact sqrt-rational tie-break")
    params = config.construction_params()
    mset = cached_set(params, cache_dir, rec)
    ray = cons.rayleigh_of_set(mset)
    low = cons.divisor_lower_bound(mset)
    rec.add("rayleigh", ray, "rayleigh_of_set", "construction")
    rec.add("divisor_lower_bound", low, "divisor_lower_bound", "construction")
    rec.check("rayleigh_ge_lower_bound", ray >= low, f"{ray!r} >= {low!r}")
    growth = math.exp(params.gamma * math.sqrt(params.log1 * params.log3 / params.log2))
    rec.add("growth_reference", growth, "exp(gamma sqrt(log N log3 N / log2 N))", "cli")
    if p["eigen"]:
        rec.add("top_eigenvalue", gcdsum.top_eigenvalue(mset.members), "top_eigenvalue", "gcdsum")
    rec.finished = _now()
    return rec


def cmd_resonate(config: ExperimentConfig, cache_dir: Path | None, scan_log: Path | None = None) -> ExperimentRecord:
    rec = ExperimentRecord(config)
    p = config.params
    T, beta = float(p["T"]), float(p["beta"])
    params = config.construction_params()
    if params.N != resonance.coupled_N(T, beta):
        msg = f"N={params.N} is decoupled from T (floor(T^kappa) = {resonance.coupled_N(T, beta)})"
        log.warning(msg)
        rec.log.append(msg)
    mset = cached_set(params, cache_dir, rec)
    spec = resonance.build_resonator(mset, T, beta)
    rec.add("resonator_terms", len(spec), "build_resonator", "resonance")
    rec.add("R0", resonance.evaluate_R(spec, 0.0).real, "evaluate_R", "resonance")
    rec.add("M1_grid_bound", resonance.m1_grid_bound(spec), "m1_grid_bound", "resonance")
    if p["moments"]:
        mom = resonance.moments(spec, p["zeta_source"])
        rec.add("M1", mom.M1, "m1_quadrature", "resonance")
        rec.add("M2", mom.M2, "m2_quadrature", "resonance")
        rec.add("ratio", mom.ratio, "moments", "resonance")
        _, zmax = resonance.dense_zeta_max(T, beta)
        rec.add("dense_zeta_max", zmax, "dense_zeta_max", "resonance")
        rec.oracles.append("dense_zeta_max: uniform grid plus golden-section refinement")
        rec.check("ratio_le_scan_max", mom.ratio <= zmax, f"{mom.ratio!r} <= {zmax!r}")
    scan = resonance.guided_scan(spec, int(p["scan_budget"]), config.seed)
    rec.add("scan_guided_max", scan.guided_max, "guided_scan", "resonance")
    rec.add("scan_baseline_max", scan.baseline_max, "guided_scan", "resonance")
    rec.add("scan_evaluations", scan.evaluations, "guided_scan", "resonance")
    if scan_log is not None:
        append_scan_log(scan_log, scan, config)
    if p["smoothed_sum_grid"]:
        table = [resonance.smoothed_sum_check(float(M), T, beta) for M in p["smoothed_sum_grid"]]
        rec.add("smoothed_sum_table", [[r.M, r.lhs, r.bound, r.ratio] for r in table], "smoothed_sum_check", "resonance")
        rec.add("smoothed_sum_C", max(r.ratio for r in table), "smoothed_sum_check", "resonance")
    rec.finished = _now()
    return rec


def append_scan_log(path: Path, scan: resonance.ScanResult, config: ExperimentConfig) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as fh:
        for arm, cands in (("guided", scan.guided), ("baseline", scan.baseline)):
            for c in cands:
                fh.write(canonical_json({
                    "arm": arm, "t": c.t, "abs_zeta": c.abs_zeta, "abs_R": c.abs_R,
                    "seed": config.seed, "config_hash": config.config_hash,
                }) + "\n")


def cmd_zeta(config: ExperimentConfig, cache_dir: Path | None = None) -> ExperimentRecord:
    rec = ExperimentRecord(config)
    p = config.params
    ev = p["evaluator"]
    for t in p["t"]:
        t = float(t)
        if ev == "reference":
            z = zeta.zeta_reference(t, tol=float(p["tol"]))
        elif ev == "approx":
            z = zeta.zeta_approx(t, float(p["T"]))
        elif ev == "em":
            z = zeta.ZetaValue(t, complex(zeta.zeta_em([t])[0]), 1e-10 + 1e-12 * abs(t))
        else:
            raise ConfigError(f"unknown evaluator {ev!r}")
        rec.add(f"zeta({t!r})", z.value, f"zeta_{ev}", "zeta")
        rec.add(f"bound({t!r})", z.abs_error_bound, f"zeta_{ev}", "zeta")
    rec.finished = _now()
    return rec


def cmd_verify(config: ExperimentConfig, verbose: bool = False) -> ExperimentRecord:
    from .acceptance import run_all

    rec = ExperimentRecord(config)
    only = set(config.params["only"] or [])
    results = run_all(only, report=print if verbose else None)
    for r in results:
        rec.check(f"criterion_{r.number}", r.passed, f"{r.name}: {r.measured} (required {r.tolerance})")
        rec.add(f"criterion_{r.number}_runtime", r.runtime, r.name, "acceptance")
    rec.finished = _now()
    return rec


# -- entry point -------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file of parameter overrides")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--cache-dir", type=Path, default=None, help=f"default ${CACHE_ENV} or ./cache")
    common.add_argument("--out", type=Path, default=None, help="write the record here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one parameter (JSON value)")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="gcdzeta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("construct", "build (or load) the extremal set and report A_N"),
        ("gcdsum", "GCD-sum quantities on the extremal set plus a brute-force oracle"),
        ("resonate", "resonator moments, guided scan and the M-uniform bound table"),
        ("zeta", "evaluate zeta(1/2+it) with an error bound"),
        ("verify", "run the acceptance suite"),
    ):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        if name == "resonate":
            sp.add_argument("--scan-log", type=Path, default=None, help="JSON-lines file for scan candidates")
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.config is not None:
        try:
            out.update(json.loads(args.config.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    for item in args.set:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cache_dir = args.cache_dir or Path(os.environ.get(CACHE_ENV, "cache"))
    try:
        config = ExperimentConfig.build(args.command, _overrides(args), args.seed)
        if args.command == "construct":
            rec = cmd_construct(config, cache_dir)
        elif args.command == "gcdsum":
            rec = cmd_gcdsum(config, cache_dir)
        elif args.command == "resonate":
            rec = cmd_resonate(config, cache_dir, args.scan_log or cache_dir / "scans.jsonl")
        elif args.command == "zeta":
            rec = cmd_zeta(config)
        else:
            rec = cmd_verify(config, args.verbose)
    except (ResourceBudgetError, ConvergenceError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, DomainError, GcdZetaError, ValueError, TypeError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = rec.to_json() if args.format == "json" else rec.to_csv()
    if args.out is not None:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK if rec.passed else EXIT_ASSERT
