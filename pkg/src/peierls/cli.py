"""Command-line front end.

Exit codes: 0 all checks pass, 1 an asserted inequality failed, 2 bad
configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import barrier
from .action import estimate_constants
from .battery import BatterySettings, run_battery
from .diophantine import GOLDEN_MEAN, Rational, RotationTarget, parse_rotation
from .potential import InvalidModelError, PerturbedPotential, from_descriptor
from .solver import ConvergenceError, SolverOptions

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

log = logging.getLogger("peierls")

_MODEL = {
    "type": "object",
    "required": ["type"],
    "additionalProperties": False,
    "properties": {
        "type": {"enum": ["frenkel_kontorova", "twist_standard", "onsite_cosine", "perturbed"]},
        "a": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "lambda": {"type": "array", "items": {"type": "number"}},
        "K": {"type": "number", "minimum": 0},
        "range": {"type": "integer", "minimum": 1},
        "base": {"$ref": "#/$defs/model"},
        "bump": {"$ref": "#/$defs/model"},
        "delta": {"type": "number"},
    },
}

_ROTATION = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["rational", "quadratic", "cf"]},
        "p": {"type": "integer"},
        "q": {"type": "integer"},
        "num": {"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3},
        "den": {"type": "integer"},
        "head": {"type": "array", "items": {"type": "integer"}},
        "period": {"type": "array", "items": {"type": "integer"}},
    },
}

CONFIG_SCHEMA = {
    "$defs": {"model": _MODEL, "rotation": _ROTATION},
    "type": "object",
    "required": ["model"],
    "additionalProperties": False,
    "properties": {
        "model": {"$ref": "#/$defs/model"},
        "rotation": {"$ref": "#/$defs/rotation"},
        "grid": {"type": "integer", "minimum": 2},
        "convergents": {"type": "integer", "minimum": 3},
        "threshold": {"type": "number", "exclusiveMinimum": 0},
        "error_bar": {"enum": ["empirical", "rigorous"]},
        "L": {"type": "number", "exclusiveMinimum": 0},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iters": {"type": "integer", "minimum": 1},
                "starts": {"type": "integer", "minimum": 1},
                "fuzz": {"type": "number", "minimum": 0},
            },
        },
        "seed": {"type": "integer"},
        "c_scale": {"type": "number", "exclusiveMinimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "pairs": {"type": "array",
                  "items": {"type": "array", "items": {"type": "string"},
                            "minItems": 2, "maxItems": 2}},
        "bump": {"$ref": "#/$defs/model"},
        "deltas": {"type": "array", "items": {"type": "number"}},
        "out": {"type": "string"},
    },
}


class ConfigError(ValueError):
    pass


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    return cfg


class Experiment:
    """Validated config with command-line overrides applied."""

    def __init__(self, cfg, args):
        self.cfg = cfg
        try:
            self.pot = from_descriptor(cfg["model"])
            self.rotation = parse_rotation(cfg["rotation"]) if "rotation" in cfg else GOLDEN_MEAN
            self.opts = SolverOptions.from_dict(cfg.get("solver"))
            self.bump = (from_descriptor(cfg["bump"], range_hint=self.pot.range)
                         if "bump" in cfg else None)
            self.pairs = ([(Rational.parse(a), Rational.parse(b)) for a, b in cfg["pairs"]]
                          if "pairs" in cfg else None)
        except (InvalidModelError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        pick = lambda flag, key, default: flag if flag is not None else cfg.get(key, default)
        self.grid = pick(args.grid, "grid", 128)
        self.convergents = pick(args.convergents, "convergents", 11)
        self.seed = pick(args.seed, "seed", 0)
        self.c_scale = pick(args.c_scale, "c_scale", 1.0)
        self.out = Path(pick(args.out, "out", "."))
        self.explicit_out = args.out is not None or "out" in cfg
        self.L = cfg.get("L")
        self.threshold = cfg.get("threshold", 1e-6)
        self.error_bar = cfg.get("error_bar", "empirical")
        self.samples = cfg.get("samples", 10_000)
        self.deltas = cfg.get("deltas", [1e-4, 1e-3])
        if self.grid < 2 or self.convergents < 3 or self.c_scale <= 0:
            raise ConfigError("grid >= 2, convergents >= 3 and c_scale > 0 are required")

    @property
    def irrational(self):
        return self.rotation.is_irrational


def _fmt(v):
    return f"{v:.12e}"


def write_profile_csv(path, grid, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi", "P"])
        for x, v in zip(grid, values):
            w.writerow([_fmt(x), _fmt(v)])


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _profile_summary(pr):
    return {"rotation": str(pr.rotation), "sup": pr.sup, "argmax": pr.argmax,
            "failed": list(pr.failed), "max_birkhoff_defect": pr.max_birkhoff_defect,
            "max_sandwich_violation": pr.max_sandwich_violation,
            "minimizer_action": pr.minimizer.action if pr.minimizer else None}


def cmd_barrier(ex: Experiment):
    ex.out.mkdir(parents=True, exist_ok=True)
    if not ex.irrational:
        pr = barrier.barrier_profile(ex.pot, ex.rotation.rational, ex.grid, ex.opts)
        write_profile_csv(ex.out / "profile.csv", pr.grid, pr.values)
        L = ex.L or barrier.default_cap([ex.rotation.rational])
        consts = estimate_constants(ex.pot, L, samples=ex.samples, seed=ex.seed)
        write_json(ex.out / "summary.json", {**_profile_summary(pr), "constants": consts.as_dict(),
                                             "solver": ex.opts.as_dict()})
        print(f"sup {pr.sup:.12e} at xi = {pr.argmax:.6f}")
        return EXIT_SOLVER if pr.partial else EXIT_OK
    rep = barrier.barrier_irrational(ex.pot, ex.rotation, ex.convergents, ex.grid, ex.opts,
                                     L=ex.L, c_scale=ex.c_scale, seed=ex.seed)
    for c, pr in zip(rep.convergents, rep.profiles):
        write_profile_csv(ex.out / f"profile_{c.q}_{c.p}.csv", pr.grid, pr.values)
    write_profile_csv(ex.out / "profile.csv", rep.profiles[-1].grid, rep.extrapolated)
    summary = rep.as_dict()
    summary["argmax"] = rep.profiles[-1].argmax
    summary["solver"] = ex.opts.as_dict()
    write_json(ex.out / "summary.json", summary)
    print(f"sup {rep.sup:.12e} +- {rep.empirical_error_bar:.3e} "
          f"(rigorous {rep.rigorous_error_bar:.3e})")
    if any(st != "ok" for st in rep.status):
        return EXIT_SOLVER
    return EXIT_OK if rep.cauchy else EXIT_FAIL


def cmd_classify(ex: Experiment):
    res = barrier.classify(ex.pot, ex.rotation, ex.grid, ex.threshold, ex.convergents, ex.opts,
                           ex.error_bar, ex.c_scale, ex.seed)
    print(res.verdict)
    if ex.explicit_out:
        ex.out.mkdir(parents=True, exist_ok=True)
        write_json(ex.out / "classify.json", res.as_dict())
    return EXIT_OK


def cmd_verify(ex: Experiment):
    settings = BatterySettings(L=ex.L or 2.0, grid=ex.grid, c_scale=ex.c_scale, seed=ex.seed,
                               chain_length=ex.convergents, deltas=tuple(ex.deltas),
                               lipschitz_samples=ex.samples)
    reports, consts = run_battery(ex.pot, settings, ex.opts, ex.pairs)
    ex.out.mkdir(parents=True, exist_ok=True)
    write_json(ex.out / "verify.json", {"constants": consts.as_dict(),
                                        "c_scale": ex.c_scale,
                                        "checks": [r.as_dict() for r in reports],
                                        "pass": all(r.passed for r in reports)})
    failed = [r for r in reports if not r.passed]
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check} lhs={r.lhs:.6e} rhs={r.rhs:.6e}")
    if failed:
        print("failed: " + ", ".join(sorted({r.check for r in failed})), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_sweep(ex: Experiment):
    if ex.bump is None:
        raise ConfigError("sweep needs a 'bump' model")
    rows = barrier.robustness_sweep(ex.pot, ex.bump, ex.deltas, ex.rotation, ex.grid,
                                    ex.convergents, ex.opts)
    verdicts = {}
    if ex.irrational:
        for d in [0.0] + list(ex.deltas):
            pot = PerturbedPotential(ex.pot, float(d), ex.bump) if d else ex.pot
            verdicts[str(d)] = barrier.classify(pot, ex.rotation, ex.grid, ex.threshold,
                                                ex.convergents, ex.opts, ex.error_bar).verdict
    ex.out.mkdir(parents=True, exist_ok=True)
    with open(ex.out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta", "rotation", "difference", "bound", "conditions_ok", "pass"])
        for r in rows:
            w.writerow([_fmt(r.delta), str(r.rotation), _fmt(r.difference), _fmt(r.bound),
                        int(r.conditions_ok), int(r.passed)])
    write_json(ex.out / "sweep.json", {"rows": [r.as_dict() for r in rows],
                                       "verdicts": verdicts})
    for r in rows:
        print(f"{'PASS' if r.passed else 'FAIL'} delta={r.delta:g} {r.rotation} "
              f"diff={r.difference:.3e} bound={r.bound:.3e}")
    for d, v in verdicts.items():
        print(f"delta={d} {v}")
    return EXIT_OK if all(r.passed for r in rows if r.conditions_ok) else EXIT_FAIL


def cmd_constants(ex: Experiment):
    L = ex.L or 2.0
    consts = estimate_constants(ex.pot, L, samples=ex.samples, seed=ex.seed)
    d = consts.as_dict()
    print(json.dumps(d, indent=2, sort_keys=True))
    if ex.explicit_out:
        ex.out.mkdir(parents=True, exist_ok=True)
        write_json(ex.out / "constants.json", d)
    return EXIT_OK


COMMANDS = {"barrier": cmd_barrier, "classify": cmd_classify, "verify": cmd_verify,
            "sweep": cmd_sweep, "constants": cmd_constants}


def build_parser():
    ap = argparse.ArgumentParser(prog="peierls",
                                 description="Peierls barriers of monotone lattice models")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="experiment JSON")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--grid", type=int, default=None, help="xi grid size")
    ap.add_argument("--convergents", type=int, default=None,
                    help="number of convergents for irrational rotation numbers")
    ap.add_argument("--seed", type=int, default=None, help="seed for quasi-random sampling")
    ap.add_argument("--threads", type=int, default=None, help="worker threads")
    ap.add_argument("--c-scale", dest="c_scale", type=float, default=None,
                    help="multiply the estimate constant C (negative controls)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        ex = Experiment(load_config(args.config), args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads:
        barrier.set_threads(args.threads)
    try:
        return COMMANDS[args.command](ex)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
