"""Command-line front door: density, orbit, classify, construct, verify, explain.

Every command accepts ``--config`` (YAML or JSON); flags given on the
command line override config keys.  Reports are JSON with sorted keys and
embed the exact config that produced them, so feeding a report back through
``--config`` reruns the experiment.

Exit codes: 0 computed or matched, 1 verdict mismatch, 2 config error,
3 resource or horizon limit.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import suites
from .chaos_analysis import (DELTA_GRID, FUNCTIONS, ORDINARY, ScalarSystem, ScheduledSystem, ShiftSystem,
                             classify_pair, classify_vector, pair_profile, rdc_system)
from .constructions import build, build_manjoza, build_primer, primer_cesaro_checkpoints
from .densities import GrowthSequence, Schedule, estimate_density, parse_kind
from .errors import (ChaoslabError, ConstructionInconsistent, HorizonExceeded, InsufficientData, InvalidParameter,
                     ScaleRejected, TruncationTooShort, UnknownConstruction)
from .index_sets import Complement, build_paper_set, from_config
from .shift_core import ShiftOperator, SequenceVector, orbit, parse_vector, parse_weights

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3
PREVIEW = 50


class ConfigError(ChaoslabError):
    pass


# ------------------------------------------------------------ config plumbing

def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        text = Path(path).read_text()
        data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    # a previous report: rerun its embedded config
    if "config" in data and "report" in data:
        data = data["config"]
    return data


def _num(v) -> Any:
    """Parse 1e6-style integers from strings or floats."""
    if isinstance(v, str):
        v = float(v) if any(c in v for c in ".eE") else int(v)
    if isinstance(v, float) and v.is_integer() and abs(v) < 2**63:
        return int(v)
    return v


def merge(cfg: dict, args: argparse.Namespace, keys: list[str]) -> dict:
    out = dict(cfg)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None and v is not False and v != []:
            out[k] = v
    return out


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, tuple)):
        return list(o)
    return str(o)


def _clean(o):
    """Replace non-finite floats so the output is strict JSON."""
    if isinstance(o, float):
        if math.isnan(o):
            return "nan"
        if math.isinf(o):
            return "inf" if o > 0 else "-inf"
        return o
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (np.floating, np.integer, np.ndarray)):
        return _clean(_json_default(o))
    return o


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, default=_json_default) + "\n"


def make_report(command: str, config: dict, body: dict) -> dict:
    return {"report": command, "config": config,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"), **body}


def emit(report: dict, out: Optional[str], stem: str, csv_rows: Optional[list] = None) -> None:
    text = dumps(report)
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{stem}.json").write_text(text)
        if csv_rows:
            buf = io.StringIO()
            writer = csv.DictWriter(buf, fieldnames=list(csv_rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(csv_rows)
            (d / f"{stem}.csv").write_text(buf.getvalue())
    sys.stdout.write(text)


def _threads(cfg: dict) -> Optional[int]:
    t = cfg.get("threads")
    if t is None and os.environ.get("CHAOSLAB_THREADS"):
        t = os.environ["CHAOSLAB_THREADS"]
    return int(t) if t is not None else None


def _growth(cfg: dict) -> GrowthSequence:
    if cfg.get("power") is not None:
        return GrowthSequence.power(float(cfg["power"]))
    if cfg.get("q") is not None:
        return GrowthSequence.power(float(cfg["q"]))
    if cfg.get("growth_lambda") is not None:
        return GrowthSequence.from_lambda(float(cfg["growth_lambda"]))
    g = cfg.get("growth")
    if isinstance(g, dict):
        if "lambda" in g:
            return GrowthSequence.from_lambda(float(g["lambda"]))
        if "q" in g or "exponent" in g:
            return GrowthSequence.power(float(g.get("q", g.get("exponent"))))
        if "a" in g and "b" in g:
            return GrowthSequence.logscale(float(g["a"]), float(g["b"]))
    return GrowthSequence.identity()


def _params(items: Optional[list]) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"parameter {item!r} is not key=value")
        try:
            out[key] = yaml.safe_load(val)
        except yaml.YAMLError:
            out[key] = val
    return out


# ------------------------------------------------------------------ density

def _set_from(cfg: dict):
    spec = cfg.get("set")
    if isinstance(spec, dict):
        return from_config(spec)
    if not spec:
        raise ConfigError("density needs a set")
    name = {"manjoza": "manjoza_S", "zelje": "zelje_A"}.get(spec, spec)
    params = dict(cfg.get("set_params") or {})
    if name == "manjoza_S" and cfg.get("lambda") is not None:
        params.setdefault("lambda", cfg["lambda"])
    A = build_paper_set(name, params)
    return Complement(A) if cfg.get("complement") else A


def cmd_density(cfg: dict) -> tuple[int, dict, list]:
    A = _set_from(cfg)
    g = _growth(cfg)
    kind = parse_kind(cfg.get("kind", "lower"), growth=g)
    horizon = _num(cfg.get("horizon", 10**6))
    if kind.single:
        n = horizon
        top = int(kind.growth.floor(np.array([n]))[0]) if not kind.growth.is_identity else n
        if top > A.cap:
            raise HorizonExceeded(f"m_n at n = {n} exceeds the set's cap {A.cap}")
        est = estimate_density(A, kind, n, Schedule.single(n, lookback=bool(cfg.get("lookback", False))),
                               threads=_threads(cfg))
    else:
        est = estimate_density(A, kind, horizon, threads=_threads(cfg))
    body = {"set": A.to_config(), "estimate": est.to_dict()}
    if kind.lower_bound_only:
        body["lower_bound"] = float(est.values.max()) if len(est.samples) else None
    return EXIT_OK, body, est.csv_rows()


# -------------------------------------------------------------------- orbit

def _operator(cfg: dict):
    """(ShiftOperator, construction or None) from weights / construct keys."""
    space = cfg.get("space", 2.0)
    space = "c0" if space == "c0" else float(space)
    construction = None
    if cfg.get("construct"):
        params = dict(cfg.get("construct_params") or {})
        if cfg["construct"] == "primer":
            params.setdefault("mode", cfg.get("mode", "surrogate"))
        construction = build(cfg["construct"], **params)
        if construction.weights is None:
            raise ConfigError(f"construction {cfg['construct']} has no weight sequence")
        w = construction.weights
    else:
        w = parse_weights(str(cfg.get("weights", "const:1")))
    direction = "backward" if cfg.get("backward") else cfg.get("direction", "forward")
    return ShiftOperator(direction, w, space), construction


def cmd_orbit(cfg: dict) -> tuple[int, dict, list]:
    op, construction = _operator(cfg)
    J = int(_num(cfg.get("J", 1000)))
    x = parse_vector(str(cfg.get("x", "e1")), op.space)
    points = cfg.get("points")
    j_values = None
    if op.direction == "backward" and x.tail is not None:
        # every backward step on a tailed vector sums a long truncation; sample j geometrically
        pts = int(points or 200)
        j_values = np.unique(np.round(np.geomspace(1, J, pts)).astype(np.int64)).tolist()
    elif points:
        j_values = np.unique(np.round(np.geomspace(1, J, int(points))).astype(np.int64)).tolist()
    tr = orbit(op, x, J, mode=cfg.get("metric", "banach"), j_values=j_values,
               tail_dim=_num(cfg["tail_dim"]) if cfg.get("tail_dim") else None)
    body: dict = {"trace": {"points": int(tr.j.size), "J": tr.J, "meta": tr.meta,
                            "first": tr.log2_norm[:10].tolist(), "last": tr.log2_norm[-10:].tolist()}}
    lo = max(J // 10, 1)
    sel = tr.j >= lo
    if np.count_nonzero(sel) >= 2 and np.all(np.isfinite(tr.log2_norm[sel])):
        y = tr.log2_norm[sel] if tr.log2_upper is None else 0.5 * (tr.log2_norm[sel] + tr.log2_upper[sel])
        body["fit"] = {"range": [lo, J], "slope_loglog": float(np.polyfit(np.log2(tr.j[sel].astype(float)), y, 1)[0])}
    if cfg.get("cesaro"):
        if tr.dense:
            cum = np.logaddexp2.accumulate(tr.log2_norm) - np.log2(tr.j.astype(float))
            idx = np.unique(np.round(np.geomspace(1, tr.j.size, 64)).astype(np.int64)) - 1
            body["cesaro_curve"] = [{"N": int(tr.j[i]), "log2_mean": float(cum[i])} for i in idx]
        if construction is not None and construction.name == "primer" and construction.spec.mode == "surrogate":
            body["cesaro_checkpoints"] = primer_cesaro_checkpoints(construction.weights, construction.spec,
                                                                   horizon=J)
    return EXIT_OK, body, tr.csv_rows()


# ----------------------------------------------------------------- classify

def _vector(spec, space) -> SequenceVector:
    if isinstance(spec, (int, float)):
        return SequenceVector(np.array([float(spec)]), space)
    if isinstance(spec, list):
        return SequenceVector(np.asarray(spec, dtype=float), space)
    return parse_vector(str(spec), space)


def build_system(cfg: dict):
    """(system, default x, default y, default J)."""
    name = cfg.get("system", "idioq")
    if isinstance(name, dict):
        kind = name.get("kind")
        if kind == "scalar":
            return ScalarSystem(from_config(name["set"]), name.get("factor", 2.0)), 1.0, 0.0, 2**20
        if kind == "scheduled":
            return ScheduledSystem(from_config(name["set"]), float(name.get("w", 2.0))), "e2", 0.0, 2**12
        raise ConfigError(f"unknown system kind {kind!r}")
    if name == "idioq":
        return ScalarSystem(suites.idioq_blocks(), 2.0), 1.0, 0.0, suites.IDIOQ_CAP - 1
    if name == "zelje":
        from .index_sets import zelje_set

        A = zelje_set()
        return ScalarSystem(A, "index"), 1.0, 0.0, min(A.cap - 1, 2**62)
    if name == "primer":
        w = build_primer("surrogate").weights
        return ShiftSystem(ShiftOperator("forward", w, 2.0)), "e1", [0.0], w.horizon
    if name == "manjoza":
        c = build_manjoza(float(cfg.get("lambda", 0.5)), float(cfg.get("lambda_prime", 0.25)))
        return c.system, "e2", [0.0], 2**16
    if name == "rdc":
        system, vec = rdc_system()
        return system, vec(2**16 + 2), [0.0], 2**16
    if name == "shift":
        op, _ = _operator(cfg)
        return ShiftSystem(op, mode=cfg.get("metric", "banach")), "e1", [0.0], 2**12
    raise ConfigError(f"unknown system {name!r}")


def _grid(cfg: dict):
    g = cfg.get("delta_grid")
    if g is None:
        return DELTA_GRID
    if isinstance(g, dict):
        return tuple(range(int(g["lo"]), int(g["hi"]) + 1, int(g.get("step", 1))))
    return tuple(g)


def _classify(cfg: dict, explain: bool) -> tuple[int, dict, list]:
    system, x0, y0, J0 = build_system(cfg)
    J = int(_num(cfg.get("J", J0)))
    g = _growth({**cfg, "growth_lambda": cfg.get("growth_lambda", cfg.get("lambda") if cfg.get("system") != "manjoza" else None)})
    x = cfg.get("x", x0)
    xv = x if isinstance(x, SequenceVector) else _vector(x, system.space)
    if cfg.get("vector"):
        vc = classify_vector(system, xv, J, g, m=int(cfg.get("m", 1)))
        body = {"system": system.describe(), "vector_class": vc.to_dict(PREVIEW if explain else 0)}
        if explain:
            body["explain"] = {k: {"witness_head": f.witness.members(1, f.witness.cap, limit=PREVIEW).tolist()
                                   if f.witness is not None else None,
                                   "samples": f.estimate.values.tolist() if f.estimate is not None else None}
                               for k, f in vc.flags.items()}
        return EXIT_OK, body, []
    pair = cfg.get("pair")
    if pair == "x=y":
        yv = xv
    else:
        y = cfg.get("y", y0)
        yv = _vector(y, system.space)
    fns = cfg.get("functions") or list(ORDINARY)
    for fn in fns:
        if fn not in FUNCTIONS:
            raise ConfigError(f"unknown profile function {fn!r}")
    prof = pair_profile(system, xv, yv, J, _grid(cfg), fns, g, threads=_threads(cfg))
    verdict = classify_pair(prof, cfg.get("types"))
    body = {"system": system.describe(), "verdict": verdict.to_dict()}
    rows = [{"type": t, "status": v.status} for t, v in verdict.verdicts.items()]
    if explain:
        ex = {}
        for d in prof.delta_log2:
            near = prof.near[d]
            ex[str(d)] = {"near_head": near.members(1, min(near.cap, J), limit=PREVIEW).tolist(),
                          "far_head": prof.far[d].members(1, min(prof.far[d].cap, J), limit=PREVIEW).tolist(),
                          "curves": {fn: {"n": [s.index for s in prof.get(fn, d).samples],
                                          "value": prof.get(fn, d).values.tolist(),
                                          "verdict": prof.get(fn, d).verdict.status} for fn in fns}}
        body["explain"] = ex
    return EXIT_OK, body, rows


def cmd_classify(cfg: dict) -> tuple[int, dict, list]:
    return _classify(cfg, explain=bool(cfg.get("explain")))


def cmd_explain(cfg: dict) -> tuple[int, dict, list]:
    return _classify(cfg, explain=True)


# --------------------------------------------------------- construct/verify

def cmd_construct(cfg: dict) -> tuple[int, dict, list]:
    name = cfg.get("name")
    if not name:
        raise ConfigError("construct needs a construction name")
    params = dict(cfg.get("params") or {})
    for k in ("mode", "horizon"):
        if cfg.get(k) is not None:
            params[k] = _num(cfg[k])
    if cfg.get("lambda") is not None:
        params["lam"] = float(cfg["lambda"])
    if cfg.get("lambda_prime") is not None:
        params["lam_prime"] = float(cfg["lambda_prime"])
    c = build(name, **params)
    return EXIT_OK, {"certificate": c.certificate()}, []


def cmd_verify(cfg: dict) -> tuple[int, dict, list]:
    names = cfg.get("suites") or ([cfg["suite"]] if cfg.get("suite") else [])
    if not names:
        raise ConfigError(f"verify needs a suite name; known: {suites.suite_names()}")
    if names == ["all"]:
        names = sorted(suites.SUITES)
    results = [suites.run_suite(n, (cfg.get("params") or {}).get(n)) for n in names]
    code = EXIT_OK if all(r.ok for r in results) else EXIT_MISMATCH
    rows = [{"suite": r.name, **{k: v for k, v in c.to_dict().items() if k in ("name", "expected", "produced", "status")}}
            for r in results for c in r.checks]
    for r in results:
        for line in r.diff():
            print(f"MISMATCH [{r.name}] {line}", file=sys.stderr)
    return code, {"suites": [r.to_dict() for r in results], "ok": code == EXIT_OK}, rows


COMMANDS = {"density": cmd_density, "orbit": cmd_orbit, "classify": cmd_classify, "construct": cmd_construct,
            "verify": cmd_verify, "explain": cmd_explain}


# ------------------------------------------------------------------ parsing

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML or JSON config (a previous report also works)")
    p.add_argument("--out", help="directory for JSON/CSV artifacts")
    p.add_argument("--threads", type=int, help="worker threads (default: CHAOSLAB_THREADS or 1)")


def _system_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--system", help="idioq, zelje, primer, manjoza, rdc or shift")
    p.add_argument("--x", help="vector spec (e1, power-tail:p=2,eps=0.1, harmonic) or a scalar")
    p.add_argument("--y", help="second vector of the pair")
    p.add_argument("--pair", help="'x=y' classifies the pair (x, x)")
    p.add_argument("--J", help="horizon")
    p.add_argument("--lambda", dest="lambda", type=float, help="lambda for m_n = n^(1/lambda)")
    p.add_argument("--power", type=float, help="exponent q for m_n = n^q")
    p.add_argument("--weights", help="weight spec for --system shift")
    p.add_argument("--backward", action="store_true", default=None)
    p.add_argument("--space", help="1, 2, ... or c0")
    p.add_argument("--vector", action="store_true", default=None, help="classify the single vector x")
    p.add_argument("--types", nargs="+", help="pair types to classify")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chaoslab", description="Densities, shift orbits and chaos verdicts at desk scale.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="estimate a density of an index set")
    _common(p)
    p.add_argument("--set", help="squares, evens, naturals, multiples, power_q, manjoza, zelje, custom_blocks")
    p.add_argument("--set-param", dest="set_param", action="append", help="key=value for the set")
    p.add_argument("--kind", help="lower, upper, lower-m, upper-m, banach-lower, banach-upper, banach-upper-l, ...")
    p.add_argument("--q", type=float, help="exponent q for m_n = n^q")
    p.add_argument("--power", type=float, help="alias of --q")
    p.add_argument("--lambda", dest="lambda", type=float, help="lambda parameter of the manjoza set")
    p.add_argument("--growth-lambda", dest="growth_lambda", type=float, help="m_n = n^(1/lambda)")
    p.add_argument("--horizon")
    p.add_argument("--lookback", action="store_true", default=None)
    p.add_argument("--complement", action="store_true", default=None, help="estimate the complement of the set")

    p = sub.add_parser("orbit", help="simulate ||T^j x|| for a weighted shift")
    _common(p)
    p.add_argument("--construct", help="take weights from a construction (primer, primexsimex, pripazise)")
    p.add_argument("--mode", help="construction mode (surrogate or paper)")
    p.add_argument("--weights", help="const:W, ratio:2n/(2n-1), power:J or exp2:C")
    p.add_argument("--backward", action="store_true", default=None)
    p.add_argument("--x", help="vector spec")
    p.add_argument("--J", help="horizon")
    p.add_argument("--space", help="1, 2, ... or c0")
    p.add_argument("--cesaro", action="store_true", default=None)
    p.add_argument("--points", type=int, help="sample j geometrically at this many points")
    p.add_argument("--metric", help="banach or frechet")

    for name, helptext in (("classify", "classify a pair or vector"),
                           ("explain", "classify and print witness heads and density curves")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        _system_flags(p)
        if name == "classify":
            p.add_argument("--explain", action="store_true", default=None)

    p = sub.add_parser("construct", help="build a construction and print its certificate")
    _common(p)
    p.add_argument("name", nargs="?", help="primer, primexsimex, pripazise or manjoza")
    p.add_argument("--mode")
    p.add_argument("--horizon")
    p.add_argument("--lambda", dest="lambda", type=float)
    p.add_argument("--lambda-prime", dest="lambda_prime", type=float)
    p.add_argument("--param", action="append", help="key=value passed to the builder")

    p = sub.add_parser("verify", help="run named suites against their expected tables")
    _common(p)
    p.add_argument("suites", nargs="*", help=f"suite names or 'all': {', '.join(suites.suite_names())}")
    return ap


_KEYS = {
    "density": ["set", "complement", "kind", "q", "power", "lambda", "growth_lambda", "horizon", "lookback", "threads"],
    "orbit": ["construct", "mode", "weights", "backward", "x", "J", "space", "cesaro", "points", "metric"],
    "classify": ["system", "x", "y", "pair", "J", "lambda", "power", "weights", "backward", "space", "vector",
                 "types", "explain", "threads"],
    "explain": ["system", "x", "y", "pair", "J", "lambda", "power", "weights", "backward", "space", "vector",
                "types", "threads"],
    "construct": ["name", "mode", "horizon", "lambda", "lambda_prime"],
    "verify": ["suites", "threads"],
}


def config_from_args(args: argparse.Namespace) -> dict:
    cfg = load_config(args.config)
    cfg = merge(cfg, args, _KEYS[args.command])
    if getattr(args, "set_param", None):
        cfg["set_params"] = {**cfg.get("set_params", {}), **_params(args.set_param)}
    if getattr(args, "param", None):
        cfg["params"] = {**cfg.get("params", {}), **_params(args.param)}
    if args.command == "verify" and cfg.get("suites") == []:
        cfg.pop("suites")
    for k in ("J", "horizon"):
        if k in cfg:
            cfg[k] = _num(cfg[k])
    return cfg


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        code, body, rows = COMMANDS[args.command](cfg)
    except (ConfigError, InvalidParameter, UnknownConstruction, KeyError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (HorizonExceeded, TruncationTooShort, ScaleRejected, InsufficientData, MemoryError) as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConstructionInconsistent as e:
        print(f"construction inconsistent: {e}", file=sys.stderr)
        return EXIT_MISMATCH
    stem = args.command if args.command != "verify" else "verify_" + "_".join(cfg.get("suites", []))
    emit(make_report(args.command, cfg, body), getattr(args, "out", None), stem, rows)
    return code


if __name__ == "__main__":
    sys.exit(main())
