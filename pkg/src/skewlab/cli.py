"""Command line front end: ``skewlab <command> [options]``.

Options may also come from ``--config file.json``; explicit flags win over
the file. Each command writes ``<command>.json`` (and CSV tables where there
is data) into ``--out`` and prints a one-line verdict.

Exit codes: 0 success, 2 invalid input, 3 budget exhausted, 4 internal
inconsistency.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import kernels
from .circle_maps import Itinerary
from .cohomology import LIVSIC_PERIODS, TOL_OBSTRUCTION, Special, classify, livsic_obstruction, solve_coboundary
from .ergodicity import (DEFAULT_SAMPLES, SAMPLE_SHARD, START_SHARD, birkhoff_average, conjugated_witness_observable,
                         correlation_sequence, ergodicity_score, invariant_witness_value, parse_observable,
                         standard_observables)
from .errors import (BudgetExhausted, ConeViolation, InconsistentEvidence, OverflowBudget, SkewLabError,
                     ValidationError)
from .fourier import CircleFunction, from_json_dict, parse_function, to_json_dict
from .inverse_limit import CYLINDER_SAMPLES, LinearModel, cylinder_measure_estimate, reindex_itinerary
from .report import CSV_HEADERS, emit_report, validate_config
from .system import Perturbation, build_system
from .unstable import (LEAF_SAMPLES, SEARCH_BUDGET, WITNESS_GRID, WITNESS_PREFIX, AccessibilityWitness, depth_for,
                       accessibility_witness, eta_estimate, grow_unstable_leaf, h_value)

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_INCONSISTENT = 0, 2, 3, 4
SCOPE = "within the tested two-shear perturbation family"

# option name -> (argparse kwargs, default)
_OPTIONS = {
    "l": (dict(type=int, help="degree of the base map"), 2),
    "phi": (dict(help='fiber function: shorthand ("0.5*sin", "cos2 - cos1", "constant:0") or JSON path'), None),
    "seed": (dict(type=int, help="master seed"), 0),
    "threads": (dict(type=int, help="worker threads (default: $SKEWLAB_THREADS or 1)"), None),
    "x": (dict(type=float, help="base point"), 0.0),
    "z": (dict(type=lambda s: [float(v) for v in s.split(",")], help="torus point x,y"), [0.0, 0.0]),
    "itinerary": (dict(help='digits of the past, e.g. "1", "10(01)", "(1)"; zero tail by default'), "(0)"),
    "N": (dict(type=int, help="series truncation depth"), None),
    "depth": (dict(type=int, help="number of backward or forward steps"), None),
    "n": (dict(type=int, help="orbit length"), 100_000),
    "M": (dict(type=int, help="number of seeded starts"), 200),
    "n_max": (dict(type=int, help="largest period or lag"), None),
    "samples": (dict(type=int, help="Monte Carlo sample count"), None),
    "max_prefix": (dict(type=int, help="longest itinerary prefix searched"), WITNESS_PREFIX),
    "grid": (dict(type=int, help="number of x grid points in the witness search"), WITNESS_GRID),
    "budget": (dict(type=int, help="candidate budget for the witness search"), SEARCH_BUDGET),
    "half_width": (dict(type=float, help="leaf half-width in x"), 0.05),
    "leaf_samples": (dict(type=int, help="initial samples along the leaf seed"), LEAF_SAMPLES),
    "m0": (dict(type=lambda s: [int(v) for v in s.split(",")], help="integer translation m,k"), [1, 0]),
    "boxes": (dict(type=lambda s: [[float(v) for v in b.split(",")] for b in s.split(";")],
                   help='rectangles "x0,x1,y0,y1;..." for A_0..A_n'), None),
    "eps": (dict(type=float, help="shear size; 0 means the unperturbed map"), 0.0),
    "q": (dict(help="vertical shear profile q(x) (shorthand); default sin(2 pi x)/(2 pi)"), None),
    "r": (dict(help="horizontal shear profile r(y) (shorthand); default sin(2 pi y)/(2 pi)"), None),
    "observables": (dict(nargs="+", help='observables such as "cos(1,1)", "0.5*sin(0,1)", "witness"'), None),
    "psi": (dict(help="first observable (mixing) or h-series integrand (hvalue)"), None),
    "chi": (dict(help="second observable"), None),
    "a": (dict(type=int, help="integer slope of tau(x) = a x + b"), 0),
    "b": (dict(help='rational intercept "m/n"'), "0"),
    "point": (dict(type=lambda s: s.split(","), help="torus point x,y (rationals allowed)"), ["0", "0"]),
    "tol": (dict(type=float, help="obstruction tolerance"), TOL_OBSTRUCTION),
    "stride": (dict(type=int, help="orbit sampling stride"), 1),
}

_COMMANDS = {
    "classify": (["l", "phi", "tol", "n_max"], "dichotomy verdict from chains, twisted chains and periodic orbits"),
    "coboundary": (["l", "phi", "tol"], "solve phi = u o T - u + C or list open chains"),
    "livsic": (["l", "phi", "n_max"], "largest periodic-orbit deviation from the mean"),
    "eta": (["l", "phi", "x", "itinerary", "N"], "certified unstable slope for a past"),
    "hvalue": (["l", "phi", "psi", "x", "itinerary", "N"], "certified h series (integrand phi' by default)"),
    "witness": (["l", "phi", "max_prefix", "grid", "budget", "N", "threads"], "certified u-accessibility witness"),
    "leaf": (["l", "phi", "z", "itinerary", "depth", "half_width", "leaf_samples"], "grow a local unstable leaf"),
    "reindex": (["l", "itinerary", "m0", "depth"], "re-index an itinerary under an integer translation"),
    "cylinder": (["l", "phi", "boxes", "samples", "seed", "threads", "eps", "q", "r"], "cylinder measure estimate"),
    "birkhoff": (["l", "phi", "z", "n", "observables", "eps", "q", "r"], "Birkhoff averages from one start"),
    "ergodicity": (["l", "phi", "M", "n", "observables", "seed", "threads", "eps", "q", "r"],
                   "time averages over seeded starts"),
    "mixing": (["l", "phi", "psi", "chi", "n_max", "samples", "seed", "threads", "eps", "q", "r"],
               "correlation decay"),
    "invariant-witness": (["l", "a", "b", "point"], "invariant function of a linear skew product"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewlab", description="Skew-product endomorphism laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (opts, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with option values")
        p.add_argument("--out", help="output directory (default: skewlab-out)")
        for opt in opts:
            kwargs, _ = _OPTIONS[opt]
            p.add_argument(f"--{opt.replace('_', '-')}", dest=opt, default=None, **kwargs)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over built-in defaults."""
    opts, _ = _COMMANDS[args.command]
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ValidationError("config must be a JSON object")
        cfg.pop("command", None)
        unknown = set(cfg) - set(opts) - {"out"}
        if unknown:
            raise ValidationError(f"options not used by {args.command}: {sorted(unknown)}")
    for opt in opts:
        value = getattr(args, opt)
        if value is not None:
            cfg[opt] = value
        elif opt not in cfg and _OPTIONS[opt][1] is not None:
            cfg[opt] = _OPTIONS[opt][1]
    if args.out is not None:
        cfg["out"] = args.out
    cfg.setdefault("out", "skewlab-out")
    try:
        validate_config(cfg)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"invalid config: {exc.message}") from exc
    return cfg


# ---------------------------------------------------------------------------
# helpers


def _function(spec, l: int | None = None, required: str = "phi") -> CircleFunction:
    if spec is None:
        raise ValidationError(f"--{required} is required")
    if isinstance(spec, dict):
        f, fl = from_json_dict(spec)
    else:
        f, fl = parse_function(spec)
    if fl is not None and l is not None and fl != l:
        raise ValidationError(f"function spec declares l={fl} but l={l} was requested")
    return f


_ITIN = re.compile(r"^([0-9,]*)(?:\(([0-9,]+)\))?$")


def parse_itinerary(text: str, l: int) -> Itinerary:
    m = _ITIN.match(text.replace(" ", ""))
    if m is None:
        raise ValidationError(f"cannot parse itinerary {text!r}")

    def digits(s):
        if not s:
            return ()
        return tuple(int(d) for d in (s.split(",") if "," in s else s) if d != "")

    tail = digits(m.group(2)) or (0,)
    return Itinerary(l, digits(m.group(1)), tail)


def _system(cfg: dict):
    phi = _function(cfg.get("phi"), cfg["l"])
    eps = float(cfg.get("eps", 0.0))
    pert = None
    if eps > 0:
        q = _function(cfg["q"], required="q") if cfg.get("q") else CircleFunction.sin(1, 1 / (2 * np.pi))
        r = _function(cfg["r"], required="r") if cfg.get("r") else CircleFunction.sin(1, 1 / (2 * np.pi))
        pert = Perturbation(q, r, eps)
    return build_system(cfg["l"], phi, pert)


def _observables(cfg: dict, names, default):
    if not names:
        return default
    out = []
    for name in names:
        if name.strip() == "witness":
            out.append(_witness_observable(cfg))
        else:
            out.append(parse_observable(name))
    return out


def _witness_observable(cfg: dict):
    phi = _function(cfg.get("phi"), cfg["l"])
    verdict = solve_coboundary(phi, cfg["l"])
    if not isinstance(verdict, Special):
        raise ValidationError("the witness observable needs phi cohomologous to a constant")
    return conjugated_witness_observable(cfg["l"], verdict.u, verdict.C)


def _threads(cfg: dict) -> int:
    return cfg.get("threads") or kernels.default_threads()


# ---------------------------------------------------------------------------
# commands; each returns (verdict line, result dict, tables, seed, shards)


def cmd_classify(cfg):
    report = classify(_function(cfg.get("phi"), cfg["l"]), cfg["l"], tol_obstruction=cfg["tol"],
                      n_max=cfg.get("n_max") or LIVSIC_PERIODS)
    return report.branch, report.to_dict(), {}, None, {}


def cmd_coboundary(cfg):
    verdict = solve_coboundary(_function(cfg.get("phi"), cfg["l"]), cfg["l"], cfg["tol"])
    result = verdict.to_dict()
    if isinstance(verdict, Special):
        result["u_spec"] = to_json_dict(verdict.u, cfg["l"])
        line = f"Special C={verdict.C:.12g} residual={verdict.residual:.3g}"
    else:
        line = f"Obstructed max|S|={verdict.witness_chains[0][1]:.6g}" if verdict.witness_chains else "Obstructed"
    return line, result, {}, None, {}


def cmd_livsic(cfg):
    res = livsic_obstruction(_function(cfg.get("phi"), cfg["l"]), cfg["l"], cfg.get("n_max") or LIVSIC_PERIODS)
    return f"max deviation {res.max_deviation:.6g}", res.to_dict(), {}, None, {}


def cmd_eta(cfg):
    l = cfg["l"]
    it = parse_itinerary(cfg["itinerary"], l)
    N = cfg.get("N") or depth_for(l)
    v = eta_estimate(_function(cfg.get("phi"), l), l, cfg["x"], it, N)
    result = {"x": cfg["x"], "itinerary": str(it), "N": N, **v.to_dict()}
    return f"eta = {float(v.value)!r} +/- {v.total_error:.3g}", result, {}, None, {}


def cmd_hvalue(cfg):
    l = cfg["l"]
    it = parse_itinerary(cfg["itinerary"], l)
    N = cfg.get("N") or depth_for(l)
    psi = _function(cfg["psi"], l, "psi") if cfg.get("psi") else _function(cfg.get("phi"), l).derivative()
    v = h_value(psi, l, it, cfg["x"], N)
    result = {"x": cfg["x"], "itinerary": str(it), "N": N, **v.to_dict()}
    return f"h = {float(v.value)!r} +/- {v.total_error:.3g}", result, {}, None, {}


def cmd_witness(cfg):
    res = accessibility_witness(_function(cfg.get("phi"), cfg["l"]), cfg["l"], max_prefix=cfg["max_prefix"],
                                grid=cfg["grid"], N=cfg.get("N"), search_budget=cfg["budget"],
                                threads=_threads(cfg))
    if isinstance(res, AccessibilityWitness):
        line = (f"witness x={res.x!r} past={res.itinerary_pair[0]} gap={res.gap.value:.6g} "
                f"angle={res.angle:.6g}")
    else:
        line = f"NotFound max gap {res.max_gap:.3g} (error floor {res.error_floor:.3g})"
        if res.budget_exhausted:
            return line, res.to_dict(), {}, None, {}, BudgetExhausted(line)
    return line, res.to_dict(), {}, None, {}


def cmd_leaf(cfg):
    l = cfg["l"]
    it = parse_itinerary(cfg["itinerary"], l)
    leaf = grow_unstable_leaf(_function(cfg.get("phi"), l), l, tuple(cfg["z"]), it, cfg.get("depth") or 30,
                              cfg["half_width"], cfg["leaf_samples"])
    tables = {"leaf": (CSV_HEADERS["leaf"], leaf.rows())}
    return f"slope at z {leaf.slope!r} (eta {float(leaf.eta.value)!r})", leaf.summary(), tables, None, {}


def cmd_reindex(cfg):
    l = cfg["l"]
    a = parse_itinerary(cfg["itinerary"], l)
    depth = cfg.get("depth") or 8
    res = reindex_itinerary(LinearModel(l), a, cfg["m0"], depth)
    rows = [(k, a.digit(k), res.digits[k - 1], *res.offsets[k]) for k in range(1, depth + 1)]
    tables = {"reindex": (CSV_HEADERS["reindex"], rows)}
    line = "b = " + "".join(str(d) for d in res.digits) + f"... ({res.itinerary})"
    return line, {"a": str(a), **res.to_dict()}, tables, None, {}


def cmd_cylinder(cfg):
    system = _system(cfg)
    boxes = cfg.get("boxes")
    if not boxes:
        raise ValidationError("--boxes is required")
    samples = cfg.get("samples") or CYLINDER_SAMPLES
    res = cylinder_measure_estimate(system, boxes, samples, cfg["seed"], _threads(cfg))
    result = {**res.to_dict(), "boxes": boxes, "eps": system.eps}
    rows = [(len(boxes) - 1, res.samples, res.hits, res.estimate, res.stderr)]
    tables = {"cylinder": (CSV_HEADERS["cylinder"], rows)}
    return (f"measure {res.estimate!r} +/- {res.stderr:.3g}", result, tables, cfg["seed"],
            {"sample_shard": SAMPLE_SHARD})


def cmd_birkhoff(cfg):
    system = _system(cfg)
    obs = _observables(cfg, cfg.get("observables"), standard_observables())
    z = tuple(cfg["z"])
    rows, result = [], []
    for o in obs:
        v = birkhoff_average(system, o, z, cfg["n"])
        rows.append((o.label, cfg["n"], v, o.space_average))
        result.append({"observable": o.label, "time_average": v, "space_average": o.space_average})
    dev = max(abs(r["time_average"] - r["space_average"]) for r in result)
    tables = {"birkhoff": (CSV_HEADERS["birkhoff"], rows)}
    return f"max |time - space| {dev:.3g}", {"z": list(z), "n": cfg["n"], "averages": result}, tables, None, {}


def cmd_ergodicity(cfg):
    system = _system(cfg)
    obs = _observables(cfg, cfg.get("observables"), standard_observables())
    rep = ergodicity_score(system, obs, cfg["M"], cfg["n"], cfg["seed"], _threads(cfg))
    tables = {"ergodicity": (CSV_HEADERS["ergodicity"], rep.rows())}
    result = {**rep.summary(), "eps": system.eps, "cone_margin": system.cone_margin,
              "min_expansion": system.min_expansion}
    line = f"deviation {rep.deviation:.3g} dispersion {rep.dispersion:.3g}"
    return line, result, tables, cfg["seed"], {"start_shard": START_SHARD}


def cmd_mixing(cfg):
    system = _system(cfg)
    psi = _observables(cfg, [cfg.get("psi") or "cos(1,1)"], None)[0]
    chi = _observables(cfg, [cfg.get("chi") or cfg.get("psi") or "cos(1,1)"], None)[0]
    n_max = cfg.get("n_max") or 20
    res = correlation_sequence(system, psi, chi, n_max, cfg.get("samples") or DEFAULT_SAMPLES, cfg["seed"],
                               _threads(cfg))
    rows = [(n, c, s) for n, c, s in zip(range(1, n_max + 1), res.C, res.stderr)]
    tables = {"mixing": (CSV_HEADERS["mixing"], rows)}
    result = {**res.summary(), "psi": psi.label, "chi": chi.label, "eps": system.eps}
    rate = "unavailable" if res.rate is None else f"{res.rate:.4g}"
    return f"C_{n_max} = {res.C[-1]:.3g} rate {rate}", result, tables, cfg["seed"], {"sample_shard": SAMPLE_SHARD}


def cmd_invariant_witness(cfg):
    w = invariant_witness_value(cfg["l"], cfg["a"], cfg["b"], tuple(cfg["point"]))
    if w.invariance_error > 1e-12:
        raise InconsistentEvidence(f"invariance error {w.invariance_error:.3g}", None)
    result = {"value": w.value, "image_value": w.image_value, "invariance_error": w.invariance_error,
              "c": w.c, "d": w.d}
    return f"psi = {w.value!r} (invariance error {w.invariance_error:.3g})", result, {}, None, {}


_HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in _COMMANDS}


def run(command: str, cfg: dict, quiet: bool = False) -> int:
    """Execute one resolved command; returns the exit code."""
    t0 = time.perf_counter()
    try:
        out = _HANDLERS[command](cfg)
    except (ValidationError, ConeViolation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (BudgetExhausted, OverflowBudget) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InconsistentEvidence, SkewLabError) as exc:
        print(f"inconsistent: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    line, result, tables, seed, shards = out[:5]
    config = {k: v for k, v in cfg.items() if k not in ("out", "threads")}
    summary = emit_report(cfg["out"], command, line, config, result, seed=seed, shards=shards,
                          timings={"total_s": time.perf_counter() - t0}, tables=tables,
                          backend=kernels.backend_name(),
                          scope=SCOPE if command in ("ergodicity", "mixing", "birkhoff", "cylinder") else None)
    if not quiet:
        print(line)
    if len(out) > 5:
        print(f"budget exhausted: {out[5]}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK if summary else EXIT_INCONSISTENT


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(args.command, cfg)


if __name__ == "__main__":
    sys.exit(main())
