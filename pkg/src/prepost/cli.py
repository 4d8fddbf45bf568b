"""Scenario-driven command line harness.

Each subcommand runs one scenario kind from a strict JSON config and writes
its result in the owning module's format, plus a ``<output>.manifest.json``
run record.

Exit codes: 0 ok, 2 parse, 3 validation, 4 numeric, 5 I/O.
"""

import argparse
import json
import sys
import time
import warnings
from dataclasses import dataclass

from . import __version__, qcore, suter, timemachine, weakmeas
from .emit import emit_results
from .errors import IoError, ParseError, PrepostError, ValidationError

# Each entry of "required" is a tuple of alternatives; exactly one must be given.
_PAIR = {"required": [("A",), ("pre_angle", "pre"), ("post_angle", "post")]}
_POINTER_OPT = {"width": "float", "halfwidth": "float", "points": "int"}
_DESIGN_OPT = {"n_grid": "int", "ridge": "float"}

SCHEMAS = {
    "weak_value": {**_PAIR, "optional": {}, "format": "json"},
    "pointer": {
        "required": _PAIR["required"] + [("g",)],
        "optional": _POINTER_OPT,
        "format": "csv",
    },
    "ensemble": {
        "required": _PAIR["required"] + [("g",), ("m_total",)],
        "optional": {**_POINTER_OPT, "block_size": "int"},
        "format": "json",
    },
    "machine_design": {
        "required": [("n",), ("tau",), ("t_prime",), ("e_min",), ("e_max",)],
        "optional": _DESIGN_OPT,
        "format": "json",
    },
    "machine_audit": {
        "required": [("e_min",), ("e_max",)],
        "optional": {
            "machine": "str",
            "n": "int",
            "tau": "float",
            "t_prime": "float",
            "pre_angle": "float",
            "post_angle": "float",
            "delta": "float",
            "dims": "int_list",
            "states": "int",
            **_DESIGN_OPT,
        },
        "format": "csv",
    },
    "suter_sweep": {
        "required": [("pre_angle",), ("post_angle",), ("delta",)],
        "optional": {},
        "format": "csv",
    },
    "packet": {
        "required": [("pre_angle",), ("post_angle",)],
        "optional": {
            "n_modes": "int",
            "omega0": "float",
            "sigma": "float",
            "dispersion": "str",
            "delta0": "float",
            "slope": "float",
            "phase_span": "float",
        },
        "format": "csv",
    },
}

TYPES = {
    "A": "operator",
    "pre": "state",
    "post": "state",
    "pre_angle": "float",
    "post_angle": "float",
    "g": "float",
    "m_total": "int",
    "n": "int",
    "tau": "float",
    "t_prime": "float",
    "e_min": "float",
    "e_max": "float",
    "delta": "float_or_list",
}

AUDIT_MACHINES = {"design": ("n", "tau", "t_prime"), "suter": ("pre_angle", "post_angle", "delta")}


@dataclass
class Scenario:
    kind: str
    parameters: dict
    seed: int = 0
    output_path: str | None = None
    format: str | None = None


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_type(key, value, kind):
    ok = {
        "float": lambda v: _is_number(v),
        "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "str": lambda v: isinstance(v, str),
        "int_list": lambda v: isinstance(v, list) and v and all(isinstance(x, int) and not isinstance(x, bool) for x in v),
        "float_or_list": lambda v: _is_number(v) or (isinstance(v, list) and v and all(_is_number(x) for x in v)),
        "state": _valid_pairs_vector,
        "operator": _valid_operator,
    }[kind](value)
    if not ok:
        raise ValidationError(key, f"{key}: expected {kind}, got {value!r}")


def _valid_pairs_vector(v):
    return (
        isinstance(v, list)
        and len(v) > 0
        and all(isinstance(p, list) and len(p) == 2 and all(_is_number(x) for x in p) for p in v)
    )


def _valid_operator(v):
    if isinstance(v, str):
        return v in qcore.NAMED_OPERATORS
    return isinstance(v, list) and len(v) > 0 and all(_valid_pairs_vector(row) and len(row) == len(v) for row in v)


def validate(kind, params):
    if kind not in SCHEMAS:
        raise ValidationError("kind", f"unknown scenario kind {kind!r}; known: {sorted(SCHEMAS)}")
    schema = SCHEMAS[kind]
    allowed = {k for alts in schema["required"] for k in alts} | set(schema["optional"])
    for key in params:
        if key not in allowed:
            raise ValidationError(key, f"unknown key {key!r} for {kind}")
    for alts in schema["required"]:
        given = [k for k in alts if k in params]
        if not given:
            raise ValidationError(alts[0], f"missing required key {alts[0]!r}")
        if len(given) > 1:
            raise ValidationError(given[1], f"give only one of {list(alts)}")
    for key, value in params.items():
        _check_type(key, value, schema["optional"].get(key) or TYPES[key])
    if kind == "machine_audit":
        machine = params.get("machine", "design")
        if machine not in AUDIT_MACHINES:
            raise ValidationError("machine", f"machine must be one of {sorted(AUDIT_MACHINES)}")
        for key in AUDIT_MACHINES[machine]:
            if key not in params:
                raise ValidationError(key, f"missing required key {key!r} for machine={machine}")
    if kind == "packet" and params.get("dispersion", "linear") not in ("linear", "constant"):
        raise ValidationError("dispersion", "dispersion must be 'linear' or 'constant'")


def parse_scenario(config_text, kind=None):
    """Parse and strictly validate a JSON scenario.

    ``kind`` (from the subcommand) fills in or must match the config's own.
    """
    try:
        doc = json.loads(config_text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object", 1, 1)
    doc = dict(doc)
    cfg_kind = doc.pop("kind", None)
    if kind and cfg_kind and cfg_kind != kind:
        raise ValidationError("kind", f"config kind {cfg_kind!r} does not match command {kind!r}")
    kind = kind or cfg_kind
    if kind is None:
        raise ValidationError("kind", "missing required key 'kind'")
    seed = doc.pop("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ValidationError("seed", "seed must be a non-negative integer")
    out = doc.pop("output_path", None)
    if out is not None and not isinstance(out, str):
        raise ValidationError("output_path", "output_path must be a string")
    fmt = doc.pop("format", None)
    if fmt not in (None, "csv", "json"):
        raise ValidationError("format", "format must be csv or json")
    validate(kind, doc)
    return Scenario(kind, doc, seed, out, fmt)


def _operator(spec):
    if isinstance(spec, str):
        return qcore.named_operator(spec)
    return qcore.HermitianOperator(qcore.from_pairs(spec))


def _pair(p):
    pre = suter.polarization_deg(p["pre_angle"]) if "pre_angle" in p else qcore.normalize(qcore.from_pairs(p["pre"]))
    post = suter.polarization_deg(p["post_angle"]) if "post_angle" in p else qcore.normalize(qcore.from_pairs(p["post"]))
    return weakmeas.PrePostPair(pre, post)


def _pointer(p):
    return weakmeas.GaussianPointer(
        p.get("width", 1.0), p.get("halfwidth"), p.get("points", weakmeas.DEFAULT_POINTS)
    )


def _band(p):
    return timemachine.BandSpec(p["e_min"], p["e_max"], p.get("n_grid", 4096))


def _design(p):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", timemachine.IllConditioned)
        return timemachine.design_coefficients(p["n"], p["tau"], p["t_prime"], _band(p), p.get("ridge", 1e-12))


def _run_weak_value(s):
    aw = weakmeas.weak_value(_operator(s.parameters["A"]), _pair(s.parameters))
    sign = "+" if aw.imag >= 0 else "-"
    line = f"A_w = {aw.real:.4f} {sign} {abs(aw.imag):.4f}i"
    rec = {"re": aw.real, "im": aw.imag, "abs": abs(aw)}
    return rec, [rec], line


def _run_pointer(s):
    p = s.parameters
    dist = weakmeas.pointer_final_distribution(_operator(p["A"]), _pair(p), _pointer(p), p["g"])
    summary = {"mean": dist.mean, "variance": dist.variance, "postselection_probability": dist.postselection_probability}
    line = f"mean = {dist.mean:.6g}  variance = {dist.variance:.6g}  p = {dist.postselection_probability:.6g}"
    return {**summary, "grid": dist.records()}, dist.records(), line


def _run_ensemble(s):
    p = s.parameters
    stats = weakmeas.monte_carlo_run(
        _operator(p["A"]), _pair(p), _pointer(p), p["g"], p["m_total"], s.seed,
        block_size=p.get("block_size", weakmeas.DEFAULT_BLOCK),
    )
    rec = stats.to_json()
    line = f"accepted {stats.m_acc}/{stats.m_total}  mean = {stats.sample_mean:.6g} +- {stats.sample_stderr:.3g}"
    return rec, [rec], line


def _run_machine_design(s):
    des = _design(s.parameters)
    classical, t_weak = timemachine.classical_time_bound(des.gamma, des.tau)
    rows = [{"n": k, "re": g.real, "im": g.imag} for k, g in enumerate(des.gamma.tolist())]
    line = (
        f"residual = {des.residual:.3e}  conditioning = {des.conditioning:.3e}  "
        f"weak_time = {t_weak:.6g}  classical = {classical}"
    )
    return des.to_json(), rows, line


def _run_machine_audit(s):
    p = s.parameters
    band = _band(p)
    if p.get("machine", "design") == "suter":
        pre, post = suter.polarization_deg(p["pre_angle"]), suter.polarization_deg(p["post_angle"])
        spec = suter.map_to_machine(pre, post, p["delta"])
    else:
        spec = timemachine.machine_from_design(_design(p))
    systems = timemachine.standard_systems(band, tuple(p.get("dims", [2, 4, 8])), seed=s.seed)
    report = timemachine.universality_audit(spec, systems, p.get("states", 100), band, s.seed)
    summary = report.summary()
    q = summary["fidelity_quantiles"]
    line = f"fidelity min = {q['0.0']:.6f}  median = {q['0.5']:.6f}  rows = {summary['n_rows']}"
    return {"t_prime": report.t_prime, "summary": summary, "rows": report.records()}, report.records(), line


def _run_suter_sweep(s):
    p = s.parameters
    deltas = p["delta"] if isinstance(p["delta"], list) else [p["delta"]]
    rows = suter.sweep(suter.polarization_deg(p["pre_angle"]), suter.polarization_deg(p["post_angle"]), deltas)
    line = "  ".join(f"delta={r['delta']:.4g}: gain={r['gain']:.6g}" for r in rows[:4])
    return rows, rows, line


def _run_packet(s):
    p = s.parameters
    pre, post = suter.polarization_deg(p["pre_angle"]), suter.polarization_deg(p["post_angle"])
    omega0, sigma = p.get("omega0", 1.0), p.get("sigma", 0.1)
    delta0 = p.get("delta0", 0.01)
    if p.get("dispersion", "linear") == "constant":
        disp = suter.Dispersion("constant", delta0, 0.0, omega0)
    elif "slope" in p:
        disp = suter.Dispersion("linear", delta0, p["slope"], omega0)
    else:
        disp = suter.linear_dispersion_for_span(pre, post, omega0, sigma, delta0, p.get("phase_span", 0.5))
    wp = suter.gaussian_packet(p.get("n_modes", 64), omega0, sigma, disp)
    out = suter.wavepacket_transmit(wp, pre, post)
    dist = suter.distortion_metric(out, suter.ideal_advanced_packet(wp, pre, post))
    line = f"distortion = {dist:.6g}  throughput = {out.throughput:.6g}"
    return {"distortion": dist, "throughput": out.throughput, "modes": out.records()}, out.records(), line


RUNNERS = {
    "weak_value": _run_weak_value,
    "pointer": _run_pointer,
    "ensemble": _run_ensemble,
    "machine_design": _run_machine_design,
    "machine_audit": _run_machine_audit,
    "suter_sweep": _run_suter_sweep,
    "packet": _run_packet,
}

EXTENSIONS = {"csv": ".csv", "json": ".json"}


def run_scenario(s, stdout=None):
    """Run a validated scenario, write its artifact and manifest.

    Returns the artifact path. Module errors propagate to the caller.
    """
    stdout = stdout or sys.stdout
    t0 = time.perf_counter()
    json_obj, csv_rows, line = RUNNERS[s.kind](s)
    fmt = s.format or SCHEMAS[s.kind]["format"]
    path = s.output_path or f"{s.kind}{EXTENSIONS[fmt]}"
    emit_results(json_obj if fmt == "json" else csv_rows, fmt, path)
    manifest = {
        "scenario": {"kind": s.kind, **s.parameters, "seed": s.seed, "output_path": path, "format": fmt},
        "seed": s.seed,
        "artifact_version": __version__,
        "wall_time": time.perf_counter() - t0,
    }
    emit_results(manifest, "json", f"{path}.manifest.json")
    print(line, file=stdout)
    return path


def _error_json(exc):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
    if isinstance(exc, ValidationError):
        doc["key"] = exc.key
    if isinstance(exc, ParseError):
        doc["line"], doc["column"] = exc.line, exc.column
    return json.dumps(doc)


COMMANDS = {
    ("weak-value",): "weak_value",
    ("pointer",): "pointer",
    ("ensemble",): "ensemble",
    ("machine", "design"): "machine_design",
    ("machine", "audit"): "machine_audit",
    ("suter", "sweep"): "suter_sweep",
    ("packet",): "packet",
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON scenario file")
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--out", metavar="PATH", help="artifact path (manifest goes to PATH.manifest.json)")
    common.add_argument("--format", choices=("csv", "json"), help="artifact format")
    common.add_argument(
        "-p", "--param", action="append", default=[], metavar="KEY=VALUE",
        help="set a scenario parameter; VALUE is parsed as JSON, else taken as a string",
    )
    epilog = (
        "exit codes: 0 ok, 2 parse error, 3 validation error, "
        "4 numeric error (e.g. OrthogonalPostSelection), 5 I/O error.\n"
        "PREPOST_THREADS caps Monte Carlo worker threads (0 = auto)."
    )
    parser = argparse.ArgumentParser(
        prog="prepost",
        description="Pre-/post-selected ensembles, weak measurements and time-translation machines.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    groups = {}
    for words, kind in COMMANDS.items():
        if len(words) == 1:
            sp = sub.add_parser(words[0], parents=[common], help=f"run a {kind} scenario", epilog=epilog)
        else:
            if words[0] not in groups:
                gp = sub.add_parser(words[0], help=f"{words[0]} scenarios")
                groups[words[0]] = gp.add_subparsers(dest="action", required=True)
            sp = groups[words[0]].add_parser(words[1], parents=[common], help=f"run a {kind} scenario", epilog=epilog)
        sp.set_defaults(kind=kind)
    return parser


def _param_overrides(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise ParseError(f"--param expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        doc = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise IoError(f"cannot read {args.config}: {exc}") from exc
            parse_scenario(text, args.kind)  # reports parse errors against the file itself
            doc = json.loads(text)
        doc.update(_param_overrides(args.param))
        if args.seed is not None:
            doc["seed"] = args.seed
        if args.out:
            doc["output_path"] = args.out
        if args.format:
            doc["format"] = args.format
        scenario = parse_scenario(json.dumps(doc), args.kind)
        run_scenario(scenario)
    except PrepostError as exc:
        print(_error_json(exc), file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        err = ValidationError(type(exc).__name__, str(exc))
        print(_error_json(err), file=sys.stderr)
        return err.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
