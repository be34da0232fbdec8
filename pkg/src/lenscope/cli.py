"""Command-line front end: ``lenscope <task> config.json``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 output directory not writable.
"""

import argparse
import copy
import hashlib
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import aberration as ab
from . import paraxial as px
from . import wavefield as wf
from .beamkin import ELECTRON_REST_ENERGY_EV, from_kinetic_energy, from_potential_nonrelativistic
from .errors import LensError
from .fields import Glaser, LensStrength, PowerLaw, Tabulated, Uniform

TASKS = ("trace", "cardinal", "aberrations", "propagate", "crosscheck")
PARTICLES = {
    "electron": (ELECTRON_REST_ENERGY_EV, -1),
    "positron": (ELECTRON_REST_ENERGY_EV, 1),
    "proton": (938.27208816e6, 1),
}
NUMERICS_DEFAULTS = {
    "rel_tol": 1e-10,
    "quad_tol": 1e-9,
    "agreement_tol": 1e-6,
    "pb_order": 8,
    "pb_steps": 256,
    "pb_segment": "auto",
}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OUTPUT = 0, 2, 3, 4


class ConfigError(Exception):
    pass


class OutputError(Exception):
    pass


def load_schema():
    return json.loads(resources.files("lenscope").joinpath("config_schema.json").read_text())


def _path_of(err):
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<root>"


def validate_config(cfg):
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (len(list(e.absolute_path)), str(e.absolute_path)))
    if errors:
        e = errors[0]
        raise ConfigError(f"{_path_of(e)}: {e.message}")


# -- deterministic JSON -------------------------------------------------------------

def _encode(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(_encode(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        text = format(v, ".17g")
        if "e" not in text and "." not in text and "n" not in text:
            text += ".0"
        return text
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def dumps_summary(summary):
    """Stable text: keys in insertion order, floats with 17 significant digits."""
    return _encode(summary) + "\n"


# -- building blocks from the config ---------------------------------------------------

def build_beam(block):
    particle = block.get("particle", "electron")
    if isinstance(particle, str):
        rest, sign = PARTICLES[particle]
    else:
        rest, sign = particle["rest_mass_energy"], particle["charge_sign"]
    if "kinetic_energy" in block:
        return from_kinetic_energy(block["kinetic_energy"], rest, sign)
    return from_potential_nonrelativistic(block["voltage"], rest, sign)


def build_profile(block, base_dir):
    kind = block["variant"]
    if kind == "glaser":
        return Glaser(block["B0"], block["a"])
    if kind == "powerlaw":
        return PowerLaw(block["B0"], block["k_n"], block["n"], block.get("side", 1))
    if kind == "uniform":
        return Uniform(block["B0"])
    path = Path(block["csv"])
    if not path.is_absolute():
        path = base_dir / path
    if not path.is_file():
        raise ConfigError(f"field.csv: file not found: {path}")
    return Tabulated.from_csv(path, block.get("z_scale", 1.0), block.get("B_scale", 1.0))


def _require(task, *keys):
    for k in keys:
        if k not in task:
            raise ConfigError(f"task.{k}: required for task '{task['type']}'")


# -- tasks -------------------------------------------------------------------------------

def _pb_kwargs(num):
    return {"order": num["pb_order"], "n_steps": num["pb_steps"], "segment_length": num["pb_segment"]}


def _route_kwargs(route, num):
    if route == "peano_baker":
        return _pb_kwargs(num)
    if route == "ode":
        return {"rel_tol": num["rel_tol"]}
    return {}


def _image_plane(ls, task):
    if "z_im" in task:
        return float(task["z_im"])
    _require(task, "search")
    return px.find_image_plane(ls, task["z_ob"], task["search"])


def _write_csv(path, header, columns):
    arr = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, arr, delimiter=",", header=",".join(header), comments="", fmt="%.17g")


def run_trace(ls, task, num, out, formats):
    _require(task, "z_start", "z_end")
    n = task.get("n_samples", 201)
    zs = np.linspace(task["z_start"], task["z_end"], n)
    state = px.CentroidState(*task.get("initial", [0.0, 0.0, 0.0, 0.0]))
    route = task.get("route", "auto")
    trace = px.trace_centroid(ls, state, task["z_start"], zs, route, with_theta=True)
    files = []
    if "csv" in formats:
        px.write_trajectory_csv(out / "trajectory.csv", trace)
        files.append("trajectory.csv")
    zf, sf, tf = trace[-1]
    return {
        "route": px.best_route(ls, task["z_start"], zs) if route == "auto" else route,
        "n_samples": n,
        "final": {"z": zf, "x": sf.x, "y": sf.y, "px_over_p0": sf.px_over_p0,
                  "py_over_p0": sf.py_over_p0, "theta": tf},
    }, files


def _route_table(ls, zi, zs, num, routes=None):
    if routes is None:
        routes = px.available_routes(ls, zi, zs)
    results = {r: px.fundamental_pair(ls, zi, zs, r, **_route_kwargs(r, num)) for r in routes}
    L = ls.length_scale
    table = {}
    names = list(results)
    for i, r1 in enumerate(names):
        for r2 in names[i + 1:]:
            a, b = results[r1], results[r2]
            table[f"{r1}_vs_{r2}"] = {
                "g": float(np.max(np.abs(np.asarray(a.g) - b.g))),
                "h_over_L": float(np.max(np.abs(np.asarray(a.h) - b.h)) / L),
            }
    return results, table


def run_cardinal(ls, task, num, out, formats):
    _require(task, "z_ob")
    z_ob = task["z_ob"]
    z_im = _image_plane(ls, task)
    card = px.cardinal_elements(ls, z_ob, z_im)
    pair = px.fundamental_pair(ls, z_ob, z_im)
    _, table = _route_table(ls, z_ob, np.array([z_im]), num)
    files = []
    if "csv" in formats and "search" in task:
        lo, hi = task["search"]
        zs = np.linspace(max(lo, z_ob), hi, task.get("n_samples", 401))
        h = px.fundamental_pair(ls, z_ob, zs).h
        _write_csv(out / "h_scan.csv", ["z", "h"], [zs, h])
        files.append("h_scan.csv")
    return {
        "z_ob": z_ob, "z_im": z_im, "M": card.M, "f": card.f, "theta_im": card.theta_im,
        "h_at_image": pair.h, "M_times_h_prime": card.M * pair.h_prime,
        "route_agreement": table,
    }, files


def run_aberrations(ls, task, num, out, formats):
    _require(task, "z_ob")
    z_ob = task["z_ob"]
    z_im = _image_plane(ls, task)
    qt = num["quad_tol"]
    coeffs = ab.aberration_coefficients(ls, z_ob, z_im, qt)
    cs = ab.scherzer_C(ls, z_ob, z_im, qt)
    ch = ab.hawkes_C(ls, z_ob, z_im, qt)
    card = px.cardinal_elements(ls, z_ob, z_im)
    summary = {
        "z_ob": z_ob, "z_im": z_im, "M": card.M, "f": card.f, "theta_im": card.theta_im,
        "coefficients": {k: {"value": getattr(coeffs, k), "unit": ab.UNITS[k]} for k in ab.COEFFICIENT_NAMES},
        "C_forms": {"aberexpns": coeffs.C, "scherzer": cs, "hawkes": ch,
                    "rel_diff_scherzer": abs(coeffs.C - cs) / abs(coeffs.C),
                    "rel_diff_hawkes": abs(coeffs.C - ch) / abs(coeffs.C)},
    }
    if "state" in task:
        d = ab.aberration_displacement(coeffs, px.CentroidState(*task["state"]), card.M, card.f, card.theta_im)
        summary["displacement"] = {"dx": d.dx, "dy": d.dy, "dpx_over_p0": d.dpx_over_p0,
                                   "dpy_over_p0": d.dpy_over_p0}
    files = []
    if "csv" in formats:
        zs, table = ab.sample_integrands(ls, z_ob, z_im, task.get("n_samples", 401))
        for name in ab.COEFFICIENT_NAMES:
            fname = f"integrand_{name}.csv"
            _write_csv(out / fname, ["z", name], [zs, table[name]])
            files.append(fname)
    if "json" in formats:
        (out / "aberrations.json").write_text(coeffs.to_json() + "\n")
        files.append("aberrations.json")
    return summary, files


def run_propagate(ls, task, num, out, formats, beam):
    _require(task, "z_ob", "z", "grid", "gaussian")
    z_ob = task["z_ob"]
    if task["z"] == "image":
        z = _image_plane(ls, task)
    else:
        z = float(task["z"])
    n, dx = task["grid"]["n"], task["grid"]["dx"]
    g = task["gaussian"]
    psi = wf.make_gaussian(wf.GridSpec(n, n, dx, dx), beam, tuple(g.get("center", (0.0, 0.0))), g["sigma"],
                           tuple(g.get("tilt", (0.0, 0.0))), z=z_ob)
    thr = num.get("h_threshold", wf.default_h_threshold(psi))
    plan = wf.make_plan(ls, z_ob, z, thr)
    res = wf.apply_plan(psi, plan)
    m_in, m_out = wf.moments(psi), wf.moments(res)
    T = px.transfer_map(plan.pair, plan.theta)
    pred = T.matrix @ np.array([*m_in.centroid, *m_in.momentum_centroid])
    files = []
    if "csv" in formats:
        wf.write_intensity_csv(out / "intensity_in.csv", psi)
        wf.write_intensity_csv(out / "intensity_out.csv", res)
        files += ["intensity_in.csv", "intensity_out.csv"]
    if "wfld" in formats:
        wf.write_wfld(out / "psi_in.wfld", psi)
        wf.write_wfld(out / "psi_out.wfld", res)
        files += ["psi_in.wfld", "psi_out.wfld"]
    return {
        "z_ob": z_ob, "z": z, "branch": plan.branch, "theta": plan.theta,
        "g": plan.pair.g, "h": plan.pair.h,
        "norm_in": psi.norm2(), "norm_out": res.norm2(),
        "output_pitch": [res.dx, res.dy], "output_angle": res.angle,
        "centroid_out": list(m_out.centroid), "momentum_centroid_out": list(m_out.momentum_centroid),
        "transfer_map_prediction": [float(v) for v in pred],
    }, files


def run_crosscheck(ls, task, num, out, formats, seed):
    zi = task.get("z_start", task.get("z_ob"))
    if zi is None:
        raise ConfigError("task.z_start: required for task 'crosscheck'")
    _require(task, "z_end")
    zs = np.linspace(zi, task["z_end"], task.get("n_samples", 101))
    extra = task.get("random_planes", 0)
    if extra:
        rng = np.random.default_rng(seed)
        zs = np.sort(np.concatenate([zs, rng.uniform(min(zi, task["z_end"]), max(zi, task["z_end"]), extra)]))
    routes = task.get("routes")
    results, table = _route_table(ls, zi, zs, num, routes)
    tol = num["agreement_tol"]
    worst = max(max(v["g"], v["h_over_L"]) for v in table.values())
    wr = {r: float(np.max(np.abs(p.wronskian - 1.0))) for r, p in results.items()}
    files = []
    if "csv" in formats:
        header, cols = ["z"], [zs]
        for r, p in results.items():
            header += [f"g_{r}", f"h_{r}"]
            cols += [p.g, p.h]
        _write_csv(out / "routes.csv", header, cols)
        files.append("routes.csv")
    return {
        "routes": list(results), "n_planes": int(zs.size), "seed": seed, "tolerance": tol,
        "agreement": table, "max_discrepancy": worst, "wronskian_max_deviation": wr,
        "agree": bool(worst <= tol),
    }, files


# -- orchestration --------------------------------------------------------------------------

def _prepare_output(cfg, override, config_path):
    directory = override or cfg.get("output", {}).get("directory")
    if directory is None:
        directory = Path(config_path).with_suffix("").name + "_out"
    out = Path(directory)
    if not out.is_absolute() and override is None and "output" in cfg:
        out = Path(config_path).parent / out
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".lenscope_write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"cannot write to output directory {out}: {exc}")
    return out


def run(config_path, task_name=None, out_dir=None, tol=None, seed=0, stdout=None, stderr=None):
    """Execute one configured task; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        raw = Path(config_path).read_bytes()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=stderr)
        return EXIT_CONFIG
    try:
        try:
            cfg = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<root>: invalid JSON: {exc}")
        validate_config(cfg)
        task = cfg["task"]
        if task_name is not None and task_name != task["type"]:
            raise ConfigError(f"task.type: config describes '{task['type']}', command asked for '{task_name}'")
        num = dict(NUMERICS_DEFAULTS)
        num.update(cfg.get("numerics", {}))
        if tol is not None:
            if not tol > 0:
                raise ConfigError("--tol: must be positive")
            num["agreement_tol"] = tol
            num["quad_tol"] = min(num["quad_tol"], tol)
        formats = set(cfg.get("output", {}).get("formats", ["json", "csv", "wfld"]))
        beam = build_beam(cfg["beam"])
        profile = build_profile(cfg["field"], Path(config_path).parent)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except LensError as exc:
        print(f"config error: field: {exc}", file=stderr)
        return EXIT_CONFIG

    try:
        out = _prepare_output(cfg, out_dir, config_path)
    except OutputError as exc:
        print(f"output error: {exc}", file=stderr)
        return EXIT_OUTPUT

    ls = LensStrength(profile, beam)
    kind = task["type"]
    try:
        if kind == "trace":
            result, files = run_trace(ls, task, num, out, formats)
        elif kind == "cardinal":
            result, files = run_cardinal(ls, task, num, out, formats)
        elif kind == "aberrations":
            result, files = run_aberrations(ls, task, num, out, formats)
        elif kind == "propagate":
            result, files = run_propagate(ls, task, num, out, formats, beam)
        else:
            result, files = run_crosscheck(ls, task, num, out, formats, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (LensError, ArithmeticError, ValueError) as exc:
        print(f"numeric error ({type(exc).__name__}): {exc}", file=stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"output error: {exc}", file=stderr)
        return EXIT_OUTPUT

    summary = {
        "lenscope_version": __version__,
        "config_sha256": hashlib.sha256(raw).hexdigest(),
        "task": kind,
        "beam": {"p0c_eV": beam.p0c, "wavelength_mm": beam.wavelength, "alpha0_per_mm": ls.alpha0},
        "numerics": copy.deepcopy(num),
        "result": result,
        "files": sorted(files),
    }
    text = dumps_summary(summary)
    try:
        if "json" in formats:
            (out / "summary.json").write_text(text)
    except OSError as exc:
        print(f"output error: {exc}", file=stderr)
        return EXIT_OUTPUT
    stdout.write(text)
    if kind == "crosscheck" and not result["agree"]:
        print(f"routes disagree: max discrepancy {result['max_discrepancy']:.3g} > {num['agreement_tol']:.3g}",
              file=stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="lenscope", description="Round magnetic lens optics toolkit")
    ap.add_argument("--version", action="version", version=f"lenscope {__version__}")
    sub = ap.add_subparsers(dest="task", required=True)
    for name in TASKS:
        sp = sub.add_parser(name, help=f"run the {name} task")
        sp.add_argument("config", nargs="?", help="JSON run configuration")
        sp.add_argument("--config", dest="config_opt", metavar="PATH", help="JSON run configuration")
        sp.add_argument("--out", metavar="DIR", help="output directory (overrides output.directory)")
        sp.add_argument("--tol", type=float, help="agreement / quadrature tolerance override")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized sample planes")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    path = args.config_opt or args.config
    if path is None:
        print("error: a config file is required (positional or --config)", file=sys.stderr)
        return EXIT_CONFIG
    if args.config_opt and args.config and args.config_opt != args.config:
        print("error: two different config files given", file=sys.stderr)
        return EXIT_CONFIG
    if os.environ.get("LENSCOPE_THREADS"):
        try:
            int(os.environ["LENSCOPE_THREADS"])
        except ValueError:
            print("error: LENSCOPE_THREADS must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    return run(path, args.task, args.out, args.tol, args.seed)


if __name__ == "__main__":
    sys.exit(main())
