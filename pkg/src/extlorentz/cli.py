"""Command-line entry point.

Configuration is an INI file whose ``[section] key`` pairs map to dotted
keys (``particle.q``, ``field.preset``, ...). Every key can be overridden
with a long flag of the same dotted name, e.g. ``--numeric.h 1e-3``.

Exit codes: 0 success, 1 configuration error, 2 identity breach,
3 runtime abort.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import re
import sys

import numpy as np

from . import __version__
from .boost import BoostSpec, first_order_check
from .chern import DISPLAY_LABELS, curvature_trace_form, field_form, exactness_check, to_display_basis
from .connection import Placement, build_connection, format_table, table_rows, torsion, torsion_epsilon_sum
from .curvature import SCHEMA_VERSION, continuity_residual, symmetry_report
from .errors import ConfigError, IntegrationAbort, SingularityError
from .fields import C_LIGHT, PRESETS, ParticleParams, preset
from .geodesic import GeodesicState, decay_experiment, integrate

EXIT_OK, EXIT_CONFIG, EXIT_BREACH, EXIT_ABORT = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# value parsers


def _float(text):
    return float(text)


def _opt_float(text):
    text = text.strip()
    return None if text.lower() in ("", "none") else float(text)


def _int(text):
    return int(text)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _vec(n):
    def parse(text):
        vals = [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
        if len(vals) != n:
            raise ValueError(f"expected {n} comma-separated numbers")
        return np.array(vals)
    return parse


def _opt_vec3(text):
    return None if text.strip().lower() in ("", "none") else _vec(3)(text)


def _matrix34(text):
    rows = [r for r in text.split(";") if r.strip()]
    if len(rows) != 3:
        raise ValueError("expected 3 rows separated by ';'")
    return np.array([_vec(4)(r) for r in rows])


def _points(text):
    return [_vec(4)(r) for r in text.split(";") if r.strip()]


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {list(options)}")
        return t
    return parse


def _placement(text):
    return Placement.parse(text)


# dotted key -> (parser, default, help)
SCHEMA = {
    "particle.q": (_float, "1.0", "charge [statC]"),
    "particle.m": (_float, "1.0", "mass [g]"),
    "particle.c": (_float, repr(C_LIGHT), "speed of light [cm/s]"),
    "particle.tau0": (_opt_float, "none", "proper lifetime [s] (decay)"),
    "field.preset": (_choice(*PRESETS), "uniform_E", "field preset name"),
    "field.e": (_vec(3), "0,0,0", "E vector (uniform presets) or E offset (linear_gradient)"),
    "field.b": (_vec(3), "0,0,0", "B vector (uniform presets) or B offset (linear_gradient)"),
    "field.e0": (_float, "1.0", "plane_wave amplitude"),
    "field.k": (_float, "1.0", "plane_wave wavenumber [1/cm]"),
    "field.q_src": (_float, "1.0", "coulomb source charge"),
    "field.center": (_vec(3), "0,0,0", "coulomb source position"),
    "field.grad_e": (_matrix34, "0,0,0,0;0,0,0,0;0,0,0,0", "dE_i/dx^a rows i=x,y,z (linear_gradient)"),
    "field.grad_b": (_matrix34, "0,0,0,0;0,0,0,0;0,0,0,0", "dB_i/dx^a rows i=x,y,z (linear_gradient)"),
    "connection.placement": (_placement, "full", "lorentz_only | full | alternative_full"),
    "numeric.h": (_opt_float, "none", "integration step in proper time [s]"),
    "numeric.tau_end": (_float, "1.0", "final proper time [s]"),
    "numeric.tolerance": (_float, "1e-9", "relative residual tolerance for verify"),
    "numeric.fd_h": (_float, "1e-3", "finite-difference step for chern"),
    "grid.point": (_vec(4), "0,0,0,0", "evaluation point for table and chern"),
    "grid.points": (_points, "", "explicit verify points 'x0,x1,x2,x3; ...'"),
    "grid.random": (_int, "20", "number of seeded random verify points"),
    "grid.seed": (_int, "0", "random seed"),
    "grid.extent": (_float, "1.0", "random points drawn from [-extent, extent]^4"),
    "table.torsion": (_bool, "false", "also dump the torsion table"),
    "simulate.x": (_vec(4), "0,0,0,0", "initial position (x0=ct, x, y, z)"),
    "simulate.u": (_vec(4), "1,0,0,0", "initial u^mu = dx^mu/ds"),
    "simulate.rhs": (_choice("geodesic", "classical"), "geodesic", "equation of motion"),
    "decay.speed": (_float, "0.0", "launch speed [cm/s]"),
    "decay.direction": (_opt_vec3, "none", "launch axis (default: along E)"),
    "boost.axis": (_int, "3", "boost axis 1, 2 or 3"),
    "boost.beta": (_float, "0.0", "v/c"),
    "output.path": (str, "-", "output file ('-' for stdout)"),
    "output.format": (_choice("text", "records"), "text", "text or records (JSON lines)"),
}

COMMON_FLAGS = {
    "out": "output.path",
    "format": "output.format",
    "seed": "grid.seed",
    "tolerance": "numeric.tolerance",
}


def read_config_file(path):
    """Raw ``{dotted_key: (text, location)}`` from an INI file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None, default_section="\0none")
    parser.optionxform = str
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    # line numbers for messages
    lines = {}
    section = None
    for n, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            lines.setdefault(f"{section}.{m.group(1)}", n)
    raw = {}
    for sec in parser.sections():
        for key, value in parser.items(sec):
            dotted = f"{sec}.{key}"
            loc = f"{path}:{lines.get(dotted, '?')}"
            if dotted not in SCHEMA:
                raise ConfigError(f"{loc}: unknown key {dotted!r}")
            raw[dotted] = (value, loc)
    return raw


def resolve_config(args) -> dict:
    """Defaults, then the config file, then command-line flags."""
    raw = {k: (spec[1], "default") for k, spec in SCHEMA.items()}
    if args.config:
        raw.update(read_config_file(args.config))
    ns = vars(args)
    for key in SCHEMA:
        if ns.get(key) is not None:
            raw[key] = (ns[key], f"--{key}")
    for flag, key in COMMON_FLAGS.items():
        if ns.get(flag) is not None:
            raw[key] = (str(ns[flag]), f"--{flag}")
    cfg = {}
    for key, (text, loc) in raw.items():
        try:
            cfg[key] = SCHEMA[key][0](text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{loc}: invalid value for {key!r}: {exc}") from None
    cfg["_sources"] = {k: loc for k, (_, loc) in raw.items()}
    return cfg


def particle_from(cfg) -> ParticleParams:
    try:
        return ParticleParams(cfg["particle.q"], cfg["particle.m"], cfg["particle.c"], cfg["particle.tau0"])
    except ValueError as exc:
        raise ConfigError(f"particle: {exc}") from None


def model_from(cfg):
    name = cfg["field.preset"]
    params = {
        "uniform_E": {"e": cfg["field.e"]},
        "uniform_B": {"b": cfg["field.b"]},
        "crossed_EB": {"e": cfg["field.e"], "b": cfg["field.b"]},
        "plane_wave": {"e0": cfg["field.e0"], "k": cfg["field.k"]},
        "coulomb": {"q_src": cfg["field.q_src"], "center": cfg["field.center"]},
        "linear_gradient": {"e0": cfg["field.e"], "b0": cfg["field.b"],
                            "grad_e": cfg["field.grad_e"], "grad_b": cfg["field.grad_b"]},
    }[name]
    try:
        return preset(name, **params)
    except ValueError as exc:
        raise ConfigError(f"field: {exc}") from None


def grid_from(cfg):
    pts = list(cfg["grid.points"])
    n = cfg["grid.random"]
    if n < 0:
        raise ConfigError(f"{cfg['_sources']['grid.random']}: grid.random must be >= 0")
    if n:
        rng = np.random.default_rng(cfg["grid.seed"])
        ext = cfg["grid.extent"]
        pts.extend(rng.uniform(-ext, ext, size=(n, 4)))
    if not pts:
        raise ConfigError("grid: no points (set grid.points or grid.random > 0)")
    return pts


def header(cfg, command):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "seed": cfg["grid.seed"],
        "preset": cfg["field.preset"],
        "placement": cfg["connection.placement"].value,
    }


class Output:
    def __init__(self, cfg):
        self.path = cfg["output.path"]
        self.records = cfg["output.format"] == "records"
        self.parts = []

    def write(self, text):
        self.parts.append(text)

    def record(self, obj):
        self.parts.append(json.dumps(obj) + "\n")

    def header(self, hdr):
        if self.records:
            self.record({"record": "header", **hdr})
        else:
            for k, v in hdr.items():
                self.write(f"# {k}={v}\n")

    def close(self):
        data = "".join(self.parts)
        if self.path == "-":
            sys.stdout.write(data)
        else:
            with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(data)


def _fmt_vec(v):
    return ",".join(repr(float(x)) for x in v)


# ---------------------------------------------------------------------------
# commands


def cmd_table(cfg) -> int:
    pp = particle_from(cfg)
    model = model_from(cfg)
    pl = cfg["connection.placement"]
    p = cfg["grid.point"]
    g = build_connection(model(p), pp, pl)
    out = Output(cfg)
    out.header({**header(cfg, "table"), "point": _fmt_vec(p)})
    tables = [("connection", table_rows(g, pl))]
    if cfg["table.torsion"]:
        tables.append(("torsion", table_rows(torsion(g), pl, torsion_only_upper=True)))
    for name, rows in tables:
        if out.records:
            if not rows:
                out.record({"record": name, "empty": True})
            for i, j, k, re_, im_ in rows:
                out.record({"record": name, "i": i, "j": j, "k": k, "re": re_, "im": im_})
        else:
            out.write(f"# {name}\n")
            out.write(format_table(rows))
    out.close()
    return EXIT_OK


VERIFY_CHECKS = (
    "coulomb_identity",
    "ampere_identity",
    "faraday_identity",
    "faraday_symmetry",
    "ricci_imaginary",
    "torsion_divb_identity",
    "continuity_je",
    "continuity_law",
)


def _verify_point(model, p, pp, pl):
    rep = symmetry_report(model, p, pp, pl)
    sc = rep.scale
    res = {
        "coulomb_identity": rep.residual_trace / sc,
        "ampere_identity": float(np.max(rep.residual_mixed)) / sc,
        "faraday_identity": float(np.max(rep.residual_spatial)) / sc,
        "faraday_symmetry": float(np.max(np.abs(rep.spatial))) / sc,
        "ricci_imaginary": max(abs(rep.trace.imag), float(np.max(np.abs(rep.mixed.imag))),
                               float(np.max(np.abs(rep.spatial.imag)))) / sc,
    }
    if pl is not Placement.LORENTZ_ONLY:
        eps = torsion_epsilon_sum(model, p, pp, pl)
        res["torsion_divb_identity"] = abs(eps - 2.0 * pp.kappa * model(p).div_b) / sc
    cont = continuity_residual(model, p, pp)
    res["continuity_je"] = abs(cont.j_dot_e) / max(1.0, cont.je_scale)
    if model.maxwell:
        res["continuity_law"] = abs(cont.residual) / max(1.0, cont.scale)
    return rep, res


def cmd_verify(cfg) -> int:
    pp = particle_from(cfg)
    model = model_from(cfg)
    pl = cfg["connection.placement"]
    tol = cfg["numeric.tolerance"]
    if not tol >= 0.0:
        raise ConfigError(f"{cfg['_sources']['numeric.tolerance']}: tolerance must be >= 0")
    pts = grid_from(cfg)
    out = Output(cfg)
    out.header({**header(cfg, "verify"), "points": len(pts), "tolerance": repr(tol)})
    results = []
    for idx, p in enumerate(pts):
        rep, res = _verify_point(model, p, pp, pl)
        results.append((idx, p, rep, res))
    results.sort(key=lambda r: r[0])
    worst = {}
    for idx, p, rep, res in results:
        rec = {"record": "point", "index": idx, "point": [float(x) for x in p]}
        rec.update(rep.to_records())
        rec.update({f"check_{k}": float(v) for k, v in res.items()})
        if out.records:
            out.record(rec)
        else:
            out.write(f"point {idx} {_fmt_vec(p)}\n")
            out.write("".join(f"  {k}={v!r}\n" for k, v in rec.items() if k not in ("record", "index", "point")))
        for k, v in res.items():
            if k not in worst or v > worst[k][0]:
                worst[k] = (v, idx)
    # one tolerance for every check, so the largest residual is the worst offender
    breaches = sorted(((v, k, i) for k, (v, i) in worst.items() if not v <= tol), reverse=True)
    summary = {f"max_{k}": worst[k][0] for k in VERIFY_CHECKS if k in worst}
    status = "breach" if breaches else "pass"
    if out.records:
        out.record({"record": "summary", "status": status, **summary})
    else:
        out.write("# summary\n")
        out.write("".join(f"{k}={v!r}\n" for k, v in summary.items()))
        out.write(f"status={status}\n")
    out.close()
    if breaches:
        value, name, idx = breaches[0]
        print(f"identity breach: {name} residual {value!r} exceeds tolerance {tol!r} at point {idx}",
              file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def _abort(exc: IntegrationAbort) -> int:
    print(f"integration aborted: {exc}", file=sys.stderr)
    if exc.last_state is not None:
        print(f"last good state tau={exc.tau!r} state={_fmt_vec(exc.last_state)}", file=sys.stderr)
    return EXIT_ABORT


def cmd_simulate(cfg) -> int:
    pp = particle_from(cfg)
    model = model_from(cfg)
    st = GeodesicState(cfg["simulate.x"], cfg["simulate.u"])
    try:
        traj = integrate(cfg["simulate.rhs"], st, model, pp, cfg["numeric.tau_end"], cfg["numeric.h"],
                         cfg["connection.placement"])
    except IntegrationAbort as exc:
        return _abort(exc)
    except ValueError as exc:
        raise ConfigError(f"simulate: {exc}") from None
    hdr = header(cfg, "simulate")
    out = Output(cfg)
    if out.records:
        out.header({**hdr, "h": traj.h, "rhs": traj.rhs})
        for tau, row in zip(traj.tau, traj.states):
            out.record({"record": "sample", "tau": float(tau), "t": float(row[0] / pp.c),
                        "x": float(row[1]), "y": float(row[2]), "z": float(row[3]),
                        "u0": float(row[4]), "u1": float(row[5]), "u2": float(row[6]), "u3": float(row[7])})
        out.record({"record": "summary", **traj.drift()})
    else:
        out.write(traj.to_csv(hdr))
    out.close()
    return EXIT_OK


def cmd_decay(cfg) -> int:
    pp = particle_from(cfg)
    if pp.tau0 is None:
        raise ConfigError("decay: particle.tau0 is required")
    model = model_from(cfg)
    if not model.uniform:
        raise ConfigError("decay: the field must be uniform")
    e = model(np.zeros(4)).e
    try:
        rep = decay_experiment(e, cfg["decay.speed"], pp, cfg["numeric.tau_end"], cfg["numeric.h"],
                               cfg["decay.direction"], cfg["connection.placement"])
    except IntegrationAbort as exc:
        return _abort(exc)
    except ValueError as exc:
        raise ConfigError(f"decay: {exc}") from None
    out = Output(cfg)
    hdr = header(cfg, "decay")
    if out.records:
        out.header(hdr)
        for row in rep.table():
            out.record({"record": "sample", **{c: float(v) for c, v in zip(rep.COLUMNS, row)}})
    else:
        out.write(rep.to_csv(hdr))
    out.close()
    return EXIT_OK


def cmd_boost(cfg) -> int:
    pp = particle_from(cfg)
    model = model_from(cfg)
    if not model.uniform:
        raise ConfigError("boost: the field must be uniform")
    try:
        bs = BoostSpec(cfg["boost.axis"], cfg["boost.beta"])
        s = model(np.zeros(4))
        rep = first_order_check(s.e, s.b, bs, pp, cfg["connection.placement"])
    except ValueError as exc:
        raise ConfigError(f"boost: {exc}") from None
    out = Output(cfg)
    out.header({**header(cfg, "boost"), "axis": bs.axis, "beta": repr(bs.beta), "bound": repr(rep.bound)})
    if out.records:
        for row in rep.rows():
            out.record({"record": "row", **row})
    else:
        cols = ("row", "initial", "observed", "expected", "expected_gamma", "deviation")
        out.write(" ".join(cols) + "\n")
        for row in rep.rows():
            out.write(" ".join([row["row"]] + [repr(row[c]) for c in cols[1:]]) + "\n")
    out.close()
    return EXIT_OK


def cmd_chern(cfg) -> int:
    pp = particle_from(cfg)
    model = model_from(cfg)
    p = cfg["grid.point"]
    try:
        tf = curvature_trace_form(model, p, pp, cfg["connection.placement"])
        ex = exactness_check(model, p, cfg["numeric.fd_h"], pp, cfg["connection.placement"])
    except ValueError as exc:
        raise ConfigError(f"chern: {exc}") from None
    ref = field_form(model, p)
    trace_disp = to_display_basis(tf.normalized, pp.c)
    field_disp = to_display_basis(ref, pp.c)
    out = Output(cfg)
    out.header({**header(cfg, "chern"), "point": _fmt_vec(p), "fd_h": repr(ex.h)})
    if out.records:
        for n, lab in enumerate(DISPLAY_LABELS):
            out.record({"record": "coefficient", "basis": lab, "trace_re": float(trace_disp[n].real),
                        "trace_im": float(trace_disp[n].imag), "field_form": float(field_disp[n])})
        out.record({"record": "exactness", "deviation": ex.deviation, "deviation_half": ex.deviation_half,
                    "ratio": ex.ratio})
    else:
        out.write("basis trace_re trace_im field_form\n")
        for n, lab in enumerate(DISPLAY_LABELS):
            out.write(f"{lab} {float(trace_disp[n].real)!r} {float(trace_disp[n].imag)!r} {float(field_disp[n])!r}\n")
        out.write(f"# exactness deviation={ex.deviation!r} deviation_half={ex.deviation_half!r} "
                  f"ratio={ex.ratio!r}\n")
    out.close()
    return EXIT_OK


COMMANDS = {
    "table": (cmd_table, "dump connection (and torsion) components at a point"),
    "verify": (cmd_verify, "run the Ricci, torsion and continuity identity checks on a grid"),
    "simulate": (cmd_simulate, "integrate a test-particle trajectory"),
    "decay": (cmd_decay, "decay-rate asymmetry for opposite launches in a uniform E"),
    "boost": (cmd_boost, "boosted observable components against first-order field transforms"),
    "chern": (cmd_chern, "trace of the curvature 2-form and its exactness"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="extlorentz", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext, description=helptext)
        sp.add_argument("--config", metavar="PATH", help="INI configuration file")
        sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        sp.add_argument("--format", choices=("text", "records"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tolerance", type=float)
        for key, (_, default, helptext_k) in SCHEMA.items():
            sp.add_argument(f"--{key}", dest=key, metavar="VALUE", help=f"{helptext_k} [{default}]")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve_config(args)
        code = COMMANDS[args.command][0](cfg)
        sys.stdout.flush()
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularityError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except BrokenPipeError:
        # reader went away (e.g. piped into head); stop quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
