"""Batch front end: `hfh <command>` reads JSON configs and writes CSV/JSON artifacts.

Subcommands map one-to-one onto the computational capabilities: ``bands``
(dispersion sweep), ``groupvel`` (finite-difference group velocity),
``effective`` (transport coefficients), ``couple`` (supercell coupling
averages), ``ergodic`` (window averages), ``simulate`` (fine-grid envelope
validation), ``check`` (built-in invariant suite).

Medium descriptor schema (JSON)::

    {
      "cell": [1.0],            # cell side lengths
      "kind": "scalar",         # scalar | vector | schrodinger
      "cutoff": 16,             # Fourier cutoff of the stored medium
      "a": <field spec>,        # scalar kind; isotropic spec or
                                #   {"type": "matrix", "entries": [[...]]}
      "b": <field spec>,
      # vector kind adds:  "n": 2,
      #   "a": {"type": "tensor4", "terms": [{"ijkl": [i,j,k,l], "field": spec}]}
      # schrodinger kind:  "mass": 0.5, "charge": 1.0,
      #   "potential": spec, "magnetic": [spec per axis] (optional)
    }

Field specs: a number, {"type": "constant", "value": v},
{"type": "piecewise", "breaks": [...], "values": [...]},
{"type": "cosine", "mean": m, "harmonics": [{"n": [...], "amp": a, "phase": p}]},
{"type": "fourier", "terms": [{"n": [...], "re": x, "im": y}]}.

All floating-point output is printed with 17 significant digits, rows in a
fixed deterministic order, LF line endings, UTF-8; repeated runs with the
same config produce byte-identical artifacts.

Exit codes: 0 success, 1 validation/config error, 2 numerical failure,
64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, bands, bloch, checks, effective, ergodic, medium, simulate
from .errors import NumericalError, ValidationError
from .fourier import Cell, FourierField


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _config_digest(obj) -> str:
    payload = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def _write_csv(path, header, rows, meta):
    lines = [f"# {k}={meta[k]}" for k in sorted(meta)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8", newline="\n")


def _load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _parse_k(text, dims, flag):
    try:
        parts = [float(v) for v in str(text).split(",")]
    except ValueError as exc:
        raise ValidationError(f"{flag}: expected comma-separated floats, got {text!r}") from exc
    if len(parts) != dims:
        raise ValidationError(f"{flag}: expected {dims} component(s), got {len(parts)}")
    return np.asarray(parts)


def _meta(args, desc) -> dict:
    return {"tool": f"hfh {__version__}", "config": _config_digest(desc), "command": args.command}


# ---------------------------------------------------------------------------
# subcommands


def _cmd_bands(args):
    desc = _load_config(args.config)
    med = medium.medium_from_descriptor(desc)
    dims = med.cell.dims
    k0 = _parse_k(args.k_start, dims, "--k-start")
    k1 = _parse_k(args.k_end, dims, "--k-end")
    table = bands.sweep_path(med, k0, k1, args.samples, args.band, args.cutoff)
    header = [f"k_{i + 1}" for i in range(dims)] + ["omega", "band", "gap"]
    meta = _meta(args, desc)
    meta["lipschitz"] = _fmt(table.lipschitz)
    _write_csv(args.out, header, bands.table_rows(table), meta)
    print(f"wrote {args.out} ({len(table)} rows)")
    return 0


def _cmd_groupvel(args):
    desc = _load_config(args.config)
    med = medium.medium_from_descriptor(desc)
    k = _parse_k(args.k, med.cell.dims, "--k")
    v = bands.group_velocity_fd(med, k, args.band, args.cutoff, step=args.step)
    rows = [[j + 1, v[j]] for j in range(len(v))]
    _write_csv(args.out, ["j", "v"], rows, _meta(args, desc))
    print(f"wrote {args.out}; v = ({', '.join(_fmt(x) for x in v)})")
    return 0


def _cmd_effective(args):
    desc = _load_config(args.config)
    med = medium.medium_from_descriptor(desc)
    k = _parse_k(args.k, med.cell.dims, "--k")
    mode = bloch.solve_at(med, k, args.cutoff, args.band)[args.band - 1]
    co = effective.effective_coefficients(mode, med)
    pde = effective.envelope_equation(co)
    rows = []
    for j in range(len(co.d)):
        ratio = co.d[j] / co.d[0]
        rows.append([j, co.d[j].real, co.d[j].imag, ratio.real])
    _write_csv(args.out_prefix + ".csv", ["j", "re_d", "im_d", "v"], rows, _meta(args, desc))
    _write_json(args.out_prefix + ".json", {
        "meta": _meta(args, desc),
        "family": co.family,
        "k": [float(x) for x in co.k],
        "band": co.band,
        "omega": co.omega,
        "d_re": [float(x.real) for x in co.d],
        "d_im": [float(x.imag) for x in co.d],
        "group_velocity": [float(x) for x in co.v],
        "packet_speed": pde.packet_speed,
        "imag_defect": co.imag_defect,
    })
    print(f"wrote {args.out_prefix}.csv and .json; "
          f"v = ({', '.join(_fmt(x) for x in co.v)})")
    return 0


def _cmd_couple(args):
    desc = _load_config(args.config)
    med = medium.medium_from_descriptor(desc)
    dims = med.cell.dims
    k = _parse_k(args.k, dims, "--k")
    m = _parse_k(args.m, dims, "--m")
    try:
        b1, b2 = (int(v) for v in args.bands.split(","))
        counts = [int(v) for v in args.supercells.split(",")]
    except ValueError as exc:
        raise ValidationError(f"could not parse --bands/--supercells: {exc}") from exc
    mode1 = bloch.solve_at(med, k, args.cutoff, b1)[b1 - 1]
    mode2 = bloch.solve_at(med, m, args.cutoff, b2)[b2 - 1]
    report = effective.coupling_coefficients(mode1, mode2, med, counts, args.time_window)
    rows = []
    for (j, p, l) in sorted(report.averages):
        for n, val in zip(report.supercells, report.averages[(j, p, l)]):
            rows.append([n, j, p, l, val.real, val.imag, abs(val)])
    meta = _meta(args, desc)
    meta["resonant"] = report.resonant
    meta["equivalent"] = report.equivalent
    meta["time_window"] = _fmt(report.time_window)
    _write_csv(args.out, ["n", "j", "p", "l", "re_avg", "im_avg", "abs_avg"], rows, meta)
    cross = report.max_cross_limit()
    cross_slopes = [report.slopes[key] for key in report.slopes if key[1] != key[2]]
    slope = max(cross_slopes) if cross_slopes else float("-inf")
    print(f"wrote {args.out}; resonant={report.resonant} equivalent={report.equivalent} "
          f"max|cross limit|={_fmt(cross)} worst cross slope={_fmt(slope)}")
    return 0


def _signal_from_json(obj, where):
    try:
        period = float(obj["period"])
        harmonics = {int(t["n"]): complex(t.get("re", 0.0), t.get("im", 0.0))
                     for t in obj["harmonics"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: bad signal spec: {exc}") from exc
    return ergodic.PeriodicSignal1D(period, harmonics)


def _cmd_ergodic(args):
    spec = _load_config(args.spec)
    op = spec.get("op")
    windows = spec.get("windows")
    if op in ("modulated_1d", "product", "derivative_product"):
        f = _signal_from_json(spec["f"], "f")
        if op == "modulated_1d":
            result = ergodic.avg_modulated_1d(f, float(spec["b"]), windows)
        else:
            g = _signal_from_json(spec["g"], "g")
            fn = ergodic.avg_product_periodic if op == "product" else ergodic.avg_derivative_product
            result = fn(f, g, windows)
    elif op == "modulated_dd":
        cell = Cell(tuple(spec["cell"]))
        terms = {tuple(int(v) for v in t["n"]): complex(t.get("re", 0.0), t.get("im", 0.0))
                 for t in spec["f"]["terms"]}
        cutoff = max((max(abs(v) for v in n) for n in terms), default=1) or 1
        f = FourierField.from_terms(cell, cutoff, terms)
        result = ergodic.avg_modulated_dd(f, spec["lambda"], spec["boxes"])
    else:
        raise ValidationError(f"op: unknown ergodic op {op!r}")
    rows = [[w, v.real, v.imag, e]
            for w, v, e in zip(result.windows, result.values, result.errors())]
    meta = _meta(args, spec)
    meta["limit_re"] = _fmt(result.analytic_limit.real)
    meta["limit_im"] = _fmt(result.analytic_limit.imag)
    meta["resonant"] = result.resonant
    meta["decay_constant"] = _fmt(result.decay_constant)
    _write_csv(args.out, ["window", "re_avg", "im_avg", "abs_err_vs_limit"], rows, meta)
    print(f"wrote {args.out}; limit={result.analytic_limit:.12g} resonant={result.resonant}")
    return 0


def _cmd_simulate(args):
    desc = _load_config(args.config)
    med = medium.medium_from_descriptor(desc)
    if med.cell.dims != 1 or med.family != "scalar-wave":
        raise ValidationError("simulate supports the 1D scalar wave family")
    k = _parse_k(args.k, 1, "--k")
    mode = bloch.solve_at(med, k, args.cutoff, args.band)[args.band - 1]
    env = simulate.GaussianEnvelope(args.center, args.sigma)
    grid = simulate.GridSpec(args.length, args.points_per_cell)
    record = simulate.packet_speed_experiment(med, mode, args.epsilon, env, grid,
                                              args.t_final, cfl=args.cfl,
                                              n_frames=args.frames)
    fit = simulate.measure_packet_velocity(simulate.EnvelopeFrames(
        record.times, record.envelope_x, record.envelope_frames,
        record.masked_cells, float(len(record.x) * record.dx)))
    rows = []
    for i, t in enumerate(record.times):
        f0 = record.envelope_frames[i]
        mass = float(np.sum(f0 ** 2))
        rows.append([t, fit.centroids[i], mass, float(f0.max())])
    meta = _meta(args, desc)
    _write_csv(args.out_prefix + "_frames.csv", ["t", "centroid", "mass", "peak"], rows, meta)
    if args.write_envelope:
        for i, t in enumerate(record.times):
            env_rows = [[x, f] for x, f in zip(record.envelope_x, record.envelope_frames[i])]
            _write_csv(f"{args.out_prefix}_envelope_{i}.csv", ["x", "abs_f0"], env_rows, meta)
    _write_json(args.out_prefix + "_run.json", {
        "meta": _meta(args, desc),
        "epsilon": float(record.epsilon),
        "grid_points": int(len(record.x)),
        "dx": float(record.dx),
        "dt": float(record.dt),
        "cfl": float(record.cfl),
        "frames": int(len(record.times)),
        "energy_drift": float(record.energy_drift),
        "stable": bool(record.stable),
        "masked_cells": int(record.masked_cells),
        "predicted_speed": float(record.predicted_speed),
        "measured_speed": float(record.measured_speed),
        "relative_error": float(record.relative_error),
        "centroid_fit_residual": float(record.fit_residual),
        "initialization": "transport-corrected du/dt (carrier term plus -v_g h' V0 carrier)",
        "init_correction_fraction": float(record.init_correction_fraction),
    })
    print(f"wrote {args.out_prefix}_frames.csv and _run.json; "
          f"measured={_fmt(record.measured_speed)} predicted={_fmt(record.predicted_speed)} "
          f"rel_err={_fmt(record.relative_error)}")
    return 0


def _cmd_check(args):
    ok = checks.run_all(write=print)
    return 0 if ok else 2


# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="hfh", description="Bloch bands, homogenized transport, and coupling diagnostics")
    parser.add_argument("--version", action="version", version=f"hfh {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bands", help="sweep one band along a straight k path")
    p.add_argument("--config", required=True)
    p.add_argument("--k-start", required=True)
    p.add_argument("--k-end", required=True)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--band", type=int, default=1)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--out", required=True)

    p = sub.add_parser("groupvel", help="finite-difference group velocity at one k")
    p.add_argument("--config", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--band", type=int, default=1)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("effective", help="homogenized transport coefficients at one mode")
    p.add_argument("--config", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--band", type=int, default=1)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--out-prefix", default="effective")

    p = sub.add_parser("couple", help="supercell coupling averages for a mode pair")
    p.add_argument("--config", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--m", required=True)
    p.add_argument("--bands", default="1,1")
    p.add_argument("--supercells", default="4,8,16,32")
    p.add_argument("--time-window", type=float, default=None)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ergodic", help="finite-window averages of periodic signals")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="fine-grid envelope transport validation")
    p.add_argument("--config", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--band", type=int, default=1)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--epsilon", type=float, default=1 / 32)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--center", type=float, default=2.5)
    p.add_argument("--length", type=float, default=8.0)
    p.add_argument("--points-per-cell", type=int, default=16)
    p.add_argument("--t-final", type=float, default=4.0)
    p.add_argument("--cfl", type=float, default=0.9)
    p.add_argument("--frames", type=int, default=9)
    p.add_argument("--write-envelope", action="store_true")
    p.add_argument("--out-prefix", default="simulate")

    sub.add_parser("check", help="run the built-in invariant suite")
    return parser


_HANDLERS = {
    "bands": _cmd_bands,
    "groupvel": _cmd_groupvel,
    "effective": _cmd_effective,
    "couple": _cmd_couple,
    "ergodic": _cmd_ergodic,
    "simulate": _cmd_simulate,
    "check": _cmd_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 64
    try:
        return _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
