"""Command-line front end binding the experiments into reproducible runs.

Every run echoes its full configuration (plus a hash of it) into a JSON
sidecar next to the outputs; identical config and seed reproduce the output
files byte for byte.  Exit codes: 0 success, 2 precondition violation,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass

import numpy as np

from . import bishop as bishop_mod
from . import extremal as extremal_mod
from . import fiber as fiber_mod
from .curve import load_curve, simplicity_report
from .errors import NumericalError, PreconditionError
from .polyalg import UnivariatePoly

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_NUMERICAL = 3


@dataclass(frozen=True)
class RunConfig:
    command: str
    curve_path: str | None
    output_dir: str
    seed: int
    knobs: dict

    def as_dict(self):
        return {"command": self.command, "curve_path": self.curve_path,
                "output_dir": self.output_dir, "seed": self.seed,
                "knobs": dict(sorted(self.knobs.items()))}

    def hash(self) -> str:
        # output_dir does not influence results, so it stays out of the hash:
        # identical experiments are byte-identical wherever they land
        doc = self.as_dict()
        del doc["output_dir"]
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the same directory plus rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hullscope-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_sidecar(config: RunConfig, outputs: list) -> None:
    doc = {"config": config.as_dict(), "config_hash": config.hash(),
           "outputs": outputs}
    path = os.path.join(config.output_dir, f"{config.command}.config.json")
    atomic_write(path, json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _stamp(config: RunConfig) -> str:
    return f"# config_hash={config.hash()}\n"


def _parse_complex(text: str) -> complex:
    re, _, im = text.partition(",")
    return complex(float(re), float(im or 0.0))


def _parse_degrees(text: str):
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def _parse_domain(text: str):
    kind, _, rest = text.partition(":")
    parts = rest.split(":") if rest else []
    if kind == "disk":
        radius = float(parts[0])
        center = _parse_complex(parts[1]) if len(parts) > 1 else 0.0
        return bishop_mod.Disk(radius, center)
    if kind == "annulus":
        return bishop_mod.Annulus(float(parts[0]), float(parts[1]))
    raise PreconditionError(f"unknown domain spec {text!r}; "
                            "use disk:R[:center] or annulus:a:b")


def _load(config: RunConfig):
    path = config.curve_path
    if path is None:
        raise PreconditionError("this command requires --curve")
    if not os.path.exists(path):
        raise PreconditionError(f"curve file not found: {path}")
    return load_curve(path)


# ---------------------------------------------------------------------------
# commands

def _cmd_validate(config: RunConfig) -> list:
    curve = _load(config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        simple = simplicity_report(curve)
    degs = ", ".join(f"({f.degree_span},{g.degree_span})"
                     for f, g in curve.components)
    all_simple = all(simple)
    print(f"{curve.n_components} component"
          f"{'s' if curve.n_components != 1 else ''}, degrees {degs}, "
          f"simple: {'yes' if all_simple else 'no (warning)'}")
    print(f"rho={curve.rho:g} label={curve.label!r}")
    return []


def _cmd_slice(config: RunConfig) -> list:
    curve = _load(config)
    k = config.knobs
    spec = extremal_mod.SliceSpec(
        k["plane"], _parse_complex(k["fixed"]),
        (k["re_lo"], k["re_hi"]), (k["im_lo"], k["im_hi"]))
    hs = extremal_mod.hull_slice(curve, k["M"], spec, k["grid_n"], k["d_max"])
    buf = io.StringIO()
    buf.write(_stamp(config))
    extremal_mod.write_hull_csv(hs, buf)
    out = os.path.join(config.output_dir, "slice.csv")
    atomic_write(out, buf.getvalue())
    print(f"wrote {out}: {int(hs.member.sum())} member cells of "
          f"{hs.member.size}, {hs.envelope_violations} envelope violations")
    return [out]


def _cmd_extremal(config: RunConfig) -> list:
    curve = _load(config)
    k = config.knobs
    x = (_parse_complex(k["x_z"]), _parse_complex(k["x_w"]))
    results = extremal_mod.extremal_curve(curve, x, k["d_max"],
                                          K_dir=k["K_dir"])
    buf = io.StringIO()
    buf.write(_stamp(config))
    buf.write("d,value,lower,status\n")
    for res in results:
        lo = res.enclosure[0]
        buf.write(f"{res.degree},"
                  f"{'inf' if math.isinf(res.value) else format(res.value, '.17g')},"
                  f"{'inf' if math.isinf(lo) else format(lo, '.17g')},"
                  f"{res.status}\n")
    out = os.path.join(config.output_dir, "extremal.csv")
    atomic_write(out, buf.getvalue())
    best = max((r.value for r in results), default=math.nan)
    print(f"wrote {out}: best constant estimate {best:g}")
    return [out]


def _cmd_bishop(config: RunConfig) -> list:
    curve = _load(config)
    k = config.knobs
    zeta0 = bishop_mod.default_base_point(curve)
    domain = (_parse_domain(k["domain"]) if k.get("domain")
              else bishop_mod.default_domain(curve))
    rate = bishop_mod.green_rate(domain, zeta0)
    records = bishop_mod.decay_table(curve, zeta0, _parse_degrees(k["d"]),
                                     _parse_degrees(k["e"]), rate,
                                     r0=k.get("r0"))
    buf = io.StringIO()
    buf.write(_stamp(config))
    bishop_mod.write_decay_csv(records, buf)
    out = os.path.join(config.output_dir, "bishop.csv")
    atomic_write(out, buf.getvalue())
    n_pass = sum(r.passes for r in records)
    print(f"wrote {out}: r={rate.r:g}, {n_pass}/{len(records)} records pass")
    return [out]


def _cmd_fiber(config: RunConfig) -> list:
    curve = _load(config)
    k = config.knobs
    win = (k["re_lo"], k["re_hi"], k["im_lo"], k["im_hi"])
    fib = fiber_mod.fiber_scan(curve, _parse_complex(k["z"]), k["M"], win,
                               k["grid_n"], k["d_max"], k["e_max"])
    doc = {
        "config_hash": config.hash(),
        "z": [fib.z.real, fib.z.imag],
        "M": fib.M,
        "degree_caps": list(fib.degree_caps),
        "resolution": fib.resolution,
        "fiber": [[w.real, w.imag, res] for w, res in fib.points],
        "cardinality": fib.cardinality,
    }
    out = os.path.join(config.output_dir, "fiber.json")
    atomic_write(out, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"wrote {out}: {fib.cardinality} cluster(s)")
    return [out]


def _cmd_measure(config: RunConfig) -> list:
    k = config.knobs
    rng = np.random.default_rng(config.seed)
    alphas = [float(a) for a in k["alphas"].split(",")]
    rows = []
    for idx in range(k["count"]):
        deg = int(rng.integers(1, k["degree_max"] + 1))
        coeffs = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
        poly = UnivariatePoly(coeffs)
        poly = UnivariatePoly(poly.coeffs / np.abs(poly.coeffs).max())
        for alpha in alphas:
            sub = fiber_mod.SublevelSet(poly, alpha ** poly.degree)
            est = fiber_mod.sublevel_measure(sub, k["n_samples"],
                                             seed=config.seed + idx)
            rows.append((idx, poly.degree, alpha, est))
    buf = io.StringIO()
    buf.write(_stamp(config))
    buf.write("index,degree,alpha,estimate,std_error,bound,holds\n")
    for idx, deg, alpha, est in rows:
        holds = est.estimate <= est.bound + 3.0 * est.std_error
        buf.write(f"{idx},{deg},{format(alpha, '.17g')},"
                  f"{format(est.estimate, '.17g')},"
                  f"{format(est.std_error, '.17g')},"
                  f"{format(est.bound, '.17g')},{str(holds).lower()}\n")
    out = os.path.join(config.output_dir, "measure.csv")
    atomic_write(out, buf.getvalue())
    n_hold = sum(1 for *_, est in rows
                 if est.estimate <= est.bound + 3.0 * est.std_error)
    print(f"wrote {out}: {n_hold}/{len(rows)} cases within the bound")
    return [out]


def _cmd_finiteness(config: RunConfig) -> list:
    curve = _load(config)
    k = config.knobs
    report = fiber_mod.finiteness_experiment(
        curve, k["M"], k["e"], k["n_z"], seed=config.seed,
        d_max=k.get("d_max"), grid_n=k["grid_n"])
    out_json = os.path.join(config.output_dir, "finiteness.json")
    out_csv = os.path.join(config.output_dir, "finiteness.csv")
    buf = io.StringIO()
    fiber_mod.write_finiteness_json(report, buf)
    doc = json.loads(buf.getvalue())
    doc["config_hash"] = config.hash()
    atomic_write(out_json, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    buf = io.StringIO()
    buf.write(_stamp(config))
    fiber_mod.write_finiteness_csv(report, buf)
    atomic_write(out_csv, buf.getvalue())
    print(f"wrote {out_json} and {out_csv}: fraction_ok={report.fraction_ok:g}"
          f"{' (bound vacuous)' if report.bound_vacuous else ''}")
    return [out_json, out_csv]


def _cmd_probe(config: RunConfig) -> list:
    curve = _load(config)
    k = config.knobs
    if k["mode"] == "stability":
        rep = extremal_mod.stability_probe(curve, k["n_points"], k["d_max"],
                                           seed=config.seed)
        doc = {
            "config_hash": config.hash(),
            "mode": "stability",
            "n_hull_samples": len(rep.sample_points),
            "best_constants": rep.best_constants,
            "sup_estimate": rep.sup_estimate,
            "verdict": rep.verdict,
        }
        out = os.path.join(config.output_dir, "probe.json")
        atomic_write(out, json.dumps(doc, indent=1, sort_keys=True) + "\n")
        print(f"wrote {out}: verdict {rep.verdict} (evidence, not proof)")
        return [out]
    # analyticity: trace limit-root fibers over a rectangular z-grid
    nx, ny, h = k["nx"], k["ny"], k["h"]
    z00 = _parse_complex(k["z0"])
    e = k["e"]
    d_list = [2 * e, 2 * e + 2, 2 * e + 4]
    fibers = []
    for iy in range(ny):
        for ix in range(nx):
            z = z00 + ix * h + 1j * iy * h
            consensus = fiber_mod.fiber_roots_by_consensus(curve, z, e, d_list)
            fibers.append(fiber_mod.FiberSet(
                z, math.inf, [(w, 0.0) for w in consensus], "limit_roots",
                (max(d_list), e)))
    rep = extremal_mod.analyticity_probe(fibers, nx, ny)
    doc = {
        "config_hash": config.hash(),
        "mode": "analyticity",
        "noise_floor": rep.noise_floor,
        "tracking_failures": rep.tracking_failures,
        "branches": [{"n_cells": b.n_cells,
                      "max_residual": b.max_residual,
                      "flagged": b.flagged} for b in rep.branches],
    }
    out = os.path.join(config.output_dir, "probe.json")
    atomic_write(out, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    n_flag = sum(b.flagged for b in rep.branches)
    print(f"wrote {out}: {len(rep.branches)} branch(es), {n_flag} flagged")
    return [out]


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hullscope",
        description="Projective-hull experiments for curves in C^2")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, curve=True):
        if curve:
            p.add_argument("--curve", required=True, help="curve JSON file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("slice", help="hull membership over a coordinate slice")
    common(p)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--grid", type=int, default=64, dest="grid_n")
    p.add_argument("--plane", choices=["z", "w"], default="z")
    p.add_argument("--fixed", default="0,0")
    p.add_argument("--region", default="-2,2,-2,2",
                   help="re_lo,re_hi,im_lo,im_hi")
    p.add_argument("--d-max", type=int, default=4)

    p = sub.add_parser("extremal", help="extremal values at one point")
    common(p)
    p.add_argument("--x", required=True, help="z_re,z_im,w_re,w_im")
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("--k-dir", type=int, default=32)

    p = sub.add_parser("bishop", help="vanishing-polynomial decay table")
    common(p)
    p.add_argument("--d", required=True, help="e.g. 3..10 or 3,5,7")
    p.add_argument("--e", required=True)
    p.add_argument("--domain", default=None, help="disk:R[:c] or annulus:a:b")
    p.add_argument("--r0", type=float, default=None)

    p = sub.add_parser("fiber", help="fiber scan over one z")
    common(p)
    p.add_argument("--z", required=True, help="re,im")
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--window", default="-1.2,1.2,-1.2,1.2")
    p.add_argument("--grid", type=int, default=33, dest="grid_n")
    p.add_argument("--d-max", type=int, default=6)
    p.add_argument("--e-max", type=int, default=6)

    p = sub.add_parser("measure", help="sublevel-measure Monte Carlo sweep")
    common(p, curve=False)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--degree-max", type=int, default=10)
    p.add_argument("--alphas", default="0.05,0.1,0.2")
    p.add_argument("--n-samples", type=int, default=100_000)

    p = sub.add_parser("finiteness", help="fiber finiteness experiment")
    common(p)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--e", type=int, required=True)
    p.add_argument("--n-z", type=int, default=20)
    p.add_argument("--grid", type=int, default=33, dest="grid_n")
    p.add_argument("--d-max", type=int, default=None)

    p = sub.add_parser("probe", help="stability or analyticity probe")
    common(p)
    p.add_argument("--mode", choices=["stability", "analyticity"],
                   default="stability")
    p.add_argument("--n-points", type=int, default=10)
    p.add_argument("--d-max", type=int, default=4)
    p.add_argument("--z0", default="0.1,-0.2", help="grid corner (analyticity)")
    p.add_argument("--nx", type=int, default=7)
    p.add_argument("--ny", type=int, default=7)
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--e", type=int, default=3)

    p = sub.add_parser("validate", help="parse and check a curve file")
    common(p)
    return parser


def config_from_args(args) -> RunConfig:
    knobs = {}
    if args.command == "slice":
        re_lo, re_hi, im_lo, im_hi = (float(v) for v in args.region.split(","))
        knobs = {"M": args.M, "grid_n": args.grid_n, "plane": args.plane,
                 "fixed": args.fixed, "re_lo": re_lo, "re_hi": re_hi,
                 "im_lo": im_lo, "im_hi": im_hi, "d_max": args.d_max}
    elif args.command == "extremal":
        zr, zi, wr, wi = (float(v) for v in args.x.split(","))
        knobs = {"x_z": f"{zr},{zi}", "x_w": f"{wr},{wi}",
                 "d_max": args.d_max, "K_dir": args.k_dir}
    elif args.command == "bishop":
        knobs = {"d": args.d, "e": args.e, "domain": args.domain,
                 "r0": args.r0}
    elif args.command == "fiber":
        re_lo, re_hi, im_lo, im_hi = (float(v) for v in args.window.split(","))
        knobs = {"z": args.z, "M": args.M, "re_lo": re_lo, "re_hi": re_hi,
                 "im_lo": im_lo, "im_hi": im_hi, "grid_n": args.grid_n,
                 "d_max": args.d_max, "e_max": args.e_max}
    elif args.command == "measure":
        knobs = {"count": args.count, "degree_max": args.degree_max,
                 "alphas": args.alphas, "n_samples": args.n_samples}
    elif args.command == "finiteness":
        knobs = {"M": args.M, "e": args.e, "n_z": args.n_z,
                 "grid_n": args.grid_n, "d_max": args.d_max}
    elif args.command == "probe":
        knobs = {"mode": args.mode, "n_points": args.n_points,
                 "d_max": args.d_max, "z0": args.z0, "nx": args.nx,
                 "ny": args.ny, "h": args.h, "e": args.e}
    return RunConfig(command=args.command,
                     curve_path=getattr(args, "curve", None),
                     output_dir=args.out, seed=args.seed, knobs=knobs)


_COMMANDS = {
    "slice": _cmd_slice,
    "extremal": _cmd_extremal,
    "bishop": _cmd_bishop,
    "fiber": _cmd_fiber,
    "measure": _cmd_measure,
    "finiteness": _cmd_finiteness,
    "probe": _cmd_probe,
    "validate": _cmd_validate,
}


def run(config: RunConfig) -> int:
    """Execute one experiment; returns the process exit code."""
    try:
        os.makedirs(config.output_dir, exist_ok=True)
        outputs = _COMMANDS[config.command](config)
        if outputs:
            _write_sidecar(config, [os.path.basename(o) for o in outputs])
        return EXIT_OK
    except PreconditionError as exc:
        print(f"hullscope {config.command}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericalError as exc:
        print(f"hullscope {config.command}: numerical failure: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
