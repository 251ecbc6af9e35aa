"""Command line: ``zorich run <experiment> [options]``.

Every experiment writes its artifacts and a ``report.json`` into
``--out`` and prints a one-line summary with the report path.  Exit
status: 0 success, 1 invalid configuration, 2 experiment failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from functools import lru_cache
from typing import List, Optional

import numpy as np

from . import io as zio
from .mapcore import ConfigurationError, MapConfig, derive_constants
from .parallel import worker_count
from .symbolic import Itinerary

EXPERIMENTS = ["derive", "render-slice", "trace-hair", "endpoint", "classify", "boxdim",
               "mcmullen", "karpinska", "access-path", "family7"]


class ExperimentFailure(RuntimeError):
    """An invariant checked by the experiment does not hold."""


# configuration ----------------------------------------------------------------------

def load_config(args) -> MapConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        data = data.get("map", data)
        try:
            return MapConfig.from_dict(data)
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"bad map config: {exc}")
    return derive_constants(args.alpha, args.resolution)


@lru_cache(maxsize=8)
def _dimension_constants(cfg: MapConfig, seed: int):
    from .dimension import find_l0, mcmullen_density, q_probe
    from .hairs import estimate_H

    q = q_probe(cfg)
    l0 = find_l0(cfg, q, seed=seed)
    delta = mcmullen_density(l0, cfg, q, samples=100_000, seed=seed).delta
    H = estimate_H(cfg, seed=seed)
    return q, l0, delta, H


def constants_report(cfg: MapConfig, seed: int) -> dict:
    """All constants of a run: a, m, M, alpha, c1..c9, eta, delta, q, H."""
    q, l0, delta, H = _dimension_constants(cfg, seed)
    d = cfg.to_dict()
    d.update({"c7": cfg.c7, "c8": cfg.c8, "c9": cfg.c9, "eta": cfg.eta, "delta": delta,
              "q": q, "l0": l0, "H": H, "hypotheses_ok": cfg.hypotheses_ok})
    return d


def parse_itinerary(text: str) -> Itinerary:
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        if os.path.exists(text):
            with open(text, encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            raise ValueError(f"itinerary is neither JSON nor a file: {text!r}")
    try:
        return Itinerary.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad itinerary: {exc}")


def _finish(args, name: str, report: dict, summary: str) -> int:
    path = os.path.join(args.out, "report.json")
    report = dict(report)
    report["experiment"] = name
    report["seed"] = args.seed
    zio.write_json(path, report)
    print(f"{summary} -> {path}")
    return 0


# experiments ------------------------------------------------------------------------

def run_derive(args, cfg: MapConfig) -> int:
    consts = constants_report(cfg, args.seed)
    zio.write_json(os.path.join(args.out, "config.json"), {"map": cfg.to_dict()})
    ok = cfg.a >= math.exp(cfg.M) - cfg.m
    if not ok:
        raise ExperimentFailure("a < e^M - m")
    return _finish(args, "derive", {"constants": consts},
                   f"derived a={cfg.a:.6g} m={cfg.m:.6g} M={cfg.M:.6g} alpha={cfg.alpha}")


def run_render_slice(args, cfg: MapConfig) -> int:
    from .orbits import BASIN, JULIA, UNDECIDED, parse_plane, planar_classify, render_slice, slice_points

    plane = parse_plane(args.plane)
    window = zio.parse_floats(args.window, 4)
    workers = worker_count()
    img, kind = render_slice(plane, window, args.pixels, args.budget, cfg, workers=workers)
    zio.write_pgm(os.path.join(args.out, "slice.pgm"), img)
    report = {
        "constants": constants_report(cfg, args.seed),
        "plane": args.plane, "window": window, "pixels": args.pixels, "budget": args.budget,
        "counts": {"Basin": int(np.sum(kind == BASIN)), "JuliaEvidence": int(np.sum(kind == JULIA)),
                   "Undecided": int(np.sum(kind == UNDECIDED))},
    }
    if plane == (1, 0.0):
        pts = slice_points(plane, window, args.pixels)
        z = pts[:, 2] + 1j * (math.pi / 2.0) * pts[:, 0]
        planar = planar_classify(z, args.budget, cfg).reshape(kind.shape)
        report["planar_agreement"] = float(np.mean((kind == BASIN) == planar))
    return _finish(args, "render-slice", report,
                   f"rendered {args.pixels}x{args.pixels} slice {args.plane}")


def run_trace_hair(args, cfg: MapConfig) -> int:
    from .hairs import trace_hair

    s = parse_itinerary(args.itinerary)
    lo, hi, n = zio.parse_range(args.t)
    tr = trace_hair(s, (lo, hi), n, args.tol, cfg)
    zio.write_text(os.path.join(args.out, "hair.csv"), tr.to_csv())
    zio.write_text(os.path.join(args.out, "hair.json"), tr.to_json() + "\n")
    strip = np.linalg.norm(tr.points - np.column_stack([np.tile(2 * np.array(s[0], float), (n, 1)), tr.params]),
                           axis=-1)
    report = {
        "constants": constants_report(cfg, args.seed),
        "itinerary": s.to_dict(), "t": [lo, hi, n], "tol": args.tol,
        "max_depth": int(tr.depth_used.max()), "max_error_bound": float(tr.error_bound.max()),
        "flagged": int(tr.flagged.sum()), "max_delta_ratio": max(tr.delta_ratios, default=0.0),
        "contraction_rate": tr.rate, "injective": tr.injective(),
        "max_strip_distance": float(strip.max()),
    }
    _finish(args, "trace-hair", report, f"traced {n} hair points, max depth {report['max_depth']}")
    if report["flagged"]:
        raise ExperimentFailure(f"{report['flagged']} points missed the tolerance at the depth cap")
    if not report["injective"]:
        raise ExperimentFailure("hair polyline is not injective beyond the error bounds")
    return 0


def run_endpoint(args, cfg: MapConfig) -> int:
    from .hairs import endpoint
    from .symbolic import endpoint_param

    s = parse_itinerary(args.itinerary)
    ep = endpoint_param(s)
    p, bound = endpoint(s, cfg, args.tol)
    report = {"constants": constants_report(cfg, args.seed), "itinerary": s.to_dict(),
              "t_s": ep.t_s, "converged": ep.converged, "partial": ep.partial,
              "endpoint": p, "error_bound": bound}
    return _finish(args, "endpoint", report, f"endpoint {np.array2string(p, precision=6)} +- {bound:.2e}")


def run_classify(args, cfg: MapConfig) -> int:
    from .orbits import KIND_NAMES, classify_points

    if args.point:
        pts = np.array([zio.parse_floats(args.point, 3)])
    elif args.points:
        pts = np.loadtxt(args.points, delimiter=",", ndmin=2, skiprows=1)
    else:
        raise ValueError("classify needs --point or --points")
    kind, index = classify_points(pts, args.budget, cfg)
    rows = [{"point": p, "verdict": KIND_NAMES[int(k)], "index": int(i)} for p, k, i in zip(pts, kind, index)]
    lines = ["x1,x2,x3,verdict,index"] + [
        f"{p[0]!r},{p[1]!r},{p[2]!r},{KIND_NAMES[int(k)]},{int(i)}" for p, k, i in zip(pts.tolist(), kind, index)]
    zio.write_text(os.path.join(args.out, "verdicts.csv"), "\n".join(lines) + "\n")
    report = {"constants": constants_report(cfg, args.seed), "budget": args.budget, "verdicts": rows[:1000]}
    return _finish(args, "classify", report, f"classified {len(pts)} point(s): {rows[0]['verdict']} ...")


def run_boxdim(args, cfg: MapConfig) -> int:
    from . import dimension as dim

    js = zio.parse_int_range(args.scales)
    lo = zio.parse_floats(args.window, 4)
    side = lo[3]
    window = (tuple(lo[:3]), tuple(v + side for v in lo[:3]))
    scales = [side * 2.0 ** -j for j in js]
    if args.set in ("segment", "plane", "cube"):
        bc = dim.box_count(dim.calibration_classifier(args.set, scales[-1]), window, scales,
                           workers=worker_count())
    elif args.set == "julia":
        bc = dim.box_count(dim.julia_classifier(cfg, args.budget), window, scales, workers=worker_count())
    elif args.set == "omega":
        pts = dim.omega_hair_cloud(cfg, (window[0][2] - 0.5, window[1][2]), 4000)
        bc = dim.box_count_points(pts, window, scales)
    else:
        raise ValueError(f"unknown set {args.set!r}")
    zio.write_text(os.path.join(args.out, "boxcount.csv"), bc.to_csv())
    report = {"constants": constants_report(cfg, args.seed), "set": args.set, "window": window,
              "scales": scales, "counts": bc.counts, "slope": bc.slope, "r2": bc.r2, "flagged": bc.flagged}
    return _finish(args, "boxdim", report, f"box-count slope {bc.slope:.4f} (r2 {bc.r2:.4f})")


def run_mcmullen(args, cfg: MapConfig) -> int:
    from . import dimension as dim

    q = dim.q_probe(cfg)
    l0 = dim.find_l0(cfg, q, seed=args.seed)
    dens = [dim.mcmullen_density(l, cfg, q, samples=args.samples, seed=args.seed + i)
            for i, l in enumerate(range(l0, l0 + 5))]
    res = dim.nested_dimension_bound(args.levels, cfg, q=q, l0=l0, samples=args.samples, seed=args.seed)
    levels = [lv.__dict__ for lv in res.levels]
    bounds = res.bounds
    report = {
        "constants": constants_report(cfg, args.seed), "q": q, "l0": l0,
        "densities": [d.__dict__ for d in dens], "nested": levels, "bounds": bounds,
        "diagnostics": res.diagnostics, "increasing": all(b > a for a, b in zip(bounds, bounds[1:])),
    }
    _finish(args, "mcmullen", report, f"McMullen bounds {[round(b, 4) for b in bounds]}")
    if not report["increasing"]:
        raise ExperimentFailure("dimension lower bounds are not increasing")
    return 0


def run_karpinska(args, cfg: MapConfig) -> int:
    from .dimension import karpinska_cover_stats

    s = parse_itinerary(args.itinerary)
    stats = [karpinska_cover_stats(s, args.t, k, cfg, args.rho) for k in range(1, args.kmax + 1)]
    lines = ["k,log_N,log_d,log_r,log_ratio"] + [
        f"{st.k},{st.log_N!r},{st.log_d!r},{st.log_r!r},{st.log_ratio!r}" for st in stats]
    zio.write_text(os.path.join(args.out, "karpinska.csv"), "\n".join(lines) + "\n")
    logs = [st.log_ratio for st in stats]
    report = {"constants": constants_report(cfg, args.seed), "t": args.t, "rho": args.rho,
              "log_ratio": logs, "decreasing": all(b < a for a, b in zip(logs, logs[1:])),
              "first_k_below_one": next((st.k for st in stats if st.log_ratio < 0), None)}
    return _finish(args, "karpinska", report, f"log covering ratio {[round(v, 2) for v in logs]}")


def run_access_path(args, cfg: MapConfig) -> int:
    from .access import access_path, gamma_properties
    from .orbits import BASIN, classify_points

    s = parse_itinerary(args.itinerary)
    path = access_path(s, args.t, args.depth, cfg)
    zio.write_text(os.path.join(args.out, "access.csv"), path.to_csv())
    interior = np.concatenate([S for S in path.segments])
    kind, _ = classify_points(interior, args.depth + 40, cfg)
    dists = path.distances()
    report = {
        "constants": constants_report(cfg, args.seed), "itinerary": s.to_dict(), "t": args.t,
        "depth": args.depth, "target": path.target, "lengths": path.lengths,
        "length_bounds": path.length_bounds, "distances": dists,
        "decay_ratios": path.decay_ratios(), "properties": gamma_properties(path, cfg),
        "basin_fraction": float(np.mean(kind == BASIN)), "diagnostics": path.diagnostics,
    }
    _finish(args, "access-path", report, f"access path with {len(path.segments)} levels")
    if report["basin_fraction"] < 1.0:
        raise ExperimentFailure("some path samples are not in the basin")
    if any(d > 4 * cfg.alpha ** k * (1 + 1e-9) for k, d in enumerate(dists, start=1)):
        raise ExperimentFailure("dist(x, Gamma_k) exceeds 4 alpha^k")
    return 0


def run_family7(args, cfg: Optional[MapConfig]) -> int:
    from . import family as fam_mod

    params = json.loads(args.params) if args.params else {}
    fam = fam_mod.build_annulus_family(params)
    rep = {"family": fam.cfg.to_dict(), "circle_invariance": fam_mod.circle_invariance(fam),
           "radial_derivative_fd": fam_mod.radial_derivative_fd(fam, 0.3),
           "vertical_derivative_fd": fam_mod.vertical_derivative_fd(fam, 0.3)}
    if fam.cfg.phi == fam_mod.PHI_WIGGLE:
        fps = fam_mod.circle_dynamics(fam, range(5, 11))
        rep["fixed_points"] = [fp.__dict__ for fp in fps]
    att = fam_mod.local_attraction_check(fam, seed=args.seed)
    rep["attraction"] = att.__dict__
    _finish(args, "family7", rep, f"family a={fam.cfg.a:.6f} w={fam.cfg.w:.6f}")
    if not att.converged or rep["circle_invariance"] > 1e-10:
        raise ExperimentFailure("circle is not invariant and attracting")
    return 0


RUNNERS = {
    "derive": run_derive, "render-slice": run_render_slice, "trace-hair": run_trace_hair,
    "endpoint": run_endpoint, "classify": run_classify, "boxdim": run_boxdim,
    "mcmullen": run_mcmullen, "karpinska": run_karpinska, "access-path": run_access_path,
    "family7": run_family7,
}

ZERO = '{"prefix": [], "tail": {"kind": "constant", "entry": [0, 0]}}'


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zorich", description="Numerical experiments with Zorich maps.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment")
    run.add_argument("experiment", choices=EXPERIMENTS)
    g = run.add_argument_group("common")
    g.add_argument("--out", default="out", help="output directory")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--config", help="MapConfig JSON (otherwise derived)")
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--resolution", type=int, default=256, help="derivative sampling grid")
    e = run.add_argument_group("experiment options")
    e.add_argument("--plane", default="x2=0")
    e.add_argument("--window", help="slice: u_lo,u_hi,v_lo,v_hi; boxdim: x1,x2,x3,side")
    e.add_argument("--pixels", type=int, default=256)
    e.add_argument("--budget", type=int, default=60)
    e.add_argument("--itinerary", default=ZERO)
    e.add_argument("--t", default=None, help="trace-hair: lo:hi:n; karpinska/access-path: a number")
    e.add_argument("--tol", type=float, default=1e-9)
    e.add_argument("--point")
    e.add_argument("--points")
    e.add_argument("--set", default="julia", choices=["julia", "omega", "segment", "plane", "cube"])
    e.add_argument("--scales", default="3:7", help="dyadic exponents j for side * 2^-j")
    e.add_argument("--levels", type=int, default=2)
    e.add_argument("--samples", type=int, default=100_000)
    e.add_argument("--rho", type=float, default=1.2)
    e.add_argument("--kmax", type=int, default=5)
    e.add_argument("--depth", type=int, default=12)
    e.add_argument("--params", help="family7: JSON object of s, delta, t, R_prime, phi")
    return p


_DEFAULT_T = {"trace-hair": "1:5:200", "karpinska": "1", "access-path": "0.1"}
_DEFAULT_WINDOW = {"render-slice": "-3,3,-2,6", "boxdim": "-0.5,-0.5,3,1"}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    exp = args.experiment
    if args.t is None:
        args.t = _DEFAULT_T.get(exp, "1")
    if args.window is None:
        args.window = _DEFAULT_WINDOW.get(exp, "")
        if args.set in ("segment", "plane", "cube") and exp == "boxdim":
            args.window = "0,0,0,1"
    try:
        if exp in ("karpinska", "access-path"):
            args.t = float(args.t)
        zio.ensure_dir(args.out)
        cfg = None if exp == "family7" else load_config(args)
    except (ValueError, ConfigurationError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    try:
        return RUNNERS[exp](args, cfg)
    except ConfigurationError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 1
    except (ExperimentFailure, ArithmeticError, RuntimeError) as exc:
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
