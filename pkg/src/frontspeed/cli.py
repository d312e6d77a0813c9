"""Command-line entry point.

    frontspeed <eigen|speed|scan|approx|validate|profile> --config run.json --out results/

Exit codes: 0 success, 1 output could not be written, 2 configuration
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import math
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config
from .core import Direction, directions_on_circle
from .eigen import EigenOperatorSpec, linear_speed, principal_eigenpair
from .errors import ConfigError, EigenSolverError, NumericalError
from .fronts import decay_rate, extract_profile, measure_speed
from .io import (OutputError, csv_text, json_text, line_plot_svg, polar_plot_svg, sha256_bytes,
                 sha256_file, write_bytes, write_snapshot)
from .simulate import InitialData, planar_defaults
from .studies import continuity_report, ignition_approx_study, parallel_map, scan_directions
from .validate import (check_supersolution, ignition_lower_bound_check, make_supersolution,
                       uniform_spreading_check)

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


class RunWriter:
    """Single writer for one run; the manifest goes last and lists every output with its hash."""

    def __init__(self, out_dir):
        self.out = Path(out_dir)
        self.files: list[dict] = []

    def text(self, name: str, content: str) -> Path:
        data = content.encode()
        path = write_bytes(self.out / name, data)
        self.files.append({"path": name, "sha256": sha256_bytes(data), "bytes": len(data)})
        return path

    def add_existing(self, *paths: Path) -> None:
        for p in paths:
            self.files.append({"path": str(Path(p).relative_to(self.out)),
                               "sha256": sha256_file(p), "bytes": Path(p).stat().st_size})

    def manifest(self, command: str, cfg: RunConfig, inputs: dict, started: str) -> Path:
        finished = _dt.datetime.now(_dt.timezone.utc).isoformat()
        doc = {"tool": "frontspeed", "version": __version__, "command": command,
               "config": cfg.resolved(), "inputs": inputs, "started": started,
               "finished": finished, "outputs": self.files}
        return write_bytes(self.out / "manifest.json", json_text(doc).encode())


def _init_for(cfg: RunConfig, nl, n: Direction) -> InitialData:
    s = cfg.simulation
    base = planar_defaults(nl, n, s.C, s.K)
    if s.mu is None:
        return base
    return InitialData("planar", n, s.C, s.K, s.mu, base.floor)


def cmd_eigen(cfg: RunConfig, w: RunWriter, threads: int) -> None:
    medium = cfg.build_medium()
    nl = cfg.build_nonlinearity(medium)
    dirs = cfg.build_directions(medium.dim)
    kw = cfg.eigen_kwargs()
    results = parallel_map(lambda n: linear_speed(medium, nl, n, **kw), dirs, threads)
    w.text("eigen.csv", csv_text(["angle", "lambda_min", "c_lin", "mu0_residual"],
                                 [(r.direction.angle, r.lam_min, r.c_lin, r.mu0_residual)
                                  for r in results]))
    pairs = []
    V = nl.linearization_at_zero()
    for r in results:
        for lam in (cfg.eigen.lambdas or [r.lam_min]):
            spec = EigenOperatorSpec(medium, r.direction, lam, 0.0, V, kw["resolution"] or ())
            e = principal_eigenpair(spec, cfg.eigen.method)
            pairs.append((r.direction.angle, lam, e.mu0, e.residual, e.iterations))
    w.text("eigen_pairs.csv", csv_text(["n_angle", "lambda", "mu0", "residual", "iterations"],
                                       pairs))


def cmd_speed(cfg: RunConfig, w: RunWriter, threads: int) -> None:
    medium = cfg.build_medium()
    nl = cfg.build_nonlinearity(medium)
    dirs = cfg.build_directions(medium.dim)
    kw = cfg.sim_kwargs()
    keep = cfg.simulation.snapshots

    def work(n):
        return measure_speed(medium, nl, n, init=_init_for(cfg, nl, n), keep_states=keep, **kw)

    results = parallel_map(work, dirs, threads)
    rows, trace_rows, series = [], [], []
    for n, m in zip(dirs, results):
        tr = m.trace
        rows.append((n.angle, m.speed, m.uncertainty, tr.model, tr.level, cfg.simulation.t_end,
                     m.plan.grid.spacing[0], m.plan.kind, "inconclusive" if m.inconclusive else ""))
        trace_rows += [(n.angle, t, p, tr.level) for t, p, _ in tr.rows()]
        series.append((f"angle {n.angle:.4f}: c = {m.speed:.4f}", list(tr.times),
                       list(tr.positions)))
    w.text("speed.csv", csv_text(["angle", "c", "uncertainty", "model", "level", "t_end", "h",
                                  "grid", "flags"], rows))
    w.text("front_trace.csv", csv_text(["angle", "t", "position", "level"], trace_rows))
    w.text("speed.svg", line_plot_svg(series, "front position", "t", "position along n"))
    if keep:
        for i, m in enumerate(results):
            for k, st in enumerate(m.states):
                w.add_existing(*write_snapshot(w.out / "snapshots" / f"dir{i:02d}_{k:05d}", st,
                                               medium.hash()))


def _scan_rows(curve):
    return csv_text(["angle", "c", "method", "uncertainty", "flags"], curve.rows())


def cmd_scan(cfg: RunConfig, w: RunWriter, threads: int) -> None:
    medium = cfg.build_medium()
    nl = cfg.build_nonlinearity(medium)
    sc = cfg.scan
    kw = dict(method=sc.method, eps=sc.eps, sim=cfg.sim_kwargs(), eig=cfg.eigen_kwargs(),
              threads=threads)
    coarse = scan_directions(medium, nl, n_samples=sc.n_samples, **kw)
    w.text("scan.csv", _scan_rows(coarse))
    curves = [(f"{coarse.method}, {sc.n_samples} directions", list(coarse.angles),
               list(coarse.speeds))]
    summary = {"method": coarse.method, "kappa": coarse.kappa, "K_sup": coarse.K_sup,
               "max_jump": coarse.max_jump(), "failures": len(coarse.failures),
               "medium_hash": coarse.medium_hash}
    if sc.refine and medium.dim == 2:
        fine = scan_directions(medium, nl, n_samples=2 * sc.n_samples, **kw)
        w.text("scan_fine.csv", _scan_rows(fine))
        rep = continuity_report(coarse, fine)
        summary["continuity"] = rep.to_dict()
        curves.append((f"{fine.method}, {2 * sc.n_samples} directions", list(fine.angles),
                       list(fine.speeds)))
    w.text("scan.json", json_text(summary))
    w.text("scan.svg", polar_plot_svg(curves, "speed by direction"))


def cmd_approx(cfg: RunConfig, w: RunWriter, threads: int) -> None:
    medium = cfg.build_medium()
    base = cfg.build_nonlinearity(medium)
    dirs = cfg.build_directions(medium.dim)
    tab = ignition_approx_study(medium, base, dirs, cfg.approx.eps, sim=cfg.sim_kwargs(),
                                eig=cfg.eigen_kwargs(), reference=cfg.approx.reference,
                                threads=threads)
    w.text("approx.csv", csv_text(["angle", "eps", "c", "uncertainty", "reference", "flags"],
                                  tab.rows()))
    w.text("approx_summary.csv", csv_text(["eps", "sup_gap", "relative_sup_gap",
                                           "monotonicity_violations"], tab.summary_rows()))
    w.text("approx.json", json_text({
        "reference_method": tab.reference_method, "eps": tab.eps_list, "sup_gap": tab.sup_gap,
        "relative_sup_gap": tab.relative_sup_gap, "gap_decreasing": tab.gap_decreasing,
        "monotonicity_violations": [list(v) for v in tab.monotonicity_violations],
        "above_reference": [list(v) for v in tab.above_reference]}))
    series = [(f"angle {d.angle:.4f}", tab.eps_list, [c.c for c in tab.cells[i]])
              for i, d in enumerate(tab.directions)]
    w.text("approx.svg", line_plot_svg(series, "ignition-approximation speeds", "eps", "c_eps"))


def _references(cfg: RunConfig, medium, nl, dirs, threads):
    refs = cfg.validate.references
    if isinstance(refs, list):
        if len(refs) != len(dirs):
            raise ConfigError(f"validate.references has {len(refs)} entries for {len(dirs)} directions")
        return refs
    if refs == "eigen_lin":
        kw = cfg.eigen_kwargs()
        return [r.c_lin for r in parallel_map(lambda n: linear_speed(medium, nl, n, **kw), dirs,
                                              threads)]
    kw = cfg.sim_kwargs()
    return [m.speed for m in parallel_map(lambda n: measure_speed(medium, nl, n, **kw), dirs,
                                          threads)]


def cmd_validate(cfg: RunConfig, w: RunWriter, threads: int) -> None:
    medium = cfg.build_medium()
    nl = cfg.build_nonlinearity(medium)
    dirs = cfg.build_directions(medium.dim)
    v, s = cfg.validate, cfg.simulation
    refs = _references(cfg, medium, nl, dirs, threads)
    mu = s.mu if s.mu is not None else planar_defaults(nl, dirs[0]).mu
    rep = uniform_spreading_check(medium, nl, dirs, refs, v.alpha, v.delta, s.t_end, s.h, s.C,
                                  s.K, mu, v.gate, threads, s.cadence)
    doc = {"spreading": rep.to_dict()}
    w.text("spreading.csv", csv_text(["angle", "reference", "tau", "inconclusive"],
                                     zip(rep.angles, rep.references, rep.taus, rep.inconclusive)))
    if nl.is_ignition:
        sup = v.supersolution
        spec = make_supersolution(medium, nl, sup.lam, s.C)
        checks = [check_supersolution(spec, n, sup.t_window)
                  for n in directions_on_circle(sup.directions, medium.dim)]
        w.text("supersolution.csv", csv_text(
            ["angle", "lambda", "min_residual", "scale", "active_points", "passed"],
            [(c.direction.angle, c.lam, c.min_residual, c.scale, c.active_points, c.passed)
             for c in checks]))
        doc["supersolution"] = {"lambda": spec.lam, "C": spec.C, "a": spec.a,
                                "passed": all(c.passed for c in checks)}
    elif nl.is_monostable:
        lb = v.lower_bound
        reps = parallel_map(lambda n: ignition_lower_bound_check(medium, nl, lb.eps, n, lb.t_end,
                                                                 s.h, s.C, s.K), dirs, threads)
        w.text("lower_bound.csv", csv_text(
            ["angle", "eps", "min_difference", "ordered", "t_reach"],
            [(r.direction.angle, r.eps, r.min_difference, r.ordered, r.t_reach) for r in reps]))
        doc["lower_bound"] = {"eps": lb.eps, "ordered": all(r.ordered for r in reps),
                              "t_reach": [r.t_reach for r in reps]}
    w.text("spreading_report.json", json_text(doc))


def cmd_profile(cfg: RunConfig, w: RunWriter, threads: int) -> None:
    medium = cfg.build_medium()
    nl = cfg.build_nonlinearity(medium)
    n = Direction.from_angle(cfg.profile.angle, medium.dim)
    kw = cfg.sim_kwargs()
    m = measure_speed(medium, nl, n, init=_init_for(cfg, nl, n), keep_states=True, **kw)
    prof = extract_profile(m.states, n, m.speed, medium.cell, cfg.profile.transient_cut,
                           lower=nl.lower, boundary_margin=cfg.profile.boundary_margin,
                           trace=m.trace)
    try:
        lam = decay_rate(prof)
    except NumericalError:
        lam = math.nan
    w.text("profile.csv", csv_text(["z", "x_bin", "U"], prof.rows()))
    w.text("front_trace.csv", csv_text(["t", "position", "level"], m.trace.rows()))
    w.text("profile.json", json_text({
        "angle": n.angle, "speed": m.speed, "uncertainty": m.uncertainty,
        "shift": prof.shift, "pulsating_residual": prof.pulsating_residual,
        "monotonicity_violation": prof.monotonicity_violation(), "decay_rate": lam}))
    mean = prof.mean_profile()
    w.text("profile.svg", line_plot_svg([("cell-averaged U", list(prof.z), list(mean))],
                                        "moving-frame profile", "z = x.n - c t", "U"))


COMMANDS = {"eigen": cmd_eigen, "speed": cmd_speed, "scan": cmd_scan, "approx": cmd_approx,
            "validate": cmd_validate, "profile": cmd_profile}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent directions/eps values")
    p = argparse.ArgumentParser(prog="frontspeed", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"frontspeed {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"eigen": "linearized speeds from the periodic eigenproblem",
             "speed": "front speed from a direct simulation",
             "scan": "speed curve over directions with a continuity check",
             "approx": "ignition-approximation convergence table",
             "validate": "spreading, barrier and lower-bound checks",
             "profile": "moving-frame wave profile and pulsating residual"}
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.config)
        w = RunWriter(args.out)
        COMMANDS[args.command](cfg, w, args.threads)
        inputs = {"config_sha256": sha256_file(args.config),
                  "medium_hash": cfg.build_medium().hash()}
        w.manifest(args.command, cfg, inputs, started)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EigenSolverError as exc:
        print(f"numerical failure: {exc} (residual {exc.residual:.3e}, "
              f"iterations {exc.iterations})", file=sys.stderr)
        return EXIT_NUMERICAL
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
