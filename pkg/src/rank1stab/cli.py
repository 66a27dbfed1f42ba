"""Command-line interface.

Subcommands: check, perturb, svd-cond, simulate, bode, margin-study,
feasibility.  Numeric tables are CSV (stdout or --out); scalar results are a
single JSON object on stdout.  Exit codes: 0 success/stable, 1 negative
verdict (unstable / condition unsatisfied / infeasible), 2 input error,
3 non-finite simulation state.  RANK1_LOG=debug|info enables diagnostics on
stderr.
"""

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import diagstab, numerics, reduced, sim
from .config import load_config
from .errors import ConfigError, HypothesisViolated, NonFiniteState, Rank1StabError

log = logging.getLogger("rank1stab.cli")


def _setup_logging():
    level_name = os.environ.get("RANK1_LOG", "").lower()
    level = {"debug": logging.DEBUG, "info": logging.INFO}.get(level_name,
                                                               logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(name)s %(levelname)s: %(message)s")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit_json(obj):
    print(json.dumps(_jsonable(obj)))


def _emit_csv(rows, header, out_path):
    if out_path:
        with open(out_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(header)
            w.writerows(rows)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(rows)


def _parse_vector(text, name):
    try:
        vec = np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError as exc:
        raise ConfigError(f"--{name}: expected comma-separated numbers") from exc
    if vec.size == 0:
        raise ConfigError(f"--{name}: empty vector")
    return vec


def _load_json(path):
    with open(path) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def _system_from_args(args):
    if args.file:
        doc = _load_json(args.file)
        if not isinstance(doc, dict) or not all(k in doc for k in ("delta", "x", "y")):
            raise ConfigError(f"{args.file}: need keys delta, x, y")
        delta, x, y = (np.asarray(doc[k], dtype=float) for k in ("delta", "x", "y"))
    else:
        if not (args.delta and args.x and args.y):
            raise ConfigError("give either --file or all of --delta/--x/--y")
        delta = _parse_vector(args.delta, "delta")
        x = _parse_vector(args.x, "x")
        y = _parse_vector(args.y, "y")
    return diagstab.Rank1System(delta, x, y)


def cmd_check(args) -> int:
    system = _system_from_args(args)
    report = diagstab.check_rank1(system)
    out = {
        "stable": report.stable,
        "margin_mu": report.margin_mu,
        "boundary": report.boundary,
        "certificate_d": None,
        "slack": None,
    }
    if report.stable:
        try:
            cert = diagstab.certificate(system)
            out["certificate_d"] = cert.certificate_d
            out["slack"] = cert.slack
        except HypothesisViolated as exc:
            # verdict-only mode: the closed-form certificate needs x_i != 0
            # and y_i > 0
            out["certificate_note"] = str(exc)
    _emit_json(out)
    return 0 if report.stable else 1


def cmd_perturb(args) -> int:
    doc = _load_json(args.file)
    required = ("delta", "x", "y", "e_matrix")
    if not isinstance(doc, dict) or not all(k in doc for k in required):
        raise ConfigError(f"{args.file}: need keys {', '.join(required)}")
    base = diagstab.Rank1System(
        np.asarray(doc["delta"], float), np.asarray(doc["x"], float),
        np.asarray(doc["y"], float),
    )
    e = np.asarray(doc["e_matrix"], dtype=float)
    psys = diagstab.PerturbedSystem(base, 0.0, e)
    sigma_max = diagstab.perturbation_bound(psys)
    cert = diagstab.certificate(base)
    grid_spec = doc.get("sigma_grid", {})
    lo = float(grid_spec.get("min", -1.5 * sigma_max))
    hi = float(grid_spec.get("max", 1.5 * sigma_max))
    count = int(grid_spec.get("count", 41))
    dmat = np.diag(cert.certificate_d)
    rows = []
    for s in np.linspace(lo, hi, count):
        a = psys.matrix(sigma=float(s))
        lam = float(numerics.sym_eig(a.T @ dmat + dmat @ a).values[-1])
        rows.append([repr(float(s)), repr(lam), lam < 0.0])
    _emit_json({
        "sigma_max": sigma_max,
        "mu": cert.margin_mu,
        "certificate_d": cert.certificate_d,
        "norm_e": numerics.spectral_norm(e),
    })
    _emit_csv(rows, ["sigma", "lam_max_certified", "negative_definite"], args.out)
    return 0


def cmd_svd_cond(args) -> int:
    doc = _load_json(args.file)
    if not isinstance(doc, dict) or "delta" not in doc or "s_matrix" not in doc:
        raise ConfigError(f"{args.file}: need keys delta, s_matrix")
    rep = diagstab.svd_condition(np.asarray(doc["delta"], float),
                                 np.asarray(doc["s_matrix"], float))
    _emit_json({
        "applicable": rep.applicable,
        "satisfied": rep.satisfied,
        "rho": rep.rho,
        "sigma1": rep.sigma1,
        "sigma2": rep.sigma2,
        "rhs": rep.rhs,
        "orientation": rep.orientation,
    })
    return 0 if rep.satisfied else 1


def _summary_full(net, trace):
    names = [a.name for a in net.areas]
    out = {}
    for name in names:
        ace_abs = np.abs(trace[f"ace:{name}"])
        below = ace_abs < 1e-4
        conv = None
        for i in range(len(below)):
            if below[i:].all():
                conv = float(trace.times[i])
                break
        out[name] = {
            "final_abs_ace": float(ace_abs[-1]),
            "final_abs_f_dev": float(abs(trace[f"f_dev:{name}"][-1])),
            "final_abs_ni_dev": float(abs(trace[f"ni_dev:{name}"][-1])),
            "ace_convergence_time": conv,
        }
    return out


def cmd_simulate(args) -> int:
    cfg_doc = load_config(args.config)
    net = cfg_doc.network()
    if args.seed is not None:
        cfg_doc.doc["sim"]["seed"] = args.seed
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    summary = {"mode": args.mode, "areas": [a.name for a in net.areas]}

    def do_full():
        return sim.run_full(net, cfg_doc.sim_config("full"))

    def do_reduced():
        model = reduced.build_reduced(net)
        return sim.run_reduced(model, cfg_doc.sim_config("reduced"),
                               area_names=[a.name for a in net.areas])

    traces = {}
    if args.mode == "both" and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            f_full = pool.submit(do_full)
            f_red = pool.submit(do_reduced)
            traces["full"] = f_full.result()
            traces["reduced"] = f_red.result()
    else:
        if args.mode in ("full", "both"):
            traces["full"] = do_full()
        if args.mode in ("reduced", "both"):
            traces["reduced"] = do_reduced()

    for kind, trace in traces.items():
        path = os.path.join(out_dir, f"trace_{kind}.csv")
        trace.to_csv(path)
        summary[f"trace_{kind}"] = path
    if "full" in traces:
        summary["full"] = _summary_full(net, traces["full"])
    if "reduced" in traces:
        tr = traces["reduced"]
        summary["reduced"] = {
            a.name: {"final_abs_ace": float(abs(tr[f"ace:{a.name}"][-1]))}
            for a in net.areas
        }
    if args.mode == "both":
        eta_cols = [f"eta:{a.name}" for a in net.areas]
        gaps = sim.compare_traces(traces["full"], traces["reduced"], eta_cols)
        summary["eta_gaps"] = gaps
    _emit_json(summary)
    return 0


def _area_index(net, text):
    if text.isdigit():
        idx = int(text) - 1
        if not 0 <= idx < net.n_areas:
            raise ConfigError(f"area index {text} out of range")
        return idx
    return net.area_index(text)


def cmd_bode(args) -> int:
    cfg_doc = load_config(args.config)
    net = cfg_doc.network()
    model = reduced.build_reduced(net)
    i = _area_index(net, args.area)
    j = _area_index(net, args.cross) if args.cross else i
    ppd = cfg_doc.study("bode")["points_per_decade"]
    tp = float(model.tau_tilde[0])
    grid = np.logspace(-4, 4, 8 * ppd + 1) / tp
    rows = []
    peak = 0.0
    for w in grid:
        val = reduced.sensitivity(model, i, j, float(w))
        mag = abs(val)
        peak = max(peak, mag)
        rows.append([repr(float(w)), repr(mag),
                     repr(float(np.degrees(np.angle(val))))])
    summary = {"area_i": net.areas[i].name, "area_j": net.areas[j].name,
               "peak_sweep": peak}
    if i == j:
        summary["peak_analytic"] = reduced.hinf_ii(model, i)
    _emit_json(summary)
    _emit_csv(rows, ["omega_rad_per_s", "magnitude", "phase_deg"], args.out)
    return 0


def cmd_margin_study(args) -> int:
    cfg_doc = load_config(args.config)
    model = reduced.build_reduced(cfg_doc.network())
    if args.kappas:
        kappas = [float(v) for v in args.kappas.split(",")]
    else:
        kappas = cfg_doc.study("margin")["kappas"]
    rows = []
    for kappa in kappas:
        ms = reduced.margin_study(model, kappa)
        rows.append([repr(ms.kappa), repr(ms.q_min_eig), repr(ms.nominal_bound),
                     ms.bound_holds])
    _emit_csv(rows, ["kappa", "q_min_eig", "nominal_bound", "bound_holds"],
              args.out)
    return 0


def cmd_feasibility(args) -> int:
    cfg_doc = load_config(args.config)
    net = cfg_doc.network()
    from .agc import check_feasibility

    flags = check_feasibility(net)
    _emit_json({a.name: bool(ok) for a, ok in zip(net.areas, flags)})
    return 0 if bool(np.all(flags)) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rank1stab",
        description="Rank-1 diagonal stability tests and multi-area AGC studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="diagonal stability of -diag(delta)+x y'")
    p.add_argument("--file", help="JSON file with keys delta, x, y")
    p.add_argument("--delta", help="comma-separated positive values")
    p.add_argument("--x", help="comma-separated values")
    p.add_argument("--y", help="comma-separated nonnegative values")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("perturb", help="perturbation bound and stability scan")
    p.add_argument("--file", required=True,
                   help="JSON with delta, x, y, e_matrix[, sigma_grid]")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("svd-cond", help="dominant-mode SVD stability condition")
    p.add_argument("--file", required=True, help="JSON with delta, s_matrix")
    p.set_defaults(func=cmd_svd_cond)

    p = sub.add_parser("simulate", help="closed-loop and/or reduced simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=("full", "reduced", "both"), default="full")
    p.add_argument("--out", help="output directory for trace CSVs (default .)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bode", help="sensitivity frequency response data")
    p.add_argument("--config", required=True)
    p.add_argument("--area", required=True, help="area name or 1-based index")
    p.add_argument("--cross", help="disturbance area for cross terms")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("margin-study", help="stability margin vs bias scaling")
    p.add_argument("--config", required=True)
    p.add_argument("--kappas", help="comma-separated bias scalings")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_margin_study)

    p = sub.add_parser("feasibility", help="per-area regulation capacity check")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_feasibility)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteState as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (Rank1StabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
