"""Command-line front end.

    bpsosc --task <task> --scenario <file.json> --out <dir> [--threads N] [--seed S]

Each run writes ``<task>-<hash>.csv``, ``<task>-<hash>.json`` and
``<task>-<hash>.manifest.json`` where <hash> identifies the scenario
content.  Exit codes: 0 success, 2 validation failure, 3 numerical
failure, 4 sector violation.
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import frobenius, gv, largen, oscillator, rh
from .core import active_rays, dt_spectrum, is_uncoupled
from .errors import BpsoscError
from .extrapolation import richardson
from .scenario import load_scenario
from .specfun import upsilon_asymptotic_fit

__all__ = ["main", "run", "TASKS", "format_value"]


def _version():
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def format_value(x):
    """Canonical text for CSV cells; floats with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if x == 0:
            return "0"
        return format(x, ".17g")
    if isinstance(x, (tuple, list)):
        return "(" + " ".join(format_value(v) for v in x) + ")"
    if x is None:
        return ""
    return str(x)


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def _charge(c):
    return "(" + " ".join(str(x) for x in c) + ")"


def _oscillator(s, o, m, hbar):
    g, b = o["gamma"], o["beta"]
    return oscillator.SimpleOscillator.from_classes(
        m, s.pairing(g, b), s.omega_of(g), s.central_charge(g), s.central_charge(b), hbar)


# each task returns (columns, rows, summary)

def task_check_structure(sc, pool):
    s = sc.structure
    cols = ["class", "omega", "dt", "z_re", "z_im", "abs_z", "arg_z"]
    rows = []
    for c in s.active_classes():
        z = s.central_charge(c)
        rows.append([_charge(c), s.omega_of(c), dt_spectrum(s, c), z.real, z.imag, abs(z), math.atan2(z.imag, z.real)])
    rays = [{"direction": _c(d), "classes": [list(c) for c in cl]} for d, cl in active_rays(s)]
    unc = is_uncoupled(s)
    print(f"uncoupled: {'true' if unc else 'false'}")
    return cols, rows, {"uncoupled": unc, "rank": s.rank, "active_classes": len(rows), "rays": rays}


def task_frobenius_audit(sc, pool):
    s = sc.structure
    cols = ["subset", "size", "flat", "av_commute", "v_skew", "u_linear", "passed", "witness_entry", "witness_max_abs_at_probe"]
    rng = np.random.default_rng(sc.seed)
    probe = rng.uniform(0.5, 2.0, size=s.rank) + 1j * rng.uniform(-1.0, 1.0, size=s.rank)

    def job(args):
        k, delta = args
        rep = frobenius.check_frobenius_axioms(s, delta)
        entry, value = "", None
        if rep.witness is not None:
            j, i, form = rep.witness
            entry = f"({j} {i})"
            value = max((abs(complex(v)) for v in form.evaluate(list(probe)).values()), default=0.0)
        return [k, rep.details["size"], rep.flat, rep.av_commute, rep.v_skew, rep.u_linear, rep.passed,
                entry, value]
    rows = list(pool.map(job, list(enumerate(sc.frobenius_subsets))))
    summary = {"subsets": [[list(c) for c in d] for d in sc.frobenius_subsets],
               "all_passed": all(r[6] for r in rows), "probe": [_c(z) for z in probe]}
    return cols, rows, summary


def task_stokes(sc, pool):
    s = sc.structure
    cols = ["gamma", "beta", "m", "hbar", "pairing", "omega",
            "analytic_re", "analytic_im", "numeric_re", "numeric_im", "hypergeometric_re", "hypergeometric_im",
            "minus_analytic_re", "minus_analytic_im", "minus_numeric_re", "minus_numeric_im",
            "rel_error", "max_det_deviation"]
    jobs = [(o, m, h) for o in sc.oscillators for m in o["m"] for h in sc.hbar]

    def job(args):
        o, m, h = args
        osc = _oscillator(s, o, m, h)
        Sa, Sma = oscillator.stokes_analytic(osc)
        Sn, Smn, info = oscillator.stokes_numeric(osc)
        Sh, _ = oscillator.stokes_via_hypergeometric(osc)
        a, n = Sa[0, 1], Sn[0, 1]
        rel = abs(n - a) / abs(a) if a != 0 else abs(n - a)
        return [_charge(o["gamma"]), _charge(o["beta"]), m, h, osc.pairing, osc.omega,
                *_c(a), *_c(n), *_c(Sh[0, 1]), *_c(Sma[1, 0]), *_c(Smn[1, 0]), rel, info["max_det_deviation"]]
    rows = list(pool.map(job, jobs))
    return cols, rows, {"max_rel_error": max((r[16] for r in rows), default=0.0)}


def task_rh_solve(sc, pool):
    s = sc.structure
    rule = sc.rule()
    entries = ["psi11", "psi12", "psi21", "psi22"]
    cols = ["gamma", "beta", "m", "hbar", "t_re", "t_im"]
    cols += [f"{e}_{p}" for e in entries for p in ("re", "im")]
    cols += ["diff_first_order", "diff_ode"]
    jobs = [(o, m, h, t) for o in sc.oscillators for m in o["m"] for h in sc.hbar for t in sc.rh["t"]]

    def job(args):
        o, m, h, t = args
        osc = _oscillator(s, o, m, h)
        P = rh.picard_solve(osc, t, sc.rh["max_iter"], sc.rh["tol"], rule)
        F1 = rh.first_order_psi(osc, t, rule=rule)
        _, psi_ode = oscillator.fundamental_solution(osc, t)
        vals = [x for e in P.ravel() for x in _c(e)]
        return [_charge(o["gamma"]), _charge(o["beta"]), m, h, t.real, t.imag, *vals,
                float(np.max(np.abs(P - F1))), float(np.max(np.abs(P - psi_ode)))]
    rows = list(pool.map(job, jobs))
    return cols, rows, {"points": len(rows)}


def task_large_n(sc, pool):
    s = sc.structure
    rule = sc.rule()
    cols = ["j", "label", "t_re", "t_im", "M", "partial_re", "partial_im", "target_re", "target_im",
            "abs_error", "fitted_order", "extrapolated_re", "extrapolated_im", "extrapolated_error"]
    jobs = [(j, t) for t in sc.t for j in range(s.rank)]
    hbar = sc.hbar[0]

    def job(args):
        j, t = args
        vals = [largen.log_partial_sum_psi(s, j, t, hbar, M, sc.ray_angle, rule=rule) for M in sc.M]
        target = largen.log_lambda_product_target(s, j, t, sc.ray_angle)
        rep = largen.limit_report(sc.M, vals, target)
        return [j, sc.basis_labels[j], t.real, t.imag, rep.M, *_c(rep.partial), *_c(rep.target),
                rep.abs_error, rep.fitted_order, *_c(rep.extrapolated), abs(rep.extrapolated - rep.target)]
    rows = list(pool.map(job, jobs))
    return cols, rows, {"hbar": hbar, "M": sc.M, "ray_angle": sc.ray_angle,
                        "family": [list(c) for c in largen.half_plane_family(s, sc.ray_angle)]}


def task_tau(sc, pool):
    s = sc.structure
    rule = sc.rule()
    cols = ["t_re", "t_im", "hbar", "index", "dlog_tau_re", "dlog_tau_im", "upsilon_target_re", "upsilon_target_im",
            "ratio_re", "ratio_im", "residual_literal", "residual_jacobian"]
    jobs = [(t, h) for t in sc.t for h in sc.hbar]
    Mmax = sc.M[-1]

    def job(args):
        t, h = args
        lit = largen.tau_equation_residual(s, t, h, Mmax, sc.ray_angle, sc.tau_h, rule)
        jac = largen.tau_equation_residual(s, t, h, Mmax, sc.ray_angle, sc.tau_h, rule, jacobian=True)
        out = []
        for k in range(s.rank):
            d = richardson(sc.M, [largen.tau_log_derivative(s, k, t, h, M, sc.ray_angle, sc.tau_h, rule) for M in sc.M])
            tgt = largen.upsilon_log_derivative_target(s, k, t, sc.ray_angle)
            ratio = d / tgt if tgt != 0 else complex(math.nan, math.nan)
            out.append([t.real, t.imag, h, k, *_c(d), *_c(tgt), *_c(ratio), lit[k], jac[k]])
        return out
    rows = [r for block in pool.map(job, jobs) for r in block]
    return cols, rows, {"M": sc.M, "h": sc.tau_h,
                        "note": "ratio compares the extrapolated tau derivative with Omega d/dZ log Upsilon(Z/t)"}


def task_gv_compare(sc, pool):
    if sc.gv is None:
        from .errors import ValidationError
        raise ValidationError("gv-compare needs a 'gv' block", "gv")
    g_cfg = sc.gv
    table = g_cfg["table"]
    cols = ["g", "constant_exact", "curve_prefactors_exact", "coefficient_re", "coefficient_im",
            "tau_side_re", "tau_side_im", "gv_side_re", "gv_side_im", "rel_error"]
    gs = list(range(2, g_cfg["g_max"] + 1))
    fit = upsilon_asymptotic_fit(g_max=max(gs + [3]), ws=tuple(np.geomspace(8.0, 80.0, 24)), terms=8)

    def job(g):
        coeff = gv.gv_coefficient(g_cfg["chi"], table, g)
        tau_side, gv_side, rel = gv.gv_tau_comparison(table, g, g_cfg["n_window"], g_cfg["omega"], fit)
        pref = ";".join(f"{k}={v}" for k, v in coeff.curve_prefactors.items())
        return [g, coeff.constant, pref, *_c(coeff.value(table)), *_c(tau_side), *_c(gv_side), rel]
    rows = list(pool.map(job, gs))
    series = gv.gv_series(g_cfg["chi"], table, g_cfg["g_max"])
    ctx = gv.cy_bps_structure(table, min(g_cfg["n_window"], 50), g_cfg["omega"])
    tau_sum = gv.oscillator_tau_sum_cy(ctx, g_cfg["tau_t"], sc.hbar[0], sc.M[-1], rule=sc.rule())
    return cols, rows, {"series": series.to_json(),
                        "oscillator_tau_sum": {"t": _c(g_cfg["tau_t"]), "n_window": ctx.n_window,
                                               "value": _c(tau_sum["value"]), "m_tail": tau_sum["m_tail"],
                                               "n_shell": tau_sum["n_shell"]}}


TASKS = {
    "check-structure": task_check_structure,
    "frobenius-audit": task_frobenius_audit,
    "stokes": task_stokes,
    "rh-solve": task_rh_solve,
    "large-n": task_large_n,
    "tau": task_tau,
    "gv-compare": task_gv_compare,
}


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not serializable: {type(x)}")


def run(task, scenario_path, out_dir, threads=1, seed=None):
    """Run a task and write its artifacts; returns the list of written paths."""
    if task not in TASKS:
        from .errors import ValidationError
        raise ValidationError(f"unknown task {task!r}; choose from {sorted(TASKS)}", "--task")
    sc = load_scenario(scenario_path, seed)
    os.makedirs(out_dir, exist_ok=True)
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        cols, rows, summary = TASKS[task](sc, pool)
    stem = os.path.join(out_dir, f"{task}-{sc.hash}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([format_value(v) for v in r])
    paths = [stem + ".csv", stem + ".json", stem + ".manifest.json"]
    with open(paths[0], "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    with open(paths[1], "w", encoding="utf-8") as fh:
        json.dump({"task": task, "scenario_hash": sc.hash, "summary": summary}, fh,
                  indent=2, sort_keys=True, default=_json_default)
    manifest = {
        "task": task,
        "scenario": os.path.abspath(scenario_path),
        "scenario_hash": sc.hash,
        "package_version": _version(),
        "threads": int(threads),
        "seed": sc.seed,
        "resolved": sc.resolved(),
        "defaults_applied": sc.defaults_applied,
        "outputs": [os.path.basename(p) for p in paths[:2]],
        "csv_columns": cols,
    }
    with open(paths[2], "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
    return paths


def main(argv=None):
    p = argparse.ArgumentParser(prog="bpsosc", description="Oscillator, RH and tau-function pipelines for BPS structures.")
    p.add_argument("--task", required=True, choices=sorted(TASKS))
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
    args = p.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be positive (at --threads)", file=sys.stderr)
        return 2
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer (at --seed)", file=sys.stderr)
        return 2
    try:
        paths = run(args.task, args.scenario, args.out, args.threads, args.seed)
    except BpsoscError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
