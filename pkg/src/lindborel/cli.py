"""Command line entry point: ``lindborel <command> [options]``.

Every command writes its tables and reports into ``--out`` together with a
``manifest.json`` listing each file with its SHA-256.  Exit status: 0 success,
2 invalid input, 3 numerical failure, 4 infeasible request.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys as _sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import borel_lab as bl
from .fourier_algebra import EquilibriumViolated, NotHyperbolic
from .freq_diophantine import (ScaleOutOfRange, ScaleSequence, SequenceInfeasible, build_scale_sequence,
                               verify_scale_sequence)
from .io import OutputDir, RunConfig, SchemaError, bundled_system_path, csv_text, file_hash, json_text, load_system
from .lindstedt_recursion import ObstructionNonzero, residual, solve_up_to
from .tree_engine import (SingularDenominator, TreeEnumerator, TruncationExceeded, flatten, formal_series,
                          reexpand_in_eps)
from .verify_dynamics import StepTooLarge, horizon, integrate_ode, parametrized_trajectory, torus_deviation

log = logging.getLogger("lindborel")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4
VALIDATION_ERRORS = (SchemaError, NotHyperbolic, EquilibriumViolated, TruncationExceeded, FileNotFoundError)
NUMERIC_ERRORS = (SingularDenominator, ObstructionNonzero, StepTooLarge, bl.TailNotNegligible,
                  bl.ContourTruncationTooSmall, bl.InsufficientData, FloatingPointError)
INFEASIBLE_ERRORS = (SequenceInfeasible, ScaleOutOfRange)


def _pair(text: str) -> tuple[int, int]:
    parts = [int(v) for v in text.replace(" ", "").split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two integers 'n1,n2'")
    return parts[0], parts[1]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _series_rows(series, only_nu=None, only_gamma=None):
    for row in series.to_rows():
        k, n1, n2, g, re, im = row
        if only_nu is not None and (n1, n2) != tuple(only_nu):
            continue
        if only_gamma is not None and g != only_gamma:
            continue
        yield row


def _scale_sequence(sys, args) -> ScaleSequence:
    if getattr(args, "gammas", None):
        gam = [Fraction(v) for v in args.gammas.split(",")]
        return ScaleSequence(gam, sys.freq.C0)
    return build_scale_sequence(sys.freq, args.P)


# ----------------------------------------------------------------------
# commands


def cmd_series(sys, cfg: RunConfig, out: OutputDir, args) -> dict:
    H = solve_up_to(sys, cfg.K)
    out.write("coefficients.csv", csv_text(["k", "nu1", "nu2", "gamma", "re", "im"], H.h.to_rows()))
    res = {repr(e): residual(sys, H, e, cfg.grid) for e in cfg.etas}
    summary = {"K": cfg.K, "sup_norms": H.h.sup_norms(), "residuals": res, "modes_per_order": [len(p) for p in H.h.orders]}
    out.write("summary.json", json_text(summary))
    return summary


def cmd_trees(sys, cfg: RunConfig, out: OutputDir, args) -> dict:
    K = cfg.K
    H = solve_up_to(sys, K)
    if args.mode == "formal":
        en = TreeEnumerator(sys, "formal")
        S = formal_series(sys, K, en)
    else:
        seq = _scale_sequence(sys, args)
        en = TreeEnumerator(sys, "resummed", seq)
        S = reexpand_in_eps(sys, seq, K, cfg.scheme, max(cfg.K_se, K - 1) if args.full_se else cfg.K_se)
    counts = []
    for m in range(1, K + 1):
        for nu, trees in sorted(en.subtrees(m).items()):
            if args.root_nu is None or nu == args.root_nu:
                counts.append((m, nu[0], nu[1], len(trees)))
    out.write("tree_counts.csv", csv_text(["order", "nu1", "nu2", "count"], counts))
    rows, worst = [], []
    for k in range(1, K + 1):
        ref, got = H.h.orders[k], S.orders[k]
        scale = max(ref.max_abs(), 1e-300)
        modes = sorted(set(ref.terms) | set(got.terms))
        w = 0.0
        for nu in modes:
            if args.root_nu is not None and nu != args.root_nu:
                continue
            a, b = got.coef(nu), ref.coef(nu)
            for g in range(sys.dim):
                if args.root_gamma is not None and g != args.root_gamma:
                    continue
                d = abs(a[g] - b[g])
                w = max(w, d / scale)
                rows.append((k, nu[0], nu[1], g, float(a[g].real), float(a[g].imag), float(b[g].real),
                             float(b[g].imag), float(d)))
        worst.append(w)
    out.write("comparison.csv", csv_text(["k", "nu1", "nu2", "gamma", "tree_re", "tree_im", "recursion_re",
                                          "recursion_im", "abs_diff"], rows))
    if args.dump_trees:
        if args.root_nu is None:
            raise SchemaError("--dump-trees needs --root-nu")
        dump = [flatten(t, args.root_gamma).to_json() for t in en.trees(K, args.root_nu)]
        out.write("trees.json", json_text(dump))
    summary = {"order": K, "mode": args.mode, "scheme": cfg.scheme, "tree_count": sum(c[-1] for c in counts),
               "max_relative_difference": worst}
    out.write("summary.json", json_text(summary))
    return summary


def cmd_scales(sys, cfg: RunConfig, out: OutputDir, args) -> dict:
    seq = build_scale_sequence(sys.freq, cfg.P)
    out.write("gammas.csv", seq.to_csv().replace("\n", "\r\n"))
    rep = verify_scale_sequence(seq, sys.freq)
    report = {"P": cfg.P, "C0": [seq.C0.numerator, seq.C0.denominator], "ok": rep.ok,
              "first_violation": rep.first_violation}
    out.write("verify.json", json_text(report))
    return report


def _read_coefficients(path: Path, nu, gamma) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SchemaError("input: no rows")
    if "nu1" in rows[0]:
        nu = nu or (1, 0)
        gamma = 0 if gamma is None else gamma
        vals = {}
        for r in rows:
            if (int(r["nu1"]), int(r["nu2"])) == tuple(nu) and int(r["gamma"]) == gamma:
                vals[2 * int(r["k"])] = complex(float(r["re"]), float(r["im"]))
    else:
        vals = {int(r["k"]): complex(float(r["re"]), float(r.get("im", 0.0) or 0.0)) for r in rows}
    if not vals:
        raise SchemaError("input: selected coefficient list is empty")
    c = np.zeros(max(vals) + 1, complex)
    for k, v in vals.items():
        c[k] = v
    return c


def cmd_borel(sys, cfg: RunConfig, out: OutputDir, args) -> dict:
    if args.input:
        c = _read_coefficients(Path(args.input), args.root_nu, args.root_gamma)
        source = "input"
    else:
        H = solve_up_to(sys, cfg.K // 2 if cfg.K >= 2 else 1)
        c = np.array(H.eta_coefficients(), complex)
        source = "norms"
    F = bl.borel_transform(c)
    out.write("transform.csv", csv_text(["k", "re", "im"], [(k + 1, float(v.real), float(v.imag))
                                                           for k, v in enumerate(F.coeffs)]))
    sums = []
    for e in cfg.etas:
        L = bl.laplace_sum(F, e)
        partial = F.laplace_exact(e)
        sums.append((e, float(L.value.real), float(L.value.imag), float(np.real(partial)), float(np.imag(partial)),
                     float(abs(L.value - partial)), L.p_max, L.tail_bound))
    out.write("sums.csv", csv_text(["eta", "laplace_re", "laplace_im", "partial_re", "partial_im", "difference",
                                    "p_max", "tail_bound"], sums))
    mags = [abs(v) for v in c]
    fit = bl.growth_fit(mags, tau_fixed=1.0)
    free = None
    try:
        g = bl.growth_fit(mags)
        free = {"D": g.D, "C": g.C, "tau": g.tau_est, "residual": g.residual}
    except bl.InsufficientData:
        pass
    report = {"source": source, "fixed_tau": {"D": fit.D, "C": fit.C, "tau": fit.tau_est, "residual": fit.residual,
                                             "envelope_holds": fit.holds(mags)}, "free_tau": free}
    out.write("growthfit.json", json_text(report))
    return report


def cmd_verify(sys, cfg: RunConfig, out: OutputDir, args) -> dict:
    K = max(1, cfg.K)
    H = solve_up_to(sys, K + 2)
    etas = sorted(cfg.etas, reverse=True)
    residual_table, slopes = {}, {}
    for k in range(1, K + 1):
        r = [residual(sys, H.h.truncate(k), e, cfg.grid) for e in etas]
        residual_table[str(k)] = r
        slopes[str(k)] = _slope(etas, r) if len(etas) > 1 else None
    dev_table, dev_slopes, drift = {}, {}, 0.0
    for k in range(1, K + 1):
        d = []
        for e in etas:
            dv, dr = torus_deviation(sys, H.h.truncate(k), e, reference=H.h.truncate(k + 2))
            d.append(dv.sup)
            drift = max(drift, dr)
        dev_table[str(k)] = d
        dev_slopes[str(k)] = _slope(etas, d) if len(etas) > 1 else None
    e = etas[0]
    T = horizon(sys, e)
    times = np.linspace(0.0, T, 201)
    par = parametrized_trajectory(sys, H.h.truncate(K), (0.0, 0.0), e, times)
    ref = parametrized_trajectory(sys, H.h, (0.0, 0.0), e, times[:2])
    sol = integrate_ode(sys, ref.phi[0], ref.phidot[0], e, times, min(1e-3 / e, T / 4000))
    rows = [(float(t),) + tuple(float(v) for v in par.phi[i]) + tuple(float(v) for v in sol.phi[i])
            for i, t in enumerate(times)]
    names = [f"phi{g}" for g in range(sys.dim)]
    out.write("trajectories.csv", csv_text(["t"] + [n + "_param" for n in names] + [n + "_ode" for n in names], rows))
    report = {"K": K, "etas": etas, "residuals": residual_table, "residual_slopes": slopes,
              "deviations": dev_table, "deviation_slopes": dev_slopes, "energy_drift": max(drift, sol.drift),
              "horizon_factor": 0.5}
    out.write("report.json", json_text(report))
    return report


def cmd_compare_schemes(sys, cfg: RunConfig, out: OutputDir, args) -> dict:
    K = cfg.K
    seq = _scale_sequence(sys, args)
    H = solve_up_to(sys, K)
    K_se = max(cfg.K_se, K - 1)
    A = reexpand_in_eps(sys, seq, K, "A", K_se)
    B = reexpand_in_eps(sys, seq, K, "B", K_se)
    rows, worst = [], {"A_vs_B": [], "A_vs_recursion": [], "B_vs_recursion": []}
    for k in range(1, K + 1):
        scale = max(H.h.orders[k].max_abs(), 1e-300)
        modes = sorted(set(H.h.orders[k].terms) | set(A.orders[k].terms) | set(B.orders[k].terms))
        wab = war = wbr = 0.0
        for nu in modes:
            a, b, r = A.orders[k].coef(nu), B.orders[k].coef(nu), H.h.orders[k].coef(nu)
            for g in range(sys.dim):
                rows.append((k, nu[0], nu[1], g, float(a[g].real), float(a[g].imag), float(b[g].real),
                             float(b[g].imag), float(r[g].real), float(r[g].imag)))
                wab = max(wab, abs(a[g] - b[g]) / scale)
                war = max(war, abs(a[g] - r[g]) / scale)
                wbr = max(wbr, abs(b[g] - r[g]) / scale)
        worst["A_vs_B"].append(wab)
        worst["A_vs_recursion"].append(war)
        worst["B_vs_recursion"].append(wbr)
    out.write("comparison.csv", csv_text(["k", "nu1", "nu2", "gamma", "A_re", "A_im", "B_re", "B_im",
                                          "recursion_re", "recursion_im"], rows))
    summary = {"K": K, "K_se": K_se, "gammas": [str(g) for g in seq.gammas], "max_relative_difference": worst}
    out.write("summary.json", json_text(summary))
    return summary


COMMANDS = {
    "series": cmd_series,
    "trees": cmd_trees,
    "scales": cmd_scales,
    "borel": cmd_borel,
    "verify": cmd_verify,
    "compare-schemes": cmd_compare_schemes,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", help="system JSON file (default: bundled golden pendulum)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="lindborel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser("series", parents=[common], help="direct recursion coefficients")
    s.add_argument("--K", type=int, default=4)
    s.add_argument("--etas", type=_floats, default=[0.05, 0.025, 0.0125])
    s.add_argument("--grid", type=int, default=64)

    t = sub.add_parser("trees", parents=[common], help="tree sums against the recursion")
    t.add_argument("--order", dest="K", type=int, default=3)
    t.add_argument("--mode", choices=["formal", "resummed"], default="formal")
    t.add_argument("--scheme", choices=["a", "b", "A", "B"], default="a")
    t.add_argument("--root-nu", type=_pair)
    t.add_argument("--root-gamma", type=int)
    t.add_argument("--dump-trees", action="store_true")
    t.add_argument("--K-se", dest="K_se", type=int, default=3)
    t.add_argument("--P", type=int, default=12)
    t.add_argument("--gammas", help="explicit comma-separated scale thresholds (rationals)")
    t.add_argument("--full-se", action="store_true", help="raise K_se to order-1 so the re-expansion is complete")

    c = sub.add_parser("scales", parents=[common], help="build and verify the scale sequence")
    c.add_argument("--P", type=int, default=12)

    b = sub.add_parser("borel", parents=[common], help="Borel transform, Laplace sums and growth fit")
    b.add_argument("--input", help="coefficients CSV (k,re,im in eta, or the output of 'series')")
    b.add_argument("--eta-grid", dest="etas", type=_floats, default=[0.05, 0.1])
    b.add_argument("--K", type=int, default=8, help="eta order when no input is given")
    b.add_argument("--root-nu", type=_pair)
    b.add_argument("--root-gamma", type=int)

    v = sub.add_parser("verify", parents=[common], help="residual orders and ODE comparison")
    v.add_argument("--K", type=int, default=2)
    v.add_argument("--etas", type=_floats, default=[0.05, 0.025, 0.0125])
    v.add_argument("--grid", type=int, default=64)

    m = sub.add_parser("compare-schemes", parents=[common], help="re-expanded dressing schemes A and B")
    m.add_argument("--K", type=int, default=3)
    m.add_argument("--K-se", dest="K_se", type=int, default=2)
    m.add_argument("--P", type=int, default=12)
    m.add_argument("--gammas", help="explicit comma-separated scale thresholds (rationals)")
    return p


def _config(args) -> RunConfig:
    cfg = RunConfig(system=args.system, out=args.out)
    for name in ("K", "K_se", "P", "etas", "grid"):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    if hasattr(args, "scheme"):
        cfg.scheme = args.scheme.upper()
    return cfg.validate()


def _parameters(args) -> dict:
    skip = {"out", "verbose", "system"}
    params = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        params[k] = list(v) if isinstance(v, tuple) else v
    return params


def run(command: str, args) -> int:
    """Execute one command; returns the exit status."""
    try:
        cfg = _config(args)
        sys = load_system(cfg.system)
        out = OutputDir(cfg.out)
        t0 = time.perf_counter()
        COMMANDS[command](sys, cfg, out, args)
        src = Path(cfg.system) if cfg.system else bundled_system_path()
        inputs = {"system": file_hash(src)}
        if getattr(args, "input", None):
            inputs["input"] = file_hash(args.input)
        out.write("manifest.json", json_text(out.manifest(command, _parameters(args), inputs)))
        log.info("%s finished in %.2f s", command, time.perf_counter() - t0)
        return EXIT_OK
    except VALIDATION_ERRORS as exc:
        log.error("validation: %s: %s", type(exc).__name__, exc)
        return EXIT_VALIDATION
    except INFEASIBLE_ERRORS as exc:
        log.error("infeasible: %s: %s", type(exc).__name__, exc)
        return EXIT_INFEASIBLE
    except NUMERIC_ERRORS as exc:
        log.error("numeric: %s: %s", type(exc).__name__, exc)
        return EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    return run(args.command, args)


if __name__ == "__main__":
    _sys.exit(main())
