"""Command line driver.

Subcommands:
  poly      build a step approximant, or probe minimal eta at fixed degree
  estimate  run one eigenvalue estimate on a builtin or file-backed matrix
  sweep     grid of (alpha, eps) runs, written as a deterministic CSV
  fit       log-log slope report for a sweep CSV
  reduce    phase or amplitude estimation through the eigenvalue solver

Exit codes: 0 on success, 1 when the polynomial builder runs out of
capacity, 2 on malformed input.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from .blockenc import HermitianOp, MatrixFormatError, read_matrix
from .chebpoly import (CapacityError, StepSpec, build_step_approx,
                       degree_constant, min_eta_for_degree, to_text,
                       verify_bounds, write_curve_csv)
from .estimator import EEInstance, alpha_schedule, estimate_ee
from .reductions import (AE_TO_EE_DEPTH_MULT, AE_TO_EE_TIME_MULT,
                         PE_TO_AE_TIME_MULT, ae_instance_from_amplitude,
                         composed_phase_tolerance, pe_instance_from_phase,
                         pe_to_ae, solve_ae_via_ee)
from .sampler import RngStream

CSV_HEADER = ("alpha,eps,gamma,seed,run_index,mu_hat,true_mu,abs_error,"
              "success,T,D,degree,n_samples,iterations,error")


def _fmt(x):
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class SweepConfig:
    alphas: tuple
    eps_list: tuple
    runs: int
    seed: int
    max_degree: int = 4096


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    eps: float
    gamma: float
    seed: int
    run_index: int
    mu_hat: float
    true_mu: float
    abs_error: float
    success: int
    T: int
    D: int
    degree: int
    n_samples: int
    iterations: int
    error: str = ""

    def to_csv_line(self):
        parts = [_fmt(self.alpha), _fmt(self.eps), _fmt(self.gamma),
                 str(self.seed), str(self.run_index), _fmt(self.mu_hat),
                 _fmt(self.true_mu), _fmt(self.abs_error), str(self.success),
                 str(self.T), str(self.D), str(self.degree),
                 str(self.n_samples), str(self.iterations),
                 self.error.replace(",", ";").replace("\n", " ")]
        return ",".join(parts)


def row_from_csv_line(line):
    parts = line.rstrip("\n").split(",")
    if len(parts) != 15:
        raise ValueError(f"expected 15 fields, got {len(parts)}")
    return SweepRow(alpha=float(parts[0]), eps=float(parts[1]),
                    gamma=float(parts[2]), seed=int(parts[3]),
                    run_index=int(parts[4]), mu_hat=float(parts[5]),
                    true_mu=float(parts[6]), abs_error=float(parts[7]),
                    success=int(parts[8]), T=int(parts[9]), D=int(parts[10]),
                    degree=int(parts[11]), n_samples=int(parts[12]),
                    iterations=int(parts[13]), error=parts[14])


def read_sweep_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("not a sweep CSV (bad header)")
    return [row_from_csv_line(ln) for ln in lines[1:] if ln]


def run_sweep(inst, config):
    """Row per (alpha, eps, run).  Each cell gets a disjoint RNG block of
    2**32 stream ids, so adding runs or grid points never shifts another
    cell's randomness."""
    rows = []
    cell = 0
    for alpha in config.alphas:
        for eps in config.eps_list:
            for run in range(config.runs):
                rng = RngStream(config.seed, cell << 32)
                cell += 1
                try:
                    sched = alpha_schedule(alpha, eps, inst.gamma,
                                           max_degree=config.max_degree)
                    mu_hat, ledger = estimate_ee(
                        inst, eps, alpha, rng, max_degree=config.max_degree)
                except CapacityError as exc:
                    rows.append(SweepRow(
                        alpha=alpha, eps=eps, gamma=inst.gamma,
                        seed=config.seed, run_index=run, mu_hat=float("nan"),
                        true_mu=inst.true_mu, abs_error=float("nan"),
                        success=0, T=0, D=0, degree=0, n_samples=0,
                        iterations=0, error=str(exc)))
                    continue
                err = abs(mu_hat - inst.true_mu)
                iters = ledger.shots // sched.n_samples
                rows.append(SweepRow(
                    alpha=alpha, eps=eps, gamma=inst.gamma, seed=config.seed,
                    run_index=run, mu_hat=mu_hat, true_mu=inst.true_mu,
                    abs_error=err, success=int(err <= eps),
                    T=ledger.total_queries, D=ledger.max_depth,
                    degree=sched.degree, n_samples=sched.n_samples,
                    iterations=iters))
    rows.sort(key=lambda r: (r.alpha, r.eps, r.run_index))
    return rows


def write_sweep_csv(rows, stream):
    stream.write(CSV_HEADER + "\n")
    for row in rows:
        stream.write(row.to_csv_line() + "\n")


def fit_slopes(rows):
    """Per-alpha least squares slopes of log D and log T against log(gamma/eps).

    T is first divided by ceil(log2(4 gamma / eps)) squared to strip the
    logarithmic factors from the sample schedule and the bisection count.
    Only completed rows contribute.  Returns a dict mapping alpha to
    (t_slope, d_slope, t_resid, d_resid, n_eps) where the residuals are the
    largest absolute deviations from the fitted lines.
    """
    groups = {}
    for row in rows:
        if row.error:
            continue
        groups.setdefault(row.alpha, {}).setdefault(row.eps, []).append(row)

    def regress(xs, ys):
        slope, intercept = np.polyfit(xs, ys, 1)
        resid = float(np.max(np.abs(np.asarray(ys)
                                    - (slope * np.asarray(xs) + intercept))))
        return float(slope), resid

    out = {}
    for alpha in sorted(groups):
        xs, yt, yd = [], [], []
        for eps, cell in sorted(groups[alpha].items()):
            gamma = cell[0].gamma
            logfac = math.ceil(math.log2(4.0 * gamma / eps))
            t_mean = sum(r.T for r in cell) / len(cell)
            d_mean = sum(r.D for r in cell) / len(cell)
            xs.append(math.log(gamma / eps))
            yt.append(math.log(t_mean / logfac ** 2))
            yd.append(math.log(d_mean))
        if len(xs) < 3:
            raise ValueError(
                f"alpha={alpha:g}: need at least 3 distinct eps values, "
                f"got {len(xs)}")
        t_slope, t_resid = regress(xs, yt)
        d_slope, d_resid = regress(xs, yd)
        out[alpha] = (t_slope, d_slope, t_resid, d_resid, len(xs))
    return out


def _parse_builtin(text):
    if not text.startswith("diag:"):
        raise ValueError("builtin instances look like diag:v1,v2,...")
    try:
        values = [float(tok) for tok in text[len("diag:"):].split(",")]
    except ValueError:
        raise ValueError(f"bad builtin spec {text!r}") from None
    if not values:
        raise ValueError("diag builtin needs at least one entry")
    return values


def _instance_from_args(args):
    if getattr(args, "matrix", None):
        h = read_matrix(args.matrix)
        vals, vecs = np.linalg.eigh(h.matrix)
        idx = args.eig_index
        if not 0 <= idx < h.dim:
            raise ValueError(f"eig-index {idx} out of range for dim {h.dim}")
        gamma = args.gamma if args.gamma is not None else float(
            np.max(np.abs(vals)))
        return EEInstance(H=h, gamma=gamma, psi=vecs[:, idx],
                          true_mu=float(vals[idx]))
    values = _parse_builtin(args.builtin)
    idx = args.eig_index
    if not 0 <= idx < len(values):
        raise ValueError(f"eig-index {idx} out of range for dim {len(values)}")
    gamma = args.gamma if args.gamma is not None else 1.0
    h = HermitianOp.from_matrix(np.diag(values))
    psi = np.zeros(len(values))
    psi[idx] = 1.0
    return EEInstance(H=h, gamma=gamma, psi=psi, true_mu=values[idx])


def _parse_degree_list(tokens):
    out = []
    for tok in tokens:
        for part in tok.split(","):
            if part:
                out.append(int(part))
    if not out or any(d < 1 for d in out):
        raise ValueError("--degree wants positive integers")
    return out


def cmd_poly(args):
    if args.degree:
        for deg in _parse_degree_list(args.degree):
            eta = min_eta_for_degree(args.delta, deg)
            print(f"degree {deg} min_eta {_fmt(eta)}")
        return 0
    if args.eta is None:
        raise ValueError("poly needs either --eta or --degree")
    spec = StepSpec(delta=args.delta, eta=args.eta)
    poly = build_step_approx(spec, max_degree=args.max_degree)
    report = verify_bounds(poly, spec)
    print(f"delta {_fmt(spec.delta)}")
    print(f"eta {_fmt(spec.eta)}")
    print(f"degree {poly.degree}")
    print(f"parity {poly.parity}")
    print(f"constant_C {_fmt(degree_constant(poly, spec))}")
    print(f"max_low_violation {_fmt(report.max_low_violation)}")
    print(f"max_high_violation {_fmt(report.max_high_violation)}")
    print(f"max_abs_excess {_fmt(report.max_abs_excess)}")
    print(f"certified {int(report.passes)}")
    if args.emit:
        write_curve_csv(poly, args.emit)
        print(f"curve {args.emit}")
    if args.save:
        with open(args.save, "w", encoding="utf-8") as fh:
            fh.write(to_text(poly))
        print(f"saved {args.save}")
    return 0


def cmd_estimate(args):
    inst = _instance_from_args(args)
    sched = alpha_schedule(args.alpha, args.eps, inst.gamma,
                           max_degree=args.max_degree)
    rng = RngStream(args.seed, 0)
    mu_hat, ledger = estimate_ee(inst, args.eps, args.alpha, rng,
                                 max_degree=args.max_degree)
    print(f"mu_hat {_fmt(mu_hat)}")
    print(f"true_mu {_fmt(inst.true_mu)}")
    print(f"abs_error {_fmt(abs(mu_hat - inst.true_mu))}")
    print(f"eps {_fmt(args.eps)}")
    print(f"alpha {_fmt(args.alpha)}")
    print(f"gamma {_fmt(inst.gamma)}")
    print(f"degree {sched.degree}")
    print(f"n_samples {sched.n_samples}")
    print(f"iterations {ledger.shots // sched.n_samples}")
    print(f"T {ledger.total_queries}")
    print(f"D {ledger.max_depth}")
    return 0


def cmd_sweep(args):
    inst = _instance_from_args(args)
    config = SweepConfig(alphas=tuple(args.alphas),
                         eps_list=tuple(args.eps_list), runs=args.runs,
                         seed=args.seed, max_degree=args.max_degree)
    rows = run_sweep(inst, config)
    if args.out == "-":
        write_sweep_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_sweep_csv(rows, fh)
    failed = sum(1 for r in rows if r.error)
    if failed:
        print(f"{failed} of {len(rows)} cells hit builder capacity",
              file=sys.stderr)
        return 1
    return 0


def cmd_fit(args):
    rows = read_sweep_csv(args.csv)
    slopes = fit_slopes(rows)
    for alpha in sorted(slopes):
        t_slope, d_slope, t_resid, d_resid, n_eps = slopes[alpha]
        print(f"alpha {_fmt(alpha)} T_slope {t_slope:.6f} "
              f"T_resid {t_resid:.6f} D_slope {d_slope:.6f} "
              f"D_resid {d_resid:.6f} n_eps {n_eps}")
    return 0


def cmd_reduce(args):
    rng = RngStream(args.seed, 0)
    if args.mode == "pe":
        if args.phi is None:
            raise ValueError("reduce pe needs --phi")
        if not 0.0 <= args.phi <= math.pi:
            raise ValueError("--phi must lie in [0, pi] (the reduction "
                             "recovers phases on that branch)")
        pe = pe_instance_from_phase(args.phi, dim=args.dim)
        ae, recover_phase = pe_to_ae(pe)
        p_hat, ledger = solve_ae_via_ee(ae, args.eps, args.alpha, rng,
                                        max_degree=args.max_degree)
        phi_hat = recover_phase(math.sqrt(p_hat))
        tol = composed_phase_tolerance(p_hat, args.eps)
        print("mode pe")
        print(f"phi {_fmt(pe.true_phi)}")
        print(f"dim {args.dim}")
        print(f"true_amp {_fmt(ae.true_amp)}")
        print(f"mu {_fmt(1.0 - 2.0 * ae.true_amp ** 2)}")
        print(f"mu_hat {_fmt(1.0 - 2.0 * p_hat)}")
        print(f"p_hat {_fmt(p_hat)}")
        print(f"phi_hat {_fmt(phi_hat)}")
        print(f"abs_phase_error {_fmt(abs(phi_hat - pe.true_phi))}")
        print(f"phase_tolerance {_fmt(tol)}")
        print(f"within_tolerance {int(abs(phi_hat - pe.true_phi) <= tol)}")
        print(f"pe_time_multiplier {PE_TO_AE_TIME_MULT}")
    else:
        if args.amp is None:
            raise ValueError("reduce ae needs --amp")
        ae = ae_instance_from_amplitude(args.amp)
        p_hat, ledger = solve_ae_via_ee(ae, args.eps, args.alpha, rng,
                                        max_degree=args.max_degree)
        amp_hat = math.sqrt(p_hat)
        print("mode ae")
        print(f"amp {_fmt(ae.true_amp)}")
        print(f"mu {_fmt(1.0 - 2.0 * ae.true_amp ** 2)}")
        print(f"mu_hat {_fmt(1.0 - 2.0 * p_hat)}")
        print(f"p_hat {_fmt(p_hat)}")
        print(f"amp_hat {_fmt(amp_hat)}")
        print(f"abs_amp_error {_fmt(abs(amp_hat - ae.true_amp))}")
    print(f"time_multiplier {AE_TO_EE_TIME_MULT}")
    print(f"depth_multiplier {AE_TO_EE_DEPTH_MULT}")
    print(f"calls_A {ae.calls['A']}")
    print(f"calls_A_dagger {ae.calls['A_dagger']}")
    print(f"calls_O_A {ae.calls['O_A']}")
    print(f"T {ledger.total_queries}")
    print(f"D {ledger.max_depth}")
    print(f"shots {ledger.shots}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qsvtsim",
        description="Step-polynomial eigenvalue estimation with explicit "
                    "query and depth accounting.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_poly = sub.add_parser("poly", help="build or probe step approximants")
    p_poly.add_argument("--delta", type=float, required=True)
    p_poly.add_argument("--eta", type=float)
    p_poly.add_argument("--degree", nargs="+",
                        help="report minimal eta at these degrees instead "
                             "(space or comma separated)")
    p_poly.add_argument("--max-degree", type=int, default=4096)
    p_poly.add_argument("--emit", help="write x,P(x) samples to this CSV")
    p_poly.add_argument("--save", help="write coefficients to this file")
    p_poly.set_defaults(func=cmd_poly)

    def add_instance_args(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--builtin", help="e.g. diag:0.5,-0.25")
        group.add_argument("--matrix", help="matrix file path")
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--eig-index", type=int, default=0)

    p_est = sub.add_parser("estimate", help="single eigenvalue estimate")
    add_instance_args(p_est)
    p_est.add_argument("--eps", type=float, required=True)
    p_est.add_argument("--alpha", type=float, required=True)
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--max-degree", type=int, default=4096)
    p_est.set_defaults(func=cmd_estimate)

    p_sweep = sub.add_parser("sweep", help="grid of runs, CSV output")
    add_instance_args(p_sweep)
    p_sweep.add_argument("--alphas", type=float, nargs="+", required=True)
    p_sweep.add_argument("--eps-list", type=float, nargs="+", required=True)
    p_sweep.add_argument("--runs", type=int, default=1)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", default="-", help="CSV path, - for stdout")
    p_sweep.add_argument("--max-degree", type=int, default=4096)
    p_sweep.set_defaults(func=cmd_sweep)

    p_fit = sub.add_parser("fit", help="slope report for a sweep CSV")
    p_fit.add_argument("csv")
    p_fit.set_defaults(func=cmd_fit)

    p_red = sub.add_parser("reduce", help="phase/amplitude via eigenvalues")
    p_red.add_argument("mode", choices=["pe", "ae"])
    p_red.add_argument("--phi", type=float)
    p_red.add_argument("--dim", type=int, default=1)
    p_red.add_argument("--amp", type=float)
    p_red.add_argument("--eps", type=float, required=True)
    p_red.add_argument("--alpha", type=float, required=True)
    p_red.add_argument("--seed", type=int, default=0)
    p_red.add_argument("--max-degree", type=int, default=4096)
    p_red.set_defaults(func=cmd_reduce)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return 1
    except (MatrixFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
