"""Command-line front end: ``rellich <subcommand> [flags]`` or ``python -m rellich``.

Exit codes: 0 when every check passes, 1 on a failed check, 2 on usage or
parameter errors.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .cylinder import GridError, uniform_grid
from .degeneration import (
    DEFAULT_EPS_LADDER, ProfileOmega, fit_rate, mitidieri_sharpness_quotient,
    navier_degeneration_quotient, resonance_family_bound,
)
from .harness import (
    SUITES, SWEEP_TASKS, alpha_grid, default_verify_spec, generate_samples, make_report,
    report_json, run_sweep, sweep_csv, verify_inequalities,
)
from .modes import ShootingError, cap_for_eigenvalue, harmonic, mu2_symbol_oracle
from .params import ParameterError, Params, derive_params, mu22_closed_form, resonant_mode
from .poisson import AnnulusProblem, comparison_check, sine_profile, weighted_stability_bound
from .rayleigh import ConvergenceError, OptimizationError, estimate_constant

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _eps_ladder(text: str | None):
    if not text:
        return DEFAULT_EPS_LADDER
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"--eps-ladder must be comma-separated numbers: {text!r}") from exc
    return tuple(vals)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=5, help="dimension (>= 3)")
    common.add_argument("--p", type=float, default=2.0)
    common.add_argument("--q", type=float, default=None, help="defaults to p")
    common.add_argument("--alpha", type=float, default=0.0)
    common.add_argument("--modes", type=int, default=None, help="highest harmonic degree k_max")
    common.add_argument("--grid-span", type=float, default=20.0, help="half-span S of the axis grid")
    common.add_argument("--grid-points", type=int, default=2048)
    common.add_argument("--eps-ladder", default=None, help="comma-separated eps values")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--deterministic", action="store_true", help="omit the timestamp field")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="rellich", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common], help="closed-form derived constants")
    sub.add_parser("mu", parents=[common], help="estimate the Rellich constant mu_{p,alpha}")
    sub.add_parser("estimate-s", parents=[common], help="estimate S_{p,q}(alpha)")
    sub.add_parser("degenerate", parents=[common], help="rates of the explicit test-function families")
    v = sub.add_parser("verify", parents=[common], help="inequality suites on random samples")
    v.add_argument("--suite", choices=SUITES, default="rellich")
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--a", type=float, default=None, help="first-order weight (default alpha - p)")
    v.add_argument("--tol", type=float, default=1e-8)
    c = sub.add_parser("compare", parents=[common], help="radial Poisson comparison checks")
    c.add_argument("--R", type=float, default=2.0)
    c.add_argument("--samples", type=int, default=100)
    s = sub.add_parser("sweep", parents=[common], help="parameter sweep over alpha")
    s.add_argument("--alpha-range", nargs=3, type=float, metavar=("LO", "HI", "STEP"), default=None)
    s.add_argument("--tasks", default=",".join(SWEEP_TASKS))
    return ap


def _params(args) -> Params:
    return Params(args.n, args.p, args.p if args.q is None else args.q, args.alpha)


def _grid(args):
    return uniform_grid(args.grid_span, args.grid_points)


def _check(cid, passed, value=None, target=None, tol=None) -> dict:
    return {"id": cid, "passed": bool(passed), "value": value, "target": target, "tol": tol}


def cmd_constants(args):
    P = _params(args)
    d = derive_params(P)
    res = {"derived": d.as_dict(), "resonant_mode": resonant_mode(P), "rellich_range": list(P.rellich_range)}
    checks = []
    if P.p == 2:
        closed, k = mu22_closed_form(P.n, P.alpha)
        sym = mu2_symbol_oracle(P.n, P.alpha)
        res.update(mu_closed=closed, mu_closed_k=k, mu_symbol=sym.value, matches_section7=sym.matches_section7)
        checks.append(_check("symbol_vs_closed", sym.matches_section7, sym.value, closed, 1e-10))
    lines = [f"{k} = {v}" for k, v in d.as_dict().items()]
    lines.append(f"resonant mode = {res['resonant_mode']}")
    if "mu_closed" in res:
        lines.append(f"mu closed form = {res['mu_closed']:.12g} (k={res['mu_closed_k']}), "
                     f"symbol = {res['mu_symbol']:.12g}")
    return [res], checks, lines


def _estimate(args, kind):
    P = _params(args)
    est = estimate_constant(P, kind, k_max=args.modes, grid=_grid(args), seed=args.seed)
    checks, lines = [], [f"{kind} per-mode minimum on the grid: {est.value:.10g} ({est.exactness})"]
    if est.line_limit is not None:
        lines.append(f"whole-line extrapolation: {est.line_limit:.10g}; symbol oracle: {est.symbol:.10g}")
        if est.symbol > 1e-12:
            gap = abs(est.line_limit - est.symbol) / est.symbol
            checks.append(_check("discrete_vs_symbol", gap <= 2e-3, est.line_limit, est.symbol, 2e-3))
        else:
            checks.append(_check("discrete_resonance", est.line_limit < 1e-2, est.line_limit, 0.0, 1e-2))
    else:
        lines.append("general (p, q): value is an upper bound from projected gradient descent")
        checks.append(_check("positive", est.value > 0, est.value, 0.0, 0.0))
    return [est.as_dict()], checks, lines


def cmd_mu(args):
    return _estimate(args, "mu")


def cmd_estimate_s(args):
    return _estimate(args, "S")


def cmd_degenerate(args):
    P = _params(args)
    d = derive_params(P)
    ladder = sorted(_eps_ladder(args.eps_ladder), reverse=True)
    omega = ProfileOmega.bump()
    results, checks, lines = [], [], []
    k = resonant_mode(P)
    if k is not None:
        fit = fit_rate(ladder, [resonance_family_bound(omega, e, P, k) for e in ladder])
        results.append({"family": "resonance", "k": k, **fit.as_dict()})
        checks.append(_check("resonance_slope", abs(fit.slope - P.p) <= 0.05, fit.slope, P.p, 0.05))
        lines.append(f"resonance family (k={k}): slope {fit.slope:.4f}, expected {P.p}")
    if P.alpha > P.n * P.p - P.n:
        mode = harmonic(k, P.n) if k is not None else cap_for_eigenvalue(P.n, -d.gamma)
        vals = [navier_degeneration_quotient(omega, e, P, mode, constants=False) for e in ladder]
        fit = fit_rate(ladder, vals)
        target = P.p - 1 + P.p / P.q
        results.append({"family": "navier", "mode": mode.as_dict(), **fit.as_dict()})
        checks.append(_check("navier_slope", abs(fit.slope - target) <= 0.05, fit.slope, target, 0.05))
        lines.append(f"Navier family ({mode.label}): slope {fit.slope:.4f}, expected {target:.4f}")
    if P.in_rellich_range():
        q = mitidieri_sharpness_quotient(omega, 1e-3, Params(P.n, P.p, P.p, P.alpha))
        target = d.gamma ** P.p
        results.append({"family": "sharpness", "eps": 1e-3, "quotient": q, "target": target})
        checks.append(_check("sharpness", abs(q - target) <= 1e-2 * target, q, target, 1e-2))
        lines.append(f"sharpness family at eps=1e-3: {q:.8g}, gamma^p = {target:.8g}")
    if not results:
        lines.append("no family applies at these parameters")
    return results, checks, lines


def cmd_verify(args):
    P = _params(args)
    spec = default_verify_spec(args.suite, P, seed=args.seed, count=args.samples)
    samples = generate_samples(spec, _grid(args))
    rep = verify_inequalities(samples, P, args.suite, a=args.a, tol=args.tol)
    checks = [_check(f"{args.suite}_violations", rep.passed, len(rep.violations), 0, args.tol)]
    lines = [f"{args.suite}: {rep.samples} samples, {len(rep.violations)} violations, "
             f"min slack {rep.min_slack:.4g}, min quotient {rep.empirical_min:.6g}"
             + ("" if rep.constant is None else f", constant {rep.constant:.6g}")]
    return [rep.as_dict()], checks, lines


def cmd_compare(args):
    P = _params(args)
    rng = np.random.default_rng(args.seed)
    failures, worst_gap, ratios = 0, math.inf, []
    for _ in range(args.samples):
        rep = comparison_check(sine_profile(rng.normal(size=4), args.R), P, args.R)
        failures += not rep.passed
        worst_gap = min(worst_gap, rep.min_gap)
    checks = [_check("comparison", failures == 0, failures, 0, 1e-8)]
    res = {"comparison_failures": failures, "min_gap": worst_gap}
    if P.in_rellich_range():
        for _ in range(args.samples):
            c, w, amp = rng.uniform(1 / args.R + 0.2, args.R - 0.2), rng.uniform(0.1, 0.5), rng.uniform(0.5, 2)
            prob = AnnulusProblem.build(P.n, args.R, lambda r: amp * np.exp(-((r - c) / w) ** 2))
            try:
                lhs, rhs = weighted_stability_bound(prob, P)
                ratios.append(lhs / rhs)
            except AssertionError:
                ratios.append(math.inf)
        ok = max(ratios) <= 1
        checks.append(_check("stability_bound", ok, max(ratios), 1.0, 1e-9))
        res["max_stability_ratio"] = max(ratios)
    lines = [f"comparison: {failures} failures over {args.samples} profiles, min(v - |u|) = {worst_gap:.3e}"]
    if ratios:
        lines.append(f"stability bound: max lhs/rhs = {max(ratios):.4f}")
    return [res], checks, lines


def cmd_sweep(args):
    P = _params(args)
    if args.alpha_range is None:
        lo, hi = 2 * P.p - P.n - 1, P.n * P.p - P.n + 5
        alphas = alpha_grid(lo, hi, 0.25)
    else:
        alphas = alpha_grid(*args.alpha_range)
    tasks = [t.strip() for t in args.tasks.split(",") if t.strip()]
    recs = run_sweep(alphas, P, tasks, grid=_grid(args), eps_ladder=_eps_ladder(args.eps_ladder))
    checks = [c | {"alpha": r.alpha} for r in recs for c in r.checks]
    failed = sum(r.checks_failed for r in recs)
    lines = [f"sweep over {len(recs)} alpha values: {sum(r.checks_passed for r in recs)} checks passed, "
             f"{failed} failed"]
    lines += [f"  alpha={r.alpha}: {', '.join(r.failed)}" for r in recs if r.failed]
    return recs, checks, lines


COMMANDS = {"constants": cmd_constants, "mu": cmd_mu, "estimate-s": cmd_estimate_s,
            "degenerate": cmd_degenerate, "verify": cmd_verify, "compare": cmd_compare,
            "sweep": cmd_sweep}


def _write(path: Path | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        results, checks, lines = COMMANDS[args.command](args)
    except (ParameterError, UsageError, GridError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, OptimizationError, ShootingError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL

    params = {k: getattr(args, k) for k in ("n", "p", "q", "alpha", "modes", "grid_span", "grid_points",
                                            "seed")}
    if args.format == "csv":
        if args.command != "sweep":
            print("error: --format csv is only available for sweep", file=sys.stderr)
            return EXIT_USAGE
        text = sweep_csv(results)
    else:
        rows = [r.as_dict() if hasattr(r, "as_dict") else r for r in results]
        text = report_json(make_report(args.command, params, rows, checks, args.deterministic))
    try:
        if args.out is not None:
            _write(args.out, text)
            for line in lines:
                print(line)
        else:
            _write(None, text)
            for line in lines:
                print(line, file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
