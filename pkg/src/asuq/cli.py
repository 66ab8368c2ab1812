"""Command-line front end binding the pipeline.

Subcommands: space validate, sample, run, analyze, range, safeset, cdf,
and the scenario group (shots-fit, inflow, check). Exit codes: 0 success,
1 usage, 2 data/schema, 3 numerical degeneracy, 4 evaluator failure,
5 partial evaluator failure (some runs done, some failed).
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
from pathlib import Path

import numpy as np

from . import hyshot
from .active_subspace import (
    bootstrap_direction,
    fit_active_direction,
    sensitivity_ranking,
    summary_data,
)
from .campaign import (
    Campaign,
    CommandEvaluator,
    evaluate_campaign,
    load_campaign,
    new_campaign,
    ridge_direction,
    save_campaign,
    synthetic_ridge,
)
from .errors import ToolkitError, UsageError
from .param_space import ParameterSpace, hyshot_space
from .surrogate import QuadraticSurrogate, fit_quadratic
from .svgplot import SvgPlot
from .uq_analysis import estimate_cdf, estimate_range, invert_safe_set

EXIT_PARTIAL_FAILURE = 5


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures follow the exit-code contract."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- shared helpers -----------------------------------------------------------


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("ASUQ_OUTPUT_DIR", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _load_space(path: str | None) -> ParameterSpace:
    return hyshot_space() if path is None else ParameterSpace.from_json(path)


def _parse_condition(pairs) -> dict:
    cond = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise UsageError(f"--condition expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        try:
            cond[key] = float(value)
        except ValueError:
            cond[key] = value
    return cond


def _build_evaluator(args, m: int):
    spec = args.evaluator
    if spec is None:
        raise UsageError("an --evaluator is required for this command")
    if spec.startswith("ridge:"):
        link = spec.split(":", 1)[1]
        if args.wtrue_seed is None:
            raise UsageError("--wtrue-seed is required with a ridge evaluator")
        w_true = ridge_direction(m, args.wtrue_seed)
        return synthetic_ridge(w_true, link=link, noise=args.noise)
    evaluator = CommandEvaluator(spec, timeout=args.timeout)
    program = evaluator.argv[0]
    if shutil.which(program) is None and not Path(program).exists():
        raise UsageError(f"evaluator command not found: {program}")
    return evaluator


def _checkpointer(path):
    def _save(campaign):
        save_campaign(campaign, path)
    return _save


def _fit_pipeline(campaign: Campaign):
    X, f = campaign.design_arrays()
    asub = fit_active_direction(X, f)
    summary = summary_data(X, f, asub)
    return X, f, asub, summary


def _fit_surrogate(asub, summary) -> QuadraticSurrogate:
    l1 = float(np.abs(asub.w).sum())
    return fit_quadratic(summary.y, summary.f, y_domain=(-l1, l1))


def _corner_range(campaign: Campaign, asub, summary, evaluator, args):
    """Evaluate (or reuse) the two corner runs and build the range report."""

    def evaluate_corner(x_corner):
        for rec in campaign.runs:
            if rec.role == "corner" and rec.status == "done" \
                    and np.array_equal(rec.x, x_corner):
                return rec.f
        rec = campaign.append_point(x_corner, role="corner")
        evaluate_campaign(campaign, evaluator, runs=[rec],
                          record_timing=args.record_timing)
        if rec.status != "done":
            raise RuntimeError(rec.error or "corner evaluation failed")
        return rec.f

    _, f_samples = campaign.design_arrays()
    return estimate_range(asub.w, evaluate_corner, f_samples,
                          discordant_pairs=summary.discordant_pairs)


def _range_report(campaign: Campaign, rng) -> dict:
    return {
        "x_min": [float(v) for v in rng.x_min],
        "x_max": [float(v) for v in rng.x_max],
        "p_min": [float(v) for v in campaign.space.denormalize(rng.x_min)],
        "p_max": [float(v) for v in campaign.space.denormalize(rng.x_max)],
        "f_min": rng.f_min,
        "f_max": rng.f_max,
        "validated": rng.validated,
        "inverted": rng.inverted,
        "monotone_caveat": rng.monotone_caveat,
        "corner_errors": rng.corner_errors,
    }


def _print_ranking(ranking) -> None:
    width = max(len(name) for name, _, _ in ranking)
    print(f"{'rank':>4}  {'parameter':<{width}}  {'w_i':>10}  {'|w_i|':>10}")
    for i, (name, wi, awi) in enumerate(ranking, start=1):
        print(f"{i:>4}  {name:<{width}}  {wi:>10.4f}  {awi:>10.4f}")


# -- subcommand implementations -------------------------------------------------


def cmd_space_validate(args) -> int:
    space = _load_space(args.space)
    print(f"valid parameter space with m={space.m} parameters")
    for i, spec in enumerate(space.params):
        units = f" [{spec.units}]" if spec.units else ""
        print(f"  {i}: {spec.name}{units}: "
              f"min={spec.min:g} nominal={spec.nominal:g} max={spec.max:g}")
    return 0


def cmd_sample(args) -> int:
    if args.M < 1:
        raise UsageError(f"-M must be >= 1, got {args.M}")
    space = _load_space(args.space)
    campaign = new_campaign(space, args.M, args.seed,
                            condition=_parse_condition(args.condition))
    save_campaign(campaign, args.campaign)
    print(f"wrote {args.campaign}: {args.M} pending runs, m={space.m}, "
          f"seed={args.seed}")
    return 0


def cmd_run(args) -> int:
    campaign = load_campaign(args.campaign)
    evaluator = _build_evaluator(args, campaign.m)
    if args.retry_failed:
        for rec in campaign.failed_runs():
            rec.status = "pending"
            rec.error = None
    pending = len(campaign.pending_runs())
    if pending == 0:
        print("no pending runs; nothing to do")
        return 0
    try:
        evaluate_campaign(
            campaign, evaluator,
            max_concurrency=args.max_concurrency,
            record_timing=args.record_timing,
            checkpoint=_checkpointer(args.campaign),
        )
    finally:
        save_campaign(campaign, args.campaign)
    done = len(campaign.done_runs())
    failed = len(campaign.failed_runs())
    print(f"{done} done, {failed} failed ({pending} attempted this invocation)")
    return 0 if failed == 0 else EXIT_PARTIAL_FAILURE


def cmd_analyze(args) -> int:
    out = _out_dir(args)
    campaign = load_campaign(args.campaign)
    X, f, asub, summary = _fit_pipeline(campaign)
    ensemble = bootstrap_direction(X, f, N=args.bootstrap, seed=args.seed)
    summary = summary_data(X, f, asub, ensemble)
    ranking = sensitivity_ranking(asub, names=campaign.space.names)

    results = {
        "M": asub.M,
        "m": campaign.m,
        "w": [float(v) for v in asub.w],
        "u_hat": [float(v) for v in asub.fit.u_hat],
        "residual_norm": asub.fit.residual_norm,
        "cond_estimate": asub.fit.cond_estimate,
        "ranking": [
            {"name": n, "w": wi, "abs_w": awi} for n, wi, awi in ranking
        ],
        "discordant_pairs": summary.discordant_pairs,
        "bootstrap": {
            "N": ensemble.N,
            "seed": ensemble.seed,
            "quantiles": ensemble.component_quantiles(),
            "replicates": [[float(v) for v in row] for row in ensemble.replicates],
        },
    }
    _write_json(out / "results.json", results)

    lines = ["y,f,source"]
    for yv, fv in zip(summary.y, summary.f):
        lines.append(f"{float(yv)!r},{float(fv)!r},sample")
    for yv, fv in summary.bootstrap_cloud:
        lines.append(f"{float(yv)!r},{float(fv)!r},bootstrap")
    (out / "summary.csv").write_text("\n".join(lines) + "\n")

    _print_ranking(ranking)
    print(f"discordant pairs in summary ordering: {summary.discordant_pairs}")

    surr = None
    if args.threshold is not None or args.cdf or args.svg:
        surr = _fit_surrogate(asub, summary)
        _write_json(out / "surrogate.json", surr.to_dict())

    exit_code = 0
    if args.corners:
        evaluator = _build_evaluator(args, campaign.m)
        rng = _corner_range(campaign, asub, summary, evaluator, args)
        save_campaign(campaign, args.campaign)
        _write_json(out / "range.json", _range_report(campaign, rng))
        print(f"range: [{rng.f_min}, {rng.f_max}] validated={rng.validated}")
        if rng.corner_errors:
            print(f"corner evaluation failed: {rng.corner_errors}",
                  file=sys.stderr)
            exit_code = 4

    if args.threshold is not None:
        safe = invert_safe_set(surr, asub.w, args.threshold, level=args.level,
                               space=campaign.space)
        _write_json(out / "safeset.json", safe.to_dict())
        print(f"safe set: feasible={safe.feasible} y_max={safe.y_max}")

    cdf = None
    if args.cdf:
        cdf = estimate_cdf(surr, asub.w, campaign.m, n_samples=args.n_cdf,
                           seed=args.seed)
        cdf_lines = ["q,cdf"] + [
            f"{float(q)!r},{float(c)!r}" for q, c in zip(cdf.grid, cdf.cdf)
        ]
        (out / "cdf.csv").write_text("\n".join(cdf_lines) + "\n")

    if args.svg:
        _render_summary_svg(out / "summary.svg", summary, surr, args)
        if cdf is not None:
            _render_cdf_svg(out / "cdf.svg", cdf)
    return exit_code


def _render_summary_svg(path, summary, surr, args) -> None:
    plot = SvgPlot(xlabel="active variable y = w . x",
                   ylabel="quantity of interest", title="summary plot")
    if summary.bootstrap_cloud is not None:
        plot.scatter(summary.bootstrap_cloud[:, 0], summary.bootstrap_cloud[:, 1],
                     radius=1.5, color="#999999", opacity=0.35)
    if surr is not None:
        ys = np.linspace(surr.y_domain[0], surr.y_domain[1], 200)
        plot.line(ys, surr.predict(ys), color="#1166cc")
        if surr.sigma2_hat is not None:
            plot.line(ys, surr.upper_confidence(ys, args.level),
                      color="#1166cc", dashed=True)
    plot.scatter(summary.y, summary.f, radius=3.0, color="#111111")
    if args.threshold is not None:
        plot.hline(args.threshold)
    plot.save(path)


def _render_cdf_svg(path, cdf) -> None:
    plot = SvgPlot(xlabel="quantity of interest", ylabel="CDF",
                   title="estimated CDF")
    plot.line(cdf.grid, cdf.cdf, color="#117733")
    plot.save(path)


def cmd_range(args) -> int:
    out = _out_dir(args)
    campaign = load_campaign(args.campaign)
    _, _, asub, summary = _fit_pipeline(campaign)
    evaluator = _build_evaluator(args, campaign.m)
    rng = _corner_range(campaign, asub, summary, evaluator, args)
    save_campaign(campaign, args.campaign)
    _write_json(out / "range.json", _range_report(campaign, rng))
    print(f"range: [{rng.f_min}, {rng.f_max}] validated={rng.validated} "
          f"monotone_caveat={rng.monotone_caveat}")
    if rng.corner_errors:
        print(f"corner evaluation failed: {rng.corner_errors}", file=sys.stderr)
        return 4
    return 0


def cmd_safeset(args) -> int:
    out = _out_dir(args)
    campaign = load_campaign(args.campaign)
    _, _, asub, summary = _fit_pipeline(campaign)
    surr = _fit_surrogate(asub, summary)
    safe = invert_safe_set(surr, asub.w, args.threshold, level=args.level,
                           space=campaign.space)
    _write_json(out / "safeset.json", safe.to_dict())
    print(f"threshold {args.threshold} at level {args.level}: "
          f"feasible={safe.feasible} y_max={safe.y_max}")
    for entry in safe.safe_ranges:
        if entry["restricted"]:
            units = f" {entry['units']}" if entry.get("units") else ""
            print(f"  {entry['name']}: [{entry['min']:.6g}, "
                  f"{entry['max']:.6g}]{units}")
    return 0


def cmd_cdf(args) -> int:
    out = _out_dir(args)
    campaign = load_campaign(args.campaign)
    _, _, asub, summary = _fit_pipeline(campaign)
    surr = _fit_surrogate(asub, summary)
    cdf = estimate_cdf(surr, asub.w, campaign.m, n_samples=args.n,
                       seed=args.seed, grid_size=args.grid_size)
    lines = ["q,cdf"] + [f"{float(q)!r},{float(c)!r}"
                         for q, c in zip(cdf.grid, cdf.cdf)]
    (out / "cdf.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out / 'cdf.csv'}: {len(cdf.grid)} grid points, "
          f"bandwidth {cdf.bandwidth:.6g}")
    return 0


def cmd_scenario_shots_fit(args) -> int:
    shots = hyshot.load_shots(args.shots)
    intercept, slope = hyshot.fit_T0_H0(shots, include_excluded=args.all)
    used = [s for s in shots if args.all or not s.excluded]
    print(f"T0 = {intercept:.4f} K + {slope:.6e} K/(J/kg) * H0 "
          f"({len(used)} shots used)")
    return 0


def cmd_scenario_inflow(args) -> int:
    space = _load_space(args.space)
    if args.nominal:
        x = np.zeros(space.m)
    elif args.x is not None:
        try:
            x = np.array([float(v) for v in args.x.split(",")])
        except ValueError as exc:
            raise UsageError(f"--x must be a comma-separated vector: {exc}")
    else:
        raise UsageError("give either --nominal or --x")
    cond = hyshot.build_inflow(x, space)
    print(json.dumps(cond.to_params(), indent=2))
    return 0


def cmd_scenario_check(args) -> int:
    intercept, slope = hyshot.fit_T0_H0(hyshot.load_shots())
    print(f"shot regression: T0 = {intercept:.4f} + {slope:.6e} * H0  "
          f"[K, H0 in J/kg]")

    ar = hyshot.area_mach_ratio(7.4, 1.4)
    minv = hyshot.mach_from_area_ratio(ar, 1.4)
    print(f"area ratio at Mach 7.4: {ar:.2f} (inverse solve: M = {minv:.6f})")

    growth = hyshot.eddy_growth_ratio()
    L0 = hyshot.nominal_dissipation_length()
    print(f"eddy growth ratio: {growth:.4f}; nominal dissipation length "
          f"{L0 * 1000:.1f} mm")

    for label, x_t0 in (("ramp", 0.145), ("cowl", 0.050)):
        lo, hi = hyshot.transition_range(hyshot.TransitionSpec(x_t0=x_t0))
        print(f"{label} transition range: [{lo:.3f}, {hi:.3f}] m")

    cond = hyshot.build_inflow(np.zeros(7), hyshot_space())
    print(f"nominal inflow: P={cond.P:.2f} Pa, T={cond.T:.2f} K, "
          f"U={cond.U_mag:.1f} m/s, k={cond.k:.2f} m2/s2, "
          f"omega={cond.omega:.2f} 1/s, "
          f"x_t=({cond.x_t_ramp:.3f}, {cond.x_t_cowl:.3f}) m")
    return 0


# -- parser construction ---------------------------------------------------------


def _add_evaluator_flags(p) -> None:
    p.add_argument("--evaluator",
                   help="'ridge:<link>' builtin or an external command string")
    p.add_argument("--wtrue-seed", type=int, default=None,
                   help="seed deriving the true direction of a ridge evaluator")
    p.add_argument("--noise", type=float, default=0.0,
                   help="deterministic pseudo-noise amplitude for ridge evaluators")
    p.add_argument("--timeout", type=float, default=None,
                   help="per-evaluation timeout in seconds (external commands)")
    p.add_argument("--record-timing", action="store_true",
                   help="persist wall times (breaks byte-identical reruns)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="asuq", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_space = sub.add_parser("space",
                             help="parameter-space utilities")
    space_sub = p_space.add_subparsers(dest="space_command", parser_class=_Parser)
    p_validate = space_sub.add_parser("validate",
                                      help="check a space definition file")
    p_validate.add_argument("--space", help="space JSON (default: bundled HyShot)")
    p_validate.set_defaults(func=cmd_space_validate)

    p_sample = sub.add_parser("sample",
                              help="draw a campaign of uniform samples")
    p_sample.add_argument("--space", help="space JSON (default: bundled HyShot)")
    p_sample.add_argument("-M", type=int, required=True, help="sample count")
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--out", dest="campaign", required=True,
                          help="campaign manifest to write")
    p_sample.add_argument("--condition", action="append", metavar="KEY=VALUE",
                          help="condition metadata (repeatable)")
    p_sample.set_defaults(func=cmd_sample)

    p_run = sub.add_parser("run",
                           help="evaluate pending campaign runs")
    p_run.add_argument("--campaign", required=True)
    p_run.add_argument("--max-concurrency", type=int, default=1)
    p_run.add_argument("--retry-failed", action="store_true",
                       help="reset failed runs to pending before dispatch")
    _add_evaluator_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_analyze = sub.add_parser("analyze",
                               help="fit, bootstrap, and export reports")
    p_analyze.add_argument("--campaign", required=True)
    p_analyze.add_argument("--out", help="output directory "
                           "(default: $ASUQ_OUTPUT_DIR or '.')")
    p_analyze.add_argument("--seed", type=int, required=True,
                           help="seed for bootstrap and CDF sampling")
    p_analyze.add_argument("--bootstrap", type=int, default=100, metavar="N",
                           help="bootstrap replicate count (default 100)")
    p_analyze.add_argument("--threshold", type=float,
                           help="QoI safety threshold to invert")
    p_analyze.add_argument("--level", type=float, default=0.99,
                           help="confidence level for the upper bound")
    p_analyze.add_argument("--corners", action="store_true",
                           help="evaluate the two extremizing corners")
    p_analyze.add_argument("--cdf", action="store_true",
                           help="estimate the output CDF")
    p_analyze.add_argument("--n", "--n-cdf", type=int, default=5000,
                           dest="n_cdf", help="CDF sample count (default 5000)")
    p_analyze.add_argument("--svg", action="store_true",
                           help="render summary/CDF SVG plots")
    _add_evaluator_flags(p_analyze)
    p_analyze.set_defaults(func=cmd_analyze)

    p_range = sub.add_parser("range",
                             help="corner-evaluation output range")
    p_range.add_argument("--campaign", required=True)
    p_range.add_argument("--out")
    _add_evaluator_flags(p_range)
    p_range.set_defaults(func=cmd_range)

    p_safe = sub.add_parser("safeset",
                            help="invert a threshold into safe input ranges")
    p_safe.add_argument("--campaign", required=True)
    p_safe.add_argument("--threshold", type=float, required=True)
    p_safe.add_argument("--level", type=float, default=0.99)
    p_safe.add_argument("--out")
    p_safe.set_defaults(func=cmd_safeset)

    p_cdf = sub.add_parser("cdf",
                           help="estimate the output CDF from the surrogate")
    p_cdf.add_argument("--campaign", required=True)
    p_cdf.add_argument("--n", type=int, default=5000)
    p_cdf.add_argument("--seed", type=int, required=True)
    p_cdf.add_argument("--grid-size", type=int, default=513)
    p_cdf.add_argument("--out")
    p_cdf.set_defaults(func=cmd_cdf)

    p_scen = sub.add_parser("scenario",
                            help="HyShot II characterization arithmetic")
    scen_sub = p_scen.add_subparsers(dest="scenario_command", parser_class=_Parser)

    p_shots = scen_sub.add_parser("shots-fit",
                                  help="stagnation temperature regression")
    p_shots.add_argument("--shots", help="shots CSV (default: bundled table)")
    p_shots.add_argument("--all", action="store_true",
                         help="include shots flagged excluded")
    p_shots.set_defaults(func=cmd_scenario_shots_fit)

    p_inflow = scen_sub.add_parser("inflow",
                                   help="solver boundary conditions for a point")
    p_inflow.add_argument("--space", help="space JSON (default: bundled HyShot)")
    p_inflow.add_argument("--nominal", action="store_true",
                          help="use the nominal point x = 0")
    p_inflow.add_argument("--x", help="comma-separated normalized coordinates")
    p_inflow.set_defaults(func=cmd_scenario_inflow)

    p_check = scen_sub.add_parser("check",
                                  help="print the characterization reproductions")
    p_check.set_defaults(func=cmd_scenario_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        func = getattr(args, "func", None)
        if func is None:
            parser.print_help()
            return 1
        return int(func(args) or 0)
    except SystemExit as exc:  # --help and friends
        return 0 if exc.code in (None, 0) else 1
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
