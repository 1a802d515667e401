"""Command-line front end: ``whitham <subcommand> [flags]``.

Each subcommand writes its data to ``--out`` (when given) and prints one JSON
summary line on stdout.  Failures print a JSON object on stderr and exit with
a nonzero status.  Nothing is random and nothing time-dependent is written,
so repeated runs produce byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics
from .branch_io import (
    ProfileRecord,
    align_for_comparison,
    export_branch_csv,
    half_height_width,
    load_profile,
    save_branch_json,
    save_profile,
    write_snapshots_csv,
)
from .continuation import (
    BranchStartError,
    ContinuationConfig,
    NoNontrivialWaveError,
    TargetNotReachedError,
    bifurcation_speed,
    solve_at_height,
    solve_at_speed,
    trace_branch,
)
from .evolution import EvolutionConfig, EvolutionState, StepNonconvergenceError, evolve, traveling_wave_metrics
from .spectral import CosineSpectrum, DispersionModel
from .steady import DEFAULT_MAX_ITER, DEFAULT_TOL, SingularJacobianError, WaveProfile

EXIT_FAILURE = 1
EXIT_USAGE = 2


class CommandError(RuntimeError):
    """A computation requested on the command line did not succeed."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


def _positive(kind):
    def parse(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    parse.__name__ = kind.__name__
    return parse


pos_int = _positive(int)
pos_float = _positive(float)


def _emit(summary: dict):
    print(json.dumps(summary, sort_keys=True))


def _profile_summary(profile: WaveProfile, report) -> dict:
    return {
        "model": profile.model.value,
        "k": profile.k,
        "N": profile.n_points,
        "mu": profile.mu,
        "height": profile.height,
        "iterations": report.iterations if report else None,
        "residual_norm": report.residual_norm if report else None,
    }


def _continuation_config(args, **overrides) -> ContinuationConfig:
    fields = dict(k=args.k, n_initial=args.n, tol=args.newton_tol, max_iter=args.max_iter)
    for name in ("eps0", "mu_step", "height_step", "height_max", "switch_threshold",
                 "refine_factor", "n_max", "max_points"):
        if getattr(args, name, None) is not None:
            fields[name] = getattr(args, name)
    if getattr(args, "no_verify", False):
        fields["verify"] = False
    fields.update(overrides)
    if "n_max" in fields:
        fields["n_max"] = max(fields["n_max"], fields["n_initial"])
    return ContinuationConfig(**fields)


# -- subcommands --------------------------------------------------------------

def cmd_solve(args) -> dict:
    model = DispersionModel.coerce(args.model)
    cfg = _continuation_config(args)
    try:
        if args.mu is not None:
            profile, report = solve_at_speed(model, args.mu, args.n, args.k, cfg)
        else:
            profile, report = solve_at_height(model, args.height, args.n, args.k, cfg)
    except NoNontrivialWaveError:
        mu_k = bifurcation_speed(model, args.k)
        trivial = WaveProfile(model, CosineSpectrum(np.zeros(args.n)), args.mu, args.k)
        if args.out:
            save_profile(ProfileRecord.from_profile(trivial, trivial=True), args.out)
        return {"model": model.value, "k": args.k, "N": args.n, "mu": args.mu, "height": 0.0,
                "trivial": True, "bifurcation_speed": mu_k,
                "message": f"mu >= mu_{args.k} = {mu_k:.6f}: only the trivial solution is bracketed"}
    except TargetNotReachedError as exc:
        raise CommandError(str(exc), model=model.value) from None
    if args.out:
        save_profile(ProfileRecord.from_profile(profile, newton_tol=args.newton_tol,
                                                max_iter=args.max_iter), args.out)
    summary = _profile_summary(profile, report)
    summary["trivial"] = False
    return summary


def cmd_branch(args) -> dict:
    cfg = _continuation_config(args)
    try:
        branch = trace_branch(args.model, cfg)
    except BranchStartError as exc:
        raise CommandError(str(exc), model=args.model) from None
    if args.out:
        export_branch_csv(branch, args.out)
    if args.profiles_out:
        save_branch_json(branch, args.profiles_out)
    last = branch.points[-1]
    return {
        "model": branch.model.value,
        "k": branch.k,
        "points": len(branch),
        "termination": branch.termination.value,
        "turning_point_index": branch.turning_point_index,
        "final_mu": last.mu,
        "final_height": last.height,
        "final_N": last.n_points,
    }


def _evolution_config(args) -> EvolutionConfig:
    return EvolutionConfig(dt=args.dt, fixed_point_tol=args.fixed_point_tol,
                           max_inner_iters=args.max_inner_iters)


def _load_input(path) -> WaveProfile:
    return load_profile(path).to_profile()


def cmd_evolve(args) -> dict:
    profile = _load_input(args.input)
    cfg = _evolution_config(args)
    t_final = args.t_final if args.t_final is not None else args.periods * 2.0 * math.pi / profile.mu
    initial = EvolutionState.from_profile(profile, args.n_evolution)
    final, snapshots = evolve(initial, t_final, cfg, snapshot_every=args.snapshot_every or t_final or None)
    if args.out:
        write_snapshots_csv(snapshots or [initial], args.out)
    return {
        "t_final": final.time,
        "n_evolution": args.n_evolution,
        "snapshots": len(snapshots) or 1,
        "max_abs_eta": float(np.max(np.abs(final.values))),
        "mean": float(final.coeffs[0].real),
    }


def cmd_validate(args) -> dict:
    profile = _load_input(args.input)
    metrics = traveling_wave_metrics(profile, args.periods, args.n_evolution, _evolution_config(args))
    metrics.update(mu=profile.mu, periods=args.periods, n_evolution=args.n_evolution, dt=args.dt)
    if args.out:
        Path(args.out).write_text(json.dumps(metrics, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return metrics


def cmd_compare_kdv(args) -> dict:
    waves = {}
    for model in (DispersionModel.WHITHAM, DispersionModel.KDV):
        cfg = _continuation_config(args)
        try:
            waves[model], _ = solve_at_height(model, args.height, args.n, 1, cfg)
        except (TargetNotReachedError, SingularJacobianError) as exc:
            raise CommandError(f"{model.value}: {exc}", model=model.value) from None
    whitham, kdv = waves[DispersionModel.WHITHAM], waves[DispersionModel.KDV]
    x = 2.0 * math.pi * np.arange(args.points + 1) / args.points
    a, b = align_for_comparison(whitham, kdv, x)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("x", "whitham", "kdv"))
            for row in zip(x, a, b):
                writer.writerow([repr(float(v)) for v in row])
    return {
        "height": args.height,
        "whitham_mu": whitham.mu,
        "kdv_mu": kdv.mu,
        "whitham_width": half_height_width(whitham),
        "kdv_width": half_height_width(kdv),
        "sup_difference": float(np.max(np.abs(a - b))),
    }


def cmd_asymptotics(args) -> dict:
    w = asymptotics.whitham_coefficients()
    kd = asymptotics.kdv_coefficients()
    x = 2.0 * math.pi * np.arange(args.points) / args.points
    samples = []
    for eps in args.eps:
        values, mu = asymptotics.whitham_expansion(eps, x)
        samples.append({"eps": eps, "whitham_mu": mu, "kdv_mu": asymptotics.kdv_speed(eps),
                        "whitham": values.tolist(), "kdv": asymptotics.kdv_expansion(eps, x).tolist()})
    out = {
        "whitham": {"mu_star": w.mu_star, "c1": w.c1, "c2": w.c2},
        "kdv": {"mu_star": kd.mu_star, "c1": kd.c1, "speed_coeff": asymptotics.KDV_SPEED_COEFF},
        "x": x.tolist(),
        "samples": samples,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
    return out


# -- parser -------------------------------------------------------------------

def _add_model(p, default="whitham"):
    p.add_argument("--model", choices=[m.value for m in DispersionModel], default=default)
    p.add_argument("--k", type=pos_int, default=1, help="number of crests per 2π period")


def _add_newton(p):
    p.add_argument("--n", type=pos_int, default=64, help="collocation points on (0, π)")
    p.add_argument("--newton-tol", type=pos_float, default=DEFAULT_TOL)
    p.add_argument("--max-iter", type=pos_int, default=DEFAULT_MAX_ITER)


def _add_evolution(p):
    p.add_argument("--input", required=True, help="profile JSON written by 'solve'")
    p.add_argument("--n-evolution", type=pos_int, default=32)
    p.add_argument("--dt", type=pos_float, default=2.0**-10)
    p.add_argument("--fixed-point-tol", type=pos_float, default=1e-12)
    p.add_argument("--max-inner-iters", type=pos_int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="whitham", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="one steady wave at a given speed or height")
    _add_model(p)
    _add_newton(p)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--mu", type=pos_float)
    target.add_argument("--height", type=pos_float)
    p.add_argument("--out", help="profile JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("branch", help="trace a bifurcation branch")
    _add_model(p)
    _add_newton(p)
    p.add_argument("--eps0", type=pos_float)
    p.add_argument("--mu-step", type=pos_float)
    p.add_argument("--height-step", type=pos_float)
    p.add_argument("--height-max", type=pos_float)
    p.add_argument("--switch-threshold", type=pos_float)
    p.add_argument("--refine-factor", type=pos_int)
    p.add_argument("--n-max", type=pos_int)
    p.add_argument("--max-points", type=pos_int)
    p.add_argument("--no-verify", action="store_true", help="skip the refined-grid check of each point")
    p.add_argument("--out", help="branch CSV")
    p.add_argument("--profiles-out", help="JSON sidecar with every profile")
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("evolve", help="propagate a steady wave in time")
    _add_evolution(p)
    when = p.add_mutually_exclusive_group()
    when.add_argument("--periods", type=float, default=1.0)
    when.add_argument("--t-final", type=float)
    p.add_argument("--snapshot-every", type=pos_float)
    p.add_argument("--out", help="snapshot CSV (time,x,eta)")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("validate", help="evolution error metrics of a steady wave")
    _add_evolution(p)
    p.add_argument("--periods", type=float, default=1.0)
    p.add_argument("--out", help="metrics JSON")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare-kdv", help="Whitham and KdV waves of equal height")
    _add_newton(p)
    p.add_argument("--height", type=pos_float, required=True)
    p.add_argument("--points", type=pos_int, default=512, help="evaluation points over one period")
    p.add_argument("--out", help="paired CSV (x,whitham,kdv)")
    p.set_defaults(func=cmd_compare_kdv, k=1)

    p = sub.add_parser("asymptotics", help="bifurcation constants and expansion samples")
    p.add_argument("--eps", type=float, action="append", help="amplitude (repeatable, default 0.01)")
    p.add_argument("--points", type=pos_int, default=16)
    p.add_argument("--out", help="JSON file")
    p.set_defaults(func=cmd_asymptotics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "asymptotics" and not args.eps:
        args.eps = [0.01]
    if args.command == "evolve" and args.t_final is not None and args.t_final < 0:
        parser.error("--t-final must be non-negative")
    try:
        summary = args.func(args)
    except CommandError as exc:
        return _fail(args.command, exc, **exc.details)
    except (StepNonconvergenceError, SingularJacobianError, FloatingPointError,
            BranchStartError, TargetNotReachedError, ValueError, OSError) as exc:
        return _fail(args.command, exc)
    _emit(summary)
    return 0


def _fail(command, exc, **details) -> int:
    payload = {"command": command, "error": type(exc).__name__, "message": str(exc)}
    payload.update(details)
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
