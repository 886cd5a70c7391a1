"""Command-line front end.

Subcommands: generate, solve, cuts-demo, alpha-d, bound, table1, compare.
Instance parameters come from flags or from a flat key=value config file
(InstanceSpec field names; unknown keys are rejected). Exit codes: 0 on
success, 2 on validation errors (bad flags/config), 1 on runtime failures.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import ismd
from .cuts import CutProblemData, cut_variable_l2, cut_variable_strong, exact_cut
from .experiments import (
    METHODS,
    RunManifest,
    TABLE1_HEADER,
    TRACE_HEADER,
    run_method_comparison,
    run_single,
    run_table1_analog,
    write_csv,
)
from .instances import InstanceSpec, generate_instance
from .numkit import RngStream
from .second_stage import oracle_solve, solve_stage
from .strong_concavity import ball_stage_concavity, verify_concavity


class UsageError(Exception):
    pass


_SPEC_FIELDS = {
    "problem": str,
    "n": int,
    "lambda_reg": float,
    "radius": float,
    "anchor": float,
    "first_stage_radius": float,
    "seed": int,
    "cost_range": "range",
    "mean_range": "range",
    "std_range": "range",
}


def read_config(path):
    """Flat key=value config with InstanceSpec field names."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError("%s:%d: expected key = value" % (path, lineno))
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _SPEC_FIELDS:
                raise UsageError("%s:%d: unknown key %r" % (path, lineno, key))
            kind = _SPEC_FIELDS[key]
            if kind == "range":
                parts = [float(p) for p in val.replace(",", " ").split()]
                if len(parts) != 2:
                    raise UsageError("%s:%d: %s needs two numbers" % (path, lineno, key))
                out[key] = tuple(parts)
            else:
                out[key] = kind(val)
    return out


def build_spec(args):
    kwargs = {}
    if getattr(args, "config", None):
        kwargs.update(read_config(args.config))
    if getattr(args, "problem", None):
        kwargs["problem"] = args.problem
    if getattr(args, "n", None) is not None:
        kwargs["n"] = args.n
    if getattr(args, "lambda_reg", None) is not None:
        kwargs["lambda_reg"] = args.lambda_reg
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    if "problem" not in kwargs or "n" not in kwargs:
        raise UsageError("an instance needs at least --problem and --n (or a config)")
    try:
        return InstanceSpec(**kwargs)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def parse_seeds(text):
    """Seed lists: '3', '1,2,5', or '1..10'."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, _, hi = part.partition("..")
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise UsageError("empty seed list %r" % text)
    return tuple(seeds)


def make_parser():
    p = argparse.ArgumentParser(prog="twostage", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_instance_flags(sp):
        sp.add_argument("--problem", choices=("simplex", "ball"))
        sp.add_argument("--n", type=int)
        sp.add_argument("--lambda-reg", dest="lambda_reg", type=float)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--config")

    sp = sub.add_parser("generate", help="generate an instance, write JSON")
    add_instance_flags(sp)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("solve", help="run one method, write a trace CSV")
    add_instance_flags(sp)
    sp.add_argument("--method", required=True, choices=METHODS)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--eps", type=float, default=1e-8)
    sp.add_argument("--theta1", type=float, default=1.0)
    sp.add_argument("--i-max", dest="i_max", type=int)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("cuts-demo", help="build and report cuts at a random anchor")
    add_instance_flags(sp)
    sp.add_argument("--eps", type=float, default=1e-3)
    sp.add_argument("--out")

    sp = sub.add_parser("alpha-d", help="strong-concavity certificate on a ball instance")
    add_instance_flags(sp)
    sp.add_argument("--out")

    sp = sub.add_parser("bound", help="evaluate the convergence-rate gap bound")
    sp.add_argument("--theta1", type=float, required=True)
    sp.add_argument("--theta2", type=float, required=True)
    sp.add_argument("--d-omega", type=float, required=True)
    sp.add_argument("--mu-omega", type=float, default=1.0)
    sp.add_argument("--u-bar", type=float, required=True)
    sp.add_argument("--m-star", type=float, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--out")

    sp = sub.add_parser("table1", help="eta1 vs eta2 table on dense instances")
    sp.add_argument("--n", type=str, default="10")
    sp.add_argument("--lambdas", type=str, default="1,100")
    sp.add_argument("--eps", type=str, default="1e-2,1e-3")
    sp.add_argument("--anchors", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("compare", help="methods x seeds with shared scenarios")
    add_instance_flags(sp)
    sp.add_argument("--methods", required=True)
    sp.add_argument("--seeds", default="0")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--theta1", type=float, default=1.0)
    sp.add_argument("--eps", type=float, default=1e-8)
    sp.add_argument("--i-max", dest="i_max", type=int)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--prefix", default="compare")
    return p


def cmd_generate(args):
    spec = build_spec(args)
    inst = generate_instance(spec)
    payload = {
        "problem": spec.problem,
        "n": spec.n,
        "lambda_reg": spec.lambda_reg,
        "seed": spec.seed,
        "c": inst.c.tolist(),
        "means": inst.means.tolist(),
        "stds": inst.stds.tolist(),
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    print("wrote %s" % args.out)
    return 0


def cmd_solve(args):
    spec = build_spec(args)
    manifest = RunManifest(
        spec=spec,
        methods=(args.method,),
        n_iters=args.N,
        seeds=(args.seed,),
        theta1=args.theta1,
        smd_eps=args.eps,
        i_max=args.i_max,
    )
    run = run_single(manifest, args.method, args.seed)
    if run.trace_rows:
        write_csv(args.out, TRACE_HEADER, run.trace_rows)
    else:
        write_csv(
            args.out,
            ["method", "seed", "final_value", "N"],
            [(run.method, run.seed, run.final_value, run.n_iters)],
        )
    print("%s seed=%d final=%.10g (%.0f ms) -> %s"
          % (run.method, run.seed, run.final_value, run.wall_ms, args.out))
    return 0


def cmd_cuts_demo(args):
    spec = build_spec(args)
    inst = generate_instance(spec)
    rng = RngStream(spec.seed, stream=23)
    from .geometry import sample_point

    x1 = sample_point(inst.first_stage, rng)
    scen = inst.sample_scenario(rng)
    data = CutProblemData.from_problem(inst.stage, x1, scen)
    rep = solve_stage(inst.stage, x1, scen, eps=args.eps)
    rep_exact = oracle_solve(inst.stage, x1, scen)
    cuts = [exact_cut(data, rep_exact), cut_variable_l2(data, rep)]
    try:
        cuts.append(cut_variable_strong(data, rep))
    except ValueError:
        pass
    rows = []
    for cut in cuts:
        rows.append(
            {
                "variant": cut.variant,
                "eta": cut.eta,
                "value_at_anchor": cut.value_at_anchor,
                "slope_norm": float(np.linalg.norm(cut.slope)),
                "anchor_value": rep_exact.primal_value,
            }
        )
        print("%-16s eta=%-12.5g C(anchor)=%-14.8g slope_norm=%.6g"
              % (cut.variant, cut.eta, cut(x1), np.linalg.norm(cut.slope)))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
    return 0


def cmd_alpha_d(args):
    spec = build_spec(args)
    if spec.problem != "ball":
        raise UsageError("alpha-d needs --problem ball")
    inst = generate_instance(spec)
    rng = RngStream(spec.seed, stream=29)
    from .geometry import sample_point

    x1 = sample_point(inst.first_stage, rng)
    scen = inst.sample_scenario(rng)
    cert = ball_stage_concavity(inst.stage, x1, scen)
    lo, hi = cert.region.interval

    def theta(mu):
        from .second_stage import dual_function_value

        return dual_function_value(inst.stage, x1, scen, mu)

    check = verify_concavity(theta, (lo, hi), cert.alpha_d, n_checks=40,
                             rng=rng.substream(1))
    print("alpha_d = %.10g" % cert.alpha_d)
    print("mu_bar  = %.10g" % hi)
    print("verify_concavity: %s" % ("pass" if check.passed else "FAIL"))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(
                {
                    "alpha_d": cert.alpha_d,
                    "mu_bar": hi,
                    "verified": bool(check.passed),
                },
                fh,
                indent=2,
                sort_keys=True,
            )
    return 0 if check.passed else 1


def cmd_bound(args):
    inputs = ismd.RateBoundInputs(
        theta1=args.theta1,
        theta2=args.theta2,
        d_omega=args.d_omega,
        mu_omega=args.mu_omega,
        u_bar=args.u_bar,
        m_star=args.m_star,
    )
    val = ismd.rate_bound(inputs, args.N)
    print("gap_bound = %.10g" % val)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"gap_bound": val, "N": args.N}, fh, indent=2, sort_keys=True)
    return 0


def _parse_list(text, cast):
    return [cast(p) for p in text.split(",") if p.strip()]


def cmd_table1(args):
    rows = run_table1_analog(
        n_list=_parse_list(args.n, int),
        lambda_list=_parse_list(args.lambdas, float),
        eps_levels=_parse_list(args.eps, float),
        seed=args.seed,
        n_anchors=args.anchors,
    )
    write_csv(args.out, TABLE1_HEADER, rows)
    print("wrote %d rows -> %s" % (len(rows), args.out))
    return 0


def cmd_compare(args):
    spec = build_spec(args)
    manifest = RunManifest(
        spec=spec,
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        n_iters=args.N,
        seeds=parse_seeds(args.seeds),
        theta1=args.theta1,
        smd_eps=args.eps,
        i_max=args.i_max,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    summary, _ = run_method_comparison(manifest, out_dir=args.out_dir,
                                       prefix=args.prefix)
    for method, seed, final, wall, n in summary:
        print("%-8s seed=%-4d final=%.10g (%.0f ms)" % (method, seed, final, wall))
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "cuts-demo": cmd_cuts_demo,
    "alpha-d": cmd_alpha_d,
    "bound": cmd_bound,
    "table1": cmd_table1,
    "compare": cmd_compare,
}


def cli_main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print("runtime failure: %s" % exc, file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
