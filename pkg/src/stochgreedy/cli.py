"""Command line entry point.

Exit codes: 0 success, 1 invariant violation, 2 usage error, 3 IO error.
"""

from __future__ import annotations

import argparse
import sys

from . import kernels
from .analysis import decompose, run_mechanism, verify_bounds, write_bounds_csv
from .bench import bench_replay
from .certificates import (LambdaParams, competitive_ratio, impossibility_scan, lambda_opt_terms,
                           lambda_terms, maximize, write_terms_csv)
from .expectation import enumerate_exact, mc_estimate, propagate, write_expectation_csv
from .generators import FAMILIES, LAWS, GeneratorSpec, generate
from .harness import emit_plot_data, run_suite
from .instance import InstanceFormatError, format_instance, load_instance, offline_optimum
from .matchers import InvariantViolation, RunConfig, sample_run
from .policy import format_trace

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

BASE_POINT = dict(eps=0.082, delta=0.445, zeta=0.955, beta=0.00337198, sigma=0.03362)
OPT_POINT = dict(eps=0.0805, delta=0.4009, zeta=0.9216, beta=0.0062, sigma=0.0555, p=0.8613)


class UsageError(Exception):
    pass


def _algo_flags(p, engine=True, many=False):
    if many:
        p.add_argument("--variant", action="append", choices=["Greedy", "SG", "OSG"],
                       help="repeat to run several variants (default SG)")
    else:
        p.add_argument("--variant", default="SG", choices=["Greedy", "SG", "OSG"])
    p.add_argument("--eps", type=float, default=0.082)
    p.add_argument("--delta", type=float, default=0.445)
    p.add_argument("--p", type=float, default=None, help="OSG fallback probability")
    if engine:
        p.add_argument("--engine", default="dist", choices=["enum", "dist", "mc"])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--replicas", type=int, default=10000)


def _config(args, variant=None) -> RunConfig:
    variant = variant or args.variant
    p = args.p
    if variant == "OSG" and p is None:
        p = OPT_POINT["p"]
    if variant != "OSG":
        p = None
    try:
        return RunConfig(variant, args.eps, args.delta, p, getattr(args, "engine", "dist"),
                         getattr(args, "seed", 0), getattr(args, "replicas", 10000))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args):
    spec = GeneratorSpec(args.family, args.seed, args.m, args.n, args.law, args.k, args.L)
    try:
        inst = generate(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(format_instance(inst), args.out)
    return EXIT_OK


def cmd_opt(args):
    inst = load_instance(args.instance)
    res = offline_optimum(inst)
    match = " ".join("-" if a is None else str(a) for a in res.match)
    _write(f"value {res.value!r}\nmatch {match}\n", args.out)
    return EXIT_OK


def cmd_run(args):
    variants = args.variant or ["SG"]
    configs = []
    for v in variants:
        args_v = argparse.Namespace(**vars(args))
        args_v.variant = v
        configs.append(_config(args_v, v))
    named = [(path, load_instance(path)) for path in args.instances]
    res = run_suite(configs, named, args.out, include_runtime=args.timing,
                    workers=args.workers)
    if args.out is None:
        for row in res.rows:
            print(f"{row['instance']} {row['variant']} {row['engine']} value={row['value']} "
                  f"opt={row['opt']} ratio={row['ratio']}")
    if args.plot:
        emit_plot_data(res.rows, args.plot)
    if args.trace:
        if len(named) != 1 or len(configs) != 1 or configs[0].variant == "Greedy":
            raise UsageError("--trace needs one instance and one stochastic variant")
        cfg = configs[0]
        name, inst = named[0]
        pol = propagate(inst, cfg.algo_params()).policy
        trace = sample_run(inst, cfg, pol)
        text = format_trace(pol) + "assigned " + " ".join(map(str, trace.assigned)) + "\n"
        _write(text, args.trace)
    for f in res.failures:
        print(f"INVARIANT: {f}", file=sys.stderr)
    return EXIT_OK if res.ok else EXIT_INVARIANT


def cmd_expect(args):
    inst = load_instance(args.instance)
    cfg = _config(args)
    if cfg.variant == "Greedy":
        raise UsageError("expectations are defined for SG and OSG")
    params = cfg.algo_params()
    if cfg.engine == "enum":
        res = enumerate_exact(inst, params)
    else:
        res = propagate(inst, params)
        if cfg.engine == "mc":
            res = mc_estimate(inst, params, res.policy, cfg.replicas, cfg.seed)
    write_expectation_csv(res, args.out or sys.stdout)
    return EXIT_OK


def cmd_verify(args):
    inst = load_instance(args.instance)
    if args.variant == "Greedy":
        raise UsageError("verify applies to SG or OSG")
    point = OPT_POINT if args.variant == "OSG" else BASE_POINT
    z = point["zeta"] if args.zeta is None else args.zeta
    b = point["beta"] if args.beta is None else args.beta
    s = point["sigma"] if args.sigma is None else args.sigma
    cfg = _config(args)
    params = cfg.algo_params()
    dec = decompose(inst, params)
    if args.variant == "OSG":
        lp = LambdaParams(cfg.eps, cfg.delta, z, b, s, cfg.p)
        try:
            lam = lambda_opt_terms(lp).min
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        led = run_mechanism(dec, "M4", z, b, s, cfg.p)
    else:
        lam = lambda_terms(LambdaParams(cfg.eps, cfg.delta, z, b, s)).min
        led = run_mechanism(dec, "M2", z, b, s)
    rep = verify_bounds(led, dec, lam)
    if args.out:
        write_bounds_csv(rep, args.out)
    else:
        print("impression,X,Y,Z,Excess,bound,margin,pass")
        for r in rep.rows:
            print(f"{r.impression},{r.X!r},{r.Y!r},{r.Z!r},{r.excess!r},{r.bound!r},"
                  f"{r.margin!r},{int(r.passed)}")
    print(f"lambda={lam!r} identity_residual={rep.identity_residual:.3g} "
          f"sum_residual={rep.sum_residual:.3g} dropped={len(led.dropped)}", file=sys.stderr)
    if not rep.ok:
        print(rep.describe_violations(), file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_lambda(args):
    if args.action == "eval":
        point = OPT_POINT if args.kind == "optimized" else BASE_POINT
        vals = {k: (getattr(args, k) if getattr(args, k) is not None else point.get(k))
                for k in ("eps", "delta", "zeta", "beta", "sigma", "p")}
        try:
            if args.kind == "optimized":
                tb = lambda_opt_terms(LambdaParams(**vals))
            else:
                vals["p"] = None
                tb = lambda_terms(LambdaParams(**vals))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif args.action == "maximize":
        lp, tb = maximize(args.kind, args.restarts, args.iters, args.seed)
        print("argmax " + " ".join(f"{k}={v:.8g}" for k, v in
                                   zip(("eps", "delta", "zeta", "beta", "sigma", "p"),
                                       lp.as_tuple())))
    else:
        res = impossibility_scan(args.resolution, args.refine, args.restarts)
        tb = res.breakdown
        print("argmax " + " ".join(f"{k}={v:.8g}" for k, v in
                                   zip(("eps", "delta", "zeta", "beta", "sigma", "p"),
                                       res.argmax.as_tuple())))
        print(f"certified_below_ceiling {res.certified}")
    print(tb.table())
    lam = tb.min
    print(f"lambda {lam!r}")
    if lam >= 0:
        print(f"ratio {competitive_ratio(lam)!r}")
    if args.out:
        write_terms_csv(tb, args.out)
    if args.action == "impossibility" and not res.certified:
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_bench(args):
    rows = bench_replay(args.m, args.n, args.replicas, args.seed, args.repeats)
    print(f"active backend: {kernels.BACKEND}")
    for r in rows:
        print(f"{r['backend']:>7s}  {r['seconds'] * 1e3:9.2f} ms  "
              f"{r['replicas_per_s']:12.0f} replicas/s  x{r['speedup']:.1f}  "
              f"identical={r['matches_python']}")
    return EXIT_OK if all(r["matches_python"] for r in rows) else EXIT_INVARIANT


def build_parser():
    ap = argparse.ArgumentParser(prog="stochgreedy",
                                 description="Online weighted matching with free disposal.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("--family", required=True, choices=FAMILIES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--law", default="uniform", choices=LAWS)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--L", type=float, default=10.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("opt", help="offline maximum-weight matching")
    o.add_argument("instance")
    o.add_argument("--out")
    o.set_defaults(func=cmd_opt)

    r = sub.add_parser("run", help="expected values over instances and variants")
    r.add_argument("instances", nargs="*")
    _algo_flags(r, many=True)
    r.add_argument("--out", help="CSV report path")
    r.add_argument("--plot", help="write (instance, algorithm, ratio) data here")
    r.add_argument("--trace", help="write the decision trace and one sampled run here")
    r.add_argument("--timing", action="store_true", help="add a runtime column")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("expect", help="table of expected gains")
    e.add_argument("instance")
    _algo_flags(e)
    e.add_argument("--out")
    e.set_defaults(func=cmd_expect)

    v = sub.add_parser("verify", help="excess decomposition and per-impression bounds")
    v.add_argument("instance")
    _algo_flags(v, engine=False)
    v.add_argument("--zeta", type=float)
    v.add_argument("--beta", type=float)
    v.add_argument("--sigma", type=float)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    lam = sub.add_parser("lambda", help="certificate terms and searches")
    lam.add_argument("action", choices=["eval", "maximize", "impossibility"])
    lam.add_argument("--kind", default="base", choices=["base", "optimized"])
    for k in ("eps", "delta", "zeta", "beta", "sigma", "p"):
        lam.add_argument(f"--{k}", type=float)
    lam.add_argument("--restarts", type=int, default=32)
    lam.add_argument("--iters", type=int, default=400)
    lam.add_argument("--resolution", type=int, default=8)
    lam.add_argument("--refine", type=int, default=200)
    lam.add_argument("--seed", type=int, default=0)
    lam.add_argument("--out")
    lam.set_defaults(func=cmd_lambda)

    b = sub.add_parser("bench", help="compiled vs pure-Python replay kernel")
    b.add_argument("--m", type=int, default=12)
    b.add_argument("--n", type=int, default=6)
    b.add_argument("--replicas", type=int, default=20000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=3)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InstanceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantViolation as exc:
        print(f"INVARIANT: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:      # bad parameters or an instance over the enumeration cap
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
