"""Command line front end.

Four subcommands::

    saddlekit gen     derive a hard-instance spec, write it as key = value text
    saddlekit run     run one solver on one instance, write the trace CSV
    saddlekit bench   experiment suites: kappa_sweep | n_sweep | lower_bound | kernels
    saddlekit verify  property battery, or consistency checks on a spec file

Exit codes: 0 success, 1 verification/run failure, 2 configuration error.
The default output directory is "." unless SADDLEKIT_OUTDIR is set.
"""

import argparse
import os
import sys

from . import harness
from .catalyst import InnerLoopError
from .instances import HardInstanceSpec
from .solvers import BudgetExceededError, DivergenceError


class ConfigError(Exception):
    """Bad flags or unusable input files (exit code 2)."""


def _parse_seeds(text):
    """Comma list with ranges: "0,1,2", "0-4", "0-3,7"."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ConfigError("empty seed list")
    return tuple(seeds)


def _instance_flags(parser, require_mode):
    g = parser.add_argument_group("instance")
    g.add_argument("--mode", choices=("deterministic", "finite_sum", "case1"),
                   required=require_mode,
                   help="hard-instance family")
    g.add_argument("--L", type=float, default=1.0, help="smoothness constant")
    g.add_argument("--mu", type=float, default=0.1,
                   help="strong-concavity constant")
    g.add_argument("--Delta", type=float, default=1.0,
                   help="initial primal suboptimality scale")
    g.add_argument("--epsilon", type=float, default=None,
                   help="target stationarity")
    g.add_argument("--n", type=int, default=1, help="component count")
    g.add_argument("--d-override", type=int, default=None, dest="d_override",
                   help="pin the chain length instead of deriving it")
    g.add_argument("--d-total", type=int, default=None, dest="d_total",
                   help="total dimension for the quadratic family")


def _derive_from_flags(args):
    if args.epsilon is None:
        raise ConfigError("--epsilon is required when deriving an instance "
                          "from flags")
    return HardInstanceSpec.derive(
        args.mode, L=args.L, mu=args.mu, Delta=args.Delta,
        epsilon=args.epsilon, n=args.n, d_override=args.d_override,
        d_total=args.d_total)


def _load_spec(path):
    if not os.path.exists(path):
        raise ConfigError(f"instance file not found: {path}")
    with open(path) as fh:
        return HardInstanceSpec.from_text(fh.read())


def _ensure_parent(path):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args):
    spec = _derive_from_flags(args)
    out = args.out or os.path.join(harness.default_outdir(),
                                   spec.instance_id() + ".spec")
    _ensure_parent(out)
    with open(out, "w") as fh:
        fh.write(spec.to_text())
    dim = spec.d_total if spec.mode == "case1" else spec.d
    print(f"wrote {out}")
    print(f"  instance {spec.instance_id()}  dimension parameter {dim}"
          + ("  (d clamped to 1)" if spec.d_clamped else ""))
    return 0


def cmd_run(args):
    if args.spec:
        spec = _load_spec(args.spec)
    elif args.mode:
        spec = _derive_from_flags(args)
    else:
        raise ConfigError("pass --spec FILE or --mode plus constants")
    trace, info = harness.run_single(
        spec, solver=args.solver, seed=args.seed, budget=args.budget,
        epsilon=args.epsilon if args.spec else None, tau=args.tau,
        rho_factor=args.rho, trace_every=args.trace_every,
        with_moreau=args.moreau)
    out = args.out or os.path.join(
        harness.default_outdir(),
        f"{spec.instance_id()}-{args.solver}-seed{args.seed}.csv")
    _ensure_parent(out)
    harness.write_csv(out, trace)
    print(f"wrote {out}")
    print(f"  status={info['status']}  oracle work={info['work']}  "
          f"final grad norm={info['grad_phi_norm']:.6e}  "
          f"wall={info['wall_ms']:.1f} ms")
    return 0


def _lower_bound_text(out):
    """Flatten the suite's reports into one text block; returns (text, ok)."""
    fs_reports = out["finite_sum"]
    parts = [out["deterministic"].to_text(), ""]
    parts.append(f"mode=finite_sum over {len(fs_reports)} seeds "
                 f"floor_calls={fs_reports[0].floor_calls}")
    works = []
    for seed, rep in enumerate(fs_reports):
        svrg = rep.audits["svrg"]
        cat = rep.audits["catalyst-svrg"]
        if svrg.work_at_first_stationary is not None:
            works.append(svrg.work_at_first_stationary)
        parts.append(
            f"  seed {seed:2d}: svrg work={svrg.work_at_first_stationary} "
            f"satisfied={svrg.satisfied}; catalyst-svrg "
            f"status={cat.status} satisfied={cat.satisfied}")
    if works:
        parts.append(f"  mean component-equivalent work at first "
                     f"stationarity: {sum(works) / len(works):.1f} "
                     f"(floor {fs_reports[0].floor_calls})")
    parts.append("")
    parts.append(out["case1"].to_text())
    ok = (out["deterministic"].satisfied
          and all(r.satisfied for r in fs_reports)
          and out["case1"].satisfied)
    parts.append(f"all audits satisfied: {ok}")
    return "\n".join(parts) + "\n", ok


def cmd_bench(args):
    outdir = args.out or harness.default_outdir()
    os.makedirs(outdir, exist_ok=True)
    if args.suite == "kappa_sweep":
        seeds = _parse_seeds(args.seeds) if args.seeds else (0, 1, 2, 3, 4)
        info = harness.bench_kappa(outdir, seeds=seeds, jobs=args.jobs)
        for solver, fit in sorted(info["fits"].items()):
            print(f"  {solver:12s} slope {fit.slope:+.4f}  "
                  f"R^2 {fit.r_squared:.4f}")
        print(f"wrote {info['csv']} and {info['svg']}")
        print(f"  backend={info['backend']}  wall={info['wall_s']:.1f} s")
        return 0
    if args.suite == "n_sweep":
        seeds = _parse_seeds(args.seeds) if args.seeds else (0,)
        info = harness.bench_n(outdir, seed=seeds[0])
        print(f"wrote {info['csv']}")
        return 0
    if args.suite == "lower_bound":
        fs_seeds = (_parse_seeds(args.seeds) if args.seeds
                    else tuple(range(20)))
        out = harness.lower_bound_suite(budget=args.budget,
                                        fs_seeds=fs_seeds)
        text, ok = _lower_bound_text(out)
        path = os.path.join(outdir, "lower_bound.txt")
        with open(path, "w") as fh:
            fh.write(text)
        print(text, end="")
        print(f"wrote {path}")
        return 0 if ok else 1
    # kernels
    from . import kernel_bench
    kernel_bench.run_bench()
    return 0


def cmd_verify(args):
    if args.spec:
        return _verify_spec_file(args.spec)
    names = [args.filter] if args.filter else None
    results, ok = harness.verify_all(names=names)
    n_ok = sum(1 for _, good, _ in results if good)
    print(f"{n_ok}/{len(results)} properties ok")
    return 0 if ok else 1


def _verify_spec_file(path):
    """Consistency checks on a generated instance file."""
    if not os.path.exists(path):
        raise ConfigError(f"instance file not found: {path}")
    with open(path) as fh:
        text = fh.read()
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as e:
            checks.append((name, False, f"{type(e).__name__}: {e}"))

    holder = {}
    check("parses as key = value text",
          lambda: holder.setdefault("spec", HardInstanceSpec.from_text(text)))
    spec = holder.get("spec")
    if spec is not None:
        check("field consistency", spec.validate)
        check("text round trip is exact",
              lambda: _assert_roundtrip(spec))
        check("derived fields match the target constants",
              lambda: _assert_rederive(spec))
        dim = spec.d_total if spec.mode == "case1" else spec.d
        if dim is not None and dim <= 2000:
            check("gradients match finite differences at a sampled point",
                  lambda: _assert_fd(spec))
    for name, good, detail in checks:
        mark = "ok  " if good else "FAIL"
        suffix = f" ({detail})" if detail else ""
        print(f"{mark} {name}{suffix}")
    return 0 if all(good for _, good, _ in checks) else 1


def _assert_roundtrip(spec):
    again = HardInstanceSpec.from_text(spec.to_text())
    if again != spec:
        raise AssertionError("re-parsed spec differs")


def _assert_rederive(spec):
    again = HardInstanceSpec.derive(
        spec.mode, L=spec.L, mu=spec.mu, Delta=spec.Delta,
        epsilon=spec.epsilon, n=spec.n, d_override=spec.d,
        d_total=spec.d_total)
    for name in ("lambda1", "lambda2", "alpha", "eta", "theta"):
        a, b = getattr(spec, name), getattr(again, name)
        if a != b:
            raise AssertionError(f"{name}: file has {a}, derivation gives {b}")


def _assert_fd(spec):
    import numpy as np
    from .core import SaddlePoint, finite_difference_check
    problem = spec.make()
    rng = np.random.default_rng(0)
    point = SaddlePoint(rng.standard_normal(problem.d1) * 0.1,
                        rng.standard_normal(problem.d2) * 0.1)
    err = finite_difference_check(problem, point)
    if err > 1e-5:
        raise AssertionError(f"finite-difference error {err:.3e}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="saddlekit",
        description="minimax hard instances, solvers, and oracle audits")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="derive an instance spec file")
    _instance_flags(p, require_mode=True)
    p.add_argument("--out", default=None, help="output file path "
                   "(default: <instance id>.spec in the output directory)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run one solver on one instance")
    p.add_argument("--spec", default=None, help="instance file from `gen`")
    _instance_flags(p, require_mode=False)
    p.add_argument("--solver", default="eg",
                   help="gda | alt_gda | eg | ogda | svrg | catalyst-<sub>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10 ** 7,
                   help="oracle-call budget")
    p.add_argument("--tau", type=float, default=None,
                   help="proximal regularization weight (wrapper only)")
    p.add_argument("--rho", type=float, default=0.9,
                   help="inner-tolerance decay factor (wrapper only)")
    p.add_argument("--trace-every", type=int, default=0, dest="trace_every",
                   help="record a trace row every K iterations")
    p.add_argument("--moreau", action="store_true",
                   help="also compute the envelope stationarity at the end")
    p.add_argument("--out", default=None, help="trace CSV path")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="experiment suites")
    p.add_argument("--suite", default="kappa_sweep",
                   choices=("kappa_sweep", "n_sweep", "lower_bound",
                            "kernels"))
    p.add_argument("--seeds", default=None,
                   help="comma list / ranges, e.g. 0,1,2 or 0-4")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for grid suites")
    p.add_argument("--budget", type=int, default=400_000,
                   help="per-run budget for the lower-bound audits")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="run the property battery")
    p.add_argument("--spec", default=None,
                   help="check a generated instance file instead")
    p.add_argument("--filter", default=None,
                   help="only run properties whose name contains this")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (DivergenceError, BudgetExceededError, InnerLoopError) as e:
        print(f"run failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
