"""Command-line front end: ``qmeasure <family> <subcommand> [flags]``.

Reports go to stdout as JSON with sorted keys. With ``--out DIR`` the
report, any CSV curves and a ``manifest.json`` describing the run are
written to ``DIR``; only the manifest carries wall time, so data files are
byte-identical across reruns.

Exit codes: 0 success, 1 bound violation, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from .config import Tolerances, get_tolerances, set_tolerances

EXIT_OK, EXIT_VIOLATION, EXIT_INVALID = 0, 1, 2


class CliError(ValueError):
    pass


# ----------------------------------------------------------------- output

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


class Run:
    """Collects a command's report and side files, then emits them."""

    def __init__(self, args):
        self.args = args
        self.files: dict[str, str] = {}
        self.start = time.perf_counter()

    def add_file(self, name: str, text: str):
        self.files[name] = text

    def finish(self, report: dict, stream=None) -> None:
        stream = stream or sys.stdout
        text = dumps(report)
        out = getattr(self.args, "out", None)
        if out is None:
            stream.write(text)
            return
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        self.files["report.json"] = text
        for name, body in self.files.items():
            (d / name).write_text(body, encoding="utf-8", newline="\n")
        flags = {k: v for k, v in vars(self.args).items() if k not in ("func", "out")}
        manifest = {
            "command": " ".join([self.args.family, self.args.sub]),
            "flags": flags,
            "seed": self.args.seed,
            "tool_version": __version__,
            "wall_time_s": round(time.perf_counter() - self.start, 3),
            "outputs": sorted(self.files) + ["manifest.json"],
        }
        (d / "manifest.json").write_text(dumps(manifest), encoding="utf-8", newline="\n")
        stream.write(text)


# --------------------------------------------------------------- commands

def cmd_bounds_audit(args) -> int:
    from .qbounds import random_audit, sharp_equality_sweep
    from .qchan import KrausChannel

    run = Run(args)
    if args.inject_fault:
        # a non-unital "channel" must be rejected before any bound is evaluated
        KrausChannel(np.array([np.diag([1.0, 0.5]).astype(complex)]))
    insts = random_audit(args.trials, args.seed)
    violations = [i for i in insts if not all(c.satisfied for c in i.checks)]
    gaps = [i.worst_gap() for i in insts]
    sweep = sharp_equality_sweep()
    rows, max_gap = [], 0.0
    for r in sweep:
        row = {"p": r["p"]}
        for c in r["checks"]:
            row[c.name] = c.gap
            max_gap = max(max_gap, abs(c.gap))
        rows.append(row)
    names = [c.name for c in sweep[0]["checks"]]
    run.add_file("sharp_sweep.csv", to_csv(["p"] + names, [[r["p"]] + [r[n] for n in names] for r in rows]))
    counts: dict[str, int] = {}
    for i in insts:
        for c in i.checks:
            if not c.void:
                counts[c.name] = counts.get(c.name, 0) + 1
    report = {
        "audit": {
            "trials": args.trials,
            "seed": args.seed,
            "checks_evaluated": counts,
            "min_gap": min(gaps),
            "violations": [
                {"seed": i.seed, "sys_dim": i.sys_dim, "noise": i.noise,
                 "checks": [c.to_dict() for c in i.checks if not c.satisfied]}
                for i in violations
            ],
        },
        "sharp_sweep": {"rows": rows, "max_abs_gap": max_gap, "equality_ok": max_gap <= 1e-8},
    }
    run.finish(report)
    return EXIT_VIOLATION if violations or max_gap > 1e-8 else EXIT_OK


def _parse_t(s: str) -> float:
    t = float(s)
    if not t > 0:
        raise argparse.ArgumentTypeError("t must be positive")
    return t


def _optimum_dict(target: str, t: float) -> dict:
    from .pointer_opt import optimize_pointer, unbiasedness_check

    opt = optimize_pointer(target, t)
    c = opt.pointer.constants
    d = {"target": target, "t": t, "d1": opt.quality.d1, "d2": opt.quality.d2,
         "sigma": opt.quality.sigma, "unbiasedness_residual": unbiasedness_check(opt.pointer)}
    if target == "x":
        d.update(eps=opt.param, C1=c["C1"])
    else:
        d.update(delta=opt.param, D1=0.0, D2=c["C2"], D3=c["C3"])
    return d


def cmd_pointer(args) -> int:
    from . import pointer_opt as po

    run = Run(args)
    if args.sub == "optimize":
        targets = ("x", "z") if args.target == "both" else (args.target,)
        report = {tg: _optimum_dict(tg, args.t) for tg in targets}
        if len(targets) == 2:
            report["product"] = report["x"]["sigma"] * report["z"]["sigma"]
    elif args.sub == "naive":
        opt = po.naive_minimum()
        report = {"minimum": {"t_sigma": opt.t_sigma, "sigma2": opt.sigma2,
                              "t_sigma_tilde": opt.t_sigma_tilde, "sigma_tilde2": opt.sigma_tilde2,
                              "product": opt.product}}
        if args.t is not None:
            s2, st2 = po.naive_qualities(args.t)
            lin, quad_ = po.simple_pointer_qualities(args.t)
            report["at_t"] = {"t": args.t, "sigma2": s2, "sigma_tilde2": st2,
                              "product": math.sqrt(s2 * st2),
                              "linear_sigma2": lin, "quadratic_sigma_tilde2": quad_}
    else:
        targets = ("x", "z") if args.target == "both" else (args.target,)
        report = {}
        for tg in targets:
            opt = po.optimize_pointer(tg, args.t)
            lo, hi = po.support(opt.pointer)
            pad = 0.05 * (hi - lo)
            grid = np.linspace(lo - pad, hi + pad, args.grid)
            states = po.CANONICAL_STATES[tg]
            cols = [po.output_density(opt.pointer, s, grid) for s in states]
            header = ["x"] + ["bloch_" + "_".join(f"{v:+g}" for v in s) for s in states]
            name = f"density_{tg}.csv"
            run.add_file(name, to_csv(header, zip(grid, *cols)))
            report[tg] = {"support": [lo, hi], "grid_points": args.grid, "file": name,
                          "states": [list(s) for s in states]}
        if args.out is None:
            for name, body in run.files.items():
                sys.stderr.write(f"# {name}\n{body}")
    run.finish(report)
    return EXIT_OK


def cmd_lan(args) -> int:
    from . import lan_est as le

    run = Run(args)
    if args.sub == "stage1":
        bloch = tuple(args.bloch)
        freq = le.stage1_miss_frequency(args.n, args.kappa, args.eps, bloch, args.reps, args.seed)
        bound = le.hoeffding_bound(args.n, args.kappa, args.eps)
        report = {"n": args.n, "kappa": args.kappa, "eps": args.eps, "bloch": list(bloch),
                  "reps": args.reps, "miss_frequency": freq, "hoeffding_bound": bound,
                  "satisfied": freq <= bound}
        run.finish(report)
        return EXIT_OK if freq <= bound else EXIT_VIOLATION
    cfg = le.EstimationConfig(n=args.n, mu0=args.mu, u_true=tuple(args.u), kappa=args.kappa,
                              eta=args.eta, mode=args.mode, trials=args.trials, seed=args.seed,
                              loss=args.loss)
    rep = le.run_trials(cfg, threads=args.threads)
    report = rep.to_dict()
    report["z_score"] = (rep.mean_n_risk - rep.theory) / rep.std_error if rep.std_error > 0 else 0.0
    if args.trial_csv:
        u_tilde = le.sample_trials(cfg, threads=args.threads)
        u_hat = le.truncate_estimator(u_tilde, cfg.n, cfg.eta)
        tr, fi = le.loss(np.asarray(cfg.u_true), u_hat, cfg.mu0)
        rows = np.column_stack([u_tilde, u_hat, tr, fi])
        run.add_file("trials.csv", to_csv(["ux_raw", "uy_raw", "uz_raw", "ux", "uy", "uz",
                                           "trace_loss", "fidelity_loss"], rows))
    run.finish(report)
    return EXIT_OK


def cmd_examples(args) -> int:
    from . import dynamics_examples as dx
    from . import fock

    run = Run(args)
    if args.sub == "beamsplitter":
        space = fock.FockSpace(args.n_max)
        rows = []
        for th in args.theta:
            q = fock.joint_quality(th, space)
            rows.append({"theta": th, "sigma_b": q.sigma_b, "sigma_b_tilde": q.sigma_bt,
                         "product": q.product, "sigma_b2_closed_form": 0.5 * math.tan(th) ** 2})
        run.add_file("beamsplitter.csv", to_csv(list(rows[0]), [list(r.values()) for r in rows]))
        report = {"n_max": args.n_max, "rows": rows}
    elif args.sub == "rf":
        ts = args.t if args.t else list(np.linspace(0.0, 10.0, 101))
        rows = []
        for t in ts:
            dist, db = dx.rf_disturbance(t), dx.rf_infidelity_bound(t)
            rows.append({"t": float(t), "disturbance": dist, "delta_bound": db,
                         "identity_residual": (0.5 - db) ** 2 + (0.5 - dist) ** 2 - 0.25})
        run.add_file("rf.csv", to_csv(list(rows[0]), [list(r.values()) for r in rows]))
        report = {"rows": rows}
    elif args.sub == "chain":
        rows = []
        for n in args.N:
            if n > dx.MAX_CHAIN:
                # beyond exact simulation only the closed-form bound is available
                rows.append({"N": n, "kind": args.kind, "coherence": None,
                             "bound": dx.chain_bound(n, args.kind), "delta_comm": None})
                continue
            res = dx.spin_chain(n, args.kind)
            rows.append({"N": n, "kind": args.kind, "coherence": res.coherence, "bound": res.bound,
                         "delta_comm": res.estimate.delta_comm})
        run.add_file("chain.csv", to_csv(list(rows[0]), [list(r.values()) for r in rows]))
        report = {"rows": rows}
    else:
        a0, a1 = args.alpha
        joint, reduced = dx.cnot_transfer(a0, a1)
        report = {"alpha": [a0, a1], "joint": joint, "reduced": reduced,
                  "repeated_readout_law": dx.repeated_readout_law(a0, a1)}
    run.finish(report)
    return EXIT_OK


# ----------------------------------------------------------------- parser

def _tol_pair(s: str) -> tuple[str, float]:
    name, _, val = s.partition("=")
    valid = {f.name for f in fields(Tolerances)}
    if name not in valid or not val:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE with NAME in {sorted(valid)}")
    return name, float(val)


def _seed(s: str) -> int:
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=_seed, default=d(0), help="master seed, 64-bit (default 0)")
    p.add_argument("--tol", type=_tol_pair, action="append", default=d([]), metavar="NAME=VALUE",
                   help=f"override a tolerance; defaults {asdict(get_tolerances())}")
    p.add_argument("--threads", type=int, default=d(None),
                   help="worker threads for Monte Carlo (default: env QM_THREADS or 1)")
    p.add_argument("--out", default=d(None), help="directory for report, CSV files and manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmeasure", description="Measurement trade-off numerics.",
                                     allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    _global_flags(parser, suppress=False)
    fam = parser.add_subparsers(dest="family", required=True)

    def leaf(sub, name, func, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    bounds = fam.add_parser("bounds", allow_abbrev=False, help="trade-off bound audit").add_subparsers(dest="sub", required=True)
    p = leaf(bounds, "audit", cmd_bounds_audit, "random audit plus sharp-family equality sweep")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--inject-fault", action="store_true", help="feed a non-unital map (expect exit 2)")

    pointer = fam.add_parser("pointer", allow_abbrev=False, help="homodyne pointer optimization").add_subparsers(dest="sub", required=True)
    for name, help_ in (("optimize", "optimal rational pointers"), ("density", "output densities as CSV"),
                        ("naive", "naive pointer qualities")):
        p = leaf(pointer, name, cmd_pointer, help_)
        if name == "naive":
            p.add_argument("--t", type=_parse_t, default=None)
        else:
            p.add_argument("--t", type=_parse_t, default=math.inf, help="interaction time (default inf)")
            p.add_argument("--target", choices=("x", "z", "both"), default="both")
        if name == "density":
            p.add_argument("--grid", type=int, default=401)

    lan = fam.add_parser("lan", allow_abbrev=False, help="adaptive qubit estimation").add_subparsers(dest="sub", required=True)
    p = leaf(lan, "run", cmd_lan, "Monte Carlo risk of the two-stage estimator")
    p.add_argument("--mu", type=float, default=0.9)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--u", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--mode", choices=("gaussian", "exact"), default="gaussian")
    p.add_argument("--eta", type=float, default=0.2)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--loss", choices=("trace", "fidelity"), default="trace")
    p.add_argument("--trial-csv", action="store_true", help="also write per-trial CSV (needs --out)")
    p = leaf(lan, "stage1", cmd_lan, "stage-one localization miss frequency")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--kappa", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=0.15)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--bloch", type=float, nargs=3, default=[0.0, 0.0, 0.0])

    ex = fam.add_parser("examples", allow_abbrev=False, help="worked physical examples").add_subparsers(dest="sub", required=True)
    p = leaf(ex, "beamsplitter", cmd_examples, "joint position/momentum measurement")
    p.add_argument("--theta", type=float, nargs="+", default=[math.pi / 8, math.pi / 6, math.pi / 4, math.pi / 3])
    p.add_argument("--n-max", type=int, default=40)
    p = leaf(ex, "rf", cmd_examples, "resonance fluorescence disturbance curves")
    p.add_argument("--t", type=float, nargs="+", default=None)
    p = leaf(ex, "chain", cmd_examples, "spin chain decoherence")
    p.add_argument("--N", type=int, nargs="+", default=[10])
    p.add_argument("--kind", choices=("micro", "macro", "product"), default="macro")
    p = leaf(ex, "cnot", cmd_examples, "CNOT measurement transfer")
    p.add_argument("--alpha", type=float, nargs=2, default=[0.6, 0.8])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None and os.environ.get("QM_THREADS"):
        args.threads = int(os.environ["QM_THREADS"])
    try:
        if args.tol:
            set_tolerances(**dict(args.tol))
        if getattr(args, "trial_csv", False) and args.out is None:
            raise CliError("--trial-csv requires --out")
        return args.func(args)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        sys.stderr.write(f"qmeasure: error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
