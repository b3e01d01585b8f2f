"""``rdepriv`` command line.

Commands: fit, tradeoff, sanitize, gaussian, simulate, solve. Every output
file is written atomically (temp file + rename) and floats are printed with
12 significant digits. Exit codes: 0 ok, 1 solver did not converge, 2 usage,
3 distortion outside the admissible range, 4 bad input data, 5 size cap
exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CapExceededError, ConvergenceError, DataError, DomainError, ValidationError

EXIT_OK = 0
EXIT_CONVERGENCE = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_DATA = 4
EXIT_CAP = 5
DIGITS = 12

log = logging.getLogger("rdeprivacy")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers


def atomic_write(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _round(obj):
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if not np.isfinite(v) else float(f"{v:.{DIGITS}g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    return obj


def dump_json(obj, path=None) -> str:
    text = json.dumps(_round(obj), indent=2) + "\n"
    if path is not None:
        atomic_write(path, text)
    return text


def _fmt(v):
    return f"{v:.{DIGITS}g}"


def _floats(text, what="grid"):
    try:
        vals = [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--{what} must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"--{what} is empty")
    return vals


def _names(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else None


def _check_inputs(*paths):
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise DataError(f"input file not found: {p}")


def _plot(kind, obj, path, **kw):
    if not path:
        return
    from . import plotting

    fn = plotting.tradeoff_figure if kind == "tradeoff" else plotting.simulation_figure
    fn(obj, path, **kw)
    print(f"figure: {path}")


# ---------------------------------------------------------------------------
# commands


def cmd_fit(args):
    from .sanitizer import Database, fit_empirical_pmf

    _check_inputs(args.input)
    db = Database.from_csv(args.input)
    joint = fit_empirical_pmf(
        db, _names(args.attrs), public=_names(args.public), private=_names(args.private), alpha=args.alpha
    )
    dump_json(joint.to_dict(), args.out)
    print(f"rows: {db.n}")
    print(f"attributes: {', '.join(joint.names)}  shape: {'x'.join(map(str, joint.shape))}")
    print(f"joint pmf: {args.out}")
    return EXIT_OK


def _load_pmf(path, normalize):
    from .infotheory import JointPmf, Pmf, load_distribution

    _check_inputs(path)
    if normalize:
        d = json.loads(Path(path).read_text())
        if isinstance(d, dict) and "probs" in d:
            return Pmf.from_weights(d["probs"], d.get("labels"))
        if isinstance(d, dict) and "table" in d:
            t = np.asarray(d["table"], dtype=float)
            d = dict(d, table=(t / t.sum()).tolist())
            return JointPmf.from_dict(d)
    return load_distribution(path)


def cmd_tradeoff(args):
    from .categorical import max_distortion, reverse_waterfill, up_curve
    from .curves import TradeoffCurve, TradeoffPoint
    from .infotheory import JointPmf, Pmf, channel_to_csv
    from .rde_solver import RdeProblem, solve_max_equivocation

    dist = _load_pmf(args.pmf, args.normalize)
    grid = _floats(args.grid) if args.grid else [args.D]
    if args.D is not None and args.grid:
        raise UsageError("give either --D or --grid, not both")
    if grid == [None]:
        raise UsageError("one of --D or --grid is required")
    if args.channel_out and len(grid) != 1:
        raise UsageError("--channel-out needs a single distortion (--D)")

    closed = isinstance(dist, Pmf) or (
        isinstance(dist, JointPmf) and set(dist.public) == set(dist.private) and args.method != "solver"
    )
    if args.method == "closed" and not closed:
        raise UsageError("closed form needs identical public and private attributes")
    if isinstance(dist, JointPmf) and closed:
        dist = dist.flat_pmf()

    if closed and args.method != "solver":
        dmax = max_distortion(dist)
        bad = [d for d in grid if d > dmax + 1e-12 or d < 0]
        if bad:
            raise DomainError(f"distortion {bad[0]} outside [0, {_fmt(dmax)}]; D_max = {_fmt(dmax)}", bad[0])
        curve = up_curve(dist, grid)
        channel = reverse_waterfill(dist, grid[0]).forward_channel if args.channel_out else None
        print(f"D_max: {_fmt(dmax)}")
    else:
        joint = dist if isinstance(dist, JointPmf) else JointPmf(dist.probs, labels=(dist.labels,))
        base = RdeProblem(joint, grid[0], markov_restricted=not args.non_markov)
        bad = [d for d in grid if d > base.D_max + 1e-12 or d < base.D_min - 1e-12]
        if bad:
            raise DomainError(
                f"distortion {bad[0]} outside [{_fmt(base.D_min)}, {_fmt(base.D_max)}]; "
                f"D_max = {_fmt(base.D_max)}",
                bad[0],
            )
        pts, channel = [], None
        for d in grid:
            sol = solve_max_equivocation(base.with_target(d))
            pts.append(TradeoffPoint(D=sol.achieved_D, R=sol.rate, E=sol.equivocation))
            channel = sol.channel
        curve = TradeoffCurve(pts, ("D", "R", "E"))
        print(f"D_max: {_fmt(base.D_max)}")
    atomic_write(args.out, curve.to_csv(digits=DIGITS))
    if args.channel_out:
        atomic_write(args.channel_out, channel_to_csv(channel, digits=DIGITS))
        print(f"channel: {args.channel_out}")
    for p in curve:
        print(f"D={_fmt(p.D)}  R={_fmt(p.R)}  E={_fmt(p.E)}")
    print(f"curve: {args.out}")
    _plot("tradeoff", curve, args.plot, title="rate and equivocation vs distortion")
    return EXIT_OK


def cmd_sanitize(args):
    from .infotheory import channel_from_csv
    from .sanitizer import Database, evaluate, sanitize_rows

    _check_inputs(args.input, args.channel)
    db = Database.from_csv(args.input)
    channel = channel_from_csv(args.channel)
    public = _names(args.public)
    sdb = sanitize_rows(
        db,
        channel,
        seed=args.seed,
        public=public,
        drop=_names(args.drop) or (),
        unseen=args.unseen,
        workers=args.threads,
    )
    atomic_write(args.out, sdb.to_csv())
    print(f"rows: {sdb.n}")
    print(f"sanitized: {args.out}")
    if args.report:
        pub = public or [a for a in sdb.attributes]
        rep = evaluate(db, sdb, channel, public=pub, private=_names(args.private), target_D=args.D, seed=args.seed)
        dump_json(rep.to_dict(), args.report)
        print(f"empirical D: {_fmt(rep.empirical_D)}")
        print(f"equivocation (design / plug-in): {_fmt(rep.analytic_equivocation)} / {_fmt(rep.plugin_equivocation)}")
        print(f"report: {args.report}")
    return EXIT_OK


def cmd_gaussian(args):
    from .gaussian import GaussianModel, curve, default_grid

    model = GaussianModel.from_squared(args.varx, args.vary, args.rhoxy2, args.rhoxz2)
    grid = _floats(args.grid) if args.grid else default_grid(model, args.case, args.points)
    c = curve(model, args.case, grid)
    atomic_write(args.out, c.to_csv(digits=DIGITS))
    print(f"points: {len(c)}  case: {c[0].case}")
    print(f"curve: {args.out}")
    _plot("tradeoff", c, args.plot, title=f"Gaussian, {c[0].case}")
    return EXIT_OK


def cmd_simulate(args):
    from .qnb_sim import binary_demo_config, load_config, run_sweep, write_summary

    if bool(args.config) == bool(args.demo):
        raise UsageError("give exactly one of --config or --demo")
    if args.config:
        _check_inputs(args.config)
        base, ns = load_config(args.config)
    else:
        base, ns = binary_demo_config(8, informed=args.informed), [8, 12, 16]
    if args.n:
        ns = [int(v) for v in _floats(args.n, "n")]
    over = {}
    if args.trials is not None:
        over["trials"] = args.trials
    if args.seed is not None:
        over["seed"] = args.seed
    if over:
        from dataclasses import replace

        base = replace(base, **over)
    rows = run_sweep(base, ns, workers=args.threads)
    atomic_write(args.out, dump_json(json.loads(write_summary(rows))))
    for r in rows:
        pe = "n/a" if r.plugin_equiv is None else _fmt(r.plugin_equiv)
        print(
            f"n={r.n}  M={r.M}  bins={r.bins}  err={_fmt(r.err_rate)}  "
            f"D={_fmt(r.mean_distortion)}  equiv={pe}  bound={_fmt(r.analytic_equiv)}"
        )
    print(f"summary: {args.out}")
    _plot("simulate", rows, args.plot)
    return EXIT_OK


def cmd_solve(args):
    from .infotheory import JointPmf, Pmf, channel_to_csv
    from .rde_solver import RdeProblem, solve

    if bool(args.problem) == bool(args.pmf):
        raise UsageError("give exactly one of --problem or --pmf")
    if args.problem:
        _check_inputs(args.problem)
        problem = RdeProblem.from_json(args.problem)
        if args.D is not None:
            problem = problem.with_target(args.D)
    else:
        if args.D is None:
            raise UsageError("--pmf needs --D")
        dist = _load_pmf(args.pmf, args.normalize)
        joint = dist if isinstance(dist, JointPmf) else JointPmf(dist.probs, labels=(dist.labels,))
        problem = RdeProblem(joint, args.D, markov_restricted=not args.non_markov)
    sol = solve(problem, args.objective)
    out = sol.to_dict()
    out["D_min"], out["D_max"] = problem.D_min, problem.D_max
    dump_json(out, args.out)
    if args.channel_out:
        atomic_write(args.channel_out, channel_to_csv(sol.channel, digits=DIGITS))
    print(f"objective: {sol.objective_tag}  D={_fmt(sol.achieved_D)}")
    print(f"R={_fmt(sol.rate)}  E={_fmt(sol.equivocation)}  L={_fmt(sol.leakage)}  gap={sol.final_gap:.3g}")
    print(f"solution: {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rdepriv", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit", help="fit an empirical joint pmf from a CSV database")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--attrs", help="comma-separated attributes (default: all columns)")
    s.add_argument("--public")
    s.add_argument("--private")
    s.add_argument("--alpha", type=float, default=0.0, help="additive smoothing pseudo-count")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("tradeoff", help="rate / equivocation over a distortion grid")
    s.add_argument("--pmf", required=True)
    s.add_argument("--normalize", action="store_true", help="rescale weights that do not sum to 1")
    s.add_argument("--grid")
    s.add_argument("--D", type=float)
    s.add_argument("--method", choices=("auto", "closed", "solver"), default="auto")
    s.add_argument("--non-markov", action="store_true", help="let the channel see private attributes")
    s.add_argument("--out", required=True)
    s.add_argument("--channel-out")
    s.add_argument("--plot", help="also write a PNG figure here")
    s.set_defaults(func=cmd_tradeoff)

    s = sub.add_parser("sanitize", help="apply a channel to every row of a CSV database")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--channel", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--public", help="columns the channel acts on (default: all)")
    s.add_argument("--private", help="private columns for the report (default: public)")
    s.add_argument("--drop", help="columns to leave out of the output")
    s.add_argument("--unseen", choices=("reject", "suppress"), default="reject")
    s.add_argument("--threads", type=int)
    s.add_argument("--D", type=float, help="target distortion recorded in the report")
    s.add_argument("--report")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sanitize)

    s = sub.add_parser("gaussian", help="closed-form Gaussian rate / leakage curves")
    s.add_argument("--varx", type=float, required=True)
    s.add_argument("--vary", type=float, default=1.0)
    s.add_argument("--rhoxy2", type=float, default=0.0)
    s.add_argument("--rhoxz2", type=float)
    s.add_argument("--case", default="uninformed",
                   choices=("u", "uninformed", "si", "wz", "statistically_informed", "informed"))
    s.add_argument("--grid")
    s.add_argument("--points", type=int, default=50)
    s.add_argument("--out", required=True)
    s.add_argument("--plot")
    s.set_defaults(func=cmd_gaussian)

    s = sub.add_parser("simulate", help="quantize-and-bin coding simulation")
    s.add_argument("--config")
    s.add_argument("--demo", action="store_true", help="binary source with 0.1-flip side information")
    s.add_argument("--informed", action="store_true", help="demo only: encoder also sees z")
    s.add_argument("--n", help="comma-separated blocklengths")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--plot")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("solve", help="numerical privacy-utility optimum")
    s.add_argument("--problem")
    s.add_argument("--pmf")
    s.add_argument("--normalize", action="store_true")
    s.add_argument("--D", type=float)
    s.add_argument("--objective", choices=("max_equivocation", "min_rate"), default="max_equivocation")
    s.add_argument("--non-markov", action="store_true")
    s.add_argument("--out", required=True)
    s.add_argument("--channel-out")
    s.set_defaults(func=cmd_solve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ConvergenceError as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DataError, ValidationError, OSError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
