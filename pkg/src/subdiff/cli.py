"""Command line entry point: subdiff {ml,profile,solve,oracle-l1,verify,rates}.

Exit codes: 0 success or pass, 1 verification fail, 2 usage or config
error, 3 numerical-tolerance failure.  Every run that writes files also
writes a JSON manifest next to them.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, load_config, serialize_config
from .kernels import BACKEND

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_TOL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_usage("%s: error: %s" % (self.prog, message)))


def _usage(msg):
    print(msg, file=sys.stderr)
    return EXIT_USAGE


# ---------------------------------------------------------------- output helpers

def _atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def table_checksums():
    """sha256 of the CSV serialization of every profile table built in this process."""
    from .profile import write_table
    from .solver import _TABLES

    out = {}
    for (dim, alpha), table in sorted(_TABLES.items()):
        text = write_table(table, io.StringIO())
        out["dim=%d,alpha=%r" % (dim, alpha)] = hashlib.sha256(text.encode()).hexdigest()
    return out


def write_manifest(path, argv, config_text, outputs):
    info = {
        "argv": list(argv),
        "config": config_text,
        "version": __version__,
        "backend": BACKEND,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
        "threads": os.environ.get("SUBDIFF_THREADS", "1"),
        "tables": table_checksums(),
        "outputs": {os.path.basename(p): _sha256_file(p) for p in outputs if os.path.exists(p)},
    }
    _atomic_write(path, json.dumps(info, indent=2, sort_keys=True) + "\n")
    return info


def _args_text(args):
    skip = {"func", "command"}
    return "\n".join("%s = %s" % (k, v) for k, v in sorted(vars(args).items()) if k not in skip) + "\n"


def _config_or_args(args):
    if getattr(args, "config", None):
        return load_config(args.config)
    return None


# ---------------------------------------------------------------- subcommands

def cmd_ml(args):
    from .special import ml_neg

    v = float(ml_neg(args.alpha, args.x))
    print(repr(v))
    if args.out:
        _atomic_write(args.out, _csv_text(["alpha", "x", "E"], [(args.alpha, args.x, v)]))
        write_manifest(args.out + ".manifest.json", sys.argv, _args_text(args), [args.out])
    return EXIT_OK


def _profile_options(cfg: RunConfig | None):
    from .profile import ProfileOptions

    if cfg is None:
        return ProfileOptions()
    d = ProfileOptions()
    return ProfileOptions(mass_tol=cfg.tolerance("mass_tol", d.mass_tol),
                          cross_rtol=cfg.tolerance("cross_rtol", d.cross_rtol),
                          moment_rtol=cfg.tolerance("moment_rtol", d.moment_rtol))


def cmd_profile(args):
    from .profile import build_profile, write_table
    from .solver import _TABLES

    cfg = _config_or_args(args)
    dim = args.dim if args.dim is not None else (cfg.dim if cfg else None)
    alpha = args.alpha if args.alpha is not None else (cfg.alpha if cfg else None)
    if dim is None or alpha is None:
        return _usage("profile: --dim and --alpha (or --config) are required")
    table = build_profile(dim, alpha, _profile_options(cfg))
    _TABLES.setdefault((dim, float(alpha)), table)
    _atomic_write(args.out, write_table(table, io.StringIO()))
    write_manifest(args.out + ".manifest.json", sys.argv,
                   serialize_config(cfg) if cfg else _args_text(args), [args.out])
    print("kappa=%r kappa_hat=%r sigma_hat=%r" % (table.kappa, table.kappa_hat, table.sigma_hat))
    return EXIT_OK


def cmd_solve(args):
    from .data import parse_datum
    from .solver import solve

    datum = parse_datum(args.datum, args.dim)
    radii = None
    if args.rmax is not None:
        radii = np.linspace(0.0, args.rmax, args.points)
    snap = solve(datum, args.alpha, args.t, radii=radii, method=args.method)
    _atomic_write(args.out, _csv_text(["r", "u"], zip(snap.radii, snap.values)))
    write_manifest(args.out + ".manifest.json", sys.argv, _args_text(args), [args.out])
    print("method=%s points=%d mass=%r" % (snap.method, snap.radii.size, snap.mass()))
    return EXIT_OK


def cmd_oracle_l1(args):
    from .data import parse_datum
    from .l1 import L1Grid, solve_l1
    from .solver import mild_solution

    datum = parse_datum(args.datum, args.dim)
    grid = L1Grid(args.dim, args.alpha, args.rtrunc, args.space, args.t, args.steps, args.grading)
    snap = solve_l1(datum, grid)[-1]
    mild = mild_solution(datum, args.alpha, args.t, snap.radii)
    rel = float(np.max(np.abs(snap.values - mild)) / np.max(np.abs(mild)))
    rows = zip(snap.radii, snap.values, mild)
    out = args.out or "oracle_l1.csv"
    _atomic_write(out, _csv_text(["r", "u_l1", "u_mild"], rows))
    write_manifest(out + ".manifest.json", sys.argv, _args_text(args), [out])
    print("max relative difference %.3e" % rel)
    if args.rtol is not None and rel > args.rtol:
        return EXIT_TOL
    return EXIT_OK


def experiment_from_config(cfg: RunConfig, exp_id="config"):
    """One Experiment described entirely by a RunConfig."""
    from .data import parse_datum
    from .scales import UnsupportedRate, parse_norm, parse_scale, theoretical_rate, RateLaw
    from .verify import Comparand, Experiment

    scale, norm = parse_scale(cfg.scale), parse_norm(cfg.norm)
    try:
        law = theoretical_rate(cfg.dim, norm, scale, cfg.alpha)
    except UnsupportedRate:
        law = None
    common = dict(method=cfg.method)
    datum = parse_datum(cfg.datum, cfg.dim)
    if cfg.comparand == "MZ":
        inv = None if law is None else RateLaw(-law.power, -law.log_power, -law.scale_power, law.log_of)
        return Experiment(exp_id, cfg.dim, cfg.alpha, datum, scale, norm, cfg.times(), Comparand("MZ"),
                          inv, rule="to_zero", **common)
    rule = "rate" if law is not None else "report"
    return Experiment(exp_id, cfg.dim, cfg.alpha, datum, scale, norm, cfg.times(), Comparand("none"),
                      rule=rule, threshold=cfg.tolerance("rate_tol", 0.02), **common)


def cmd_verify(args):
    from .verify import THEOREMS, verify, write_report

    cfg = _config_or_args(args)
    alpha = args.alpha if args.alpha is not None else (cfg.alpha if cfg else 0.5)
    if args.suite == "all":
        ids = list(THEOREMS)
    elif args.id:
        ids = [args.id]
    elif cfg is not None and cfg.theorem:
        ids = [cfg.theorem]
    else:
        return _usage("verify: give --suite all or --id Vk")
    for i in ids:
        if i not in THEOREMS:
            return _usage("verify: unknown id %r" % i)
    verdicts = []
    for i in ids:
        exps = None
        if cfg is not None and args.suite != "all":
            exps = [experiment_from_config(cfg, i + "-config")]
        v = verify(i, alpha, experiments=exps)
        print(v.summary(), flush=True)
        verdicts.append(v)
    write_report(verdicts, args.out)
    outs = [os.path.join(args.out, "summary.csv")] + [
        os.path.join(args.out, "%s.csv" % s.experiment) for v in verdicts for s in v.series]
    write_manifest(os.path.join(args.out, "manifest.json"), sys.argv,
                   serialize_config(cfg) if cfg else _args_text(args), outs)
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_FAIL


def cmd_rates(args):
    from .config import parse_config
    from .verify import judge, run_experiment

    cfg = _config_or_args(args)
    if cfg is None:
        if args.dim is None or args.alpha is None:
            return _usage("rates: --config or --dim/--alpha are required")
        text = "[problem]\ndim = %d\nalpha = %r\n[datum]\nspec = %s\n[scale]\nscale = %s\n[norm]\nnorm = %s\n" \
               "[run]\ndecades = %s\n" % (args.dim, args.alpha, args.datum, args.scale, args.norm, args.decades)
        cfg = parse_config(text)
    e = experiment_from_config(cfg, "rates")
    s = run_experiment(e)
    ok, fit, thr = judge(e, s)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "rates.csv")
    _atomic_write(path, _csv_text(["t", "measured", "theoretical"], zip(s.t, s.measured, s.theoretical)))
    write_manifest(os.path.join(args.out, "manifest.json"), sys.argv, serialize_config(cfg), [path])
    print("fitted %s (%s): %s" % (fit.law() if fit else "-", thr, "PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser():
    p = _Parser(prog="subdiff", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("ml", help="Mittag-Leffler E_alpha(-x)")
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--x", type=float, required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_ml)

    q = sub.add_parser("profile", help="tabulate the self-similar profile F")
    q.add_argument("--dim", type=int)
    q.add_argument("--alpha", type=float)
    q.add_argument("--config")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_profile)

    q = sub.add_parser("solve", help="mild solution snapshot u(r, t)")
    q.add_argument("--dim", type=int, required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--datum", required=True)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--method", default="auto", choices=("auto", "spectral", "convolution"))
    q.add_argument("--rmax", type=float)
    q.add_argument("--points", type=int, default=201)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("oracle-l1", help="L1 time stepping cross-check")
    q.add_argument("--dim", type=int, required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--datum", required=True)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--steps", type=int, required=True)
    q.add_argument("--rtrunc", type=float, required=True)
    q.add_argument("--space", type=int, default=400)
    q.add_argument("--grading", type=float, default=1.0)
    q.add_argument("--rtol", type=float)
    q.add_argument("--out")
    q.set_defaults(func=cmd_oracle_l1)

    q = sub.add_parser("verify", help="run verdicts V1..V12")
    g = q.add_mutually_exclusive_group()
    g.add_argument("--suite", choices=("all",))
    g.add_argument("--id")
    q.add_argument("--alpha", type=float)
    q.add_argument("--config")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("rates", help="fit the decay law of one norm on one scale")
    q.add_argument("--config")
    q.add_argument("--dim", type=int)
    q.add_argument("--alpha", type=float)
    q.add_argument("--datum", default="gaussian")
    q.add_argument("--scale", default="characteristic(1,2)")
    q.add_argument("--norm", default="p=inf")
    q.add_argument("--decades", default="2,6")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_rates)
    return p


def main(argv=None):
    from .l1 import ResourceError
    from .profile import ToleranceError
    from .special import QuadratureError
    from .verify import HypothesisError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        return _usage("config error:\n%s" % exc)
    except (ToleranceError, QuadratureError) as exc:
        print("tolerance failure: %s" % exc, file=sys.stderr)
        return EXIT_TOL
    except (HypothesisError, ResourceError, ValueError, OSError) as exc:
        return _usage("error: %s" % exc)


if __name__ == "__main__":
    sys.exit(main())
