"""Command-line driver writing coverage curves as CSV.

Every CSV starts with ``#`` lines recording the tool version and the exact
command that reproduces it. Exit codes: 0 success, 1 invalid configuration,
2 analytic/Monte Carlo disagreement (``compare``), 3 divergent regime.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import shlex
import sys

import numpy as np

from . import __version__
from .analytic import AnalyticSolver, db_to_linear
from .beams import DEFAULT_MAX_K, BeamConfig, JointLTEvaluator, shared_depth
from .montecarlo import estimate_conditional, simulate_beam_coverage
from .params import (VARIANTS, DivergentRegimeError, InvalidParameters,
                     IterationBudgetExhausted, ModelParams)

OUTPUT_DIR_ENV = "CASCADE_BLOCKAGE_OUTPUT_DIR"
Z_LIMIT = 4.0

EXIT_OK, EXIT_INVALID, EXIT_DISAGREE, EXIT_DIVERGENT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for oracle disagreement
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> np.ndarray:
    """``min:max:step`` (inclusive) or a comma list of dB values."""
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return lo + step * np.arange(count)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise InvalidParameters(f"bad theta grid {text!r}; expected min:max:step") from None


def parse_stages(text: str):
    if text.lower() in ("inf", "infinite"):
        return None
    try:
        return int(text)
    except ValueError:
        raise InvalidParameters(f"stages must be an integer or 'inf', got {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise InvalidParameters(f"bad integer list {text!r}") from None


def _fmt(x) -> str:
    return repr(float(x)) if not isinstance(x, (int, np.integer)) else str(int(x))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cascade-blockage",
                     description="Cascade blockage model: coverage curves as CSV.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_flags(p):
        p.add_argument("--model", default="basic",
                       type=lambda s: s.replace("-", "_"), choices=VARIANTS)
        p.add_argument("--lambda", dest="lam", type=float, default=0.1)
        p.add_argument("--R", dest="R", type=float, default=1.0)
        p.add_argument("--p", type=float, default=0.5)
        p.add_argument("--K", dest="K", type=float, default=0.1)
        p.add_argument("--stages", default="5", help="integer N or 'inf'")
        p.add_argument("--radius-mode", default="geometric",
                       choices=("geometric", "paper_floor"))
        p.add_argument("--tolerance", type=float, default=1e-9)
        p.add_argument("--max-iterations", type=int, default=200)
        p.add_argument("--output", "-o", default=None)

    def mc_flags(p):
        p.add_argument("--what", default="coverage",
                       choices=("coverage", "best-beam", "beam-switch"))
        p.add_argument("--n-samples", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--truncate-stages", type=int, default=None)

    def beam_flags(p, k_default):
        p.add_argument("--k", default=k_default)
        p.add_argument("--max-k", type=int, default=DEFAULT_MAX_K)

    cov = sub.add_parser("coverage", help="omnidirectional coverage curve")
    model_flags(cov)
    cov.add_argument("--theta-db", default="-10:30:1")
    cov.add_argument("--gain", type=float, default=1.0)

    best = sub.add_parser("best-beam", help="best vs random beam coverage")
    model_flags(best)
    best.add_argument("--theta-db", default="-10:30:1")
    beam_flags(best, "0:4")

    switch = sub.add_parser("beam-switch", help="conditional coverage after a beam switch")
    model_flags(switch)
    switch.add_argument("--theta-db", default="0")
    beam_flags(switch, "4")

    for name, text in (("simulate", "Monte Carlo estimates"),
                       ("compare", "analytic vs Monte Carlo with z-scores")):
        p = sub.add_parser(name, help=text)
        model_flags(p)
        mc_flags(p)
        p.add_argument("--theta-db", default=None)
        p.add_argument("--gain", type=float, default=1.0)
        beam_flags(p, None)
    return parser


# -- configuration ----------------------------------------------------------

def _params(args) -> ModelParams:
    params = ModelParams(lam=args.lam, base_radius=args.R, p=args.p, K=args.K,
                         stages=parse_stages(args.stages), variant=args.model,
                         radius_mode=args.radius_mode)
    params.check_convergent()
    return params


def _what(args) -> str:
    return getattr(args, "what", None) or args.command


def _defaults(args):
    what = _what(args)
    if args.theta_db is None:
        args.theta_db = "0" if what == "beam-switch" else "-10:30:1"
    if args.k is None:
        args.k = {"coverage": "0", "best-beam": "0:4", "beam-switch": "4"}[what]


def _command_line(args) -> str:
    """Canonical argument list reproducing this run (output path excluded)."""
    parts = [args.command, "--model", args.model, "--lambda", _fmt(args.lam),
             "--R", _fmt(args.R), "--p", _fmt(args.p), "--K", _fmt(args.K),
             "--stages", str(args.stages), "--radius-mode", args.radius_mode,
             "--tolerance", _fmt(args.tolerance),
             "--max-iterations", str(args.max_iterations),
             f"--theta-db={args.theta_db}"]
    if hasattr(args, "gain"):
        parts += ["--gain", _fmt(args.gain)]
    if hasattr(args, "k"):
        parts += ["--k", str(args.k), "--max-k", str(args.max_k)]
    if hasattr(args, "what"):
        parts += ["--what", args.what, "--n-samples", str(args.n_samples),
                  "--seed", str(args.seed)]
        if args.truncate_stages is not None:
            parts += ["--truncate-stages", str(args.truncate_stages)]
    return " ".join(shlex.quote(p) for p in parts)


def _write_csv(args, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# cascade-blockage {__version__}\n")
    buf.write(f"# command: {_command_line(args)}\n")
    for key in ("model", "lam", "R", "p", "K", "stages", "radius_mode"):
        buf.write(f"# {key}: {getattr(args, key)}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    text = buf.getvalue()
    path = args.output
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        path = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{_what(args)}.csv")
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# -- analytic tables --------------------------------------------------------

def _coverage_table(args, params):
    theta_db = parse_grid(args.theta_db)
    solver = AnalyticSolver(params, args.tolerance, args.max_iterations)
    values = solver.coverage(db_to_linear(theta_db), args.gain)
    return theta_db, np.asarray(values)


def _beam_table(args, params):
    theta_db = parse_grid(args.theta_db)
    solver = AnalyticSolver(params, args.tolerance, args.max_iterations)
    rows = []
    for k in parse_int_list(args.k):
        ev = JointLTEvaluator(params, BeamConfig(k), solver)
        for t_db, t in zip(theta_db, db_to_linear(theta_db)):
            rows.append((t_db, k, ev.best_beam_coverage(t, args.max_k),
                         ev.random_beam_coverage(t)))
    return rows


def _switch_params(args):
    ks = parse_int_list(args.k)
    thetas = parse_grid(args.theta_db)
    if len(ks) != 1 or len(thetas) != 1:
        raise InvalidParameters("beam-switch takes a single --k and a single --theta-db")
    if ks[0] < 1:
        raise InvalidParameters("beam-switch needs k >= 1")
    return BeamConfig(ks[0]), float(db_to_linear(thetas[0]))


def _switch_table(args, params):
    beams, theta = _switch_params(args)
    solver = AnalyticSolver(params, args.tolerance, args.max_iterations)
    ev = JointLTEvaluator(params, beams, solver)
    return [(l, shared_depth(1, l, beams.k), ev.conditional_switch_coverage(theta, l),
             ev.conditional_given_outage(theta, l)) for l in range(2, beams.n_beams + 1)]


# -- commands ---------------------------------------------------------------

def cmd_coverage(args):
    theta_db, values = _coverage_table(args, _params(args))
    _write_csv(args, ["theta_db", "p_cov"], zip(theta_db, values))
    return EXIT_OK


def cmd_best_beam(args):
    _write_csv(args, ["theta_db", "k", "p_best", "p_random"], _beam_table(args, _params(args)))
    return EXIT_OK


def cmd_beam_switch(args):
    _write_csv(args, ["l", "shared_depth", "p_conditional", "p_conditional_given_outage"],
               _switch_table(args, _params(args)))
    return EXIT_OK


def _simulate(args, params):
    """Monte Carlo columns for ``args.what``: (key columns, estimate columns, rows)."""
    n, seed, workers, trunc = args.n_samples, args.seed, args.workers, args.truncate_stages
    what = args.what
    if what == "coverage":
        theta_db = parse_grid(args.theta_db)
        beams = BeamConfig(0, args.gain)
        curve = simulate_beam_coverage(params, beams, theta_db, n, seed, workers,
                                       trunc)["random_beam"]
        return [[(t, v, e)] for t, v, e in zip(theta_db, curve.values, curve.std_error)]
    if what == "best-beam":
        theta_db = parse_grid(args.theta_db)
        out = []
        for k in parse_int_list(args.k):
            if k > args.max_k:
                raise InvalidParameters(f"k={k} exceeds --max-k={args.max_k}")
            curves = simulate_beam_coverage(params, BeamConfig(k), theta_db, n, seed,
                                            workers, trunc)
            b, r = curves["best_beam"], curves["random_beam"]
            for j, t in enumerate(theta_db):
                out.append([(t, k), (b.values[j], b.std_error[j]), (r.values[j], r.std_error[j])])
        return out
    beams, theta = _switch_params(args)
    out = []
    for l in range(2, beams.n_beams + 1):
        cov = estimate_conditional(params, beams, theta, l, n, seed, workers=workers,
                                   truncate_stages=trunc)
        out_ = estimate_conditional(params, beams, theta, l, n, seed, given="outage",
                                    workers=workers, truncate_stages=trunc)
        out.append([(l, shared_depth(1, l, beams.k)), (cov.mean, cov.std_error),
                    (out_.mean, out_.std_error)])
    return out


def cmd_simulate(args):
    params = _params(args)
    _defaults(args)
    mc = _simulate(args, params)
    n, seed = args.n_samples, args.seed
    if args.what == "coverage":
        cols = ["theta_db", "p_cov", "std_error", "n_samples", "seed"]
        rows = [(t, v, e, n, seed) for [(t, v, e)] in mc]
    elif args.what == "best-beam":
        cols = ["theta_db", "k", "p_best", "p_random", "std_error_best",
                "std_error_random", "n_samples", "seed"]
        rows = [(t, k, b, r, eb, er, n, seed) for (t, k), (b, eb), (r, er) in mc]
    else:
        cols = ["l", "shared_depth", "p_conditional", "p_conditional_given_outage",
                "std_error", "std_error_given_outage", "n_samples", "seed"]
        rows = [(l, d, c, o, ec, eo, n, seed) for (l, d), (c, ec), (o, eo) in mc]
    _write_csv(args, cols, rows)
    return EXIT_OK


def _z(mc: float, analytic: float, se: float, n: int) -> float:
    # an all-or-nothing sample has zero spread; floor it at one count
    return (mc - analytic) / max(se, 1.0 / n)


def cmd_compare(args):
    params = _params(args)
    _defaults(args)
    mc = _simulate(args, params)
    n, seed = args.n_samples, args.seed
    zs = []
    if args.what == "coverage":
        theta_db, analytic = _coverage_table(args, params)
        cols = ["theta_db", "p_cov", "p_cov_mc", "std_error", "n_samples", "seed", "z_score"]
        rows = []
        for a, [(t, v, e)] in zip(analytic, mc):
            z = _z(v, a, e, n)
            zs.append(z)
            rows.append((t, a, v, e, n, seed, z))
    elif args.what == "best-beam":
        table = _beam_table(args, params)
        cols = ["theta_db", "k", "p_best", "p_random", "p_best_mc", "p_random_mc",
                "std_error_best", "std_error_random", "n_samples", "seed",
                "z_score_best", "z_score_random"]
        rows = []
        for (t, k, ab, ar), (_, (b, eb), (r, er)) in zip(table, mc):
            zb, zr = _z(b, ab, eb, n), _z(r, ar, er, n)
            zs += [zb, zr]
            rows.append((t, k, ab, ar, b, r, eb, er, n, seed, zb, zr))
    else:
        table = _switch_table(args, params)
        cols = ["l", "shared_depth", "p_conditional", "p_conditional_given_outage",
                "p_conditional_mc", "p_conditional_given_outage_mc", "std_error",
                "std_error_given_outage", "n_samples", "seed", "z_score",
                "z_score_given_outage"]
        rows = []
        for (l, d, ac, ao), (_, (c, ec), (o, eo)) in zip(table, mc):
            zc, zo = _z(c, ac, ec, n), _z(o, ao, eo, n)
            zs += [zc, zo]
            rows.append((l, d, ac, ao, c, o, ec, eo, n, seed, zc, zo))
    _write_csv(args, cols, rows)
    worst = max((abs(z) for z in zs), default=0.0)
    if not worst <= Z_LIMIT:
        print(f"oracle disagreement: max |z| = {worst:.3g} > {Z_LIMIT}", file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


COMMANDS = {"coverage": cmd_coverage, "best-beam": cmd_best_beam,
            "beam-switch": cmd_beam_switch, "simulate": cmd_simulate,
            "compare": cmd_compare}


def _merge_negative_values(argv):
    # let "--theta-db -10:30:1" through; argparse reads "-10:30:1" as a flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--theta-db", "--k"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_merge_negative_values(argv))
    try:
        return COMMANDS[args.command](args)
    except (DivergentRegimeError, IterationBudgetExhausted) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except InvalidParameters as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def run():
    sys.exit(main())
