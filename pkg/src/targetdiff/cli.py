"""Command-line entry point: ``targetdiff <command> [options]``.

Exit status is 0 on success, 1 for bad configuration or input files, and 2
when a numerical routine fails.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .certify import certify_budget, impact_estimator
from .config import Config
from .diffusion import SISParams, simulate_sis
from .discretize import normalize_weights
from .errors import (ConfigError, DegeneratePartitionError, GraphFormatError, NumericalError,
                     TargetDiffError)
from .experiment import Instance, Plan, is_feasible, perturbation_norm, run_experiment, run_method
from .generators import barabasi_albert, percentile_target, watts_strogatz
from .graph import Graph, TargetSet, load_edge_list, load_target_set
from .objective import ObjectiveWeights
from .optimizer import budget_from_gamma
from .structural import bound_suite

log = logging.getLogger("targetdiff")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _graph(args) -> Graph:
    return load_edge_list(_read(args.graph), weighted=args.weighted)


def _target(args, g: Graph) -> TargetSet:
    if args.target:
        return load_target_set(_read(args.target), g.n)
    return percentile_target(g, args.percentile)


def _emit(args, name: str, header: list[str], rows: list[list]) -> None:
    """Write a CSV table to ``--out/name`` when given, else to stdout."""
    def fmt(x):
        if isinstance(x, (bool, np.bool_)):
            return "true" if x else "false"
        if isinstance(x, (float, np.floating)):
            return repr(float(x))
        return "" if x is None else str(x)

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        fh = open(out / name, "w", newline="")
    else:
        fh = sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[fmt(x) for x in row] for row in rows])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _save_graph(args, g: Graph, name: str) -> None:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(g.to_edge_list())
    log.info("wrote %s", out / name)


def _plan_from_args(args) -> Plan:
    return Plan(weighted=args.weighted, integer_weights=args.integer_weights,
                weights=ObjectiveWeights(*args.weights), max_steps=args.steps,
                eta=args.eta, schedule=args.schedule, seed=args.seed or 0)


def _prepare_attack(args):
    g = _graph(args)
    s = _target(args, g)
    s.require_proper()
    working, scale = normalize_weights(g) if g.weighted else (g, 1.0)
    plan = _plan_from_args(args)
    if args.epsilon is not None:
        epsilon = args.epsilon / scale
    else:
        epsilon = budget_from_gamma(working, args.gamma, seed=plan.seed)
    inst = Instance(0, g, working, scale, s, 0.0)
    return plan, inst, epsilon


def cmd_attack(args, method: str | None = None) -> int:
    plan, inst, epsilon = _prepare_attack(args)
    method = method or "potion"
    g_mod, result = run_method(plan, inst, method, epsilon, plan.seed)
    _save_graph(args, g_mod, f"{method}.edges")
    work_mod = g_mod.dense / inst.scale
    row = [method, epsilon * inst.scale, perturbation_norm(inst.working.dense, work_mod) * inst.scale,
           is_feasible(inst.working.dense, work_mod, epsilon), result.iterations,
           result.termination, g_mod.num_edges - inst.graph.num_edges]
    _emit(args, f"{method}.csv",
          ["method", "epsilon", "budgetUsed", "feasible", "iterations", "termination", "edgeChange"],
          [row])
    return EXIT_OK


def cmd_baseline(args) -> int:
    return cmd_attack(args, args.kind)


def cmd_simulate(args) -> int:
    g = _graph(args)
    s = _target(args, g)
    params = SISParams(args.beta, args.delta, args.sim_steps, args.trials, args.seed or 0)
    r = simulate_sis(g, s, params, initial=args.initial, threads=args.threads)
    _emit(args, "simulate.csv", ["fracS", "fracSPrime", "fracAll", "stderrS", "stderrSPrime"],
          [[r.fracS, r.fracSPrime, r.fracAll, r.stderrS, r.stderrSPrime]])
    return EXIT_OK


def cmd_certify(args) -> int:
    g = _graph(args)
    s = _target(args, g)
    cert = certify_budget(g, s, args.beta, args.delta, args.tau)
    estimate = applicable = None
    if args.beta is not None and args.delta is not None:
        estimate, applicable = impact_estimator(g, s, args.beta, args.delta)
    print(f"epsilonMin = {cert.epsilon_min!r}")
    if applicable is not None:
        print(f"applicable = {'true' if applicable else 'false'}")
    if args.csv:
        args_csv = argparse.Namespace(out=str(Path(args.csv).parent))
        _emit(args_csv, Path(args.csv).name,
              ["epsilonMin", "applicable", "estimate", "tau", "weightedDegrees"],
              [[cert.epsilon_min, applicable, estimate, cert.tau, cert.weighted_degrees]])
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _graph(args)
    g_mod = load_edge_list(_read(args.modified), weighted=args.weighted)
    if g_mod.n < g.n:
        # trailing isolated nodes are invisible in an edge list
        g_mod = Graph(g.n, _pad(g_mod.matrix, g.n), g_mod.weighted)
    elif g_mod.n > g.n:
        g = Graph(g_mod.n, _pad(g.matrix, g_mod.n), g.weighted)
    checks = bound_suite(g, g_mod, seed=args.seed or 0)
    rows = [[c.name, c.measured, c.bound, c.holds] for c in checks]
    if args.epsilon is not None or args.gamma is not None:
        eps = args.epsilon if args.epsilon is not None else budget_from_gamma(g, args.gamma)
        shift = perturbation_norm(g.dense, g_mod.dense)
        rows.append(["feasibility", shift, eps, is_feasible(g.dense, g_mod.dense, eps)])
    _emit(args, "verify.csv", ["name", "measured", "bound", "holds"], rows)
    return EXIT_OK


def _pad(m, n):
    m = m.tocoo()
    return sp.csr_matrix((m.data, (m.row, m.col)), shape=(n, n))


def cmd_generate(args) -> int:
    seed = args.seed or 0
    if args.model == "ba":
        g = barabasi_albert(args.n, args.attach, seed)
    else:
        g = watts_strogatz(args.n, args.k, args.p, seed)
    _save_graph(args, g, "graph.edges")
    if args.percentile is not None:
        s = percentile_target(g, args.percentile)
        out = Path(args.out or ".")
        (out / "target.txt").write_text("".join(f"{i}\n" for i in s.members))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = Config.load(args.config)
    plan = Plan.from_config(cfg, seed=args.seed, threads=args.threads)
    paths = run_experiment(plan, args.out or ".")
    for path in paths.values():
        print(path)
    return EXIT_OK


def _weights(text: str) -> tuple[float, float, float]:
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers") from None
    if len(values) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (tables go to stdout when omitted)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--threads", type=int, default=None, help="worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    graph_args = argparse.ArgumentParser(add_help=False)
    graph_args.add_argument("--graph", required=True, help="edge list file")
    graph_args.add_argument("--weighted", action="store_true")
    tgt = graph_args.add_mutually_exclusive_group()
    tgt.add_argument("--target", help="target set file, one node id per line")
    tgt.add_argument("--percentile", type=float, default=90.0,
                     help="take the node at this degree percentile plus its neighbours")

    budget = argparse.ArgumentParser(add_help=False)
    b = budget.add_mutually_exclusive_group(required=True)
    b.add_argument("--gamma", type=float, help="budget as a fraction of the leading eigenvalue")
    b.add_argument("--epsilon", type=float, help="absolute spectral-norm budget")
    budget.add_argument("--weights", type=_weights, default=(1 / 3, 1 / 3, 1 / 3),
                        help="objective weights a1,a2,a3")
    budget.add_argument("--steps", type=int, default=500, help="maximum ascent steps")
    budget.add_argument("--eta", type=float, default=0.1)
    budget.add_argument("--schedule", choices=["constant", "inverse-sqrt"], default="constant")
    budget.add_argument("--integer-weights", action="store_true")

    p = argparse.ArgumentParser(prog="targetdiff", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("attack", parents=[common, graph_args, budget],
                   help="gradient attack, then discretize").set_defaults(func=cmd_attack)
    bp = sub.add_parser("baseline", parents=[common, graph_args, budget],
                        help="greedy deg or gel baseline")
    bp.add_argument("--kind", choices=["deg", "gel"], required=True)
    bp.set_defaults(func=cmd_baseline)

    sp_ = sub.add_parser("simulate", parents=[common, graph_args], help="SIS Monte Carlo")
    sp_.add_argument("--beta", type=float, default=0.06)
    sp_.add_argument("--delta", type=float, default=0.24)
    sp_.add_argument("--sim-steps", type=int, default=30)
    sp_.add_argument("--trials", type=int, default=2000)
    sp_.add_argument("--initial", type=int, help="fixed initial node (random per trial if omitted)")
    sp_.set_defaults(func=cmd_simulate)

    cp = sub.add_parser("certify", parents=[common, graph_args], help="certified budget")
    cp.add_argument("--beta", type=float)
    cp.add_argument("--delta", type=float)
    cp.add_argument("--tau", type=float, default=0.0)
    cp.add_argument("--csv", help="also write the result to this CSV file")
    cp.set_defaults(func=cmd_certify)

    vp = sub.add_parser("verify", parents=[common], help="structural bounds and feasibility")
    vp.add_argument("--graph", required=True)
    vp.add_argument("--modified", required=True)
    vp.add_argument("--weighted", action="store_true")
    vb = vp.add_mutually_exclusive_group()
    vb.add_argument("--gamma", type=float)
    vb.add_argument("--epsilon", type=float)
    vp.set_defaults(func=cmd_verify)

    gp = sub.add_parser("generate", parents=[common], help="synthetic graph")
    gp.add_argument("--model", choices=["ba", "ws"], required=True)
    gp.add_argument("--n", type=int, default=375)
    gp.add_argument("--attach", type=int, default=5)
    gp.add_argument("--k", type=int, default=10)
    gp.add_argument("--p", type=float, default=0.2)
    gp.add_argument("--percentile", type=float, help="also write target.txt")
    gp.set_defaults(func=cmd_generate)

    ep = sub.add_parser("experiment", parents=[common], help="full sweep from a config file")
    ep.add_argument("--config", required=True)
    ep.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None and args.command != "experiment":
        args.threads = 1
    try:
        return args.func(args)
    except (ConfigError, GraphFormatError, DegeneratePartitionError) as exc:
        print(f"targetdiff {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"targetdiff {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TargetDiffError) as exc:
        print(f"targetdiff {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
