"""Attack, discretize and simulate sweeps driven by a flat config file.

A run produces three CSV files in the output directory:

``results.csv``
    one row per (replicate, budget, method) with SIS fractions on the
    original and modified graph, leading eigenvalues of the target block,
    the emitted perturbation's spectral norm and a feasibility flag.
``walks.csv``
    random-walk mass on S and S' before and after, when walks are requested.
``timings.csv``
    seconds spent per phase of every task.

Rows are written in replicate, budget, method order whatever the thread
count, and every random stream is derived from the config seed, so two runs
agree byte for byte apart from the timing columns.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import as_graph, baseline_attack
from .certify import certify_budget
from .config import Config
from .diffusion import SISParams, SimulationResult, page_rank, random_walk_restart, simulate_sis
from .discretize import normalize_weights, rescale_weighted, round_unweighted
from .errors import ConfigError
from .generators import barabasi_albert, percentile_target, watts_strogatz
from .graph import Graph, TargetSet, induced_subgraph, load_edge_list, load_target_set
from .objective import ObjectiveWeights
from .optimizer import AttackConfig, AttackResult, attack, make_step_schedule
from .spectral import (DEFAULT_K, DEFAULT_TOL, DENSE_CAP, derive_seed, full_spectrum,
                       max_eigenvalue_shift, power_iterate, spectral_norm)

log = logging.getLogger(__name__)

METHODS = ("potion", "deg", "gel")
WALKS = ("rwr", "pagerank")
FEASIBILITY_SLACK = 1e-6

RESULT_COLUMNS = [
    "replicate", "gamma", "epsilon", "method",
    "fracS_orig", "fracS_mod", "fracSPrime_orig", "fracSPrime_mod",
    "stderrS_orig", "stderrS_mod", "stderrSPrime_orig", "stderrSPrime_mod",
    "lambda1S_orig", "lambda1S_mod", "budgetUsed", "feasible",
    "iterations", "termination", "wallTime",
]
WALK_COLUMNS = [
    "replicate", "gamma", "epsilon", "method", "walk", "start",
    "massS_orig", "massS_mod", "massSPrime_orig", "massSPrime_mod",
]
TIMING_COLUMNS = ["replicate", "gamma", "method", "phase", "seconds"]


@dataclass
class Plan:
    """Everything a run needs, resolved from a config file."""

    graph_path: Path | None = None
    generator: str | None = None
    n: int = 375
    attach: int = 5
    ws_k: int = 10
    ws_p: float = 0.2
    replicates: int = 1
    weighted: bool = False
    integer_weights: bool = False
    target_path: Path | None = None
    percentile: float = 90.0
    gammas: list[float] = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5])
    cert_fractions: list[float] = field(default_factory=list)
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    beta: float = 0.06
    delta: float = 0.24
    sim_steps: int = 30
    trials: int = 2000
    methods: list[str] = field(default_factory=lambda: ["potion"])
    walks: list[str] = field(default_factory=list)
    rwr_restart: float = 0.05
    pagerank_restart: float = 0.1
    rwr_starts: list[int] = field(default_factory=lambda: [0])
    eta: float = 0.1
    schedule: str = "constant"
    max_steps: int = 500
    power_k: int = DEFAULT_K
    power_tol: float = DEFAULT_TOL
    seed: int = 0
    threads: int = 1

    @classmethod
    def from_config(cls, cfg: Config, seed: int | None = None,
                    threads: int | None = None) -> "Plan":
        p = cls()
        p.graph_path = cfg.path_of("graph", None)
        p.generator = cfg.text("generator", None)
        if (p.graph_path is None) == (p.generator is None):
            raise ConfigError("give exactly one of 'graph' or 'generator'", cfg.path, "graph")
        if p.generator is not None and p.generator not in ("ba", "ws"):
            raise ConfigError(f"unknown generator {p.generator!r}", cfg.path, "generator")
        p.n = cfg.integer("n", p.n)
        p.attach = cfg.integer("attach", p.attach)
        p.ws_k = cfg.integer("ws_k", p.ws_k)
        p.ws_p = cfg.number("ws_p", p.ws_p)
        p.replicates = cfg.integer("replicates", p.replicates)
        p.weighted = cfg.flag("weighted", p.weighted)
        p.integer_weights = cfg.flag("integer_weights", p.integer_weights)
        p.target_path = cfg.path_of("target", None)
        p.percentile = cfg.number("percentile", p.percentile)
        p.gammas = cfg.numbers("gammas", p.gammas)
        p.cert_fractions = cfg.numbers("cert_fractions", p.cert_fractions)
        if "weights" in cfg:
            alphas = cfg.numbers("weights")
            if len(alphas) != 3:
                raise ConfigError("expected three objective weights", cfg.path, "weights")
        else:
            alphas = [cfg.number(f"a{i}", 1 / 3) for i in (1, 2, 3)]
        try:
            p.weights = ObjectiveWeights(*alphas)
        except ValueError as exc:
            raise ConfigError(str(exc), cfg.path, "weights") from None
        p.beta = cfg.number("beta", 0.2 if p.weighted else p.beta)
        p.delta = cfg.number("delta", p.delta)
        p.sim_steps = cfg.integer("sim_steps", p.sim_steps)
        p.trials = cfg.integer("trials", p.trials)
        p.methods = cfg.items("methods", p.methods)
        p.walks = cfg.items("walks", p.walks)
        p.rwr_restart = cfg.number("rwr_restart", p.rwr_restart)
        p.pagerank_restart = cfg.number("pagerank_restart", p.pagerank_restart)
        p.rwr_starts = [int(x) for x in cfg.numbers("rwr_starts", p.rwr_starts)]
        p.eta = cfg.number("eta", p.eta)
        p.schedule = cfg.text("schedule", p.schedule)
        p.max_steps = cfg.integer("max_steps", p.max_steps)
        p.power_k = cfg.integer("power_k", p.power_k)
        p.power_tol = cfg.number("power_tol", p.power_tol)
        p.seed = cfg.integer("seed", p.seed)
        p.threads = cfg.integer("threads", p.threads)
        if seed is not None:
            p.seed = seed
        if threads is not None:
            p.threads = threads

        for key, values, allowed in (("methods", p.methods, METHODS), ("walks", p.walks, WALKS)):
            bad = [v for v in values if v not in allowed]
            if bad:
                raise ConfigError(f"unknown entries {bad}", cfg.path, key)
        if p.schedule not in ("constant", "inverse-sqrt"):
            raise ConfigError(f"unknown schedule {p.schedule!r}", cfg.path, "schedule")
        if any(x < 0 for x in p.gammas + p.cert_fractions):
            raise ConfigError("budgets must be nonnegative", cfg.path, "gammas")
        if p.replicates < 1 or p.threads < 1:
            raise ConfigError("replicates and threads must be positive", cfg.path, "replicates")
        if p.weighted and p.generator is not None:
            raise ConfigError("generators produce unweighted graphs", cfg.path, "weighted")
        if p.eta <= 0:
            raise ConfigError("eta must be positive", cfg.path, "eta")
        try:
            p.sis(0)
        except ValueError as exc:
            raise ConfigError(str(exc), cfg.path, "beta") from None
        unused = cfg.unused()
        if unused:
            raise ConfigError(f"unknown keys {unused}", cfg.path, unused[0])
        return p

    def sis(self, replicate: int) -> SISParams:
        # One seed per replicate: G and every G~ of that replicate share trial streams.
        seed = int(np.random.SeedSequence([self.seed, replicate]).generate_state(1)[0])
        return SISParams(self.beta, self.delta, self.sim_steps, self.trials, seed)


@dataclass
class Instance:
    """One replicate: the original graph, its working copy and the target set."""

    replicate: int
    graph: Graph
    working: Graph  # graph / C for weighted input, graph itself otherwise
    scale: float
    target: TargetSet
    lambda1: float  # leading eigenvalue of the working matrix
    orig: SimulationResult | None = None


def _build_instance(plan: Plan, replicate: int) -> Instance:
    if plan.graph_path is not None:
        g = load_edge_list(plan.graph_path.read_text(), weighted=plan.weighted)
    elif plan.generator == "ba":
        g = barabasi_albert(plan.n, plan.attach, seed=derive_seed(plan.seed, replicate))
    else:
        g = watts_strogatz(plan.n, plan.ws_k, plan.ws_p, seed=derive_seed(plan.seed, replicate))
    if plan.target_path is not None:
        s = load_target_set(plan.target_path.read_text(), g.n)
    else:
        s = percentile_target(g, plan.percentile)
    s.require_proper()
    working, scale = normalize_weights(g) if g.weighted else (g, 1.0)
    lam = abs(power_iterate(working, plan.power_k, plan.power_tol, plan.seed).value)
    return Instance(replicate, g, working, scale, s, lam)


def block_lambda1(g: Graph, s: TargetSet) -> float:
    """Largest eigenvalue of the S x S block."""
    sub = induced_subgraph(g, s)
    if sub.n <= DENSE_CAP:
        return float(full_spectrum(sub)[0])
    return float(power_iterate(sub).value)


def perturbation_norm(a, a_tilde) -> float:
    """``||A~ - A||_2`` exactly up to the dense cap, by power iteration beyond."""
    diff = np.asarray(a_tilde) - np.asarray(a)
    if diff.shape[0] <= DENSE_CAP:
        return float(np.abs(np.linalg.eigvalsh(diff)).max()) if diff.size else 0.0
    return spectral_norm(diff)


def is_feasible(a, a_tilde, epsilon: float) -> bool:
    """Every eigenvalue moved by at most ``epsilon`` (plus a small slack)."""
    a = np.asarray(a)
    if a.shape[0] <= DENSE_CAP:
        shift = max_eigenvalue_shift(a, a_tilde)
    else:
        shift = perturbation_norm(a, a_tilde)
    return bool(shift <= epsilon + FEASIBILITY_SLACK)


def run_method(plan: Plan, inst: Instance, method: str, epsilon: float,
               seed) -> tuple[Graph, AttackResult]:
    """Attack the working graph and return the emitted graph on the original scale."""
    w = inst.working
    if method == "potion":
        cfg = AttackConfig(epsilon=epsilon, steps=plan.max_steps,
                           schedule=make_step_schedule(plan.schedule, plan.eta),
                           weights=plan.weights, power_k=plan.power_k,
                           power_tol=plan.power_tol, seed=seed)
        result = attack(w, inst.target, cfg)
        if w.weighted:
            return rescale_weighted(inst.graph, result, plan.integer_weights), result
        return round_unweighted(w, result, epsilon, plan.power_k, plan.power_tol, seed), result
    result = baseline_attack(w, inst.target, method, epsilon, k=plan.power_k,
                             tol=plan.power_tol, seed=seed)
    if w.weighted:
        return rescale_weighted(inst.graph, result, plan.integer_weights), result
    return as_graph(w, result), result


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


@dataclass
class TaskOutput:
    row: list
    walks: list[list] = field(default_factory=list)
    timings: list[list] = field(default_factory=list)


def _walk_rows(plan, inst, g_mod, head):
    rows = []
    for walk in plan.walks:
        if walk == "rwr":
            for start in plan.rwr_starts:
                a = random_walk_restart(inst.graph, inst.target, plan.rwr_restart, start)
                b = random_walk_restart(g_mod, inst.target, plan.rwr_restart, start)
                rows.append(head + [walk, start, a.massS, b.massS, a.massSPrime, b.massSPrime])
        else:
            a = page_rank(inst.graph, inst.target, plan.pagerank_restart)
            b = page_rank(g_mod, inst.target, plan.pagerank_restart)
            rows.append(head + [walk, "", a.massS, b.massS, a.massSPrime, b.massSPrime])
    return rows


def _run_task(plan: Plan, inst: Instance, b_index: int, gamma: float, epsilon: float,
              method: str) -> TaskOutput:
    timings = []
    seed = derive_seed(plan.seed, inst.replicate, b_index, METHODS.index(method))

    t0 = time.perf_counter()
    g_mod, result = run_method(plan, inst, method, epsilon, seed)
    t1 = time.perf_counter()
    timings.append(["attack", t1 - t0])

    work_mod = g_mod.dense / inst.scale
    used = perturbation_norm(inst.working.dense, work_mod)
    feasible = is_feasible(inst.working.dense, work_mod, epsilon)
    t2 = time.perf_counter()
    timings.append(["verify", t2 - t1])

    mod = simulate_sis(g_mod, inst.target, plan.sis(inst.replicate))
    t3 = time.perf_counter()
    timings.append(["simulate", t3 - t2])

    head = [inst.replicate, gamma, epsilon, method]
    walks = _walk_rows(plan, inst, g_mod, head)
    t4 = time.perf_counter()
    if plan.walks:
        timings.append(["walks", t4 - t3])

    orig = inst.orig
    row = head + [
        orig.fracS, mod.fracS, orig.fracSPrime, mod.fracSPrime,
        orig.stderrS, mod.stderrS, orig.stderrSPrime, mod.stderrSPrime,
        block_lambda1(inst.graph, inst.target), block_lambda1(g_mod, inst.target),
        used, feasible, result.iterations, result.termination, t4 - t0,
    ]
    return TaskOutput(row, walks, [[inst.replicate, gamma, method, ph, sec] for ph, sec in timings])


def budgets(plan: Plan, inst: Instance) -> list[tuple[float, float]]:
    """``(gamma, epsilon)`` pairs in working units: the gamma sweep, then certificate fractions."""
    out = [(g, g * inst.lambda1) for g in plan.gammas]
    if plan.cert_fractions:
        eps_min = certify_budget(inst.graph, inst.target).epsilon_min / inst.scale
        for f in plan.cert_fractions:
            eps = f * eps_min
            out.append((eps / inst.lambda1 if inst.lambda1 else 0.0, eps))
    return out


def _write(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def run_experiment(plan: Plan, out_dir: str | Path) -> dict[str, Path]:
    """Run every (replicate, budget, method) task and write the CSV files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timing_rows: list[list] = []

    def prepare(r):
        t0 = time.perf_counter()
        inst = _build_instance(plan, r)
        inst.orig = simulate_sis(inst.graph, inst.target, plan.sis(r))
        return inst, time.perf_counter() - t0

    with ThreadPoolExecutor(plan.threads) as pool:
        prepared = list(pool.map(prepare, range(plan.replicates)))
        instances = [inst for inst, _ in prepared]
        timing_rows += [[inst.replicate, "", "", "prepare", sec] for inst, sec in prepared]

        jobs = []
        for inst in instances:
            for b_index, (gamma, eps) in enumerate(budgets(plan, inst)):
                for method in plan.methods:
                    jobs.append(pool.submit(_run_task, plan, inst, b_index, gamma, eps, method))
        outputs = [job.result() for job in jobs]

    paths = {"results": out / "results.csv", "timings": out / "timings.csv"}
    _write(paths["results"], RESULT_COLUMNS, [o.row for o in outputs])
    _write(paths["timings"], TIMING_COLUMNS, timing_rows + [t for o in outputs for t in o.timings])
    if plan.walks:
        paths["walks"] = out / "walks.csv"
        _write(paths["walks"], WALK_COLUMNS, [w for o in outputs for w in o.walks])
    log.info("wrote %d result rows to %s", len(outputs), out)
    return paths
