"""Spectral-budget structure attacks on targeted subgraphs, with SIS and random-walk evaluation."""

from .baselines import baseline_attack
from .certify import CertBound, certify_budget, impact_estimator
from .diffusion import SISParams, SimulationResult, WalkResult, page_rank, random_walk_restart, simulate_sis
from .discretize import rescale_weighted, round_unweighted
from .errors import (ConfigError, DegeneratePartitionError, GraphFormatError, NumericalError,
                     TargetDiffError)
from .generators import barabasi_albert, percentile_target, watts_strogatz
from .graph import Graph, Perturbation, TargetSet, load_edge_list, load_target_set, normalized_cut
from .objective import ObjectiveWeights, evaluate
from .optimizer import AttackConfig, AttackResult, attack
from .spectral import full_spectrum, power_iterate, spectral_norm
from .structural import bound_suite

__version__ = "0.1.0"
