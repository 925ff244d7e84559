"""Prune sampling for discrete Bayesian networks, with Gibbs and Metropolis baselines."""
from ._backend import BACKEND
from .diagnostics import RocFit, ahd_series, fit_roc, hellinger, samples_to_target, sigma_series
from .errors import (
    CapExceededError, ContractError, CycleError, IntractableError, NetworkError,
    NetworkFormatError, NormalizationError, PruneSamplingError, SamplingError, StuckStateError,
    UnsupportedConstructError, ZeroEvidenceError,
)
from .exact import (
    MarginalTable, TransitionMatrix, brute_force_marginals, enumerate_feasible, exact_marginals,
    prune_transition_matrix, prune_transition_prob, stationary_target,
)
from .harness import ExperimentConfig, ExperimentReport, emit_csv, run_experiment, select_evidence
from .io import BenchmarkSpec, generate, load_network, parse_bif_subset, parse_native, save_network, serialize_native
from .network import (
    Cpt, CptLabel, LabelSet, Network, Variable, is_feasible, joint_probability, labels_of,
    local_conditional, make_network, reduce_evidence,
)
from .pruning import PrunedSpace, bounded_candidates, enumerate_pruned, prune_around, uniform_draw
from .samplers import (
    METHODS, RunTrace, SamplerConfig, forward_sample, gibbs_marginal_estimate, gibbs_sweep,
    metropolis_sweep, prune_step, random_forward_sample, run_chain,
)

__version__ = "0.1.0"
