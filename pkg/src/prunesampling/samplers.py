"""Chain drivers: prune sampling, Gibbs and Metropolis baselines, initial states."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CapExceededError, ContractError, SamplingError, StuckStateError
from .network import Network, is_feasible, joint_probability
from .pruning import STATE_CAP, bounded_candidates, enumerate_pruned, prune_around, uniform_draw

METHODS = ("prune", "gibbs", "metropolis")
_METHOD_CODE = {"prune": 0, "gibbs": 1, "metropolis": 2}
RETRY_BUDGET = 10_000


# -- configuration -------------------------------------------------------------


def parse_init(text: str) -> tuple[str, float]:
    """``forward`` | ``random`` | ``hybrid:p`` -> ``(kind, p)``."""
    kind, _, arg = str(text).partition(":")
    if kind == "forward" and not arg:
        return "forward", 1.0
    if kind in ("random", "random_forward") and not arg:
        return "random", 0.0
    if kind == "hybrid":
        try:
            p = float(arg)
        except ValueError:
            raise ContractError(f"bad hybrid probability in {text!r}") from None
        if not 0.0 <= p <= 1.0:
            raise ContractError("hybrid probability must lie in [0, 1]")
        return "hybrid", p
    raise ContractError(f"unknown init {text!r}; use forward, random or hybrid:p")


def parse_prune_mode(text: str) -> tuple:
    """``exact`` | ``bounded:size:budget``."""
    parts = str(text).split(":")
    if parts == ["exact"]:
        return ("exact",)
    if parts[0] == "bounded" and len(parts) == 3:
        try:
            size, budget = int(parts[1]), int(parts[2])
        except ValueError:
            raise ContractError(f"bad bounded prune mode {text!r}") from None
        if size < 1 or budget < 1:
            raise ContractError("bounded prune mode needs size >= 1 and budget >= 1")
        return ("bounded", size, budget)
    raise ContractError(f"unknown prune mode {text!r}; use exact or bounded:size:budget")


@dataclass(frozen=True)
class SamplerConfig:
    method: str = "prune"
    samples: int = 1000
    burn_in: int = 0
    thinning: int = 1
    init: str = "forward"
    seed: int = 0
    prune_mode: str = "exact"
    cap: int = STATE_CAP
    estimator: str | None = None
    query: tuple | None = None
    retry_budget: int = RETRY_BUDGET
    initial_state: tuple | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractError(f"unknown method {self.method!r}")
        if self.samples < 1:
            raise ContractError("samples must be >= 1")
        if self.burn_in < 0:
            raise ContractError("burn-in must be >= 0")
        if self.thinning < 1:
            raise ContractError("thinning must be >= 1")
        if self.cap < 1:
            raise ContractError("cap must be >= 1")
        if self.estimator not in (None, "frequency", "rao-blackwell"):
            raise ContractError(f"unknown estimator {self.estimator!r}")
        parse_init(self.init)
        parse_prune_mode(self.prune_mode)

    @property
    def resolved_estimator(self) -> str:
        if self.estimator is not None:
            return self.estimator
        return "rao-blackwell" if self.method == "gibbs" else "frequency"


@dataclass(eq=False)
class RunTrace:
    """States recorded after burn-in and thinning, with running marginals.

    ``previous[t]`` is the chain state immediately before ``states[t]`` was
    produced. ``estimates[v]`` has shape ``(T, card_v)``; row ``t`` is the
    running estimate after ``t + 1`` recorded samples.
    """

    method: str
    states: np.ndarray
    previous: np.ndarray
    initial: np.ndarray
    query: tuple
    estimates: dict = field(default_factory=dict)
    estimator: str = "frequency"

    def __len__(self):
        return self.states.shape[0]

    def marginal(self, var) -> np.ndarray:
        return self.estimates[var][-1]


def stream_seed(seed: int, method: str, run: int) -> np.random.SeedSequence:
    """Random stream of one chain, derived only from (seed, method, run index)."""
    return np.random.SeedSequence([int(seed), _METHOD_CODE[method], int(run)])


# -- initial states -----------------------------------------------------------


def hybrid_forward_sample(net: Network, p: float, rng, retry_budget: int = RETRY_BUDGET) -> np.ndarray:
    """Ancestral sampling mixing CPT draws (probability ``p``) and uniform draws
    over the positive entries of the current column.

    Every variable consumes one uniform for the coin and one for the value,
    so ``p=1`` and ``p=0`` reproduce forward and random forward sampling
    exactly. Dead ends (all-zero columns, possible after evidence reduction)
    restart the pass.
    """
    if not 0.0 <= p <= 1.0:
        raise ContractError("hybrid probability must lie in [0, 1]")
    flat = net.flat
    x = np.zeros(net.n, dtype=np.int64)
    for _ in range(retry_budget):
        for i in range(net.n):
            ci = int(flat.card[i])
            base = int(flat.offset[i]) + net.parent_config(x, i) * ci
            column = flat.values[base:base + ci]
            positive = np.flatnonzero(column > 0)
            if positive.size == 0:
                break
            coin = rng.random()
            u = rng.random()
            if coin < p:
                cum = np.cumsum(column)
                k = int(np.argmax(u * cum[-1] < cum))
                if column[k] <= 0:
                    k = int(positive[-1])
            else:
                k = int(positive[min(int(u * positive.size), positive.size - 1)])
            x[i] = k
        else:
            return x.copy()
    raise SamplingError(f"no feasible state after {retry_budget} forward-sampling attempts")


def forward_sample(net: Network, rng, retry_budget: int = RETRY_BUDGET) -> np.ndarray:
    return hybrid_forward_sample(net, 1.0, rng, retry_budget)


def random_forward_sample(net: Network, rng, retry_budget: int = RETRY_BUDGET) -> np.ndarray:
    """Each variable uniform over the values with a positive CPT entry."""
    return hybrid_forward_sample(net, 0.0, rng, retry_budget)


def map_heuristic(net: Network, tries: int, p: float, rng, retry_budget: int = RETRY_BUDGET) -> np.ndarray:
    """Most probable state among ``tries`` hybrid forward samples."""
    if tries < 1:
        raise ContractError("tries must be >= 1")
    best, best_p = None, -1.0
    for _ in range(tries):
        x = hybrid_forward_sample(net, p, rng, retry_budget)
        px = joint_probability(net, x)
        if px > best_p:
            best, best_p = x, px
    return best


def initial_state(net: Network, cfg: SamplerConfig, rng) -> np.ndarray:
    if cfg.initial_state is not None:
        x = net.full_state(cfg.initial_state)
        if not is_feasible(net, x):
            raise ContractError("initial state is not feasible")
        return x
    _, p = parse_init(cfg.init)
    return hybrid_forward_sample(net, p, rng, cfg.retry_budget)


# -- single transitions ---------------------------------------------------------


def prune_step(net: Network, x, cfg: SamplerConfig, rng) -> np.ndarray:
    """Prune around ``x`` and draw the next state uniformly from what is left."""
    x = net.full_state(x)
    retained = prune_around(net, x, rng)
    mode = parse_prune_mode(cfg.prune_mode)
    if mode[0] == "exact":
        space = enumerate_pruned(net, retained, cfg.cap, origin=x)
    else:
        space = bounded_candidates(net, retained, mode[1], mode[2], rng, origin=x)
    return uniform_draw(space, rng)


def gibbs_sweep(net: Network, x, rng) -> np.ndarray:
    """Resample every variable in index order from its blanket conditional."""
    x = net.full_state(x)
    states, _, status = kernels.gibbs_chain(net.flat, x, rng.random((1, net.n)))
    if status == kernels.STUCK:
        raise StuckStateError("Gibbs sweep reached a variable with no admissible value")
    return states[0].copy()


def metropolis_sweep(net: Network, x, rng) -> np.ndarray:
    """Single-site Metropolis sweep with uniform proposals over the other values."""
    x = net.full_state(x)
    states, _ = kernels.metropolis_chain(net.flat, x, rng.random((1, 2 * net.n)))
    return states[0].copy()


# -- estimators -----------------------------------------------------------------


def _running_mean(rows):
    return np.cumsum(rows, axis=0) / np.arange(1, rows.shape[0] + 1)[:, None]


def frequency_estimate(states, var, card, running=True):
    onehot = (np.asarray(states)[:, var][:, None] == np.arange(card)[None, :]).astype(np.float64)
    return _running_mean(onehot) if running else onehot.mean(axis=0)


def gibbs_marginal_estimate(net: Network, trace: RunTrace, variable, running=False) -> np.ndarray:
    """Rao-Blackwellized marginal: average over sweeps of the conditional the
    variable was drawn from, recomputed from the trace.

    During sweep ``t`` variable ``i`` sees the new values of variables
    ``< i`` and the previous values of the rest.
    """
    i = net.index(variable)
    if len(trace) == 0:
        raise ContractError("empty trace")
    mixed = np.array(trace.previous, dtype=np.int64, copy=True)
    mixed[:, :i] = trace.states[:, :i]
    cond = kernels.conditional_rows(net.flat, mixed, i)
    return _running_mean(cond) if running else _running_mean(cond)[-1]


# -- chains -----------------------------------------------------------------


def _resolve_query(net, cfg):
    if cfg.query is None:
        return tuple(i for i in range(net.n) if i not in net.evidence)
    return tuple(net.index(q) for q in cfg.query)


def _block_size(width):
    return max(1, min(4096, (1 << 22) // max(width, 1)))


def run_chain(net: Network, cfg: SamplerConfig, run: int = 0) -> RunTrace:
    """Initialize, then run ``burn_in + samples * thinning`` transitions.

    Deterministic given ``(cfg, run)``: the random stream comes from
    :func:`stream_seed`.
    """
    if net.n == 0:
        raise ContractError("network has no variables")
    rng = np.random.default_rng(stream_seed(cfg.seed, cfg.method, run))
    x0 = initial_state(net, cfg, rng)
    query = _resolve_query(net, cfg)
    estimator = cfg.resolved_estimator
    total = cfg.burn_in + cfg.samples * cfg.thinning
    steps = np.arange(1, total + 1)
    keep_steps = steps[(steps > cfg.burn_in) & ((steps - cfg.burn_in) % cfg.thinning == 0)]

    flat = net.flat
    card = flat.card
    cond_off = np.concatenate([[0], np.cumsum(card)])
    kept, before, conds = [], [], []
    x = x0
    done = 0
    bounded = cfg.method == "prune" and parse_prune_mode(cfg.prune_mode)[0] == "bounded"
    width = kernels.uniforms_per_step(cfg.method, flat)
    block = _block_size(width)
    while done < total:
        b = min(block, total - done)
        block_conds = None
        if bounded:
            rows = []
            for _ in range(b):
                x = prune_step(net, x, cfg, rng)
                rows.append(x)
            states = np.array(rows, dtype=np.int64)
        else:
            u = rng.random((b, width))
            if cfg.method == "prune":
                states, status = kernels.prune_chain(flat, x, u, cfg.cap)
                if status == kernels.CAP_EXCEEDED:
                    raise CapExceededError(f"pruned space too large: more than {cfg.cap} states")
            elif cfg.method == "gibbs":
                states, block_conds, status = kernels.gibbs_chain(flat, x, u)
                if status == kernels.STUCK:
                    raise StuckStateError("Gibbs sweep reached a variable with no admissible value")
            else:
                states, status = kernels.metropolis_chain(flat, x, u)
        prev = np.vstack([x[None, :], states[:-1]])
        idx = np.flatnonzero(np.isin(np.arange(done + 1, done + b + 1), keep_steps))
        kept.append(states[idx])
        before.append(prev[idx])
        if block_conds is not None:
            conds.append(block_conds[idx])
        x = states[-1].copy()
        done += b

    states = np.concatenate(kept)
    previous = np.concatenate(before)
    estimates = {}
    gibbs_conds = np.concatenate(conds) if conds else None
    for q in query:
        if estimator == "frequency":
            estimates[q] = frequency_estimate(states, q, int(card[q]))
        elif gibbs_conds is not None:
            estimates[q] = _running_mean(gibbs_conds[:, cond_off[q]:cond_off[q + 1]])
        else:
            estimates[q] = _running_mean(kernels.conditional_rows(flat, states, q))
    return RunTrace(cfg.method, states, previous, x0, query, estimates, estimator)
