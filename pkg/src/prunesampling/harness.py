"""Multi-run experiments: N chains per method, diagnostics, timing, CSV output."""
from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from .diagnostics import RocFit, ahd_series, fit_roc, samples_to_target, sigma_series
from .errors import ContractError, IntractableError, PruneSamplingError
from .exact import MarginalTable, exact_marginals
from .io import BenchmarkSpec, generate, load_network
from .network import Network, reduce_evidence
from .samplers import METHODS, SamplerConfig, forward_sample, run_chain

log = logging.getLogger(__name__)

TRACE_HEADER = ("method", "run", "t", "query_var", "value", "estimate")
AHD_HEADER = ("method", "t", "ahd")
SIGMA_HEADER = ("method", "t", "sigma2")
TIMING_LIMIT = 2_000_000

ROC_HEADER = ("method", "alpha", "beta", "delta", "residual", "t_target", "wall_seconds")


@dataclass
class ExperimentConfig:
    network: object
    methods: tuple = METHODS
    runs: int = 100
    samples: int = 25_000
    seed: int = 0
    evidence: Mapping | None = None
    evidence_fraction: float | None = None
    query: tuple | None = None
    target: tuple | None = None
    out: str | Path | None = None
    burn_in: int = 0
    thinning: int = 1
    init: str = "forward"
    prune_mode: str = "exact"
    cap: int = 10**6
    workers: int = 1
    target_sigma2: float = 0.01
    time_target: bool = True
    timing_limit: int | None = TIMING_LIMIT
    trace_runs: int | None = None

    def validate(self):
        if self.runs < 1 or self.samples < 1:
            raise ContractError("runs and samples must be >= 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ContractError(f"unknown method {bad[0]!r}")
        if self.evidence and self.evidence_fraction is not None:
            raise ContractError("give explicit evidence or an evidence fraction, not both")
        if self.evidence_fraction is not None and not 0.0 <= self.evidence_fraction <= 1.0:
            raise ContractError("evidence fraction must lie in [0, 1]")
        if self.workers < 1:
            raise ContractError("workers must be >= 1")
        return self


@dataclass(eq=False)
class MethodReport:
    method: str
    ahd: np.ndarray | None = None
    sigma: np.ndarray | None = None
    roc: RocFit | None = None
    t_target: int | None = None
    wall_seconds: float | None = None
    trace_values: list = field(default_factory=list)
    trace_estimates: list = field(default_factory=list)
    final_marginals: dict = field(default_factory=dict)
    run_errors: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


@dataclass(eq=False)
class ExperimentReport:
    config: ExperimentConfig
    network: Network
    evidence: dict
    query: tuple
    target: tuple
    exact: MarginalTable | None
    methods: dict
    warnings: list = field(default_factory=list)


def resolve_network(source) -> Network:
    if isinstance(source, Network):
        return source
    if isinstance(source, BenchmarkSpec):
        return generate(source)
    return load_network(source)


def select_evidence(net: Network, fraction: float, seed: int) -> dict[int, int]:
    """Observe ``ceil(fraction * n)`` random variables at the values of one forward sample."""
    if not 0.0 <= fraction <= 1.0:
        raise ContractError("evidence fraction must lie in [0, 1]")
    k = math.ceil(Fraction(repr(float(fraction))) * net.n)
    if k == 0:
        return {}
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 7919]))
    x = forward_sample(net, rng)
    chosen = np.sort(rng.choice(net.n, size=k, replace=False))
    return {int(i): int(x[i]) for i in chosen}


def _run_one(net, scfg, run, exact, query, target, report_states):
    trace = run_chain(net, scfg, run)
    ahd = ahd_series([trace], exact, query) if exact is not None else None
    tvar, tstate = target
    target_series = trace.estimates[tvar][:, tstate]
    values = trace.states[:, list(query)]
    est = np.column_stack([trace.estimates[q][:, report_states[q]] for q in query]) if query else np.zeros((len(trace), 0))
    finals = {q: trace.estimates[q][-1] for q in query}
    return ahd, target_series, values, est, finals


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every method ``cfg.runs`` times and aggregate diagnostics.

    Writes the CSV artifacts when ``cfg.out`` is set.
    """
    cfg.validate()
    if cfg.out is not None:
        # fail before sampling, not after
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
    base = resolve_network(cfg.network)
    warnings = []
    if cfg.evidence:
        evidence = base.assignment(cfg.evidence)
    elif cfg.evidence_fraction is not None:
        evidence = select_evidence(base, cfg.evidence_fraction, cfg.seed)
    else:
        evidence = {}
    net = reduce_evidence(base, evidence)

    try:
        exact = exact_marginals(base, evidence)
    except IntractableError as exc:
        exact = None
        warnings.append(f"exact inference skipped, AHD not computed: {exc}")
        log.warning(warnings[-1])

    if cfg.query is None:
        query = tuple(i for i in range(net.n) if i not in evidence)
    else:
        query = tuple(net.index(q) for q in cfg.query)
    if cfg.target is None:
        free = [i for i in range(net.n) if i not in evidence] or [net.n - 1]
        target = (free[-1], 0)
    else:
        target = (net.index(cfg.target[0]), net.state_index(cfg.target[0], cfg.target[1]))
    estimate_vars = tuple(sorted(set(query) | {target[0]}))
    report_states = {q: (target[1] if q == target[0] else 0) for q in query}

    reports = {}
    for method in cfg.methods:
        rep = MethodReport(method)
        scfg = SamplerConfig(
            method=method, samples=cfg.samples, burn_in=cfg.burn_in, thinning=cfg.thinning,
            init=cfg.init, seed=cfg.seed, prune_mode=cfg.prune_mode, cap=cfg.cap,
            query=estimate_vars,
        )

        def job(run, scfg=scfg):
            try:
                return _run_one(net, scfg, run, exact, query, target, report_states)
            except PruneSamplingError as exc:
                return exc

        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                results = list(pool.map(job, range(cfg.runs)))
        else:
            results = [job(r) for r in range(cfg.runs)]

        ahd_sum, n_ok, targets = None, 0, []
        for run, res in enumerate(results):
            if isinstance(res, Exception):
                rep.run_errors[run] = f"{type(res).__name__}: {res}"
                continue
            ahd, tser, values, est, finals = res
            n_ok += 1
            if ahd is not None:
                ahd_sum = ahd if ahd_sum is None else ahd_sum + ahd
            targets.append(tser)
            if cfg.trace_runs is None or run < cfg.trace_runs:
                rep.trace_values.append((run, values))
                rep.trace_estimates.append((run, est))
            for q, v in finals.items():
                rep.final_marginals.setdefault(q, []).append(v)
        if rep.run_errors:
            rep.warnings.append(f"{len(rep.run_errors)} of {cfg.runs} runs failed")
        if ahd_sum is not None:
            rep.ahd = ahd_sum / n_ok
        if len(targets) >= 2:
            rep.sigma = sigma_series(np.array(targets))
            try:
                rep.roc = fit_roc(rep.sigma)
            except ContractError as exc:
                rep.warnings.append(f"ROC fit failed: {exc}")
        elif targets:
            rep.warnings.append("sigma series needs at least two runs")
        if rep.roc is not None:
            rep.t_target = samples_to_target(rep.roc.alpha, cfg.target_sigma2)
            if cfg.timing_limit is not None and rep.t_target > cfg.timing_limit:
                rep.warnings.append(
                    f"timing skipped: {rep.t_target} samples exceed the limit of {cfg.timing_limit}"
                )
            elif cfg.time_target:
                rep.wall_seconds = _time_samples(net, scfg, max(rep.t_target, 1), cfg.runs)
        for w in rep.warnings:
            log.warning("%s: %s", method, w)
        reports[method] = rep

    report = ExperimentReport(cfg, net, evidence, query, target, exact, reports, warnings)
    if cfg.out is not None:
        emit_csv(report, cfg.out)
    return report


def _time_samples(net, scfg, samples, run):
    """Wall time of one fresh chain of ``samples`` samples, initialization included."""
    timed = replace(scfg, samples=int(samples), query=())
    t0 = time.perf_counter()
    run_chain(net, timed, run)
    return time.perf_counter() - t0


# -- CSV ----------------------------------------------------------------------


def _f(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _open(path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def emit_csv(report: ExperimentReport, directory) -> list[Path]:
    """Write ``trace.csv``, ``ahd.csv``, ``sigma.csv`` and ``roc.csv``.

    With no methods only a header-only ``roc.csv`` is written.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    net = report.network
    written = []
    if report.methods:
        path = directory / "trace.csv"
        with _open(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_HEADER)
            for method, rep in report.methods.items():
                for (run, values), (_, est) in zip(rep.trace_values, rep.trace_estimates):
                    names = [net.variables[q] for q in report.query]
                    for t in range(values.shape[0]):
                        for k, var in enumerate(names):
                            w.writerow((method, run, t + 1, var.name,
                                        var.states[int(values[t, k])], _f(est[t, k])))
        written.append(path)
        path = directory / "ahd.csv"
        with _open(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(AHD_HEADER)
            for method, rep in report.methods.items():
                if rep.ahd is not None:
                    for t, v in enumerate(rep.ahd, start=1):
                        w.writerow((method, t, _f(v)))
        written.append(path)
        path = directory / "sigma.csv"
        with _open(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SIGMA_HEADER)
            for method, rep in report.methods.items():
                if rep.sigma is not None:
                    for t, v in enumerate(rep.sigma, start=1):
                        w.writerow((method, t, _f(v)))
        written.append(path)
    path = directory / "roc.csv"
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROC_HEADER)
        for method, rep in report.methods.items():
            roc = rep.roc
            if roc is None:
                w.writerow((method, "", "", "", "", "", ""))
            else:
                w.writerow((method, _f(roc.alpha), _f(roc.beta), _f(roc.delta), _f(roc.residual),
                            rep.t_target, _f(rep.wall_seconds)))
    written.append(path)
    return written


def write_marginals(table: MarginalTable, path):
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("variable", "state", "probability"))
        for var, state, p in table.rows():
            w.writerow((var, state, _f(p)))


def read_sigma_csv(path) -> dict[str, np.ndarray]:
    """``sigma.csv`` back into ``{method: series}`` (rows sorted by t)."""
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != SIGMA_HEADER:
            raise ContractError(f"{path} does not have the header {','.join(SIGMA_HEADER)}")
        for row in reader:
            rows.setdefault(row["method"], []).append((int(row["t"]), float(row["sigma2"])))
    return {m: np.array([v for _, v in sorted(r)]) for m, r in rows.items()}
