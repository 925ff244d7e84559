"""Command-line front end.

Subcommands::

    gen     write a generated benchmark network to a file
    exact   exact marginals to CSV
    sample  one chain, trace to CSV
    bench   full multi-run experiment (trace, ahd, sigma, roc CSVs)
    roc     fit the convergence model to an existing sigma.csv

Exit codes: 0 success, 2 configuration error, 3 cap or state-space error,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .diagnostics import fit_roc, samples_to_target
from .errors import (
    CapExceededError, ContractError, IntractableError, NetworkFormatError, PruneSamplingError,
)
from .exact import exact_marginals
from .harness import (
    ROC_HEADER, TIMING_LIMIT, ExperimentConfig, read_sigma_csv, run_experiment,
    select_evidence, write_marginals,
)
from .io import FAMILIES, BenchmarkSpec, generate, load_network, save_network
from .network import reduce_evidence
from .samplers import METHODS, SamplerConfig, parse_init, parse_prune_mode, run_chain
from .pruning import STATE_CAP

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("prunesampling")


class _ConfigError(Exception):
    pass


def _add_network_args(p):
    src = p.add_argument_group("network")
    src.add_argument("--net", help="network file (.bif or native .json)")
    src.add_argument("--family", choices=FAMILIES, help="generated benchmark family")
    src.add_argument("--n", type=int, default=5, help="block-chain length (default: 5)")
    src.add_argument("--rows", type=int, default=3, help="grid rows (default: 3)")
    src.add_argument("--cols", type=int, default=3, help="grid columns (default: 3)")
    src.add_argument("--fraction", type=float, default=0.5,
                     help="grid fraction of deterministic columns (default: 0.5)")
    src.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")


def _add_evidence_args(p):
    ev = p.add_mutually_exclusive_group()
    ev.add_argument("--evidence-fraction", type=float, default=None,
                    help="observe a random fraction of the variables")
    ev.add_argument("--evidence", action="append", default=[], metavar="VAR=STATE",
                    help="explicit evidence (repeatable)")
    p.add_argument("--query", action="append", default=None, metavar="VAR",
                   help="query variable (repeatable; default: all non-evidence)")


def _add_chain_args(p):
    p.add_argument("--samples", type=int, default=25_000, help="samples per run (default: 25000)")
    p.add_argument("--burn-in", type=int, default=0, help="transitions discarded first (default: 0)")
    p.add_argument("--thin", type=int, default=1, help="keep every k-th transition (default: 1)")
    p.add_argument("--init", default="forward", help="forward | random | hybrid:p (default: forward)")
    p.add_argument("--prune-mode", default="exact", help="exact | bounded:size:budget (default: exact)")
    p.add_argument("--cap", type=int, default=STATE_CAP,
                   help=f"largest pruned space enumerated (default: {STATE_CAP})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prunesampling", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a benchmark network to a file")
    _add_network_args(p)
    p.add_argument("--out", required=True, help="output file (native JSON format)")

    p = sub.add_parser("exact", help="exact marginals to CSV")
    _add_network_args(p)
    _add_evidence_args(p)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sample", help="run one chain and write trace.csv")
    _add_network_args(p)
    _add_evidence_args(p)
    _add_chain_args(p)
    p.add_argument("--method", choices=METHODS, default="prune", help="sampler (default: prune)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("bench", help="full multi-run experiment")
    _add_network_args(p)
    _add_evidence_args(p)
    _add_chain_args(p)
    p.add_argument("--method", action="append", choices=METHODS, default=None,
                   help="sampler (repeatable; default: all three)")
    p.add_argument("--runs", type=int, default=100, help="chains per method (default: 100)")
    p.add_argument("--target", default=None, metavar="VAR=STATE",
                   help="marginal whose cross-run variance is fitted")
    p.add_argument("--trace-runs", type=int, default=None,
                   help="write trace rows for the first k runs only")
    p.add_argument("--timing-limit", type=int, default=TIMING_LIMIT,
                   help=f"skip timing above this many samples (default: {TIMING_LIMIT})")
    p.add_argument("--workers", type=int, default=1, help="concurrent runs (default: 1)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("roc", help="fit the convergence model to sigma.csv")
    p.add_argument("sigma", help="path to sigma.csv")
    p.add_argument("--t-min", type=int, default=10, help="first step used in the fit (default: 10)")
    p.add_argument("--target-sigma2", type=float, default=0.01,
                   help="variance target for samples-to-target (default: 0.01)")
    p.add_argument("--out", default=None, help="directory for roc.csv (default: print only)")
    return parser


# -- helpers -------------------------------------------------------------------


def _network_source(args):
    if (args.net is None) == (args.family is None):
        raise _ConfigError("give exactly one of --net or --family")
    if args.net is not None:
        return args.net
    return BenchmarkSpec(args.family, n=args.n, rows=args.rows, cols=args.cols,
                         fraction=args.fraction, seed=args.seed).validate()


def _load(args):
    src = _network_source(args)
    return generate(src) if isinstance(src, BenchmarkSpec) else load_network(src)


def _pairs(items, what):
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise _ConfigError(f"bad {what} {item!r}; expected VAR=STATE")
        out[key] = value
    return out


def _state_values(net, pairs):
    ev = {}
    for var, value in pairs.items():
        states = net.variables[net.index(var)].states
        ev[var] = value if value in states or not value.isdigit() else int(value)
    return net.assignment(ev)


def _evidence(net, args):
    if args.evidence:
        return _state_values(net, _pairs(args.evidence, "evidence"))
    if args.evidence_fraction is not None:
        return select_evidence(net, args.evidence_fraction, args.seed)
    return {}


def _check_chain_args(args):
    parse_init(args.init)
    parse_prune_mode(args.prune_mode)
    if args.samples < 1 or args.burn_in < 0 or args.thin < 1 or args.cap < 1:
        raise _ConfigError("need --samples >= 1, --burn-in >= 0, --thin >= 1 and --cap >= 1")


# -- subcommands ---------------------------------------------------------------


def cmd_gen(args):
    net = _load(args)
    save_network(net, args.out)
    print(f"wrote {net.name}: {net.n} variables, {net.n_labels} CPT entries -> {args.out}")


def cmd_exact(args):
    net = _load(args)
    evidence = _evidence(net, args)
    table = exact_marginals(net, evidence)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_marginals(table, out / "marginals.csv")
    print(f"wrote {out / 'marginals.csv'}")


def cmd_sample(args):
    _check_chain_args(args)
    net = _load(args)
    evidence = _evidence(net, args)
    if evidence:
        exact_check(net, evidence)
    reduced = reduce_evidence(net, evidence)
    query = tuple(args.query) if args.query else None
    cfg = SamplerConfig(method=args.method, samples=args.samples, burn_in=args.burn_in,
                        thinning=args.thin, init=args.init, seed=args.seed,
                        prune_mode=args.prune_mode, cap=args.cap, query=query)
    trace = run_chain(reduced, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "trace.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("method", "run", "t", "query_var", "value", "estimate"))
        for t in range(len(trace)):
            for q in trace.query:
                var = reduced.variables[q]
                w.writerow((args.method, 0, t + 1, var.name, var.states[int(trace.states[t, q])],
                            repr(float(trace.estimates[q][t, 0]))))
    print(f"wrote {path}")


def exact_check(net, evidence):
    """Reject zero-probability evidence when exact inference is tractable."""
    try:
        exact_marginals(net, evidence)
    except IntractableError:
        log.warning("evidence consistency not checked: exact inference intractable")


def cmd_bench(args):
    _check_chain_args(args)
    if args.runs < 1 or args.workers < 1:
        raise _ConfigError("need --runs >= 1 and --workers >= 1")
    source = _network_source(args)
    target = None
    if args.target is not None:
        target = tuple(_pairs([args.target], "target").items())[0]
    evidence = None
    if args.evidence:
        net = load_network(source) if not isinstance(source, BenchmarkSpec) else generate(source)
        evidence = _state_values(net, _pairs(args.evidence, "evidence"))
        source = net
    cfg = ExperimentConfig(
        network=source, methods=tuple(args.method or METHODS), runs=args.runs,
        samples=args.samples, seed=args.seed, evidence=evidence,
        evidence_fraction=args.evidence_fraction,
        query=tuple(args.query) if args.query else None, target=target, out=args.out,
        burn_in=args.burn_in, thinning=args.thin, init=args.init, prune_mode=args.prune_mode,
        cap=args.cap, workers=args.workers, trace_runs=args.trace_runs,
        timing_limit=args.timing_limit,
    )
    report = run_experiment(cfg)
    for method, rep in report.methods.items():
        ahd = "n/a" if rep.ahd is None else f"{rep.ahd[-1]:.4f}"
        alpha = "n/a" if rep.roc is None else f"{rep.roc.alpha:.4g}"
        print(f"{method:<11} AHD(T)={ahd}  alpha={alpha}  t_target={rep.t_target}")
    print(f"wrote CSV files to {args.out}")


def cmd_roc(args):
    series = read_sigma_csv(args.sigma)
    rows = []
    for method, sigma in series.items():
        fit = fit_roc(sigma, t_min=args.t_min)
        t_target = samples_to_target(fit.alpha, args.target_sigma2)
        rows.append((method, fit, t_target))
        print(f"{method:<11} alpha={fit.alpha:.6g} beta={fit.beta:.6g} delta={fit.delta:.2f} "
              f"t_target={t_target}")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "roc.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ROC_HEADER)
            for method, fit, t_target in rows:
                w.writerow((method, repr(fit.alpha), repr(fit.beta), repr(fit.delta),
                            repr(fit.residual), t_target, ""))


COMMANDS = {"gen": cmd_gen, "exact": cmd_exact, "sample": cmd_sample, "bench": cmd_bench,
            "roc": cmd_roc}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (CapExceededError, IntractableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NetworkFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (_ConfigError, ContractError, KeyError, PruneSamplingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
