#!/usr/bin/env python3
"""Compare the numba and numpy kernel backends on the chain samplers.

The backend is fixed at import time, so each backend is timed in its own
subprocess. Each child warms up once (JIT compilation is not counted), then
times ``run_chain`` and reports seconds plus a hash of the state trace so the
two backends can be checked for identical output.

Usage::

    python benchmarks/bench_backends.py --samples 5000 --repeat 3
"""
import argparse
import hashlib
import json
import os
import subprocess
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

NETWORKS = {
    "bloodpressure": {"family": "bloodpressure"},
    "block-chain-5": {"family": "block-chain", "n": 5},
    "grid-5x5": {"family": "grid", "rows": 5, "cols": 5, "fraction": 0.5, "seed": 0},
    "alarm": {"path": "tests/data/alarm.bif"},
}
METHODS = ("prune", "gibbs", "metropolis")


def child(net_key, method, samples, repeat):
    """Run inside a subprocess: time one (network, method) pair."""
    from prunesampling import BACKEND, BenchmarkSpec, SamplerConfig, generate, load_network, run_chain

    spec = NETWORKS[net_key]
    if "path" in spec:
        net = load_network(ROOT / spec["path"])
    else:
        net = generate(BenchmarkSpec(**spec))
    run_chain(net, SamplerConfig(method, samples=10, seed=1))
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = run_chain(net, SamplerConfig(method, samples=samples, seed=0))
        times.append(time.perf_counter() - t0)
    digest = hashlib.sha256(trace.states.tobytes()).hexdigest()[:12]
    print(json.dumps({"backend": BACKEND, "seconds": min(times), "hash": digest}))


def measure(backend, net_key, method, samples, repeat):
    env = dict(os.environ, PRUNESAMPLING_BACKEND=backend)
    cmd = [sys.executable, __file__, "--child", net_key, method, "--samples", str(samples),
           "--repeat", str(repeat)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=5000, help="chain length per timing")
    parser.add_argument("--repeat", type=int, default=3, help="timings per cell; best is kept")
    parser.add_argument("--net", action="append", choices=sorted(NETWORKS),
                        help="network to time (repeatable; default all)")
    parser.add_argument("--method", action="append", choices=METHODS,
                        help="sampler to time (repeatable; default all)")
    parser.add_argument("--child", nargs=2, metavar=("NET", "METHOD"), help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.child:
        child(args.child[0], args.child[1], args.samples, args.repeat)
        return 0

    print(f"samples={args.samples}, best of {args.repeat}")
    print(f"{'network':<15} {'method':<11} {'numpy (s)':>10} {'numba (s)':>10} {'speedup':>8}  same")
    print("-" * 64)
    for net_key in args.net or NETWORKS:
        for method in args.method or METHODS:
            npy = measure("numpy", net_key, method, args.samples, args.repeat)
            nba = measure("numba", net_key, method, args.samples, args.repeat)
            same = "yes" if npy["hash"] == nba["hash"] else "NO"
            speedup = npy["seconds"] / nba["seconds"]
            print(f"{net_key:<15} {method:<11} {npy['seconds']:>10.3f} {nba['seconds']:>10.3f} "
                  f"{speedup:>7.1f}x  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
