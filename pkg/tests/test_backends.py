import hashlib
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from prunesampling import kernels
from prunesampling._backend import HAVE_NUMBA
from prunesampling.kernels import _numpy

from _nets import block_chain, bp, fig1, grid, random_net

SCRIPT = r"""
import hashlib, json, sys
sys.path.insert(0, {tests!r})
import numpy as np
from prunesampling import SamplerConfig, run_chain, kernels
from _nets import block_chain, bp, fig1, grid
out = {{"backend": kernels.BACKEND}}
for name, net in [("fig1", fig1()), ("bp", bp()), ("block4", block_chain(4)),
                  ("grid", grid(3, 3, 0.5, 2))]:
    for method in ("prune", "gibbs", "metropolis"):
        tr = run_chain(net, SamplerConfig(method, samples=3000, seed=7), run=1)
        h = hashlib.sha256(tr.states.tobytes())
        for q in tr.query:
            h.update(tr.estimates[q].tobytes())
        out[name + "/" + method] = h.hexdigest()
print(json.dumps(out))
"""


def run_backend(backend):
    env = dict(os.environ, PRUNESAMPLING_BACKEND=backend)
    code = SCRIPT.format(tests=os.path.dirname(__file__))
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         timeout=600)
    assert res.returncode == 0, res.stderr
    return json.loads(res.stdout.strip().splitlines()[-1])


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_backends_produce_identical_chains():
    a = run_backend("numba")
    b = run_backend("numpy")
    assert a.pop("backend") == "numba"
    assert b.pop("backend") == "numpy"
    assert a == b


def test_unknown_backend_is_rejected():
    env = dict(os.environ, PRUNESAMPLING_BACKEND="fortran")
    res = subprocess.run([sys.executable, "-c", "import prunesampling"], env=env,
                         capture_output=True, text=True)
    assert res.returncode != 0
    assert "PRUNESAMPLING_BACKEND" in res.stderr


needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@needs_numba
@pytest.mark.parametrize("seed", range(10))
def test_enumeration_kernels_agree(seed):
    from prunesampling.kernels import _numba

    r = np.random.default_rng(seed)
    net = random_net(r, int(r.integers(2, 9)), card=3, zero_prob=0.3)
    f = net.flat
    retained = (r.random(net.n_labels) < 0.7) & (f.values > 0)
    a, ok_a = _numpy.enumerate_states(f, retained, 10**6)
    b, ok_b = _numba.enumerate_states(f.card, f.offset, f.par_ptr, f.par_idx, f.par_stride,
                                      retained, 10**6)
    assert ok_a and ok_b
    np.testing.assert_array_equal(a, b)
    _, ok_a = _numpy.enumerate_states(f, retained, 1)
    _, ok_b = _numba.enumerate_states(f.card, f.offset, f.par_ptr, f.par_idx, f.par_stride,
                                      retained, 1)
    assert ok_a == ok_b


@needs_numba
@pytest.mark.parametrize("make", [fig1, bp, lambda: grid(2, 3, 0.3, 4)], ids=["fig1", "bp", "grid"])
def test_blanket_kernels_agree(make):
    from prunesampling.kernels import _numba

    net = make()
    f = net.flat
    x = np.zeros(net.n, dtype=np.int64)
    for i in range(net.n):
        a = _numpy.blanket_weights(f, x, i)
        b = _numba.blanket_weights(f.card, f.offset, f.par_ptr, f.par_idx, f.par_stride,
                                   f.ch_ptr, f.ch_idx, f.ch_stride, f.values, x, i)
        np.testing.assert_array_equal(a, b)


def test_uniforms_per_step():
    f = bp().flat
    assert kernels.uniforms_per_step("prune", f) == 21
    assert kernels.uniforms_per_step("gibbs", f) == 5
    assert kernels.uniforms_per_step("metropolis", f) == 10
