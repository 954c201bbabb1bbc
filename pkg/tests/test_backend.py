from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from relphase import _accel, _wfill_py
from relphase.coherence import SystemModel
from relphase.histories import TemporalGrid
from relphase.phasespace import build_W, build_kernels, qudit_torus, sphere
from relphase.phasespace.functional import rotated_kernels
from relphase.sampling import random_density, random_hamiltonian

compiled = pytest.importorskip("relphase._wfill", reason="compiled extension not built")


def _inputs(rng, space, n, m):
    k = build_kernels(space)
    d = k.dim
    model = SystemModel(random_density(rng, d), random_hamiltonian(rng, d), TemporalGrid((0.0,)))
    ts = rng.uniform(0, 2, size=n + m)
    empty = np.zeros((0, space.size, d, d), dtype=complex)
    left = np.stack([rotated_kernels(model, k, t) for t in ts[:n]]) if n else empty
    right = np.stack([rotated_kernels(model, k, t) for t in ts[n:]]) if m else empty
    return left, np.ascontiguousarray(model.rho.matrix), right


@pytest.mark.parametrize("space", [sphere("1/2"), sphere(1), qudit_torus(3)], ids=str)
@pytest.mark.parametrize("n, m", [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)])
def test_compiled_matches_numpy(space, n, m, rng):
    left, rho, right = _inputs(rng, space, n, m)
    a = np.asarray(compiled.fill_w(left, rho, right))
    b = _wfill_py.fill_w(left, rho, right)
    assert a.shape == b.shape == (space.size ** (n + m),)
    assert np.max(np.abs(a - b), initial=0.0) < 1e-13


def test_right_chains_match(rng):
    _, _, right = _inputs(rng, sphere(1), 0, 3)
    assert np.allclose(np.asarray(compiled.right_chains(right)), _wfill_py.right_chains(right), atol=1e-13)


def test_numpy_fill_against_loops(rng):
    space = sphere("1/2")
    left, rho, right = _inputs(rng, space, 2, 1)
    got = _wfill_py.fill_w(left, rho, right).reshape((space.size,) * 3)
    for x1, x2, y in [(0, 0, 0), (1, 4, 7), (14, 3, 9)]:
        c = left[0, x1] @ left[1, x2]
        want = np.trace(c.conj().T @ rho @ right[0, y])
        assert abs(got[x1, x2, y] - want) < 1e-13


def test_default_backend_is_compiled():
    if os.environ.get("RELPHASE_PURE"):
        pytest.skip("pure backend forced by environment")
    assert _accel.BACKEND == "cython"


def test_pure_env_forces_numpy():
    env = dict(os.environ, RELPHASE_PURE="1")
    code = "from relphase import _accel; print(_accel.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_build_W_same_on_both_backends(rng, monkeypatch):
    k = build_kernels(qudit_torus(3))
    model = SystemModel(random_density(rng, 3), random_hamiltonian(rng, 3), TemporalGrid((0.0,)))
    a = build_W(model, k, [0.1, 0.5], [0.9]).values
    monkeypatch.setattr(_accel, "fill_w", _wfill_py.fill_w)
    b = build_W(model, k, [0.1, 0.5], [0.9]).values
    assert np.max(np.abs(a - b)) < 1e-13
