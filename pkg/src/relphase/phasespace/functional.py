"""Multi-time kernel W_{n,m} and the phase-space coherence functional.

    W[x_1..x_n | y_1..y_m] = Tr(C_n(x)^dag rho C_m(y)),
    C_n(x) = D_1(x_1) ... D_n(x_n),  D_i(x) = e^{iHt_i} Delta(x) e^{-iHt_i}

and for functions A over nodes**n, B over nodes**m

    d(A, B) = c^(n+m) sum w(x) w(y) A(x) B(y) W[x | y].

With A, B the multi-time Wigner symbols of two filter histories this
reproduces the Hilbert-space coherence functional exactly on the torus and
to quadrature exactness on the sphere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import _accel
from ..operators import evolution
from .kernels import KernelFamily
from .spaces import PhaseSpace
from .symbols import PhaseSpaceFunction, history_symbol

W_MAX_ENTRIES = 2 ** 24


class WCapExceeded(MemoryError):
    pass


@dataclass(frozen=True, eq=False)
class MultiTimeSymbol:
    space: PhaseSpace
    times_fwd: tuple[float, ...]
    times_bwd: tuple[float, ...]
    values: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.times_fwd)

    @property
    def m(self) -> int:
        return len(self.times_bwd)

    def matrix(self) -> np.ndarray:
        """W reshaped to (nodes**n, nodes**m)."""
        N = self.space.size
        return self.values.reshape(N ** self.n, N ** self.m)

    def sidecar(self) -> dict:
        return {
            "space": self.space.describe(),
            "times_fwd": list(self.times_fwd),
            "times_bwd": list(self.times_bwd),
            "shape": list(self.values.shape),
            "dtype": "<f8 pairs (re, im)",
            "index_order": "row-major; forward slots first, then backward slots",
        }

    def write(self, stem) -> tuple[str, str]:
        """Write ``stem.bin`` (little-endian float64 re/im pairs) and ``stem.json``."""
        stem = str(stem)
        self.values.astype("<c16").tofile(stem + ".bin")
        with open(stem + ".json", "w", encoding="utf-8") as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return stem + ".bin", stem + ".json"

    @classmethod
    def read(cls, stem, space: PhaseSpace) -> "MultiTimeSymbol":
        stem = str(stem)
        with open(stem + ".json", encoding="utf-8") as fh:
            meta = json.load(fh)
        vals = np.fromfile(stem + ".bin", dtype="<c16").reshape(meta["shape"])
        return cls(space, tuple(meta["times_fwd"]), tuple(meta["times_bwd"]), vals)


def rotated_kernels(model, k: KernelFamily, t: float) -> np.ndarray:
    u = evolution(model.hamiltonian, t)
    return np.ascontiguousarray(u.conj().T[None] @ k.delta @ u[None])


def build_W(model, k: KernelFamily, times_fwd: Sequence[float], times_bwd: Sequence[float],
            max_entries: int = W_MAX_ENTRIES) -> MultiTimeSymbol:
    if model.dim != k.dim:
        raise ValueError(f"model dim {model.dim} differs from kernel dim {k.dim}")
    n, m = len(times_fwd), len(times_bwd)
    N, d = k.space.size, k.dim
    size = N ** (n + m)
    if size > max_entries:
        raise WCapExceeded(f"W array would hold {size} entries (cap {max_entries})")
    empty = np.zeros((0, N, d, d), dtype=complex)
    left = np.stack([rotated_kernels(model, k, t) for t in times_fwd]) if n else empty
    right = np.stack([rotated_kernels(model, k, t) for t in times_bwd]) if m else empty
    rho = np.ascontiguousarray(model.rho.matrix, dtype=complex)
    flat = _accel.fill_w(left, rho, right)
    return MultiTimeSymbol(k.space, tuple(times_fwd), tuple(times_bwd),
                           np.asarray(flat).reshape((N,) * (n + m)))


def phase_space_coherence(k: KernelFamily, w: MultiTimeSymbol, a: PhaseSpaceFunction,
                          b: PhaseSpaceFunction) -> complex:
    if a.n != w.n or b.n != w.m or a.space is not w.space or b.space is not w.space:
        raise ValueError("function shapes do not match the W array")
    cw = k.weighted()

    def weigh(f: PhaseSpaceFunction) -> np.ndarray:
        out = f.values
        for ax in range(f.n):
            shape = [1] * f.n
            shape[ax] = -1
            out = out * cw.reshape(shape)
        return np.asarray(out).reshape(-1)

    return complex(weigh(a) @ w.matrix() @ weigh(b))


def reproduce(model, k: KernelFamily, a, b) -> complex:
    """Phase-space value of d(a, b) for two filter histories."""
    fa, fb = history_symbol(k, a), history_symbol(k, b)
    w = build_W(model, k, fa.times, fb.times)
    return phase_space_coherence(k, w, fa, fb)
