"""Pure numpy twin of the compiled ``_wfill`` kernels (same signatures)."""

from __future__ import annotations

import numpy as np


def right_chains(right: np.ndarray) -> np.ndarray:
    m, d = right.shape[0], right.shape[-1]
    out = np.eye(d, dtype=complex)[None]
    for i in range(m):
        out = np.einsum("pab,ybc->pyac", out, right[i]).reshape(-1, d, d)
    return out


def fill_w(left: np.ndarray, rho: np.ndarray, right: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    acc = np.asarray(rho, dtype=complex)[None]
    for i in range(left.shape[0]):
        acc = np.einsum("xab,pbc->pxac", left[i], acc).reshape(-1, d, d)
    rch = right_chains(right)
    return np.einsum("aij,bji->ab", acc, rch).reshape(-1)
