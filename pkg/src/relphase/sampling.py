"""Seeded random fixtures: states, Hamiltonians, projectors, histories, partitions."""

from __future__ import annotations

import numpy as np

from .histories import FilterHistory, TemporalGrid
from .operators import Operator, ket_projector


def random_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, d: int, pure: bool = False) -> Operator:
    if pure:
        v = random_vector(rng, d)
        return Operator(np.outer(v, v.conj()), "density")
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = a @ a.conj().T
    return Operator(r / np.trace(r).real, "density")


def random_hamiltonian(rng: np.random.Generator, d: int, scale: float = 1.0) -> Operator:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return Operator(scale * (a + a.conj().T) / 2, "hermitian")


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_basis_projectors(rng: np.random.Generator, d: int) -> list[Operator]:
    u = random_unitary(rng, d)
    return [ket_projector(u[:, k]) for k in range(d)]


def random_projector(rng: np.random.Generator, d: int, rank: int | None = None) -> Operator:
    rank = rank if rank is not None else int(rng.integers(1, d))
    u = random_unitary(rng, d)[:, :rank]
    return Operator(u @ u.conj().T, "projector")


def random_history(rng: np.random.Generator, grid: TemporalGrid, d: int,
                   max_filters: int | None = None) -> FilterHistory:
    top = min(len(grid), max_filters if max_filters is not None else len(grid))
    k = int(rng.integers(0, top + 1))
    idx = sorted(rng.choice(len(grid), size=k, replace=False))
    return FilterHistory(grid, {int(i): random_projector(rng, d) for i in idx}, dim=d)


def with_partners(rng: np.random.Generator, hs: list[FilterHistory], d: int) -> list[FilterHistory]:
    """Append, for each nontrivial history, its complement at one random slot.

    The pair (h, h') is incompatible and operationally additive, so the
    additivity axioms have something to bite on.
    """
    out = list(hs)
    for h in hs:
        if not h.support:
            continue
        i = int(rng.choice(sorted(h.support)))
        comp = Operator(np.eye(d) - h.filters[i].matrix, "projector")
        f = dict(h.filters)
        f[i] = comp
        out.append(FilterHistory(h.grid, f))
    return out


def random_two_time_partition(rng: np.random.Generator, grid: TemporalGrid, d: int,
                              i1: int = 0, i2: int = 1) -> list[FilterHistory]:
    """Three disjoint, exhaustive histories from one split at i1 and one at i2.

    {P x Q, P x (1-Q), 1-P} with random rank-deficient P, Q.
    """
    p = random_projector(rng, d)
    q = random_projector(rng, d)
    pc = Operator(np.eye(d) - p.matrix, "projector")
    qc = Operator(np.eye(d) - q.matrix, "projector")
    if rng.random() < 0.5:
        return [FilterHistory(grid, {i1: p, i2: q}), FilterHistory(grid, {i1: p, i2: qc}),
                FilterHistory(grid, {i1: pc})]
    return [FilterHistory(grid, {i1: p, i2: q}), FilterHistory(grid, {i1: pc, i2: q}),
            FilterHistory(grid, {i2: qc})]
