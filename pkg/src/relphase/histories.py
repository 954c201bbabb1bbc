"""Filter histories on a finite temporal grid.

A history assigns a filter (projector or effect) to some grid indices; the
remaining indices carry the trivial filter, which is never stored.  Filters
are kept in the Schroedinger picture and rotated to the Heisenberg picture
only when a class operator is formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .operators import ROLE_TOL, Operator, heisenberg_filter

FILTER_ROLES = ("projector", "effect")


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TemporalGrid:
    times: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        if not t:
            raise ValueError("temporal grid must be non-empty")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError(f"grid times must be strictly increasing: {t}")
        object.__setattr__(self, "times", t)

    def __len__(self) -> int:
        return len(self.times)

    def index(self, t: float) -> int:
        for i, s in enumerate(self.times):
            if abs(s - t) <= 1e-12 * max(1.0, abs(t)):
                return i
        raise KeyError(f"time {t} not on grid {self.times}")


class FilterHistory:
    """Time-stamped filters on a :class:`TemporalGrid`.

    ``assignments`` maps grid index to an Operator with role projector or
    effect.  Instances are immutable.
    """

    __slots__ = ("grid", "_filters", "dim")

    def __init__(self, grid: TemporalGrid, assignments: Mapping[int, Operator] | None = None,
                 dim: int | None = None):
        filters = dict(sorted((assignments or {}).items()))
        dims = {op.dim for op in filters.values()}
        if dim is not None:
            dims.add(dim)
        if len(dims) > 1:
            raise ValueError(f"filters of mixed dimension {sorted(dims)}")
        for i, op in filters.items():
            if not 0 <= i < len(grid):
                raise IndexError(f"grid index {i} outside grid of length {len(grid)}")
            if op.role not in FILTER_ROLES:
                raise ValueError(f"filter at index {i} has role {op.role!r}; need projector or effect")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "_filters", MappingProxyType(filters))
        object.__setattr__(self, "dim", dims.pop() if dims else None)

    def __setattr__(self, name, value):
        raise AttributeError("FilterHistory is immutable")

    @classmethod
    def at_times(cls, grid: TemporalGrid, by_time: Mapping[float, Operator]) -> "FilterHistory":
        return cls(grid, {grid.index(t): op for t, op in by_time.items()})

    @classmethod
    def trivial(cls, grid: TemporalGrid, dim: int | None = None) -> "FilterHistory":
        return cls(grid, {}, dim=dim)

    @classmethod
    def opaque(cls, grid: TemporalGrid, dim: int, index: int = 0) -> "FilterHistory":
        return cls(grid, {index: Operator(np.zeros((dim, dim)), "projector")})

    @property
    def filters(self) -> Mapping[int, Operator]:
        return self._filters

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self._filters)

    @property
    def support_times(self) -> tuple[float, ...]:
        return tuple(self.grid.times[i] for i in self._filters)

    @property
    def is_projective(self) -> bool:
        return all(op.role == "projector" for op in self._filters.values())

    @property
    def is_opaque(self) -> bool:
        return any(np.max(np.abs(op.matrix)) <= ROLE_TOL for op in self._filters.values())

    def filter_at(self, i: int, dim: int | None = None) -> np.ndarray:
        if i in self._filters:
            return self._filters[i].matrix
        d = dim or self.dim
        if d is None:
            raise ValueError("trivial filter of unknown dimension")
        return np.eye(d)

    def same_as(self, other: "FilterHistory", tol: float = ROLE_TOL) -> bool:
        if self.grid != other.grid or self.support != other.support:
            return False
        return all(self._filters[i].allclose(other._filters[i], tol) for i in self.support)

    def to_json(self) -> dict:
        return {
            "grid": list(self.grid.times),
            "filters": {str(i): op.to_json() for i, op in self._filters.items()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FilterHistory":
        grid = TemporalGrid(tuple(obj["grid"]))
        return cls(grid, {int(k): Operator.from_json(v) for k, v in obj.get("filters", {}).items()})

    def __repr__(self) -> str:
        parts = ", ".join(f"t{i}={self.grid.times[i]:g}:{op.role}" for i, op in self._filters.items())
        return f"FilterHistory({parts or 'trivial'})"


def _same_grid(a: FilterHistory, b: FilterHistory) -> int | None:
    if a.grid != b.grid:
        raise GridMismatch(f"histories live on different grids: {a.grid.times} vs {b.grid.times}")
    if a.dim is not None and b.dim is not None and a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} vs {b.dim}")
    return a.dim or b.dim


def _is_zero(m: np.ndarray, tol: float = ROLE_TOL) -> bool:
    return bool(np.max(np.abs(m)) <= tol)


def finer_than(a: FilterHistory, b: FilterHistory, tol: float = ROLE_TOL) -> bool:
    """a <= b: at every time of the union support, a_t b_t = a_t."""
    dim = _same_grid(a, b)
    for i in a.support | b.support:
        pa, pb = a.filter_at(i, dim), b.filter_at(i, dim)
        if not _is_zero(pa @ pb - pa, tol):
            return False
    return True


def incompatible(a: FilterHistory, b: FilterHistory, tol: float = ROLE_TOL) -> bool:
    """True iff some common time carries mutually annihilating filters."""
    _same_grid(a, b)
    return any(_is_zero(a.filters[i].matrix @ b.filters[i].matrix, tol)
               for i in a.support & b.support)


def disjoint(a: FilterHistory, b: FilterHistory, tol: float = ROLE_TOL) -> bool:
    _same_grid(a, b)
    return incompatible(a, b, tol) or not (a.support & b.support)


def operationally_additive(a: FilterHistory, b: FilterHistory,
                           tol: float = ROLE_TOL) -> FilterHistory | None:
    """Return a + b when it is itself a filter history, else None.

    Two cases factorise: histories that agree everywhere except at one
    time where their filters are orthogonal (the filters are summed there),
    and histories with disjoint temporal supports (concatenated).
    """
    dim = _same_grid(a, b)
    if not a.support & b.support:
        return FilterHistory(a.grid, {**a.filters, **b.filters})
    if not incompatible(a, b, tol):
        raise ValueError("operational additivity needs disjoint histories")
    differing = []
    for i in a.support | b.support:
        pa, pb = a.filter_at(i, dim), b.filter_at(i, dim)
        if not _is_zero(pa - pb, tol):
            differing.append(i)
    if len(differing) != 1:
        return None
    i = differing[0]
    pa, pb = a.filter_at(i, dim), b.filter_at(i, dim)
    if not (_is_zero(pa @ pb, tol) and _is_zero(pb @ pa, tol)):
        return None
    role = "projector" if a.filters[i].role == b.filters[i].role == "projector" else "effect"
    merged = dict(a.filters)
    merged[i] = Operator(pa + pb, role)
    return FilterHistory(a.grid, merged)


def meet(a: FilterHistory, b: FilterHistory, tol: float = ROLE_TOL) -> FilterHistory | None:
    """The coarsest history finer than both, or None when it does not exist.

    When some common-time product vanishes the result is the opaque history
    (check ``result.is_opaque``); it is still a legitimate element of the
    filter algebra.  Only projector histories have a meet.
    """
    dim = _same_grid(a, b)
    if not (a.is_projective and b.is_projective):
        raise ValueError("meet is only defined for projector histories")
    out = dict(a.filters)
    for i, q in b.filters.items():
        if i not in out:
            out[i] = q
            continue
        p = out[i].matrix
        pq = p @ q.matrix
        if not _is_zero(pq - q.matrix @ p, tol):
            return None
        if not _is_zero(pq @ pq - pq, tol):
            return None
        out[i] = Operator(pq, "projector", validate=False)
    return FilterHistory(a.grid, out, dim=dim)


def class_operator(a: FilterHistory, h: Operator) -> np.ndarray:
    """C_a = prod_i e^{iHt_i} P_i e^{-iHt_i}, earliest time leftmost."""
    if a.dim is not None and a.dim != h.dim:
        raise ValueError(f"filters have dim {a.dim} but the Hamiltonian has dim {h.dim}")
    c = np.eye(h.dim, dtype=complex)
    for i, p in a.filters.items():
        c = c @ heisenberg_filter(p, h, a.grid.times[i]).matrix
    return c


class HistoryProposition:
    """A sum of pairwise disjoint filter histories (an inhomogeneous proposition)."""

    def __init__(self, terms: Iterable[FilterHistory], tol: float = ROLE_TOL):
        terms = tuple(terms)
        if not terms:
            raise ValueError("a proposition needs at least one term")
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                if not disjoint(terms[i], terms[j], tol):
                    raise ValueError(f"terms {i} and {j} are not disjoint")
        self.terms = terms
        self.grid = terms[0].grid
        self.dim = next((t.dim for t in terms if t.dim is not None), None)

    def class_operator(self, h: Operator) -> np.ndarray:
        return sum(class_operator(t, h) for t in self.terms)

    def __repr__(self) -> str:
        return " + ".join(map(repr, self.terms))
