"""Phase-space symbols of operators: Wigner, Q and P, single and multi-time."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..operators import Operator, RoleError, heisenberg_filter, role_violation
from .kernels import KernelFamily, build_kernels, solid_angle_factor
from .spaces import PhaseSpace


@dataclass(frozen=True, eq=False)
class PhaseSpaceFunction:
    """Values over nodes**n for the time stamps ``times`` (n may be 0 for a constant)."""

    space: PhaseSpace
    times: tuple[float, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        shape = (self.space.size,) * len(self.times)
        if v.shape != shape:
            raise ValueError(f"values have shape {v.shape}, expected {shape}")
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def to_csv(self, scale: float = 1.0) -> str:
        """One row per node tuple: coordinates per time slot, product weight, re, im."""
        sp = self.space
        cols = "q,p" if sp.kind == "qudit_torus" else "theta,phi"
        header = []
        for i in range(self.n):
            header += [f"{c}_{i}" for c in cols.split(",")]
        lines = [",".join(header + ["weight", "re", "im"])]
        for idx in np.ndindex(*self.values.shape):
            coords = []
            w = 1.0
            for k in idx:
                coords += [sp.nodes[k][0], sp.nodes[k][1]]
                w *= sp.weights[k]
            v = self.values[idx] * scale
            cells = [_fmt(c) for c in coords] + [_fmt(w), _fmt(v.real), _fmt(v.imag)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def grid_descriptor(self) -> dict:
        return {"space": self.space.describe(), "times": list(self.times),
                "shape": list(self.values.shape), "index_order": "time slot 0 slowest"}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _as_matrix(a) -> np.ndarray:
    return a.matrix if isinstance(a, Operator) else np.asarray(a, dtype=complex)


def symbol_values(k: KernelFamily, a) -> np.ndarray:
    m = _as_matrix(a)
    if m.shape != (k.dim, k.dim):
        raise ValueError(f"operator of shape {m.shape} does not match kernels of dim {k.dim}")
    return np.einsum("ij,kji->k", m, k.delta)


def wigner_symbol(k: KernelFamily, a, t: float = 0.0) -> PhaseSpaceFunction:
    """F_A(x) = Tr(A Delta(x))."""
    return PhaseSpaceFunction(k.space, (t,), symbol_values(k, a))


def symbol_at(k: KernelFamily, a, points) -> np.ndarray:
    """Symbol values at arbitrary points, off the quadrature grid."""
    return np.einsum("ij,kji->k", _as_matrix(a), k.delta_at(points))


def reconstruct(k: KernelFamily, f) -> np.ndarray:
    """Inverse map: A = c * sum_k w_k F(k) Delta(k)."""
    vals = f.values if isinstance(f, PhaseSpaceFunction) else np.asarray(f)
    return np.einsum("k,kij->ij", k.weighted() * vals, k.delta)


def _check_in_image(k: KernelFamily, f: PhaseSpaceFunction, tol: float) -> np.ndarray:
    if f.n != 1 or f.space is not k.space:
        raise ValueError("expected a single-time symbol on the kernel's space")
    a = reconstruct(k, f)
    resid = float(np.max(np.abs(symbol_values(k, a) - f.values)))
    if resid > tol * max(1.0, float(np.max(np.abs(f.values)))):
        raise ValueError(f"function is not the symbol of an operator (round-trip residual {resid:.3e})")
    return a


# -- multi-time ---------------------------------------------------------------

def multitime_symbol(k: KernelFamily, ops, times: Sequence[float]) -> PhaseSpaceFunction:
    """Symbol over nodes**n of a product list ``ops`` or of one operator on the n-fold space.

    Product operators give the outer product of single-time symbols; an
    operator on the tensor space is contracted against Delta x ... x Delta.
    """
    n = len(times)
    d = k.dim
    if isinstance(ops, (Operator, np.ndarray)):
        big = _as_matrix(ops)
        if big.shape != (d ** n, d ** n):
            raise ValueError(f"operator shape {big.shape} does not match {n} slots of dim {d}")
        return PhaseSpaceFunction(k.space, tuple(times), _contract_tensor(k, big, n))
    ops = list(ops)
    if len(ops) != n:
        raise ValueError(f"{len(ops)} operators for {n} time stamps")
    vals = np.ones((), dtype=complex)
    for op in ops:
        vals = np.multiply.outer(vals, symbol_values(k, op))
    return PhaseSpaceFunction(k.space, tuple(times), vals)


def _contract_tensor(k: KernelFamily, big: np.ndarray, n: int) -> np.ndarray:
    d = k.dim
    t = big.reshape((d,) * (2 * n))
    # contract output index i_s and input index j_s with Delta_{j_s i_s}, slot by slot
    for s in range(n):
        # axes of t now: node axes for slots < s, then remaining (i_s..i_n, j_s..j_n)
        rem = n - s
        t = np.moveaxis(t, (s, s + rem), (-2, -1))
        t = np.einsum("...ij,kji->...k", t, k.delta)
        t = np.moveaxis(t, -1, s)
    return t


def history_symbol(k: KernelFamily, history) -> PhaseSpaceFunction:
    """Multi-time symbol of a filter history over its temporal support."""
    ops = [history.filters[i] for i in sorted(history.filters)]
    return multitime_symbol(k, ops, history.support_times)


# -- P and Q --------------------------------------------------------------------

def _sphere_family(k, kind: str) -> KernelFamily:
    space = k.space if isinstance(k, KernelFamily) else k
    if space.kind != "sphere":
        raise NotImplementedError("P and Q symbols are supported on the sphere only")
    return build_kernels(space, kind)


def q_symbol(k, a) -> PhaseSpaceFunction:
    """Q_A(n) = <n|A|n> over spin coherent states."""
    return wigner_symbol(_sphere_family(k, "q"), a)


def p_symbol(k, a) -> PhaseSpaceFunction:
    """P_A with A = (2j+1)/(4 pi) * integral P_A(n) |n><n| dn."""
    return wigner_symbol(_sphere_family(k, "p"), a)


# -- filters, sharpness ---------------------------------------------------------

NEG_TOL = 1e-12

@dataclass
class SharpnessReport:
    minimum: float
    maximum: float
    negativity_fraction: float
    l2_distance: float
    threshold: float
    idempotency_defect: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def weighted_median(x: np.ndarray, w: np.ndarray) -> float:
    order = np.argsort(x, kind="stable")
    cw = np.cumsum(w[order])
    return float(x[order][np.searchsorted(cw, 0.5 * cw[-1])])


def sharpness_report(k: KernelFamily, p: Operator) -> SharpnessReport:
    """How far the symbol of projector ``p`` is from a characteristic function."""
    why = role_violation(p.matrix, "projector")
    if why is not None:
        raise RoleError("projector", why)
    f = symbol_values(k, p).real
    w = k.space.weights
    cw = k.weighted()
    neg = float(w[f < -NEG_TOL].sum() / w.sum())
    level = weighted_median(f, w)
    if np.all(f >= level - 1e-12) and np.all(f <= level + 1e-12):
        chi = np.full_like(f, 1.0 if level > 0.5 else 0.0)
    else:
        chi = (f > level).astype(float)
    l2 = float(np.sqrt(np.sum(cw * (f - chi) ** 2)))
    return SharpnessReport(float(f.min()), float(f.max()), neg, l2, level,
                           float(np.max(np.abs(f * f - f))))


def classical_filter(space: PhaseSpace, region: np.ndarray, t: float = 0.0) -> PhaseSpaceFunction:
    """Characteristic function of a node subset (a sharp classical filter)."""
    region = np.asarray(region, dtype=bool)
    if region.shape != (space.size,):
        raise ValueError("region mask must have one entry per node")
    return PhaseSpaceFunction(space, (t,), region.astype(complex))


def hemisphere(space: PhaseSpace, axis=(0.0, 0.0, 1.0), t: float = 0.0) -> PhaseSpaceFunction:
    ax = np.asarray(axis, dtype=float)
    return classical_filter(space, space.unit_vectors() @ ax > 0, t)


# -- dynamics ---------------------------------------------------------------------

def moyal_bracket(k: KernelFamily, f: PhaseSpaceFunction, g: PhaseSpaceFunction,
                  tol: float = 1e-8) -> PhaseSpaceFunction:
    """Symbol of (A B - B A)/i, the phase-space image of the commutator."""
    a = _check_in_image(k, f, tol)
    b = _check_in_image(k, g, tol)
    return PhaseSpaceFunction(k.space, f.times, symbol_values(k, (a @ b - b @ a) / 1j))


class FlowCheckError(ArithmeticError):
    pass


@dataclass
class FlowResult:
    symbol: PhaseSpaceFunction
    derivative: np.ndarray
    bracket: np.ndarray
    fd_residual: float
    fd_tolerance: float


def heisenberg_flow(k: KernelFamily, model, a: Operator, t: float, dt: float = 1e-5) -> FlowResult:
    """Symbol of e^{iHt} A e^{-iHt}, with a forward-difference check against {{A(t), H}}."""
    if not a.is_hermitian:
        raise RoleError("hermitian", "flow needs a hermitian observable")
    h = model.hamiltonian
    at = heisenberg_filter(a, h, t)
    adt = heisenberg_filter(a, h, t + dt)
    f0 = wigner_symbol(k, at, t)
    deriv = (symbol_values(k, adt) - f0.values) / dt
    br = moyal_bracket(k, f0, wigner_symbol(k, h, t)).values
    resid = float(np.max(np.abs(deriv - br)))
    hn = np.linalg.norm(h.matrix, 2)
    an = np.linalg.norm(a.matrix, 2)
    kn = max(np.abs(np.linalg.eigvalsh(x)).sum() for x in k.delta)
    tol = 2 * hn ** 2 * an * kn * dt + 1e-15 * kn * an / dt + 1e-14
    if resid > tol:
        raise FlowCheckError(f"finite-difference derivative off by {resid:.3e} (tolerance {tol:.3e})")
    return FlowResult(f0, deriv, br, resid, tol)


def to_solid_angle_normalization(f: PhaseSpaceFunction) -> PhaseSpaceFunction:
    return PhaseSpaceFunction(f.space, f.times, f.values * solid_angle_factor(f.space))


def grid_json(f: PhaseSpaceFunction) -> str:
    return json.dumps(f.grid_descriptor(), sort_keys=True)
