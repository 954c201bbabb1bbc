"""Coherence functional d(a, b) and the analyses built on it.

Convention: with C_a the time-ordered class operator (earliest filter
leftmost),

    d(a, b) = Tr(C_a^dag rho C_b).

The diagonal d(a, a) = |C_a^dag psi|^2 is the intensity of the beam that
passed the filters of ``a`` in time order; off-diagonal values carry the
relative phase.  Histories and propositions (sums of disjoint histories)
are accepted wherever a history is.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .histories import (
    FilterHistory,
    HistoryProposition,
    TemporalGrid,
    class_operator,
    disjoint,
    incompatible,
    meet,
    operationally_additive,
)
from .operators import (
    ROLE_TOL,
    ObservableSpec,
    Operator,
    RoleError,
    heisenberg_filter,
    role_violation,
)

TOL_DIV = 1e-12

History = Union[FilterHistory, HistoryProposition]


class IncompatibleEvidence(ValueError):
    pass


class DivisionGuard(ZeroDivisionError):
    pass


@dataclass(frozen=True, eq=False)
class SystemModel:
    rho: Operator
    hamiltonian: Operator
    grid: TemporalGrid
    strict: bool = True

    def __post_init__(self):
        if self.rho.dim != self.hamiltonian.dim:
            raise ValueError(f"rho has dim {self.rho.dim}, H has dim {self.hamiltonian.dim}")
        if self.strict:
            for op, role in ((self.rho, "density"), (self.hamiltonian, "hermitian")):
                why = role_violation(op.matrix, role)
                if why is not None:
                    raise RoleError(role, why)

    @property
    def dim(self) -> int:
        return self.rho.dim

    def trivial(self) -> FilterHistory:
        return FilterHistory.trivial(self.grid, self.dim)

    def class_op(self, x: History) -> np.ndarray:
        if x.grid != self.grid:
            raise ValueError("history grid differs from the model grid")
        if x.dim is not None and x.dim != self.dim:
            raise ValueError(f"history has dim {x.dim}, model has dim {self.dim}")
        if isinstance(x, HistoryProposition):
            return x.class_operator(self.hamiltonian)
        return class_operator(x, self.hamiltonian)


@dataclass(frozen=True)
class CoherenceValue:
    value: complex
    intensity_a: float
    intensity_b: float

    @property
    def r(self) -> float:
        return abs(self.value)

    @property
    def theta(self) -> float:
        return cmath.phase(self.value)


@dataclass(frozen=True)
class CorrelationTensor:
    orders: tuple[int, int]
    times: tuple[tuple[float, ...], tuple[float, ...]]
    value: complex


def functional(rho: np.ndarray, ca: np.ndarray, cb: np.ndarray) -> complex:
    return complex(np.trace(ca.conj().T @ rho @ cb))


def value(model: SystemModel, a: History, b: History) -> complex:
    """Bare complex d(a, b)."""
    return functional(model.rho.matrix, model.class_op(a), model.class_op(b))


def coherence(model: SystemModel, a: History, b: History) -> CoherenceValue:
    rho = model.rho.matrix
    ca, cb = model.class_op(a), model.class_op(b)
    return CoherenceValue(
        functional(rho, ca, cb),
        functional(rho, ca, ca).real,
        functional(rho, cb, cb).real,
    )


def coherence_matrix(model: SystemModel, histories: Sequence[History]) -> np.ndarray:
    """D[i, j] = d(h_i, h_j) for a list of histories, in one contraction."""
    cs = np.stack([model.class_op(h) for h in histories])
    rc = np.einsum("jk,nkl->njl", model.rho.matrix, cs)
    n = len(histories)
    return cs.reshape(n, -1).conj() @ rc.reshape(n, -1).T


def interference(model: SystemModel, a: FilterHistory, b: FilterHistory) -> float:
    """2 Re d(a, b) for disjoint a, b."""
    if not disjoint(a, b):
        raise ValueError("interference is defined for disjoint histories")
    return 2 * value(model, a, b).real


def additivity_gap(model: SystemModel, partition: ObservableSpec, q: Operator,
                   t1: float, t2: float) -> float:
    """sum_i p(P_i, t1; Q, t2) - p(Q, t2) for a two-outcome partition at t1."""
    if len(partition.filters) != 2:
        raise ValueError("additivity_gap needs a two-element partition")
    g = model.grid
    i1, i2 = g.index(t1), g.index(t2)
    branches = [FilterHistory(g, {i1: p, i2: q}) for p in partition.filters]
    beta = FilterHistory(g, {i2: q})
    return sum(value(model, x, x).real for x in branches) - value(model, beta, beta).real


# -- consistency ------------------------------------------------------------

@dataclass
class ConsistencyResult:
    consistent: bool
    mode: str
    matrix: np.ndarray
    worst_offdiagonal: float


def check_exhaustive(model: SystemModel, partition: Sequence[History], tol: float = ROLE_TOL):
    for i, j in itertools.combinations(range(len(partition)), 2):
        a, b = partition[i], partition[j]
        ta = a.terms if isinstance(a, HistoryProposition) else (a,)
        tb = b.terms if isinstance(b, HistoryProposition) else (b,)
        if not all(disjoint(x, y, tol) for x in ta for y in tb):
            raise ValueError(f"partition elements {i} and {j} are not exclusive")
    total = sum(model.class_op(x) for x in partition)
    r = float(np.max(np.abs(total - np.eye(model.dim))))
    if r > tol:
        raise ValueError(f"partition is not exhaustive: |sum C - 1| = {r:.3e}")


def is_consistent(model: SystemModel, partition: Sequence[History], mode: str,
                  tol: float = 1e-10) -> ConsistencyResult:
    """Full mode demands d = 0 off the diagonal, weak mode only Re d = 0."""
    if mode not in ("weak", "full"):
        raise ValueError(f"mode must be 'weak' or 'full', got {mode!r}")
    check_exhaustive(model, partition)
    d = coherence_matrix(model, partition)
    off = d[~np.eye(len(partition), dtype=bool)]
    mags = np.abs(off) if mode == "full" else np.abs(off.real)
    worst = float(mags.max()) if mags.size else 0.0
    return ConsistencyResult(worst <= tol, mode, d, worst)


# -- conditioning -----------------------------------------------------------

def reduce_state(model: SystemModel, p: Operator, t: float) -> SystemModel:
    """rho -> P rho P / Tr(rho P), with P taken in the Heisenberg picture at t."""
    pt = heisenberg_filter(p, model.hamiltonian, t).matrix
    num = pt @ model.rho.matrix @ pt
    norm = float(np.trace(num).real)
    if norm <= TOL_DIV:
        raise DivisionGuard(f"Tr(rho P) = {norm:.3e} below guard")
    return SystemModel(Operator(num / norm, "density", validate=False), model.hamiltonian,
                       model.grid, strict=False)


def condition(model: SystemModel, evidence: FilterHistory, a: FilterHistory, b: FilterHistory,
              tol_div: float = TOL_DIV, cross_check: bool = True) -> CoherenceValue:
    """d(e o a, e o b) / d(e, e).

    When the evidence is a single filter earlier than every filter of a and
    b the result is compared with the reduced-state functional.
    """
    norm = value(model, evidence, evidence).real
    if norm <= tol_div:
        raise DivisionGuard(f"evidence intensity {norm:.3e} below guard {tol_div:g}")
    ea, eb = meet(evidence, a), meet(evidence, b)
    if ea is None or eb is None:
        raise IncompatibleEvidence("evidence has no meet with the conditioned histories")
    raw = coherence(model, ea, eb)
    out = CoherenceValue(raw.value / norm, raw.intensity_a / norm, raw.intensity_b / norm)
    if cross_check and len(evidence.support) == 1:
        (i0,) = evidence.support
        if all(i0 < i for i in a.support | b.support):
            reduced = reduce_state(model, evidence.filters[i0], model.grid.times[i0])
            ref = value(reduced, a, b)
            if abs(ref - out.value) > 1e-8:
                raise ArithmeticError(f"conditioning disagrees with state reduction by {abs(ref - out.value):.3e}")
    return out


def postselect(model: SystemModel, p: Operator, t_f: float, a: History, b: History,
               tol_div: float = TOL_DIV) -> CoherenceValue:
    """Tr(C_a^dag rho C_b rho_f) / Tr(rho rho_f) with rho_f = e^{iHt_f} P e^{-iHt_f} / Tr P."""
    terms = [x for h in (a, b) for x in (h.terms if isinstance(h, HistoryProposition) else (h,))]
    latest = max((t for x in terms for t in x.support_times), default=-np.inf)
    if not t_f > latest:
        raise ValueError(f"post-selection time {t_f} is not after the last filter at {latest}")
    rho_f = heisenberg_filter(p, model.hamiltonian, t_f).matrix / p.trace().real
    rho = model.rho.matrix
    norm = float(np.trace(rho @ rho_f).real)
    if norm <= tol_div:
        raise DivisionGuard(f"Tr(rho rho_f) = {norm:.3e} below guard {tol_div:g}")
    ca, cb = model.class_op(a), model.class_op(b)

    def f(x, y):
        return complex(np.trace(x.conj().T @ rho @ y @ rho_f)) / norm

    return CoherenceValue(f(ca, cb), f(ca, ca).real, f(cb, cb).real)


# -- correlations -----------------------------------------------------------

def statistical_correlation(model: SystemModel, obs: ObservableSpec, t1: float, t2: float) -> float:
    """sum_ij lambda_i lambda_j p(P_i, t1; P_j, t2)."""
    g = model.grid
    i1, i2 = g.index(t1), g.index(t2)
    total = 0.0
    for (li, pi), (lj, pj) in itertools.product(zip(obs.eigenvalues, obs.filters), repeat=2):
        if i1 == i2:
            if pi is not pj:
                continue
            h = FilterHistory(g, {i1: pi})
        else:
            h = FilterHistory(g, {i1: pi, i2: pj})
        total += li * lj * value(model, h, h).real
    return total


def quantum_correlation(model: SystemModel, a: Operator, times_fwd: Sequence[float],
                        times_bwd: Sequence[float]) -> CorrelationTensor:
    """Closed-time-path correlator d(A_t1 x ... x A_tr, A_t'1 x ... x A_t'm).

    Equals Tr(A(t_r) ... A(t_1) rho A(t'_1) ... A(t'_m)) with
    A(t) = e^{iHt} A e^{-iHt}; both time lists are sorted first.
    """
    if not a.is_hermitian:
        raise RoleError("hermitian", "correlated observable must be hermitian")
    fwd, bwd = sorted(times_fwd), sorted(times_bwd)
    h = model.hamiltonian

    def chain(ts):
        c = np.eye(model.dim, dtype=complex)
        for t in ts:
            c = c @ heisenberg_filter(a, h, t).matrix
        return c

    v = functional(model.rho.matrix, chain(fwd), chain(bwd))
    return CorrelationTensor((len(fwd), len(bwd)), (tuple(fwd), tuple(bwd)), v)


# -- axioms -----------------------------------------------------------------

@dataclass
class AxiomResult:
    name: str
    passed: bool
    worst: float
    checked: int
    note: str = ""


@dataclass
class AxiomReport:
    results: list[AxiomResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def as_rows(self) -> list[dict]:
        return [dict(axiom=r.name, passed=r.passed, worst=r.worst, checked=r.checked, note=r.note)
                for r in self.results]


AXIOM_NAMES = (
    "1_positivity", "2_normalisation", "3_hermiticity", "4_additivity",
    "5_triviality", "6_boundedness", "7_subadditivity",
)


def axiom_suite(model: SystemModel, histories: Sequence[FilterHistory],
                propositions: Sequence[HistoryProposition] = (), tol: float = 1e-10,
                identity_tol: float = 1e-12) -> AxiomReport:
    """Evaluate the seven coherence-functional axioms on all applicable inputs.

    Additivity is tested on incompatible pairs (their sum as a merged
    history when operationally additive, as a proposition otherwise) and
    on the supplied propositions.  Subadditivity is tested on every
    operationally additive pair, including support concatenations.
    Violations are reported, never raised.
    """
    hs = list(histories)
    items: list[History] = hs + list(propositions)
    d = coherence_matrix(model, items) if items else np.zeros((0, 0))
    nh = len(hs)
    out = AxiomReport()

    def add(name, worst, checked, note=""):
        limit = identity_tol if name == "interference_identity" else tol
        out.results.append(AxiomResult(name, worst <= limit, float(worst), checked, note))

    diag = np.diag(d)
    add(AXIOM_NAMES[0], float(max(0.0, -diag.real.min())) if len(diag) else 0.0, len(diag))

    one = model.trivial()
    add(AXIOM_NAMES[1], abs(value(model, one, one) - 1), 1)

    herm = float(np.max(np.abs(d - d.conj().T))) if d.size else 0.0
    add(AXIOM_NAMES[2], herm, d.size)

    # additive structure from incompatible pairs
    worst4, n4 = 0.0, 0
    worst7, n7 = 0.0, 0
    worst_id, n_id = 0.0, 0
    merged_pairs = []
    for i, j in itertools.combinations(range(nh), 2):
        a, b = hs[i], hs[j]
        if a.support & b.support and not incompatible(a, b):
            continue
        s = operationally_additive(a, b)
        if s is not None:
            merged_pairs.append((i, j, s, bool(incompatible(a, b))))
    if merged_pairs:
        sums = [s for _, _, s, _ in merged_pairs]
        ds = coherence_matrix(model, sums + hs)
        m = len(sums)
        for k, (i, j, s, inc) in enumerate(merged_pairs):
            dss = ds[k, k].real
            worst7 = max(worst7, d[i, i].real - dss, d[j, j].real - dss)
            n7 += 2
            if inc:
                rows = ds[k, m:]
                worst4 = max(worst4, float(np.max(np.abs(rows - d[i, :nh] - d[j, :nh]))))
                n4 += nh
                resid = dss - d[i, i].real - d[j, j].real - 2 * d[i, j].real
                worst_id = max(worst_id, abs(resid))
                n_id += 1
    for p in propositions:
        if len(p.terms) < 2 or not hs:
            continue
        lhs = np.array([value(model, p, g) for g in hs])
        rhs = sum(np.array([value(model, t, g) for g in hs]) for t in p.terms)
        worst4 = max(worst4, float(np.max(np.abs(lhs - rhs))))
        n4 += len(hs)
    add(AXIOM_NAMES[3], worst4, n4)

    zero = FilterHistory.opaque(model.grid, model.dim)
    t5 = [abs(value(model, zero, x)) for x in items] or [0.0]
    add(AXIOM_NAMES[4], max(t5), len(items))

    # boundedness is a property of filter histories only; sums of class
    # operators can exceed unit norm
    dh = d[:nh, :nh]
    bound = float(max(0.0, np.abs(dh).max() - 1)) if dh.size else 0.0
    add(AXIOM_NAMES[5], bound, dh.size)

    add(AXIOM_NAMES[6], max(0.0, worst7), n7)
    add("interference_identity", worst_id, n_id)
    return out


def latest_slot_subadditivity(model: SystemModel, histories: Sequence[FilterHistory],
                              tol: float = 1e-10) -> AxiomResult:
    """d(a, a) <= d(a+b, a+b) for pairs summed at the latest filter time of both.

    This restriction of subadditivity is a theorem: with C the common
    earlier product and M = C^dag rho C >= 0, the merged intensity is
    Tr(P M) + Tr(Q M) for orthogonal P, Q.
    """
    worst, n = 0.0, 0
    hs = list(histories)
    for a, b in itertools.combinations(hs, 2):
        if a.support != b.support or not a.support or not incompatible(a, b):
            continue
        s = operationally_additive(a, b)
        if s is None:
            continue
        last = max(a.support)
        if not np.allclose(a.filters[last].matrix + b.filters[last].matrix, s.filters[last].matrix):
            continue
        if any(not np.allclose(a.filters[i].matrix, b.filters[i].matrix) for i in a.support if i != last):
            continue
        dss = value(model, s, s).real
        worst = max(worst, value(model, a, a).real - dss, value(model, b, b).real - dss)
        n += 2
    return AxiomResult("7_subadditivity_latest_slot", worst <= tol, max(0.0, float(worst)), n)


# -- prediction and incompatible inferences -----------------------------------

@dataclass
class InferenceHit:
    partition: int
    order: tuple[int, int, int]
    re_d_alpha_gamma: float
    d_alpha_alpha: float
    d_gamma_gamma: float
    identity_residual: float
    bound_ok: bool
    weak_consistent: bool
    full_consistent: bool


@dataclass
class InferenceReport:
    scanned: int
    hits: list[InferenceHit]

    @property
    def all_bounded(self) -> bool:
        return all(h.bound_ok for h in self.hits)


def _plus(*xs: History) -> History:
    terms = [t for x in xs for t in (x.terms if isinstance(x, HistoryProposition) else (x,))]
    return terms[0] if len(terms) == 1 else HistoryProposition(terms)


def inference_scan(model: SystemModel, partitions: Sequence[Sequence[History]],
                   tol: float = 1e-9, mode: str = "weak",
                   dfun: Callable[[History, History], complex] | None = None) -> InferenceReport:
    """Look for incompatible predictions in two coarse-grainings of one partition.

    For every ordering (alpha, beta, gamma) of a three-element partition a
    *hit* is recorded when alpha is predicted in {alpha, beta+gamma} and
    gamma is predicted in {alpha+beta, gamma}, each set being consistent in
    ``mode``.  ``dfun`` replaces the model functional, e.g. by a
    post-selected one.
    """
    if dfun is None:
        def dfun(x, y):
            return value(model, x, y)
    hits = []
    for k, part in enumerate(partitions):
        if len(part) != 3:
            raise ValueError(f"partition {k} has {len(part)} elements, need 3")
        check_exhaustive(model, part)
        for ia, ig in itertools.permutations(range(3), 2):
            ib = 3 - ia - ig
            al, be, ga = part[ia], part[ib], part[ig]
            bg, ab = _plus(be, ga), _plus(al, be)
            daa = dfun(al, al).real
            dgg = dfun(ga, ga).real
            if abs(daa - 1) > tol or abs(dgg - 1) > tol:
                continue
            x1, x2 = dfun(al, bg), dfun(ab, ga)
            weak = abs(x1.real) <= tol and abs(x2.real) <= tol
            full = abs(x1) <= tol and abs(x2) <= tol
            if not (full if mode == "full" else weak):
                continue
            re_ag = dfun(al, ga).real
            resid = abs(dfun(bg, bg).real + 2 * x1.real)
            hits.append(InferenceHit(k, (ia, ib, ig), re_ag, daa, dgg, resid,
                                     re_ag <= -0.5 + tol, weak, full))
    return InferenceReport(len(partitions), hits)
