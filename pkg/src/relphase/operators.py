"""Dense complex operators on finite-dimensional Hilbert spaces.

Every operator carries a *role* tag (hermitian, projector, effect, density,
unitary or generic).  The role is validated once at construction against the
tolerance :data:`ROLE_TOL`; downstream code may then rely on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

ROLE_TOL = 1e-9
ROLES = ("generic", "hermitian", "projector", "effect", "density", "unitary")

# Soft cap on the matrix dimension; tensor spaces grow as dim**n.
MAX_DIM = 4096

_TENSOR_CLOSED = {"projector", "density", "unitary", "hermitian"}


class RoleError(ValueError):
    """An operator does not satisfy the invariant of its declared role."""

    def __init__(self, role: str, reason: str):
        super().__init__(f"{role} invariant violated: {reason}")
        self.role = role
        self.reason = reason


class ExpmError(ArithmeticError):
    """Matrix exponential failed its residual check."""

    def __init__(self, residual: float):
        super().__init__(f"matrix exponential did not converge (residual {residual:.3e})")
        self.residual = residual


def _herm_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def role_violation(m: np.ndarray, role: str, tol: float = ROLE_TOL) -> str | None:
    """Return a description of why ``m`` fails ``role``, or None if it passes."""
    if role == "generic":
        return None
    eye = np.eye(m.shape[0])
    if role == "unitary":
        r = float(np.max(np.abs(m @ m.conj().T - eye)))
        return None if r <= tol else f"|A A^dag - 1| = {r:.3e}"
    r = _herm_residual(m)
    if r > tol:
        return f"|A - A^dag| = {r:.3e}"
    if role == "hermitian":
        return None
    if role == "projector":
        r = float(np.max(np.abs(m @ m - m)))
        return None if r <= tol else f"|A A - A| = {r:.3e}"
    ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if role == "effect":
        if ev[0] < -tol or ev[-1] > 1 + tol:
            return f"eigenvalues [{ev[0]:.3e}, {ev[-1]:.3e}] outside [0, 1]"
        return None
    if role == "density":
        if ev[0] < -tol:
            return f"negative eigenvalue {ev[0]:.3e}"
        tr = float(np.trace(m).real)
        if abs(tr - 1) > tol:
            return f"trace {tr:.12g} != 1"
        return None
    raise ValueError(f"unknown role {role!r}")


@dataclass(frozen=True, eq=False)
class Operator:
    """Immutable square complex matrix with a validated role."""

    matrix: np.ndarray
    role: str = "generic"
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"operator must be a non-empty square matrix, got shape {m.shape}")
        if m.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {m.shape[0]} exceeds cap {MAX_DIM}")
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.validate:
            why = role_violation(m, self.role)
            if why is not None:
                raise RoleError(self.role, why)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_hermitian(self) -> bool:
        return self.role in ("hermitian", "projector", "effect", "density") or (
            _herm_residual(self.matrix) <= ROLE_TOL
        )

    @property
    def H(self) -> np.ndarray:
        return self.matrix.conj().T

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def with_role(self, role: str) -> "Operator":
        return Operator(self.matrix, role)

    def allclose(self, other: "Operator | np.ndarray", tol: float = ROLE_TOL) -> bool:
        b = other.matrix if isinstance(other, Operator) else np.asarray(other)
        return self.matrix.shape == b.shape and bool(np.max(np.abs(self.matrix - b)) <= tol)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.matrix @ other.matrix)
        return self.matrix @ other

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix + other.matrix)

    def __repr__(self) -> str:
        return f"Operator(dim={self.dim}, role={self.role!r})"

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        m = self.matrix
        return {
            "dim": self.dim,
            "re": m.real.ravel().tolist(),
            "im": m.imag.ravel().tolist(),
            "role": self.role,
        }

    @classmethod
    def from_json(cls, obj: dict | str) -> "Operator":
        if isinstance(obj, str):
            obj = json.loads(obj)
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros(dim * dim)), dtype=float)
        if re.size != dim * dim or im.size != dim * dim:
            raise ValueError(f"expected {dim * dim} entries for dim={dim}")
        return cls((re + 1j * im).reshape(dim, dim), obj.get("role", "generic"))


# -- constructors -----------------------------------------------------------

def identity(dim: int) -> Operator:
    return Operator(np.eye(dim), "projector")


def zero(dim: int) -> Operator:
    return Operator(np.zeros((dim, dim)), "projector")


def ket_projector(psi: Sequence[complex]) -> Operator:
    """Rank-one projector onto the (normalised) vector ``psi``."""
    v = np.asarray(psi, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot project onto the zero vector")
    v = v / n
    return Operator(np.outer(v, v.conj()), "projector")


def basis_projector(dim: int, k: int) -> Operator:
    m = np.zeros((dim, dim))
    m[k, k] = 1.0
    return Operator(m, "projector")


def density(m: np.ndarray) -> Operator:
    return Operator(m, "density")


def pure_state(psi: Sequence[complex]) -> Operator:
    return ket_projector(psi).with_role("density")


def maximally_mixed(dim: int) -> Operator:
    return Operator(np.eye(dim) / dim, "density")


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli(axis: str) -> Operator:
    return Operator({"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}[axis.lower()], "hermitian")


# -- operations -------------------------------------------------------------

def tensor_product(*ops: Operator) -> Operator:
    """Kronecker product; the role survives when all factors share a tensor-closed role."""
    if not ops:
        raise ValueError("tensor_product needs at least one operand")
    m = reduce(np.kron, (o.matrix for o in ops))
    roles = {o.role for o in ops}
    role = roles.pop() if len(roles) == 1 else "generic"
    if role not in _TENSOR_CLOSED:
        role = "generic"
    return Operator(m, role, validate=False)


def commutator(a: Operator, b: Operator) -> np.ndarray:
    return a.matrix @ b.matrix - b.matrix @ a.matrix


def matrix_exponential(a: Operator, scalar: complex = 1.0) -> Operator:
    """exp(scalar * A).

    Hermitian input goes through an eigendecomposition, which keeps
    exp(-i t H) unitary to machine precision.  Anything else uses
    scipy's scaling-and-squaring Pade routine and is checked against the
    inverse exponential.
    """
    s = complex(scalar)
    if a.is_hermitian:
        h = (a.matrix + a.H) / 2
        w, v = np.linalg.eigh(h)
        m = (v * np.exp(s * w)) @ v.conj().T
        role = "unitary" if s.real == 0 else "generic"
        if not np.all(np.isfinite(m)):
            raise ExpmError(float("inf"))
        return Operator(m, role, validate=False)
    m = scipy.linalg.expm(s * a.matrix)
    if not np.all(np.isfinite(m)):
        raise ExpmError(float("inf"))
    inv = scipy.linalg.expm(-s * a.matrix)
    residual = float(np.max(np.abs(m @ inv - np.eye(a.dim))))
    scale = max(1.0, float(np.max(np.abs(m))) * float(np.max(np.abs(inv))))
    if residual > 1e-8 * scale:
        raise ExpmError(residual)
    return Operator(m, "generic", validate=False)


def evolution(h: Operator, t: float) -> np.ndarray:
    """e^{-iHt} as a bare array."""
    return matrix_exponential(h, -1j * t).matrix


def heisenberg_filter(p: Operator, h: Operator, t: float) -> Operator:
    """e^{iHt} P e^{-iHt}, keeping the role of ``p``."""
    if t == 0:
        return p
    u = evolution(h, t)
    m = u.conj().T @ p.matrix @ u
    return Operator(m, p.role, validate=False)


# -- observables ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ObservableSpec:
    """A = sum_i lambda_i P_i with orthogonal, exhaustive projectors."""

    eigenvalues: tuple[float, ...]
    filters: tuple[Operator, ...]

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", tuple(float(x) for x in self.eigenvalues))
        object.__setattr__(self, "filters", tuple(self.filters))
        if len(self.eigenvalues) != len(self.filters) or not self.filters:
            raise ValueError("eigenvalues and filters must be non-empty and of equal length")
        dim = self.filters[0].dim
        for f in self.filters:
            if f.role != "projector":
                raise RoleError("projector", f"observable filter has role {f.role!r}")
            if f.dim != dim:
                raise ValueError("observable filters differ in dimension")
        check_partition([f.matrix for f in self.filters])

    @property
    def dim(self) -> int:
        return self.filters[0].dim

    @property
    def operator(self) -> Operator:
        m = sum(lam * f.matrix for lam, f in zip(self.eigenvalues, self.filters))
        return Operator(m, "hermitian")

    @classmethod
    def from_operator(cls, a: Operator, tol: float = 1e-8) -> "ObservableSpec":
        """Spectral decomposition, grouping eigenvalues closer than ``tol``."""
        if not a.is_hermitian:
            raise RoleError("hermitian", "observable must be hermitian")
        w, v = np.linalg.eigh((a.matrix + a.H) / 2)
        groups: list[list[int]] = []
        for i, x in enumerate(w):
            if groups and abs(x - w[groups[-1][0]]) <= tol:
                groups[-1].append(i)
            else:
                groups.append([i])
        lams, projs = [], []
        for g in groups:
            vecs = v[:, g]
            lams.append(float(np.mean(w[g])))
            projs.append(Operator(vecs @ vecs.conj().T, "projector"))
        return cls(tuple(lams), tuple(projs))


def check_partition(mats: Iterable[np.ndarray], tol: float = ROLE_TOL) -> None:
    """Raise ValueError unless ``mats`` are mutually orthogonal and sum to 1."""
    mats = list(mats)
    dim = mats[0].shape[0]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            r = float(np.max(np.abs(mats[i] @ mats[j])))
            if r > tol:
                raise ValueError(f"filters {i} and {j} are not orthogonal (|P_i P_j| = {r:.3e})")
    r = float(np.max(np.abs(sum(mats) - np.eye(dim))))
    if r > tol:
        raise ValueError(f"filters do not sum to identity (residual {r:.3e})")
