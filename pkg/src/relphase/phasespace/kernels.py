"""Weyl-type kernel families Delta(x) on the supported phase spaces.

All kernels are hermitian with unit trace.  The pairing constant c makes

    c * sum_k w_k Tr(A Delta_k) Tr(B Delta_k) = Tr(A B)

exact on the quadrature grid, and A = c * sum_k w_k F_A(k) Delta_k.

On the sphere the Wigner (Stratonovich-Weyl), Husimi-Q and Glauber-P
families share one construction: a diagonal operator sum_l c_l T_l0 at the
north pole, rotated to every node.  They differ only in the rank
coefficients c_l.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spaces import PhaseSpace

KINDS = ("wigner", "q", "p")


@dataclass(frozen=True, eq=False)
class KernelFamily:
    space: PhaseSpace
    delta: np.ndarray = field(repr=False)
    pairing_constant: float
    kind: str = "wigner"
    rank_coefficients: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.space.dim

    def delta_at(self, points) -> np.ndarray:
        """Kernel operators at arbitrary points (q, p) or (theta, phi); shape (P, d, d)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.space.kind == "qudit_torus":
            return torus_kernels(self.dim, pts.astype(int))
        return _rotated(self.dim, self.rank_coefficients, pts)

    def weighted(self) -> np.ndarray:
        """c * w_k, the measure each node carries in pairings."""
        return self.pairing_constant * self.space.weights


# -- discrete torus ---------------------------------------------------------

def shift_clock(d: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.roll(np.eye(d), 1, axis=0)  # X|j> = |j+1>
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return x.astype(complex), z


def torus_kernels(d: int, nodes: np.ndarray) -> np.ndarray:
    """Delta(q, p) = (1/d) sum_{a,b} w^{ab/2 + pa - qb} X^a Z^b, w = e^{2 pi i/d}."""
    x, z = shift_clock(d)
    half = (d + 1) // 2  # inverse of 2 mod d
    xa = [np.linalg.matrix_power(x, a) for a in range(d)]
    zb = [np.linalg.matrix_power(z, b) for b in range(d)]
    out = np.zeros((len(nodes), d, d), dtype=complex)
    a, b = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    for k, (q, p) in enumerate(nodes):
        expo = (a * b * half + p * a - q * b) % d
        ph = np.exp(2j * np.pi * expo / d)
        acc = np.zeros((d, d), dtype=complex)
        for ai in range(d):
            for bi in range(d):
                acc += ph[ai, bi] * (xa[ai] @ zb[bi])
        out[k] = acc / d
    return out


# -- sphere -----------------------------------------------------------------

def spin_matrices(dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jx, Jy, Jz in the basis m = j, j-1, ..., -j."""
    j = (dim - 1) / 2
    m = j - np.arange(dim)
    jp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return jx, jy, np.diag(m).astype(complex)


def tensor_diagonals(dim: int) -> np.ndarray:
    """Rows l = 0..2j: diagonals of the orthonormal tensor operators T_l0.

    Obtained by Gram-Schmidt on 1, Jz, Jz^2, ...; the sign makes the
    leading power positive, which fixes T_l0 at m = j to be positive.
    """
    j = (dim - 1) / 2
    m = j - np.arange(dim)
    vander = np.vander(m, dim, increasing=True)
    q, r = np.linalg.qr(vander)
    q = q * np.sign(np.diag(r))
    return q.T


def rank_coefficients(dim: int, kind: str) -> np.ndarray:
    two_j = dim - 1
    ls = np.arange(dim)
    if kind == "wigner":
        return np.sqrt((2 * ls + 1) / (two_j + 1))
    top = tensor_diagonals(dim)[:, 0]  # <j j| T_l0 |j j>
    if kind == "q":
        return top
    if kind == "p":
        return (2 * ls + 1) / ((two_j + 1) * top)
    raise ValueError(f"unknown kernel kind {kind!r}")


def rotation(dim: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """U = exp(-i phi Jz) exp(-i theta Jy) for each (theta, phi); shape (P, d, d)."""
    _, jy, jz = spin_matrices(dim)
    w, v = np.linalg.eigh(jy)
    ry = np.einsum("ab,pb,cb->pac", v, np.exp(-1j * np.outer(theta, w)), v.conj())
    rz = np.exp(-1j * np.outer(phi, np.diag(jz).real))
    return rz[:, :, None] * ry


def _rotated(dim: int, coeffs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pole = np.diag(coeffs @ tensor_diagonals(dim)).astype(complex)
    u = rotation(dim, pts[:, 0], pts[:, 1])
    return u @ pole @ u.conj().transpose(0, 2, 1)


def spin_coherent_state(dim: int, theta: float, phi: float) -> np.ndarray:
    """|n> = U(theta, phi)|j, j>."""
    return rotation(dim, np.array([theta]), np.array([phi]))[0][:, 0]


def build_kernels(space: PhaseSpace, kind: str = "wigner") -> KernelFamily:
    """Kernel family on ``space``.

    The torus supports the Wigner family only; the sphere supports
    ``wigner``, ``q`` (coherent-state projectors) and ``p``.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    d = space.dim
    if space.kind == "qudit_torus":
        if kind != "wigner":
            raise NotImplementedError("P and Q symbols are supported on the sphere only")
        delta = torus_kernels(d, space.nodes)
        delta.flags.writeable = False
        return KernelFamily(space, delta, 1.0 / d, kind)
    coeffs = rank_coefficients(d, kind)
    delta = _rotated(d, coeffs, space.nodes)
    delta.flags.writeable = False
    return KernelFamily(space, delta, d / (4 * np.pi), kind, coeffs)


def solid_angle_factor(space: PhaseSpace) -> float:
    """Factor turning unit-trace symbols into symbols integrating to Tr A against dOmega.

    For a spin-j sphere this is (2j+1)/(4 pi); the torus has no such
    convention and returns 1.
    """
    if space.kind == "sphere":
        return space.dim / (4 * np.pi)
    return 1.0
