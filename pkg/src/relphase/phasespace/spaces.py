"""Phase spaces with quadrature: the odd-d discrete torus and the sphere S^2."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MAX_TWO_J = 8


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PhaseSpace:
    """Nodes and quadrature weights of a phase space.

    ``kind`` is ``"qudit_torus"`` (nodes are integer pairs (q, p), weight 1
    each) or ``"sphere"`` (nodes are (theta, phi) on a Gauss-Legendre x
    uniform-azimuth product grid, weights summing to 4 pi).
    """

    kind: str
    dim: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def spin(self) -> Fraction:
        if self.kind != "sphere":
            raise AttributeError("only sphere spaces carry a spin")
        return Fraction(self.dim - 1, 2)

    def label(self) -> str:
        if self.kind == "sphere":
            return f"sphere(j={self.spin})"
        return f"qudit_torus(d={self.dim})"

    def unit_vectors(self) -> np.ndarray:
        if self.kind != "sphere":
            raise AttributeError("unit vectors exist on the sphere only")
        th, ph = self.nodes[:, 0], self.nodes[:, 1]
        return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)

    def describe(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim, "nodes": self.size}
        if self.kind == "sphere":
            out["j"] = str(self.spin)
            out["n_theta"] = int(len(np.unique(self.nodes[:, 0])))
            out["n_phi"] = self.size // out["n_theta"]
        return out


def qudit_torus(d: int) -> PhaseSpace:
    if d < 3 or d % 2 == 0:
        raise ValueError(f"the discrete torus needs odd d >= 3, got {d}")
    q, p = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    nodes = np.stack([q.ravel(), p.ravel()], axis=1)
    return PhaseSpace("qudit_torus", d, _readonly(nodes), _readonly(np.ones(d * d)))


def sphere(j, n_theta: int | None = None, n_phi: int | None = None) -> PhaseSpace:
    """Spin-j sphere; default grid integrates rank <= 4j harmonics exactly."""
    two_j = Fraction(j) * 2
    if two_j.denominator != 1 or not 1 <= two_j <= MAX_TWO_J:
        raise ValueError(f"unsupported spin j={j}; need half-integer 1/2 <= j <= 4")
    two_j = int(two_j)
    n_theta = n_theta or two_j + 2
    n_phi = n_phi or 2 * two_j + 3
    if n_theta < two_j + 1 or n_phi < 2 * two_j + 1:
        raise ValueError(f"grid {n_theta}x{n_phi} too coarse for j={Fraction(two_j, 2)}")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    weights = np.repeat(w, n_phi) * (2 * np.pi / n_phi)
    nodes = np.stack([th.ravel(), ph.ravel()], axis=1)
    return PhaseSpace("sphere", two_j + 1, _readonly(nodes), _readonly(weights))
