from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relphase.operators import (
    PAULI_X,
    PAULI_Z,
    ExpmError,
    ObservableSpec,
    Operator,
    RoleError,
    basis_projector,
    heisenberg_filter,
    identity,
    matrix_exponential,
    role_violation,
    tensor_product,
)
from relphase.sampling import random_density, random_hamiltonian, random_projector

from conftest import KET0, KET1, PLUS, proj

seeds = st.integers(0, 2 ** 32 - 1)


class TestRoles:
    def test_density_trace_violation_named(self):
        with pytest.raises(RoleError) as exc:
            Operator(np.diag([0.9, 0.0]), "density")
        assert exc.value.role == "density"
        assert "trace" in str(exc.value)

    @pytest.mark.parametrize("m, role", [
        (np.array([[0, 1], [0, 0]]), "hermitian"),
        (np.diag([1.0, 0.5]), "projector"),
        (np.diag([1.5, 0.0]), "effect"),
        (np.diag([1.5, -0.5]), "density"),
        (np.array([[1, 1], [0, 1]]), "unitary"),
    ])
    def test_negative_controls(self, m, role):
        assert role_violation(np.asarray(m, dtype=complex), role) is not None
        with pytest.raises(RoleError):
            Operator(m, role)

    def test_tolerance_boundary(self):
        eps = 1e-10
        Operator(np.diag([1 + eps, 0.0]), "projector")
        with pytest.raises(RoleError):
            Operator(np.diag([1 + 1e-7, 0.0]), "projector")

    def test_immutable(self):
        p = basis_projector(2, 0)
        with pytest.raises(ValueError):
            p.matrix[0, 0] = 3

    def test_unknown_role(self):
        with pytest.raises(ValueError):
            Operator(np.eye(2), "banana")

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            Operator(np.zeros((0, 0)))


class TestJson:
    def test_layout(self):
        op = Operator(np.array([[1, 2j], [-2j, 0]]), "hermitian")
        obj = op.to_json()
        assert obj == {"dim": 2, "re": [1.0, 0.0, 0.0, 0.0], "im": [0.0, 2.0, -2.0, 0.0], "role": "hermitian"}

    @given(seeds, st.integers(2, 4))
    def test_round_trip(self, seed, d):
        rng = np.random.default_rng(seed)
        op = random_density(rng, d)
        back = Operator.from_json(json.dumps(op.to_json()))
        assert back.role == "density"
        assert np.array_equal(back.matrix, op.matrix)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            Operator.from_json({"dim": 2, "re": [1, 0, 0], "im": [0, 0, 0, 0]})


class TestTensor:
    def test_identity(self):
        out = tensor_product(identity(2), identity(2))
        assert np.array_equal(out.matrix, np.eye(4))
        assert out.role == "projector"

    def test_basis_projectors(self):
        out = tensor_product(basis_projector(2, 0), basis_projector(2, 1))
        assert np.array_equal(np.diag(out.matrix).real, [0, 1, 0, 0])
        assert out.role == "projector"

    def test_sigma_z(self):
        z = Operator(PAULI_Z, "hermitian")
        assert np.array_equal(tensor_product(z, z).matrix, np.diag([1, -1, -1, 1]).astype(complex))

    def test_mixed_roles_generic(self, rng):
        out = tensor_product(basis_projector(2, 0), random_density(rng, 2))
        assert out.role == "generic"

    @given(seeds, st.integers(2, 4), st.integers(2, 4))
    def test_trace_multiplicative(self, seed, d1, d2):
        rng = np.random.default_rng(seed)
        a = Operator(rng.normal(size=(d1, d1)) + 1j * rng.normal(size=(d1, d1)))
        b = Operator(rng.normal(size=(d2, d2)) + 1j * rng.normal(size=(d2, d2)))
        assert abs(tensor_product(a, b).trace() - a.trace() * b.trace()) < 1e-12 * (1 + abs(a.trace() * b.trace()))


class TestExponential:
    def test_zero(self, rng):
        h = random_hamiltonian(rng, 3)
        assert np.allclose(matrix_exponential(h, 0).matrix, np.eye(3), atol=1e-15)

    def test_half_turn(self):
        # exp(-i theta sigma_x / 2) = cos(theta/2) - i sin(theta/2) sigma_x at theta = pi
        out = matrix_exponential(Operator(PAULI_X, "hermitian"), -1j * np.pi / 2)
        assert out.role == "unitary"
        assert np.allclose(out.matrix, -1j * PAULI_X, atol=1e-15)

    def test_diagonal(self):
        out = matrix_exponential(Operator(np.diag([0.0, 2.0]), "hermitian"), -1j)
        assert np.allclose(out.matrix, np.diag([1, np.exp(-2j)]), atol=1e-15)

    def test_non_hermitian_pade(self):
        n = Operator(np.array([[0.0, 1.0], [0.0, 0.0]]))
        out = matrix_exponential(n, 2.0)
        assert out.role == "generic"
        assert np.allclose(out.matrix, [[1, 2], [0, 1]])

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence(self):
        with pytest.raises(ExpmError):
            matrix_exponential(Operator(np.array([[800.0, 1.0], [0.0, -1.0]])), 1.0)

    @given(seeds, st.integers(2, 5), st.floats(-5, 5))
    def test_inverse(self, seed, d, t):
        h = random_hamiltonian(np.random.default_rng(seed), d)
        u = matrix_exponential(h, -1j * t).matrix
        v = matrix_exponential(h, 1j * t).matrix
        assert np.max(np.abs(u @ v - np.eye(d))) < 1e-10


class TestHeisenberg:
    def test_t_zero(self):
        p = basis_projector(2, 0)
        assert heisenberg_filter(p, Operator(PAULI_X, "hermitian"), 0.0) is p

    def test_half_rabi_flip(self):
        w = 1.7
        h = Operator(w * PAULI_X / 2, "hermitian")
        out = heisenberg_filter(Operator(proj(KET0), "projector"), h, np.pi / w)
        # explicit 2x2: U = exp(-i pi sigma_x / 2) = -i sigma_x
        u = -1j * PAULI_X
        assert np.allclose(out.matrix, u.conj().T @ proj(KET0) @ u, atol=1e-14)
        assert np.allclose(out.matrix, proj(KET1), atol=1e-14)
        assert out.role == "projector"

    def test_commuting(self):
        p = basis_projector(2, 1)
        out = heisenberg_filter(p, Operator(np.diag([0.3, -1.1]), "hermitian"), 2.4)
        assert np.allclose(out.matrix, p.matrix, atol=1e-15)

    @given(seeds, st.integers(2, 4), st.floats(-4, 4))
    def test_idempotency_preserved(self, seed, d, t):
        rng = np.random.default_rng(seed)
        out = heisenberg_filter(random_projector(rng, d), random_hamiltonian(rng, d), t).matrix
        assert np.max(np.abs(out @ out - out)) < 1e-10


class TestObservable:
    def test_pauli_z(self):
        obs = ObservableSpec.from_operator(Operator(PAULI_Z, "hermitian"))
        assert sorted(obs.eigenvalues) == [-1.0, 1.0]
        assert np.allclose(obs.operator.matrix, PAULI_Z)

    def test_degenerate_grouping(self):
        obs = ObservableSpec.from_operator(Operator(np.diag([1.0, 1.0, -2.0]), "hermitian"))
        assert len(obs.filters) == 2

    def test_not_exhaustive(self):
        with pytest.raises(ValueError, match="sum to identity"):
            ObservableSpec((1.0,), (Operator(proj(KET0), "projector"),))

    def test_not_orthogonal(self):
        with pytest.raises(ValueError, match="orthogonal"):
            ObservableSpec((1.0, -1.0), (Operator(proj(KET0), "projector"), Operator(proj(PLUS), "projector")))
