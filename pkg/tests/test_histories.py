from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relphase.histories import (
    FilterHistory,
    GridMismatch,
    HistoryProposition,
    TemporalGrid,
    class_operator,
    finer_than,
    incompatible,
    meet,
    operationally_additive,
)
from relphase.operators import PAULI_X, Operator, evolution
from relphase.sampling import random_hamiltonian, random_history, random_projector

from conftest import KET0, KET1, MINUS, PLUS, proj

G = TemporalGrid((0.0, 1.0, 2.0))
P0, P1 = Operator(proj(KET0), "projector"), Operator(proj(KET1), "projector")
PP, PM = Operator(proj(PLUS), "projector"), Operator(proj(MINUS), "projector")
seeds = st.integers(0, 2 ** 32 - 1)


def random_set(seed: int, n: int = 6, d: int = 2):
    rng = np.random.default_rng(seed)
    # draw filters from a small commuting pool so that order relations actually occur
    pool = [Operator(np.diag(v).astype(float), "projector") for v in ([1, 0, 0], [0, 1, 0], [1, 1, 0], [1, 1, 1])]
    out = []
    for _ in range(n):
        k = int(rng.integers(0, 3))
        idx = rng.choice(3, size=k, replace=False)
        out.append(FilterHistory(G, {int(i): pool[int(rng.integers(0, 4))] for i in idx}, dim=3))
    return out


class TestGrid:
    def test_strict(self):
        with pytest.raises(ValueError):
            TemporalGrid((0.0, 0.0))
        with pytest.raises(ValueError):
            TemporalGrid(())

    def test_index(self):
        assert G.index(1.0) == 1
        with pytest.raises(KeyError):
            G.index(0.5)


class TestFilterHistory:
    def test_role_required(self):
        with pytest.raises(ValueError):
            FilterHistory(G, {0: Operator(PAULI_X, "hermitian")})

    def test_index_bounds(self):
        with pytest.raises(IndexError):
            FilterHistory(G, {5: P0})

    def test_immutable(self):
        h = FilterHistory(G, {0: P0})
        with pytest.raises(AttributeError):
            h.grid = G
        with pytest.raises(TypeError):
            h.filters[1] = P1

    def test_trivial_never_stored(self):
        h = FilterHistory.trivial(G, 2)
        assert h.support == frozenset()
        assert np.array_equal(h.filter_at(1), np.eye(2))

    def test_json(self):
        h = FilterHistory(G, {0: P0, 2: PP})
        obj = json.loads(json.dumps(h.to_json()))
        assert set(obj) == {"grid", "filters"}
        assert set(obj["filters"]) == {"0", "2"}
        assert set(obj["filters"]["0"]) == {"dim", "re", "im", "role"}
        assert FilterHistory.from_json(obj).same_as(h)

    def test_effects_admitted(self):
        e = Operator(np.diag([0.7, 0.2]), "effect")
        h = FilterHistory(G, {1: e})
        assert not h.is_projective


class TestOrder:
    def test_reflexive(self):
        a = FilterHistory(G, {0: P0, 1: PP})
        assert finer_than(a, a)

    def test_trivial_is_coarsest(self):
        a = FilterHistory(G, {0: P0, 1: PP})
        assert finer_than(a, FilterHistory.trivial(G, 2))
        assert not finer_than(FilterHistory.trivial(G, 2), a)

    def test_orthogonal_not_finer(self):
        assert not finer_than(FilterHistory(G, {0: P0}), FilterHistory(G, {0: P1}))

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            finer_than(FilterHistory(G, {0: P0}), FilterHistory(TemporalGrid((0.0, 1.0)), {0: P0}))

    @given(seeds)
    def test_partial_order(self, seed):
        hs = random_set(seed)
        for a in hs:
            assert finer_than(a, a)
            for b in hs:
                if finer_than(a, b) and finer_than(b, a):
                    assert all(np.allclose(a.filter_at(i, 3), b.filter_at(i, 3)) for i in range(3))
                for c in hs:
                    if finer_than(a, b) and finer_than(b, c):
                        assert finer_than(a, c)


class TestIncompatible:
    def test_orthogonal(self):
        assert incompatible(FilterHistory(G, {0: P0}), FilterHistory(G, {0: P1}))

    def test_disjoint_supports(self):
        assert not incompatible(FilterHistory(G, {0: P0}), FilterHistory(G, {1: P1}))

    def test_overlapping(self):
        # |0><0| |+><+| has norm 1/2
        assert np.isclose(np.linalg.norm(P0.matrix @ PP.matrix, 2), 1 / np.sqrt(2))
        assert not incompatible(FilterHistory(G, {0: P0}), FilterHistory(G, {0: PP}))


class TestAdditivity:
    def test_single_slot_sum(self):
        a = FilterHistory(G, {0: P0, 1: PP})
        b = FilterHistory(G, {0: P1, 1: PP})
        s = operationally_additive(a, b)
        assert s is not None
        assert np.allclose(s.filters[0].matrix, np.eye(2))
        assert np.allclose(s.filters[1].matrix, PP.matrix)

    def test_disjoint_support_concatenation(self):
        a = FilterHistory(G, {0: P0})
        b = FilterHistory(G, {1: PP, 2: P1})
        s = operationally_additive(a, b)
        assert s.support == {0, 1, 2}
        assert s.filters[0] is P0 and s.filters[2] is P1

    def test_non_commuting_second_slot(self):
        a = FilterHistory(G, {0: P0, 1: P0})
        b = FilterHistory(G, {0: P1, 1: PP})
        assert operationally_additive(a, b) is None

    def test_requires_disjoint(self):
        with pytest.raises(ValueError):
            operationally_additive(FilterHistory(G, {0: P0}), FilterHistory(G, {0: PP}))

    @given(seeds, st.integers(2, 3))
    def test_linearity_of_class_operator(self, seed, d):
        rng = np.random.default_rng(seed)
        h = random_hamiltonian(rng, d)
        base = random_history(rng, G, d, 3)
        i = int(rng.integers(0, 3))
        p = random_projector(rng, d)
        q = Operator(np.eye(d) - p.matrix, "projector")
        fa, fb = dict(base.filters), dict(base.filters)
        fa[i], fb[i] = p, q
        a, b = FilterHistory(G, fa), FilterHistory(G, fb)
        s = operationally_additive(a, b)
        assert s is not None
        diff = class_operator(s, h) - class_operator(a, h) - class_operator(b, h)
        assert np.max(np.abs(diff)) < 1e-10


class TestMeet:
    def test_unit(self):
        a = FilterHistory(G, {0: P0, 2: PP})
        assert meet(a, FilterHistory.trivial(G, 2)).same_as(a)

    def test_disjoint_merge(self):
        m = meet(FilterHistory(G, {0: P0}), FilterHistory(G, {1: PP}))
        assert m.same_as(FilterHistory(G, {0: P0, 1: PP}))

    def test_non_commuting(self):
        assert meet(FilterHistory(G, {0: P0}), FilterHistory(G, {0: PP})) is None

    def test_opaque(self):
        m = meet(FilterHistory(G, {0: P0}), FilterHistory(G, {0: P1}))
        assert m is not None and m.is_opaque

    def test_effects_rejected(self):
        e = Operator(np.diag([0.5, 0.5]), "effect")
        with pytest.raises(ValueError):
            meet(FilterHistory(G, {0: e}), FilterHistory(G, {0: P0}))

    @given(seeds)
    def test_meet_is_finer(self, seed):
        hs = random_set(seed)
        for a in hs:
            for b in hs:
                m = meet(a, b)
                if m is not None:
                    assert finer_than(m, a) and finer_than(m, b)


class TestClassOperator:
    def test_trivial(self, rng):
        assert np.allclose(class_operator(FilterHistory.trivial(G, 3), random_hamiltonian(rng, 3)), np.eye(3))

    def test_no_dynamics(self):
        zero = Operator(np.zeros((2, 2)), "hermitian")
        assert np.array_equal(class_operator(FilterHistory(G, {1: PP}), zero), PP.matrix)

    def test_precession_chain(self):
        w = 2.0
        t1, t2 = 0.3, 0.3 + np.pi / w
        g = TemporalGrid((t1, t2))
        h = Operator(w * PAULI_X / 2, "hermitian")
        got = class_operator(FilterHistory(g, {0: P0, 1: P1}), h)

        def rot(p, t):
            # e^{iHt} = cos(wt/2) + i sin(wt/2) sigma_x, written out
            u = np.cos(w * t / 2) * np.eye(2) + 1j * np.sin(w * t / 2) * PAULI_X
            return u @ p @ u.conj().T

        want = rot(proj(KET0), t1) @ rot(proj(KET1), t2)
        assert np.allclose(got, want, atol=1e-14)
        assert np.allclose(evolution(h, t1).conj().T, np.cos(w * t1 / 2) * np.eye(2) + 1j * np.sin(w * t1 / 2) * PAULI_X)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            class_operator(FilterHistory(G, {0: P0}), random_hamiltonian(rng, 3))


class TestProposition:
    def test_sum(self, rng):
        a, b = FilterHistory(G, {0: P0, 1: PP}), FilterHistory(G, {0: P1, 1: PM})
        h = random_hamiltonian(rng, 2)
        prop = HistoryProposition([a, b])
        assert np.allclose(prop.class_operator(h), class_operator(a, h) + class_operator(b, h))

    def test_rejects_overlap(self):
        with pytest.raises(ValueError):
            HistoryProposition([FilterHistory(G, {0: P0}), FilterHistory(G, {0: PP})])
