import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from implicitnorm import (DomainError, F_SYSTEM, G_SYSTEM, FinVector, MemoTable,
                          SupportGuardError, best_sum, brute_norm, character,
                          constant_best_sum, constant_vector_norm, layer_norm,
                          log2_affine_system, norm, norm_value,
                          norming_functional, tail_layer_norm)
from conftest import random_vector

F2 = math.log2(3.0)     # weight of a 2-part split
ones = lambda n: FinVector.from_dense([1.0] * n)


small_vectors = st.lists(
    st.floats(-2, 2, allow_nan=False).filter(lambda v: abs(v) > 1e-3),
    min_size=1, max_size=5,
).map(FinVector.from_dense)


class TestNormExamples:
    def test_singleton_forces_sup_branch(self):
        r = norm(FinVector.basis(7))
        assert r.value == 1.0
        assert r.character == math.inf
        assert r.witness.to_jsonable() == {"leaf": 7}

    def test_two_ones(self):
        r = norm(ones(2))
        assert r.value == pytest.approx(2 / F2, rel=1e-15)
        assert r.character == 2

    def test_four_ones(self):
        assert norm_value(ones(4)) == pytest.approx(4 / math.log2(5), rel=1e-15)

    def test_sign_flip_exact(self):
        assert norm_value(FinVector.from_dense([1.0, -1.0])) == norm_value(ones(2))

    def test_zero_vector(self):
        r = norm(FinVector.zero())
        assert r.value == 0.0 and r.witness is None and r.character is None

    def test_guard(self):
        with pytest.raises(SupportGuardError):
            norm(ones(5), guard=4)


class TestBestSumAndLayers:
    def test_best_sum_examples(self):
        assert best_sum(ones(2), 2) == pytest.approx(2.0, rel=1e-15)
        assert best_sum(ones(4), 2) == pytest.approx(2 * (2 / F2), rel=1e-15)
        assert best_sum(FinVector.basis(1), 5) == 1.0

    def test_best_sum_at_one_is_norm(self):
        x = FinVector.from_dense([1.0, -0.5, 2.0])
        assert best_sum(x, 1) == norm_value(x)

    def test_best_sum_monotone_in_k(self):
        x = FinVector.from_dense([0.3, 1.0, -0.7, 0.2, 1.1])
        vals = [best_sum(x, k) for k in range(1, 7)]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_best_sum_saturates_at_l1(self):
        rng = np.random.default_rng(18)
        for _ in range(25):
            x = random_vector(rng, max_support=8)
            sat = best_sum(x, x.support_size())
            assert sat == pytest.approx(x.l1(), rel=1e-12)
            assert best_sum(x, x.support_size() + 5) == sat

    def test_layer_norm_examples(self):
        assert layer_norm(FinVector.basis(1), 2) == pytest.approx(1 / F2, rel=1e-15)
        assert layer_norm(ones(4), 2) == pytest.approx(2 * (2 / F2) / F2, rel=1e-15)
        assert layer_norm(ones(2), 3) == pytest.approx(1.0, rel=1e-15)

    def test_layer_norm_domain(self):
        with pytest.raises(DomainError):
            layer_norm(ones(2), 1)

    def test_tail_layer_examples(self):
        assert tail_layer_norm(ones(2), 2) == pytest.approx(2 / F2, rel=1e-15)
        assert tail_layer_norm(ones(2), 3) == pytest.approx(1.0, rel=1e-15)
        for r in (2, 3.5, 7):
            assert tail_layer_norm(FinVector.basis(5), r) == 1.0
        with pytest.raises(DomainError):
            tail_layer_norm(ones(2), 1.5)

    def test_norm_is_sup_of_layers(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            x = random_vector(rng, max_support=7)
            v = norm_value(x)
            layers = [x.linf()] + [layer_norm(x, ell)
                                   for ell in range(2, x.support_size() + 2)]
            assert max(layers) == pytest.approx(v, rel=1e-12)


class TestCharacter:
    def test_examples(self):
        assert character(FinVector.basis(3)).value == math.inf
        assert character(ones(2)).value == 2
        assert character(ones(3)).value == 3

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            character(FinVector.zero())

    def test_no_tie_on_clear_cases(self):
        assert character(ones(2)).tie is False
        r = norm(ones(2))
        assert r.character == 2 and not r.character_tie

    def test_tie_flagged_and_finite_preferred(self):
        # second coordinate w(2) - 1 makes the 2-part layer hit the sup
        # norm exactly: (1 + (w(2)-1)) / w(2) = 1
        x = FinVector.from_dense([1.0, math.log2(3.0) - 1.0])
        res = character(x)
        assert res.value == 2
        assert res.tie is True


class TestOracle:
    def test_brute_matches_engine_examples(self):
        assert brute_norm(ones(2)) == pytest.approx(2 / F2, rel=1e-15)
        assert brute_norm(FinVector.basis(5)) == 1.0
        assert brute_norm(ones(2), G_SYSTEM) == \
            pytest.approx(2 / math.log2(2.5), rel=1e-15)
        assert norm_value(ones(2), G_SYSTEM) == \
            pytest.approx(2 / math.log2(2.5), rel=1e-15)

    def test_brute_cap(self):
        with pytest.raises(SupportGuardError):
            brute_norm(ones(9))

    @given(small_vectors)
    @settings(max_examples=60, deadline=None)
    def test_interval_reduction_f(self, x):
        b = brute_norm(x)
        assert norm_value(x, memo=None) == pytest.approx(b, rel=1e-12)

    @given(small_vectors)
    @settings(max_examples=60, deadline=None)
    def test_interval_reduction_g(self, x):
        b = brute_norm(x, G_SYSTEM)
        assert norm_value(x, G_SYSTEM, memo=None) == pytest.approx(b, rel=1e-12)


def oracle_set_partition_sum(x, k, system=F_SYSTEM):
    """Independent layer oracle: max over families of at most k successive
    SETS (a support subset plus a chunking into consecutive runs) of the
    sum of brute-oracle part norms."""
    coords = x.coords
    t = len(coords)
    best = 0.0
    for mask in range(1, 1 << t):
        ps = [i for i in range(t) if mask >> i & 1]
        m = len(ps)
        for cutmask in range(1 << (m - 1)):
            parts = []
            cur = [ps[0]]
            for b in range(m - 1):
                if cutmask >> b & 1:
                    parts.append(cur)
                    cur = []
                cur.append(ps[b + 1])
            parts.append(cur)
            if len(parts) > k:
                continue
            total = sum(brute_norm(FinVector(coords[i] for i in part), system)
                        for part in parts)
            best = max(best, total)
    return best


class TestLayerOracle:
    """The layer norms run over arbitrary successive sets in their
    definition; the engine computes them over interval partitions.  An
    exhaustive set-level oracle certifies the reduction for the layers,
    not just for the norm itself."""

    @given(st.lists(st.floats(-2, 2, allow_nan=False)
                    .filter(lambda v: abs(v) > 1e-3),
                    min_size=1, max_size=4).map(FinVector.from_dense),
           st.integers(1, 5))
    @settings(max_examples=40, deadline=None)
    def test_best_sum_matches_set_oracle(self, x, k):
        want = oracle_set_partition_sum(x, k)
        assert best_sum(x, k) == pytest.approx(want, rel=1e-12)

    @given(st.lists(st.floats(-2, 2, allow_nan=False)
                    .filter(lambda v: abs(v) > 1e-3),
                    min_size=1, max_size=4).map(FinVector.from_dense),
           st.integers(2, 6))
    @settings(max_examples=40, deadline=None)
    def test_layer_matches_set_oracle(self, x, ell):
        want = oracle_set_partition_sum(x, min(ell, x.support_size())) \
            / math.log2(ell + 1)
        assert layer_norm(x, ell) == pytest.approx(want, rel=1e-12)


class TestConstantFastPath:
    def test_examples(self):
        assert constant_vector_norm(F_SYSTEM, 4, 1.0) == \
            pytest.approx(4 / math.log2(5), rel=1e-15)
        assert constant_vector_norm(F_SYSTEM, 1, -2.0) == 2.0
        assert constant_vector_norm(F_SYSTEM, 48, 1.0) == \
            pytest.approx(48 / math.log2(49), rel=1e-12)

    def test_agrees_with_full_dp(self):
        for L in range(1, 21):
            assert constant_vector_norm(F_SYSTEM, L, 1.0) == \
                norm_value(ones(L), memo=None)
            assert constant_vector_norm(G_SYSTEM, L, 0.5) == \
                norm_value(ones(L).scale(0.5), G_SYSTEM, memo=None)

    def test_best_sum_agrees(self):
        for L in (3, 7, 12):
            for k in (1, 2, 5):
                assert constant_best_sum(F_SYSTEM, L, 1.0, k) == \
                    best_sum(ones(L), k)

    def test_routing_large_constant(self):
        x = ones(80).scale(0.25)
        r = norm(x)
        assert r.value == pytest.approx(0.25 * 80 / math.log2(81), rel=1e-12)
        assert r.witness.evaluate(x) == pytest.approx(r.value, rel=1e-9)
        assert sorted(r.witness.leaves()) == list(range(1, 81))

    def test_domain(self):
        with pytest.raises(DomainError):
            constant_vector_norm(F_SYSTEM, 0, 1.0)

    def test_tail_layers_on_constant_route(self):
        L = 70
        x = ones(L).scale(0.1)
        got = tail_layer_norm(x, 3)
        # independent arithmetic through the composition tables
        want = max([x.linf()] +
                   [constant_best_sum(F_SYSTEM, L, 0.1, min(ell, L))
                    / math.log2(ell + 1) for ell in range(3, L + 1)])
        assert got == pytest.approx(want, rel=1e-15)

    def test_g_constant_witness(self):
        x = ones(70).scale(0.2)
        r = norm(x, G_SYSTEM)
        assert r.witness.evaluate(x) == pytest.approx(r.value, rel=1e-9)
        assert r.value >= norm_value(x) - 1e-9


class TestWitnessAndFunctional:
    def test_pair_functional_structure(self):
        phi = norming_functional(ones(2))
        data = phi.to_jsonable()
        assert data["split"]["factor"] == pytest.approx(1 / F2, rel=1e-15)
        signs = [c["sign"] for c in data["split"]["children"]]
        assert signs == [1, 1]
        assert phi.apply(ones(2)) == pytest.approx(2 / F2, rel=1e-15)

    def test_basis_functional(self):
        phi = norming_functional(FinVector.basis(4))
        assert phi.to_jsonable() == {"leaf": 4, "sign": 1}

    def test_signs_follow_coordinates(self):
        x = FinVector.from_dense([1.0, -1.0])
        phi = norming_functional(x)
        signs = [c["sign"] for c in phi.to_jsonable()["split"]["children"]]
        assert signs == [1, -1]
        assert phi.apply(x) == pytest.approx(norm_value(x), rel=1e-12)

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            norming_functional(FinVector.zero())

    def test_witness_value_matches(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            x = random_vector(rng, max_support=9)
            r = norm(x)
            assert r.witness.evaluate(x) == pytest.approx(r.value, rel=1e-12)
            assert set(r.witness.leaves()) <= x.support()

    def test_dual_ball_membership(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            x = random_vector(rng, max_support=7)
            phi = norming_functional(x)
            for _ in range(10):
                y = random_vector(rng, max_support=7)
                assert phi.apply(y) <= norm_value(y) + 1e-9

    def test_dual_ball_membership_g_system(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            x = random_vector(rng, max_support=7)
            phi = norming_functional(x, G_SYSTEM)
            assert phi.apply(x) == pytest.approx(norm_value(x, G_SYSTEM),
                                                 rel=1e-12)
            for _ in range(8):
                y = random_vector(rng, max_support=7)
                assert phi.apply(y) <= norm_value(y, G_SYSTEM) + 1e-9

    def _validate_tree(self, tree, system, lo=0):
        """Structural invariants: split weights come from the system at a
        part count at least the minimum, children sit on successive
        support ranges, leaves name real coordinates."""
        if tree.is_leaf():
            assert tree.index > lo
            return tree.index, tree.index
        assert tree.n >= system.min_parts
        assert len(tree.children) <= tree.n
        assert tree.weight == system.weight(tree.n)
        first = last = None
        for child in tree.children:
            clo, chi = self._validate_tree(child, system, lo)
            assert first is None or clo > last
            first = clo if first is None else first
            last = chi
            lo = chi
        return first, last

    def test_witness_structure(self):
        rng = np.random.default_rng(17)
        for system in (F_SYSTEM, G_SYSTEM):
            for _ in range(25):
                x = random_vector(rng, max_support=8)
                r = norm(x, system)
                self._validate_tree(r.witness, system)

    def test_tree_json_roundtrip(self):
        from implicitnorm import Functional, WitnessTree
        x = FinVector.from_dense([1.0, -0.5, 2.0, 0.25])
        r = norm(x)
        again = WitnessTree.from_jsonable(r.witness.to_jsonable())
        assert again == r.witness
        assert again.evaluate(x) == r.witness.evaluate(x)
        phi = norming_functional(x)
        phi2 = Functional.from_jsonable(phi.to_jsonable())
        assert phi2 == phi and phi2.apply(x) == phi.apply(x)


class TestNormAxioms:
    @given(small_vectors)
    @settings(max_examples=50, deadline=None)
    def test_sandwich(self, x):
        v = norm_value(x, memo=None)
        assert x.linf() <= v + 1e-15
        assert v <= x.l1() + 1e-12

    @given(small_vectors, st.integers(0, 2 ** 5 - 1))
    @settings(max_examples=50, deadline=None)
    def test_unconditionality_exact(self, x, mask):
        flipped = FinVector((i, -v if (mask >> k) & 1 else v)
                            for k, (i, v) in enumerate(x.coords))
        assert norm_value(flipped, memo=None) == norm_value(x, memo=None)

    @given(small_vectors, st.integers(2, 5), st.integers(0, 7))
    @settings(max_examples=50, deadline=None)
    def test_subsymmetry_exact(self, x, stretch, shift):
        y = x.spread(lambda i: stretch * i + shift)
        assert norm_value(y, memo=None) == norm_value(x, memo=None)

    @given(small_vectors, small_vectors)
    @settings(max_examples=50, deadline=None)
    def test_triangle(self, x, y):
        y = y.spread(lambda i: i + 2)  # overlap partially with x
        lhs = norm_value(x + y, memo=None)
        assert lhs <= norm_value(x, memo=None) + norm_value(y, memo=None) + 1e-9

    @given(small_vectors,
           st.floats(-4, 4, allow_nan=False).filter(
               lambda a: a == 0.0 or abs(a) > 1e-6))
    @settings(max_examples=50, deadline=None)
    def test_homogeneity(self, x, a):
        assert norm_value(x.scale(a), memo=None) == \
            pytest.approx(abs(a) * norm_value(x, memo=None), rel=1e-9, abs=1e-12)

    def test_bimonotone(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            x = random_vector(rng, max_support=8)
            lo = int(rng.integers(1, 30))
            hi = lo + int(rng.integers(0, 30))
            piece = x.restrict(range(lo, hi + 1))
            assert norm_value(piece) <= norm_value(x) + 1e-12

    def test_g_dominates_f(self):
        rng = np.random.default_rng(14)
        for _ in range(60):
            x = random_vector(rng, max_support=8)
            assert norm_value(x, G_SYSTEM) >= norm_value(x) - 1e-9


class TestMemoAndDeterminism:
    def test_memo_transparent(self):
        x = FinVector.from_dense([0.3, -1.2, 0.8, 0.8])
        fresh = MemoTable()
        v1 = norm_value(x, memo=fresh)
        v2 = norm_value(x, memo=fresh)   # cache hit
        v3 = norm_value(x, memo=None)
        assert v1 == v2 == v3

    def test_memo_persistence_roundtrip(self, tmp_path):
        path = str(tmp_path / "memo.bin")
        table = MemoTable()
        x = FinVector.from_dense([1.0, 2.0, -0.5])
        v = norm_value(x, memo=table)
        table.save(path)
        loaded = MemoTable.load(path)
        assert norm_value(x, memo=loaded) == v

    def test_memo_corruption_rebuilds(self, tmp_path):
        path = tmp_path / "memo.bin"
        path.write_bytes(b"not a cache")
        with pytest.warns(UserWarning):
            loaded = MemoTable.load(str(path))
        assert len(loaded) == 0

    def test_bitwise_reproducibility(self):
        rng = np.random.default_rng(15)
        xs = [random_vector(rng, max_support=9) for _ in range(20)]
        first = [(norm(x).value, norm(x).witness.to_jsonable()) for x in xs]
        second = [(norm(x).value, norm(x).witness.to_jsonable()) for x in xs]
        assert first == second


class TestCustomSystem:
    def test_log2_affine_matches_builtins(self):
        f_like = log2_affine_system("f-like", 2, 1.0, 1.0)
        g_like = log2_affine_system("g-like", 3, 1.0, 0.5)
        x = FinVector.from_dense([1.0, -0.4, 0.9])
        assert norm_value(x, f_like, memo=None) == norm_value(x, memo=None)
        assert norm_value(x, g_like, memo=None) == norm_value(x, G_SYSTEM, memo=None)

    def test_invalid_system(self):
        with pytest.raises(DomainError):
            log2_affine_system("bad", 1, 1.0, 1.0)
        with pytest.raises(DomainError):
            log2_affine_system("flat", 2, 2.0, 0.0)
