import numpy as np
import pytest
from hypothesis import given, strategies as st

from poptlab.contexts import (
    Context,
    ContextSamplePlan,
    ProductContext,
    coarse_grain,
    computational_context,
    context_from_json,
    context_to_json,
    contexts_equal,
    fourier_context,
    is_valid_pvm,
    merged_context,
    overlapping_family,
    product_order_leq,
    pvm_of_context,
    random_context,
    refines,
    sample_contexts,
)
from poptlab.errors import PartitionError
from poptlab.operator_core import dagger, identity, max_norm


class TestRandomContext:
    def test_basis_unitary(self):
        ctx = random_context(3, [1, 1, 1], seed=42)
        assert ctx.is_maximal
        assert max_norm(dagger(ctx.basis) @ ctx.basis - identity(3)) <= 1e-9

    def test_trivial_context_projector_is_identity(self):
        ctx = random_context(3, [3], seed=0)
        assert ctx.is_trivial
        (p,) = pvm_of_context(ctx)
        assert max_norm(p - identity(3)) < 1e-12

    def test_seed_determinism_bitwise(self):
        a = random_context(4, [2, 1, 1], seed=7)
        b = random_context(4, [2, 1, 1], seed=7)
        assert np.array_equal(a.basis, b.basis)

    def test_bad_partition(self):
        with pytest.raises(PartitionError):
            random_context(3, [2, 2], seed=0)
        with pytest.raises(PartitionError):
            Context(3, identity(3), ((0, 1), (1, 2)))


class TestPvmOfContext:
    def test_computational_maximal(self):
        pvm = pvm_of_context(computational_context(3))
        for i, p in enumerate(pvm):
            expected = np.zeros((3, 3), dtype=complex)
            expected[i, i] = 1.0
            assert max_norm(p - expected) < 1e-14

    def test_coarse_partition(self):
        pvm = pvm_of_context(computational_context(3, [2, 1]))
        assert max_norm(pvm[0] - np.diag([1.0, 1.0, 0.0])) < 1e-14
        assert max_norm(pvm[1] - np.diag([0.0, 0.0, 1.0])) < 1e-14

    def test_ranks_equal_block_sizes(self):
        ctx = random_context(5, [2, 3], seed=3)
        pvm = pvm_of_context(ctx)
        assert [int(round(p.trace().real)) for p in pvm] == [2, 3]

    def test_pvm_invariants_over_many_random_contexts(self):
        # the continuum stand-in: a large seeded sweep
        rng = np.random.default_rng(0)
        for k in range(1000):
            dim = int(rng.integers(2, 5))
            cut = int(rng.integers(1, dim + 1))
            shape = [cut] + [1] * (dim - cut)
            assert is_valid_pvm(pvm_of_context(random_context(dim, shape, seed=k)))


class TestRefines:
    def test_own_coarse_graining(self):
        fine = random_context(3, [1, 1, 1], seed=11)
        coarse = merged_context(fine, [[0, 1], [2]])
        assert refines(fine, coarse)

    def test_independent_random_contexts_do_not_refine(self):
        a = random_context(3, [1, 1, 1], seed=1)
        b = random_context(3, [1, 1, 1], seed=2)
        assert not refines(a, b)

    def test_everything_refines_the_trivial_context(self):
        trivial = random_context(4, [4], seed=5)
        for seed in range(5):
            assert refines(random_context(4, [2, 1, 1], seed=seed), trivial)

    @given(st.integers(0, 200))
    def test_reflexive(self, seed):
        ctx = random_context(3, [1, 1, 1], seed=seed)
        assert refines(ctx, ctx)

    @given(st.integers(0, 200))
    def test_transitive_along_merge_chain(self, seed):
        fine = random_context(4, [1, 1, 1, 1], seed=seed)
        mid = merged_context(fine, [[0, 1], [2], [3]])
        coarse = merged_context(mid, [[0, 1], [2]])
        assert refines(fine, mid) and refines(mid, coarse) and refines(fine, coarse)


class TestProductOrder:
    def test_both_components_refine(self):
        fine_l = random_context(3, [1, 1, 1], seed=0)
        fine_r = random_context(3, [1, 1, 1], seed=1)
        coarse = ProductContext(merged_context(fine_l, [[0], [1, 2]]), merged_context(fine_r, [[0, 1], [2]]))
        assert product_order_leq(coarse, ProductContext(fine_l, fine_r))

    def test_one_component_fails(self):
        fine_l = random_context(3, [1, 1, 1], seed=0)
        fine_r = random_context(3, [1, 1, 1], seed=1)
        other_r = random_context(3, [1, 1, 1], seed=2)
        coarse = ProductContext(merged_context(fine_l, [[0], [1, 2]]), other_r)
        assert not product_order_leq(coarse, ProductContext(fine_l, fine_r))

    def test_trivial_below_everything(self):
        trivial = ProductContext(random_context(3, [3], seed=0), random_context(3, [3], seed=1))
        some = ProductContext(random_context(3, [1, 1, 1], seed=2), random_context(3, [2, 1], seed=3))
        assert product_order_leq(trivial, some)

    @given(st.integers(0, 100))
    def test_reflexive_and_antisymmetric_up_to_equality(self, seed):
        pc = ProductContext(random_context(3, [1, 1, 1], seed=seed), random_context(3, [2, 1], seed=seed + 1))
        assert product_order_leq(pc, pc)
        other = ProductContext(
            merged_context(pc.left, [[0, 1], [2]]), pc.right
        )
        if product_order_leq(other, pc) and product_order_leq(pc, other):
            assert contexts_equal(pc.left, other.left) and contexts_equal(pc.right, other.right)


class TestCoarseGrain:
    def test_merge_all_gives_identity(self):
        pvm = pvm_of_context(random_context(3, [1, 1, 1], seed=4))
        (total,) = coarse_grain(pvm, [[0, 1, 2]])
        assert max_norm(total - identity(3)) < 1e-12

    def test_identity_merge(self):
        pvm = pvm_of_context(random_context(3, [1, 1, 1], seed=4))
        out = coarse_grain(pvm, [[0], [1], [2]])
        for p, q in zip(pvm, out):
            assert max_norm(p - q) == 0.0

    def test_pairwise_merge(self):
        pvm = pvm_of_context(computational_context(3))
        out = coarse_grain(pvm, [[0, 1], [2]])
        assert max_norm(out[0] - (pvm[0] + pvm[1])) == 0.0
        assert max_norm(out[1] - pvm[2]) == 0.0

    def test_invalid_merge(self):
        pvm = pvm_of_context(computational_context(3))
        with pytest.raises(PartitionError):
            coarse_grain(pvm, [[0, 1]])

    @given(st.integers(0, 200))
    def test_matches_merged_context(self, seed):
        ctx = random_context(4, [1, 1, 1, 1], seed=seed)
        merged = merged_context(ctx, [[0, 2], [1], [3]])
        direct = coarse_grain(pvm_of_context(ctx), [[0, 2], [1], [3]])
        for p, q in zip(pvm_of_context(merged), direct):
            assert max_norm(p - q) < 1e-12


class TestSamplingAndSerialization:
    def test_sample_plan_includes_structured_bases(self):
        ctxs = sample_contexts(3, ContextSamplePlan(n_random=5, seed=0))
        assert len(ctxs) == 7
        assert contexts_equal(ctxs[0], computational_context(3))
        assert contexts_equal(ctxs[1], fourier_context(3))

    def test_overlapping_family_shares_coarse(self):
        fine1, fine2, coarse = overlapping_family(3, seed=12)
        assert refines(fine1, coarse) and refines(fine2, coarse)
        assert not contexts_equal(fine1, fine2)

    def test_json_roundtrip(self):
        ctx = random_context(3, [2, 1], seed=17)
        back = context_from_json(context_to_json(ctx))
        assert np.array_equal(back.basis, ctx.basis)
        assert back.partition == ctx.partition
