import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnrank import (
    Decomposition,
    DenseTensor,
    NegativeEntryError,
    NtfConfig,
    Rank1Term,
    RankInterval,
    Shape,
    ShapeError,
    canonical_decomposition,
    certify_max_rank,
    eval_cp,
    flattening_rank_lower_bound,
    fooling_set,
    fooling_set_lower_bound,
    frobenius_distance,
    nnrank_interval,
    ntf_fit,
    outer,
    witness_tensor,
)
from nnrank.bounds import nonzero_fiber_count
from nnrank.ntf import hals_run

QUICK = NtfConfig(restarts=5)


def brute_force_fooling(m: np.ndarray) -> int:
    support = [tuple(p) for p in np.argwhere(m != 0)]
    best = 0
    for size in range(1, len(support) + 1):
        for subset in itertools.combinations(support, size):
            if all(m[i, l] * m[k, j] == 0 for (i, j), (k, l) in itertools.combinations(subset, 2)):
                best = size
                break
        else:
            break
    return best


class TestCanonicalDecomposition:
    def test_all_ones(self):
        t = DenseTensor.from_array(np.ones((2, 2, 2)))
        dec = canonical_decomposition(t)
        assert dec.r == 4
        for term, (i, j) in zip(dec.terms, itertools.product(range(2), range(2))):
            np.testing.assert_array_equal(term.factors[0], np.eye(2)[i])
            np.testing.assert_array_equal(term.factors[1], np.eye(2)[j])
            np.testing.assert_array_equal(term.factors[2], [1, 1])
        assert eval_cp(dec) == t

    def test_zero(self):
        assert canonical_decomposition(DenseTensor.zeros(Shape((2, 3)))).r == 0

    def test_fooling_4x4(self, fooling4x4):
        dec = canonical_decomposition(fooling4x4)
        assert dec.r == 4
        assert eval_cp(dec) == fooling4x4

    def test_negative_rejected(self):
        with pytest.raises(NegativeEntryError):
            canonical_decomposition(DenseTensor.from_array([[1, -1]]))

    def test_fibers_along_largest_mode(self):
        t = DenseTensor.from_array(np.ones((3, 2)))
        dec = canonical_decomposition(t)
        assert dec.r == 2
        assert all(term.factors[0].tolist() == [1, 1, 1] for term in dec.terms)

    def test_skips_zero_fibers(self):
        arr = np.zeros((2, 2, 3))
        arr[1, 0] = [1, 2, 3]
        dec = canonical_decomposition(DenseTensor.from_array(arr))
        assert dec.r == 1 == nonzero_fiber_count(DenseTensor.from_array(arr))


class TestFlatteningBound:
    def test_fooling_4x4(self, fooling4x4):
        assert flattening_rank_lower_bound(fooling4x4) == 3

    def test_rank_one(self):
        t = outer(Rank1Term([[1, 2], [3, 1], [1, 1]]), Shape((2, 2, 2)))
        assert flattening_rank_lower_bound(t) == 1

    def test_t0_222(self):
        assert flattening_rank_lower_bound(witness_tensor(Shape((2, 2, 2))).center) == 2

    def test_four_way_uses_two_by_two_splits(self):
        # e1(x)e1(x)e1(x)e1 + e2(x)e2(x)e2(x)e2 + ... reaches 4 only on a 2-vs-2 split
        arr = np.zeros((2, 2, 2, 2))
        for i, j in itertools.product(range(2), range(2)):
            arr[i, j, i, j] = 1
        t = DenseTensor.from_array(arr)
        assert flattening_rank_lower_bound(t) == 4


class TestFoolingSet:
    def test_identity(self):
        assert fooling_set_lower_bound(DenseTensor.from_array(np.eye(3))) == 3

    def test_all_ones(self):
        assert fooling_set_lower_bound(DenseTensor.from_array(np.ones((2, 2)))) == 1

    def test_fooling_4x4(self, fooling4x4):
        m = fooling4x4.array()
        claimed = [(0, 0), (1, 1), (2, 3), (3, 2)]
        for (i, j), (k, l) in itertools.combinations(claimed, 2):
            assert m[i, l] * m[k, j] == 0
        assert fooling_set_lower_bound(fooling4x4) == 4
        assert brute_force_fooling(m) == 4

    def test_result_is_a_fooling_set(self, fooling4x4):
        m = fooling4x4.array()
        found = fooling_set(fooling4x4)
        for (i, j), (k, l) in itertools.combinations(found, 2):
            assert m[i, l] * m[k, j] == 0

    @given(st.integers(1, 4), st.integers(1, 4), st.data())
    @settings(max_examples=80, deadline=None)
    def test_exact_search_matches_brute_force(self, rows, cols, data):
        bits = data.draw(st.lists(st.sampled_from([0.0, 1.0, 2.5]),
                                  min_size=rows * cols, max_size=rows * cols))
        m = np.array(bits).reshape(rows, cols)
        assert fooling_set_lower_bound(DenseTensor.from_array(m)) == brute_force_fooling(m)

    def test_greedy_beyond_limit(self):
        m = np.eye(8)
        assert fooling_set_lower_bound(DenseTensor.from_array(m)) == 8

    def test_matrix_only(self):
        with pytest.raises(ShapeError):
            fooling_set_lower_bound(DenseTensor.zeros(Shape((2, 2, 2))))


class TestNtf:
    def test_exact_rank_one(self, rng):
        t = outer(Rank1Term([rng.uniform(size=n) for n in (2, 3, 2)]), Shape((2, 3, 2)))
        res = ntf_fit(t, 1, NtfConfig(seed=3))
        assert res.converged and res.relative_residual < 1e-10

    def test_t0_four_terms(self):
        t0 = witness_tensor(Shape((2, 2, 2))).center
        assert ntf_fit(t0, 4).converged

    def test_t0_three_terms_never_converges(self):
        t0 = witness_tensor(Shape((2, 2, 2))).center
        res = ntf_fit(t0, 3, NtfConfig(restarts=20))
        assert not res.converged

    def test_result_fields_consistent(self, rng):
        t = DenseTensor.from_array(rng.uniform(size=(2, 2, 3)))
        res = ntf_fit(t, 2, QUICK)
        assert res.decomposition.is_nonnegative()
        assert res.decomposition.r == 2
        recomputed = frobenius_distance(eval_cp(res.decomposition), t) / t.norm()
        assert recomputed == pytest.approx(res.relative_residual, rel=1e-9, abs=1e-14)
        assert res.converged == (res.relative_residual < QUICK.residual_tol)
        assert res.iterations_used == len(res.history)

    def test_deterministic(self, rng):
        t = DenseTensor.from_array(rng.uniform(size=(2, 2, 2)))
        a, b = ntf_fit(t, 2, QUICK), ntf_fit(t, 2, QUICK)
        assert a.relative_residual == b.relative_residual
        assert a.history == b.history

    @pytest.mark.parametrize("dims, r", [((2, 2, 2), 2), ((3, 3, 3), 4), ((4, 4), 3),
                                         ((2, 2, 2, 2), 3)])
    def test_objective_nonincreasing_every_sweep(self, dims, r):
        rng = np.random.default_rng(99)
        X = rng.uniform(size=dims)
        for _ in range(3):
            mats = [rng.uniform(size=(n, r)) for n in dims]
            history, _ = hals_run(X, mats, 500, 1e-14, stall_tol=0.0)
            assert all(b <= a * (1 + 1e-12) for a, b in zip(history, history[1:]))

    def test_bad_config(self):
        with pytest.raises(ValueError):
            NtfConfig(restarts=0)
        with pytest.raises(ValueError):
            NtfConfig(residual_tol=0.0)


class TestInterval:
    def test_zero(self):
        iv = nnrank_interval(DenseTensor.zeros(Shape((2, 2, 2))))
        assert (iv.lower, iv.upper, iv.exact) == (0, 0, True)

    def test_fooling_4x4(self, fooling4x4):
        iv = nnrank_interval(fooling4x4)
        assert (iv.lower, iv.upper) == (4, 4) and iv.exact
        assert iv.lower_provenance == "fooling-set"

    def test_rank_two_matrix_rule(self):
        t = DenseTensor.from_array([[0.3, 0.9], [0.7, 0.2]])
        iv = nnrank_interval(t)
        assert (iv.lower, iv.upper) == (2, 2)
        assert iv.lower_provenance == "rank-le-2-rule"

    def test_negative(self):
        with pytest.raises(NegativeEntryError):
            nnrank_interval(DenseTensor.from_array([[1.0, -0.1]]))

    @pytest.mark.parametrize("dims", [(2, 2), (2, 2, 2), (2, 2, 3)])
    def test_t0_is_exactly_maximal_with_certificate(self, dims):
        shape = Shape(dims)
        t0 = witness_tensor(shape).center
        iv = nnrank_interval(t0, certificate=certify_max_rank(t0))
        n = shape.slice_bound()
        assert (iv.lower, iv.upper) == (n, n)

    def test_certificate_for_other_tensor_rejected(self):
        t0 = witness_tensor(Shape((2, 2, 2))).center
        other = DenseTensor.from_array(np.ones((2, 2, 2)))
        with pytest.raises(ValueError):
            nnrank_interval(other, certificate=certify_max_rank(t0))

    def test_sandwich_and_upper_reconstruction(self, rng):
        for dims in [(2, 2, 2), (2, 3), (3, 3), (2, 2, 3)]:
            for _ in range(4):
                t = DenseTensor.from_array(rng.uniform(size=dims))
                iv = nnrank_interval(t, QUICK)
                assert 0 <= iv.lower <= iv.upper <= t.shape.slice_bound()
                if iv.upper_provenance == "ntf-fit":
                    assert ntf_fit(t, iv.upper, QUICK).converged
                if t.shape.order == 2:
                    assert fooling_set_lower_bound(t) <= iv.upper

    def test_scale_invariance(self, rng):
        for dims in [(2, 2, 2), (3, 3), (2, 2, 3)]:
            t = DenseTensor.from_array(rng.uniform(size=dims))
            base = nnrank_interval(t, QUICK)
            for lam in (0.01, 7.0):
                assert nnrank_interval(lam * t, QUICK) == base

    def test_mode_permutation_of_certified_bounds(self, rng):
        arr = rng.uniform(size=(2, 3, 4))
        t = DenseTensor.from_array(arr)
        for perm in itertools.permutations(range(3)):
            p = DenseTensor.from_array(np.transpose(arr, perm))
            assert flattening_rank_lower_bound(p) == flattening_rank_lower_bound(t)
            assert canonical_decomposition(p).r == canonical_decomposition(t).r

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            RankInterval(3, 2, "flattening", "slice")
        assert str(RankInterval(4, 4, "fooling-set", "ntf-fit")) == \
            "[4,4] exact (fooling-set / ntf-fit)"


def test_decomposition_from_ntf_is_nonnegative(rng):
    t = DenseTensor.from_array(rng.uniform(size=(2, 2, 2)))
    dec = ntf_fit(t, 3, QUICK).decomposition
    assert isinstance(dec, Decomposition) and dec.is_nonnegative()
