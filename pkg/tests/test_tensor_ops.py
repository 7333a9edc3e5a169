from fractions import Fraction

import numpy as np
import pytest

from join_tensors.errors import BadOrder, BadShape, BadSplit, BadValue, ModeMismatch
from join_tensors.lattices import boolean_lattice, linear_extension, make_subset
from join_tensors.models.decomp import ValuationFunction, build_cp, build_tt, materialize_dense
from join_tensors.models.ops import (
    RankTolerance, check_coefficient_assumption, exact_rank, lcm_tt_rank_reference, make_contractor,
    numeric_rank, rank_bounds, unfolding, unfolding_ranks,
)

from conftest import LATTICES, VALUATIONS, subset, valuation


def contractors(S, f, d, as_float=False):
    return [make_contractor(build(S, f, d), as_float) for build in (materialize_dense, build_cp, build_tt)]


class TestContraction:

    @pytest.mark.parametrize('backend', [0, 1, 2])
    def test_lcm_apply(self, lcm2, identity, backend):
        C = contractors(lcm2, identity, 4)[backend]
        assert list(C.apply([1, 1])) == [15, 16]
        assert list(C.apply([1, 0])) == [1, 2]
        assert C.quadratic_form([1, 1]) == 31
        assert C.quadratic_form([1, 0]) == 1

    def test_all_ones_is_rank_one(self, chain3):
        x = [Fraction(1, 2), 2, 3]
        for C in contractors(chain3, ValuationFunction.parse('constant:1'), 4):
            assert list(C.apply(x)) == [Fraction(11, 2) ** 3] * 3

    @pytest.mark.parametrize('lattice', LATTICES)
    @pytest.mark.parametrize('f', VALUATIONS)
    @pytest.mark.parametrize('d', [2, 3, 4, 5])
    def test_backends_agree_exactly(self, lattice, f, d):
        S = subset(lattice, 4)
        dense, cp, tt = contractors(S, valuation(lattice, f), d)
        rng = np.random.default_rng(d)
        for _ in range(3):
            x = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-4, 5, 4), rng.integers(1, 5, 4))]
            expected = list(dense.apply(x))
            assert list(cp.apply(x)) == expected
            assert list(tt.apply(x)) == expected
            q = dense.quadratic_form(x)
            assert cp.quadratic_form(x) == q == tt.quadratic_form(x)
            assert q == sum(a * b for a, b in zip(x, expected))

    def test_float_backends_agree(self, divisor, identity):
        S = make_subset(divisor, 'range:5')
        x = np.random.default_rng(0).uniform(0.1, 1.0, 5)
        dense, cp, tt = contractors(S, identity, 6, as_float=True)
        np.testing.assert_allclose(cp.apply(x), dense.apply(x), rtol=1e-12)
        np.testing.assert_allclose(tt.apply(x), dense.apply(x), rtol=1e-12)

    def test_shape_mismatch(self, lcm2, identity):
        for C in contractors(lcm2, identity, 3):
            with pytest.raises(BadShape):
                C.apply([1, 2, 3])

    def test_exact_contractor_rejects_floats(self, lcm2, identity):
        C = make_contractor(build_tt(lcm2, identity, 4))
        with pytest.raises(ModeMismatch):
            C.apply([0.5, 1.0])

    def test_positivity(self, lcm2, identity):
        for C in contractors(lcm2, identity, 4):
            assert C.entries_positive()
            assert C.max_abs_entry() == 2
        for C in contractors(lcm2, ValuationFunction.parse('constant:-1'), 4):
            assert not C.entries_positive()


class TestUnfolding:

    def test_lcm_order_three(self, lcm2, identity):
        M = unfolding(materialize_dense(lcm2, identity, 3), 1)
        assert np.array_equal(M.matrix, [[1, 2, 2, 2], [2, 2, 2, 2]])
        assert exact_rank(M.matrix) == 2

    def test_split_positions(self, lcm2, identity):
        A = materialize_dense(lcm2, identity, 3)
        for k in (0, 3):
            with pytest.raises(BadSplit):
                unfolding(A, k)

    def test_transposed_splits(self, divisor, identity):
        A = materialize_dense(make_subset(divisor, 'range:3'), identity, 4)
        # symmetric tensor: A_k and A_{d-k} are transposes of each other
        assert np.array_equal(unfolding(A, 1).matrix, unfolding(A, 3).matrix.T)

    def test_constant_has_rank_one(self, chain3):
        A = materialize_dense(chain3, ValuationFunction.parse('constant:1'), 4)
        assert unfolding_ranks(A) == [1, 1, 1]


class TestRank:

    def test_exact_rank_examples(self):
        assert exact_rank([[1, 2], [2, 2]]) == 2
        assert exact_rank(np.ones((4, 4), dtype=int)) == 1
        assert exact_rank([[Fraction(1, 2), 1], [1, 2]]) == 1
        assert exact_rank([[0, 0], [0, 0]]) == 0

    def test_exact_rank_needs_skipped_columns(self):
        M = [[0, 1, 2], [0, 2, 4], [0, 0, 3]]
        assert exact_rank(M) == 2

    def test_exact_rank_rejects_floats(self):
        with pytest.raises(ModeMismatch):
            exact_rank([[1.0, 2.0], [3.0, 4.0]])

    def test_numeric_rank(self):
        assert numeric_rank(np.diag([1.0, 1e-18])) == 1
        assert numeric_rank(np.eye(3)) == 3
        assert numeric_rank(np.diag([1.0, 1e-3]), RankTolerance('absolute', 1e-2)) == 1
        with pytest.raises(BadValue):
            numeric_rank([[np.nan, 1.0]])

    @pytest.mark.parametrize('lattice', LATTICES)
    def test_numeric_agrees_with_exact(self, lattice):
        A = materialize_dense(subset(lattice, 4), valuation(lattice, 'identity'), 4)
        exact = unfolding_ranks(A)
        assert unfolding_ranks(A, exact=False) == exact

    def test_coefficient_assumption(self, divisor, chain3, identity):
        assert check_coefficient_assumption(linear_extension(divisor, [2, 3]), identity, 2)
        assert not check_coefficient_assumption(chain3, ValuationFunction.parse('constant:1'), 3)
        single = linear_extension(divisor, [5])
        assert check_coefficient_assumption(single, identity, 3)
        assert not check_coefficient_assumption(single, ValuationFunction.parse('constant:0'), 3)

    @pytest.mark.parametrize('n,d,bound', [(2, 4, 2), (4, 8, 6)])
    def test_divisor_bounds(self, divisor, identity, n, d, bound):
        report = rank_bounds(make_subset(divisor, f'range:{n}'), identity, d)
        assert report.lower == report.upper == bound
        assert report.assumption_holds
        assert report.equality == bound

    @pytest.mark.parametrize('d', [6, 7, 10])
    def test_chain_bounds(self, chain3, identity, d):
        report = rank_bounds(chain3, identity, d)
        assert report.lower == report.upper == 3

    def test_lower_bound_is_clamped(self):
        ctx = boolean_lattice(4)
        atoms = linear_extension(ctx, ['{1}', '{2}', '{3}', '{4}'])
        report = rank_bounds(atoms, ValuationFunction.parse('constant:1'), 2)
        assert report.raw_lower == 2 * 4 - 10
        assert report.lower == 1
        assert report.lower_clamped

    def test_lcm_reference(self):
        assert lcm_tt_rank_reference(4, 8) == 6
        assert lcm_tt_rank_reference(2, 3) == 2
        assert lcm_tt_rank_reference(1, 7) == 1
        with pytest.raises(BadOrder):
            lcm_tt_rank_reference(3, 2)
