import json
from itertools import combinations

import numpy as np
import pytest

from join_tensors.errors import BadSpec, NotAPartialOrder, NotASemilattice, UnknownElement
from join_tensors.lattices import (
    ExplicitSemilattice, boolean_lattice, coprime_products, is_worst_case,
    join_closure, linear_extension, make_context, make_subset, moebius, ordered_subset,
    validate_semilattice, zeta_matrix,
)

from conftest import EXPLICIT6


class TestContexts:

    def test_divisor_order_and_join(self, divisor):
        assert divisor.leq(2, 6)
        assert not divisor.leq(4, 6)
        assert divisor.join(4, 6) == 12

    def test_divisor_rejects_non_positive(self, divisor):
        with pytest.raises(UnknownElement):
            divisor.check_element(0)
        with pytest.raises(UnknownElement):
            divisor.check_element('a')

    @pytest.mark.parametrize('x,y', [(0, 6), (6, 0), ('a', 6), (2.0, 6), (True, 6)])
    def test_divisor_order_and_join_check_elements(self, divisor, x, y):
        with pytest.raises(UnknownElement):
            divisor.leq(x, y)
        with pytest.raises(UnknownElement):
            divisor.join(x, y)

    @pytest.mark.parametrize('x,y', [(-1, 2), (2, -1), ('a', 2), (1.5, 2)])
    def test_chain_order_and_join_check_elements(self, chain, x, y):
        with pytest.raises(UnknownElement):
            chain.leq(x, y)
        with pytest.raises(UnknownElement):
            chain.join(x, y)

    def test_chain_join_is_max(self, chain):
        assert chain.join(3, 5) == 5
        assert chain.leq(0, 0)

    def test_explicit_joins(self, explicit6):
        assert explicit6.join('a', 'b') == 'ab'
        assert explicit6.join('a', 'c') == 'top'
        assert explicit6.join('ab', 'bc') == 'top'
        assert explicit6.leq('b', 'top')

    def test_explicit_unknown_element(self, explicit6):
        with pytest.raises(UnknownElement):
            explicit6.join('a', 'zz')

    def test_cycle_is_not_a_partial_order(self):
        with pytest.raises(NotAPartialOrder):
            ExplicitSemilattice(['x', 'y'], [('x', 'y'), ('y', 'x')])

    def test_missing_join_fails_fast(self):
        # a, b have two minimal upper bounds c, d
        rel = [('a', 'c'), ('a', 'd'), ('b', 'c'), ('b', 'd')]
        with pytest.raises(NotASemilattice, match='minimal upper bounds'):
            ExplicitSemilattice(['a', 'b', 'c', 'd'], rel)

    def test_lenient_load_reports_missing_joins(self):
        rel = [('a', 'c'), ('a', 'd'), ('b', 'c'), ('b', 'd')]
        ctx = ExplicitSemilattice(['a', 'b', 'c', 'd'], rel, strict=False)
        report = validate_semilattice(ctx, ['a', 'b', 'c', 'd'])
        assert not report.valid
        assert 'NotASemilattice' in report.kinds()

    def test_wrong_join_table_is_caught(self):
        ctx = ExplicitSemilattice(['a', 'b', 'c'], [('a', 'b'), ('b', 'c')],
                                  join_table={('a', 'b'): 'c', ('b', 'a'): 'c'}, strict=False)
        report = validate_semilattice(ctx, ['a', 'b', 'c'])
        assert 'minimality' in report.kinds()

    def test_missing_second_level_join_is_reported(self):
        # pairwise joins of the 13 checked elements exist; ab v c has two minimal upper bounds u, v
        bottom = [f'z{i}' for i in range(10)]
        rel = [(lo, hi) for lo, hi in zip(bottom, bottom[1:])]
        rel += [('z9', 'a'), ('z9', 'b'), ('z9', 'c')]
        rel += [('a', 'ab'), ('b', 'ab'), ('a', 'ac'), ('c', 'ac'), ('b', 'bc'), ('c', 'bc')]
        rel += [(x, y) for x in ('ab', 'ac', 'bc') for y in ('u', 'v')]
        elements = bottom + ['a', 'b', 'c', 'ab', 'ac', 'bc', 'u', 'v']
        ctx = ExplicitSemilattice(elements, rel, strict=False)
        checked = bottom + ['a', 'b', 'c']
        report = validate_semilattice(ctx, checked, num_samples=0)
        assert not report.exhaustive
        assert not report.valid
        missing = {frozenset(v.elements) for v in report.violations if v.kind == 'NotASemilattice'}
        assert frozenset(('ab', 'c')) in missing
        assert frozenset(('ab', 'ac')) in missing
        assert all(frozenset(pair) not in missing for pair in combinations(checked, 2))

    def test_valid_semilattice_passes(self, explicit6):
        report = validate_semilattice(explicit6, explicit6.elements)
        assert report.valid
        assert report.exhaustive

    def test_dual_joins_are_meets(self, explicit6):
        dual = explicit6.dual(strict=False)
        assert dual.join('ab', 'bc') == 'b'
        assert dual.leq('top', 'a')

    def test_dual_of_non_meet_semilattice_fails_strict(self, explicit6):
        # a and c have no common lower bound
        with pytest.raises(NotASemilattice):
            explicit6.dual()

    def test_from_json(self, tmp_path):
        path = tmp_path / 'poset.json'
        path.write_text(json.dumps(EXPLICIT6))
        ctx = make_context(f'explicit:{path}')
        assert ctx.join('b', 'c') == 'bc'

    def test_dual_selector(self, tmp_path):
        path = tmp_path / 'chain.json'
        path.write_text(json.dumps({'elements': ['x', 'y', 'z'], 'leq': [['x', 'y'], ['y', 'z']]}))
        ctx = make_context(f'dual:{path}')
        assert ctx.join('x', 'z') == 'x'

    def test_unknown_selector(self):
        with pytest.raises(BadSpec):
            make_context('lattice-of-doom')


class TestSubsets:

    def test_range(self, divisor):
        assert make_subset(divisor, 'range:4').elements == (1, 2, 3, 4)
        assert make_subset(divisor, '3').elements == (1, 2, 3)

    def test_list_is_sorted_into_a_linear_extension(self, divisor):
        S = make_subset(divisor, 'list:6,2,3')
        assert S.elements == (2, 3, 6)
        assert S.is_linear_extension()

    def test_explicit_range_takes_declared_prefix(self, explicit6):
        assert make_subset(explicit6, 'range:3').elements == ('a', 'b', 'c')

    def test_explicit_linear_extension_respects_order(self, explicit6):
        S = linear_extension(explicit6, ['top', 'bc', 'c', 'a'])
        pos = S.position
        assert pos['c'] < pos['bc'] < pos['top']
        assert pos['a'] < pos['top']

    def test_ordered_subset_checks_order(self, divisor):
        with pytest.raises(BadSpec):
            ordered_subset(divisor, [6, 2])

    def test_duplicates_rejected(self, divisor):
        with pytest.raises(BadSpec):
            linear_extension(divisor, [2, 2])


class TestClosures:

    def test_divisor_closure(self, divisor):
        S = make_subset(divisor, 'range:4')
        assert join_closure(S, 2).elements.elements == (1, 2, 3, 4, 6, 12)
        assert join_closure(S, 1).elements.elements == S.elements

    def test_closure_stabilizes_at_n(self, divisor):
        S = make_subset(divisor, 'range:5')
        top = join_closure(S, 5).elements.elements
        for k in (6, 9, 20):
            assert join_closure(S, k).elements.elements == top

    def test_renumbering(self, divisor):
        C = join_closure(make_subset(divisor, 'list:2,3'), 2)
        assert C.tau == {2: 0, 3: 1, 6: 2}

    def test_order_must_be_positive(self, divisor):
        with pytest.raises(BadSpec):
            join_closure(make_subset(divisor, 'range:2'), 0)

    @pytest.mark.parametrize('n,k', [(4, 2), (6, 3), (10, 2), (8, 4)])
    def test_coprime_products_match_closure(self, divisor, n, k):
        S = make_subset(divisor, f'range:{n}')
        assert set(join_closure(S, k).elements) == coprime_products(n, k)

    def test_worst_case_antichain(self):
        ctx = boolean_lattice(4)
        atoms = linear_extension(ctx, ['{1}', '{2}', '{3}', '{4}'])
        assert len(join_closure(atoms, 4)) == 15
        assert is_worst_case(atoms, 4)

    def test_divisor_range_is_not_worst_case(self, divisor):
        S = make_subset(divisor, 'range:4')
        assert not is_worst_case(S, 4)
        assert len(join_closure(S, 4)) < 2 ** 4 - 1


class TestIncidence:

    def test_chain_zeta_is_upper_triangular(self, chain3):
        Z = zeta_matrix(chain3, chain3)
        assert Z.nnz == 6
        assert np.array_equal(Z.as_integers(), np.triu(np.ones((3, 3), dtype=int)))

    def test_moebius_divisor(self, divisor):
        Y = linear_extension(divisor, [1, 2, 3, 6])
        mu = moebius(Y)
        assert mu(1, 1) == 1
        assert mu(1, 2) == -1
        assert mu(1, 6) == 1
        assert mu(2, 3) == 0

    def test_moebius_inverts_zeta(self, explicit6):
        Y = linear_extension(explicit6, explicit6.elements)
        Z = zeta_matrix(Y, Y).as_integers().astype(object)
        assert np.array_equal(np.dot(Z, moebius(Y).dense()), np.eye(6, dtype=int))
