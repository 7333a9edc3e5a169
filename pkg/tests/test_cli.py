import json
from pathlib import Path

import pandas as pd
import pytest
from omegaconf import OmegaConf

from join_tensors.cli import cmd_decompose, cmd_eig_sweep, cmd_rank, cmd_storage_sweep, cmd_verify, main
from join_tensors.utils import read_csv

CONFIG = Path(__file__).parents[1] / 'cfg' / 'join_tensors.yaml'


def last_json_line(text):
    return json.loads(text.strip().splitlines()[-1])


def make_cfg(tmp_path, command, **overrides):
    base = OmegaConf.load(str(CONFIG))
    base.pop('hydra')
    base.tag = 'test'
    base.command = command
    base.out = str(tmp_path)
    return OmegaConf.merge(base, OmegaConf.create(overrides))


class TestDecompose:

    def test_chain_cp(self, tmp_path):
        cfg = make_cfg(tmp_path, 'decompose', spec={'lattice': 'max', 'S': 'range:3', 'd': 5},
                       decompose_cfg={'kind': 'cp'})
        cmd_decompose(cfg)
        data = json.loads((tmp_path / 'cp.json').read_text())
        assert data['c'] == ['-1', '-1', '3']
        assert data['provenance']['spec']['lattice'] == 'max'
        assert data['provenance']['mode'] == 'exact'
        assert not (tmp_path / 'tt.json').exists()

    def test_divisor_tt(self, tmp_path):
        cfg = make_cfg(tmp_path, 'decompose', spec={'S': 'range:2', 'd': 4}, decompose_cfg={'kind': 'tt'})
        cmd_decompose(cfg)
        data = json.loads((tmp_path / 'tt.json').read_text())
        assert data['ranks'] == [2, 2, 2]
        assert [len(core['triplets']) for core in data['cores']] == [2, 4, 8]

    def test_cp_term_count(self, tmp_path):
        cfg = make_cfg(tmp_path, 'decompose', spec={'S': 'range:8', 'd': 8}, decompose_cfg={'kind': 'cp'})
        cmd_decompose(cfg)
        data = json.loads((tmp_path / 'cp.json').read_text())
        # lcms of subsets of 1..8 are 2^a 3^b 5^c 7^e with a <= 3
        assert data['r'] == 32

    def test_profile(self, tmp_path):
        cfg = make_cfg(tmp_path, 'decompose', spec={'S': 'range:4', 'd': 2},
                       decompose_cfg={'kind': 'cp', 'profile': True, 'nested_columns': True})
        cmd_decompose(cfg)
        grid = read_csv(tmp_path / 'profile.csv')
        assert list(grid['element']) == [1, 2, 3, 4]
        nnz = len(json.loads((tmp_path / 'cp.json').read_text())['E']['nnz_coords'])
        assert grid.drop(columns='element').values.sum() == nnz
        assert (tmp_path / 'profile.png').exists()


class TestSweeps:

    def test_storage_counts(self, tmp_path):
        cfg = make_cfg(tmp_path, 'storage_sweep', storage_cfg={'n_min': 2, 'n_max': 3, 'd_list': [4, 10]})
        frame = cmd_storage_sweep(cfg)
        count = {(r.n, r.d, r.representation): r['count'] for _, r in frame.iterrows()}
        assert count[(2, 4, 'tt')] == 14
        assert count[(2, 4, 'sym')] == 5
        assert count[(2, 4, 'cp')] == 5
        assert count[(3, 10, 'tt')] == 96
        assert count[(3, 10, 'sym')] == 66
        assert list(frame['representation'][:3]) == ['cp', 'sym', 'tt']
        lines = (tmp_path / 'storage_sweep.csv').read_text().splitlines()
        assert lines[0].startswith('# schema: join_tensors.storage_sweep/')
        assert lines[1].startswith('# provenance:')

    def test_chain_cp_count(self, tmp_path):
        cfg = make_cfg(tmp_path, 'storage_sweep', spec={'lattice': 'max'},
                       storage_cfg={'n_min': 3, 'n_max': 3, 'd_list': [4, 8]})
        frame = cmd_storage_sweep(cfg)
        assert list(frame[frame.representation == 'cp']['count']) == [9, 9]

    def test_skipped_cp_cells(self, tmp_path):
        cfg = make_cfg(tmp_path, 'storage_sweep',
                       storage_cfg={'n_min': 2, 'n_max': 4, 'd_list': [4], 'skip_cp_above_n': 3})
        frame = cmd_storage_sweep(cfg)
        cp = frame[frame.representation == 'cp'].set_index('n')
        assert cp.loc[4, 'status'] == 'skipped'
        assert pd.isna(cp.loc[4, 'count'])
        assert cp.loc[3, 'status'] == 'ok'

    def test_failed_cells_do_not_abort(self, tmp_path):
        table = tmp_path / 'f.csv'
        table.write_text('element,value\n1,1\n2,2\n')
        cfg = make_cfg(tmp_path, 'storage_sweep', spec={'f': f'table:{table}'},
                       storage_cfg={'n_min': 2, 'n_max': 3, 'd_list': [4]})
        frame = cmd_storage_sweep(cfg).set_index(['n', 'representation'])
        assert frame.loc[(2, 'tt'), 'status'] == 'ok'
        assert frame.loc[(3, 'cp'), 'status'].startswith('MissingValuation')
        assert frame.loc[(3, 'sym'), 'count'] == 15

    def test_sweep_is_deterministic(self, tmp_path):
        paths = []
        for name, jobs in (('a', 1), ('b', 2)):
            cfg = make_cfg(tmp_path / name, 'storage_sweep', jobs=jobs,
                           storage_cfg={'n_min': 2, 'n_max': 5, 'd_list': [4, 6]})
            cmd_storage_sweep(cfg)
            paths.append(tmp_path / name / 'storage_sweep.csv')
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_eig_sweep(self, tmp_path):
        cfg = make_cfg(tmp_path, 'eig_sweep', eig_cfg={'n_min': 1, 'n_max': 3, 'd_list': [4], 'history': True})
        frame = cmd_eig_sweep(cfg).set_index('n')
        assert frame.loc[1, 'lambda'] == pytest.approx(1.0)
        assert frame.loc[1, 'bound_real_upper'] == pytest.approx(1.0)
        assert frame.loc[2, 'lambda'] == pytest.approx(15.51, abs=5e-3)
        assert frame.loc[2, 'bound_real_upper'] == 16.0
        assert frame['bound_real_upper'].is_monotonic_increasing
        assert frame['monotone'].all()
        history = read_csv(tmp_path / 'eig_history.csv')
        assert set(history['n']) == {1, 2, 3}

    def test_eig_sweep_json(self, tmp_path):
        cfg = make_cfg(tmp_path, 'eig_sweep', format='json', eig_cfg={'n_min': 2, 'n_max': 2, 'd_list': [4]})
        cmd_eig_sweep(cfg)
        data = json.loads((tmp_path / 'eig_sweep.json').read_text())
        row = data['rows'][0]
        for key in ('n', 'd', 'lattice', 'f', 'lambda_lower', 'lambda_upper', 'iterations', 'converged',
                    'bound_real_upper', 'ratio'):
            assert key in row


class TestRank:

    def test_divisor_confirmed(self, tmp_path):
        cfg = make_cfg(tmp_path, 'rank', spec={'S': 'range:4', 'd': 8})
        report = cmd_rank(cfg)
        assert report.lower == report.upper == 6
        assert report.exact_rank == 6
        assert report.lcm_reference == 6
        assert report.verification == 'confirmed'
        data = json.loads((tmp_path / 'rank.json').read_text())
        assert data['exact_rank_per_k'] == report.exact_rank_per_k

    def test_lcm_order_three(self, tmp_path):
        report = cmd_rank(make_cfg(tmp_path, 'rank', spec={'S': 'range:5', 'd': 3}))
        assert report.exact_rank == 5
        assert report.lcm_reference == 5

    def test_chain(self, tmp_path):
        report = cmd_rank(make_cfg(tmp_path, 'rank', spec={'lattice': 'max', 'S': 'range:3', 'd': 6}))
        assert report.exact_rank == report.lower == report.upper == 3

    def test_guard_gives_bounds_only(self, tmp_path):
        report = cmd_rank(make_cfg(tmp_path, 'rank', spec={'S': 'range:6', 'd': 10}, rank_cfg={'max_entries': 1000}))
        assert report.exact_rank is None
        assert report.verification.startswith('skipped')
        assert report.upper == report.closure_sizes[5]


class TestVerify:

    @pytest.mark.parametrize('lattice,n,d', [('divisor', 4, 4), ('max', 5, 3)])
    def test_pipeline_passes(self, tmp_path, lattice, n, d):
        passed, rows = cmd_verify(make_cfg(tmp_path, 'verify', spec={'lattice': lattice, 'S': f'range:{n}', 'd': d}))
        assert passed, rows
        assert json.loads((tmp_path / 'verify.json').read_text())['passed']

    def test_corrupted_train_is_located(self, tmp_path):
        spec = {'S': 'range:3', 'd': 4}
        cmd_decompose(make_cfg(tmp_path, 'decompose', spec=spec, decompose_cfg={'kind': 'tt'}))
        path = tmp_path / 'tt.json'
        data = json.loads(path.read_text())
        data['cores'][-1]['values'][0] = '99'
        path.write_text(json.dumps(data))
        cfg = make_cfg(tmp_path, 'verify', spec=spec, verify_cfg={'tt_path': str(path)})
        passed, rows = cmd_verify(cfg)
        assert not passed
        tt_row = next(row for row in rows if row['check'] == 'tt entries')
        assert tt_row['status'] == 'FAIL'
        assert 'index (1, 1, 1, 1)' in tt_row['detail']
        assert main(cfg) == 1


class TestMain:

    def test_ok(self, tmp_path):
        assert main(make_cfg(tmp_path, 'verify', spec={'S': 'range:2', 'd': 3})) == 0

    def test_bad_spec(self, tmp_path, capsys):
        assert main(make_cfg(tmp_path, 'rank', spec={'lattice': 'nonsense'})) == 2
        err = last_json_line(capsys.readouterr().err)
        assert err['error'] == 'BadSpec'
        assert err['exit_code'] == 2

    def test_unknown_command(self, tmp_path):
        assert main(make_cfg(tmp_path, 'plot')) == 2

    def test_guard(self, tmp_path, capsys):
        cfg = make_cfg(tmp_path, 'verify', spec={'S': 'range:5', 'd': 6}, verify_cfg={'max_entries': 100})
        assert main(cfg) == 3
        assert last_json_line(capsys.readouterr().err)['error'] == 'TooLarge'
