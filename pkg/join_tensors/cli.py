"""Command implementations behind scripts/join_tensors.py.

Every command takes the hydra config, writes its files into cfg.out (the hydra
run directory by default) and returns what it computed. main() dispatches on
cfg.command and turns library errors into exit codes.
"""

import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import imageio
import numpy as np
import pandas as pd
import wandb
from hydra.utils import to_absolute_path
from joblib import Parallel, delayed
from omegaconf import OmegaConf
from tqdm import tqdm

from join_tensors import __version__
from join_tensors.errors import BadSpec, BoundViolation, JoinTensorError, TooLarge, VerificationFailure
from join_tensors.lattices import DivisorLattice, make_context, make_subset, ordered_subset
from join_tensors.models.decomp import (
    EXACT, FLOAT, ValuationFunction, build_cp, build_tt, cp_coefficients_from_moebius, cp_nnz_count,
    evaluate_cp, evaluate_tt, load_decomposition, materialize_dense, nested_column_order, nnz_report,
    recover_entry, save_decomposition, symmetric_part, symmetric_report, tt_nnz_count,
)
from join_tensors.models.decomp.polyadic import PolyadicDecomposition
from join_tensors.models.decomp.scalars import values_equal
from join_tensors.models.eigen import PowerConfig, bound_check, gerschgorin_bound, power_method
from join_tensors.models.ops import RankTolerance, lcm_tt_rank_reference, make_contractor, rank_bounds, unfolding_ranks
from join_tensors.utils import print_storage, print_table, set_seed, make_rng, write_csv, write_json

logger = logging.getLogger(__name__)

SCHEMAS = {
    'storage_sweep': 'join_tensors.storage_sweep/1',
    'eig_sweep': 'join_tensors.eig_sweep/1',
    'eig_history': 'join_tensors.eig_history/1',
    'profile': 'join_tensors.cp_profile/1',
}


@dataclass(frozen=True)
class RunSpec:
    """lattice | S | f | d | mode selectors, as given in cfg.spec."""

    lattice: str = 'divisor'
    S: str = 'range:4'
    f: str = 'identity'
    d: int = 4
    mode: Optional[str] = None

    @classmethod
    def from_cfg(cls, cfg):
        spec = cfg.get('spec', None) or {}
        mode = spec.get('mode', None)
        return cls(
            lattice=str(spec.get('lattice', 'divisor')),
            S=str(spec.get('S', 'range:4')),
            f=str(spec.get('f', 'identity')),
            d=int(spec.get('d', 4)),
            mode=None if mode in (None, 'auto') else str(mode),
        )

    def context(self):
        return make_context(self.lattice, to_absolute_path)

    def build(self, S_selector=None, d=None, mode=None):
        """(S, f, d, mode) with paths resolved against the launch directory."""
        ctx = self.context()
        S = make_subset(ctx, S_selector or self.S, to_absolute_path)
        f = ValuationFunction.parse(self.f, to_absolute_path)
        mode = f.resolve_mode(ctx, mode or self.mode)
        return S, f, self.d if d is None else d, mode

    def to_dict(self):
        return {'lattice': self.lattice, 'S': self.S, 'f': self.f, 'd': self.d, 'mode': self.mode or 'auto'}


def provenance(cfg, mode=None):
    return {
        'command': cfg.command,
        'spec': RunSpec.from_cfg(cfg).to_dict(),
        'mode': mode,
        'seed': cfg.get('seed', 0),
        'version': __version__,
    }


def output_dir(cfg):
    out = Path(to_absolute_path(str(cfg.get('out', None) or '.')))
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_table(cfg, frame, name, mode=None):
    """CSV (with schema and provenance header lines) or JSON records, per cfg.format."""
    out = output_dir(cfg)
    prov = provenance(cfg, mode)
    if cfg.get('format', 'csv') == 'json':
        filename = out / f'{name}.json'
        records = json.loads(frame.to_json(orient='records'))
        write_json({'schema': SCHEMAS[name], 'provenance': prov, 'rows': records}, filename)
    else:
        filename = out / f'{name}.csv'
        write_csv(frame, filename, SCHEMAS[name], prov)
    return filename


def log_row(row):
    if wandb.run is not None:
        wandb.log({k: v for k, v in row.items() if isinstance(v, (int, float))})


def cmd_decompose(cfg):
    spec = RunSpec.from_cfg(cfg)
    S, f, d, mode = spec.build()
    dcfg = cfg.get('decompose_cfg', None) or {}
    kind = dcfg.get('kind', 'both')
    if kind not in ('cp', 'tt', 'both'):
        raise BadSpec(f"decompose kind must be cp, tt or both, got {kind!r}")
    out = output_dir(cfg)
    prov = provenance(cfg, mode)
    written = []

    if kind in ('cp', 'both'):
        columns = None
        if dcfg.get('nested_columns', False):
            prefixes = [ordered_subset(S.context, S.elements[:m], check=False) for m in range(1, len(S) + 1)]
            columns = nested_column_order(prefixes, d)
        D = build_cp(S, f, d, mode, columns)
        written.append(save_decomposition(D, out / 'cp.json', prov))
        print_storage(nnz_report(D))
        if dcfg.get('profile', False):
            written.extend(write_profile(cfg, D, int(dcfg.get('profile_scale', 8))))

    if kind in ('tt', 'both'):
        T = build_tt(S, f, d, mode)
        written.append(save_decomposition(T, out / 'tt.json', prov))
        logger.info(f'TT ranks {T.ranks}')
        print_storage(nnz_report(T))
    return written


def write_profile(cfg, D: PolyadicDecomposition, scale=8):
    """0/1 grid of the factor E as CSV plus a gray-on-white PNG of the same grid."""
    grid = D.factor.astype(np.uint8)
    frame = pd.DataFrame(grid, columns=[str(y) for y in D.columns])
    frame.insert(0, 'element', [str(x) for x in D.base])
    csv_file = write_table(cfg, frame, 'profile', D.mode)
    image = np.where(grid == 1, 128, 255).astype(np.uint8)
    image = np.kron(image, np.ones((scale, scale), dtype=np.uint8))
    png_file = output_dir(cfg) / 'profile.png'
    imageio.imwrite(png_file, image)
    logger.info(f'Wrote {png_file}')
    return [csv_file, png_file]


def _cells(section, n_default, d_default):
    n_min = int(section.get('n_min', n_default[0]))
    n_max = int(section.get('n_max', n_default[1]))
    d_list = [int(d) for d in section.get('d_list', d_default)]
    if n_min < 1 or n_max < n_min or not d_list:
        raise BadSpec(f'empty sweep: n in {n_min}..{n_max}, d in {d_list}')
    return [(n, d) for n in range(n_min, n_max + 1) for d in d_list]


def _failed(row, e):
    row['status'] = f'{type(e).__name__}: {e}'
    logger.warning(f"cell n={row['n']} d={row['d']} {row.get('representation', '')}: {row['status']}")
    return row


def _storage_cell(spec: RunSpec, n, d, skip_cp_above):
    rows = [{'n': n, 'd': d, 'representation': 'sym', 'count': symmetric_report(n, d).nnz, 'status': 'ok'}]
    try:
        S, f, d, mode = spec.build(f'range:{n}', d)
    except JoinTensorError as e:
        return rows + [_failed({'n': n, 'd': d, 'representation': rep, 'count': None}, e) for rep in ('tt', 'cp')]
    for rep in ('tt', 'cp'):
        row = {'n': n, 'd': d, 'representation': rep, 'count': None, 'status': 'ok'}
        if rep == 'cp' and skip_cp_above is not None and (n > skip_cp_above[0] or d > skip_cp_above[1]):
            row['status'] = 'skipped'
        else:
            try:
                row['count'] = tt_nnz_count(S, f, d, mode) if rep == 'tt' else nnz_report(build_cp(S, f, d, mode)).nnz
            except (JoinTensorError, MemoryError, OverflowError) as e:
                _failed(row, e)
        rows.append(row)
    return rows


def cmd_storage_sweep(cfg):
    spec = RunSpec.from_cfg(cfg)
    scfg = cfg.get('storage_cfg', None) or {}
    cells = _cells(scfg, (2, 20), (4, 6, 8, 10, 12, 14))
    skip = None
    if scfg.get('skip_cp_above_n', None) is not None or scfg.get('skip_cp_above_d', None) is not None:
        skip = (scfg.get('skip_cp_above_n', None) or 10 ** 9, scfg.get('skip_cp_above_d', None) or 10 ** 9)
    results = Parallel(n_jobs=int(cfg.get('jobs', 1)))(
        delayed(_storage_cell)(spec, n, d, skip) for n, d in tqdm(cells, desc='storage sweep'))
    rows = [row for cell in results for row in cell]
    for row in rows:
        log_row(row)
    frame = pd.DataFrame(rows, columns=['n', 'd', 'representation', 'count', 'status'])
    frame = frame.sort_values(['n', 'd', 'representation'], kind='stable').reset_index(drop=True)
    frame['count'] = frame['count'].astype('Int64')
    write_table(cfg, frame, 'storage_sweep', spec.mode)
    return frame


def _representation(backend, S, f, d, mode, guard):
    if backend == 'tt':
        return build_tt(S, f, d, mode)
    if backend == 'cp':
        return build_cp(S, f, d, mode)
    if backend == 'dense':
        return materialize_dense(S, f, d, mode, guard)
    raise BadSpec(f'unknown backend {backend!r}; expected tt, cp or dense')


def _eig_cell(spec: RunSpec, n, d, backend, power_cfg: PowerConfig, guard):
    row = {'n': n, 'd': d, 'lattice': spec.lattice, 'f': spec.f, 'backend': backend, 'status': 'ok'}
    history = []
    try:
        S, f, d, mode = spec.build(f'range:{n}', d, spec.mode or FLOAT)
        C = make_contractor(_representation(backend, S, f, d, mode, guard), as_float=True)
        est = power_method(C, power_cfg)
        region = gerschgorin_bound(S, f, d, mode)
        check = bound_check(est, region, tol=power_cfg.tol * float(C.max_abs_entry()))
        row.update({
            'lambda_lower': est.lambda_lower,
            'lambda_upper': est.lambda_upper,
            'lambda': est.lam,
            'rayleigh': est.rayleigh,
            'iterations': est.iterations,
            'converged': est.converged,
            'monotone': est.history_is_monotone(),
            'bound_real_upper': check.real_upper,
            'ratio': check.ratio,
            'bound_holds': check.holds,
        })
        if est.warnings:
            row['status'] = '; '.join(est.warnings)
        history = est.history
    except JoinTensorError as e:
        _failed(row, e)
    return row, history


def cmd_eig_sweep(cfg):
    spec = RunSpec.from_cfg(cfg)
    ecfg = cfg.get('eig_cfg', None) or {}
    cells = _cells(ecfg, (1, 10), (4, 6, 8, 10, 12, 14))
    power_cfg = PowerConfig.from_cfg(ecfg)
    backend = ecfg.get('backend', 'tt')
    guard = int(cfg.get('guard', 10 ** 8))
    results = Parallel(n_jobs=int(cfg.get('jobs', 1)))(
        delayed(_eig_cell)(spec, n, d, backend, power_cfg, guard) for n, d in tqdm(cells, desc='eig sweep'))

    for row, _ in results:
        if row.get('bound_holds') is False:
            raise BoundViolation(
                f"n={row['n']} d={row['d']}: lambda_upper {row['lambda_upper']} exceeds the bound "
                f"{row['bound_real_upper']}")
        log_row(row)

    columns = ['n', 'd', 'lattice', 'f', 'backend', 'lambda_lower', 'lambda_upper', 'lambda', 'rayleigh',
               'iterations', 'converged', 'monotone', 'bound_real_upper', 'ratio', 'status']
    frame = pd.DataFrame([row for row, _ in results], columns=columns)
    frame = frame.sort_values(['n', 'd'], kind='stable').reset_index(drop=True)
    frame['iterations'] = frame['iterations'].astype('Int64')
    write_table(cfg, frame, 'eig_sweep', spec.mode or FLOAT)

    if ecfg.get('history', False):
        hist = pd.DataFrame(
            [{'n': row['n'], 'd': row['d'], 'iter': k, 'lower': lo, 'upper': hi}
             for row, history in results for k, (lo, hi) in enumerate(history, start=1)],
            columns=['n', 'd', 'iter', 'lower', 'upper'])
        write_table(cfg, hist, 'eig_history', spec.mode or FLOAT)
    return frame


def _is_lcm_family(S, f, d):
    n = len(S)
    return (isinstance(S.context, DivisorLattice) and tuple(S.elements) == tuple(range(1, n + 1))
            and f.kind == 'identity' and f.scale == 1 and d >= 3)


def cmd_rank(cfg):
    spec = RunSpec.from_cfg(cfg)
    S, f, d, mode = spec.build()
    rcfg = cfg.get('rank_cfg', None) or {}
    tol = RankTolerance(rcfg.get('tol_kind', 'default'), rcfg.get('tol_value', None))
    report = rank_bounds(S, f, d, float(rcfg.get('abs_tol', 1e-12)), mode)
    if _is_lcm_family(S, f, d):
        report.lcm_reference = lcm_tt_rank_reference(len(S), d)

    n = len(S)
    max_entries = int(rcfg.get('max_entries', 10 ** 6))
    sandwich_ok = True
    if n ** d > max_entries:
        report.verification = f'skipped: {n}^{d} entries exceed the guard {max_entries}'
        logger.warning(report.verification)
    else:
        A = materialize_dense(S, f, d, mode, max_entries)
        per_k = unfolding_ranks(A, exact=mode == EXACT, tol_policy=tol)
        report.exact_rank_per_k = per_k
        report.exact_rank = max(per_k)
        if report.assumption_holds:
            sandwich_ok = report.lower <= per_k[d // 2 - 1] and report.exact_rank <= report.upper
            report.verification = 'confirmed' if sandwich_ok else 'violated'
        else:
            report.verification = 'coefficient assumption fails; bounds not applicable'

    data = report.to_dict()
    data['tolerance'] = tol.describe() if mode != EXACT else 'exact'
    data['provenance'] = provenance(cfg, mode)
    write_json(data, output_dir(cfg) / 'rank.json')
    print_table([data], ['n', 'd', 'lower', 'upper', 'exact_rank', 'assumption_holds', 'verification'],
                title='TT-rank bounds')
    if not sandwich_ok:
        raise VerificationFailure(f'exact ranks {report.exact_rank_per_k} outside [{report.lower}, {report.upper}]')
    return report


def _random_vectors(rng, n, mode, count):
    for _ in range(count):
        if mode == EXACT:
            num, den = rng.integers(-5, 6, size=n), rng.integers(1, 7, size=n)
            yield [Fraction(int(a), int(b)) for a, b in zip(num, den)]
        else:
            yield rng.uniform(0.1, 1.0, size=n)


def _agree(a, b, mode):
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    if mode == EXACT:
        return all(x == y for x, y in zip(a, b))
    a, b = a.astype(np.float64), b.astype(np.float64)
    return bool(np.allclose(a, b, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(a).max())))


def _entrywise(A, evaluate, mode):
    for idx in np.ndindex(*A.values.shape):
        value = evaluate(idx)
        if not values_equal(value, A.values[idx], mode):
            return f'index {tuple(i + 1 for i in idx)}: got {value}, dense {A.values[idx]}'
    return None


def cmd_verify(cfg):
    spec = RunSpec.from_cfg(cfg)
    S, f, d, mode = spec.build()
    vcfg = cfg.get('verify_cfg', None) or {}
    max_entries = int(vcfg.get('max_entries', 10 ** 6))
    if len(S) ** d > max_entries:
        raise TooLarge(f'verify needs the dense tensor: {len(S)}^{d} entries exceed {max_entries}')

    A = materialize_dense(S, f, d, mode, max_entries)
    D = build_cp(S, f, d, mode)
    if vcfg.get('tt_path', None):
        T = load_decomposition(to_absolute_path(vcfg.tt_path), S.context)
        tt_source = f'loaded {vcfg.tt_path}'
    else:
        T = build_tt(S, f, d, mode)
        tt_source = 'built'
    rows = []

    def record(check, failure, passed_detail=''):
        rows.append({'check': check, 'status': 'pass' if failure is None else 'FAIL',
                     'detail': passed_detail if failure is None else failure})

    record('cp entries', _entrywise(A, lambda idx: evaluate_cp(D, idx), mode), f'{A.values.size} entries')
    try:
        failure = _entrywise(A, lambda idx: evaluate_tt(T, idx), mode)
    except JoinTensorError as e:
        failure = f'{type(e).__name__}: {e}'
    record('tt entries', failure, f'{tt_source}, ranks {T.ranks}')

    P = symmetric_part(A)
    bad = next((idx for idx in np.ndindex(*A.values.shape) if recover_entry(P, idx) != A.values[idx]), None)
    record('symmetric part', None if bad is None else f'index {tuple(i + 1 for i in bad)}', f'{len(P)} entries')

    moebius_c = cp_coefficients_from_moebius(D.closure, f, mode)
    record('moebius coefficients', None if _agree(moebius_c, D.coefficients, mode) else 'coefficients differ',
           f'r = {D.r}')

    counts = {'cp': (nnz_report(D).nnz, cp_nnz_count(S, d))}
    if tt_source == 'built':
        counts['tt'] = (nnz_report(T).nnz, tt_nnz_count(S, f, d, mode))
    mismatch = [k for k, (a, b) in counts.items() if a != b]
    record('storage counts', f'{mismatch} differ: {counts}' if mismatch else None,
           ', '.join(f'{k} {a}' for k, (a, _) in counts.items()))

    contractors = [make_contractor(obj) for obj in (A, D, T)]
    rng = make_rng(int(cfg.get('seed', 0)))
    failure = None
    for x in _random_vectors(rng, len(S), mode, int(vcfg.get('num_vectors', 5))):
        dense = contractors[0]
        for C in contractors[1:]:
            if not _agree(C.apply(x), dense.apply(x), mode) or \
                    not _agree(C.quadratic_form(x), dense.quadratic_form(x), mode):
                failure = f'{C.backend} disagrees with dense at x = {[str(v) for v in x]}'
                break
        if failure:
            break
    record('contractions', failure, 'dense, cp, tt')

    passed = all(row['status'] == 'pass' for row in rows)
    print_table(rows, ['check', 'status', 'detail'], title=f'verify {spec.lattice} n={len(S)} d={d}')
    write_json({'passed': passed, 'checks': rows, 'provenance': provenance(cfg, mode)},
               output_dir(cfg) / 'verify.json')
    return passed, rows


COMMANDS = {
    'decompose': cmd_decompose,
    'storage_sweep': cmd_storage_sweep,
    'eig_sweep': cmd_eig_sweep,
    'rank': cmd_rank,
    'verify': cmd_verify,
}


def report_error(e: JoinTensorError):
    json.dump({'error': type(e).__name__, 'message': str(e), 'exit_code': e.exit_code}, sys.stderr, sort_keys=True)
    sys.stderr.write('\n')


def start_tracking(cfg, run_dir):
    wandb.init(project=cfg.wandb.project,
        entity=cfg.wandb.entity,
        group=cfg.wandb.group,
        name=f'{cfg.wandb.name}_{cfg.tag}',
        dir=run_dir)
    wandb.config.update(OmegaConf.to_container(cfg, resolve=True))


def main(cfg, run_dir='.'):
    """Runs cfg.command; returns the process exit code."""
    set_seed(int(cfg.get('seed', 0)))
    tracking = not cfg.get('debug', True)
    try:
        command = COMMANDS.get(cfg.get('command', None))
        if command is None:
            raise BadSpec(f"unknown command {cfg.get('command', None)!r}; expected one of {sorted(COMMANDS)}")
        if tracking:
            start_tracking(cfg, run_dir)
        result = command(cfg)
    except JoinTensorError as e:
        logger.error(f'{type(e).__name__}: {e}')
        report_error(e)
        return e.exit_code
    finally:
        if tracking and wandb.run is not None:
            wandb.finish()
    if cfg.command == 'verify' and not result[0]:
        return VerificationFailure.exit_code
    return 0
