import json
import logging

import numpy as np

from join_tensors.errors import BadSpec, BadShape
from join_tensors.lattices import join_closure, ordered_subset
from .polyadic import PolyadicDecomposition
from .scalars import check_mode, dtype_for, format_scalar, read_scalar
from .tensor_train import SparseCore, TensorTrain

logger = logging.getLogger(__name__)


def _element(x):
    return x if isinstance(x, int) else str(x)


def cp_to_dict(D: PolyadicDecomposition):
    coords = np.argwhere(D.factor)
    return {
        'kind': 'cp',
        'n': D.n,
        'd': D.d,
        'r': D.r,
        'mode': D.mode,
        'S': [_element(x) for x in D.base],
        'columns': [_element(y) for y in D.columns],
        'c': [format_scalar(v) for v in D.coefficients],
        'values': [format_scalar(v) for v in D.values],
        'E': {'rows': D.n, 'cols': D.r, 'nnz_coords': coords.tolist()},
    }


def cp_from_dict(data, ctx) -> PolyadicDecomposition:
    if data.get('kind') != 'cp':
        raise BadSpec(f"expected a serialized cp decomposition, got kind {data.get('kind')!r}")
    mode = check_mode(data['mode'])
    S = ordered_subset(ctx, data['S'])
    d, r = int(data['d']), int(data['r'])
    E = np.zeros((len(S), r), dtype=bool)
    for i, k in data['E']['nnz_coords']:
        E[i, k] = True
    c = np.array([read_scalar(v, mode) for v in data['c']], dtype=dtype_for(mode))
    values = np.array([read_scalar(v, mode) for v in data['values']], dtype=dtype_for(mode))
    if len(c) != r or len(values) != r or len(data['columns']) != r:
        raise BadShape(f'serialized cp declares r = {r} but stores {len(c)} coefficients')
    columns = tuple(ctx.check_element(y) for y in data['columns'])
    return PolyadicDecomposition(S, d, join_closure(S, d), columns, c, E, values, mode)


def tt_to_dict(T: TensorTrain):
    cores = []
    for k, core in enumerate(T.cores, start=1):
        entry = {
            'k': k,
            'shape': list(core.shape),
            'triplets': np.stack([core.rows, core.modes, core.cols], axis=1).tolist(),
        }
        if not core.is_boolean:
            entry['values'] = [format_scalar(v) for v in core.values]
        cores.append(entry)
    return {
        'kind': 'tt',
        'n': T.n,
        'd': T.d,
        'mode': T.mode,
        'S': [_element(x) for x in T.base],
        'ranks': list(T.ranks),
        'cores': cores,
    }


def tt_from_dict(data, ctx) -> TensorTrain:
    if data.get('kind') != 'tt':
        raise BadSpec(f"expected a serialized tensor train, got kind {data.get('kind')!r}")
    mode = check_mode(data['mode'])
    S = ordered_subset(ctx, data['S'])
    cores = []
    for entry in sorted(data['cores'], key=lambda e: e['k']):
        triplets = np.asarray(entry['triplets'], dtype=np.int64).reshape(-1, 3)
        values = entry.get('values')
        if values is not None:
            values = np.array([read_scalar(v, mode) for v in values], dtype=dtype_for(mode))
        cores.append(SparseCore(tuple(entry['shape']), triplets[:, 0], triplets[:, 1], triplets[:, 2], values))
    T = TensorTrain(S, int(data['d']), tuple(cores), mode)
    if list(T.ranks) != list(data.get('ranks', T.ranks)):
        raise BadShape(f"declared ranks {data['ranks']} disagree with core shapes {list(T.ranks)}")
    return T


def save_decomposition(obj, filename, provenance=None):
    data = cp_to_dict(obj) if isinstance(obj, PolyadicDecomposition) else tt_to_dict(obj)
    if provenance is not None:
        data['provenance'] = provenance
    with open(filename, 'w') as f:
        json.dump(data, f, indent=4, sort_keys=True)
        f.write('\n')
    logger.info(f"Saved {data['kind']} decomposition to {filename}")
    return filename


def load_decomposition(filename, ctx):
    with open(filename, 'r') as f:
        data = json.load(f)
    return cp_from_dict(data, ctx) if data.get('kind') == 'cp' else tt_from_dict(data, ctx)
