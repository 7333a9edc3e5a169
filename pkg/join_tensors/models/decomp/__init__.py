from .scalars import EXACT, FLOAT, MODES
from .valuation import ValuationFunction
from .polyadic import (
    PolyadicDecomposition, build_cp, evaluate_cp, cp_coefficients_from_moebius,
    nested_column_order, reorder_columns,
)
from .tensor_train import SparseCore, TensorTrain, DenseTrain, build_tt, evaluate_tt, cp_to_tt
from .dense import (
    DenseTensor, SymmetricPart, materialize_dense, symmetric_part, recover_entry,
    symmetric_part_size,
)
from .storage import StorageReport, nnz_report, cp_nnz_count, tt_nnz_count, symmetric_report
from .serialization import save_decomposition, load_decomposition
