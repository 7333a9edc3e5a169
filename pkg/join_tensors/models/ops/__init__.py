from .contractors import (
    Contractor, DenseContractor, PolyadicContractor, TensorTrainContractor, make_contractor,
)
from .rank import (
    UnfoldingMatrix, RankTolerance, RankBoundReport, unfolding, exact_rank, numeric_rank,
    unfolding_ranks, check_coefficient_assumption, rank_bounds, lcm_tt_rank_reference,
)
