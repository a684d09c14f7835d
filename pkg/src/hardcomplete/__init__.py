"""Constructions and decoders around the hardness of low-rank matrix completion.

Graph and CSP reductions to partial matrices, bounded-row-norm factorization,
decoders that read colorings, independent sets, Partition splits and
one-in-k-SAT assignments back out of (approximate) completions, and small
exact oracles to check them against.
"""

from .decoders import (
    ConeRoundingParams,
    DecodingError,
    IndependentSet,
    NetColoringParams,
    decode_coloring,
    decode_independent_set,
    filter_accurate_submatrix,
    independent_set_bound,
    independent_set_trials,
)
from .factorize import SdpConvergenceError, bounded_factorize, sdp_min_rownorm_factor
from .gadgets import (
    Assignment,
    GramConstraintSystem,
    OneInKSatInstance,
    PartitionInstance,
    PartitionSplit,
    UnsatisfiedInstanceError,
    VectorAssignment,
    amplify_block_diagonal,
    csp_completeness,
    csp_gadget,
    gram_system_to_partial,
    max_residual,
    partition_completeness,
    partition_gadget,
    planted_one_in_k,
    random_partitionable,
)
from .graphs import (
    Coloring,
    Graph,
    ImproperColoringError,
    balance_by_copies,
    completion_from_coloring,
    graph_to_partial,
    pad_partial,
    planted_graph,
)
from .matrix import (
    ConsistencyReport,
    DimensionError,
    Factorization,
    PartialMatrix,
    coherence,
    consistency,
    is_psd,
    numerical_rank,
)
from .oracles import BACKEND, OracleSizeError, brute_coloring, brute_one_in_k, brute_partition
from .psd_decoders import DecodeError, RepairError, decode_assignment, decode_partition, repair_internal
from .solvers import SolverConfig, complete_bounded_rank, solve_gram_system

__version__ = "0.1.0"
