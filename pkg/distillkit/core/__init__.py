"""
Core - Numerical Kernel and Bipartite States

Dense linear algebra contract, the BipartiteState type with its block
formalism, and the qsf-1 file codec.
"""

from . import numkernel
from .qsf import dump_state, load_state, read_state_file, write_state_file
from .state import (
    BipartiteState,
    BlockFactor,
    LocalMap,
    apply_local,
    bell_state,
    factor_blocks,
    kernel_basis,
    local_ranks,
    maximally_mixed,
    partial_transpose,
    product_state,
    pure_state,
    reduce_a,
    reduce_b,
    restrict_to_support,
    swap_sides,
)

__all__ = [
    'numkernel',
    'BipartiteState',
    'BlockFactor',
    'LocalMap',
    'apply_local',
    'bell_state',
    'factor_blocks',
    'kernel_basis',
    'local_ranks',
    'maximally_mixed',
    'partial_transpose',
    'product_state',
    'pure_state',
    'reduce_a',
    'reduce_b',
    'restrict_to_support',
    'swap_sides',
    'dump_state',
    'load_state',
    'read_state_file',
    'write_state_file',
]
