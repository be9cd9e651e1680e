"""
Analysis - Schmidt Decompositions, Witnesses, Structure and Normal Forms

Library operations consumed by the CLI, the verification suites and the
fixture corpus writer.
"""

from .decision import Verdict, VerdictKind, decide, state_facts, verify_verdict
from .normal_forms import (
    CCNormalForm,
    PPTCanonicalForm,
    Sr3Form,
    cc_normal_form,
    find_rank_one_element,
    ppt_rank_n_canonical,
    sr3_compression_spot_check,
    sr3_tridiagonal_form,
    sr3_two_by_n_realify,
)
from .schmidt import (
    OperatorSubspace,
    SchmidtDecomposition,
    complete_with,
    operator_schmidt,
    realign,
    schmidt_rank,
    schmidt_rank_report,
    space_of,
    vector_schmidt_rank,
)
from .structure import (
    DecompositionTree,
    ProductVectorHit,
    a_decompose,
    b_decompose,
    is_a_irreducible,
    is_b_irreducible,
    kernel_product_vectors,
    low_sr_vector_in,
    product_vector_in,
    range_product_vector,
)
from .witness import (
    KernelLineEvidence,
    SubmatrixCertificate,
    Witness,
    distill_2xn,
    is_npt,
    kernel_line_criterion,
    negdet_search,
    run_witness_search,
    search_witness,
    verify_witness,
)

__all__ = [
    'Verdict',
    'VerdictKind',
    'decide',
    'state_facts',
    'verify_verdict',
    'CCNormalForm',
    'PPTCanonicalForm',
    'Sr3Form',
    'cc_normal_form',
    'find_rank_one_element',
    'ppt_rank_n_canonical',
    'sr3_compression_spot_check',
    'sr3_tridiagonal_form',
    'sr3_two_by_n_realify',
    'OperatorSubspace',
    'SchmidtDecomposition',
    'complete_with',
    'operator_schmidt',
    'realign',
    'schmidt_rank',
    'schmidt_rank_report',
    'space_of',
    'vector_schmidt_rank',
    'DecompositionTree',
    'ProductVectorHit',
    'a_decompose',
    'b_decompose',
    'is_a_irreducible',
    'is_b_irreducible',
    'kernel_product_vectors',
    'low_sr_vector_in',
    'product_vector_in',
    'range_product_vector',
    'KernelLineEvidence',
    'SubmatrixCertificate',
    'Witness',
    'distill_2xn',
    'is_npt',
    'kernel_line_criterion',
    'negdet_search',
    'run_witness_search',
    'search_witness',
    'verify_witness',
]
