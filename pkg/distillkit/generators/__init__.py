"""
Generators - Seeded State Families

Random states, prescribed operator Schmidt rank, B-direct sums, PPT rank-n
mixtures, C-block templates and the fixture corpus writer.
"""

from .corpus import FAMILIES, fixture_name, generate, verify_labels, write_fixture
from .families import b_summand, gen_b_reducible, gen_ppt_rank_n, gen_random, gen_schmidt_rank
from .templates import BlockTemplate, assemble_template, gen_b_irreducible_template

__all__ = [
    'FAMILIES',
    'BlockTemplate',
    'assemble_template',
    'b_summand',
    'fixture_name',
    'gen_b_irreducible_template',
    'gen_b_reducible',
    'gen_ppt_rank_n',
    'gen_random',
    'gen_schmidt_rank',
    'generate',
    'verify_labels',
    'write_fixture',
]
