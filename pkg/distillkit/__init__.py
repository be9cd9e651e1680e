"""
distillkit

Library and command line tools for deciding 1-distillability of bipartite
quantum states: partial-transpose tests, operator Schmidt decompositions,
Schmidt-rank-two witnesses, direct-sum structure, normal forms of the
undistillable classes and seeded state generators.
"""

__version__ = "0.1.0"
