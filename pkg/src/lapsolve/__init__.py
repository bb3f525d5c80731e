"""Combinatorial preconditioners for symmetric diagonally dominant systems.

The main entry points are :func:`one_shot_solve` and :func:`recursive_solve`;
:func:`precondition` builds a tree-plus-edges preconditioner together with a
certificate bounding its relative condition number.
"""
from .akpw import ParameterSchedule, akpw, cluster, contract
from .chebyshev import ChebyshevConfig, chebyshev
from .decompose import TreeDecomposition, decompose
from .elimination import PartialFactorization, TrimOrder, partial_ldl, trim
from .graph import SymmetricMatrix, WeightedGraph, graph_of, laplacian_of
from .precondition import PreconditionerGraph, precondition
from .reductions import NotPSDDDError, RangeError, back_substitute, classify, gremban_cover, reduce
from .solver import RecursionPlan, SolveReport, cover_solve, one_shot_solve, recursive_solve
from .support import (WeightedEmbedding, congestion_certificate, kappa_f_oracle,
                      support_oracle)

__version__ = "0.1.0"

__all__ = [
    "ChebyshevConfig", "NotPSDDDError", "ParameterSchedule", "PartialFactorization",
    "PreconditionerGraph", "RangeError", "RecursionPlan", "SolveReport", "SymmetricMatrix",
    "TreeDecomposition", "TrimOrder", "WeightedEmbedding", "WeightedGraph", "akpw",
    "back_substitute", "chebyshev", "classify", "cluster", "congestion_certificate", "contract", "cover_solve",
    "decompose", "graph_of", "gremban_cover", "kappa_f_oracle", "laplacian_of",
    "one_shot_solve", "partial_ldl", "precondition", "recursive_solve", "reduce",
    "support_oracle", "trim",
]
