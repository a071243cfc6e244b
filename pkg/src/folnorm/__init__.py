"""Executable combinatorics of codimension-one foliations.

Affine foliations of simplices as vertex weak orders, horn filling for
(strongly) transverse simplices, transversal length over order trees, and
simplicial / foliated Gromov norms by exact L1 minimization.
"""

from .horn import FaceRecord, FillResult, HornInput, Mode, ViolationWitness, fill_horn, lemma13b_counterexample
from .leafspace import OrderTree, TreeAutomorphism, TreePoint, min_reversals, transversal_length
from .norm import NormCertificate, NormProblem, foliated_norm, relative_norm, simplicial_norm
from .profile import Profile, Valuation, are_conjugate, conjugacy_class, enumerate_classes
from .sset import Chain, FlaggedSSet, weak_kan_check

__all__ = [
    "Chain", "FaceRecord", "FillResult", "FlaggedSSet", "HornInput", "Mode", "NormCertificate",
    "NormProblem", "OrderTree", "Profile", "TreeAutomorphism", "TreePoint", "Valuation",
    "ViolationWitness", "are_conjugate", "conjugacy_class", "enumerate_classes", "fill_horn",
    "foliated_norm", "lemma13b_counterexample", "min_reversals", "relative_norm",
    "simplicial_norm", "transversal_length", "weak_kan_check",
]

__version__ = "0.1.0"
