"""Tree expansion of the conjugation: enumeration, clusters, self-energies and dressed sums."""
from .approximant import approximant_h, formal_series, reexpand_in_eps
from .clusters import Cluster, ClusterDecomposition, assign_scales_and_clusters, is_self_energy
from .ring import Ring
from .selfenergy import (PropagatorTable, SelfEnergyClusters, SingularDenominator, TruncationExceeded, build_M,
                         dressed_propagator, self_energy_value)
from .trees import DecoratedTree, Node, TreeEnumerator, flatten, symmetry_weight
from .values import BarePropagators, TreeEvaluator, tree_value


def enumerate_trees(sys, k, nu=None, gamma=None, mode="formal", seq=None, max_scale=None):
    """Trees of order k (nonzero lines) with root momentum nu, as labelled trees."""
    en = TreeEnumerator(sys, mode, seq, max_scale)
    for t in en.trees(k, nu):
        yield flatten(t, gamma)


__all__ = [
    "BarePropagators", "Cluster", "ClusterDecomposition", "DecoratedTree", "Node", "PropagatorTable", "Ring",
    "SelfEnergyClusters", "SingularDenominator", "TreeEnumerator", "TreeEvaluator", "TruncationExceeded",
    "approximant_h", "assign_scales_and_clusters", "build_M", "dressed_propagator", "enumerate_trees", "flatten",
    "formal_series", "is_self_energy", "reexpand_in_eps", "self_energy_value", "symmetry_weight", "tree_value",
]
