from stabgeom.graphs.components import ComponentLabeling, adjacent_components, component_count, geometric_components
from stabgeom.graphs.mst import (InsertionTrace, MinimaxReport, build_mst_kruskal, max_degree, mst_insert,
                                 mst_length, verify_minimax)
from stabgeom.graphs.onng import build_onng, onng_length
from stabgeom.graphs.spatial import SpatialIndex
from stabgeom.graphs.tree import Edge, WeightedTree
from stabgeom.graphs.weights import WeightFunction

__all__ = [
    "ComponentLabeling", "adjacent_components", "component_count", "geometric_components",
    "InsertionTrace", "MinimaxReport", "build_mst_kruskal", "max_degree", "mst_insert",
    "mst_length", "verify_minimax", "build_onng", "onng_length", "SpatialIndex", "Edge",
    "WeightedTree", "WeightFunction",
]
