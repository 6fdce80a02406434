"""Tree-restricted low-congestion shortcuts and a CONGEST-model simulator.

The package constructs and verifies shortcuts on planar, apexed, vortexed
and clique-sum graphs, then demonstrates them by running Boruvka-style MST
in a simulated synchronous message-passing network and measuring round
counts against the quality bound b * d + c.
"""

from .graph import (
    AnnotatedGraph,
    EmbeddingError,
    GraphError,
    RootedTree,
    VortexSpec,
    bfs_tree,
    contract_outside,
    heavy_light,
    path_contraction,
)
from .shortcuts import (
    Partition,
    QualityReport,
    Shortcut,
    block,
    brute_force_optimal,
    congestion,
    quality,
    validate_parts,
)

__all__ = [
    "AnnotatedGraph",
    "EmbeddingError",
    "GraphError",
    "RootedTree",
    "VortexSpec",
    "bfs_tree",
    "contract_outside",
    "heavy_light",
    "path_contraction",
    "Partition",
    "QualityReport",
    "Shortcut",
    "block",
    "brute_force_optimal",
    "congestion",
    "quality",
    "validate_parts",
]

__version__ = "0.1.0"
