"""Upward planarity testing for directed acyclic graphs.

The decision procedure decomposes each biconnected block into an SPQR tree,
computes for every tree node the set of "shape descriptions" its pertinent
graph can realize on the outer face, and combines those sets bottom-up.
Rigid (R) nodes are handled by one of two interchangeable subprocedures: a
flow-network formulation parameterized by the number of sources, or a
dynamic program over a tree decomposition of the skeleton's embedding graph.
A brute-force oracle (exhaustive embedding enumeration) provides ground
truth for testing.
"""

from .digraph import Digraph, ExpandedDigraph, validate_dag, expand, classify, block_cut_tree
from .errors import (
    UpwardPlanarityError,
    CycleFound,
    Disconnected,
    SelfLoop,
    DuplicateEdge,
    UnknownVertex,
    NonPlanarRotation,
    OddSwitchCount,
    NotBiconnected,
    NonPlanarSkeleton,
    TurnOutOfRange,
    NotThinRepeat,
    NotBoring,
    TooLarge,
    ParseError,
)
from .shapes import ShapeDescription, FeasibleSet, BORING_SHAPES
from .framework import decide_upward_planar, biconnected_feasible

__all__ = [
    "Digraph",
    "ExpandedDigraph",
    "validate_dag",
    "expand",
    "classify",
    "block_cut_tree",
    "ShapeDescription",
    "FeasibleSet",
    "BORING_SHAPES",
    "decide_upward_planar",
    "biconnected_feasible",
    "UpwardPlanarityError",
    "CycleFound",
    "Disconnected",
    "SelfLoop",
    "DuplicateEdge",
    "UnknownVertex",
    "NonPlanarRotation",
    "OddSwitchCount",
    "NotBiconnected",
    "NonPlanarSkeleton",
    "TurnOutOfRange",
    "NotThinRepeat",
    "NotBoring",
    "TooLarge",
    "ParseError",
]
