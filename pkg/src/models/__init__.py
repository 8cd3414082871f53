"""Graphs, Ising priors, the noisy channel and exact and asymptotic error analysis."""

from src.models.detection import NoiseChannel, bsc_apply, detect_error, majority_sign
from src.models.graph import Graph, GraphFamily, build_graph, load_graph
from src.models.ising import Coupling, IsingModel, energy, sample

__all__ = [
    "Coupling",
    "Graph",
    "GraphFamily",
    "IsingModel",
    "NoiseChannel",
    "bsc_apply",
    "build_graph",
    "detect_error",
    "energy",
    "load_graph",
    "majority_sign",
    "sample",
]
