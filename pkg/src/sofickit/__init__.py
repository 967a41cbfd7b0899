"""Exact finite-scale toolkit for partial bijections, measured equivalence relations and their almost morphisms into [[N]]."""
from ._backend import BACKEND, HAVE_NUMBA
from .embed import AlmostMorphism, Defect, ExactEmbedding, defect, exact_embedding, perturb
from .measured import MSubset, WeightedSpace, measure
from .pbij import PartialBijection, hamming_distance, trace
from .relation import FiniteRelation, LocalIso, SubrelationPair, make_relation, metric_mu, trace_mu

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "AlmostMorphism",
    "Defect",
    "ExactEmbedding",
    "FiniteRelation",
    "LocalIso",
    "MSubset",
    "PartialBijection",
    "SubrelationPair",
    "WeightedSpace",
    "defect",
    "exact_embedding",
    "hamming_distance",
    "make_relation",
    "measure",
    "metric_mu",
    "perturb",
    "trace",
    "trace_mu",
]
