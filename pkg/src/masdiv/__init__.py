"""Diversity metrics, diversity-vibration dynamics and a team simulator for multi-agent systems."""

from .entropy import (
    entropy_of_counts,
    grouping_decomposition,
    shannon_entropy,
    simple_social_entropy,
    usa_today_index,
)
from .errors import IntegrationError, RegimeError, ValidationError
from .society import Agent, Distribution, Partition, Society, load_society
from .taxonomy import cluster_at_level, distance_matrix, entropy_curve, hierarchic_entropy

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "Distribution",
    "IntegrationError",
    "Partition",
    "RegimeError",
    "Society",
    "ValidationError",
    "cluster_at_level",
    "distance_matrix",
    "entropy_curve",
    "entropy_of_counts",
    "grouping_decomposition",
    "hierarchic_entropy",
    "load_society",
    "shannon_entropy",
    "simple_social_entropy",
    "usa_today_index",
]
