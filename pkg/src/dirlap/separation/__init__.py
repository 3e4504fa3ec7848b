"""MDCT front-end and the sparse source-separation pipeline."""

from .mdct import MdctFrame, frame_samples_for_ms, mdct_forward, mdct_inverse
from .pipeline import (
    AttributionSets,
    MixtureSignals,
    SeparationConfig,
    SeparationResult,
    SphereProjection,
    attribute_hard_1d,
    attribute_soft,
    hard_boundaries_1d,
    project_to_sphere,
    reconstruct_source_images,
    reconstruct_sources,
    separate,
)

__all__ = [
    "MdctFrame",
    "frame_samples_for_ms",
    "mdct_forward",
    "mdct_inverse",
    "AttributionSets",
    "MixtureSignals",
    "SeparationConfig",
    "SeparationResult",
    "SphereProjection",
    "attribute_hard_1d",
    "attribute_soft",
    "hard_boundaries_1d",
    "project_to_sphere",
    "reconstruct_source_images",
    "reconstruct_sources",
    "separate",
]
