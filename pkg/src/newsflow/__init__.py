"""Jump-entropy analysis of serial text corpora.

Quantifies how dated events disrupt the information flow of a text stream:
jump-entropy curves from topic-distribution matrices, per-event flow
signatures, DTW-based clustering into archetypes, and archetype-driven
querying.
"""

from ._backend import BACKEND_NAME
from .alignment import Barycenter, WarpPath, dba, dtw, dtw_cost, soft_dtw, soft_dtw_barycenter
from .clustering import (
    ClusterModel,
    Dendrogram,
    DistanceMatrix,
    adjusted_rand_index,
    archetypes,
    cut,
    embed_2d,
    pairwise_dtw,
    select_model,
    silhouette,
    upgma,
)
from .core import EventRecord, Series, ThetaMatrix, rolling_mean, slice_window, z_normalize
from .divergence import jsd, jsd_distance, kld
from .jumpflow import (
    EventFlow,
    FlowParams,
    JumpConfig,
    JumpEntropyCurve,
    batch_event_flows,
    event_flow,
    jump_entropy_curve,
)
from .studies import (
    consensus_flow,
    decade_aggregate,
    deviation_from_consensus,
    event_deviations,
    query_by_template,
    random_date_baseline,
)
from .synth import ArchetypeSpec, SynthPlan, generate, planted_flow_profile, standard_benchmark

__version__ = "0.1.0"

__all__ = [
    "ArchetypeSpec",
    "BACKEND_NAME",
    "Barycenter",
    "ClusterModel",
    "Dendrogram",
    "DistanceMatrix",
    "EventFlow",
    "EventRecord",
    "FlowParams",
    "JumpConfig",
    "JumpEntropyCurve",
    "Series",
    "SynthPlan",
    "ThetaMatrix",
    "WarpPath",
    "__version__",
    "adjusted_rand_index",
    "archetypes",
    "batch_event_flows",
    "consensus_flow",
    "cut",
    "dba",
    "decade_aggregate",
    "deviation_from_consensus",
    "dtw",
    "dtw_cost",
    "embed_2d",
    "event_deviations",
    "event_flow",
    "generate",
    "jsd",
    "jsd_distance",
    "jump_entropy_curve",
    "kld",
    "pairwise_dtw",
    "planted_flow_profile",
    "query_by_template",
    "random_date_baseline",
    "rolling_mean",
    "select_model",
    "silhouette",
    "slice_window",
    "soft_dtw",
    "soft_dtw_barycenter",
    "standard_benchmark",
    "upgma",
    "z_normalize",
]
