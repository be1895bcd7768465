"""Seedable discrete-event simulator for video-on-demand storage search."""
from .cache import LrfuCache, hit_ratio
from .capacity import (
    AggregateDemand, BandwidthDemand, EnthusiasmModel, SessionCapacity, admit,
    aggregate_demand, bandwidth_demand, enthusiastic_pmf, min_active_servers,
)
from .popularity import ZipfCatalog, p_unpopular, pmf_exact, psi_cumulative, sample_rank
from .simulator import SimConfig, SimMetrics, run, run_cluster_sweep, score
from .topology import (
    ContentPlacement, SearchResult, SearchSession, StorageTopology, TopologyConfig,
    build_topology, hop_distance, place_content, session_search,
)

__version__ = "0.1.0"
