"""Multi-agent simulation with spike-based (neuromorphic) coupling."""
from .analysis import (
    LemmaParams,
    max_pairwise_distance,
    min_dwell,
    orbit_distance,
    sample_check_lemma,
    spike_statistics,
    sync_error,
    verify_amp_bound,
)
from .config import parse_scenario, scenario_from_text, scenario_to_text
from .dynamics import BlendedField, Harmonic, LinearAffine, SignTracker, VanDerPolSource
from .graph import Graph, build_topology, spectral
from .neuron import NmAmp, NeuronState, SpikeEvent
from .simulator import (
    DivergenceError,
    Scenario,
    ScenarioError,
    SimulationError,
    Trace,
    ZenoError,
    run,
    run_blended,
    run_continuous,
)

__version__ = "0.1.0"

__all__ = [
    "BlendedField", "DivergenceError", "Graph", "Harmonic", "LemmaParams", "LinearAffine",
    "NeuronState", "NmAmp", "Scenario", "ScenarioError", "SignTracker", "SimulationError",
    "SpikeEvent", "Trace", "VanDerPolSource", "ZenoError", "build_topology", "max_pairwise_distance",
    "min_dwell", "orbit_distance", "parse_scenario", "run", "run_blended", "run_continuous",
    "sample_check_lemma", "scenario_from_text", "scenario_to_text", "spectral", "spike_statistics",
    "sync_error", "verify_amp_bound",
]
