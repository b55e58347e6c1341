__version__='0.1.0'


# Main classes and entry points of walktrace
from walktrace.metadata import HittingRecord, AuditReport, PropertyCheck, ExperimentConfig, RunRecord
from walktrace.graph_tools import MultiGraph, CompleteGraph
from walktrace.random_models import SeedStream, sample_gnp, sample_gnp_alpha, complete_graph
from walktrace.walk_tools import Walk, run_walk, default_length, trace_view, hitting_times
from walktrace.structure_tools import vertex_connectivity, has_perfect_matching
from walktrace.hamilton_tools import PosaEngine, is_hamiltonian, booster_completion
from walktrace.expander_tools import is_rc_expander, pseudorandom_audit, trace_expansion_audit
from walktrace.pipeline_tools import pipeline_params, run_pipeline
from walktrace.experiment_tools import load_config, run_experiment, summarize
