"""Causal bandit simulator: discrete causal models, decomposition-based
agents (C-UCB, C-TS, CL-UCB, CL-TS), standard baselines, and a reproducible
experiment runner."""

from .environments import (
    Arm,
    BanditEnvironment,
    Observation,
    build_email_env,
    build_lowerbound_env,
    build_parallel_sim,
    build_pure_sim_benchmark,
    build_random_instance,
    load_environment,
)
from .agents import AGENT_NAMES, make_agent
from .runner import (
    AgentSpec,
    ExperimentConfig,
    RegretTrace,
    run_experiment,
    run_replication,
    scaling_scan,
    write_csv,
    write_manifest,
)
from .scm import (
    DiscreteNetwork,
    Intervention,
    ParentAssignment,
    enumerate_parent_assignments,
    load_network,
    parent_distribution,
    sample,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AGENT_NAMES",
    "AgentSpec",
    "Arm",
    "BanditEnvironment",
    "DiscreteNetwork",
    "ExperimentConfig",
    "Intervention",
    "Observation",
    "ParentAssignment",
    "RegretTrace",
    "build_email_env",
    "build_lowerbound_env",
    "build_parallel_sim",
    "build_pure_sim_benchmark",
    "build_random_instance",
    "enumerate_parent_assignments",
    "load_environment",
    "load_network",
    "make_agent",
    "parent_distribution",
    "run_experiment",
    "run_replication",
    "sample",
    "scaling_scan",
    "validate",
    "write_csv",
    "write_manifest",
]
