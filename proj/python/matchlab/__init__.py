"""Edge-weighted online bipartite matching with robust expert/RL switching."""

from ._matchlab import (
    FEATURE_DIM,
    UNBOUNDED,
    MatchlabError,
    MatchlabUsageError,
    PolicyParams,
    ProblemInstance,
    delta_f,
    evaluate,
    f_value,
    generate_instance,
    init_policy,
    load_instances,
    load_policy,
    opt_exhaustive,
    opt_flow,
    osm_phase_length,
    p_os,
    run_expert,
    run_lomar,
    run_scripted,
    save_instances,
    save_policy,
    top_set,
    train,
    validate,
)

__all__ = [
    "FEATURE_DIM",
    "UNBOUNDED",
    "MatchlabError",
    "MatchlabUsageError",
    "PolicyParams",
    "ProblemInstance",
    "delta_f",
    "evaluate",
    "f_value",
    "generate_instance",
    "init_policy",
    "load_instances",
    "load_policy",
    "opt_exhaustive",
    "opt_flow",
    "osm_phase_length",
    "p_os",
    "run_expert",
    "run_lomar",
    "run_scripted",
    "save_instances",
    "save_policy",
    "top_set",
    "train",
    "validate",
]
