from ._core import (
    Error,
    PomdpModel,
    blind_critical_points,
    conditioning_inverse,
    constraint_polynomials,
    constraint_values,
    critical_point_bound,
    degree_bound,
    deterministic_optimum,
    expected_reward,
    face_f_vector,
    is_feasible,
    load_model,
    parse_model,
    polar_degree_rank_one,
    policy_gradient,
    projection_csv,
    series_frequency,
    state_action_frequency,
    validate,
)

__all__ = [
    "Error",
    "PomdpModel",
    "blind_critical_points",
    "conditioning_inverse",
    "constraint_polynomials",
    "constraint_values",
    "critical_point_bound",
    "degree_bound",
    "deterministic_optimum",
    "expected_reward",
    "face_f_vector",
    "is_feasible",
    "load_model",
    "parse_model",
    "polar_degree_rank_one",
    "policy_gradient",
    "projection_csv",
    "series_frequency",
    "state_action_frequency",
    "validate",
]
