from .curve import (
    STATIONARY_P,
    CurvePoint,
    KrausPair,
    branch_error_A0,
    branch_error_A1,
    minimize_total_error,
    prob_A0,
    prob_B0_given_A0,
    read_curve_csv,
    sample_curve,
    scaled_det_delta_A0,
    total_error,
    total_error_derivative,
    write_curve_csv,
)
from .protocol import (
    ProtocolNode,
    check_tree,
    detect_bias_flips,
    iter_bias_flips,
    measure,
    root_node,
    split_to_unbiased,
    tree_error,
)
from .simulate import SimulationResult, simulate_protocol
