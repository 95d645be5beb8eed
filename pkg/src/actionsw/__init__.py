"""Rate regions and network coding for correlated sources with actions."""

import os as _os

# the only runtime knob read from the environment: BLAS/OpenMP thread count
if "ACTIONSW_THREADS" in _os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["ACTIONSW_THREADS"])

__version__ = "0.1.0"

from .info import (  # noqa: E402
    ActionModel,
    CondPmf,
    Joint3,
    Pmf,
    binary_entropy,
    cond_entropy,
    entropy,
    expected_cost,
    joint_from_factors,
    mutual_information,
)
from .region import (  # noqa: E402
    Frontier,
    RateConstraints,
    Scenario,
    constraints_case_a,
    constraints_case_b,
    constraints_case_c,
    corner_points,
    trace_frontier,
)
from .gf2m import FieldSpec  # noqa: E402
from .netgraph import Network, min_cut  # noqa: E402

__all__ = [
    "ActionModel", "CondPmf", "Joint3", "Pmf", "binary_entropy", "cond_entropy", "entropy",
    "expected_cost", "joint_from_factors", "mutual_information", "Frontier", "RateConstraints",
    "Scenario", "constraints_case_a", "constraints_case_b", "constraints_case_c", "corner_points",
    "trace_frontier", "FieldSpec", "Network", "min_cut",
]
