"""Optimal transport toolkit.

Exact LP, entropic and heat-kernel Sinkhorn, Eulerian dynamic transport,
semidiscrete power diagrams and 1D closed forms, sharing one set of measure
types so every solver can be checked against the others.
"""
from importlib import resources as _resources
from types import ModuleType as _ModuleType

from .errors import (
    ConvergenceError,
    GeometryError,
    InfeasibleMarginalsError,
    InvalidCostError,
    StateError,
    UnderflowError,
)
from .measures import (
    CostMatrix,
    DimensionError,
    DiscreteMeasure,
    DualPotentials,
    GridDensity,
    InterpolationSequence,
    MeasureError,
    MeshDensity,
    TransportPlan,
    ZeroMassError,
    build_cost_matrix,
    grid_to_discrete,
    normalize,
)
from .oracle1d import semidiscrete_1d, w1_cdf, wp_quantile
from .lp import emd, solve_lp, verify_optimality
from .sinkhorn import entropic_barycenter, sinkhorn, sinkhorn_log_domain
from .heat import HeatOperator, apply_heat, convolutional_barycenter, convolutional_sinkhorn, cotangent_laplacian
from .dynamic import beckmann_w1, continuity_residual, project_paraboloid, solve_dynamic
from .semidiscrete import (
    PowerDiagram,
    build_power_diagram,
    cell_masses,
    lloyd_stipple,
    objective_and_gradient,
    solve_semidiscrete,
)
from .kernels import BACKEND

__version__ = "0.1.0"


def data_path(name: str) -> str:
    """Filesystem path of a bundled example file (``bump_a.csv``, ``bump_b.csv``)."""
    return str(_resources.files(__name__).joinpath("data", name))


__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not isinstance(v, _ModuleType)]
