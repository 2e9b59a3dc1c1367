"""Energy-stable parametric finite elements for surface diffusion and solid-state dewetting."""

from .assembly import assemble, assemble_closed, assemble_ssd, csav_fixed_point, solve, solve_step
from .config import RunConfig, eval_expr, load_config, parse_config
from .energy import SurfaceEnergy, b_matrix, b_matrices, discrete_energy, pd_check, stability
from .errors import *  # noqa: F401,F403
from .geometry import (
    CurveState,
    Ellipse,
    OpenRectangle,
    Rectangle,
    SegmentFrame,
    SemiEllipse,
    Topology,
    enclosed_area,
    initial_shape,
    lumped_inner,
    mesh_ratio,
    perimeter,
    segment_frame,
    stiffness_pairing,
)
from .kernels import BACKEND
from .metrics import ErrorTable, convergence_table, manifold_distance, observed_orders, scanline_distance
from .ssd import SubstrateConfig, contact_angles, equilibrium_angle, equilibrium_angles, young_force
from .stepper import SavState, Scheme, StepDiagnostics, advance, run, step, xi_update, zeta

__version__ = "0.1.0"
