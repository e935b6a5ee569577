"""Electromagnetic connection with torsion and the extended Lorentz force."""
from .boost import BoostSpec, boost_matrix, observables, first_order_check, transform_connection
from .chern import curvature_trace_form, field_form, exactness_check
from .connection import (
    ConnectionJet,
    Placement,
    build_connection,
    build_jet,
    torsion,
    torsion_epsilon_sum,
)
from .curvature import (
    continuity_residual,
    geometric_sources,
    ricci,
    riemann,
    symmetry_report,
)
from .errors import ConfigError, IntegrationAbort, SingularityError
from .fields import (
    C_LIGHT,
    FieldModel,
    FieldSample,
    ParticleParams,
    eval_field,
    finite_difference_adapter,
    levi_civita,
    preset,
)
from .geodesic import (
    GeodesicState,
    Trajectory,
    classical_rhs,
    decay_experiment,
    force_probe,
    geodesic_rhs,
    integrate,
)
from .kernels import BACKEND

__version__ = "0.1.0"
