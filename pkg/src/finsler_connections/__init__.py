"""Finsler connections: canonical spray, Barthel, Cartan and Berwald connections.

Everything is evaluated pointwise on the slit tangent bundle from truncated
Taylor jets of the energy E = L^2 / 2, with built-in invariant checks.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegeneracyError,
    DomainError,
    EmptyDomainError,
    FinslerError,
    InsufficientSamplesError,
    InternalInconsistencyError,
    NonFiniteInputError,
    RegularityError,
    UnsupportedOrderError,
)
from .jets import Jet, TangentPoint, evaluate_jet, fd_partial, jet_fd_discrepancy, lie_bracket  # noqa: E402
from .invariants import InvariantReport, ReportEntry  # noqa: E402
from .metrics import (  # noqa: E402
    FAMILIES,
    CartanTensorComponents,
    FundamentalTensor,
    MetricSpec,
    cartan_tensor,
    check_regularity,
    energy,
    finsler_value,
    fundamental_tensor,
    sample_points,
)
from .geometry import LocalGeometry, local_geometry, pipeline_fd_discrepancy  # noqa: E402
from .spray import (  # noqa: E402
    FrameMaps,
    NonlinearConnectionAtPoint,
    SprayAtPoint,
    barthel_coefficients,
    canonical_spray,
    check_barthel,
    frame_maps,
    poincare_two_form,
)
from .connections import (  # noqa: E402
    LandsbergTensor,
    LinearConnectionAtPoint,
    TensorAtPoint,
    TorsionBundleAtPoint,
    berwald_cartan_bridge,
    berwald_connection,
    cartan_connection,
    check_berwald,
    check_cartan,
    classify,
    covariant_derivative,
    landsberg_tensor,
    metricity_defects,
    torsion_tensors,
)
from .curvature import (  # noqa: E402
    CURVATURE_SIGN,
    CurvatureBundleAtPoint,
    cartan_curvatures,
    check_curvature_identities,
    nonlinear_curvature,
)
from .report import RunConfig, config_from_dict, default_config, load_config, run_check, run_report  # noqa: E402
