"""weakrel: weak-measurement quantities and numerical certification of the
uncertainty and complementarity relations they satisfy.

Layers: linalg (dense complex primitives) -> model (ensembles, weak values,
weak operators) -> relations / complementarity / pointer (the physics) ->
harness + cli (sweeps, fixtures, reports).
"""

from .version import __version__
from .errors import (
    ConfigError,
    ContractViolationError,
    EstimationUndefinedError,
    OrthogonalPostselectionError,
    ShapeError,
    TruncationError,
)
from .linalg import (
    ATOL_CONSTRUCTION,
    ATOL_RELATION,
    ATOL_SPECTRAL,
    DEGENERACY_RTOL,
    Eigensystem,
    as_complex_matrix,
    as_complex_vector,
    eigendecompose_hermitian,
    fingerprint,
    haar_random_state,
    haar_random_state_rng,
    orthogonal_component,
    random_hermitian,
    random_hermitian_rng,
    rng_from_seed,
    state_vector,
)
from .model import (
    EPS_OVERLAP,
    Observable,
    PPSEnsemble,
    WeakOperator,
    WeakValue,
    adjoint_weak_operator,
    pps_ensemble,
    weak_operator,
    weak_value,
)
from .relations import (
    NHVariance,
    RelationReport,
    TruncatedFockPair,
    Ur1Terms,
    VaidmanParts,
    coherent_state,
    conjugate_pair_check,
    fock_state,
    mp1_check,
    mp2_check,
    nh_variance,
    nh_variance_value,
    parallelogram_identity_check,
    parallelogram_residual,
    random_orthogonal_state,
    robertson_check,
    top_level_population,
    truncated_fock_pair,
    ur1_check,
    ur1_terms,
    ur2_check,
    vaidman_decompose,
)
from .cvgrid import CVGrid, build_cv_grid
from .complementarity import (
    ProjectorWeakValuePair,
    WindowProjector,
    anomalous_decomposition,
    cv_product_study,
    cv_weak_value,
    projector_weak_value_pair,
    wavefunction_bridge_check,
    window_projector,
)
from .pointer import (
    JointState,
    MeterSpec,
    PostselectionResult,
    estimate_weak_value,
    evolve_joint,
    finite_meter,
    first_order_pointer,
    grid_meter,
    postselect,
)
from .harness import (
    ReportSet,
    SweepConfig,
    eigenstate_dominance_study,
    emit_report,
    load_report_set,
    run_cv_study,
    run_fixtures,
    run_pointer_study,
    run_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
