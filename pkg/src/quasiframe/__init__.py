"""Frame-based quasi-probability representations of finite-dimensional quantum theory."""

from .duals import (
    DualFrame,
    DualSpace,
    canonical_dual,
    dual_space,
    optimize_dual_negativity,
    perturb_dual,
    verify_reconstruction,
)
from .frames import (
    Frame,
    FrameBounds,
    FrameReport,
    NotInformationallyComplete,
    frame_bounds,
    frame_report,
    is_informationally_complete,
    is_povm,
    is_tight,
    mub_frame,
    random_frame,
    random_ic_povm,
    sic_frame_qubit,
    wootters_frame,
)
from .operators import (
    HermitianOperator,
    RealCoordinates,
    Spectrum,
    devectorize,
    eig_hermitian,
    psd_check,
    random_effect,
    random_state,
    trace_inner,
    vectorize,
)
from .representation import (
    NegativityReport,
    NegativityTheoremViolation,
    QuasiProbEffect,
    QuasiProbState,
    Verdict,
    born_check,
    certify_negativity,
    negativity_effect,
    negativity_state,
    rep_effect,
    rep_observable,
    rep_state,
)
from .wigner import (
    FockState,
    PhaseGrid,
    WignerGrid,
    fock_wigner_kernel,
    marginals,
    reconstruct_from_wigner,
    wigner_transform,
)

__version__ = "0.1.0"
