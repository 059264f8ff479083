"""Herman-Kluk propagation through a fold caustic, with exact and asymptotic references."""

from .asymptotics import (
    BorderResult,
    SaddleKind,
    SaddlePoint,
    ScalingRow,
    contributing_set,
    find_border,
    find_saddles,
    hbar_scaling_study,
    hk_semiclassical,
    hksc_deep,
    local_deviation,
    saddle_contribution,
)
from .errors import (
    AiryRangeError,
    BranchCutError,
    CausticError,
    DivergenceError,
    DomainTooSmallError,
    HKError,
    NoConvergenceError,
    QuadratureError,
)
from .folding import (
    KERNEL_SPEC,
    DerivedScales,
    ModelParams,
    PhasePoint,
    RegionClass,
    action,
    classical_map,
    classify_region,
    derived_scales,
    exact_kernel,
    hk_kernel_reduced,
    hk_prefactor_analytic,
    phi_tau,
    sc_kernel,
)
from .hk import (
    Hamiltonian1D,
    TrajectoryResult,
    coherent_state,
    evolve,
    evolve_path,
    folding_hamiltonian,
    harmonic_hamiltonian,
    hk_kernel_full,
    hk_prefactor_track,
)
from .manifolds import (
    Manifold,
    MorseParams,
    build_line_manifold,
    count_extrema,
    detect_caustics,
    evolve_manifold,
    morse_hamiltonian,
)
from .numerics import QuadratureSpec, airy_ai, airy_ai_prime, integrate_1d, integrate_2d
from .quantum import exact_kernel_quadrature, grid_propagate

__version__ = "0.1.0"
