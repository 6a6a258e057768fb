//! Numerical laboratory for oscillatory integral operators whose phase is a
//! hyperbolic distance between two geodesics, and for restriction estimates of
//! eigenfunctions on the sphere.
//!
//! Geometry, phases, Taylor arithmetic, quadrature and Lorentz norms are
//! generic over [`Real`] (`f32` or `f64`); the heavier experiments run in
//! `f64`.

pub mod boundscan;
pub mod fit;
pub mod halfplane;
pub mod lorentz;
pub mod oscquad;
pub mod phase;
pub mod quadrature;
pub mod scalar;
pub mod sphere;
pub mod taylor;

pub use boundscan::{
    box_extrema, scan_extrema, scan_extrema_in, scan_regions, verify_case, verify_intersecting,
    verify_parallel_circle, verify_parallel_line, BoundCheck, BoundReport, Exponents, SampleKind,
    ScanConfig, ScanError, ScanExtrema,
};
pub use fit::{least_squares, log_log_slope, FitError, LineFit};
pub use halfplane::{
    classify_pair, dist_to_y_axis, geodesic_point, hp_distance, mobius_apply,
    mobius_image_of_y_axis, tube_contains, tube_window, Geodesic, GeometryError, HPoint, MobiusMap,
    PairClass, TubeRadius, TubeWindow,
};
pub use lorentz::{
    distribution_fn, interpolation_check, lorentz_norm, rearrangement, weak_norm, LorentzError,
    Rearrangement, SampledFunction,
};
pub use oscquad::{
    c_aphi, circle_kernel, kernel_decay_check, model_kernel_check, model_restriction_kernel,
    norm_scaling_fit, opnorm, ttstar_kernel, Amplitude, DecayConfig, DecayReport, KernelGrid,
    ModelKernelReport, OpNorm, OscError, OscillatoryOperator, Phase, Regime, ScalingReport,
    MIN_FIT_LAMBDAS,
};
pub use phase::{
    admissible_window, mixed_partial_fd, phi_eval, phi_fd_oracle, phi_jet, phi_st_over_t_minus_t0,
    AdmissibleWindow, CaseKind, PhaseCase, PhaseError, PhaseJet,
};
pub use scalar::Real;
pub use sphere::{
    exponent_fit, exponent_report, restriction_norm, ExponentRow, ExponentTable,
    GreatCircleSegment, HarmonicFamily, HarmonicKind, SphereError, MIN_FIT_DEGREES,
};

pub type HPoint64 = HPoint<f64>;
pub type HPoint32 = HPoint<f32>;
pub type Geodesic64 = Geodesic<f64>;
pub type Geodesic32 = Geodesic<f32>;
pub type MobiusMap64 = MobiusMap<f64>;
pub type PhaseCase64 = PhaseCase<f64>;
pub type PhaseCase32 = PhaseCase<f32>;
pub type PhaseJet64 = PhaseJet<f64>;
pub type SampledFunction64 = SampledFunction<f64>;
pub type SampledFunction32 = SampledFunction<f32>;
