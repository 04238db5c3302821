//! Ricci flow of diagonal cohomogeneity-one metrics
//! `g = ζ²dr² + φ²σ₁² + ψ²σ₂² + ξ²σ₃²` on `S⁴`, `ℂP²`, `S²×S²` and `ℂP²#-ℂP²`.

pub mod analysis;
pub mod calibrate;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod grid;
pub mod io;
pub mod manifold;
pub mod profiles;
pub mod stencil;
pub mod svg;
pub mod transition;

mod quadrature;

pub use analysis::{
    einstein_regression, first_variation_radial, integral_identity, midregion_sign, refinement_study, theorem_check,
    ExperimentReport, InitialMetric, TheoremParams, Verdict,
};
pub use calibrate::calibrate_slope;
pub use curvature::{
    min_sec_operator,
    curvature_profile, frame_connection, min_sec_global, min_sec_point, min_sec_thorpe, ricci_closed_form, ricci_diag,
    riemann_frame, sec_plane, FrameCurvature, MinSecOptions, TangentPlane,
};
pub use error::{Error, Result};
pub use flow::{evolve, flow_rhs, FlowOptions, FlowTrace, StepRecord, StopReason};
pub use grid::Grid;
pub use manifold::{End, Family, ManifoldSpec, Pole, Reflection, Side};
pub use profiles::{
    build_grove_ziller, build_model_metric, check_smoothness, GroveZiller, ModelMetric, PoleResiduals, ProfileSet,
    SmoothnessReport,
};
pub use stencil::{boundary_extend, GhostMode};
pub use transition::{transition_profile, Jet3, TransitionProfile};
pub use io::{read_profiles, write_profiles, RunConfig, SlopeSetting};
