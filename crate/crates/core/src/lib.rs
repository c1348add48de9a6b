//! Numerical realization of a strongly singular oscillatory integral
//! operator along the curve (t, t^k).
//!
//! The operator convolves along (t, t^k), t in (0, 1], against the kernel
//! e^{2 pi i gamma(t)} / psi(t), where the phase gamma oscillates violently
//! and the weight psi vanishes at the origin. Its multiplier is
//!
//! ```text
//! m(xi, eta) = integral_0^1 e^{2 pi i (gamma(t) - xi t - eta t^k)} / psi(t) dt
//! ```
//!
//! This crate evaluates m to controlled accuracy, decomposes it along
//! curvature-dyadic shells, measures the L^2/L^1 bounds of the pieces,
//! probes the sharpness frequencies where the kernel decay saturates, and
//! applies the operator to sampled fields both directly and spectrally.

pub mod error;
pub mod exec;
pub mod field;
pub mod logval;
pub mod lp;
pub mod multiplier;
pub mod oscquad;
pub mod phase;
pub mod sharpness;

pub use error::{FieldError, PhaseError, QuadError};
pub use exec::{par_map, seq_map, set_threads};
pub use field::{
    apply_direct, apply_spectral, epsilon_convergence, grid_frequency, write_ladder_csv,
    DirectReport, EpsilonLadder, EpsilonStep, GridField, MultiplierTable,
};
pub use logval::LogVal;
pub use lp::{
    default_cell_region, dyadic_piece_report, dyadic_piece_table, interpolation_summary_json,
    interpolation_table, tj_l1_bound, tj_l2_sup, write_piece_csv, DyadicPieceReport,
    InterpolationSpec, L1Piece, L2Piece,
};
pub use multiplier::{
    compute_mj, compute_multiplier, compute_multiplier_split, find_t0, scan_multiplier,
    scan_summary_json, write_scan_csv, GridLaw, MultiplierSample, MultiplierSplit, RefinementStep,
    ScanRegion, ScanResult, ScanSample, SplitInfo,
};
pub use oscquad::{
    compute_g, integrate_oscillatory, integrate_oscillatory_complex, phase_g, truncation_point,
    FrequencyPoint, OperatorSpec, OscEngine, PhaseGValues, QuadResult, TruncationPlan,
    DEFAULT_CELL_BUDGET, DEFAULT_DIRECT_CAP,
};
pub use phase::{
    AssumptionRecord, AssumptionReport, CustomPhase, DyadicGrid, GridSpec, LemmaFit, PhaseFamily,
    PhasePair, PhaseValues, Verdict,
};
pub use sharpness::{
    default_t_list, sharpness_growth, sharpness_points, write_growth_csv, GrowthReport,
    SharpnessPoint,
};
