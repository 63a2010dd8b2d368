//! Jet-level Weil-algebra calculus: flat linear extended connections determined by a
//! Kählerian connection, their polarizations, and convergence estimates.

pub mod brute;
pub mod connection;
pub mod error;
pub mod estimates;
pub mod hodge;
pub mod io;
pub mod kahler;
pub mod linalg;
pub mod polarization;
pub mod scalar;
pub mod weil;

pub use brute::{brute_force_polarization, brute_force_solve};
pub use connection::{
    d2_identity_residual, flatness_residual, hodge_connection_series, linearity_residual, reduced_square, solve,
    weakly_hodge_audit, ConnectionSolution, HodgeConnectionSeries, ReducedSquare, ResidualReport,
};
pub use error::{Result, WeilError};
pub use estimates::{
    check_generating_bounds, estimate, estimate_radius, measure_norms, theoretical_radius, verify_bounds,
    EstimateReport, SeriesTable,
};
pub use hodge::{HodgeBidegree, WeaklyHodgeMap, WkDualBasis};
pub use io::{JetFile, PayloadKind};
pub use kahler::{
    builtin_example, connection_derivation, levi_civita, verify_kahlerian, ChristoffelJet, CurvatureJet, KahlerReport,
    MetricJet, BUILTIN_NAMES,
};
pub use polarization::{
    holomorphy_residual, kahler_form, kahler_form_reconstruct, positivity_check, solve_polarization,
    PolarizationSolution,
};
pub use scalar::{Fc, Qc, Scalar, DEFAULT_TOL};
pub use weil::{Derivation, Element, Gen, Kind, Monomial};
