//! The Weil algebra at a point and its totalized form.

pub mod derivation;
pub mod element;
pub mod monomial;
pub mod ops;
pub mod pieces;

pub use derivation::{generators, Derivation};
pub use element::Element;
pub use monomial::{dz, dzb, s, sb, th, thb, z, zb, Gen, Kind, Monomial};
pub use ops::{
    c_tot, canonical_c, canonical_sigma, classify_llorr, d_r, derivation_is_real, h_apply, iota_conjugate, iota_star,
    naive_conj, real_structure, sigma_a, sigma_h, sigma_tot, LlOrRr,
};
pub use pieces::{
    enumerate, enumerate_piece, h_matrix, h_spectrum, image_matrix, operator_matrix, parity_vanishing,
    verify_acyclicity, HomotopyInverse,
};
