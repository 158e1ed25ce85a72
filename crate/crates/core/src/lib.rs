//! Analysis of integrable connections on p-adic polyannuli.
//!
//! The crate works with connections presented by matrices of Laurent
//! polynomials with exact rational coefficients. It computes Gauss norms,
//! the matrices of iterated derivatives, estimates of the intrinsic generic
//! radius of convergence, overconvergence evidence, restrictions to
//! coordinate curves, and dominance certificates for Laurent polynomials on
//! closed subannuli.

pub mod connection;
pub mod corpus;
pub mod curves;
pub mod error;
pub mod laurent;
pub mod newton;
pub mod padic;
pub mod radius;
mod scaled;

pub use connection::ModuleDescriptor;
pub use connection::{
    integrability_check, iterated_matrices, matrix_gauss_lognorm, ConnectionModule, Curvature, DerivMatrixSequence,
    Matrix,
};
pub use curves::{curve_witness_search, generic_equality_check, specialize, UnitPoint};
pub use error::{Error, Result};
pub use laurent::{ExponentVector, LaurentPoly, RadiusVector, TermRecord};
pub use newton::{
    dominant_term, shrink_interval, sup_norm_on_interval, unit_certificate_check, AlignedInterval, DominanceCertificate,
};
pub use padic::{lognorm_max, LogNorm, LogRadius, PAdicRational};
pub use radius::{intrinsic_radius, oc_ir_test, taylor_probe, RadiusOptions, RadiusReport, Verdict, VerdictKind};
