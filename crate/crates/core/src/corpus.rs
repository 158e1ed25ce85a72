//! Modules with known radii, used as fixtures and shipped with the CLI.

use num_rational::BigRational;

use crate::connection::{ConnectionModule, Matrix};
use crate::error::Result;
use crate::laurent::LaurentPoly;

/// All `N_i = 0`.
pub fn trivial(prime: u64, n: usize, m: usize, rank: usize) -> Result<ConnectionModule> {
    Ok(ConnectionModule::trivial(prime, n, m, rank)?.with_label(format!("trivial rank {rank} (n={n}, m={m})")))
}

/// `∂e = c·e` on the annulus `n = 1`; radius `min(1, p^{-1/(p-1)}/|c|)` at every `ρ`.
pub fn constant(prime: u64, c: BigRational) -> Result<ConnectionModule> {
    let label = format!("constant {}", crate::padic::format_rational(&c));
    let n1 = LaurentPoly::constant(c, prime, 1, 0);
    Ok(ConnectionModule::new(prime, 1, 0, vec![Matrix::scalar(n1)])?.with_label(label))
}

/// `∂e = e` on the unit disc: the exponential, radius `p^{-1/(p-1)}` at `ρ = 1`.
pub fn dwork_disc(prime: u64) -> Result<ConnectionModule> {
    let n1 = LaurentPoly::one(prime, 0, 1);
    Ok(ConnectionModule::new(prime, 0, 1, vec![Matrix::scalar(n1)])?.with_label("dwork disc"))
}

/// `N_1 = [u]`, `N_2 = [0]` on a two-dimensional annulus for a constant `u`.
pub fn dwork_two_var(prime: u64, u: BigRational) -> Result<ConnectionModule> {
    let n1 = LaurentPoly::constant(u, prime, 2, 0);
    Ok(
        ConnectionModule::new(prime, 2, 0, vec![Matrix::scalar(n1), Matrix::zero(1, prime, 2, 0)])?
            .with_label("dwork two-variable"),
    )
}

/// `∂e = (a/t)·e` on the annulus: `G_s = a(a−1)⋯(a−s+1) t^{-s}`.
pub fn kummer(prime: u64, a: BigRational) -> Result<ConnectionModule> {
    let label = format!("kummer {}", crate::padic::format_rational(&a));
    let n1 = LaurentPoly::monomial(vec![-1], a, prime, 1, 0)?;
    Ok(ConnectionModule::new(prime, 1, 0, vec![Matrix::scalar(n1)])?.with_label(label))
}

/// Named entries of the bundled corpus.
pub fn named(name: &str, prime: u64) -> Result<Option<ConnectionModule>> {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    Ok(Some(match name {
        "trivial" => trivial(prime, 1, 0, 1)?,
        "trivial-3x3" => trivial(prime, 2, 1, 3)?,
        "dwork" => dwork_disc(prime)?,
        "dwork-2var" => dwork_two_var(prime, q(1, 1))?,
        "kummer-3" => kummer(prime, q(3, 1))?,
        "kummer-half" => kummer(prime, q(1, 2))?,
        _ => return Ok(None),
    }))
}

pub const NAMES: &[&str] = &[
    "trivial",
    "trivial-3x3",
    "dwork",
    "dwork-2var",
    "kummer-3",
    "kummer-half",
];
