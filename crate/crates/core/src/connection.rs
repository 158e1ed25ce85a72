//! Connections on polyannuli given by matrices `N_1, .., N_{n+m}`.
//!
//! Convention: `∂_i` acts on coefficient columns as `v ↦ ∂_i v + N_i v`. The
//! matrix of `∂_i^s` on the basis is then `G_{i,s}` with `G_{i,0} = 1` and
//! `G_{i,s+1} = ∂_i(G_{i,s}) + N_i G_{i,s}`. Mixed operators `∂^j` for a
//! multi-index `j` are obtained by applying the same step once per factor.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, RadiusVector, TermRecord};
use crate::padic::{check_prime, LogNorm};
use crate::scaled::ScaledIter;

/// Default bound on the depth of iterated-derivative sequences.
pub const DEFAULT_DEPTH_CAP: usize = 512;

/// Dense square matrix of Laurent polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rank: usize,
    entries: Vec<LaurentPoly>,
}

impl Matrix {
    pub fn zero(rank: usize, prime: u64, n: usize, m: usize) -> Self {
        Self {
            rank,
            entries: vec![LaurentPoly::zero(prime, n, m); rank * rank],
        }
    }

    pub fn identity(rank: usize, prime: u64, n: usize, m: usize) -> Self {
        let mut out = Self::zero(rank, prime, n, m);
        for r in 0..rank {
            out.entries[r * rank + r] = LaurentPoly::one(prime, n, m);
        }
        out
    }

    /// Builds a matrix from rows. All entries must share one signature.
    pub fn from_rows(rows: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let rank = rows.len();
        if rank == 0 {
            return Err(Error::InvalidArgument("matrix of rank 0".into()));
        }
        let mut entries = Vec::with_capacity(rank * rank);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != rank {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} entries, expected {}",
                    r + 1,
                    row.len(),
                    rank
                )));
            }
            entries.extend(row);
        }
        if entries.iter().any(|e| !e.same_signature(&entries[0])) {
            return Err(Error::SignatureMismatch("matrix entries disagree".into()));
        }
        Ok(Self { rank, entries })
    }

    pub(crate) fn from_entries(rank: usize, entries: Vec<LaurentPoly>) -> Self {
        debug_assert_eq!(entries.len(), rank * rank);
        Self { rank, entries }
    }

    /// `1×1` matrix.
    pub fn scalar(entry: LaurentPoly) -> Self {
        Self {
            rank: 1,
            entries: vec![entry],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, row: usize, col: usize) -> &LaurentPoly {
        &self.entries[row * self.rank + col]
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(LaurentPoly::is_zero)
    }

    fn signature(&self) -> (u64, usize, usize) {
        let e = &self.entries[0];
        (e.prime(), e.n(), e.m())
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank || self.signature() != other.signature() {
            return Err(Error::SignatureMismatch(format!(
                "matrix of rank {} vs rank {}",
                self.rank, other.rank
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self {
            rank: self.rank,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(Self {
            rank: self.rank,
            entries,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let (p, n, m) = self.signature();
        let k = self.rank;
        let mut entries = Vec::with_capacity(k * k);
        for r in 0..k {
            for c in 0..k {
                let mut acc = LaurentPoly::zero(p, n, m);
                for l in 0..k {
                    let a = self.get(r, l);
                    let b = other.get(l, c);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b)?)?;
                }
                entries.push(acc);
            }
        }
        Ok(Self { rank: k, entries })
    }

    /// Entry-wise `∂_i`.
    pub fn partial(&self, i: usize) -> Result<Self> {
        let entries = self.entries.iter().map(|e| e.partial(i)).collect::<Result<_>>()?;
        Ok(Self {
            rank: self.rank,
            entries,
        })
    }

    /// Entry-wise substitution; see [`LaurentPoly::substitute`].
    pub fn substitute(&self, values: &[Option<num_rational::BigRational>]) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.substitute(values))
            .collect::<Result<_>>()?;
        Ok(Self {
            rank: self.rank,
            entries,
        })
    }

    /// Largest Gauss norm among the entries of column `col`.
    pub fn column_gauss_lognorm(&self, col: usize, rho: &RadiusVector) -> LogNorm {
        (0..self.rank)
            .map(|r| self.get(r, col).gauss_lognorm(rho))
            .max()
            .unwrap_or(LogNorm::ZERO)
    }

    pub fn to_records(&self) -> Vec<Vec<Vec<TermRecord>>> {
        (0..self.rank)
            .map(|r| (0..self.rank).map(|c| self.get(r, c).to_records()).collect())
            .collect()
    }

    pub fn from_records(prime: u64, n: usize, m: usize, rows: &[Vec<Vec<TermRecord>>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|terms| LaurentPoly::from_records(prime, n, m, terms))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for r in 0..self.rank {
            if r > 0 {
                f.write_str("; ")?;
            }
            for c in 0..self.rank {
                if c > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        f.write_str("]")
    }
}

/// Maximum of the `ρ`-Gauss norms of the entries; zero for the zero matrix.
pub fn matrix_gauss_lognorm(g: &Matrix, rho: &RadiusVector) -> LogNorm {
    g.entries
        .iter()
        .map(|e| e.gauss_lognorm(rho))
        .max()
        .unwrap_or(LogNorm::ZERO)
}

/// A rank-`μ` module with connection on `A^n[λ,1] × A^m[0,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionModule {
    prime: u64,
    n: usize,
    m: usize,
    rank: usize,
    matrices: Vec<Matrix>,
    label: Option<String>,
}

/// Nonzero curvature `∂_i(N_j) − ∂_j(N_i) + [N_i, N_j]` for `i < j` (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Curvature {
    pub i: usize,
    pub j: usize,
    pub witness: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Integrability {
    Integrable,
    Violation(Curvature),
}

impl Integrability {
    pub fn is_integrable(&self) -> bool {
        matches!(self, Integrability::Integrable)
    }
}

impl ConnectionModule {
    /// Validates shapes and signatures. Integrability is not checked here.
    pub fn new(prime: u64, n: usize, m: usize, matrices: Vec<Matrix>) -> Result<Self> {
        check_prime(prime)?;
        if n + m == 0 {
            return Err(Error::InvalidArgument("module needs at least one variable".into()));
        }
        if matrices.len() != n + m {
            return Err(Error::InvalidArgument(format!(
                "expected {} connection matrices, got {}",
                n + m,
                matrices.len()
            )));
        }
        let rank = matrices[0].rank();
        for (i, mat) in matrices.iter().enumerate() {
            if mat.rank() != rank {
                return Err(Error::InvalidArgument(format!(
                    "matrix N_{} has rank {}, expected {}",
                    i + 1,
                    mat.rank(),
                    rank
                )));
            }
            if mat.signature() != (prime, n, m) {
                return Err(Error::SignatureMismatch(format!(
                    "entries of N_{} do not live in (p={prime}, n={n}, m={m})",
                    i + 1
                )));
            }
        }
        Ok(Self {
            prime,
            n,
            m,
            rank,
            matrices,
            label: None,
        })
    }

    /// The module with all `N_i = 0`.
    pub fn trivial(prime: u64, n: usize, m: usize, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        Self::new(prime, n, m, vec![Matrix::zero(rank, prime, n, m); n + m])
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nvars(&self) -> usize {
        self.n + self.m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &Matrix {
        &self.matrices[i]
    }

    pub(crate) fn check_direction(&self, i: usize) -> Result<()> {
        if i >= self.nvars() {
            return Err(Error::DirectionOutOfRange {
                direction: i + 1,
                nvars: self.nvars(),
            });
        }
        Ok(())
    }

    pub fn identity(&self) -> Matrix {
        Matrix::identity(self.rank, self.prime, self.n, self.m)
    }

    pub fn curvature(&self, i: usize, j: usize) -> Result<Matrix> {
        self.check_direction(i)?;
        self.check_direction(j)?;
        let (ni, nj) = (&self.matrices[i], &self.matrices[j]);
        let commutator = ni.mul(nj)?.sub(&nj.mul(ni)?)?;
        nj.partial(i)?.sub(&ni.partial(j)?)?.add(&commutator)
    }

    /// One step `G ↦ ∂_i(G) + N_i G`.
    pub fn apply_direction(&self, i: usize, g: &Matrix) -> Result<Matrix> {
        self.check_direction(i)?;
        g.partial(i)?.add(&self.matrices[i].mul(g)?)
    }

    /// Matrix of `∂_1^{j_1} ⋯ ∂_{n+m}^{j_{n+m}}`; the rightmost factor acts first.
    pub fn multi_index_matrix(&self, j: &[usize]) -> Result<Matrix> {
        if j.len() != self.nvars() {
            return Err(Error::InvalidArgument(format!(
                "multi-index has {} entries, expected {}",
                j.len(),
                self.nvars()
            )));
        }
        let mut g = self.identity();
        for (i, &k) in j.iter().enumerate().rev() {
            for _ in 0..k {
                g = self.apply_direction(i, &g)?;
            }
        }
        Ok(g)
    }

    pub(crate) fn require_integrable(&self) -> Result<()> {
        match integrability_check(self) {
            Integrability::Integrable => Ok(()),
            Integrability::Violation(c) => Err(Error::NotIntegrable { i: c.i + 1, j: c.j + 1 }),
        }
    }

    /// Lazy `G_{i,0}, G_{i,1}, ..` without the integrability check.
    pub(crate) fn deriv_iter(&self, i: usize) -> ScaledIter<'_> {
        ScaledIter::new(self, i)
    }
}

/// Returns the first nonzero curvature in lexicographic `(i, j)` order.
pub fn integrability_check(module: &ConnectionModule) -> Integrability {
    for i in 0..module.nvars() {
        for j in i + 1..module.nvars() {
            let c = module.curvature(i, j).expect("directions in range");
            if !c.is_zero() {
                return Integrability::Violation(Curvature { i, j, witness: c });
            }
        }
    }
    Integrability::Integrable
}

/// `G_{i,0..=depth}` for direction `i` (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivMatrixSequence {
    pub direction: usize,
    pub matrices: Vec<Matrix>,
}

impl DerivMatrixSequence {
    pub fn depth(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn get(&self, s: usize) -> &Matrix {
        &self.matrices[s]
    }
}

pub fn iterated_matrices(module: &ConnectionModule, i: usize, depth: usize) -> Result<DerivMatrixSequence> {
    iterated_matrices_capped(module, i, depth, DEFAULT_DEPTH_CAP)
}

pub fn iterated_matrices_capped(
    module: &ConnectionModule,
    i: usize,
    depth: usize,
    cap: usize,
) -> Result<DerivMatrixSequence> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if depth > cap {
        return Err(Error::DepthCap { requested: depth, cap });
    }
    module.check_direction(i)?;
    module.require_integrable()?;
    Ok(DerivMatrixSequence {
        direction: i,
        matrices: module.deriv_iter(i).take(depth + 1).map(|g| g.to_matrix()).collect(),
    })
}

/// Descriptor form of a module, as read from and written to JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDescriptor {
    pub prime: u64,
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    pub matrices: Vec<Vec<Vec<Vec<TermRecord>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<serde_json::Value>,
}

impl ModuleDescriptor {
    pub fn to_module(&self) -> Result<ConnectionModule> {
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        let matrices = self
            .matrices
            .iter()
            .map(|rows| {
                if rows.len() != self.rank {
                    return Err(Error::InvalidArgument(format!(
                        "matrix has {} rows, declared rank is {}",
                        rows.len(),
                        self.rank
                    )));
                }
                Matrix::from_records(self.prime, self.n, self.m, rows)
            })
            .collect::<Result<Vec<_>>>()?;
        let module = ConnectionModule::new(self.prime, self.n, self.m, matrices)?;
        Ok(match &self.label {
            Some(l) => module.with_label(l.clone()),
            None => module,
        })
    }

    pub fn from_module(module: &ConnectionModule) -> Self {
        Self {
            prime: module.prime,
            n: module.n,
            m: module.m,
            rank: module.rank,
            matrices: module.matrices.iter().map(Matrix::to_records).collect(),
            label: module.label.clone(),
            expected: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn mono(p: u64, n: usize, m: usize, exps: Vec<i64>, c: BigRational) -> LaurentPoly {
        LaurentPoly::monomial(exps, c, p, n, m).unwrap()
    }

    fn kummer(p: u64, a: BigRational) -> ConnectionModule {
        ConnectionModule::new(p, 1, 0, vec![Matrix::scalar(mono(p, 1, 0, vec![-1], a))]).unwrap()
    }

    #[test]
    fn trivial_is_integrable() {
        let m = ConnectionModule::trivial(3, 2, 1, 2).unwrap();
        assert!(integrability_check(&m).is_integrable());
    }

    #[test]
    fn constant_scalars_commute() {
        let p = 5;
        let m = ConnectionModule::new(
            p,
            2,
            0,
            vec![
                Matrix::scalar(LaurentPoly::constant(q(7, 3), p, 2, 0)),
                Matrix::scalar(LaurentPoly::zero(p, 2, 0)),
            ],
        )
        .unwrap();
        assert!(integrability_check(&m).is_integrable());
    }

    #[test]
    fn curvature_witness() {
        let p = 3;
        let m = ConnectionModule::new(
            p,
            2,
            0,
            vec![
                Matrix::scalar(mono(p, 2, 0, vec![0, 1], q(1, 1))),
                Matrix::scalar(LaurentPoly::zero(p, 2, 0)),
            ],
        )
        .unwrap();
        match integrability_check(&m) {
            Integrability::Violation(c) => {
                assert_eq!((c.i, c.j), (0, 1));
                assert_eq!(c.witness, Matrix::scalar(LaurentPoly::constant(q(-1, 1), p, 2, 0)));
            }
            other => panic!("expected violation, got {other:?}"),
        }
        assert!(matches!(
            iterated_matrices(&m, 0, 4),
            Err(Error::NotIntegrable { i: 1, j: 2 })
        ));
    }

    #[test]
    fn constant_closed_form() {
        let p = 3;
        let c = q(6, 5);
        let m =
            ConnectionModule::new(p, 1, 0, vec![Matrix::scalar(LaurentPoly::constant(c.clone(), p, 1, 0))]).unwrap();
        let seq = iterated_matrices(&m, 0, 30).unwrap();
        let mut pow = q(1, 1);
        for s in 0..=30 {
            assert_eq!(seq.get(s), &Matrix::scalar(LaurentPoly::constant(pow.clone(), p, 1, 0)));
            pow *= &c;
        }
    }

    #[test]
    fn kummer_second_derivative() {
        let p = 5;
        let a = q(3, 7);
        let seq = iterated_matrices(&kummer(p, a.clone()), 0, 2).unwrap();
        let expected = mono(p, 1, 0, vec![-2], &a * (&a - q(1, 1)));
        assert_eq!(seq.get(2), &Matrix::scalar(expected));
    }

    #[test]
    fn zero_connection_kills_higher_derivatives() {
        let m = ConnectionModule::trivial(2, 1, 0, 2).unwrap();
        let seq = iterated_matrices(&m, 0, 10).unwrap();
        assert_eq!(seq.get(0), &m.identity());
        assert!(seq.matrices[1..].iter().all(Matrix::is_zero));
    }

    #[test]
    fn depth_guards() {
        let m = ConnectionModule::trivial(2, 1, 0, 1).unwrap();
        assert!(matches!(
            iterated_matrices(&m, 0, 600),
            Err(Error::DepthCap {
                requested: 600,
                cap: 512
            })
        ));
        assert!(iterated_matrices_capped(&m, 0, 600, 1000).is_ok());
        assert!(iterated_matrices(&m, 0, 0).is_err());
        assert!(iterated_matrices(&m, 1, 3).is_err());
    }

    #[test]
    fn matrix_norm_examples() {
        let p = 3;
        let rho = RadiusVector::ones(1);
        let id = Matrix::identity(2, p, 1, 0);
        assert_eq!(matrix_gauss_lognorm(&id, &rho), LogNorm::one());
        assert_eq!(matrix_gauss_lognorm(&Matrix::zero(2, p, 1, 0), &rho), LogNorm::ZERO);
        let seq = iterated_matrices(&kummer(p, q(3, 1)), 0, 2).unwrap();
        // 3·2 = 6 has v_3 = 1
        assert_eq!(matrix_gauss_lognorm(seq.get(2), &rho), LogNorm::from_integer(1));
    }

    #[test]
    fn descriptor_round_trip() {
        let m = kummer(7, q(-2, 9)).with_label("kummer");
        let d = ModuleDescriptor::from_module(&m);
        let json = serde_json::to_string(&d).unwrap();
        let back: ModuleDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_module().unwrap(), m);
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let p = 3;
        let a = Matrix::identity(2, p, 1, 0);
        let b = Matrix::identity(1, p, 1, 0);
        assert!(ConnectionModule::new(p, 2, 0, vec![a.clone(), a.clone()]).is_err());
        assert!(ConnectionModule::new(p, 1, 0, vec![a.clone(), b]).is_err());
        assert!(ConnectionModule::new(5, 1, 0, vec![a]).is_err());
    }
}
