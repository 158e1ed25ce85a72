//! Finitely supported Laurent polynomials on polyannuli.
//!
//! A polynomial lives in `n` annulus variables (any integer exponent) followed
//! by `m` disc variables (non-negative exponents). Coefficients are exact
//! rationals read through a single prime `p`. Gauss norms are returned as
//! [`LogNorm`] exponents and are always exact finite minima.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{
    check_prime, format_rational, parse_rational, rational_valuation, LogNorm, LogRadius, PAdicRational,
};

/// Multi-index `J = (J_1, .., J_{n+m})`. Ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentVector(pub(crate) Vec<i64>);

impl ExponentVector {
    pub fn new(entries: Vec<i64>, n: usize, m: usize) -> Result<Self> {
        if entries.len() != n + m {
            return Err(Error::InvalidExponent(format!(
                "expected {} entries, got {}",
                n + m,
                entries.len()
            )));
        }
        if let Some(l) = entries[n..].iter().position(|&e| e < 0) {
            return Err(Error::InvalidExponent(format!(
                "disc variable {} has negative exponent {}",
                n + l + 1,
                entries[n + l]
            )));
        }
        Ok(Self(entries))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Radius vector `ρ = (ρ_1, .., ρ_{n+m})`; annulus entries must be positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RadiusVector(Vec<LogRadius>);

impl RadiusVector {
    pub fn new(entries: Vec<LogRadius>, n: usize, m: usize) -> Result<Self> {
        if entries.len() != n + m {
            return Err(Error::InvalidRadius(format!(
                "expected {} radii, got {}",
                n + m,
                entries.len()
            )));
        }
        if let Some(i) = entries[..n].iter().position(LogRadius::is_disc_center) {
            return Err(Error::InvalidRadius(format!(
                "annulus variable {} cannot have radius 0",
                i + 1
            )));
        }
        Ok(Self(entries))
    }

    /// `(1, .., 1)`.
    pub fn ones(len: usize) -> Self {
        Self(vec![LogRadius::one(); len])
    }

    /// `(1, .., ρ, .., 1)` with `ρ` in slot `i`.
    pub fn single(len: usize, i: usize, rho: LogRadius) -> Self {
        let mut v = vec![LogRadius::one(); len];
        v[i] = rho;
        Self(v)
    }

    pub fn entries(&self) -> &[LogRadius] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Serialized term: `{"exps": [..], "coeff": "num/den"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exps: Vec<i64>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    prime: u64,
    n: usize,
    m: usize,
    terms: BTreeMap<ExponentVector, BigRational>,
}

impl LaurentPoly {
    pub fn zero(prime: u64, n: usize, m: usize) -> Self {
        Self {
            prime,
            n,
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: BigRational, prime: u64, n: usize, m: usize) -> Self {
        Self::monomial_unchecked(ExponentVector::zeros(n + m), c, prime, n, m)
    }

    pub fn one(prime: u64, n: usize, m: usize) -> Self {
        Self::constant(BigRational::one(), prime, n, m)
    }

    pub fn monomial(exps: Vec<i64>, c: BigRational, prime: u64, n: usize, m: usize) -> Result<Self> {
        check_prime(prime)?;
        let e = ExponentVector::new(exps, n, m)?;
        Ok(Self::monomial_unchecked(e, c, prime, n, m))
    }

    fn monomial_unchecked(e: ExponentVector, c: BigRational, prime: u64, n: usize, m: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { prime, n, m, terms }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(prime: u64, n: usize, m: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, BigRational)>,
    {
        check_prime(prime)?;
        let mut out = Self::zero(prime, n, m);
        for (exps, c) in terms {
            let e = ExponentVector::new(exps, n, m)?;
            out.add_term(e, c);
        }
        Ok(out)
    }

    pub fn from_records(prime: u64, n: usize, m: usize, records: &[TermRecord]) -> Result<Self> {
        let terms = records
            .iter()
            .map(|r| Ok((r.exps.clone(), parse_rational(&r.coeff)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(prime, n, m, terms)
    }

    /// Terms in lexicographic exponent order.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(e, c)| TermRecord {
                exps: e.0.clone(),
                coeff: format_rational(c),
            })
            .collect()
    }

    /// Caller guarantees valid exponents and nonzero coefficients.
    pub(crate) fn from_raw(prime: u64, n: usize, m: usize, terms: BTreeMap<ExponentVector, BigRational>) -> Self {
        Self { prime, n, m, terms }
    }

    fn add_term(&mut self, e: ExponentVector, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i64]) -> PAdicRational {
        let c = self
            .terms
            .get(&ExponentVector(exps.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero);
        PAdicRational::new_unchecked(c, self.prime)
    }

    /// True when every term has exponent vector zero.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.0.iter().all(|&x| x == 0))
    }

    pub fn same_signature(&self, other: &Self) -> bool {
        self.prime == other.prime && self.n == other.n && self.m == other.m
    }

    fn check_signature(&self, other: &Self) -> Result<()> {
        if self.same_signature(other) {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "(p={}, n={}, m={}) vs (p={}, n={}, m={})",
                self.prime, self.n, self.m, other.prime, other.n, other.m
            )))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_signature(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_signature(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_signature(other)?;
        let mut out = Self::zero(self.prime, self.n, self.m);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scalar_mul(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.prime, self.n, self.m);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    /// `∂/∂t_i` (0-based `i`): each term picks up `J_i` and loses one power of `t_i`.
    pub fn partial(&self, i: usize) -> Result<Self> {
        if i >= self.nvars() {
            return Err(Error::DirectionOutOfRange {
                direction: i + 1,
                nvars: self.nvars(),
            });
        }
        let mut out = Self::zero(self.prime, self.n, self.m);
        for (e, c) in &self.terms {
            let j = e.0[i];
            if j == 0 {
                continue;
            }
            let mut d = e.clone();
            d.0[i] -= 1;
            out.add_term(d, c * BigRational::from_integer(j.into()));
        }
        Ok(out)
    }

    /// Exponent of `|a_J| Π ρ_l^{J_l}` for one term; `None` when the term
    /// vanishes because some disc radius is 0.
    fn term_exponent(&self, e: &ExponentVector, c: &BigRational, rho: &RadiusVector) -> Option<BigRational> {
        let v = rational_valuation(c, self.prime).expect("stored coefficients are nonzero");
        let mut acc = BigRational::from_integer(v.into());
        for (j, r) in e.0.iter().zip(rho.entries()) {
            match r {
                LogRadius::Exp(r) => {
                    if *j != 0 {
                        acc += r * BigRational::from_integer((*j).into());
                    }
                }
                LogRadius::DiscCenter => {
                    if *j != 0 {
                        return None;
                    }
                }
            }
        }
        Some(acc)
    }

    /// `ρ`-Gauss norm `max_J |a_J| Π ρ_l^{J_l}`.
    pub fn gauss_lognorm(&self, rho: &RadiusVector) -> LogNorm {
        assert_eq!(rho.len(), self.nvars(), "radius vector length");
        self.terms
            .iter()
            .filter_map(|(e, c)| self.term_exponent(e, c, rho))
            .min()
            .map(LogNorm::from_exponent)
            .unwrap_or(LogNorm::ZERO)
    }

    /// Supremum norm on `A^n[λ,1] × A^m[0,1]`: the largest Gauss norm over
    /// the vertex radii `{λ,1}^n × {1}^m`.
    pub fn sup_lognorm_vertex(&self, lambda: &LogRadius) -> Result<LogNorm> {
        let lambda = lambda
            .exponent()
            .ok_or_else(|| Error::InvalidRadius("λ must be positive".into()))?;
        let mut best = LogNorm::ZERO;
        for rho in vertex_radii(self.n, self.m, lambda) {
            best = best.max(self.gauss_lognorm(&rho));
        }
        Ok(best)
    }

    /// Substitutes `t_l := values[l]` for every `l` with `Some` value and
    /// returns the polynomial in the remaining variables. The kept variables
    /// retain their annulus/disc kind. Substituted values must be nonzero
    /// for annulus variables that carry negative exponents.
    pub fn substitute(&self, values: &[Option<BigRational>]) -> Result<Self> {
        if values.len() != self.nvars() {
            return Err(Error::SignatureMismatch(format!(
                "expected {} substitution slots, got {}",
                self.nvars(),
                values.len()
            )));
        }
        let keep: Vec<usize> = (0..self.nvars()).filter(|&l| values[l].is_none()).collect();
        let n2 = keep.iter().filter(|&&l| l < self.n).count();
        let m2 = keep.len() - n2;
        let mut out = Self::zero(self.prime, n2, m2);
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            for (l, val) in values.iter().enumerate() {
                if let Some(x) = val {
                    let j = e.0[l];
                    if j < 0 && x.is_zero() {
                        return Err(Error::DivisionByZero);
                    }
                    coeff *= Pow::pow(x, j as i32);
                }
            }
            let reduced = ExponentVector(keep.iter().map(|&l| e.0[l]).collect());
            out.add_term(reduced, coeff);
        }
        Ok(out)
    }
}

/// All radius vectors in `{λ,1}^n × {1}^m`.
pub fn vertex_radii(n: usize, m: usize, lambda: &BigRational) -> Vec<RadiusVector> {
    (0..1usize << n)
        .map(|mask| {
            let mut v = Vec::with_capacity(n + m);
            for l in 0..n {
                if mask & (1 << l) != 0 {
                    v.push(LogRadius::Exp(lambda.clone()));
                } else {
                    v.push(LogRadius::one());
                }
            }
            v.extend(std::iter::repeat_n(LogRadius::one(), m));
            RadiusVector(v)
        })
        .collect()
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})", format_rational(c))?;
            for (l, j) in e.0.iter().enumerate() {
                match j {
                    0 => {}
                    1 => write!(f, "*t{}", l + 1)?,
                    _ => write!(f, "*t{}^{}", l + 1, j)?,
                }
            }
        }
        Ok(())
    }
}
