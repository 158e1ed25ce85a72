//! Fraction-free iteration of `G ↦ ∂_i G + N_i G`.
//!
//! `G_{i,s}` is kept as an integer matrix over one common denominator `d^s`,
//! where `d` clears the denominators of `N_i`. The recursion then needs no
//! rational normalization; conversion back to [`Matrix`] happens on demand.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::connection::{ConnectionModule, Matrix};
use crate::error::{Error, Result};
use crate::laurent::{ExponentVector, LaurentPoly, RadiusVector};
use crate::padic::{int_valuation, LogNorm, LogRadius};

type IntPoly = BTreeMap<ExponentVector, BigInt>;

fn add_into(poly: &mut IntPoly, e: ExponentVector, c: BigInt) {
    if c.is_zero() {
        return;
    }
    match poly.entry(e) {
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

fn valuation(c: &BigInt, p: u64) -> i64 {
    int_valuation(c, p) as i64
}

/// `entries / den` with integer entries.
#[derive(Clone, Debug)]
pub(crate) struct ScaledMatrix {
    prime: u64,
    n: usize,
    m: usize,
    rank: usize,
    den: BigInt,
    entries: Vec<IntPoly>,
}

impl ScaledMatrix {
    fn identity(module: &ConnectionModule) -> Self {
        let rank = module.rank();
        let mut entries = vec![IntPoly::new(); rank * rank];
        for k in 0..rank {
            entries[k * rank + k].insert(ExponentVector::zeros(module.nvars()), BigInt::one());
        }
        Self {
            prime: module.prime(),
            n: module.n(),
            m: module.m(),
            rank,
            den: BigInt::one(),
            entries,
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.entries.iter().all(BTreeMap::is_empty)
    }

    fn term_exponent(&self, e: &ExponentVector, c: &BigInt, rho: &RadiusVector) -> Option<BigRational> {
        let mut acc = BigRational::from_integer(valuation(c, self.prime).into());
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

    fn norm_of<'a>(&self, polys: impl Iterator<Item = &'a IntPoly>, rho: &RadiusVector) -> LogNorm {
        let best = polys
            .flat_map(|poly| poly.iter().filter_map(|(e, c)| self.term_exponent(e, c, rho)))
            .min();
        match best {
            None => LogNorm::ZERO,
            Some(e) => LogNorm::from_exponent(e - BigRational::from_integer(valuation(&self.den, self.prime).into())),
        }
    }

    /// Same value as [`crate::matrix_gauss_lognorm`] on the converted matrix.
    pub(crate) fn gauss_lognorm(&self, rho: &RadiusVector) -> LogNorm {
        self.norm_of(self.entries.iter(), rho)
    }

    pub(crate) fn column_gauss_lognorm(&self, col: usize, rho: &RadiusVector) -> LogNorm {
        self.norm_of((0..self.rank).map(|row| &self.entries[row * self.rank + col]), rho)
    }

    fn to_poly(&self, poly: &IntPoly, den: &BigInt, n: usize, m: usize) -> LaurentPoly {
        let terms = poly
            .iter()
            .map(|(e, c)| (e.clone(), BigRational::new(c.clone(), den.clone())))
            .collect();
        LaurentPoly::from_raw(self.prime, n, m, terms)
    }

    pub(crate) fn to_matrix(&self) -> Matrix {
        let entries = self
            .entries
            .iter()
            .map(|poly| self.to_poly(poly, &self.den, self.n, self.m))
            .collect();
        Matrix::from_entries(self.rank, entries)
    }

    /// Substitutes `t_l := values[l]` for every `Some` slot, as
    /// [`Matrix::substitute`] does, clearing the value denominators in
    /// integers before the single final division.
    pub(crate) fn substitute(&self, values: &[Option<BigRational>]) -> Result<Matrix> {
        let nvars = self.n + self.m;
        if values.len() != nvars {
            return Err(Error::SignatureMismatch(format!(
                "expected {nvars} substitution slots, got {}",
                values.len()
            )));
        }
        let keep: Vec<usize> = (0..nvars).filter(|&l| values[l].is_none()).collect();
        let n2 = keep.iter().filter(|&&l| l < self.n).count();
        let m2 = keep.len() - n2;

        let mut lo = vec![0i64; nvars];
        let mut hi = vec![0i64; nvars];
        for poly in &self.entries {
            for e in poly.keys() {
                for l in 0..nvars {
                    lo[l] = lo[l].min(e.0[l]);
                    hi[l] = hi[l].max(e.0[l]);
                }
            }
        }
        // x = a/b: a^J / b^J = a^{J−lo} b^{hi−J} / (a^{−lo} b^{hi})
        let mut tables: Vec<Option<(Vec<BigInt>, Vec<BigInt>)>> = vec![None; nvars];
        let mut den = self.den.clone();
        for l in 0..nvars {
            let Some(x) = &values[l] else { continue };
            if x.is_zero() && lo[l] < 0 {
                return Err(Error::DivisionByZero);
            }
            let span = (hi[l] - lo[l]) as usize;
            let powers = |base: &BigInt| {
                let mut v = Vec::with_capacity(span + 1);
                let mut acc = BigInt::one();
                for _ in 0..=span {
                    v.push(acc.clone());
                    acc *= base;
                }
                v
            };
            let (a, b) = (x.numer().clone(), x.denom().clone());
            den *= num_traits::pow(a.clone(), (-lo[l]) as usize) * num_traits::pow(b.clone(), hi[l] as usize);
            tables[l] = Some((powers(&a), powers(&b)));
        }

        let entries = self
            .entries
            .iter()
            .map(|poly| {
                let mut out = IntPoly::new();
                for (e, c) in poly {
                    let mut coeff = c.clone();
                    for (l, t) in tables.iter().enumerate() {
                        if let Some((pa, pb)) = t {
                            let j = e.0[l];
                            coeff *= &pa[(j - lo[l]) as usize];
                            coeff *= &pb[(hi[l] - j) as usize];
                        }
                    }
                    add_into(&mut out, ExponentVector(keep.iter().map(|&l| e.0[l]).collect()), coeff);
                }
                self.to_poly(&out, &den, n2, m2)
            })
            .collect();
        Ok(Matrix::from_entries(self.rank, entries))
    }
}

/// Lazy `G_{i,0}, G_{i,1}, ..` in scaled form.
pub(crate) struct ScaledIter<'a> {
    module: &'a ConnectionModule,
    direction: usize,
    /// `d·N_i` with integer entries.
    n_hat: Vec<IntPoly>,
    d: BigInt,
    last: Option<ScaledMatrix>,
}

impl<'a> ScaledIter<'a> {
    pub(crate) fn new(module: &'a ConnectionModule, direction: usize) -> Self {
        let n = module.matrix(direction);
        let d = n
            .entries()
            .iter()
            .flat_map(|e| e.terms().map(|(_, c)| c.denom().clone()))
            .fold(BigInt::one(), |acc, x| acc.lcm(&x));
        let n_hat = n
            .entries()
            .iter()
            .map(|e| {
                e.terms()
                    .map(|(x, c)| (x.clone(), c.numer() * (&d / c.denom())))
                    .collect()
            })
            .collect();
        Self {
            module,
            direction,
            n_hat,
            d,
            last: None,
        }
    }

    fn step(&self, g: &ScaledMatrix) -> ScaledMatrix {
        let r = g.rank;
        let i = self.direction;
        let mut out = vec![IntPoly::new(); r * r];
        for (k, poly) in g.entries.iter().enumerate() {
            for (e, c) in poly {
                let j = e.0[i];
                if j == 0 {
                    continue;
                }
                let mut shifted = e.clone();
                shifted.0[i] -= 1;
                add_into(&mut out[k], shifted, c * (&self.d * BigInt::from(j)));
            }
        }
        for row in 0..r {
            for col in 0..r {
                let target = &mut out[row * r + col];
                for k in 0..r {
                    for (ea, ca) in &self.n_hat[row * r + k] {
                        for (eb, cb) in &g.entries[k * r + col] {
                            add_into(target, ea.add(eb), ca * cb);
                        }
                    }
                }
            }
        }
        ScaledMatrix {
            prime: g.prime,
            n: g.n,
            m: g.m,
            rank: r,
            den: &g.den * &self.d,
            entries: out,
        }
    }
}

impl Iterator for ScaledIter<'_> {
    type Item = ScaledMatrix;

    fn next(&mut self) -> Option<ScaledMatrix> {
        let cur = match &self.last {
            None => ScaledMatrix::identity(self.module),
            Some(g) => self.step(g),
        };
        self.last = Some(cur.clone());
        Some(cur)
    }
}
