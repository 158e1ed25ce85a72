//! Dominant terms of a Laurent polynomial on a closed subannulus.
//!
//! For `a = Σ a_n t^n` on `α ≤ |t| ≤ β` (exponents `r_α ≥ r_β > 0`), each
//! term gives a line `r ↦ v(a_n) + n·r` in log coordinates; the Gauss norm at
//! `p^{-r}` is the lower envelope of these lines. On a suitable closed
//! subinterval a single line lies strictly below all others, which makes
//! `a = a_{n₀} t^{n₀} (1 + f)` with `|f| < 1`, a unit with
//! `|a|_ρ = |a_{n₀}| ρ^{n₀}`.

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, RadiusVector};
use crate::padic::{format_rational, rational_serde, rational_valuation, LogNorm, LogRadius};

/// Closed interval of radii `[p^{-alpha}, p^{-beta}]` with `alpha > beta > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AlignedInterval {
    /// Exponent of the inner radius `α`.
    #[serde(with = "rational_serde")]
    pub alpha: BigRational,
    /// Exponent of the outer radius `β`.
    #[serde(with = "rational_serde")]
    pub beta: BigRational,
}

impl AlignedInterval {
    pub fn new(alpha: BigRational, beta: BigRational) -> Result<Self> {
        if !beta.is_positive() || alpha <= beta {
            return Err(Error::InvalidArgument(format!(
                "need radius exponents alpha > beta > 0, got [{}, {}]",
                format_rational(&alpha),
                format_rational(&beta)
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn contains(&self, r: &BigRational) -> bool {
        &self.beta <= r && r <= &self.alpha
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.contains(&other.alpha) && self.contains(&other.beta)
    }

    /// `count` evenly spaced exponents from `beta` to `alpha` inclusive.
    pub fn sample(&self, count: usize) -> Vec<BigRational> {
        match count {
            0 => Vec::new(),
            1 => vec![(&self.alpha + &self.beta) / BigRational::from_integer(2.into())],
            _ => {
                let step = (&self.alpha - &self.beta) / BigRational::from_integer((count - 1).into());
                (0..count)
                    .map(|k| &self.beta + &step * BigRational::from_integer(k.into()))
                    .collect()
            }
        }
    }
}

/// The line `r ↦ valuation + exponent·r` of one term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Line {
    pub exponent: i64,
    pub valuation: BigRational,
}

impl Line {
    pub fn at(&self, r: &BigRational) -> BigRational {
        &self.valuation + r * BigRational::from_integer(self.exponent.into())
    }
}

/// Lines of a one-variable polynomial with scalar coefficients.
pub fn scalar_lines(a: &LaurentPoly) -> Result<Vec<Line>> {
    if a.nvars() != 1 {
        return Err(Error::InvalidArgument(format!(
            "expected a one-variable polynomial, got {} variables",
            a.nvars()
        )));
    }
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    Ok(a.terms()
        .map(|(e, c)| Line {
            exponent: e.entries()[0],
            valuation: BigRational::from_integer(
                rational_valuation(c, a.prime())
                    .expect("stored coefficients are nonzero")
                    .into(),
            ),
        })
        .collect())
}

/// Lines in the variable `t_direction` whose coefficients are polynomials in
/// the remaining variables, each valued by its Gauss norm at radius 1.
///
/// This treats every coefficient as if it were a unit multiple of a constant
/// of the same norm, which is what shrinking to the locus where the leading
/// coefficient is invertible achieves.
pub fn coefficient_lines(a: &LaurentPoly, direction: usize) -> Result<Vec<Line>> {
    if direction >= a.nvars() {
        return Err(Error::DirectionOutOfRange {
            direction: direction + 1,
            nvars: a.nvars(),
        });
    }
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut grouped: std::collections::BTreeMap<i64, LaurentPoly> = Default::default();
    for (e, c) in a.terms() {
        let k = e.entries()[direction];
        let mut exps = e.entries().to_vec();
        exps[direction] = 0;
        let mono = LaurentPoly::monomial(exps, c.clone(), a.prime(), a.n(), a.m())?;
        let slot = grouped
            .entry(k)
            .or_insert_with(|| LaurentPoly::zero(a.prime(), a.n(), a.m()));
        *slot = slot.add(&mono)?;
    }
    let ones = RadiusVector::ones(a.nvars());
    Ok(grouped
        .into_iter()
        .filter_map(|(k, coeff)| {
            coeff.gauss_lognorm(&ones).exponent().map(|v| Line {
                exponent: k,
                valuation: v.clone(),
            })
        })
        .collect())
}

/// Exponent of the sup norm on the interval from a set of lines.
pub fn sup_exponent(lines: &[Line], interval: &AlignedInterval) -> BigRational {
    let inner = Iterator::min(lines.iter().filter(|l| l.exponent <= 0).map(|l| l.at(&interval.alpha)));
    let outer = Iterator::min(lines.iter().filter(|l| l.exponent >= 0).map(|l| l.at(&interval.beta)));
    match (inner, outer) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) => a,
        (None, Some(b)) => b,
        (None, None) => unreachable!("lines are nonempty"),
    }
}

/// Supremum norm of `a` on `A^1(I)`: negative exponents peak at `α`,
/// positive ones at `β`.
pub fn sup_norm_on_interval(a: &LaurentPoly, interval: &AlignedInterval) -> Result<LogNorm> {
    Ok(LogNorm::from_exponent(sup_exponent(&scalar_lines(a)?, interval)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `n₀` is the largest index attaining the sup norm at `α` (`n ≤ 0`).
    Inner,
    /// `n₀` is the smallest index attaining the sup norm at `β` (`n ≥ 0`).
    Outer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dominance {
    pub inner_set: Vec<i64>,
    pub outer_set: Vec<i64>,
    pub n0: i64,
    pub branch: Branch,
    #[serde(with = "rational_serde")]
    pub sup_exponent: BigRational,
}

pub fn dominant_term_lines(lines: &[Line], interval: &AlignedInterval) -> Result<Dominance> {
    if lines.is_empty() {
        return Err(Error::ZeroInput);
    }
    let sup = sup_exponent(lines, interval);
    let mut inner: Vec<i64> = lines
        .iter()
        .filter(|l| l.exponent <= 0 && l.at(&interval.alpha) == sup)
        .map(|l| l.exponent)
        .collect();
    let mut outer: Vec<i64> = lines
        .iter()
        .filter(|l| l.exponent >= 0 && l.at(&interval.beta) == sup)
        .map(|l| l.exponent)
        .collect();
    inner.sort_unstable();
    outer.sort_unstable();
    let (n0, branch) = match (inner.last(), outer.first()) {
        (Some(&n), _) => (n, Branch::Inner),
        (None, Some(&n)) => (n, Branch::Outer),
        (None, None) => unreachable!("the sup norm is attained by some line"),
    };
    Ok(Dominance {
        inner_set: inner,
        outer_set: outer,
        n0,
        branch,
        sup_exponent: sup,
    })
}

/// The sets `A`, `B` of indices attaining the sup norm at `α`, `β`, and the
/// chosen dominant index `n₀ = max A`, or `min B` when `A` is empty.
pub fn dominant_term(a: &LaurentPoly, interval: &AlignedInterval) -> Result<Dominance> {
    dominant_term_lines(&scalar_lines(a)?, interval)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceCertificate {
    pub n0: i64,
    pub branch: Branch,
    pub interval: AlignedInterval,
    /// `|a|` on the original interval.
    pub sup_norm: LogNorm,
    /// Smallest gap `v(a_n) + n·r − v(a_{n₀}) − n₀·r` over `n ≠ n₀` and both
    /// endpoints of the shrunken interval; absent (`+∞`) for a monomial.
    #[serde(with = "opt_rational")]
    pub margin: Option<BigRational>,
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&format_rational(x)),
            None => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigRational>, D::Error> {
        let s = String::deserialize(d)?;
        if s == "inf" {
            return Ok(None);
        }
        crate::padic::parse_rational(&s)
            .map(Some)
            .map_err(serde::de::Error::custom)
    }
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

pub fn shrink_interval_lines(lines: &[Line], interval: &AlignedInterval) -> Result<DominanceCertificate> {
    let dom = dominant_term_lines(lines, interval)?;
    let lead = lines
        .iter()
        .find(|l| l.exponent == dom.n0)
        .expect("n0 indexes a line")
        .clone();

    // Strict dominance of the n0 line over line n is d_n(r) > 0 with
    // d_n(r) = (v_n − v_0) + (n − n0)·r, i.e. r > x_n for n > n0 and
    // r < x_n for n < n0, where x_n is the crossing point.
    let mut lo_open: Option<BigRational> = None;
    let mut hi_open: Option<BigRational> = None;
    for l in lines.iter().filter(|l| l.exponent != dom.n0) {
        let slope = BigRational::from_integer((l.exponent - dom.n0).into());
        let cross = (&lead.valuation - &l.valuation) / &slope;
        if slope.is_positive() {
            if lo_open.as_ref().is_none_or(|c| &cross > c) {
                lo_open = Some(cross);
            }
        } else if hi_open.as_ref().is_none_or(|c| &cross < c) {
            hi_open = Some(cross);
        }
    }
    // Feasible set within [beta, alpha]; `true` marks an excluded endpoint.
    let (lo, lo_excluded) = match lo_open {
        Some(c) if c >= interval.beta => (c, true),
        _ => (interval.beta.clone(), false),
    };
    let (hi, hi_excluded) = match hi_open {
        Some(c) if c <= interval.alpha => (c, true),
        _ => (interval.alpha.clone(), false),
    };
    if lo >= hi {
        return Err(Error::InvalidArgument(format!(
            "no subinterval where term {} dominates (feasible exponents [{}, {}])",
            dom.n0,
            format_rational(&lo),
            format_rational(&hi)
        )));
    }
    let width = &hi - &lo;
    let (new_beta, new_alpha) = match (lo_excluded, hi_excluded) {
        (false, false) => (lo, hi),
        (true, false) => (&lo + &width * half(), hi),
        (false, true) => (lo.clone(), &lo + &width * half()),
        (true, true) => {
            let quarter = &width * BigRational::new(1.into(), 4.into());
            (&lo + &quarter, &hi - &quarter)
        }
    };
    let shrunk = AlignedInterval::new(new_alpha, new_beta)?;

    let margin = lines
        .iter()
        .filter(|l| l.exponent != dom.n0)
        .flat_map(|l| {
            [&shrunk.alpha, &shrunk.beta]
                .into_iter()
                .map(|r| l.at(r) - lead.at(r))
                .collect::<Vec<_>>()
        })
        .min();
    debug_assert!(margin.as_ref().is_none_or(|m| m.is_positive()));
    Ok(DominanceCertificate {
        n0: dom.n0,
        branch: dom.branch,
        interval: shrunk,
        sup_norm: LogNorm::from_exponent(dom.sup_exponent),
        margin,
    })
}

/// Closed subinterval of positive length on which the `n₀` line lies strictly
/// below every other line. Open ends of the feasible range are replaced by
/// the midpoint of the range (quarter points when both ends are open).
pub fn shrink_interval(a: &LaurentPoly, interval: &AlignedInterval) -> Result<DominanceCertificate> {
    shrink_interval_lines(&scalar_lines(a)?, interval)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CertificateCheck {
    Ok {
        samples: usize,
    },
    Counterexample {
        #[serde(with = "rational_serde")]
        radius_exponent: BigRational,
        reason: String,
    },
}

impl CertificateCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, CertificateCheck::Ok { .. })
    }
}

/// Checks at `samples` radii of the certificate interval that
/// `f = Σ_{n≠n₀} (a_n/a_{n₀}) t^{n−n₀}` has `|f|_ρ < 1` and that
/// `|a|_ρ = |a_{n₀}| ρ^{n₀}`.
pub fn unit_certificate_check(
    a: &LaurentPoly,
    cert: &DominanceCertificate,
    samples: usize,
) -> Result<CertificateCheck> {
    scalar_lines(a)?;
    let lead = a.coeff(&[cert.n0]);
    if lead.is_zero() {
        return Ok(CertificateCheck::Counterexample {
            radius_exponent: cert.interval.beta.clone(),
            reason: format!("coefficient of t^{} is zero", cert.n0),
        });
    }
    let inv = lead.inverse()?;
    let f = LaurentPoly::from_terms(
        a.prime(),
        a.n(),
        a.m(),
        a.terms()
            .filter(|(e, _)| e.entries()[0] != cert.n0)
            .map(|(e, c)| (vec![e.entries()[0] - cert.n0], c * inv.value())),
    )?;
    let lead_v = BigRational::from_integer(lead.valuation().expect("nonzero").into());
    for r in cert.interval.sample(samples) {
        let rho = RadiusVector::new(vec![LogRadius::new(r.clone())?], a.n(), a.m())?;
        let fnorm = f.gauss_lognorm(&rho);
        if fnorm.exponent().is_some_and(|e| !e.is_positive()) {
            return Ok(CertificateCheck::Counterexample {
                radius_exponent: r,
                reason: format!("|f| has exponent {fnorm}, not below norm 1"),
            });
        }
        let expected = LogNorm::from_exponent(&lead_v + &r * BigRational::from_integer(cert.n0.into()));
        let actual = a.gauss_lognorm(&rho);
        if actual != expected {
            return Ok(CertificateCheck::Counterexample {
                radius_exponent: r,
                reason: format!("|a| has exponent {actual}, dominant term gives {expected}"),
            });
        }
    }
    Ok(CertificateCheck::Ok { samples })
}

impl DominanceCertificate {
    pub fn is_monomial(&self) -> bool {
        self.margin.is_none()
    }
}
