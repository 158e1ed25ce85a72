//! Restriction of a module to coordinate curves through unit points.
//!
//! Fixing every coordinate except `t_i` at a unit point `c` pulls the module
//! back to a one-variable module whose only matrix is `N_i(c)`. Because `∂_i`
//! does not see the other variables, `G_{i,s}` of the restriction is
//! `G_{i,s}` evaluated at `c`; the generic-point check compares the Gauss
//! norms of both sides depth by depth.

use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{matrix_gauss_lognorm, ConnectionModule, Matrix};
use crate::error::{Error, Result};
use crate::laurent::RadiusVector;
use crate::padic::{rational_serde, rational_valuation, LogNorm, LogRadius, PAdicRational};
use crate::radius::{intrinsic_radius, oc_ir_test, RadiusOptions, VerdictKind};

/// Coordinates of a unit point for every variable except the curve direction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnitPoint {
    coordinates: Vec<PAdicRational>,
}

impl UnitPoint {
    pub fn new(coordinates: Vec<PAdicRational>) -> Result<Self> {
        if let Some(index) = coordinates.iter().position(|c| !c.is_unit()) {
            return Err(Error::NonUnitCoordinate { index: index + 1 });
        }
        Ok(Self { coordinates })
    }

    pub fn parse(values: &[String], prime: u64) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|v| PAdicRational::parse(v, prime))
                .collect::<Result<_>>()?,
        )
    }

    pub fn coordinates(&self) -> &[PAdicRational] {
        &self.coordinates
    }

    pub fn len(&self) -> usize {
        self.coordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.is_empty()
    }

    /// Substitution slots for a module with `nvars` variables, leaving slot `i` free.
    pub fn substitution(&self, i: usize, nvars: usize) -> Result<Vec<Option<BigRational>>> {
        if self.coordinates.len() + 1 != nvars || i >= nvars {
            return Err(Error::InvalidArgument(format!(
                "unit point has {} coordinates; direction {} of {} variables needs {}",
                self.coordinates.len(),
                i + 1,
                nvars,
                nvars.saturating_sub(1)
            )));
        }
        let mut it = self.coordinates.iter();
        Ok((0..nvars)
            .map(|l| {
                if l == i {
                    None
                } else {
                    it.next().map(|c| c.value().clone())
                }
            })
            .collect())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coordinates.iter().map(ToString::to_string).collect()
    }
}

/// Draws a unit point: numerators uniform in `[-range, range] \ {0}`,
/// denominators uniform in `[1, range]`, redrawn until the valuation is 0.
pub fn sample_unit_point<R: Rng>(rng: &mut R, len: usize, prime: u64, range: i64) -> UnitPoint {
    let coordinates = (0..len)
        .map(|_| loop {
            let num = loop {
                let x = rng.gen_range(-range..=range);
                if x != 0 {
                    break x;
                }
            };
            let den = rng.gen_range(1..=range);
            let q = BigRational::new(num.into(), den.into());
            if rational_valuation(&q, prime) == Some(0) {
                break PAdicRational::new_unchecked(q, prime);
            }
        })
        .collect();
    UnitPoint { coordinates }
}

/// The one-variable module along the coordinate curve in direction `i`
/// through `point`. The result is an annulus module when `i` is an annulus
/// direction and a disc module otherwise.
pub fn specialize(module: &ConnectionModule, i: usize, point: &UnitPoint) -> Result<ConnectionModule> {
    module.check_direction(i)?;
    if point.coordinates.iter().any(|c| c.prime() != module.prime()) {
        return Err(Error::SignatureMismatch("unit point over a different prime".into()));
    }
    let values = point.substitution(i, module.nvars())?;
    let restricted = module.matrix(i).substitute(&values)?;
    let (n, m) = if i < module.n() { (1, 0) } else { (0, 1) };
    let out = ConnectionModule::new(module.prime(), n, m, vec![restricted])?;
    Ok(match module.label() {
        Some(l) => out.with_label(format!("{l} | t{} curve", i + 1)),
        None => out,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum GenericEquality {
    AllEqual {
        depth: usize,
    },
    FirstFailure {
        s: usize,
        /// `|G_{i,s}(c)|_ρ` on the curve.
        specialized: LogNorm,
        /// `|G_{i,s}|` at `(1, .., ρ, .., 1)`.
        generic: LogNorm,
    },
}

impl GenericEquality {
    pub fn is_equal(&self) -> bool {
        matches!(self, GenericEquality::AllEqual { .. })
    }
}

/// Compares `|G_{i,s}(c)|_ρ` with `|G_{i,s}|_{(1,..,ρ,..,1)}` for `1 ≤ s ≤ depth`.
pub fn generic_equality_check(
    module: &ConnectionModule,
    i: usize,
    point: &UnitPoint,
    depth: usize,
    rho: &LogRadius,
) -> Result<GenericEquality> {
    module.check_direction(i)?;
    let values = point.substitution(i, module.nvars())?;
    if !point.coordinates.iter().all(PAdicRational::is_unit) {
        return Err(Error::NonUnitCoordinate { index: 0 });
    }
    if i < module.n() && rho.is_disc_center() {
        return Err(Error::InvalidRadius("annulus direction cannot have radius 0".into()));
    }
    module.require_integrable()?;
    let full_rho = RadiusVector::single(module.nvars(), i, rho.clone());
    let curve_rho = RadiusVector::single(1, 0, rho.clone());
    for (s, g) in module.deriv_iter(i).enumerate().skip(1).take(depth) {
        let generic = g.gauss_lognorm(&full_rho);
        let specialized = matrix_gauss_lognorm(&g.substitute(&values)?, &curve_rho);
        debug_assert!(specialized <= generic, "evaluation at a unit point raised a Gauss norm");
        if specialized != generic {
            return Ok(GenericEquality::FirstFailure {
                s,
                specialized,
                generic,
            });
        }
        if g.is_zero() {
            break;
        }
    }
    Ok(GenericEquality::AllEqual { depth })
}

/// `G_{i,s}` evaluated at the point, i.e. the matrices of the restriction.
pub fn evaluate_sequence(module: &ConnectionModule, i: usize, point: &UnitPoint, depth: usize) -> Result<Vec<Matrix>> {
    let values = point.substitution(i, module.nvars())?;
    module
        .deriv_iter(i)
        .take(depth + 1)
        .map(|g| g.substitute(&values))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub radius: RadiusOptions,
    /// Numerator and denominator range for sampled unit points.
    pub sample_range: i64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            radius: RadiusOptions::default(),
            sample_range: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveWitness {
    /// 1-based curve direction.
    pub direction: usize,
    pub coordinates: Vec<String>,
    /// 0-based index of the winning trial.
    pub trial: usize,
    #[serde(with = "rational_serde")]
    pub ir_full: BigRational,
    #[serde(with = "rational_serde")]
    pub ir_curve: BigRational,
    #[serde(with = "rational_serde")]
    pub full_stability: BigRational,
    #[serde(with = "rational_serde")]
    pub curve_stability: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSearch {
    pub full_verdict: VerdictKind,
    pub depth: usize,
    pub trials: usize,
    pub seed: u64,
    /// Trials whose generic-point check passed.
    pub passing_trials: usize,
    pub witness: Option<CurveWitness>,
}

/// Looks for a coordinate curve realizing a deficient radius.
///
/// Runs only when the full module shows stable evidence of radius below 1;
/// trial points are drawn in order from `seed`, and the lowest-index trial
/// passing the generic-point check wins regardless of evaluation order.
pub fn curve_witness_search(
    module: &ConnectionModule,
    depth: usize,
    trials: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<WitnessSearch> {
    if opts.sample_range < 1 {
        return Err(Error::InvalidArgument("sample range must be positive".into()));
    }
    let verdict = oc_ir_test(module, depth, &opts.radius)?;
    let mut out = WitnessSearch {
        full_verdict: verdict.verdict,
        depth,
        trials,
        seed,
        passing_trials: 0,
        witness: None,
    };
    let Some(direction) = verdict.witness_direction else {
        return Ok(out);
    };
    if module.nvars() < 2 {
        return Err(Error::InvalidArgument(
            "curve search needs at least two variables".into(),
        ));
    }
    let i = direction - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<UnitPoint> = (0..trials)
        .map(|_| sample_unit_point(&mut rng, module.nvars() - 1, module.prime(), opts.sample_range))
        .collect();
    let rho = LogRadius::one();
    let outcomes: Vec<bool> = points
        .par_iter()
        .map(|c| generic_equality_check(module, i, c, depth, &rho).map(|r| r.is_equal()))
        .collect::<Result<_>>()?;
    out.passing_trials = outcomes.iter().filter(|&&ok| ok).count();

    if let Some(trial) = outcomes.iter().position(|&ok| ok) {
        let point = &points[trial];
        let curve = specialize(module, i, point)?;
        let curve_report = intrinsic_radius(&curve, &RadiusVector::ones(1), depth, &opts.radius)?;
        let full = verdict.report.direction(i);
        out.witness = Some(CurveWitness {
            direction,
            coordinates: point.to_strings(),
            trial,
            ir_full: verdict.report.ir_estimate.clone(),
            ir_curve: curve_report.ir_estimate.clone(),
            full_stability: full.stability.clone(),
            curve_stability: curve_report.directions[0].stability.clone(),
        });
    }
    Ok(out)
}

impl CurveWitness {
    /// `|ir_curve − ir_full|` is within the larger of the two window spreads.
    pub fn is_sound(&self) -> bool {
        let gap = (&self.ir_curve - &self.ir_full).abs();
        let spread = std::cmp::max(&self.full_stability, &self.curve_stability);
        &gap <= spread
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::iterated_matrices;
    use crate::laurent::LaurentPoly;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn point(p: u64, xs: &[(i64, i64)]) -> UnitPoint {
        UnitPoint::new(
            xs.iter()
                .map(|&(a, b)| PAdicRational::from_ratio(a, b, p).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn poly2(p: u64, terms: &[([i64; 2], i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(p, 2, 0, terms.iter().map(|(e, c)| (e.to_vec(), q(*c, 1)))).unwrap()
    }

    #[test]
    fn rejects_non_unit() {
        let p = 3;
        let err = UnitPoint::new(vec![
            PAdicRational::from_integer(1, p).unwrap(),
            PAdicRational::from_integer(6, p).unwrap(),
        ]);
        assert!(matches!(err, Err(Error::NonUnitCoordinate { index: 2 })));
    }

    #[test]
    fn trivial_specializes_to_trivial() {
        let m = ConnectionModule::trivial(5, 2, 1, 2).unwrap();
        let c = point(5, &[(2, 3), (7, 1)]);
        let s = specialize(&m, 2, &c).unwrap();
        assert_eq!(s, ConnectionModule::trivial(5, 0, 1, 2).unwrap());
    }

    #[test]
    fn kummer_curve() {
        let p = 7;
        let a = q(2, 5);
        let n1 = LaurentPoly::monomial(vec![-1, 0], a.clone(), p, 2, 0).unwrap();
        let m = ConnectionModule::new(p, 2, 0, vec![Matrix::scalar(n1), Matrix::zero(1, p, 2, 0)]).unwrap();
        let s = specialize(&m, 0, &point(p, &[(1, 1)])).unwrap();
        let expected = LaurentPoly::monomial(vec![-1], a, p, 1, 0).unwrap();
        assert_eq!(s.matrix(0), &Matrix::scalar(expected));
        assert_eq!((s.n(), s.m()), (1, 0));
    }

    #[test]
    fn closed_form_family_commutes_with_specialization() {
        // N_1 = [c0/t1] with c0 a constant: the restriction is again Kummer.
        let p = 3;
        let n1 = poly2(p, &[([-1, 0], 5)]);
        let m = ConnectionModule::new(p, 2, 0, vec![Matrix::scalar(n1), Matrix::zero(1, p, 2, 0)]).unwrap();
        let c = point(p, &[(4, 5)]);
        let restricted = specialize(&m, 0, &c).unwrap();
        let lhs = iterated_matrices(&restricted, 0, 20).unwrap();
        let rhs = evaluate_sequence(&m, 0, &c, 20).unwrap();
        assert_eq!(lhs.matrices, rhs);
    }

    #[test]
    fn constant_in_off_variables_is_always_generic() {
        let p = 5;
        let n1 = poly2(p, &[([0, 0], 3), ([-2, 0], 1)]);
        let m = ConnectionModule::new(p, 2, 0, vec![Matrix::scalar(n1), Matrix::zero(1, p, 2, 0)]).unwrap();
        for c in [point(p, &[(1, 1)]), point(p, &[(-7, 3)]), point(p, &[(12, 13)])] {
            let r = generic_equality_check(&m, 0, &c, 15, &LogRadius::one()).unwrap();
            assert_eq!(r, GenericEquality::AllEqual { depth: 15 });
        }
    }

    #[test]
    fn unit_shift_keeps_norm() {
        // N_1 = [t2 + p], N_2 = [t1]: integrable since ∂_1 N_2 = ∂_2 N_1 = 1.
        let p = 3;
        let m = ConnectionModule::new(
            p,
            2,
            0,
            vec![
                Matrix::scalar(poly2(p, &[([0, 1], 1), ([0, 0], 3)])),
                Matrix::scalar(poly2(p, &[([1, 0], 1)])),
            ],
        )
        .unwrap();
        let c = point(p, &[(1, 1)]);
        let r = generic_equality_check(&m, 0, &c, 1, &LogRadius::one()).unwrap();
        assert!(r.is_equal());
    }

    #[test]
    fn vanishing_specialization_fails_at_first_depth() {
        // N_1 = [t2 − 1], N_2 = [t1]: integrable, and N_1(1) = 0.
        let p = 3;
        let m = ConnectionModule::new(
            p,
            2,
            0,
            vec![
                Matrix::scalar(poly2(p, &[([0, 1], 1), ([0, 0], -1)])),
                Matrix::scalar(poly2(p, &[([1, 0], 1)])),
            ],
        )
        .unwrap();
        let r = generic_equality_check(&m, 0, &point(p, &[(1, 1)]), 10, &LogRadius::one()).unwrap();
        assert_eq!(
            r,
            GenericEquality::FirstFailure {
                s: 1,
                specialized: LogNorm::ZERO,
                generic: LogNorm::one()
            }
        );
    }

    #[test]
    fn sampling_is_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        let pa = sample_unit_point(&mut a, 3, 5, 50);
        let pb = sample_unit_point(&mut b, 3, 5, 50);
        assert_eq!(pa, pb);
        assert!(pa.coordinates().iter().all(PAdicRational::is_unit));
    }

    #[test]
    fn trivial_module_has_no_witness() {
        let m = ConnectionModule::trivial(3, 2, 0, 1).unwrap();
        let r = curve_witness_search(&m, 40, 5, 1, &SearchOptions::default()).unwrap();
        assert_eq!(r.full_verdict, VerdictKind::OverconvergentEvidence);
        assert!(r.witness.is_none());
    }
}
