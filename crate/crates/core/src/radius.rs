//! Intrinsic generic radius of convergence and overconvergence evidence.
//!
//! For direction `i` at radius `ρ` the estimate at depth `s` is
//!
//! ```text
//! IR_i^{(s)} = min(1, p^{-1/(p-1)} ρ_i^{-1} |G_{i,s}|_ρ^{-1/s})
//! ```
//!
//! reported as the exponent `e` with `IR = p^{-e}`, so `e ≥ 0` and `e = 0`
//! means radius 1. The liminf over `s` is replaced by the largest exponent
//! (smallest radius) over a trailing window of depths, together with the
//! spread of the window as a stability diagnostic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{ConnectionModule, DEFAULT_DEPTH_CAP};
use crate::error::{Error, Result};
use crate::laurent::{vertex_radii, RadiusVector};
use crate::padic::{factorial_valuation, rational_serde, LogNorm, LogRadius};

/// Smallest depth accepted by [`intrinsic_radius`].
pub const MIN_DEPTH: usize = 8;
/// Smallest multi-index bound accepted by [`taylor_probe`].
pub const MIN_TAYLOR_BOUND: usize = 8;

/// Tuning knobs shared by the radius computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiusOptions {
    /// Fraction of the depth range forming the diagnostic window.
    pub window: BigRational,
    /// Exponent gap separating "radius 1" from "radius below 1".
    pub tol: BigRational,
    pub depth_cap: usize,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        Self {
            window: BigRational::new(1.into(), 4.into()),
            tol: BigRational::new(1.into(), 20.into()),
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowEstimate {
    pub s: usize,
    /// Exponent of `|G_{i,s}|_ρ`; `"inf"` when `G_{i,s} = 0`.
    pub g_norm: LogNorm,
    #[serde(with = "rational_serde")]
    pub ir_exponent: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionReport {
    /// 1-based direction index.
    pub direction: usize,
    pub window_estimates: Vec<WindowEstimate>,
    /// Largest window exponent, i.e. the smallest radius in the window.
    #[serde(with = "rational_serde")]
    pub point_estimate: BigRational,
    /// Largest minus smallest window exponent.
    #[serde(with = "rational_serde")]
    pub stability: BigRational,
    /// Set when some `G_{i,s}` vanished, which forces radius exactly 1.
    pub exact: bool,
    /// Depth at which `G_{i,s}` first vanished.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanishing_depth: Option<usize>,
}

impl DirectionReport {
    fn index(&self) -> usize {
        self.direction - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub prime: u64,
    pub radius: RadiusVector,
    pub depth: usize,
    #[serde(with = "rational_serde")]
    pub window: BigRational,
    pub directions: Vec<DirectionReport>,
    /// Exponent of `min_i IR_i`.
    #[serde(with = "rational_serde")]
    pub ir_estimate: BigRational,
    /// True when every direction is exactly 1.
    pub exact: bool,
}

impl RadiusReport {
    /// `IR = p^{-ir_estimate}` as a float, for display only.
    pub fn ir_value(&self) -> f64 {
        (self.prime as f64).powf(-crate::padic::rational_to_f64(&self.ir_estimate))
    }
}

fn ceil_rational(x: &BigRational) -> BigInt {
    x.numer().div_ceil(x.denom())
}

/// First depth of the window `[⌈(1−w)N⌉, N]`, never below 1.
pub fn window_start(depth: usize, window: &BigRational) -> usize {
    let lo = ceil_rational(&((BigRational::one() - window) * BigRational::from_integer(depth.into())));
    let lo: usize = lo.try_into().unwrap_or(0);
    lo.max(1)
}

fn validate_window(window: &BigRational) -> Result<()> {
    if !window.is_positive() || window > &BigRational::one() {
        return Err(Error::InvalidArgument(format!(
            "window fraction must lie in (0, 1], got {}",
            crate::padic::format_rational(window)
        )));
    }
    Ok(())
}

/// `max(0, 1/(p−1) − r_i − g/s)` where `|G| = p^{-g}`; zero when `G = 0`.
fn ir_exponent(p: u64, r_i: &BigRational, g: &LogNorm, s: usize) -> BigRational {
    match g.exponent() {
        None => BigRational::zero(),
        Some(g) => {
            let base = BigRational::new(1.into(), BigInt::from(p - 1));
            let e = base - r_i - g / BigRational::from_integer(s.into());
            if e.is_negative() {
                BigRational::zero()
            } else {
                e
            }
        }
    }
}

fn direction_report(
    module: &ConnectionModule,
    i: usize,
    rho: &RadiusVector,
    depth: usize,
    start: usize,
) -> DirectionReport {
    let p = module.prime();
    let r_i = rho.entries()[i].exponent().expect("checked by caller").clone();
    let mut estimates = Vec::with_capacity(depth + 1 - start);
    let mut vanishing = None;
    for (s, g) in module.deriv_iter(i).enumerate().skip(1).take(depth) {
        if g.is_zero() {
            vanishing = Some(s);
            break;
        }
        if s >= start {
            let norm = g.gauss_lognorm(rho);
            let e = ir_exponent(p, &r_i, &norm, s);
            estimates.push(WindowEstimate {
                s,
                g_norm: norm,
                ir_exponent: e,
            });
        }
    }
    if let Some(s0) = vanishing {
        // every later G vanishes too
        for s in start.max(s0)..=depth {
            estimates.push(WindowEstimate {
                s,
                g_norm: LogNorm::ZERO,
                ir_exponent: BigRational::zero(),
            });
        }
    }
    let point = estimates
        .iter()
        .map(|w| &w.ir_exponent)
        .max()
        .cloned()
        .unwrap_or_default();
    let low = estimates
        .iter()
        .map(|w| &w.ir_exponent)
        .min()
        .cloned()
        .unwrap_or_default();
    DirectionReport {
        direction: i + 1,
        window_estimates: estimates,
        stability: &point - low,
        point_estimate: point,
        exact: vanishing.is_some(),
        vanishing_depth: vanishing,
    }
}

/// Estimates `IR(E, ρ)` from `G_{i,s}` for `s ≤ depth`.
pub fn intrinsic_radius(
    module: &ConnectionModule,
    rho: &RadiusVector,
    depth: usize,
    opts: &RadiusOptions,
) -> Result<RadiusReport> {
    if depth < MIN_DEPTH {
        return Err(Error::InvalidArgument(format!(
            "depth must be at least {MIN_DEPTH}, got {depth}"
        )));
    }
    if depth > opts.depth_cap {
        return Err(Error::DepthCap {
            requested: depth,
            cap: opts.depth_cap,
        });
    }
    validate_window(&opts.window)?;
    let rho = RadiusVector::new(rho.entries().to_vec(), module.n(), module.m())?;
    if rho.entries().iter().any(LogRadius::is_disc_center) {
        return Err(Error::InvalidRadius(
            "the generic radius is undefined at a disc radius of 0".into(),
        ));
    }
    module.require_integrable()?;

    let start = window_start(depth, &opts.window);
    let directions: Vec<DirectionReport> = (0..module.nvars())
        .into_par_iter()
        .map(|i| direction_report(module, i, &rho, depth, start))
        .collect();
    let ir = directions
        .iter()
        .map(|d| &d.point_estimate)
        .max()
        .cloned()
        .unwrap_or_default();
    let exact = directions.iter().all(|d| d.exact);
    Ok(RadiusReport {
        prime: module.prime(),
        radius: rho,
        depth,
        window: opts.window.clone(),
        directions,
        ir_estimate: ir,
        exact,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    OverconvergentEvidence,
    NotOverconvergentEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub rationale: String,
    /// 1-based direction stably below radius 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_direction: Option<usize>,
    #[serde(with = "rational_serde")]
    pub tol: BigRational,
    pub report: RadiusReport,
}

/// Tests `IR(E, (1, .., 1)) = 1` on the window of depths.
///
/// A direction counts as radius 1 when it is exact or every window exponent
/// is below `tol`; it counts as stably below 1 when every window exponent is
/// at least `tol` and the window spread is at most `tol`.
pub fn oc_ir_test(module: &ConnectionModule, depth: usize, opts: &RadiusOptions) -> Result<Verdict> {
    if !opts.tol.is_positive() {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let rho = RadiusVector::ones(module.nvars());
    let report = intrinsic_radius(module, &rho, depth, opts)?;
    let tol = &opts.tol;

    let at_one = |d: &DirectionReport| d.exact || d.window_estimates.iter().all(|w| &w.ir_exponent < tol);
    let below = |d: &DirectionReport| {
        !d.exact && &d.stability <= tol && d.window_estimates.iter().all(|w| &w.ir_exponent >= tol)
    };

    let witness = report.directions.iter().filter(|d| below(d)).max_by(|a, b| {
        a.point_estimate
            .cmp(&b.point_estimate)
            .then(b.direction.cmp(&a.direction))
    });
    let (verdict, rationale, witness_direction) = if let Some(d) = witness {
        (
            VerdictKind::NotOverconvergentEvidence,
            format!(
                "direction {} has window exponents in [{}, {}], all at least tol; radius stays below 1",
                d.direction,
                crate::padic::format_rational(&(&d.point_estimate - &d.stability)),
                crate::padic::format_rational(&d.point_estimate)
            ),
            Some(d.direction),
        )
    } else if report.directions.iter().all(at_one) {
        (
            VerdictKind::OverconvergentEvidence,
            "every direction is exactly 1 or has window exponents below tol".to_string(),
            None,
        )
    } else {
        let d = report
            .directions
            .iter()
            .find(|d| !at_one(d))
            .expect("some direction is not at radius 1");
        (
            VerdictKind::Inconclusive,
            format!(
                "direction {} is neither within tol of radius 1 nor stably below it (point {}, spread {})",
                d.direction,
                crate::padic::format_rational(&d.point_estimate),
                crate::padic::format_rational(&d.stability)
            ),
            None,
        )
    };
    Ok(Verdict {
        verdict,
        rationale,
        witness_direction,
        tol: tol.clone(),
        report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaylorStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// Summary of `|(1/j!) ∂_i^j e_α| η^j` over `j ≤ bound` for one `(i, α)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaylorSequence {
    pub direction: usize,
    pub generator: usize,
    pub status: TaylorStatus,
    /// Exponents of the terms `j = 0..=bound`.
    pub exponents: Vec<LogNorm>,
    /// Smallest `(e_j − e_0)/j` over the tail; the geometric envelope rate.
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub envelope_rate: Option<BigRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaylorReport {
    pub status: TaylorStatus,
    /// Multi-index `j` (all zero except the failing direction).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    pub eta: LogRadius,
    pub lambda: LogRadius,
    pub bound: usize,
    #[serde(with = "rational_serde")]
    pub divergence: BigRational,
    pub sequences: Vec<TaylorSequence>,
}

mod opt_rational {
    use super::*;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&crate::padic::format_rational(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<BigRational>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| crate::padic::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Default divergence threshold for [`taylor_probe`]: a tail term exceeding
/// the `j = 0` term by a factor `p` or more.
pub fn default_divergence() -> BigRational {
    BigRational::one()
}

/// Probes the Taylor-series criterion with generators the standard basis.
///
/// Norms are supremum norms on `A^n[λ,1] × A^m[0,1]`, computed as the
/// largest Gauss norm over the vertex radii. Multi-indices reduce to single
/// directions, so the family probed is `j·e_i` for `j ≤ bound`. With
/// `h = ⌈bound/2⌉`, a sequence passes when `e_j > e_0` for all tail indices
/// `j ≥ h` (a geometric envelope with rate `min (e_j − e_0)/j > 0`), and fails
/// at the first tail index where `e_j ≤ e_0 − divergence`.
pub fn taylor_probe(
    module: &ConnectionModule,
    eta: &LogRadius,
    lambda: &LogRadius,
    bound: usize,
    divergence: &BigRational,
) -> Result<TaylorReport> {
    if bound < MIN_TAYLOR_BOUND {
        return Err(Error::InvalidArgument(format!(
            "multi-index bound must be at least {MIN_TAYLOR_BOUND}, got {bound}"
        )));
    }
    let r_eta = match eta.exponent() {
        Some(r) if r.is_positive() => r.clone(),
        _ => return Err(Error::InvalidRadius("η must lie in (0, 1)".into())),
    };
    let r_lambda = lambda
        .exponent()
        .ok_or_else(|| Error::InvalidRadius("λ must lie in (0, 1]".into()))?
        .clone();
    module.require_integrable()?;

    let p = module.prime();
    let vertices = vertex_radii(module.n(), module.m(), &r_lambda);
    let half = bound.div_ceil(2);

    let per_direction: Vec<Vec<TaylorSequence>> = (0..module.nvars())
        .into_par_iter()
        .map(|i| {
            let mats: Vec<_> = module.deriv_iter(i).take(bound + 1).collect();
            (0..module.rank())
                .map(|alpha| {
                    let exponents: Vec<LogNorm> = mats
                        .iter()
                        .enumerate()
                        .map(|(j, g)| {
                            let sup = vertices
                                .iter()
                                .map(|rho| g.column_gauss_lognorm(alpha, rho))
                                .max()
                                .unwrap_or(LogNorm::ZERO);
                            let shift = BigRational::from_integer(j.into()) * &r_eta
                                - BigRational::from_integer(factorial_valuation(j as u64, p).into());
                            sup.shift(&shift)
                        })
                        .collect();
                    classify(i, alpha, exponents, half, divergence)
                })
                .collect()
        })
        .collect();
    let sequences: Vec<TaylorSequence> = per_direction.into_iter().flatten().collect();

    let failing = sequences
        .iter()
        .filter(|s| s.status == TaylorStatus::Fail)
        .min_by_key(|s| (s.divergence_index, s.direction, s.generator));
    let (status, witness) = if let Some(f) = failing {
        let mut j = vec![0; module.nvars()];
        j[f.direction - 1] = f.divergence_index.expect("failing sequences carry an index");
        (TaylorStatus::Fail, Some(j))
    } else if sequences.iter().all(|s| s.status == TaylorStatus::Pass) {
        (TaylorStatus::Pass, None)
    } else {
        (TaylorStatus::Inconclusive, None)
    };
    Ok(TaylorReport {
        status,
        witness,
        eta: eta.clone(),
        lambda: lambda.clone(),
        bound,
        divergence: divergence.clone(),
        sequences,
    })
}

fn classify(i: usize, alpha: usize, exponents: Vec<LogNorm>, half: usize, divergence: &BigRational) -> TaylorSequence {
    let base = exponents[0].exponent().cloned().unwrap_or_default();
    let mut rate: Option<BigRational> = None;
    let mut divergence_index = None;
    for (j, e) in exponents.iter().enumerate().skip(half.max(1)) {
        let Some(e) = e.exponent() else { continue };
        let gain = e - &base;
        if divergence_index.is_none() && gain <= -divergence {
            divergence_index = Some(j);
        }
        let r = gain / BigRational::from_integer(j.into());
        rate = Some(match rate {
            Some(cur) if cur <= r => cur,
            _ => r,
        });
    }
    let status = if divergence_index.is_some() {
        TaylorStatus::Fail
    } else if rate.as_ref().is_none_or(|r| r.is_positive()) {
        TaylorStatus::Pass
    } else {
        TaylorStatus::Inconclusive
    };
    TaylorSequence {
        direction: i + 1,
        generator: alpha + 1,
        status,
        exponents,
        envelope_rate: rate,
        divergence_index,
    }
}

impl RadiusReport {
    pub fn direction(&self, i: usize) -> &DirectionReport {
        self.directions
            .iter()
            .find(|d| d.index() == i)
            .expect("direction present")
    }
}
