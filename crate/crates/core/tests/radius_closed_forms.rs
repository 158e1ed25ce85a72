use nabla_core::corpus;
use nabla_core::padic::LogRadius;
use nabla_core::radius::{
    default_divergence, intrinsic_radius, oc_ir_test, taylor_probe, RadiusOptions, TaylorStatus, VerdictKind,
};
use nabla_core::{iterated_matrices, LaurentPoly, Matrix, RadiusVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Independent p-adic valuation by repeated division.
fn val(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let count = |n: &BigInt| {
        let p = BigInt::from(p);
        let mut n = n.clone();
        let mut k = 0i64;
        while (&n % &p).is_zero() {
            n /= &p;
            k += 1;
        }
        k
    };
    Some(count(x.numer()) - count(x.denom()))
}

/// Window exponents `max(0, 1/(p-1) − v(a(a−1)⋯(a−s+1))/s)` for Kummer at ρ = 1.
fn kummer_oracle(p: u64, a: &BigRational, depth: usize) -> Vec<BigRational> {
    let mut c = BigRational::one();
    let mut out = vec![BigRational::zero()];
    for s in 1..=depth {
        c *= a - BigRational::from_integer((s as i64 - 1).into());
        let e = match val(&c, p) {
            None => BigRational::zero(),
            Some(v) => q(1, p as i64 - 1) - q(v, s as i64),
        };
        out.push(if e < BigRational::zero() {
            BigRational::zero()
        } else {
            e
        });
    }
    out
}

#[test]
fn kummer_matrices_match_falling_factorial() {
    for (p, a) in [(3u64, q(1, 2)), (5, q(-2, 3)), (2, q(7, 1))] {
        let m = corpus::kummer(p, a.clone()).unwrap();
        let seq = iterated_matrices(&m, 0, 40).unwrap();
        let mut c = BigRational::one();
        for s in 0..=40usize {
            let expected = LaurentPoly::monomial(vec![-(s as i64)], c.clone(), p, 1, 0).unwrap();
            assert_eq!(seq.get(s), &Matrix::scalar(expected), "p={p} s={s}");
            c *= &a - BigRational::from_integer((s as i64).into());
        }
    }
}

#[test]
fn kummer_half_window_matches_oracle() {
    let p = 3;
    let a = q(1, 2);
    let oracle = kummer_oracle(p, &a, 200);
    let report = intrinsic_radius(
        &corpus::kummer(p, a).unwrap(),
        &RadiusVector::ones(1),
        200,
        &RadiusOptions::default(),
    )
    .unwrap();
    let d = &report.directions[0];
    assert_eq!(d.window_estimates.first().unwrap().s, 150);
    for w in &d.window_estimates {
        assert_eq!(w.ir_exponent, oracle[w.s], "s = {}", w.s);
    }
    assert_eq!(d.window_estimates.last().unwrap().ir_exponent, q(1, 100));
    assert!(!d.exact);
}

#[test]
fn dwork_is_exact_per_window() {
    for p in [2u64, 3, 5, 7] {
        let report = intrinsic_radius(
            &corpus::dwork_disc(p).unwrap(),
            &RadiusVector::ones(1),
            64,
            &RadiusOptions::default(),
        )
        .unwrap();
        assert_eq!(report.ir_estimate, q(1, p as i64 - 1));
        assert!(report.directions[0]
            .window_estimates
            .iter()
            .all(|w| w.ir_exponent == q(1, p as i64 - 1)));
        assert_eq!(report.directions[0].stability, BigRational::zero());
    }
}

#[test]
fn constant_connection_closed_form() {
    // min(1, p^{-1/(p-1)}/|c|): exponent max(0, 1/(p-1) − v(c)).
    let p = 3;
    for (c, expected) in [
        (q(1, 1), q(1, 2)),
        (q(3, 1), q(0, 1)),
        (q(1, 3), q(3, 2)),
        (q(2, 9), q(5, 2)),
        (q(9, 1), q(0, 1)),
    ] {
        let report = intrinsic_radius(
            &corpus::constant(p, c.clone()).unwrap(),
            &RadiusVector::ones(1),
            32,
            &RadiusOptions::default(),
        )
        .unwrap();
        for w in &report.directions[0].window_estimates {
            assert_eq!(w.ir_exponent, expected, "c = {c}");
        }
    }
}

#[test]
fn bound_never_exceeds_one() {
    for m in [
        corpus::kummer(5, q(1, 2)).unwrap(),
        corpus::constant(2, q(4, 1)).unwrap(),
        corpus::dwork_disc(3).unwrap(),
    ] {
        let report = intrinsic_radius(&m, &RadiusVector::ones(1), 40, &RadiusOptions::default()).unwrap();
        for d in &report.directions {
            assert!(d.window_estimates.iter().all(|w| w.ir_exponent >= BigRational::zero()));
        }
    }
}

#[test]
fn verdicts_on_closed_forms() {
    let opts = RadiusOptions::default();
    let v = oc_ir_test(&corpus::trivial(3, 1, 1, 2).unwrap(), 40, &opts).unwrap();
    assert_eq!(v.verdict, VerdictKind::OverconvergentEvidence);

    let v = oc_ir_test(&corpus::dwork_disc(3).unwrap(), 200, &opts).unwrap();
    assert_eq!(v.verdict, VerdictKind::NotOverconvergentEvidence);
    assert_eq!(v.witness_direction, Some(1));

    let v = oc_ir_test(&corpus::kummer(3, q(1, 2)).unwrap(), 200, &opts).unwrap();
    assert_eq!(v.verdict, VerdictKind::OverconvergentEvidence);

    let v = oc_ir_test(&corpus::kummer(5, q(3, 1)).unwrap(), 40, &opts).unwrap();
    assert_eq!(v.verdict, VerdictKind::OverconvergentEvidence);
    assert!(v.report.exact);
    assert_eq!(v.report.directions[0].vanishing_depth, Some(4));
}

#[test]
fn short_window_is_inconclusive_for_kummer_half() {
    // window s = 6..8 has exponents 0, 1/14, 1/8: neither small nor stable
    let opts = RadiusOptions::default();
    let v = oc_ir_test(&corpus::kummer(3, q(1, 2)).unwrap(), 8, &opts).unwrap();
    assert_eq!(v.verdict, VerdictKind::Inconclusive);
    let e: Vec<_> = v.report.directions[0]
        .window_estimates
        .iter()
        .map(|w| w.ir_exponent.clone())
        .collect();
    assert_eq!(e, vec![q(0, 1), q(1, 14), q(1, 8)]);
}

#[test]
fn taylor_dwork_threshold() {
    for p in [2u64, 3, 5] {
        let m = corpus::dwork_disc(p).unwrap();
        let above = LogRadius::new(q(1, 2 * (p as i64 - 1))).unwrap();
        let below = LogRadius::new(q(2, p as i64 - 1)).unwrap();
        let r = taylor_probe(&m, &above, &LogRadius::one(), 64, &default_divergence()).unwrap();
        assert_eq!(r.status, TaylorStatus::Fail, "p = {p}");
        assert!(r.witness.as_ref().unwrap()[0] >= 32);
        let r = taylor_probe(&m, &below, &LogRadius::one(), 64, &default_divergence()).unwrap();
        assert_eq!(r.status, TaylorStatus::Pass, "p = {p}");
    }
}

#[test]
fn taylor_vanishing_and_trivial() {
    let eta = LogRadius::new(q(1, 100)).unwrap();
    let lam = LogRadius::new(q(1, 2)).unwrap();
    let r = taylor_probe(
        &corpus::kummer(3, q(3, 1)).unwrap(),
        &eta,
        &lam,
        16,
        &default_divergence(),
    )
    .unwrap();
    assert_eq!(r.status, TaylorStatus::Pass);
    let r = taylor_probe(
        &corpus::trivial(5, 2, 1, 2).unwrap(),
        &eta,
        &lam,
        8,
        &default_divergence(),
    )
    .unwrap();
    assert_eq!(r.status, TaylorStatus::Pass);
}

#[test]
fn taylor_kummer_half_passes_below_one() {
    let m = corpus::kummer(3, q(1, 2)).unwrap();
    let eta = LogRadius::new(q(1, 4)).unwrap();
    let lam = LogRadius::new(q(1, 16)).unwrap();
    let r = taylor_probe(&m, &eta, &lam, 64, &default_divergence()).unwrap();
    assert_eq!(r.status, TaylorStatus::Pass);
}

#[test]
fn argument_errors() {
    let m = corpus::dwork_disc(3).unwrap();
    let opts = RadiusOptions::default();
    assert!(intrinsic_radius(&m, &RadiusVector::ones(1), 7, &opts).is_err());
    assert!(intrinsic_radius(&m, &RadiusVector::ones(1), 1000, &opts).is_err());
    let center = RadiusVector::new(vec![LogRadius::DiscCenter], 0, 1).unwrap();
    assert!(intrinsic_radius(&m, &center, 16, &opts).is_err());
    let bad_window = RadiusOptions {
        window: q(3, 2),
        ..opts.clone()
    };
    assert!(intrinsic_radius(&m, &RadiusVector::ones(1), 16, &bad_window).is_err());
    assert!(taylor_probe(&m, &LogRadius::one(), &LogRadius::one(), 16, &default_divergence()).is_err());
    assert!(taylor_probe(
        &m,
        &LogRadius::new(q(1, 2)).unwrap(),
        &LogRadius::one(),
        7,
        &default_divergence()
    )
    .is_err());
}
