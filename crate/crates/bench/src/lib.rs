//! Inputs shared by the benchmarks.

use nabla_core::{corpus, ConnectionModule, LaurentPoly, Matrix, TermRecord};
use num_rational::BigRational;

pub fn kummer_half() -> ConnectionModule {
    corpus::kummer(3, BigRational::new(1.into(), 2.into())).expect("valid module")
}

/// Rank-2 module `N_i = A·∂_i F` on a two-variable annulus, with `A` upper triangular.
pub fn potential_module(prime: u64) -> ConnectionModule {
    let rec = |e: [i64; 2], c: &str| TermRecord {
        exps: e.to_vec(),
        coeff: c.to_string(),
    };
    let f = LaurentPoly::from_records(prime, 2, 0, &[rec([-1, 1], "1/2"), rec([1, 2], "1"), rec([2, -1], "5")])
        .expect("valid potential");
    let a = [["1/2", "1"], ["0", "1/3"]];
    let matrices = (0..2)
        .map(|i| {
            let d = f.partial(i).expect("direction in range");
            let rows = a
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| d.scalar_mul(&c.parse().expect("rational")))
                        .collect()
                })
                .collect();
            Matrix::from_rows(rows).expect("square")
        })
        .collect();
    ConnectionModule::new(prime, 2, 0, matrices)
        .expect("valid module")
        .with_label("potential rank 2")
}

/// A one-variable polynomial with `len` terms spread across positive and negative exponents.
pub fn wide_poly(prime: u64, len: i64) -> LaurentPoly {
    let terms: Vec<TermRecord> = (0..len)
        .map(|k| TermRecord {
            exps: vec![k - len / 2],
            coeff: format!("{}", (k * 7 + 3) * (prime as i64).pow((k % 4) as u32)),
        })
        .collect();
    LaurentPoly::from_records(prime, 1, 0, &terms).expect("valid polynomial")
}
