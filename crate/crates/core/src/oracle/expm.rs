//! Dense matrix exponential by scaling and squaring with a Taylor core.
//!
//! Oracle plumbing only: dimensions stay small (<= a few hundred) and
//! clarity beats speed, so the core is a plain truncated series applied
//! after scaling the norm below 1/2, followed by repeated squaring.

use ndarray::Array2;
use num_complex::Complex64 as C64;

fn one_norm(a: &Array2<C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let col: f64 = (0..a.nrows()).map(|i| a[(i, j)].norm()).sum();
        worst = worst.max(col);
    }
    worst
}

fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let m = b.ncols();
    let k_dim = a.ncols();
    let mut out = Array2::from_elem((n, m), C64::new(0.0, 0.0));
    for i in 0..n {
        for k in 0..k_dim {
            let aik = a[(i, k)];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    out
}

/// exp(A) for a square complex matrix.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let scaling = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|x| x / (2.0f64.powi(scaling as i32)));

    let mut result = Array2::from_shape_fn((n, n), |(i, j)| {
        C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
    });
    let mut term = result.clone();
    for k in 1..=24 {
        term = matmul(&term, &scaled);
        term.mapv_inplace(|x| x / k as f64);
        result = result + &term;
        if one_norm(&term) < 1e-30 {
            break;
        }
    }
    for _ in 0..scaling {
        result = matmul(&result, &result);
    }
    result
}

/// exp(A) for a real matrix, through the complex path.
pub fn expm_real(a: &Array2<f64>) -> Array2<f64> {
    let c = a.mapv(|x| C64::new(x, 0.0));
    expm(&c).mapv(|x| x.re)
}
