//! Matrix exponential by scaling and squaring of a truncated Taylor series.

use ndarray::Array2;
use num_complex::Complex64 as C64;

fn one_norm(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let d = a.nrows();
    let norm = one_norm(a);
    // scale so that ‖a / 2^s‖₁ ≤ 1/2
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings));
    let mut result = Array2::<C64>::eye(d);
    let mut term = Array2::<C64>::eye(d);
    for k in 1..=30 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        result += &term;
        if one_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}
