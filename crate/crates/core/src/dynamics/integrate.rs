//! Adaptive Dormand–Prince 5(4) integration of an autonomous matrix ODE
//! `dy/dt = f(y)`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded 4th-order difference
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Combination `y + h Σ cᵢ kᵢ`.
fn combine(y: &Array2<C64>, h: f64, parts: &[(f64, &Array2<C64>)]) -> Array2<C64> {
    let mut out = y.clone();
    for &(c, k) in parts {
        if c != 0.0 {
            out.scaled_add(C64::new(h * c, 0.0), k);
        }
    }
    out
}

fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) struct DormandPrince<F> {
    rhs: F,
    rtol: f64,
    atol: f64,
    step: Option<f64>,
    fsal: Option<Array2<C64>>,
    pub(crate) accepted: usize,
    pub(crate) rejected: usize,
}

impl<F> DormandPrince<F>
where
    F: Fn(&Array2<C64>) -> Array2<C64>,
{
    pub(crate) fn new(rhs: F, rtol: f64, atol: f64) -> Self {
        Self {
            rhs,
            rtol,
            atol,
            step: None,
            fsal: None,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Largest error entry relative to `atol + rtol · max|y|`, with the scale
    /// taken over the whole matrix.
    fn error_norm(&self, err: &Array2<C64>, y0: &Array2<C64>, y1: &Array2<C64>) -> f64 {
        let scale = self.atol + self.rtol * max_abs(y0).max(max_abs(y1));
        max_abs(err) / scale
    }

    fn initial_step(&self, y: &Array2<C64>, f0: &Array2<C64>) -> f64 {
        let scale = self.atol + self.rtol * max_abs(y);
        let (d0, d1) = (max_abs(y) / scale, max_abs(f0) / scale);
        if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        }
    }

    /// Advances `y` from `t0` to exactly `t1`.
    pub(crate) fn advance(&mut self, y: &mut Array2<C64>, t0: f64, t1: f64) -> Result<()> {
        let mut t = t0;
        while t < t1 {
            let k1 = match self.fsal.take() {
                Some(k) => k,
                None => (self.rhs)(y),
            };
            let mut h = match self.step {
                Some(h) => h,
                None => self.initial_step(y, &k1),
            };
            let remaining = t1 - t;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { time: t });
            }
            let k2 = (self.rhs)(&combine(y, h, &[(A21, &k1)]));
            let k3 = (self.rhs)(&combine(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = (self.rhs)(&combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = (self.rhs)(&combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = (self.rhs)(&combine(
                y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ));
            let y_new = combine(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = (self.rhs)(&y_new);
            let zero = Array2::zeros(y.dim());
            let err = combine(
                &zero,
                h,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let norm = self.error_norm(&err, y, &y_new);
            if norm <= 1.0 {
                self.accepted += 1;
                t = if last { t1 } else { t + h };
                *y = y_new;
                self.fsal = Some(k7);
                let factor = if norm == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a step truncated to hit t1 says little about the natural step size
                if !last || self.step.is_none() {
                    self.step = Some(h * factor);
                }
            } else {
                self.rejected += 1;
                self.fsal = Some(k1);
                let factor = (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                self.step = Some(h * factor);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_rotation() {
        // dy/dt = A y with A = [[-1, 0], [0, 2i]]
        let rhs = |y: &Array2<C64>| {
            let mut out = y.clone();
            out.row_mut(0).mapv_inplace(|z| -z);
            out.row_mut(1).mapv_inplace(|z| C64::new(0.0, 2.0) * z);
            out
        };
        let mut y = Array2::from_elem((2, 1), C64::new(1.0, 0.0));
        let mut solver = DormandPrince::new(rhs, 1e-10, 1e-13);
        solver.advance(&mut y, 0.0, 3.0).unwrap();
        assert!((y[[0, 0]].re - (-3.0f64).exp()).abs() < 1e-9);
        assert!((y[[1, 0]] - C64::new(0.0, 6.0).exp()).norm() < 1e-8);
        // continuing reuses the step-size history
        solver.advance(&mut y, 3.0, 4.0).unwrap();
        assert!((y[[0, 0]].re - (-4.0f64).exp()).abs() < 1e-9);
        assert!(solver.accepted > 0);
    }

    #[test]
    fn zero_rhs_is_identity() {
        let mut y = Array2::from_elem((2, 2), C64::new(0.25, 0.1));
        let y0 = y.clone();
        let mut solver = DormandPrince::new(|y: &Array2<C64>| Array2::zeros(y.dim()), 1e-9, 1e-12);
        solver.advance(&mut y, 0.0, 100.0).unwrap();
        assert_eq!(y, y0);
    }
}
