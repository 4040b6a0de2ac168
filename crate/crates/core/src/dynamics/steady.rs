use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::evolve::{resolve, sanitize, Integrator, Stepper};
use super::expm::expm;
use super::liouvillian::{unvectorize, vectorize, Liouvillian};
use crate::error::{Error, Result};
use crate::model::ChainConfig;
use crate::operator::{DensityMatrix, Operator};

/// Default convergence threshold on `‖L(ρ)‖_F`.
pub const DEFAULT_STEADY_TOL: f64 = 1e-10;

/// Relative singular-value cutoff defining the numerical null space.
pub const NULLSPACE_RTOL: f64 = 1e-10;

/// Longest single propagator step; bounds the rounding amplified by squaring.
const MAX_PROPAGATOR_STEP: f64 = 1024.0;
/// Runge–Kutta tolerances for the steady-state search. Looser control lets
/// the step size settle at the stability limit, where fast modes stop decaying.
const STEADY_RTOL: f64 = 1e-12;
const STEADY_ATOL: f64 = 1e-15;
/// Interval between residual checks on the Runge–Kutta path.
const RK_CHECK_INTERVAL: f64 = 10.0;

/// Simulated-time budget `(50/Γ)·(n/2)³` for reaching the steady state.
///
/// The slowest relaxation rate of the chains falls off roughly as `n⁻³`.
pub fn default_t_max(cfg: &ChainConfig) -> f64 {
    let rate = if cfg.gamma_engineered > 0.0 {
        cfg.gamma_engineered
    } else {
        0.1
    };
    let half = (cfg.n as f64 / 2.0).max(1.0);
    50.0 / rate * half.powi(3)
}

#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub state: DensityMatrix,
    /// `‖L(ρ)‖_F` of the returned state.
    pub residual: f64,
    pub converged: bool,
    /// Simulated time at which the search stopped.
    pub elapsed_time: f64,
}

/// Evolves `rho0` until `‖L(ρ)‖_F < tol` or `t_max` is reached.
///
/// The stationary manifold is generally degenerate, so the steady state
/// reached depends on `rho0`.
pub fn steady_state_from_initial(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    tol: f64,
    t_max: f64,
) -> Result<SteadyStateResult> {
    steady_state_from_initial_with(rho0, l, tol, t_max, Integrator::Auto)
}

pub fn steady_state_from_initial_with(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    tol: f64,
    t_max: f64,
    integrator: Integrator,
) -> Result<SteadyStateResult> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            actual: rho0.dim(),
        });
    }
    if !(tol > 0.0 && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need tol > 0 and t_max > 0, got {tol} and {t_max}"
        )));
    }
    match resolve(integrator, l)? {
        Integrator::Propagator => by_propagator(rho0, l, tol, t_max),
        _ => by_runge_kutta(rho0, l, tol, t_max),
    }
}

fn finish(state: DensityMatrix, residual: f64, tol: f64, t: f64) -> SteadyStateResult {
    SteadyStateResult {
        state,
        residual,
        converged: residual < tol,
        elapsed_time: t,
    }
}

/// Doubling propagator steps: apply `exp(Lτ)`, then square it, up to
/// `MAX_PROPAGATOR_STEP`.
fn by_propagator(rho0: &DensityMatrix, l: &Liouvillian, tol: f64, t_max: f64) -> Result<SteadyStateResult> {
    let generator = l.superoperator()?;
    let d = l.dim();
    let mut tau = 1.0f64.min(t_max);
    let mut propagator = expm(&generator.mapv(|z| z * tau));
    let mut state = rho0.clone();
    let mut t = 0.0;
    loop {
        let residual = l.residual(&state);
        if residual < tol || t >= t_max {
            return Ok(finish(state, residual, tol, t));
        }
        let remaining = t_max - t;
        if tau > remaining {
            tau = remaining;
            propagator = expm(&generator.mapv(|z| z * tau));
        }
        let raw = unvectorize(&propagator.dot(&vectorize(state.as_array())), d)?;
        state = sanitize(&raw);
        t += tau;
        if 2.0 * tau <= MAX_PROPAGATOR_STEP && 2.0 * tau <= t_max - t {
            propagator = propagator.dot(&propagator);
            tau *= 2.0;
        }
    }
}

fn by_runge_kutta(rho0: &DensityMatrix, l: &Liouvillian, tol: f64, t_max: f64) -> Result<SteadyStateResult> {
    let mut stepper = Stepper::new(l, Integrator::RungeKutta, STEADY_RTOL, STEADY_ATOL)?;
    let mut raw = rho0.as_array().clone();
    let mut state = rho0.clone();
    let mut t = 0.0;
    loop {
        let residual = l.residual(&state);
        if residual < tol || t >= t_max {
            return Ok(finish(state, residual, tol, t));
        }
        let next = (t + RK_CHECK_INTERVAL).min(t_max);
        stepper.advance(&mut raw, t, next)?;
        t = next;
        state = sanitize(&raw);
    }
}

/// Numerical null space of a Liouvillian.
#[derive(Clone, Debug)]
pub struct NullSpace {
    /// Dimension of the null space.
    pub degeneracy: usize,
    /// Hermitian basis of the null space; elements with non-negligible trace
    /// are normalized to unit trace. These are not necessarily positive.
    pub candidates: Vec<Operator>,
    /// Orthonormal column-stacked null vectors from the SVD.
    vectors: Vec<Array1<C64>>,
    dim: usize,
}

impl NullSpace {
    /// Frobenius norm of the component of `op` outside the null space.
    pub fn distance(&self, op: &Operator) -> Result<f64> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: op.dim(),
            });
        }
        let mut v = vectorize(op.as_array());
        for basis in &self.vectors {
            let overlap: C64 = basis.iter().zip(v.iter()).map(|(b, x)| b.conj() * x).sum();
            v.scaled_add(-overlap, basis);
        }
        Ok(v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }
}

fn frobenius_inner(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Basis of `{ρ : L(ρ) = 0}` from the singular values of the superoperator
/// below `NULLSPACE_RTOL · σ_max`. The degeneracy is reported as is; no
/// particular stationary state is singled out.
pub fn steady_state_nullspace(l: &Liouvillian) -> Result<NullSpace> {
    let m = l.superoperator()?;
    let d = l.dim();
    let dm = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]]);
    let svd = dm.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::InvalidArgument("SVD did not return right singular vectors".into()))?;
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let vectors: Vec<Array1<C64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < NULLSPACE_RTOL * sigma_max)
        .map(|(i, _)| Array1::from_iter(v_t.row(i).iter().map(|z| z.conj())))
        .collect();
    let degeneracy = vectors.len();

    // The null space is closed under †, so the Hermitian and anti-Hermitian
    // parts of its vectors span it over the reals.
    let mut hermitian: Vec<Array2<C64>> = Vec::with_capacity(degeneracy);
    for v in &vectors {
        let x = unvectorize(v, d)?;
        let xd = x.t().mapv(|z| z.conj());
        let parts = [
            (&x + &xd).mapv(|z| z * 0.5),
            (&x - &xd).mapv(|z| z * C64::new(0.0, -0.5)),
        ];
        for mut part in parts {
            for q in &hermitian {
                let c = frobenius_inner(q, &part);
                part.scaled_add(C64::new(-c, 0.0), q);
            }
            let norm = frobenius_inner(&part, &part).sqrt();
            if norm > 1e-8 && hermitian.len() < degeneracy {
                hermitian.push(part.mapv(|z| z / norm));
            }
        }
    }
    let candidates = hermitian
        .into_iter()
        .map(|h| {
            let trace = h.diag().sum().re;
            let h = if trace.abs() > 1e-8 { h.mapv(|z| z / trace) } else { h };
            Operator::new(h)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NullSpace {
        degeneracy,
        candidates,
        vectors,
        dim: d,
    })
}
