use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::expm::expm;
use super::integrate::DormandPrince;
use super::liouvillian::{unvectorize, vectorize, Liouvillian};
use crate::error::{Error, Result};
use crate::operator::{DensityDiagnostics, DensityMatrix};

/// Time-stepping scheme for [`evolve_with`] and the steady-state search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Integrator {
    /// Propagator stepping when the superoperator is available, Runge–Kutta otherwise.
    #[default]
    Auto,
    /// Adaptive Dormand–Prince 5(4) on `ρ` in operator form.
    RungeKutta,
    /// `exp(L Δt)` applied to `vec(ρ)`; needs the dense superoperator.
    Propagator,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub integrator: Integrator,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            integrator: Integrator::Auto,
        }
    }
}

/// Snapshots of `ρ(t)`.
///
/// `states` are re-Hermitized and trace-normalized; `drift` records how far
/// the raw integrator output was from a valid density matrix.
#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub drift: Vec<DensityDiagnostics>,
}

pub(crate) fn resolve(integrator: Integrator, l: &Liouvillian) -> Result<Integrator> {
    match integrator {
        Integrator::Auto if l.matrix().is_some() => Ok(Integrator::Propagator),
        Integrator::Auto => Ok(Integrator::RungeKutta),
        Integrator::Propagator => l.superoperator().map(|_| Integrator::Propagator),
        Integrator::RungeKutta => Ok(Integrator::RungeKutta),
    }
}

/// `(ρ + ρ†)/2` normalized to unit trace.
pub(crate) fn sanitize(raw: &Array2<C64>) -> DensityMatrix {
    let herm = Array2::from_shape_fn(raw.dim(), |(i, j)| 0.5 * (raw[[i, j]] + raw[[j, i]].conj()));
    let trace = herm.diag().sum().re;
    DensityMatrix::from_trusted(herm.mapv(|z| z / trace))
}

fn output_times(t_end: f64, dt_out: f64) -> Vec<f64> {
    let count = (t_end / dt_out + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|k| k as f64 * dt_out).collect();
    if t_end - times[count] > 1e-9 * t_end {
        times.push(t_end);
    } else {
        times[count] = t_end;
    }
    times
}

/// Propagates `ρ` across consecutive intervals, reusing cached state.
type Rhs<'a> = Box<dyn Fn(&Array2<C64>) -> Array2<C64> + 'a>;

pub(crate) enum Stepper<'a> {
    Propagator {
        generator: &'a Array2<C64>,
        cached: Option<(f64, Array2<C64>)>,
    },
    RungeKutta(Box<DormandPrince<Rhs<'a>>>),
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(l: &'a Liouvillian, integrator: Integrator, rtol: f64, atol: f64) -> Result<Self> {
        Ok(match resolve(integrator, l)? {
            Integrator::Propagator => Stepper::Propagator {
                generator: l.superoperator()?,
                cached: None,
            },
            _ => {
                let rhs: Rhs<'a> = Box::new(move |rho| l.apply_hermitian(rho));
                Stepper::RungeKutta(Box::new(DormandPrince::new(rhs, rtol, atol)))
            }
        })
    }

    pub(crate) fn advance(&mut self, rho: &mut Array2<C64>, t0: f64, t1: f64) -> Result<()> {
        match self {
            Stepper::Propagator { generator, cached } => {
                let dt = t1 - t0;
                let stale = cached.as_ref().is_none_or(|(tau, _)| (tau - dt).abs() > 1e-12 * dt);
                if stale {
                    *cached = Some((dt, expm(&generator.mapv(|z| z * dt))));
                }
                let (_, p) = cached.as_ref().expect("propagator cached above");
                *rho = unvectorize(&p.dot(&vectorize(rho)), rho.nrows())?;
                Ok(())
            }
            Stepper::RungeKutta(solver) => solver.advance(rho, t0, t1),
        }
    }
}

pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t_end: f64, dt_out: f64) -> Result<EvolutionResult> {
    evolve_with(rho0, l, t_end, dt_out, &EvolveOptions::default())
}

/// Integrates `dρ/dt = L(ρ)` and records snapshots at multiples of `dt_out`
/// (plus `t_end`).
pub fn evolve_with(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    t_end: f64,
    dt_out: f64,
    options: &EvolveOptions,
) -> Result<EvolutionResult> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            actual: rho0.dim(),
        });
    }
    if !(t_end > 0.0 && t_end.is_finite()) || !(dt_out > 0.0 && dt_out.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need t_end > 0 and dt_out > 0, got {t_end} and {dt_out}"
        )));
    }
    let times = output_times(t_end, dt_out);
    let mut stepper = Stepper::new(l, options.integrator, options.rtol, options.atol)?;
    let mut raw = rho0.as_array().clone();
    let mut states = Vec::with_capacity(times.len());
    let mut drift = Vec::with_capacity(times.len());
    let mut previous = 0.0;
    for &t in &times {
        if t > previous {
            stepper.advance(&mut raw, previous, t)?;
            previous = t;
        }
        drift.push(DensityDiagnostics::of(&raw)?);
        states.push(sanitize(&raw));
    }
    Ok(EvolutionResult { times, states, drift })
}
