use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentPlan, Preset};
use super::records::{sort_records, ObservableRecord};
use super::solve::{fit_inverse_n, full_liouvillian, solve_sector, SectorSolution};
use crate::dynamics::evolve;
use crate::error::Result;
use crate::model::{initial_state, ChainConfig, SiteMap};
use crate::observables::{correlator, fidelity_pure, pair_negativity, purity, sigma_z};
use crate::operator::StateVector;

/// Runs a configured experiment and returns its records in canonical order.
pub fn run_preset(cfg: &ExperimentConfig) -> Result<Vec<ObservableRecord>> {
    run_plan(&cfg.resolve()?)
}

pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<ObservableRecord>> {
    let mut records = if plan.preset == Preset::TwoQubit {
        two_qubit(plan, &plan.chains[0])?
    } else {
        let solutions = plan
            .chains
            .par_iter()
            .map(|chain| solve_sector(chain, plan.conv_tol, plan.t_max_for(chain)))
            .collect::<Result<Vec<_>>>()?;
        let mut records = Vec::new();
        for solution in &solutions {
            records.extend(point_records(plan.preset, solution)?);
        }
        if plan.preset == Preset::Fig3a {
            records.extend(fit_records(&records));
        }
        records
    };
    sort_records(&mut records);
    Ok(records)
}

fn psi_plus() -> StateVector {
    // (|↑↓⟩ + |↓↑⟩)/√2
    let mut amps = ndarray::Array1::zeros(4);
    amps[1] = C64::new(1.0, 0.0);
    amps[2] = C64::new(1.0, 0.0);
    StateVector::new(amps).expect("non-zero amplitudes")
}

/// Fidelity with `|Ψ⁺⟩` at unit time steps; `i` is the snapshot index.
fn two_qubit(plan: &ExperimentPlan, chain: &ChainConfig) -> Result<Vec<ObservableRecord>> {
    let name = Preset::TwoQubit.name();
    let l = full_liouvillian(chain)?;
    let rho0 = initial_state(chain, &SiteMap::for_config(chain)?)?;
    let run = evolve(&rho0, &l, plan.t_max_for(chain), 1.0)?;
    let last = run.states.last().expect("at least the initial snapshot");
    let converged = l.residual(last) < plan.conv_tol;
    let target = psi_plus();
    run.states
        .iter()
        .enumerate()
        .map(|(k, rho)| {
            let f = fidelity_pure(rho, &target)?;
            Ok(ObservableRecord::real(
                name,
                2,
                k as i64,
                -1,
                "fidelity_psi_plus",
                f,
                converged,
            ))
        })
        .collect()
}

fn point_records(preset: Preset, solution: &SectorSolution) -> Result<Vec<ObservableRecord>> {
    let name = preset.name();
    let state = &solution.state;
    let n = state.n_qubits();
    let ok = solution.result.converged;
    let corr = |i: usize, j: usize| -> Result<ObservableRecord> {
        Ok(ObservableRecord::complex(
            name,
            n,
            i as i64,
            j as i64,
            "correlator",
            correlator(state, i, j)?,
            ok,
        ))
    };
    let neg = |i: usize, j: usize| -> Result<ObservableRecord> {
        Ok(ObservableRecord::real(
            name,
            n,
            i as i64,
            j as i64,
            "negativity",
            pair_negativity(state, i, j)?,
            ok,
        ))
    };
    let magnetization = |s: usize| -> Result<ObservableRecord> {
        Ok(ObservableRecord::real(
            name,
            n,
            s as i64,
            -1,
            "sigma_z",
            sigma_z(state, s)?,
            ok,
        ))
    };
    let mut out = Vec::new();
    match preset {
        Preset::Fig2a => {
            for j in 2..=n {
                out.push(corr(1, j)?);
            }
            for s in 1..=n {
                out.push(magnetization(s)?);
            }
        }
        Preset::Fig2b => {
            out.push(corr(1, n)?);
            let analytic = 1.0 / (n as f64 / 2.0 + 1.0);
            out.push(ObservableRecord::real(name, n, 1, n as i64, "analytic", analytic, true));
        }
        Preset::Fig2c => {
            for j in 2..=n {
                out.push(neg(1, j)?);
            }
        }
        Preset::Fig3a => out.push(corr(1, n)?),
        Preset::Fig3b => {
            let map = SiteMap::for_config(&solution.config)?;
            for i in 1..=n {
                if let Some(m) = map.mirror(i).filter(|&m| m > i) {
                    out.push(neg(i, m)?);
                }
            }
        }
        Preset::Custom => {
            for i in 1..=n {
                for j in i + 1..=n {
                    out.push(corr(i, j)?);
                    out.push(neg(i, j)?);
                }
            }
            for s in 1..=n {
                out.push(magnetization(s)?);
            }
            out.push(ObservableRecord::real(
                name,
                n,
                -1,
                -1,
                "purity",
                purity(state.density()),
                ok,
            ));
        }
        Preset::TwoQubit => unreachable!("handled by the trajectory runner"),
    }
    Ok(out)
}

/// `c/n` curve fitted through the remote-end correlator magnitudes.
fn fit_records(points: &[ObservableRecord]) -> Vec<ObservableRecord> {
    let data: Vec<(usize, f64)> = points.iter().map(|r| (r.n, r.value_abs)).collect();
    if data.is_empty() {
        return Vec::new();
    }
    let (c, _) = fit_inverse_n(&data);
    let converged = points.iter().all(|r| r.converged);
    points
        .iter()
        .map(|r| ObservableRecord::real(&r.experiment, r.n, r.i, r.j, "fit_c_over_n", c / r.n as f64, converged))
        .collect()
}
