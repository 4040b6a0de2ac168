use crate::dynamics::{build_liouvillian, steady_state_from_initial, Liouvillian, SectorState, SteadyStateResult};
use crate::error::Result;
use crate::model::{build_hamiltonian, build_lindblad_terms, initial_state, ChainConfig, SectorModel, SiteMap};

/// Steady state reached from the initial condition, computed inside the
/// single-excitation sector.
#[derive(Clone, Debug)]
pub struct SectorSolution {
    pub config: ChainConfig,
    pub model: SectorModel,
    pub state: SectorState,
    pub result: SteadyStateResult,
}

pub fn solve_sector(cfg: &ChainConfig, tol: f64, t_max: f64) -> Result<SectorSolution> {
    let model = SectorModel::build(cfg, 1)?;
    let l = model.liouvillian()?;
    let result = steady_state_from_initial(&model.initial_state(cfg)?, &l, tol, t_max)?;
    let state = SectorState::from_model(&model, result.state.clone())?;
    Ok(SectorSolution {
        config: cfg.clone(),
        model,
        state,
        result,
    })
}

/// Full-space Liouvillian of a chain.
pub fn full_liouvillian(cfg: &ChainConfig) -> Result<Liouvillian> {
    build_liouvillian(&build_hamiltonian(cfg)?, &build_lindblad_terms(cfg)?)
}

/// Steady state reached from the initial condition in the full `2^n` space.
pub fn solve_full(cfg: &ChainConfig, tol: f64, t_max: f64) -> Result<SteadyStateResult> {
    let l = full_liouvillian(cfg)?;
    let rho0 = initial_state(cfg, &SiteMap::for_config(cfg)?)?;
    steady_state_from_initial(&rho0, &l, tol, t_max)
}

/// Least-squares `c` in `y ≈ c/n` and the coefficient of determination.
pub fn fit_inverse_n(points: &[(usize, f64)]) -> (f64, f64) {
    let sxy: f64 = points.iter().map(|&(n, y)| y / n as f64).sum();
    let sxx: f64 = points.iter().map(|&(n, _)| 1.0 / (n as f64 * n as f64)).sum();
    let c = sxy / sxx;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points.iter().map(|&(n, y)| (y - c / n as f64).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (c, r2)
}
