//! Correlators, local magnetization, negativity, fidelity, purity and
//! dark-state certification.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::SectorState;
use crate::error::{Error, Result};
use crate::model::LindbladTerm;
use crate::operator::{
    commutator, frobenius, hermitian_eigenvalues, normalize_sites, partial_trace, partial_transpose, qubit_count,
    reduce_entries, DensityMatrix, Operator, StateVector,
};

/// A register state from which reduced density matrices can be taken.
pub trait ChainState: Sync {
    fn n_qubits(&self) -> usize;

    /// Reduced state on `keep` with the kept sites ordered ascending.
    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix>;
}

impl ChainState for DensityMatrix {
    fn n_qubits(&self) -> usize {
        qubit_count(self.dim()).expect("density matrix of a qubit register")
    }

    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep, qubit_count(self.dim())?)
    }
}

impl ChainState for SectorState {
    fn n_qubits(&self) -> usize {
        SectorState::n_qubits(self)
    }

    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits();
        let kept = normalize_sites(keep, n)?;
        let basis = self.basis();
        let rho = self.density().as_array();
        let pairs = (0..basis.len()).flat_map(|a| (0..basis.len()).map(move |b| (basis[a], basis[b])));
        let lookup = |x: usize| basis.binary_search(&x).expect("index drawn from the basis");
        let data = reduce_entries(n, &kept, pairs, |r, c| rho[[lookup(r), lookup(c)]]);
        DensityMatrix::sanitized(&data)
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::InvalidSites(format!(
            "correlator needs two distinct sites, got {i} twice"
        )));
    }
    normalize_sites(&[i, j], n).map(|_| ())
}

/// `⟨σᵢ⁺σⱼ⁻⟩`.
pub fn correlator<S: ChainState + ?Sized>(state: &S, i: usize, j: usize) -> Result<C64> {
    check_pair(state.n_qubits(), i, j)?;
    let r = state.reduced(&[i, j])?;
    // σᵢ⁺σⱼ⁻ = |↑ᵢ↓ⱼ⟩⟨↓ᵢ↑ⱼ|, whose expectation is ⟨↓ᵢ↑ⱼ|ρ|↑ᵢ↓ⱼ⟩
    Ok(if i < j {
        r.as_array()[[1, 2]]
    } else {
        r.as_array()[[2, 1]]
    })
}

/// `⟨σⱼᶻ⟩`.
pub fn sigma_z<S: ChainState + ?Sized>(state: &S, j: usize) -> Result<f64> {
    let r = state.reduced(&[j])?;
    Ok(r.as_array()[[1, 1]].re - r.as_array()[[0, 0]].re)
}

/// `max(0, Σₖ|λₖ| - 1)` over the eigenvalues of the partial transpose on the
/// second qubit.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let pt = partial_transpose(&rho.to_operator())?.hermitian_part();
    let sum: f64 = hermitian_eigenvalues(pt.as_array()).iter().map(|v| v.abs()).sum();
    Ok((sum - 1.0).max(0.0))
}

/// Negativity of the two-site reduction on `(i, j)`.
pub fn pair_negativity<S: ChainState + ?Sized>(state: &S, i: usize, j: usize) -> Result<f64> {
    check_pair(state.n_qubits(), i, j)?;
    negativity(&state.reduced(&[i, j])?)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: psi.dim(),
        });
    }
    let a = psi.amplitudes();
    let rho_psi = rho.as_array().dot(a);
    Ok(a.iter().zip(rho_psi.iter()).map(|(x, y)| x.conj() * y).sum::<C64>().re)
}

/// `tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.as_array().iter().map(|z| z.norm_sqr()).sum()
}

/// Frobenius norms certifying a stationary state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DarkStateCheck {
    /// `‖[H, ρ]‖_F`
    pub commutator_norm: f64,
    /// `‖Σ γ (AρA† - ½{A†A, ρ})‖_F`
    pub dissipator_norm: f64,
}

impl DarkStateCheck {
    pub fn is_stationary(&self, tol: f64) -> bool {
        self.commutator_norm < tol && self.dissipator_norm < tol
    }
}

pub fn dark_state_check(h: &Operator, terms: &[LindbladTerm], rho: &DensityMatrix) -> Result<DarkStateCheck> {
    for dim in std::iter::once(h.dim()).chain(terms.iter().map(|t| t.jump.dim())) {
        if dim != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho.dim(),
                actual: dim,
            });
        }
    }
    let rho_op = rho.to_operator();
    let mut dissipator = Array2::<C64>::zeros((rho.dim(), rho.dim()));
    for term in terms {
        let a = term.jump.as_array();
        let ad = term.jump.adjoint();
        let ada = ad.dot(&term.jump);
        let r = rho.as_array();
        let jump = a.dot(r).dot(ad.as_array());
        let anti = ada.as_array().dot(r) + r.dot(ada.as_array());
        dissipator.scaled_add(C64::new(term.rate, 0.0), &(jump - anti.mapv(|z| 0.5 * z)));
    }
    Ok(DarkStateCheck {
        commutator_norm: commutator(h, &rho_op).frobenius_norm(),
        dissipator_norm: frobenius(&dissipator),
    })
}

fn unique_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for &(i, j) in pairs {
        check_pair(n, i, j)?;
        if !seen.insert((i, j)) {
            return Err(Error::InvalidSites(format!("pair ({i}, {j}) requested twice")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorEntry {
    pub i: usize,
    pub j: usize,
    pub value: C64,
    pub abs: f64,
}

/// `⟨σᵢ⁺σⱼ⁻⟩` over a list of distinct site pairs, in request order.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorTable {
    pub n: usize,
    pub entries: Vec<CorrelatorEntry>,
}

impl CorrelatorTable {
    pub fn compute<S: ChainState + ?Sized>(state: &S, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = state.n_qubits();
        unique_pairs(n, pairs)?;
        let entries = pairs
            .par_iter()
            .map(|&(i, j)| {
                let value = correlator(state, i, j)?;
                Ok(CorrelatorEntry {
                    i,
                    j,
                    value,
                    abs: value.norm(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, entries })
    }

    /// Pairs `(1, j)` for `j = 2..=n`.
    pub fn from_first_site<S: ChainState + ?Sized>(state: &S) -> Result<Self> {
        let pairs: Vec<_> = (2..=state.n_qubits()).map(|j| (1, j)).collect();
        Self::compute(state, &pairs)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&CorrelatorEntry> {
        self.entries.iter().find(|e| e.i == i && e.j == j)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NegativityEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Two-site negativities over a list of distinct site pairs, in request order.
#[derive(Clone, Debug, PartialEq)]
pub struct NegativityTable {
    pub n: usize,
    pub entries: Vec<NegativityEntry>,
}

impl NegativityTable {
    pub fn compute<S: ChainState + ?Sized>(state: &S, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = state.n_qubits();
        unique_pairs(n, pairs)?;
        let entries = pairs
            .par_iter()
            .map(|&(i, j)| {
                Ok(NegativityEntry {
                    i,
                    j,
                    value: pair_negativity(state, i, j)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, entries })
    }

    pub fn from_first_site<S: ChainState + ?Sized>(state: &S) -> Result<Self> {
        let pairs: Vec<_> = (2..=state.n_qubits()).map(|j| (1, j)).collect();
        Self::compute(state, &pairs)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&NegativityEntry> {
        self.entries.iter().find(|e| e.i == i && e.j == j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_hamiltonian, build_lindblad_terms, reference_phi_states, reference_w_state, ChainConfig, Geometry,
    };
    use crate::operator::{embed, sigma_minus, sigma_plus, tensor};
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;

    fn bell_plus() -> StateVector {
        let mut a = Array1::zeros(4);
        a[1] = C64::new(1.0, 0.0);
        a[2] = C64::new(1.0, 0.0);
        StateVector::new(a).unwrap()
    }

    fn full_trace_correlator(rho: &DensityMatrix, i: usize, j: usize) -> C64 {
        let n = rho.n_qubits();
        let op = &embed(&sigma_plus(), i, n).unwrap() * &embed(&sigma_minus(), j, n).unwrap();
        rho.expectation(&op).unwrap()
    }

    #[test]
    fn correlator_examples() {
        let bell = bell_plus().projector();
        assert_abs_diff_eq!(correlator(&bell, 1, 2).unwrap().re, 0.5, epsilon = 1e-15);
        assert!(correlator(&bell, 1, 1).is_err());
        assert!(correlator(&bell, 1, 3).is_err());
    }

    #[test]
    fn correlator_matches_full_trace() {
        // complex amplitudes so that orientation errors show up
        let n = 4;
        let mut a = Array1::zeros(16);
        for (k, x) in [1usize, 2, 4, 8, 3, 12].iter().enumerate() {
            a[*x] = C64::new(0.3 + 0.1 * k as f64, 0.2 - 0.15 * k as f64);
        }
        let rho = StateVector::new(a).unwrap().projector();
        let sector = SectorState::restrict(&StateVector::with_sites_up(n, &[2]).unwrap().projector(), 1).unwrap();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    let expected = full_trace_correlator(&rho, i, j);
                    assert!((correlator(&rho, i, j).unwrap() - expected).norm() < 1e-14);
                    assert_eq!(correlator(&sector, i, j).unwrap(), C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn sector_state_reductions_match_full_space() {
        let psi = reference_w_state(6).unwrap();
        let full = psi.projector();
        let sector = SectorState::restrict(&full, 1).unwrap();
        for keep in [vec![1, 4], vec![2, 6], vec![3], vec![1, 2, 5]] {
            let a = full.reduced(&keep).unwrap();
            let b = sector.reduced(&keep).unwrap();
            assert!(a.to_operator().max_abs_diff(&b.to_operator()) < 1e-15);
        }
        for j in 1..=6 {
            assert_abs_diff_eq!(
                sigma_z(&full, j).unwrap(),
                sigma_z(&sector, j).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn sigma_z_examples() {
        let down = StateVector::basis(16, 0).unwrap().projector();
        for j in 1..=4 {
            assert_eq!(sigma_z(&down, j).unwrap(), -1.0);
        }
        let w = reference_w_state(4).unwrap().projector();
        assert_abs_diff_eq!(sigma_z(&w, 1).unwrap(), -1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(sigma_z(&w, 3).unwrap(), -1.0, epsilon = 1e-14);
        assert!(sigma_z(&w, 5).is_err());
    }

    /// `N = p + √(p² + q²) - 1` for `p|ψ±⟩⟨ψ±| + q|↓↓⟩⟨↓↓|`, from the 2×2
    /// block of the partial transpose.
    fn mixture_negativity(p: f64) -> f64 {
        let q = 1.0 - p;
        p + (p * p + q * q).sqrt() - 1.0
    }

    #[test]
    fn negativity_examples() {
        assert_abs_diff_eq!(negativity(&bell_plus().projector()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            negativity(&DensityMatrix::maximally_mixed(4)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert!(negativity(&DensityMatrix::maximally_mixed(8)).is_err());

        let w = reference_w_state(4).unwrap().projector();
        let r14 = w.reduced(&[1, 4]).unwrap();
        let value = negativity(&r14).unwrap();
        assert_abs_diff_eq!(value, (5f64.sqrt() - 1.0) / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(value, mixture_negativity(2.0 / 3.0), epsilon = 1e-12);
    }

    #[test]
    fn negativity_symmetric_under_qubit_swap() {
        let w = reference_w_state(6).unwrap().projector();
        let r = w.reduced(&[1, 4]).unwrap();
        let swap = [0usize, 2, 1, 3];
        let swapped = Array2::from_shape_fn((4, 4), |(a, b)| r.as_array()[[swap[a], swap[b]]]);
        let swapped = DensityMatrix::new(swapped).unwrap();
        assert_abs_diff_eq!(negativity(&r).unwrap(), negativity(&swapped).unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(negativity(&r).unwrap(), mixture_negativity(0.5), epsilon = 1e-12);
    }

    #[test]
    fn fidelity_and_purity_examples() {
        let bell = bell_plus();
        assert_abs_diff_eq!(fidelity_pure(&bell.projector(), &bell).unwrap(), 1.0, epsilon = 1e-15);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert_abs_diff_eq!(fidelity_pure(&mixed, &bell).unwrap(), 0.25, epsilon = 1e-15);
        assert!(fidelity_pure(&mixed, &StateVector::basis(2, 0).unwrap()).is_err());
        assert_abs_diff_eq!(purity(&bell.projector()), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(purity(&mixed), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn dark_state_examples() {
        let cfg = ChainConfig::new(Geometry::A, 4);
        let h = build_hamiltonian(&cfg).unwrap();
        let terms = build_lindblad_terms(&cfg).unwrap();
        let check = dark_state_check(&h, &terms, &reference_w_state(4).unwrap().projector()).unwrap();
        assert!(check.is_stationary(1e-10), "{check:?}");

        let cfg = ChainConfig::new(Geometry::B, 4);
        let h = build_hamiltonian(&cfg).unwrap();
        let terms = build_lindblad_terms(&cfg).unwrap();
        let (plus, minus) = reference_phi_states(&cfg).unwrap();
        for phi in [plus, minus] {
            let check = dark_state_check(&h, &terms, &phi.projector()).unwrap();
            assert!(check.is_stationary(1e-10), "{check:?}");
        }

        let cfg = ChainConfig::new(Geometry::A, 2);
        let h = build_hamiltonian(&cfg).unwrap();
        let terms = build_lindblad_terms(&cfg).unwrap();
        let up_down = StateVector::with_sites_up(2, &[1]).unwrap().projector();
        let check = dark_state_check(&h, &terms, &up_down).unwrap();
        assert!(check.dissipator_norm > 1e-3);
        assert!(dark_state_check(&h, &terms, &DensityMatrix::maximally_mixed(8)).is_err());
    }

    #[test]
    fn tables() {
        let w = reference_w_state(6).unwrap().projector();
        let corr = CorrelatorTable::from_first_site(&w).unwrap();
        assert_eq!(corr.entries.len(), 5);
        for e in &corr.entries {
            let expected = if e.j % 2 == 0 { 0.25 } else { 0.0 };
            assert_abs_diff_eq!(e.abs, expected, epsilon = 1e-14);
        }
        let neg = NegativityTable::from_first_site(&w).unwrap();
        assert_abs_diff_eq!(
            neg.get(1, 4).unwrap().value,
            neg.get(1, 6).unwrap().value,
            epsilon = 1e-14
        );
        assert_eq!(neg.get(1, 3).unwrap().value, 0.0);
        assert!(CorrelatorTable::compute(&w, &[(1, 2), (1, 2)]).is_err());
        assert!(NegativityTable::compute(&w, &[(2, 2)]).is_err());
    }

    #[test]
    fn product_state_tensor() {
        let a = DensityMatrix::new(
            Array2::from_shape_vec(
                (2, 2),
                vec![
                    C64::new(0.7, 0.0),
                    C64::new(0.1, 0.2),
                    C64::new(0.1, -0.2),
                    C64::new(0.3, 0.0),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let prod = tensor(&a.to_operator(), &a.to_operator());
        let rho = DensityMatrix::new(prod.into_array()).unwrap();
        assert!(negativity(&rho).unwrap() < 1e-14);
    }
}
