use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{sector_basis, LindbladTerm, SectorModel};
use crate::operator::{commutator, qubit_count, DensityMatrix, Operator};

/// Entrywise tolerance on `[N, A]` for an operator to count as number conserving.
pub const CONSERVATION_TOL: f64 = 1e-12;

fn number_operator(n: usize) -> Operator {
    Operator::from_real_diagonal(&(0..1usize << n).map(|x| x.count_ones() as f64).collect::<Vec<_>>())
}

fn restrict(op: &Operator, basis: &[usize]) -> Operator {
    let d = basis.len();
    let data = Array2::from_shape_fn((d, d), |(a, b)| op.as_array()[[basis[a], basis[b]]]);
    Operator::new(data).expect("non-empty sector")
}

/// Restricts full-space `h` and jump terms to the `k`-excitation sector.
/// Refuses operators that do not commute with the excitation number.
pub fn sector_reduce(h: &Operator, terms: &[LindbladTerm], k: usize) -> Result<SectorModel> {
    let n = qubit_count(h.dim())?;
    let number = number_operator(n);
    for op in std::iter::once(h).chain(terms.iter().map(|t| &t.jump)) {
        if op.dim() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                actual: op.dim(),
            });
        }
        let deviation = commutator(&number, op).max_abs();
        if deviation >= CONSERVATION_TOL {
            return Err(Error::NotNumberConserving { deviation });
        }
    }
    let basis = sector_basis(n, k)?;
    let terms = terms
        .iter()
        .map(|t| LindbladTerm::new(restrict(&t.jump, &basis), t.rate))
        .collect::<Result<Vec<_>>>()?;
    Ok(SectorModel {
        n,
        k,
        hamiltonian: restrict(h, &basis),
        basis,
        terms,
    })
}

/// Density matrix supported on a single excitation sector of an `n`-qubit
/// register, stored in the sector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorState {
    n: usize,
    basis: Vec<usize>,
    rho: DensityMatrix,
}

impl SectorState {
    pub fn new(n: usize, basis: Vec<usize>, rho: DensityMatrix) -> Result<Self> {
        if basis.len() != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: rho.dim(),
            });
        }
        if basis.windows(2).any(|w| w[0] >= w[1]) || basis.iter().any(|&x| x >> n != 0) {
            return Err(Error::InvalidArgument(
                "sector basis must be strictly ascending indices of the register".into(),
            ));
        }
        Ok(Self { n, basis, rho })
    }

    pub fn from_model(model: &SectorModel, rho: DensityMatrix) -> Result<Self> {
        Self::new(model.n, model.basis.clone(), rho)
    }

    /// Restricts a full-space state to sector `k`, failing if it has weight elsewhere.
    pub fn restrict(full: &DensityMatrix, k: usize) -> Result<Self> {
        let n = qubit_count(full.dim())?;
        let basis = sector_basis(n, k)?;
        let inside: f64 = basis.iter().map(|&x| full.as_array()[[x, x]].re).sum();
        if (inside - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "state has weight {:e} outside sector k = {k}",
                1.0 - inside
            )));
        }
        let d = basis.len();
        let data = Array2::from_shape_fn((d, d), |(a, b)| full.as_array()[[basis[a], basis[b]]]);
        Self::new(n, basis, DensityMatrix::sanitized(&data)?)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.rho
    }

    /// Full `2^n`-dimensional density matrix.
    pub fn embed(&self) -> Result<DensityMatrix> {
        if self.n > crate::model::FULL_SPACE_MAX_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "n = {} too large to embed densely",
                self.n
            )));
        }
        let d = 1usize << self.n;
        let mut data = Array2::zeros((d, d));
        for (a, &x) in self.basis.iter().enumerate() {
            for (b, &y) in self.basis.iter().enumerate() {
                data[[x, y]] = self.rho.as_array()[[a, b]];
            }
        }
        Ok(DensityMatrix::from_trusted(data))
    }
}
