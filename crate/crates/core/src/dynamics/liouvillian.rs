use ndarray::{linalg::kron, Array1, Array2, ArrayView2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::LindbladTerm;
use crate::operator::{frobenius, DensityMatrix, Operator};

/// Largest Hilbert dimension for which the dense `d² × d²` superoperator is built.
pub const SUPEROPERATOR_DIM_LIMIT: usize = 32;

/// Hermiticity tolerance on the Hamiltonian handed to [`build_liouvillian`].
const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-10;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Left factor of a matrix product, stored row-compressed when mostly zero.
#[derive(Clone, Debug)]
enum Factor {
    Dense(Array2<C64>),
    Sparse {
        dim: usize,
        row_start: Vec<usize>,
        entries: Vec<(usize, C64)>,
    },
}

impl Factor {
    fn new(a: Array2<C64>) -> Self {
        let d = a.nrows();
        let nonzero = a.iter().filter(|z| **z != ZERO).count();
        if nonzero * 8 > d * d {
            return Factor::Dense(a);
        }
        let mut row_start = Vec::with_capacity(d + 1);
        let mut entries = Vec::with_capacity(nonzero);
        for row in a.rows() {
            row_start.push(entries.len());
            entries.extend(
                row.iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(k, z)| (k, *z)),
            );
        }
        row_start.push(entries.len());
        Factor::Sparse {
            dim: d,
            row_start,
            entries,
        }
    }

    /// `self · x`.
    fn left_mul(&self, x: &ArrayView2<C64>) -> Array2<C64> {
        match self {
            Factor::Dense(a) => a.dot(x),
            Factor::Sparse {
                dim,
                row_start,
                entries,
            } => {
                let mut out = Array2::zeros((*dim, x.ncols()));
                for (i, mut row) in out.rows_mut().into_iter().enumerate() {
                    for &(k, v) in &entries[row_start[i]..row_start[i + 1]] {
                        row.scaled_add(v, &x.row(k));
                    }
                }
                out
            }
        }
    }

    fn to_dense(&self) -> Array2<C64> {
        match self {
            Factor::Dense(a) => a.clone(),
            Factor::Sparse {
                dim,
                row_start,
                entries,
            } => {
                let mut a = Array2::zeros((*dim, *dim));
                for i in 0..*dim {
                    for &(k, v) in &entries[row_start[i]..row_start[i + 1]] {
                        a[[i, k]] = v;
                    }
                }
                a
            }
        }
    }
}

/// Conjugate transpose in row-major layout.
fn adjoint_of(a: &Array2<C64>) -> Array2<C64> {
    let (r, c) = a.dim();
    Array2::from_shape_fn((c, r), |(i, j)| a[[j, i]].conj())
}

#[derive(Clone, Debug)]
enum Jump {
    General { op: Factor, rate: f64 },
    Diagonal { diag: Array1<C64>, rate: f64 },
}

/// Lindblad generator
/// `L(ρ) = -i[H, ρ] + Σₖ γₖ (Aₖ ρ Aₖ† - ½{Aₖ†Aₖ, ρ})`.
///
/// Applied in operator form as `-i(Kρ - ρK†) + Σₖ γₖ Aₖ ρ Aₖ†` with the
/// effective Hamiltonian `K = H - (i/2) Σₖ γₖ Aₖ†Aₖ`. The column-stacked
/// superoperator is kept alongside when `d ≤ SUPEROPERATOR_DIM_LIMIT`.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    hamiltonian: Operator,
    terms: Vec<LindbladTerm>,
    effective: Factor,
    jumps: Vec<Jump>,
    matrix: Option<Array2<C64>>,
}

pub fn build_liouvillian(h: &Operator, terms: &[LindbladTerm]) -> Result<Liouvillian> {
    let deviation = h.hermiticity_error();
    if deviation > HAMILTONIAN_HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let d = h.dim();
    let mut effective = h.as_array().clone();
    let mut jumps = Vec::new();
    for term in terms {
        if term.jump.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: term.jump.dim(),
            });
        }
        if term.rate == 0.0 {
            continue;
        }
        let ada = term.jump.adjoint().dot(&term.jump).into_array();
        effective.scaled_add(-0.5 * term.rate * I, &ada);
        jumps.push(if term.jump.is_diagonal() {
            Jump::Diagonal {
                diag: term.jump.as_array().diag().to_owned(),
                rate: term.rate,
            }
        } else {
            Jump::General {
                op: Factor::new(term.jump.as_array().clone()),
                rate: term.rate,
            }
        });
    }
    let mut l = Liouvillian {
        hamiltonian: h.clone(),
        terms: terms.to_vec(),
        effective: Factor::new(effective),
        jumps,
        matrix: None,
    };
    if d <= SUPEROPERATOR_DIM_LIMIT {
        l.matrix = Some(l.assemble_superoperator());
    }
    Ok(l)
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn terms(&self) -> &[LindbladTerm] {
        &self.terms
    }

    /// Dense superoperator acting on column-stacked `vec(ρ)`, if built.
    pub fn matrix(&self) -> Option<&Array2<C64>> {
        self.matrix.as_ref()
    }

    pub fn superoperator(&self) -> Result<&Array2<C64>> {
        self.matrix.as_ref().ok_or(Error::SuperoperatorTooLarge {
            dim: self.dim(),
            limit: SUPEROPERATOR_DIM_LIMIT,
        })
    }

    fn assemble_superoperator(&self) -> Array2<C64> {
        // vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
        let d = self.dim();
        let eye = Array2::<C64>::eye(d);
        let effective = self.effective.to_dense();
        let mut m = kron(&eye, &effective).mapv(|z| -I * z);
        m = m + kron(&effective.mapv(|z| z.conj()), &eye).mapv(|z| I * z);
        for jump in &self.jumps {
            let (op, rate) = match jump {
                Jump::General { op, rate } => (op.to_dense(), *rate),
                Jump::Diagonal { diag, rate } => (Array2::from_diag(diag), *rate),
            };
            m.scaled_add(C64::new(rate, 0.0), &kron(&op.mapv(|z| z.conj()), &op));
        }
        m
    }

    fn add_jump_terms(&self, rho: &Array2<C64>, out: &mut Array2<C64>) {
        for jump in &self.jumps {
            match jump {
                Jump::General { op, rate } => {
                    // A ρ A† = A (A ρ†)†
                    let half = adjoint_of(&op.left_mul(&adjoint_of(rho).view()));
                    let sandwich = op.left_mul(&half.view());
                    out.scaled_add(C64::new(*rate, 0.0), &sandwich);
                }
                Jump::Diagonal { diag, rate } => {
                    for ((i, j), o) in out.indexed_iter_mut() {
                        *o += *rate * diag[i] * rho[[i, j]] * diag[j].conj();
                    }
                }
            }
        }
    }

    /// `L(ρ)` for an arbitrary square matrix.
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let left = self.effective.left_mul(&rho.view());
        // ρ K† = (K ρ†)†
        let right = adjoint_of(&self.effective.left_mul(&adjoint_of(rho).view()));
        let mut out = (left - right).mapv(|z| -I * z);
        self.add_jump_terms(rho, &mut out);
        out
    }

    /// `L(ρ)` assuming `ρ = ρ†`, saving one matrix product.
    pub(crate) fn apply_hermitian(&self, rho: &Array2<C64>) -> Array2<C64> {
        let left = self.effective.left_mul(&rho.view());
        let mut out = Array2::from_shape_fn(left.dim(), |(i, j)| -I * (left[[i, j]] - left[[j, i]].conj()));
        self.add_jump_terms(rho, &mut out);
        out
    }

    /// `Σₖ γₖ (Aₖ ρ Aₖ† - ½{Aₖ†Aₖ, ρ})`.
    pub fn dissipator(&self, rho: &Array2<C64>) -> Array2<C64> {
        let mut out = Array2::zeros(rho.dim());
        for term in &self.terms {
            if term.rate == 0.0 {
                continue;
            }
            let a = term.jump.as_array();
            let ad = term.jump.adjoint().into_array();
            let ada = ad.dot(a);
            let part = a.dot(rho).dot(&ad) - (ada.dot(rho) + rho.dot(&ada)).mapv(|z| z * 0.5);
            out.scaled_add(C64::new(term.rate, 0.0), &part);
        }
        out
    }

    /// `‖L(ρ)‖_F`.
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        frobenius(&self.apply(rho.as_array()))
    }

    /// Eigenvalues of the dense superoperator.
    pub fn spectrum(&self) -> Result<Vec<C64>> {
        let m = self.superoperator()?;
        let dm = nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]]);
        nalgebra::Schur::new(dm)
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| Error::InvalidArgument("Schur decomposition did not converge".into()))
    }
}

/// Column-stacked `vec(ρ)`: entry `i + j·d` holds `ρ[i, j]`.
pub fn vectorize(rho: &Array2<C64>) -> Array1<C64> {
    rho.t().iter().copied().collect()
}

pub fn unvectorize(v: &Array1<C64>, d: usize) -> Result<Array2<C64>> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            actual: v.len(),
        });
    }
    Ok(Array2::from_shape_fn((d, d), |(i, j)| v[i + j * d]))
}
