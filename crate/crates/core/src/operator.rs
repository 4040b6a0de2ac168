//! Dense complex linear algebra for qubit registers.
//!
//! Basis convention: each qubit has local basis `|↓⟩ = 0`, `|↑⟩ = 1`, so
//! `σᶻ = diag(-1, +1)` and `σ⁺ = |↑⟩⟨↓|`. For an `n`-qubit register, site 1 is
//! the leftmost tensor factor: basis index bit `n - s` (counting from the least
//! significant bit) holds the state of site `s`. Sites are 1-based everywhere in
//! the public API.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use ndarray::{linalg::kron, Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on `max|A - A†|` accepted by [`eig_hermitian`].
pub const EIG_HERMITICITY_TOL: f64 = 1e-8;
/// Trace and Hermiticity tolerance for [`DensityMatrix`].
pub const DENSITY_TOL: f64 = 1e-10;
/// Lowest eigenvalue a [`DensityMatrix`] may have.
pub const POSITIVITY_TOL: f64 = 1e-9;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// State of `site` (1-based) in basis index `index` of an `n`-qubit register.
#[inline]
pub fn site_bit(index: usize, site: usize, n: usize) -> usize {
    (index >> (n - site)) & 1
}

/// Bit mask selecting `site` in an `n`-qubit basis index.
#[inline]
pub fn site_mask(site: usize, n: usize) -> usize {
    1 << (n - site)
}

/// Number of qubits `n` with `2^n == dim`.
pub fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotQubitRegister(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn adjoint_of(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

fn hermitize(a: &Array2<C64>) -> Array2<C64> {
    (a + &adjoint_of(a)).mapv(|z| z * 0.5)
}

/// A dense `dim × dim` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    data: Array2<C64>,
}

impl Operator {
    pub fn new(data: Array2<C64>) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Empty);
        }
        Ok(Self { data })
    }

    pub fn identity(dim: usize) -> Self {
        Self { data: Array2::eye(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut data = Array2::zeros((diag.len(), diag.len()));
        for (i, &d) in diag.iter().enumerate() {
            data[[i, i]] = C64::new(d, 0.0);
        }
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: adjoint_of(&self.data),
        }
    }

    pub fn dot(&self, other: &Operator) -> Operator {
        Operator {
            data: self.data.dot(&other.data),
        }
    }

    pub fn scaled(&self, factor: C64) -> Operator {
        Operator {
            data: self.data.mapv(|z| z * factor),
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max|A - A†|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.data, &adjoint_of(&self.data))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() < tol
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Operator {
        Operator {
            data: hermitize(&self.data),
        }
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        Ok(StateVector {
            amps: self.data.dot(&psi.amps),
        })
    }

    /// Whether every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.data.indexed_iter().all(|((i, j), z)| i == j || *z == ZERO)
    }
}

pub(crate) fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            data: &self.data - &rhs.data,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.dot(rhs)
    }
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    &a.dot(b) - &b.dot(a)
}

pub fn identity2() -> Operator {
    Operator::identity(2)
}

pub fn sigma_z() -> Operator {
    Operator::from_real_diagonal(&[-1.0, 1.0])
}

pub fn sigma_x() -> Operator {
    &sigma_plus() + &sigma_minus()
}

pub fn sigma_y() -> Operator {
    // -i σ⁺ + i σ⁻
    &sigma_minus().scaled(C64::new(0.0, 1.0)) - &sigma_plus().scaled(C64::new(0.0, 1.0))
}

/// `σ⁺ = |↑⟩⟨↓|`.
pub fn sigma_plus() -> Operator {
    let mut data = Array2::zeros((2, 2));
    data[[1, 0]] = ONE;
    Operator { data }
}

/// `σ⁻ = |↓⟩⟨↑|`.
pub fn sigma_minus() -> Operator {
    sigma_plus().adjoint()
}

/// Kronecker product `a ⊗ b`; `a` occupies the more significant index bits.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    Operator {
        data: kron(&a.data, &b.data),
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` on `n` qubits with `op` in slot `site`.
pub fn embed(op: &Operator, site: usize, n: usize) -> Result<Operator> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: op.dim(),
        });
    }
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    let left = Operator::identity(1 << (site - 1));
    let right = Operator::identity(1 << (n - site));
    Ok(tensor(&tensor(&left, op), &right))
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Array1<C64>,
}

impl StateVector {
    /// Normalizes `amps`; fails on an empty or zero vector.
    pub fn new(amps: Array1<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Empty);
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        Ok(Self {
            amps: amps.mapv(|z| z / norm),
        })
    }

    /// Computational basis state `|index⟩` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut amps = Array1::zeros(dim);
        amps[index] = ONE;
        Ok(Self { amps })
    }

    /// Product state on `n` qubits with the listed sites (1-based) up.
    pub fn with_sites_up(n: usize, up: &[usize]) -> Result<Self> {
        let mut index = 0;
        for &s in up {
            if s == 0 || s > n {
                return Err(Error::SiteOutOfRange { site: s, n });
            }
            index |= site_mask(s, n);
        }
        Self::basis(1 << n, index)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn projector(&self) -> DensityMatrix {
        let d = self.dim();
        let mut data = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                data[[i, j]] = self.amps[i] * self.amps[j].conj();
            }
        }
        DensityMatrix { data }
    }
}

/// Measured deviation of a matrix from the density-matrix invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl DensityDiagnostics {
    pub fn of(data: &Array2<C64>) -> Result<Self> {
        let trace: C64 = data.diag().sum();
        let herm = max_abs_diff(data, &adjoint_of(data));
        let values = hermitian_eigenvalues(&hermitize(data));
        Ok(Self {
            trace_error: (trace - ONE).norm(),
            hermiticity_error: herm,
            min_eigenvalue: values.first().copied().unwrap_or(0.0),
        })
    }

    pub fn is_valid(&self) -> bool {
        self.trace_error <= DENSITY_TOL
            && self.hermiticity_error <= DENSITY_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    data: Array2<C64>,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(data: Array2<C64>) -> Result<Self> {
        let op = Operator::new(data)?;
        let diag = DensityDiagnostics::of(&op.data)?;
        if !diag.is_valid() {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace error {:e}, hermiticity error {:e}, min eigenvalue {:e}",
                diag.trace_error, diag.hermiticity_error, diag.min_eigenvalue
            )));
        }
        Ok(Self { data: op.data })
    }

    /// Hermitizes and trace-normalizes `data` before validating it.
    pub fn sanitized(data: &Array2<C64>) -> Result<Self> {
        let herm = hermitize(data);
        let trace = herm.diag().sum().re;
        if trace.abs() < f64::EPSILON {
            return Err(Error::InvalidDensityMatrix("zero trace".into()));
        }
        Self::new(herm.mapv(|z| z / trace))
    }

    pub(crate) fn from_trusted(data: Array2<C64>) -> Self {
        Self { data }
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        psi.projector()
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            data: Array2::eye(dim).mapv(|z: C64| z / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn to_operator(&self) -> Operator {
        Operator {
            data: self.data.clone(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn diagnostics(&self) -> Result<DensityDiagnostics> {
        DensityDiagnostics::of(&self.data)
    }

    /// `tr(ρ O)`.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: op.dim(),
            });
        }
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.data[[i, k]] * op.data[[k, i]];
            }
        }
        Ok(acc)
    }
}

/// Reduced state on the sites in `keep` (1-based, any order, no repeats).
/// The result orders the kept sites ascending.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize], n: usize) -> Result<DensityMatrix> {
    if rho.dim() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            actual: rho.dim(),
        });
    }
    let kept = normalize_sites(keep, n)?;
    let reduced = reduce_entries(
        n,
        &kept,
        (0..rho.dim()).flat_map(|r| (0..rho.dim()).map(move |c| (r, c))),
        |r, c| rho.data[[r, c]],
    );
    Ok(DensityMatrix::from_trusted(reduced))
}

/// Sorted, deduplicated, range-checked site list.
pub(crate) fn normalize_sites(keep: &[usize], n: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidSites("keep set is empty".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    if kept.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSites(format!("repeated site in {keep:?}")));
    }
    if let Some(&s) = kept.iter().find(|&&s| s == 0 || s > n) {
        return Err(Error::SiteOutOfRange { site: s, n });
    }
    Ok(kept)
}

/// Contracts the traced-out sites of the matrix elements yielded by `pairs`.
pub(crate) fn reduce_entries<I, F>(n: usize, kept: &[usize], pairs: I, value: F) -> Array2<C64>
where
    I: Iterator<Item = (usize, usize)>,
    F: Fn(usize, usize) -> C64,
{
    let kept_mask: usize = kept.iter().map(|&s| site_mask(s, n)).sum();
    let traced_mask = ((1usize << n) - 1) & !kept_mask;
    let compress = |index: usize| kept.iter().fold(0usize, |acc, &s| (acc << 1) | site_bit(index, s, n));
    let d = 1 << kept.len();
    let mut out = Array2::zeros((d, d));
    for (r, c) in pairs {
        if r & traced_mask == c & traced_mask {
            out[[compress(r), compress(c)]] += value(r, c);
        }
    }
    out
}

/// Transpose on the second qubit of a two-qubit operator: `⟨a b|ρ^T₂|c d⟩ = ⟨a d|ρ|c b⟩`.
pub fn partial_transpose(rho: &Operator) -> Result<Operator> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    let mut data = Array2::zeros((4, 4));
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    data[[2 * a + b, 2 * c + d]] = rho.data[[2 * a + d, 2 * c + b]];
                }
            }
        }
    }
    Ok(Operator { data })
}

/// Eigen-decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: Array2<C64>,
}

/// Eigenpairs of a Hermitian matrix in no particular order.
///
/// Rows that are exactly zero are split off as zero eigenpairs. The
/// remaining block goes to the symmetric QR solver; should that produce
/// non-finite output, the SVD of the block shifted to be positive definite
/// is used instead.
fn hermitian_eigenpairs(a: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let d = a.nrows();
    let (active, idle): (Vec<usize>, Vec<usize>) = (0..d).partition(|&i| a.row(i).iter().any(|z| *z != ZERO));
    let block = DMatrix::from_fn(active.len(), active.len(), |i, j| a[[active[i], active[j]]]);
    let (mut values, block_vectors) = if active.is_empty() {
        (Vec::new(), DMatrix::zeros(0, 0))
    } else {
        let eig = block.clone().symmetric_eigen();
        let finite = eig.eigenvalues.iter().all(|v| v.is_finite())
            && eig.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if finite {
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        } else {
            shifted_svd_eigenpairs(block)
        }
    };
    let mut vectors = Array2::zeros((d, d));
    for (col, _) in values.iter().enumerate() {
        for (row, &i) in active.iter().enumerate() {
            vectors[[i, col]] = block_vectors[(row, col)];
        }
    }
    for (k, &i) in idle.iter().enumerate() {
        vectors[[i, active.len() + k]] = ONE;
    }
    values.extend(std::iter::repeat_n(0.0, idle.len()));
    (values, vectors)
}

/// For `B + cI` positive definite, singular values are eigenvalues and the
/// left singular vectors are eigenvectors.
fn shifted_svd_eigenpairs(block: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let k = block.nrows();
    let shift = block.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() + 1.0;
    let shifted = block + DMatrix::identity(k, k) * C64::new(shift, 0.0);
    let svd = shifted.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    (svd.singular_values.iter().map(|s| s - shift).collect(), u)
}

pub(crate) fn hermitian_eigenvalues(a: &Array2<C64>) -> Vec<f64> {
    let mut values = hermitian_eigenpairs(a).0;
    values.sort_by(f64::total_cmp);
    values
}

/// Ascending eigenvalues and eigenvectors of a Hermitian operator.
///
/// The input is symmetrized as `(A + A†)/2` first; inputs further than
/// [`EIG_HERMITICITY_TOL`] from Hermitian are rejected.
pub fn eig_hermitian(a: &Operator) -> Result<HermitianEigen> {
    let deviation = a.hermiticity_error();
    if deviation > EIG_HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let (raw_values, raw_vectors) = hermitian_eigenpairs(&hermitize(&a.data));
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| raw_values[i].total_cmp(&raw_values[j]));
    let values = order.iter().map(|&k| raw_values[k]).collect();
    let vectors = Array2::from_shape_fn((a.dim(), a.dim()), |(i, col)| raw_vectors[[i, order[col]]]);
    Ok(HermitianEigen { values, vectors })
}

/// `½ Σ|eig(ρ - σ)|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            actual: sigma.dim(),
        });
    }
    let diff = hermitize(&(&rho.data - &sigma.data));
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|v| v.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell_plus() -> StateVector {
        // (|↑↓⟩ + |↓↑⟩)/√2
        let mut a = Array1::zeros(4);
        a[1] = ONE;
        a[2] = ONE;
        StateVector::new(a).unwrap()
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i4 = tensor(&identity2(), &identity2());
        assert_eq!(i4, Operator::identity(4));
    }

    #[test]
    fn sigma_z_on_first_site() {
        let up_down = StateVector::with_sites_up(2, &[1]).unwrap();
        let out = tensor(&sigma_z(), &identity2()).apply(&up_down).unwrap();
        assert_eq!(out, up_down);
    }

    #[test]
    fn raising_lowering_pair_moves_excitation() {
        let down_up = StateVector::with_sites_up(2, &[2]).unwrap();
        let up_down = StateVector::with_sites_up(2, &[1]).unwrap();
        let out = tensor(&sigma_plus(), &sigma_minus()).apply(&down_up).unwrap();
        assert_eq!(out, up_down);
    }

    #[test]
    fn embed_matches_tensor_and_number_operator() {
        assert_eq!(embed(&sigma_z(), 1, 2).unwrap(), tensor(&sigma_z(), &identity2()));
        let number = &embed(&sigma_plus(), 2, 2).unwrap() * &embed(&sigma_minus(), 2, 2).unwrap();
        let down_up = StateVector::with_sites_up(2, &[2]).unwrap();
        assert_eq!(number.apply(&down_up).unwrap(), down_up);
    }

    #[test]
    fn embed_rejects_bad_site() {
        assert!(matches!(embed(&sigma_z(), 0, 3), Err(Error::SiteOutOfRange { .. })));
        assert!(embed(&sigma_z(), 4, 3).is_err());
        assert!(embed(&Operator::identity(4), 1, 3).is_err());
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let a = embed(&sigma_z(), 1, 3).unwrap();
        let b = embed(&sigma_z(), 2, 3).unwrap();
        assert_eq!(commutator(&a, &b).max_abs(), 0.0);
        let c = embed(&sigma_plus(), 3, 3).unwrap();
        assert_eq!(commutator(&a, &c).max_abs(), 0.0);
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let rho = bell_plus().projector();
        let red = partial_trace(&rho, &[1], 2).unwrap();
        assert!(
            red.to_operator()
                .max_abs_diff(&DensityMatrix::maximally_mixed(2).to_operator())
                < 1e-15
        );
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = StateVector::with_sites_up(2, &[1]).unwrap().projector();
        let red = partial_trace(&rho, &[2], 2).unwrap();
        // |↓⟩⟨↓| is index 0
        assert_eq!(red.as_array()[[0, 0]], ONE);
        assert_eq!(red.as_array()[[1, 1]], ZERO);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(partial_trace(&rho, &[], 2), Err(Error::InvalidSites(_))));
        assert!(matches!(
            partial_trace(&rho, &[1], 3),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(partial_trace(&rho, &[3], 2).is_err());
    }

    #[test]
    fn partial_transpose_examples() {
        let mixed = DensityMatrix::maximally_mixed(4).to_operator();
        assert_eq!(partial_transpose(&mixed).unwrap(), mixed);
        let bell = bell_plus().projector().to_operator();
        let pt = partial_transpose(&bell).unwrap();
        let eig = eig_hermitian(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in eig.values.iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
        assert!(partial_transpose(&Operator::identity(2)).is_err());
    }

    #[test]
    fn eigen_paths_agree_on_sparse_support() {
        let mut m = Array2::zeros((8, 8));
        let support = [1usize, 4, 6];
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                m[[i, j]] = if a == b {
                    C64::new(0.2 + 0.1 * a as f64, 0.0)
                } else {
                    C64::new(0.05, 0.03 * (b as f64 - a as f64))
                };
            }
        }
        let eig = eig_hermitian(&Operator::new(m.clone()).unwrap()).unwrap();
        assert_eq!(eig.values.iter().filter(|v| **v == 0.0).count(), 5);
        let block = DMatrix::from_fn(3, 3, |a, b| m[[support[a], support[b]]]);
        let (mut by_svd, _) = shifted_svd_eigenpairs(block.clone());
        by_svd.sort_by(f64::total_cmp);
        let mut by_qr: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
        by_qr.sort_by(f64::total_cmp);
        for (a, b) in by_svd.iter().zip(&by_qr) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        let nonzero: Vec<f64> = eig.values.iter().copied().filter(|v| *v != 0.0).collect();
        for (a, b) in nonzero.iter().zip(&by_qr) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        let recon = eig
            .vectors
            .dot(&Array2::from_diag(&Array1::from_iter(
                eig.values.iter().map(|v| C64::new(*v, 0.0)),
            )))
            .dot(&adjoint_of(&eig.vectors));
        assert!((&recon - &m).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn eig_examples_and_reconstruction() {
        let eig = eig_hermitian(&sigma_z()).unwrap();
        assert_eq!(eig.values, vec![-1.0, 1.0]);
        let eig = eig_hermitian(&Operator::identity(4)).unwrap();
        assert_eq!(eig.values, vec![1.0; 4]);

        let mut m = Array2::zeros((3, 3));
        m[[0, 1]] = C64::new(0.3, 0.4);
        m[[1, 0]] = C64::new(0.3, -0.4);
        m[[2, 2]] = C64::new(2.0, 0.0);
        m[[0, 0]] = C64::new(-1.0, 0.0);
        let a = Operator::new(m).unwrap();
        let eig = eig_hermitian(&a).unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let v = &eig.vectors;
        let lambda = Array2::from_diag(&Array1::from_iter(eig.values.iter().map(|&x| C64::new(x, 0.0))));
        let back = v.dot(&lambda).dot(&adjoint_of(v));
        assert!(max_abs_diff(&back, a.as_array()) < 1e-9 * a.max_abs());
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        assert!(matches!(eig_hermitian(&sigma_plus()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn density_matrix_validation() {
        let mut bad = Array2::eye(2);
        bad[[0, 0]] = C64::new(2.0, 0.0);
        assert!(DensityMatrix::new(bad.clone()).is_err());
        assert!(DensityMatrix::sanitized(&bad).is_ok());
        let mut negative = Array2::zeros((2, 2));
        negative[[0, 0]] = C64::new(1.5, 0.0);
        negative[[1, 1]] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(negative).is_err());
    }

    #[test]
    fn trace_distance_of_orthogonal_states_is_one() {
        let a = StateVector::basis(2, 0).unwrap().projector();
        let b = StateVector::basis(2, 1).unwrap().projector();
        assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&a, &a).unwrap(), 0.0, epsilon = 1e-14);
    }
}
