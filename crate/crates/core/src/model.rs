//! Chain geometries, their Hamiltonians and jump operators, and the
//! excitation-number sectors those operators conserve.
//!
//! Two geometries are supported. In geometry [`Geometry::A`] the primary pair
//! (sites 1, 2) has a single secondary chain attached to site 2. In geometry
//! [`Geometry::B`] the primary pair sits in the middle with one secondary
//! chain on each side. Both are laid out as a 1D register, see [`SiteMap`].

use std::fmt;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{site_bit, site_mask, DensityMatrix, Operator, StateVector};

/// Largest register built as dense `2^n × 2^n` operators.
pub const FULL_SPACE_MAX_QUBITS: usize = 12;

/// Tolerance for the `θ = κ` requirement of the closed-form reference states.
const EQUAL_COUPLING_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Geometry {
    A,
    B,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::A => f.write_str("A"),
            Geometry::B => f.write_str("B"),
        }
    }
}

/// Geometry, size and couplings of a chain. Frequencies are in units of `delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub geometry: Geometry,
    pub n: usize,
    pub delta: f64,
    /// Nearest-neighbour hopping inside the secondary chains.
    pub kappa: f64,
    /// Hopping across each primary-secondary junction.
    pub theta: f64,
    /// Rate of the bi-local engineered jump on the primary pair.
    pub gamma_engineered: f64,
    /// Per-qubit dephasing rate on the primary pair (geometry B only).
    pub gamma_dephasing: f64,
}

impl ChainConfig {
    /// Defaults: `Δ = 1`, `κ = θ = 0.2`, `Γ = 0.1`, no dephasing.
    pub fn new(geometry: Geometry, n: usize) -> Self {
        Self {
            geometry,
            n,
            delta: 1.0,
            kappa: 0.2,
            theta: 0.2,
            gamma_engineered: 0.1,
            gamma_dephasing: 0.0,
        }
    }

    /// Sets `κ = θ = coupling`.
    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.kappa = coupling;
        self.theta = coupling;
        self
    }

    pub fn with_dephasing(mut self, gamma: f64) -> Self {
        self.gamma_dephasing = gamma;
        self
    }

    pub fn with_engineered_rate(mut self, gamma: f64) -> Self {
        self.gamma_engineered = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.n.is_multiple_of(2) {
            return bad(format!("n = {} must be even", self.n));
        }
        match self.geometry {
            Geometry::A if self.n < 2 => return bad("geometry A needs n >= 2".into()),
            Geometry::B if self.n < 4 => return bad("geometry B needs n >= 4".into()),
            _ => {}
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta = {} must be positive", self.delta));
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("theta", self.theta),
            ("gamma_engineered", self.gamma_engineered),
            ("gamma_dephasing", self.gamma_dephasing),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be a non-negative number"));
            }
        }
        if self.geometry == Geometry::A && self.gamma_dephasing != 0.0 {
            return bad("dephasing baths are only defined for geometry B".into());
        }
        Ok(())
    }

    pub fn has_equal_couplings(&self) -> bool {
        (self.kappa - self.theta).abs() <= EQUAL_COUPLING_TOL
    }
}

/// Physical label of a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteLabel {
    /// Primary qubit 1 or 2.
    Primary(u8),
    /// Qubit `j ≥ 3` of the left secondary chain, counted outward from the primary pair.
    Left(usize),
    /// Qubit `j ≥ 3` of the right secondary chain, counted outward from the primary pair.
    Right(usize),
}

impl fmt::Display for SiteLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteLabel::Primary(p) => write!(f, "{p}"),
            SiteLabel::Left(j) => write!(f, "{j}L"),
            SiteLabel::Right(j) => write!(f, "{j}R"),
        }
    }
}

/// Bijection between physical labels and linear register positions `1..=n`.
///
/// Geometry A: `1, 2, 3R, 4R, …` map to `1, 2, 3, 4, …`.
/// Geometry B: the left chain is reversed so the register is a plain 1D chain:
/// `(n/2+1)L, …, 3L, 1, 2, 3R, …, (n/2+1)R` map to `1, …, n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteMap {
    geometry: Geometry,
    labels: Vec<SiteLabel>,
}

impl SiteMap {
    pub fn new(geometry: Geometry, n: usize) -> Result<Self> {
        ChainConfig::new(geometry, n).validate()?;
        let labels = match geometry {
            Geometry::A => (1..=n)
                .map(|s| match s {
                    1 | 2 => SiteLabel::Primary(s as u8),
                    _ => SiteLabel::Right(s),
                })
                .collect(),
            Geometry::B => {
                let half = n / 2;
                let mut labels: Vec<SiteLabel> = (3..=half + 1).rev().map(SiteLabel::Left).collect();
                labels.push(SiteLabel::Primary(1));
                labels.push(SiteLabel::Primary(2));
                labels.extend((3..=half + 1).map(SiteLabel::Right));
                labels
            }
        };
        Ok(Self { geometry, labels })
    }

    pub fn for_config(cfg: &ChainConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(cfg.geometry, cfg.n)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Linear position (1-based) of a label.
    pub fn linear(&self, label: SiteLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|p| p + 1)
            .ok_or_else(|| Error::InvalidSites(format!("no site {label} in this chain")))
    }

    pub fn label(&self, linear: usize) -> Result<SiteLabel> {
        linear
            .checked_sub(1)
            .and_then(|p| self.labels.get(p).copied())
            .ok_or(Error::SiteOutOfRange {
                site: linear,
                n: self.n(),
            })
    }

    /// Linear positions of primary qubits 1 and 2.
    pub fn primary(&self) -> (usize, usize) {
        match self.geometry {
            Geometry::A => (1, 2),
            Geometry::B => (self.n() / 2, self.n() / 2 + 1),
        }
    }

    /// Mirror partner of a secondary-chain site in geometry B.
    pub fn mirror(&self, linear: usize) -> Option<usize> {
        match (self.geometry, self.label(linear).ok()?) {
            (Geometry::B, SiteLabel::Left(j)) => self.linear(SiteLabel::Right(j)).ok(),
            (Geometry::B, SiteLabel::Right(j)) => self.linear(SiteLabel::Left(j)).ok(),
            _ => None,
        }
    }

    /// Coherent hopping bonds `(i, j, coupling)` with `i < j`.
    pub fn bonds(&self, kappa: f64, theta: f64) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        match self.geometry {
            Geometry::A => {
                let mut bonds = Vec::new();
                if n > 2 {
                    bonds.push((2, 3, theta));
                }
                bonds.extend((3..n).map(|j| (j, j + 1, kappa)));
                bonds
            }
            Geometry::B => {
                let (p1, p2) = self.primary();
                (1..n)
                    .filter(|&j| j != p1)
                    .map(|j| {
                        let c = if j + 1 == p1 || j == p2 { theta } else { kappa };
                        (j, j + 1, c)
                    })
                    .collect()
            }
        }
    }
}

/// A jump operator with its rate.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladTerm {
    pub jump: Operator,
    pub rate: f64,
}

impl LindbladTerm {
    pub fn new(jump: Operator, rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("rate {rate} must be non-negative")));
        }
        Ok(Self { jump, rate })
    }
}

/// Column action `x ↦ Σ amp |y⟩` of an operator on computational basis states.
type Action<'a> = dyn Fn(usize, &mut Vec<(usize, C64)>) + 'a;

/// Dense matrix of an action restricted to `basis` (sorted ascending).
/// Components leaving the span are an error.
fn matrix_in_basis(basis: &[usize], action: &Action<'_>) -> Result<Operator> {
    let d = basis.len();
    let mut data = Array2::<C64>::zeros((d, d));
    let mut out = Vec::new();
    for (col, &x) in basis.iter().enumerate() {
        out.clear();
        action(x, &mut out);
        for &(y, amp) in &out {
            match basis.binary_search(&y) {
                Ok(row) => data[[row, col]] += amp,
                Err(_) if amp == C64::new(0.0, 0.0) => {}
                Err(_) => return Err(Error::NotNumberConserving { deviation: amp.norm() }),
            }
        }
    }
    Operator::new(data)
}

fn hamiltonian_action(cfg: &ChainConfig, map: &SiteMap) -> impl Fn(usize, &mut Vec<(usize, C64)>) {
    let n = cfg.n;
    let delta = cfg.delta;
    let bonds = map.bonds(cfg.kappa, cfg.theta);
    move |x, out| {
        let up = x.count_ones() as f64;
        out.push((x, C64::new(delta * (2.0 * up - n as f64), 0.0)));
        for &(i, j, c) in &bonds {
            // σᵢ⁺σⱼ⁻ + σⱼ⁺σᵢ⁻ swaps an excitation across the bond
            if site_bit(x, i, n) != site_bit(x, j, n) {
                out.push((x ^ site_mask(i, n) ^ site_mask(j, n), C64::new(c, 0.0)));
            }
        }
    }
}

fn bilocal_action(n: usize, p: usize, q: usize) -> impl Fn(usize, &mut Vec<(usize, C64)>) {
    let (mp, mq) = (site_mask(p, n), site_mask(q, n));
    move |x, out| {
        // (σ_p⁻ - σ_q⁻) then (σ_p⁺ + σ_q⁺)
        let mut lowered = [(0usize, 0.0f64); 2];
        let mut count = 0;
        if x & mp != 0 {
            lowered[count] = (x ^ mp, 1.0);
            count += 1;
        }
        if x & mq != 0 {
            lowered[count] = (x ^ mq, -1.0);
            count += 1;
        }
        for &(z, a) in &lowered[..count] {
            if z & mp == 0 {
                out.push((z | mp, C64::new(a, 0.0)));
            }
            if z & mq == 0 {
                out.push((z | mq, C64::new(a, 0.0)));
            }
        }
    }
}

fn sigma_z_action(n: usize, site: usize) -> impl Fn(usize, &mut Vec<(usize, C64)>) {
    let m = site_mask(site, n);
    move |x, out| out.push((x, C64::new(if x & m != 0 { 1.0 } else { -1.0 }, 0.0)))
}

fn full_basis(n: usize) -> Result<Vec<usize>> {
    if n > FULL_SPACE_MAX_QUBITS {
        return Err(Error::InvalidConfig(format!(
            "n = {n} exceeds the full-space limit of {FULL_SPACE_MAX_QUBITS} qubits; use the sector-reduced path"
        )));
    }
    Ok((0..1usize << n).collect())
}

/// `Δ Σⱼ σⱼᶻ` plus `κ`/`θ` hopping along the bonds of [`SiteMap::bonds`].
/// The two primary qubits are never coupled directly.
pub fn build_hamiltonian(cfg: &ChainConfig) -> Result<Operator> {
    let map = SiteMap::for_config(cfg)?;
    matrix_in_basis(&full_basis(cfg.n)?, &hamiltonian_action(cfg, &map))
}

/// `b = (σ₁⁺ + σ₂⁺)(σ₁⁻ − σ₂⁻)` on the primary pair, with rate `rate`.
pub fn build_bilocal_jump(n: usize, map: &SiteMap, rate: f64) -> Result<LindbladTerm> {
    if map.n() != n {
        return Err(Error::DimensionMismatch {
            expected: map.n(),
            actual: n,
        });
    }
    let (p, q) = map.primary();
    let jump = matrix_in_basis(&full_basis(n)?, &bilocal_action(n, p, q))?;
    LindbladTerm::new(jump, rate)
}

/// `σ₁ᶻ` and `σ₂ᶻ` on the primary pair, each with rate `γ`.
pub fn build_dephasing_jumps(cfg: &ChainConfig, map: &SiteMap) -> Result<Vec<LindbladTerm>> {
    if cfg.geometry != Geometry::B {
        return Err(Error::InvalidConfig(
            "dephasing baths are only defined for geometry B".into(),
        ));
    }
    cfg.validate()?;
    let basis = full_basis(cfg.n)?;
    let (p, q) = map.primary();
    [p, q]
        .into_iter()
        .map(|s| {
            let jump = matrix_in_basis(&basis, &sigma_z_action(cfg.n, s))?;
            LindbladTerm::new(jump, cfg.gamma_dephasing)
        })
        .collect()
}

/// All jump terms of the master equation for `cfg`.
pub fn build_lindblad_terms(cfg: &ChainConfig) -> Result<Vec<LindbladTerm>> {
    let map = SiteMap::for_config(cfg)?;
    let mut terms = vec![build_bilocal_jump(cfg.n, &map, cfg.gamma_engineered)?];
    if cfg.geometry == Geometry::B {
        terms.extend(build_dephasing_jumps(cfg, &map)?);
    }
    Ok(terms)
}

/// Primary qubit 1 up, every other qubit down.
pub fn initial_state_vector(cfg: &ChainConfig, map: &SiteMap) -> Result<StateVector> {
    cfg.validate()?;
    full_basis(cfg.n)?;
    StateVector::with_sites_up(cfg.n, &[map.primary().0])
}

pub fn initial_state(cfg: &ChainConfig, map: &SiteMap) -> Result<DensityMatrix> {
    Ok(initial_state_vector(cfg, map)?.projector())
}

/// Signed support `(site, sign)` of the closed-form geometry-A steady state:
/// `+` on sites 1 and 2, `(-1)^(m+1)` on site `2m` for `m = 2..=n/2`.
/// The common amplitude is `1/√(n/2+1)`.
pub fn w_state_support(n: usize) -> Result<Vec<(usize, f64)>> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "W-state reference needs even n >= 4, got {n}"
        )));
    }
    let mut support = vec![(1, 1.0), (2, 1.0)];
    support.extend((2..=n / 2).map(|m| (2 * m, if m % 2 == 0 { -1.0 } else { 1.0 })));
    Ok(support)
}

/// Closed-form steady state of geometry A with `θ = κ`.
pub fn reference_w_state(n: usize) -> Result<StateVector> {
    let support = w_state_support(n)?;
    if n > 2 * FULL_SPACE_MAX_QUBITS {
        return Err(Error::InvalidConfig(format!(
            "n = {n} too large for a dense state vector"
        )));
    }
    let mut amps = Array1::zeros(1usize << n);
    for (site, sign) in support {
        amps[site_mask(site, n)] = C64::new(sign, 0.0);
    }
    StateVector::new(amps)
}

/// The two primary-symmetric Hamiltonian eigenstates `(|Φ⁺⟩, |Φ⁻⟩)` of
/// geometry B at `n = 4`, `θ = κ`, with energies `-(2Δ ± κ)`.
pub fn reference_phi_states(cfg: &ChainConfig) -> Result<(StateVector, StateVector)> {
    cfg.validate()?;
    if cfg.geometry != Geometry::B || cfg.n != 4 {
        return Err(Error::InvalidConfig("Φ± references need geometry B with n = 4".into()));
    }
    if !cfg.has_equal_couplings() {
        return Err(Error::InvalidConfig("Φ± references need θ = κ".into()));
    }
    let map = SiteMap::for_config(cfg)?;
    let (p1, p2) = map.primary();
    let l3 = map.linear(SiteLabel::Left(3))?;
    let r3 = map.linear(SiteLabel::Right(3))?;
    let build = |outer_sign: f64| {
        let mut amps = Array1::zeros(16);
        for s in [l3, r3] {
            amps[site_mask(s, 4)] = C64::new(outer_sign * 0.5, 0.0);
        }
        for s in [p1, p2] {
            amps[site_mask(s, 4)] = C64::new(0.5, 0.0);
        }
        StateVector::new(amps)
    };
    Ok((build(-1.0)?, build(1.0)?))
}

/// `N = Σⱼ (σⱼᶻ + 1)/2`.
pub fn excitation_number(n: usize) -> Result<Operator> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let basis = full_basis(n)?;
    Ok(Operator::from_real_diagonal(
        &basis.iter().map(|x| x.count_ones() as f64).collect::<Vec<_>>(),
    ))
}

/// Ascending basis indices with exactly `k` excitations; `binomial(n, k)` of them.
pub fn sector_basis(n: usize, k: usize) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::ExcitationOutOfRange { k, n });
    }
    if n >= usize::BITS as usize - 1 {
        return Err(Error::InvalidArgument(format!("n = {n} too large")));
    }
    Ok((0..1usize << n).filter(|x| x.count_ones() as usize == k).collect())
}

/// Hamiltonian and jump terms of `cfg` built directly in the `k`-excitation
/// sector, without forming the full-space operators.
#[derive(Clone, Debug)]
pub struct SectorModel {
    pub n: usize,
    pub k: usize,
    pub basis: Vec<usize>,
    pub hamiltonian: Operator,
    pub terms: Vec<LindbladTerm>,
}

impl SectorModel {
    pub fn build(cfg: &ChainConfig, k: usize) -> Result<Self> {
        let map = SiteMap::for_config(cfg)?;
        let basis = sector_basis(cfg.n, k)?;
        if basis.len() > 1 << FULL_SPACE_MAX_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "sector dimension {} too large for dense storage",
                basis.len()
            )));
        }
        let hamiltonian = matrix_in_basis(&basis, &hamiltonian_action(cfg, &map))?;
        let (p, q) = map.primary();
        let mut terms = vec![LindbladTerm::new(
            matrix_in_basis(&basis, &bilocal_action(cfg.n, p, q))?,
            cfg.gamma_engineered,
        )?];
        if cfg.geometry == Geometry::B {
            for s in [p, q] {
                terms.push(LindbladTerm::new(
                    matrix_in_basis(&basis, &sigma_z_action(cfg.n, s))?,
                    cfg.gamma_dephasing,
                )?);
            }
        }
        Ok(Self {
            n: cfg.n,
            k,
            basis,
            hamiltonian,
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis state `|index⟩` restricted to this sector.
    pub fn basis_state(&self, index: usize) -> Result<StateVector> {
        let pos = self
            .basis
            .binary_search(&index)
            .map_err(|_| Error::InvalidArgument(format!("basis index {index} not in sector k = {}", self.k)))?;
        StateVector::basis(self.dim(), pos)
    }

    /// Initial state of the master equation, restricted to this sector.
    pub fn initial_state(&self, cfg: &ChainConfig) -> Result<DensityMatrix> {
        let map = SiteMap::for_config(cfg)?;
        Ok(self.basis_state(site_mask(map.primary().0, cfg.n))?.projector())
    }

    /// Closed-form geometry-A steady state restricted to this sector.
    pub fn reference_w_state(&self) -> Result<StateVector> {
        let support = w_state_support(self.n)?;
        let mut amps = Array1::zeros(self.dim());
        for (site, sign) in support {
            let pos = self
                .basis
                .binary_search(&site_mask(site, self.n))
                .map_err(|_| Error::InvalidArgument("W state lives in the k = 1 sector".into()))?;
            amps[pos] = C64::new(sign, 0.0);
        }
        StateVector::new(amps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator, eig_hermitian, embed, sigma_minus, sigma_plus, sigma_z};
    use approx::assert_abs_diff_eq;

    /// Hamiltonian assembled from embedded Pauli products, independent of the
    /// basis-action construction.
    fn hamiltonian_oracle(cfg: &ChainConfig) -> Operator {
        let n = cfg.n;
        let map = SiteMap::for_config(cfg).unwrap();
        let mut h = Operator::zeros(1 << n);
        for s in 1..=n {
            h = &h + &embed(&sigma_z(), s, n).unwrap().scaled(C64::new(cfg.delta, 0.0));
        }
        for (i, j, c) in map.bonds(cfg.kappa, cfg.theta) {
            let hop = &embed(&sigma_plus(), i, n).unwrap() * &embed(&sigma_minus(), j, n).unwrap();
            h = &h + &(&hop + &hop.adjoint()).scaled(C64::new(c, 0.0));
        }
        h
    }

    fn bilocal_oracle(n: usize, p: usize, q: usize) -> Operator {
        let raise = &embed(&sigma_plus(), p, n).unwrap() + &embed(&sigma_plus(), q, n).unwrap();
        let lower = &embed(&sigma_minus(), p, n).unwrap() - &embed(&sigma_minus(), q, n).unwrap();
        &raise * &lower
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::new(Geometry::A, 2).validate().is_ok());
        assert!(ChainConfig::new(Geometry::A, 3).validate().is_err());
        assert!(ChainConfig::new(Geometry::B, 2).validate().is_err());
        assert!(ChainConfig::new(Geometry::B, 6).validate().is_ok());
        let mut cfg = ChainConfig::new(Geometry::A, 4);
        cfg.delta = 0.0;
        assert!(cfg.validate().is_err());
        let cfg = ChainConfig::new(Geometry::A, 4).with_coupling(-0.1);
        assert!(cfg.validate().is_err());
        let cfg = ChainConfig::new(Geometry::A, 4).with_dephasing(0.1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn site_map_layouts() {
        let a = SiteMap::new(Geometry::A, 6).unwrap();
        assert_eq!(a.linear(SiteLabel::Right(3)).unwrap(), 3);
        assert_eq!(a.primary(), (1, 2));

        let b = SiteMap::new(Geometry::B, 8).unwrap();
        assert_eq!(b.linear(SiteLabel::Left(5)).unwrap(), 1);
        assert_eq!(b.linear(SiteLabel::Left(3)).unwrap(), 3);
        assert_eq!(b.linear(SiteLabel::Primary(1)).unwrap(), 4);
        assert_eq!(b.linear(SiteLabel::Primary(2)).unwrap(), 5);
        assert_eq!(b.linear(SiteLabel::Right(3)).unwrap(), 6);
        assert_eq!(b.linear(SiteLabel::Right(5)).unwrap(), 8);
        assert_eq!(b.mirror(1), Some(8));
        assert_eq!(b.mirror(3), Some(6));
        assert_eq!(b.mirror(4), None);
        assert!(b.label(9).is_err());
        assert!(b.linear(SiteLabel::Right(6)).is_err());

        for map in [a, b] {
            for s in 1..=map.n() {
                assert_eq!(map.linear(map.label(s).unwrap()).unwrap(), s);
            }
        }
    }

    #[test]
    fn geometry_b_bonds_skip_primary_pair() {
        let b = SiteMap::new(Geometry::B, 8).unwrap();
        let bonds = b.bonds(0.2, 0.3);
        assert_eq!(
            bonds,
            vec![
                (1, 2, 0.2),
                (2, 3, 0.2),
                (3, 4, 0.3),
                (5, 6, 0.3),
                (6, 7, 0.2),
                (7, 8, 0.2)
            ]
        );
    }

    #[test]
    fn hamiltonian_matches_pauli_oracle() {
        for cfg in [
            ChainConfig::new(Geometry::A, 2),
            ChainConfig::new(Geometry::A, 6),
            ChainConfig {
                theta: 0.35,
                kappa: 0.15,
                delta: 1.3,
                ..ChainConfig::new(Geometry::A, 4)
            },
            ChainConfig::new(Geometry::B, 4).with_coupling(0.4),
            ChainConfig {
                theta: 0.25,
                ..ChainConfig::new(Geometry::B, 6)
            },
        ] {
            let h = build_hamiltonian(&cfg).unwrap();
            assert_eq!(h.hermiticity_error(), 0.0);
            assert!(h.max_abs_diff(&hamiltonian_oracle(&cfg)) < 1e-15, "{cfg:?}");
        }
    }

    #[test]
    fn two_free_qubits_spectrum() {
        let h = build_hamiltonian(&ChainConfig::new(Geometry::A, 2)).unwrap();
        let eig = eig_hermitian(&h).unwrap();
        assert_eq!(eig.values, vec![-2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn bilocal_jump_matches_oracle_and_examples() {
        for (geometry, n) in [(Geometry::A, 2), (Geometry::A, 4), (Geometry::B, 6)] {
            let map = SiteMap::new(geometry, n).unwrap();
            let (p, q) = map.primary();
            let term = build_bilocal_jump(n, &map, 0.1).unwrap();
            assert_eq!(term.rate, 0.1);
            assert!(term.jump.max_abs_diff(&bilocal_oracle(n, p, q)) < 1e-15);
        }
        let map = SiteMap::new(Geometry::A, 2).unwrap();
        let b = build_bilocal_jump(2, &map, 1.0).unwrap().jump;
        let up_down = StateVector::with_sites_up(2, &[1]).unwrap();
        let out = b.apply(&up_down).unwrap();
        let amps = out.amplitudes();
        // |↑↓⟩ + |↓↑⟩ (unnormalized)
        assert_eq!(amps[0b10], C64::new(1.0, 0.0));
        assert_eq!(amps[0b01], C64::new(1.0, 0.0));
        assert_eq!(amps[0b00] + amps[0b11], C64::new(0.0, 0.0));

        let sym = StateVector::new(Array1::from(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ]))
        .unwrap();
        assert!(b.apply(&sym).unwrap().norm() < 1e-15);
        for idx in [0b00, 0b11] {
            assert_eq!(b.apply(&StateVector::basis(4, idx).unwrap()).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn dephasing_jumps() {
        let cfg = ChainConfig::new(Geometry::B, 4);
        let map = SiteMap::for_config(&cfg).unwrap();
        let terms = build_dephasing_jumps(&cfg, &map).unwrap();
        assert_eq!(terms.len(), 2);
        let number = excitation_number(4).unwrap();
        for t in &terms {
            assert_eq!(t.rate, 0.0);
            assert!(t.jump.is_hermitian(1e-15));
            assert_eq!(t.jump.dot(&t.jump), Operator::identity(16));
            assert_eq!(commutator(&t.jump, &number).max_abs(), 0.0);
        }
        assert!(
            terms[0]
                .jump
                .max_abs_diff(&embed(&sigma_z(), map.primary().0, 4).unwrap())
                < 1e-15
        );
        assert!(build_dephasing_jumps(&ChainConfig::new(Geometry::A, 4), &map).is_err());
    }

    #[test]
    fn initial_states() {
        let cfg = ChainConfig::new(Geometry::A, 2);
        let rho = initial_state(&cfg, &SiteMap::for_config(&cfg).unwrap()).unwrap();
        assert_eq!(rho.as_array()[[0b10, 0b10]], C64::new(1.0, 0.0));
        let cfg = ChainConfig::new(Geometry::A, 4);
        let rho = initial_state(&cfg, &SiteMap::for_config(&cfg).unwrap()).unwrap();
        assert_eq!(rho.as_array()[[0b1000, 0b1000]], C64::new(1.0, 0.0));
        assert_abs_diff_eq!(rho.trace().re, 1.0);
        let purity: f64 = rho.as_array().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(purity, 1.0);
        let cfg = ChainConfig::new(Geometry::B, 6);
        let psi = initial_state_vector(&cfg, &SiteMap::for_config(&cfg).unwrap()).unwrap();
        assert_eq!(psi.amplitudes()[site_mask(3, 6)], C64::new(1.0, 0.0));
    }

    #[test]
    fn w_state_signs() {
        assert_eq!(w_state_support(4).unwrap(), vec![(1, 1.0), (2, 1.0), (4, -1.0)]);
        assert_eq!(
            w_state_support(6).unwrap(),
            vec![(1, 1.0), (2, 1.0), (4, -1.0), (6, 1.0)]
        );
        assert_eq!(
            w_state_support(8).unwrap(),
            vec![(1, 1.0), (2, 1.0), (4, -1.0), (6, 1.0), (8, -1.0)]
        );
        let psi = reference_w_state(4).unwrap();
        let amp = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(psi.amplitudes()[0b1000].re, amp, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitudes()[0b0100].re, amp, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitudes()[0b0001].re, -amp, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
        assert!(reference_w_state(5).is_err());
        assert!(reference_w_state(2).is_err());
    }

    #[test]
    fn w_state_is_dark_eigenstate() {
        for n in [4, 6, 8] {
            let cfg = ChainConfig::new(Geometry::A, n);
            let h = build_hamiltonian(&cfg).unwrap();
            let psi = reference_w_state(n).unwrap();
            let e = -((n - 2) as f64) * cfg.delta;
            let hpsi = h.apply(&psi).unwrap();
            let resid: f64 = hpsi
                .amplitudes()
                .iter()
                .zip(psi.amplitudes().iter())
                .map(|(a, b)| (a - b * e).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-10, "n = {n}: {resid}");
            let map = SiteMap::for_config(&cfg).unwrap();
            let b = build_bilocal_jump(n, &map, 0.1).unwrap().jump;
            assert!(b.apply(&psi).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn phi_states_are_orthogonal_eigenstates() {
        let cfg = ChainConfig::new(Geometry::B, 4).with_coupling(0.2);
        let (plus, minus) = reference_phi_states(&cfg).unwrap();
        assert!(plus.inner(&minus).norm() < 1e-15);
        let h = build_hamiltonian(&cfg).unwrap();
        for (psi, e) in [(&plus, -(2.0 + 0.2)), (&minus, -(2.0 - 0.2))] {
            let hpsi = h.apply(psi).unwrap();
            let overlap = psi.inner(&hpsi);
            assert_abs_diff_eq!(overlap.re, e, epsilon = 1e-12);
            assert_abs_diff_eq!(hpsi.norm(), e.abs(), epsilon = 1e-12);
        }
        let map = SiteMap::for_config(&cfg).unwrap();
        let b = build_bilocal_jump(4, &map, 0.1).unwrap().jump;
        assert!(b.apply(&plus).unwrap().norm() < 1e-15);
        assert!(b.apply(&minus).unwrap().norm() < 1e-15);

        let skew = ChainConfig {
            theta: 0.3,
            ..cfg.clone()
        };
        assert!(reference_phi_states(&skew).is_err());
        assert!(reference_phi_states(&ChainConfig::new(Geometry::B, 6)).is_err());
    }

    #[test]
    fn number_operator_and_conservation() {
        let number = excitation_number(3).unwrap();
        assert_eq!(number.as_array()[[0, 0]], C64::new(0.0, 0.0));
        assert_eq!(number.as_array()[[0b100, 0b100]], C64::new(1.0, 0.0));
        for cfg in [
            ChainConfig::new(Geometry::A, 6),
            ChainConfig::new(Geometry::B, 6).with_dephasing(0.05),
        ] {
            let number = excitation_number(cfg.n).unwrap();
            let h = build_hamiltonian(&cfg).unwrap();
            assert!(commutator(&number, &h).max_abs() < 1e-12);
            for t in build_lindblad_terms(&cfg).unwrap() {
                assert!(commutator(&number, &t.jump).max_abs() < 1e-12);
                let btb = t.jump.adjoint().dot(&t.jump);
                assert!(commutator(&number, &btb).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sector_bases() {
        assert_eq!(sector_basis(2, 1).unwrap(), vec![0b01, 0b10]);
        assert_eq!(sector_basis(4, 0).unwrap(), vec![0]);
        assert_eq!(sector_basis(10, 1).unwrap().len(), 10);
        assert_eq!(sector_basis(6, 3).unwrap().len(), 20);
        assert!(matches!(sector_basis(3, 4), Err(Error::ExcitationOutOfRange { .. })));
    }

    #[test]
    fn sector_model_matches_restricted_full_operators() {
        for cfg in [
            ChainConfig::new(Geometry::A, 6),
            ChainConfig::new(Geometry::B, 6).with_dephasing(0.05),
        ] {
            let full_h = build_hamiltonian(&cfg).unwrap();
            let full_terms = build_lindblad_terms(&cfg).unwrap();
            for k in 0..=2 {
                let sector = SectorModel::build(&cfg, k).unwrap();
                let restrict = |op: &Operator| {
                    Array2::from_shape_fn((sector.dim(), sector.dim()), |(a, b)| {
                        op.as_array()[[sector.basis[a], sector.basis[b]]]
                    })
                };
                assert_eq!(&restrict(&full_h), sector.hamiltonian.as_array());
                for (full, red) in full_terms.iter().zip(&sector.terms) {
                    assert_eq!(&restrict(&full.jump), red.jump.as_array());
                    assert_eq!(full.rate, red.rate);
                }
            }
        }
    }

    #[test]
    fn full_space_limit_is_enforced() {
        let cfg = ChainConfig::new(Geometry::A, 14);
        assert!(build_hamiltonian(&cfg).is_err());
        assert!(SectorModel::build(&cfg, 1).is_ok());
    }
}
