//! Lattice geometries, random symmetry-breaking terms and the two families of
//! system–bath Hamiltonians.
//!
//! Site indexing for the 2D lattices is row-major, `site = y * lx + x`. The
//! torus is periodic in both directions, the strip only in x. The default
//! system is the pair of sites `{0, 1}`, adjacent along x.
//!
//! Hopping amplitudes carry a `+1` sign, `H_ij = 1 + g r_ij` on every bond.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::fock::{build_many_body_hamiltonian, FockBasis};
use crate::error::{Error, Result};
use crate::linalg::{sigma_x, sigma_z, HermitianMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Torus,
    Strip,
    FullyConnected,
}

impl Geometry {
    pub fn is_2d(self) -> bool {
        matches!(self, Geometry::Torus | Geometry::Strip)
    }
}

/// Geometry and size of a lattice, plus the system/coupling subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub geometry: Geometry,
    /// 2D extents; zero for the fully connected graph.
    pub lx: usize,
    pub ly: usize,
    /// Total number of sites.
    pub n_sites: usize,
    /// Size of the coupled subset `1..=m` (fully connected only).
    pub m: usize,
    /// The two system sites (2D only).
    pub system_sites: (usize, usize),
}

impl LatticeSpec {
    pub fn torus(lx: usize, ly: usize) -> Result<Self> {
        Self::two_d(Geometry::Torus, lx, ly)
    }

    pub fn strip(lx: usize, ly: usize) -> Result<Self> {
        Self::two_d(Geometry::Strip, lx, ly)
    }

    fn two_d(geometry: Geometry, lx: usize, ly: usize) -> Result<Self> {
        let spec = Self {
            geometry,
            lx,
            ly,
            n_sites: lx * ly,
            m: 0,
            system_sites: (0, 1),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fully_connected(n_sites: usize, m: usize) -> Result<Self> {
        let spec = Self {
            geometry: Geometry::FullyConnected,
            lx: 0,
            ly: 0,
            n_sites,
            m,
            system_sites: (0, 1),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_system_sites(mut self, a: usize, b: usize) -> Result<Self> {
        self.system_sites = (a, b);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self.geometry {
            Geometry::Torus | Geometry::Strip => {
                // a periodic direction of length < 3 wraps a bond onto itself
                if self.lx < 3 {
                    return Err(Error::InvalidSpec(format!(
                        "lx = {} but periodic directions need at least 3 sites",
                        self.lx
                    )));
                }
                let min_ly = if self.geometry == Geometry::Torus {
                    3
                } else {
                    2
                };
                if self.ly < min_ly {
                    return Err(Error::InvalidSpec(format!(
                        "ly = {} but {:?} needs at least {min_ly}",
                        self.ly, self.geometry
                    )));
                }
                if self.n_sites != self.lx * self.ly {
                    return Err(Error::InvalidSpec(format!(
                        "n_sites = {} but lx * ly = {}",
                        self.n_sites,
                        self.lx * self.ly
                    )));
                }
                let (a, b) = self.system_sites;
                if a >= self.n_sites || b >= self.n_sites {
                    return Err(Error::InvalidSpec(format!(
                        "system sites ({a}, {b}) out of range for {} sites",
                        self.n_sites
                    )));
                }
                if !self.are_adjacent(a, b) {
                    return Err(Error::InvalidSpec(format!(
                        "system sites ({a}, {b}) are not adjacent"
                    )));
                }
            }
            Geometry::FullyConnected => {
                if self.n_sites == 0 {
                    return Err(Error::InvalidSpec(
                        "fully connected graph needs at least one site".into(),
                    ));
                }
                if self.m == 0 || self.m > self.n_sites {
                    return Err(Error::InvalidSpec(format!(
                        "m = {} must satisfy 1 <= m <= N = {}",
                        self.m, self.n_sites
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        y * self.lx + x
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.lx, site / self.lx)
    }

    /// Distinct nearest-neighbour bonds `(i, j)` with `i < j`, in a fixed order.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds = Vec::with_capacity(2 * self.n_sites);
        if !self.geometry.is_2d() {
            return bonds;
        }
        let periodic_y = self.geometry == Geometry::Torus;
        for y in 0..self.ly {
            for x in 0..self.lx {
                let i = self.site(x, y);
                let jx = self.site((x + 1) % self.lx, y);
                bonds.push((i.min(jx), i.max(jx)));
                if y + 1 < self.ly || periodic_y {
                    let jy = self.site(x, (y + 1) % self.ly);
                    bonds.push((i.min(jy), i.max(jy)));
                }
            }
        }
        bonds
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        if a == b || !self.geometry.is_2d() {
            return false;
        }
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        let dx = ax.abs_diff(bx);
        let dy = ay.abs_diff(by);
        let x_adj = dy == 0 && (dx == 1 || dx == self.lx - 1);
        let y_adj = dx == 0 && (dy == 1 || (self.geometry == Geometry::Torus && dy == self.ly - 1));
        x_adj || y_adj
    }

    /// Sites outside the system pair, ascending.
    pub fn bath_sites(&self) -> Vec<usize> {
        let (a, b) = self.system_sites;
        (0..self.n_sites).filter(|&s| s != a && s != b).collect()
    }
}

/// Random bond modulation `r` and its strength `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBreakTerm {
    pub r: DMatrix<f64>,
    pub g: f64,
    pub seed: u64,
}

impl SymBreakTerm {
    pub fn sample(n: usize, g: f64, seed: u64) -> Result<Self> {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "g = {g} must be a finite non-negative number"
            )));
        }
        Ok(Self {
            r: sample_symmetric_uniform(n, seed)?,
            g,
            seed,
        })
    }

    /// Same realization at a different strength.
    pub fn with_strength(&self, g: f64) -> Self {
        Self {
            r: self.r.clone(),
            g,
            seed: self.seed,
        }
    }

    pub fn none(n: usize) -> Self {
        Self {
            r: DMatrix::zeros(n, n),
            g: 0.0,
            seed: 0,
        }
    }
}

/// Random coupling `r'` on the first `m` bath sites and its strength `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTerm {
    pub r_prime: DMatrix<f64>,
    pub k: f64,
    pub seed: u64,
}

impl CouplingTerm {
    pub fn sample(m: usize, k: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::InvalidSpec(format!("k = {k} must lie in [0, 1]")));
        }
        Ok(Self {
            r_prime: sample_symmetric_uniform(m, seed)?,
            k,
            seed,
        })
    }

    pub fn with_strength(&self, k: f64) -> Self {
        Self {
            r_prime: self.r_prime.clone(),
            k,
            seed: self.seed,
        }
    }
}

/// Pre- and post-quench Hamiltonians of one realization.
#[derive(Debug, Clone)]
pub struct HamiltonianPair {
    pub pre_quench: HermitianMatrix,
    pub post_quench: HermitianMatrix,
    pub dimension: usize,
}

/// How the connected model is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ConnectedMode {
    /// One particle in the bath: a `2N`-dimensional space.
    SingleParticle,
    /// `particles` spinless fermions in the bath: a `2 C(N, n)`-dimensional space.
    ManyBody { particles: usize },
}

/// Options for the fully connected bath.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConnectedOptions {
    /// Include the on-site `i = j` terms of the bath sum.
    pub include_onsite: bool,
}

/// Zero-diagonal symmetric matrix with `M_ij` for `i < j` drawn uniformly from
/// the open interval `(-1, 1)` in row-major order, mirrored below the diagonal.
pub fn sample_symmetric_uniform(n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidDimension(
            "symmetric sample needs n >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = loop {
                let v: f64 = rng.gen_range(-1.0..1.0);
                if v != -1.0 {
                    break v;
                }
            };
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` under `master_seed`.
pub fn realization_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

/// Seed for the coupling matrix `r'` of a realization.
pub fn coupling_seed(realization_seed: u64) -> u64 {
    splitmix64(realization_seed ^ 0xC0FF_EE00_D15E_A5E5)
}

fn check_sym(spec: &LatticeSpec, sym: &SymBreakTerm) -> Result<()> {
    if sym.r.nrows() != spec.n_sites || sym.r.ncols() != spec.n_sites {
        return Err(Error::InvalidSpec(format!(
            "symmetry-breaking matrix is {}x{}, lattice has {} sites",
            sym.r.nrows(),
            sym.r.ncols(),
            spec.n_sites
        )));
    }
    Ok(())
}

/// Tight-binding Hamiltonian on a torus or strip with bond modulation.
pub fn build_2d_hamiltonian(spec: &LatticeSpec, sym: &SymBreakTerm) -> Result<HermitianMatrix> {
    if !spec.geometry.is_2d() {
        return Err(Error::WrongBuilder(format!(
            "build_2d_hamiltonian called with {:?}",
            spec.geometry
        )));
    }
    spec.validate()?;
    check_sym(spec, sym)?;
    let n = spec.n_sites;
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, j) in spec.bonds() {
        let t = 1.0 + sym.g * sym.r[(i, j)];
        h[(i, j)] = t;
        h[(j, i)] = t;
    }
    HermitianMatrix::from_real(&h)
}

/// Copy of `h` with every bond between the system pair and the bath removed.
/// The bond inside the system pair is kept.
pub fn disconnect_system(h: &HermitianMatrix, spec: &LatticeSpec) -> Result<HermitianMatrix> {
    spec.validate()?;
    if !spec.geometry.is_2d() {
        return Err(Error::WrongBuilder(
            "disconnect_system needs a 2D lattice".into(),
        ));
    }
    if h.dim() != spec.n_sites {
        return Err(Error::DimensionMismatch {
            expected: spec.n_sites,
            got: h.dim(),
        });
    }
    let mut m = h.matrix().clone();
    let (a, b) = spec.system_sites;
    for s in [a, b] {
        for j in spec.bath_sites() {
            m[(s, j)] = crate::linalg::ZERO;
            m[(j, s)] = crate::linalg::ZERO;
        }
    }
    HermitianMatrix::new(m)
}

/// Pre-quench (disconnected) and post-quench Hamiltonians of a 2D lattice.
pub fn build_2d_pair(spec: &LatticeSpec, sym: &SymBreakTerm) -> Result<HamiltonianPair> {
    let post = build_2d_hamiltonian(spec, sym)?;
    let pre = disconnect_system(&post, spec)?;
    Ok(HamiltonianPair {
        dimension: post.dim(),
        pre_quench: pre,
        post_quench: post,
    })
}

/// Bath hopping matrix of the fully connected graph, `A_ij = 1 + g r_ij`.
pub fn connected_bath_matrix(
    spec: &LatticeSpec,
    sym: &SymBreakTerm,
    options: ConnectedOptions,
) -> Result<DMatrix<f64>> {
    if spec.geometry != Geometry::FullyConnected {
        return Err(Error::WrongBuilder(format!(
            "connected builder called with {:?}",
            spec.geometry
        )));
    }
    spec.validate()?;
    check_sym(spec, sym)?;
    let n = spec.n_sites;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i != j || options.include_onsite {
            1.0 + sym.g * sym.r[(i, j)]
        } else {
            0.0
        }
    }))
}

/// Coupling hopping matrix `B_pq = r'_pq` on the first `m` sites, zero elsewhere.
pub fn connected_coupling_matrix(spec: &LatticeSpec, coup: &CouplingTerm) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let m = spec.m;
    if coup.r_prime.nrows() != m || coup.r_prime.ncols() != m {
        return Err(Error::InvalidSpec(format!(
            "coupling matrix is {}x{}, m = {m}",
            coup.r_prime.nrows(),
            coup.r_prime.ncols()
        )));
    }
    let n = spec.n_sites;
    Ok(DMatrix::from_fn(n, n, |p, q| {
        if p < m && q < m && p != q {
            coup.r_prime[(p, q)]
        } else {
            0.0
        }
    }))
}

/// Spin–bath Hamiltonian `σx ⊗ 1 + 1 ⊗ A + k σz ⊗ B` and its `k = 0` partner.
///
/// The spin index is the slow index: basis state `(s, q)` sits at `s * D + q`
/// with `s = 0` for `+z`.
pub fn build_connected_hamiltonian(
    spec: &LatticeSpec,
    sym: &SymBreakTerm,
    coup: &CouplingTerm,
    mode: ConnectedMode,
    options: ConnectedOptions,
) -> Result<HamiltonianPair> {
    let a = connected_bath_matrix(spec, sym, options)?;
    let b = connected_coupling_matrix(spec, coup)?;
    match mode {
        ConnectedMode::SingleParticle => {
            let a = HermitianMatrix::from_real(&a)?;
            let b = HermitianMatrix::from_real(&b)?;
            let n = spec.n_sites;
            let id_bath = HermitianMatrix::identity(n);
            let id_spin = HermitianMatrix::identity(2);
            let pre = sigma_x().kron(&id_bath).add(&id_spin.kron(&a))?;
            let post = pre.add(&sigma_z().kron(&b).scale(coup.k))?;
            Ok(HamiltonianPair {
                dimension: 2 * n,
                pre_quench: pre,
                post_quench: post,
            })
        }
        ConnectedMode::ManyBody { particles } => {
            let basis = FockBasis::new(spec.n_sites, particles)?;
            let post = build_many_body_hamiltonian(&a, &b, coup.k, &basis)?;
            let pre = build_many_body_hamiltonian(&a, &b, 0.0, &basis)?;
            Ok(HamiltonianPair {
                dimension: post.dim(),
                pre_quench: pre,
                post_quench: post,
            })
        }
    }
}

/// The operator switched on by the quench.
///
/// For 2D lattices: the system–bath bonds removed by [`disconnect_system`].
/// For the fully connected graph: `Σ_{p≠q≤m} r'_pq c†_p c_q`, lifted to the
/// spin ⊗ bath space of `mode` as `1 ⊗ B`.
pub fn joining_operator(
    spec: &LatticeSpec,
    sym: &SymBreakTerm,
    coup: Option<&CouplingTerm>,
    mode: ConnectedMode,
) -> Result<HermitianMatrix> {
    if spec.geometry.is_2d() {
        let pair = build_2d_pair(spec, sym)?;
        return pair.post_quench.sub(&pair.pre_quench);
    }
    let coup = coup.ok_or_else(|| {
        Error::InvalidSpec("connected joining operator needs a coupling term".into())
    })?;
    let b = connected_coupling_matrix(spec, coup)?;
    match mode {
        ConnectedMode::SingleParticle => {
            Ok(HermitianMatrix::identity(2).kron(&HermitianMatrix::from_real(&b)?))
        }
        ConnectedMode::ManyBody { particles } => {
            let basis = FockBasis::new(spec.n_sites, particles)?;
            let qb = crate::engine::fock::second_quantize(&b, &basis)?;
            Ok(HermitianMatrix::identity(2).kron(&qb))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn count_unit_offdiag(h: &HermitianMatrix, row: usize) -> usize {
        (0..h.dim())
            .filter(|&j| j != row && (h.get(row, j).re - 1.0).abs() < 1e-15)
            .count()
    }

    #[test]
    fn symmetric_sample_is_symmetric_zero_diagonal() {
        let m = sample_symmetric_uniform(3, 11).unwrap();
        assert_eq!(m[(0, 1)], m[(1, 0)]);
        for i in 0..3 {
            assert_eq!(m[(i, i)], 0.0);
        }
    }

    #[test]
    fn symmetric_sample_is_bounded() {
        let m = sample_symmetric_uniform(100, 3).unwrap();
        assert!(m.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn symmetric_sample_is_deterministic() {
        assert_eq!(
            sample_symmetric_uniform(5, 7).unwrap(),
            sample_symmetric_uniform(5, 7).unwrap()
        );
        assert_ne!(
            sample_symmetric_uniform(5, 7).unwrap(),
            sample_symmetric_uniform(5, 8).unwrap()
        );
    }

    #[test]
    fn symmetric_sample_rejects_zero_dimension() {
        assert!(matches!(
            sample_symmetric_uniform(0, 1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn symmetric_sample_has_zero_mean() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..10_000u64 {
            let m = sample_symmetric_uniform(2, seed).unwrap();
            sum += m[(0, 1)];
            count += 1;
        }
        assert!((sum / count as f64).abs() < 0.05);
    }

    #[test]
    fn torus_rows_have_coordination_four() {
        let spec = LatticeSpec::torus(10, 10).unwrap();
        let h = build_2d_hamiltonian(&spec, &SymBreakTerm::none(100)).unwrap();
        for i in 0..100 {
            assert_eq!(count_unit_offdiag(&h, i), 4, "row {i}");
        }
    }

    #[test]
    fn strip_edges_have_coordination_three() {
        let spec = LatticeSpec::strip(10, 10).unwrap();
        let h = build_2d_hamiltonian(&spec, &SymBreakTerm::none(100)).unwrap();
        for x in 0..10 {
            assert_eq!(count_unit_offdiag(&h, spec.site(x, 0)), 3);
            assert_eq!(count_unit_offdiag(&h, spec.site(x, 9)), 3);
            assert_eq!(count_unit_offdiag(&h, spec.site(x, 5)), 4);
        }
    }

    // Enumerate bonds as a set: a periodic direction of length 2 maps the
    // forward and the wrap-around bond onto the same pair.
    fn distinct_bonds(lx: usize, ly: usize) -> usize {
        let mut set = BTreeSet::new();
        for y in 0..ly {
            for x in 0..lx {
                let i = y * lx + x;
                let jx = y * lx + (x + 1) % lx;
                let jy = ((y + 1) % ly) * lx + x;
                set.insert((i.min(jx), i.max(jx)));
                set.insert((i.min(jy), i.max(jy)));
            }
        }
        set.len()
    }

    #[test]
    fn small_periodic_extent_is_rejected() {
        assert_eq!(distinct_bonds(3, 3), 2 * 9);
        assert!(distinct_bonds(2, 3) < 2 * 6);
        assert!(distinct_bonds(3, 2) < 2 * 6);
        assert!(LatticeSpec::torus(2, 4).is_err());
        assert!(LatticeSpec::torus(4, 2).is_err());
        assert!(LatticeSpec::strip(2, 4).is_err());
        assert_eq!(LatticeSpec::torus(3, 3).unwrap().bonds().len(), 18);
    }

    #[test]
    fn wrong_builder_for_connected_geometry() {
        let spec = LatticeSpec::fully_connected(5, 2).unwrap();
        assert!(matches!(
            build_2d_hamiltonian(&spec, &SymBreakTerm::none(5)),
            Err(Error::WrongBuilder(_))
        ));
    }

    #[test]
    fn system_sites_must_be_adjacent() {
        let spec = LatticeSpec::torus(4, 4).unwrap();
        assert!(spec.clone().with_system_sites(0, 5).is_err());
        assert!(spec.clone().with_system_sites(0, 3).is_ok()); // x wrap
        assert!(spec.clone().with_system_sites(0, 12).is_ok()); // y wrap
        let strip = LatticeSpec::strip(4, 4).unwrap();
        assert!(strip.with_system_sites(0, 12).is_err());
    }

    #[test]
    fn disconnection_leaves_dimer_block() {
        let spec = LatticeSpec::torus(10, 10).unwrap();
        let h = build_2d_hamiltonian(&spec, &SymBreakTerm::none(100)).unwrap();
        let pre = disconnect_system(&h, &spec).unwrap();
        for s in [0, 1] {
            for b in spec.bath_sites() {
                assert_eq!(pre.get(s, b).norm(), 0.0);
            }
        }
        assert_eq!(pre.get(0, 1).re, 1.0);
    }

    fn permutation(n: usize, f: impl Fn(usize) -> usize) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            p[(f(i), i)] = 1.0;
        }
        p
    }

    #[test]
    fn translation_symmetry_of_torus_and_strip() {
        let l = 4;
        let shift_x = |spec: &LatticeSpec| {
            permutation(16, |s| {
                let (x, y) = spec.coords(s);
                spec.site((x + 1) % l, y)
            })
        };
        let shift_y = |spec: &LatticeSpec| {
            permutation(16, |s| {
                let (x, y) = spec.coords(s);
                spec.site(x, (y + 1) % l)
            })
        };
        let commutator_norm = |h: &DMatrix<f64>, p: &DMatrix<f64>| (h * p - p * h).abs().max();

        let torus = LatticeSpec::torus(l, l).unwrap();
        let h = build_2d_hamiltonian(&torus, &SymBreakTerm::none(16))
            .unwrap()
            .real_part();
        assert_eq!(commutator_norm(&h, &shift_x(&torus)), 0.0);
        assert_eq!(commutator_norm(&h, &shift_y(&torus)), 0.0);

        let strip = LatticeSpec::strip(l, l).unwrap();
        let h = build_2d_hamiltonian(&strip, &SymBreakTerm::none(16))
            .unwrap()
            .real_part();
        assert_eq!(commutator_norm(&h, &shift_x(&strip)), 0.0);
        assert!(commutator_norm(&h, &shift_y(&strip)) > 0.5);
    }

    #[test]
    fn joining_operator_is_quench_difference() {
        let spec = LatticeSpec::torus(5, 4).unwrap();
        let sym = SymBreakTerm::sample(20, 0.3, 9).unwrap();
        let pair = build_2d_pair(&spec, &sym).unwrap();
        let join = joining_operator(&spec, &sym, None, ConnectedMode::SingleParticle).unwrap();
        let diff = pair.post_quench.sub(&pair.pre_quench).unwrap();
        assert_eq!(diff, join);
        // six system-bath bonds on a torus (3 per system site)
        let nonzero = join.matrix().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 12);
    }

    #[test]
    fn connected_quench_difference_is_coupling() {
        let spec = LatticeSpec::fully_connected(6, 3).unwrap();
        let sym = SymBreakTerm::sample(6, 0.2, 1).unwrap();
        let coup = CouplingTerm::sample(3, 0.7, 2).unwrap();
        let pair = build_connected_hamiltonian(
            &spec,
            &sym,
            &coup,
            ConnectedMode::SingleParticle,
            ConnectedOptions::default(),
        )
        .unwrap();
        let diff = pair.post_quench.sub(&pair.pre_quench).unwrap();
        let b =
            HermitianMatrix::from_real(&connected_coupling_matrix(&spec, &coup).unwrap()).unwrap();
        let expected = sigma_z().kron(&b).scale(0.7);
        assert!(crate::linalg::max_abs(&(diff.matrix() - expected.matrix())) < 1e-15);
        let join =
            joining_operator(&spec, &sym, Some(&coup), ConnectedMode::SingleParticle).unwrap();
        assert_eq!(join, HermitianMatrix::identity(2).kron(&b));
        assert!(join.max_asymmetry() == 0.0);
    }

    #[test]
    fn connected_rejects_m_larger_than_n() {
        assert!(LatticeSpec::fully_connected(5, 6).is_err());
        assert!(LatticeSpec::fully_connected(5, 0).is_err());
    }

    #[test]
    fn coupling_strength_range() {
        assert!(CouplingTerm::sample(2, 1.5, 0).is_err());
        assert!(CouplingTerm::sample(2, -0.1, 0).is_err());
    }

    #[test]
    fn onsite_flag_adds_diagonal() {
        let spec = LatticeSpec::fully_connected(4, 2).unwrap();
        let sym = SymBreakTerm::none(4);
        let a = connected_bath_matrix(
            &spec,
            &sym,
            ConnectedOptions {
                include_onsite: true,
            },
        )
        .unwrap();
        assert_eq!(a[(0, 0)], 1.0);
        let a = connected_bath_matrix(&spec, &sym, ConnectedOptions::default()).unwrap();
        assert_eq!(a[(0, 0)], 0.0);
    }

    #[test]
    fn realization_seeds_are_distinct() {
        let seeds: BTreeSet<u64> = (0..1000).map(|i| realization_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
