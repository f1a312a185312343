//! Fixed-particle-number fermionic basis and second quantization.
//!
//! Occupations are `u64` bitmasks with bit `i` for site `i`, listed in
//! ascending numeric order. A basis state is `c†_{i1} … c†_{in} |0⟩` with
//! `i1 < … < in`, so `c†_i c_j` picks up the sign
//! `(−1)^{#occupied sites strictly between i and j}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, C64};

/// Default cap on the spin ⊗ Fock dimension.
pub const DEFAULT_MAX_DIM: usize = 50_000;

/// Environment variable that overrides [`DEFAULT_MAX_DIM`].
pub const MAX_DIM_ENV: &str = "SYMBREAK_MAX_DIM";

/// Active dimension cap.
pub fn dimension_cap() -> usize {
    std::env::var(MAX_DIM_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DIM)
}

/// Binomial coefficient, saturating at `usize::MAX`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_sites: usize,
    n_particles: usize,
    states: Vec<u64>,
}

impl FockBasis {
    /// Enumerates all `C(N, n)` occupations. Fails with a resource-limit
    /// error when the spin ⊗ Fock dimension `2 C(N, n)` exceeds [`dimension_cap`].
    pub fn new(n_sites: usize, n_particles: usize) -> Result<Self> {
        Self::with_cap(n_sites, n_particles, dimension_cap())
    }

    pub fn with_cap(n_sites: usize, n_particles: usize, cap: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > 64 {
            return Err(Error::InvalidDimension(format!(
                "{n_sites} sites; need 1..=64"
            )));
        }
        if n_particles == 0 || n_particles > n_sites {
            return Err(Error::InvalidDimension(format!(
                "{n_particles} particles on {n_sites} sites"
            )));
        }
        let size = binomial(n_sites, n_particles);
        let dimension = size.saturating_mul(2);
        if dimension > cap {
            return Err(Error::ResourceLimit { dimension, cap });
        }
        let mut states = Vec::with_capacity(size);
        let mut s: u64 = if n_particles == 64 {
            u64::MAX
        } else {
            (1u64 << n_particles) - 1
        };
        while states.len() < size {
            states.push(s);
            if states.len() == size {
                break;
            }
            // next integer with the same popcount
            let c = s & s.wrapping_neg();
            let r = s + c;
            s = (((r ^ s) >> 2) / c) | r;
        }
        Ok(Self {
            n_sites,
            n_particles,
            states,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn index_of(&self, occupation: u64) -> Option<usize> {
        self.states.binary_search(&occupation).ok()
    }

    /// Occupied sites of a basis state, ascending.
    pub fn occupied_sites(&self, index: usize) -> Vec<usize> {
        let s = self.states[index];
        (0..self.n_sites).filter(|&i| s >> i & 1 == 1).collect()
    }
}

fn hopping_sign(s: u64, i: usize, j: usize) -> f64 {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let between = if hi - lo <= 1 {
        0
    } else {
        let mask = ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1);
        (s & mask).count_ones()
    };
    if between % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_symmetric(m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows(),
        });
    }
    let asym = (m - m.transpose()).abs().max();
    if asym > 0.0 {
        return Err(Error::NotHermitian {
            max_asymmetry: asym,
            tolerance: 0.0,
        });
    }
    Ok(())
}

/// Real matrix of `Σ_ij M_ij c†_i c_j` on `basis`.
pub fn second_quantize_real(m: &DMatrix<f64>, basis: &FockBasis) -> Result<DMatrix<f64>> {
    let n = basis.n_sites();
    check_symmetric(m, n)?;
    let dim = basis.len();
    let mut q = DMatrix::zeros(dim, dim);
    for (col, &s) in basis.states().iter().enumerate() {
        for j in 0..n {
            if s >> j & 1 == 0 {
                continue;
            }
            // diagonal term: n_j
            q[(col, col)] += m[(j, j)];
            let without = s & !(1u64 << j);
            for i in 0..n {
                if i == j || without >> i & 1 == 1 {
                    continue;
                }
                let mij = m[(i, j)];
                if mij == 0.0 {
                    continue;
                }
                let target = without | (1u64 << i);
                let row = basis
                    .index_of(target)
                    .expect("hop preserves particle number");
                q[(row, col)] += hopping_sign(s, i, j) * mij;
            }
        }
    }
    Ok(q)
}

/// [`second_quantize_real`] wrapped as a Hermitian matrix.
pub fn second_quantize(m: &DMatrix<f64>, basis: &FockBasis) -> Result<HermitianMatrix> {
    HermitianMatrix::from_real(&second_quantize_real(m, basis)?)
}

/// `σx ⊗ 1 + 1 ⊗ Q(A) + k σz ⊗ Q(B)` on spin ⊗ Fock space, spin index major.
pub fn build_many_body_hamiltonian(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    k: f64,
    basis: &FockBasis,
) -> Result<HermitianMatrix> {
    let d = basis.len();
    let dimension = 2 * d;
    let cap = dimension_cap();
    if dimension > cap {
        return Err(Error::ResourceLimit { dimension, cap });
    }
    let qa = second_quantize_real(a, basis)?;
    let qb = second_quantize_real(b, basis)?;
    let mut h = DMatrix::zeros(dimension, dimension);
    for i in 0..d {
        h[(i, d + i)] = 1.0;
        h[(d + i, i)] = 1.0;
    }
    for c in 0..d {
        for r in 0..d {
            h[(r, c)] = qa[(r, c)] + k * qb[(r, c)];
            h[(d + r, d + c)] = qa[(r, c)] - k * qb[(r, c)];
        }
    }
    HermitianMatrix::from_real(&h)
}

/// Fock amplitudes of the Slater determinant `c†_{φ1} … c†_{φn} |0⟩`.
///
/// The amplitude on occupation `i1 < … < in` is `det[φ_a(i_b)]`.
pub fn slater_amplitudes(orbitals: &[DVector<C64>], basis: &FockBasis) -> Result<DVector<C64>> {
    let n = basis.n_particles();
    if orbitals.len() != n {
        return Err(Error::InvalidState(format!(
            "{} orbitals for {n} particles",
            orbitals.len()
        )));
    }
    for o in orbitals {
        crate::linalg::check_dim(basis.n_sites(), o.len())?;
    }
    let mut amps = DVector::from_element(basis.len(), C64::new(0.0, 0.0));
    for idx in 0..basis.len() {
        let sites = basis.occupied_sites(idx);
        let minor = DMatrix::from_fn(n, n, |b, a| orbitals[a][sites[b]]);
        amps[idx] = minor.determinant();
    }
    Ok(amps)
}
