//! Fixed-particle-number Fock basis and a filled Slater determinant.

use nalgebra::DVector;
use symbreak::engine::fock::second_quantize_real;
use symbreak::engine::{diagonalize, slater_amplitudes, FockBasis};
use symbreak::linalg::{HermitianMatrix, C64};
use symbreak::model::{connected_bath_matrix, ConnectedOptions, LatticeSpec, SymBreakTerm};

fn main() -> symbreak::Result<()> {
    let (n, particles) = (8, 3);
    let spec = LatticeSpec::fully_connected(n, 2)?;
    let hop = connected_bath_matrix(&spec, &SymBreakTerm::sample(n, 0.2, 9)?, ConnectedOptions::default())?;
    let basis = FockBasis::new(n, particles)?;
    println!("C({n}, {particles}) = {} states", basis.len());
    for i in 0..4 {
        println!("  {:0width$b} -> sites {:?}", basis.state(i), basis.occupied_sites(i), width = n);
    }

    let single = diagonalize(&HermitianMatrix::from_real(&hop)?)?;
    let filled: f64 = single.eigenvalues()[..particles].iter().sum();
    let v = single.real_vectors().expect("real hopping");
    let orbitals: Vec<DVector<C64>> = (0..particles)
        .map(|l| v.column(l).map(|x| C64::new(x, 0.0)))
        .collect();
    let slater = slater_amplitudes(&orbitals, &basis)?;

    let many = HermitianMatrix::from_real(&second_quantize_real(&hop, &basis)?)?;
    let energy = slater.dotc(&many.apply(&slater)?).re;
    println!("sum of filled levels {filled:.10}");
    println!("Slater energy        {energy:.10}");
    Ok(())
}
