//! Dephased long-time trace distance against the initial spin direction.

use symbreak::engine::{diagonalize, BathFilling, DephaseMode};
use symbreak::model::{
    build_connected_hamiltonian, connected_bath_matrix, coupling_seed, ConnectedMode, ConnectedOptions,
    CouplingTerm, LatticeSpec, SymBreakTerm,
};
use symbreak::observables::angle_scan;

fn main() -> symbreak::Result<()> {
    let (n, seed) = (10, 3);
    let spec = LatticeSpec::fully_connected(n, 2)?;
    let mode = ConnectedMode::ManyBody { particles: 2 };
    let options = ConnectedOptions::default();
    let sym = SymBreakTerm::sample(n, 0.1, seed)?;
    let coup = CouplingTerm::sample(2, 1.0, coupling_seed(seed))?;

    let h = build_connected_hamiltonian(&spec, &sym, &coup, mode, options)?.post_quench;
    let decomp = diagonalize(&h)?;
    let filling = BathFilling::new(&connected_bath_matrix(&spec, &SymBreakTerm::none(n), options)?, mode)?;
    let thetas: Vec<f64> = (0..13).map(|i| std::f64::consts::PI * i as f64 / 12.0).collect();
    let scan = angle_scan(&decomp, &filling, &thetas, DephaseMode::Eigenvectors)?;

    for (theta, d) in scan.times().iter().zip(scan.values()) {
        println!("theta = {:5.1} deg  D_inf = {d:.4}", theta.to_degrees());
    }
    Ok(())
}
