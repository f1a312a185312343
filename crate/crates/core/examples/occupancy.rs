//! Two-site occupancy density matrix of a filled lattice and its entropy.

use symbreak::engine::prepare_initial_pair_2d;
use symbreak::model::{build_2d_pair, LatticeSpec, SymBreakTerm};
use symbreak::observables::{occupancy_rdm, trace_distance, von_neumann_entropy, OccupancyCoherence};

fn main() -> symbreak::Result<()> {
    let spec = LatticeSpec::torus(6, 6)?;
    let pair = build_2d_pair(&spec, &SymBreakTerm::none(spec.n_sites))?;
    let (psi, psi_p) = prepare_initial_pair_2d(&pair.pre_quench, &spec)?;
    println!("{} orbitals on {} sites", psi.len(), psi.dim());

    let rho = occupancy_rdm(&psi, spec.system_sites, OccupancyCoherence::SystemSites)?;
    let rho_p = occupancy_rdm(&psi_p, spec.system_sites, OccupancyCoherence::SystemSites)?;
    println!("rho(psi) in the (both, first, second, neither) basis:");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:+.3}", rho.get(i, j).re)).collect();
        println!("  {}", row.join(" "));
    }
    println!("S = {:.3}, S' = {:.3}", von_neumann_entropy(&rho)?, von_neumann_entropy(&rho_p)?);
    println!("D = {:.3}", trace_distance(&rho, &rho_p)?);
    Ok(())
}
