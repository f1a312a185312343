//! Width of a degenerate torus manifold as g grows: linear in g.

use symbreak::model::{build_2d_hamiltonian, LatticeSpec, SymBreakTerm};
use symbreak::spectra::{loglog_slope, manifold_widths, spectrum_sweep, track_levels};

fn main() -> symbreak::Result<()> {
    let spec = LatticeSpec::torus(10, 10)?;
    let sym = SymBreakTerm::sample(spec.n_sites, 0.0, 1)?;
    let mut grid = vec![0.0];
    grid.extend((0..13).map(|i| 10f64.powf(-6.0 + 0.25 * i as f64)));

    let sweep = spectrum_sweep("g", &grid, |g| build_2d_hamiltonian(&spec, &sym.with_strength(g)), true)?;
    let tracking = track_levels(&sweep);
    let manifold = sweep.manifolds.iter().find(|m| m.len() > 1).cloned().expect("torus is degenerate");
    let widths = manifold_widths(&sweep, &tracking, manifold.clone());

    println!("manifold {:?} at E = {:.4}", manifold, sweep.eigenvalues[0][manifold.start]);
    for (g, w) in grid.iter().zip(&widths).skip(1) {
        println!("g = {g:.2e}  width = {w:.3e}");
    }
    let fit = loglog_slope(&grid[1..], &widths[1..], None)?;
    println!("slope {:.4} (r2 {:.5})", fit.slope, fit.r_squared);
    Ok(())
}
