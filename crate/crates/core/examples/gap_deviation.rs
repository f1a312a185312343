//! Deviation of a degenerate gap of the connected model: quadratic in g.

use symbreak::model::{
    build_connected_hamiltonian, coupling_seed, ConnectedMode, ConnectedOptions, CouplingTerm,
    LatticeSpec, SymBreakTerm,
};
use symbreak::spectra::{gap_deviation, loglog_slope, matched_manifold_pair, spectrum_sweep, track_levels};

fn main() -> symbreak::Result<()> {
    let seed = 5;
    let spec = LatticeSpec::fully_connected(8, 2)?;
    let sym = SymBreakTerm::sample(8, 0.0, seed)?;
    let coup = CouplingTerm::sample(2, 1.0, coupling_seed(seed))?;
    let mut grid = vec![0.0];
    grid.extend((0..13).map(|i| 10f64.powf(-6.0 + 0.25 * i as f64)));

    let sweep = spectrum_sweep(
        "g",
        &grid,
        |g| {
            let pair = build_connected_hamiltonian(
                &spec,
                &sym.with_strength(g),
                &coup,
                ConnectedMode::SingleParticle,
                ConnectedOptions::default(),
            )?;
            Ok(pair.post_quench)
        },
        true,
    )?;
    let tracking = track_levels(&sweep);
    let pair = matched_manifold_pair(&sweep.manifolds).expect("spin doubles every bath manifold");
    let (dev, _) = gap_deviation(&sweep, &tracking, pair, false)?;

    println!("levels {pair:?}");
    for (g, d) in dev.times().iter().zip(dev.values()).skip(1) {
        println!("g = {g:.2e}  |gap - gap0| = {d:.3e}");
    }
    let fit = loglog_slope(&dev.times()[1..], &dev.values()[1..], None)?;
    println!("slope {:.4}", fit.slope);
    Ok(())
}
