//! Correlation of the joining operator with itself on a torus.

use symbreak::engine::{diagonalize, prepare_initial_pair_2d};
use symbreak::model::{build_2d_pair, joining_operator, ConnectedMode, LatticeSpec, SymBreakTerm};
use symbreak::observables::{bath_correlation, CorrelationKind};

fn main() -> symbreak::Result<()> {
    let spec = LatticeSpec::torus(10, 10)?;
    let sym = SymBreakTerm::none(spec.n_sites);
    let pair = build_2d_pair(&spec, &sym)?;
    let (psi, _) = prepare_initial_pair_2d(&pair.pre_quench, &spec)?;
    let b = joining_operator(&spec, &sym, None, ConnectedMode::SingleParticle)?;
    let decomp = diagonalize(&pair.post_quench)?;
    let system = psi.system_orbital().expect("dimer orbital is marked");

    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
    let c = bath_correlation(&decomp, &b, system, &times, CorrelationKind::StateOverlap)?;
    for (t, v) in c.times().iter().zip(c.values()).step_by(4) {
        println!("t = {t:.1}  C = {v:.4}");
    }
    Ok(())
}
