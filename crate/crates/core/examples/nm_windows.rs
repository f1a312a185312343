//! Non-Markovianity of the ensemble mean early and late after the quench.

use symbreak::experiments::{ensemble_run, nm_window_comparison, ModelConfig, QuenchConfig, TimeGrid};

fn main() -> symbreak::Result<()> {
    let config = QuenchConfig::new(
        ModelConfig::torus(6, 6)?,
        1e-6,
        0,
        TimeGrid::Windows {
            starts: vec![50.0, 1e8],
            length: 200.0,
            dt: 0.5,
        },
    );
    let ensemble = ensemble_run(&config, 20, 11)?;
    let report = nm_window_comparison(&ensemble, 50.0, 1e8, 200.0)?;

    for (label, w) in [("early", &report.early), ("late", &report.late)] {
        println!(
            "{label:>5} window at t = {:.0e}: mean of measure {:.4}, measure of mean {:.4}",
            w.start, w.mean_of_measure, w.measure_of_mean
        );
    }
    let (m_sigma, sigma_m) = ensemble.window_statistics(1e8, 1e8 + 200.0)?;
    println!("late window: M_sigma = {m_sigma:.4}, sigma_M = {sigma_m:.4}");
    Ok(())
}
