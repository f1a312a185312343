//! Paired quench on a 10x10 torus at g = 0: recurrences of the trace distance.

use symbreak::experiments::{reconstruction_peaks, run_quench, ModelConfig, QuenchConfig, TimeGrid};
use symbreak::observables::series::mean;

fn main() -> symbreak::Result<()> {
    let config = QuenchConfig::new(
        ModelConfig::torus(10, 10)?,
        0.0,
        1,
        TimeGrid::linear(0.0, 2000.0, 0.5),
    );
    let result = run_quench(&config)?;
    let d = &result.trace_distance;
    let peaks = reconstruction_peaks(d, config.tg.peak_threshold);

    println!("D(0) = {:.3}", d.values()[0]);
    println!("mean D over [200, 2000] = {:.3}", mean(d.window(200.0, 2000.0)));
    println!("{} reconstruction peaks above {}", peaks.len(), config.tg.peak_threshold);
    for &i in peaks.iter().take(8) {
        println!("  t = {:7.1}  D = {:.3}", d.times()[i], d.values()[i]);
    }
    if let Some(s) = &result.entropy {
        println!("entropy at t = 2000: {:.3}", s.values()[s.len() - 1]);
    }
    Ok(())
}
