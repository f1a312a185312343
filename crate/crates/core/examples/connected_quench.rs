//! Spin coupled to a fully connected bath of 3 fermions on 12 sites.

use symbreak::experiments::{run_quench, ModelConfig, QuenchConfig, TimeGrid};

fn main() -> symbreak::Result<()> {
    let mut config = QuenchConfig::new(
        ModelConfig::connected(12, 2, Some(3), 1.0)?,
        0.1,
        7,
        TimeGrid::log(1.0, 1e4, 200),
    );
    config.tg.persistence = 20;
    let result = run_quench(&config)?;
    let tg = result.tg(&config);
    match tg.tg {
        Some(t) => println!("t_g = {t:.1}"),
        None => println!("no equilibration before t = 1e4"),
    }

    let d = &result.trace_distance;
    let s = result.entropy.as_ref().expect("entropy is on by default");
    for i in (0..d.len()).step_by(25) {
        println!("t = {:10.2}  D = {:.4}  S = {:.4}", d.times()[i], d.values()[i], s.values()[i]);
    }
    Ok(())
}
