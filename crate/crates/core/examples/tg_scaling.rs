//! Median equilibration time on a 6x6 torus against g.

use symbreak::experiments::{
    tg_scaling_experiment, HorizonRule, HorizonSpacing, ModelConfig, QuenchConfig, ScalingParameter,
    TimeGrid,
};

fn main() -> symbreak::Result<()> {
    let config = QuenchConfig::new(ModelConfig::torus(6, 6)?, 0.0, 0, TimeGrid::linear(0.0, 1.0, 0.5));
    let rule = HorizonRule {
        factor: 100.0,
        exponent: 1.0,
        spacing: HorizonSpacing::Linear { dt: 0.5 },
    };
    let result = tg_scaling_experiment(&config, ScalingParameter::G, &[0.003, 0.01, 0.03, 0.1], 8, 2024, &rule)?;

    for row in &result.rows {
        println!(
            "g = {:<5}  median t_g = {:8.2}  mean = {:8.2}  censored {}/{}",
            row.param, row.tg_median, row.tg_mean, row.n_censored, row.n_total
        );
    }
    match &result.fit {
        Some(fit) => println!("t_g ~ g^{:.3}  (r2 {:.4})", fit.slope, fit.r_squared),
        None => println!("no fit: {}", result.fit_error.unwrap_or_default()),
    }
    Ok(())
}
