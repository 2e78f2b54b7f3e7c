//! Sweep the time-filter window τ and watch the averaged mixing length
//! respond: small τ wipes it out, large τ grows it toward (and past) the
//! static scale.
//!
//! ```bash
//! cargo run --release --example tau_sweep
//! ```

use prandtl::config::ScenarioConfig;
use prandtl::runner::sweep;

fn main() -> prandtl::Result<()> {
    let base = ScenarioConfig {
        resolution: [48, 48],
        t_end_s: 6.0,
        re_nominal: Some(100.0),
        sample_every_steps: 10,
        ..Default::default()
    };
    let values = [0.01, 0.1, 1.0];
    let out = std::env::temp_dir().join("prandtl-examples").join("tau-sweep");
    let results = sweep(&base, "tau", &values, Some(&out))?;

    println!("{:>8} {:>14} {:>14}", "tau", "avg(l)/L", "avg(nuT)/LU");
    for (tau, r) in values.iter().zip(&results) {
        let fmt = |k: &str| {
            r.manifest
                .averages
                .get(k)
                .and_then(|v| *v)
                .map(|v| format!("{v:.6}"))
                .unwrap_or_else(|| "-".into())
        };
        println!("{tau:>8} {:>14} {:>14}", fmt("avg_l_over_L"), fmt("avg_nuT_over_LU"));
    }
    println!("summary: {}", out.join("sweep_summary.csv").display());
    Ok(())
}
