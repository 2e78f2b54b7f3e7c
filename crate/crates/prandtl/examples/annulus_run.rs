//! Run the obstructed-disk scenario with the kinematic mixing length and
//! print the headline statistics.
//!
//! ```bash
//! cargo run --release --example annulus_run
//! ```

use prandtl::config::ScenarioConfig;
use prandtl::runner;

fn main() -> prandtl::Result<()> {
    let cfg = ScenarioConfig {
        resolution: [64, 64],
        t_end_s: 10.0,
        snapshot_times_s: vec![1.0, 5.0, 10.0],
        run_name: Some("annulus-kinematic".into()),
        ..Default::default()
    };

    let out = std::env::temp_dir().join("prandtl-examples").join("annulus");
    let result = runner::run(&cfg, Some(&out))?;

    let d = &result.manifest.diagnostics;
    println!("steps            : {}", d.steps);
    println!("wall time        : {:.1}s", d.wall_seconds);
    println!("max |div v|      : {:.2e}", d.max_div_inf);
    println!("max CFL          : {:.2}", d.max_cfl);
    println!("clamped k mass   : {:.2e}", d.total_clamped_mass);
    if let Some(scales) = &result.scales {
        println!(
            "scales           : F={:.3} L={:.3} U={:.3} Re={:.0} T*={:.3}",
            scales.force_scale, scales.length, scales.velocity, scales.re, scales.t_star
        );
    }
    for (name, avg) in &result.manifest.averages {
        if let Some(v) = avg {
            println!("⟨{name}⟩ = {v:.5}");
        }
    }
    println!("outputs in {}", out.display());
    Ok(())
}
