//! Run the full verification battery on a desk-sized configuration and print
//! one line per check.
//!
//! ```bash
//! cargo run --release --example verify_conditions
//! ```

use prandtl::config::ScenarioConfig;
use prandtl::verify::verify_all;

fn main() -> prandtl::Result<()> {
    // A shortened variant of the default scenario keeps this example quick;
    // the acceptance suite runs the full-length horizons.
    let cfg = ScenarioConfig {
        resolution: [48, 48],
        tau_s: 0.25,
        t_end_s: 5.0,
        sample_every_steps: 5,
        ..Default::default()
    };

    let out = std::env::temp_dir().join("prandtl-examples").join("verify");
    let (reports, overall) = verify_all(&cfg, Some(&out))?;
    for r in &reports {
        let status = if r.pass {
            "PASS"
        } else if !r.asserted {
            "INFO"
        } else {
            "FAIL"
        };
        println!("[{status}] {}", r.condition);
        for (name, value) in r.measured.iter().take(4) {
            println!("         {name}: {value}");
        }
    }
    println!("\noverall: {}", if overall { "pass" } else { "FAIL" });
    println!("reports in {}", out.display());
    Ok(())
}
