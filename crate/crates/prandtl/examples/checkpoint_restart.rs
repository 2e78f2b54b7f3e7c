//! Bit-reproducible restarts: run to t=1, checkpoint at t=0.5, restart from
//! the checkpoint, and confirm the final states are byte-identical.
//!
//! ```bash
//! cargo run --release --example checkpoint_restart
//! ```

use prandtl::config::{KInit, ScenarioConfig, ScenarioKind};
use prandtl::runner::run;

fn main() -> prandtl::Result<()> {
    let base = ScenarioConfig {
        scenario: ScenarioKind::PeriodicBox,
        resolution: [32, 32],
        dt_s: 0.01,
        t_end_s: 1.0,
        k_init: KInit::Uniform,
        k0_uniform_m2s2: 1e-3,
        checkpoint_times_s: vec![0.5],
        run_name: Some("straight".into()),
        ..Default::default()
    };

    let root = std::env::temp_dir().join("prandtl-examples").join("restart");
    let straight_dir = root.join("straight");
    run(&base, Some(&straight_dir))?;

    let restart_cfg = ScenarioConfig {
        restart_from: Some(straight_dir.join("checkpoint_t0.5000.ckpt")),
        checkpoint_times_s: vec![],
        run_name: Some("restarted".into()),
        ..base
    };
    let restart_dir = root.join("restarted");
    run(&restart_cfg, Some(&restart_dir))?;

    let a = std::fs::read(straight_dir.join("final.ckpt"))?;
    let b = std::fs::read(restart_dir.join("final.ckpt"))?;
    println!("straight run final state : {} bytes", a.len());
    println!("restarted final state    : {} bytes", b.len());
    println!("byte-identical           : {}", a == b);
    assert_eq!(a, b, "restart must reproduce the straight run bit for bit");
    Ok(())
}
