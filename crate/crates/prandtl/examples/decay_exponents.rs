//! Free-decay behavior of the three mixing-length modes.
//!
//! With zero velocity the k-equation reduces to `k' = -k^(3/2)/l(k)`. The
//! kinematic scale gives exponential decay, a constant static scale gives the
//! power law `t^-2`, and the geometric blend with θ = 2/1.3 reproduces the
//! classic `t^-1.3` grid-turbulence decay.
//!
//! ```bash
//! cargo run --release --example decay_exponents
//! ```

use prandtl::closure::{decay_ode_oracle, DecayMode, SQRT2};
use prandtl::verify::check_decay_exponents;

fn main() -> prandtl::Result<()> {
    println!("closed-form / high-accuracy ODE oracle:");
    let kin = decay_ode_oracle(1.0, DecayMode::Kinematic { tau: 1.0 }, SQRT2);
    println!("  kinematic  k(sqrt 2)/k0 = {kin:.6}  (exp(-1) = {:.6})", (-1.0f64).exp());
    let stat = decay_ode_oracle(1.0, DecayMode::StaticConst { l: 1.0 }, 2.0);
    println!("  static     k(2)/k0      = {stat:.6}  (closed form 0.25)");
    let theta = 2.0 / 1.3;
    let geo = decay_ode_oracle(1.0, DecayMode::Geometric { theta, l0: 1.0, tau: 1.0 }, 10.0);
    println!("  geometric  k(10)/k0     = {geo:.6}  (theta = {theta:.4})");

    println!("\nfield solver late-time decay fits:");
    let report = check_decay_exponents()?;
    for (name, value) in &report.measured {
        println!("  {name} = {value}");
    }
    println!("pass: {}", report.pass);
    Ok(())
}
