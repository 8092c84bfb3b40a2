//! Contour dynamics of a perturbed circle with CFL-limited RK4 steps.

use alpha_patch::evolution::{perturbed_circle, run, DtPolicy, RunConfig};

fn main() -> alpha_patch::Result<()> {
    let c = perturbed_circle(256, 3, 0.05)?;
    let cfg = RunConfig { t_end: 0.5, dt: DtPolicy::Cfl { c: 0.2, max: 0.01 }, output_every: 10, ..Default::default() };
    let series = run(&c, &cfg)?;
    print!("{}", series.report.to_csv());
    match series.failure {
        Some(f) => println!("stopped: {f}"),
        None => println!("completed to t = {}", cfg.t_end),
    }
    Ok(())
}
