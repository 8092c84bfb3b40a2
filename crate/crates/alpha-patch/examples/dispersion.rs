//! Phase rates of small boundary modes against −c_α k^{2α}.

use alpha_patch::biot_savart::AlphaParam;
use alpha_patch::evolution::{dispersion_fit, perturbed_circle, run, DtPolicy, RunConfig};

fn main() -> alpha_patch::Result<()> {
    let a = AlphaParam::new(0.25)?;
    for k in [8usize, 16] {
        let c = perturbed_circle(512, k, 1e-3)?;
        let cfg = RunConfig { t_end: 0.1, dt: DtPolicy::Fixed(0.0025), keep_states: true, ..Default::default() };
        let series = run(&c, &cfg)?;
        let fit = dispersion_fit(&series.states, a, &[k as i64])?;
        let m = &fit.modes[0];
        println!("k = {k:2}: ω = {:.4}, predicted {:.4}, relative error {:.4}", m.omega, m.predicted, m.rel_error);
    }
    Ok(())
}
