//! Closing an arc with curvature ε κ_♯ by two bumps at ±h*.

use alpha_patch::bending::{bend_close, decomposition_defect, mirror_defect, BendOptions};
use alpha_patch::biot_savart::AlphaParam;
use alpha_patch::field::ScalarField;
use alpha_patch::illposedness::{default_delta_lp, default_eps_lp, WaingerData};

fn main() -> alpha_patch::Result<()> {
    let n = 2048;
    let a = AlphaParam::new(0.25)?;
    let (delta, _) = default_delta_lp(a, 1.2);
    let eps = default_eps_lp(a, 1.2, delta)?;
    let w = WaingerData::new(1.2, eps, n / 4)?.field(n)?.even_part();
    let m = w.mean();
    for (name, ks) in [("zero", ScalarField::constant(n, 0.0)), ("wainger", w.map(|v| v - m))] {
        let r = bend_close(&ks, BendOptions::default())?;
        println!(
            "{name:8} h* = {:.10}  ε = {:.3e}  gap/L = {:.1e}  turning = {:.12}  margin = {:.4}  mirror {:.1e}  split {:.1e}",
            r.h_star,
            r.epsilon,
            r.gap.abs() / r.curve.length(),
            r.turning,
            r.margin,
            mirror_defect(&r.curve),
            decomposition_defect(&r, &ks)
        );
    }
    Ok(())
}
