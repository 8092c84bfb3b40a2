//! Dispersive group on frequency blocks: L¹ bound for the kernel of
//! Δ_q e^{tL_α}, and Bernstein ratios over random blocks.

use alpha_patch::biot_savart::AlphaParam;
use alpha_patch::illposedness::tau_schedule;
use alpha_patch::spectral::{bernstein_check, kernel_bound_scan};

fn main() -> alpha_patch::Result<()> {
    let a = AlphaParam::new(0.25)?;
    let cases: Vec<(i32, f64)> = (4..=8)
        .flat_map(|q| {
            let tau = tau_schedule(q, a, 0.5).unwrap();
            [(q, tau), (q, 4.0 * tau)]
        })
        .collect();
    let r = kernel_bound_scan(a, &cases, 1)?;
    print!("{}", r.to_csv());
    println!("C = {}", r.meta["C"]);

    for q in [4, 6, 8] {
        let b = bernstein_check(q, a, 2.0, f64::INFINITY, 8, 7)?;
        println!("q = {q}: Lebesgue ratio {:.4}, dispersive ratio {:.4}", b.lebesgue, b.dispersive);
    }
    Ok(())
}
