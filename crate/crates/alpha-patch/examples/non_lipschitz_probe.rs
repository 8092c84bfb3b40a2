//! Normal strain ∂_s v·N near a curvature singularity of strength ε: the
//! dyadic increments grow like s^{−ε}. Pass the log₂ grid size as the first
//! argument (default 18).

use alpha_patch::biot_savart::{non_lipschitz_probe, AlphaParam, ProbeOptions};

fn main() -> alpha_patch::Result<()> {
    let log_n: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(18);
    let a = AlphaParam::new(0.3)?;
    let eps = 0.05;
    let s: Vec<f64> = (4..=9).map(|k| 2f64.powi(-k)).collect();
    let r = non_lipschitz_probe(a, 2.0, eps, &s, ProbeOptions { n: 1 << log_n, ..Default::default() })?;
    print!("{}", r.report.to_csv());
    println!("raw slope {:.4}, increment slope {:.4}, target −ε = {}", r.raw_slope, r.increment_slope, -eps);
    Ok(())
}
