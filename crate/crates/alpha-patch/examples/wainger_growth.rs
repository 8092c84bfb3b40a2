//! Growth of ‖Δ_q e^{τ_q L_α} f₀‖_p for Wainger data at p = 1.2.

use alpha_patch::biot_savart::AlphaParam;
use alpha_patch::illposedness::{default_delta_lp, first_stable_q, wainger_growth_scan, WaingerData};

fn main() -> alpha_patch::Result<()> {
    let a = AlphaParam::new(0.25)?;
    let p = 1.2;
    let (delta, fallback) = default_delta_lp(a, p);
    let n = 1 << 13;
    let w = WaingerData::new(p, 0.01, n / 4)?;
    let qs: Vec<i32> = (4..=9).collect();
    let r = wainger_growth_scan(&w, a, delta, &qs, n)?;
    print!("{}", r.to_csv());
    let verdicts: Vec<bool> = r.column("ratio").iter().map(|x| *x >= 1.0).collect();
    println!("δ = {delta} (fallback {fallback}), q₀ = {:?}", first_stable_q(&qs, &verdicts));
    Ok(())
}
