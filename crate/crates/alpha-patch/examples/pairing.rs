//! Pairing identity L_q = R_q along a linearized flow with a ramped metric,
//! and the growth and decay slopes of P_q and the R_q majorant.

use alpha_patch::biot_savart::AlphaParam;
use alpha_patch::field::ScalarField;
use alpha_patch::illposedness::{
    default_delta_lp, default_eps_lp, fitted_log2_slope, pairing_scan, FbarMap, Forcing, MetricModel, PairingConfig, TestFunctions,
    WaingerData,
};

fn main() -> alpha_patch::Result<()> {
    let a = AlphaParam::new(0.25)?;
    let p = 1.2;
    let n = 1 << 13;
    let (delta, _) = default_delta_lp(a, p);
    let eps = default_eps_lp(a, p, delta)?;
    let f0 = WaingerData::new(p, eps, n / 4)?.field(n)?;
    let cfg = PairingConfig {
        alpha: a,
        delta,
        eps,
        p,
        q_range: (6..=9).collect(),
        fbar_map: FbarMap::Metric(MetricModel::Ramp(ScalarField::from_fn(n, |x| 0.1 * x.cos()))),
        forcing: Forcing::Zero,
        test: TestFunctions::LpMaximizer { p },
        min_steps: 16,
    };
    let r = pairing_scan(&f0, &cfg)?;
    print!("{}", r.to_csv());
    println!("ε = {eps:.6}");
    for col in ["P", "R", "R_bound"] {
        println!("log₂ slope of {col}: {:.4}", fitted_log2_slope(&r, col));
    }
    Ok(())
}
