use alpha_patch::bending::{make_initial_patch, mirror_defect, BendOptions, PatchSpec};
use alpha_patch::biot_savart::AlphaParam;
use alpha_patch::evolution::{perturbed_circle, run, DtPolicy, RunConfig};
use alpha_patch::field::ScalarField;
use alpha_patch::illposedness::{
    assumption_check, pairing_scan, wainger_growth_scan, FbarMap, Forcing, PairingConfig, TestFunctions, WaingerData,
};

fn a(v: f64) -> AlphaParam {
    AlphaParam::new(v).unwrap()
}

#[test]
fn holder_patch_evolves_briefly() {
    let patch = make_initial_patch(PatchSpec::Holder { beta: 0.5 }, a(0.25), 1024, BendOptions::default()).unwrap();
    assert!(mirror_defect(&patch.bend.curve) < 1e-8);
    let cfg = RunConfig { t_end: 0.02, dt: DtPolicy::Fixed(1e-3), output_every: 5, ..Default::default() };
    let series = run(&patch.bend.curve, &cfg).unwrap();
    assert!(series.failure.is_none(), "{:?}", series.failure);
    let area = series.report.column("area");
    assert!(area.iter().all(|x| (x / area[0] - 1.0).abs() < 1e-5), "{area:?}");
    assert!(series.report.column("kappa_L2").iter().all(|x| x.is_finite()));
}

#[test]
fn growth_scan_csv_is_reproducible() {
    let w = WaingerData::new(1.2, 0.01, 1 << 11).unwrap();
    let qs: Vec<i32> = (4..=9).collect();
    let one = wainger_growth_scan(&w, a(0.25), 0.5, &qs, 1 << 13).unwrap().to_csv();
    let two = wainger_growth_scan(&w, a(0.25), 0.5, &qs, 1 << 13).unwrap().to_csv();
    assert_eq!(one, two);
    assert_eq!(one.lines().count(), qs.len() + 1);
}

#[test]
fn pure_group_pairing_is_exact() {
    let n = 1 << 12;
    let f0 = WaingerData::new(1.2, 0.01, n / 4).unwrap().field(n).unwrap();
    let cfg = PairingConfig {
        alpha: a(0.25),
        delta: 0.5,
        eps: 0.01,
        p: 1.2,
        q_range: vec![5, 6, 7],
        fbar_map: FbarMap::Identity,
        forcing: Forcing::Zero,
        test: TestFunctions::LpMaximizer { p: 1.2 },
        min_steps: 16,
    };
    let r = pairing_scan(&f0, &cfg).unwrap();
    for (l, rr) in r.column("L").iter().zip(r.column("R")) {
        assert!(l.abs() < 1e-10 && rr.abs() < 1e-10, "{l} {rr}");
    }
    assert!(r.column("R_bound").iter().all(|b| *b == 0.0));
}

#[test]
fn patch_run_metric_constant_is_finite() {
    let c = perturbed_circle(256, 4, 0.05).unwrap();
    let cfg = RunConfig { t_end: 0.05, dt: DtPolicy::Fixed(2.5e-3), renormalize_every: 0, keep_states: true, ..Default::default() };
    let series = run(&c, &cfg).unwrap();
    let g0 = series.states[0].g.clone();
    let g_series: Vec<(f64, ScalarField)> =
        series.states.iter().map(|s| (s.t, s.g.zip_map(&g0, |g, h| g / h))).collect();
    let rep = assumption_check(&g_series, &Forcing::Zero, a(0.25), 1.2, 0.5).unwrap();
    assert!(rep.metric_constant.is_finite() && rep.metric_constant > 0.0, "{rep:?}");
    assert_eq!(rep.forcing_constant, 0.0);
}
