use std::collections::BTreeMap;
use std::fmt::Write as _;

use alpha_patch::bending::{self, BendOptions, EpsilonPolicy, PatchSpec};
use alpha_patch::biot_savart::{self, AlphaParam, ProbeOptions};
use alpha_patch::curve_geometry::{curvature, random_star, read_field, resample_arclength, star_curve, ClosedCurve, Point};
use alpha_patch::evolution::{self, DtPolicy, RunConfig};
use alpha_patch::field::{grid_point, ScalarField};
use alpha_patch::illposedness::{self as ip, FbarMap, Forcing, MetricModel, PairingConfig, TestFunctions, WaingerData};
use alpha_patch::report::ScanReport;
use alpha_patch::spectral::{self, LpCutoff};
use serde_json::{json, Value};

use crate::artifacts::ArtifactDir;
use crate::config::{self, BendCfg, KappaSource, KernelCfg, MetricKind, ProbeCfg, ScanCfg, ScanMode, ShapeCfg, SimulateCfg, SpectraCfg};
use crate::exit::CliError;

/// What a subcommand leaves for the manifest.
#[derive(Default)]
pub struct Outcome {
    pub results: BTreeMap<String, Value>,
    /// Set when the run stopped on a numerical rejection after writing partial artifacts.
    pub failure: Option<String>,
}

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

fn alpha(v: f64) -> Result<AlphaParam, CliError> {
    Ok(AlphaParam::new(v)?)
}

fn write_report(art: &mut ArtifactDir, name: &str, r: &ScanReport, out: &mut Outcome) -> Result<(), CliError> {
    art.write(name, r.to_csv().as_bytes())?;
    out.results.insert(name.to_string(), serde_json::to_value(&r.meta).expect("meta serializes"));
    Ok(())
}

pub fn build_shape(shape: &ShapeCfg, n: usize, seed: u64, art: &mut ArtifactDir) -> Result<ClosedCurve, CliError> {
    if n < 16 {
        return Err(usage(format!("n = {n} is below the minimum of 16")));
    }
    match shape {
        ShapeCfg::Circle { radius } => {
            if !(*radius > 0.0) {
                return Err(usage("circle radius must be positive"));
            }
            Ok(star_curve(n, *radius, &[])?)
        }
        ShapeCfg::Ellipse { a, b } => {
            if !(*a > 0.0 && *b > 0.0) {
                return Err(usage("ellipse semi-axes must be positive"));
            }
            let nodes: Vec<Point> = (0..n)
                .map(|j| {
                    let x = grid_point(j, n);
                    [a * x.cos(), b * x.sin()]
                })
                .collect();
            Ok(ClosedCurve::new(&nodes)?)
        }
        ShapeCfg::PerturbedCircle { mode, amplitude } => Ok(evolution::perturbed_circle(n, *mode, *amplitude)?),
        ShapeCfg::RandomStar { modes, amplitude } => Ok(random_star(n, *modes, *amplitude, seed)?),
        ShapeCfg::File { path } => {
            art.record_input(path)?;
            Ok(ClosedCurve::read_file(path)?)
        }
    }
}

pub fn simulate(cfg: &SimulateCfg, seed: u64, art: &mut ArtifactDir) -> Result<Outcome, CliError> {
    if !(cfg.dt > 0.0) || !(cfg.t_end >= 0.0) {
        return Err(usage(format!("need dt > 0 and t_end ≥ 0 (dt = {}, t_end = {})", cfg.dt, cfg.t_end)));
    }
    alpha(cfg.alpha)?;
    let curve = build_shape(&cfg.initial, cfg.n, seed, art)?;
    let run_cfg = RunConfig {
        alpha: cfg.alpha,
        dt: match cfg.cfl {
            Some(c) if c > 0.0 => DtPolicy::Cfl { c, max: cfg.dt },
            Some(c) => return Err(usage(format!("cfl = {c} must be positive"))),
            None => DtPolicy::Fixed(cfg.dt),
        },
        t_end: cfg.t_end,
        renormalize_every: cfg.renormalize_every,
        n: Some(cfg.n),
        output_every: cfg.output_every,
        filter: cfg.filter,
        p_list: cfg.p_list.clone(),
        beta: cfg.beta,
        keep_states: cfg.snapshot_every > 0,
    };
    let series = evolution::run(&curve, &run_cfg)?;
    let mut out = Outcome::default();
    write_report(art, "diagnostics.csv", &series.report, &mut out)?;
    if cfg.snapshot_every > 0 {
        for (i, s) in series.states.iter().enumerate().step_by(cfg.snapshot_every) {
            art.write(&format!("snapshots/curve_{i:05}.txt"), s.curve.to_text().as_bytes())?;
        }
    }
    art.write("final_curve.txt", series.final_state.curve.to_text().as_bytes())?;
    out.failure = series.failure.map(|f| if f.starts_with("step rejected") { f } else { format!("step rejected: {f}") });
    Ok(out)
}

fn metric_model(m: &config::MetricCfg, n: usize) -> FbarMap {
    let h = ScalarField::from_fn(n, |x| m.amplitude * (m.mode as f64 * x).cos());
    match m.kind {
        MetricKind::Identity => FbarMap::Identity,
        MetricKind::Frozen => FbarMap::Metric(MetricModel::Frozen(h.map(|v| 1.0 + v))),
        MetricKind::Ramp => FbarMap::Metric(MetricModel::Ramp(h)),
    }
}

pub fn illposed_scan(cfg: &ScanCfg, art: &mut ArtifactDir) -> Result<Outcome, CliError> {
    let a = alpha(cfg.alpha)?;
    let qs = config::q_range(&cfg.q_range, "illposed_scan.q_range")?;
    let n = cfg.n;
    if !n.is_power_of_two() || n < 64 {
        return Err(usage(format!("illposed_scan.n = {n} must be a power of two ≥ 64")));
    }
    let mut out = Outcome::default();
    match (cfg.p, cfg.beta) {
        (Some(p), None) => {
            if p == 2.0 {
                return Err(usage("p = 2 is excluded: e^{tL_α} is unitary on L², no norm inflation to scan"));
            }
            if !(p >= 1.0) {
                return Err(usage(format!("p = {p} must be ≥ 1")));
            }
            let (d_default, fallback) = ip::default_delta_lp(a, p);
            let delta = cfg.delta.unwrap_or(d_default);
            let eps = match cfg.eps {
                Some(e) => e,
                None => ip::default_eps_lp(a, p, delta)?,
            };
            out.results.insert("delta".into(), json!(delta));
            out.results.insert("delta_fallback".into(), json!(cfg.delta.is_none() && fallback));
            out.results.insert("eps".into(), json!(eps));
            let k_max = cfg.k_max.unwrap_or(n / 4);
            match cfg.mode {
                ScanMode::Growth => {
                    let w = WaingerData::new(p, eps, k_max)?;
                    let r = ip::wainger_growth_scan(&w, a, delta, &qs, n)?;
                    write_report(art, "growth.csv", &r, &mut out)?;
                }
                ScanMode::Pairing => {
                    let (f0, test, q_range) = if p < 2.0 {
                        let f0 = WaingerData::new(p, eps, k_max)?.field(n)?;
                        (f0, TestFunctions::LpMaximizer { p }, qs)
                    } else {
                        let even: Vec<i32> = qs.iter().copied().filter(|q| q % 2 == 0 && *q >= 2).collect();
                        if even.is_empty() {
                            return Err(usage("illposed_scan.q_range holds no even q ≥ 2 for p > 2 data"));
                        }
                        let data = ip::assemble_p_big_data(a, p, delta, eps, &even, n)?;
                        let phi = WaingerData::new(p / (p - 1.0), eps, k_max)?.field(n)?;
                        (data.f0, TestFunctions::Fixed(phi), even)
                    };
                    let pc = PairingConfig {
                        alpha: a,
                        delta,
                        eps,
                        p,
                        q_range,
                        fbar_map: metric_model(&cfg.metric, n),
                        forcing: Forcing::Zero,
                        test,
                        min_steps: cfg.min_steps,
                    };
                    let r = ip::pairing_scan(&f0, &pc)?;
                    pairing_summary(&r, &mut out);
                    write_report(art, "pairing.csv", &r, &mut out)?;
                }
            }
        }
        (None, Some(beta)) => {
            if cfg.mode == ScanMode::Growth {
                return Err(usage("growth mode needs p (the Hölder case is scanned in pairing mode)"));
            }
            if !(0.0..1.0).contains(&beta) {
                return Err(usage(format!("beta = {beta} must lie in [0, 1)")));
            }
            let delta = cfg.delta.unwrap_or_else(|| ip::default_delta_holder(a, beta));
            let eps = cfg.eps.unwrap_or_else(|| ip::default_eps_holder(a, delta));
            out.results.insert("delta".into(), json!(delta));
            out.results.insert("eps".into(), json!(eps));
            let even: Vec<i32> = qs.iter().copied().filter(|q| q % 2 == 0 && *q >= 2).collect();
            if even.is_empty() {
                return Err(usage("illposed_scan.q_range holds no even q ≥ 2"));
            }
            let data = ip::assemble_holder_data(a, beta, delta, eps, &even, n)?;
            let phi = WaingerData::new(1.0, eps, cfg.k_max.unwrap_or(n / 4))?.field(n)?;
            let pc = PairingConfig {
                alpha: a,
                delta,
                eps,
                p: f64::NAN,
                q_range: even,
                fbar_map: metric_model(&cfg.metric, n),
                forcing: Forcing::Zero,
                test: TestFunctions::Fixed(phi),
                min_steps: cfg.min_steps,
            };
            let r = ip::pairing_scan(&data.f0, &pc)?;
            pairing_summary(&r, &mut out);
            write_report(art, "pairing.csv", &r, &mut out)?;
        }
        _ => return Err(usage("illposed_scan needs exactly one of p or beta")),
    }
    Ok(out)
}

fn pairing_summary(r: &ScanReport, out: &mut Outcome) {
    for col in ["P", "R", "R_bound"] {
        out.results.insert(format!("log2_slope_{col}"), json!(ip::fitted_log2_slope(r, col)));
    }
}

pub fn bend(cfg: &BendCfg, art: &mut ArtifactDir) -> Result<Outcome, CliError> {
    let n = cfg.n;
    if !n.is_power_of_two() || n < 256 {
        return Err(usage(format!("bend.n = {n} must be a power of two ≥ 256")));
    }
    let opts = BendOptions {
        epsilon: match cfg.epsilon {
            Some(e) => EpsilonPolicy::Fixed(e),
            None => EpsilonPolicy::Auto,
        },
        ..Default::default()
    };
    let need = |v: Option<f64>, key: &str| v.ok_or_else(|| usage(format!("missing config key bend.{key}")));
    let mut out = Outcome::default();
    let (result, kappa_sharp) = match cfg.kappa_sharp {
        KappaSource::Zero => {
            let ks = ScalarField::constant(n, 0.0);
            (bending::bend_close(&ks, opts)?, ks)
        }
        KappaSource::Wainger => {
            let p = need(cfg.p, "p")?;
            let eps = need(cfg.eps, "eps")?;
            let f = WaingerData::new(p, eps, cfg.k_max.unwrap_or(n / 4))?.field(n)?;
            let e = f.even_part();
            let m = e.mean();
            let ks = e.map(|v| v - m);
            (bending::bend_close(&ks, opts)?, ks)
        }
        KappaSource::File => {
            let path = cfg.path.as_ref().ok_or_else(|| usage("missing config key bend.path"))?;
            art.record_input(path)?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            let ks = read_field(&text)?;
            if ks.len() != n {
                return Err(CliError::Data(format!("{} holds {} samples, bend.n = {n}", path.display(), ks.len())));
            }
            (bending::bend_close(&ks, opts)?, ks)
        }
        KappaSource::Patch => {
            let a = alpha(need(cfg.alpha, "alpha")?)?;
            let spec = match (cfg.p, cfg.beta) {
                (Some(p), None) => PatchSpec::Lp { p },
                (None, Some(beta)) => PatchSpec::Holder { beta },
                _ => return Err(usage("bend with kappa_sharp = \"patch\" needs exactly one of p or beta")),
            };
            let patch = bending::make_initial_patch(spec, a, n, opts)?;
            out.results.insert("patch".into(), serde_json::to_value(&patch.manifest).expect("patch manifest serializes"));
            (patch.bend, patch.kappa_sharp)
        }
    };
    art.write("curve.txt", result.curve.to_text().as_bytes())?;
    let mut csv = String::from("s,kappa_sharp,kappa_g,kappa\n");
    for (j, s) in bending::arc_grid(n).iter().enumerate() {
        let _ = writeln!(
            csv,
            "{:.15e},{:.15e},{:.15e},{:.15e}",
            s,
            kappa_sharp.samples()[j],
            result.kappa_g.samples()[j],
            result.kappa.samples()[j]
        );
    }
    art.write("curvature.csv", csv.as_bytes())?;
    let length = result.curve.length();
    let mut summary = ScanReport::new(&["h_star", "epsilon", "gap", "gap_over_length", "turning", "margin", "length", "mirror_defect"]);
    summary.push(vec![
        result.h_star.into(),
        result.epsilon.into(),
        result.gap.into(),
        (result.gap.abs() / length).into(),
        result.turning.into(),
        result.margin.into(),
        length.into(),
        bending::mirror_defect(&result.curve).into(),
    ]);
    write_report(art, "bend.csv", &summary, &mut out)?;
    Ok(out)
}

pub fn kernel_check(cfg: &KernelCfg, seed: u64, art: &mut ArtifactDir) -> Result<Outcome, CliError> {
    let a = alpha(cfg.alpha)?;
    let qs = config::q_range(&cfg.q_range, "kernel_check.q_range")?;
    if cfg.t_factors.is_empty() || cfg.t_factors.iter().any(|t| !(*t > 0.0)) {
        return Err(usage("kernel_check.t_factors must be a non-empty list of positive numbers"));
    }
    let mut cases = Vec::new();
    for &q in &qs {
        let tau = ip::tau_schedule(q, a, cfg.delta)?;
        cases.extend(cfg.t_factors.iter().map(|f| (q, f * tau)));
    }
    let r = spectral::kernel_bound_scan(a, &cases, cfg.refine)?;
    let c = r.meta["C"].as_f64().unwrap_or(f64::NAN);
    let mut out = Outcome::default();
    write_report(art, "kernel.csv", &r, &mut out)?;
    if let Some(p) = cfg.bernstein_p {
        let mut b = ScanReport::new(&["q", "lebesgue", "dispersive"]);
        for &q in &qs {
            let x = spectral::bernstein_check(q, a, p, f64::INFINITY, cfg.bernstein_trials, seed)?;
            b.push(vec![q.into(), x.lebesgue.into(), x.dispersive.into()]);
        }
        b.set_meta("p", p);
        b.set_meta("seed", seed);
        write_report(art, "bernstein.csv", &b, &mut out)?;
    }
    if let Some(max) = cfg.max_constant {
        if c > max {
            out.failure = Some(format!("kernel constant {c:.6e} exceeds max_constant {max:.6e}"));
        }
    }
    Ok(out)
}

pub fn spectra(cfg: &SpectraCfg, seed: u64, art: &mut ArtifactDir) -> Result<Outcome, CliError> {
    let n0 = match (&cfg.curve, cfg.n) {
        (_, Some(n)) => n,
        (ShapeCfg::File { .. }, None) => 0,
        (_, None) => return Err(usage("missing config key spectra.n (needed for generated shapes)")),
    };
    let curve = match &cfg.curve {
        ShapeCfg::File { path } => {
            art.record_input(path)?;
            let c = ClosedCurve::read_file(path)?;
            let m = if n0 == 0 { c.n() } else { n0 };
            resample_arclength(&c, m)?
        }
        shape => resample_arclength(&build_shape(shape, n0, seed, art)?, n0)?,
    };
    let kappa = curvature(&curve);
    let n = kappa.len();
    let mut modes = ScanReport::new(&["k", "re", "im", "abs"]);
    for k in 0..=(n / 2) as i64 {
        let c = kappa.coeff(k);
        modes.push(vec![k.into(), c.re.into(), c.im.into(), c.norm().into()]);
    }
    modes.set_meta("N", n);
    modes.set_meta("length", curve.length());
    let mut out = Outcome::default();
    write_report(art, "spectrum.csv", &modes, &mut out)?;
    let cols: Vec<String> = std::iter::once("q".to_string()).chain(cfg.p_list.iter().map(|p| format!("block_L{p}"))).collect();
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut blocks = ScanReport::new(&col_refs);
    for q in -1..=LpCutoff::for_grid(n).q_max {
        let b = spectral::lp_project(&kappa, q)?.data;
        let mut row = vec![q.into()];
        row.extend(cfg.p_list.iter().map(|&p| b.lp_norm(p).into()));
        blocks.push(row);
    }
    write_report(art, "blocks.csv", &blocks, &mut out)?;
    Ok(out)
}

pub fn probe(cfg: &ProbeCfg, art: &mut ArtifactDir) -> Result<Outcome, CliError> {
    let a = alpha(cfg.alpha)?;
    if !cfg.n.is_power_of_two() {
        return Err(usage(format!("probe_nonlipschitz.n = {} must be a power of two", cfg.n)));
    }
    let opts = ProbeOptions { n: cfg.n, amplitude: cfg.amplitude, smooth: false };
    let r = biot_savart::non_lipschitz_probe(a, cfg.p, cfg.eps, &cfg.s_grid, opts)?;
    let mut out = Outcome::default();
    write_report(art, "probe.csv", &r.report, &mut out)?;
    let sigma = cfg.sigma.unwrap_or((1.0 - 2.0 * a.value()) / 2.0);
    let smooth = |n: usize| -> alpha_patch::Result<ClosedCurve> { Ok(star_curve(n, 1.0, &[(2, 0.1, 0.0), (3, 0.0, 0.05)])?) };
    let quotients = biot_savart::dsv_holder_refinement(&smooth, a, sigma, &cfg.smooth_grids)?;
    let mut h = ScanReport::new(&["n", "holder_quotient"]);
    for (&n, &v) in cfg.smooth_grids.iter().zip(&quotients) {
        h.push(vec![n.into(), v.into()]);
    }
    h.set_meta("sigma", sigma);
    write_report(art, "holder.csv", &h, &mut out)?;
    Ok(out)
}

pub fn parameters(cfg: &impl serde::Serialize) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}
