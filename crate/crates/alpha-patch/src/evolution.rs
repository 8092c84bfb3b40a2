//! Contour dynamics ∂_t γ = v(γ) with the metric and tangent angle carried
//! along, arc-length renormalization, run diagnostics and the dispersion fit.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::biot_savart::{velocity_arc_derivative_with, AlphaParam, SingularWeights};
use crate::curve_geometry::{curvature, holder_quotient, resample_arclength, ClosedCurve, Point};
use crate::error::{Error, Result};
use crate::field::{grid_point, ScalarField};
use crate::report::{linear_fit, ScanReport};
use crate::spectral::c_alpha;

/// Lagrangian state. θ is stored as θ − x, which is periodic for a simple
/// counterclockwise curve.
#[derive(Clone, Debug)]
pub struct PatchState {
    pub curve: ClosedCurve,
    pub t: f64,
    pub theta_lift: ScalarField,
    pub g: ScalarField,
    pub diagnostics: Option<StepDiagnostics>,
}

#[derive(Clone, Debug)]
pub struct StepDiagnostics {
    pub v: Vec<Point>,
    pub dsv_t: ScalarField,
    pub dsv_n: ScalarField,
    pub max_dsv: f64,
}

/// Tangent angle minus x, unwrapped along the nodes and shifted by a multiple
/// of 2π so θ(0) lies within π of `reference`.
fn tangent_lift(curve: &ClosedCurve, reference: f64) -> ScalarField {
    let n = curve.n();
    let frame = curve.frame();
    let mut out = Vec::with_capacity(n);
    let mut prev = f64::NAN;
    for (j, t) in frame.tangent.iter().enumerate() {
        let mut th = t[1].atan2(t[0]);
        if j == 0 {
            th += 2.0 * PI * ((reference - th) / (2.0 * PI)).round();
        } else {
            th += 2.0 * PI * ((prev - th) / (2.0 * PI)).round();
        }
        prev = th;
        out.push(th - grid_point(j, n));
    }
    ScalarField::from_samples(out)
}

impl PatchState {
    pub fn new(curve: ClosedCurve) -> Result<Self> {
        if !curve.is_ccw() {
            return Err(Error::InvalidData("curve must be counterclockwise".into()));
        }
        let theta_lift = tangent_lift(&curve, curve.frame().tangent[0][1].atan2(curve.frame().tangent[0][0]));
        let g = curve.metric().clone();
        Ok(Self { curve, t: 0.0, theta_lift, g, diagnostics: None })
    }

    pub fn n(&self) -> usize {
        self.curve.n()
    }

    pub fn theta(&self) -> ScalarField {
        let n = self.n();
        self.theta_lift.zip_map(&ScalarField::from_fn(n, |x| x), |a, b| a + b)
    }

    /// g κ = ∂_x θ.
    pub fn g_kappa(&self) -> ScalarField {
        self.theta_lift.derivative().map(|v| v + 1.0)
    }

    /// κ = (∂_x θ)/g.
    pub fn kappa(&self) -> ScalarField {
        self.g_kappa().zip_map(&self.g, |a, b| a / b)
    }

    /// ‖∂_x θ − g κ‖_∞ / ‖κ‖_∞ with κ from the curve.
    pub fn theta_kappa_defect(&self) -> f64 {
        let kc = curvature(&self.curve);
        let gk = kc.mul(self.curve.metric());
        self.g_kappa().sub(&gk).lp_norm(f64::INFINITY) / kc.lp_norm(f64::INFINITY).max(1e-300)
    }
}

/// Right-hand sides (dγ/dt, dg/dt, dθ/dt).
#[derive(Clone, Debug)]
pub struct Rhs {
    pub dgamma: Vec<Point>,
    pub dg: ScalarField,
    pub dtheta: ScalarField,
    pub diagnostics: StepDiagnostics,
}

pub fn rhs(curve: &ClosedCurve, g: &ScalarField, w: &SingularWeights) -> Rhs {
    let bv = velocity_arc_derivative_with(curve, w);
    let dsv_t = bv.dsv_t.expect("frame components");
    let dsv_n = bv.dsv_n.expect("frame components");
    let dg = g.mul(&dsv_t);
    let dtheta = dsv_n.scale(-1.0);
    let max_dsv = bv
        .dsv
        .as_ref()
        .map(|d| d.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max))
        .unwrap_or(0.0);
    Rhs { dgamma: bv.v.clone(), dg, dtheta, diagnostics: StepDiagnostics { v: bv.v, dsv_t, dsv_n, max_dsv } }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DtPolicy {
    Fixed(f64),
    /// dt = c / max|∂_s v|, capped by `max`.
    Cfl { c: f64, max: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub dt: DtPolicy,
    pub t_end: f64,
    /// 0 disables renormalization.
    pub renormalize_every: usize,
    /// Resample the initial curve to this many nodes when set.
    pub n: Option<usize>,
    /// Diagnostics every this many steps.
    pub output_every: usize,
    pub filter: bool,
    pub p_list: Vec<f64>,
    pub beta: f64,
    /// Keep full states at each output row.
    pub keep_states: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            dt: DtPolicy::Fixed(1e-2),
            t_end: 1.0,
            renormalize_every: 10,
            n: None,
            output_every: 1,
            filter: false,
            p_list: vec![2.0],
            beta: 0.5,
            keep_states: false,
        }
    }
}

pub struct Stepper {
    pub alpha: AlphaParam,
    weights: SingularWeights,
    pub filter: bool,
}

fn apply_filter(f: &ScalarField) -> ScalarField {
    let kmax = (f.len() / 2) as f64;
    f.apply_multiplier(|k| Complex64::new((-36.0 * ((k as f64).abs() / kmax).powi(36)).exp(), 0.0))
}

fn axpy_points(a: &[Point], b: &[Point], s: f64) -> Vec<Point> {
    a.iter().zip(b).map(|(p, q)| [p[0] + s * q[0], p[1] + s * q[1]]).collect()
}

impl Stepper {
    pub fn new(alpha: AlphaParam, n: usize, filter: bool) -> Self {
        Self { alpha, weights: SingularWeights::new(n, alpha), filter }
    }

    pub fn weights(&self) -> &SingularWeights {
        &self.weights
    }

    pub fn rhs(&self, state: &PatchState) -> Rhs {
        rhs(&state.curve, &state.g, &self.weights)
    }

    /// One classical RK4 step of (γ, g, θ); rejects when dt·max|∂_s v| > 0.5
    /// or the new curve self-intersects.
    pub fn step(&self, state: &PatchState, dt: f64) -> Result<PatchState> {
        let k1 = self.rhs(state);
        let cfl = dt.abs() * k1.diagnostics.max_dsv;
        if cfl > 0.5 {
            return Err(Error::StepRejected { t: state.t, reason: format!("dt·max|∂_s v| = {cfl:.3e} exceeds 0.5") });
        }
        let nodes = state.curve.nodes();
        let stage = |k: &Rhs, s: f64| -> Result<(ClosedCurve, ScalarField)> {
            let c = ClosedCurve::new_unchecked(&axpy_points(&nodes, &k.dgamma, s))?;
            Ok((c, state.g.add(&k.dg.scale(s))))
        };
        let (c2, g2) = stage(&k1, dt / 2.0)?;
        let k2 = rhs(&c2, &g2, &self.weights);
        let (c3, g3) = stage(&k2, dt / 2.0)?;
        let k3 = rhs(&c3, &g3, &self.weights);
        let (c4, g4) = stage(&k3, dt)?;
        let k4 = rhs(&c4, &g4, &self.weights);
        let comb = |a: &[Point], b: &[Point], c: &[Point], d: &[Point]| -> Vec<Point> {
            (0..nodes.len())
                .map(|j| {
                    let m = |i: usize| (a[j][i] + 2.0 * b[j][i] + 2.0 * c[j][i] + d[j][i]) * dt / 6.0;
                    [nodes[j][0] + m(0), nodes[j][1] + m(1)]
                })
                .collect()
        };
        let mut new_nodes = comb(&k1.dgamma, &k2.dgamma, &k3.dgamma, &k4.dgamma);
        let sum4 = |a: &ScalarField, b: &ScalarField, c: &ScalarField, d: &ScalarField| {
            a.add(&b.scale(2.0)).add(&c.scale(2.0)).add(d).scale(dt / 6.0)
        };
        let g = state.g.add(&sum4(&k1.dg, &k2.dg, &k3.dg, &k4.dg));
        let mut theta_lift = state.theta_lift.add(&sum4(&k1.dtheta, &k2.dtheta, &k3.dtheta, &k4.dtheta));
        if self.filter {
            let xs = apply_filter(&ScalarField::from_samples(new_nodes.iter().map(|p| p[0]).collect()));
            let ys = apply_filter(&ScalarField::from_samples(new_nodes.iter().map(|p| p[1]).collect()));
            new_nodes = xs.samples().iter().zip(ys.samples()).map(|(x, y)| [*x, *y]).collect();
            theta_lift = apply_filter(&theta_lift);
        }
        if g.samples().iter().any(|v| !(*v > 0.0)) {
            return Err(Error::StepRejected { t: state.t, reason: "metric lost positivity".into() });
        }
        let curve = ClosedCurve::new(&new_nodes)
            .map_err(|e| Error::StepRejected { t: state.t + dt, reason: format!("{e}") })?;
        Ok(PatchState { curve, t: state.t + dt, theta_lift, g, diagnostics: Some(k1.diagnostics) })
    }
}

/// Arc-length resample with node 0 fixed; g becomes L/2π and θ is re-derived.
pub fn renormalize(state: &PatchState) -> Result<PatchState> {
    let curve = resample_arclength(&state.curve, state.n())?;
    let theta0 = state.theta_lift.samples()[0];
    let theta_lift = tangent_lift(&curve, theta0);
    let g = ScalarField::constant(curve.n(), curve.length() / (2.0 * PI));
    Ok(PatchState { curve, t: state.t, theta_lift, g, diagnostics: None })
}

/// Distance from `q` to the trigonometric interpolant of `c`: dense search
/// then Newton on the squared distance.
fn distance_to_curve(c: &ClosedCurve, q: Point, dense: &[(f64, Point)]) -> f64 {
    let (mut x, _) = dense
        .iter()
        .map(|(x, p)| (*x, (p[0] - q[0]).hypot(p[1] - q[1])))
        .fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    for _ in 0..20 {
        let (p, d1) = c.eval(x);
        let d2 = c.eval_second(x);
        let r = [p[0] - q[0], p[1] - q[1]];
        let f1 = r[0] * d1[0] + r[1] * d1[1];
        let f2 = d1[0] * d1[0] + d1[1] * d1[1] + r[0] * d2[0] + r[1] * d2[1];
        if f2 <= 0.0 {
            break;
        }
        let dx = f1 / f2;
        x -= dx;
        if dx.abs() < 1e-15 {
            break;
        }
    }
    let p = c.eval(x).0;
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// Symmetric node-to-interpolant Hausdorff distance, dense start ×`over`.
pub fn hausdorff(a: &ClosedCurve, b: &ClosedCurve, over: usize) -> f64 {
    let one_way = |p: &ClosedCurve, q: &ClosedCurve| -> f64 {
        let m = p.n() * over.max(1);
        let dense: Vec<(f64, Point)> = (0..m).map(|i| (grid_point(i, m), p.eval(grid_point(i, m)).0)).collect();
        q.nodes().iter().map(|node| distance_to_curve(p, *node, &dense)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[derive(Clone, Debug)]
pub struct RunSeries {
    pub report: ScanReport,
    pub states: Vec<PatchState>,
    /// Set when a step was rejected; the series is partial.
    pub failure: Option<String>,
    pub final_state: PatchState,
}

fn diagnostics_row(state: &PatchState, cfg: &RunConfig, max_dsv: f64) -> Vec<crate::report::Cell> {
    let c = &state.curve;
    let kappa = curvature(c);
    let n = c.n();
    let scale = c.length() / (2.0 * PI);
    let mut row: Vec<crate::report::Cell> = vec![state.t.into(), c.length().into(), c.area().into()];
    for &p in &cfg.p_list {
        // L^p in ds on the Lagrangian grid: ∫|κ|^p g dx.
        let v = if p.is_infinite() {
            kappa.lp_norm(p)
        } else {
            let s: f64 = kappa.samples().iter().zip(c.metric().samples()).map(|(k, g)| k.abs().powf(p) * g).sum();
            (s * 2.0 * PI / n as f64).powf(1.0 / p)
        };
        row.push(v.into());
    }
    row.push(holder_quotient(kappa.samples(), 2.0 * PI * scale / n as f64, cfg.beta, 2).into());
    let nodes = c.nodes();
    let spacing = (0..n).map(|j| crate::curve_geometry::dist(nodes[j], nodes[(j + 1) % n])).fold(f64::INFINITY, f64::min);
    row.push(spacing.into());
    row.push(max_dsv.into());
    row
}

pub fn run_columns(cfg: &RunConfig) -> Vec<String> {
    let mut cols = vec!["t".to_string(), "length".into(), "area".into()];
    for p in &cfg.p_list {
        cols.push(format!("kappa_L{p}"));
    }
    cols.push(format!("kappa_holder_{}", cfg.beta));
    cols.push("min_spacing".into());
    cols.push("max_dsv".into());
    cols
}

/// Time series of diagnostics. A rejected step ends the run with `failure` set.
pub fn run(curve0: &ClosedCurve, cfg: &RunConfig) -> Result<RunSeries> {
    let a = AlphaParam::new(cfg.alpha)?;
    let curve0 = match cfg.n {
        Some(n) if n != curve0.n() => resample_arclength(curve0, n)?,
        _ => curve0.clone(),
    };
    let n = curve0.n();
    let stepper = Stepper::new(a, n, cfg.filter);
    let mut state = PatchState::new(curve0)?;
    let cols = run_columns(cfg);
    let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut report = ScanReport::new(&col_refs);
    let mut states = Vec::new();
    let first = stepper.rhs(&state);
    let mut max_dsv = first.diagnostics.max_dsv;
    state.diagnostics = Some(first.diagnostics);
    report.push(diagnostics_row(&state, cfg, max_dsv));
    if cfg.keep_states {
        states.push(state.clone());
    }
    let mut failure = None;
    let mut step_count = 0usize;
    let every = cfg.output_every.max(1);
    while state.t < cfg.t_end - 1e-12 {
        let mut dt = match cfg.dt {
            DtPolicy::Fixed(d) => d,
            DtPolicy::Cfl { c, max } => (c / max_dsv.max(1e-300)).min(max),
        };
        if state.t + dt > cfg.t_end {
            dt = cfg.t_end - state.t;
        }
        match stepper.step(&state, dt) {
            Ok(s) => state = s,
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
        step_count += 1;
        if cfg.renormalize_every > 0 && step_count % cfg.renormalize_every == 0 {
            match renormalize(&state) {
                Ok(s) => state = s,
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            }
        }
        let d = stepper.rhs(&state);
        max_dsv = d.diagnostics.max_dsv;
        state.diagnostics = Some(d.diagnostics);
        let last = state.t >= cfg.t_end - 1e-12;
        if step_count % every == 0 || last {
            report.push(diagnostics_row(&state, cfg, max_dsv));
            if cfg.keep_states {
                states.push(state.clone());
            }
        }
    }
    report.set_meta("alpha", cfg.alpha);
    report.set_meta("N", n);
    report.set_meta("config", cfg);
    report.set_meta("steps", step_count);
    report.set_meta("partial", failure.is_some());
    if let Some(f) = &failure {
        report.set_meta("failure", f);
    }
    Ok(RunSeries { report, states, failure, final_state: state })
}

/// Near-circle of length 2π with curvature 1 + δ cos(k s), k ≥ 2.
pub fn perturbed_circle(n: usize, k: usize, delta: f64) -> Result<ClosedCurve> {
    if k < 2 {
        return Err(Error::InvalidSpec("perturbation mode must be ≥ 2".into()));
    }
    let kappa = ScalarField::from_fn(n, |s| 1.0 + delta * (k as f64 * s).cos());
    let anchor = crate::curve_geometry::Anchor { point: [1.0, 0.0], angle: PI / 2.0 };
    let (nodes, _, _) = crate::curve_geometry::integrate_curvature(&kappa, 2.0 * PI, anchor);
    Ok(ClosedCurve::new(&nodes)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeFit {
    pub k: i64,
    /// Fitted phase rate of mode k of gκ in the Lagrangian label.
    pub omega: f64,
    /// Rate with the rigid rotation k Ω₀ added back (Eulerian frame).
    pub omega_eulerian: f64,
    /// Predicted −c_α k^{2α}.
    pub predicted: f64,
    pub rel_error: f64,
    pub phase_span: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DispersionFit {
    pub c_alpha: f64,
    pub omega0: f64,
    pub modes: Vec<ModeFit>,
    /// log rate against log k.
    pub k_slope: f64,
}

/// Per-mode Lagrangian phase rates of gκ against −c_α k^{2α}.
pub fn dispersion_fit(states: &[PatchState], a: AlphaParam, modes: &[i64]) -> Result<DispersionFit> {
    if states.len() < 3 {
        return Err(Error::Fit("need at least three snapshots".into()));
    }
    let ts: Vec<f64> = states.iter().map(|s| s.t).collect();
    let n = states[0].n();
    let ca = c_alpha(a);
    // Ω₀: mean polar angle drift about the centroid.
    let polar = |s: &PatchState| -> Vec<f64> {
        let nodes = s.curve.nodes();
        let cx = nodes.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        let cy = nodes.iter().map(|p| p[1]).sum::<f64>() / n as f64;
        nodes.iter().map(|p| (p[1] - cy).atan2(p[0] - cx)).collect()
    };
    let mut angle = vec![0.0; states.len()];
    let mut prev = polar(&states[0]);
    for i in 1..states.len() {
        let cur = polar(&states[i]);
        let d: f64 = cur.iter().zip(&prev).map(|(c, p)| (c - p + PI).rem_euclid(2.0 * PI) - PI).sum::<f64>() / n as f64;
        angle[i] = angle[i - 1] + d;
        prev = cur;
    }
    let omega0 = linear_fit(&ts, &angle).0;
    let mut fits = Vec::new();
    for &k in modes {
        if k <= 0 || k as usize >= n / 2 {
            return Err(Error::Fit(format!("mode {k} is not resolved on N = {n}")));
        }
        let j = k as usize;
        let mut phase = Vec::with_capacity(states.len());
        for s in states {
            let c = s.g_kappa().coeffs()[j];
            let p = c.arg();
            let p = match phase.last() {
                None => p,
                Some(&last) => {
                    let d: f64 = p - last;
                    let step = (d + PI).rem_euclid(2.0 * PI) - PI;
                    if step.abs() > 0.9 * PI {
                        return Err(Error::Fit(format!("phase of mode {k} jumps by {step:.3} between samples")));
                    }
                    last + step
                }
            };
            phase.push(p);
        }
        let omega = linear_fit(&ts, &phase).0;
        let predicted = -ca * (k as f64).powf(2.0 * a.value());
        fits.push(ModeFit {
            k,
            omega,
            omega_eulerian: omega + k as f64 * omega0,
            predicted,
            rel_error: (omega - predicted).abs() / predicted.abs(),
            phase_span: (phase[phase.len() - 1] - phase[0]).abs(),
        });
    }
    let k_slope = if fits.len() >= 2 {
        let lk: Vec<f64> = fits.iter().map(|f| (f.k as f64).ln()).collect();
        let lw: Vec<f64> = fits.iter().map(|f| f.omega.abs().ln()).collect();
        linear_fit(&lk, &lw).0
    } else {
        f64::NAN
    };
    Ok(DispersionFit { c_alpha: ca, omega0, modes: fits, k_slope })
}
