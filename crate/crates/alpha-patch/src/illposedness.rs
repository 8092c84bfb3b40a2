//! Wainger-type data, τ_q schedules, dual test functions, the model equation
//! ∂_t f = L_α f̄ + F_t and the L_q/R_q pairing scans.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::biot_savart::AlphaParam;
use crate::error::{Error, Result};
use crate::field::{wavenumber, ScalarField};
use crate::report::{linear_fit, Cell, ScanReport};
use crate::spectral::{apply_l_alpha, evolve_group, lambda, project_unchecked, LpCutoff};

/// τ_q = λ_q^{δα/4 − 2α}.
pub fn tau_schedule(q: i32, a: AlphaParam, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidSpec(format!("delta = {delta} is outside (0, 1]")));
    }
    let al = a.value();
    Ok(lambda(q).powf(delta * al / 4.0 - 2.0 * al))
}

/// δ for L^p data, min{1 − 1/p − 2α, 2α}; when that is not positive the
/// fallback min{2α, 1} is returned with the flag set.
pub fn default_delta_lp(a: AlphaParam, p: f64) -> (f64, bool) {
    let al = a.value();
    let d = (1.0 - 1.0 / p - 2.0 * al).min(2.0 * al);
    if d > 0.0 {
        (d.min(1.0), false)
    } else {
        ((2.0 * al).min(1.0), true)
    }
}

/// δ for C^β data, min{2α, (1 − β)/2}.
pub fn default_delta_holder(a: AlphaParam, beta: f64) -> f64 {
    (2.0 * a.value()).min((1.0 - beta) / 2.0)
}

/// Half of the admissible ε budget for L^p data.
pub fn default_eps_lp(a: AlphaParam, p: f64, delta: f64) -> Result<f64> {
    let da = delta * a.value();
    if p < 2.0 {
        Ok(0.5 * (1.0 / p - 0.5) * da / 4.0)
    } else if p > 2.0 {
        Ok(0.5 * (0.5 - 1.0 / p) * da / 8.0)
    } else {
        Err(Error::InvalidSpec("p = 2 is excluded".into()))
    }
}

/// Half of the admissible ε budget for C^β data.
pub fn default_eps_holder(a: AlphaParam, delta: f64) -> f64 {
    0.5 * delta * a.value() / 16.0
}

/// f = Σ_{2≤|n|≤K} |n|^{−(1−1/p+ε/2)} e^{inx}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaingerData {
    pub p: f64,
    pub eps: f64,
    pub k_max: usize,
}

impl WaingerData {
    pub fn new(p: f64, eps: f64, k_max: usize) -> Result<Self> {
        if !(p >= 1.0) || !(eps > 0.0) || k_max < 2 {
            return Err(Error::InvalidSpec(format!("Wainger data needs p ≥ 1, ε > 0, K ≥ 2 (p = {p}, ε = {eps}, K = {k_max})")));
        }
        Ok(Self { p, eps, k_max })
    }

    pub fn exponent(&self) -> f64 {
        1.0 - 1.0 / self.p + self.eps / 2.0
    }

    pub fn coefficient(&self, k: i64) -> f64 {
        let a = k.unsigned_abs() as usize;
        if a >= 2 && a <= self.k_max {
            (a as f64).powf(-self.exponent())
        } else {
            0.0
        }
    }

    pub fn field(&self, n: usize) -> Result<ScalarField> {
        if 2 * self.k_max >= n {
            return Err(Error::InvalidSpec(format!("K = {} is not resolved on N = {n}", self.k_max)));
        }
        let c = (0..n).map(|j| Complex64::new(self.coefficient(wavenumber(j, n)), 0.0)).collect();
        Ok(ScalarField::from_coeffs(c))
    }

    pub fn with_k_max(&self, k_max: usize) -> Self {
        Self { k_max, ..*self }
    }
}

fn check_q_range(q_range: &[i32], n: usize) -> Result<()> {
    let cut = LpCutoff::for_grid(n);
    for &q in q_range {
        if q < 0 || q > cut.q_max {
            return Err(Error::OutOfBand { q, n });
        }
    }
    if q_range.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("q range must be strictly increasing".into()));
    }
    Ok(())
}

/// Smallest q₀ in the scan such that every verdict from q₀ on is true.
pub fn first_stable_q(qs: &[i32], verdicts: &[bool]) -> Option<i32> {
    let mut q0 = None;
    for (q, v) in qs.iter().zip(verdicts).rev() {
        if *v {
            q0 = Some(*q);
        } else {
            break;
        }
    }
    q0
}

/// Growth of ‖e^{τ_qL_α}Δ_q f‖_p against τ_q^{1/p−1/2}λ_q^{2α(1/p−1/2)−ε}, with
/// the verdict repeated for the data truncated at K/2.
pub fn wainger_growth_scan(w: &WaingerData, a: AlphaParam, delta: f64, q_range: &[i32], n: usize) -> Result<ScanReport> {
    if w.p >= 2.0 {
        return Err(Error::UnsupportedRegime(format!("growth scan needs p < 2, got p = {} (use the dual scan)", w.p)));
    }
    check_q_range(q_range, n)?;
    let f = w.field(n)?;
    let f_half = w.with_k_max(w.k_max / 2).field(n)?;
    let p = w.p;
    let rows: Vec<Result<[f64; 6]>> = q_range
        .par_iter()
        .map(|&q| {
            let tau = tau_schedule(q, a, delta)?;
            let lam = lambda(q);
            let bound = tau.powf(1.0 / p - 0.5) * lam.powf(2.0 * a.value() * (1.0 / p - 0.5) - w.eps);
            let block = project_unchecked(&f, q);
            let measured = evolve_group(&block, a, tau).lp_norm_oversampled(p, 2);
            let initial = block.lp_norm_oversampled(p, 2);
            let half = evolve_group(&project_unchecked(&f_half, q), a, tau).lp_norm_oversampled(p, 2);
            Ok([tau, measured, bound, measured / bound, initial, half / bound])
        })
        .collect();
    let mut report = ScanReport::new(&["q", "tau", "measured", "bound", "ratio", "verdict", "initial_norm", "verdict_half_k"]);
    let mut verdicts = Vec::new();
    for (&q, r) in q_range.iter().zip(rows) {
        let [tau, m, b, ratio, init, half_ratio] = r?;
        verdicts.push(ratio >= 1.0);
        report.push(vec![q.into(), tau.into(), m.into(), b.into(), ratio.into(), (ratio >= 1.0).into(), init.into(), (half_ratio >= 1.0).into()]);
    }
    let ratios = report.column("ratio");
    let qs: Vec<f64> = q_range.iter().map(|&q| q as f64).collect();
    let lr: Vec<f64> = ratios.iter().map(|r| r.log2()).collect();
    report.set_meta("alpha", a.value());
    report.set_meta("p", p);
    report.set_meta("eps", w.eps);
    report.set_meta("delta", delta);
    report.set_meta("N", n);
    report.set_meta("K", w.k_max);
    report.set_meta("q_range", q_range);
    report.set_meta("q0", first_stable_q(q_range, &verdicts));
    report.set_meta("log2_ratio_trend", if qs.len() >= 2 { linear_fit(&qs, &lr).0 } else { 0.0 });
    Ok(report)
}

/// Hölder maximizer sign(F)|F|^{r−1} for the exponent r (r = ∞ gives sign F).
fn holder_maximizer(f: &ScalarField, r: f64) -> ScalarField {
    if r.is_infinite() {
        f.map(|v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })
    } else {
        f.map(|v| v.signum() * v.abs().powf(r - 1.0))
    }
}

/// Projection onto the plateau λ_q ≤ |k| ≤ 3λ_q/2 where ψ_q ≡ 1.
pub fn plateau_project(f: &ScalarField, q: i32) -> ScalarField {
    let lam = lambda(q);
    f.apply_multiplier(|k| {
        let a = (k as f64).abs();
        Complex64::new(if a >= lam && a <= 1.5 * lam { 1.0 } else { 0.0 }, 0.0)
    })
}

/// Dual block h_q and its pairing data.
#[derive(Clone, Debug)]
pub struct DualTest {
    pub q: i32,
    pub tau: f64,
    pub h: ScalarField,
    /// F = e^{τ_qL_α}Δ_qφ.
    pub f: ScalarField,
    /// ∫ h F dx.
    pub pairing: f64,
    /// ‖h‖_p ‖F_e‖_{p'} with F_e the even part of F.
    pub norm_product: f64,
    /// ‖F − F_e‖_{p'}/‖F‖_{p'}.
    pub discarded_odd: f64,
}

/// h_q = normalized Hölder maximizer of the even part of e^{τ_qL_α}Δ_qφ, with
/// φ the Wainger data for p' = p/(p − 1), scaled to ‖h_q‖_p = λ_q^{−ε/2}.
pub fn dual_test_functions(q: i32, a: AlphaParam, p: f64, w: &WaingerData, delta: f64, n: usize) -> Result<DualTest> {
    if !(p > 2.0) {
        return Err(Error::UnsupportedRegime(format!("dual test functions need p > 2, got {p}")));
    }
    let pp = p / (p - 1.0);
    if (w.p - pp).abs() > 1e-12 {
        return Err(Error::InvalidSpec(format!("Wainger data must use p' = {pp}, got {}", w.p)));
    }
    check_q_range(&[q], n)?;
    let tau = tau_schedule(q, a, delta)?;
    let phi = w.field(n)?;
    let f = evolve_group(&project_unchecked(&phi, q), a, tau);
    let fe = f.even_part();
    let raw = holder_maximizer(&fe, pp);
    let target = lambda(q).powf(-w.eps / 2.0);
    let h = raw.scale(target / raw.lp_norm(p));
    let pairing = h.inner(&f);
    let norm_product = h.lp_norm(p) * fe.lp_norm(pp);
    let discarded_odd = f.sub(&fe).lp_norm(pp) / f.lp_norm(pp);
    Ok(DualTest { q, tau, h, f, pairing, norm_product, discarded_odd })
}

fn check_lacunary(q_set: &[i32]) -> Result<()> {
    let mut seen = q_set.to_vec();
    seen.sort_unstable();
    for w in seen.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidData(format!("blocks overlap: q = {} repeated", w[0])));
        }
    }
    if let Some(q) = q_set.iter().find(|q| *q % 2 != 0 || **q < 0) {
        return Err(Error::InvalidData(format!("blocks overlap: q = {q} is not a non-negative even index")));
    }
    Ok(())
}

/// Lacunary initial data with its per-block summands.
#[derive(Clone, Debug)]
pub struct AssembledData {
    pub f0: ScalarField,
    pub summands: Vec<(i32, ScalarField)>,
}

/// f₀ = Σ_{q∈q_set} h_q with plateau-projected dual blocks, ‖h_q‖_p = λ_q^{−ε/2}.
pub fn assemble_p_big_data(a: AlphaParam, p: f64, delta: f64, eps: f64, q_set: &[i32], n: usize) -> Result<AssembledData> {
    check_lacunary(q_set)?;
    let pp = p / (p - 1.0);
    let w = WaingerData::new(pp, eps, n / 4)?;
    let mut summands = Vec::new();
    let mut f0 = ScalarField::constant(n, 0.0);
    for &q in q_set {
        let d = dual_test_functions(q, a, p, &w, delta, n)?;
        let b = plateau_project(&d.h, q);
        let b = b.scale(lambda(q).powf(-eps / 2.0) / b.lp_norm(p));
        f0 = f0.add(&b);
        summands.push((q, b));
    }
    Ok(AssembledData { f0, summands })
}

/// f₀ = Σ λ_q^{−β} h_q with h_q the plateau projection of sign of the even part of
/// e^{τ_qL_α}Δ_qφ, φ the p = 1 Wainger data, scaled to ‖h_q‖_∞ = λ_q^{−ε/2}.
pub fn assemble_holder_data(a: AlphaParam, beta: f64, delta: f64, eps: f64, q_set: &[i32], n: usize) -> Result<AssembledData> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidSpec(format!("beta = {beta} is outside [0, 1]")));
    }
    check_lacunary(q_set)?;
    check_q_range(q_set, n)?;
    let phi = WaingerData::new(1.0, eps, n / 4)?.field(n)?;
    let mut summands = Vec::new();
    let mut f0 = ScalarField::constant(n, 0.0);
    for &q in q_set {
        let tau = tau_schedule(q, a, delta)?;
        let f = evolve_group(&project_unchecked(&phi, q), a, tau);
        let h = plateau_project(&holder_maximizer(&f.even_part(), f64::INFINITY), q);
        let h = h.scale(lambda(q).powf(-eps / 2.0) / h.lp_norm(f64::INFINITY));
        let b = h.scale(lambda(q).powf(-beta));
        f0 = f0.add(&b);
        summands.push((q, b));
    }
    Ok(AssembledData { f0, summands })
}

pub type FieldFn = Arc<dyn Fn(f64) -> ScalarField + Send + Sync>;

/// Metric g(t, x) entering f̄ = g^{−2α} f.
#[derive(Clone)]
pub enum MetricModel {
    Frozen(ScalarField),
    /// g = 1 + t·h.
    Ramp(ScalarField),
    Series(FieldFn),
}

impl MetricModel {
    pub fn at(&self, t: f64) -> ScalarField {
        match self {
            MetricModel::Frozen(g) => g.clone(),
            MetricModel::Ramp(h) => h.map(|v| 1.0 + t * v),
            MetricModel::Series(f) => f(t),
        }
    }
}

#[derive(Clone)]
pub enum FbarMap {
    Identity,
    Metric(MetricModel),
}

#[derive(Clone)]
pub enum Forcing {
    Zero,
    Field(FieldFn),
}

#[derive(Clone)]
pub struct ModelState {
    pub f: ScalarField,
    pub t: f64,
    pub fbar_map: FbarMap,
    pub forcing: Forcing,
}

impl ModelState {
    pub fn pure(f: ScalarField) -> Self {
        Self { f, t: 0.0, fbar_map: FbarMap::Identity, forcing: Forcing::Zero }
    }

    fn is_linear_group(&self) -> bool {
        matches!(self.fbar_map, FbarMap::Identity) && matches!(self.forcing, Forcing::Zero)
    }
}

/// f̄ at time t.
pub fn fbar(map: &FbarMap, a: AlphaParam, f: &ScalarField, t: f64) -> ScalarField {
    match map {
        FbarMap::Identity => f.clone(),
        FbarMap::Metric(m) => {
            let g = m.at(t);
            f.zip_map(&g, |v, gv| v * gv.powf(-2.0 * a.value()))
        }
    }
}

fn forcing_at(forcing: &Forcing, t: f64, n: usize) -> Option<ScalarField> {
    match forcing {
        Forcing::Zero => None,
        Forcing::Field(f) => {
            let v = f(t);
            Some(if v.len() == n { v } else { v.resample(n) })
        }
    }
}

/// Non-group part L_α(f̄ − f) + F_t.
fn remainder(state: &ModelState, a: AlphaParam, f: &ScalarField, t: f64) -> ScalarField {
    let mut r = match &state.fbar_map {
        FbarMap::Identity => ScalarField::constant(f.len(), 0.0),
        map => apply_l_alpha(&fbar(map, a, f, t).sub(f), a),
    };
    if let Some(ft) = forcing_at(&state.forcing, t, f.len()) {
        r = r.add(&ft);
    }
    r
}

/// Lawson–RK4 integration over `steps` equal steps of size dt (dt may be
/// negative). `observe` sees (step index, t, f) at every step including 0.
pub fn solve_model_observed(
    state0: &ModelState,
    a: AlphaParam,
    dt: f64,
    steps: usize,
    mut observe: impl FnMut(usize, f64, &ScalarField),
) -> Result<ModelState> {
    let n = state0.f.len();
    let linear = state0.is_linear_group();
    if !linear {
        let cfl = dt.abs() * (n as f64 / 2.0).powf(2.0 * a.value());
        if cfl > 0.1 {
            return Err(Error::StepRejected {
                t: state0.t,
                reason: format!("dt·(N/2)^{{2α}} = {cfl:.3e} exceeds 0.1"),
            });
        }
    }
    let mut f = state0.f.clone();
    let mut t = state0.t;
    observe(0, t, &f);
    for step in 1..=steps {
        if linear {
            f = evolve_group(&f, a, dt);
        } else {
            let e_half = |g: &ScalarField| evolve_group(g, a, dt / 2.0);
            let e_full = |g: &ScalarField| evolve_group(g, a, dt);
            let k1 = remainder(state0, a, &f, t);
            let f2 = e_half(&f.add(&k1.scale(dt / 2.0)));
            let k2 = remainder(state0, a, &f2, t + dt / 2.0);
            let ef_half = e_half(&f);
            let f3 = ef_half.add(&k2.scale(dt / 2.0));
            let k3 = remainder(state0, a, &f3, t + dt / 2.0);
            let f4 = e_full(&f).add(&e_half(&k3).scale(dt));
            let k4 = remainder(state0, a, &f4, t + dt);
            let mid = e_half(&k2.add(&k3)).scale(2.0);
            let incr = e_full(&k1).add(&mid).add(&k4).scale(dt / 6.0);
            f = e_full(&f).add(&incr);
        }
        t = state0.t + step as f64 * dt;
        observe(step, t, &f);
    }
    Ok(ModelState { f, t, fbar_map: state0.fbar_map.clone(), forcing: state0.forcing.clone() })
}

/// Solution snapshots at every step up to T.
pub fn solve_model(state0: &ModelState, a: AlphaParam, t_end: f64, dt: f64) -> Result<Vec<(f64, ScalarField)>> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidSpec(format!("need dt > 0 and T ≥ 0 (dt = {dt}, T = {t_end})")));
    }
    let steps = (t_end / dt).round() as usize;
    let dt = if steps == 0 { dt } else { t_end / steps as f64 };
    let mut out = Vec::with_capacity(steps + 1);
    solve_model_observed(state0, a, dt, steps, |_, t, f| out.push((t, f.clone())))?;
    Ok(out)
}

/// Largest stable step for the model with a non-group part.
pub fn model_dt_limit(a: AlphaParam, n: usize) -> f64 {
    0.1 / (n as f64 / 2.0).powf(2.0 * a.value())
}

#[derive(Clone)]
pub enum TestFunctions {
    /// φ_q = sign(F)|F|^{p−1}/‖F‖_p^{p−1}, F = Δ_q e^{τ_qL_α} f₀.
    LpMaximizer { p: f64 },
    /// φ_q = the given field for every q.
    Fixed(ScalarField),
}

#[derive(Clone)]
pub struct PairingConfig {
    pub alpha: AlphaParam,
    pub delta: f64,
    pub eps: f64,
    /// Exponent p used in the predicted rates (NaN for Hölder runs).
    pub p: f64,
    pub q_range: Vec<i32>,
    pub fbar_map: FbarMap,
    pub forcing: Forcing,
    pub test: TestFunctions,
    pub min_steps: usize,
}

/// Per q: L_q, R_q, the Hölder majorant of R_q, their difference, the group
/// pairing P_q and the inflation |∫ f(τ_q) Δ_qφ_q|. R_q is integrated in time by composite Simpson.
pub fn pairing_scan(f0: &ScalarField, cfg: &PairingConfig) -> Result<ScanReport> {
    let n = f0.len();
    check_q_range(&cfg.q_range, n)?;
    let a = cfg.alpha;
    let state0 = ModelState { f: f0.clone(), t: 0.0, fbar_map: cfg.fbar_map.clone(), forcing: cfg.forcing.clone() };
    let rows: Vec<Result<[f64; 8]>> = cfg
        .q_range
        .par_iter()
        .map(|&q| {
            let tau = tau_schedule(q, a, cfg.delta)?;
            let phi = match &cfg.test {
                TestFunctions::LpMaximizer { p } => {
                    let big_f = project_unchecked(&evolve_group(f0, a, tau), q);
                    let m = holder_maximizer(&big_f, *p);
                    m.scale(1.0 / big_f.lp_norm(*p).powf(p - 1.0))
                }
                TestFunctions::Fixed(phi) => phi.clone(),
            };
            let test = project_unchecked(&phi, q);
            let l_test = apply_l_alpha(&test, a);
            let mut steps = cfg.min_steps.max(16);
            if !state0.is_linear_group() {
                steps = steps.max((tau / model_dt_limit(a, n)).ceil() as usize);
            }
            steps += steps % 2;
            let dt = tau / steps as f64;
            let (hp, hq) = holder_pair(cfg.p);
            let mut integrand = vec![0.0; steps + 1];
            let mut majorant = vec![0.0; steps + 1];
            let fin = solve_model_observed(&state0, a, dt, steps, |i, t, f| {
                let back = evolve_group(&l_test, a, -(tau - t));
                let diff = f.sub(&fbar(&state0.fbar_map, a, f, t));
                let mut v = diff.inner(&back);
                let mut m = diff.lp_norm(hp) * back.lp_norm(hq);
                if let Some(ft) = forcing_at(&state0.forcing, t, n) {
                    let back0 = evolve_group(&test, a, -(tau - t));
                    v += ft.inner(&back0);
                    m += ft.lp_norm(hp) * back0.lp_norm(hq);
                }
                integrand[i] = v;
                majorant[i] = m;
            })?;
            let r_q = simpson(&integrand, dt);
            let r_bound = simpson(&majorant, dt);
            let pairing0 = f0.inner(&evolve_group(&test, a, -tau));
            let final_pairing = fin.f.inner(&test);
            let l_q = final_pairing - pairing0;
            Ok([tau, l_q, r_q, r_bound, l_q - r_q, pairing0, final_pairing.abs(), steps as f64])
        })
        .collect();
    let mut report = ScanReport::new(&["q", "tau", "L", "R", "R_bound", "residual", "P", "inflation", "steps"]);
    for (&q, r) in cfg.q_range.iter().zip(rows) {
        let [tau, l, r, rb, res, p0, infl, steps] = r?;
        report.push(vec![
            q.into(),
            tau.into(),
            l.into(),
            r.into(),
            rb.into(),
            res.into(),
            p0.into(),
            infl.into(),
            Cell::Int(steps as i64),
        ]);
    }
    let al = a.value();
    let d = cfg.delta;
    report.set_meta("alpha", al);
    report.set_meta("delta", d);
    report.set_meta("eps", cfg.eps);
    report.set_meta("p", cfg.p);
    report.set_meta("N", n);
    report.set_meta("q_range", &cfg.q_range);
    if cfg.p.is_finite() && cfg.p < 2.0 {
        report.set_meta("predicted_growth", (1.0 / cfg.p - 0.5) * d * al / 4.0 - cfg.eps);
    }
    report.set_meta("predicted_decay", -(2.0 * al * d - 0.75 * al * d).min(d - al * d / 2.0));
    Ok(report)
}

/// Hölder exponents (p, p′) for the majorant; sup/L¹ when p is not finite.
fn holder_pair(p: f64) -> (f64, f64) {
    if p.is_finite() && p > 1.0 {
        (p, p / (p - 1.0))
    } else {
        (f64::INFINITY, 1.0)
    }
}

/// Composite Simpson on an even number of intervals.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1;
    assert!(n % 2 == 0 && n > 0, "Simpson needs an even number of intervals");
    let mut s = y[0] + y[n];
    for (i, v) in y.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    s * h / 3.0
}

/// log₂ slope of |column| against q.
pub fn fitted_log2_slope(report: &ScanReport, column: &str) -> f64 {
    let qs = report.column("q");
    let ys: Vec<f64> = report.column(column).iter().map(|v| v.abs().log2()).collect();
    linear_fit(&qs, &ys).0
}

#[derive(Clone, Debug)]
pub struct AssumptionReport {
    /// sup_t t^{−δ}‖1 − g^{−2α}‖_∞ over t > 0.
    pub metric_constant: f64,
    /// sup |F_t(φ)|/‖φ‖_{B^{2α−δ}_{p',1}} over the test battery.
    pub forcing_constant: f64,
}

/// Implied constants of the metric and forcing assumptions on a sampled series.
pub fn assumption_check(
    g_series: &[(f64, ScalarField)],
    forcing: &Forcing,
    a: AlphaParam,
    p: f64,
    delta: f64,
) -> Result<AssumptionReport> {
    let first = g_series.first().ok_or_else(|| Error::InvalidData("empty metric series".into()))?;
    if first.0 != 0.0 || first.1.samples().iter().any(|g| (g - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidData("metric series must start at t = 0 with g = 1".into()));
    }
    let al = a.value();
    let mut metric_constant = 0.0f64;
    for (t, g) in g_series.iter().skip(1) {
        let dev = g.map(|v| 1.0 - v.powf(-2.0 * al)).lp_norm(f64::INFINITY);
        metric_constant = metric_constant.max(dev / t.powf(delta));
    }
    let pp = if p.is_infinite() { 1.0 } else if p <= 1.0 { f64::INFINITY } else { p / (p - 1.0) };
    let mut forcing_constant = 0.0f64;
    if let Forcing::Field(ff) = forcing {
        let n = first.1.len();
        for (t, _) in g_series {
            let ft = ff(*t);
            for q in 0..LpCutoff::for_grid(n).q_max {
                let lam = lambda(q);
                let phi = ScalarField::from_fn(n, |x| (lam * x).cos());
                let norm = crate::spectral::besov_norm(&phi, 2.0 * al - delta, pp, 1.0);
                forcing_constant = forcing_constant.max(ft.inner(&phi).abs() / norm);
            }
        }
    }
    Ok(AssumptionReport { metric_constant, forcing_constant })
}

/// ‖·‖ of the odd coefficients relative to all coefficients.
pub fn odd_fraction(f: &ScalarField) -> f64 {
    let total: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        0.0
    } else {
        (f.odd_coefficient_mass() / total.sqrt()).min(1.0)
    }
}

/// 2π-periodic reflection x ↦ −x.
pub fn reflect(f: &ScalarField) -> ScalarField {
    let n = f.len();
    ScalarField::from_samples((0..n).map(|j| f.samples()[(n - j) % n]).collect())
}

/// Default Wainger grid and K for a scan at N points.
pub fn default_wainger(p: f64, eps: f64, n: usize) -> Result<WaingerData> {
    WaingerData::new(p, eps, n / 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::grid_point;
    use std::f64::consts::PI;

    fn a(v: f64) -> AlphaParam {
        AlphaParam::new(v).unwrap()
    }

    #[test]
    fn tau_values() {
        let al = a(0.25);
        let t = tau_schedule(10, al, 0.5).unwrap();
        assert!((t - 2f64.powf(-4.6875)).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for q in 1..20 {
            let t = tau_schedule(q, al, 0.5).unwrap();
            assert!(t * lambda(q).powf(0.5) >= 1.0);
            assert!(t < prev);
            prev = t;
        }
        assert!(tau_schedule(3, al, 0.0).is_err());
    }

    #[test]
    fn delta_defaults() {
        let (d, fb) = default_delta_lp(a(0.25), 1.2);
        assert!(fb && (d - 0.5).abs() < 1e-15);
        let (d, fb) = default_delta_lp(a(0.1), 4.0);
        assert!(!fb && (d - 0.2).abs() < 1e-15);
        assert!((default_delta_holder(a(0.25), 0.5) - 0.25).abs() < 1e-15);
        assert!(default_eps_lp(a(0.25), 2.0, 0.5).is_err());
    }

    #[test]
    fn wainger_is_even_real() {
        let w = WaingerData::new(1.2, 0.01, 64).unwrap();
        let f = w.field(512).unwrap();
        assert!(f.odd_coefficient_mass() < 1e-14);
        assert!((f.coeff(2).re - 2f64.powf(-w.exponent())).abs() < 1e-15);
        assert_eq!(f.coeff(1).re, 0.0);
        assert!(w.field(128).is_err());
    }

    #[test]
    fn wainger_initial_blocks_flat() {
        let w = WaingerData::new(1.2, 0.01, 1 << 12).unwrap();
        let r = wainger_growth_scan(&w, a(0.25), 0.5, &[5, 6, 7, 8, 9, 10], 1 << 14).unwrap();
        let init = r.column("initial_norm");
        let scaled: Vec<f64> = init.iter().zip(5..).map(|(v, q)| v * lambda(q).powf(0.005)).collect();
        for s in &scaled {
            assert!((s / scaled[0] - 1.0).abs() < 0.1, "{scaled:?}");
        }
        assert!(wainger_growth_scan(&w.with_k_max(8).clone(), a(0.25), 0.5, &[3], 64).is_ok());
        let w2 = WaingerData::new(2.5, 0.01, 16).unwrap();
        assert!(matches!(wainger_growth_scan(&w2, a(0.25), 0.5, &[3], 64), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn dual_pairing_identity() {
        let al = a(0.25);
        let p = 4.0;
        let pp = p / (p - 1.0);
        let n = 1 << 12;
        let w = WaingerData::new(pp, 0.01, n / 4).unwrap();
        for q in [5, 7] {
            let d = dual_test_functions(q, al, p, &w, 0.5, n).unwrap();
            assert!((d.pairing - d.norm_product).abs() < 1e-8 * d.norm_product.abs());
            assert!(d.h.odd_coefficient_mass() < 1e-10 * d.h.lp_norm(2.0));
            assert!((d.h.lp_norm(p) - lambda(q).powf(-0.005)).abs() < 1e-10);
            assert!(d.discarded_odd > 0.0 && d.discarded_odd < 1.0);
        }
    }

    #[test]
    fn assembled_blocks_are_exact() {
        let al = a(0.25);
        let n = 1 << 12;
        let d = assemble_p_big_data(al, 4.0, 0.5, 0.01, &[6, 8], n).unwrap();
        let b6 = project_unchecked(&d.f0, 6);
        for (x, y) in b6.samples().iter().zip(d.summands[0].1.samples()) {
            assert!((x - y).abs() < 1e-13);
        }
        let bound: f64 = [6, 8].iter().map(|&q| lambda(q).powf(-0.005)).sum();
        assert!(d.f0.lp_norm_oversampled(4.0, 2) <= bound * (1.0 + 1e-9));
        assert!(d.f0.odd_coefficient_mass() < 1e-12);
        assert!(assemble_p_big_data(al, 4.0, 0.5, 0.01, &[6, 7], n).is_err());
        assert!(assemble_p_big_data(al, 4.0, 0.5, 0.01, &[6, 6], n).is_err());
    }

    #[test]
    fn holder_data_blocks() {
        let al = a(0.25);
        let beta = 0.5;
        let n = 1 << 12;
        let d = assemble_holder_data(al, beta, 0.25, 0.004, &[6], n).unwrap();
        let bq = project_unchecked(&d.f0, 6);
        let lhs = bq.lp_norm(f64::INFINITY);
        let rhs = lambda(6).powf(-beta) * lambda(6).powf(-0.002);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
        let q: Vec<f64> = [1usize << 12, 1 << 13]
            .iter()
            .map(|&n| {
                let d = assemble_holder_data(al, 1.0, 0.25, 0.004, &[4, 6, 8], n).unwrap();
                crate::curve_geometry::holder_quotient(d.f0.samples(), 2.0 * PI / n as f64, 1.0, 2)
            })
            .collect();
        assert!((q[1] / q[0] - 1.0).abs() < 0.05, "{q:?}");
    }

    #[test]
    fn pure_group_solve_is_exact() {
        let al = a(0.25);
        let f0 = ScalarField::from_fn(64, |x| (3.0 * x).sin());
        let s = solve_model(&ModelState::pure(f0.clone()), al, 1.0, 0.25).unwrap();
        let fin = &s.last().unwrap().1;
        for j in 0..64 {
            let x = grid_point(j, 64);
            assert!((fin.samples()[j] - (3.0 * x + 3f64.sqrt()).sin()).abs() < 1e-12);
        }
        let unit = ModelState {
            fbar_map: FbarMap::Metric(MetricModel::Frozen(ScalarField::constant(64, 1.0))),
            ..ModelState::pure(f0.clone())
        };
        let s2 = solve_model(&unit, al, 1.0, 0.01).unwrap();
        for (x, y) in s2.last().unwrap().1.samples().iter().zip(fin.samples()) {
            assert!((x - y).abs() < 1e-12);
        }
        let l2: Vec<f64> = s.iter().map(|(_, f)| f.lp_norm(2.0)).collect();
        assert!(l2.iter().all(|v| (v - l2[0]).abs() < 1e-10));
    }

    #[test]
    fn frozen_metric_taylor_consistency() {
        let al = a(0.25);
        let n = 64;
        let g = ScalarField::from_fn(n, |x| 1.0 + 0.1 * x.cos());
        let f0 = ScalarField::from_fn(n, |x| (2.0 * x).cos() + 0.5 * (5.0 * x).sin());
        let state = ModelState { fbar_map: FbarMap::Metric(MetricModel::Frozen(g)), ..ModelState::pure(f0.clone()) };
        let taylor = |dt: f64| f0.add(&apply_l_alpha(&fbar(&state.fbar_map, al, &f0, 0.0), al).scale(dt));
        let err = |dt: f64| {
            let s = solve_model(&state, al, dt, dt).unwrap();
            s.last().unwrap().1.sub(&taylor(dt)).lp_norm(2.0)
        };
        let (e1, e2) = (err(4e-3), err(2e-3));
        assert!((e1 / e2).log2() >= 1.9, "{e1} {e2}");
    }

    #[test]
    fn reflection_time_reversal_symmetry() {
        let al = a(0.3);
        let n = 128;
        let g = ScalarField::from_fn(n, |x| 1.0 + 0.1 * x.cos());
        let f0 = ScalarField::from_fn(n, |x| (3.0 * x).cos() + 0.2 * (7.0 * x).cos());
        let state = ModelState { fbar_map: FbarMap::Metric(MetricModel::Frozen(g)), ..ModelState::pure(f0) };
        let dt = model_dt_limit(al, n) / 2.0;
        let fwd = solve_model_observed(&state, al, dt, 40, |_, _, _| {}).unwrap().f;
        let bwd = solve_model_observed(&state, al, -dt, 40, |_, _, _| {}).unwrap().f;
        let r = reflect(&bwd);
        for (x, y) in fwd.samples().iter().zip(r.samples()) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(odd_fraction(&fwd) > 1e-3);
    }

    #[test]
    fn cfl_rejection() {
        let al = a(0.25);
        let g = ScalarField::constant(256, 1.1);
        let state = ModelState {
            fbar_map: FbarMap::Metric(MetricModel::Frozen(g)),
            ..ModelState::pure(ScalarField::constant(256, 1.0))
        };
        assert!(matches!(solve_model(&state, al, 1.0, 0.1), Err(Error::StepRejected { .. })));
    }

    #[test]
    fn duhamel_exact_for_pure_group() {
        let al = a(0.25);
        let n = 1 << 10;
        let f0 = WaingerData::new(1.2, 0.005, n / 4).unwrap().field(n).unwrap();
        let cfg = PairingConfig {
            alpha: al,
            delta: 0.5,
            eps: 0.005,
            p: 1.2,
            q_range: vec![4, 5, 6],
            fbar_map: FbarMap::Identity,
            forcing: Forcing::Zero,
            test: TestFunctions::LpMaximizer { p: 1.2 },
            min_steps: 16,
        };
        let r = pairing_scan(&f0, &cfg).unwrap();
        for (l, rr) in r.column("L").iter().zip(r.column("R")) {
            assert!(l.abs() < 1e-10 && rr.abs() < 1e-10);
        }
        let p = r.column("P");
        for (q, pq) in [4, 5, 6].iter().zip(&p) {
            let tau = tau_schedule(*q, al, 0.5).unwrap();
            let direct = evolve_group(&project_unchecked(&f0, *q), al, tau).lp_norm(1.2);
            assert!((pq - direct).abs() < 1e-9 * direct);
        }
    }

    #[test]
    fn weak_identity_with_metric_and_forcing() {
        let al = a(0.25);
        let n = 1 << 10;
        let f0 = WaingerData::new(1.2, 0.005, n / 4).unwrap().field(n).unwrap();
        let h = ScalarField::from_fn(n, |x| 0.1 * x.cos());
        let forcing: FieldFn = Arc::new(move |t: f64| ScalarField::from_fn(n, |x| t * (40.0 * x).cos()));
        let cfg = PairingConfig {
            alpha: al,
            delta: 0.5,
            eps: 0.005,
            p: 1.2,
            q_range: vec![4, 5],
            fbar_map: FbarMap::Metric(MetricModel::Ramp(h)),
            forcing: Forcing::Field(forcing),
            test: TestFunctions::LpMaximizer { p: 1.2 },
            min_steps: 16,
        };
        let r = pairing_scan(&f0, &cfg).unwrap();
        for (l, res) in r.column("L").iter().zip(r.column("residual")) {
            assert!(res.abs() < 1e-6 * l.abs().max(1e-12), "L {l} residual {res}");
        }
    }

    #[test]
    fn assumption_constants() {
        let al = a(0.25);
        let n = 64;
        let ones: Vec<(f64, ScalarField)> = (0..5).map(|i| (i as f64 * 0.1, ScalarField::constant(n, 1.0))).collect();
        let r = assumption_check(&ones, &Forcing::Zero, al, 1.2, 0.5).unwrap();
        assert_eq!(r.metric_constant, 0.0);
        let h = ScalarField::from_fn(n, |x| 0.3 * (2.0 * x).cos());
        let model = MetricModel::Ramp(h);
        let series: Vec<(f64, ScalarField)> = (0..6).map(|i| {
            let t = i as f64 * 1e-3;
            (t, model.at(t))
        }).collect();
        let r = assumption_check(&series, &Forcing::Zero, al, 1.2, 1.0).unwrap();
        assert!((r.metric_constant - 2.0 * 0.25 * 0.3).abs() < 0.1 * 0.15, "{}", r.metric_constant);
    }
}
