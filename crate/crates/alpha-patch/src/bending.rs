//! Closing a curvature-prescribed arc with two symmetric smooth bends.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::biot_savart::AlphaParam;
use crate::curve_geometry::{curvature, integrate_curvature, Anchor, ClosedCurve};
use crate::error::{Error, Result};
use crate::field::{grid_point, ScalarField};
use crate::illposedness::{
    assemble_holder_data, assemble_p_big_data, default_delta_holder, default_delta_lp, default_eps_holder,
    default_eps_lp, reflect, WaingerData,
};
use crate::quad::integrate;
use crate::spectral::LpCutoff;

pub const BUMP_HALF_WIDTH: f64 = PI / 8.0;
pub const ARC_LENGTH: f64 = 2.0 * PI;

fn bump_mass() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| {
        let f = |u: f64| if u.abs() < 1.0 { (-1.0 / (1.0 - u * u)).exp() } else { 0.0 };
        BUMP_HALF_WIDTH * integrate(f, -1.0, 1.0, 1e-15, 1e-14, 400).0
    })
}

/// φ(s) = (π/Z) exp(−1/(1 − (8s/π)²)) on |s| < π/8, with ∫φ = π.
pub fn bump(s: f64) -> f64 {
    let u = s / BUMP_HALF_WIDTH;
    if u.abs() >= 1.0 {
        0.0
    } else {
        PI / bump_mass() * (-1.0 / (1.0 - u * u)).exp()
    }
}

/// Bump centred at `center` on the 2π-periodic arc.
#[derive(Clone, Copy, Debug)]
pub struct BumpProfile {
    pub center: f64,
}

impl BumpProfile {
    pub fn eval(&self, s: f64) -> f64 {
        let d = (s - self.center + PI).rem_euclid(2.0 * PI) - PI;
        bump(d)
    }

    pub fn sample(&self, n: usize) -> ScalarField {
        ScalarField::from_fn(n, |s| self.eval(s))
    }
}

/// κ_g = φ(· − h) + φ(· + h).
pub fn bend_profile(h: f64, n: usize) -> ScalarField {
    BumpProfile { center: h }.sample(n).add(&BumpProfile { center: -h }.sample(n))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonPolicy {
    /// Halve from 1 until the tangent of the ε κ_♯ arc varies by ≤ 1/1000.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct BendOptions {
    pub epsilon: EpsilonPolicy,
    /// Closing tolerance on the endpoint gap; default 1e-12·L.
    pub tol_close: Option<f64>,
    pub scan_points: usize,
    pub max_iter: usize,
}

impl Default for BendOptions {
    fn default() -> Self {
        Self { epsilon: EpsilonPolicy::Auto, tol_close: None, scan_points: 64, max_iter: 200 }
    }
}

#[derive(Clone, Debug)]
pub struct BendResult {
    pub h_star: f64,
    pub curve: ClosedCurve,
    pub kappa_g: ScalarField,
    /// Full curvature ε κ_♯ + κ_g on the arc-length grid.
    pub kappa: ScalarField,
    pub epsilon: f64,
    /// Signed horizontal gap at h*.
    pub gap: f64,
    pub turning: f64,
    pub margin: f64,
}

/// Largest tangent-angle excursion of the arc with curvature κ on [−π, π].
pub fn tangent_variation(kappa: &ScalarField) -> f64 {
    let th = kappa.antiderivative_periodic();
    let s = th.samples();
    let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    hi - lo
}

fn choose_epsilon(kappa_sharp: &ScalarField, policy: EpsilonPolicy) -> Result<f64> {
    match policy {
        EpsilonPolicy::Fixed(e) if e > 0.0 => Ok(e),
        EpsilonPolicy::Fixed(e) => Err(Error::InvalidSpec(format!("epsilon = {e} must be positive"))),
        EpsilonPolicy::Auto => {
            let var = tangent_variation(kappa_sharp);
            let mut eps = 1.0;
            for _ in 0..200 {
                if eps * var <= 1e-3 {
                    return Ok(eps);
                }
                eps *= 0.5;
            }
            Err(Error::InvalidData("tangent variation does not shrink under halving".into()))
        }
    }
}

fn check_sharp(k: &ScalarField) -> Result<()> {
    let scale = k.lp_norm(f64::INFINITY).max(1.0);
    let asym = k.sub(&reflect(k)).lp_norm(f64::INFINITY);
    if asym > 1e-10 * scale {
        return Err(Error::InvalidData(format!("kappa_sharp is not even (reflection defect {asym:.3e})")));
    }
    let mass = k.mean() * ARC_LENGTH;
    if mass.abs() > 1e-10 * scale {
        return Err(Error::InvalidData(format!("kappa_sharp has nonzero mean (∫κ = {mass:.3e})")));
    }
    Ok(())
}

/// Signed horizontal distance of the endpoints of the even arc κ_h, anchored at
/// γ(0) = 0 with horizontal tangent.
pub fn signed_gap(base: &ScalarField, h: f64) -> f64 {
    let k = base.add(&bend_profile(h, base.len()));
    integrate_curvature(&k, ARC_LENGTH, Anchor::default()).1[0]
}

/// Smallest h* ∈ [π/4, 7π/8] with vanishing signed gap, and the closed curve.
pub fn bend_close(kappa_sharp: &ScalarField, opts: BendOptions) -> Result<BendResult> {
    check_sharp(kappa_sharp)?;
    let n = kappa_sharp.len();
    let eps = choose_epsilon(kappa_sharp, opts.epsilon)?;
    let base = kappa_sharp.scale(eps);
    let tol = opts.tol_close.unwrap_or(1e-12 * ARC_LENGTH);
    let (lo, hi) = (PI / 4.0, 7.0 * PI / 8.0);
    let m = opts.scan_points.max(2);
    let hs: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    let gaps: Vec<f64> = hs.par_iter().map(|&h| signed_gap(&base, h)).collect();
    let idx = (0..m - 1)
        .find(|&i| gaps[i] == 0.0 || gaps[i].signum() != gaps[i + 1].signum())
        .ok_or(Error::Bracket { lo, hi, gap_lo: gaps[0], gap_hi: gaps[m - 1] })?;
    let (mut a, mut b) = (hs[idx], hs[idx + 1]);
    let mut ga = gaps[idx];
    let mut h = if ga == 0.0 { a } else { 0.5 * (a + b) };
    let mut gh = if ga == 0.0 { 0.0 } else { signed_gap(&base, h) };
    for _ in 0..opts.max_iter {
        if gh.abs() < tol || b - a < 1e-15 {
            break;
        }
        if gh.signum() == ga.signum() {
            a = h;
            ga = gh;
        } else {
            b = h;
        }
        h = 0.5 * (a + b);
        gh = signed_gap(&base, h);
    }
    if gh.abs() >= tol {
        return Err(Error::Degenerate(format!("bisection stalled with gap {gh:.3e} at h = {h}")));
    }
    let kappa_g = bend_profile(h, n);
    let kappa = base.add(&kappa_g);
    let (nodes, _, turning) = integrate_curvature(&kappa, ARC_LENGTH, Anchor::default());
    let curve = ClosedCurve::new(&nodes)?;
    let margin = curve.simplicity_margin();
    Ok(BendResult { h_star: h, curve, kappa_g, kappa, epsilon: eps, gap: gh, turning, margin })
}

/// Defect curvature(curve) − ε κ_♯ − κ_g in the sup norm.
pub fn decomposition_defect(r: &BendResult, kappa_sharp: &ScalarField) -> f64 {
    curvature(&r.curve).sub(&kappa_sharp.scale(r.epsilon)).sub(&r.kappa_g).lp_norm(f64::INFINITY)
}

/// Largest distance between node j and the mirror image of node N − j.
pub fn mirror_defect(curve: &ClosedCurve) -> f64 {
    let n = curve.n();
    let p0 = curve.node(0);
    (0..n)
        .map(|j| {
            let a = curve.node(j);
            let b = curve.node((n - j) % n);
            ((a[0] - p0[0]) + (b[0] - p0[0])).hypot(a[1] - b[1])
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PatchSpec {
    Lp { p: f64 },
    Holder { beta: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchManifest {
    pub spec: PatchSpec,
    pub alpha: f64,
    pub delta: f64,
    pub delta_fallback: bool,
    /// ε of the data construction.
    pub eps_data: f64,
    /// ε scaling κ_♯ in the bend.
    pub epsilon_bend: f64,
    pub q_set: Vec<i32>,
    pub n: usize,
    pub h_star: f64,
    pub gap: f64,
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub struct InitialPatch {
    pub bend: BendResult,
    pub kappa_sharp: ScalarField,
    pub manifest: PatchManifest,
}

/// Even indices 4 ≤ q ≤ q_max resolvable on N points.
pub fn lacunary_indices(n: usize) -> Vec<i32> {
    let q_max = LpCutoff::for_grid(n).q_max;
    (4..=q_max).filter(|q| q % 2 == 0).collect()
}

/// κ_♯ for the requested class, bent closed, with blocks from `lacunary_indices(n)`.
pub fn make_initial_patch(spec: PatchSpec, a: AlphaParam, n: usize, opts: BendOptions) -> Result<InitialPatch> {
    make_initial_patch_with(spec, a, n, &lacunary_indices(n), opts)
}

/// As `make_initial_patch` with an explicit lacunary block set (unused for p < 2).
pub fn make_initial_patch_with(
    spec: PatchSpec,
    a: AlphaParam,
    n: usize,
    q_set: &[i32],
    opts: BendOptions,
) -> Result<InitialPatch> {
    let al = a.value();
    let (kappa_sharp, delta, fb, eps, q_set) = match spec {
        PatchSpec::Lp { p } => {
            if !(p > 1.0) || (p - 2.0).abs() < 1e-12 {
                return Err(Error::InvalidSpec(format!("need p > 1 and p ≠ 2, got p = {p}")));
            }
            let limit = 0.5 - 1.0 / (2.0 * p);
            if al >= limit {
                return Err(Error::InvalidSpec(format!("α < 1/2 − 1/(2p) violated: α = {al} ≥ {limit}")));
            }
            let (delta, fb) = default_delta_lp(a, p);
            let eps = default_eps_lp(a, p, delta)?;
            if p < 2.0 {
                let w = WaingerData::new(p, eps, n / 4)?;
                (w.field(n)?, delta, fb, eps, Vec::new())
            } else {
                (assemble_p_big_data(a, p, delta, eps, q_set, n)?.f0, delta, fb, eps, q_set.to_vec())
            }
        }
        PatchSpec::Holder { beta } => {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::InvalidSpec(format!("0 ≤ β < 1 violated: β = {beta}")));
            }
            let delta = default_delta_holder(a, beta);
            let eps = default_eps_holder(a, delta);
            (assemble_holder_data(a, beta, delta, eps, q_set, n)?.f0, delta, false, eps, q_set.to_vec())
        }
    };
    // Zero-mean, even projection.
    let kappa_sharp = kappa_sharp.even_part();
    let kappa_sharp = kappa_sharp.map(|v| v - kappa_sharp.mean());
    let bend = bend_close(&kappa_sharp, opts)?;
    let manifest = PatchManifest {
        spec,
        alpha: al,
        delta,
        delta_fallback: fb,
        eps_data: eps,
        epsilon_bend: bend.epsilon,
        q_set,
        n,
        h_star: bend.h_star,
        gap: bend.gap,
        margin: bend.margin,
    };
    Ok(InitialPatch { bend, kappa_sharp, manifest })
}

/// Arc-length nodes s_j = 2πj/N of the bend grid.
pub fn arc_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| grid_point(j, n)).collect()
}
