//! Boundary velocity of an α-patch and its arc-length derivative.
//!
//! The kernel |γ(x) − γ(y)|^{−2α} is split as w(x − y)·G(x, y), with
//! w(u) = |2 sin(u/2)|^{−2α} and G = ρ^{−2α}, ρ = |γ(x) − γ(y)|/|2 sin((x−y)/2)|
//! smooth for a simple curve. The weight's Fourier coefficients are explicit, so
//! ∫ w(x_i − y) φ(y) dy is integrated exactly for trigonometric φ. The
//! derivative uses the same rule with the coefficients of w', which is the
//! principal value of the odd hypersingular part.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::curve_geometry::{curvature, discrete_norms, dist, ClosedCurve, NormSpec, Point};
use crate::error::{Error, Result};
use crate::field::{fft_inverse, grid_point, wavenumber, ScalarField};
use crate::quad;

/// Fractional order of the Biot–Savart kernel, 0 < α < 1/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaParam {
    alpha: f64,
}

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 0.5 {
            Ok(Self { alpha })
        } else {
            Err(Error::UnsupportedRegime(format!("alpha = {alpha} is outside (0, 1/2)")))
        }
    }

    pub fn value(self) -> f64 {
        self.alpha
    }

    /// Sobolev threshold 1/(1 − 2α) for Lipschitz boundary velocity.
    pub fn lipschitz_threshold(self) -> f64 {
        1.0 / (1.0 - 2.0 * self.alpha)
    }
}

/// Fourier coefficients ŵ_k of |2 sin(u/2)|^{−2α}, normalized by 1/2π, k = 0..=kmax.
pub fn weight_coefficients(alpha: f64, kmax: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(kmax + 1);
    let c0 = gamma(1.0 - 2.0 * alpha) / gamma(1.0 - alpha).powi(2);
    c.push(c0);
    for k in 0..kmax {
        let kf = k as f64;
        c.push(c[k] * (kf + alpha) / (kf + 1.0 - alpha));
    }
    c
}

/// Product-quadrature weights R_m and R'_m on an N-point grid.
#[derive(Clone, Debug)]
pub struct SingularWeights {
    alpha: f64,
    r: Vec<f64>,
    dr: Vec<f64>,
    sin_half: Vec<f64>,
    cos_half: Vec<f64>,
}

impl SingularWeights {
    pub fn new(n: usize, a: AlphaParam) -> Self {
        let c = weight_coefficients(a.value(), n / 2);
        let mut r: Vec<Complex64> = (0..n)
            .map(|j| {
                let k = wavenumber(j, n);
                let ck = if n % 2 == 0 && j == n / 2 { c[n / 2] } else { c[k.unsigned_abs() as usize] };
                Complex64::new(ck, 0.0)
            })
            .collect();
        let mut dr: Vec<Complex64> = (0..n)
            .map(|j| {
                let k = wavenumber(j, n);
                if n % 2 == 0 && j == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k as f64 * c[k.unsigned_abs() as usize])
                }
            })
            .collect();
        fft_inverse(&mut r);
        fft_inverse(&mut dr);
        let h = 2.0 * PI / n as f64;
        let sin_half = (0..n).map(|m| (0.5 * grid_point(m, n)).sin()).collect();
        let cos_half = (0..n).map(|m| (0.5 * grid_point(m, n)).cos()).collect();
        Self {
            alpha: a.value(),
            r: r.iter().map(|z| z.re * h).collect(),
            dr: dr.iter().map(|z| z.re * h).collect(),
            sin_half,
            cos_half,
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// Velocity on the boundary, optionally with ∂_s v and its frame components.
#[derive(Clone, Debug)]
pub struct BoundaryVelocity {
    pub v: Vec<Point>,
    pub dsv: Option<Vec<Point>>,
    pub dsv_t: Option<ScalarField>,
    pub dsv_n: Option<ScalarField>,
    /// Set when the curve class sits at or below the Lipschitz threshold.
    pub regime_warning: bool,
}

/// Parameter-space data shared by all node sums.
struct CurveData {
    pos: Vec<Point>,
    d1: Vec<Point>,
    metric: Vec<f64>,
    dmetric: Vec<f64>,
}

impl CurveData {
    fn new(curve: &ClosedCurve) -> Self {
        let g = curve.metric();
        Self {
            pos: curve.nodes(),
            d1: curve.velocity_param(),
            metric: g.samples().to_vec(),
            dmetric: g.derivative().into_samples(),
        }
    }
}

/// v_i and ∂_x v_i at node i.
fn node_sums(i: usize, data: &CurveData, w: &SingularWeights, with_derivative: bool) -> (Point, Point) {
    let n = data.pos.len();
    let a2 = 2.0 * w.alpha;
    let pi = data.pos[i];
    let ti = data.d1[i];
    let mut v = [0.0; 2];
    let mut dv = [0.0; 2];
    for j in 0..n {
        let m = (i + n - j) % n;
        let tj = data.d1[j];
        let (g, dg) = if m == 0 {
            let gi = data.metric[i];
            let gg = gi.powf(-a2);
            (gg, -a2 * gg / gi * 0.5 * data.dmetric[i])
        } else {
            let d = [pi[0] - data.pos[j][0], pi[1] - data.pos[j][1]];
            let r = d[0].hypot(d[1]);
            let s = 2.0 * w.sin_half[m];
            let rho = r / s;
            let gg = rho.powf(-a2);
            if with_derivative {
                let drho = (d[0] * ti[0] + d[1] * ti[1]) / (r * s) - rho * w.cos_half[m] / s;
                (gg, -a2 * gg / rho * drho)
            } else {
                (gg, 0.0)
            }
        };
        let rw = w.r[m];
        v[0] += rw * tj[0] * g;
        v[1] += rw * tj[1] * g;
        if with_derivative {
            let rd = w.dr[m];
            dv[0] += rd * tj[0] * g + rw * tj[0] * dg;
            dv[1] += rd * tj[1] * g + rw * tj[1] * dg;
        }
    }
    let f = -1.0 / a2;
    ([f * v[0], f * v[1]], [f * dv[0], f * dv[1]])
}

/// v(γ(x_j)) = −(1/2α)∮ T(s')|γ(x_j) − γ(s')|^{−2α} ds' at every node.
pub fn boundary_velocity(curve: &ClosedCurve, a: AlphaParam) -> BoundaryVelocity {
    let w = SingularWeights::new(curve.n(), a);
    boundary_velocity_with(curve, &w)
}

pub fn boundary_velocity_with(curve: &ClosedCurve, w: &SingularWeights) -> BoundaryVelocity {
    let data = CurveData::new(curve);
    let v = (0..curve.n())
        .into_par_iter()
        .map(|i| node_sums(i, &data, w, false).0)
        .collect();
    BoundaryVelocity { v, dsv: None, dsv_t: None, dsv_n: None, regime_warning: false }
}

/// v and ∂_s v with tangential and normal components.
pub fn velocity_arc_derivative(curve: &ClosedCurve, a: AlphaParam) -> BoundaryVelocity {
    let w = SingularWeights::new(curve.n(), a);
    velocity_arc_derivative_with(curve, &w)
}

pub fn velocity_arc_derivative_with(curve: &ClosedCurve, w: &SingularWeights) -> BoundaryVelocity {
    assert_eq!(curve.n(), w.len(), "weights built for a different grid");
    let data = CurveData::new(curve);
    let frame = curve.frame();
    let sums: Vec<(Point, Point)> = (0..curve.n())
        .into_par_iter()
        .map(|i| node_sums(i, &data, w, true))
        .collect();
    let mut v = Vec::with_capacity(sums.len());
    let mut dsv = Vec::with_capacity(sums.len());
    let mut tc = Vec::with_capacity(sums.len());
    let mut nc = Vec::with_capacity(sums.len());
    for (i, (vi, dxv)) in sums.into_iter().enumerate() {
        let g = data.metric[i];
        let d = [dxv[0] / g, dxv[1] / g];
        let t = frame.tangent[i];
        let nn = frame.normal[i];
        tc.push(d[0] * t[0] + d[1] * t[1]);
        nc.push(d[0] * nn[0] + d[1] * nn[1]);
        v.push(vi);
        dsv.push(d);
    }
    BoundaryVelocity {
        v,
        dsv: Some(dsv),
        dsv_t: Some(ScalarField::from_samples(tc)),
        dsv_n: Some(ScalarField::from_samples(nc)),
        regime_warning: false,
    }
}

/// As [`velocity_arc_derivative`], after checking that the curve has a finite
/// discrete W^{2,p} norm. The result is flagged when p ≤ 1/(1 − 2α).
pub fn velocity_arc_derivative_for_class(curve: &ClosedCurve, a: AlphaParam, p: f64) -> Result<BoundaryVelocity> {
    let norm = discrete_norms(curve, NormSpec::Sobolev { p })?;
    if !norm.is_finite() {
        return Err(Error::InvalidData(format!("discrete W^{{2,{p}}} norm is not finite")));
    }
    let mut out = velocity_arc_derivative(curve, a);
    out.regime_warning = p <= a.lipschitz_threshold();
    Ok(out)
}

/// (∂_s v at node, v at node) for a subset of nodes, O(N) per node.
pub fn velocity_arc_derivative_at(curve: &ClosedCurve, w: &SingularWeights, nodes: &[usize]) -> Vec<(Point, Point)> {
    let data = CurveData::new(curve);
    nodes
        .par_iter()
        .map(|&i| {
            let (v, dxv) = node_sums(i, &data, w, true);
            let g = data.metric[i];
            ([dxv[0] / g, dxv[1] / g], v)
        })
        .collect()
}

/// Normal component of ∂_s v at selected nodes.
pub fn normal_derivative_at(curve: &ClosedCurve, w: &SingularWeights, nodes: &[usize]) -> Vec<f64> {
    let frame = curve.frame();
    velocity_arc_derivative_at(curve, w, nodes)
        .iter()
        .zip(nodes)
        .map(|((d, _), &i)| d[0] * frame.normal[i][0] + d[1] * frame.normal[i][1])
        .collect()
}

/// Result of the off-boundary normal probe.
#[derive(Clone, Copy, Debug)]
pub struct OffBoundaryProbe {
    /// (v(X) − v(y))·n(y).
    pub value: f64,
    /// Parameter of the nearest boundary point y.
    pub param: f64,
    pub distance: f64,
}

/// (v(X) − v(y))·n(y) for X within five node spacings of the curve, y the
/// nearest point of the trigonometric interpolant.
pub fn normal_offboundary_probe(curve: &ClosedCurve, a: AlphaParam, x: Point) -> Result<OffBoundaryProbe> {
    let n = curve.n();
    let nodes = curve.nodes();
    let d: Vec<f64> = nodes.iter().map(|p| dist(*p, x)).collect();
    let (j0, dmin) = d
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (j, &v)| if v < b.1 { (j, v) } else { b });
    let reach = 5.0 * curve.length() / n as f64;
    if dmin > reach {
        return Err(Error::InvalidSpec(format!(
            "point is {dmin:.3e} from the boundary, beyond the reach {reach:.3e}"
        )));
    }
    let tol = dmin * 1e-6 + 1e-12;
    for j in 0..n {
        let gap = j.abs_diff(j0).min(n - j.abs_diff(j0));
        let local = d[j] <= d[(j + 1) % n] && d[j] <= d[(j + n - 1) % n];
        if gap > 2 && local && d[j] <= dmin + tol {
            return Err(Error::Ambiguous(format!("nodes {j0} and {j} are both nearest")));
        }
    }
    // Newton on (γ(y) − X)·γ'(y) = 0 from the nearest node.
    let mut y = grid_point(j0, n);
    for _ in 0..30 {
        let (p, d1) = curve.eval(y);
        let d2 = curve.eval_second(y);
        let e = [p[0] - x[0], p[1] - x[1]];
        let f = e[0] * d1[0] + e[1] * d1[1];
        let df = d1[0] * d1[0] + d1[1] * d1[1] + e[0] * d2[0] + e[1] * d2[1];
        let step = f / df;
        y -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let (py, dy) = curve.eval(y);
    let gy = dy[0].hypot(dy[1]);
    let normal = [dy[1] / gy, -dy[0] / gy];
    let distance = dist(py, x);
    if distance == 0.0 {
        return Ok(OffBoundaryProbe { value: 0.0, param: y, distance });
    }
    let a2 = 2.0 * a.value();
    let integrand = |u: f64| {
        let (p, d1) = curve.eval(y + u);
        let kx = dist(x, p).powf(-a2);
        let ky = if u.abs() < 1e-300 { 0.0 } else { dist(py, p).powf(-a2) };
        (d1[0] * normal[0] + d1[1] * normal[1]) * (kx - ky)
    };
    // u = ±π w^m clusters nodes at y and removes the |u|^{−2α} endpoint singularity.
    let m = 2.0 / (1.0 - a2);
    let half = |sign: f64| {
        quad::integrate(
            |w: f64| {
                let u = PI * w.powf(m);
                integrand(sign * u) * PI * m * w.powf(m - 1.0)
            },
            0.0,
            1.0,
            1e-13,
            1e-11,
            4000,
        )
        .0
    };
    let value = -(half(1.0) + half(-1.0)) / a2;
    Ok(OffBoundaryProbe { value, param: y, distance })
}

/// Converged U with v = U·T on the unit circle, by the 1-D circle reduction.
pub fn circle_speed(a: AlphaParam, radius: f64) -> f64 {
    let a2 = 2.0 * a.value();
    let m = 1.0 / (1.0 - a2);
    // s = π w^m on each half removes the endpoint singularity.
    let f = |w: f64| {
        let s = PI * w.powf(m);
        s.cos() * (2.0 * (s / 2.0).sin()).powf(-a2) * PI * m * w.powf(m - 1.0)
    };
    let (i, _) = quad::integrate(f, 0.0, 1.0, 1e-15, 1e-13, 2000);
    -(1.0 / a2) * 2.0 * i * radius.powf(1.0 - a2)
}

/// Curvature of the curve and ∂_s v·N side by side, for diagnostics.
pub fn normal_strain(curve: &ClosedCurve, a: AlphaParam) -> (ScalarField, ScalarField) {
    let bv = velocity_arc_derivative(curve, a);
    (curvature(curve), bv.dsv_n.expect("filled by velocity_arc_derivative"))
}

/// Settings for [`non_lipschitz_probe`].
#[derive(Clone, Copy, Debug)]
pub struct ProbeOptions {
    /// Grid size of the bent curve; the mollification scale is one cell.
    pub n: usize,
    /// κ_♯ = amplitude·(κ_sing − mean), κ_sing = −(s² + h²)^{−a/2}χ(s).
    pub amplitude: f64,
    /// Drop the singular term (smooth comparison curve).
    pub smooth: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { n: 1 << 18, amplitude: -0.2, smooth: false }
    }
}

/// Probe values and fits.
#[derive(Clone, Debug)]
pub struct ProbeResult {
    pub report: crate::report::ScanReport,
    /// log|∂_s v·N| against log s.
    pub raw_slope: f64,
    /// log|value(s_{i+1}) − value(s_i)| against log s_i on a dyadic grid,
    /// which removes the additive constant.
    pub increment_slope: f64,
    pub curve: ClosedCurve,
}

/// Singular curvature of the non-Lipschitz construction on the 2π arc grid.
pub fn singular_curvature(n: usize, a_exp: f64) -> ScalarField {
    let h = 2.0 * PI / n as f64;
    let cut = PI / 8.0;
    ScalarField::from_fn(n, |x| {
        let s = if x > PI { x - 2.0 * PI } else { x };
        -(s * s + h * h).powf(-a_exp / 2.0) * crate::spectral::psi(s.abs() / cut)
    })
}

/// ∂_s v·N near the tip of the curve with curvature κ_♯ + κ_g, where κ_♯
/// behaves like −|s|^{−(1−2α)−eps} at s = 0, at the nodes 2^m·h nearest
/// (in log scale) to `s_grid`.
pub fn non_lipschitz_probe(a: AlphaParam, p: f64, eps: f64, s_grid: &[f64], opts: ProbeOptions) -> Result<ProbeResult> {
    let al = a.value();
    if !(p >= 1.0 && p < a.lipschitz_threshold()) {
        return Err(Error::InvalidSpec(format!(
            "1 ≤ p < 1/(1 − 2α) violated: p = {p}, 1/(1 − 2α) = {}",
            a.lipschitz_threshold()
        )));
    }
    let bound = (2.0 * al).min(1.0 / p - (1.0 - 2.0 * al));
    if !(eps > 0.0 && eps < bound) {
        return Err(Error::InvalidSpec(format!("0 < eps < min{{2α, 1/p − (1 − 2α)}} = {bound} violated: eps = {eps}")));
    }
    let n = opts.n;
    let h = 2.0 * PI / n as f64;
    if s_grid.iter().any(|&s| !(s > 4.0 * h && s < PI / 8.0)) {
        return Err(Error::InvalidSpec("probe points must lie in (4h, π/8)".into()));
    }
    let ks = if opts.smooth {
        ScalarField::constant(n, 0.0)
    } else {
        let k = singular_curvature(n, 1.0 - 2.0 * al + eps);
        let m = k.mean();
        k.map(|v| opts.amplitude * (v - m))
    };
    let bend = crate::bending::bend_close(
        &ks,
        crate::bending::BendOptions { epsilon: crate::bending::EpsilonPolicy::Fixed(1.0), ..Default::default() },
    )?;
    let curve = bend.curve;
    let w = SingularWeights::new(n, a);
    // Nodes j = 2^m keep dyadic ratios exact on the grid.
    let nodes: Vec<usize> = s_grid.iter().map(|&s| 1usize << (s / h).log2().round() as u32).collect();
    let vals = normal_derivative_at(&curve, &w, &nodes);
    let s_used: Vec<f64> = nodes.iter().map(|&j| j as f64 * h).collect();
    let abs: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
    let ls: Vec<f64> = s_used.iter().map(|s| s.ln()).collect();
    let lv: Vec<f64> = abs.iter().map(|v| v.ln()).collect();
    let raw_slope = crate::report::linear_fit(&ls, &lv).0;
    let (mut li, mut ld) = (Vec::new(), Vec::new());
    for i in 0..vals.len().saturating_sub(1) {
        li.push(ls[i]);
        ld.push((vals[i + 1] - vals[i]).abs().ln());
    }
    let increment_slope = if li.len() >= 2 { crate::report::linear_fit(&li, &ld).0 } else { f64::NAN };
    let mut report = crate::report::ScanReport::new(&["s", "value", "predicted", "ratio"]);
    for (&s, &v) in s_used.iter().zip(&vals) {
        let pred = abs[0] * (s / s_used[0]).powf(-eps);
        report.push(vec![s.into(), v.into(), pred.into(), (v.abs() / pred).into()]);
    }
    report.set_meta("alpha", al);
    report.set_meta("p", p);
    report.set_meta("eps", eps);
    report.set_meta("N", n);
    report.set_meta("amplitude", opts.amplitude);
    report.set_meta("smooth", opts.smooth);
    report.set_meta("h_star", bend.h_star);
    report.set_meta("raw_slope", raw_slope);
    report.set_meta("increment_slope", increment_slope);
    report.set_meta("predicted_slope", -eps);
    Ok(ProbeResult { report, raw_slope, increment_slope, curve })
}

/// Discrete C^σ quotient of ∂_s v·N for the curve produced by `curve_at` on
/// each grid size.
pub fn dsv_holder_refinement(
    curve_at: &dyn Fn(usize) -> Result<ClosedCurve>,
    a: AlphaParam,
    sigma: f64,
    grids: &[usize],
) -> Result<Vec<f64>> {
    grids
        .iter()
        .map(|&n| {
            let c = curve_at(n)?;
            let bv = velocity_arc_derivative(&c, a);
            let dsv_n = bv.dsv_n.ok_or_else(|| Error::Degenerate("missing normal strain".into()))?;
            Ok(crate::curve_geometry::holder_quotient(dsv_n.samples(), c.length() / n as f64, sigma, 2))
        })
        .collect()
}
