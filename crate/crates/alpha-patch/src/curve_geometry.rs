//! Closed planar curves sampled on a uniform parameter grid: metric, frame,
//! curvature, arc-length resampling, curvature integration, the periodic
//! maximal function, discrete Sobolev/Hölder norms, and the text file formats.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::field::{fft_inverse, grid_point, lp_norm_samples, wavenumber, ScalarField};

pub type Point = [f64; 2];

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate curve: {0}")]
    Degenerate(String),
    #[error("invalid norm spec: {0}")]
    InvalidSpec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("data format error: {0}")]
    Format(String),
}

/// A periodic planar curve with nodes at `x_j = 2πj/N`.
#[derive(Clone, Debug)]
pub struct ClosedCurve {
    x: ScalarField,
    y: ScalarField,
    dx: ScalarField,
    dy: ScalarField,
    metric: ScalarField,
    length: f64,
    ccw: bool,
}

/// Unit tangent and outer unit normal at the nodes.
#[derive(Clone, Debug)]
pub struct Frame {
    pub tangent: Vec<Point>,
    pub normal: Vec<Point>,
}

impl ClosedCurve {
    /// Builds a curve from node positions; fails when the metric vanishes or the
    /// polygon is not simple.
    pub fn new(nodes: &[Point]) -> Result<Self, GeometryError> {
        let curve = Self::new_unchecked(nodes)?;
        if let Some((i, j)) = curve.self_intersection() {
            return Err(GeometryError::Degenerate(format!(
                "segments {i} and {j} intersect"
            )));
        }
        Ok(curve)
    }

    /// Builds a curve checking only that the metric stays positive.
    pub fn new_unchecked(nodes: &[Point]) -> Result<Self, GeometryError> {
        let n = nodes.len();
        if n < 8 {
            return Err(GeometryError::Degenerate(format!("only {n} nodes")));
        }
        let x = ScalarField::from_samples(nodes.iter().map(|p| p[0]).collect());
        let y = ScalarField::from_samples(nodes.iter().map(|p| p[1]).collect());
        let dx = x.derivative();
        let dy = y.derivative();
        let metric = dx.zip_map(&dy, f64::hypot);
        let gmax = metric.lp_norm(f64::INFINITY);
        let gmin = metric.samples().iter().cloned().fold(f64::INFINITY, f64::min);
        if !(gmin > 1e-12 * gmax.max(1e-300)) || !gmin.is_finite() {
            return Err(GeometryError::Degenerate("metric vanishes".into()));
        }
        let length = metric.mean() * 2.0 * PI;
        let area = shoelace(nodes);
        Ok(Self { x, y, dx, dy, metric, length, ccw: area > 0.0 })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn node(&self, j: usize) -> Point {
        [self.x.samples()[j], self.y.samples()[j]]
    }

    pub fn nodes(&self) -> Vec<Point> {
        (0..self.n()).map(|j| self.node(j)).collect()
    }

    pub fn xs(&self) -> &ScalarField {
        &self.x
    }

    pub fn ys(&self) -> &ScalarField {
        &self.y
    }

    /// ∂_x γ at the nodes.
    pub fn velocity_param(&self) -> Vec<Point> {
        (0..self.n()).map(|j| [self.dx.samples()[j], self.dy.samples()[j]]).collect()
    }

    /// g = |∂_x γ|.
    pub fn metric(&self) -> &ScalarField {
        &self.metric
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_ccw(&self) -> bool {
        self.ccw
    }

    /// Signed enclosed area from the spectral interpolant, ½∮(x y' − y x') dx.
    pub fn area(&self) -> f64 {
        let h = 2.0 * PI / self.n() as f64;
        0.5 * (0..self.n())
            .map(|j| {
                self.x.samples()[j] * self.dy.samples()[j] - self.y.samples()[j] * self.dx.samples()[j]
            })
            .sum::<f64>()
            * h
    }

    pub fn frame(&self) -> Frame {
        let n = self.n();
        let mut tangent = Vec::with_capacity(n);
        let mut normal = Vec::with_capacity(n);
        for j in 0..n {
            let g = self.metric.samples()[j];
            let t = [self.dx.samples()[j] / g, self.dy.samples()[j] / g];
            tangent.push(t);
            normal.push([t[1], -t[0]]);
        }
        Frame { tangent, normal }
    }

    /// Point and parameter derivative of the trigonometric interpolant.
    pub fn eval(&self, s: f64) -> (Point, Point) {
        (
            [self.x.eval(s), self.y.eval(s)],
            [self.x.eval_derivative(s, 1), self.y.eval_derivative(s, 1)],
        )
    }

    pub fn eval_second(&self, s: f64) -> Point {
        [self.x.eval_derivative(s, 2), self.y.eval_derivative(s, 2)]
    }

    /// Smallest distance between nodes that are not neighbours on the curve.
    pub fn simplicity_margin(&self) -> f64 {
        let nodes = self.nodes();
        let n = nodes.len();
        let cell = max_segment(&nodes).max(1e-300);
        let grid = Buckets::new(&nodes, cell);
        let mut best = f64::INFINITY;
        for (i, p) in nodes.iter().enumerate() {
            grid.for_neighbours(*p, |j| {
                let d = cyclic_gap(i, j, n);
                if d >= 2 {
                    best = best.min(dist(*p, nodes[j]));
                }
            });
        }
        best.min(cell)
    }

    /// First pair of crossing polygon segments, if any.
    pub fn self_intersection(&self) -> Option<(usize, usize)> {
        let nodes = self.nodes();
        let n = nodes.len();
        let cell = max_segment(&nodes).max(1e-300);
        let grid = Buckets::new(&nodes, cell);
        for i in 0..n {
            let a = nodes[i];
            let b = nodes[(i + 1) % n];
            let mut hit = None;
            grid.for_neighbours(a, |j| {
                if hit.is_some() || cyclic_gap(i, j, n) < 2 {
                    return;
                }
                let c = nodes[j];
                let d = nodes[(j + 1) % n];
                if cyclic_gap(i, (j + 1) % n, n) >= 1 && j != (i + 1) % n && (j + 1) % n != i
                    && segments_cross(a, b, c, d)
                {
                    hit = Some((i.min(j), i.max(j)));
                }
            });
            if hit.is_some() {
                return hit;
            }
        }
        None
    }

    /// Rigid motion x ↦ R(angle)x + shift.
    pub fn transformed(&self, angle: f64, shift: Point) -> Result<Self, GeometryError> {
        let (s, c) = angle.sin_cos();
        let nodes: Vec<Point> = self
            .nodes()
            .iter()
            .map(|p| [c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1]])
            .collect();
        Self::new_unchecked(&nodes)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), GeometryError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# alpha-patch-curve v1 N={} L={:.17e}\n", self.n(), self.length);
        for j in 0..self.n() {
            let p = self.node(j);
            let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", grid_point(j, self.n()), p[0], p[1]);
        }
        out
    }

    pub fn read_file(path: &Path) -> Result<Self, GeometryError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn from_text(text: &str) -> Result<Self, GeometryError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| GeometryError::Format("empty file".into()))?;
        let rest = header
            .strip_prefix("# alpha-patch-curve v1 ")
            .ok_or_else(|| GeometryError::Format(format!("bad header: {header}")))?;
        let n = header_value(rest, "N")?
            .parse::<usize>()
            .map_err(|e| GeometryError::Format(format!("bad N: {e}")))?;
        let mut nodes = Vec::with_capacity(n);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| GeometryError::Format(format!("bad row '{line}': {e}")))?;
            if cols.len() != 3 {
                return Err(GeometryError::Format(format!("expected 3 columns: '{line}'")));
            }
            nodes.push([cols[1], cols[2]]);
        }
        if nodes.len() != n {
            return Err(GeometryError::Format(format!("header says N={n}, found {} rows", nodes.len())));
        }
        Self::new(&nodes)
    }
}

fn header_value<'a>(rest: &'a str, key: &str) -> Result<&'a str, GeometryError> {
    rest.split_whitespace()
        .find_map(|t| t.strip_prefix(key).and_then(|t| t.strip_prefix('=')))
        .ok_or_else(|| GeometryError::Format(format!("missing {key}= in header")))
}

pub fn write_field(field: &ScalarField) -> String {
    let mut out = format!("# field v1 N={}\n", field.len());
    for v in field.samples() {
        let _ = writeln!(out, "{v:.17e}");
    }
    out
}

pub fn read_field(text: &str) -> Result<ScalarField, GeometryError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| GeometryError::Format("empty file".into()))?;
    let rest = header
        .strip_prefix("# field v1 ")
        .ok_or_else(|| GeometryError::Format(format!("bad header: {header}")))?;
    let n = header_value(rest, "N")?
        .parse::<usize>()
        .map_err(|e| GeometryError::Format(format!("bad N: {e}")))?;
    let vals: Vec<f64> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| GeometryError::Format(format!("bad value: {e}")))?;
    if vals.len() != n || n == 0 {
        return Err(GeometryError::Format(format!("header says N={n}, found {}", vals.len())));
    }
    Ok(ScalarField::from_samples(vals))
}

fn shoelace(nodes: &[Point]) -> f64 {
    let n = nodes.len();
    0.5 * (0..n)
        .map(|i| {
            let a = nodes[i];
            let b = nodes[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

#[inline]
/// Star-shaped curve r(x) = r₀ + Σ (a_k cos kx + b_k sin kx) sampled at N
/// uniform angles; `modes` holds (k, a_k, b_k).
pub fn star_curve(n: usize, r0: f64, modes: &[(usize, f64, f64)]) -> Result<ClosedCurve, GeometryError> {
    let nodes: Vec<Point> = (0..n)
        .map(|j| {
            let x = grid_point(j, n);
            let r = r0 + modes.iter().map(|&(k, a, b)| a * (k as f64 * x).cos() + b * (k as f64 * x).sin()).sum::<f64>();
            [r * x.cos(), r * x.sin()]
        })
        .collect();
    if nodes.iter().any(|p| !(p[0].hypot(p[1]) > 0.0)) {
        return Err(GeometryError::InvalidSpec("star radius must stay positive".into()));
    }
    ClosedCurve::new(&nodes)
}

/// Star curve with radial modes 2..=modes, coefficients uniform in
/// ±amplitude/k² from a seeded ChaCha stream.
pub fn random_star(n: usize, modes: usize, amplitude: f64, seed: u64) -> Result<ClosedCurve, GeometryError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(usize, f64, f64)> = (2..=modes)
        .map(|k| {
            let s = amplitude / (k * k) as f64;
            (k, s * rng.gen_range(-1.0..1.0), s * rng.gen_range(-1.0..1.0))
        })
        .collect();
    star_curve(n, 1.0, &coeffs)
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cyclic_gap(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

fn max_segment(nodes: &[Point]) -> f64 {
    let n = nodes.len();
    (0..n).map(|i| dist(nodes[i], nodes[(i + 1) % n])).fold(0.0, f64::max)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Uniform spatial hash used for the simplicity scans.
struct Buckets {
    cell: f64,
    origin: Point,
    nx: usize,
    ny: usize,
    heads: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(nodes: &[Point], cell: f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let nx = (((hi[0] - lo[0]) / cell).floor() as usize + 1).min(1 << 12);
        let ny = (((hi[1] - lo[1]) / cell).floor() as usize + 1).min(1 << 12);
        let cell = cell.max((hi[0] - lo[0]) / nx as f64).max((hi[1] - lo[1]) / ny as f64);
        let mut heads = vec![Vec::new(); nx * ny];
        let mut b = Self { cell, origin: lo, nx, ny, heads: Vec::new() };
        for (i, p) in nodes.iter().enumerate() {
            let (cx, cy) = b.cell_of(*p);
            heads[cy * nx + cx].push(i);
        }
        b.heads = heads;
        b
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = (((p[0] - self.origin[0]) / self.cell) as usize).min(self.nx - 1);
        let cy = (((p[1] - self.origin[1]) / self.cell) as usize).min(self.ny - 1);
        (cx, cy)
    }

    fn for_neighbours(&self, p: Point, mut f: impl FnMut(usize)) {
        let (cx, cy) = self.cell_of(p);
        for gy in cy.saturating_sub(1)..=(cy + 1).min(self.ny - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(self.nx - 1) {
                for &j in &self.heads[gy * self.nx + gx] {
                    f(j);
                }
            }
        }
    }
}

/// Curvature with the convention ∂_s T = −κN, so a counterclockwise unit
/// circle has κ ≡ 1.
pub fn curvature(curve: &ClosedCurve) -> ScalarField {
    let ddx = curve.dx.derivative();
    let ddy = curve.dy.derivative();
    let n = curve.n();
    ScalarField::from_samples(
        (0..n)
            .map(|j| {
                let (x1, y1) = (curve.dx.samples()[j], curve.dy.samples()[j]);
                let g = curve.metric.samples()[j];
                (x1 * ddy.samples()[j] - y1 * ddx.samples()[j]) / (g * g * g)
            })
            .collect(),
    )
}

/// ∮ κ ds by the trapezoid rule on the nodes.
pub fn total_turning(curve: &ClosedCurve) -> f64 {
    let k = curvature(curve);
    k.mul(curve.metric()).mean() * 2.0 * PI
}

/// Resamples to `m` nodes equally spaced in arc length, keeping node 0 fixed.
pub fn resample_arclength(curve: &ClosedCurve, m: usize) -> Result<ClosedCurve, GeometryError> {
    let n = curve.n();
    let g = curve.metric();
    let gbar = g.mean();
    let sper = g.antiderivative_periodic();
    let s_of = |x: f64| gbar * x + sper.eval(x) - sper.eval(0.0);
    let s_nodes: Vec<f64> = (0..=n)
        .map(|j| if j == n { curve.length() } else { gbar * grid_point(j, n) + sper.samples()[j] })
        .collect();
    let x_nodes: Vec<f64> = (0..=n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
    let inverse = MonotoneCubic::new(&s_nodes, &x_nodes);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let target = curve.length() * i as f64 / m as f64;
        let mut x = inverse.eval(target);
        for _ in 0..8 {
            let gx = g.eval(x);
            if gx <= 0.0 {
                return Err(GeometryError::Degenerate("metric vanishes in Newton".into()));
            }
            let dxs = (s_of(x) - target) / gx;
            x -= dxs;
            if dxs.abs() < 1e-15 {
                break;
            }
        }
        out.push(curve.eval(x).0);
    }
    ClosedCurve::new(&out)
}

/// Fritsch–Carlson monotone cubic interpolant.
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ms: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut ms = vec![0.0; n];
        ms[0] = d[0];
        ms[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            ms[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
        }
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                ms[i] = 0.0;
                ms[i + 1] = 0.0;
                continue;
            }
            let a = ms[i] / d[i];
            let b = ms[i + 1] / d[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                ms[i] = t * a * d[i];
                ms[i + 1] = t * b * d[i];
            }
        }
        Self { xs: xs.to_vec(), ys: ys.to_vec(), ms }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.ys[i]
            + (t3 - 2.0 * t2 + t) * h * self.ms[i]
            + (-2.0 * t3 + 3.0 * t2) * self.ys[i + 1]
            + (t3 - t2) * h * self.ms[i + 1]
    }
}

/// Starting point and tangent angle of an integrated arc.
#[derive(Clone, Copy, Debug)]
pub struct Anchor {
    pub point: Point,
    pub angle: f64,
}

impl Default for Anchor {
    fn default() -> Self {
        Self { point: [0.0, 0.0], angle: 0.0 }
    }
}

/// Arc that failed to close, with its endpoint gap γ(L) − γ(0).
#[derive(Clone, Debug)]
pub struct OpenArc {
    pub nodes: Vec<Point>,
    pub gap: Point,
    pub tangent_mismatch: f64,
}

#[derive(Clone, Debug)]
pub enum ArcResult {
    Closed(ClosedCurve),
    Open(OpenArc),
}

impl ArcResult {
    pub fn gap(&self) -> Option<Point> {
        match self {
            ArcResult::Closed(_) => None,
            ArcResult::Open(a) => Some(a.gap),
        }
    }
}

/// Nodes, endpoint gap and total turning of the arc with curvature samples
/// `kappa` on `s_j = jL/N`.
pub fn integrate_curvature(kappa: &ScalarField, length: f64, anchor: Anchor) -> (Vec<Point>, Point, f64) {
    let n = kappa.len();
    let kbar = kappa.mean();
    // θ(s) = θ₀ + κ̄ s + θ_p(s) with θ_p periodic; s = Lx/2π.
    let scale = length / (2.0 * PI);
    let theta_p = kappa.antiderivative_periodic().scale(scale);
    let omega0 = kbar * scale;
    // e^{iθ_p} expanded in Fourier modes; each mode integrates in closed form.
    let mut a: Vec<Complex64> = theta_p
        .samples()
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    crate::field::fft_forward(&mut a);
    for v in &mut a {
        *v /= n as f64;
    }
    let rot = Complex64::from_polar(1.0, anchor.angle);
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    let mut constant = Complex64::new(0.0, 0.0);
    let mut resonant = Vec::new();
    let mut gap = Complex64::new(0.0, 0.0);
    for (j, aj) in a.iter().enumerate() {
        let m = wavenumber(j, n) as f64;
        let w = omega0 + m;
        if w.abs() < 1e-3 {
            resonant.push((*aj, w));
            gap += *aj * 2.0 * PI * expm1_over(Complex64::new(0.0, w * 2.0 * PI));
        } else {
            let bj = *aj / Complex64::new(0.0, w);
            b[j] = bj;
            constant -= bj;
            gap += bj * (Complex64::from_polar(1.0, w * 2.0 * PI) - 1.0);
        }
    }
    fft_inverse(&mut b);
    let mut nodes = Vec::with_capacity(n);
    for (j, bj) in b.iter().enumerate() {
        let x = grid_point(j, n);
        let mut z = Complex64::from_polar(1.0, omega0 * x) * *bj + constant;
        for (aj, w) in &resonant {
            z += *aj * x * expm1_over(Complex64::new(0.0, w * x));
        }
        let z = rot * z * scale;
        nodes.push([anchor.point[0] + z.re, anchor.point[1] + z.im]);
    }
    let g = rot * gap * scale;
    (nodes, [g.re, g.im], kbar * length)
}

/// (e^z − 1)/z, stable near zero.
fn expm1_over(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Integrates the frame equations from curvature samples on an arc-length
/// grid. Closed when the endpoint gap and the turning defect from 2π are
/// both below `tol_close` (default 1e-9·L).
pub fn curve_from_curvature(
    kappa: &ScalarField,
    length: f64,
    anchor: Anchor,
    tol_close: Option<f64>,
) -> ArcResult {
    let tol = tol_close.unwrap_or(1e-9 * length);
    let (nodes, gap, turning) = integrate_curvature(kappa, length, anchor);
    let mismatch = (turning - 2.0 * PI).abs();
    let gap_norm = gap[0].hypot(gap[1]);
    if gap_norm < tol && mismatch < tol {
        if let Ok(c) = ClosedCurve::new(&nodes) {
            return ArcResult::Closed(c);
        }
    }
    ArcResult::Open(OpenArc { nodes, gap, tangent_mismatch: mismatch })
}

/// Periodic maximal function: at each node the largest symmetric window mean of
/// |f| over window radii r·h, r = 0..2N (radii up to twice the period).
pub fn periodic_maximal(f: &ScalarField) -> ScalarField {
    let n = f.len();
    let abs: Vec<f64> = f.samples().iter().map(|v| v.abs()).collect();
    let total: f64 = abs.iter().sum();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + abs[i];
    }
    // Sum of |f| over the integer window [a, b] with periodic wrap.
    let window = |a: i64, b: i64| -> f64 {
        let len = b - a + 1;
        let full = len.div_euclid(n as i64);
        let rem = len.rem_euclid(n as i64) as usize;
        let start = a.rem_euclid(n as i64) as usize;
        let mut s = full as f64 * total;
        if rem > 0 {
            let end = start + rem;
            s += if end <= n {
                prefix[end] - prefix[start]
            } else {
                prefix[n] - prefix[start] + prefix[end - n]
            };
        }
        s
    };
    let rmax = 2 * n as i64;
    let out = (0..n as i64)
        .map(|j| {
            (0..=rmax)
                .map(|r| window(j - r, j + r) / (2 * r + 1) as f64)
                .fold(0.0, f64::max)
        })
        .collect();
    ScalarField::from_samples(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormSpec {
    /// W^{2,p}, 1 < p ≤ ∞.
    Sobolev { p: f64 },
    /// C^{2,β}, 0 ≤ β ≤ 1.
    Holder { beta: f64 },
}

/// Largest discrete Hölder quotient |f_i − f_j|/d(i,j)^β over node pairs at
/// cyclic separation ≥ `min_sep` cells, d measured with spacing `h`.
pub fn holder_quotient(samples: &[f64], h: f64, beta: f64, min_sep: usize) -> f64 {
    let n = samples.len();
    let mut best = 0.0f64;
    for i in 0..n {
        for sep in min_sep.max(1)..=n / 2 {
            let j = (i + sep) % n;
            let q = (samples[i] - samples[j]).abs() / (sep as f64 * h).powf(beta);
            best = best.max(q);
        }
    }
    best
}

/// Intrinsic norm of the arc-length reparametrization of `curve`.
pub fn discrete_norms(curve: &ClosedCurve, spec: NormSpec) -> Result<f64, GeometryError> {
    let arc = resample_arclength(curve, curve.n())?;
    let n = arc.n();
    let kappa = curvature(&arc);
    let frame = arc.frame();
    let h = arc.length() / n as f64;
    // Norms on the arc-length grid with measure ds.
    let scale = arc.length() / (2.0 * PI);
    let gamma_abs: Vec<f64> = arc.nodes().iter().map(|p| p[0].hypot(p[1])).collect();
    let t_abs: Vec<f64> = frame.tangent.iter().map(|t| t[0].hypot(t[1])).collect();
    match spec {
        NormSpec::Sobolev { p } => {
            if !(p > 1.0) {
                return Err(GeometryError::InvalidSpec(format!("W^{{2,p}} needs p > 1, got {p}")));
            }
            let norm = |v: &[f64]| {
                if p.is_infinite() {
                    lp_norm_samples(v, p)
                } else {
                    lp_norm_samples(v, p) * scale.powf(1.0 / p)
                }
            };
            Ok(norm(&gamma_abs) + norm(&t_abs) + norm(kappa.samples()))
        }
        NormSpec::Holder { beta } => {
            if !(0.0..=1.0).contains(&beta) {
                return Err(GeometryError::InvalidSpec(format!("C^{{2,β}} needs 0 ≤ β ≤ 1, got {beta}")));
            }
            let sup = |v: &[f64]| lp_norm_samples(v, f64::INFINITY);
            Ok(sup(&gamma_abs) + sup(&t_abs) + sup(kappa.samples()) + holder_quotient(kappa.samples(), h, beta, 2))
        }
    }
}
