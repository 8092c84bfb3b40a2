//! Periodic real fields on the parameter circle [0, 2π), held as samples and
//! Fourier coefficients at the same time.
//!
//! Coefficients are normalized so that `f(x) = Σ_k c_k e^{ikx}` with
//! `c_k = N^{-1} Σ_j f_j e^{-ik x_j}`. They are stored in FFT order: index `j`
//! holds wavenumber `j` for `j < N/2` and `j − N` otherwise.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward transform without normalization.
pub fn fft_forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// In-place inverse transform without normalization.
pub fn fft_inverse(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Wavenumber carried by FFT index `j` on an `n`-point grid.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Uniform grid point `x_j = 2πj/n`.
#[inline]
pub fn grid_point(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    samples: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        assert!(!samples.is_empty(), "empty field");
        let n = samples.len() as f64;
        let mut coeffs: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        fft_forward(&mut coeffs);
        for c in &mut coeffs {
            *c /= n;
        }
        Self { samples, coeffs }
    }

    /// Builds a real field from coefficients in FFT order. The Hermitian part is
    /// kept; any anti-Hermitian residue is discarded.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        let n = coeffs.len();
        let mut herm = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let m = (n - j) % n;
            herm[j] = 0.5 * (coeffs[j] + coeffs[m].conj());
        }
        let mut buf = herm.clone();
        fft_inverse(&mut buf);
        let samples = buf.iter().map(|c| c.re).collect();
        Self { samples, coeffs: herm }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::from_samples((0..n).map(|j| f(grid_point(j, n))).collect())
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::from_samples(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Coefficient of `e^{ikx}`; zero outside the stored band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.len() as i64;
        if k < -n / 2 || k >= n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[k.rem_euclid(n) as usize]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Applies a multiplier `m(k)`. At the Nyquist index the average of `m(N/2)`
    /// and `m(−N/2)` is used so that real input stays real.
    pub fn apply_multiplier(&self, m: impl Fn(i64) -> Complex64) -> Self {
        let n = self.len();
        let mut c = self.coeffs.clone();
        for (j, cj) in c.iter_mut().enumerate() {
            let k = wavenumber(j, n);
            let mk = if n % 2 == 0 && j == n / 2 {
                0.5 * (m(k) + m(-k))
            } else {
                m(k)
            };
            *cj *= mk;
        }
        Self::from_coeffs(c)
    }

    pub fn derivative(&self) -> Self {
        self.apply_multiplier(|k| Complex64::new(0.0, k as f64))
    }

    /// Periodic antiderivative of the zero-mean part, pinned to vanish at x = 0.
    pub fn antiderivative_periodic(&self) -> Self {
        let a = self.apply_multiplier(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / k as f64)
            }
        });
        let a0 = a.samples[0];
        a.map(|v| v - a0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_samples(self.samples.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        Self::from_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// Trigonometric interpolation onto `m` points (zero padding or truncation).
    pub fn resample(&self, m: usize) -> Self {
        let n = self.len();
        if m == n {
            return self.clone();
        }
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        let half = n.min(m) / 2;
        for k in -(half as i64)..(half as i64) {
            let mut v = self.coeff(k);
            if n > m && k == -(half as i64) {
                v = self.coeff(k) + self.coeff(-k);
            }
            if m > n && n % 2 == 0 && k == -(n as i64 / 2) {
                let split = 0.5 * self.coeff(k);
                c[k.rem_euclid(m as i64) as usize] += split;
                c[(-k).rem_euclid(m as i64) as usize] += split;
                continue;
            }
            c[k.rem_euclid(m as i64) as usize] += v;
        }
        Self::from_coeffs(c)
    }

    /// Evaluates the trigonometric interpolant at an arbitrary parameter.
    pub fn eval(&self, x: f64) -> f64 {
        eval_trig(&self.coeffs, x, 0)
    }

    /// Evaluates the `order`-th derivative of the trigonometric interpolant.
    pub fn eval_derivative(&self, x: f64, order: u32) -> f64 {
        eval_trig(&self.coeffs, x, order)
    }

    /// Grid L^p norm with the unnormalized measure dx on [0, 2π); `p = ∞`
    /// gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_samples(&self.samples, p)
    }

    /// L^p norm evaluated on a grid refined by `factor`.
    pub fn lp_norm_oversampled(&self, p: f64, factor: usize) -> f64 {
        if factor <= 1 {
            return self.lp_norm(p);
        }
        self.resample(self.len() * factor).lp_norm(p)
    }

    /// Discrete inner product ∫ f g dx.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        let h = 2.0 * PI / self.len() as f64;
        self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).sum::<f64>() * h
    }

    /// Even part `(f(x) + f(−x))/2` on the grid.
    pub fn even_part(&self) -> Self {
        let n = self.len();
        Self::from_samples(
            (0..n)
                .map(|j| 0.5 * (self.samples[j] + self.samples[(n - j) % n]))
                .collect(),
        )
    }

    /// Σ_k |Im c_k|, i.e. the mass of the odd (sine) part of the coefficients.
    pub fn odd_coefficient_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).sum()
    }

    /// Largest |k| whose coefficient exceeds `rel` times the largest coefficient.
    pub fn bandwidth(&self, rel: f64) -> usize {
        let n = self.len();
        let cmax = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if cmax == 0.0 {
            return 0;
        }
        (0..n)
            .filter(|&j| self.coeffs[j].norm() > rel * cmax)
            .map(|j| wavenumber(j, n).unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }
}

pub fn lp_norm_samples(samples: &[f64], p: f64) -> f64 {
    let h = 2.0 * PI / samples.len() as f64;
    if p.is_infinite() {
        samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        samples.iter().map(|v| v.abs()).sum::<f64>() * h
    } else if p == 2.0 {
        (samples.iter().map(|v| v * v).sum::<f64>() * h).sqrt()
    } else {
        (samples.iter().map(|v| v.abs().powf(p)).sum::<f64>() * h).powf(1.0 / p)
    }
}

fn eval_trig(coeffs: &[Complex64], x: f64, order: u32) -> f64 {
    let n = coeffs.len();
    let step = Complex64::from_polar(1.0, x);
    let mut rot = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    let i_pow = |k: f64| -> Complex64 {
        match order % 4 {
            0 => Complex64::new(k.powi(order as i32), 0.0),
            1 => Complex64::new(0.0, k.powi(order as i32)),
            2 => Complex64::new(-k.powi(order as i32), 0.0),
            _ => Complex64::new(0.0, -k.powi(order as i32)),
        }
    };
    // Positive and negative wavenumbers are paired; Nyquist contributes its cosine.
    for k in 0..=n / 2 {
        let kf = k as f64;
        if k == 0 {
            if order == 0 {
                acc += coeffs[0].re;
            }
        } else if k == n / 2 && n % 2 == 0 {
            let c = coeffs[n / 2].re;
            let term = match order % 4 {
                0 => rot.re,
                1 => -rot.im,
                2 => -rot.re,
                _ => rot.im,
            };
            acc += c * kf.powi(order as i32) * term;
        } else {
            acc += 2.0 * (coeffs[k] * i_pow(kf) * rot).re;
        }
        rot *= step;
    }
    acc
}
