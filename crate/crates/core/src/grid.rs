//! Periodic torus `[0, L_1) x ... x [0, L_d)` with spectral calculus.
//!
//! Fields are flat row-major vectors (last axis fastest). Derivatives are
//! taken in Fourier space, integrals are plain Riemann sums, which are exact
//! for band-limited periodic data.
//!
//! Spacetime covectors use the metric `diag(-1, 1, 1, 1)`: index 0 is time
//! and raising it flips the sign, spatial indices raise trivially.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};

pub type ScalarField = Vec<f64>;
pub type ComplexField = Vec<Complex64>;

/// Minkowski metric component `g_{ab}` with signature (-,+,+,+).
#[inline]
pub fn metric(a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 0) => -1.0,
        (a, b) if a == b => 1.0,
        _ => 0.0,
    }
}

/// Sign picked up by a component when its index is raised or lowered.
#[inline]
pub fn index_sign(a: usize) -> f64 {
    if a == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Lowered spacetime covector field: `comps[0]` is the time slot, `comps[1..]`
/// the `d` spatial slots. Components past the grid dimension are identically
/// zero and therefore not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField<T> {
    pub comps: Vec<Vec<T>>,
}

impl<T: Copy> CovectorField<T> {
    pub fn new(comps: Vec<Vec<T>>) -> Self {
        Self { comps }
    }

    pub fn time(&self) -> &[T] {
        &self.comps[0]
    }

    pub fn space(&self, i: usize) -> &[T] {
        &self.comps[1 + i]
    }

    /// Number of spacetime slots (`d + 1`).
    pub fn slots(&self) -> usize {
        self.comps.len()
    }
}

/// Symmetric rank-2 spacetime tensor field with lowered indices, stored as a
/// dense `(d+1) x (d+1)` table of scalar fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    slots: usize,
    data: Vec<ScalarField>,
}

impl SymTensorField {
    pub fn zeros(slots: usize, len: usize) -> Self {
        Self { slots, data: vec![vec![0.0; len]; slots * slots] }
    }

    /// Builds the tensor from a pointwise generator called once per `a <= b`.
    pub fn from_fn(slots: usize, mut f: impl FnMut(usize, usize) -> ScalarField) -> Self {
        let mut data = vec![Vec::new(); slots * slots];
        for a in 0..slots {
            for b in a..slots {
                let v = f(a, b);
                if a != b {
                    data[b * slots + a] = v.clone();
                }
                data[a * slots + b] = v;
            }
        }
        Self { slots, data }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn get(&self, a: usize, b: usize) -> &[f64] {
        &self.data[a * self.slots + b]
    }

    /// Pointwise max over all components and grid points of `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(u, v)| u.iter().zip(v).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| max_abs(c)).fold(0.0, f64::max)
    }
}

struct Plans {
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

/// Uniform periodic lattice with cached FFT plans.
#[derive(Clone)]
pub struct Grid {
    shape: Vec<usize>,
    lengths: Vec<f64>,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("shape", &self.shape)
            .field("lengths", &self.lengths)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.lengths == other.lengths
    }
}

impl Grid {
    pub fn new(shape: &[usize], lengths: &[f64]) -> Result<Self> {
        let d = shape.len();
        if !(1..=3).contains(&d) {
            return Err(LabError::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if lengths.len() != d {
            return Err(LabError::InvalidGrid(format!(
                "{} lengths for {d} axes",
                lengths.len()
            )));
        }
        if let Some(n) = shape.iter().find(|&&n| n < 4) {
            return Err(LabError::InvalidGrid(format!("{n} points per axis, need at least 4")));
        }
        if let Some(l) = lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(LabError::InvalidGrid(format!("axis length {l} must be positive")));
        }
        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Ok(Self {
            shape: shape.to_vec(),
            lengths: lengths.to_vec(),
            plans: Arc::new(Plans { forward, inverse }),
        })
    }

    /// `d`-dimensional grid with the same resolution and extent on every axis.
    pub fn uniform(d: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(&vec![n; d], &vec![length; d])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.shape[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    /// Multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    /// Physical coordinates of a flat position.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| i as f64 * self.spacing(a))
            .collect()
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    pub fn sample_complex(&self, f: impl Fn(&[f64]) -> Complex64) -> ComplexField {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    /// Angular wavenumbers of one axis in FFT order.
    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        let n = self.shape[axis];
        let base = 2.0 * std::f64::consts::PI / self.lengths[axis];
        (0..n)
            .map(|m| {
                let signed = if m < n.div_ceil(2) { m as i64 } else { m as i64 - n as i64 };
                base * signed as f64
            })
            .collect()
    }

    /// Largest resolved `|k|^2` (sum of per-axis Nyquist wavenumbers squared).
    pub fn k_max_sq(&self) -> f64 {
        (0..self.dim())
            .map(|a| (std::f64::consts::PI * self.shape[a] as f64 / self.lengths[a]).powi(2))
            .sum()
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        debug_assert_eq!(buf.len(), self.len());
        for axis in 0..self.dim() {
            let n = self.shape[axis];
            let stride = self.stride(axis);
            let plan = if inverse {
                &self.plans.inverse[axis]
            } else {
                &self.plans.forward[axis]
            };
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            for base in 0..buf.len() {
                if !(base / stride).is_multiple_of(n) {
                    continue;
                }
                for (m, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + m * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (m, v) in line.iter().enumerate() {
                    buf[base + m * stride] = *v;
                }
            }
        }
        if inverse {
            let scale = 1.0 / self.len() as f64;
            buf.iter_mut().for_each(|v| *v *= scale);
        }
    }

    /// Forward transform (unnormalized).
    pub fn forward(&self, field: &[Complex64]) -> ComplexField {
        let mut buf = field.to_vec();
        self.transform(&mut buf, false);
        buf
    }

    /// Inverse transform, normalized so that `inverse(forward(u)) == u`.
    pub fn inverse(&self, spectrum: &[Complex64]) -> ComplexField {
        let mut buf = spectrum.to_vec();
        self.transform(&mut buf, true);
        buf
    }

    /// Per-flat-index wavenumber along `axis` (zero on the Nyquist plane
    /// when `odd` is set, as required for odd-order derivatives).
    fn mode_wavenumber(&self, axis: usize, odd: bool) -> Vec<f64> {
        let ks = self.wavenumbers(axis);
        let n = self.shape[axis];
        let stride = self.stride(axis);
        (0..self.len())
            .map(|i| {
                let m = (i / stride) % n;
                if odd && n.is_multiple_of(2) && m == n / 2 {
                    0.0
                } else {
                    ks[m]
                }
            })
            .collect()
    }

    pub fn gradient_complex(&self, field: &[Complex64]) -> Vec<ComplexField> {
        let spec = self.forward(field);
        (0..self.dim())
            .map(|axis| {
                let k = self.mode_wavenumber(axis, true);
                let d: ComplexField = spec
                    .iter()
                    .zip(&k)
                    .map(|(c, &k)| c * Complex64::new(0.0, k))
                    .collect();
                self.inverse(&d)
            })
            .collect()
    }

    /// Spatial gradient of a real field; exact for trigonometric polynomials
    /// below the Nyquist mode.
    pub fn gradient(&self, field: &[f64]) -> Vec<ScalarField> {
        let z = to_complex(field);
        self.gradient_complex(&z)
            .into_iter()
            .map(|g| g.iter().map(|c| c.re).collect())
            .collect()
    }

    pub fn partial(&self, field: &[f64], axis: usize) -> ScalarField {
        let spec = self.forward(&to_complex(field));
        let k = self.mode_wavenumber(axis, true);
        let d: ComplexField = spec
            .iter()
            .zip(&k)
            .map(|(c, &k)| c * Complex64::new(0.0, k))
            .collect();
        self.inverse(&d).iter().map(|c| c.re).collect()
    }

    pub fn laplacian_complex(&self, field: &[Complex64]) -> ComplexField {
        let mut spec = self.forward(field);
        let ksq = self.k_squared();
        spec.iter_mut().zip(&ksq).for_each(|(c, &k2)| *c *= -k2);
        self.inverse(&spec)
    }

    pub fn laplacian(&self, field: &[f64]) -> ScalarField {
        self.laplacian_complex(&to_complex(field))
            .iter()
            .map(|c| c.re)
            .collect()
    }

    fn k_squared(&self) -> Vec<f64> {
        let mut ksq = vec![0.0; self.len()];
        for axis in 0..self.dim() {
            for (acc, k) in ksq.iter_mut().zip(self.mode_wavenumber(axis, false)) {
                *acc += k * k;
            }
        }
        ksq
    }

    /// Exponential low-pass filter `exp(-strength (|k|/k_max)^36)`; a
    /// strength of zero leaves the field untouched.
    pub fn filter(&self, field: &mut [f64], strength: f64) {
        if strength <= 0.0 {
            return;
        }
        let mut spec = self.forward(&to_complex(field));
        let kmax2 = self.k_max_sq();
        for (c, k2) in spec.iter_mut().zip(self.k_squared()) {
            *c *= (-strength * (k2 / kmax2).powi(18)).exp();
        }
        for (v, c) in field.iter_mut().zip(self.inverse(&spec)) {
            *v = c.re;
        }
    }

    /// Fraction of spectral energy carried by modes above two thirds of the
    /// per-axis Nyquist wavenumber. Zero for the zero field.
    pub fn spectral_tail_fraction(&self, field: &[f64]) -> f64 {
        let spec = self.forward(&to_complex(field));
        let cut: Vec<f64> = (0..self.dim())
            .map(|a| (2.0 / 3.0) * std::f64::consts::PI * self.shape[a] as f64 / self.lengths[a])
            .collect();
        let ks: Vec<Vec<f64>> = (0..self.dim()).map(|a| self.mode_wavenumber(a, false)).collect();
        let mut total = 0.0;
        let mut tail = 0.0;
        for (i, c) in spec.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if (0..self.dim()).any(|a| ks[a][i].abs() > cut[a]) {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    pub fn integrate(&self, field: &[f64]) -> f64 {
        field.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn integrate_complex(&self, field: &[Complex64]) -> Complex64 {
        field.iter().sum::<Complex64>() * self.cell_volume()
    }

    /// `(integral |u|^p)^(1/p)`, or the max norm for `p = inf`.
    pub fn lp_norm(&self, field: &[f64], p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(LabError::InvalidArgument(format!("Lebesgue exponent {p} < 1")));
        }
        if p.is_infinite() {
            return Ok(field.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        let s: f64 = field.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.cell_volume();
        Ok(s.powf(1.0 / p))
    }

    /// Upper estimate of the `L^p + L^q` norm.
    ///
    /// Splits `u = a + b` with `a = u 1{|u| > tau}` and scans `tau` over a
    /// 32-point geometric ladder between the smallest nonzero and the largest
    /// `|u|`, plus the two trivial splittings. The result is never below the
    /// true infimum and never above `min(|u|_p, |u|_q)`.
    pub fn sum_norm(&self, field: &[f64], p: f64, q: f64) -> Result<f64> {
        for e in [p, q] {
            if !(e >= 1.0 && e.is_finite()) {
                return Err(LabError::InvalidArgument(format!(
                    "sum-space exponent {e} must be finite and >= 1"
                )));
            }
        }
        let abs: Vec<f64> = field.iter().map(|v| v.abs()).collect();
        let hi = abs.iter().cloned().fold(0.0, f64::max);
        if hi == 0.0 {
            return Ok(0.0);
        }
        let lo = abs.iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        let vol = self.cell_volume();
        // Both orientations are scanned: the large part may sit in either space.
        let split = |tau: f64| {
            let (mut big_p, mut small_q, mut big_q, mut small_p) = (0.0, 0.0, 0.0, 0.0);
            for &v in &abs {
                if v > tau {
                    big_p += v.powf(p);
                    big_q += v.powf(q);
                } else {
                    small_q += v.powf(q);
                    small_p += v.powf(p);
                }
            }
            let a = (big_p * vol).powf(1.0 / p) + (small_q * vol).powf(1.0 / q);
            let b = (big_q * vol).powf(1.0 / q) + (small_p * vol).powf(1.0 / p);
            a.min(b)
        };
        const LADDER: usize = 32;
        let mut best = split(0.0).min(split(f64::INFINITY));
        let ratio = (hi / lo).powf(1.0 / (LADDER - 1) as f64);
        let mut tau = lo;
        for _ in 0..LADDER {
            best = best.min(split(tau));
            tau *= ratio;
        }
        Ok(best)
    }
}

pub fn to_complex(field: &[f64]) -> ComplexField {
    field.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

/// Largest absolute entry.
pub fn max_abs(field: &[f64]) -> f64 {
    field.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn all_finite(field: &[f64]) -> bool {
    field.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(n: usize) -> Grid {
        Grid::uniform(1, n, 2.0 * PI).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(&[], &[]).is_err());
        assert!(Grid::new(&[8, 8, 8, 8], &[1.0; 4]).is_err());
        assert!(Grid::new(&[2], &[1.0]).is_err());
        assert!(Grid::new(&[8], &[0.0]).is_err());
        assert!(Grid::new(&[8, 8], &[1.0]).is_err());
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = line(64);
        let d = g.gradient(&g.sample(|x| x[0].sin()));
        let exact = g.sample(|x| x[0].cos());
        let err = d[0].iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = line(32);
        let d = g.gradient(&vec![3.5; 32]);
        assert!(max_abs(&d[0]) < 1e-14);
    }

    #[test]
    fn derivative_of_complex_exponential() {
        let g = line(64);
        let f = g.sample_complex(|x| Complex64::new(0.0, x[0]).exp());
        let d = g.gradient_complex(&f);
        let err = d[0]
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - Complex64::i() * b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn second_derivative_of_sine() {
        let g = line(64);
        let s = g.sample(|x| x[0].sin());
        let dd = g.partial(&g.partial(&s, 0), 0);
        let err = dd.iter().zip(&s).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        let lap = g.laplacian(&s);
        let err = lap.iter().zip(&s).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn gradient_in_three_dimensions() {
        let g = Grid::new(&[8, 16, 12], &[2.0 * PI, PI, 4.0]).unwrap();
        let f = g.sample(|x| (x[0]).sin() * (2.0 * x[1]).cos() + (2.0 * PI * x[2] / 4.0).sin());
        let grad = g.gradient(&f);
        let ex = [
            g.sample(|x| x[0].cos() * (2.0 * x[1]).cos()),
            g.sample(|x| -2.0 * x[0].sin() * (2.0 * x[1]).sin()),
            g.sample(|x| (2.0 * PI / 4.0) * (2.0 * PI * x[2] / 4.0).cos()),
        ];
        for a in 0..3 {
            let err = grad[a].iter().zip(&ex[a]).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "axis {a}: {err}");
        }
    }

    #[test]
    fn integrals() {
        let g = line(32);
        assert!((g.integrate(&vec![1.0; 32]) - 2.0 * PI).abs() < 1e-13);
        let s2 = g.sample(|x| x[0].sin().powi(2));
        assert!((g.integrate(&s2) - PI).abs() < 1e-12);
        assert_eq!(g.integrate(&vec![0.0; 32]), 0.0);
    }

    #[test]
    fn lebesgue_norms() {
        let g = line(64);
        let c = vec![-2.0; 64];
        for p in [1.0, 2.0, 3.5] {
            let want = 2.0 * (2.0 * PI).powf(1.0 / p);
            assert!((g.lp_norm(&c, p).unwrap() - want).abs() < 1e-12);
        }
        assert_eq!(g.lp_norm(&c, f64::INFINITY).unwrap(), 2.0);
        let s = g.sample(|x| x[0].sin());
        assert!((g.lp_norm(&s, 2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        assert_eq!(g.lp_norm(&vec![0.0; 64], 3.0).unwrap(), 0.0);
        assert!(g.lp_norm(&s, 0.5).is_err());
    }

    #[test]
    fn sum_norm_examples() {
        let g = line(64);
        assert_eq!(g.sum_norm(&vec![0.0; 64], 2.0, 1.0).unwrap(), 0.0);
        let one = vec![1.0; 64];
        let v = g.sum_norm(&one, 2.0, 1.0).unwrap();
        assert!((v - (2.0 * PI).sqrt()).abs() < 1e-12, "{v}");
        assert!(g.sum_norm(&one, 0.5, 1.0).is_err());
    }

    #[test]
    fn sum_norm_prefers_a_split_for_peaked_fields() {
        // A tall narrow spike plus a low plateau: putting the spike in L^1 and
        // the plateau in L^2 beats either pure assignment.
        let g = line(256);
        let f = g.sample(|x| if (x[0] - PI).abs() < 0.05 { 50.0 } else { 0.1 });
        let both = g.sum_norm(&f, 2.0, 1.0).unwrap();
        let p = g.lp_norm(&f, 2.0).unwrap();
        let q = g.lp_norm(&f, 1.0).unwrap();
        assert!(both < p.min(q));
    }

    #[test]
    fn filter_with_zero_strength_is_identity() {
        let g = line(32);
        let f0 = g.sample(|x| (3.0 * x[0]).cos());
        let mut f = f0.clone();
        g.filter(&mut f, 0.0);
        assert_eq!(f, f0);
        g.filter(&mut f, 36.0);
        let err = f.iter().zip(&f0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn metric_signature() {
        assert_eq!(metric(0, 0), -1.0);
        assert_eq!(metric(2, 2), 1.0);
        assert_eq!(metric(0, 1), 0.0);
        assert_eq!(index_sign(0), -1.0);
        assert_eq!(index_sign(3), 1.0);
    }
}
