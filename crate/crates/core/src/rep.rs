//! Relativistic Euler system with potential pressure, evolved in the
//! symmetrizable variables `(U_i, f)` with `f = rho^((gamma-1)/2)`.
//!
//! `U^0 = sqrt(1 + 2 f^2 + U_i U_i)` is recovered from the normalization at
//! every stage. The lowered time component `U_0` is additionally transported
//! by its own equation `U^a d_a U_0 + 2 f d_t f = 0`, so the normalization
//! `U^a U_a + 1 + 2 V'(rho)` can be measured along the flow instead of holding
//! by construction.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{LabError, Result};
use crate::grid::{all_finite, max_abs, metric, CovectorField, Grid, ScalarField, SymTensorField};
use crate::potential::Potential;

/// Tolerated undershoot of `f` below zero before it counts as a fault.
const CLIP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    /// Lowered spatial velocity components `U_i`.
    pub u: Vec<ScalarField>,
    pub f: ScalarField,
    /// Transported lowered time component `U_0` (negative for future-directed flow).
    pub u_time: ScalarField,
    pub t: f64,
}

/// Fluid initial data as a full lowered four-velocity and a density.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidData {
    pub u: CovectorField<f64>,
    pub rho: ScalarField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckFailure {
    pub check: &'static str,
    pub index: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellPreparedReport {
    pub future_directed: bool,
    pub nonnegative_density: bool,
    pub normalization_residual: f64,
    pub max_spectral_tail: f64,
    /// Worst offending point of each failed check.
    pub failures: Vec<CheckFailure>,
}

impl WellPreparedReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Matrices of the symmetrizable system `B^a d_a (U, f) = 0` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedSystem {
    pub b0: DMatrix<f64>,
    pub bi: Vec<DMatrix<f64>>,
    pub s: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidDiagnostics {
    pub density: ScalarField,
    /// `J_a = rho U_a` with the derived `U_0 = -U^0`.
    pub momentum: CovectorField<f64>,
    /// `integral rho U^0`, positive for future-directed flow.
    pub charge: f64,
    pub energy: f64,
    pub stress: SymTensorField,
}

/// Time derivatives of the evolved variables.
#[derive(Debug, Clone)]
struct Rates {
    u: Vec<ScalarField>,
    f: ScalarField,
    u_time: ScalarField,
}

#[derive(Debug)]
pub struct RepSolver {
    grid: Grid,
    potential: Potential,
    filter_strength: f64,
    clipped: AtomicUsize,
}

impl Clone for RepSolver {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            potential: self.potential,
            filter_strength: self.filter_strength,
            clipped: AtomicUsize::new(self.clipped.load(Ordering::Relaxed)),
        }
    }
}

pub const CFL_CONSTANT: f64 = 0.4;
pub const WELL_PREPARED_TOL: f64 = 1e-10;
pub const SMOOTHNESS_TOL: f64 = 1e-8;

impl RepSolver {
    pub fn new(grid: Grid, potential: Potential) -> Self {
        Self { grid, potential, filter_strength: 0.0, clipped: AtomicUsize::new(0) }
    }

    /// Applies `exp(-strength (|k|/k_max)^36)` to every field after each step.
    pub fn with_filter(mut self, strength: f64) -> Self {
        self.filter_strength = strength.max(0.0);
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Number of grid values of `f` clipped to zero so far.
    pub fn clipped_count(&self) -> usize {
        self.clipped.load(Ordering::Relaxed)
    }

    fn exponent(&self) -> f64 {
        self.potential.gamma() - 1.0
    }

    /// State from spatial velocity and `f`, with `U_0 = -U^0`.
    pub fn state(&self, u: Vec<ScalarField>, f: ScalarField) -> Result<FluidState> {
        let n = self.grid.len();
        if u.len() != self.grid.dim() {
            return Err(LabError::InvalidArgument(format!(
                "{} velocity components on a {}-d grid",
                u.len(),
                self.grid.dim()
            )));
        }
        if f.len() != n || u.iter().any(|c| c.len() != n) {
            return Err(LabError::GridMismatch);
        }
        if !all_finite(&f) || !u.iter().all(|c| all_finite(c)) {
            return Err(LabError::InvalidArgument("non-finite fluid field".into()));
        }
        if let Some(&v) = f.iter().find(|&&v| v < 0.0) {
            return Err(LabError::Negative { value: v });
        }
        let mut st = FluidState { u, f, u_time: Vec::new(), t: 0.0 };
        st.u_time = self.recover_u0(&st).into_iter().map(|v| -v).collect();
        Ok(st)
    }

    pub fn constant_state(&self, u: &[f64], rho: f64) -> Result<FluidState> {
        if rho < 0.0 {
            return Err(LabError::Negative { value: rho });
        }
        let n = self.grid.len();
        let f = rho.powf(self.exponent() / 2.0);
        self.state(u.iter().map(|&c| vec![c; n]).collect(), vec![f; n])
    }

    /// State from validated well-prepared data. The transported time
    /// component starts from the supplied `U_0`.
    pub fn from_data(&self, data: &FluidData) -> Result<FluidState> {
        let report = self.validate_well_prepared(data)?;
        if !report.passed() {
            let first = &report.failures[0];
            return Err(LabError::Constraint(format!(
                "initial data not well prepared: {} fails at point {} (magnitude {:e})",
                first.check, first.index, first.magnitude
            )));
        }
        let e = self.exponent() / 2.0;
        let f = data.rho.iter().map(|r| r.powf(e)).collect();
        let u = (0..self.grid.dim()).map(|i| data.u.space(i).to_vec()).collect();
        let mut st = self.state(u, f)?;
        st.u_time = data.u.time().to_vec();
        Ok(st)
    }

    pub fn validate_well_prepared(&self, data: &FluidData) -> Result<WellPreparedReport> {
        let n = self.grid.len();
        if data.u.slots() != self.grid.dim() + 1 {
            return Err(LabError::InvalidArgument(format!(
                "four-velocity has {} slots on a {}-d grid",
                data.u.slots(),
                self.grid.dim()
            )));
        }
        if data.rho.len() != n || data.u.comps.iter().any(|c| c.len() != n) {
            return Err(LabError::GridMismatch);
        }
        let mut failures = Vec::new();
        let mut worst = |check: &'static str, vals: &mut dyn Iterator<Item = (usize, f64)>| {
            if let Some((index, magnitude)) =
                vals.fold(None, |acc: Option<(usize, f64)>, (i, m)| match acc {
                    Some((_, best)) if best >= m => acc,
                    _ => Some((i, m)),
                })
            {
                failures.push(CheckFailure { check, index, magnitude });
            }
        };

        let u0 = data.u.time();
        worst("future-directed", &mut u0.iter().enumerate().filter(|(_, v)| !(-**v > 0.0)).map(|(i, v)| (i, v.abs())));
        worst(
            "nonnegative density",
            &mut data.rho.iter().enumerate().filter(|(_, r)| !(**r >= 0.0)).map(|(i, r)| (i, r.abs())),
        );
        let norm_res: Vec<f64> = (0..n)
            .map(|i| {
                let uu: f64 = (0..data.u.slots()).map(|a| metric(a, a) * data.u.comps[a][i].powi(2)).sum();
                (uu + 1.0 + 2.0 * self.potential.dv(data.rho[i].max(0.0))).abs()
            })
            .collect();
        let normalization_residual = max_abs(&norm_res);
        worst(
            "normalization",
            &mut norm_res.iter().enumerate().filter(|(_, r)| !(**r <= WELL_PREPARED_TOL)).map(|(i, r)| (i, *r)),
        );

        let sqrt_rho: Vec<f64> = data.rho.iter().map(|r| r.max(0.0).sqrt()).collect();
        let mut max_spectral_tail = self.grid.spectral_tail_fraction(&sqrt_rho);
        for c in &data.u.comps {
            max_spectral_tail = max_spectral_tail.max(self.grid.spectral_tail_fraction(c));
        }
        if !(max_spectral_tail <= SMOOTHNESS_TOL) {
            failures.push(CheckFailure { check: "smoothness", index: 0, magnitude: max_spectral_tail });
        }
        Ok(WellPreparedReport {
            future_directed: !failures.iter().any(|f| f.check == "future-directed"),
            nonnegative_density: !failures.iter().any(|f| f.check == "nonnegative density"),
            normalization_residual,
            max_spectral_tail,
            failures,
        })
    }

    /// `U^0 = sqrt(1 + 2 f^2 + U_i U_i)`; note `f^2 = V'(rho)` for every gamma.
    pub fn recover_u0(&self, state: &FluidState) -> ScalarField {
        (0..state.f.len())
            .map(|i| {
                let uu: f64 = state.u.iter().map(|c| c[i] * c[i]).sum();
                (1.0 + 2.0 * state.f[i] * state.f[i] + uu).max(1.0).sqrt()
            })
            .collect()
    }

    pub fn density(&self, state: &FluidState) -> ScalarField {
        let e = 2.0 / self.exponent();
        state.f.iter().map(|&f| if f > 0.0 { f.powf(e) } else { 0.0 }).collect()
    }

    /// Lowered four-velocity with the derived time component `U_0 = -U^0`.
    pub fn four_velocity(&self, state: &FluidState) -> CovectorField<f64> {
        let mut comps = vec![self.recover_u0(state).into_iter().map(|v| -v).collect::<Vec<_>>()];
        comps.extend(state.u.iter().cloned());
        CovectorField::new(comps)
    }

    pub fn assemble(&self, state: &FluidState, point: usize) -> SymmetrizedSystem {
        let d = self.grid.dim();
        let u: Vec<f64> = state.u.iter().map(|c| c[point]).collect();
        let f = state.f[point];
        let uu: f64 = u.iter().map(|v| v * v).sum();
        let u0 = (1.0 + 2.0 * f * f + uu).sqrt();
        let inv_g = 1.0 / self.exponent();
        let w = f * f / (u0 * u0);
        let m = DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { 0.0 } - u[i] * u[j] / (u0 * u0));

        let mut b0 = DMatrix::zeros(d + 1, d + 1);
        for j in 0..d {
            b0[(j, j)] = u0;
        }
        b0[(d, d)] = 4.0 * u0 * (inv_g + w);

        let bi = (0..d)
            .map(|i| {
                let mut b = DMatrix::zeros(d + 1, d + 1);
                for j in 0..d {
                    b[(j, j)] = u[i];
                    b[(d, j)] = 2.0 * f * m[(i, j)];
                }
                b[(i, d)] = 2.0 * f;
                b[(d, d)] = 4.0 * u[i] * (inv_g - w);
                b
            })
            .collect();

        let mut s = DMatrix::zeros(d + 1, d + 1);
        s.view_mut((0, 0), (d, d)).copy_from(&m);
        s[(d, d)] = 1.0;
        SymmetrizedSystem { b0, bi, s }
    }

    /// Largest characteristic speed: the generalized eigenvalues of
    /// `(S B^i, S B^0)` maximized over points and directions.
    pub fn max_speed(&self, state: &FluidState) -> f64 {
        let mut best = 0.0f64;
        for p in 0..self.grid.len() {
            let sys = self.assemble(state, p);
            let a0 = &sys.s * &sys.b0;
            let chol = match a0.clone().cholesky() {
                Some(c) => c,
                None => return f64::INFINITY,
            };
            let l_inv = chol.l().try_inverse().unwrap_or_else(|| DMatrix::zeros(0, 0));
            if l_inv.nrows() == 0 {
                return f64::INFINITY;
            }
            for b in &sys.bi {
                let ai = &sys.s * b;
                let c = &l_inv * ai * l_inv.transpose();
                let c = (&c + c.transpose()) * 0.5;
                let eig = SymmetricEigen::new(c);
                best = best.max(eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            }
        }
        best
    }

    pub fn dt_max(&self, state: &FluidState) -> f64 {
        let speed = self.max_speed(state);
        if speed == 0.0 {
            return f64::INFINITY;
        }
        CFL_CONSTANT * self.grid.min_spacing() / speed
    }

    fn rates(&self, state: &FluidState) -> Rates {
        let d = self.grid.dim();
        let n = self.grid.len();
        let inv_g = 1.0 / self.exponent();
        let u0 = self.recover_u0(state);
        let du: Vec<Vec<ScalarField>> = state.u.iter().map(|c| self.grid.gradient(c)).collect();
        let df = self.grid.gradient(&state.f);
        let du_time = self.grid.gradient(&state.u_time);

        let mut r_u = vec![vec![0.0; n]; d];
        let mut r_f = vec![0.0; n];
        let mut r_t = vec![0.0; n];
        for p in 0..n {
            let f = state.f[p];
            let w = f * f / (u0[p] * u0[p]);
            let mut num = 0.0;
            for j in 0..d {
                let adv: f64 = (0..d).map(|i| state.u[i][p] * du[j][i][p]).sum();
                r_u[j][p] = -(adv + 2.0 * f * df[j][p]) / u0[p];
                for i in 0..d {
                    let mij = if i == j { 1.0 } else { 0.0 } - state.u[i][p] * state.u[j][p] / (u0[p] * u0[p]);
                    num += 2.0 * f * mij * du[j][i][p];
                }
                num += 4.0 * state.u[j][p] * (inv_g - w) * df[j][p];
            }
            r_f[p] = -num / (4.0 * u0[p] * (inv_g + w));
            let adv: f64 = (0..d).map(|i| state.u[i][p] * du_time[i][p]).sum();
            r_t[p] = -(adv + 2.0 * f * r_f[p]) / u0[p];
        }
        Rates { u: r_u, f: r_f, u_time: r_t }
    }

    /// `d_t U^0 = (2 f d_t f + U_j d_t U_j) / U^0`, from the evolution equations.
    pub fn dt_u0(&self, state: &FluidState) -> ScalarField {
        let r = self.rates(state);
        let u0 = self.recover_u0(state);
        (0..state.f.len())
            .map(|p| {
                let s: f64 = state.u.iter().zip(&r.u).map(|(c, rc)| c[p] * rc[p]).sum();
                (2.0 * state.f[p] * r.f[p] + s) / u0[p]
            })
            .collect()
    }

    /// `(d_t U_i, d_t f)` from the evolution equations.
    pub fn time_derivative(&self, state: &FluidState) -> (Vec<ScalarField>, ScalarField) {
        let r = self.rates(state);
        (r.u, r.f)
    }

    pub fn step(&self, state: &FluidState, dt: f64) -> Result<FluidState> {
        let limit = self.dt_max(state);
        if dt.abs() > limit * (1.0 + 1e-12) {
            return Err(LabError::Cfl { dt, limit });
        }
        let shift = |base: &FluidState, r: &Rates, h: f64| FluidState {
            u: base.u.iter().zip(&r.u).map(|(b, d)| axpy(b, d, h)).collect(),
            // Intermediate stages may dip slightly below zero; U^0 only sees f^2.
            f: axpy(&base.f, &r.f, h),
            u_time: axpy(&base.u_time, &r.u_time, h),
            t: base.t + h,
        };
        let k1 = self.rates(state);
        let k2 = self.rates(&shift(state, &k1, 0.5 * dt));
        let k3 = self.rates(&shift(state, &k2, 0.5 * dt));
        let k4 = self.rates(&shift(state, &k3, dt));
        let combine = |b: &[f64], a: &[f64], c: &[f64], e: &[f64], g: &[f64]| -> ScalarField {
            (0..b.len()).map(|i| b[i] + dt / 6.0 * (a[i] + 2.0 * c[i] + 2.0 * e[i] + g[i])).collect()
        };
        let mut next = FluidState {
            u: (0..state.u.len())
                .map(|j| combine(&state.u[j], &k1.u[j], &k2.u[j], &k3.u[j], &k4.u[j]))
                .collect(),
            f: combine(&state.f, &k1.f, &k2.f, &k3.f, &k4.f),
            u_time: combine(&state.u_time, &k1.u_time, &k2.u_time, &k3.u_time, &k4.u_time),
            t: state.t + dt,
        };
        if self.filter_strength > 0.0 {
            for c in next.u.iter_mut() {
                self.grid.filter(c, self.filter_strength);
            }
            self.grid.filter(&mut next.f, self.filter_strength);
            self.grid.filter(&mut next.u_time, self.filter_strength);
        }
        if !all_finite(&next.f) || !next.u.iter().chain([&next.u_time]).all(|c| all_finite(c)) {
            return Err(LabError::BlowUp { t: next.t, reason: "non-finite fluid field".into() });
        }
        let mut clipped = 0;
        for v in next.f.iter_mut() {
            if *v < 0.0 {
                if *v < -CLIP_TOLERANCE {
                    log::warn!("f undershoot {v:e} at t = {}", next.t);
                }
                *v = 0.0;
                clipped += 1;
            }
        }
        if clipped > 0 {
            self.clipped.fetch_add(clipped, Ordering::Relaxed);
            log::debug!("clipped {clipped} negative values of f at t = {}", next.t);
        }
        Ok(next)
    }

    pub fn diagnostics(&self, state: &FluidState) -> FluidDiagnostics {
        let density = self.density(state);
        let u = self.four_velocity(state);
        let momentum = CovectorField::new(
            u.comps.iter().map(|c| c.iter().zip(&density).map(|(v, r)| v * r).collect()).collect(),
        );
        let charge = -self.grid.integrate(momentum.time());
        let stress = self.stress_energy_from(&u, &density);
        let energy = self.grid.integrate(stress.get(0, 0));
        FluidDiagnostics { density, momentum, charge, energy, stress }
    }

    /// `T_ab = rho U_a U_b + g_ab (gamma - 1) V(rho)`.
    pub fn stress_energy(&self, state: &FluidState) -> SymTensorField {
        self.stress_energy_from(&self.four_velocity(state), &self.density(state))
    }

    fn stress_energy_from(&self, u: &CovectorField<f64>, rho: &[f64]) -> SymTensorField {
        let g1 = self.exponent();
        SymTensorField::from_fn(u.slots(), |a, b| {
            let gab = metric(a, b);
            (0..rho.len())
                .map(|i| rho[i] * u.comps[a][i] * u.comps[b][i] + gab * g1 * self.potential.v(rho[i]))
                .collect()
        })
    }

    /// `max |U^a U_a + 1 + 2 V'(rho)|` with the transported time component.
    pub fn normalization_residual(&self, state: &FluidState) -> f64 {
        (0..state.f.len())
            .map(|i| {
                let uu: f64 = state.u.iter().map(|c| c[i] * c[i]).sum();
                (-state.u_time[i].powi(2) + uu + 1.0 + 2.0 * state.f[i] * state.f[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |d_i U_j - d_j U_i|`; identically zero in one dimension.
    pub fn curl(&self, state: &FluidState) -> f64 {
        let d = self.grid.dim();
        let grads: Vec<Vec<ScalarField>> = state.u.iter().map(|c| self.grid.gradient(c)).collect();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                for p in 0..self.grid.len() {
                    worst = worst.max((grads[j][i][p] - grads[i][j][p]).abs());
                }
            }
        }
        worst
    }

    /// Least eigenvalue of `S B^0` over the grid and the lower bound
    /// `0.9 min(lambda_min(M) U^0, 4 U^0 / (gamma - 1))` at the same point.
    pub fn coercivity(&self, state: &FluidState) -> (f64, f64) {
        let d = self.grid.dim();
        let mut worst = (f64::INFINITY, 0.0);
        for p in 0..self.grid.len() {
            let sys = self.assemble(state, p);
            let a0 = &sys.s * &sys.b0;
            let a0 = (&a0 + a0.transpose()) * 0.5;
            let lam = SymmetricEigen::new(a0).eigenvalues.min();
            let m = sys.s.view((0, 0), (d, d)).clone_owned();
            let m_min = SymmetricEigen::new(m).eigenvalues.min();
            let u0 = sys.b0[(0, 0)];
            let bound = 0.9 * (m_min * u0).min(4.0 * u0 / self.exponent());
            if lam - bound < worst.0 - worst.1 {
                worst = (lam, bound);
            }
        }
        worst
    }
}

fn axpy(base: &[f64], dir: &[f64], h: f64) -> ScalarField {
    base.iter().zip(dir).map(|(b, d)| b + d * h).collect()
}
