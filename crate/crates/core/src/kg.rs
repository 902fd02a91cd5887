//! Semiclassical nonlinear Klein-Gordon equation
//! `eps^2 box Phi = Phi + 2 V'(|Phi|^2) Phi` on the torus, with `box = -d_tt + Laplacian`.
//!
//! Time stepping uses the classical fourth-order Runge-Kutta scheme on the
//! first-order system `d_t Phi = Psi`, `d_t Psi = Lap Phi - (1 + 2V') Phi / eps^2`
//! with spectral Laplacian.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::{index_sign, metric, ComplexField, CovectorField, Grid, ScalarField, SymTensorField};
use crate::potential::Potential;
use crate::RHO_FLOOR;

#[derive(Debug, Clone, PartialEq)]
pub struct KgState {
    pub phi: ComplexField,
    pub phi_t: ComplexField,
    pub t: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KgDiagnostics {
    pub energy: f64,
    /// Total charge, the integral of the raised time component `J^0 = -J_0`.
    pub charge: f64,
    /// Lowered momentum `J_a = eps Im(conj(Phi) d_a Phi)`.
    pub momentum: CovectorField<f64>,
    pub density: ScalarField,
}

/// Residuals of the three split identities between momentum and density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitResiduals {
    /// Minkowski identity, valid for any wave function.
    pub r1: f64,
    /// Euclidean identity, valid for any wave function.
    pub r2: f64,
    /// On-solution identity involving `sqrt(rho) box sqrt(rho)`.
    pub r3: f64,
    /// Fraction of grid points above the vacuum floor.
    pub mask_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct KgSolver {
    grid: Grid,
    potential: Potential,
}

impl KgSolver {
    pub fn new(grid: Grid, potential: Potential) -> Self {
        Self { grid, potential }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn state(&self, phi: ComplexField, phi_t: ComplexField, eps: f64) -> Result<KgState> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(LabError::InvalidArgument(format!("eps = {eps} must be positive")));
        }
        if phi.len() != self.grid.len() || phi_t.len() != self.grid.len() {
            return Err(LabError::GridMismatch);
        }
        if !phi.iter().chain(&phi_t).all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LabError::InvalidArgument("non-finite wave field".into()));
        }
        Ok(KgState { phi, phi_t, t: 0.0, eps })
    }

    pub fn zero_state(&self, eps: f64) -> Result<KgState> {
        let z = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        self.state(z.clone(), z, eps)
    }

    /// Frequency `omega = sqrt(|k|^2 + 1 + 2 V'(|A|^2))` of the plane wave
    /// `A exp(i (k.x - omega t) / eps)`.
    pub fn dispersion_frequency(&self, amplitude: Complex64, k: &[f64]) -> f64 {
        let k2: f64 = k.iter().map(|v| v * v).sum();
        (k2 + 1.0 + 2.0 * self.potential.dv(amplitude.norm_sqr())).sqrt()
    }

    /// Exact plane-wave solution at `t = 0`. The physical wavenumber `k / eps`
    /// must be a resolved lattice mode of the torus.
    pub fn plane_wave(&self, amplitude: Complex64, k: &[f64], eps: f64) -> Result<KgState> {
        if k.len() != self.grid.dim() {
            return Err(LabError::InvalidArgument(format!(
                "wavevector has {} components on a {}-d grid",
                k.len(),
                self.grid.dim()
            )));
        }
        if !(eps > 0.0) {
            return Err(LabError::InvalidArgument(format!("eps = {eps} must be positive")));
        }
        for (axis, &kj) in k.iter().enumerate() {
            let l = self.grid.lengths()[axis];
            let n = self.grid.shape()[axis];
            let mode = kj * l / (2.0 * std::f64::consts::PI * eps);
            if (mode - mode.round()).abs() > 1e-9 * mode.abs().max(1.0) {
                return Err(LabError::NonResonant(format!(
                    "axis {axis}: k L / (2 pi eps) = {mode} is not an integer"
                )));
            }
            if 2.0 * mode.round().abs() >= n as f64 {
                return Err(LabError::NonResonant(format!(
                    "axis {axis}: mode {mode} is beyond the Nyquist limit of {n} points"
                )));
            }
        }
        let omega = self.dispersion_frequency(amplitude, k);
        let phi = self.grid.sample_complex(|x| {
            let phase: f64 = x.iter().zip(k).map(|(xi, ki)| xi * ki).sum::<f64>() / eps;
            amplitude * Complex64::new(0.0, phase).exp()
        });
        let phi_t = phi.iter().map(|p| p * Complex64::new(0.0, -omega / eps)).collect();
        self.state(phi, phi_t, eps)
    }

    /// Largest stable step `0.5 eps / sqrt(1 + k_max^2 eps^2 + 2 V'(max rho))`.
    pub fn dt_max(&self, state: &KgState) -> f64 {
        let rho_max = state.phi.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let eps = state.eps;
        0.5 * eps / (1.0 + self.grid.k_max_sq() * eps * eps + 2.0 * self.potential.dv(rho_max)).sqrt()
    }

    fn acceleration(&self, phi: &[Complex64], eps: f64) -> ComplexField {
        let lap = self.grid.laplacian_complex(phi);
        let inv_eps2 = 1.0 / (eps * eps);
        lap.iter()
            .zip(phi)
            .map(|(l, p)| l - p * ((1.0 + 2.0 * self.potential.dv(p.norm_sqr())) * inv_eps2))
            .collect()
    }

    /// `d_tt Phi` read off the equation.
    pub fn phi_tt(&self, state: &KgState) -> ComplexField {
        self.acceleration(&state.phi, state.eps)
    }

    pub fn step(&self, state: &KgState, dt: f64) -> Result<KgState> {
        let limit = self.dt_max(state);
        if dt.abs() > limit * (1.0 + 1e-12) {
            return Err(LabError::Cfl { dt, limit });
        }
        let eps = state.eps;
        let axpy = |base: &[Complex64], dir: &[Complex64], h: f64| -> ComplexField {
            base.iter().zip(dir).map(|(b, d)| b + d * h).collect()
        };
        let (p0, v0) = (&state.phi, &state.phi_t);
        let a1 = self.acceleration(p0, eps);
        let p2 = axpy(p0, v0, 0.5 * dt);
        let v2 = axpy(v0, &a1, 0.5 * dt);
        let a2 = self.acceleration(&p2, eps);
        let p3 = axpy(p0, &v2, 0.5 * dt);
        let v3 = axpy(v0, &a2, 0.5 * dt);
        let a3 = self.acceleration(&p3, eps);
        let p4 = axpy(p0, &v3, dt);
        let v4 = axpy(v0, &a3, dt);
        let a4 = self.acceleration(&p4, eps);

        let w = dt / 6.0;
        let phi: ComplexField = (0..p0.len())
            .map(|i| p0[i] + (v0[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]) * w)
            .collect();
        let phi_t: ComplexField = (0..p0.len())
            .map(|i| v0[i] + (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]) * w)
            .collect();
        let t = state.t + dt;
        if !phi.iter().chain(&phi_t).all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LabError::BlowUp { t, reason: "non-finite wave field".into() });
        }
        Ok(KgState { phi, phi_t, t, eps })
    }

    /// Lowered spacetime gradient `(d_t Phi, d_1 Phi, ..., d_d Phi)`.
    pub fn spacetime_gradient(&self, state: &KgState) -> CovectorField<Complex64> {
        let mut comps = vec![state.phi_t.clone()];
        comps.extend(self.grid.gradient_complex(&state.phi));
        CovectorField::new(comps)
    }

    pub fn momentum(&self, state: &KgState) -> CovectorField<f64> {
        let grad = self.spacetime_gradient(state);
        momentum_from_gradient(&state.phi, &grad, state.eps)
    }

    pub fn energy_density(&self, state: &KgState) -> ScalarField {
        let grad = self.spacetime_gradient(state);
        let eps2 = state.eps * state.eps;
        (0..self.grid.len())
            .map(|i| {
                let g2: f64 = grad.comps.iter().map(|c| c[i].norm_sqr()).sum();
                let rho = state.phi[i].norm_sqr();
                0.5 * eps2 * g2 + 0.5 * rho + self.potential.v(rho)
            })
            .collect()
    }

    pub fn diagnostics(&self, state: &KgState) -> KgDiagnostics {
        let momentum = self.momentum(state);
        let energy = self.grid.integrate(&self.energy_density(state));
        let charge = -self.grid.integrate(momentum.time());
        let density = state.phi.iter().map(|z| z.norm_sqr()).collect();
        KgDiagnostics { energy, charge, momentum, density }
    }

    /// Split-identity residuals with `d_tt Phi` taken from the equation.
    pub fn split_identity_residuals(&self, state: &KgState) -> Result<SplitResiduals> {
        let phi_tt = self.phi_tt(state);
        self.split_identity_residuals_with(state, &phi_tt)
    }

    /// Split-identity residuals for a state whose second time derivative is
    /// known independently (e.g. a prescribed space-time field that need not
    /// solve the equation). Only `r3` depends on `phi_tt`.
    pub fn split_identity_residuals_with(
        &self,
        state: &KgState,
        phi_tt: &[Complex64],
    ) -> Result<SplitResiduals> {
        let n = self.grid.len();
        if phi_tt.len() != n {
            return Err(LabError::GridMismatch);
        }
        let eps = state.eps;
        let eps2 = eps * eps;
        let grad = self.spacetime_gradient(state);
        let lap = self.grid.laplacian_complex(&state.phi);
        let j = momentum_from_gradient(&state.phi, &grad, eps);
        let slots = grad.slots();

        let (mut r1, mut r2, mut r3) = (0.0f64, 0.0f64, 0.0f64);
        let mut kept = 0usize;
        for i in 0..n {
            let phi = state.phi[i];
            let rho = phi.norm_sqr();
            if rho < RHO_FLOOR {
                continue;
            }
            kept += 1;
            let amp = rho.sqrt();
            let (mut jj_mink, mut jj_eucl) = (0.0, 0.0);
            let (mut ds_mink, mut ds_eucl) = (0.0, 0.0);
            let (mut gg_mink, mut gg_eucl) = (0.0, 0.0);
            for a in 0..slots {
                let s = index_sign(a);
                let ja = j.comps[a][i];
                // d_a sqrt(rho) = Re(conj(Phi) d_a Phi) / |Phi|
                let dsq = (phi.conj() * grad.comps[a][i]).re / amp;
                let g2 = grad.comps[a][i].norm_sqr();
                jj_mink += s * ja * ja;
                jj_eucl += ja * ja;
                ds_mink += s * dsq * dsq;
                ds_eucl += dsq * dsq;
                gg_mink += s * g2;
                gg_eucl += g2;
            }
            let lhs_mink = jj_mink / rho;
            r1 = r1.max((lhs_mink - (-eps2 * ds_mink + eps2 * gg_mink)).abs());
            r2 = r2.max((jj_eucl / rho - (-eps2 * ds_eucl + eps2 * gg_eucl)).abs());

            // sqrt(rho) box sqrt(rho) = Re(conj(Phi) box Phi) + d_aPhi conj(d^aPhi)
            //                           - d_a sqrt(rho) d^a sqrt(rho)
            let box_phi = -phi_tt[i] + lap[i];
            let sqrt_box_sqrt = (phi.conj() * box_phi).re + gg_mink - ds_mink;
            let rhs3 = eps2 * sqrt_box_sqrt - rho - 2.0 * self.potential.dv(rho) * rho;
            r3 = r3.max((lhs_mink - rhs3).abs());
        }
        if kept == 0 {
            return Err(LabError::Vacuum);
        }
        Ok(SplitResiduals { r1, r2, r3, mask_fraction: kept as f64 / n as f64 })
    }

    /// Stress-energy tensor with unit mass,
    /// `T_ab = eps^2 Re(d_a Phi conj(d_b Phi)) - g_ab/2 (eps^2 d_c Phi conj(d^c Phi) + |Phi|^2 + 2 V(|Phi|^2))`.
    pub fn stress_energy(&self, state: &KgState) -> SymTensorField {
        let grad = self.spacetime_gradient(state);
        let eps2 = state.eps * state.eps;
        let n = self.grid.len();
        let trace: ScalarField = (0..n)
            .map(|i| {
                let rho = state.phi[i].norm_sqr();
                let g: f64 = (0..grad.slots()).map(|c| index_sign(c) * grad.comps[c][i].norm_sqr()).sum();
                eps2 * g + rho + 2.0 * self.potential.v(rho)
            })
            .collect();
        SymTensorField::from_fn(grad.slots(), |a, b| {
            let gab = metric(a, b);
            (0..n)
                .map(|i| eps2 * (grad.comps[a][i] * grad.comps[b][i].conj()).re - 0.5 * gab * trace[i])
                .collect()
        })
    }

    /// Max-norm of `d_a T^a_b` at the middle of five snapshots spaced `dt`
    /// apart; time derivatives by the fourth-order central stencil.
    pub fn stress_divergence_residual(&self, snapshots: &[KgState], dt: f64) -> Result<f64> {
        if snapshots.len() != 5 {
            return Err(LabError::InvalidArgument(format!(
                "need 5 snapshots, got {}",
                snapshots.len()
            )));
        }
        let tensors: Vec<SymTensorField> = snapshots.iter().map(|s| self.stress_energy(s)).collect();
        let mid = &tensors[2];
        let slots = mid.slots();
        let n = self.grid.len();
        let mut worst = 0.0f64;
        for b in 0..slots {
            let mut div = vec![0.0; n];
            for (i, d) in div.iter_mut().enumerate() {
                let dt_t0b = (tensors[0].get(0, b)[i] - 8.0 * tensors[1].get(0, b)[i]
                    + 8.0 * tensors[3].get(0, b)[i]
                    - tensors[4].get(0, b)[i])
                    / (12.0 * dt);
                *d = -dt_t0b;
            }
            for axis in 0..self.grid.dim() {
                let di = self.grid.partial(mid.get(axis + 1, b), axis);
                div.iter_mut().zip(di).for_each(|(d, v)| *d += v);
            }
            worst = worst.max(crate::grid::max_abs(&div));
        }
        Ok(worst)
    }
}

pub(crate) fn momentum_from_gradient(
    phi: &[Complex64],
    grad: &CovectorField<Complex64>,
    eps: f64,
) -> CovectorField<f64> {
    CovectorField::new(
        grad.comps
            .iter()
            .map(|g| g.iter().zip(phi).map(|(d, p)| eps * (p.conj() * d).im).collect())
            .collect(),
    )
}
