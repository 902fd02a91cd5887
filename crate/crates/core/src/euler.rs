//! Map from the fluid system with potential to relativistic Euler with
//! pressure: `u = Gamma U`, `mu = rho + (gamma+1) V / c^2`, `p = (gamma-1) V`,
//! with `Gamma = 1 / sqrt(1 + 2 V'(rho) / c^2)`.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::fit::{fit_power_law, PowerFit};
use crate::grid::{index_sign, CovectorField, ScalarField};
use crate::rep::{FluidState, RepSolver};

#[derive(Debug, Clone, PartialEq)]
pub struct EulerState {
    /// Lowered four-velocity `u_a = Gamma U_a`.
    pub u: CovectorField<f64>,
    pub mu: ScalarField,
    pub p: ScalarField,
    pub gamma_factor: ScalarField,
    pub c: f64,
}

/// `Gamma - 1` for `x = 2 V' / c^2`, free of cancellation for small `x`.
fn gamma_minus_one(x: f64) -> f64 {
    let s = (1.0 + x).sqrt();
    -x / (s * (1.0 + s))
}

pub fn to_euler(rep: &RepSolver, fluid: &FluidState, c: f64) -> Result<EulerState> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(LabError::InvalidArgument(format!("light speed c = {c} must be positive")));
    }
    let pot = rep.potential();
    let g = pot.gamma();
    let c2 = c * c;
    let rho = rep.density(fluid);
    let big_u = rep.four_velocity(fluid);
    let gamma_factor: ScalarField =
        rho.iter().map(|&r| 1.0 + gamma_minus_one(2.0 * pot.dv(r) / c2)).collect();
    let u = CovectorField::new(
        big_u.comps.iter().map(|comp| comp.iter().zip(&gamma_factor).map(|(v, gf)| v * gf).collect()).collect(),
    );
    let mu = rho.iter().map(|&r| r + (g + 1.0) * pot.v(r) / c2).collect();
    let p = rho.iter().map(|&r| (g - 1.0) * pot.v(r)).collect();
    Ok(EulerState { u, mu, p, gamma_factor, c })
}

/// `(max |rho U_a - u_a (mu + p/c^2) Gamma|, max |rho - (mu + p/c^2) Gamma^2|)`.
pub fn identity_residuals(rep: &RepSolver, fluid: &FluidState, euler: &EulerState) -> (f64, f64) {
    let rho = rep.density(fluid);
    let big_u = rep.four_velocity(fluid);
    let c2 = euler.c * euler.c;
    let (mut r_j, mut r_rho) = (0.0f64, 0.0f64);
    for i in 0..rho.len() {
        let w = euler.mu[i] + euler.p[i] / c2;
        let gf = euler.gamma_factor[i];
        for a in 0..big_u.slots() {
            r_j = r_j.max((rho[i] * big_u.comps[a][i] - euler.u.comps[a][i] * w * gf).abs());
        }
        r_rho = r_rho.max((rho[i] - w * gf * gf).abs());
    }
    (r_j, r_rho)
}

/// `max |u^a u_a + c^2|` in the metric `diag(-1, 1, ...)` scaled so that
/// `c = 1` gives the unit normalization.
pub fn unit_normalization_residual(euler: &EulerState, rho: &[f64], floor: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..rho.len() {
        if rho[i] <= floor {
            continue;
        }
        let uu: f64 = (0..euler.u.slots()).map(|a| index_sign(a) * euler.u.comps[a][i].powi(2)).sum();
        worst = worst.max((uu + 1.0).abs());
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerResidual {
    /// Max-norm of `u^a d_a u^b + (g^ab + u^a u^b) d_a p / (mu + p)` over all `b`.
    pub momentum: f64,
    /// Max-norm of `u^a d_a mu + (d_a u^a)(mu + p)`.
    pub energy: f64,
}

impl EulerResidual {
    pub fn max(&self) -> f64 {
        self.momentum.max(self.energy)
    }
}

/// Residual of relativistic Euler (`c = 1`) at the middle of five mapped
/// states spaced `dt` apart. Time derivatives use the fourth-order central
/// stencil; space derivatives are spectral.
pub fn euler_residual(rep: &RepSolver, traj: &[EulerState], dt: f64) -> Result<EulerResidual> {
    if traj.len() != 5 {
        return Err(LabError::InvalidArgument(format!("need 5 snapshots, got {}", traj.len())));
    }
    if traj.iter().any(|e| e.c != 1.0) {
        return Err(LabError::InvalidArgument("the dynamic residual is only defined for c = 1".into()));
    }
    let grid = rep.grid();
    let n = grid.len();
    let slots = traj[2].u.slots();
    let d = slots - 1;
    let stencil = |f: &dyn Fn(&EulerState) -> &[f64]| -> ScalarField {
        (0..n)
            .map(|i| (f(&traj[0])[i] - 8.0 * f(&traj[1])[i] + 8.0 * f(&traj[3])[i] - f(&traj[4])[i]) / (12.0 * dt))
            .collect()
    };
    let mid = &traj[2];
    // Raised components: u^0 = -u_0, u^i = u_i.
    let up: Vec<ScalarField> = (0..slots)
        .map(|a| mid.u.comps[a].iter().map(|v| index_sign(a) * v).collect())
        .collect();
    let dt_up: Vec<ScalarField> = (0..slots)
        .map(|a| {
            let raw = stencil(&|e: &EulerState| e.u.comps[a].as_slice());
            raw.into_iter().map(|v| index_sign(a) * v).collect()
        })
        .collect();
    let dx_up: Vec<Vec<ScalarField>> = up.iter().map(|c| grid.gradient(c)).collect();
    let dt_p = stencil(&|e: &EulerState| e.p.as_slice());
    let dt_mu = stencil(&|e: &EulerState| e.mu.as_slice());
    let dx_p = grid.gradient(&mid.p);
    let dx_mu = grid.gradient(&mid.mu);

    let mut res = EulerResidual { momentum: 0.0, energy: 0.0 };
    for i in 0..n {
        let w = mid.mu[i] + mid.p[i];
        // d_a p with the time slot first
        let dp: Vec<f64> = std::iter::once(dt_p[i]).chain((0..d).map(|k| dx_p[k][i])).collect();
        let u_dot_dp: f64 = (0..slots).map(|a| up[a][i] * dp[a]).sum();
        for b in 0..slots {
            let transport = up[0][i] * dt_up[b][i] + (0..d).map(|k| up[k + 1][i] * dx_up[b][k][i]).sum::<f64>();
            // g^ab d_a p = sign(b) d_b p for the diagonal metric
            let proj = index_sign(b) * dp[b] + up[b][i] * u_dot_dp;
            let r = if w > 0.0 { transport + proj / w } else { transport };
            res.momentum = res.momentum.max(r.abs());
        }
        let div_u = dt_up[0][i] + (0..d).map(|k| dx_up[k + 1][k][i]).sum::<f64>();
        let u_dot_dmu = up[0][i] * dt_mu[i] + (0..d).map(|k| up[k + 1][i] * dx_mu[k][i]).sum::<f64>();
        res.energy = res.energy.max((u_dot_dmu + div_u * w).abs());
    }
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NrRow {
    pub c: f64,
    /// `max_a |u_a - U_a|`
    pub u_dev: f64,
    /// `max |mu - rho|`
    pub mu_dev: f64,
    /// `max |Gamma - 1|`
    pub gamma_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NrSweep {
    pub rows: Vec<NrRow>,
    /// Slopes of the three deviations against `c^-2` on log-log axes.
    pub u_fit: PowerFit,
    pub mu_fit: PowerFit,
    pub gamma_fit: PowerFit,
}

pub fn nr_limit_sweep(rep: &RepSolver, fluid: &FluidState, c_list: &[f64]) -> Result<NrSweep> {
    let big_u = rep.four_velocity(fluid);
    let rho = rep.density(fluid);
    let pot = rep.potential();
    let mut rows = Vec::with_capacity(c_list.len());
    for &c in c_list {
        let e = to_euler(rep, fluid, c)?;
        let c2 = c * c;
        let mut row = NrRow { c, u_dev: 0.0, mu_dev: 0.0, gamma_dev: 0.0 };
        for i in 0..rho.len() {
            let gm1 = gamma_minus_one(2.0 * pot.dv(rho[i]) / c2);
            row.gamma_dev = row.gamma_dev.max(gm1.abs());
            for a in 0..big_u.slots() {
                row.u_dev = row.u_dev.max((gm1 * big_u.comps[a][i]).abs());
            }
            row.mu_dev = row.mu_dev.max((e.mu[i] - rho[i]).abs());
        }
        rows.push(row);
    }
    let x: Vec<f64> = c_list.iter().map(|c| c.powi(-2)).collect();
    let col = |f: fn(&NrRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    Ok(NrSweep {
        u_fit: fit_power_law(&x, &col(|r| r.u_dev))?,
        mu_fit: fit_power_law(&x, &col(|r| r.mu_dev))?,
        gamma_fit: fit_power_law(&x, &col(|r| r.gamma_dev))?,
        rows,
    })
}
