//! Eikonal-consistent initial data for the wave and fluid systems, and the
//! residual of a single-phase WKB ansatz `A exp(i omega / eps)`.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::{ComplexField, CovectorField, Grid, ScalarField};
use crate::potential::Potential;
use crate::rep::FluidData;

/// Phase on the torus: a linear part `slope . x` plus a periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub slope: Vec<f64>,
    pub periodic: ScalarField,
}

impl Phase {
    pub fn periodic(field: ScalarField, dim: usize) -> Self {
        Self { slope: vec![0.0; dim], periodic: field }
    }

    pub fn values(&self, grid: &Grid) -> ScalarField {
        (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                self.periodic[i] + x.iter().zip(&self.slope).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    pub fn gradient(&self, grid: &Grid) -> Vec<ScalarField> {
        grid.gradient(&self.periodic)
            .into_iter()
            .zip(&self.slope)
            .map(|(g, s)| g.into_iter().map(|v| v + s).collect())
            .collect()
    }

    pub fn laplacian(&self, grid: &Grid) -> ScalarField {
        grid.laplacian(&self.periodic)
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.slope.len() != grid.dim() {
            return Err(LabError::InvalidArgument(format!(
                "phase slope has {} components on a {}-d grid",
                self.slope.len(),
                grid.dim()
            )));
        }
        if self.periodic.len() != grid.len() {
            return Err(LabError::GridMismatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WkbData {
    pub a: ComplexField,
    pub a_t: ComplexField,
    pub v: Phase,
    /// `v_t = -sqrt(1 + 2 V'(|a|^2) + |grad v|^2)`, the future-directed root.
    pub v_t: ScalarField,
}

/// Closes the eikonal equation for the phase velocity. `a_t` defaults to zero.
pub fn close_eikonal(
    grid: &Grid,
    potential: &Potential,
    a: ComplexField,
    a_t: Option<ComplexField>,
    v: Phase,
) -> Result<WkbData> {
    v.check(grid)?;
    let n = grid.len();
    let a_t = a_t.unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); n]);
    if a.len() != n || a_t.len() != n {
        return Err(LabError::GridMismatch);
    }
    let grad = v.gradient(grid);
    let v_t = (0..n)
        .map(|i| {
            let g2: f64 = grad.iter().map(|c| c[i] * c[i]).sum();
            -(1.0 + 2.0 * potential.dv(a[i].norm_sqr()) + g2).sqrt()
        })
        .collect();
    Ok(WkbData { a, a_t, v, v_t })
}

/// `phi = a e^{iv/eps}`, `phi_t = a_t e^{iv/eps} + i (v_t/eps) a e^{iv/eps}`.
/// The linear part of the phase must wind an integer number of times
/// around each axis at this `eps`.
pub fn kg_initial_data(grid: &Grid, data: &WkbData, eps: f64) -> Result<(ComplexField, ComplexField)> {
    if !(eps > 0.0) {
        return Err(LabError::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    for (axis, s) in data.v.slope.iter().enumerate() {
        let w = s * grid.lengths()[axis] / (2.0 * std::f64::consts::PI * eps);
        if (w - w.round()).abs() > 1e-9 * w.abs().max(1.0) {
            return Err(LabError::NonResonant(format!(
                "axis {axis}: phase slope winds {w} times, not an integer"
            )));
        }
    }
    let v = data.v.values(grid);
    let mut phi = Vec::with_capacity(grid.len());
    let mut phi_t = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let e = Complex64::new(0.0, v[i] / eps).exp();
        phi.push(data.a[i] * e);
        phi_t.push(data.a_t[i] * e + Complex64::new(0.0, data.v_t[i] / eps) * data.a[i] * e);
    }
    Ok((phi, phi_t))
}

/// `U_0 = v_t`, `U_i = d_i v`, `rho = |a|^2`.
pub fn rep_initial_data(grid: &Grid, data: &WkbData) -> FluidData {
    let mut comps = vec![data.v_t.clone()];
    comps.extend(data.v.gradient(grid));
    FluidData { u: CovectorField::new(comps), rho: data.a.iter().map(|z| z.norm_sqr()).collect() }
}

/// A phase/amplitude pair and its first two time derivatives at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WkbProfile {
    pub omega: Phase,
    pub omega_t: ScalarField,
    pub omega_tt: ScalarField,
    pub a: ComplexField,
    pub a_t: ComplexField,
    pub a_tt: ComplexField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbResidual {
    /// `L^2` norm of `eps^2 box Phi - Phi - 2 V'(|Phi|^2) Phi` for `Phi = A e^{i omega/eps}`.
    pub residual: f64,
    /// Max-norm of `d^a omega d_a omega + 1 + 2 V'(|A|^2)`.
    pub eikonal: f64,
    /// Max-norm of `2 d^a omega d_a A + A box omega`.
    pub transport: f64,
    /// `eps^2 |box A|_2`, the residual when both constraints hold exactly.
    pub second_order: f64,
}

/// Residual of the WKB ansatz, expanded as
/// `e^{i omega/eps} [ -(d omega . d omega + 1 + 2V') A + i eps (2 d omega . d A + A box omega) + eps^2 box A ]`
/// so no oscillatory field is ever differentiated. Fails when either
/// constraint is violated by more than `tol`.
pub fn wkb_residual(
    grid: &Grid,
    potential: &Potential,
    profile: &WkbProfile,
    eps: f64,
    tol: f64,
) -> Result<WkbResidual> {
    profile.omega.check(grid)?;
    let n = grid.len();
    let p = profile;
    if [p.omega_t.len(), p.omega_tt.len(), p.a.len(), p.a_t.len(), p.a_tt.len()].iter().any(|&l| l != n) {
        return Err(LabError::GridMismatch);
    }
    let grad_w = p.omega.gradient(grid);
    let lap_w = p.omega.laplacian(grid);
    let grad_a = grid.gradient_complex(&p.a);
    let lap_a = grid.laplacian_complex(&p.a);

    let mut full = vec![0.0; n];
    let mut box_a_abs = vec![0.0; n];
    let (mut eikonal, mut transport) = (0.0f64, 0.0f64);
    for i in 0..n {
        let dw2: f64 = -p.omega_t[i].powi(2) + grad_w.iter().map(|g| g[i] * g[i]).sum::<f64>();
        let e = dw2 + 1.0 + 2.0 * potential.dv(p.a[i].norm_sqr());
        let dw_da: Complex64 =
            -p.omega_t[i] * p.a_t[i] + grad_w.iter().zip(&grad_a).map(|(w, a)| w[i] * a[i]).sum::<Complex64>();
        let box_w = -p.omega_tt[i] + lap_w[i];
        let tr = 2.0 * dw_da + p.a[i] * box_w;
        let box_a = -p.a_tt[i] + lap_a[i];
        eikonal = eikonal.max(e.abs());
        transport = transport.max(tr.norm());
        full[i] = (-e * p.a[i] + Complex64::new(0.0, eps) * tr + eps * eps * box_a).norm();
        box_a_abs[i] = box_a.norm();
    }
    if eikonal > tol || transport > tol {
        return Err(LabError::Constraint(format!(
            "WKB constraints violated: eikonal {eikonal:e}, transport {transport:e}"
        )));
    }
    Ok(WkbResidual {
        residual: grid.lp_norm(&full, 2.0)?,
        eikonal,
        transport,
        second_order: eps * eps * grid.lp_norm(&box_a_abs, 2.0)?,
    })
}

/// Travelling-wave pair `omega = k x_1 - Omega t`, `A = amp e^{i m (x_1 - c t)}`
/// with `Omega^2 = k^2 + 1 + 2V'(amp^2)` and `c = k / Omega`. Both
/// constraints hold exactly and `box A = -m^2 (1 - c^2) A`.
pub fn travelling_profile(grid: &Grid, potential: &Potential, amp: f64, k: f64, m: f64, t: f64) -> WkbProfile {
    let n = grid.len();
    let big_omega = (k * k + 1.0 + 2.0 * potential.dv(amp * amp)).sqrt();
    let c = k / big_omega;
    let mut slope = vec![0.0; grid.dim()];
    slope[0] = k;
    let a = grid.sample_complex(|x| amp * Complex64::new(0.0, m * (x[0] - c * t)).exp());
    let a_t = a.iter().map(|z| z * Complex64::new(0.0, -m * c)).collect();
    let a_tt = a.iter().map(|z| z * (-(m * c).powi(2))).collect();
    WkbProfile {
        omega: Phase { slope, periodic: vec![-big_omega * t; n] },
        omega_t: vec![-big_omega; n],
        omega_tt: vec![0.0; n],
        a,
        a_t,
        a_tt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::KgSolver;
    use crate::rep::RepSolver;
    use std::f64::consts::PI;

    fn setup(n: usize) -> (Grid, Potential) {
        (Grid::uniform(1, n, 2.0 * PI).unwrap(), Potential::new(2.0).unwrap())
    }

    fn constant(n: usize, v: f64) -> ComplexField {
        vec![Complex64::new(v, 0.0); n]
    }

    #[test]
    fn eikonal_closure_examples() {
        let (g, p) = setup(16);
        let d = close_eikonal(&g, &p, constant(16, 1.0), None, Phase::periodic(vec![0.0; 16], 1)).unwrap();
        assert!(d.v_t.iter().all(|v| (v + 3f64.sqrt()).abs() < 1e-15));
        let d = close_eikonal(&g, &p, constant(16, 0.0), None, Phase::periodic(vec![0.0; 16], 1)).unwrap();
        assert!(d.v_t.iter().all(|&v| v == -1.0));
        let lin = Phase { slope: vec![1.0], periodic: vec![0.0; 16] };
        let d = close_eikonal(&g, &p, constant(16, 1.0), None, lin).unwrap();
        assert!(d.v_t.iter().all(|v| (v + 2.0).abs() < 1e-14));
    }

    #[test]
    fn kg_data_examples() {
        let (g, p) = setup(16);
        let d = close_eikonal(&g, &p, constant(16, 1.0), None, Phase::periodic(vec![0.0; 16], 1)).unwrap();
        let (phi, phi_t) = kg_initial_data(&g, &d, 0.1).unwrap();
        assert!(phi.iter().all(|z| (z - 1.0).norm() < 1e-15));
        assert!(phi_t.iter().all(|z| (z - Complex64::new(0.0, -10.0 * 3f64.sqrt())).norm() < 1e-12));
        let d0 = close_eikonal(&g, &p, constant(16, 0.0), None, Phase::periodic(vec![0.0; 16], 1)).unwrap();
        let (phi, phi_t) = kg_initial_data(&g, &d0, 0.1).unwrap();
        assert!(phi.iter().chain(&phi_t).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn linear_phase_reproduces_plane_wave() {
        let (g, p) = setup(64);
        let eps = 0.125;
        let lin = Phase { slope: vec![1.0], periodic: vec![0.0; 64] };
        let d = close_eikonal(&g, &p, constant(64, 1.0), None, lin).unwrap();
        let (phi, phi_t) = kg_initial_data(&g, &d, eps).unwrap();
        let kg = KgSolver::new(g.clone(), p);
        let pw = kg.plane_wave(Complex64::new(1.0, 0.0), &[1.0], eps).unwrap();
        for i in 0..64 {
            assert!((phi[i] - pw.phi[i]).norm() < 1e-12);
            assert!((phi_t[i] - pw.phi_t[i]).norm() < 1e-10);
        }
        assert!(matches!(kg_initial_data(&g, &d, 0.3), Err(LabError::NonResonant(_))));
    }

    #[test]
    fn fluid_data_is_well_prepared() {
        let (g, p) = setup(16);
        let d = close_eikonal(&g, &p, constant(16, 1.0), None, Phase::periodic(vec![0.0; 16], 1)).unwrap();
        let f = rep_initial_data(&g, &d);
        assert!(f.u.time().iter().all(|v| (v + 3f64.sqrt()).abs() < 1e-15));
        assert!(f.rho.iter().all(|&r| r == 1.0));

        let (g, _) = setup(128);
        let a = g.sample_complex(|x| Complex64::new(1.0 + 0.3 * (x[0].cos() - 1.0).exp(), 0.1 * x[0].sin()));
        let v = Phase::periodic(g.sample(|x| 0.2 * x[0].sin()), 1);
        let d = close_eikonal(&g, &p, a, None, v).unwrap();
        let rep = RepSolver::new(g.clone(), p);
        let report = rep.validate_well_prepared(&rep_initial_data(&g, &d)).unwrap();
        assert!(report.passed(), "{report:?}");

        let vac = close_eikonal(&g, &p, constant(128, 0.0), None, Phase::periodic(vec![0.0; 128], 1)).unwrap();
        let st = rep.from_data(&rep_initial_data(&g, &vac)).unwrap();
        assert!(rep.recover_u0(&st).iter().all(|&u| u == 1.0));
    }

    #[test]
    fn residual_of_exact_pair() {
        let (g, p) = setup(64);
        let prof = travelling_profile(&g, &p, 1.0, 1.0, 0.0, 0.3);
        let r = wkb_residual(&g, &p, &prof, 0.1, 1e-10).unwrap();
        assert!(r.residual < 1e-12 && r.second_order < 1e-12);
    }

    #[test]
    fn residual_is_second_order() {
        let (g, p) = setup(64);
        let (k, m) = (1.0, 2.0);
        let prof = travelling_profile(&g, &p, 1.0, k, m, 0.0);
        let c2 = k * k / (k * k + 3.0);
        let box_a = m * m * (1.0 - c2) * (2.0 * PI).sqrt();
        for eps in [0.1, 0.05, 0.025] {
            let r = wkb_residual(&g, &p, &prof, eps, 1e-10).unwrap();
            assert!((r.residual - eps * eps * box_a).abs() < 1e-8);
            assert!((r.residual - r.second_order).abs() < 1e-10);
        }
    }

    #[test]
    fn constraint_violation_is_reported() {
        let (g, p) = setup(32);
        let mut prof = travelling_profile(&g, &p, 1.0, 1.0, 1.0, 0.0);
        prof.omega_t.iter_mut().for_each(|w| *w *= 1.1);
        assert!(matches!(wkb_residual(&g, &p, &prof, 0.1, 1e-8), Err(LabError::Constraint(_))));
    }
}
