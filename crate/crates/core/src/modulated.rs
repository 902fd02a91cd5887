//! Modulated stress-energy between a Klein-Gordon state and a fluid state.
//!
//! With `xi_a = (eps d_a - i U_a) Phi` the wave stress tensor splits as
//! `T^KG - T^EP = h + I`, where `h` is quadratic in `xi` plus the Bregman
//! remainder of the potential and `I` is linear in the momentum and density
//! defects. The modulated energy is `H = integral h_a0 U^a`.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::{index_sign, metric, CovectorField, Grid, ScalarField, SymTensorField};
use crate::kg::{KgSolver, KgState};
use crate::rep::{FluidState, RepSolver};
use crate::RHO_FLOOR;

/// Largest tolerated normalization defect of the fluid partner.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Concrete witness for `|h_ab| <= c h_00`.
pub const DOMINATION_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConvergenceNorms {
    /// `max_a |J_a - U_a rho|` in `L^{2 gamma/(gamma+1)}`.
    pub n1: f64,
    /// `max_a |J_a - U_a rho|` in `L^gamma + L^1`.
    pub n2: f64,
    /// `|rho^eps - rho|` in `L^gamma`.
    pub n3: f64,
    /// `|V(rho^eps) - V(rho)|` in `L^1`.
    pub n4: f64,
    /// `n1` of the Euclidean magnitude of the whole covector difference.
    pub n1_bundled: f64,
    /// `n2` of the Euclidean magnitude of the whole covector difference.
    pub n2_bundled: f64,
}

impl ConvergenceNorms {
    pub fn as_array(&self) -> [f64; 4] {
        [self.n1, self.n2, self.n3, self.n4]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedBundle {
    pub xi: CovectorField<Complex64>,
    pub theta: ScalarField,
    pub h: SymTensorField,
    pub i_tensor: SymTensorField,
    pub eta: ScalarField,
    pub h_energy: f64,
    pub h00_energy: f64,
    pub g_corrector: f64,
    pub norms: ConvergenceNorms,
    /// `max |T^KG - T^EP - h - I|`.
    pub decomposition_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H00Residuals {
    pub r_a: f64,
    pub r_b: f64,
    pub mask_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub ok: bool,
    /// Smallest slack of the two pointwise inequalities (negative if violated).
    pub margin: f64,
    /// `min (U^0 - |U|)` and `max (U^0 + |U|)` over the grid.
    pub c2: f64,
    pub c3: f64,
    /// Whether `c2 H0 <= H <= c3 H0` holds for the integrals.
    pub integrated_ok: bool,
}

/// Evaluates modulated quantities for a wave/fluid pair sharing one grid
/// and one potential.
#[derive(Debug, Clone, Copy)]
pub struct Modulator<'a> {
    kg: &'a KgSolver,
    rep: &'a RepSolver,
}

struct Pair {
    u: CovectorField<f64>,
    u0: ScalarField,
    rho: ScalarField,
    rho_eps: ScalarField,
    grad: CovectorField<Complex64>,
    j: CovectorField<f64>,
}

impl<'a> Modulator<'a> {
    pub fn new(kg: &'a KgSolver, rep: &'a RepSolver) -> Result<Self> {
        if kg.grid() != rep.grid() {
            return Err(LabError::GridMismatch);
        }
        if kg.potential() != rep.potential() {
            return Err(LabError::InvalidArgument("wave and fluid use different potentials".into()));
        }
        Ok(Self { kg, rep })
    }

    fn grid(&self) -> &Grid {
        self.kg.grid()
    }

    fn pair(&self, kg: &KgState, fluid: &FluidState) -> Result<Pair> {
        let n = self.grid().len();
        if kg.phi.len() != n || fluid.f.len() != n {
            return Err(LabError::GridMismatch);
        }
        let res = self.rep.normalization_residual(fluid);
        if !(res < NORMALIZATION_TOL) {
            return Err(LabError::Unnormalized(res));
        }
        let u = self.rep.four_velocity(fluid);
        let u0 = u.time().iter().map(|v| -v).collect();
        let grad = self.kg.spacetime_gradient(kg);
        let j = crate::kg::momentum_from_gradient(&kg.phi, &grad, kg.eps);
        Ok(Pair {
            u,
            u0,
            rho: self.rep.density(fluid),
            rho_eps: kg.phi.iter().map(|z| z.norm_sqr()).collect(),
            grad,
            j,
        })
    }

    pub fn build(&self, kg: &KgState, fluid: &FluidState) -> Result<ModulatedBundle> {
        let p = self.pair(kg, fluid)?;
        let grid = self.grid();
        let n = grid.len();
        let slots = p.u.slots();
        let eps = kg.eps;
        let pot = self.kg.potential();

        let xi = CovectorField::new(
            (0..slots)
                .map(|a| {
                    (0..n)
                        .map(|i| eps * p.grad.comps[a][i] - Complex64::new(0.0, p.u.comps[a][i]) * kg.phi[i])
                        .collect()
                })
                .collect(),
        );
        let theta: ScalarField = (0..n).map(|i| pot.theta_unchecked(p.rho_eps[i], p.rho[i])).collect();
        let xi_sq: ScalarField = (0..n)
            .map(|i| (0..slots).map(|c| index_sign(c) * xi.comps[c][i].norm_sqr()).sum())
            .collect();
        let h = SymTensorField::from_fn(slots, |a, b| {
            let g = metric(a, b);
            (0..n)
                .map(|i| (xi.comps[a][i] * xi.comps[b][i].conj()).re - 0.5 * g * xi_sq[i] - g * theta[i])
                .collect()
        });

        // J_c - U_c rho^eps contracted with U^c
        let defect = |a: usize, i: usize| p.j.comps[a][i] - p.u.comps[a][i] * p.rho_eps[i];
        let contracted: ScalarField =
            (0..n).map(|i| (0..slots).map(|c| index_sign(c) * defect(c, i) * p.u.comps[c][i]).sum()).collect();
        let i_tensor = SymTensorField::from_fn(slots, |a, b| {
            let g = metric(a, b);
            (0..n)
                .map(|i| {
                    let (ua, ub) = (p.u.comps[a][i], p.u.comps[b][i]);
                    -ua * ub * (p.rho[i] - p.rho_eps[i]) + ua * defect(b, i) + ub * defect(a, i)
                        - g * contracted[i]
                })
                .collect()
        });

        // eta = h_a0 U^a with U^0 = -U_0 and U^i = U_i
        let eta: ScalarField = (0..n)
            .map(|i| {
                h.get(0, 0)[i] * p.u0[i] + (1..slots).map(|a| h.get(a, 0)[i] * p.u.comps[a][i]).sum::<f64>()
            })
            .collect();
        let big_h = grid.integrate(&eta);
        let h0 = grid.integrate(h.get(0, 0));

        // G = -integral (div U) eps^2 sqrt(rho^eps) d_t sqrt(rho^eps) / 2,
        // and sqrt(rho) d_t sqrt(rho) = Re(conj(Phi) d_t Phi).
        let mut div_u = self.rep.dt_u0(fluid);
        for (axis, comp) in fluid.u.iter().enumerate() {
            for (d, v) in div_u.iter_mut().zip(grid.partial(comp, axis)) {
                *d += v;
            }
        }
        let g_density: ScalarField = (0..n)
            .map(|i| -div_u[i] * eps * eps * (kg.phi[i].conj() * kg.phi_t[i]).re / 2.0)
            .collect();
        let big_g = grid.integrate(&g_density);

        let t_kg = self.kg.stress_energy(kg);
        let t_ep = self.rep.stress_energy(fluid);
        let mut decomposition_residual = 0.0f64;
        for a in 0..slots {
            for b in a..slots {
                for i in 0..n {
                    let r = t_kg.get(a, b)[i] - t_ep.get(a, b)[i] - h.get(a, b)[i] - i_tensor.get(a, b)[i];
                    decomposition_residual = decomposition_residual.max(r.abs());
                }
            }
        }

        let norms = self.norms_of(&p)?;
        Ok(ModulatedBundle {
            xi,
            theta,
            h,
            i_tensor,
            eta,
            h_energy: big_h,
            h00_energy: h0,
            g_corrector: big_g,
            norms,
            decomposition_residual,
        })
    }

    /// `r_a`: `h_00` against `|xi|^2/2 + Theta`. `r_b`: `h_00` against
    /// `eps^2 |d sqrt(rho^eps)|^2/2 + |J - rho^eps U|^2/(2 rho^eps) + Theta`
    /// on points above the vacuum floor. Norms are Euclidean over all slots.
    pub fn h00_identity_residuals(
        &self,
        bundle: &ModulatedBundle,
        kg: &KgState,
        fluid: &FluidState,
    ) -> Result<H00Residuals> {
        let p = self.pair(kg, fluid)?;
        let n = self.grid().len();
        let slots = p.u.slots();
        let eps2 = kg.eps * kg.eps;
        let h00 = bundle.h.get(0, 0);
        let mut r_a = 0.0f64;
        let mut r_b = 0.0f64;
        let mut kept = 0usize;
        for i in 0..n {
            let xi2: f64 = (0..slots).map(|a| bundle.xi.comps[a][i].norm_sqr()).sum();
            r_a = r_a.max((h00[i] - (0.5 * xi2 + bundle.theta[i])).abs());
            let rho = p.rho_eps[i];
            if rho < RHO_FLOOR {
                continue;
            }
            kept += 1;
            let amp = rho.sqrt();
            let mut grad_amp2 = 0.0;
            let mut defect2 = 0.0;
            for a in 0..slots {
                let d = (kg.phi[i].conj() * p.grad.comps[a][i]).re / amp;
                grad_amp2 += d * d;
                defect2 += (p.j.comps[a][i] - rho * p.u.comps[a][i]).powi(2);
            }
            let rhs = 0.5 * eps2 * grad_amp2 + defect2 / (2.0 * rho) + bundle.theta[i];
            r_b = r_b.max((h00[i] - rhs).abs());
        }
        Ok(H00Residuals { r_a, r_b, mask_fraction: kept as f64 / n as f64 })
    }

    /// Pointwise `(U^0 - |U|) h_00 <= eta <= (U^0 + |U|) h_00` with `|U|` the
    /// Euclidean norm of the spatial part.
    pub fn coercivity_sandwich(&self, bundle: &ModulatedBundle, fluid: &FluidState) -> Sandwich {
        let u0 = self.rep.recover_u0(fluid);
        let h00 = bundle.h.get(0, 0);
        let mut margin = f64::INFINITY;
        let mut ok = true;
        let (mut c2, mut c3) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..u0.len() {
            let speed: f64 = fluid.u.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
            let lo = (u0[i] - speed) * h00[i];
            let hi = (u0[i] + speed) * h00[i];
            // Both sides are rounded products of O(U^0 h_00) numbers.
            let tol = 1e-12 * (1.0 + (u0[i] + speed) * h00[i].abs());
            let slack = (bundle.eta[i] - lo).min(hi - bundle.eta[i]);
            if slack < -tol {
                ok = false;
            }
            margin = margin.min(slack);
            c2 = c2.min(u0[i] - speed);
            c3 = c3.max(u0[i] + speed);
        }
        let tol = 1e-12 * (1.0 + c3 * bundle.h00_energy.abs());
        let integrated_ok = c2 * bundle.h00_energy <= bundle.h_energy + tol && bundle.h_energy <= c3 * bundle.h00_energy + tol;
        Sandwich { ok, margin, c2, c3, integrated_ok }
    }

    pub fn convergence_norms(&self, kg: &KgState, fluid: &FluidState) -> Result<ConvergenceNorms> {
        let p = self.pair(kg, fluid)?;
        self.norms_of(&p)
    }

    fn norms_of(&self, p: &Pair) -> Result<ConvergenceNorms> {
        let grid = self.grid();
        let gamma = self.kg.potential().gamma();
        let pot = self.kg.potential();
        let n = grid.len();
        let q = 2.0 * gamma / (gamma + 1.0);
        let mut norms = ConvergenceNorms::default();
        let mut bundled = vec![0.0; n];
        for a in 0..p.u.slots() {
            let diff: ScalarField = (0..n).map(|i| p.j.comps[a][i] - p.u.comps[a][i] * p.rho[i]).collect();
            norms.n1 = norms.n1.max(grid.lp_norm(&diff, q)?);
            norms.n2 = norms.n2.max(grid.sum_norm(&diff, gamma, 1.0)?);
            bundled.iter_mut().zip(&diff).for_each(|(b, d)| *b += d * d);
        }
        bundled.iter_mut().for_each(|b| *b = b.sqrt());
        norms.n1_bundled = grid.lp_norm(&bundled, q)?;
        norms.n2_bundled = grid.sum_norm(&bundled, gamma, 1.0)?;
        let drho: ScalarField = (0..n).map(|i| p.rho_eps[i] - p.rho[i]).collect();
        norms.n3 = grid.lp_norm(&drho, gamma)?;
        let dv: ScalarField = (0..n).map(|i| pot.v(p.rho_eps[i]) - pot.v(p.rho[i])).collect();
        norms.n4 = grid.lp_norm(&dv, 1.0)?;
        Ok(norms)
    }
}

/// Largest excess `|h_ab| - c h_00` over all components and points.
pub fn domination_excess(bundle: &ModulatedBundle, c: f64) -> f64 {
    let h = &bundle.h;
    let h00 = h.get(0, 0);
    let mut worst = f64::NEG_INFINITY;
    for a in 0..h.slots() {
        for b in a..h.slots() {
            for (v, d) in h.get(a, b).iter().zip(h00) {
                worst = worst.max(v.abs() - c * d);
            }
        }
    }
    worst
}

/// Right-hand side `C (sqrt(H0) + H0^(1/gamma))` of the coercivity chain with
/// `C = 10 (1 + energy)`.
pub fn coercivity_bound(h0: f64, energy: f64, gamma: f64) -> f64 {
    let h0 = h0.max(0.0);
    10.0 * (1.0 + energy) * (h0.sqrt() + h0.powf(1.0 / gamma))
}

/// One sample of a co-evolved wave/fluid pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub t: f64,
    pub h_energy: f64,
    pub h00_energy: f64,
    pub g_corrector: f64,
    pub norms: ConvergenceNorms,
}

/// Builds the probe table from trajectories sampled at common times.
pub fn propagation_probe(
    modulator: &Modulator<'_>,
    kg_traj: &[KgState],
    fluid_traj: &[FluidState],
) -> Result<Vec<ProbeRow>> {
    if kg_traj.len() != fluid_traj.len() {
        return Err(LabError::InvalidArgument(format!(
            "{} wave samples but {} fluid samples",
            kg_traj.len(),
            fluid_traj.len()
        )));
    }
    kg_traj
        .iter()
        .zip(fluid_traj)
        .map(|(k, f)| {
            if (k.t - f.t).abs() > 1e-9 * (1.0 + k.t.abs()) {
                return Err(LabError::InvalidArgument(format!("sample times differ: {} vs {}", k.t, f.t)));
            }
            let b = modulator.build(k, f)?;
            Ok(ProbeRow { t: k.t, h_energy: b.h_energy, h00_energy: b.h00_energy, g_corrector: b.g_corrector, norms: b.norms })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallFit {
    pub c: f64,
    pub lambda: f64,
    /// Spread `max/min` of the per-eps constants at the fitted rate.
    pub spread: f64,
}

/// Fits `H(t) <= C (H(0) + eps^2) e^{lambda t}` across an eps sweep.
///
/// For each trial rate on a grid in `[0, 10]` the smallest admissible `C` is
/// the worst ratio over all rows; the rate minimizing the bound at the final
/// time is kept.
pub fn gronwall_fit(sweep: &[(f64, Vec<ProbeRow>)]) -> Option<GronwallFit> {
    let t_max = sweep.iter().flat_map(|(_, r)| r.iter().map(|x| x.t)).fold(0.0, f64::max);
    let mut best: Option<(f64, GronwallFit)> = None;
    for step in 0..=40 {
        let lambda = step as f64 * 0.25;
        let mut per_eps = Vec::new();
        for (eps, rows) in sweep {
            let first = rows.first()?;
            let base = first.h_energy.max(0.0) + eps * eps;
            let c = rows.iter().map(|r| r.h_energy.max(0.0) / (base * (lambda * r.t).exp())).fold(0.0, f64::max);
            per_eps.push(c);
        }
        let c = per_eps.iter().cloned().fold(0.0, f64::max);
        let cmin = per_eps.iter().cloned().fold(f64::INFINITY, f64::min);
        let score = c * (lambda * t_max).exp();
        let fit = GronwallFit { c, lambda, spread: if cmin > 0.0 { c / cmin } else { f64::INFINITY } };
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, fit));
        }
    }
    best.map(|(_, f)| f)
}

/// Smallest `C0` with `dH/dt <= C0 (H + sqrt(H) eps) + dG/dt` at interior
/// samples, derivatives by central differences of the table.
pub fn c0_fit(rows: &[ProbeRow], eps: f64) -> f64 {
    let mut c0 = 0.0f64;
    for w in rows.windows(3) {
        let dt = w[2].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let dh = (w[2].h_energy - w[0].h_energy) / dt;
        let dg = (w[2].g_corrector - w[0].g_corrector) / dt;
        let h = w[1].h_energy.max(0.0);
        let denom = h + h.sqrt() * eps;
        let excess = dh - dg;
        if excess > 0.0 {
            c0 = c0.max(if denom > 0.0 { excess / denom } else { f64::INFINITY });
        }
    }
    c0
}

/// Largest amount by which `dH/dt - dG/dt` exceeds `C0 (H + sqrt(H) eps)`.
pub fn c0_violation(rows: &[ProbeRow], eps: f64, c0: f64) -> f64 {
    let mut worst = 0.0f64;
    for w in rows.windows(3) {
        let dt = w[2].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let h = w[1].h_energy.max(0.0);
        let lhs = (w[2].h_energy - w[0].h_energy) / dt - (w[2].g_corrector - w[0].g_corrector) / dt;
        worst = worst.max(lhs - c0 * (h + h.sqrt() * eps));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::wkb::{close_eikonal, kg_initial_data, rep_initial_data, Phase};
    use std::f64::consts::PI;

    fn solvers(n: usize, gamma: f64) -> (KgSolver, RepSolver) {
        let g = Grid::uniform(1, n, 2.0 * PI).unwrap();
        let p = Potential::new(gamma).unwrap();
        (KgSolver::new(g.clone(), p), RepSolver::new(g, p))
    }

    #[test]
    fn matched_plane_wave_is_exactly_zero() {
        let (kg, rep) = solvers(64, 2.0);
        let st = kg.plane_wave(Complex64::new(1.0, 0.0), &[1.0], 0.1).unwrap();
        let fl = rep.constant_state(&[1.0], 1.0).unwrap();
        let m = Modulator::new(&kg, &rep).unwrap();
        let b = m.build(&st, &fl).unwrap();
        assert!(b.xi.comps.iter().flatten().all(|z| z.norm() < 1e-12));
        assert!(b.theta.iter().all(|&t| t < 1e-28));
        assert!(b.h_energy.abs() < 1e-12 && b.h00_energy.abs() < 1e-12);
        assert!(b.norms.as_array().iter().all(|v| *v < 1e-12), "{:?}", b.norms);
        assert!(b.decomposition_residual < 1e-10);
    }

    #[test]
    fn unit_field_against_resting_fluid() {
        let (kg, rep) = solvers(32, 2.0);
        let st = kg.state(vec![Complex64::new(1.0, 0.0); 32], vec![Complex64::new(0.0, 0.0); 32], 0.1).unwrap();
        let fl = rep.constant_state(&[0.0], 1.0).unwrap();
        let m = Modulator::new(&kg, &rep).unwrap();
        let b = m.build(&st, &fl).unwrap();
        assert!(b.h.get(0, 0).iter().all(|v| (v - 1.5).abs() < 1e-14));
        assert!((b.h00_energy - 3.0 * PI).abs() < 1e-12);
        assert!((b.h_energy - 3.0 * 3f64.sqrt() * PI).abs() < 1e-12);
        let s = m.coercivity_sandwich(&b, &fl);
        assert!(s.ok && s.integrated_ok && s.margin.abs() < 1e-12);
    }

    #[test]
    fn vacuum_pair_is_all_zero() {
        let (kg, rep) = solvers(16, 2.0);
        let st = kg.zero_state(0.1).unwrap();
        let fl = rep.constant_state(&[0.0], 0.0).unwrap();
        let m = Modulator::new(&kg, &rep).unwrap();
        let b = m.build(&st, &fl).unwrap();
        assert_eq!((b.h_energy, b.h00_energy, b.g_corrector), (0.0, 0.0, 0.0));
        assert_eq!(b.h.max_abs(), 0.0);
        assert_eq!(b.i_tensor.max_abs(), 0.0);
        let r = m.h00_identity_residuals(&b, &st, &fl).unwrap();
        assert_eq!(r.mask_fraction, 0.0);
    }

    #[test]
    fn identities_on_a_generic_pair() {
        for gamma in [2.0, 3.0] {
            let (kg, rep) = solvers(128, gamma);
            let g = kg.grid().clone();
            let pot = *kg.potential();
            let a = g.sample_complex(|x| Complex64::new(1.0 + 0.3 * x[0].cos(), 0.2 * x[0].sin()));
            let v = Phase::periodic(g.sample(|x| 0.3 * x[0].sin()), 1);
            let d = close_eikonal(&g, &pot, a, None, v).unwrap();
            let (phi, _) = kg_initial_data(&g, &d, 0.1).unwrap();
            let phi_t = g.sample_complex(|x| Complex64::new(0.4 * x[0].cos(), -2.0 + 0.5 * x[0].sin()));
            let st = kg.state(phi, phi_t, 0.1).unwrap();
            let u = vec![g.sample(|x| 0.5 * (2.0 * x[0]).cos())];
            let f = g.sample(|x| 0.8 + 0.3 * x[0].sin());
            let fl = rep.state(u, f).unwrap();
            let m = Modulator::new(&kg, &rep).unwrap();
            let b = m.build(&st, &fl).unwrap();
            assert!(b.decomposition_residual < 1e-8, "{}", b.decomposition_residual);
            let r = m.h00_identity_residuals(&b, &st, &fl).unwrap();
            assert!(r.r_a < 1e-10 && r.r_b < 1e-8, "{r:?}");
            assert!(b.h.get(0, 0).iter().all(|&v| v >= -1e-12));
            assert!(domination_excess(&b, DOMINATION_CONSTANT) <= 1e-10);
            let s = m.coercivity_sandwich(&b, &fl);
            assert!(s.ok && s.integrated_ok, "{s:?}");
            let e = kg.diagnostics(&st).energy;
            let bound = coercivity_bound(b.h00_energy, e, gamma);
            assert!(b.norms.as_array().iter().all(|&v| v <= bound));
        }
    }

    #[test]
    fn wkb_data_start_small() {
        let (kg, rep) = solvers(256, 2.0);
        let g = kg.grid().clone();
        let pot = *kg.potential();
        let a = g.sample_complex(|x| Complex64::new(1.0 + 0.3 * ((x[0] - PI).cos() - 1.0).exp(), 0.0));
        let d = close_eikonal(&g, &pot, a, None, Phase::periodic(vec![0.0; 256], 1)).unwrap();
        let fl = rep.from_data(&rep_initial_data(&g, &d)).unwrap();
        let m = Modulator::new(&kg, &rep).unwrap();
        let mut ratios = Vec::new();
        for eps in [0.1, 0.05] {
            let (phi, phi_t) = kg_initial_data(&g, &d, eps).unwrap();
            let st = kg.state(phi, phi_t, eps).unwrap();
            let b = m.build(&st, &fl).unwrap();
            ratios.push(b.h_energy / (eps * eps));
        }
        assert!((ratios[0] / ratios[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unnormalized_fluid_is_rejected() {
        let (kg, rep) = solvers(16, 2.0);
        let st = kg.zero_state(0.1).unwrap();
        let mut fl = rep.constant_state(&[0.0], 1.0).unwrap();
        fl.u_time[3] += 1e-3;
        let m = Modulator::new(&kg, &rep).unwrap();
        assert!(matches!(m.build(&st, &fl), Err(LabError::Unnormalized(_))));
    }

    #[test]
    fn gronwall_fit_on_synthetic_growth() {
        let rows = |eps: f64| -> Vec<ProbeRow> {
            (0..6)
                .map(|k| {
                    let t = 0.1 * k as f64;
                    ProbeRow { t, h_energy: eps * eps * t.exp(), h00_energy: 0.0, g_corrector: 0.0, norms: ConvergenceNorms::default() }
                })
                .collect()
        };
        let fit = gronwall_fit(&[(0.1, rows(0.1)), (0.05, rows(0.05))]).unwrap();
        assert!(fit.lambda <= 1.0 && fit.spread < 1.0 + 1e-12);
        let r = rows(0.1);
        let c0 = c0_fit(&r, 0.1);
        assert!(c0 > 0.0 && c0_violation(&r, 0.1, c0) <= 1e-15);
    }
}
