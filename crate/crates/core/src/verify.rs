//! Verification suites: every identity and inequality check bundled into a
//! machine-readable pass/fail report.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{LabError, Result};
use crate::euler::{euler_residual, identity_residuals, nr_limit_sweep, to_euler, unit_normalization_residual};
use crate::fit::fit_power_law;
use crate::grid::Grid;
use crate::kg::{KgSolver, KgState};
use crate::modulated::{coercivity_bound, domination_excess, Modulator, DOMINATION_CONSTANT};
use crate::potential::Potential;
use crate::rep::{FluidState, RepSolver};
use crate::wkb::{close_eikonal, kg_initial_data, rep_initial_data, travelling_profile, wkb_residual, Phase, WkbData};

/// Exponents exercised by the randomized checks.
pub const GAMMAS: [f64; 4] = [2.0, 2.5, 3.0, 4.0];
/// Number of `Theta` draws per exponent.
pub const THETA_DRAWS: usize = 10_000;
/// Number of randomized wave/fluid pairs for the coercivity sandwich.
pub const SANDWICH_STATES: usize = 100;
/// Step size as a fraction of the wave CFL limit for conservation runs.
pub const DT_SAFETY: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Inequalities,
    Conservation,
    Coercivity,
    Equivalence,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] =
        [Suite::Identities, Suite::Inequalities, Suite::Conservation, Suite::Coercivity, Suite::Equivalence];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Inequalities => "inequalities",
            Suite::Conservation => "conservation",
            Suite::Coercivity => "coercivity",
            Suite::Equivalence => "equivalence",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::EACH.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Self::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| LabError::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub suites: Vec<&'static str>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_time_s: f64,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Recorder {
    suite: Suite,
    checks: Vec<Check>,
}

impl Recorder {
    fn push(&mut self, name: String, value: f64, relation: Relation, bound: f64, detail: Option<String>) {
        let passed = match relation {
            Relation::AtMost => value <= bound,
            Relation::AtLeast => value >= bound,
        };
        self.checks.push(Check { suite: self.suite.name(), name, value, relation, bound, passed, detail });
    }

    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.push(name.into(), value, Relation::AtMost, bound, None);
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.push(name.into(), value, Relation::AtLeast, bound, None);
    }

    /// Counts failures of a predicate; passes when there are none.
    fn none_fail(&mut self, name: impl Into<String>, failures: usize, total: usize) {
        let detail = Some(format!("{failures} of {total} failed"));
        self.push(name.into(), failures as f64, Relation::AtMost, 0.0, detail);
    }
}

/// Runs the requested suites with a corpus seeded from `seed`.
pub fn verify(suite: Suite, seed: u64) -> Report {
    let start = Instant::now();
    let members = suite.members();
    let checks: Vec<Vec<Check>> = members
        .par_iter()
        .map(|&s| {
            let mut rec = Recorder { suite: s, checks: Vec::new() };
            // Each suite owns a stream so results do not depend on which suites run.
            let mut corpus = Corpus::new(seed ^ (s as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let outcome = match s {
                Suite::Identities => identities(&mut rec, &mut corpus),
                Suite::Inequalities => inequalities(&mut rec, &mut corpus),
                Suite::Conservation => conservation(&mut rec),
                Suite::Coercivity => coercivity(&mut rec, &mut corpus),
                Suite::Equivalence => equivalence(&mut rec, &mut corpus),
                Suite::All => unreachable!(),
            };
            if let Err(e) = outcome {
                rec.push("suite completed".into(), f64::NAN, Relation::AtMost, 0.0, Some(e.to_string()));
            }
            rec.checks
        })
        .collect();
    let checks: Vec<Check> = checks.into_iter().flatten().collect();
    Report {
        seed,
        suites: members.iter().map(|s| s.name()).collect(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

fn solvers(dim: usize, n: usize, gamma: f64) -> Result<(KgSolver, RepSolver)> {
    let g = Grid::uniform(dim, n, 2.0 * PI)?;
    let p = Potential::new(gamma)?;
    Ok((KgSolver::new(g.clone(), p), RepSolver::new(g, p)))
}

/// WKB data with amplitude `1 + 0.3 exp(cos(x - pi) - 1)` and zero phase.
pub fn bump_data(grid: &Grid, potential: &Potential) -> Result<WkbData> {
    let a = grid.sample_complex(|x| Complex64::new(1.0 + 0.3 * ((x[0] - PI).cos() - 1.0).exp(), 0.0));
    close_eikonal(grid, potential, a, None, Phase::periodic(vec![0.0; grid.len()], grid.dim()))
}

/// Evolves a wave state to `t` with steps of `safety` times the CFL limit.
pub fn evolve_wave(kg: &KgSolver, st: &KgState, t: f64, safety: f64) -> Result<KgState> {
    let mut st = st.clone();
    while st.t < t {
        let dt = (safety * kg.dt_max(&st)).min(t - st.t);
        st = kg.step(&st, dt)?;
        if (st.t - t).abs() < 1e-12 * (1.0 + t) {
            st.t = t;
        }
    }
    Ok(st)
}

/// Evolves a fluid state to `t` at the CFL limit.
pub fn evolve_fluid(rep: &RepSolver, st: &FluidState, t: f64) -> Result<FluidState> {
    let mut st = st.clone();
    while st.t < t {
        let dt = rep.dt_max(&st).min(t - st.t);
        st = rep.step(&st, dt)?;
        if (st.t - t).abs() < 1e-12 * (1.0 + t) {
            st.t = t;
        }
    }
    Ok(st)
}

fn identities(rec: &mut Recorder, corpus: &mut Corpus) -> Result<()> {
    let (kg, rep) = solvers(1, 64, 2.0)?;
    let one = Complex64::new(1.0, 0.0);
    let pw = kg.plane_wave(one, &[1.0], 0.1)?;
    let r = kg.split_identity_residuals(&pw)?;
    rec.at_most("plane wave: Minkowski split identity", r.r1, 1e-10);
    rec.at_most("plane wave: Euclidean split identity", r.r2, 1e-10);
    rec.at_most("plane wave: on-solution identity", r.r3, 1e-8);

    let (mut r1, mut r2, mut r3) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..6 {
        let (kg, _) = solvers(1, 128, [2.0, 3.0][k % 2])?;
        let st = corpus.wave_state(&kg, 0.1)?;
        let r = kg.split_identity_residuals(&st)?;
        (r1, r2, r3) = (r1.max(r.r1), r2.max(r.r2), r3.max(r.r3));
    }
    rec.at_most("random states: Minkowski split identity", r1, 1e-10);
    rec.at_most("random states: Euclidean split identity", r2, 1e-10);
    rec.at_most("random states: on-solution identity with equation d_tt", r3, 1e-8);

    // A prescribed field that does not solve the equation, with exact d_tt.
    let (kg128, _) = solvers(1, 128, 2.0)?;
    let g = kg128.grid().clone();
    let (eps, omega) = (0.1, 3.0);
    let phi = g.sample_complex(|x| (1.0 + 0.3 * x[0].cos()) * Complex64::new(0.0, x[0] / eps).exp());
    let phi_t: Vec<Complex64> = phi.iter().map(|z| z * Complex64::new(0.0, -omega / eps)).collect();
    let phi_tt: Vec<Complex64> = phi.iter().map(|z| z * (-(omega * omega) / (eps * eps))).collect();
    let st = kg128.state(phi, phi_t, eps)?;
    let r = kg128.split_identity_residuals_with(&st, &phi_tt)?;
    rec.at_least("non-solution is detected by the on-solution identity", r.r3, 1e-3);

    let m = Modulator::new(&kg, &rep)?;
    let fl = rep.constant_state(&[1.0], 1.0)?;
    let b = m.build(&pw, &fl)?;
    rec.at_most("matched pair: |H| at t = 0", b.h_energy.abs(), 1e-10);
    let later = evolve_wave(&kg, &pw, 0.5, DT_SAFETY)?;
    let b = m.build(&later, &fl)?;
    rec.at_most("matched pair: |H| at t = 0.5", b.h_energy.abs(), 1e-10);

    let (mut dec, mut ra, mut rb) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..8 {
        let (kg, rep) = solvers(1, 128, GAMMAS[k % 4])?;
        let eps = corpus.uniform(0.05, 0.2);
        let st = corpus.wave_state(&kg, eps)?;
        let fl = corpus.fluid_state(&rep, 1.0)?;
        let m = Modulator::new(&kg, &rep)?;
        let b = m.build(&st, &fl)?;
        let r = m.h00_identity_residuals(&b, &st, &fl)?;
        (dec, ra, rb) = (dec.max(b.decomposition_residual), ra.max(r.r_a), rb.max(r.r_b));
    }
    rec.at_most("random pairs: stress decomposition", dec, 1e-8);
    rec.at_most("random pairs: h00 as |xi|^2/2 + Theta", ra, 1e-10);
    rec.at_most("random pairs: h00 via amplitude and momentum defect", rb, 1e-8);

    let (g, p) = (Grid::uniform(1, 128, 2.0 * PI)?, Potential::new(2.0)?);
    let prof = travelling_profile(&g, &p, 1.0, 1.0, 1.0, 0.0);
    let ladder = [0.1, 0.05, 0.025];
    let res: Vec<f64> =
        ladder.iter().map(|&e| wkb_residual(&g, &p, &prof, e, 1e-10).map(|r| r.residual)).collect::<Result<_>>()?;
    let fit = fit_power_law(&ladder, &res)?;
    rec.at_most("WKB residual order: |slope - 2|", (fit.slope - 2.0).abs(), 0.1);
    Ok(())
}

/// `Theta` arguments: uniform, log-uniform, near-diagonal and boundary draws.
fn theta_draw(corpus: &mut Corpus) -> (f64, f64) {
    match corpus.index(4) {
        0 => (corpus.uniform(0.0, 4.0), corpus.uniform(0.0, 4.0)),
        1 => (10f64.powf(corpus.uniform(-6.0, 2.0)), 10f64.powf(corpus.uniform(-6.0, 2.0))),
        2 => {
            let y = corpus.uniform(0.0, 10.0);
            (y * (1.0 + corpus.uniform(-1e-3, 1e-3)), y)
        }
        _ => {
            let v = corpus.uniform(0.0, 10.0);
            if corpus.index(2) == 0 {
                (0.0, v)
            } else {
                (v, 0.0)
            }
        }
    }
}

fn inequalities(rec: &mut Recorder, corpus: &mut Corpus) -> Result<()> {
    for gamma in GAMMAS {
        let p = Potential::new(gamma)?;
        let (mut neg, mut b1, mut b2) = (0, 0, 0);
        for _ in 0..THETA_DRAWS {
            let (x, y) = theta_draw(corpus);
            let th = p.theta(x, y)?;
            let (ok1, ok2) = p.theta_bound_check(x, y);
            neg += usize::from(!(th >= 0.0));
            b1 += usize::from(!ok1);
            b2 += usize::from(!ok2);
        }
        rec.none_fail(format!("gamma = {gamma}: Theta >= 0"), neg, THETA_DRAWS);
        rec.none_fail(format!("gamma = {gamma}: Theta >= c (x-y)^2 (x^(g-2) + y^(g-2))"), b1, THETA_DRAWS);
        rec.none_fail(format!("gamma = {gamma}: Theta >= c |x-y|^gamma"), b2, THETA_DRAWS);

        let grid = Grid::uniform(1, 64, 2.0 * PI)?;
        let mut fails = 0;
        let draws = 200;
        for _ in 0..draws {
            let f = corpus.bounded_density(&grid);
            let g = corpus.bounded_density(&grid);
            fails += usize::from(!p.power_difference_bound(&grid, &f, &g)?);
        }
        rec.none_fail(format!("gamma = {gamma}: power-difference bound"), fails, draws);
    }

    let (mut dom, mut neg_h00, mut chain) = (f64::NEG_INFINITY, 0usize, 0usize);
    let pairs = 20;
    for k in 0..pairs {
        let gamma = GAMMAS[k % 4];
        let (kg, rep) = solvers(1, 64, gamma)?;
        let eps = corpus.uniform(0.05, 0.2);
        let st = corpus.wave_state(&kg, eps)?;
        let fl = corpus.fluid_state(&rep, 1.0)?;
        let m = Modulator::new(&kg, &rep)?;
        let b = m.build(&st, &fl)?;
        dom = dom.max(domination_excess(&b, DOMINATION_CONSTANT));
        neg_h00 += usize::from(b.h.get(0, 0).iter().any(|&v| v < -1e-12));
        let bound = coercivity_bound(b.h00_energy, kg.diagnostics(&st).energy, gamma);
        chain += usize::from(b.norms.as_array().iter().any(|&v| v > bound));
    }
    rec.at_most("random pairs: max(|h_ab| - 4 h00)", dom, 1e-10);
    rec.none_fail("random pairs: h00 >= 0", neg_h00, pairs);
    rec.none_fail("random pairs: convergence norms below coercivity chain", chain, pairs);
    Ok(())
}

fn coercivity(rec: &mut Recorder, corpus: &mut Corpus) -> Result<()> {
    let (mut pointwise, mut integrated) = (0, 0);
    let mut margin = f64::INFINITY;
    for k in 0..SANDWICH_STATES {
        let (kg, rep) = solvers(1, 64, GAMMAS[k % 4])?;
        let eps = corpus.uniform(0.05, 0.2);
        let st = corpus.wave_state(&kg, eps)?;
        let speed = corpus.uniform(0.1, 2.0);
        let fl = corpus.fluid_state(&rep, speed)?;
        let m = Modulator::new(&kg, &rep)?;
        let b = m.build(&st, &fl)?;
        let s = m.coercivity_sandwich(&b, &fl);
        pointwise += usize::from(!s.ok);
        integrated += usize::from(!s.integrated_ok);
        margin = margin.min(s.margin);
    }
    rec.none_fail("pointwise (U0 - |U|) h00 <= eta <= (U0 + |U|) h00", pointwise, SANDWICH_STATES);
    rec.none_fail("integrated c2 H0 <= H <= c3 H0", integrated, SANDWICH_STATES);

    let mut fails = 0;
    let states = 20;
    for k in 0..states {
        let (_, rep) = solvers(1, 32, GAMMAS[k % 4])?;
        let fl = corpus.fluid_state(&rep, 1.5)?;
        let (lam, bound) = rep.coercivity(&fl);
        fails += usize::from(lam < bound);
    }
    rec.none_fail("fluid symmetrizer: least eigenvalue of S B0 above bound", fails, states);

    let (kg, rep) = solvers(1, 256, 2.0)?;
    let d = bump_data(kg.grid(), kg.potential())?;
    let fl = rep.from_data(&rep_initial_data(kg.grid(), &d))?;
    let m = Modulator::new(&kg, &rep)?;
    let mut ratios = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let (phi, phi_t) = kg_initial_data(kg.grid(), &d, eps)?;
        let b = m.build(&kg.state(phi, phi_t, eps)?, &fl)?;
        ratios.push(b.h_energy / (eps * eps));
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    rec.at_most("WKB data: spread of H(0) / eps^2", hi / lo - 1.0, 1e-8);
    Ok(())
}

fn conservation(rec: &mut Recorder) -> Result<()> {
    let (kg, rep) = solvers(1, 256, 2.0)?;
    let g = kg.grid().clone();
    let d = bump_data(&g, kg.potential())?;
    for eps in [0.1, 0.05, 0.025] {
        let (phi, phi_t) = kg_initial_data(&g, &d, eps)?;
        let st0 = kg.state(phi, phi_t, eps)?;
        let d0 = kg.diagnostics(&st0);
        let st1 = evolve_wave(&kg, &st0, 1.0, DT_SAFETY)?;
        let d1 = kg.diagnostics(&st1);
        rec.at_most(format!("eps = {eps}: relative energy drift over unit time"), ((d1.energy - d0.energy) / d0.energy).abs(), 1e-6);
        rec.at_most(format!("eps = {eps}: relative charge drift over unit time"), ((d1.charge - d0.charge) / d0.charge).abs(), 1e-6);
        rec.at_most(
            format!("eps = {eps}: charge drift / (1 + |charge|)"),
            (d1.charge - d0.charge).abs() / (1.0 + d0.charge.abs()),
            1e-8,
        );
    }

    let (phi, phi_t) = kg_initial_data(&g, &d, 0.1)?;
    let mut st = evolve_wave(&kg, &kg.state(phi, phi_t, 0.1)?, 0.1, DT_SAFETY)?;
    let dt = DT_SAFETY * kg.dt_max(&st);
    let mut snaps = vec![st.clone()];
    for _ in 0..4 {
        st = kg.step(&st, dt)?;
        snaps.push(st.clone());
    }
    rec.at_most("wave stress-energy divergence on a solution", kg.stress_divergence_residual(&snaps, dt)?, 1e-4);

    let fl0 = rep.from_data(&rep_initial_data(&g, &d))?;
    let fl1 = evolve_fluid(&rep, &fl0, 1.0)?;
    let growth = rep.normalization_residual(&fl1) - rep.normalization_residual(&fl0);
    rec.at_most("fluid normalization growth per unit time", growth, 1e-6);
    let (q0, q1) = (rep.diagnostics(&fl0).charge, rep.diagnostics(&fl1).charge);
    rec.at_most("fluid relative charge drift per unit time", ((q1 - q0) / q0).abs(), 1e-6);
    rec.at_least("fluid density stays nonnegative", rep.density(&fl1).iter().cloned().fold(f64::INFINITY, f64::min), 0.0);

    let (kg2, rep2) = solvers(2, 32, 2.0)?;
    let g2 = kg2.grid().clone();
    let a = g2.sample_complex(|x| Complex64::new(1.0 + 0.2 * x[0].cos() * x[1].cos(), 0.0));
    let v = Phase::periodic(g2.sample(|x| 0.3 * x[0].sin() + 0.2 * x[1].cos()), 2);
    let d2 = close_eikonal(&g2, kg2.potential(), a, None, v)?;
    let fl0 = rep2.from_data(&rep_initial_data(&g2, &d2))?;
    let fl1 = evolve_fluid(&rep2, &fl0, 1.0)?;
    rec.at_most("2d fluid: curl growth per unit time", rep2.curl(&fl1) - rep2.curl(&fl0), 1e-6);
    let growth = rep2.normalization_residual(&fl1) - rep2.normalization_residual(&fl0);
    rec.at_most("2d fluid: normalization growth per unit time", growth, 1e-6);
    Ok(())
}

fn equivalence(rec: &mut Recorder, corpus: &mut Corpus) -> Result<()> {
    let (_, rep) = solvers(1, 64, 2.0)?;
    let constant = rep.constant_state(&[0.3], 1.0)?;
    let mut worst = 0.0f64;
    for c in [1.0, 10.0] {
        let e = to_euler(&rep, &constant, c)?;
        let (rj, rr) = identity_residuals(&rep, &constant, &e);
        worst = worst.max(rj).max(rr);
    }
    rec.at_most("constant state: Euler identities", worst, 1e-10);

    let (mut worst, mut norm, mut order) = (0.0f64, 0.0f64, 0usize);
    for k in 0..8 {
        let (_, rep) = solvers(1, 64, GAMMAS[k % 4])?;
        let fl = corpus.fluid_state(&rep, 1.0)?;
        let rho = rep.density(&fl);
        for c in [1.0, 3.0, 100.0] {
            let e = to_euler(&rep, &fl, c)?;
            let (rj, rr) = identity_residuals(&rep, &fl, &e);
            worst = worst.max(rj).max(rr);
            let ok = e.p.iter().all(|&p| p >= 0.0) && e.mu.iter().zip(&rho).all(|(m, r)| m >= r);
            order += usize::from(!ok);
        }
        norm = norm.max(unit_normalization_residual(&to_euler(&rep, &fl, 1.0)?, &rho, crate::RHO_FLOOR));
    }
    rec.at_most("random fluids: Euler identities", worst, 1e-10);
    rec.at_most("random fluids: u^a u_a = -1 at c = 1", norm, 1e-10);
    rec.none_fail("random fluids: p >= 0 and mu >= rho", order, 24);

    let snapshots = |st0: &FluidState, dt: f64| -> Result<Vec<_>> {
        let mut st = st0.clone();
        let mut out = vec![to_euler(&rep, &st, 1.0)?];
        for _ in 0..4 {
            st = rep.step(&st, dt)?;
            out.push(to_euler(&rep, &st, 1.0)?);
        }
        Ok(out)
    };
    let r = euler_residual(&rep, &snapshots(&constant, 0.01)?, 0.01)?;
    rec.at_most("constant state: relativistic Euler residual", r.max(), 1e-10);
    let g = rep.grid().clone();
    let st = rep.state(vec![g.sample(|x| 0.2 * x[0].sin())], g.sample(|x| 1.0 + 0.2 * x[0].cos()))?;
    let dt = 0.5 * rep.dt_max(&st);
    let coarse = euler_residual(&rep, &snapshots(&st, dt)?, dt)?.max();
    let fine = euler_residual(&rep, &snapshots(&st, dt / 2.0)?, dt / 2.0)?.max();
    rec.at_least("smooth flow: Euler residual refinement ratio", coarse / fine, 8.0);

    let fl = corpus.fluid_state(&rep, 1.0)?;
    let sweep = nr_limit_sweep(&rep, &fl, &[10.0, 100.0, 1000.0])?;
    rec.at_most("c -> infinity: |slope - 1| of |Gamma - 1|", (sweep.gamma_fit.slope - 1.0).abs(), 0.05);
    rec.at_most("c -> infinity: |slope - 1| of |u - U|", (sweep.u_fit.slope - 1.0).abs(), 0.05);
    rec.at_most("c -> infinity: |slope - 1| of |mu - rho|", (sweep.mu_fit.slope - 1.0).abs(), 0.05);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn recorder_relations() {
        let mut r = Recorder { suite: Suite::Identities, checks: Vec::new() };
        r.at_most("a", 1.0, 2.0);
        r.at_least("b", 1.0, 2.0);
        r.at_most("nan", f64::NAN, 2.0);
        r.none_fail("c", 0, 5);
        let passed: Vec<bool> = r.checks.iter().map(|c| c.passed).collect();
        assert_eq!(passed, [true, false, false, true]);
    }

    #[test]
    fn equivalence_suite_passes() {
        let rep = verify(Suite::Equivalence, crate::corpus::DEFAULT_SEED);
        assert!(rep.passed, "{:#?}", rep.failures().collect::<Vec<_>>());
        let json = serde_json::to_value(&rep).unwrap();
        assert_eq!(json["suites"][0], "equivalence");
        assert_eq!(json["checks"][0]["relation"], "<=");
    }
}
