//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;

use kglab::config::ExperimentConfig;
use kglab::corpus::DEFAULT_SEED;
use kglab::euler::nr_limit_sweep;
use kglab::fit::fit_power_law;
use kglab::runner::{fit_rate, Experiment, RecordRow};
use kglab::verify::{bump_data, evolve_fluid, evolve_wave, verify, Check, Suite, DT_SAFETY};
use kglab::wkb::{close_eikonal, rep_initial_data, travelling_profile, wkb_residual, Phase};
use kglab::{Grid, KgSolver, Potential, RepSolver};

type Outcome = Result<(bool, String), String>;
/// Name, time budget in seconds, check.
type Criterion = (&'static str, f64, fn() -> Outcome);

fn grid(dim: usize, n: usize) -> Grid {
    Grid::uniform(dim, n, 2.0 * PI).unwrap()
}

fn rel_l2(g: &Grid, a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).norm()).collect();
    let r: Vec<f64> = b.iter().map(|y| y.norm()).collect();
    g.lp_norm(&d, 2.0).unwrap() / g.lp_norm(&r, 2.0).unwrap()
}

fn plane_wave_regression() -> Outcome {
    let kg = KgSolver::new(grid(1, 64), Potential::new(2.0).unwrap());
    let eps = 0.1;
    let st0 = kg.plane_wave(Complex64::new(1.0, 0.0), &[1.0], eps).map_err(|e| e.to_string())?;
    let omega = kg.dispersion_frequency(Complex64::new(1.0, 0.0), &[1.0]);
    let period = 2.0 * PI * eps / omega;
    let err = |steps: usize| -> Result<f64, String> {
        let mut st = st0.clone();
        for _ in 0..steps {
            st = kg.step(&st, period / steps as f64).map_err(|e| e.to_string())?;
        }
        Ok(rel_l2(kg.grid(), &st.phi, &st0.phi))
    };
    let (e1, e2, e3) = (err(32)?, err(64)?, err(128)?);
    let order = (e1 / e2).log2().min((e2 / e3).log2());
    Ok((
        (omega - 2.0).abs() < 1e-14 && e3 < 1e-6 && order >= 3.9,
        format!("omega = {omega}, error after one period {e3:.2e} (128 steps), order {order:.3}"),
    ))
}

fn conservation() -> Outcome {
    let kg = KgSolver::new(grid(1, 256), Potential::new(2.0).unwrap());
    let d = bump_data(kg.grid(), kg.potential()).map_err(|e| e.to_string())?;
    let mut worst: (f64, f64) = (0.0, 0.0);
    for eps in [0.1, 0.05, 0.025] {
        let (phi, phi_t) = kglab::wkb::kg_initial_data(kg.grid(), &d, eps).map_err(|e| e.to_string())?;
        let st0 = kg.state(phi, phi_t, eps).map_err(|e| e.to_string())?;
        let st1 = evolve_wave(&kg, &st0, 1.0, DT_SAFETY).map_err(|e| e.to_string())?;
        let (a, b) = (kg.diagnostics(&st0), kg.diagnostics(&st1));
        worst.0 = worst.0.max(((b.energy - a.energy) / a.energy).abs());
        worst.1 = worst.1.max(((b.charge - a.charge) / a.charge).abs());
    }
    Ok((
        worst.0 < 1e-6 && worst.1 < 1e-6,
        format!("max relative drift over unit time: energy {:.2e}, charge {:.2e}", worst.0, worst.1),
    ))
}

fn selected(checks: &[Check], keep: impl Fn(&Check) -> bool) -> Outcome {
    let picked: Vec<&Check> = checks.iter().filter(|c| keep(c)).collect();
    if picked.is_empty() {
        return Err("no checks selected".into());
    }
    let failed: Vec<String> = picked.iter().filter(|c| !c.passed).map(|c| format!("{} = {:e}", c.name, c.value)).collect();
    let detail = if failed.is_empty() {
        format!("{} checks passed", picked.len())
    } else {
        format!("failed: {}", failed.join("; "))
    };
    Ok((failed.is_empty(), detail))
}

fn identity_suites() -> Outcome {
    let mut checks = verify(Suite::Identities, DEFAULT_SEED).checks;
    checks.extend(verify(Suite::Equivalence, DEFAULT_SEED).checks);
    let (ok, detail) = selected(&checks, |c| c.suite == "identities" || c.name.contains("Euler identities"))?;
    let worst = |needle: &str| {
        checks.iter().filter(|c| c.name.contains(needle)).map(|c| c.value).fold(0.0, f64::max)
    };
    Ok((
        ok,
        format!(
            "{detail}; split {:.1e}, on-solution {:.1e}, decomposition {:.1e}, h00 {:.1e}/{:.1e}, Euler {:.1e}",
            worst("split identity").max(0.0),
            worst("on-solution identity with"),
            worst("stress decomposition"),
            worst("h00 as"),
            worst("h00 via"),
            worst("Euler identities"),
        ),
    ))
}

fn inequality_corpus() -> Outcome {
    let mut checks = verify(Suite::Inequalities, DEFAULT_SEED).checks;
    checks.extend(verify(Suite::Coercivity, DEFAULT_SEED).checks);
    selected(&checks, |c| c.name.contains("Theta") || c.name.starts_with("pointwise"))
}

fn normalization_propagation() -> Outcome {
    let pot = Potential::new(2.0).unwrap();
    let g1 = grid(1, 256);
    let rep = RepSolver::new(g1.clone(), pot);
    let d = bump_data(&g1, &pot).map_err(|e| e.to_string())?;
    let fl0 = rep.from_data(&rep_initial_data(&g1, &d)).map_err(|e| e.to_string())?;
    let fl1 = evolve_fluid(&rep, &fl0, 1.0).map_err(|e| e.to_string())?;
    let n1 = rep.normalization_residual(&fl1) - rep.normalization_residual(&fl0);

    let g2 = grid(2, 32);
    let rep2 = RepSolver::new(g2.clone(), pot);
    let a = g2.sample_complex(|x| Complex64::new(1.0 + 0.2 * x[0].cos() * x[1].cos(), 0.0));
    let v = Phase::periodic(g2.sample(|x| 0.3 * x[0].sin() + 0.2 * x[1].cos()), 2);
    let d2 = close_eikonal(&g2, &pot, a, None, v).map_err(|e| e.to_string())?;
    let fl0 = rep2.from_data(&rep_initial_data(&g2, &d2)).map_err(|e| e.to_string())?;
    let fl1 = evolve_fluid(&rep2, &fl0, 1.0).map_err(|e| e.to_string())?;
    let n2 = rep2.normalization_residual(&fl1) - rep2.normalization_residual(&fl0);
    let curl = rep2.curl(&fl1) - rep2.curl(&fl0);
    let growth = n1.max(n2);
    Ok((
        growth < 1e-6 && curl < 1e-6,
        format!("normalization growth per unit time {growth:.2e} (1d {n1:.1e}, 2d {n2:.1e}), curl growth {curl:.2e}"),
    ))
}

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn matched_pair() -> Outcome {
    let cfg = config(
        r#"{
        "grid": {"dim": 1, "n": 128, "length": 6.283185307179586},
        "gamma": 2.0,
        "eps_list": [0.1, 0.05, 0.025],
        "initial": {"kind": "plane_wave", "amplitude": [1.0, 0.0], "k": [1.0]},
        "t_end": 1.0,
        "samples": 11
    }"#,
    );
    let records = Experiment::new(cfg).map_err(|e| e.to_string())?.run();
    let rows: Vec<&RecordRow> = records.iter().flat_map(|r| &r.rows).collect();
    let aborted = rows.iter().any(|r| r.aborted);
    let worst = rows.iter().map(|r| r.h.abs()).fold(0.0, f64::max);
    Ok((!aborted && worst <= 1e-10, format!("max |H| over {} samples: {worst:.2e}", rows.len())))
}

fn rate_reproduction() -> Outcome {
    let cfg = config(
        r#"{
        "grid": {"dim": 1, "n": 256, "length": 6.283185307179586},
        "gamma": 2.0,
        "eps_list": [0.1, 0.05, 0.025],
        "initial": {
            "kind": "wkb",
            "a": {"mean": 1.0, "bumps": [{"center": [3.141592653589793], "kappa": 1.0, "height": 0.3}]},
            "v": {"slope": [0.0]}
        },
        "t_end": 0.5,
        "samples": 6
    }"#,
    );
    let records = Experiment::new(cfg).map_err(|e| e.to_string())?.run();
    if let Some(r) = records.iter().find(|r| r.aborted()) {
        return Ok((false, format!("eps = {} aborted: {:?}", r.eps, r.meta.abort_reason)));
    }
    let rows: Vec<RecordRow> = records.iter().flat_map(|r| r.rows.iter().copied()).collect();
    let h = fit_rate(&rows, "H", 0.5).map_err(|e| e.to_string())?;
    let n3 = fit_rate(&rows, "n3", 0.5).map_err(|e| e.to_string())?;
    Ok((
        h.slope >= 1.8 && n3.slope >= 0.9,
        format!("slope of H {:.4} (r2 {:.5}), slope of |rho^eps - rho|_gamma {:.4} (r2 {:.5})", h.slope, h.r2, n3.slope, n3.r2),
    ))
}

fn wkb_residual_scaling() -> Outcome {
    let (g, p) = (grid(1, 128), Potential::new(2.0).unwrap());
    let ladder = [0.1, 0.05, 0.025];
    let mut slopes = Vec::new();
    for (k, m) in [(1.0, 1.0), (2.0, 3.0), (0.0, 2.0)] {
        let prof = travelling_profile(&g, &p, 1.0, k, m, 0.3);
        let res: Vec<f64> = ladder
            .iter()
            .map(|&e| wkb_residual(&g, &p, &prof, e, 1e-10).map(|r| r.residual))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        slopes.push(fit_power_law(&ladder, &res).map_err(|e| e.to_string())?.slope);
    }
    let ok = slopes.iter().all(|s| (s - 2.0).abs() <= 0.1);
    Ok((ok, format!("slopes {slopes:.4?}")))
}

fn nr_limit() -> Outcome {
    let pot = Potential::new(2.0).unwrap();
    let g = grid(1, 256);
    let rep = RepSolver::new(g.clone(), pot);
    let d = bump_data(&g, &pot).map_err(|e| e.to_string())?;
    let fl0 = rep.from_data(&rep_initial_data(&g, &d)).map_err(|e| e.to_string())?;
    // A moving fluid so that the velocity deviation is not trivially zero.
    let fl = evolve_fluid(&rep, &fl0, 0.5).map_err(|e| e.to_string())?;
    let s = nr_limit_sweep(&rep, &fl, &[10.0, 100.0, 1000.0]).map_err(|e| e.to_string())?;
    let slopes = [s.gamma_fit.slope, s.u_fit.slope, s.mu_fit.slope];
    Ok((slopes.iter().all(|x| (x - 1.0).abs() <= 0.05), format!("slopes |Gamma-1|, |u-U|, |mu-rho|: {slopes:.4?}")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("plane-wave regression", 10.0, plane_wave_regression),
        ("energy and charge conservation", f64::INFINITY, conservation),
        ("algebraic identity suites", f64::INFINITY, identity_suites),
        ("inequality corpus", 30.0, inequality_corpus),
        ("normalization propagation", f64::INFINITY, normalization_propagation),
        ("matched-pair zero", f64::INFINITY, matched_pair),
        ("semiclassical rate", 900.0, rate_reproduction),
        ("WKB residual scaling", 60.0, wkb_residual_scaling),
        ("non-relativistic limit scaling", 1.0, nr_limit),
    ];
    let mut all = true;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, d)) if secs <= *budget => (ok, d),
            Ok((_, d)) => (false, format!("{d}; over the {budget} s budget")),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!("{} {}. {name}: {detail} [{secs:.2} s]", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    if all {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
